//! A hand-written JSON config: polynomials in sinh(x) times e^{-x^2/2}.
//! No strip width is admissible here (e^{ε|sinh x|} beats the Gaussian), and
//! in the variable y = sinh x the weight has log-normal tails, so the errors
//! are expected to stall rather than decay.

use density_lab::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"{
  "schema_version": 1,
  "name": "sinh_gaussian",
  "space": { "kind": "lp", "domain": [[null, null]], "p": 2.0,
             "caps": { "k_max": 1, "n_max": 0, "alpha_max": 0 } },
  "weight": { "preset": "gaussian" },
  "phi": { "preset": "sinh" },
  "admissibility": { "eps_grid": [0.1, 0.5, 1.0] },
  "family": { "kind": "monomial", "degrees": [3, 6, 12] },
  "targets": ["exp(-(x-1)^2)", "1/(1+x^4)"],
  "criteria": [
    { "kind": "admissible", "expect": false },
    { "kind": "decay_class", "target": 0, "expect": "plateau" }
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    cfg.validate()?;
    let (report, _) = run_experiment(&cfg)?;
    for d in &report.decay {
        let errs: Vec<String> = d.table.rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
        println!("{}: {} ({:?})", d.target, errs.join(" "), d.table.class);
    }
    println!("all criteria pass: {}", report.all_pass);
    Ok(())
}
