//! Running a preset experiment through the library API and writing its
//! outputs. Pass a preset name and optional `key=value` overrides.

use density_lab::experiment::{preset_config, run_experiment, write_outputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "laguerre_threshold".into());
    let params: Vec<(String, String)> = args
        .filter_map(|a| a.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect();
    let cfg = preset_config(&name, &params)?;
    let (report, timings) = run_experiment(&cfg)?;
    let dir = std::env::temp_dir().join("density-lab").join(&name);
    write_outputs(&report, &timings, &dir)?;
    for c in &report.criteria {
        println!("{:<5} {:?} -> {}", if c.pass { "pass" } else { "FAIL" }, c.criterion, c.observed);
    }
    println!("outputs in {} ({:.2} s)", dir.display(), timings.total);
    Ok(())
}
