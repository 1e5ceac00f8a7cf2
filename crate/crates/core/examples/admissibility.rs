//! The Laguerre weight passes the exponential-moment test for p < -2/α and
//! fails at the origin beyond it.

use density_lab::families::{check_thm31, DEFAULT_DEGREE_PROBE};
use density_lab::funcmodel::{make_phi, preset_weight, PhiSpec, WeightPreset};
use density_lab::numerics::{Domain, MeasureSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::half_line();
    let f0 = preset_weight(&WeightPreset::Laguerre { alpha: -0.5 })?;
    let phi = make_phi(&PhiSpec::Identity, &domain)?;
    for p in [1.0, 2.0, 3.5, 4.0, 6.0] {
        let v = check_thm31(&f0, &phi, p, &domain, &MeasureSpec::lebesgue(), &[0.1, 0.2, 0.45, 1.0], DEFAULT_DEGREE_PROBE);
        let first = v.failures.iter().find(|f| !f.location.is_empty());
        println!(
            "p = {p:<4} pass {:<5} certified eps {:<5} first failure {}",
            v.pass,
            v.epsilon,
            first.map_or("-".to_string(), |f| format!("{:?} at {}", f.condition, f.location))
        );
    }
    Ok(())
}
