//! L2 error decay of 1/(1+x^2) onto Gaussian-weighted polynomials, with the
//! table written as CSV.

use density_lab::approx::{error_decay, ProjectionOptions};
use density_lab::families::monomial_family;
use density_lab::funcmodel::{make_phi, preset_weight, ComplexField, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{Domain, MeasureSpec};
use density_lab::spaces::{make_space, SpaceParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::real_line();
    let space = make_space(SpaceParams::lp(domain.clone(), MeasureSpec::lebesgue(), 2.0))?;
    let phi = make_phi(&PhiSpec::Identity, &domain)?;
    let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 })?;
    let target = ComplexField::real(ScalarField::parse("1/(1+x^2)")?);
    let table = error_decay(
        &target,
        &[5, 10, 20, 40],
        &|d| Ok(monomial_family(&phi, &f0, d)),
        &space,
        1,
        &ProjectionOptions::default(),
    )?;
    for r in &table.reports {
        println!(
            "members {:>3} route {:?} error {:.6e} pythagoras {:.6e}",
            r.size,
            r.route,
            r.error,
            r.error_pythagoras.unwrap_or(f64::NAN)
        );
    }
    println!("class {:?}, fitted log-slope {:.4}", table.class, table.fit.slope);
    table.write_csv(std::io::stdout())?;
    Ok(())
}
