//! Best Lp approximations by IRLS for several exponents.

use density_lab::approx::{project_lp, ProjectionOptions};
use density_lab::families::monomial_family;
use density_lab::funcmodel::{make_phi, preset_weight, ComplexField, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{build_quadrature_with, Domain, MeasureSpec, RuleOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::real_line();
    let rule = build_quadrature_with(&domain, &RuleOptions::composite(24))?;
    let phi = make_phi(&PhiSpec::Identity, &domain)?;
    let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 })?;
    let fam = monomial_family(&phi, &f0, 10);
    let target = ComplexField::real(ScalarField::parse("exp(-abs(x))")?);
    for p in [1.0, 1.5, 2.0, 3.0, 6.0] {
        let r = project_lp(&target, &fam, p, &rule, &MeasureSpec::lebesgue(), &ProjectionOptions::default())?;
        println!("p = {p:<4} error {:.6e} iterations {:>3} converged {}", r.error, r.iterations, r.converged);
    }
    Ok(())
}
