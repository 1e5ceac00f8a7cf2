//! Derivatives of λ ↦ ⟨T, e^{-iλΦ} f₀⟩ at 0, the weak integral of a
//! Gaussian, and the polynomial growth of seminorms in λ.

use std::sync::Arc;

use density_lab::approx::DualFunctional;
use density_lab::funcmodel::{make_phi, preset_weight, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{build_quadrature_with, Domain, MeasureSpec, RuleOptions};
use density_lab::spaces::{make_space, SpaceParams};
use density_lab::verify::{
    check_lemma212, check_lemma28, check_prop210, DiffMethod, FourierConvention, HolomorphicProbe,
    TransformSource,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = Domain::real_line();
    let phi = make_phi(&PhiSpec::Identity, &line)?;
    let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 })?;
    let rule = build_quadrature_with(&line, &RuleOptions::composite(24))?;

    let t = DualFunctional::Integrate { g: ScalarField::parse("exp(-(x-0.5)^2)")? };
    let probe = HolomorphicProbe::new(t, phi.clone(), f0.clone(), 1.0, rule, MeasureSpec::lebesgue());
    for a in 1..=3 {
        let r = check_prop210(&probe, &[a], DiffMethod::RichardsonFd, 3)?;
        println!("order {a} Richardson: rel err {:.2e}", r.relative_error);
    }
    let r = check_prop210(&probe, &[1], DiffMethod::ComplexStep, 3)?;
    println!("order 1 complex step: rel err {:.2e}", r.relative_error);

    let f = ScalarField::parse("exp(-x^2/2)")?;
    let grid: Vec<Vec<f64>> = (0..201).map(|i| vec![-6.0 + 0.06 * i as f64]).collect();
    let lam = Domain::interval(-12.0, 12.0)?;
    let source = TransformSource::ClosedForm(Arc::new(|xi: &[f64]| FourierConvention.gaussian(xi)));
    for order in [10, 20] {
        let rule = build_quadrature_with(&lam, &RuleOptions::composite(order).with_panels(8))?;
        let r = check_lemma212(&f, &phi, &f0, &rule, &grid, &source)?;
        println!("weak integral, order {order}: max residual {:.2e}", r.max_residual);
    }

    let space = make_space(SpaceParams::schwartz(1, 1, 1))?;
    let lambdas: Vec<Vec<f64>> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&l| vec![l]).collect();
    let g = check_lemma28(&phi, &f0, &lambdas, &space, 1, &[1], 1)?;
    println!("seminorm growth exponent {:.3} (bound {})", g.exponent, g.bound);
    Ok(())
}
