//! Monomial against real-exponential spans at matched sizes, on a Gaussian
//! weight (both decay) and a weight vanishing on [0,1] (both plateau).

use density_lab::approx::ProjectionOptions;
use density_lab::funcmodel::{make_phi, preset_weight, ComplexField, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{Domain, MeasureSpec};
use density_lab::spaces::{make_space, SpaceParams};
use density_lab::verify::compare_closures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = Domain::real_line();
    let space = make_space(SpaceParams::lp(line.clone(), MeasureSpec::lebesgue(), 2.0))?;
    let phi = make_phi(&PhiSpec::Identity, &line)?;
    let target = ComplexField::real(ScalarField::parse("exp(-(x-1)^2)")?);
    for w in [WeightPreset::Gaussian { dim: 1 }, WeightPreset::GaussianGap { a: 0.0, b: 1.0 }] {
        let f0 = preset_weight(&w)?;
        let c = compare_closures(&target, &phi, &f0, &space, &[5, 9, 17, 33], 0.5, &ProjectionOptions::default())?;
        println!("{w:?}: {:?}, consistent {}", c.consistency, c.consistent);
        for ((m, e), p) in c.monomial.rows.iter().zip(&c.exponential.rows).zip(&c.pullback.rows) {
            println!("  n = {:>2}  monomial {:.3e}  exponential {:.3e}  pullback {:.3e}", m.size, m.error, e.error, p.error);
        }
    }
    Ok(())
}
