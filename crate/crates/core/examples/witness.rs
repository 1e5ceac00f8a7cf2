//! Annihilator witnesses: a bump on the zero interval of a weight in L2,
//! and δ₀ for a weight with a zero in C^1.

use density_lab::approx::{annihilator_witness, WitnessOptions};
use density_lab::funcmodel::{make_phi, preset_weight, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{Domain, Exhaustion, MeasureSpec};
use density_lab::spaces::{make_space, SpaceParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = Domain::real_line();
    let lp = make_space(SpaceParams::lp(line.clone(), MeasureSpec::lebesgue(), 2.0))?;
    let gap = preset_weight(&WeightPreset::GaussianGap { a: 0.0, b: 1.0 })?;
    let v = annihilator_witness(&lp, &gap, &make_phi(&PhiSpec::Identity, &line)?, 50, &WitnessOptions::default())?;
    println!("L2, weight vanishing on [0,1]: {:?}", v.outcome);
    println!("  {:?}", v.check);

    let interval = Domain::interval(-1.0, 1.0)?.with_exhaustion(Exhaustion::Inset { scale: 0.5, radius: 1.0 });
    let cm = make_space(SpaceParams::cm(interval.clone(), 1, 2))?;
    let f0 = ScalarField::parse("x*exp(-x^2)")?;
    let v = annihilator_witness(&cm, &f0, &make_phi(&PhiSpec::Identity, &interval)?, 50, &WitnessOptions::default())?;
    println!("C^1(-1,1), f0 = x exp(-x^2): {:?}", v.outcome);
    println!("  witness {}", serde_json::to_string(&v.witness)?);
    println!("  {:?}", v.check);
    Ok(())
}
