//! Uniform fits in C^1 on an exhaustion of (-1, 1) by Lawson's algorithm.

use density_lab::approx::{project_sup, ProjectionOptions};
use density_lab::families::monomial_family;
use density_lab::funcmodel::{make_phi, ComplexField, PhiSpec, ScalarField};
use density_lab::numerics::{Domain, Exhaustion};
use density_lab::spaces::{make_space, SpaceParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::interval(-1.0, 1.0)?.with_exhaustion(Exhaustion::Inset { scale: 0.5, radius: 1.0 });
    let space = make_space(SpaceParams::cm(domain.clone(), 1, 2))?;
    let phi = make_phi(&PhiSpec::Identity, &domain)?;
    let one = ScalarField::constant(1.0);
    let target = ComplexField::real(ScalarField::parse("exp(x)*sin(x)")?);
    for d in [2, 4, 8] {
        let r = project_sup(&target, &monomial_family(&phi, &one, d), &space, 2, &ProjectionOptions::default())?;
        let blocks: Vec<String> = r.blocks.iter().map(|b| format!("alpha {:?}: {:.2e}", b.alpha, b.error)).collect();
        println!("degree {d}: error {:.3e} ({}) after {} iterations", r.error, blocks.join(", "), r.iterations);
    }
    Ok(())
}
