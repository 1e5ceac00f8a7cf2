//! Maps Φ with their sampled diffeomorphism checks.

use density_lab::funcmodel::{make_phi, PhiSpec};
use density_lab::numerics::Domain;

fn main() {
    let line = Domain::real_line();
    let specs = [
        PhiSpec::Identity,
        PhiSpec::Affine { a: -2.0, b: 1.0 },
        PhiSpec::Sinh,
        PhiSpec::Cubic,
        PhiSpec::Custom {
            components: vec!["x^2".into()],
            inverse: None,
        },
    ];
    for spec in &specs {
        match make_phi(spec, &line) {
            Ok(phi) => println!("{:<10} ok, Φ(1.5) = {:?}, check {:?}", phi.name(), phi.eval(&[1.5]), phi.sample_check()),
            Err(e) => println!("{spec:?} rejected: {e}"),
        }
    }
}
