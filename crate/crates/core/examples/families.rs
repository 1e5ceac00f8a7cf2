//! The four family generators and a look at their members.

use density_lab::families::{
    exponential_family, gap_family, monomial_family, shift_grid, symmetric_frequencies,
    translate_family,
};
use density_lab::funcmodel::{make_phi, preset_weight, PhiSpec, WeightPreset};
use density_lab::numerics::Domain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi = make_phi(&PhiSpec::Sinh, &Domain::real_line())?;
    let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 })?;
    let x = [0.4];
    let fams = [
        monomial_family(&phi, &f0, 4),
        exponential_family(&phi, &f0, &symmetric_frequencies(2, 0.5), 1.0)?,
        gap_family(3, 2, 12)?,
        translate_family(&preset_weight(&WeightPreset::GaussianNd { dim: 1 })?, &shift_grid(-2.0, 2.0, 1.0)),
    ];
    for fam in &fams {
        let vals: Vec<String> = (0..fam.len()).map(|i| format!("{:.3}", fam.eval_member(i, &x))).collect();
        println!("{:?} ({} members) at x = 0.4: {}", fam.kind(), fam.len(), vals.join(" "));
    }
    Ok(())
}
