//! A capped Schwartz seminorm panel written as CSV.

use density_lab::funcmodel::ScalarField;
use density_lab::spaces::{make_space, seminorm_panel, write_panel_csv, SpaceParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = make_space(SpaceParams::schwartz(1, 2, 2))?;
    let f = ScalarField::parse("exp(-x^2)*(1+x)")?;
    let panel = seminorm_panel(&space, &f)?;
    write_panel_csv(&panel, std::io::stdout())?;
    Ok(())
}
