//! Parsing, symbolic derivatives and forward-mode jets.

use density_lab::funcmodel::ScalarField;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = ScalarField::parse("exp(-x^2/2)*sin(3*x)")?;
    let x = [0.7];
    let d2 = f.partial(&[2])?;
    let jet = f.jet(&x, 4)?;
    println!("f      = {f}");
    println!("f''    = {d2}");
    println!("f''(x) symbolic {:.15}", d2.eval(&x));
    println!("f''(x) jet      {:.15}", f.derivative(&[2])?.eval(&x)?);
    println!("jet coefficients at x = {}: {:?}", x[0], jet);

    let rough = ScalarField::parse("floor(x^2+2)")?;
    println!("{rough} smooth: {}; derivative: {:?}", rough.is_smooth(), rough.derivative(&[1]).err());
    Ok(())
}
