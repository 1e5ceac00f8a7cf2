//! Expression fields, forward-mode derivatives, weight presets, maps `Φ`
//! and the complex exponentials `e^{∓i(λ,Φ(x))} f₀(x)`.

pub mod expr;
pub mod field;
pub mod jet;
pub mod phi;
pub mod presets;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{parse, BinOp, Expr, Func};
pub use field::{ComplexField, Derivative, ScalarField, Smoothness, DEFAULT_MAX_DERIVATIVE_ORDER};
pub use jet::Jet;
pub use phi::{make_phi, MapPhi, PhiSpec, SampleCheck};
pub use presets::{preset_weight, WeightPreset};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncModelError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("field is not smooth (contains abs/floor): {0}")]
    NotSmooth(String),
    #[error("derivative order {order} exceeds cap {cap}")]
    OrderTooHigh { order: usize, cap: usize },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("frequency {re:?}+i{im:?} lies outside the strip ‖Im λ‖ < {eps}")]
    OutsideStrip {
        re: Vec<f64>,
        im: Vec<f64>,
        eps: f64,
    },
    #[error("diffeomorphism sample check failed between {first:?} and {second:?}: {reason}")]
    SampleCheckFailed {
        first: Vec<f64>,
        second: Vec<f64>,
        reason: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported dimension {0} (only 1 and 2)")]
    UnsupportedDimension(usize),
}

/// `λ ∈ C^n` restricted to the strip `‖Im λ‖₂ < ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFrequency {
    re: Vec<f64>,
    im: Vec<f64>,
    eps: f64,
}

impl ComplexFrequency {
    pub fn new(re: Vec<f64>, im: Vec<f64>, eps: f64) -> Result<Self, FuncModelError> {
        if re.len() != im.len() {
            return Err(FuncModelError::DimensionMismatch {
                expected: re.len(),
                got: im.len(),
            });
        }
        let im_norm = im.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(eps > 0.0) || im_norm >= eps {
            return Err(FuncModelError::OutsideStrip { re, im, eps });
        }
        Ok(ComplexFrequency { re, im, eps })
    }

    /// A real frequency; valid in any strip.
    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        ComplexFrequency {
            re,
            im,
            eps: f64::INFINITY,
        }
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|&v| v == 0.0)
    }

    pub fn components(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect()
    }

    /// Bilinear pairing `(λ, y) = Σ λ_j y_j` with real `y`.
    pub fn pair(&self, y: &[f64]) -> Complex64 {
        let re: f64 = self.re.iter().zip(y).map(|(a, b)| a * b).sum();
        let im: f64 = self.im.iter().zip(y).map(|(a, b)| a * b).sum();
        Complex64::new(re, im)
    }

    pub fn negate(&self) -> Self {
        ComplexFrequency {
            re: self.re.iter().map(|v| -v).collect(),
            im: self.im.iter().map(|v| -v).collect(),
            eps: self.eps,
        }
    }

    pub fn add(&self, other: &ComplexFrequency) -> Result<Self, FuncModelError> {
        let eps = self.eps.min(other.eps);
        let re = self.re.iter().zip(&other.re).map(|(a, b)| a + b).collect();
        let im = self.im.iter().zip(&other.im).map(|(a, b)| a + b).collect();
        if eps.is_infinite() {
            return Ok(ComplexFrequency { re, im, eps });
        }
        ComplexFrequency::new(re, im, eps)
    }
}

/// `e^{-i(λ,Φ(x))} f₀(x)`.
pub fn eval_exponential(
    lambda: &ComplexFrequency,
    phi: &MapPhi,
    f0: &ScalarField,
    x: &[f64],
) -> Complex64 {
    let s = lambda.pair(&phi.eval(x));
    (Complex64::new(0.0, -1.0) * s).exp() * f0.eval(x)
}

/// The field `e^{σ i(λ,Φ)} f₀` for `σ = ±1`, split into real and imaginary parts.
pub fn exponential_field(
    lambda: &ComplexFrequency,
    phi: &MapPhi,
    f0: &ScalarField,
    sign: f64,
) -> ComplexField {
    let linear = |coef: &[f64]| -> Option<ScalarField> {
        let mut acc: Option<ScalarField> = None;
        for (c, comp) in coef.iter().zip(phi.components()) {
            if *c == 0.0 {
                continue;
            }
            let term = comp.scale(*c);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc
    };
    // e^{σi(A+iB)} = e^{-σB} (cos A + iσ sin A)
    let a = linear(lambda.re());
    let b = linear(lambda.im());
    let tilt = b.map(|b| b.scale(-sign).apply(Func::Exp));
    let weighted = match &tilt {
        Some(t) => t.mul(f0),
        None => f0.clone(),
    };
    match a {
        None => ComplexField::real(weighted),
        Some(a) => {
            let re = a.apply(Func::Cos).mul(&weighted);
            let im = a.apply(Func::Sin).mul(&weighted).scale(sign);
            ComplexField::new(re, im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Domain;

    fn identity() -> MapPhi {
        make_phi(&PhiSpec::Identity, &Domain::real_line()).unwrap()
    }

    #[test]
    fn zero_frequency_gives_weight() {
        let f0 = ScalarField::parse("exp(-x^2/2)").unwrap();
        let v = eval_exponential(&ComplexFrequency::real(vec![0.0]), &identity(), &f0, &[0.8]);
        assert_eq!(v, Complex64::new(f0.eval(&[0.8]), 0.0));
    }

    #[test]
    fn imaginary_frequency_is_real_tilt() {
        let eps = 0.6;
        let lambda = ComplexFrequency::new(vec![0.0], vec![eps / 2.0], eps).unwrap();
        let v = eval_exponential(&lambda, &identity(), &ScalarField::constant(1.0), &[1.0]);
        assert!((v.re - (eps / 2.0).exp()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn unit_frequency_at_origin() {
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let v = eval_exponential(&ComplexFrequency::real(vec![1.0]), &identity(), &f0, &[0.0]);
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn strip_is_enforced() {
        assert!(ComplexFrequency::new(vec![0.0], vec![0.5], 0.5).is_err());
        assert!(ComplexFrequency::new(vec![1.0, 2.0], vec![0.3, 0.3], 0.5).is_ok());
        assert!(ComplexFrequency::new(vec![1.0, 2.0], vec![0.4, 0.4], 0.5).is_err());
    }

    #[test]
    fn exponential_field_matches_direct_evaluation() {
        let f0 = ScalarField::parse("exp(-x^2/2)").unwrap();
        let phi = identity();
        let lambda = ComplexFrequency::new(vec![1.3], vec![-0.2], 1.0).unwrap();
        let minus = exponential_field(&lambda, &phi, &f0, -1.0);
        for &x in &[-2.0, -0.1, 0.0, 0.9, 3.0] {
            let want = eval_exponential(&lambda, &phi, &f0, &[x]);
            assert!((minus.eval(&[x]) - want).norm() < 1e-14);
        }
        let plus = exponential_field(&lambda, &phi, &f0, 1.0);
        let want = (Complex64::i() * Complex64::new(1.3, -0.2) * 0.7).exp() * f0.eval(&[0.7]);
        assert!((plus.eval(&[0.7]) - want).norm() < 1e-14);
    }
}
