use serde::{Deserialize, Serialize};

use super::expr::{BinOp, Expr, Func};
use super::field::ScalarField;
use super::FuncModelError;
use crate::numerics::Domain;

/// Samples used by the diffeomorphism check (per axis in 1-D, total in 2-D).
pub const SAMPLE_COUNT: usize = 10_000;
/// Infinite axis ends are sampled up to this radius.
pub const SAMPLE_RADIUS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum PhiSpec {
    Identity,
    Affine {
        a: f64,
        b: f64,
    },
    Sinh,
    /// `x + x³` per component.
    Cubic,
    Custom {
        components: Vec<String>,
        #[serde(default)]
        inverse: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleCheck {
    /// 1-D: strict monotonicity on ordered samples.
    Monotone { samples: usize, increasing: bool },
    /// 2-D: Jacobian determinant of constant sign.
    JacobianSign { samples: usize, positive: bool },
}

/// A smooth map `Φ: U → R^n`, sample-checked to be a diffeomorphism.
#[derive(Debug, Clone)]
pub struct MapPhi {
    components: Vec<ScalarField>,
    inverse: Option<Vec<ScalarField>>,
    check: SampleCheck,
    identity: bool,
    name: String,
}

impl MapPhi {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn inverse(&self) -> Option<&[ScalarField]> {
        self.inverse.as_deref()
    }

    pub fn sample_check(&self) -> &SampleCheck {
        &self.check
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.eval(x).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn component_exprs(
    spec: &PhiSpec,
    dim: usize,
) -> Result<(Vec<ScalarField>, Option<Vec<ScalarField>>), FuncModelError> {
    let var = |i: usize| ScalarField::coordinate(i);
    let per_axis =
        |f: &dyn Fn(ScalarField) -> ScalarField| (0..dim).map(|i| f(var(i))).collect::<Vec<_>>();
    Ok(match spec {
        PhiSpec::Identity => (per_axis(&|x| x), Some(per_axis(&|y| y))),
        PhiSpec::Affine { a, b } => {
            if *a == 0.0 {
                return Err(FuncModelError::InvalidParameter(
                    "affine map needs a ≠ 0".into(),
                ));
            }
            let fwd = per_axis(&|x| x.scale(*a).add(&ScalarField::constant(*b)));
            let inv = per_axis(&|y| y.sub(&ScalarField::constant(*b)).scale(1.0 / a));
            (fwd, Some(inv))
        }
        PhiSpec::Sinh => {
            let fwd = per_axis(&|x| x.apply(Func::Sinh));
            // asinh(y) = log(y + sqrt(y^2 + 1))
            let inv = per_axis(&|y| {
                let r = ScalarField::from_expr(Expr::binary(
                    BinOp::Add,
                    y.powi(2).expr().clone(),
                    Expr::constant(1.0),
                ))
                .apply(Func::Sqrt);
                y.add(&r).apply(Func::Log)
            });
            (fwd, Some(inv))
        }
        PhiSpec::Cubic => (per_axis(&|x| x.add(&x.powi(3))), None),
        PhiSpec::Custom {
            components,
            inverse,
        } => {
            if components.len() != dim {
                return Err(FuncModelError::DimensionMismatch {
                    expected: dim,
                    got: components.len(),
                });
            }
            let fwd = components
                .iter()
                .map(|c| ScalarField::parse(c))
                .collect::<Result<Vec<_>, _>>()?;
            let inv = inverse
                .as_ref()
                .map(|v| {
                    v.iter()
                        .map(|c| ScalarField::parse(c))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            (fwd, inv)
        }
    })
}

fn sample_axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let lo = if lo.is_finite() { lo } else { -SAMPLE_RADIUS };
    let hi = if hi.is_finite() { hi } else { SAMPLE_RADIUS };
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect()
}

/// Build `Φ` from a preset or custom components and run the sample check.
pub fn make_phi(spec: &PhiSpec, domain: &Domain) -> Result<MapPhi, FuncModelError> {
    let dim = domain.dim();
    let (components, inverse) = component_exprs(spec, dim)?;
    if let Some(bad) = components.iter().find(|c| !c.is_smooth()) {
        return Err(FuncModelError::NotSmooth(bad.to_string()));
    }
    let check = match dim {
        1 => {
            let (lo, hi) = domain.axis(0);
            let xs = sample_axis(lo, hi, SAMPLE_COUNT);
            let vals: Vec<f64> = xs.iter().map(|&x| components[0].eval(&[x])).collect();
            if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
                return Err(FuncModelError::NonFinite { point: vec![xs[i]] });
            }
            let increasing = vals[1] > vals[0];
            for i in 0..vals.len() - 1 {
                let step = vals[i + 1] - vals[i];
                if (increasing && step <= 0.0) || (!increasing && step >= 0.0) {
                    // prefer a mirrored pair when the samples are symmetric
                    let j = xs.len() - 1 - i;
                    let (a, b) = if (xs[i] + xs[j]).abs() < 1e-9 && vals[i] == vals[j] {
                        (xs[i], xs[j])
                    } else {
                        (xs[i], xs[i + 1])
                    };
                    return Err(FuncModelError::SampleCheckFailed {
                        first: vec![a],
                        second: vec![b],
                        reason: "map is not strictly monotone".into(),
                    });
                }
            }
            SampleCheck::Monotone {
                samples: SAMPLE_COUNT,
                increasing,
            }
        }
        2 => {
            let side = (SAMPLE_COUNT as f64).sqrt() as usize;
            let (a0, a1) = domain.axis(0);
            let (b0, b1) = domain.axis(1);
            let xs = sample_axis(a0, a1, side);
            let ys = sample_axis(b0, b1, side);
            let mut sign: Option<bool> = None;
            for &x in &xs {
                for &y in &ys {
                    let p = [x, y];
                    let j0 = components[0].jet(&p, 1)?;
                    let j1 = components[1].jet(&p, 1)?;
                    let det = j0.derivative(&[1, 0]) * j1.derivative(&[0, 1])
                        - j0.derivative(&[0, 1]) * j1.derivative(&[1, 0]);
                    let positive = det > 0.0;
                    if det == 0.0 || !det.is_finite() || sign.is_some_and(|s| s != positive) {
                        return Err(FuncModelError::SampleCheckFailed {
                            first: p.to_vec(),
                            second: p.to_vec(),
                            reason: format!("Jacobian determinant {det} changes sign or vanishes"),
                        });
                    }
                    sign = Some(positive);
                }
            }
            SampleCheck::JacobianSign {
                samples: side * side,
                positive: sign.unwrap_or(true),
            }
        }
        _ => return Err(FuncModelError::UnsupportedDimension(dim)),
    };
    let name = match spec {
        PhiSpec::Identity => "identity".to_string(),
        PhiSpec::Affine { a, b } => format!("affine({a},{b})"),
        PhiSpec::Sinh => "sinh".to_string(),
        PhiSpec::Cubic => "x+x^3".to_string(),
        PhiSpec::Custom { components, .. } => components.join(", "),
    };
    Ok(MapPhi {
        components,
        inverse,
        check,
        identity: matches!(spec, PhiSpec::Identity),
        name,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Domain {
        Domain::real_line()
    }

    #[test]
    fn identity_passes() {
        let phi = make_phi(&PhiSpec::Identity, &line()).unwrap();
        assert!(phi.is_identity());
        assert_eq!(phi.eval(&[3.5]), vec![3.5]);
        assert!(matches!(
            phi.sample_check(),
            SampleCheck::Monotone {
                increasing: true,
                ..
            }
        ));
    }

    #[test]
    fn cubic_passes() {
        let phi = make_phi(&PhiSpec::Cubic, &line()).unwrap();
        assert_eq!(phi.eval(&[2.0]), vec![10.0]);
    }

    #[test]
    fn square_is_rejected_with_mirrored_pair() {
        let spec = PhiSpec::Custom {
            components: vec!["x^2".into()],
            inverse: None,
        };
        match make_phi(&spec, &line()) {
            Err(FuncModelError::SampleCheckFailed { first, second, .. }) => {
                assert!((first[0] + second[0]).abs() < 1e-9, "{first:?} {second:?}");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn affine_needs_nonzero_slope() {
        assert!(make_phi(&PhiSpec::Affine { a: 0.0, b: 1.0 }, &line()).is_err());
        let phi = make_phi(&PhiSpec::Affine { a: -2.0, b: 1.0 }, &line()).unwrap();
        assert!(matches!(
            phi.sample_check(),
            SampleCheck::Monotone {
                increasing: false,
                ..
            }
        ));
        let inv = phi.inverse().unwrap();
        assert!((inv[0].eval(&phi.eval(&[0.7])) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sinh_inverse_round_trips() {
        let phi = make_phi(&PhiSpec::Sinh, &line()).unwrap();
        let inv = phi.inverse().unwrap();
        for &x in &[-3.0, -0.2, 0.0, 1.1, 4.0] {
            assert!((inv[0].eval(&phi.eval(&[x])) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn planar_maps() {
        let plane = Domain::whole_space(2);
        let phi = make_phi(&PhiSpec::Cubic, &plane).unwrap();
        assert!(matches!(
            phi.sample_check(),
            SampleCheck::JacobianSign { positive: true, .. }
        ));
        let fold = PhiSpec::Custom {
            components: vec!["x1^2".into(), "x2".into()],
            inverse: None,
        };
        assert!(make_phi(&fold, &plane).is_err());
    }
}
