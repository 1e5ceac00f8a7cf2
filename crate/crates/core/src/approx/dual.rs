//! Continuous linear functionals and the search for one that annihilates a
//! family without vanishing on the whole space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::decay::{DecayClass, DecayTable};
use super::{error_decay, ApproxError, ProjectionOptions};
use crate::families::monomial_family;
use crate::funcmodel::{ComplexField, MapPhi, ScalarField};
use crate::numerics::{
    build_quadrature_with, integrate_fn, Domain, IntegralEstimate, MeasureSpec, QuadratureRule,
    RuleOptions,
};
use crate::spaces::{multi_indices, SpaceKind, SpaceSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DualFunctional {
    /// `f ↦ ∫ g f dμ`.
    Integrate { g: ScalarField },
    /// `f ↦ D^α f(x₀)`.
    PointDerivative { x0: Vec<f64>, alpha: Vec<usize> },
    /// `f ↦ Σ c_i T_i(f)`.
    Combination { terms: Vec<(f64, DualFunctional)> },
}

/// `T(f)`. Integrals use `rule` and `measure`; point functionals ignore them.
pub fn apply_dual(
    t: &DualFunctional,
    f: &ComplexField,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<IntegralEstimate<Complex64>, ApproxError> {
    match t {
        DualFunctional::Integrate { g } => {
            let re = integrate_fn(|x| g.eval(x) * f.re.eval(x), rule, measure)?;
            let im = match &f.im {
                Some(v) => integrate_fn(|x| g.eval(x) * v.eval(x), rule, measure)?,
                None => IntegralEstimate {
                    value: 0.0,
                    error_estimate: 0.0,
                },
            };
            Ok(IntegralEstimate {
                value: Complex64::new(re.value, im.value),
                error_estimate: re.error_estimate + im.error_estimate,
            })
        }
        DualFunctional::PointDerivative { x0, alpha } => Ok(IntegralEstimate {
            value: f.derivative_at(alpha, x0)?,
            error_estimate: 0.0,
        }),
        DualFunctional::Combination { terms } => {
            let mut value = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            for (c, term) in terms {
                let v = apply_dual(term, f, rule, measure)?;
                value += v.value * c;
                err += c.abs() * v.error_estimate;
            }
            Ok(IntegralEstimate {
                value,
                error_estimate: err,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityOutcome {
    ObstructionFound,
    DenseConsistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// `max_β |T(Φ^β f₀)|`.
    pub max_annihilation: f64,
    /// Integration tolerance the annihilation is judged against.
    pub tolerance: f64,
    /// `|T(t)|` for the separating target.
    pub separation: f64,
    pub separating_target: String,
    pub probe_degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityVerdict {
    pub outcome: DensityOutcome,
    pub witness: Option<DualFunctional>,
    pub check: Option<WitnessCheck>,
    /// Library targets with their error tables, when no witness was found.
    pub decay: Vec<(String, DecayTable)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessOptions {
    /// Samples per axis when searching for zeros of `f₀`.
    pub samples: usize,
    /// Unbounded axes are searched on `[-radius, radius]`.
    pub radius: f64,
    /// Shortest zero run of `f₀` accepted for an `L_p` witness.
    pub min_gap: f64,
    /// Floor for the annihilation tolerance.
    pub tolerance: f64,
    /// Degrees `D` of the monomial families used as decay evidence.
    pub decay_degrees: Vec<usize>,
    /// Library targets that must decay for a dense-consistent verdict.
    pub required_decaying: usize,
    pub projection: ProjectionOptions,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            samples: 20001,
            radius: 20.0,
            min_gap: 1e-3,
            tolerance: 1e-10,
            decay_degrees: vec![4, 9, 19],
            required_decaying: 3,
            projection: ProjectionOptions::default(),
        }
    }
}

/// Search window on the first axis, with flags for ends that cut an
/// infinite axis.
struct Window {
    lo: f64,
    hi: f64,
    cut_lo: bool,
    cut_hi: bool,
}

fn search_axis(domain: &Domain, radius: f64) -> Window {
    let (a, b) = domain.axis(0);
    Window {
        lo: a.max(-radius),
        hi: b.min(radius),
        cut_lo: a.is_infinite(),
        cut_hi: b.is_infinite(),
    }
}

/// Interior samples of `f₀` on the window. Zeros reaching a cut end are
/// replaced by NaN: sampling cannot tell a tail that underflows from one
/// that vanishes, and only the former is common.
fn masked_samples(f0: &ScalarField, w: &Window, samples: usize) -> Vec<(f64, f64)> {
    let h = (w.hi - w.lo) / (samples - 1) as f64;
    let mut v: Vec<(f64, f64)> = (1..samples - 1)
        .map(|i| {
            let x = w.lo + h * i as f64;
            (x, f0.eval(&[x]))
        })
        .collect();
    if w.cut_lo {
        for s in v.iter_mut().take_while(|s| s.1 == 0.0) {
            s.1 = f64::NAN;
        }
    }
    if w.cut_hi {
        for s in v.iter_mut().rev().take_while(|s| s.1 == 0.0) {
            s.1 = f64::NAN;
        }
    }
    v
}

/// Longest run of sampled exact zeros of `f₀`, as `[first, last]` sample.
fn longest_zero_run(f0: &ScalarField, w: &Window, samples: usize) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<f64> = None;
    for (x, v) in masked_samples(f0, w, samples) {
        if v == 0.0 {
            let s = *start.get_or_insert(x);
            if best.is_none_or(|(a, b)| x - s > b - a) {
                best = Some((s, x));
            }
        } else {
            start = None;
        }
    }
    best
}

/// A point of `U` where `f₀` vanishes: an exact sampled zero, or a sign
/// change refined by bisection.
fn find_zero(f0: &ScalarField, w: &Window, samples: usize) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for (x, v) in masked_samples(f0, w, samples) {
        if v == 0.0 {
            return Some(x);
        }
        if let Some((px, pv)) = prev {
            if pv.signum() != v.signum() && v.is_finite() && pv.is_finite() {
                let (mut a, mut b, mut fa) = (px, x, pv);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = f0.eval(&[m]);
                    if fm == 0.0 {
                        return Some(m);
                    }
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                return Some(if f0.eval(&[a]).abs() <= f0.eval(&[b]).abs() { a } else { b });
            }
        }
        prev = Some((x, v));
    }
    None
}

/// `(s + |s|)/2`-style bump: `exp(-2/((1-s²)+|1-s²|))` with `s` mapping
/// `[a, b]` to `[-1, 1]`, exactly zero outside.
fn bump(a: f64, b: f64) -> ScalarField {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    ScalarField::parse(&format!(
        "exp(-2/((1-((x-({c}))/{r})^2)+abs(1-((x-({c}))/{r})^2)))"
    ))
    .expect("bump expression parses")
}

fn gaussian_at(x0: &[f64], width: f64) -> ScalarField {
    let terms: Vec<String> = x0
        .iter()
        .enumerate()
        .map(|(i, c)| format!("((x{}-({c}))/{width})^2", i + 1))
        .collect();
    ScalarField::parse(&format!("exp(-({}))", terms.join("+"))).expect("gaussian parses")
}

fn monomials(phi: &MapPhi, f0: &ScalarField, degree: usize) -> Vec<ComplexField> {
    monomial_family(phi, f0, degree).members().to_vec()
}

fn lp_witness(
    space: &SpaceSpec,
    f0: &ScalarField,
    phi: &MapPhi,
    probe_degree: usize,
    opts: &WitnessOptions,
) -> Result<Option<(DualFunctional, WitnessCheck)>, ApproxError> {
    let window = search_axis(space.domain(), opts.radius);
    let Some((a, b)) = longest_zero_run(f0, &window, opts.samples) else {
        return Ok(None);
    };
    if b - a < opts.min_gap {
        return Ok(None);
    }
    let trim = 0.1 * (b - a);
    let (a, b) = (a + trim, b - trim);
    let g = bump(a, b);
    let rule = build_quadrature_with(&Domain::interval(a, b)?, &RuleOptions::composite(24))?;
    let t = DualFunctional::Integrate { g };
    let mut worst: f64 = 0.0;
    let mut tol = opts.tolerance;
    for m in monomials(phi, f0, probe_degree) {
        let v = apply_dual(&t, &m, &rule, space.measure())?;
        worst = worst.max(v.value.norm());
        tol = tol.max(v.error_estimate);
    }
    let target = gaussian_at(&[0.5 * (a + b)], 0.25 * (b - a));
    let sep = apply_dual(&t, &ComplexField::real(target.clone()), &rule, space.measure())?;
    tol = tol.max(sep.error_estimate);
    Ok(Some((
        t,
        WitnessCheck {
            max_annihilation: worst,
            tolerance: tol,
            separation: sep.value.norm(),
            separating_target: target.to_string(),
            probe_degree,
        },
    )))
}

fn point_witness(
    space: &SpaceSpec,
    f0: &ScalarField,
    phi: &MapPhi,
    probe_degree: usize,
    opts: &WitnessOptions,
) -> Result<Option<(DualFunctional, WitnessCheck)>, ApproxError> {
    let window = search_axis(space.domain(), opts.radius);
    let Some(x0) = find_zero(f0, &window, opts.samples) else {
        return Ok(None);
    };
    let t = DualFunctional::PointDerivative {
        x0: vec![x0],
        alpha: vec![0],
    };
    let rule = space.rule(1);
    let mut worst: f64 = 0.0;
    for m in monomials(phi, f0, probe_degree) {
        worst = worst.max(apply_dual(&t, &m, rule, space.measure())?.value.norm());
    }
    let target = gaussian_at(&[x0], 1.0);
    let sep = apply_dual(&t, &ComplexField::real(target.clone()), rule, space.measure())?;
    Ok(Some((
        t,
        WitnessCheck {
            max_annihilation: worst,
            tolerance: opts.tolerance,
            separation: sep.value.norm(),
            separating_target: target.to_string(),
            probe_degree,
        },
    )))
}

/// Decaying targets used as evidence when no witness exists.
pub fn library_targets(domain: &Domain) -> Vec<ScalarField> {
    let exprs: &[&str] = match (domain.dim(), domain.axes()) {
        (1, [(a, b)]) if *a == 0.0 && b.is_infinite() => {
            &["x*exp(-x)", "exp(-2*x)", "exp(-x/2)/(1+x)"]
        }
        (1, _) => &["1/(1+x^2)", "exp(-(x-1)^2)", "sin(3*x)*exp(-x^2/4)"],
        _ => &[
            "1/(1+x1^2+x2^2)",
            "exp(-(x1-1)^2-x2^2)",
            "sin(3*x1)*exp(-(x1^2+x2^2)/4)",
        ],
    };
    exprs
        .iter()
        .map(|e| ScalarField::parse(e).expect("library target parses"))
        .collect()
}

/// Looks for a functional that kills every `Φ^β f₀` with `|β| ≤
/// probe_degree` and separates a target; failing that, collects decay
/// evidence from the library targets.
pub fn annihilator_witness(
    space: &SpaceSpec,
    f0: &ScalarField,
    phi: &MapPhi,
    probe_degree: usize,
    opts: &WitnessOptions,
) -> Result<DensityVerdict, ApproxError> {
    let mut notes = Vec::new();
    if space.domain().dim() == 1 {
        let found = match space.kind() {
            SpaceKind::Lp => lp_witness(space, f0, phi, probe_degree, opts)?,
            SpaceKind::Cm | SpaceKind::Schwartz => point_witness(space, f0, phi, probe_degree, opts)?,
        };
        if let Some((t, check)) = found {
            let bound = 10.0 * check.tolerance;
            if check.max_annihilation <= bound && check.separation > 10.0 * bound {
                return Ok(DensityVerdict {
                    outcome: DensityOutcome::ObstructionFound,
                    witness: Some(t),
                    check: Some(check),
                    decay: Vec::new(),
                    notes,
                });
            }
            notes.push(format!(
                "candidate witness rejected: annihilation {:.3e}, separation {:.3e}, tolerance {:.3e}",
                check.max_annihilation, check.separation, check.tolerance
            ));
        }
    } else {
        notes.push("witness search is one-dimensional only".into());
    }

    let k = space.caps().k_max;
    let dim = space.domain().dim();
    let mut decay = Vec::new();
    let mut decaying = 0;
    for target in library_targets(space.domain()) {
        let sizes: Vec<usize> = opts
            .decay_degrees
            .iter()
            .map(|&d| multi_indices(dim, d).len())
            .collect();
        let degrees = opts.decay_degrees.clone();
        let build = move |s: usize| -> Result<_, ApproxError> {
            let d = degrees
                .iter()
                .copied()
                .find(|&d| multi_indices(dim, d).len() == s)
                .unwrap_or(0);
            Ok(monomial_family(phi, f0, d))
        };
        let t = ComplexField::real(target.clone());
        match error_decay(&t, &sizes, &build, space, k, &opts.projection) {
            Ok(table) => {
                if table.class == DecayClass::Decaying {
                    decaying += 1;
                }
                decay.push((target.to_string(), table));
            }
            Err(e) => notes.push(format!("decay for {target} failed: {e}")),
        }
    }
    let outcome = if decaying >= opts.required_decaying {
        DensityOutcome::DenseConsistent
    } else {
        DensityOutcome::Inconclusive
    };
    Ok(DensityVerdict {
        outcome,
        witness: None,
        check: None,
        decay,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{make_phi, preset_weight, PhiSpec, WeightPreset};
    use crate::numerics::{build_quadrature, QuadratureKind, TailSpec};

    #[test]
    fn bump_vanishes_outside_and_is_positive_inside() {
        let g = bump(1.0, 3.0);
        assert_eq!(g.eval(&[0.999]), 0.0);
        assert_eq!(g.eval(&[3.0]), 0.0);
        assert!((g.eval(&[2.0]) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn point_functional_reads_derivatives() {
        let f = ComplexField::real(ScalarField::parse("sin(x)").unwrap());
        let rule = build_quadrature(
            &Domain::interval(0.0, 1.0).unwrap(),
            QuadratureKind::GaussLegendreComposite,
            8,
            TailSpec::default(),
        )
        .unwrap();
        let t = DualFunctional::Combination {
            terms: vec![
                (
                    2.0,
                    DualFunctional::PointDerivative {
                        x0: vec![0.0],
                        alpha: vec![1],
                    },
                ),
                (
                    1.0,
                    DualFunctional::Integrate {
                        g: ScalarField::constant(1.0),
                    },
                ),
            ],
        };
        let v = apply_dual(&t, &f, &rule, &MeasureSpec::lebesgue()).unwrap();
        assert!((v.value.re - (2.0 + 1.0 - 1f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn gap_weight_yields_lp_obstruction() {
        let domain = Domain::real_line();
        let space = crate::spaces::make_space(crate::spaces::SpaceParams::lp(
            domain.clone(),
            MeasureSpec::lebesgue(),
            2.0,
        ))
        .unwrap();
        let f0 = preset_weight(&WeightPreset::GaussianGap { a: 0.0, b: 1.0 }).unwrap();
        let phi = make_phi(&PhiSpec::Identity, &domain).unwrap();
        let v = annihilator_witness(&space, &f0, &phi, 20, &WitnessOptions::default()).unwrap();
        assert_eq!(v.outcome, DensityOutcome::ObstructionFound);
        let c = v.check.unwrap();
        assert!(c.max_annihilation < 1e-10 && c.separation > 1e-3);
    }
}
