use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AlgebraGenerators;
use crate::funcmodel::{exponential_field, ComplexFrequency, MapPhi, ScalarField};
use crate::numerics::{
    build_quadrature_with, integrate_fn, probe_log_integrand, Domain, MeasureSpec, ProbeMode,
    RuleOptions, ShellVerdict,
};
use crate::spaces::{multi_indices, SpaceSpec};

/// Monomial degree probed when none is given.
pub const DEFAULT_DEGREE_PROBE: usize = 12;

/// Products of generators used for the membership condition are capped at
/// this degree; the weighted-seminorm condition uses the full probe degree.
const MEMBERSHIP_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `‖e^{ε‖Φ‖} Φ^β f₀‖_p < ∞`.
    ExponentialMoment,
    /// `e^{i(λ,Φ)} g f₀` has a finite capped panel at strip frequencies.
    Membership,
    /// `‖χ_k e^{ε‖Φ‖} g ∇_N^α f₀‖_p < ∞`.
    WeightedSeminorm,
    /// Finite, but the quadrature error is not small against the value.
    QuadratureMargin,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub condition: Condition,
    pub epsilon: f64,
    /// Which probe failed (monomial degree, generator product, seminorm index).
    pub index: String,
    pub location: String,
    pub ratio: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub epsilon: f64,
    pub index: String,
    pub end: String,
    /// Last shell-mass ratio and the matching power decay per dyadic shell.
    pub ratio: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub pass: bool,
    /// Largest passing strip width (0 when nothing passes).
    pub epsilon: f64,
    pub passing: Vec<f64>,
    pub failures: Vec<Failure>,
    pub tail_fits: Vec<TailFit>,
}

fn ln_abs(v: f64) -> f64 {
    v.abs().ln()
}

fn default_rule(domain: &Domain) -> RuleOptions {
    RuleOptions::composite(20)
        .with_grading(40)
        .with_core(24.0, 0.5)
        .with_panels(if domain.is_bounded() { 8 } else { 1 })
}

struct ProbeOutcome {
    failures: Vec<Failure>,
    fits: Vec<TailFit>,
}

/// Probe `exp(log_h)` for integrability on `domain`, then check the
/// quadrature margin on `rule_opts`.
fn integral_probe(
    log_h: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: &Domain,
    rule_opts: &RuleOptions,
    condition: Condition,
    epsilon: f64,
    index: &str,
) -> ProbeOutcome {
    let mut out = ProbeOutcome {
        failures: Vec::new(),
        fits: Vec::new(),
    };
    for r in probe_log_integrand(log_h, domain, ProbeMode::Integral) {
        out.fits.push(TailFit {
            epsilon,
            index: index.to_string(),
            end: r.location(),
            ratio: r.ratio,
            decay: r.decay,
        });
        if r.verdict != ShellVerdict::Convergent {
            out.failures.push(Failure {
                condition,
                epsilon,
                index: index.to_string(),
                location: r.location(),
                ratio: r.ratio,
                detail: format!("{:?} shell march after {} shells", r.verdict, r.shells),
            });
        }
    }
    if !out.failures.is_empty() {
        return out;
    }
    let rule = match build_quadrature_with(domain, rule_opts) {
        Ok(r) => r,
        Err(e) => {
            out.failures.push(Failure {
                condition: Condition::Unsupported,
                epsilon,
                index: index.to_string(),
                location: String::new(),
                ratio: f64::NAN,
                detail: e.to_string(),
            });
            return out;
        }
    };
    match integrate_fn(|x| log_h(x).exp(), &rule, &MeasureSpec::lebesgue()) {
        Ok(est)
            if est.value.is_finite()
                && 10.0 * est.error_estimate <= est.value.abs().max(f64::MIN_POSITIVE) => {}
        Ok(est) if est.value == 0.0 && est.error_estimate == 0.0 => {}
        Ok(est) => out.failures.push(Failure {
            condition: Condition::QuadratureMargin,
            epsilon,
            index: index.to_string(),
            location: String::new(),
            ratio: f64::NAN,
            detail: format!(
                "value {:e} with error estimate {:e}",
                est.value, est.error_estimate
            ),
        }),
        Err(e) => out.failures.push(Failure {
            condition: Condition::QuadratureMargin,
            epsilon,
            index: index.to_string(),
            location: String::new(),
            ratio: f64::NAN,
            detail: e.to_string(),
        }),
    }
    out
}

/// Tests `‖e^{ε‖Φ‖} Φ^β f₀‖_{L_p(μ)} < ∞` for every `ε` of the grid and every
/// `|β| ≤ degree_probe` by dyadic-shell decay at each end of `U`, followed by
/// a quadrature-margin check of the value.
pub fn check_thm31(
    f0: &ScalarField,
    phi: &MapPhi,
    p: f64,
    domain: &Domain,
    measure: &MeasureSpec,
    eps_grid: &[f64],
    degree_probe: usize,
) -> AdmissibilityVerdict {
    let mut verdict = AdmissibilityVerdict {
        pass: false,
        epsilon: 0.0,
        passing: Vec::new(),
        failures: Vec::new(),
        tail_fits: Vec::new(),
    };
    if !(p >= 1.0 && p.is_finite()) {
        verdict.failures.push(Failure {
            condition: Condition::Unsupported,
            epsilon: 0.0,
            index: String::new(),
            location: String::new(),
            ratio: f64::NAN,
            detail: format!("exponent p = {p} is outside [1, ∞)"),
        });
        return verdict;
    }
    let betas = multi_indices(phi.dim(), degree_probe);
    let top = betas.last().cloned().unwrap_or_default();
    let rule_opts = default_rule(domain);
    let jobs: Vec<(f64, Vec<usize>)> = eps_grid
        .iter()
        .filter(|e| **e > 0.0)
        .flat_map(|&e| betas.iter().map(move |b| (e, b.clone())))
        .collect();
    let outcomes: Vec<(f64, Vec<usize>, ProbeOutcome)> = jobs
        .into_par_iter()
        .map(|(eps, beta)| {
            let log_h = |x: &[f64]| -> f64 {
                let phi_x = phi.eval(x);
                let norm = phi_x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut s = eps * norm + ln_abs(f0.eval(x));
                for (v, &b) in phi_x.iter().zip(&beta) {
                    if b > 0 {
                        s += b as f64 * ln_abs(*v);
                    }
                }
                let mut out = p * s;
                if measure.density().is_some() {
                    out += measure.weight_at(x).ln();
                }
                out
            };
            let label = format!("beta={beta:?}");
            let o = integral_probe(
                &log_h,
                domain,
                &rule_opts,
                Condition::ExponentialMoment,
                eps,
                &label,
            );
            (eps, beta, o)
        })
        .collect();
    let mut grid: Vec<f64> = eps_grid.iter().copied().filter(|e| *e > 0.0).collect();
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
    grid.dedup();
    for eps in grid {
        let mut ok = true;
        for (e, beta, o) in &outcomes {
            if *e != eps {
                continue;
            }
            if !o.failures.is_empty() {
                ok = false;
                verdict.failures.extend(o.failures.iter().cloned());
            }
            if *beta == top {
                verdict.tail_fits.extend(o.fits.iter().cloned());
            }
        }
        if ok {
            verdict.passing.push(eps);
        }
    }
    verdict.epsilon = verdict.passing.iter().copied().fold(0.0, f64::max);
    verdict.pass = verdict.epsilon > 0.0;
    verdict
}

/// Strip frequencies sampled for the membership condition: center, axes and
/// corners of the imaginary strip, at unit real part.
fn strip_samples(dim: usize, eps: f64) -> Vec<ComplexFrequency> {
    let r = 0.9 * eps;
    let re = vec![1.0; dim];
    let ims: Vec<Vec<f64>> = match dim {
        1 => (0..9)
            .map(|i| vec![-r + 2.0 * r * i as f64 / 8.0])
            .collect(),
        _ => {
            let c = r / 2f64.sqrt();
            vec![
                vec![0.0, 0.0],
                vec![r, 0.0],
                vec![-r, 0.0],
                vec![0.0, r],
                vec![0.0, -r],
                vec![c, c],
                vec![c, -c],
                vec![-c, c],
                vec![-c, -c],
            ]
        }
    };
    ims.into_iter()
        .map(|im| ComplexFrequency::new(re.clone(), im, eps).expect("inside strip"))
        .collect()
}

fn failure(
    condition: Condition,
    eps: f64,
    index: String,
    location: String,
    detail: String,
) -> Failure {
    Failure {
        condition,
        epsilon: eps,
        index,
        location,
        ratio: f64::NAN,
        detail,
    }
}

/// Checks both conditions of the admissibility assumption in the given space:
/// membership of `e^{i(λ,Φ)} g f₀` at sampled strip frequencies, and finiteness
/// of `‖χ_k e^{ε‖Φ‖} g ∇_N^α f₀‖_p` for generator products `g` up to
/// `degree_probe` and every capped `(k, α, N)`.
pub fn check_assumption26(
    space: &SpaceSpec,
    f0: &ScalarField,
    phi: &MapPhi,
    eps: f64,
    degree_probe: usize,
) -> AdmissibilityVerdict {
    let mut verdict = AdmissibilityVerdict {
        pass: false,
        epsilon: 0.0,
        passing: Vec::new(),
        failures: Vec::new(),
        tail_fits: Vec::new(),
    };
    let model = space.model();
    if model.order_max > 0 && !f0.is_smooth() {
        verdict.failures.push(failure(
            Condition::Unsupported,
            eps,
            String::new(),
            String::new(),
            format!("weight {f0} is not smooth but the space needs derivatives"),
        ));
        return verdict;
    }
    let samples: Vec<Vec<f64>> = {
        let r = space.rule(1);
        let step = (r.len() / 64).max(1);
        (0..r.len())
            .step_by(step)
            .map(|i| r.node(i).to_vec())
            .collect()
    };
    let gens = match AlgebraGenerators::new(phi, space.m(), &samples) {
        Ok(g) => g,
        Err(e) => {
            verdict.failures.push(failure(
                Condition::Unsupported,
                eps,
                String::new(),
                String::new(),
                e.to_string(),
            ));
            return verdict;
        }
    };
    let products = gens.products(degree_probe);
    let indices = model.indices();
    let p = space.p();

    // weighted seminorm condition
    let jobs: Vec<(usize, usize)> = (0..products.len())
        .flat_map(|g| (0..indices.len()).map(move |i| (g, i)))
        .collect();
    let outcomes: Vec<ProbeOutcome> = jobs
        .into_par_iter()
        .map(|(gi, ii)| {
            let (glabel, g) = &products[gi];
            let idx = &indices[ii];
            let order = idx.order();
            let log_h = |x: &[f64]| -> f64 {
                let d = if order == 0 {
                    f0.eval(x)
                } else {
                    f0.jet(x, order)
                        .map_or(f64::NAN, |j| j.derivative(&idx.alpha))
                };
                eps * phi.norm(x) + ln_abs(g.eval(x)) + model.weight(idx.n, x).ln() + ln_abs(d)
            };
            let label = format!(
                "g={glabel}, k={}, alpha={:?}, N={}",
                idx.k, idx.alpha, idx.n
            );
            let uk = match space.domain().exhaustion_domain(idx.k) {
                Ok(d) => d,
                Err(e) => {
                    return ProbeOutcome {
                        failures: vec![failure(
                            Condition::Unsupported,
                            eps,
                            label,
                            String::new(),
                            e.to_string(),
                        )],
                        fits: Vec::new(),
                    }
                }
            };
            if p.is_finite() {
                let measure = space.measure();
                let lp = |x: &[f64]| {
                    let mut v = p * log_h(x);
                    if measure.density().is_some() {
                        v += measure.weight_at(x).ln();
                    }
                    v
                };
                integral_probe(
                    &lp,
                    &uk,
                    &default_rule(&uk),
                    Condition::WeightedSeminorm,
                    eps,
                    &label,
                )
            } else {
                let mut out = ProbeOutcome {
                    failures: Vec::new(),
                    fits: Vec::new(),
                };
                let rule = space.rule(idx.k);
                if let Some((x, v)) = rule
                    .iter()
                    .map(|(x, _)| (x, log_h(x)))
                    .find(|(_, v)| v.is_nan() || *v == f64::INFINITY)
                {
                    out.failures.push(failure(
                        Condition::WeightedSeminorm,
                        eps,
                        label.clone(),
                        format!("{x:?}"),
                        format!("non-finite value (log {v})"),
                    ));
                }
                if !uk.is_bounded() {
                    for r in probe_log_integrand(&log_h, &uk, ProbeMode::Supremum) {
                        if r.end.is_infinite() {
                            out.fits.push(TailFit {
                                epsilon: eps,
                                index: label.clone(),
                                end: r.location(),
                                ratio: r.ratio,
                                decay: r.decay,
                            });
                        }
                        if r.end.is_infinite() && r.verdict != ShellVerdict::Convergent {
                            out.failures.push(Failure {
                                condition: Condition::WeightedSeminorm,
                                epsilon: eps,
                                index: label.clone(),
                                location: r.location(),
                                ratio: r.ratio,
                                detail: format!(
                                    "supremum grows along dyadic shells ({:?})",
                                    r.verdict
                                ),
                            });
                        }
                    }
                }
                out
            }
        })
        .collect();
    for o in outcomes {
        verdict.failures.extend(o.failures);
        if verdict.tail_fits.len() < 64 {
            verdict.tail_fits.extend(o.fits);
        }
    }

    // membership condition at strip frequencies
    let lambdas = strip_samples(phi.dim(), eps);
    let member_products: Vec<&(String, ScalarField)> = {
        let cap = degree_probe.min(MEMBERSHIP_DEGREE);
        let limit = gens.products(cap).len();
        products.iter().take(limit).collect()
    };
    let mut opts = RuleOptions::composite(8).with_core(12.0, 0.5);
    opts.tail.radius = 40.0;
    let member_failures: Vec<Failure> = lambdas
        .par_iter()
        .flat_map_iter(|lambda| {
            let mut fails = Vec::new();
            for (glabel, g) in &member_products {
                let field = exponential_field(lambda, phi, &g.mul(f0), 1.0);
                for idx in &indices {
                    let rule = match space
                        .domain()
                        .exhaustion_domain(idx.k)
                        .and_then(|d| build_quadrature_with(&d, &opts))
                    {
                        Ok(r) => r,
                        Err(_) => continue,
                    };
                    let order = idx.order();
                    let bad = rule.iter().find(|(x, _)| {
                        let v = if order == 0 {
                            field.eval(x).norm()
                        } else {
                            field
                                .derivative_at(&idx.alpha, x)
                                .map_or(f64::NAN, |c| c.norm())
                        };
                        !(model.weight(idx.n, x) * v).is_finite()
                    });
                    if let Some((x, _)) = bad {
                        fails.push(failure(
                            Condition::Membership,
                            eps,
                            format!(
                                "g={glabel}, lambda={:?}+i{:?}, alpha={:?}, N={}",
                                lambda.re(),
                                lambda.im(),
                                idx.alpha,
                                idx.n
                            ),
                            format!("{x:?}"),
                            "non-finite weighted derivative".into(),
                        ));
                        break;
                    }
                }
            }
            fails
        })
        .collect();
    verdict.failures.extend(member_failures);

    verdict.pass = verdict.failures.is_empty() && eps > 0.0;
    if verdict.pass {
        verdict.epsilon = eps;
        verdict.passing.push(eps);
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{make_phi, preset_weight, PhiSpec, WeightPreset};
    use crate::numerics::Exhaustion;
    use crate::spaces::{make_space, SpaceParams};

    #[test]
    fn gaussian_passes_every_strip() {
        let d = Domain::real_line();
        let phi = make_phi(&PhiSpec::Identity, &d).unwrap();
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let v = check_thm31(
            &f0,
            &phi,
            2.0,
            &d,
            &MeasureSpec::lebesgue(),
            &[2.0, 1.0, 0.5],
            12,
        );
        assert!(v.pass, "{:?}", v.failures);
        assert_eq!(v.epsilon, 2.0);
        assert_eq!(v.passing, vec![2.0, 1.0, 0.5]);
    }

    #[test]
    fn laguerre_threshold() {
        let d = Domain::half_line();
        let phi = make_phi(&PhiSpec::Identity, &d).unwrap();
        let f0 = preset_weight(&WeightPreset::Laguerre { alpha: -0.5 }).unwrap();
        let grid = [1.0, 0.5, 0.45, 0.25, 0.1];
        let v = check_thm31(&f0, &phi, 2.0, &d, &MeasureSpec::lebesgue(), &grid, 12);
        assert!(v.pass);
        assert_eq!(v.epsilon, 0.45);
        let v = check_thm31(&f0, &phi, 4.0, &d, &MeasureSpec::lebesgue(), &grid, 12);
        assert!(!v.pass);
        assert!(
            v.failures.iter().any(|f| f.location == "x1 = 0"),
            "{:?}",
            v.failures
        );
    }

    #[test]
    fn schwartz_assumption() {
        let s = make_space(SpaceParams::schwartz(1, 2, 2)).unwrap();
        let phi = make_phi(&PhiSpec::Identity, s.domain()).unwrap();
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let v = check_assumption26(&s, &f0, &phi, 1.0, 4);
        assert!(v.pass, "{:?}", v.failures);
        let slow = ScalarField::parse("1/(1+x^2)").unwrap();
        let v = check_assumption26(&s, &slow, &phi, 1.0, 4);
        assert!(!v.pass);
        assert!(v
            .failures
            .iter()
            .any(|f| f.condition == Condition::WeightedSeminorm));
    }

    #[test]
    fn c1_on_bounded_interval_passes() {
        let d = Domain::interval(-1.0, 1.0)
            .unwrap()
            .with_exhaustion(Exhaustion::Inset {
                scale: 0.5,
                radius: 1.0,
            });
        let s = make_space(SpaceParams::cm(d, 1, 3)).unwrap();
        let phi = make_phi(&PhiSpec::Cubic, s.domain()).unwrap();
        let f0 = ScalarField::parse("cosh(x)^2").unwrap();
        let v = check_assumption26(&s, &f0, &phi, 0.5, 3);
        assert!(v.pass, "{:?}", v.failures);
    }
}
