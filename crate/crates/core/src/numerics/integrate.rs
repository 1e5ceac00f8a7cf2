use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{build_quadrature_with, QuadratureRule, RuleOptions};
use super::{Domain, MeasureSpec, NumericsError, Recurrence};
use crate::funcmodel::{ComplexField, ScalarField};

const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate<T> {
    pub value: T,
    pub error_estimate: f64,
}

fn weighted_terms(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<(f64, f64), NumericsError> {
    let term = |(x, w): (&[f64], f64)| -> Result<f64, NumericsError> {
        let v = w * f(x) * measure.weight_at(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite { point: x.to_vec() })
        }
    };
    let terms: Vec<f64> = if rule.len() >= PARALLEL_THRESHOLD {
        let pts: Vec<(&[f64], f64)> = rule.iter().collect();
        pts.into_par_iter().map(term).collect::<Result<_, _>>()?
    } else {
        rule.iter().map(term).collect::<Result<_, _>>()?
    };
    let sum = terms.iter().sum();
    let abs = terms.iter().map(|t| t.abs()).sum();
    Ok((sum, abs))
}

/// `C e^{-cR}`-style bound on the mass beyond the truncation radius, from
/// samples at the cut and one radius further out.
fn tail_bound(g: &(dyn Fn(&[f64]) -> f64 + Sync), rule: &QuadratureRule) -> f64 {
    let Some(tail) = rule.tail() else { return 0.0 };
    let dim = rule.dim();
    let base: Vec<f64> = rule
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            if lo < 0.0 && hi > 0.0 {
                0.0
            } else {
                0.5 * (lo + hi)
            }
        })
        .collect();
    let mut total = 0.0;
    for axis in 0..dim {
        let (dlo, dhi) = rule.domain_axes()[axis];
        let (blo, bhi) = rule.bounds()[axis];
        for (infinite, cut, sign) in [
            (dlo.is_infinite(), blo, -1.0),
            (dhi.is_infinite(), bhi, 1.0),
        ] {
            if !infinite {
                continue;
            }
            let mut x = base.clone();
            x[axis] = cut;
            let g1 = g(&x).abs();
            x[axis] = cut + sign * tail.radius;
            let g2 = g(&x).abs();
            if !g1.is_finite() || !g2.is_finite() {
                return f64::INFINITY;
            }
            if g1 == 0.0 {
                continue;
            }
            let c = if g2 == 0.0 {
                tail.growth_cap
            } else {
                (g1 / g2).ln() / tail.radius
            };
            if c <= 0.0 {
                return f64::INFINITY;
            }
            total += g1 / c.min(tail.growth_cap);
        }
    }
    total
}

fn atom_sum(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    measure: &MeasureSpec,
) -> Result<f64, NumericsError> {
    let mut s = 0.0;
    for atom in measure.atoms() {
        let v = f(&atom.location);
        if !v.is_finite() {
            return Err(NumericsError::NonFinite {
                point: atom.location.clone(),
            });
        }
        s += atom.mass * v;
    }
    Ok(s)
}

/// `∫ f dμ` by the rule plus atom contributions. The error estimate adds the
/// fine/coarse discrepancy, a rounding term and the tail bound.
pub fn integrate_fn(
    f: impl Fn(&[f64]) -> f64 + Sync,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<IntegralEstimate<f64>, NumericsError> {
    let (fine, abs) = weighted_terms(&f, rule, measure)?;
    let mut err = 50.0 * f64::EPSILON * abs;
    if let Some(coarse) = rule.coarse() {
        let (c, _) = weighted_terms(&f, coarse, measure)?;
        err += (fine - c).abs();
    }
    let fw = |x: &[f64]| f(x) * measure.weight_at(x);
    err += tail_bound(&fw, rule);
    Ok(IntegralEstimate {
        value: fine + atom_sum(&f, measure)?,
        error_estimate: err,
    })
}

pub fn integrate(
    f: &ScalarField,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<IntegralEstimate<f64>, NumericsError> {
    integrate_fn(|x| f.eval(x), rule, measure)
}

pub fn integrate_complex(
    f: &ComplexField,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<IntegralEstimate<Complex64>, NumericsError> {
    let re = integrate(&f.re, rule, measure)?;
    let im = match &f.im {
        Some(im) => integrate(im, rule, measure)?,
        None => IntegralEstimate {
            value: 0.0,
            error_estimate: 0.0,
        },
    };
    Ok(IntegralEstimate {
        value: Complex64::new(re.value, im.value),
        error_estimate: re.error_estimate.hypot(im.error_estimate),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellVerdict {
    Convergent,
    Divergent,
    Unresolved,
}

/// Outcome of marching dyadic shells toward one end of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    pub axis: usize,
    /// Endpoint approached (finite value or ±∞).
    pub end: f64,
    pub verdict: ShellVerdict,
    /// Last shell-mass ratio (∞ when a shell mass overflowed).
    pub ratio: f64,
    /// Fitted local power: shell mass behaves like `2^{-k·decay}`.
    pub decay: f64,
    pub shells: usize,
}

impl ShellReport {
    pub fn location(&self) -> String {
        if self.end.is_infinite() {
            format!(
                "{}∞ (axis {})",
                if self.end > 0.0 { "+" } else { "-" },
                self.axis
            )
        } else {
            format!("x{} = {}", self.axis + 1, self.end)
        }
    }
}

const MAX_FINITE_SHELLS: usize = 60;
const MAX_INFINITE_SHELLS: usize = 40;

/// What a shell contributes: its integral, or the supremum over it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Integral,
    Supremum,
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Marches the shells with `lh` giving `ln|h|`. A shell of zero mass after
/// nonzero ones counts as underflow (convergent); an infinite one as divergent.
fn march(
    lh: &dyn Fn(f64) -> f64,
    shells: &[(f64, f64)],
    unit: &(Vec<f64>, Vec<f64>),
    mode: ProbeMode,
) -> (ShellVerdict, f64, usize) {
    let mut logs: Vec<f64> = Vec::new();
    let mut seen_nonzero = false;
    for &(a, b) in shells {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let vals: Vec<f64> = unit
            .0
            .iter()
            .zip(&unit.1)
            .map(|(t, w)| {
                let v = lh(mid + half * t);
                match mode {
                    ProbeMode::Integral => v + (w * half).ln(),
                    ProbeMode::Supremum => v,
                }
            })
            .collect();
        if vals.contains(&f64::INFINITY) {
            return (ShellVerdict::Divergent, f64::INFINITY, logs.len() + 1);
        }
        if vals.iter().any(|v| v.is_nan()) {
            break;
        }
        let s = match mode {
            ProbeMode::Integral => log_sum_exp(vals.into_iter()),
            ProbeMode::Supremum => vals.into_iter().fold(f64::NEG_INFINITY, f64::max),
        };
        logs.push(s);
        if s == f64::NEG_INFINITY {
            if seen_nonzero {
                break;
            }
            continue;
        }
        seen_nonzero = true;
    }
    let n = logs.len();
    if !seen_nonzero {
        return (ShellVerdict::Convergent, 0.0, n);
    }
    if logs[n - 1] == f64::NEG_INFINITY {
        // Underflow is only trusted when the shells before it were not
        // growing: a factor like e^{εx} f₀ can underflow through f₀ alone.
        let finite: Vec<f64> = logs.iter().copied().filter(|v| v.is_finite()).collect();
        let last = finite
            .windows(2)
            .last()
            .map_or(0.0, |w| (w[1] - w[0]).exp());
        return if last >= 0.97 {
            (ShellVerdict::Divergent, last, n)
        } else {
            (ShellVerdict::Convergent, 0.0, n)
        };
    }
    let ratios: Vec<f64> = logs
        .windows(2)
        .filter(|w| w[0].is_finite())
        .map(|w| (w[1] - w[0]).exp())
        .collect();
    let Some(&last) = ratios.last() else {
        return (ShellVerdict::Unresolved, f64::NAN, n);
    };
    let window = &ratios[ratios.len().saturating_sub(3)..];
    let max = window.iter().copied().fold(0.0, f64::max);
    let verdict = match mode {
        ProbeMode::Integral if ratios.len() >= 3 && max < 0.9 => ShellVerdict::Convergent,
        ProbeMode::Integral if last >= 0.97 => ShellVerdict::Divergent,
        ProbeMode::Integral => ShellVerdict::Unresolved,
        ProbeMode::Supremum if ratios.len() >= 3 && max <= 1.0 + 1e-9 => ShellVerdict::Convergent,
        ProbeMode::Supremum if last > 1.0 + 1e-9 => ShellVerdict::Divergent,
        ProbeMode::Supremum => ShellVerdict::Unresolved,
    };
    (verdict, last, n)
}

fn finite_shells(a: f64, dir: f64, d: f64) -> Vec<(f64, f64)> {
    let mut shells = Vec::new();
    let mut prev = f64::NAN;
    for k in 0..MAX_FINITE_SHELLS {
        let outer = a + dir * d * 0.5f64.powi(k as i32);
        let inner = a + dir * d * 0.5f64.powi(k as i32 + 1);
        if inner == a || inner == outer || inner == prev {
            break;
        }
        prev = inner;
        shells.push(if dir > 0.0 {
            (inner, outer)
        } else {
            (outer, inner)
        });
    }
    shells
}

fn infinite_shells(start: f64, dir: f64) -> Vec<(f64, f64)> {
    (0..MAX_INFINITE_SHELLS)
        .map(|k| {
            let lo = start * 2f64.powi(k as i32);
            let hi = 2.0 * lo;
            if dir > 0.0 {
                (lo, hi)
            } else {
                (-hi, -lo)
            }
        })
        .collect()
}

/// Dyadic-shell probe at every end of every axis of `domain`, with
/// `log_g(x) = ln|g(x)|`. On a plane the marginal (integral or supremum)
/// over the other axis is probed.
pub fn probe_log_integrand(
    log_g: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: &Domain,
    mode: ProbeMode,
) -> Vec<ShellReport> {
    let unit = Recurrence::legendre(9).gauss(8);
    let dim = domain.dim();
    let marginal_rules: Vec<Option<QuadratureRule>> = (0..dim)
        .map(|axis| {
            if dim == 1 {
                return None;
            }
            let other = domain.axis(1 - axis);
            let d = Domain::new(vec![other], super::Exhaustion::Whole).ok()?;
            let mut opts = RuleOptions::composite(6)
                .with_core(8.0, 1.0)
                .with_grading(12);
            opts.tail.radius = 1.0e3;
            build_quadrature_with(&d, &opts).ok()
        })
        .collect();
    let mut out = Vec::new();
    for axis in 0..dim {
        let (lo, hi) = domain.axis(axis);
        let lh = |t: f64| -> f64 {
            match &marginal_rules[axis] {
                None => log_g(&[t]),
                Some(rule) => {
                    let vals = rule.iter().map(|(y, w)| {
                        let p = if axis == 0 { [t, y[0]] } else { [y[0], t] };
                        match mode {
                            ProbeMode::Integral => log_g(&p) + w.ln(),
                            ProbeMode::Supremum => log_g(&p),
                        }
                    });
                    match mode {
                        ProbeMode::Integral => log_sum_exp(vals),
                        ProbeMode::Supremum => vals.fold(f64::NEG_INFINITY, f64::max),
                    }
                }
            }
        };
        let mut ends: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        let span = if lo.is_finite() && hi.is_finite() {
            0.5 * (hi - lo)
        } else {
            1.0
        };
        let d = span.min(1.0);
        if lo.is_finite() {
            ends.push((lo, finite_shells(lo, 1.0, d)));
        } else {
            let start = if hi.is_finite() {
                1.0f64.max(2.0 * hi.abs() + 1.0)
            } else {
                1.0
            };
            ends.push((f64::NEG_INFINITY, infinite_shells(start, -1.0)));
        }
        if hi.is_finite() {
            ends.push((hi, finite_shells(hi, -1.0, d)));
        } else {
            let start = if lo.is_finite() {
                1.0f64.max(2.0 * lo.abs() + 1.0)
            } else {
                1.0
            };
            ends.push((f64::INFINITY, infinite_shells(start, 1.0)));
        }
        for (end, shells) in ends {
            let (verdict, ratio, count) = march(&lh, &shells, &unit, mode);
            out.push(ShellReport {
                axis,
                end,
                verdict,
                ratio,
                decay: if ratio > 0.0 && ratio.is_finite() {
                    -ratio.log2()
                } else {
                    f64::INFINITY
                },
                shells: count,
            });
        }
    }
    out
}

/// [`probe_log_integrand`] for a non-negative integrand given directly.
pub fn probe_integrand(g: &(dyn Fn(&[f64]) -> f64 + Sync), domain: &Domain) -> Vec<ShellReport> {
    probe_log_integrand(&|x: &[f64]| g(x).abs().ln(), domain, ProbeMode::Integral)
}

fn sup_norm(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<f64, NumericsError> {
    let abs = |x: &[f64]| -> Result<f64, NumericsError> {
        let v = f(x).abs();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFinite { point: x.to_vec() })
        }
    };
    let mut best = 0.0f64;
    let mut best_i = None;
    for (i, (x, _)) in rule.iter().enumerate() {
        let v = abs(x)?;
        if v > best || best_i.is_none() {
            best = v;
            best_i = Some(i);
        }
    }
    for atom in measure.atoms() {
        best = best.max(abs(&atom.location)?);
    }
    if rule.dim() == 1 {
        let (lo, hi) = rule.bounds()[0];
        for e in [lo, hi] {
            if e.is_finite() {
                let v = f(&[e]).abs();
                if v.is_finite() {
                    best = best.max(v);
                }
            }
        }
        if let Some(i) = best_i {
            let left = if i > 0 { rule.node(i - 1)[0] } else { lo };
            let right = if i + 1 < rule.len() {
                rule.node(i + 1)[0]
            } else {
                hi
            };
            if left.is_finite() && right.is_finite() {
                best = best.max(golden_max(&|t| f(&[t]).abs(), left, right));
            }
        }
    }
    Ok(best)
}

/// Golden-section search for a local maximum of `g` on `[a, b]`.
pub(crate) fn golden_max(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let safe = |t: f64| {
        let v = g(t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut gc = safe(c);
    let mut gd = safe(d);
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = safe(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = safe(d);
        }
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
    }
    gc.max(gd)
}

/// `‖f‖_{L_p(μ)}` on the rule's region. Finite `p` first runs the shell probe
/// on `|f|^p w` and reports divergence instead of a truncated value.
pub fn lp_norm_fn(
    f: impl Fn(&[f64]) -> f64 + Sync,
    p: f64,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<f64, NumericsError> {
    if p.is_infinite() && p > 0.0 {
        return sup_norm(&f, rule, measure);
    }
    if !(p >= 1.0) {
        return Err(NumericsError::InvalidExponent(p));
    }
    let g = |x: &[f64]| f(x).abs().powf(p) * measure.weight_at(x);
    let domain = Domain::new(rule.domain_axes().to_vec(), super::Exhaustion::Whole)?;
    for report in probe_integrand(&g, &domain) {
        if report.verdict != ShellVerdict::Convergent {
            return Err(NumericsError::Divergent {
                location: report.location(),
                ratio: report.ratio,
            });
        }
    }
    let est = integrate_fn(|x| f(x).abs().powf(p), rule, measure)?;
    Ok(est.value.max(0.0).powf(1.0 / p))
}

pub fn lp_norm(
    f: &ScalarField,
    p: f64,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<f64, NumericsError> {
    lp_norm_fn(|x| f.eval(x), p, rule, measure)
}
