//! Numerical checks of the analytic identities behind the density tests:
//! holomorphy of `λ ↦ ⟨T, e^{-i(λ,Φ)} f₀⟩`, its derivatives at 0, the weak
//! integral `∫ f(λ) e^{-i(λ,Φ)} f₀ dλ = (F f)(Φ) f₀`, polynomial growth of
//! seminorms in `λ`, and the comparison of monomial and exponential spans.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::approx::{
    project_in_space, ApproxError, DecayClass, DecayTable, DualFunctional, ProjectionOptions,
};
use crate::families::{exponential_family, monomial_family, pullback_family, symmetric_frequencies};
use crate::funcmodel::{
    exponential_field, ComplexField, ComplexFrequency, FuncModelError, MapPhi, ScalarField,
};
use crate::numerics::{integrate_fn, MeasureSpec, NumericsError, QuadratureRule};
use crate::spaces::{seminorm_complex, SpaceError, SpaceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("frequency with ‖Im λ‖ = {norm} lies outside the strip of width {eps}")]
    OutsideStrip { norm: f64, eps: f64 },
    #[error("method mismatch: {0}")]
    MethodMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Field(#[from] FuncModelError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Serialised outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub parameters: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub residual: f64,
    pub pass: bool,
}

fn c_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// `F(f)(ξ) = ∫ f(λ) e^{-i(λ,ξ)} dλ`, with no `2π` factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierConvention;

impl FourierConvention {
    pub fn transform(&self, f: &ScalarField, xi: &[f64], rule: &QuadratureRule) -> Complex64 {
        rule.iter()
            .map(|(l, w)| {
                let s: f64 = l.iter().zip(xi).map(|(a, b)| a * b).sum();
                Complex64::from_polar(w * f.eval(l), -s)
            })
            .sum()
    }

    /// `F(e^{-‖λ‖²/2})(ξ) = (2π)^{n/2} e^{-‖ξ‖²/2}`.
    pub fn gaussian(&self, xi: &[f64]) -> Complex64 {
        let n = xi.len() as f64;
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::new((2.0 * std::f64::consts::PI).powf(n / 2.0) * (-r2 / 2.0).exp(), 0.0)
    }
}

type ValueFn<'a> = dyn Fn(&[f64]) -> Complex64 + Sync + 'a;

/// `T ↦ ⟨T, h⟩` with `h` given pointwise; `field` is only needed for point
/// derivatives of positive order.
fn pair(
    t: &DualFunctional,
    value: &ValueFn<'_>,
    field: Option<&dyn Fn() -> ComplexField>,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<Complex64, VerifyError> {
    match t {
        DualFunctional::Integrate { g } => {
            let re = integrate_fn(|x| g.eval(x) * value(x).re, rule, measure)?.value;
            let im = integrate_fn(|x| g.eval(x) * value(x).im, rule, measure)?.value;
            Ok(Complex64::new(re, im))
        }
        DualFunctional::PointDerivative { x0, alpha } => {
            if alpha.iter().all(|&a| a == 0) {
                return Ok(value(x0));
            }
            let field = field.ok_or_else(|| {
                VerifyError::MethodMismatch("point derivatives need a symbolic field".into())
            })?;
            Ok(field().derivative_at(alpha, x0)?)
        }
        DualFunctional::Combination { terms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, term) in terms {
                acc += pair(term, value, field, rule, measure)? * c;
            }
            Ok(acc)
        }
    }
}

/// `λ ↦ H_T(λ) = ⟨T, e^{-i(λ,Φ)} e^{-i(τ,Φ)} f₀⟩`, with an optional fixed
/// tilt `τ` (zero by default). Values are cached.
#[derive(Debug)]
pub struct HolomorphicProbe {
    pub t: DualFunctional,
    pub phi: MapPhi,
    pub f0: ScalarField,
    pub eps: f64,
    tilt: Option<ComplexFrequency>,
    rule: QuadratureRule,
    measure: MeasureSpec,
    cache: Mutex<Vec<(Vec<f64>, Vec<f64>, Complex64)>>,
}

impl HolomorphicProbe {
    pub fn new(
        t: DualFunctional,
        phi: MapPhi,
        f0: ScalarField,
        eps: f64,
        rule: QuadratureRule,
        measure: MeasureSpec,
    ) -> Self {
        HolomorphicProbe {
            t,
            phi,
            f0,
            eps,
            tilt: None,
            rule,
            measure,
            cache: Mutex::new(Vec::new()),
        }
    }

    /// The probe for the weight `e^{-i(τ,Φ)} f₀`.
    pub fn tilted(&self, tau: ComplexFrequency) -> Self {
        let mut p = HolomorphicProbe::new(
            self.t.clone(),
            self.phi.clone(),
            self.f0.clone(),
            self.eps,
            self.rule.clone(),
            self.measure.clone(),
        );
        p.tilt = Some(tau);
        p
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `(λ, H_T(λ))` for every value computed so far.
    pub fn cached(&self) -> Vec<(Vec<f64>, Vec<f64>, Complex64)> {
        self.cache.lock().expect("probe cache").clone()
    }

    fn check_strip(&self, lambda: &ComplexFrequency) -> Result<(), VerifyError> {
        let total_im: Vec<f64> = match &self.tilt {
            Some(t) => lambda.im().iter().zip(t.im()).map(|(a, b)| a + b).collect(),
            None => lambda.im().to_vec(),
        };
        for im in [lambda.im(), &total_im[..]] {
            let norm = im.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= self.eps {
                return Err(VerifyError::OutsideStrip {
                    norm,
                    eps: self.eps,
                });
            }
        }
        Ok(())
    }

    fn integrand(&self, x: &[f64], lambda: &ComplexFrequency) -> Complex64 {
        let w = self.f0.eval(x);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        // combine in the exponent: e^{ε|Φ|} alone overflows where f₀ underflows
        let y = self.phi.eval(x);
        let mut arg = Complex64::new(0.0, -1.0) * lambda.pair(&y);
        if let Some(t) = &self.tilt {
            arg += Complex64::new(0.0, -1.0) * t.pair(&y);
        }
        (arg + w.abs().ln()).exp() * w.signum()
    }
}

/// `H_T(λ) = ⟨T, e^{-i(λ,Φ)} f₀⟩` (times the probe's tilt, if any).
pub fn h_map(probe: &HolomorphicProbe, lambda: &ComplexFrequency) -> Result<Complex64, VerifyError> {
    probe.check_strip(lambda)?;
    let key = (lambda.re().to_vec(), lambda.im().to_vec());
    if let Some(hit) = probe
        .cache
        .lock()
        .expect("probe cache")
        .iter()
        .find(|(re, im, _)| *re == key.0 && *im == key.1)
    {
        return Ok(hit.2);
    }
    let value = |x: &[f64]| probe.integrand(x, lambda);
    let field = || {
        let lam = match &probe.tilt {
            Some(t) => lambda.add(t).unwrap_or_else(|_| lambda.clone()),
            None => lambda.clone(),
        };
        exponential_field(&lam, &probe.phi, &probe.f0, -1.0)
    };
    let v = pair(&probe.t, &value, Some(&field), &probe.rule, &probe.measure)?;
    probe
        .cache
        .lock()
        .expect("probe cache")
        .push((key.0, key.1, v));
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMethod {
    RichardsonFd,
    ComplexStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop210Result {
    pub alpha: Vec<usize>,
    pub method: DiffMethod,
    /// Numerical `D^α (T∘H)(0)`.
    pub lhs: Complex64,
    /// `⟨T, (-i)^{|α|} Φ^α f₀⟩`.
    pub rhs: Complex64,
    /// `|lhs − rhs| / max(|rhs|, |H_T(0)|)`.
    pub relative_error: f64,
}

impl Prop210Result {
    pub fn check(&self, tol: f64) -> CheckResult {
        CheckResult {
            check_name: "derivative-moment".into(),
            parameters: json!({"alpha": self.alpha, "method": self.method, "tolerance": tol}),
            lhs: c_json(self.lhs),
            rhs: c_json(self.rhs),
            residual: self.relative_error,
            pass: self.relative_error < tol,
        }
    }
}

/// Default base step of the finite differences.
pub const FD_STEP: f64 = 1e-2;
/// Imaginary step of the complex-step derivative.
pub const COMPLEX_STEP: f64 = 1e-20;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central-difference estimate of `D^α H(0)` with step `h`, `O(h²)`.
fn central_difference(
    probe: &HolomorphicProbe,
    alpha: &[usize],
    h: f64,
) -> Result<Complex64, VerifyError> {
    let mut stencil: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for &m in alpha {
        let scale = h.powi(m as i32);
        let mut next = Vec::new();
        for (point, c) in &stencil {
            for i in 0..=m {
                let mut p = point.clone();
                p.push((m as f64 / 2.0 - i as f64) * h);
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                next.push((p, c * sign * binomial(m, i) / scale));
            }
        }
        stencil = next;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (point, c) in stencil {
        acc += h_map(probe, &ComplexFrequency::real(point))? * c;
    }
    Ok(acc)
}

/// Richardson table on steps `h, h/2, h/4, …` eliminating `h², h⁴, …`.
pub fn richardson_derivative(
    probe: &HolomorphicProbe,
    alpha: &[usize],
    h: f64,
    levels: usize,
) -> Result<Complex64, VerifyError> {
    let levels = levels.max(1);
    let mut row: Vec<Complex64> = (0..levels)
        .map(|j| central_difference(probe, alpha, h / 2f64.powi(j as i32)))
        .collect::<Result<_, _>>()?;
    for k in 1..levels {
        let f = 4f64.powi(k as i32);
        row = row
            .windows(2)
            .map(|w| (w[1] * f - w[0]) / (f - 1.0))
            .collect();
    }
    Ok(row[0])
}

/// `∂_j H(0)` by the complex step, for real `T`-data, real `Φ`, real `f₀`.
/// `H = C − iS` with `C(λ) = ⟨T, cos(λ,Φ) f₀⟩`, `S(λ) = ⟨T, sin(λ,Φ) f₀⟩`,
/// both real on the real axis, so `C'(0) = Im C(ih)/h`.
fn complex_step(probe: &HolomorphicProbe, axis: usize, h: f64) -> Result<Complex64, VerifyError> {
    if probe.tilt.is_some() {
        return Err(VerifyError::MethodMismatch(
            "complex step needs an untilted probe".into(),
        ));
    }
    let dim = probe.phi.dim();
    let mut im = vec![0.0; dim];
    im[axis] = h;
    let lambda: Vec<Complex64> = im.iter().map(|&v| Complex64::new(0.0, v)).collect();
    let arg = |x: &[f64]| -> Complex64 {
        probe
            .phi
            .eval(x)
            .iter()
            .zip(&lambda)
            .map(|(y, l)| l * y)
            .sum()
    };
    let cos_part = |x: &[f64]| arg(x).cos() * probe.f0.eval(x);
    let sin_part = |x: &[f64]| arg(x).sin() * probe.f0.eval(x);
    let c = pair(&probe.t, &cos_part, None, &probe.rule, &probe.measure)?;
    let s = pair(&probe.t, &sin_part, None, &probe.rule, &probe.measure)?;
    Ok(Complex64::new(c.im / h, -s.im / h))
}

/// `D^α(T∘H)(0)` against `⟨T, (-i)^{|α|} Φ^α f₀⟩`.
pub fn check_prop210(
    probe: &HolomorphicProbe,
    alpha: &[usize],
    method: DiffMethod,
    levels: usize,
) -> Result<Prop210Result, VerifyError> {
    let order: usize = alpha.iter().sum();
    if alpha.len() != probe.phi.dim() {
        return Err(VerifyError::InvalidInput(format!(
            "multi-index {alpha:?} does not match dimension {}",
            probe.phi.dim()
        )));
    }
    let lhs = match method {
        DiffMethod::RichardsonFd => {
            if order == 0 || order > 4 {
                return Err(VerifyError::MethodMismatch(format!(
                    "finite differences support 1 ≤ |α| ≤ 4, got {order}"
                )));
            }
            richardson_derivative(probe, alpha, FD_STEP, levels)?
        }
        DiffMethod::ComplexStep => {
            if order != 1 {
                return Err(VerifyError::MethodMismatch(format!(
                    "complex step is first order only, got |α| = {order}"
                )));
            }
            let axis = alpha.iter().position(|&a| a == 1).unwrap_or(0);
            complex_step(probe, axis, COMPLEX_STEP)?
        }
    };
    let mut moment = probe.f0.clone();
    for (comp, &a) in probe.phi.components().iter().zip(alpha) {
        if a > 0 {
            moment = moment.mul(&comp.powi(a as u32));
        }
    }
    let factor = Complex64::new(0.0, -1.0).powu(order as u32);
    let value = |x: &[f64]| {
        let mut z = Complex64::new(moment.eval(x), 0.0);
        if let Some(t) = &probe.tilt {
            z *= (Complex64::new(0.0, -1.0) * t.pair(&probe.phi.eval(x))).exp();
        }
        z
    };
    let field = || ComplexField::real(moment.clone());
    let field_ref: Option<&dyn Fn() -> ComplexField> =
        if probe.tilt.is_none() { Some(&field) } else { None };
    let rhs = pair(&probe.t, &value, field_ref, &probe.rule, &probe.measure)? * factor;
    let h0 = h_map(probe, &ComplexFrequency::real(vec![0.0; alpha.len()]))?;
    let scale = rhs.norm().max(h0.norm()).max(f64::MIN_POSITIVE);
    Ok(Prop210Result {
        alpha: alpha.to_vec(),
        method,
        lhs,
        rhs,
        relative_error: (lhs - rhs).norm() / scale,
    })
}

/// Where the right-hand side `F(f)(ξ)` comes from.
#[derive(Clone)]
pub enum TransformSource {
    ClosedForm(Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>),
    /// Independent quadrature of the transform.
    Quadrature(QuadratureRule),
}

impl std::fmt::Debug for TransformSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformSource::ClosedForm(_) => f.write_str("ClosedForm"),
            TransformSource::Quadrature(r) => write!(f, "Quadrature({:?}, {})", r.kind(), r.order()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma212Result {
    pub max_residual: f64,
    /// `(x, |LHS(x) − RHS(x)|)`.
    pub residual_grid: Vec<(Vec<f64>, f64)>,
    pub rule_order: usize,
}

impl Lemma212Result {
    pub fn check(&self, tol: f64) -> CheckResult {
        CheckResult {
            check_name: "weak-integral".into(),
            parameters: json!({"rule_order": self.rule_order, "grid": self.residual_grid.len(), "tolerance": tol}),
            lhs: Value::Null,
            rhs: Value::Null,
            residual: self.max_residual,
            pass: self.max_residual < tol,
        }
    }
}

/// `∫ f(λ) e^{-i(λ,Φ(x))} f₀(x) dλ` on `rule_lambda` against
/// `F(f)(Φ(x)) f₀(x)` on each grid point.
pub fn check_lemma212(
    f: &ScalarField,
    phi: &MapPhi,
    f0: &ScalarField,
    rule_lambda: &QuadratureRule,
    x_grid: &[Vec<f64>],
    source: &TransformSource,
) -> Result<Lemma212Result, VerifyError> {
    let fw: Vec<(Vec<f64>, f64)> = rule_lambda
        .iter()
        .map(|(l, w)| (l.to_vec(), w * f.eval(l)))
        .collect();
    let conv = FourierConvention;
    let residual_grid: Vec<(Vec<f64>, f64)> = x_grid
        .par_iter()
        .map(|x| {
            let y = phi.eval(x);
            let w0 = f0.eval(x);
            let lhs: Complex64 = fw
                .iter()
                .map(|(l, w)| {
                    let s: f64 = l.iter().zip(&y).map(|(a, b)| a * b).sum();
                    Complex64::from_polar(*w, -s)
                })
                .sum::<Complex64>()
                * w0;
            let transform = match source {
                TransformSource::ClosedForm(g) => g(&y),
                TransformSource::Quadrature(r) => conv.transform(f, &y, r),
            };
            (x.clone(), (lhs - transform * w0).norm())
        })
        .collect();
    let max_residual = residual_grid.iter().map(|r| r.1).fold(0.0, f64::max);
    if !max_residual.is_finite() {
        return Err(NumericsError::NonFinite { point: vec![] }.into());
    }
    Ok(Lemma212Result {
        max_residual,
        residual_grid,
        rule_order: rule_lambda.order(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `(‖λ‖, p_{k,α,N}(e^{-i(λ,Φ)} f₀))`.
    pub rows: Vec<(f64, f64)>,
    /// Slope of `ln p` against `ln(1 + ‖λ‖)`.
    pub exponent: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Seminorm of `e^{-i(λ,Φ)} f₀` along real `λ = s·direction`, with a
/// power-law fit.
pub fn check_lemma28(
    phi: &MapPhi,
    f0: &ScalarField,
    lambdas: &[Vec<f64>],
    space: &SpaceSpec,
    k: usize,
    alpha: &[usize],
    n: u32,
) -> Result<GrowthFit, VerifyError> {
    let rows: Vec<(f64, f64)> = lambdas
        .par_iter()
        .map(|l| -> Result<(f64, f64), VerifyError> {
            let field = exponential_field(&ComplexFrequency::real(l.clone()), phi, f0, -1.0);
            let v = seminorm_complex(space, &field, k, alpha, n)?;
            Ok((l.iter().map(|v| v * v).sum::<f64>().sqrt(), v))
        })
        .collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(r, p)| ((1.0 + r).ln(), p.ln()))
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let order: usize = alpha.iter().sum();
    let bound = (n as usize + order) as f64 + 1.0;
    Ok(GrowthFit {
        rows,
        exponent,
        bound,
        pass: exponent <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Consistency {
    BothDecay,
    BothPlateau,
    Split,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureComparison {
    pub sizes: Vec<usize>,
    pub monomial: DecayTable,
    pub exponential: DecayTable,
    /// Gaussian-dictionary pullbacks `g_c(Φ) f₀`, reported alongside.
    pub pullback: DecayTable,
    /// `|e_mono − e_exp|` at the largest size.
    pub gap: f64,
    pub consistency: Consistency,
    /// Consistent verdict with final errors within a factor 2.
    pub consistent: bool,
}

/// Monomial, real-frequency exponential and pullback families of matched
/// odd sizes `n = 2h + 1`; frequencies `0, ±step, …, ±h·step`.
pub fn compare_closures(
    target: &ComplexField,
    phi: &MapPhi,
    f0: &ScalarField,
    space: &SpaceSpec,
    sizes: &[usize],
    frequency_step: f64,
    opts: &ProjectionOptions,
) -> Result<ClosureComparison, VerifyError> {
    if phi.dim() != 1 {
        return Err(VerifyError::InvalidInput(
            "closure comparison is one-dimensional".into(),
        ));
    }
    if sizes.iter().any(|&s| s % 2 == 0 || s == 0) {
        return Err(VerifyError::InvalidInput(format!(
            "matched sizes must be odd, got {sizes:?}"
        )));
    }
    let k = space.caps().k_max;
    let run = |build: &(dyn Fn(usize) -> Result<crate::families::BasisFamily, ApproxError> + Sync)|
     -> Result<DecayTable, VerifyError> {
        let reports = sizes
            .par_iter()
            .map(|&s| project_in_space(target, &build(s)?, space, k, opts))
            .collect::<Result<Vec<_>, _>>()?;
        let pairs: Vec<(usize, f64)> = sizes.iter().zip(&reports).map(|(&s, r)| (s, r.error)).collect();
        Ok(DecayTable::from_errors(&pairs))
    };
    let monomial = run(&|s| Ok(monomial_family(phi, f0, s - 1)))?;
    let eps = 1.0;
    let exponential = run(&|s| {
        exponential_family(phi, f0, &symmetric_frequencies((s - 1) / 2, frequency_step), eps)
            .map_err(|e| ApproxError::InvalidOption(e.to_string()))
    })?;
    let pullback = run(&|s| {
        let half = (s - 1) / 2;
        let spacing = 4.0 / half.max(1) as f64;
        let dict: Vec<ScalarField> = (0..s)
            .map(|i| {
                let c = (i as f64 - half as f64) * spacing;
                ScalarField::parse(&format!("exp(-(x-({c}))^2)")).expect("dictionary parses")
            })
            .collect();
        Ok(pullback_family(&dict, phi, f0))
    })?;
    let last = |t: &DecayTable| t.rows.last().map_or(f64::NAN, |r| r.error);
    let (em, ee) = (last(&monomial), last(&exponential));
    let consistency = match (monomial.class, exponential.class) {
        (DecayClass::Decaying, DecayClass::Decaying) => Consistency::BothDecay,
        (DecayClass::Plateau, DecayClass::Plateau) => Consistency::BothPlateau,
        _ => Consistency::Split,
    };
    let ratio = em.max(ee) / em.min(ee).max(f64::MIN_POSITIVE);
    let consistent = match consistency {
        Consistency::Split => false,
        Consistency::BothDecay => ratio <= 2.0 || em.max(ee) < 1e-8,
        Consistency::BothPlateau => ratio <= 2.0,
    };
    Ok(ClosureComparison {
        sizes: sizes.to_vec(),
        monomial,
        exponential,
        pullback,
        gap: (em - ee).abs(),
        consistency,
        consistent,
    })
}
