//! Function spaces built from an exhaustion, a measure, an exponent and a
//! family of weighted derivative maps `∇_N^α`, with their seminorms
//! `p_{k,α,N}(f) = ‖χ_k ∇_N^α f‖_p`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcmodel::{ComplexField, FuncModelError, ScalarField, DEFAULT_MAX_DERIVATIVE_ORDER};
use crate::numerics::{
    build_quadrature_with, lp_norm_fn, Domain, Exhaustion, MeasureSpec, NumericsError,
    QuadratureRule, RuleOptions,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("inconsistent space parameters: {0}")]
    Inconsistent(String),
    #[error("seminorm index (k={k}, alpha={alpha:?}, N={n}) is outside the caps")]
    IndexOutOfCaps { k: usize, alpha: Vec<usize>, n: u32 },
    #[error("derivative unavailable: {0}")]
    Derivative(#[from] FuncModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Lp,
    Cm,
    Schwartz,
}

/// Finite caps on the seminorm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub k_max: usize,
    pub n_max: u32,
    pub alpha_max: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            k_max: 1,
            n_max: 0,
            alpha_max: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpaceParams {
    pub kind: SpaceKind,
    pub domain: Domain,
    pub measure: MeasureSpec,
    pub p: f64,
    pub m: usize,
    pub caps: Caps,
    /// Quadrature used on each `U_k`; defaults depend on the kind.
    pub rule: Option<RuleOptions>,
}

impl SpaceParams {
    pub fn lp(domain: Domain, measure: MeasureSpec, p: f64) -> Self {
        SpaceParams {
            kind: SpaceKind::Lp,
            domain,
            measure,
            p,
            m: 0,
            caps: Caps::default(),
            rule: None,
        }
    }

    pub fn cm(domain: Domain, m: usize, k_max: usize) -> Self {
        SpaceParams {
            kind: SpaceKind::Cm,
            domain,
            measure: MeasureSpec::lebesgue(),
            p: f64::INFINITY,
            m,
            caps: Caps {
                k_max,
                n_max: 0,
                alpha_max: m,
            },
            rule: None,
        }
    }

    pub fn schwartz(dim: usize, n_max: u32, alpha_max: usize) -> Self {
        SpaceParams {
            kind: SpaceKind::Schwartz,
            domain: Domain::whole_space(dim),
            measure: MeasureSpec::lebesgue(),
            p: f64::INFINITY,
            m: alpha_max,
            caps: Caps {
                k_max: 1,
                n_max,
                alpha_max,
            },
            rule: None,
        }
    }

    pub fn with_rule(mut self, rule: RuleOptions) -> Self {
        self.rule = Some(rule);
        self
    }
}

/// One member `p_{k,α,N}` of the seminorm family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeminormIndex {
    pub k: usize,
    pub alpha: Vec<usize>,
    pub n: u32,
}

impl SeminormIndex {
    pub fn order(&self) -> usize {
        self.alpha.iter().sum()
    }
}

/// The capped family `{p_{k,α,N}}` and the weight model of `∇_N^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormModel {
    pub kind: SpaceKind,
    pub dim: usize,
    pub k_max: usize,
    pub n_max: u32,
    /// Largest `|α|` in the family: 0 for `L_p`, `min(m, α_max)` otherwise.
    pub order_max: usize,
}

impl SeminormModel {
    /// All indices within the caps, sorted by `(k, |α|, N)`, then `α`.
    pub fn indices(&self) -> Vec<SeminormIndex> {
        let mut out = Vec::new();
        for k in 1..=self.k_max {
            for alpha in multi_indices(self.dim, self.order_max) {
                for n in 0..=self.n_max {
                    out.push(SeminormIndex {
                        k,
                        alpha: alpha.clone(),
                        n,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            (a.k, a.order(), a.n, std::cmp::Reverse(a.alpha.clone())).cmp(&(
                b.k,
                b.order(),
                b.n,
                std::cmp::Reverse(b.alpha.clone()),
            ))
        });
        out
    }

    /// `(1 + ‖x‖)^N` for the Schwartz model, 1 otherwise.
    #[inline]
    pub fn weight(&self, n: u32, x: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Schwartz if n > 0 => {
                (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()).powi(n as i32)
            }
            _ => 1.0,
        }
    }

    /// Multinomial Leibniz coefficient `c_{β,γ;α} = α! / (β! γ!)` when `β + γ = α`.
    pub fn leibniz_coefficient(beta: &[usize], gamma: &[usize], alpha: &[usize]) -> f64 {
        let mut c = 1.0;
        for ((&b, &g), &a) in beta.iter().zip(gamma).zip(alpha) {
            if b + g != a {
                return 0.0;
            }
            c *= binomial(a, b);
        }
        c
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Multi-indices of length `dim` with `|α| ≤ order`, graded, then reverse
/// lexicographic within a grade (`x` powers first).
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=order {
        match dim {
            1 => out.push(vec![total]),
            _ => {
                for a in (0..=total).rev() {
                    out.push(vec![a, total - a]);
                }
            }
        }
    }
    out
}

/// A validated space together with its seminorm model and one rule per `U_k`.
#[derive(Debug, Clone)]
pub struct SpaceSpec {
    kind: SpaceKind,
    domain: Domain,
    measure: MeasureSpec,
    p: f64,
    m: usize,
    caps: Caps,
    model: SeminormModel,
    rules: Vec<QuadratureRule>,
}

fn default_rule(kind: SpaceKind) -> RuleOptions {
    match kind {
        SpaceKind::Lp => RuleOptions::composite(24),
        SpaceKind::Cm => RuleOptions::composite(16).with_panels(16),
        SpaceKind::Schwartz => RuleOptions::composite(16).with_core(16.0, 0.5),
    }
}

pub fn make_space(params: SpaceParams) -> Result<SpaceSpec, SpaceError> {
    let SpaceParams {
        kind,
        domain,
        measure,
        p,
        m,
        caps,
        rule,
    } = params;
    let dim = domain.dim();
    let bad = |msg: String| Err(SpaceError::Inconsistent(msg));
    if caps.k_max == 0 {
        return bad("k_max must be at least 1".into());
    }
    match kind {
        SpaceKind::Lp => {
            if !(p >= 1.0 && p.is_finite()) {
                return bad(format!("Lp needs 1 ≤ p < ∞, got {p}"));
            }
            if m != 0 || caps.alpha_max != 0 || caps.n_max != 0 {
                return bad("Lp spaces have m = 0 and no weighted derivatives".into());
            }
            if domain.exhaustion() != Exhaustion::Whole {
                return bad("Lp spaces use U_k = U".into());
            }
        }
        SpaceKind::Cm => {
            if p != f64::INFINITY {
                return bad(format!("C^m spaces use p = ∞, got {p}"));
            }
            if caps.n_max != 0 {
                return bad("C^m spaces have no polynomial weights (N_max = 0)".into());
            }
            if m > DEFAULT_MAX_DERIVATIVE_ORDER {
                return bad(format!(
                    "m = {m} exceeds the derivative cap {DEFAULT_MAX_DERIVATIVE_ORDER}"
                ));
            }
            if !matches!(domain.exhaustion(), Exhaustion::Inset { .. }) {
                return bad(
                    "C^m spaces need an exhaustion by relatively compact sets (inset)".into(),
                );
            }
            domain.validate_exhaustion(caps.k_max)?;
        }
        SpaceKind::Schwartz => {
            if domain
                .axes()
                .iter()
                .any(|&(lo, hi)| lo.is_finite() || hi.is_finite())
            {
                return bad("Schwartz spaces live on all of R^n".into());
            }
            if domain.exhaustion() != Exhaustion::Whole {
                return bad("Schwartz spaces use U_k = R^n".into());
            }
            if !(p >= 1.0) {
                return bad(format!("invalid exponent {p}"));
            }
            if caps.alpha_max > DEFAULT_MAX_DERIVATIVE_ORDER {
                return bad(format!(
                    "α_max = {} exceeds the derivative cap",
                    caps.alpha_max
                ));
            }
        }
    }
    let order_max = match kind {
        SpaceKind::Lp => 0,
        SpaceKind::Cm => m.min(caps.alpha_max),
        SpaceKind::Schwartz => caps.alpha_max,
    };
    let m = if kind == SpaceKind::Schwartz {
        caps.alpha_max
    } else {
        m
    };
    let opts = rule.unwrap_or_else(|| default_rule(kind));
    let mut rules = Vec::with_capacity(caps.k_max);
    for k in 1..=caps.k_max {
        let uk = domain.exhaustion_domain(k)?;
        let r = build_quadrature_with(&uk, &opts)?;
        measure.validate(&domain, r.iter().map(|(x, _)| x))?;
        rules.push(r);
    }
    Ok(SpaceSpec {
        kind,
        model: SeminormModel {
            kind,
            dim,
            k_max: caps.k_max,
            n_max: caps.n_max,
            order_max,
        },
        domain,
        measure,
        p,
        m,
        caps,
        rules,
    })
}

impl SpaceSpec {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn model(&self) -> &SeminormModel {
        &self.model
    }

    /// Rule on `U_k` (k ≥ 1).
    pub fn rule(&self, k: usize) -> &QuadratureRule {
        &self.rules[k.clamp(1, self.rules.len()) - 1]
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate_exponent(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    fn check_index(&self, k: usize, alpha: &[usize], n: u32) -> Result<(), SpaceError> {
        let order: usize = alpha.iter().sum();
        if k == 0
            || k > self.caps.k_max
            || order > self.model.order_max
            || n > self.model.n_max
            || alpha.len() != self.model.dim
        {
            return Err(SpaceError::IndexOutOfCaps {
                k,
                alpha: alpha.to_vec(),
                n,
            });
        }
        Ok(())
    }

    /// `‖χ_k (1+‖x‖)^N g‖_p` where `g(x)` returns `|D^α f(x)|`.
    fn seminorm_with(
        &self,
        k: usize,
        n: u32,
        g: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Result<f64, SpaceError> {
        let model = &self.model;
        Ok(lp_norm_fn(
            |x| model.weight(n, x) * g(x),
            self.p,
            self.rule(k),
            &self.measure,
        )?)
    }
}

fn derivative_value(f: &ScalarField, alpha: &[usize], x: &[f64]) -> f64 {
    let order: usize = alpha.iter().sum();
    if order == 0 {
        return f.eval(x);
    }
    match f.jet(x, order) {
        Ok(j) => j.derivative(alpha),
        Err(_) => f64::NAN,
    }
}

fn require_smooth(f: &ScalarField, alpha: &[usize]) -> Result<(), SpaceError> {
    let order: usize = alpha.iter().sum();
    if order > 0 && !f.is_smooth() {
        return Err(FuncModelError::NotSmooth(f.to_string()).into());
    }
    Ok(())
}

/// `p_{k,α,N}(f)`.
pub fn seminorm(
    space: &SpaceSpec,
    f: &ScalarField,
    k: usize,
    alpha: &[usize],
    n: u32,
) -> Result<f64, SpaceError> {
    space.check_index(k, alpha, n)?;
    require_smooth(f, alpha)?;
    space.seminorm_with(k, n, |x| derivative_value(f, alpha, x).abs())
}

/// `p_{k,α,N}` of a complex field, through the modulus of `∇_N^α f`.
pub fn seminorm_complex(
    space: &SpaceSpec,
    f: &ComplexField,
    k: usize,
    alpha: &[usize],
    n: u32,
) -> Result<f64, SpaceError> {
    space.check_index(k, alpha, n)?;
    require_smooth(&f.re, alpha)?;
    if let Some(im) = &f.im {
        require_smooth(im, alpha)?;
    }
    space.seminorm_with(k, n, |x| {
        let re = derivative_value(&f.re, alpha, x);
        let im = f.im.as_ref().map_or(0.0, |g| derivative_value(g, alpha, x));
        Complex64::new(re, im).norm()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub k: usize,
    pub alpha: Vec<usize>,
    pub n: u32,
    pub value: f64,
}

/// Every seminorm within the caps, in `(k, |α|, N)` order.
pub fn seminorm_panel(space: &SpaceSpec, f: &ScalarField) -> Result<Vec<PanelRow>, SpaceError> {
    use rayon::prelude::*;
    space
        .model
        .indices()
        .into_par_iter()
        .map(|idx| {
            let value = seminorm(space, f, idx.k, &idx.alpha, idx.n)?;
            Ok(PanelRow {
                k: idx.k,
                alpha: idx.alpha,
                n: idx.n,
                value,
            })
        })
        .collect()
}

/// `max` over the capped family of `p(f)`: the distance used for verdicts.
pub fn capped_distance(space: &SpaceSpec, f: &ScalarField) -> Result<f64, SpaceError> {
    Ok(seminorm_panel(space, f)?
        .iter()
        .map(|r| r.value)
        .fold(0.0, f64::max))
}

pub fn format_alpha(alpha: &[usize]) -> String {
    alpha
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV with columns `k, alpha, N, value`.
pub fn write_panel_csv<W: Write>(rows: &[PanelRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "alpha", "N", "value"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            format_alpha(&r.alpha),
            r.n.to_string(),
            format!("{:e}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest discrepancy, relative to `max(1, |lhs|)`, between `∇_N^α(gf)` and
/// `Σ c_{β,γ;α} (D^β g)(∇_N^γ f)` over the given points.
pub fn leibniz_discrepancy(
    model: &SeminormModel,
    g: &ScalarField,
    f: &ScalarField,
    alpha: &[usize],
    n: u32,
    points: &[Vec<f64>],
) -> Result<f64, SpaceError> {
    let order: usize = alpha.iter().sum();
    let product = g.mul(f);
    let mut worst = 0.0f64;
    for x in points {
        let jg = g.jet(x, order)?;
        let jf = f.jet(x, order)?;
        let jp = product.jet(x, order)?;
        let w = model.weight(n, x);
        let lhs = w * jp.derivative(alpha);
        let mut rhs = 0.0;
        for beta in multi_indices(alpha.len(), order) {
            if beta.iter().zip(alpha).any(|(b, a)| b > a) {
                continue;
            }
            let gamma: Vec<usize> = alpha.iter().zip(&beta).map(|(a, b)| a - b).collect();
            let c = SeminormModel::leibniz_coefficient(&beta, &gamma, alpha);
            rhs += c * jg.derivative(&beta) * w * jf.derivative(&gamma);
        }
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(worst)
}
