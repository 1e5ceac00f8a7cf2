use serde::{Deserialize, Serialize};

use super::recurrence::Recurrence;
use super::{Domain, NumericsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussLegendreComposite,
    GaussHermite,
    GaussLaguerre,
    TanhSinh,
}

/// Truncation of unbounded axes at `radius`; the tail bound `C e^{-c R}`
/// fitted from samples at `R` and `2R` uses a decay rate of at most `growth_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub radius: f64,
    pub growth_cap: f64,
}

impl Default for TailSpec {
    fn default() -> Self {
        TailSpec {
            radius: 2.0e4,
            growth_cap: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exactness {
    /// Polynomials of this degree against Lebesgue measure.
    Polynomial(usize),
    /// Polynomials times `e^{-x²}`.
    HermiteWeighted(usize),
    /// Polynomials times `e^{-(x-a)}` on `(a, ∞)`.
    LaguerreWeighted(usize),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOptions {
    pub kind: QuadratureKind,
    /// Nodes per panel (Gauss kinds) or nodes per unit step of the DE map.
    pub order: usize,
    /// Uniform panels on a bounded axis.
    pub panels: usize,
    /// Panel width in the core region of an unbounded axis.
    pub panel_width: f64,
    /// Half-width of the uniformly paneled core on unbounded axes.
    pub core_radius: f64,
    /// Ratio between consecutive panels outside the core.
    pub growth: f64,
    /// Geometric refinement levels toward finite endpoints; `None` grades
    /// half-line endpoints only.
    pub grade_levels: Option<usize>,
    pub tail: TailSpec,
}

impl RuleOptions {
    pub fn new(kind: QuadratureKind, order: usize) -> Self {
        RuleOptions {
            kind,
            order,
            panels: 8,
            panel_width: 0.5,
            core_radius: 12.0,
            growth: 1.25,
            grade_levels: None,
            tail: TailSpec::default(),
        }
    }

    pub fn composite(order: usize) -> Self {
        Self::new(QuadratureKind::GaussLegendreComposite, order)
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    pub fn with_core(mut self, core_radius: f64, panel_width: f64) -> Self {
        self.core_radius = core_radius;
        self.panel_width = panel_width;
        self
    }

    pub fn with_grading(mut self, levels: usize) -> Self {
        self.grade_levels = Some(levels);
        self
    }

    pub fn with_tail(mut self, tail: TailSpec) -> Self {
        self.tail = tail;
        self
    }
}

/// Nodes and positive weights for `∫_U f dx` (Lebesgue). Gauss–Hermite and
/// Gauss–Laguerre weights already include the inverse reference weight, so
/// every rule is applied the same way: `Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    order: usize,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    axes: Vec<(f64, f64)>,
    exactness: Exactness,
    tail: Option<TailSpec>,
    coarse: Option<Box<QuadratureRule>>,
}

impl QuadratureRule {
    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Closure of the region the nodes cover (truncated at the tail radius).
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Axes of the domain the rule was built for.
    pub fn domain_axes(&self) -> &[(f64, f64)] {
        &self.axes
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    /// Present when an unbounded axis was truncated.
    pub fn tail(&self) -> Option<TailSpec> {
        self.tail
    }

    /// Companion rule at roughly half the order, for error estimates.
    pub fn coarse(&self) -> Option<&QuadratureRule> {
        self.coarse.as_deref()
    }

    /// Plain weighted sum `Σ w_i f(x_i)`.
    pub fn sum(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

struct AxisRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bounds: (f64, f64),
    truncated: bool,
    exact_degree: Option<usize>,
}

fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    Recurrence::legendre(order + 1).gauss(order)
}

fn push_panel(
    unit: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (t, w) in unit.0.iter().zip(&unit.1) {
        nodes.push(mid + half * t);
        weights.push(half * w);
    }
}

/// Panel edges from a finite endpoint `a` going a distance `len` in
/// direction `dir`, refined geometrically toward `a`.
fn graded_edges(a: f64, len: f64, dir: f64, first_width: f64, levels: usize) -> Vec<f64> {
    let mut edges = vec![a];
    let mut w = first_width * 0.5f64.powi(levels as i32);
    let mut pos = 0.0;
    for _ in 0..levels {
        pos += w;
        edges.push(a + dir * pos);
        w *= 2.0;
    }
    let _ = len;
    edges
}

fn composite_axis(lo: f64, hi: f64, opts: &RuleOptions, order: usize) -> AxisRule {
    let unit = gauss_legendre_unit(order);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut edges: Vec<f64>;
    let mut truncated = false;
    let bounded = lo.is_finite() && hi.is_finite();
    let default_grade = if bounded { 0 } else { 40 };
    let levels = opts.grade_levels.unwrap_or(default_grade);
    let r = opts.tail.radius;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let h = (hi - lo) / opts.panels.max(1) as f64;
            edges = (0..=opts.panels.max(1))
                .map(|i| lo + h * i as f64)
                .collect();
            if levels > 0 {
                // refine the first and last panels toward the endpoints
                let left = graded_edges(lo, h, 1.0, h, levels);
                let right = graded_edges(hi, h, -1.0, h, levels);
                let mut e = left;
                e.extend(edges[1..edges.len() - 1].iter().copied());
                e.extend(right.into_iter().rev());
                e.dedup();
                edges = e;
            }
        }
        (true, false) | (false, true) => {
            truncated = true;
            let (a, dir) = if lo.is_finite() {
                (lo, 1.0)
            } else {
                (hi, -1.0)
            };
            let h = opts.panel_width;
            let mut e = graded_edges(a, h, dir, h, levels);
            let mut pos = (e.last().unwrap() - a).abs();
            while pos + 1e-12 < opts.core_radius {
                pos = (pos + h).min(opts.core_radius);
                e.push(a + dir * pos);
            }
            while pos < r {
                pos = (pos * opts.growth).max(pos + h).min(r);
                e.push(a + dir * pos);
            }
            if dir < 0.0 {
                e.reverse();
            }
            edges = e;
        }
        (false, false) => {
            truncated = true;
            let h = opts.panel_width;
            let mut right = vec![0.0];
            let mut pos = 0.0;
            while pos + 1e-12 < opts.core_radius {
                pos = (pos + h).min(opts.core_radius);
                right.push(pos);
            }
            while pos < r {
                pos = (pos * opts.growth).max(pos + h).min(r);
                right.push(pos);
            }
            let mut e: Vec<f64> = right.iter().skip(1).rev().map(|v| -v).collect();
            e.extend(right);
            edges = e;
        }
    }
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            push_panel(&unit, pair[0], pair[1], &mut nodes, &mut weights);
        }
    }
    let bounds = (
        if lo.is_finite() { lo } else { -r },
        if hi.is_finite() { hi } else { r },
    );
    AxisRule {
        nodes,
        weights,
        bounds,
        truncated,
        exact_degree: if bounded { Some(2 * order - 1) } else { None },
    }
}

fn hermite_axis(order: usize) -> AxisRule {
    let (x, w) = Recurrence::hermite(order + 1).gauss(order);
    let weights = x.iter().zip(&w).map(|(t, wt)| wt * (t * t).exp()).collect();
    AxisRule {
        bounds: (f64::NEG_INFINITY, f64::INFINITY),
        nodes: x,
        weights,
        truncated: false,
        exact_degree: Some(2 * order - 1),
    }
}

fn laguerre_axis(a: f64, dir: f64, order: usize) -> AxisRule {
    let (t, w) = Recurrence::laguerre(order + 1, 0.0).gauss(order);
    let mut nodes: Vec<f64> = t.iter().map(|s| a + dir * s).collect();
    let mut weights: Vec<f64> = t.iter().zip(&w).map(|(s, wt)| wt * s.exp()).collect();
    if dir < 0.0 {
        nodes.reverse();
        weights.reverse();
    }
    let bounds = if dir > 0.0 {
        (a, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, a)
    };
    AxisRule {
        nodes,
        weights,
        bounds,
        truncated: false,
        exact_degree: Some(2 * order - 1),
    }
}

/// Double-exponential rules: tanh-sinh on bounded axes, exp-sinh on half
/// lines, sinh-sinh on the whole line. Step `h = 1/order`.
fn tanh_sinh_axis(lo: f64, hi: f64, order: usize) -> AxisRule {
    use std::f64::consts::FRAC_PI_2;
    let h = 1.0 / order as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push = |x: f64, w: f64| {
        if w > 0.0 && w.is_finite() && x.is_finite() && x > lo && x < hi {
            nodes.push(x);
            weights.push(w);
        }
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let len = hi - lo;
            let n = (4.5 / h).ceil() as i64;
            for j in -n..=n {
                let t = j as f64 * h;
                let u = FRAC_PI_2 * t.sinh();
                // distances to both ends, computed without cancellation
                let d_lo = len / (1.0 + (2.0 * u).exp());
                let d_hi = len / (1.0 + (-2.0 * u).exp());
                let x = if u < 0.0 { lo + d_lo } else { hi - d_hi };
                let w = h * len * FRAC_PI_2 * t.cosh() / (2.0 * u.cosh().powi(2));
                push(x, w);
            }
        }
        (true, false) | (false, true) => {
            let (a, dir) = if lo.is_finite() {
                (lo, 1.0)
            } else {
                (hi, -1.0)
            };
            let n_lo = (5.5 / h).ceil() as i64;
            let n_hi = (4.5 / h).ceil() as i64;
            for j in -n_lo..=n_hi {
                let t = j as f64 * h;
                let s = (FRAC_PI_2 * t.sinh()).exp();
                let w = h * s * FRAC_PI_2 * t.cosh();
                push(a + dir * s, w);
            }
        }
        (false, false) => {
            let n = (4.5 / h).ceil() as i64;
            for j in -n..=n {
                let t = j as f64 * h;
                let u = FRAC_PI_2 * t.sinh();
                push(u.sinh(), h * u.cosh() * FRAC_PI_2 * t.cosh());
            }
        }
    }
    let mut idx: Vec<usize> = (0..nodes.len()).collect();
    idx.sort_by(|&i, &j| nodes[i].partial_cmp(&nodes[j]).unwrap());
    AxisRule {
        nodes: idx.iter().map(|&i| nodes[i]).collect(),
        weights: idx.iter().map(|&i| weights[i]).collect(),
        bounds: (lo, hi),
        truncated: false,
        exact_degree: None,
    }
}

fn axis_rule(
    lo: f64,
    hi: f64,
    opts: &RuleOptions,
    order: usize,
) -> Result<AxisRule, NumericsError> {
    Ok(match opts.kind {
        QuadratureKind::GaussLegendreComposite => composite_axis(lo, hi, opts, order),
        QuadratureKind::GaussHermite => {
            if lo.is_finite() || hi.is_finite() {
                return Err(NumericsError::IncompatibleKind {
                    kind: opts.kind,
                    reason: "Gauss–Hermite needs an axis unbounded on both sides".into(),
                });
            }
            hermite_axis(order)
        }
        QuadratureKind::GaussLaguerre => match (lo.is_finite(), hi.is_finite()) {
            (true, false) => laguerre_axis(lo, 1.0, order),
            (false, true) => laguerre_axis(hi, -1.0, order),
            _ => {
                return Err(NumericsError::IncompatibleKind {
                    kind: opts.kind,
                    reason: "Gauss–Laguerre needs a half-line axis".into(),
                })
            }
        },
        QuadratureKind::TanhSinh => tanh_sinh_axis(lo, hi, order),
    })
}

fn assemble(
    domain: &Domain,
    opts: &RuleOptions,
    order: usize,
) -> Result<QuadratureRule, NumericsError> {
    let axes: Vec<AxisRule> = domain
        .axes()
        .iter()
        .map(|&(lo, hi)| axis_rule(lo, hi, opts, order))
        .collect::<Result<_, _>>()?;
    let dim = axes.len();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            nodes = axes[0].nodes.clone();
            weights = axes[0].weights.clone();
        }
        _ => {
            for (x, wx) in axes[0].nodes.iter().zip(&axes[0].weights) {
                for (y, wy) in axes[1].nodes.iter().zip(&axes[1].weights) {
                    nodes.push(*x);
                    nodes.push(*y);
                    weights.push(wx * wy);
                }
            }
        }
    }
    let exactness = match opts.kind {
        QuadratureKind::GaussHermite => Exactness::HermiteWeighted(2 * order - 1),
        QuadratureKind::GaussLaguerre => Exactness::LaguerreWeighted(2 * order - 1),
        _ => match axes
            .iter()
            .map(|a| a.exact_degree)
            .collect::<Option<Vec<_>>>()
        {
            Some(d) => Exactness::Polynomial(d.into_iter().min().unwrap_or(0)),
            None => Exactness::None,
        },
    };
    let truncated = axes.iter().any(|a| a.truncated);
    Ok(QuadratureRule {
        kind: opts.kind,
        order,
        dim,
        nodes,
        weights,
        bounds: axes.iter().map(|a| a.bounds).collect(),
        axes: domain.axes().to_vec(),
        exactness,
        tail: truncated.then_some(opts.tail),
        coarse: None,
    })
}

/// Build a rule with explicit options; a coarse companion at half the order
/// is attached for error estimation.
pub fn build_quadrature_with(
    domain: &Domain,
    opts: &RuleOptions,
) -> Result<QuadratureRule, NumericsError> {
    if opts.order < 1 {
        return Err(NumericsError::InvalidOrder(opts.order));
    }
    let mut rule = assemble(domain, opts, opts.order)?;
    let coarse_order = opts.order.div_ceil(2);
    if coarse_order < opts.order {
        rule.coarse = Some(Box::new(assemble(domain, opts, coarse_order)?));
    }
    Ok(rule)
}

/// Build a rule of the given kind and order with default paneling.
pub fn build_quadrature(
    domain: &Domain,
    kind: QuadratureKind,
    order: usize,
    tail: TailSpec,
) -> Result<QuadratureRule, NumericsError> {
    build_quadrature_with(domain, &RuleOptions::new(kind, order).with_tail(tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_exactness_on_interval() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let rule = build_quadrature(
            &d,
            QuadratureKind::GaussLegendreComposite,
            8,
            TailSpec::default(),
        )
        .unwrap();
        assert_eq!(rule.exactness(), Exactness::Polynomial(15));
        for k in 0..=15 {
            let got = rule.sum(|x| x[0].powi(k));
            let want = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-13, "degree {k}: {got}");
        }
    }

    #[test]
    fn kind_domain_compatibility() {
        let interval = Domain::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            build_quadrature(
                &interval,
                QuadratureKind::GaussHermite,
                10,
                TailSpec::default()
            ),
            Err(NumericsError::IncompatibleKind { .. })
        ));
        assert!(matches!(
            build_quadrature(
                &Domain::real_line(),
                QuadratureKind::GaussLaguerre,
                10,
                TailSpec::default()
            ),
            Err(NumericsError::IncompatibleKind { .. })
        ));
        assert!(matches!(
            build_quadrature(&interval, QuadratureKind::TanhSinh, 0, TailSpec::default()),
            Err(NumericsError::InvalidOrder(0))
        ));
    }

    #[test]
    fn weights_positive_nodes_inside() {
        for d in [
            Domain::half_line(),
            Domain::real_line(),
            Domain::interval(-2.0, 3.0).unwrap(),
        ] {
            for kind in [
                QuadratureKind::GaussLegendreComposite,
                QuadratureKind::TanhSinh,
            ] {
                let rule = build_quadrature(&d, kind, 12, TailSpec::default()).unwrap();
                for (x, w) in rule.iter() {
                    assert!(w > 0.0);
                    assert!(d.contains(x), "{kind:?} node {x:?} outside {:?}", d.axes());
                }
            }
        }
    }

    #[test]
    fn tensor_rule_in_plane() {
        let d = Domain::new(
            vec![(-1.0, 1.0), (0.0, 2.0)],
            super::super::Exhaustion::Whole,
        )
        .unwrap();
        let rule = build_quadrature(
            &d,
            QuadratureKind::GaussLegendreComposite,
            4,
            TailSpec::default(),
        )
        .unwrap();
        let got = rule.sum(|x| x[0] * x[0] * x[1]);
        // ∫x² dx over (-1,1) = 2/3, ∫y dy over (0,2) = 2
        assert!((got - 4.0 / 3.0).abs() < 1e-13);
    }
}
