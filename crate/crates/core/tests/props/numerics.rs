use density_lab::numerics::{
    build_quadrature_with, integrate_fn, lp_norm, Domain, MeasureSpec, Recurrence, RuleOptions,
};
use proptest::prelude::*;

use super::{check, fail, smooth_field};

/// `Γ(k + s)` for `s ∈ {1/2, 1}` by the downward recurrence from `Γ(s)`.
fn gamma_shifted(k: usize, half: bool) -> f64 {
    let (mut g, s) = if half {
        (std::f64::consts::PI.sqrt(), 0.5)
    } else {
        (1.0, 1.0)
    };
    for j in 0..k {
        g *= j as f64 + s;
    }
    g
}

/// Gauss rules from the three-term recurrences against closed-form moments:
/// Legendre on (-1,1), Hermite `e^{-x²}`, Laguerre `x^a e^{-x}` with `a ∈ {0, -1/2}`.
pub fn gauss_exactness(cases: u32) -> Result<(), String> {
    let strategy = (0usize..4, 1usize..=30, 0.0f64..1.0);
    check(cases, strategy, |(family, n, u)| {
        let d = ((u * (2 * n) as f64) as usize).min(2 * n - 1);
        let (rec, exact) = match family {
            0 => (
                Recurrence::legendre(n),
                if d.is_multiple_of(2) { 2.0 / (d as f64 + 1.0) } else { 0.0 },
            ),
            1 => (
                Recurrence::hermite(n),
                if d.is_multiple_of(2) { gamma_shifted(d / 2, true) } else { 0.0 },
            ),
            2 => (Recurrence::laguerre(n, 0.0), gamma_shifted(d, false)),
            _ => (Recurrence::laguerre(n, -0.5), gamma_shifted(d, true)),
        };
        let (nodes, weights) = rec.gauss(n);
        let approx: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(d as i32)).sum();
        let scale: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.abs().powi(d as i32))
            .sum::<f64>()
            .max(exact.abs());
        let rel = (approx - exact).abs() / scale;
        prop_assert!(rel < 1e-12, "family {family}, n = {n}, degree {d}: {approx} vs {exact} (rel {rel:.2e})");
        Ok(())
    })
}

pub fn integration_linearity(cases: u32) -> Result<(), String> {
    let rule = build_quadrature_with(&Domain::real_line(), &RuleOptions::composite(20)).unwrap();
    let leb = MeasureSpec::lebesgue();
    let strategy = (smooth_field(), smooth_field(), -3.0f64..3.0, -3.0f64..3.0);
    check(cases, strategy, |(f, g, a, b)| {
        let lhs = integrate_fn(|x| a * f.eval(x) + b * g.eval(x), &rule, &leb).map_err(fail)?;
        let i_f = integrate_fn(|x| f.eval(x), &rule, &leb).map_err(fail)?;
        let i_g = integrate_fn(|x| g.eval(x), &rule, &leb).map_err(fail)?;
        let n_f = integrate_fn(|x| f.eval(x).abs(), &rule, &leb).map_err(fail)?;
        let n_g = integrate_fn(|x| g.eval(x).abs(), &rule, &leb).map_err(fail)?;
        let diff = (lhs.value - a * i_f.value - b * i_g.value).abs();
        let bound = 1e-12 * (a.abs() * n_f.value + b.abs() * n_g.value);
        prop_assert!(diff < bound.max(f64::MIN_POSITIVE), "{diff:.3e} >= {bound:.3e}");
        Ok(())
    })
}

pub fn lp_norm_triangle_and_homogeneity(cases: u32) -> Result<(), String> {
    let rule = build_quadrature_with(&Domain::real_line(), &RuleOptions::composite(16)).unwrap();
    let leb = MeasureSpec::lebesgue();
    let p = prop_oneof![3 => 1.0f64..6.0, 1 => Just(f64::INFINITY)];
    let strategy = (smooth_field(), smooth_field(), p, -4.0f64..4.0);
    check(cases, strategy, |(f, g, p, c)| {
        let nf = lp_norm(&f, p, &rule, &leb).map_err(fail)?;
        let ng = lp_norm(&g, p, &rule, &leb).map_err(fail)?;
        let nfg = lp_norm(&f.add(&g), p, &rule, &leb).map_err(fail)?;
        prop_assert!(nfg <= nf + ng + 1e-10, "p = {p}: {nfg} > {nf} + {ng}");
        let ncf = lp_norm(&f.scale(c), p, &rule, &leb).map_err(fail)?;
        let rel = (ncf - c.abs() * nf).abs() / (c.abs() * nf).max(f64::MIN_POSITIVE);
        prop_assert!(rel < 1e-10, "p = {p}, c = {c}: {ncf} vs {} (rel {rel:.2e})", c.abs() * nf);
        Ok(())
    })
}

pub fn order_doubling_within_estimate(cases: u32) -> Result<(), String> {
    let line = Domain::real_line();
    let leb = MeasureSpec::lebesgue();
    let strategy = (4usize..=40, 0.25f64..1.0);
    check(cases, strategy, |(n, width)| {
        let opts = RuleOptions::composite(n).with_core(12.0, width);
        let coarse = build_quadrature_with(&line, &opts).map_err(fail)?;
        let fine = build_quadrature_with(&line, &RuleOptions { order: 2 * n, ..opts }).map_err(fail)?;
        let g = |x: &[f64]| (-x[0] * x[0]).exp();
        let a = integrate_fn(g, &coarse, &leb).map_err(fail)?;
        let b = integrate_fn(g, &fine, &leb).map_err(fail)?;
        let change = (b.value - a.value).abs();
        prop_assert!(
            change < a.error_estimate,
            "order {n}, width {width}: change {change:.3e} vs estimate {:.3e}",
            a.error_estimate
        );
        Ok(())
    })
}
