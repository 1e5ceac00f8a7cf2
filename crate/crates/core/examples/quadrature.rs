//! Gauss rules on the line, the half line and an endpoint-singular integrand.

use density_lab::numerics::{
    build_quadrature, integrate_fn, Domain, MeasureSpec, QuadratureKind, TailSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lebesgue = MeasureSpec::lebesgue();
    let cases: [(&str, Domain, QuadratureKind, fn(&[f64]) -> f64, f64); 4] = [
        ("exp(-x^2) on R, Gauss-Hermite", Domain::real_line(), QuadratureKind::GaussHermite, |x| (-x[0] * x[0]).exp(), std::f64::consts::PI.sqrt()),
        ("exp(-x^2) on R, composite", Domain::real_line(), QuadratureKind::GaussLegendreComposite, |x| (-x[0] * x[0]).exp(), std::f64::consts::PI.sqrt()),
        ("x exp(-x) on (0,inf), Gauss-Laguerre", Domain::half_line(), QuadratureKind::GaussLaguerre, |x| x[0] * (-x[0]).exp(), 1.0),
        ("x^-1/2 exp(-x) on (0,inf), tanh-sinh", Domain::half_line(), QuadratureKind::TanhSinh, |x| (-x[0]).exp() / x[0].sqrt(), std::f64::consts::PI.sqrt()),
    ];
    for (name, domain, kind, f, exact) in cases {
        let order = if kind == QuadratureKind::TanhSinh { 64 } else { 40 };
        let rule = build_quadrature(&domain, kind, order, TailSpec::default())?;
        let est = integrate_fn(f, &rule, &lebesgue)?;
        println!(
            "{name:<40} nodes {:>5}  value {:.16}  rel err {:.1e}  estimate {:.1e}",
            rule.len(),
            est.value,
            (est.value - exact).abs() / exact,
            est.error_estimate
        );
    }
    Ok(())
}
