use density_lab::funcmodel::{
    eval_exponential, make_phi, ComplexFrequency, PhiSpec, ScalarField,
};
use density_lab::numerics::Domain;
use proptest::prelude::*;

use super::{check, fail, smooth_field};

/// Central difference of order 1 or 2 at step `h`.
fn central(f: &ScalarField, x: f64, h: f64, order: usize) -> f64 {
    let e = |t: f64| f.eval(&[t]);
    match order {
        1 => (e(x + h) - e(x - h)) / (2.0 * h),
        _ => (e(x + h) - 2.0 * e(x) + e(x - h)) / (h * h),
    }
}

/// Two Richardson levels on `h, h/2, h/4`, eliminating `h²` and `h⁴`.
fn richardson(f: &ScalarField, x: f64, order: usize) -> f64 {
    let h = if order == 1 { 0.02 } else { 0.05 };
    let d: Vec<f64> = (0..3).map(|j| central(f, x, h / 2f64.powi(j), order)).collect();
    let r1: Vec<f64> = d.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    (16.0 * r1[1] - r1[0]) / 15.0
}

pub fn jet_matches_richardson(cases: u32) -> Result<(), String> {
    let strategy = (smooth_field(), -2.0f64..2.0);
    check(cases, strategy, |(f, x)| {
        let jet = f.jet(&[x], 2).map_err(fail)?;
        for order in [1usize, 2] {
            let exact = jet.derivative(&[order]);
            let fd = richardson(&f, x, order);
            let rel = (exact - fd).abs() / exact.abs().max(1.0);
            prop_assert!(rel < 1e-6, "{f} at {x}, order {order}: jet {exact} vs fd {fd}");
        }
        Ok(())
    })
}

fn frequency(dim: usize, eps: f64) -> impl Strategy<Value = ComplexFrequency> {
    (
        prop::collection::vec(-5.0f64..5.0, dim),
        prop::collection::vec(-1.0f64..1.0, dim),
    )
        .prop_map(move |(re, dir)| {
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            // keep ‖Im λ‖ below ε/2 so sums stay in the strip
            let im = dir.iter().map(|v| v / norm * 0.49 * eps * v.abs()).collect();
            ComplexFrequency::new(re, im, eps).expect("in strip")
        })
}

pub fn exponential_group_law(cases: u32) -> Result<(), String> {
    let eps = 1.5;
    let strategy = (1usize..=2).prop_flat_map(move |dim| {
        (
            Just(dim),
            frequency(dim, eps),
            frequency(dim, eps),
            prop::collection::vec(-3.0f64..3.0, dim),
        )
    });
    check(cases, strategy, |(dim, l1, l2, x)| {
        let domain = Domain::whole_space(dim);
        let phi = make_phi(&PhiSpec::Identity, &domain).map_err(fail)?;
        let one = ScalarField::constant(1.0);
        let sum = l1.add(&l2).map_err(fail)?;
        let lhs = eval_exponential(&l1, &phi, &one, &x) * eval_exponential(&l2, &phi, &one, &x);
        let rhs = eval_exponential(&sum, &phi, &one, &x);
        let diff = (lhs - rhs).norm();
        prop_assert!(diff < 1e-12 * rhs.norm().max(1.0), "{diff:.3e} at {x:?}");
        Ok(())
    })
}

pub fn parser_round_trip(cases: u32) -> Result<(), String> {
    let strategy = (smooth_field(), prop::collection::vec(-4.0f64..4.0, 100));
    check(cases, strategy, |(f, points)| {
        let printed = f.to_string();
        let g = ScalarField::parse(&printed).map_err(fail)?;
        prop_assert_eq!(f.is_smooth(), g.is_smooth());
        for x in points {
            let (a, b) = (f.eval(&[x]), g.eval(&[x]));
            let rel = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
            prop_assert!(a == b || rel < 1e-14, "{printed} at {x}: {a} vs {b}");
        }
        Ok(())
    })
}
