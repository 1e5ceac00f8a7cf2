use std::sync::Arc;

use density_lab::approx::DualFunctional;
use density_lab::experiment::{preset_config, run_experiment};
use density_lab::funcmodel::{make_phi, preset_weight, ComplexFrequency, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{build_quadrature_with, Domain, MeasureSpec, RuleOptions};
use density_lab::verify::{
    check_lemma212, check_prop210, h_map, richardson_derivative, DiffMethod, FourierConvention,
    HolomorphicProbe, TransformSource,
};
use proptest::prelude::*;

use super::{check, fail};

const EPS: f64 = 2.0;

fn probe(shift: f64, width: f64) -> HolomorphicProbe {
    let line = Domain::real_line();
    HolomorphicProbe::new(
        DualFunctional::Integrate {
            g: ScalarField::parse(&format!("exp(-{width}*(x-({shift}))^2)")).unwrap(),
        },
        make_phi(&PhiSpec::Identity, &line).unwrap(),
        preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap(),
        EPS,
        build_quadrature_with(&line, &RuleOptions::composite(24)).unwrap(),
        MeasureSpec::lebesgue(),
    )
}

fn in_strip(bound: f64) -> impl Strategy<Value = ComplexFrequency> {
    (-4.0f64..4.0, -1.0f64..1.0).prop_map(move |(re, u)| {
        ComplexFrequency::new(vec![re], vec![u * bound], EPS).expect("in strip")
    })
}

/// `H(−λ̄) = conj H(λ)` for real `T`-data, `Φ` and `f₀`.
pub fn conjugate_symmetry(cases: u32) -> Result<(), String> {
    let strategy = (-1.0f64..1.0, 0.5f64..2.0, in_strip(0.95 * EPS));
    check(cases, strategy, |(shift, width, lambda)| {
        let p = probe(shift, width);
        let mirrored = ComplexFrequency::new(
            lambda.re().iter().map(|v| -v).collect(),
            lambda.im().to_vec(),
            EPS,
        )
        .map_err(fail)?;
        let a = h_map(&p, &lambda).map_err(fail)?;
        let b = h_map(&p, &mirrored).map_err(fail)?;
        prop_assert!((b - a.conj()).norm() <= 1e-12 * a.norm().max(1e-300), "{a} vs {b}");
        Ok(())
    })
}

pub fn richardson_levels(cases: u32) -> Result<(), String> {
    let strategy = (-1.0f64..1.0, 0.5f64..2.0, 1usize..=2);
    check(cases, strategy, |(shift, width, order)| {
        let p = probe(shift, width);
        let exact = check_prop210(&p, &[order], DiffMethod::RichardsonFd, 3).map_err(fail)?.rhs;
        let err = |levels| -> Result<f64, TestCaseError> {
            let d = richardson_derivative(&p, &[order], 0.3, levels).map_err(fail)?;
            Ok((d - exact).norm())
        };
        let (two, three) = (err(2)?, err(3)?);
        prop_assert!(three < two, "order {order}: 3 levels {three:.3e} vs 2 levels {two:.3e}");
        Ok(())
    })
}

pub fn weak_integral_order_doubling(cases: u32) -> Result<(), String> {
    let line = Domain::real_line();
    let lambda_domain = Domain::interval(-12.0, 12.0).unwrap();
    let grid: Vec<Vec<f64>> = (0..201).map(|i| vec![-6.0 + 0.06 * i as f64]).collect();
    let source = TransformSource::ClosedForm(Arc::new(|xi: &[f64]| FourierConvention.gaussian(xi)));
    let strategy = (4usize..=10, 0.2f64..1.0);
    check(cases, strategy, |(order, s)| {
        let phi = make_phi(&PhiSpec::Identity, &line).map_err(fail)?;
        let f = ScalarField::parse("exp(-x^2/2)").unwrap();
        let f0 = ScalarField::parse(&format!("exp(-{s}*x^2)")).unwrap();
        let residual = |ord: usize| -> Result<f64, TestCaseError> {
            let rule = build_quadrature_with(&lambda_domain, &RuleOptions::composite(ord).with_panels(8))
                .map_err(fail)?;
            Ok(check_lemma212(&f, &phi, &f0, &rule, &grid, &source).map_err(fail)?.max_residual)
        };
        let (a, b) = (residual(order)?, residual(2 * order)?);
        prop_assert!(a >= 10.0 * b, "order {order}: {a:.3e} -> {b:.3e}");
        Ok(())
    })
}

/// Both closure-comparison scenarios end in a consistent verdict.
pub fn closure_consistency(_cases: u32) -> Result<(), String> {
    for weight in ["gaussian", "gap"] {
        let cfg = preset_config("closure_compare", &[("weight".into(), weight.into())]).map_err(|e| e.to_string())?;
        let (report, _) = run_experiment(&cfg).map_err(|e| e.to_string())?;
        for outcome in &report.checks {
            let c = &outcome.detail["consistency"];
            if c == "split" || c.is_null() {
                return Err(format!("{weight}: consistency {c}"));
            }
        }
    }
    Ok(())
}

/// `H(λ₁+λ₂)` equals `H` of the weight tilted by `λ₂`, evaluated at `λ₁`.
pub fn tilt_group_law(cases: u32) -> Result<(), String> {
    let strategy = (-1.0f64..1.0, 0.5f64..2.0, in_strip(0.45 * EPS), in_strip(0.45 * EPS));
    check(cases, strategy, |(shift, width, l1, l2)| {
        let p = probe(shift, width);
        let direct = h_map(&p, &l1.add(&l2).map_err(fail)?).map_err(fail)?;
        let tilted = h_map(&p.tilted(l2.clone()), &l1).map_err(fail)?;
        prop_assert!(
            (direct - tilted).norm() <= 1e-10 * direct.norm().max(1.0),
            "{direct} vs {tilted}"
        );
        Ok(())
    })
}
