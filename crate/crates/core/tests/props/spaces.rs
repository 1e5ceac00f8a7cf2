use density_lab::numerics::{lp_norm, Domain, Exhaustion, MeasureSpec};
use density_lab::spaces::{leibniz_discrepancy, make_space, seminorm, SpaceParams, SpaceSpec};
use proptest::prelude::*;

use super::{check, fail, simple_field, smooth_field};

fn spaces_under_test(p: f64) -> Vec<SpaceSpec> {
    let inset = Domain::interval(-1.5, 1.5)
        .unwrap()
        .with_exhaustion(Exhaustion::Inset {
            scale: 0.5,
            radius: 1.0,
        });
    vec![
        make_space(SpaceParams::lp(Domain::real_line(), MeasureSpec::lebesgue(), p)).unwrap(),
        make_space(SpaceParams::cm(inset, 2, 2)).unwrap(),
        make_space(SpaceParams::schwartz(1, 2, 2)).unwrap(),
    ]
}

pub fn seminorm_axioms(cases: u32) -> Result<(), String> {
    let strategy = (smooth_field(), smooth_field(), -3.0f64..3.0, 1.0f64..5.0);
    check(cases, strategy, |(f, g, c, p)| {
        let fg = f.add(&g);
        let cf = f.scale(c);
        for space in spaces_under_test(p) {
            for idx in space.model().indices() {
                let s = |h| seminorm(&space, h, idx.k, &idx.alpha, idx.n).map_err(fail);
                let (pf, pg, pfg, pcf) = (s(&f)?, s(&g)?, s(&fg)?, s(&cf)?);
                prop_assert!(pf >= 0.0);
                prop_assert!(
                    pfg <= pf + pg + 1e-10,
                    "{:?} {idx:?}: p(f+g) = {pfg} > {pf} + {pg}",
                    space.kind()
                );
                let want = c.abs() * pf;
                prop_assert!(
                    (pcf - want).abs() <= 1e-10 * want.max(f64::MIN_POSITIVE),
                    "{:?} {idx:?}: p(cf) = {pcf} vs {want}",
                    space.kind()
                );
            }
        }
        Ok(())
    })
}

pub fn inclusion_condition(cases: u32) -> Result<(), String> {
    let strategy = (smooth_field(), 1.0f64..5.0);
    check(cases, strategy, |(f, p)| {
        for space in spaces_under_test(p) {
            for k in 1..=space.caps().k_max {
                let a = seminorm(&space, &f, k, &[0], 0).map_err(fail)?;
                let b = lp_norm(&f, space.p(), space.rule(k), space.measure()).map_err(fail)?;
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{:?} k = {k}: {a} vs {b}", space.kind());
            }
        }
        Ok(())
    })
}

pub fn exhaustion_monotone(cases: u32) -> Result<(), String> {
    let strategy = (smooth_field(), 0.2f64..0.9, 0usize..=2);
    check(cases, strategy, |(f, scale, m)| {
        let d = Domain::interval(-2.0, 2.0)
            .unwrap()
            .with_exhaustion(Exhaustion::Inset { scale, radius: 1.0 });
        let space = make_space(SpaceParams::cm(d, m, 4)).map_err(fail)?;
        for order in 0..=m {
            let mut prev = 0.0;
            for k in 1..=4 {
                let v = seminorm(&space, &f, k, &[order], 0).map_err(fail)?;
                prop_assert!(prev <= v + 1e-12, "order {order}: p_{} = {prev} > p_{k} = {v}", k - 1);
                prev = v;
            }
        }
        Ok(())
    })
}

pub fn leibniz_identity(cases: u32) -> Result<(), String> {
    let strategy = (
        simple_field(),
        smooth_field(),
        0usize..=4,
        0u32..=3,
        prop::collection::vec(-3.0f64..3.0, 8),
    );
    check(cases, strategy, |(g, f, order, n, xs)| {
        let space = make_space(SpaceParams::schwartz(1, 3, 4)).map_err(fail)?;
        let points: Vec<Vec<f64>> = xs.into_iter().map(|x| vec![x]).collect();
        let d = leibniz_discrepancy(space.model(), &g, &f, &[order], n, &points).map_err(fail)?;
        prop_assert!(d < 1e-9, "g = {g}, f = {f}, alpha = {order}, N = {n}: {d:.3e}");
        Ok(())
    })
}
