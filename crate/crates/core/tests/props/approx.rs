use density_lab::approx::{
    annihilator_witness, apply_dual, project_l2, project_lp, project_sup, sup_grid, DualFunctional,
    ProjectionOptions, ProjectionReport, WitnessOptions,
};
use density_lab::families::{monomial_family, BasisFamily};
use density_lab::funcmodel::{make_phi, preset_weight, ComplexField, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{integrate_fn, Domain, Exhaustion, MeasureSpec};
use density_lab::spaces::{make_space, SpaceParams, SpaceSpec};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{check, fail, smooth_field};

fn line_space(p: f64) -> SpaceSpec {
    make_space(SpaceParams::lp(Domain::real_line(), MeasureSpec::lebesgue(), p)).unwrap()
}

fn c0_space() -> SpaceSpec {
    let d = Domain::interval(-1.0, 1.0)
        .unwrap()
        .with_exhaustion(Exhaustion::Inset {
            scale: 0.5,
            radius: 1.0,
        });
    make_space(SpaceParams::cm(d, 0, 1)).unwrap()
}

fn gaussian_monomials(d: usize) -> BasisFamily {
    let line = Domain::real_line();
    let phi = make_phi(&PhiSpec::Identity, &line).unwrap();
    monomial_family(&phi, &preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap(), d)
}

fn interval_monomials(f0: &ScalarField, d: usize) -> BasisFamily {
    let phi = make_phi(&PhiSpec::Identity, &Domain::interval(-1.0, 1.0).unwrap()).unwrap();
    monomial_family(&phi, f0, d)
}

#[derive(Debug, Clone, Copy)]
enum Solver {
    L2,
    Lp(f64),
    Sup,
}

fn solver() -> impl Strategy<Value = Solver> {
    prop_oneof![
        Just(Solver::L2),
        (1.2f64..4.0).prop_map(Solver::Lp),
        Just(Solver::Sup),
    ]
}

fn project(
    solver: Solver,
    target: &ComplexField,
    d: usize,
    opts: &ProjectionOptions,
) -> Result<ProjectionReport, TestCaseError> {
    match solver {
        Solver::L2 => {
            let s = line_space(2.0);
            project_l2(target, &gaussian_monomials(d), s.rule(1), s.measure(), opts).map_err(fail)
        }
        Solver::Lp(p) => {
            let s = line_space(p);
            project_lp(target, &gaussian_monomials(d), p, s.rule(1), s.measure(), opts).map_err(fail)
        }
        Solver::Sup => {
            let f0 = ScalarField::parse("exp(-x^2/2)").unwrap();
            project_sup(target, &interval_monomials(&f0, d), &c0_space(), 1, opts).map_err(fail)
        }
    }
}

pub fn nested_monotonicity(cases: u32) -> Result<(), String> {
    let opts = ProjectionOptions::default();
    let strategy = (smooth_field(), solver(), 1usize..10, 1usize..6);
    check(cases, strategy, |(t, solver, d, extra)| {
        let target = ComplexField::real(t);
        let small = project(solver, &target, d, &opts)?;
        let large = project(solver, &target, d + extra, &opts)?;
        prop_assert!(
            large.error <= small.error + 1e-8,
            "{solver:?}: degree {} error {} > degree {d} error {}",
            d + extra,
            large.error,
            small.error
        );
        Ok(())
    })
}

pub fn member_recovery(cases: u32) -> Result<(), String> {
    let opts = ProjectionOptions::default();
    let strategy = (solver(), 1usize..12, any::<prop::sample::Index>());
    check(cases, strategy, |(solver, d, pick)| {
        let family = match solver {
            Solver::Sup => interval_monomials(&ScalarField::parse("exp(-x^2/2)").unwrap(), d),
            _ => gaussian_monomials(d),
        };
        let i = pick.index(family.len());
        let target = family.members()[i].clone();
        let r = project(solver, &target, d, &opts)?;
        prop_assert!(r.error < 1e-6, "{solver:?}, degree {d}, member {i}: error {}", r.error);
        Ok(())
    })
}

pub fn pythagoras(cases: u32) -> Result<(), String> {
    let opts = ProjectionOptions::default();
    let space = line_space(2.0);
    let (rule, leb) = (space.rule(1), space.measure());
    check(cases, (smooth_field(), 1usize..16), |(t, d)| {
        let target = ComplexField::real(t.clone());
        let r = project_l2(&target, &gaussian_monomials(d), rule, leb, &opts).map_err(fail)?;
        let fit = r.approximant().expect("l2 projection keeps its basis");
        let t2 = integrate_fn(|x| t.eval(x).powi(2), rule, leb).map_err(fail)?.value;
        let fit2 = integrate_fn(|x| fit.eval(x).norm_sqr(), rule, leb).map_err(fail)?.value;
        let gap = (t2 - r.error.powi(2) - fit2).abs();
        prop_assert!(gap <= 1e-8 * t2, "degree {d}: |t|² = {t2}, e² = {}, |Pt|² = {fit2}", r.error.powi(2));
        Ok(())
    })
}

pub fn irls_consistency(cases: u32) -> Result<(), String> {
    let opts = ProjectionOptions::default();
    let (s2, sp) = (line_space(2.0), line_space(2.0001));
    check(cases, (smooth_field(), 1usize..14), |(t, d)| {
        let target = ComplexField::real(t);
        let fam = gaussian_monomials(d);
        let a = project_l2(&target, &fam, s2.rule(1), s2.measure(), &opts).map_err(fail)?;
        let b = project_lp(&target, &fam, 2.0001, sp.rule(1), sp.measure(), &opts).map_err(fail)?;
        let rel = (a.error - b.error).abs() / a.error.max(f64::MIN_POSITIVE);
        prop_assert!(rel < 1e-3 || (a.error - b.error).abs() < 1e-12, "degree {d}: L2 {} vs IRLS {}", a.error, b.error);
        Ok(())
    })
}

/// `f₀` vanishes at a grid node `x₀`, so every approximant does too and the
/// uniform error is at least `|t(x₀)|`.
pub fn obstruction_lower_bound(cases: u32) -> Result<(), String> {
    let opts = ProjectionOptions::default();
    let space = c0_space();
    let grid = sup_grid(&space, 1, &opts.lawson);
    let strategy = (smooth_field(), any::<prop::sample::Index>(), 1usize..10);
    check(cases, strategy, |(t, pick, d)| {
        let x0 = grid[grid.len() / 4 + pick.index(grid.len() / 2)][0];
        let f0 = ScalarField::parse(&format!("(x-({x0:?}))*exp(-x^2)")).map_err(fail)?;
        prop_assert_eq!(f0.eval(&[x0]), 0.0);
        let bound = t.eval(&[x0]).abs();
        let r = project_sup(&ComplexField::real(t), &interval_monomials(&f0, d), &space, 1, &opts).map_err(fail)?;
        prop_assert!(r.error >= bound - 1e-9, "x0 = {x0}, degree {d}: error {} < |t(x0)| = {bound}", r.error);
        Ok(())
    })
}

pub fn witness_property(cases: u32) -> Result<(), String> {
    let opts = WitnessOptions::default();
    let strategy = (-2.0f64..1.0, 0.5f64..2.0, prop_oneof![Just(1.5), Just(2.0), Just(3.0)]);
    check(cases, strategy, |(a, width, p)| {
        let line = Domain::real_line();
        let space = line_space(p);
        let phi = make_phi(&PhiSpec::Identity, &line).map_err(fail)?;
        let f0 = preset_weight(&WeightPreset::GaussianGap { a, b: a + width }).map_err(fail)?;
        let probe = 20;
        let v = annihilator_witness(&space, &f0, &phi, probe, &opts).map_err(fail)?;
        let (witness, check) = match (&v.witness, &v.check) {
            (Some(w), Some(c)) => (w, c),
            _ => return Err(TestCaseError::fail(format!("no witness on [{a}, {}]: {:?}", a + width, v.outcome))),
        };
        prop_assert!(check.max_annihilation < 1e-10, "reported annihilation {}", check.max_annihilation);
        prop_assert!(check.separation > 1e-3, "reported separation {}", check.separation);
        // recompute the pairings on the space's own rule
        let DualFunctional::Integrate { g } = witness else {
            return Err(TestCaseError::fail("L_p witness must be an integral functional"));
        };
        for beta in 0..=probe {
            let member = ComplexField::real(ScalarField::parse(&format!("x^{beta}")).unwrap().mul(&f0));
            let v = apply_dual(witness, &member, space.rule(1), space.measure()).map_err(fail)?;
            prop_assert!(v.value.norm() < 1e-10, "beta = {beta}: {}", v.value);
        }
        let t = ScalarField::parse(&check.separating_target).map_err(fail)?;
        let sep = integrate_fn(|x| g.eval(x) * t.eval(x), space.rule(1), space.measure()).map_err(fail)?;
        prop_assert!(sep.value.abs() > 1e-3, "separation {}", sep.value);
        Ok(())
    })
}
