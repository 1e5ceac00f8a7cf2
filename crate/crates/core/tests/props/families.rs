use density_lab::families::{
    check_thm31, exponential_family, gap_family, monomial_family,
};
use density_lab::funcmodel::{make_phi, preset_weight, ComplexFrequency, PhiSpec, ScalarField, WeightPreset};
use density_lab::numerics::{Domain, MeasureSpec};
use proptest::prelude::*;

use super::{check, fail};

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

pub fn monomial_count(cases: u32) -> Result<(), String> {
    check(cases, (0usize..=20, 1usize..=2), |(d, n)| {
        let phi = make_phi(&PhiSpec::Identity, &Domain::whole_space(n)).map_err(fail)?;
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: n }).map_err(fail)?;
        let fam = monomial_family(&phi, &f0, d);
        prop_assert_eq!(fam.len(), binomial(d + n, n), "D = {}, n = {}", d, n);
        Ok(())
    })
}

pub fn exponential_conjugates(cases: u32) -> Result<(), String> {
    let strategy = (0.01f64..6.0, prop::collection::vec(-5.0f64..5.0, 16), any::<bool>());
    check(cases, strategy, |(lambda, xs, sinh)| {
        let line = Domain::real_line();
        let spec = if sinh {
            PhiSpec::Sinh
        } else {
            PhiSpec::Identity
        };
        let phi = make_phi(&spec, &line).map_err(fail)?;
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).map_err(fail)?;
        let freqs = [
            ComplexFrequency::real(vec![lambda]),
            ComplexFrequency::real(vec![-lambda]),
        ];
        let fam = exponential_family(&phi, &f0, &freqs, 1.0).map_err(fail)?;
        for x in xs {
            let (a, b) = (fam.eval_member(0, &[x]), fam.eval_member(1, &[x]));
            prop_assert!((a - b.conj()).norm() < 1e-14, "lambda {lambda} at {x}: {a} vs {b}");
        }
        Ok(())
    })
}

/// `f₀ = exp(-c·sqrt(1+x²))` admits exactly the strips `ε < c` in `L_2`.
pub fn thm31_monotone_in_eps(cases: u32) -> Result<(), String> {
    let grid = [0.1, 0.2, 0.45, 1.0, 2.0];
    check(cases, (0.15f64..2.5, 1.0f64..4.0), |(c, p)| {
        let line = Domain::real_line();
        let phi = make_phi(&PhiSpec::Identity, &line).map_err(fail)?;
        let f0 = ScalarField::parse(&format!("exp(-{c}*sqrt(1+x^2))")).map_err(fail)?;
        let v = check_thm31(&f0, &phi, p, &line, &MeasureSpec::lebesgue(), &grid, 4);
        for &e in &v.passing {
            for &smaller in grid.iter().filter(|&&s| s < e) {
                prop_assert!(v.passing.contains(&smaller), "c = {c}, p = {p}: passes at {e} but not {smaller}");
            }
        }
        // the passing set is never wider than the true threshold
        prop_assert!(v.passing.iter().all(|&e| e < c), "c = {c}: passing {:?}", v.passing);
        Ok(())
    })
}

/// With `l > cap` nothing in `[1, cap]` is excluded, so the gap family is
/// `x^n e^{-x}`, `1 ≤ n ≤ cap`, member for member. `n = 0` is divisible by
/// every `l` and never belongs to a gap family.
pub fn gap_surrogate(cases: u32) -> Result<(), String> {
    let strategy = (1u32..=30, 1u32..5, prop::collection::vec(0.0f64..30.0, 12));
    check(cases, strategy, |(cap, extra, xs)| {
        let gap = gap_family(0, cap + extra, cap).map_err(fail)?;
        let half = Domain::half_line();
        let phi = make_phi(&PhiSpec::Identity, &half).map_err(fail)?;
        let f0 = ScalarField::parse("exp(-x)").map_err(fail)?;
        let mono = monomial_family(&phi, &f0, cap as usize);
        prop_assert_eq!(gap.len(), cap as usize);
        prop_assert_eq!(mono.len(), cap as usize + 1);
        for i in 0..gap.len() {
            for &x in &xs {
                let (a, b) = (gap.eval_member(i, &[x]), mono.eval_member(i + 1, &[x]));
                prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(f64::MIN_POSITIVE), "n = {} at {x}: {a} vs {b}", i + 1);
            }
        }
        Ok(())
    })
}
