//! Property suites shared by the integration tests and the acceptance run.
//!
//! Every property is a plain function taking a case count and returning
//! `Err(message)` on the first counterexample. Runs are deterministic: the
//! generator is a fixed-seed ChaCha stream and no failure files are written.

#![allow(dead_code)]

pub mod approx;
pub mod families;
pub mod funcmodel;
pub mod numerics;
pub mod spaces;
pub mod verify;

use density_lab::funcmodel::ScalarField;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Property = fn(u32) -> Result<(), String>;

/// A named property with its default case count.
pub struct Case {
    pub name: &'static str,
    pub run: Property,
    pub cases: u32,
}

pub struct Suite {
    pub name: &'static str,
    pub cases: Vec<Case>,
}

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        max_shrink_iters: 64,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs `test` on `cases` values of `strategy`.
pub fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

/// Converts library errors inside a property body.
pub fn fail<E: std::fmt::Display>(e: E) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

fn template(kind: usize, a: f64, b: f64, c: f64) -> String {
    match kind {
        0 => format!("{a}*exp(-{b}*(x-({c}))^2)"),
        1 => format!("{a}*sin(2*{b}*x+({c}))*exp(-{b}*x^2)"),
        2 => format!("{a}/(1+{b}*x^2)"),
        3 => format!("{a}*x*exp(-{b}*x^2)+({c})*exp(-x^2)"),
        4 => format!("{a}*cos({b}*x)*exp(-(x-({c}))^2/2)"),
        _ => format!("{a}*(exp({c}*x-(1+{b})*x^2)+exp(-({c})*x-(1+{b})*x^2))/2"),
    }
}

/// A smooth template field on the line, decaying at least like `x^-2`.
pub fn simple_field() -> impl Strategy<Value = ScalarField> {
    (0usize..6, 0.5f64..2.0, 0.3f64..1.5, -1.0f64..1.0).prop_map(|(k, a, b, c)| {
        ScalarField::parse(&template(k, a, b, c)).expect("template parses")
    })
}

/// Template fields, sums and products of two of them.
pub fn smooth_field() -> impl Strategy<Value = ScalarField> {
    prop_oneof![
        simple_field(),
        (simple_field(), simple_field(), -2.0f64..2.0).prop_map(|(f, g, s)| f.add(&g.scale(s))),
        (simple_field(), simple_field()).prop_map(|(f, g)| f.mul(&g)),
    ]
}

pub fn suites() -> Vec<Suite> {
    macro_rules! case {
        ($m:ident :: $f:ident, $n:expr) => {
            Case {
                name: stringify!($f),
                run: $m::$f,
                cases: $n,
            }
        };
    }
    vec![
        Suite {
            name: "numerics",
            cases: vec![
                case!(numerics::gauss_exactness, 64),
                case!(numerics::integration_linearity, 32),
                case!(numerics::lp_norm_triangle_and_homogeneity, 24),
                case!(numerics::order_doubling_within_estimate, 24),
            ],
        },
        Suite {
            name: "funcmodel",
            cases: vec![
                case!(funcmodel::jet_matches_richardson, 50),
                case!(funcmodel::exponential_group_law, 64),
                case!(funcmodel::parser_round_trip, 32),
            ],
        },
        Suite {
            name: "spaces",
            cases: vec![
                case!(spaces::seminorm_axioms, 12),
                case!(spaces::inclusion_condition, 16),
                case!(spaces::exhaustion_monotone, 16),
                case!(spaces::leibniz_identity, 20),
            ],
        },
        Suite {
            name: "families",
            cases: vec![
                case!(families::monomial_count, 32),
                case!(families::exponential_conjugates, 32),
                case!(families::thm31_monotone_in_eps, 6),
                case!(families::gap_surrogate, 16),
            ],
        },
        Suite {
            name: "approx",
            cases: vec![
                case!(approx::nested_monotonicity, 12),
                case!(approx::member_recovery, 12),
                case!(approx::pythagoras, 16),
                case!(approx::irls_consistency, 12),
                case!(approx::obstruction_lower_bound, 8),
                case!(approx::witness_property, 6),
            ],
        },
        Suite {
            name: "verify",
            cases: vec![
                case!(verify::conjugate_symmetry, 24),
                case!(verify::richardson_levels, 12),
                case!(verify::weak_integral_order_doubling, 8),
                case!(verify::closure_consistency, 1),
                case!(verify::tilt_group_law, 24),
            ],
        },
    ]
}

/// The properties named by the invariant acceptance criterion.
pub fn acceptance_invariants() -> Vec<Case> {
    vec![
        Case {
            name: "seminorm axioms",
            run: spaces::seminorm_axioms,
            cases: 12,
        },
        Case {
            name: "nested-family monotonicity",
            run: approx::nested_monotonicity,
            cases: 12,
        },
        Case {
            name: "member recovery",
            run: approx::member_recovery,
            cases: 12,
        },
        Case {
            name: "L2 Pythagoras",
            run: approx::pythagoras,
            cases: 16,
        },
        Case {
            name: "IRLS/L2 consistency",
            run: approx::irls_consistency,
            cases: 12,
        },
        Case {
            name: "derivative vs finite difference",
            run: funcmodel::jet_matches_richardson,
            cases: 50,
        },
    ]
}
