//! The experiment pipeline: admissibility, decay tables, witness search,
//! analytic checks and pass criteria, in that order.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::config::{
    CheckConfig, ConfigError, Criterion, ExperimentConfig, Resolved, TransformChoice,
};
use crate::approx::{
    annihilator_witness, error_decay, ApproxError, BasisRoute, DecayTable, DensityVerdict,
    DualFunctional,
};
use crate::families::{check_assumption26, check_thm31, AdmissibilityVerdict};
use crate::funcmodel::ComplexField;
use crate::numerics::{build_quadrature_with, Domain, RuleOptions};
use crate::spaces::SpaceKind;
use crate::verify::{
    check_lemma212, check_lemma28, check_prop210, compare_closures, CheckResult, FourierConvention,
    HolomorphicProbe, TransformSource, VerifyError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure in {stage}: {message}")]
    Numerical { stage: &'static str, message: String },
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    fn numerical(stage: &'static str, e: impl std::fmt::Display) -> Self {
        RunError::Numerical {
            stage,
            message: e.to_string(),
        }
    }

    /// 2 for validation errors, 3 for everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } | RunError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityEntry {
    pub p: f64,
    pub verdict: AdmissibilityVerdict,
}

/// One projection of a decay run, without its coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub members: usize,
    pub error: f64,
    pub route: BasisRoute,
    pub effective_rank: usize,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRun {
    /// File stem under `tables/`.
    pub name: String,
    pub target: String,
    pub family: String,
    pub k: usize,
    pub table: DecayTable,
    pub projections: Vec<SizeSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub kind: String,
    pub results: Vec<CheckResult>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    pub pass: bool,
    pub observed: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub admissibility: Vec<AdmissibilityEntry>,
    pub decay: Vec<DecayRun>,
    pub verdict: Option<DensityVerdict>,
    pub checks: Vec<CheckOutcome>,
    /// Decay tables produced by closure comparisons.
    pub closure_tables: Vec<DecayRun>,
    pub criteria: Vec<CriterionOutcome>,
    pub all_pass: bool,
}

impl RunReport {
    /// 0 when every criterion passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }

    /// Every plottable table, in report order.
    pub fn tables(&self) -> impl Iterator<Item = &DecayRun> {
        self.decay.iter().chain(&self.closure_tables)
    }
}

/// Wall-clock seconds per stage; kept out of the report so that the report
/// itself is reproducible.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
    pub total: f64,
}

struct Clock {
    start: Instant,
    timings: Timings,
}

impl Clock {
    fn new() -> Self {
        Clock {
            start: Instant::now(),
            timings: Timings::default(),
        }
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings
            .stages
            .push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    fn finish(mut self) -> Timings {
        self.timings.total = self.start.elapsed().as_secs_f64();
        self.timings
    }
}

/// Validates and runs `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(RunReport, Timings), RunError> {
    let resolved = cfg.validate()?;
    let mut clock = Clock::new();

    let admissibility = clock.time("admissibility", || admissibility(cfg, &resolved));
    let decay = clock.time("decay", || decay_runs(cfg, &resolved))?;
    let verdict = clock.time("witness", || -> Result<_, RunError> {
        cfg.witness
            .as_ref()
            .map(|w| {
                annihilator_witness(&resolved.space, &resolved.f0, &resolved.phi, w.probe_degree, &w.options)
                    .map_err(|e| RunError::numerical("witness", e))
            })
            .transpose()
    })?;
    let (checks, closure_tables) = clock.time("checks", || run_checks(cfg, &resolved, &admissibility))?;

    let mut report = RunReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        admissibility,
        decay,
        verdict,
        checks,
        closure_tables,
        criteria: Vec::new(),
        all_pass: false,
    };
    report.criteria = cfg.criteria.iter().map(|c| evaluate(c, cfg, &report)).collect();
    report.all_pass = report.criteria.iter().all(|c| c.pass);
    Ok((report, clock.finish()))
}

fn admissibility(cfg: &ExperimentConfig, r: &Resolved) -> Vec<AdmissibilityEntry> {
    let Some(adm) = &cfg.admissibility else {
        return Vec::new();
    };
    let space = &r.space;
    match space.kind() {
        SpaceKind::Lp => std::iter::once(space.p())
            .chain(adm.extra_p.iter().copied())
            .map(|p| AdmissibilityEntry {
                p,
                verdict: check_thm31(
                    &r.f0,
                    &r.phi,
                    p,
                    space.domain(),
                    space.measure(),
                    &adm.eps_grid,
                    adm.degree_probe,
                ),
            })
            .collect(),
        SpaceKind::Cm | SpaceKind::Schwartz => {
            let mut merged = AdmissibilityVerdict {
                pass: false,
                epsilon: 0.0,
                passing: Vec::new(),
                failures: Vec::new(),
                tail_fits: Vec::new(),
            };
            for &eps in &adm.eps_grid {
                let v = check_assumption26(space, &r.f0, &r.phi, eps, adm.degree_probe);
                if v.pass {
                    merged.passing.push(eps);
                    merged.epsilon = merged.epsilon.max(eps);
                }
                merged.failures.extend(v.failures);
                merged.tail_fits.extend(v.tail_fits);
            }
            merged.pass = !merged.passing.is_empty();
            vec![AdmissibilityEntry {
                p: space.p(),
                verdict: merged,
            }]
        }
    }
}

fn decay_runs(cfg: &ExperimentConfig, r: &Resolved) -> Result<Vec<DecayRun>, RunError> {
    let Some(fam) = &cfg.family else {
        return Ok(Vec::new());
    };
    let steps = fam.steps();
    let sizes: Vec<usize> = (0..steps)
        .map(|i| fam.size(i, &r.phi, &r.f0))
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::numerical("family", e))?;
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new("family-sizes", format!("sizes {sizes:?} are not increasing")).into());
    }
    let build = |s: usize| {
        let i = sizes.iter().position(|&v| v == s).expect("size from list");
        fam.build(i, &r.phi, &r.f0)
            .map_err(|e| ApproxError::InvalidOption(e.to_string()))
    };
    let k = r.space.caps().k_max;
    cfg.targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let target = ComplexField::real(t.clone());
            let table = error_decay(&target, &sizes, &build, &r.space, k, &cfg.tolerances)
                .map_err(|e| RunError::numerical("decay", e))?;
            Ok(decay_run(format!("target{i}_{}", fam.kind_name()), t.to_string(), fam.kind_name(), k, table, |s| {
                build(s).map(|f| f.len()).unwrap_or(0)
            }))
        })
        .collect()
}

fn decay_run(
    name: String,
    target: String,
    family: &str,
    k: usize,
    table: DecayTable,
    members: impl Fn(usize) -> usize,
) -> DecayRun {
    let projections = table
        .rows
        .iter()
        .zip(&table.reports)
        .map(|(row, rep)| SizeSummary {
            size: row.size,
            members: members(row.size),
            error: rep.error,
            route: rep.route,
            effective_rank: rep.effective_rank,
            condition: rep.condition,
            iterations: rep.iterations,
            converged: rep.converged,
        })
        .collect();
    DecayRun {
        name,
        target,
        family: family.to_string(),
        k,
        table,
        projections,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn run_checks(
    cfg: &ExperimentConfig,
    r: &Resolved,
    adm: &[AdmissibilityEntry],
) -> Result<(Vec<CheckOutcome>, Vec<DecayRun>), RunError> {
    let verr = |e: VerifyError| RunError::numerical("checks", e);
    let mut outcomes = Vec::new();
    let mut tables = Vec::new();
    // Strip width for derivative probes: the certified one when available.
    let eps = adm
        .first()
        .map(|a| a.verdict.epsilon)
        .filter(|e| *e > 0.0)
        .unwrap_or(1.0);
    for (ci, check) in cfg.checks.iter().enumerate() {
        match check {
            CheckConfig::DerivativeMoment {
                g,
                orders,
                method,
                levels,
                tolerance,
            } => {
                let probe = HolomorphicProbe::new(
                    DualFunctional::Integrate { g: g.clone() },
                    r.phi.clone(),
                    r.f0.clone(),
                    eps,
                    r.space.rule(1).clone(),
                    r.space.measure().clone(),
                );
                let results = orders
                    .iter()
                    .map(|&o| check_prop210(&probe, &[o], *method, *levels).map(|res| res.check(*tolerance)))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(verr)?;
                outcomes.push(CheckOutcome {
                    kind: "derivative_moment".into(),
                    pass: results.iter().all(|c| c.pass),
                    results,
                    detail: Value::Null,
                });
            }
            CheckConfig::WeakIntegral {
                f,
                transform,
                order,
                panels,
                lambda_radius,
                grid_points,
                grid_radius,
                tolerance,
                min_drop,
            } => {
                let lambda_domain = Domain::interval(-lambda_radius, *lambda_radius)
                    .map_err(|e| RunError::numerical("checks", e))?;
                let grid: Vec<Vec<f64>> = linspace(-grid_radius, *grid_radius, *grid_points)
                    .into_iter()
                    .map(|x| vec![x])
                    .collect();
                let source = match transform {
                    TransformChoice::Gaussian => TransformSource::ClosedForm(Arc::new(|xi: &[f64]| -> Complex64 {
                        FourierConvention.gaussian(xi)
                    })),
                    TransformChoice::Quadrature => TransformSource::Quadrature(
                        build_quadrature_with(&lambda_domain, &RuleOptions::composite(4 * order).with_panels(4 * panels))
                            .map_err(|e| RunError::numerical("checks", e))?,
                    ),
                };
                let mut residuals = Vec::new();
                let mut results = Vec::new();
                for ord in [*order, 2 * order] {
                    let rule = build_quadrature_with(&lambda_domain, &RuleOptions::composite(ord).with_panels(*panels))
                        .map_err(|e| RunError::numerical("checks", e))?;
                    let res = check_lemma212(f, &r.phi, &r.f0, &rule, &grid, &source).map_err(verr)?;
                    residuals.push(res.max_residual);
                    results.push(res.check(*tolerance));
                }
                let ratio = residuals[0] / residuals[1].max(f64::MIN_POSITIVE);
                results.push(CheckResult {
                    check_name: "weak-integral-order-doubling".into(),
                    parameters: json!({"order": order, "min_drop": min_drop}),
                    lhs: json!(residuals[0]),
                    rhs: json!(residuals[1]),
                    residual: ratio,
                    pass: ratio >= *min_drop,
                });
                outcomes.push(CheckOutcome {
                    kind: "weak_integral".into(),
                    pass: results.iter().all(|c| c.pass),
                    results,
                    detail: Value::Null,
                });
            }
            CheckConfig::Growth { lambdas, alpha, n, k } => {
                let dim = r.phi.dim();
                let ls: Vec<Vec<f64>> = lambdas
                    .iter()
                    .map(|&l| {
                        let mut v = vec![0.0; dim];
                        v[0] = l;
                        v
                    })
                    .collect();
                let fit = check_lemma28(&r.phi, &r.f0, &ls, &r.space, *k, alpha, *n).map_err(verr)?;
                let result = CheckResult {
                    check_name: "seminorm-growth".into(),
                    parameters: json!({"alpha": alpha, "n": n, "k": k}),
                    lhs: json!(fit.exponent),
                    rhs: json!(fit.bound),
                    residual: fit.exponent - fit.bound,
                    pass: fit.pass,
                };
                outcomes.push(CheckOutcome {
                    kind: "growth".into(),
                    pass: fit.pass,
                    results: vec![result],
                    detail: serde_json::to_value(&fit).expect("fit serialises"),
                });
            }
            CheckConfig::ClosureCompare {
                target,
                sizes,
                step,
                expect,
                final_below,
            } => {
                let cmp = compare_closures(
                    &ComplexField::real(target.clone()),
                    &r.phi,
                    &r.f0,
                    &r.space,
                    sizes,
                    *step,
                    &cfg.tolerances,
                )
                .map_err(verr)?;
                let last = |t: &DecayTable| t.rows.last().map_or(f64::NAN, |r| r.error);
                let (em, ee) = (last(&cmp.monomial), last(&cmp.exponential));
                let below = final_below.is_none_or(|b| em < b && ee < b);
                let pass = cmp.consistency == *expect && cmp.consistent && below;
                let result = CheckResult {
                    check_name: "closure-comparison".into(),
                    parameters: json!({"sizes": sizes, "step": step, "expect": expect, "final_below": final_below}),
                    lhs: json!(em),
                    rhs: json!(ee),
                    residual: cmp.gap,
                    pass,
                };
                let k = r.space.caps().k_max;
                for (fam, table) in [("monomial", &cmp.monomial), ("exponential", &cmp.exponential)] {
                    tables.push(DecayRun {
                        name: format!("closure{ci}_{fam}"),
                        target: target.to_string(),
                        family: fam.into(),
                        k,
                        table: table.clone(),
                        projections: Vec::new(),
                    });
                }
                outcomes.push(CheckOutcome {
                    kind: "closure_compare".into(),
                    pass,
                    results: vec![result],
                    detail: json!({
                        "consistency": cmp.consistency,
                        "consistent": cmp.consistent,
                        "pullback": cmp.pullback,
                    }),
                });
            }
        }
    }
    Ok((outcomes, tables))
}

fn target_table(report: &RunReport, target: usize) -> Option<&DecayTable> {
    report.decay.get(target).map(|d| &d.table)
}

fn errors(t: &DecayTable) -> Vec<f64> {
    t.rows.iter().map(|r| r.error).collect()
}

fn evaluate(c: &Criterion, cfg: &ExperimentConfig, report: &RunReport) -> CriterionOutcome {
    let (pass, observed) = match c {
        Criterion::Admissible {
            p,
            expect,
            min_eps,
            location,
        } => {
            let p = p.or(cfg.space.p).unwrap_or(f64::INFINITY);
            match report.admissibility.iter().find(|a| a.p == p) {
                None => (false, json!("exponent not checked")),
                Some(a) => {
                    let v = &a.verdict;
                    let eps_ok = min_eps.is_none_or(|m| v.epsilon >= m);
                    let loc_ok = location
                        .as_ref()
                        .is_none_or(|l| v.failures.iter().any(|f| &f.location == l));
                    let locations: Vec<&str> = v.failures.iter().map(|f| f.location.as_str()).collect();
                    (
                        v.pass == *expect && eps_ok && loc_ok,
                        json!({"pass": v.pass, "epsilon": v.epsilon, "failure_locations": locations}),
                    )
                }
            }
        }
        Criterion::FinalErrorBelow { target, threshold } => match target_table(report, *target) {
            Some(t) => {
                let e = t.rows.last().map_or(f64::NAN, |r| r.error);
                (e < *threshold, json!(e))
            }
            None => (false, Value::Null),
        },
        Criterion::ErrorBelowBySize {
            target,
            size,
            threshold,
        } => match target_table(report, *target) {
            Some(t) => match t.rows.iter().find(|r| r.size >= *size) {
                Some(r) => (r.error < *threshold, json!({"size": r.size, "error": r.error})),
                None => (false, json!("no such size")),
            },
            None => (false, Value::Null),
        },
        Criterion::ErrorsAtLeast { target, threshold } => match target_table(report, *target) {
            Some(t) => {
                let e = errors(t);
                (!e.is_empty() && e.iter().all(|v| v >= threshold), json!(e))
            }
            None => (false, Value::Null),
        },
        Criterion::StrictlyDecreasing { target } => match target_table(report, *target) {
            Some(t) => {
                let e = errors(t);
                (e.windows(2).all(|w| w[1] < w[0]), json!(e))
            }
            None => (false, Value::Null),
        },
        Criterion::DecayClass { target, expect } => match target_table(report, *target) {
            Some(t) => (t.class == *expect, json!(t.class)),
            None => (false, Value::Null),
        },
        Criterion::DensityOutcome { expect } => match &report.verdict {
            Some(v) => (v.outcome == *expect, json!(v.outcome)),
            None => (false, Value::Null),
        },
        Criterion::WitnessAnnihilates { threshold } => {
            match report.verdict.as_ref().and_then(|v| v.check.as_ref()) {
                Some(ch) => (ch.max_annihilation < *threshold, json!(ch.max_annihilation)),
                None => (false, json!("no witness")),
            }
        }
        Criterion::WitnessSeparates { threshold } => {
            match report.verdict.as_ref().and_then(|v| v.check.as_ref()) {
                Some(ch) => (ch.separation > *threshold, json!(ch.separation)),
                None => (false, json!("no witness")),
            }
        }
        Criterion::ChecksPass => {
            let fails: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.kind.as_str())
                .collect();
            (fails.is_empty(), json!({"failing": fails}))
        }
    };
    CriterionOutcome {
        criterion: c.clone(),
        pass,
        observed,
    }
}

/// Writes `report.json`, `timings.json`, `tables/*.csv` (with fit
/// residuals) and `plotdata/*.csv` under `dir`.
pub fn write_outputs(report: &RunReport, timings: &Timings, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report_json(report))?;
    fs::write(
        dir.join("timings.json"),
        serde_json::to_string_pretty(timings).expect("timings serialise"),
    )?;
    let tables = dir.join("tables");
    if report.tables().next().is_some() {
        fs::create_dir_all(&tables)?;
    }
    for t in report.tables() {
        let f = fs::File::create(tables.join(format!("{}.csv", t.name)))?;
        t.table.write_csv(f).map_err(io::Error::other)?;
    }
    emit_plotdata(report, &dir.join("plotdata"))?;
    Ok(())
}

pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

/// One `size,error` CSV per decay table, named after the table. Returns the
/// files written; an empty report writes nothing.
pub fn emit_plotdata(report: &RunReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    if report.tables().next().is_none() {
        log::warn!("report {} has no decay tables; no plot data written", report.name);
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in report.tables() {
        let path = dir.join(format!("{}.csv", t.name));
        let mut w = csv::Writer::from_path(&path).map_err(io::Error::other)?;
        w.write_record(["size", "error"]).map_err(io::Error::other)?;
        for r in &t.table.rows {
            w.write_record([r.size.to_string(), format!("{:e}", r.error)])
                .map_err(io::Error::other)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
