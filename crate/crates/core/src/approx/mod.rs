//! Best approximation of a target from a finite family: `L_2` projection,
//! `L_p` by IRLS, uniform (and weighted derivative) approximation by Lawson,
//! error-versus-size tables, dual functionals and annihilator witnesses.

mod basis;
pub mod decay;
pub mod dual;
mod solve;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::BasisFamily;
use crate::funcmodel::{ComplexField, FuncModelError};
use crate::numerics::{MeasureSpec, NumericsError, QuadratureRule};
use crate::spaces::{multi_indices, SpaceError, SpaceKind, SpaceSpec};

pub use basis::BasisRoute;
use basis::{sample_design, Basis, Design, Discrete};
pub use decay::{error_decay, DecayClass, DecayFit, DecayRow, DecayTable};
pub use dual::{
    annihilator_witness, apply_dual, DensityOutcome, DensityVerdict, DualFunctional, WitnessCheck,
    WitnessOptions,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("empty family")]
    EmptyFamily,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error(transparent)]
    Field(FuncModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

impl From<FuncModelError> for ApproxError {
    fn from(e: FuncModelError) -> Self {
        match e {
            FuncModelError::NonFinite { point } => ApproxError::NonFinite { point },
            other => ApproxError::Field(other),
        }
    }
}

/// Grid and stopping rule for the uniform fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LawsonParams {
    /// Grid points on the closure of `U_k` in one dimension.
    pub grid_points: usize,
    /// Grid points per axis in two dimensions.
    pub grid_points_2d: usize,
    /// Unbounded axes are sampled on `[-radius, radius]`.
    pub radius: f64,
    pub max_iter: usize,
    /// Relative gap between the maximum error and the weighted lower bound.
    pub tol: f64,
}

impl Default for LawsonParams {
    fn default() -> Self {
        LawsonParams {
            grid_points: 801,
            grid_points_2d: 41,
            radius: 12.0,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionOptions {
    /// Singular directions with `σ²/σ_max² <` this are dropped.
    pub rank_cutoff: f64,
    pub irls_delta: f64,
    pub irls_tol: f64,
    pub irls_max_iter: usize,
    pub lawson: LawsonParams,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            rank_cutoff: 1e-12,
            irls_delta: 1e-8,
            irls_tol: 1e-8,
            irls_max_iter: 200,
            lawson: LawsonParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L2,
    Lp(f64),
    Sup,
}

/// Error of one `(α, N)` block of a uniform fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockError {
    pub alpha: Vec<usize>,
    pub n: u32,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub norm: NormKind,
    pub size: usize,
    pub route: BasisRoute,
    /// Best-approximation error in the chosen norm, on the same rule or grid
    /// that defines that norm.
    pub error: f64,
    /// `√(‖t‖² − ‖Pt‖²)`, for the `L_2` projection only.
    pub error_pythagoras: Option<f64>,
    /// Coefficients in the basis named by `route`.
    pub coefficients: Vec<Complex64>,
    pub effective_rank: usize,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Per-block maxima for uniform fits, empty otherwise.
    pub blocks: Vec<BlockError>,
    #[serde(skip)]
    basis: Option<Basis>,
}

impl ProjectionReport {
    /// The approximant `Σ c_j ψ_j` as a field.
    pub fn approximant(&self) -> Option<ComplexField> {
        self.basis.as_ref().map(|b| b.combine(&self.coefficients))
    }
}

/// `G_ij = ∫ m_i conj(m_j) dμ` over the raw members.
pub fn gram_matrix(
    family: &BasisFamily,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<DMatrix<Complex64>, ApproxError> {
    if family.is_empty() {
        return Err(ApproxError::EmptyFamily);
    }
    let disc = Discrete::from_rule(rule, measure);
    let n = family.len();
    // Fixed chunks summed in order keep the result bit-for-bit reproducible.
    let chunks: Vec<DMatrix<Complex64>> = disc
        .points
        .par_chunks(256)
        .zip(disc.weights.par_chunks(256))
        .map(|(xs, ws)| {
            let mut g = DMatrix::<Complex64>::zeros(n, n);
            for (x, &w) in xs.iter().zip(ws) {
                let vals: Vec<Complex64> = family.members().iter().map(|m| m.eval(x)).collect();
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(ApproxError::NonFinite { point: x.clone() });
                }
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] += vals[i] * vals[j].conj() * w;
                    }
                }
            }
            Ok(g)
        })
        .collect::<Result<_, _>>()?;
    let partial = chunks
        .into_iter()
        .fold(DMatrix::zeros(n, n), |acc, g| acc + g);
    Ok(partial)
}

fn prepare(
    target: &ComplexField,
    family: &BasisFamily,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
) -> Result<(Basis, Design), ApproxError> {
    if family.is_empty() {
        return Err(ApproxError::EmptyFamily);
    }
    let disc = Discrete::from_rule(rule, measure);
    let basis = Basis::for_family(family, &disc, rule.domain_axes());
    let design = sample_design(&basis, target, &disc)?;
    Ok((basis, design))
}

/// Orthogonal projection onto the span in `L_2(μ)`.
pub fn project_l2(
    target: &ComplexField,
    family: &BasisFamily,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
    opts: &ProjectionOptions,
) -> Result<ProjectionReport, ApproxError> {
    let (basis, design) = prepare(target, family, rule, measure)?;
    let sol = solve::weighted_lstsq(&design, &design.weight, opts.rank_cutoff);
    let error = solve::lp_error(&design, &sol.x, 2.0);
    let fitted = &design.a * &sol.x;
    let (mut tt, mut ff) = (0.0, 0.0);
    for (i, &g) in design.group.iter().enumerate() {
        tt += design.weight[g] * design.t[i] * design.t[i];
        ff += design.weight[g] * fitted[i] * fitted[i];
    }
    Ok(ProjectionReport {
        norm: NormKind::L2,
        size: family.len(),
        route: basis.route(),
        error,
        error_pythagoras: Some((tt - ff).max(0.0).sqrt()),
        coefficients: design.coefficients(&sol.x),
        effective_rank: sol.rank,
        condition: sol.condition,
        iterations: 1,
        converged: true,
        blocks: Vec::new(),
        basis: Some(basis),
    })
}

/// Best `L_p(μ)` approximation, `1 ≤ p < ∞`, by IRLS.
pub fn project_lp(
    target: &ComplexField,
    family: &BasisFamily,
    p: f64,
    rule: &QuadratureRule,
    measure: &MeasureSpec,
    opts: &ProjectionOptions,
) -> Result<ProjectionReport, ApproxError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(NumericsError::InvalidExponent(p).into());
    }
    if p == 2.0 {
        return project_l2(target, family, rule, measure, opts);
    }
    let (basis, design) = prepare(target, family, rule, measure)?;
    let out = solve::irls(
        &design,
        p,
        solve::IrlsSettings {
            delta: opts.irls_delta,
            tol: opts.irls_tol,
            max_iter: opts.irls_max_iter,
            cutoff: opts.rank_cutoff,
        },
    );
    Ok(ProjectionReport {
        norm: NormKind::Lp(p),
        size: family.len(),
        route: basis.route(),
        error: out.error,
        error_pythagoras: None,
        coefficients: design.coefficients(&out.x),
        effective_rank: out.rank,
        condition: out.condition,
        iterations: out.iterations,
        converged: out.converged,
        blocks: Vec::new(),
        basis: Some(basis),
    })
}

/// Grid on the closure of `U_k`, unbounded axes cut at `radius`.
pub fn sup_grid(space: &SpaceSpec, k: usize, params: &LawsonParams) -> Vec<Vec<f64>> {
    let bounds: Vec<(f64, f64)> = space
        .domain()
        .exhaustion_box(k)
        .into_iter()
        .map(|(a, b)| (a.max(-params.radius), b.min(params.radius)))
        .collect();
    let per_axis = if bounds.len() == 1 {
        params.grid_points
    } else {
        params.grid_points_2d
    }
    .max(2);
    let axis = |(a, b): (f64, f64)| -> Vec<f64> {
        (0..per_axis)
            .map(|i| a + (b - a) * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for b in bounds {
        let ax = axis(b);
        grid = grid
            .into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    grid
}

/// Simultaneous uniform fit of `(1+‖x‖)^N D^α` for every `(α, N)` in the
/// space's caps, on a grid over the closure of `U_k`. The reported error is
/// the largest block maximum.
pub fn project_sup(
    target: &ComplexField,
    family: &BasisFamily,
    space: &SpaceSpec,
    k: usize,
    opts: &ProjectionOptions,
) -> Result<ProjectionReport, ApproxError> {
    if family.is_empty() {
        return Err(ApproxError::EmptyFamily);
    }
    let grid = sup_grid(space, k, &opts.lawson);
    let disc = Discrete::uniform(grid.clone());
    let basis = Basis::for_family(family, &disc, space.domain().axes());
    let model = space.model();
    let alphas = multi_indices(model.dim, model.order_max);
    let ns: Vec<u32> = match space.kind() {
        SpaceKind::Schwartz => (0..=model.n_max).collect(),
        _ => vec![0],
    };
    let blocks: Vec<(Vec<usize>, u32)> = alphas
        .iter()
        .flat_map(|a| ns.iter().map(move |&n| (a.clone(), n)))
        .collect();
    let target_basis = Basis::Members(vec![target.clone()]);
    let per_point: Vec<Vec<(Vec<Complex64>, Complex64)>> = grid
        .par_iter()
        .map(|x| -> Result<_, ApproxError> {
            let b = basis.derivatives(x, &alphas)?;
            let t = target_basis.derivatives(x, &alphas)?;
            let mut out = Vec::with_capacity(blocks.len());
            for (ai, _) in alphas.iter().enumerate() {
                for &n in &ns {
                    let w = model.weight(n, x);
                    let row: Vec<Complex64> = b[ai].iter().map(|v| v * w).collect();
                    let tv = t[ai][0] * w;
                    if !tv.is_finite() || row.iter().any(|v| !v.is_finite()) {
                        return Err(ApproxError::NonFinite { point: x.clone() });
                    }
                    out.push((row, tv));
                }
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(grid.len() * blocks.len());
    for (pi, entries) in per_point.into_iter().enumerate() {
        for (bi, (row, tv)) in entries.into_iter().enumerate() {
            rows.push((pi * blocks.len() + bi, row, tv));
        }
    }
    let complex = !(basis.is_real() && target.is_real());
    let design = Design::assemble(&rows, vec![1.0; rows.len()], complex, basis.len());
    let out = solve::lawson(
        &design,
        solve::LawsonSettings {
            tol: opts.lawson.tol,
            max_iter: opts.lawson.max_iter,
            cutoff: opts.rank_cutoff,
        },
    );
    let r = design.group_residuals(&out.x);
    let mut block_err = vec![0.0f64; blocks.len()];
    for (g, e) in r.iter().enumerate() {
        let b = g % blocks.len();
        block_err[b] = block_err[b].max(*e);
    }
    Ok(ProjectionReport {
        norm: NormKind::Sup,
        size: family.len(),
        route: basis.route(),
        error: out.error,
        error_pythagoras: None,
        coefficients: design.coefficients(&out.x),
        effective_rank: out.rank,
        condition: out.condition,
        iterations: out.iterations,
        converged: out.converged,
        blocks: blocks
            .into_iter()
            .zip(block_err)
            .map(|((alpha, n), error)| BlockError { alpha, n, error })
            .collect(),
        basis: Some(basis),
    })
}

/// Best approximation in the natural norm of `space`: `L_p` on the
/// `k`-th rule for `L_p` spaces, the capped uniform fit on `U_k` otherwise.
pub fn project_in_space(
    target: &ComplexField,
    family: &BasisFamily,
    space: &SpaceSpec,
    k: usize,
    opts: &ProjectionOptions,
) -> Result<ProjectionReport, ApproxError> {
    match space.kind() {
        SpaceKind::Lp => project_lp(target, family, space.p(), space.rule(k), space.measure(), opts),
        SpaceKind::Cm | SpaceKind::Schwartz => project_sup(target, family, space, k, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{monomial_family, translate_family};
    use crate::funcmodel::{make_phi, preset_weight, PhiSpec, ScalarField, WeightPreset};
    use crate::numerics::{build_quadrature_with, Domain, Exhaustion, RuleOptions};
    use crate::spaces::{make_space, SpaceParams};

    fn hermite_setup(d: usize) -> (BasisFamily, QuadratureRule) {
        let domain = Domain::real_line();
        let phi = make_phi(&PhiSpec::Identity, &domain).unwrap();
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let rule = build_quadrature_with(&domain, &RuleOptions::composite(24)).unwrap();
        (monomial_family(&phi, &f0, d), rule)
    }

    #[test]
    fn l2_projection_of_a_member_is_exact() {
        let (fam, rule) = hermite_setup(10);
        let t = fam.members()[7].clone();
        let rep = project_l2(&t, &fam, &rule, &MeasureSpec::lebesgue(), &Default::default()).unwrap();
        assert!(rep.error < 1e-12, "{}", rep.error);
        assert_eq!(rep.route, BasisRoute::Hermite);
        let a = rep.approximant().unwrap();
        assert!((a.re.eval(&[0.8]) - t.re.eval(&[0.8])).abs() < 1e-12);
    }

    #[test]
    fn l2_error_matches_pythagoras() {
        let (fam, rule) = hermite_setup(12);
        let t = ComplexField::real(ScalarField::parse("1/(1+x^2)").unwrap());
        let rep = project_l2(&t, &fam, &rule, &MeasureSpec::lebesgue(), &Default::default()).unwrap();
        let py = rep.error_pythagoras.unwrap();
        assert!((rep.error - py).abs() < 1e-8 * rep.error.max(1.0), "{} {}", rep.error, py);
    }

    #[test]
    fn gram_of_hermite_monomials_is_hermitian() {
        let (fam, rule) = hermite_setup(4);
        let g = gram_matrix(&fam, &rule, &MeasureSpec::lebesgue()).unwrap();
        // ∫ x² e^{-x²} dx = √π / 2
        assert!((g[(1, 1)].re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((&g - g.adjoint()).camax() < 1e-14);
    }

    #[test]
    fn lp_projection_of_a_member_is_exact() {
        let (fam, rule) = hermite_setup(6);
        let t = fam.members()[3].clone();
        for p in [1.0, 3.0] {
            let rep = project_lp(&t, &fam, p, &rule, &MeasureSpec::lebesgue(), &Default::default())
                .unwrap();
            assert!(rep.error < 1e-8, "p = {p}: {}", rep.error);
        }
    }

    #[test]
    fn sup_fit_in_c1_controls_derivative() {
        let domain = Domain::interval(-1.0, 1.0).unwrap().with_exhaustion(Exhaustion::Inset {
            scale: 0.5,
            radius: 1.0,
        });
        let space = make_space(SpaceParams::cm(domain.clone(), 1, 2)).unwrap();
        let phi = make_phi(&PhiSpec::Identity, &domain).unwrap();
        let fam = monomial_family(&phi, &ScalarField::constant(1.0), 8);
        let t = ComplexField::real(ScalarField::parse("exp(x)").unwrap());
        let rep = project_sup(&t, &fam, &space, 2, &Default::default()).unwrap();
        assert_eq!(rep.blocks.len(), 2);
        assert!(rep.error < 1e-6, "{}", rep.error);
        assert!(rep.blocks.iter().all(|b| b.error <= rep.error));
    }

    #[test]
    fn sup_fit_recovers_translate_member() {
        let space = make_space(SpaceParams::schwartz(1, 1, 1)).unwrap();
        let seed = preset_weight(&WeightPreset::GaussianNd { dim: 1 }).unwrap();
        let fam = translate_family(&seed, &[vec![-1.0], vec![0.0], vec![1.0]]);
        let t = fam.members()[2].clone();
        let rep = project_sup(&t, &fam, &space, 1, &Default::default()).unwrap();
        assert!(rep.error < 1e-9, "{}", rep.error);
    }
}
