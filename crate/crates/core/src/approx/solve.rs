//! Weighted least squares, IRLS and Lawson iterations on a [`Design`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::basis::Design;

#[derive(Debug, Clone)]
pub(crate) struct Lstsq {
    pub x: DVector<f64>,
    pub rank: usize,
    /// `σ_max / σ_min` over the kept singular values.
    pub condition: f64,
}

/// Column-equilibrated SVD factor of a matrix, truncated where
/// `σ² / σ_max² < cutoff`.
pub(crate) struct Factor {
    u: DMatrix<f64>,
    s: DVector<f64>,
    v_t: DMatrix<f64>,
    col_scale: DVector<f64>,
}

impl Factor {
    pub fn new(a: &DMatrix<f64>, cutoff: f64) -> Factor {
        let col_scale = DVector::from_iterator(
            a.ncols(),
            a.column_iter().map(|c| {
                let n = c.norm();
                if n > 0.0 && n.is_finite() {
                    1.0 / n
                } else {
                    0.0
                }
            }),
        );
        let mut scaled = a.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= col_scale[j];
        }
        let svd = scaled.svd(true, true);
        let (u, s, v_t) = (svd.u.unwrap(), svd.singular_values, svd.v_t.unwrap());
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..s.len())
            .filter(|&i| smax > 0.0 && (s[i] / smax).powi(2) >= cutoff)
            .collect();
        let u = u.select_columns(&keep);
        let v_t = v_t.select_rows(&keep);
        let s = DVector::from_iterator(keep.len(), keep.iter().map(|&i| s[i]));
        Factor {
            u,
            s,
            v_t,
            col_scale,
        }
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn condition(&self) -> f64 {
        match (self.s.iter().cloned().reduce(f64::max), self.s.iter().cloned().reduce(f64::min)) {
            (Some(a), Some(b)) if b > 0.0 => a / b,
            _ => f64::INFINITY,
        }
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Maps coordinates `y` in the column space of `U` back to coefficients.
    pub fn coefficients(&self, y: &DVector<f64>) -> DVector<f64> {
        let z = DVector::from_iterator(y.len(), y.iter().zip(self.s.iter()).map(|(a, s)| a / s));
        let mut x = self.v_t.tr_mul(&z);
        x.component_mul_assign(&self.col_scale);
        x
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.coefficients(&self.u.tr_mul(b))
    }
}

fn row_scaled(design: &Design, group_weight: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = design.a.clone();
    let mut t = design.t.clone();
    for (i, &g) in design.group.iter().enumerate() {
        let s = group_weight[g].sqrt();
        a.row_mut(i).scale_mut(s);
        t[i] *= s;
    }
    (a, t)
}

/// Minimises `Σ_g ω_g |r_g|²`.
pub(crate) fn weighted_lstsq(design: &Design, group_weight: &[f64], cutoff: f64) -> Lstsq {
    let (a, t) = row_scaled(design, group_weight);
    let f = Factor::new(&a, cutoff);
    Lstsq {
        x: f.solve(&t),
        rank: f.rank(),
        condition: f.condition(),
    }
}

/// `(Σ_g w_g |r_g|^p)^{1/p}`.
pub(crate) fn lp_error(design: &Design, x: &DVector<f64>, p: f64) -> f64 {
    let r = design.group_residuals(x);
    r.iter()
        .zip(&design.weight)
        .map(|(r, w)| w * r.powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IrlsSettings {
    pub delta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cutoff: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct IterOutcome {
    pub x: DVector<f64>,
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank: usize,
    pub condition: f64,
}

/// IRLS for the `L_p` best approximation, started from the `L_2` solution.
/// For `p > 2` each step is damped by `1/(p−1)`.
pub(crate) fn irls(design: &Design, p: f64, s: IrlsSettings) -> IterOutcome {
    let first = weighted_lstsq(design, &design.weight, s.cutoff);
    let mut x = first.x;
    let mut best = (lp_error(design, &x, p), x.clone());
    let damping = if p > 2.0 { 1.0 / (p - 1.0) } else { 1.0 };
    let mut converged = false;
    let mut iterations = 0;
    let (mut rank, mut condition) = (first.rank, first.condition);
    for it in 1..=s.max_iter {
        iterations = it;
        let r = design.group_residuals(&x);
        let omega: Vec<f64> = r
            .iter()
            .zip(&design.weight)
            .map(|(r, w)| w * r.max(s.delta).powf(p - 2.0))
            .collect();
        let step = weighted_lstsq(design, &omega, s.cutoff);
        rank = step.rank;
        condition = step.condition;
        let next = &x + (&step.x - &x) * damping;
        let change = (&next - &x).norm();
        x = next;
        let err = lp_error(design, &x, p);
        if err < best.0 {
            best = (err, x.clone());
        }
        if change <= s.tol * x.norm().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    IterOutcome {
        x: best.1,
        error: best.0,
        iterations,
        converged,
        rank,
        condition,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LawsonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub cutoff: f64,
}

/// Lawson's iteration for `min max_g |r_g|`. Converged when the weighted
/// `L_2` lower bound is within `tol` of the current maximum.
pub(crate) fn lawson(design: &Design, s: LawsonSettings) -> IterOutcome {
    let f = Factor::new(&design.a, s.cutoff);
    let (rank, condition) = (f.rank(), f.condition());
    let u = f.u();
    let groups = design.weight.len();
    let t_scale = design.t.amax();
    let mut w = vec![1.0 / groups as f64; groups];
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut scaled = u.clone();
    let mut rhs = design.t.clone();
    for it in 1..=s.max_iter {
        iterations = it;
        scaled.copy_from(u);
        rhs.copy_from(&design.t);
        for (i, &g) in design.group.iter().enumerate() {
            let sw = w[g].sqrt();
            scaled.row_mut(i).scale_mut(sw);
            rhs[i] *= sw;
        }
        let y = pinv_normal(&scaled, &rhs);
        let x = f.coefficients(&y);
        let r = design.group_residuals(&x);
        let emax = r.iter().cloned().fold(0.0, f64::max);
        let lower = r
            .iter()
            .zip(&w)
            .map(|(r, w)| w * r * r)
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|(e, _)| emax < *e) {
            best = Some((emax, x));
        }
        if emax - lower <= s.tol * emax || emax <= 1e-14 * t_scale {
            converged = true;
            break;
        }
        let total: f64 = r.iter().zip(&w).map(|(r, w)| r * w).sum();
        if !(total > 0.0) {
            converged = true;
            break;
        }
        w.iter_mut().zip(&r).for_each(|(w, r)| *w *= r / total);
    }
    let (error, x) = best.expect("at least one Lawson step");
    IterOutcome {
        x,
        error,
        iterations,
        converged,
        rank,
        condition,
    }
}

/// `argmin ‖B y − b‖` through the normal equations with an eigenvalue
/// cutoff; `B` has orthonormal columns before row scaling so this stays
/// tame until the weights concentrate on very few points.
fn pinv_normal(b: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let g = b.tr_mul(b);
    let c = b.tr_mul(rhs);
    let eig = SymmetricEigen::new(g);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut y = DVector::zeros(c.len());
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 1e-14 * lmax {
            let v = eig.eigenvectors.column(k);
            y += v * (v.dot(&c) / l);
        }
    }
    y
}
