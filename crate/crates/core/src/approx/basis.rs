//! Span-equivalent bases for a family and the sampled design matrices built
//! from them.
//!
//! A one-dimensional monomial family `{Φ^k f₀ : k ≤ D}` spans the same space
//! as `{p_k(Φ) f₀}` for any orthonormal polynomial sequence `p_k`. Using the
//! recurrence of the right measure keeps the design matrix well conditioned
//! where raw powers would not be.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::families::{BasisFamily, Generator};
use crate::funcmodel::{ComplexField, FuncModelError, Jet, MapPhi, ScalarField};
use crate::numerics::{MeasureSpec, QuadratureRule, Recurrence};

/// How the span of a family is represented numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisRoute {
    /// Orthonormal Hermite functions.
    Hermite,
    /// Orthonormal Laguerre functions.
    Laguerre,
    /// Polynomials in `Φ` orthonormal for `|f₀|² dμ`, by Lanczos.
    Stieltjes,
    /// The members themselves, orthogonalised later by an SVD.
    Members,
}

#[derive(Debug, Clone)]
pub(crate) enum Basis {
    Orthogonal {
        route: BasisRoute,
        rec: Recurrence,
        count: usize,
        phi: ScalarField,
        f0: ScalarField,
    },
    Members(Vec<ComplexField>),
}

/// Discrete measure `Σ w_i δ_{x_i}` standing in for `μ` on a rule.
#[derive(Debug, Clone)]
pub(crate) struct Discrete {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Discrete {
    pub fn from_rule(rule: &QuadratureRule, measure: &MeasureSpec) -> Self {
        let mut points = Vec::with_capacity(rule.len() + measure.atoms().len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (x, w) in rule.iter() {
            let w = w * measure.weight_at(x);
            if w != 0.0 {
                points.push(x.to_vec());
                weights.push(w);
            }
        }
        for atom in measure.atoms() {
            points.push(atom.location.clone());
            weights.push(atom.mass);
        }
        Discrete { points, weights }
    }

    /// Uniform weights on a set of points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Self {
        let weights = vec![1.0; points.len()];
        Discrete { points, weights }
    }
}

fn laguerre_parameter(label: &str) -> Option<f64> {
    label
        .strip_prefix("laguerre(")?
        .strip_suffix(')')?
        .parse()
        .ok()
}

impl Basis {
    /// Picks the route for `family`. `disc` is used when a recurrence has to
    /// be computed from data.
    pub fn for_family(family: &BasisFamily, disc: &Discrete, domain_axes: &[(f64, f64)]) -> Basis {
        let members = || Basis::Members(family.members().to_vec());
        let (phi, f0, cap) = match family.generator() {
            Generator::Monomial {
                phi,
                f0,
                degree_cap,
            } if phi.dim() == 1 => (phi, f0, *degree_cap),
            _ => return members(),
        };
        let count = cap + 1;
        let comp = phi.components()[0].clone();
        if phi.is_identity() {
            match f0.label() {
                Some("gaussian") => {
                    return Basis::Orthogonal {
                        route: BasisRoute::Hermite,
                        rec: Recurrence::hermite(count),
                        count,
                        phi: comp,
                        f0: f0.clone(),
                    }
                }
                Some(label) if domain_axes == [(0.0, f64::INFINITY)] => {
                    if let Some(a) = laguerre_parameter(label) {
                        return Basis::Orthogonal {
                            route: BasisRoute::Laguerre,
                            rec: Recurrence::laguerre(count, a),
                            count,
                            phi: comp,
                            f0: f0.clone(),
                        };
                    }
                }
                _ => {}
            }
        }
        match stieltjes(phi, f0, disc, count) {
            Some(rec) => {
                let count = rec.len().min(count);
                Basis::Orthogonal {
                    route: BasisRoute::Stieltjes,
                    rec,
                    count,
                    phi: comp,
                    f0: f0.clone(),
                }
            }
            None => members(),
        }
    }

    pub fn route(&self) -> BasisRoute {
        match self {
            Basis::Orthogonal { route, .. } => *route,
            Basis::Members(_) => BasisRoute::Members,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Basis::Orthogonal { count, .. } => *count,
            Basis::Members(m) => m.len(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Basis::Orthogonal { .. } => true,
            Basis::Members(m) => m.iter().all(|f| f.is_real()),
        }
    }

    pub fn values(&self, x: &[f64], out: &mut [Complex64]) {
        match self {
            Basis::Orthogonal {
                rec, phi, f0, count, ..
            } => {
                let w = f0.eval(x);
                if w == 0.0 {
                    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                    return;
                }
                let mut p = vec![0.0; *count];
                rec.eval_into(phi.eval(x), &mut p);
                for (o, pk) in out.iter_mut().zip(p) {
                    *o = Complex64::new(pk * w, 0.0);
                }
            }
            Basis::Members(m) => {
                for (o, f) in out.iter_mut().zip(m) {
                    *o = f.eval(x);
                }
            }
        }
    }

    /// `D^α` of every basis function at `x`, one row per `alpha`.
    pub fn derivatives(
        &self,
        x: &[f64],
        alphas: &[Vec<usize>],
    ) -> Result<Vec<Vec<Complex64>>, FuncModelError> {
        let order = alphas.iter().map(|a| a.iter().sum::<usize>()).max().unwrap_or(0);
        if order == 0 {
            let mut row = vec![Complex64::new(0.0, 0.0); self.len()];
            self.values(x, &mut row);
            return Ok(vec![row; alphas.len()]);
        }
        let mut out = vec![Vec::with_capacity(self.len()); alphas.len()];
        match self {
            Basis::Orthogonal {
                rec, phi, f0, count, ..
            } => {
                let t = phi.jet(x, order)?;
                let w = f0.jet(x, order)?;
                let dim = x.len();
                let mut prev = Jet::constant(dim, order, 0.0);
                let mut cur = Jet::constant(dim, order, 1.0 / rec.mu0.sqrt());
                for k in 0..*count {
                    let term = &cur * &w;
                    for (row, alpha) in out.iter_mut().zip(alphas) {
                        row.push(Complex64::new(term.derivative(alpha), 0.0));
                    }
                    if k + 1 == *count {
                        break;
                    }
                    let shifted = &t - &Jet::constant(dim, order, rec.alpha[k]);
                    let mut next = &shifted * &cur;
                    if k > 0 {
                        next = &next - &prev.scale(rec.beta[k]);
                    }
                    next = next.scale(1.0 / rec.beta[k + 1]);
                    prev = cur;
                    cur = next;
                }
            }
            Basis::Members(m) => {
                for f in m {
                    let (re, im) = f.jets(x, order)?;
                    for (row, alpha) in out.iter_mut().zip(alphas) {
                        let i = im.as_ref().map_or(0.0, |j| j.derivative(alpha));
                        row.push(Complex64::new(re.derivative(alpha), i));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Builds the real field `Σ c_k ψ_k` back from basis coefficients.
    pub fn combine(&self, coeffs: &[Complex64]) -> ComplexField {
        let zero = || ScalarField::constant(0.0);
        match self {
            Basis::Orthogonal { rec, phi, f0, .. } => {
                // Clenshaw would be tidier; an explicit sum keeps the
                // expression readable and the degree is modest.
                let mut p_prev = zero();
                let mut p = ScalarField::constant(1.0 / rec.mu0.sqrt());
                let mut re = zero();
                let mut im = zero();
                let mut any_im = false;
                for (k, c) in coeffs.iter().enumerate() {
                    re = re.add(&p.scale(c.re));
                    if c.im != 0.0 {
                        im = im.add(&p.scale(c.im));
                        any_im = true;
                    }
                    if k + 1 == coeffs.len() {
                        break;
                    }
                    let shifted = phi.sub(&ScalarField::constant(rec.alpha[k]));
                    let mut next = shifted.mul(&p);
                    if k > 0 {
                        next = next.sub(&p_prev.scale(rec.beta[k]));
                    }
                    p_prev = p;
                    p = next.scale(1.0 / rec.beta[k + 1]);
                }
                if any_im {
                    ComplexField::new(re.mul(f0), im.mul(f0))
                } else {
                    ComplexField::real(re.mul(f0))
                }
            }
            Basis::Members(m) => {
                let mut acc = ComplexField::real(zero());
                for (f, c) in m.iter().zip(coeffs) {
                    if *c != Complex64::new(0.0, 0.0) {
                        let scaled = f.scale(*c);
                        acc = ComplexField::new(
                            acc.re.add(&scaled.re),
                            match (&acc.im, &scaled.im) {
                                (None, None) => zero(),
                                (Some(a), None) => a.clone(),
                                (None, Some(b)) => b.clone(),
                                (Some(a), Some(b)) => a.add(b),
                            },
                        );
                    }
                }
                if acc.im.as_ref().is_some_and(|f| f.to_string() == "0") {
                    acc.im = None;
                }
                acc
            }
        }
    }
}

/// Lanczos with full reorthogonalisation on the discrete measure
/// `Σ w_i f₀(x_i)² δ_{Φ(x_i)}`. Stops early if the Krylov space is exhausted.
fn stieltjes(phi: &MapPhi, f0: &ScalarField, disc: &Discrete, count: usize) -> Option<Recurrence> {
    let mut t = Vec::with_capacity(disc.points.len());
    let mut nu = Vec::with_capacity(disc.points.len());
    for (x, &w) in disc.points.iter().zip(&disc.weights) {
        let f = f0.eval(x);
        let v = w * f * f;
        if v > 0.0 && v.is_finite() {
            let tx = phi.eval(x)[0];
            if tx.is_finite() {
                t.push(tx);
                nu.push(v);
            }
        }
    }
    let mu0: f64 = nu.iter().sum();
    if !(mu0 > 0.0) || t.is_empty() {
        return None;
    }
    let sqrt_nu: Vec<f64> = nu.iter().map(|v| v.sqrt()).collect();
    let mut q: Vec<Vec<f64>> = vec![sqrt_nu.iter().map(|v| v / mu0.sqrt()).collect()];
    let mut alpha = Vec::with_capacity(count);
    let mut beta = vec![0.0];
    for k in 0..count {
        let qk = &q[k];
        let mut v: Vec<f64> = qk.iter().zip(&t).map(|(a, b)| a * b).collect();
        let a = dot(qk, &v);
        alpha.push(a);
        if k + 1 == count {
            break;
        }
        for _ in 0..2 {
            for qj in &q {
                let c = dot(qj, &v);
                v.iter_mut().zip(qj).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let b = dot(&v, &v).sqrt();
        let scale = t.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if !(b > 1e-12 * scale) {
            break;
        }
        beta.push(b);
        q.push(v.into_iter().map(|x| x / b).collect());
    }
    // `eval_into` reads beta[1..count]; pad so `len()` reflects usable terms.
    let usable = alpha.len().min(beta.len());
    alpha.truncate(usable);
    beta.truncate(usable);
    if usable < count {
        // A short recurrence: polynomials of degree ≥ usable vanish on the
        // support of the measure.
        log::debug!("stieltjes recurrence truncated at {usable} of {count} terms");
    }
    Some(Recurrence { alpha, beta, mu0 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Real least-squares system for complex coefficients. Row `r` belongs to
/// sample point `group[r]`; a complex value contributes a real and an
/// imaginary row to the same group.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub a: DMatrix<f64>,
    pub t: DVector<f64>,
    pub group: Vec<usize>,
    /// Base weight per group (quadrature mass or 1 for grids).
    pub weight: Vec<f64>,
    pub complex: bool,
    pub n_basis: usize,
}

impl Design {
    /// Assembles rows from per-point complex basis rows and target values.
    /// With `complex` false imaginary parts are dropped, which is exact only
    /// when both basis and target are real.
    pub fn assemble(
        rows: &[(usize, Vec<Complex64>, Complex64)],
        weights: Vec<f64>,
        complex: bool,
        n_basis: usize,
    ) -> Design {
        let n_rows = if complex { 2 * rows.len() } else { rows.len() };
        let n_cols = if complex { 2 * n_basis } else { n_basis };
        let mut a = DMatrix::<f64>::zeros(n_rows, n_cols);
        let mut t = DVector::<f64>::zeros(n_rows);
        let mut group = Vec::with_capacity(n_rows);
        for (r, (g, basis, target)) in rows.iter().enumerate() {
            if complex {
                let (re, im) = (2 * r, 2 * r + 1);
                for (j, b) in basis.iter().enumerate() {
                    // c b = (c_re b_re − c_im b_im) + i(c_re b_im + c_im b_re)
                    a[(re, j)] = b.re;
                    a[(re, n_basis + j)] = -b.im;
                    a[(im, j)] = b.im;
                    a[(im, n_basis + j)] = b.re;
                }
                t[re] = target.re;
                t[im] = target.im;
                group.push(*g);
                group.push(*g);
            } else {
                for (j, b) in basis.iter().enumerate() {
                    a[(r, j)] = b.re;
                }
                t[r] = target.re;
                group.push(*g);
            }
        }
        Design {
            a,
            t,
            group,
            weight: weights,
            complex,
            n_basis,
        }
    }

    pub fn coefficients(&self, x: &DVector<f64>) -> Vec<Complex64> {
        (0..self.n_basis)
            .map(|j| {
                if self.complex {
                    Complex64::new(x[j], x[self.n_basis + j])
                } else {
                    Complex64::new(x[j], 0.0)
                }
            })
            .collect()
    }

    /// `|r|` per group.
    pub fn group_residuals(&self, x: &DVector<f64>) -> Vec<f64> {
        let r = &self.a * x - &self.t;
        let mut out = vec![0.0; self.weight.len()];
        for (i, &g) in self.group.iter().enumerate() {
            out[g] += r[i] * r[i];
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }
}

/// Samples of a target and a basis on a discrete measure.
pub(crate) fn sample_design(
    basis: &Basis,
    target: &ComplexField,
    disc: &Discrete,
) -> Result<Design, FuncModelError> {
    let complex = !(basis.is_real() && target.is_real());
    let n = basis.len();
    let mut rows = Vec::with_capacity(disc.points.len());
    for (i, x) in disc.points.iter().enumerate() {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        basis.values(x, &mut row);
        let tv = target.eval(x);
        if !tv.re.is_finite() || !tv.im.is_finite() || row.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(FuncModelError::NonFinite { point: x.clone() });
        }
        rows.push((i, row, tv));
    }
    Ok(Design::assemble(&rows, disc.weights.clone(), complex, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::monomial_family;
    use crate::funcmodel::{make_phi, preset_weight, PhiSpec, WeightPreset};
    use crate::numerics::{build_quadrature_with, Domain, RuleOptions};

    fn gram(basis: &Basis, disc: &Discrete) -> DMatrix<f64> {
        let n = basis.len();
        let mut g = DMatrix::zeros(n, n);
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (x, w) in disc.points.iter().zip(&disc.weights) {
            basis.values(x, &mut row);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += w * row[i].re * row[j].re;
                }
            }
        }
        g
    }

    #[test]
    fn preset_routes_are_orthonormal() {
        let domain = Domain::real_line();
        let rule = build_quadrature_with(&domain, &RuleOptions::composite(24)).unwrap();
        let disc = Discrete::from_rule(&rule, &MeasureSpec::lebesgue());
        let phi = make_phi(&PhiSpec::Identity, &domain).unwrap();
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let fam = monomial_family(&phi, &f0, 20);
        let basis = Basis::for_family(&fam, &disc, rule.domain_axes());
        assert_eq!(basis.route(), BasisRoute::Hermite);
        let g = gram(&basis, &disc);
        assert!((g - DMatrix::identity(21, 21)).amax() < 1e-10);
    }

    #[test]
    fn stieltjes_route_is_orthonormal() {
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let rule = build_quadrature_with(&domain, &RuleOptions::composite(24)).unwrap();
        let disc = Discrete::from_rule(&rule, &MeasureSpec::lebesgue());
        let phi = make_phi(&PhiSpec::Cubic, &domain).unwrap();
        let f0 = ScalarField::parse("1 + x^2").unwrap();
        let fam = monomial_family(&phi, &f0, 8);
        let basis = Basis::for_family(&fam, &disc, rule.domain_axes());
        assert_eq!(basis.route(), BasisRoute::Stieltjes);
        let g = gram(&basis, &disc);
        assert!((g - DMatrix::identity(9, 9)).amax() < 1e-9);
    }

    #[test]
    fn orthogonal_derivatives_match_combined_field() {
        let domain = Domain::real_line();
        let rule = build_quadrature_with(&domain, &RuleOptions::composite(16)).unwrap();
        let disc = Discrete::from_rule(&rule, &MeasureSpec::lebesgue());
        let phi = make_phi(&PhiSpec::Identity, &domain).unwrap();
        let f0 = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        let basis = Basis::for_family(&monomial_family(&phi, &f0, 5), &disc, rule.domain_axes());
        let coeffs: Vec<Complex64> = (0..6).map(|k| Complex64::new(1.0 / (k + 1) as f64, 0.0)).collect();
        let field = basis.combine(&coeffs);
        let x = [0.37];
        let d = basis.derivatives(&x, &[vec![0], vec![1], vec![2]]).unwrap();
        for (row, order) in d.iter().zip(0..) {
            let direct: f64 = row.iter().zip(&coeffs).map(|(b, c)| b.re * c.re).sum();
            let expect = field.re.jet(&x, 2).unwrap().derivative(&[order]);
            assert!((direct - expect).abs() < 1e-12, "order {order}: {direct} vs {expect}");
        }
    }
}
