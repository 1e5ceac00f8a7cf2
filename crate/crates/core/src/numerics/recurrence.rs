//! Three-term recurrences for orthonormal polynomials and the Gauss rules
//! they generate.
//!
//! Orthonormal `p_k` with respect to a measure of total mass `mu0` satisfy
//! `t p_k = β_{k+1} p_{k+1} + α_k p_k + β_k p_{k-1}`, `p_0 = 1/√mu0`.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    /// `α_k`, k = 0..n.
    pub alpha: Vec<f64>,
    /// `β_k`, k = 0..n; `beta[0]` is unused.
    pub beta: Vec<f64>,
    /// Total mass of the measure.
    pub mu0: f64,
}

impl Recurrence {
    /// Weight 1 on (-1, 1).
    pub fn legendre(n: usize) -> Self {
        let beta = (0..=n)
            .map(|k| {
                let k = k as f64;
                if k == 0.0 {
                    0.0
                } else {
                    k / (4.0 * k * k - 1.0).sqrt()
                }
            })
            .collect();
        Recurrence {
            alpha: vec![0.0; n + 1],
            beta,
            mu0: 2.0,
        }
    }

    /// Weight `e^{-x²}` on R (physicists' Hermite).
    pub fn hermite(n: usize) -> Self {
        Recurrence {
            alpha: vec![0.0; n + 1],
            beta: (0..=n).map(|k| (k as f64 / 2.0).sqrt()).collect(),
            mu0: std::f64::consts::PI.sqrt(),
        }
    }

    /// Weight `x^a e^{-x}` on (0, ∞), `a > -1`.
    pub fn laguerre(n: usize, a: f64) -> Self {
        Recurrence {
            alpha: (0..=n).map(|k| 2.0 * k as f64 + a + 1.0).collect(),
            beta: (0..=n)
                .map(|k| (k as f64 * (k as f64 + a)).sqrt())
                .collect(),
            mu0: statrs::function::gamma::gamma(a + 1.0),
        }
    }

    /// Number of polynomials the recurrence can generate.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `p_0(t), …, p_{count-1}(t)` written into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let count = out.len();
        if count == 0 {
            return;
        }
        out[0] = 1.0 / self.mu0.sqrt();
        if count > 1 {
            out[1] = (t - self.alpha[0]) * out[0] / self.beta[1];
        }
        for k in 1..count.saturating_sub(1) {
            out[k + 1] =
                ((t - self.alpha[k]) * out[k] - self.beta[k] * out[k - 1]) / self.beta[k + 1];
        }
    }

    pub fn eval(&self, t: f64, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.eval_into(t, &mut out);
        out
    }

    /// `(p_n(t), p_n'(t))`.
    fn eval_with_derivative(&self, t: f64, n: usize) -> (f64, f64) {
        let mut p_prev = 0.0;
        let mut d_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut d = 0.0;
        for k in 0..n {
            let b_k = if k == 0 { 0.0 } else { self.beta[k] };
            let p_next = ((t - self.alpha[k]) * p - b_k * p_prev) / self.beta[k + 1];
            let d_next = ((t - self.alpha[k]) * d + p - b_k * d_prev) / self.beta[k + 1];
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
        }
        (p, d)
    }

    /// Gauss rule with `n` nodes for the underlying measure: nodes are the
    /// Jacobi-matrix eigenvalues polished by Newton steps, weights are the
    /// Christoffel numbers `1 / Σ_{k<n} p_k(x_i)²`.
    pub fn gauss(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(
            n >= 1 && n < self.len(),
            "recurrence too short for {n} nodes"
        );
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jacobi[(k, k)] = self.alpha[k];
            if k + 1 < n {
                jacobi[(k, k + 1)] = self.beta[k + 1];
                jacobi[(k + 1, k)] = self.beta[k + 1];
            }
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut buf = vec![0.0; n];
        let weights = nodes
            .iter_mut()
            .map(|x| {
                for _ in 0..3 {
                    let (p, d) = self.eval_with_derivative(*x, n);
                    if d != 0.0 && p.is_finite() && d.is_finite() {
                        let step = p / d;
                        if step.abs() < 1e-3 * (1.0 + x.abs()) {
                            *x -= step;
                        }
                    }
                }
                self.eval_into(*x, &mut buf);
                1.0 / buf.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        (nodes, weights)
    }
}
