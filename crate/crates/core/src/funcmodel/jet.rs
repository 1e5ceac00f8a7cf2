//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] carries the Taylor coefficients of a function of `n` variables
//! around a point, truncated at total degree `order`. Arithmetic on jets is
//! forward-mode differentiation of every partial up to `order` at once;
//! `D^α f = α! · coeff[α]`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

fn stride(order: usize) -> usize {
    order + 1
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; stride(order).pow(dim as u32)];
        coeffs[0] = value;
        Jet { dim, order, coeffs }
    }

    /// The jet of the coordinate function `x_var` at `value`.
    pub fn variable(dim: usize, order: usize, var: usize, value: f64) -> Self {
        let mut jet = Jet::constant(dim, order, value);
        if order >= 1 {
            let idx = stride(order).pow(var as u32);
            jet.coeffs[idx] = 1.0;
        }
        jet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn index(&self, alpha: &[usize]) -> usize {
        let s = stride(self.order);
        alpha.iter().rev().fold(0, |acc, &a| acc * s + a)
    }

    fn multi_index(&self, mut flat: usize) -> (Vec<usize>, usize) {
        let s = stride(self.order);
        let mut alpha = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            alpha.push(flat % s);
            flat /= s;
        }
        let total = alpha.iter().sum();
        (alpha, total)
    }

    /// Taylor coefficient at multi-index `alpha` (zero above the truncation order).
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        assert_eq!(alpha.len(), self.dim, "multi-index dimension mismatch");
        if alpha.iter().sum::<usize>() > self.order {
            return 0.0;
        }
        self.coeffs[self.index(alpha)]
    }

    /// Partial derivative `D^α` at the expansion point.
    pub fn derivative(&self, alpha: &[usize]) -> f64 {
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        self.coeff(alpha) * fact
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert_eq!(self.dim, other.dim);
        debug_assert_eq!(self.order, other.order);
        Jet {
            dim: self.dim,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        let mut out = Jet::constant(self.dim, self.order, 0.0);
        if self.dim == 1 {
            for i in 0..=self.order {
                let a = self.coeffs[i];
                if a == 0.0 {
                    continue;
                }
                for j in 0..=(self.order - i) {
                    out.coeffs[i + j] += a * other.coeffs[j];
                }
            }
            return out;
        }
        let n = self.coeffs.len();
        let degrees: Vec<(Vec<usize>, usize)> = (0..n).map(|i| self.multi_index(i)).collect();
        for (i, (ai, di)) in degrees.iter().enumerate() {
            let a = self.coeffs[i];
            if a == 0.0 || *di > self.order {
                continue;
            }
            for (j, (aj, dj)) in degrees.iter().enumerate() {
                if di + dj > self.order {
                    continue;
                }
                let b = other.coeffs[j];
                if b == 0.0 {
                    continue;
                }
                let sum: Vec<usize> = ai.iter().zip(aj).map(|(x, y)| x + y).collect();
                let k = out.index(&sum);
                out.coeffs[k] += a * b;
            }
        }
        out
    }

    /// Compose a univariate function with this jet, given
    /// `derivs[k] = φ^{(k)}(self.value())` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        debug_assert!(derivs.len() > self.order);
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(
            self.dim,
            self.order,
            derivs[self.order] / factorial(self.order),
        );
        for k in (0..self.order).rev() {
            acc = acc.product(&delta);
            acc.coeffs[0] += derivs[k] / factorial(k);
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        self.powf(-1.0)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self.clone();
        let mut acc = Jet::constant(self.dim, self.order, 1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        acc
    }

    pub fn powf(&self, r: f64) -> Jet {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for k in 0..=self.order {
            derivs.push(falling * a.powf(r - k as f64));
            falling *= r - k as f64;
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut derivs = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            derivs.push(sign * factorial(k - 1) / a.powi(k as i32));
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn sinh(&self) -> Jet {
        let a = self.value();
        let cycle = [a.sinh(), a.cosh()];
        self.compose(&(0..=self.order).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }

    pub fn cosh(&self) -> Jet {
        let a = self.value();
        let cycle = [a.cosh(), a.sinh()];
        self.compose(&(0..=self.order).map(|k| cycle[k % 2]).collect::<Vec<_>>())
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_first_derivative() {
        let x = Jet::variable(1, 3, 0, 2.0);
        let f = x.powi(3);
        assert_eq!(f.derivative(&[1]), 12.0);
        assert_eq!(f.derivative(&[2]), 12.0);
        assert_eq!(f.derivative(&[3]), 6.0);
    }

    #[test]
    fn mixed_partial_of_product() {
        // f = x*y^2 at (1, 3): f_xy = 2y = 6, f_yy = 2x = 2
        let x = Jet::variable(2, 3, 0, 1.0);
        let y = Jet::variable(2, 3, 1, 3.0);
        let f = &x * &y.powi(2);
        assert!((f.derivative(&[1, 1]) - 6.0).abs() < 1e-14);
        assert!((f.derivative(&[0, 2]) - 2.0).abs() < 1e-14);
        assert!((f.derivative(&[1, 2]) - 2.0).abs() < 1e-14);
        assert_eq!(f.derivative(&[2, 0]), 0.0);
    }

    #[test]
    fn exp_of_log_is_identity() {
        let x = Jet::variable(1, 5, 0, 1.7);
        let f = x.ln().exp();
        assert!((f.value() - 1.7).abs() < 1e-14);
        assert!((f.derivative(&[1]) - 1.0).abs() < 1e-13);
        for k in 2..=5 {
            assert!(f.derivative(&[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn above_order_is_zero() {
        let x = Jet::variable(1, 2, 0, 0.5);
        assert_eq!(x.exp().coeff(&[3]), 0.0);
    }
}
