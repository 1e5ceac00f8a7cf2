use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::{self, BinOp, Expr, Func};
use super::jet::Jet;
use super::FuncModelError;

/// Default cap on derivative order.
pub const DEFAULT_MAX_DERIVATIVE_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Smooth,
    MeasurableOnly,
}

/// A real-valued function of `x ∈ U` given by an expression tree.
#[derive(Debug, Clone)]
pub struct ScalarField {
    expr: Arc<Expr>,
    smoothness: Smoothness,
    label: Option<String>,
    singular_at_origin: bool,
}

impl ScalarField {
    pub fn from_expr(expr: Arc<Expr>) -> Self {
        let smoothness = if expr.is_smooth() {
            Smoothness::Smooth
        } else {
            Smoothness::MeasurableOnly
        };
        ScalarField {
            expr,
            smoothness,
            label: None,
            singular_at_origin: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FuncModelError> {
        Ok(Self::from_expr(expr::parse(text)?))
    }

    pub fn constant(v: f64) -> Self {
        Self::from_expr(Expr::constant(v))
    }

    pub fn coordinate(i: usize) -> Self {
        Self::from_expr(Expr::var(i))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub(crate) fn with_origin_singularity(mut self, singular: bool) -> Self {
        self.singular_at_origin = singular;
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn expr(&self) -> &Arc<Expr> {
        &self.expr
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn is_smooth(&self) -> bool {
        self.smoothness == Smoothness::Smooth
    }

    /// Set for weights that blow up at `x = 0` (e.g. Laguerre with α < 0).
    pub fn singular_at_origin(&self) -> bool {
        self.singular_at_origin
    }

    pub fn arity(&self) -> usize {
        self.expr.arity()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }

    /// Checked evaluation: non-finite values become an error naming the point.
    pub fn try_eval(&self, x: &[f64]) -> Result<f64, FuncModelError> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FuncModelError::NonFinite { point: x.to_vec() })
        }
    }

    pub fn jet(&self, x: &[f64], order: usize) -> Result<Jet, FuncModelError> {
        if order > 0 && !self.is_smooth() {
            return Err(FuncModelError::NotSmooth(self.to_string()));
        }
        self.expr.eval_jet(x, order)
    }

    /// `D^α f` as an evaluator, computed by forward-mode jets.
    pub fn derivative(&self, alpha: &[usize]) -> Result<Derivative, FuncModelError> {
        self.derivative_with_cap(alpha, DEFAULT_MAX_DERIVATIVE_ORDER)
    }

    pub fn derivative_with_cap(
        &self,
        alpha: &[usize],
        cap: usize,
    ) -> Result<Derivative, FuncModelError> {
        let order: usize = alpha.iter().sum();
        if order > cap {
            return Err(FuncModelError::OrderTooHigh { order, cap });
        }
        if order > 0 && !self.is_smooth() {
            return Err(FuncModelError::NotSmooth(self.to_string()));
        }
        Ok(Derivative {
            field: self.clone(),
            alpha: alpha.to_vec(),
        })
    }

    fn combine(op: BinOp, a: &ScalarField, b: &ScalarField) -> ScalarField {
        let mut out = ScalarField::from_expr(Expr::binary(op, a.expr.clone(), b.expr.clone()));
        out.singular_at_origin = a.singular_at_origin || b.singular_at_origin;
        out
    }

    /// Symbolic partial derivative `D^α f` as a new field.
    pub fn partial(&self, alpha: &[usize]) -> Result<ScalarField, FuncModelError> {
        let mut e = self.expr.clone();
        for (var, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                e = e.diff(var)?;
            }
        }
        Ok(ScalarField::from_expr(e))
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        Self::combine(BinOp::Add, self, other)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        Self::combine(BinOp::Sub, self, other)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        Self::combine(BinOp::Mul, self, other)
    }

    pub fn scale(&self, k: f64) -> ScalarField {
        self.mul(&ScalarField::constant(k))
    }

    pub fn powi(&self, n: u32) -> ScalarField {
        match n {
            0 => ScalarField::constant(1.0),
            1 => self.clone(),
            _ => Self::combine(BinOp::Pow, self, &ScalarField::constant(n as f64)),
        }
    }

    pub fn apply(&self, func: Func) -> ScalarField {
        let mut out = ScalarField::from_expr(Expr::call(func, self.expr.clone()));
        out.singular_at_origin = self.singular_at_origin;
        out
    }

    /// `self ∘ map`, substituting each variable by a component of `map`.
    pub fn compose(&self, map: &[ScalarField]) -> ScalarField {
        let subs: Vec<Arc<Expr>> = map.iter().map(|m| m.expr.clone()).collect();
        ScalarField::from_expr(self.expr.substitute(&subs))
    }

    /// `x ↦ self(x − shift)`.
    pub fn translate(&self, shift: &[f64]) -> ScalarField {
        let subs: Vec<Arc<Expr>> = shift
            .iter()
            .enumerate()
            .map(|(i, &s)| Expr::binary(BinOp::Sub, Expr::var(i), Expr::constant(s)))
            .collect();
        ScalarField::from_expr(self.expr.substitute(&subs))
    }
}

/// Structural equality of the expressions; labels are ignored.
impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

impl Serialize for ScalarField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ScalarField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        ScalarField::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Evaluator for one partial derivative of a smooth field.
#[derive(Debug, Clone)]
pub struct Derivative {
    field: ScalarField,
    alpha: Vec<usize>,
}

impl Derivative {
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, FuncModelError> {
        if x.len() != self.alpha.len() {
            return Err(FuncModelError::DimensionMismatch {
                expected: self.alpha.len(),
                got: x.len(),
            });
        }
        let order: usize = self.alpha.iter().sum();
        if order == 0 {
            return Ok(self.field.eval(x));
        }
        Ok(self.field.jet(x, order)?.derivative(&self.alpha))
    }
}

/// A complex-valued field `re + i·im`; `im = None` means real.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub re: ScalarField,
    pub im: Option<ScalarField>,
}

impl ComplexField {
    pub fn real(re: ScalarField) -> Self {
        ComplexField { re, im: None }
    }

    pub fn new(re: ScalarField, im: ScalarField) -> Self {
        ComplexField { re, im: Some(im) }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn is_smooth(&self) -> bool {
        self.re.is_smooth() && self.im.as_ref().is_none_or(|f| f.is_smooth())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        Complex64::new(self.re.eval(x), self.im.as_ref().map_or(0.0, |f| f.eval(x)))
    }

    /// `D^α` of the complex field.
    pub fn derivative_at(&self, alpha: &[usize], x: &[f64]) -> Result<Complex64, FuncModelError> {
        let re = self.re.derivative(alpha)?.eval(x)?;
        let im = match &self.im {
            Some(f) => f.derivative(alpha)?.eval(x)?,
            None => 0.0,
        };
        Ok(Complex64::new(re, im))
    }

    /// All `D^α` for `|α| ≤ order` at once, keyed by the jet layout.
    pub fn jets(&self, x: &[f64], order: usize) -> Result<(Jet, Option<Jet>), FuncModelError> {
        let re = self.re.jet(x, order)?;
        let im = match &self.im {
            Some(f) => Some(f.jet(x, order)?),
            None => None,
        };
        Ok((re, im))
    }

    pub fn sub(&self, other: &ComplexField) -> ComplexField {
        let re = self.re.sub(&other.re);
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.scale(-1.0)),
            (Some(a), Some(b)) => Some(a.sub(b)),
        };
        ComplexField { re, im }
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        // (a + ib)(u + iv) = (au − bv) + i(av + bu)
        let (a, b) = (c.re, c.im);
        let u = &self.re;
        match &self.im {
            None => {
                if b == 0.0 {
                    ComplexField::real(u.scale(a))
                } else {
                    ComplexField::new(u.scale(a), u.scale(b))
                }
            }
            Some(v) => ComplexField::new(u.scale(a).sub(&v.scale(b)), v.scale(a).add(&u.scale(b))),
        }
    }
}

impl From<ScalarField> for ComplexField {
    fn from(f: ScalarField) -> Self {
        ComplexField::real(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothness_flag_tracks_floor_and_abs() {
        assert!(ScalarField::parse("exp(-x^2/2)").unwrap().is_smooth());
        assert!(!ScalarField::parse("abs(x)").unwrap().is_smooth());
        assert!(!ScalarField::parse("1 + floor(x)").unwrap().is_smooth());
    }

    #[test]
    fn derivative_rejects_measurable_and_high_order() {
        let f = ScalarField::parse("floor(x)").unwrap();
        assert!(matches!(
            f.derivative(&[1]),
            Err(FuncModelError::NotSmooth(_))
        ));
        assert!(f.derivative(&[0]).is_ok());
        let g = ScalarField::parse("sin(x)").unwrap();
        assert!(matches!(
            g.derivative(&[7]),
            Err(FuncModelError::OrderTooHigh { order: 7, cap: 6 })
        ));
    }

    #[test]
    fn translate_moves_peak() {
        let g = ScalarField::parse("exp(-x^2)").unwrap().translate(&[1.5]);
        assert_eq!(g.eval(&[1.5]), 1.0);
    }

    #[test]
    fn complex_scale_matches_arithmetic() {
        let f = ComplexField::new(
            ScalarField::parse("x").unwrap(),
            ScalarField::parse("x^2").unwrap(),
        );
        let c = Complex64::new(0.5, -2.0);
        let g = f.scale(c);
        let x = [1.3];
        let want = c * f.eval(&x);
        assert!((g.eval(&x) - want).norm() < 1e-14);
    }
}
