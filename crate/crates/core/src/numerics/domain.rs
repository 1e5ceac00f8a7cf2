use serde::{Deserialize, Serialize};

use super::NumericsError;

/// How the exhaustion `U = ∪ U_k` is generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exhaustion {
    /// `U_k = U` for every `k`.
    Whole,
    /// Finite ends move inward by `scale / k`; infinite ends are cut at `±k·radius`.
    Inset { scale: f64, radius: f64 },
}

/// An open box in R^n (n = 1 or 2) with a nested exhaustion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    axes: Vec<(f64, f64)>,
    exhaustion: Exhaustion,
}

impl Domain {
    pub fn new(axes: Vec<(f64, f64)>, exhaustion: Exhaustion) -> Result<Self, NumericsError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(NumericsError::InvalidDomain(format!(
                "dimension {} not supported",
                axes.len()
            )));
        }
        for &(lo, hi) in &axes {
            if lo.is_nan()
                || hi.is_nan()
                || lo >= hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(NumericsError::InvalidDomain(format!(
                    "bad axis ({lo}, {hi})"
                )));
            }
        }
        if let Exhaustion::Inset { scale, radius } = exhaustion {
            if !(scale > 0.0 && radius > 0.0) {
                return Err(NumericsError::InvalidDomain(
                    "inset exhaustion needs positive scale and radius".into(),
                ));
            }
        }
        Ok(Domain { axes, exhaustion })
    }

    pub fn real_line() -> Self {
        Domain::whole_space(1)
    }

    pub fn whole_space(dim: usize) -> Self {
        Domain {
            axes: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
            exhaustion: Exhaustion::Whole,
        }
    }

    pub fn half_line() -> Self {
        Domain {
            axes: vec![(0.0, f64::INFINITY)],
            exhaustion: Exhaustion::Whole,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        Domain::new(vec![(lo, hi)], Exhaustion::Whole)
    }

    pub fn with_exhaustion(mut self, exhaustion: Exhaustion) -> Self {
        self.exhaustion = exhaustion;
        self
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> (f64, f64) {
        self.axes[i]
    }

    pub fn axes(&self) -> &[(f64, f64)] {
        &self.axes
    }

    pub fn exhaustion(&self) -> Exhaustion {
        self.exhaustion
    }

    pub fn is_bounded(&self) -> bool {
        self.axes
            .iter()
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.axes)
                .all(|(v, (lo, hi))| v > lo && v < hi)
    }

    /// Bounds of `U_k` (k ≥ 1). For `Whole` this is `U` itself.
    pub fn exhaustion_box(&self, k: usize) -> Vec<(f64, f64)> {
        let k = k.max(1) as f64;
        match self.exhaustion {
            Exhaustion::Whole => self.axes.clone(),
            Exhaustion::Inset { scale, radius } => self
                .axes
                .iter()
                .map(|&(lo, hi)| {
                    let a = if lo.is_finite() {
                        lo + scale / k
                    } else {
                        -k * radius
                    };
                    let b = if hi.is_finite() {
                        hi - scale / k
                    } else {
                        k * radius
                    };
                    (a, b)
                })
                .collect(),
        }
    }

    /// `U_k` as a domain of its own.
    pub fn exhaustion_domain(&self, k: usize) -> Result<Domain, NumericsError> {
        Domain::new(self.exhaustion_box(k), Exhaustion::Whole)
    }

    /// Checks the exhaustion invariants for `k = 1..=k_max`: nonempty,
    /// nested, closure inside `U` (for `Inset`), and coverage of sampled
    /// points of `U`.
    pub fn validate_exhaustion(&self, k_max: usize) -> Result<(), NumericsError> {
        let mut prev: Option<Vec<(f64, f64)>> = None;
        for k in 1..=k_max.max(1) {
            let b = self.exhaustion_box(k);
            for (&(a, c), &(lo, hi)) in b.iter().zip(&self.axes) {
                if a >= c {
                    return Err(NumericsError::InvalidDomain(format!("U_{k} is empty")));
                }
                if matches!(self.exhaustion, Exhaustion::Inset { .. })
                    && !(a > lo && c < hi && a.is_finite() && c.is_finite())
                {
                    return Err(NumericsError::InvalidDomain(format!(
                        "closure of U_{k} leaves U"
                    )));
                }
            }
            if let Some(p) = &prev {
                let nested = p
                    .iter()
                    .zip(&b)
                    .all(|(&(a0, b0), &(a1, b1))| a1 <= a0 && b1 >= b0);
                if !nested {
                    return Err(NumericsError::InvalidDomain(format!("U_{} ⊄ U_{k}", k - 1)));
                }
            }
            prev = Some(b);
        }
        // coverage: every sampled point lies in some U_k
        if let Exhaustion::Inset { .. } = self.exhaustion {
            for s in 1..200 {
                let t = s as f64 / 200.0;
                let x: Vec<f64> = self
                    .axes
                    .iter()
                    .map(|&(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => lo + (hi - lo) * t,
                        (true, false) => lo + t / (1.0 - t),
                        (false, true) => hi - t / (1.0 - t),
                        (false, false) => (std::f64::consts::PI * (t - 0.5)).tan(),
                    })
                    .collect();
                let covered = (1..=1_000_000usize).step_by(997).any(|k| {
                    self.exhaustion_box(k)
                        .iter()
                        .zip(&x)
                        .all(|(&(a, b), v)| *v > a && *v < b)
                });
                if !covered {
                    return Err(NumericsError::InvalidDomain(format!(
                        "sample {x:?} not covered by exhaustion"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inset_exhaustion_matches_shrinking_intervals() {
        let d = Domain::interval(-2.0, 2.0)
            .unwrap()
            .with_exhaustion(Exhaustion::Inset {
                scale: 1.0,
                radius: 1.0,
            });
        assert_eq!(d.exhaustion_box(1), vec![(-1.0, 1.0)]);
        assert_eq!(d.exhaustion_box(4), vec![(-1.75, 1.75)]);
        d.validate_exhaustion(10).unwrap();
    }

    #[test]
    fn empty_first_set_is_rejected() {
        let d = Domain::interval(-1.0, 1.0)
            .unwrap()
            .with_exhaustion(Exhaustion::Inset {
                scale: 1.0,
                radius: 1.0,
            });
        assert!(d.validate_exhaustion(3).is_err());
    }

    #[test]
    fn whole_line_exhaustion() {
        let d = Domain::real_line();
        assert_eq!(
            d.exhaustion_box(3),
            vec![(f64::NEG_INFINITY, f64::INFINITY)]
        );
        d.validate_exhaustion(5).unwrap();
        let d = d.with_exhaustion(Exhaustion::Inset {
            scale: 1.0,
            radius: 2.0,
        });
        assert_eq!(d.exhaustion_box(3), vec![(-6.0, 6.0)]);
        d.validate_exhaustion(5).unwrap();
    }

    #[test]
    fn bad_axes() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::new(vec![(0.0, 1.0); 3], Exhaustion::Whole).is_err());
        assert!(Domain::half_line().contains(&[0.5]));
        assert!(!Domain::half_line().contains(&[0.0]));
    }
}
