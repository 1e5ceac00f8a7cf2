use serde::{Deserialize, Serialize};

use super::{Domain, NumericsError};
use crate::funcmodel::ScalarField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub mass: f64,
}

/// `dμ = w(x) dx + Σ m_i δ_{a_i}`. A missing density means Lebesgue measure.
#[derive(Debug, Clone, Default)]
pub struct MeasureSpec {
    density: Option<ScalarField>,
    atoms: Vec<Atom>,
}

impl MeasureSpec {
    pub fn lebesgue() -> Self {
        MeasureSpec::default()
    }

    pub fn with_density(density: ScalarField) -> Self {
        MeasureSpec {
            density: Some(density),
            atoms: Vec::new(),
        }
    }

    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Self {
        self.atoms = atoms;
        self
    }

    pub fn density(&self) -> Option<&ScalarField> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    #[inline]
    pub fn weight_at(&self, x: &[f64]) -> f64 {
        self.density.as_ref().map_or(1.0, |w| w.eval(x))
    }

    /// Atoms must sit strictly inside `U` with positive mass; the density
    /// must be finite and non-negative at each supplied node.
    pub fn validate<'a>(
        &self,
        domain: &Domain,
        nodes: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<(), NumericsError> {
        for atom in &self.atoms {
            if !(atom.mass > 0.0 && atom.mass.is_finite()) {
                return Err(NumericsError::InvalidMeasure(format!(
                    "atom mass {} must be positive",
                    atom.mass
                )));
            }
            if !domain.contains(&atom.location) {
                return Err(NumericsError::InvalidMeasure(format!(
                    "atom at {:?} is not in the open domain",
                    atom.location
                )));
            }
        }
        if let Some(w) = &self.density {
            for x in nodes {
                let v = w.eval(x);
                if !v.is_finite() || v < 0.0 {
                    return Err(NumericsError::InvalidMeasure(format!(
                        "density {v} at {x:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}
