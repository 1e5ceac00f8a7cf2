use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::FuncModelError;

/// Named weights `f₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum WeightPreset {
    /// `exp(-‖x‖²/2)`.
    Gaussian {
        #[serde(default = "one_dim")]
        dim: usize,
    },
    /// `exp(-x/2) x^{α/2}` on the half line, `α > -1`.
    Laguerre { alpha: f64 },
    /// `exp(-sqrt(x^6 + cos x + 2)) · floor(x^2 + 2)`.
    Exotic,
    /// `exp(-‖x‖²)`, the translate seed.
    GaussianNd {
        #[serde(default = "one_dim")]
        dim: usize,
    },
    /// Gaussian multiplied by a C^∞ cutoff vanishing exactly on `[a, b]`.
    GaussianGap { a: f64, b: f64 },
    /// `f₀ = 1`.
    One,
}

fn one_dim() -> usize {
    1
}

fn squared_norm(dim: usize) -> String {
    (1..=dim)
        .map(|i| format!("x{i}^2"))
        .collect::<Vec<_>>()
        .join("+")
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn smooth_step(t: &str) -> String {
    format!("exp(-2/(({t})+abs({t})))")
}

pub fn preset_weight(preset: &WeightPreset) -> Result<ScalarField, FuncModelError> {
    let field = match preset {
        WeightPreset::Gaussian { dim } => {
            ScalarField::parse(&format!("exp(-({})/2)", squared_norm(*dim)))?.with_label("gaussian")
        }
        WeightPreset::Laguerre { alpha } => {
            if *alpha <= -1.0 || !alpha.is_finite() {
                return Err(FuncModelError::InvalidParameter(format!(
                    "laguerre weight needs alpha > -1, got {alpha}"
                )));
            }
            ScalarField::parse(&format!("exp(-x/2)*x^({})", alpha / 2.0))?
                .with_label(format!("laguerre({alpha})"))
                .with_origin_singularity(*alpha < 0.0)
        }
        WeightPreset::Exotic => {
            ScalarField::parse("exp(-sqrt(x^6+cos(x)+2))*floor(x^2+2)")?.with_label("exotic")
        }
        WeightPreset::GaussianNd { dim } => {
            ScalarField::parse(&format!("exp(-({}))", squared_norm(*dim)))?
                .with_label("gaussian_nd")
        }
        WeightPreset::GaussianGap { a, b } => {
            if a >= b {
                return Err(FuncModelError::InvalidParameter(format!(
                    "gap interval needs a < b, got [{a}, {b}]"
                )));
            }
            let left = smooth_step(&format!("{a}-x"));
            let right = smooth_step(&format!("x-{b}"));
            ScalarField::parse(&format!("exp(-x^2/2)*({left}+{right})"))?
                .with_label(format!("gaussian_gap({a},{b})"))
        }
        WeightPreset::One => ScalarField::constant(1.0).with_label("one"),
    };
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_at_origin() {
        let g = preset_weight(&WeightPreset::Gaussian { dim: 1 }).unwrap();
        assert_eq!(g.eval(&[0.0]), 1.0);
        assert!(g.is_smooth());
    }

    #[test]
    fn laguerre_shape_and_marker() {
        let f = preset_weight(&WeightPreset::Laguerre { alpha: -0.5 }).unwrap();
        assert!(f.singular_at_origin());
        let x: f64 = 2.3;
        assert!((f.eval(&[x]) - (-x / 2.0).exp() * x.powf(-0.25)).abs() < 1e-15);
        assert!(preset_weight(&WeightPreset::Laguerre { alpha: -1.0 }).is_err());
        assert!(!preset_weight(&WeightPreset::Laguerre { alpha: 1.0 })
            .unwrap()
            .singular_at_origin());
    }

    #[test]
    fn exotic_is_measurable_only() {
        let f = preset_weight(&WeightPreset::Exotic).unwrap();
        assert!(!f.is_smooth());
        // floor(0 + 2) = 2, exp(-sqrt(3))
        assert!((f.eval(&[0.0]) - 2.0 * (-(3f64).sqrt()).exp()).abs() < 1e-15);
    }

    #[test]
    fn translate_seed() {
        let f = preset_weight(&WeightPreset::GaussianNd { dim: 1 }).unwrap();
        assert!((f.eval(&[1.0]) - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn gap_weight_vanishes_on_interval_only() {
        let f = preset_weight(&WeightPreset::GaussianGap { a: 0.0, b: 1.0 }).unwrap();
        for &x in &[0.0, 0.3, 0.5, 1.0] {
            assert_eq!(f.eval(&[x]), 0.0, "x = {x}");
        }
        for &x in &[-0.5, 1.5, -3.0] {
            assert!(f.eval(&[x]) > 0.0, "x = {x}");
        }
    }
}
