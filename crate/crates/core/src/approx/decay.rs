//! Error against family size, with a log-linear fit and a coarse
//! classification.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{project_in_space, ApproxError, ProjectionOptions, ProjectionReport};
use crate::families::BasisFamily;
use crate::funcmodel::ComplexField;
use crate::spaces::SpaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Decaying,
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub size: usize,
    pub error: f64,
    /// `ln e − (a + b·size)` for the fitted line.
    pub fit_residual: f64,
}

/// `ln e ≈ intercept + slope · size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Slope between the last two sizes.
    pub tail_slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub fit: DecayFit,
    pub class: DecayClass,
    #[serde(skip)]
    pub reports: Vec<ProjectionReport>,
}

impl DecayTable {
    /// Builds the table from `(size, error)` pairs; errors are floored at
    /// the smallest positive double before taking logs.
    pub fn from_errors(pairs: &[(usize, f64)]) -> DecayTable {
        let logs: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(s, e)| (s as f64, e.max(f64::MIN_POSITIVE).ln()))
            .collect();
        let n = logs.len() as f64;
        let (sx, sy) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let tail_slope = match logs.len() {
            0 | 1 => 0.0,
            k => {
                let (x0, y0) = logs[k - 2];
                let (x1, y1) = logs[k - 1];
                if x1 != x0 {
                    (y1 - y0) / (x1 - x0)
                } else {
                    0.0
                }
            }
        };
        let rows = pairs
            .iter()
            .zip(&logs)
            .map(|(&(size, error), &(x, y))| DecayRow {
                size,
                error,
                fit_residual: y - (intercept + slope * x),
            })
            .collect();
        let class = match (pairs.first(), pairs.last()) {
            (Some(first), Some(last)) if last.1 < 0.5 * first.1 && tail_slope < 0.0 => {
                DecayClass::Decaying
            }
            _ => DecayClass::Plateau,
        };
        DecayTable {
            rows,
            fit: DecayFit {
                slope,
                intercept,
                tail_slope,
            },
            class,
            reports: Vec::new(),
        }
    }

    /// Columns `size,error,fit_residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["size", "error", "fit_residual"])?;
        for r in &self.rows {
            w.write_record([
                r.size.to_string(),
                format!("{:e}", r.error),
                format!("{:e}", r.fit_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Projects `target` onto `build(size)` for each size, in the natural norm of
/// `space` on `U_k`.
pub fn error_decay(
    target: &ComplexField,
    sizes: &[usize],
    build: &(dyn Fn(usize) -> Result<BasisFamily, ApproxError> + Sync),
    space: &SpaceSpec,
    k: usize,
    opts: &ProjectionOptions,
) -> Result<DecayTable, ApproxError> {
    use rayon::prelude::*;
    let reports: Vec<ProjectionReport> = sizes
        .par_iter()
        .map(|&s| project_in_space(target, &build(s)?, space, k, opts))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, f64)> = sizes.iter().zip(&reports).map(|(&s, r)| (s, r.error)).collect();
    let mut table = DecayTable::from_errors(&pairs);
    table.reports = reports;
    Ok(table)
}
