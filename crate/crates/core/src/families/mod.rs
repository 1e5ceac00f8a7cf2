//! Basis families `{b_i}` whose spans are tested for density, and the
//! admissibility checks on the weight and map that generate them.

mod admissibility;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcmodel::{
    exponential_field, ComplexField, ComplexFrequency, FuncModelError, MapPhi, ScalarField,
};
use crate::spaces::multi_indices;

pub use admissibility::{
    check_assumption26, check_thm31, AdmissibilityVerdict, Condition, Failure, TailFit,
    DEFAULT_DEGREE_PROBE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency {index} lies outside the strip ‖Im λ‖ < {eps}")]
    OutsideStrip { index: usize, eps: f64 },
    #[error(transparent)]
    Field(#[from] FuncModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Monomial,
    Exponential,
    Pullback,
    Gap,
    Translate,
}

/// What distinguishes one member from the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberIndex {
    /// Multi-index `β` of `Φ^β f₀`.
    Degree(Vec<usize>),
    Frequency {
        re: Vec<f64>,
        im: Vec<f64>,
    },
    /// Exponent `n` of `x^n e^{-x}`.
    Power(u32),
    Shift(Vec<f64>),
    /// Position in the pullback dictionary.
    Dictionary(usize),
}

/// Data the family was generated from.
#[derive(Debug, Clone)]
pub enum Generator {
    Monomial {
        phi: MapPhi,
        f0: ScalarField,
        degree_cap: usize,
    },
    Exponential {
        phi: MapPhi,
        f0: ScalarField,
        frequencies: Vec<ComplexFrequency>,
    },
    Pullback {
        phi: MapPhi,
        f0: ScalarField,
        functions: Vec<ScalarField>,
    },
    Gap {
        n_min: u32,
        l: u32,
        cap: u32,
    },
    Translate {
        seed: ScalarField,
        shifts: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct BasisFamily {
    kind: FamilyKind,
    members: Vec<ComplexField>,
    indices: Vec<MemberIndex>,
    generator: Generator,
}

impl BasisFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ComplexField] {
        &self.members
    }

    pub fn indices(&self) -> &[MemberIndex] {
        &self.indices
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn is_real(&self) -> bool {
        self.members.iter().all(|m| m.is_real())
    }

    pub fn eval_member(&self, i: usize, x: &[f64]) -> Complex64 {
        self.members[i].eval(x)
    }

    /// `(Φ, f₀)` for the kinds built from them.
    pub fn phi_and_weight(&self) -> Option<(&MapPhi, &ScalarField)> {
        match &self.generator {
            Generator::Monomial { phi, f0, .. }
            | Generator::Exponential { phi, f0, .. }
            | Generator::Pullback { phi, f0, .. } => Some((phi, f0)),
            _ => None,
        }
    }
}

fn monomial_field(phi: &MapPhi, beta: &[usize]) -> Option<ScalarField> {
    let mut acc: Option<ScalarField> = None;
    for (comp, &b) in phi.components().iter().zip(beta) {
        if b == 0 {
            continue;
        }
        let term = comp.powi(b as u32);
        acc = Some(match acc {
            None => term,
            Some(a) => a.mul(&term),
        });
    }
    acc
}

/// `Φ^β f₀` for all `|β| ≤ D`, graded.
pub fn monomial_family(phi: &MapPhi, f0: &ScalarField, degree_cap: usize) -> BasisFamily {
    let betas = multi_indices(phi.dim(), degree_cap);
    let members = betas
        .iter()
        .map(|beta| {
            let field = match monomial_field(phi, beta) {
                None => f0.clone(),
                Some(m) => m.mul(f0),
            };
            ComplexField::real(field)
        })
        .collect();
    BasisFamily {
        kind: FamilyKind::Monomial,
        members,
        indices: betas.into_iter().map(MemberIndex::Degree).collect(),
        generator: Generator::Monomial {
            phi: phi.clone(),
            f0: f0.clone(),
            degree_cap,
        },
    }
}

/// `e^{i(λ,Φ)} f₀` for each frequency, in order. `eps` is the strip the
/// family must stay inside.
pub fn exponential_family(
    phi: &MapPhi,
    f0: &ScalarField,
    frequencies: &[ComplexFrequency],
    eps: f64,
) -> Result<BasisFamily, FamilyError> {
    for (index, lambda) in frequencies.iter().enumerate() {
        let im = lambda.im().iter().map(|v| v * v).sum::<f64>().sqrt();
        if lambda.dim() != phi.dim() {
            return Err(FuncModelError::DimensionMismatch {
                expected: phi.dim(),
                got: lambda.dim(),
            }
            .into());
        }
        if im >= eps {
            return Err(FamilyError::OutsideStrip { index, eps });
        }
    }
    Ok(BasisFamily {
        kind: FamilyKind::Exponential,
        members: frequencies
            .iter()
            .map(|l| exponential_field(l, phi, f0, 1.0))
            .collect(),
        indices: frequencies
            .iter()
            .map(|l| MemberIndex::Frequency {
                re: l.re().to_vec(),
                im: l.im().to_vec(),
            })
            .collect(),
        generator: Generator::Exponential {
            phi: phi.clone(),
            f0: f0.clone(),
            frequencies: frequencies.to_vec(),
        },
    })
}

/// Real frequencies `λ = j·step`, `|j| ≤ half`, ordered by `|j|` then sign
/// so that prefixes are nested: `0, −s, s, −2s, 2s, …`.
pub fn symmetric_frequencies(half: usize, step: f64) -> Vec<ComplexFrequency> {
    let mut out = vec![ComplexFrequency::real(vec![0.0])];
    for j in 1..=half {
        let v = j as f64 * step;
        out.push(ComplexFrequency::real(vec![-v]));
        out.push(ComplexFrequency::real(vec![v]));
    }
    out
}

/// `x^n e^{-x}` for `N ≤ n ≤ cap` with `l ∤ n`.
pub fn gap_family(n_min: u32, l: u32, cap: u32) -> Result<BasisFamily, FamilyError> {
    if l < 2 {
        return Err(FamilyError::InvalidParameter(format!(
            "gap family needs l ≥ 2, got {l}"
        )));
    }
    if cap < n_min {
        return Err(FamilyError::InvalidParameter(format!(
            "index cap {cap} is below N = {n_min}"
        )));
    }
    let powers: Vec<u32> = (n_min..=cap).filter(|n| n % l != 0).collect();
    let members = powers
        .iter()
        .map(|&n| {
            let field = ScalarField::parse(&format!("x^{n}*exp(-x)")).expect("gap member parses");
            ComplexField::real(field)
        })
        .collect();
    Ok(BasisFamily {
        kind: FamilyKind::Gap,
        members,
        indices: powers.into_iter().map(MemberIndex::Power).collect(),
        generator: Generator::Gap { n_min, l, cap },
    })
}

/// `x ↦ seed(x − s)` for each shift `s`.
pub fn translate_family(seed: &ScalarField, shifts: &[Vec<f64>]) -> BasisFamily {
    BasisFamily {
        kind: FamilyKind::Translate,
        members: shifts
            .iter()
            .map(|s| ComplexField::real(seed.translate(s)))
            .collect(),
        indices: shifts.iter().cloned().map(MemberIndex::Shift).collect(),
        generator: Generator::Translate {
            seed: seed.clone(),
            shifts: shifts.to_vec(),
        },
    }
}

/// Uniform shift grid on `[lo, hi]` with the given spacing.
pub fn shift_grid(lo: f64, hi: f64, spacing: f64) -> Vec<Vec<f64>> {
    let count = ((hi - lo) / spacing).round() as usize;
    (0..=count).map(|i| vec![lo + spacing * i as f64]).collect()
}

/// `(f ∘ Φ) f₀` for each `f` in the dictionary.
pub fn pullback_family(functions: &[ScalarField], phi: &MapPhi, f0: &ScalarField) -> BasisFamily {
    BasisFamily {
        kind: FamilyKind::Pullback,
        members: functions
            .iter()
            .map(|f| ComplexField::real(f.compose(phi.components()).mul(f0)))
            .collect(),
        indices: (0..functions.len()).map(MemberIndex::Dictionary).collect(),
        generator: Generator::Pullback {
            phi: phi.clone(),
            f0: f0.clone(),
            functions: functions.to_vec(),
        },
    }
}

/// Generators `D^α Φ_j`, `|α| ≤ m`, of the algebra `P_{DΦ,m}`. Generators
/// that are constant on the sample points are dropped: the algebra is unital.
#[derive(Debug, Clone)]
pub struct AlgebraGenerators {
    generators: Vec<ScalarField>,
    labels: Vec<String>,
}

impl AlgebraGenerators {
    pub fn new(phi: &MapPhi, m: usize, samples: &[Vec<f64>]) -> Result<Self, FamilyError> {
        let mut generators = Vec::new();
        let mut labels = Vec::new();
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for alpha in multi_indices(phi.dim(), m) {
            for (j, comp) in phi.components().iter().enumerate() {
                let order: usize = alpha.iter().sum();
                let d = comp.derivative(&alpha)?;
                let values: Vec<f64> = samples
                    .iter()
                    .map(|x| {
                        if order == 0 {
                            Ok(comp.eval(x))
                        } else {
                            d.eval(x)
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let first = values.first().copied().unwrap_or(0.0);
                let constant = values
                    .iter()
                    .all(|v| (v - first).abs() <= 1e-12 * (1.0 + first.abs()));
                let duplicate = seen.iter().any(|s| {
                    s.iter()
                        .zip(&values)
                        .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
                });
                if constant || duplicate {
                    continue;
                }
                seen.push(values);
                generators.push(if order == 0 {
                    comp.clone()
                } else {
                    comp.partial(&alpha)?
                });
                labels.push(format!("D^{:?} Φ_{}", alpha, j + 1));
            }
        }
        Ok(AlgebraGenerators { generators, labels })
    }

    pub fn generators(&self) -> &[ScalarField] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// All products of generators of total degree ≤ `degree_cap`, starting with 1.
    pub fn products(&self, degree_cap: usize) -> Vec<(String, ScalarField)> {
        let mut out = vec![("1".to_string(), ScalarField::constant(1.0))];
        let g = self.generators.len();
        if g == 0 {
            return out;
        }
        // exponent vectors over the generators, graded
        let mut frontier: Vec<Vec<usize>> = vec![vec![0; g]];
        for _ in 1..=degree_cap {
            let mut next = Vec::new();
            for e in &frontier {
                let last = e.iter().rposition(|&v| v > 0).unwrap_or(0);
                for i in last..g {
                    let mut f = e.clone();
                    f[i] += 1;
                    next.push(f);
                }
            }
            for e in &next {
                let mut field: Option<ScalarField> = None;
                let mut label = Vec::new();
                for (i, &p) in e.iter().enumerate() {
                    if p == 0 {
                        continue;
                    }
                    let term = self.generators[i].powi(p as u32);
                    label.push(format!("({})^{p}", self.labels[i]));
                    field = Some(match field {
                        None => term,
                        Some(f) => f.mul(&term),
                    });
                }
                out.push((label.join("·"), field.expect("nonzero degree")));
            }
            frontier = next;
        }
        out
    }
}
