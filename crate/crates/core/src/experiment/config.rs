//! Experiment configuration: a versioned JSON schema with unknown keys
//! rejected, and the cross-field validation done before anything runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{DecayClass, DensityOutcome, ProjectionOptions, WitnessOptions};
use crate::families::{
    exponential_family, gap_family, monomial_family, shift_grid, symmetric_frequencies,
    translate_family, BasisFamily, FamilyError,
};
use crate::funcmodel::{make_phi, preset_weight, MapPhi, PhiSpec, ScalarField, WeightPreset};
use crate::numerics::{Atom, Domain, Exhaustion, MeasureSpec, RuleOptions};
use crate::spaces::{make_space, Caps, SpaceKind, SpaceParams, SpaceSpec};
use crate::verify::{Consistency, DiffMethod};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{rule}: {message}")]
pub struct ConfigError {
    /// Short name of the violated rule.
    pub rule: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(rule: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            rule,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    /// Seed for any sampling done by checks; the pipeline itself is
    /// deterministic.
    #[serde(default)]
    pub seed: u64,
    pub space: SpaceConfig,
    pub weight: WeightConfig,
    #[serde(default = "identity_phi")]
    pub phi: PhiSpec,
    #[serde(default)]
    pub admissibility: Option<AdmissibilityConfig>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    /// Targets approximated by every family size.
    #[serde(default)]
    pub targets: Vec<ScalarField>,
    #[serde(default)]
    pub witness: Option<WitnessConfig>,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub tolerances: ProjectionOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

fn identity_phi() -> PhiSpec {
    PhiSpec::Identity
}

/// One axis of the domain; `null` bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConfig(pub Option<f64>, pub Option<f64>);

impl AxisConfig {
    pub fn line() -> Self {
        AxisConfig(None, None)
    }

    pub fn half_line() -> Self {
        AxisConfig(Some(0.0), None)
    }

    pub fn interval(a: f64, b: f64) -> Self {
        AxisConfig(Some(a), Some(b))
    }

    fn bounds(self) -> (f64, f64) {
        (
            self.0.unwrap_or(f64::NEG_INFINITY),
            self.1.unwrap_or(f64::INFINITY),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub density: Option<ScalarField>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: SpaceKind,
    pub domain: Vec<AxisConfig>,
    #[serde(default = "whole")]
    pub exhaustion: Exhaustion,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    /// Required for `lp`; ignored otherwise.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub m: usize,
    /// `k_max = 1` with no weights or derivatives when omitted.
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub rule: Option<RuleOptions>,
}

fn whole() -> Exhaustion {
    Exhaustion::Whole
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightConfig {
    Preset(WeightPreset),
    Expression { expression: ScalarField },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityConfig {
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_degree_probe")]
    pub degree_probe: usize,
    /// Extra exponents checked alongside the space's own (`L_p` only).
    #[serde(default)]
    pub extra_p: Vec<f64>,
}

fn default_degree_probe() -> usize {
    crate::families::DEFAULT_DEGREE_PROBE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// `Φ^β f₀`, `|β| ≤ D` for each `D`.
    Monomial { degrees: Vec<usize> },
    /// `e^{i(λ,Φ)} f₀` for `λ ∈ {0, ±step, …, ±h·step}` for each `h`.
    Exponential { halves: Vec<usize>, step: f64 },
    /// `x^n e^{-x}`, `n ≥ n_min`, `l ∤ n`, `n ≤ cap` for each cap.
    Gap { n_min: u32, l: u32, caps: Vec<u32> },
    /// `f₀(x − s)` over a shift grid on `[lo, hi]` for each spacing.
    Translate { lo: f64, hi: f64, spacings: Vec<f64> },
}

impl FamilyConfig {
    pub fn steps(&self) -> usize {
        match self {
            FamilyConfig::Monomial { degrees } => degrees.len(),
            FamilyConfig::Exponential { halves, .. } => halves.len(),
            FamilyConfig::Gap { caps, .. } => caps.len(),
            FamilyConfig::Translate { spacings, .. } => spacings.len(),
        }
    }

    /// The size reported for step `i`: the degree cap for monomial and gap
    /// families, the member count otherwise.
    pub fn size(&self, i: usize, phi: &MapPhi, f0: &ScalarField) -> Result<usize, FamilyError> {
        Ok(match self {
            FamilyConfig::Monomial { degrees } => degrees[i],
            FamilyConfig::Gap { caps, .. } => caps[i] as usize,
            FamilyConfig::Exponential { halves, .. } => 2 * halves[i] + 1,
            FamilyConfig::Translate { .. } => self.build(i, phi, f0)?.len(),
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilyConfig::Monomial { .. } => "monomial",
            FamilyConfig::Exponential { .. } => "exponential",
            FamilyConfig::Gap { .. } => "gap",
            FamilyConfig::Translate { .. } => "translate",
        }
    }

    /// Family at step `i` of the configured sequence.
    pub fn build(&self, i: usize, phi: &MapPhi, f0: &ScalarField) -> Result<BasisFamily, FamilyError> {
        Ok(match self {
            FamilyConfig::Monomial { degrees } => monomial_family(phi, f0, degrees[i]),
            FamilyConfig::Exponential { halves, step } => {
                // Real frequencies sit inside every strip.
                exponential_family(phi, f0, &symmetric_frequencies(halves[i], *step), 1.0)?
            }
            FamilyConfig::Gap { n_min, l, caps } => gap_family(*n_min, *l, caps[i])?,
            FamilyConfig::Translate { lo, hi, spacings } => {
                translate_family(f0, &shift_grid(*lo, *hi, spacings[i]))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub probe_degree: usize,
    #[serde(default)]
    pub options: WitnessOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    /// Derivatives of `λ ↦ ⟨T, e^{-i(λ,Φ)} f₀⟩` at 0 for `T = ∫ · g dx`.
    DerivativeMoment {
        g: ScalarField,
        orders: Vec<usize>,
        method: DiffMethod,
        #[serde(default = "three")]
        levels: usize,
        tolerance: f64,
    },
    /// `∫ f(λ) e^{-i(λ,Φ)} f₀ dλ` against `F(f)(Φ) f₀`.
    WeakIntegral {
        f: ScalarField,
        #[serde(default)]
        transform: TransformChoice,
        /// Gauss–Legendre order per panel of the `λ` rule; also run at
        /// twice this order.
        order: usize,
        panels: usize,
        lambda_radius: f64,
        grid_points: usize,
        grid_radius: f64,
        tolerance: f64,
        /// Required reduction of the residual when the order doubles.
        min_drop: f64,
    },
    /// Power-law growth of a seminorm of `e^{-i(λ,Φ)} f₀` in `λ`.
    Growth {
        lambdas: Vec<f64>,
        alpha: Vec<usize>,
        n: u32,
        #[serde(default = "one")]
        k: usize,
    },
    /// Monomial and exponential spans at matched odd sizes.
    ClosureCompare {
        target: ScalarField,
        sizes: Vec<usize>,
        step: f64,
        expect: Consistency,
        /// Both final errors must be below this when both decay.
        #[serde(default)]
        final_below: Option<f64>,
    },
}

/// Source of `F(f)` in the weak-integral check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformChoice {
    /// `f` is `exp(-|x|²/2)` and the transform is taken in closed form.
    Gaussian,
    /// An independent, finer quadrature of the transform.
    #[default]
    Quadrature,
}

fn three() -> usize {
    3
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Criterion {
    /// Admissibility verdict at exponent `p` (the space's own when absent).
    Admissible {
        #[serde(default)]
        p: Option<f64>,
        expect: bool,
        #[serde(default)]
        min_eps: Option<f64>,
        /// Required failure location, e.g. `x1 = 0`.
        #[serde(default)]
        location: Option<String>,
    },
    /// Error of `target` at the last size below `threshold`.
    FinalErrorBelow { target: usize, threshold: f64 },
    /// Error of `target` at the first size `≥ size` below `threshold`.
    ErrorBelowBySize {
        target: usize,
        size: usize,
        threshold: f64,
    },
    /// Every error of `target` at least `threshold`.
    ErrorsAtLeast { target: usize, threshold: f64 },
    StrictlyDecreasing { target: usize },
    DecayClass { target: usize, expect: DecayClass },
    DensityOutcome { expect: DensityOutcome },
    WitnessAnnihilates { threshold: f64 },
    WitnessSeparates { threshold: f64 },
    /// Every configured check passes.
    ChecksPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".into(),
        }
    }
}

/// Everything the pipeline needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: SpaceSpec,
    pub f0: ScalarField,
    pub phi: MapPhi,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::new("schema", e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    fn domain(&self) -> Result<Domain, ConfigError> {
        let axes = self.space.domain.iter().map(|a| a.bounds()).collect();
        Domain::new(axes, self.space.exhaustion).map_err(|e| ConfigError::new("domain", e.to_string()))
    }

    pub fn weight_field(&self) -> Result<ScalarField, ConfigError> {
        match &self.weight {
            WeightConfig::Preset(p) => {
                preset_weight(p).map_err(|e| ConfigError::new("weight", e.to_string()))
            }
            WeightConfig::Expression { expression } => Ok(expression.clone()),
        }
    }

    /// Checks every cross-field rule and builds the space, weight and map.
    pub fn validate(&self) -> Result<Resolved, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema-version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let domain = self.domain()?;
        let dim = domain.dim();
        let f0 = self.weight_field()?;
        let kind = self.space.kind;

        if let WeightConfig::Preset(WeightPreset::Laguerre { .. }) = &self.weight {
            if domain.axes() != [(0.0, f64::INFINITY)] {
                return Err(ConfigError::new(
                    "laguerre-half-line",
                    "the laguerre weight requires the domain (0, ∞)",
                ));
            }
        }
        if kind != SpaceKind::Lp && !f0.is_smooth() {
            return Err(ConfigError::new(
                "smooth-weight",
                format!("{kind:?} spaces need a smooth weight; {f0} contains floor or abs"),
            ));
        }
        if f0.arity() > dim {
            return Err(ConfigError::new(
                "weight-dimension",
                format!("weight uses {} variables on a {dim}-dimensional domain", f0.arity()),
            ));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.arity() > dim {
                return Err(ConfigError::new(
                    "target-dimension",
                    format!("target {i} uses {} variables on a {dim}-dimensional domain", t.arity()),
                ));
            }
            if kind != SpaceKind::Lp && !t.is_smooth() {
                return Err(ConfigError::new(
                    "smooth-target",
                    format!("target {i} must be smooth in a {kind:?} space"),
                ));
            }
        }

        let measure = match &self.space.measure {
            None => MeasureSpec::lebesgue(),
            Some(m) => {
                let base = match &m.density {
                    Some(d) => MeasureSpec::with_density(d.clone()),
                    None => MeasureSpec::lebesgue(),
                };
                base.with_atoms(m.atoms.clone())
            }
        };
        let p = match kind {
            SpaceKind::Lp => self
                .space
                .p
                .ok_or_else(|| ConfigError::new("lp-exponent", "lp spaces need p"))?,
            _ => f64::INFINITY,
        };
        let params = SpaceParams {
            kind,
            domain: domain.clone(),
            measure,
            p,
            m: self.space.m,
            caps: self.space.caps,
            rule: self.space.rule.clone(),
        };
        let space = make_space(params).map_err(|e| ConfigError::new("space", e.to_string()))?;
        let phi = make_phi(&self.phi, &domain).map_err(|e| ConfigError::new("phi", e.to_string()))?;

        if let Some(adm) = &self.admissibility {
            if adm.eps_grid.is_empty() || adm.eps_grid.iter().any(|e| !(*e > 0.0)) {
                return Err(ConfigError::new("eps-grid", "strip widths must be positive"));
            }
            if !adm.extra_p.is_empty() && kind != SpaceKind::Lp {
                return Err(ConfigError::new("extra-p", "extra exponents apply to lp spaces only"));
            }
            if adm.extra_p.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
                return Err(ConfigError::new("extra-p", "exponents must lie in [1, ∞)"));
            }
        }
        if let Some(fam) = &self.family {
            self.validate_family(fam, &domain)?;
        }
        if !self.targets.is_empty() && self.family.is_none() {
            return Err(ConfigError::new("family", "targets need a family block"));
        }
        for c in &self.criteria {
            self.validate_criterion(c)?;
        }
        for c in &self.checks {
            validate_check(c, dim)?;
        }
        Ok(Resolved { space, f0, phi })
    }

    fn validate_family(&self, fam: &FamilyConfig, domain: &Domain) -> Result<(), ConfigError> {
        if fam.steps() == 0 {
            return Err(ConfigError::new("family-sizes", "the size list is empty"));
        }
        match fam {
            FamilyConfig::Monomial { degrees } => increasing(degrees, "degrees"),
            FamilyConfig::Exponential { halves, step } => {
                if !(*step > 0.0) {
                    return Err(ConfigError::new("family-step", "frequency step must be positive"));
                }
                if domain.dim() != 1 {
                    return Err(ConfigError::new(
                        "family-dimension",
                        "frequency grids are one-dimensional",
                    ));
                }
                increasing(halves, "halves")
            }
            FamilyConfig::Gap { l, caps, .. } => {
                if domain.axes() != [(0.0, f64::INFINITY)] {
                    return Err(ConfigError::new("gap-half-line", "gap families live on (0, ∞)"));
                }
                if *l < 2 {
                    return Err(ConfigError::new("gap-modulus", "l must be at least 2"));
                }
                increasing(caps, "caps")
            }
            FamilyConfig::Translate { lo, hi, spacings } => {
                if domain.dim() != 1 || domain.is_bounded() {
                    return Err(ConfigError::new(
                        "translate-domain",
                        "translates need an unbounded one-dimensional domain",
                    ));
                }
                if !(lo < hi) || spacings.iter().any(|s| !(*s > 0.0)) {
                    return Err(ConfigError::new("translate-grid", "need lo < hi and positive spacings"));
                }
                if spacings.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(ConfigError::new("translate-grid", "spacings must decrease"));
                }
                Ok(())
            }
        }
    }

    fn validate_criterion(&self, c: &Criterion) -> Result<(), ConfigError> {
        let target = match c {
            Criterion::FinalErrorBelow { target, .. }
            | Criterion::ErrorBelowBySize { target, .. }
            | Criterion::ErrorsAtLeast { target, .. }
            | Criterion::StrictlyDecreasing { target }
            | Criterion::DecayClass { target, .. } => Some(*target),
            _ => None,
        };
        if let Some(t) = target {
            if t >= self.targets.len() {
                return Err(ConfigError::new(
                    "criterion-target",
                    format!("criterion refers to target {t}, only {} defined", self.targets.len()),
                ));
            }
        }
        match c {
            Criterion::Admissible { p, .. } => {
                let adm = self.admissibility.as_ref().ok_or_else(|| {
                    ConfigError::new("criterion-admissibility", "no admissibility block")
                })?;
                if let Some(p) = p {
                    if self.space.p != Some(*p) && !adm.extra_p.contains(p) {
                        return Err(ConfigError::new(
                            "criterion-admissibility",
                            format!("exponent {p} is not checked"),
                        ));
                    }
                }
            }
            Criterion::DensityOutcome { .. }
            | Criterion::WitnessAnnihilates { .. }
            | Criterion::WitnessSeparates { .. } => {
                if self.witness.is_none() {
                    return Err(ConfigError::new("criterion-witness", "no witness block"));
                }
            }
            Criterion::ChecksPass if self.checks.is_empty() => {
                return Err(ConfigError::new("criterion-checks", "no checks configured"));
            }
            _ => {}
        }
        Ok(())
    }
}

fn increasing<T: PartialOrd>(v: &[T], what: &str) -> Result<(), ConfigError> {
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new(
            "family-sizes",
            format!("{what} must be strictly increasing"),
        ));
    }
    Ok(())
}

fn validate_check(c: &CheckConfig, dim: usize) -> Result<(), ConfigError> {
    match c {
        CheckConfig::DerivativeMoment { orders, method, .. } => {
            if dim != 1 {
                return Err(ConfigError::new("check-dimension", "derivative checks are one-dimensional"));
            }
            let bad = orders.iter().any(|&o| match method {
                DiffMethod::RichardsonFd => o == 0 || o > 4,
                DiffMethod::ComplexStep => o != 1,
            });
            if bad {
                return Err(ConfigError::new(
                    "check-order",
                    "finite differences take orders 1..=4, the complex step order 1",
                ));
            }
        }
        CheckConfig::WeakIntegral {
            order,
            panels,
            grid_points,
            ..
        } => {
            if *order == 0 || *panels == 0 || *grid_points < 2 {
                return Err(ConfigError::new("check-rule", "order, panels and grid must be positive"));
            }
            if dim != 1 {
                return Err(ConfigError::new("check-dimension", "weak-integral checks are one-dimensional"));
            }
        }
        CheckConfig::Growth { lambdas, alpha, .. } => {
            if lambdas.len() < 2 || alpha.len() != dim {
                return Err(ConfigError::new(
                    "check-growth",
                    "need at least two λ values and a multi-index of the domain dimension",
                ));
            }
        }
        CheckConfig::ClosureCompare { sizes, step, .. } => {
            if sizes.iter().any(|s| s % 2 == 0) || !(*step > 0.0) || dim != 1 {
                return Err(ConfigError::new(
                    "check-closure",
                    "matched sizes must be odd, the step positive, the domain one-dimensional",
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            schema_version: 1,
            name: "t".into(),
            seed: 0,
            space: SpaceConfig {
                kind: SpaceKind::Lp,
                domain: vec![AxisConfig::line()],
                exhaustion: Exhaustion::Whole,
                measure: None,
                p: Some(2.0),
                m: 0,
                caps: Caps {
                    k_max: 1,
                    n_max: 0,
                    alpha_max: 0,
                },
                rule: None,
            },
            weight: WeightConfig::Preset(WeightPreset::Gaussian { dim: 1 }),
            phi: PhiSpec::Identity,
            admissibility: None,
            family: None,
            targets: vec![],
            witness: None,
            checks: vec![],
            criteria: vec![],
            tolerances: Default::default(),
            output: Default::default(),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let c = base();
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
        assert!(c.to_json().contains("null"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = base().to_json().replacen("\"seed\"", "\"sead\"", 1);
        assert_eq!(ExperimentConfig::from_json(&text).unwrap_err().rule, "schema");
    }

    #[test]
    fn cm_with_floor_weight_names_the_rule() {
        let mut c = base();
        c.space.kind = SpaceKind::Cm;
        c.space.p = None;
        c.space.domain = vec![AxisConfig::interval(-1.0, 1.0)];
        c.space.exhaustion = Exhaustion::Inset {
            scale: 0.5,
            radius: 1.0,
        };
        c.weight = WeightConfig::Preset(WeightPreset::Exotic);
        assert_eq!(c.validate().unwrap_err().rule, "smooth-weight");
    }

    #[test]
    fn laguerre_needs_half_line() {
        let mut c = base();
        c.weight = WeightConfig::Preset(WeightPreset::Laguerre { alpha: 0.5 });
        assert_eq!(c.validate().unwrap_err().rule, "laguerre-half-line");
    }
}
