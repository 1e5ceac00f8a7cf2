//! Named experiments with a few overridable parameters each.

use std::collections::BTreeMap;

use super::config::{
    AdmissibilityConfig, AxisConfig, CheckConfig, ConfigError, Criterion, ExperimentConfig,
    FamilyConfig, MeasureConfig, OutputConfig, SpaceConfig, TransformChoice, WeightConfig,
    WitnessConfig, SCHEMA_VERSION,
};
use crate::approx::{DecayClass, DensityOutcome, ProjectionOptions, WitnessOptions};
use crate::funcmodel::{PhiSpec, ScalarField, WeightPreset};
use crate::numerics::Exhaustion;
use crate::spaces::{Caps, SpaceKind};
use crate::verify::{Consistency, DiffMethod};

#[derive(Debug, Clone, PartialEq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, &'static str)],
}

const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "hermite_l2",
        summary: "Gaussian-weighted polynomials in L2(R): decay of 1/(1+x^2) and the density verdict",
        params: &[],
    },
    PresetInfo {
        name: "hermite_lp",
        summary: "Gaussian-weighted polynomials in Lp(R), fitted by IRLS",
        params: &[("p", "4")],
    },
    PresetInfo {
        name: "laguerre_threshold",
        summary: "Laguerre weight x^(a/2) e^(-x/2) on (0,inf): admissibility at p = 2 and at p",
        params: &[("alpha", "-0.5"), ("p", "4")],
    },
    PresetInfo {
        name: "exotic_l2",
        summary: "the non-smooth weight exp(-sqrt(x^6+cos x+2)) floor(x^2+2) in L2(R)",
        params: &[],
    },
    PresetInfo {
        name: "polynomial_lp_smallmeasure",
        summary: "plain polynomials (f0 = 1) in Lp of a compactly supported smooth density",
        params: &[("p", "2")],
    },
    PresetInfo {
        name: "cm_polynomial_density",
        summary: "plain polynomials in C^m(-1,1)",
        params: &[("m", "1")],
    },
    PresetInfo {
        name: "cm_zero_obstruction",
        summary: "f0 = x e^(-x^2) on (-1,1): the constant 1 stays at distance 1, delta_0 is a witness",
        params: &[("m", "1")],
    },
    PresetInfo {
        name: "schwartz_hermite",
        summary: "Gaussian-weighted polynomials in the Schwartz space, with a seminorm growth check",
        params: &[("n_max", "1"), ("alpha_max", "1")],
    },
    PresetInfo {
        name: "gaussian_translates_schwartz",
        summary: "translates of exp(-x^2) on refining shift grids in the Schwartz space",
        params: &[("n_max", "2"), ("alpha_max", "2"), ("shift", "0.3")],
    },
    PresetInfo {
        name: "gap_family",
        summary: "x^n e^(-x) with n >= N and l not dividing n, in L2(0,inf)",
        params: &[("N", "3"), ("l", "2")],
    },
    PresetInfo {
        name: "closure_compare",
        summary: "monomial against real-exponential spans at matched sizes (weight = gaussian | gap)",
        params: &[("weight", "gaussian"), ("step", "0.5")],
    },
    PresetInfo {
        name: "lemma212_check",
        summary: "weak integral of a Gaussian against its transform composed with the map",
        params: &[("order", "10")],
    },
    PresetInfo {
        name: "prop210_check",
        summary: "derivatives of the holomorphic pairing at 0 against the moments",
        params: &[("levels", "3")],
    },
];

pub fn preset_experiments() -> &'static [PresetInfo] {
    PRESETS
}

struct Params<'a> {
    preset: &'static str,
    values: BTreeMap<&'static str, &'a str>,
}

impl<'a> Params<'a> {
    fn new(info: &'static PresetInfo, overrides: &'a [(String, String)]) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<&'static str, &'a str> = info.params.iter().copied().collect();
        for (k, v) in overrides {
            match info.params.iter().find(|(name, _)| name == k) {
                Some((name, _)) => {
                    values.insert(name, v.as_str());
                }
                None => {
                    let known: Vec<&str> = info.params.iter().map(|(n, _)| *n).collect();
                    return Err(ConfigError::new(
                        "preset-param",
                        format!("{} takes {known:?}, not {k:?}", info.name),
                    ));
                }
            }
        }
        Ok(Params {
            preset: info.name,
            values,
        })
    }

    fn str(&self, key: &str) -> &str {
        self.values[key]
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.str(key).parse().map_err(|_| {
            ConfigError::new(
                "preset-param",
                format!("{}: {key} = {:?} is not a number", self.preset, self.str(key)),
            )
        })
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.str(key).parse().map_err(|_| {
            ConfigError::new(
                "preset-param",
                format!("{}: {key} = {:?} is not a non-negative integer", self.preset, self.str(key)),
            )
        })
    }
}

fn field(text: &str) -> ScalarField {
    ScalarField::parse(text).expect("preset expression parses")
}

fn lp_line(p: f64) -> SpaceConfig {
    SpaceConfig {
        kind: SpaceKind::Lp,
        domain: vec![AxisConfig::line()],
        exhaustion: Exhaustion::Whole,
        measure: None,
        p: Some(p),
        m: 0,
        caps: Caps::default(),
        rule: None,
    }
}

fn base(name: &str, space: SpaceConfig, weight: WeightConfig) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        seed: 0,
        space,
        weight,
        phi: PhiSpec::Identity,
        admissibility: None,
        family: None,
        targets: Vec::new(),
        witness: None,
        checks: Vec::new(),
        criteria: Vec::new(),
        tolerances: ProjectionOptions::default(),
        output: OutputConfig {
            dir: format!("out/{name}"),
        },
    }
}

fn gaussian() -> WeightConfig {
    WeightConfig::Preset(WeightPreset::Gaussian { dim: 1 })
}

fn adm(eps: &[f64]) -> Option<AdmissibilityConfig> {
    Some(AdmissibilityConfig {
        eps_grid: eps.to_vec(),
        degree_probe: crate::families::DEFAULT_DEGREE_PROBE,
        extra_p: Vec::new(),
    })
}

fn witness(probe_degree: usize) -> Option<WitnessConfig> {
    Some(WitnessConfig {
        probe_degree,
        options: Default::default(),
    })
}

fn admissible() -> Criterion {
    Criterion::Admissible {
        p: None,
        expect: true,
        min_eps: None,
        location: None,
    }
}

const EPS: &[f64] = &[0.1, 0.2, 0.45, 1.0, 2.0];

/// Builds the named preset with `overrides` applied.
pub fn preset_config(name: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig, ConfigError> {
    let info = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        ConfigError::new("preset-name", format!("unknown preset {name:?}; see list-presets"))
    })?;
    let prm = Params::new(info, overrides)?;
    let mut c;
    match name {
        "hermite_l2" => {
            c = base(name, lp_line(2.0), gaussian());
            c.admissibility = adm(EPS);
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![5, 10, 20, 40],
            });
            c.targets = vec![field("1/(1+x^2)")];
            c.witness = witness(20);
            c.criteria = vec![
                admissible(),
                Criterion::StrictlyDecreasing { target: 0 },
                Criterion::FinalErrorBelow {
                    target: 0,
                    threshold: 1e-3,
                },
                Criterion::DensityOutcome {
                    expect: DensityOutcome::DenseConsistent,
                },
            ];
        }
        "hermite_lp" => {
            let p = prm.f64("p")?;
            c = base(name, lp_line(p), gaussian());
            c.admissibility = adm(EPS);
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![5, 10, 20],
            });
            c.targets = vec![field("1/(1+x^2)"), field("exp(-(x-1)^2)")];
            c.criteria = vec![
                admissible(),
                Criterion::StrictlyDecreasing { target: 0 },
                Criterion::DecayClass {
                    target: 1,
                    expect: DecayClass::Decaying,
                },
            ];
        }
        "laguerre_threshold" => {
            let alpha = prm.f64("alpha")?;
            let p = prm.f64("p")?;
            let mut space = lp_line(2.0);
            space.domain = vec![AxisConfig::half_line()];
            c = base(name, space, WeightConfig::Preset(WeightPreset::Laguerre { alpha }));
            c.admissibility = Some(AdmissibilityConfig {
                eps_grid: EPS.to_vec(),
                degree_probe: crate::families::DEFAULT_DEGREE_PROBE,
                extra_p: if p == 2.0 { Vec::new() } else { vec![p] },
            });
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![5, 10, 20, 30, 40],
            });
            c.targets = vec![field("x*exp(-x)")];
            // Integrability at the origin holds iff p·α/2 > -1.
            let ok = |q: f64| alpha >= 0.0 || q < -2.0 / alpha;
            c.criteria = vec![
                Criterion::Admissible {
                    p: Some(2.0),
                    expect: ok(2.0),
                    min_eps: ok(2.0).then_some(0.2),
                    location: None,
                },
                Criterion::ErrorBelowBySize {
                    target: 0,
                    size: 30,
                    threshold: 1e-2,
                },
            ];
            if p != 2.0 {
                c.criteria.push(Criterion::Admissible {
                    p: Some(p),
                    expect: ok(p),
                    min_eps: None,
                    location: (!ok(p)).then(|| "x1 = 0".to_string()),
                });
            }
        }
        "exotic_l2" => {
            c = base(name, lp_line(2.0), WeightConfig::Preset(WeightPreset::Exotic));
            c.admissibility = adm(EPS);
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![4, 9, 19],
            });
            c.targets = vec![field("exp(-(x-1)^2)")];
            // The weight decays like e^{-|x|^3}; heavy-tailed library targets
            // need one more degree step before their decay shows.
            c.witness = Some(WitnessConfig {
                probe_degree: 20,
                options: WitnessOptions {
                    decay_degrees: vec![4, 9, 19, 39],
                    ..Default::default()
                },
            });
            c.criteria = vec![
                admissible(),
                Criterion::DecayClass {
                    target: 0,
                    expect: DecayClass::Decaying,
                },
                Criterion::DensityOutcome {
                    expect: DensityOutcome::DenseConsistent,
                },
            ];
        }
        "polynomial_lp_smallmeasure" => {
            let p = prm.f64("p")?;
            let mut space = lp_line(p);
            space.measure = Some(MeasureConfig {
                density: Some(field("exp(-2/((1-x^2)+abs(1-x^2)))")),
                atoms: Vec::new(),
            });
            c = base(name, space, WeightConfig::Preset(WeightPreset::One));
            c.admissibility = adm(EPS);
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![4, 9, 19],
            });
            c.targets = vec![field("exp(x)*cos(2*x)")];
            c.witness = witness(20);
            c.criteria = vec![
                admissible(),
                Criterion::DecayClass {
                    target: 0,
                    expect: DecayClass::Decaying,
                },
                Criterion::DensityOutcome {
                    expect: DensityOutcome::DenseConsistent,
                },
            ];
        }
        "cm_polynomial_density" | "cm_zero_obstruction" => {
            let m = prm.usize("m")?;
            let space = SpaceConfig {
                kind: SpaceKind::Cm,
                domain: vec![AxisConfig::interval(-1.0, 1.0)],
                exhaustion: Exhaustion::Inset {
                    scale: 0.5,
                    radius: 1.0,
                },
                measure: None,
                p: None,
                m,
                caps: Caps {
                    k_max: 2,
                    n_max: 0,
                    alpha_max: m,
                },
                rule: None,
            };
            let obstruction = name == "cm_zero_obstruction";
            let weight = if obstruction {
                WeightConfig::Expression {
                    expression: field("x*exp(-x^2)"),
                }
            } else {
                WeightConfig::Preset(WeightPreset::One)
            };
            c = base(name, space, weight);
            c.admissibility = adm(&[0.5, 1.0]);
            c.family = Some(FamilyConfig::Monomial {
                degrees: vec![3, 6, 12],
            });
            c.witness = witness(50);
            if obstruction {
                c.targets = vec![field("1")];
                c.criteria = vec![
                    Criterion::ErrorsAtLeast {
                        target: 0,
                        threshold: 1.0 - 1e-6,
                    },
                    Criterion::DensityOutcome {
                        expect: DensityOutcome::ObstructionFound,
                    },
                    Criterion::WitnessAnnihilates { threshold: 1e-10 },
                ];
            } else {
                c.targets = vec![field("exp(x)*sin(x)")];
                c.criteria = vec![
                    admissible(),
                    Criterion::DecayClass {
                        target: 0,
                        expect: DecayClass::Decaying,
                    },
                    Criterion::DensityOutcome {
                        expect: DensityOutcome::DenseConsistent,
                    },
                ];
            }
        }
        "schwartz_hermite" | "gaussian_translates_schwartz" => {
            let n_max = prm.usize("n_max")? as u32;
            let alpha_max = prm.usize("alpha_max")?;
            let space = SpaceConfig {
                kind: SpaceKind::Schwartz,
                domain: vec![AxisConfig::line()],
                exhaustion: Exhaustion::Whole,
                measure: None,
                p: None,
                m: alpha_max,
                caps: Caps {
                    k_max: 1,
                    n_max,
                    alpha_max,
                },
                rule: None,
            };
            if name == "schwartz_hermite" {
                c = base(name, space, gaussian());
                c.admissibility = adm(&[0.5, 1.0]);
                c.family = Some(FamilyConfig::Monomial {
                    degrees: vec![4, 9, 19],
                });
                c.targets = vec![field("exp(-(x-1)^2)")];
                c.checks = vec![CheckConfig::Growth {
                    lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0],
                    alpha: vec![alpha_max],
                    n: n_max,
                    k: 1,
                }];
                c.criteria = vec![
                    admissible(),
                    Criterion::StrictlyDecreasing { target: 0 },
                    Criterion::DecayClass {
                        target: 0,
                        expect: DecayClass::Decaying,
                    },
                    Criterion::ChecksPass,
                ];
            } else {
                let shift = prm.f64("shift")?;
                c = base(name, space, WeightConfig::Preset(WeightPreset::GaussianNd { dim: 1 }));
                c.family = Some(FamilyConfig::Translate {
                    lo: -6.0,
                    hi: 6.0,
                    spacings: vec![1.0, 0.5, 0.25],
                });
                c.targets = vec![field(&format!("exp(-(x-({shift}))^2/2)"))];
                c.criteria = vec![
                    Criterion::StrictlyDecreasing { target: 0 },
                    Criterion::DecayClass {
                        target: 0,
                        expect: DecayClass::Decaying,
                    },
                ];
            }
        }
        "gap_family" => {
            let n_min = prm.usize("N")? as u32;
            let l = prm.usize("l")? as u32;
            let mut space = lp_line(2.0);
            space.domain = vec![AxisConfig::half_line()];
            c = base(name, space, WeightConfig::Expression {
                expression: field("exp(-x)"),
            });
            c.family = Some(FamilyConfig::Gap {
                n_min,
                l,
                caps: vec![9, 19, 40],
            });
            c.targets = vec![field("x*exp(-x)")];
            c.criteria = vec![
                Criterion::StrictlyDecreasing { target: 0 },
                Criterion::FinalErrorBelow {
                    target: 0,
                    threshold: 1e-2,
                },
            ];
        }
        "closure_compare" => {
            let step = prm.f64("step")?;
            let (weight, expect, final_below) = match prm.str("weight") {
                "gaussian" => (gaussian(), Consistency::BothDecay, Some(1e-2)),
                "gap" => (
                    WeightConfig::Preset(WeightPreset::GaussianGap { a: 0.0, b: 1.0 }),
                    Consistency::BothPlateau,
                    None,
                ),
                other => {
                    return Err(ConfigError::new(
                        "preset-param",
                        format!("closure_compare: weight must be gaussian or gap, not {other:?}"),
                    ))
                }
            };
            c = base(name, lp_line(2.0), weight);
            c.checks = vec![CheckConfig::ClosureCompare {
                target: field("exp(-(x-1)^2)"),
                sizes: vec![5, 9, 17, 33],
                step,
                expect,
                final_below,
            }];
            c.criteria = vec![Criterion::ChecksPass];
        }
        "lemma212_check" => {
            let order = prm.usize("order")?;
            c = base(name, lp_line(2.0), gaussian());
            c.checks = vec![CheckConfig::WeakIntegral {
                f: field("exp(-x^2/2)"),
                transform: TransformChoice::Gaussian,
                order,
                panels: 8,
                lambda_radius: 12.0,
                grid_points: 201,
                grid_radius: 6.0,
                tolerance: 1e-8,
                min_drop: 10.0,
            }];
            c.criteria = vec![Criterion::ChecksPass];
        }
        "prop210_check" => {
            let levels = prm.usize("levels")?;
            c = base(name, lp_line(2.0), gaussian());
            c.admissibility = adm(EPS);
            let g = field("exp(-(x-0.5)^2)");
            c.checks = vec![
                CheckConfig::DerivativeMoment {
                    g: g.clone(),
                    orders: vec![1, 2, 3],
                    method: DiffMethod::RichardsonFd,
                    levels,
                    tolerance: 1e-5,
                },
                CheckConfig::DerivativeMoment {
                    g,
                    orders: vec![1],
                    method: DiffMethod::ComplexStep,
                    levels,
                    tolerance: 1e-10,
                },
            ];
            c.criteria = vec![Criterion::ChecksPass];
        }
        _ => unreachable!("every listed preset is handled"),
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in preset_experiments() {
            let c = preset_config(p.name, &[]).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c, "{}", p.name);
        }
    }

    #[test]
    fn unknown_param_is_rejected() {
        let e = preset_config("gap_family", &[("q".into(), "1".into())]).unwrap_err();
        assert_eq!(e.rule, "preset-param");
    }
}
