//! Configured experiments: schema, presets, the pipeline and its outputs.

mod config;
mod presets;
mod run;

pub use config::{
    AdmissibilityConfig, AxisConfig, CheckConfig, ConfigError, Criterion, ExperimentConfig,
    FamilyConfig, MeasureConfig, OutputConfig, Resolved, SpaceConfig, TransformChoice,
    WeightConfig, WitnessConfig, SCHEMA_VERSION,
};
pub use presets::{preset_config, preset_experiments, PresetInfo};
pub use run::{
    emit_plotdata, report_json, run_experiment, write_outputs, AdmissibilityEntry, CheckOutcome,
    CriterionOutcome, DecayRun, RunError, RunReport, SizeSummary, Timings,
};
