use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use density_lab::experiment::{
    preset_config, preset_experiments, run_experiment, write_outputs, ConfigError,
    ExperimentConfig, RunError,
};

#[derive(Parser)]
#[command(name = "density-lab", version, about = "Density experiments for weighted function families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        /// Parameter override, repeatable.
        #[arg(long = "param", value_name = "K=V", value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset's config instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// List presets and their parameters.
    ListPresets,
    /// Validate a config without running it.
    Check { config: PathBuf },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected K=V, got {s:?}"))
}

fn load(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config-file", format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn execute(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<i32, RunError> {
    let (report, timings) = run_experiment(cfg)?;
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    write_outputs(&report, &timings, &dir)?;
    for c in &report.criteria {
        println!(
            "{} {} observed={}",
            if c.pass { "PASS" } else { "FAIL" },
            serde_json::to_string(&c.criterion).unwrap_or_default(),
            c.observed
        );
    }
    println!(
        "{}: {} criteria, {} failed; {:.2} s; report in {}",
        report.name,
        report.criteria.len(),
        report.criteria.iter().filter(|c| !c.pass).count(),
        timings.total,
        dir.display()
    );
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("DENSITY_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => load(&config).and_then(|c| execute(&c, out)),
        Command::Preset {
            name,
            params,
            out,
            print_config,
        } => preset_config(&name, &params)
            .map_err(RunError::from)
            .and_then(|c| {
                if print_config {
                    println!("{}", c.to_json());
                    Ok(0)
                } else {
                    execute(&c, out)
                }
            }),
        Command::ListPresets => {
            for p in preset_experiments() {
                let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<28} {}  [{}]", p.name, p.summary, params.join(", "));
            }
            Ok(0)
        }
        Command::Check { config } => load(&config).and_then(|c| {
            c.validate()?;
            println!("{}: valid", c.name);
            Ok(0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
