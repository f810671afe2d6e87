use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use flexbound::data::{self, Dataset};
use flexbound::imputation::ImputerMethod;
use flexbound::pipeline::{self, Mode, PipelineConfig, TransformSpec};
use flexbound::rationality::{self, DecisionProcess, ProcessStep};
use flexbound::signal::{self, FeatureDomain, TransformParams};
use flexbound::utility::{self, UtilitySpec};
use flexbound::{persist, ErrorClass};

#[derive(Parser)]
#[command(name = "flexbound")]
#[command(about = "Bounded and flexibly-bounded decision pipelines", long_about = None)]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed overriding the configuration's seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; reports go to stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run the full pipeline and save the trained decision model
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Fill missing cells of a CSV file
    Impute {
        #[arg(long)]
        data: PathBuf,
        /// correlation_machine, column_mean or zero_fill
        #[arg(long)]
        method: Option<ImputerMethod>,
    },
    /// Choose the option with the largest expected utility
    Decide {
        /// UtilitySpec JSON: {"options": [{"label", "impact", "probability"}]}
        spec: PathBuf,
        /// Model whose per-row outputs are attached to the decision
        #[arg(long, requires = "data")]
        model: Option<PathBuf>,
        /// Fully observed feature rows for --model
        #[arg(long, requires = "model")]
        data: Option<PathBuf>,
    },
    /// Rationality power ratio and satisficing verdict of a decision process
    AnalyzeRationality {
        /// {"name", "threshold", "steps": [{"label", "kind", "power"}]}
        input: PathBuf,
    },
    /// Write per-row time, frequency or time-frequency features
    Transform {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "time")]
        domain: FeatureDomain,
        #[arg(long, default_value_t = 8)]
        window: usize,
        #[arg(long, default_value_t = 4)]
        hop: usize,
    },
    /// Run a pair of pipelines on the same data and report the metric delta
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalityInput {
    name: String,
    #[serde(default = "default_threshold")]
    threshold: f64,
    steps: Vec<ProcessStep>,
}

fn default_threshold() -> f64 {
    rationality::DEFAULT_THRESHOLD
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigPair {
    first: PipelineConfig,
    second: PipelineConfig,
}

/// Error wrapper carrying an explicit exit-code class.
#[derive(Debug)]
struct Classified(ErrorClass, String);

impl std::fmt::Display for Classified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Classified {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Classified(ErrorClass::Config, msg.into()).into()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig = match &cli.config {
        Some(p) => read_json(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn load_data(path: &Path) -> Result<Dataset> {
    Ok(data::load_csv(path, &data::default_missing_tokens())?)
}

/// Write `name` under `--out`, or print to stdout when `print` is set and no directory was given.
fn emit(out: Option<&Path>, name: &str, contents: &str, print: bool) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
        }
        None if print => {
            print!("{contents}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(d: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    data::write_csv(d, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Commands::Train { data, target } => {
            let cfg = load_config(cli)?;
            cfg.validate()?;
            let run = pipeline::run_pipeline(data, &cfg, target)?;
            emit(out, "report.json", &json(&run.report), true)?;
            if let Some(dir) = out {
                persist::save_model(&run.model, dir.join("model.json"))?;
            }
        }
        Commands::Impute { data, method } => {
            let mut cfg = load_config(cli)?;
            let method = method.or(cfg.imputer.method).unwrap_or(ImputerMethod::CorrelationMachine);
            cfg.imputer.method = Some(method);
            cfg.mode = match method {
                ImputerMethod::CorrelationMachine => Mode::FlexiblyBounded,
                _ => Mode::Bounded,
            };
            cfg.transform = TransformSpec::default();
            cfg.validate()?;
            let d = load_data(data)?;
            let (result, section) = pipeline::impute_features(&d, &cfg)?;
            emit(out, "imputed.csv", &csv_text(&result.completed)?, false)?;
            emit(out, "imputation_report.json", &json(&section), true)?;
        }
        Commands::Decide { spec, model, data } => {
            let spec: UtilitySpec = read_json(spec)?;
            let mut outcome = utility::choose_rational(&spec)?;
            if let (Some(model), Some(data)) = (model, data) {
                let net = persist::load_model(model)?;
                if net.output_size() != 1 {
                    return Err(config_error("decision model must have a single output"));
                }
                let rows = load_data(data)?.to_rows()?;
                let outputs = rows
                    .iter()
                    .map(|r| net.forward(r).map(|y| y[0]))
                    .collect::<flexbound::Result<Vec<_>>>()?;
                outcome.model_outputs = Some(outputs);
            }
            emit(out, "decision.json", &json(&outcome), true)?;
        }
        Commands::AnalyzeRationality { input } => {
            let input: RationalityInput = read_json(input)?;
            let process = DecisionProcess {
                name: input.name,
                steps: input.steps,
            };
            let report = rationality::assess_satisficing(&process, input.threshold)?;
            emit(out, "rationality_report.json", &json(&report), true)?;
        }
        Commands::Transform {
            data,
            domain,
            window,
            hop,
        } => {
            let d = load_data(data)?;
            let params = TransformParams {
                window_size: *window,
                hop: *hop,
            };
            let width = signal::feature_len(d.n_cols(), *domain, &params)?;
            let rows = d
                .to_rows()?
                .iter()
                .map(|r| signal::extract_features(r, *domain, &params))
                .collect::<flexbound::Result<Vec<_>>>()?;
            let features = Dataset::complete((0..width).map(|i| format!("f{i}")).collect(), &rows)?;
            emit(out, "features.csv", &csv_text(&features)?, true)?;
        }
        Commands::Compare { data, target } => {
            let (mut first, mut second) = match &cli.config {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                    match serde_json::from_str::<ConfigPair>(&text) {
                        Ok(pair) => (pair.first, pair.second),
                        Err(_) => {
                            let cfg: PipelineConfig = serde_json::from_str(&text)
                                .map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                            mode_pair(cfg)
                        }
                    }
                }
                None => mode_pair(PipelineConfig::default()),
            };
            if let Some(seed) = cli.seed {
                first.seed = seed;
                second.seed = seed;
            }
            first.validate()?;
            second.validate()?;
            let report = pipeline::compare_modes(data, &first, &second, target)?;
            emit(out, "comparison.json", &json(&report), true)?;
        }
    }
    Ok(())
}

/// Bounded and flexibly-bounded variants of one configuration.
fn mode_pair(cfg: PipelineConfig) -> (PipelineConfig, PipelineConfig) {
    let bounded = PipelineConfig {
        mode: Mode::Bounded,
        transform: TransformSpec {
            domain: FeatureDomain::Time,
            ..cfg.transform
        },
        imputer: flexbound::pipeline::ImputerConfig {
            method: None,
            ..cfg.imputer.clone()
        },
        ..cfg.clone()
    };
    let flexible = PipelineConfig {
        mode: Mode::FlexiblyBounded,
        imputer: flexbound::pipeline::ImputerConfig {
            method: None,
            ..cfg.imputer.clone()
        },
        ..cfg
    };
    (bounded, flexible)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Classified(class, _)) = err.downcast_ref::<Classified>() {
        return code_for(*class);
    }
    match err.downcast_ref::<flexbound::Error>() {
        Some(e) => code_for(e.class()),
        None => 3,
    }
}

fn code_for(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
