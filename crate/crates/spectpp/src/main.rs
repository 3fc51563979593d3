//! Thin CLI over the experiment harness.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime sampling error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spectpp::harness::{
    cmd_generate, cmd_report, cmd_sample, cmd_sweep, GenerateConfig, ModelSpec, SampleConfig,
    SamplingMode, SweepConfig,
};
use spectpp::models::JumpProcessConfig;
use spectpp::speculative::SpecConfig;
use spectpp::Error;

#[derive(Parser)]
#[command(
    name = "spectpp",
    about = "Speculative sampling for temporal point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (JSONL) plus the generating model spec.
    Generate(GenerateArgs),
    /// Sample continuations autoregressively and/or speculatively.
    Sample(SampleArgs),
    /// Compute metric and timing reports from a sample directory.
    Report(ReportArgs),
    /// Run the Hawkes configuration sweep.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Hawkes,
    Renewal,
    Alternating,
    Discrete,
    Jump,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Autoregressive,
    Speculative,
    Both,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Autoregressive => SamplingMode::Autoregressive,
            ModeArg::Speculative => SamplingMode::Speculative,
            ModeArg::Both => SamplingMode::Both,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Model family.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// JSON file with a full model spec; overrides the model flags.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Hawkes dimension (random draw when --params absent).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Fraction of adjacency entries zeroed.
    #[arg(long, default_value_t = 0.5)]
    sparsity: f64,
    /// Upper bound of uniform adjacency entries.
    #[arg(long, default_value_t = 0.3)]
    a_max: f64,
    /// Kernel decay rate.
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    /// Renewal rate.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Alternating-model flip probability.
    #[arg(long, default_value_t = 1.0)]
    flip_prob: f64,
    /// Jump-model rate window.
    #[arg(long, default_value_t = 64)]
    window: usize,
}

impl ModelArgs {
    fn build(&self) -> Result<ModelSpec, Error> {
        if let Some(path) = &self.params {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
            })?;
            return serde_json::from_str(&text).map_err(Error::from);
        }
        Ok(match self.model {
            ModelKind::Hawkes => ModelSpec::HawkesRandom {
                dim: self.dim,
                sparsity: self.sparsity,
                a_max: self.a_max,
                decay: self.decay,
            },
            ModelKind::Renewal => ModelSpec::Renewal {
                rate: self.rate,
                mark_probs: vec![0.6, 0.4],
            },
            ModelKind::Alternating => ModelSpec::Alternating {
                flip_prob: self.flip_prob,
                location: 0.0,
                scale: 0.6,
            },
            ModelKind::Discrete => ModelSpec::Discrete,
            ModelKind::Jump => ModelSpec::Jump {
                window: self.window,
            },
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    n_sequences: usize,
    /// Horizon for intensity-driven generation.
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
    /// Event count for decode-driven generation.
    #[arg(long, default_value_t = 100)]
    n_events: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Starting histories (JSONL); empty history when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n_histories: usize,
    #[arg(long, default_value_t = 10)]
    n_samples: usize,
    #[arg(long, default_value_t = 100)]
    n_events: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Speculative step l.
    #[arg(long, default_value_t = 5)]
    step: usize,
    #[arg(long, default_value_t = 1)]
    top_k: usize,
    /// Categorical truncation budget (0 = exact).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Envelope percentile coverage.
    #[arg(long, default_value_t = 0.995)]
    alpha: f64,
    /// Envelope grid points.
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    /// Parallel within-round verification.
    #[arg(long, default_value_t = false)]
    parallel: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// JSON file with a full SampleConfig; overrides every flag above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A `sample --mode both` output directory.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 40])]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 0.9])]
    sparsities: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.5])]
    a_maxes: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 1.0])]
    decays: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    n_seeds: u64,
    #[arg(long, default_value_t = 50)]
    warmup_events: usize,
    #[arg(long, default_value_t = 100)]
    n_events: usize,
    #[arg(long, default_value_t = 5)]
    step: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => {
            let cfg = GenerateConfig {
                model: args.model.build()?,
                n_sequences: args.n_sequences,
                t_end: args.t_end,
                n_events: args.n_events,
                jump: JumpProcessConfig::default(),
                seed: args.seed,
                out_dir: args.out,
            };
            let out = cmd_generate(&cfg)?;
            println!(
                "wrote {} sequences to {} (model spec: {})",
                out.sequences.len(),
                out.data_path.display(),
                out.model_path.display()
            );
        }
        Command::Sample(args) => {
            let cfg = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_str::<SampleConfig>(&text)?
                }
                None => SampleConfig {
                    model: args.model.build()?,
                    data: args.data.clone(),
                    n_histories: args.n_histories,
                    n_samples: args.n_samples,
                    n_events: args.n_events,
                    mode: args.mode.into(),
                    spec: SpecConfig {
                        step: args.step,
                        top_k: args.top_k,
                        delta: args.delta,
                        alpha: args.alpha,
                        grid_n: args.grid_n,
                        seed: args.seed,
                        parallel: args.parallel,
                        envelope_time_constants: false,
                    },
                    seed: args.seed,
                    out_dir: args.out.clone(),
                },
            };
            let out = cmd_sample(&cfg)?;
            for report in &out.reports {
                match report.avg_step {
                    Some(step) => println!(
                        "{}: {} sequences, avg step {step:.4}, acceptance {:.4}",
                        report.variant,
                        report.n_sequences,
                        report.acceptance_rate.unwrap_or(f64::NAN),
                    ),
                    None => println!("{}: {} sequences", report.variant, report.n_sequences),
                }
            }
            println!("outputs in {}", out.out_dir.display());
        }
        Command::Report(args) => {
            let summary = cmd_report(&args.dir)?;
            for row in &summary.rows {
                println!(
                    "{},{}: {:.6} +- {:.6}",
                    row.metric, row.variant, row.mean, row.std
                );
            }
            println!("reports in {}", args.dir.display());
        }
        Command::Sweep(args) => {
            let cfg = SweepConfig {
                dims: args.dims,
                sparsities: args.sparsities,
                a_maxes: args.a_maxes,
                decays: args.decays,
                n_seeds: args.n_seeds,
                warmup_events: args.warmup_events,
                n_events: args.n_events,
                step: args.step,
                seed: args.seed,
                out_dir: args.out.clone(),
            };
            let rows = cmd_sweep(&cfg)?;
            println!(
                "ran {} sweep configurations; CSVs in {}",
                rows.len(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::InvalidParameter(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
