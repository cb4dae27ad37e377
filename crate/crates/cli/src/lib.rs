//! Command-line front end for `qgrow`: experiment sweeps, spectrum analysis,
//! property suites and result aggregation.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use qgrow::experiment::{spectrum_model, SeedSpec};
use qgrow::{accessible_spectrum, ExperimentKind};

pub use config::{build_config, load_config, Overrides};
pub use error::{CliError, Result};
pub use run::{execute, RunManifest};

const RUN_HELP: &str = "\
Teacher circuits (student-teacher and noisy presets) draw parameters uniformly:
  1 qubit:  ansatz angles in [0, 0.1], feature-map frequencies in [0, pi/9]
  2 qubits: ansatz angles and feature-map frequencies in [0, pi/5]

Variants: block-growth, seq-fm, int-fm, cdl-rand-matched, cdl-rand-deep,
cdl-id-matched, cdl-id-deep.

Outputs in --out DIR: manifest.json, summary.json, seed_<k>_report.json and
seed_<k>_losses.csv with columns epoch,train_loss,test_loss,n_fm_blocks.
train_loss is the loss of the model entering the epoch, test_loss the
evaluation after the epoch's update.

QGROW_SEED_OFFSET=N shifts every seed by N for sharding a sweep.";

#[derive(Debug, Parser)]
#[command(name = "qgrow", version, about = "Growth-based training of data-reuploading quantum circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train every seed of an experiment and write the results.
    #[command(after_help = RUN_HELP)]
    Run(RunArgs),
    /// Print the accessible frequency set of a reuploader.
    Spectrum(SpectrumArgs),
    /// Run the growth-preservation and derivative property suites.
    Verify(VerifyArgs),
    /// Tabulate Mean / Best / Worst from finished run directories.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// STUDENT_TEACHER_1Q (st1q), STUDENT_TEACHER_2Q (st2q), NOISY_ST (noisy), LAPLACE or SPECTRUM.
    #[arg(long, value_parser = config::parse_experiment)]
    pub experiment: Option<ExperimentKind>,
    #[arg(long)]
    pub variant: Option<String>,
    /// Seed count N (seeds 0..N) or a comma-separated list.
    #[arg(long, value_parser = config::parse_seeds)]
    pub seeds: Option<SeedSpec>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub growth_interval: Option<usize>,
    #[arg(long)]
    pub blocks_per_event: Option<usize>,
    /// Seeds trained in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 1)]
    pub qubits: usize,
    /// Feature-map repetitions.
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// Frequency scale of every encoding gate.
    #[arg(long, default_value_t = 1.0)]
    pub psi: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub preservation_cases: usize,
    #[arg(long, default_value_t = 100)]
    pub gradient_cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories written by `qgrow run`.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Print the recomputed summaries as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            experiment: self.experiment,
            variant: self.variant.clone(),
            seeds: self.seeds.clone(),
            epochs: self.epochs,
            learning_rate: self.lr,
            growth_interval: self.growth_interval,
            blocks_per_event: self.blocks_per_event,
            jobs: self.jobs,
            output_dir: self.out.as_ref().map(|p| p.to_string_lossy().into_owned()),
        }
    }
}

/// Executes one parsed command, printing results to stdout.
pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = build_config(args.config.as_deref(), args.overrides(), config::seed_offset_from_env()?)?;
            if config.experiment != ExperimentKind::Spectrum {
                eprintln!(
                    "running {} seeds of {} / {} into {}",
                    config.seeds.len(),
                    serde_json::to_string(&config.experiment).unwrap_or_default(),
                    config.variant,
                    config.output_dir
                );
            }
            let manifest = execute(&config)?;
            if let Some(spectrum) = &manifest.spectrum {
                for omega in spectrum {
                    println!("{omega}");
                }
            }
            if let Some(s) = &manifest.summary {
                println!(
                    "{}: mean {:.4e} ± {:.2e}, best {:.4e}, worst {:.4e}, median {:.4e}",
                    config.variant, s.mean, s.stderr, s.best, s.worst, s.median
                );
            }
            Ok(())
        }
        Command::Spectrum(args) => {
            let model = spectrum_model(args.qubits, args.layers, args.psi)?;
            for omega in accessible_spectrum(&model)? {
                println!("{omega}");
            }
            Ok(())
        }
        Command::Verify(args) => {
            let preservation = qgrow::verify::preservation_suite(args.preservation_cases, args.seed)?;
            let (params, inputs) = qgrow::verify::gradient_suite(args.gradient_cases, args.seed)?;
            let mut failed = Vec::new();
            for r in [&preservation, &params, &inputs] {
                println!(
                    "{} {}: {} cases, max deviation {:.3e} (tolerance {:.0e})",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.cases,
                    r.max_deviation,
                    r.tolerance
                );
                if !r.passed() {
                    failed.push(r.name.clone());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join(", ")))
            }
        }
        Command::Report(args) => {
            let rows = args
                .dirs
                .iter()
                .map(|d| report::summarize_dir(d))
                .collect::<Result<Vec<_>>>()?;
            if args.json {
                let docs: Vec<_> = rows
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "experiment": r.experiment,
                            "variant": r.variant,
                            "summary": r.summary,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&docs).expect("summaries serialize"));
            } else {
                print!("{}", report::format_table(&rows));
            }
            Ok(())
        }
    }
}
