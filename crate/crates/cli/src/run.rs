//! Sweep execution and result files.
//!
//! Layout of an output directory:
//!
//! - `manifest.json`: toolkit version, resolved config, per-seed file names, summary
//! - `seed_<k>_report.json`: full training report (or the error) for seed `k`
//! - `seed_<k>_losses.csv`: `epoch,train_loss,test_loss,n_fm_blocks`, one row per epoch
//! - `summary.json`: statistics over per-seed best losses; no timing data, so
//!   identical configs give byte-identical files

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qgrow::experiment::SeedRun;
use qgrow::{accessible_spectrum, seed_sweep, ExperimentConfig, ExperimentKind, OmegaSet, SweepSummary, TrainReport};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.json";

pub fn report_file(seed: u64) -> String {
    format!("seed_{seed}_report.json")
}

pub fn losses_file(seed: u64) -> String {
    format!("seed_{seed}_losses.csv")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub experiment: ExperimentKind,
    pub variant: String,
    pub report: Option<TrainReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFiles {
    pub seed: u64,
    pub report: String,
    /// Absent for failed seeds.
    pub losses: Option<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedFiles>,
    /// False when any seed failed; the failed seeds are marked in `seeds`.
    pub complete: bool,
    pub summary: Option<SweepSummary>,
    /// Only for `SPECTRUM` runs.
    pub spectrum: Option<Vec<OmegaSet>>,
}

#[derive(Serialize)]
struct LossRow {
    epoch: usize,
    train_loss: f64,
    test_loss: f64,
    n_fm_blocks: usize,
}

/// Files written so far; removed again if the run cannot finish writing.
struct Staged {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
}

impl Staged {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let result = fs::File::create(&path).and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()));
        // a failed create may still leave an empty file behind
        self.written.push(path.clone());
        result.map_err(|e| CliError::io(path, e))
    }

    fn rollback(self) {
        for p in self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Creates `dir` if needed and checks that files can be written there.
/// Returns whether the directory was created by this call.
fn prepare_dir(dir: &Path) -> Result<bool> {
    let existed = dir.is_dir();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    if let Err(e) = tempfile::NamedTempFile::new_in(dir) {
        if !existed {
            let _ = fs::remove_dir(dir);
        }
        return Err(CliError::io(dir, e));
    }
    Ok(!existed)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("result types serialize");
    s.push(b'\n');
    s
}

fn losses_csv(report: &TrainReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for epoch in 0..report.train_losses.len() {
        w.serialize(LossRow {
            epoch,
            train_loss: report.train_losses[epoch],
            test_loss: report.test_losses[epoch],
            n_fm_blocks: report.fm_blocks[epoch],
        })
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Runs the configured sweep and writes all outputs to `config.output_dir`.
///
/// The output directory is checked before training starts. If any write
/// fails, files written by this call are removed. A run where some seeds
/// failed still writes everything and then returns [`CliError::PartialRun`].
pub fn execute(config: &ExperimentConfig) -> Result<RunManifest> {
    let dir = PathBuf::from(&config.output_dir);
    let created_dir = prepare_dir(&dir)?;
    let mut staged = Staged {
        dir: dir.clone(),
        created_dir,
        written: Vec::new(),
    };

    let outcome = match config.experiment {
        ExperimentKind::Spectrum => run_spectrum(config, &mut staged),
        _ => run_sweep(config, &mut staged),
    };
    match outcome {
        Ok(manifest) => {
            if manifest.complete {
                Ok(manifest)
            } else {
                Err(CliError::PartialRun {
                    failed: manifest.seeds.iter().filter(|s| !s.ok).count(),
                    total: manifest.seeds.len(),
                    manifest: dir.join(MANIFEST),
                })
            }
        }
        Err(e) => {
            staged.rollback();
            Err(e)
        }
    }
}

fn run_spectrum(config: &ExperimentConfig, staged: &mut Staged) -> Result<RunManifest> {
    let spectrum = accessible_spectrum(&config.spectrum_model()?)?;
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        seeds: Vec::new(),
        complete: true,
        summary: None,
        spectrum: Some(spectrum),
    };
    staged.write(MANIFEST, &to_json(&manifest))?;
    Ok(manifest)
}

fn run_sweep(config: &ExperimentConfig, staged: &mut Staged) -> Result<RunManifest> {
    let (runs, summary) = seed_sweep(config, &config.seeds, config.jobs)?;
    let mut files = Vec::with_capacity(runs.len());
    for SeedRun { seed, result } in runs {
        let (report, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let losses = match &report {
            Some(r) => {
                let name = losses_file(seed);
                staged.write(&name, &losses_csv(r))?;
                Some(name)
            }
            None => None,
        };
        let ok = report.is_some();
        let doc = SeedReport {
            seed,
            experiment: config.experiment,
            variant: config.variant.label().into(),
            report,
            error,
        };
        staged.write(&report_file(seed), &to_json(&doc))?;
        files.push(SeedFiles {
            seed,
            report: report_file(seed),
            losses,
            ok,
        });
    }
    staged.write(SUMMARY, &to_json(&summary))?;
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        complete: files.iter().all(|f| f.ok),
        seeds: files,
        summary: Some(summary),
        spectrum: None,
    };
    staged.write(MANIFEST, &to_json(&manifest))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_seed_report(path: &Path) -> Result<SeedReport> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
