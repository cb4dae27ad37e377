//! Aggregation of finished run directories into Mean / Best / Worst tables.

use std::fmt::Write;
use std::path::Path;

use qgrow::training::SeedOutcome;
use qgrow::SweepSummary;

use crate::error::Result;
use crate::run::{read_manifest, read_seed_report};

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub experiment: String,
    pub variant: String,
    pub summary: SweepSummary,
}

/// Recomputes the sweep statistics of `dir` from its per-seed report files.
pub fn summarize_dir(dir: &Path) -> Result<RunSummary> {
    let manifest = read_manifest(dir)?;
    let mut outcomes = Vec::with_capacity(manifest.seeds.len());
    for entry in &manifest.seeds {
        let doc = read_seed_report(&dir.join(&entry.report))?;
        outcomes.push(SeedOutcome {
            seed: doc.seed,
            best_loss: doc.report.as_ref().map(|r| r.best_loss),
            error: doc.error,
        });
    }
    let experiment = serde_json::to_value(manifest.config.experiment)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    Ok(RunSummary {
        experiment,
        variant: manifest.config.variant.label().into(),
        summary: SweepSummary::from_outcomes(outcomes),
    })
}

pub fn format_table(rows: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:<18} {:>5} {:>24} {:>11} {:>11} {:>11}",
        "experiment", "variant", "seeds", "mean ± stderr", "best", "worst", "median"
    );
    for r in rows {
        let s = &r.summary;
        let seeds = if s.n_failed > 0 {
            format!("{}/{}", s.n_ok, s.n_ok + s.n_failed)
        } else {
            s.n_ok.to_string()
        };
        let _ = writeln!(
            out,
            "{:<20} {:<18} {:>5} {:>24} {:>11.3e} {:>11.3e} {:>11.3e}",
            r.experiment,
            r.variant,
            seeds,
            format!("{:.3e} ± {:.2e}", s.mean, s.stderr),
            s.best,
            s.worst,
            s.median
        );
    }
    out
}
