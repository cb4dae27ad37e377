//! Config files and command-line overrides.
//!
//! Precedence is flags > file > experiment defaults. The resolved config is
//! echoed into the run manifest, and loading that echo yields the same config.

use std::path::Path;

use qgrow::experiment::SeedSpec;
use qgrow::{ExperimentConfig, ExperimentKind, RawConfig};

use crate::error::{CliError, Result};

pub const SEED_OFFSET_VAR: &str = "QGROW_SEED_OFFSET";

/// Values given on the command line; `None` leaves the file or default value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub variant: Option<String>,
    pub seeds: Option<SeedSpec>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub growth_interval: Option<usize>,
    pub blocks_per_event: Option<usize>,
    pub jobs: Option<usize>,
    pub output_dir: Option<String>,
}

impl Overrides {
    fn apply(self, raw: &mut RawConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { raw.$target = Some(v); })*
            };
        }
        set!(
            experiment => experiment,
            variant => variant,
            seeds => seeds,
            epochs => epochs,
            learning_rate => learning_rate,
            growth_interval => growth_interval,
            blocks_per_event => blocks_per_event,
            jobs => jobs,
            output_dir => output_dir,
        );
    }
}

/// Parses a JSON config without applying defaults.
pub fn parse_raw(text: &str, path: &Path) -> Result<RawConfig> {
    serde_json::from_str(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let snippet = text.lines().nth(line.saturating_sub(1)).unwrap_or("").to_string();
        // serde_json appends " at line L column C"; the prefix already says so
        let message = e.to_string();
        let message = message
            .rsplit_once(" at line ")
            .map(|(m, _)| m.to_string())
            .unwrap_or(message);
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
            snippet,
            caret: "^",
        }
    })
}

pub fn load_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_raw(&text, path)
}

/// Loads and resolves a config file with no overrides.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::resolve(load_raw(path)?)?)
}

/// Seed offset from the environment, 0 when unset.
pub fn seed_offset_from_env() -> Result<u64> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_OFFSET_VAR} must be a non-negative integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(CliError::Usage(format!("{SEED_OFFSET_VAR}: {e}"))),
    }
}

/// Combines an optional file, flag overrides and a seed offset into a resolved config.
pub fn build_config(path: Option<&Path>, overrides: Overrides, seed_offset: u64) -> Result<ExperimentConfig> {
    let mut raw = match path {
        Some(p) => load_raw(p)?,
        None => RawConfig::default(),
    };
    overrides.apply(&mut raw);
    if raw.experiment.is_none() {
        return Err(CliError::Usage(
            "no experiment given; pass --config FILE or --experiment NAME".into(),
        ));
    }
    let mut config = ExperimentConfig::resolve(raw)?;
    if seed_offset != 0 {
        for s in &mut config.seeds {
            *s = s.checked_add(seed_offset).ok_or_else(|| {
                CliError::Usage(format!("seed {s} + offset {seed_offset} overflows"))
            })?;
        }
    }
    Ok(config)
}

/// `N` means seeds `0..N`; a comma-separated list is taken literally.
pub fn parse_seeds(s: &str) -> std::result::Result<SeedSpec, String> {
    let s = s.trim();
    if s.contains(',') {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad seed {p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SeedSpec::List)
    } else {
        s.parse::<u64>()
            .map(SeedSpec::Count)
            .map_err(|e| format!("expected a seed count or a comma-separated list: {e}"))
    }
}

/// Accepts the config spelling (`STUDENT_TEACHER_1Q`) or a short alias.
pub fn parse_experiment(s: &str) -> std::result::Result<ExperimentKind, String> {
    let canonical = match s.to_ascii_lowercase().as_str() {
        "st1q" | "student_teacher_1q" => "STUDENT_TEACHER_1Q",
        "st2q" | "student_teacher_2q" => "STUDENT_TEACHER_2Q",
        "noisy" | "noisy_st" => "NOISY_ST",
        "laplace" => "LAPLACE",
        "spectrum" => "SPECTRUM",
        _ => {
            return Err(format!(
                "unknown experiment {s:?}; expected one of: STUDENT_TEACHER_1Q (st1q), \
                 STUDENT_TEACHER_2Q (st2q), NOISY_ST (noisy), LAPLACE, SPECTRUM"
            ))
        }
    };
    serde_json::from_value(serde_json::Value::String(canonical.into())).map_err(|e| e.to_string())
}
