//! Experiment presets: configuration schema, model catalog and per-seed runs.
//!
//! A configuration file names an experiment and a model variant; every other
//! field falls back to the experiment's defaults. Resolved configurations
//! serialize to the same schema, so echoing and reloading is a fixed point.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{fill_order, GrowthSchedule, GrowthStrategy, Trigger, NEW_ANSATZ_RANGE, NEW_FEATURE_MAP_RANGE};
use crate::model::{
    build_reuploader, AnsatzStyle, BlockRole, BlockTemplate, Domain, GateTemplate, InitSpec, Layout,
    RepeatUnit, ReuploaderModel,
};
use crate::training::{
    make_teacher_dataset, train_laplace, train_regression, LaplaceProblem, SeedOutcome, SweepSummary,
    TrainConfig, TrainReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "STUDENT_TEACHER_1Q")]
    StudentTeacher1q,
    #[serde(rename = "STUDENT_TEACHER_2Q")]
    StudentTeacher2q,
    #[serde(rename = "NOISY_ST")]
    NoisySt,
    #[serde(rename = "LAPLACE")]
    Laplace,
    #[serde(rename = "SPECTRUM")]
    Spectrum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    BlockGrowth,
    SeqFm,
    IntFm,
    CdlRandMatched,
    CdlRandDeep,
    CdlIdMatched,
    CdlIdDeep,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::BlockGrowth,
        Variant::SeqFm,
        Variant::IntFm,
        Variant::CdlRandMatched,
        Variant::CdlRandDeep,
        Variant::CdlIdMatched,
        Variant::CdlIdDeep,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::BlockGrowth => "block-growth",
            Variant::SeqFm => "seq-fm",
            Variant::IntFm => "int-fm",
            Variant::CdlRandMatched => "cdl-rand-matched",
            Variant::CdlRandDeep => "cdl-rand-deep",
            Variant::CdlIdMatched => "cdl-id-matched",
            Variant::CdlIdDeep => "cdl-id-deep",
        }
    }

    pub fn growth_strategy(self) -> Option<GrowthStrategy> {
        match self {
            Variant::BlockGrowth => Some(GrowthStrategy::Block),
            Variant::SeqFm => Some(GrowthStrategy::SeqFm),
            Variant::IntFm => Some(GrowthStrategy::IntFm),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.label() == s).ok_or_else(|| Error::Choice {
            value: s.to_string(),
            choices: Variant::ALL.map(Variant::label).join(", "),
        })
    }
}

/// Seeds given either as a count (`0..n`) or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (0..*n).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

/// Configuration as written by users: everything but `experiment` optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: Option<u32>,
    pub experiment: Option<ExperimentKind>,
    pub variant: Option<String>,
    pub seeds: Option<SeedSpec>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub blocks_per_event: Option<usize>,
    pub growth_interval: Option<usize>,
    pub plateau_patience: Option<usize>,
    pub plateau_min_improvement: Option<f64>,
    pub initial_layers: Option<usize>,
    pub matched_layers: Option<usize>,
    pub deep_layers: Option<usize>,
    pub teacher_layers: Option<usize>,
    pub teacher_seed: Option<u64>,
    pub data_seed: Option<u64>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub n_collocation: Option<usize>,
    pub n_boundary: Option<usize>,
    pub boundary_weight: Option<f64>,
    pub eval_grid: Option<usize>,
    pub spectrum_qubits: Option<usize>,
    pub spectrum_layers: Option<usize>,
    pub spectrum_psi: Option<f64>,
    pub jobs: Option<usize>,
    pub output_dir: Option<String>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub blocks_per_event: usize,
    /// Epochs between fixed-interval growth events.
    pub growth_interval: usize,
    /// Plateau trigger settings; `None` means fixed-interval growth.
    pub plateau_patience: Option<usize>,
    pub plateau_min_improvement: Option<f64>,
    /// Feature-map blocks the growing variants start with.
    pub initial_layers: usize,
    /// Depth of the matched CDL baselines and the growth ceiling.
    pub matched_layers: usize,
    pub deep_layers: usize,
    pub teacher_layers: usize,
    pub teacher_seed: u64,
    pub data_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sigma: f64,
    pub n_collocation: usize,
    pub n_boundary: usize,
    pub boundary_weight: f64,
    pub eval_grid: usize,
    pub spectrum_qubits: usize,
    pub spectrum_layers: usize,
    pub spectrum_psi: f64,
    pub jobs: usize,
    pub output_dir: String,
}

struct Defaults {
    epochs: usize,
    learning_rate: f64,
    initial_layers: usize,
    matched_layers: usize,
    deep_layers: usize,
    teacher_layers: usize,
    n_train: usize,
    n_test: usize,
    noise_sigma: f64,
    plateau: Option<(usize, f64)>,
}

fn defaults(kind: ExperimentKind) -> Defaults {
    let st = Defaults {
        epochs: 1000,
        learning_rate: 0.1,
        initial_layers: 1,
        matched_layers: 5,
        deep_layers: 20,
        teacher_layers: 5,
        n_train: 500,
        n_test: 500,
        noise_sigma: 0.0,
        plateau: None,
    };
    match kind {
        ExperimentKind::StudentTeacher1q | ExperimentKind::Spectrum => st,
        ExperimentKind::StudentTeacher2q => Defaults { deep_layers: 9, ..st },
        ExperimentKind::NoisySt => Defaults {
            matched_layers: 20,
            n_train: 20,
            n_test: 80,
            noise_sigma: 0.5,
            plateau: Some((50, 1e-3)),
            ..st
        },
        ExperimentKind::Laplace => Defaults {
            epochs: 2000,
            learning_rate: 0.02,
            initial_layers: 5,
            matched_layers: 9,
            deep_layers: 13,
            teacher_layers: 0,
            n_train: 0,
            n_test: 0,
            ..st
        },
    }
}

/// Epoch interval that spreads the needed growth events evenly, finishing
/// before the last stretch of training.
pub fn default_growth_interval(epochs: usize, initial: usize, target: usize, per_event: usize) -> usize {
    let events = target.saturating_sub(initial).div_ceil(per_event.max(1));
    (epochs / (events + 1)).max(1)
}

impl ExperimentConfig {
    /// Applies experiment defaults to the unset fields of `raw`.
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let experiment = raw
            .experiment
            .ok_or_else(|| Error::Parameter("config is missing the \"experiment\" field".into()))?;
        if let Some(v) = raw.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::Parameter(format!(
                    "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                )));
            }
        }
        let variant = match &raw.variant {
            Some(s) => s.parse()?,
            None => Variant::BlockGrowth,
        };
        let d = defaults(experiment);
        let epochs = raw.epochs.unwrap_or(d.epochs);
        let blocks_per_event = raw.blocks_per_event.unwrap_or(1);
        let initial_layers = raw.initial_layers.unwrap_or(d.initial_layers);
        let matched_layers = raw.matched_layers.unwrap_or(d.matched_layers);
        let growth_interval = raw.growth_interval.unwrap_or_else(|| {
            default_growth_interval(epochs, initial_layers, matched_layers, blocks_per_event)
        });
        let plateau_patience = raw.plateau_patience.or(d.plateau.map(|p| p.0));
        let plateau_min_improvement = match plateau_patience {
            Some(_) => Some(raw.plateau_min_improvement.or(d.plateau.map(|p| p.1)).unwrap_or(1e-3)),
            None => raw.plateau_min_improvement,
        };
        let laplace = LaplaceProblem::default();
        let cfg = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            variant,
            seeds: raw.seeds.map(|s| s.seeds()).unwrap_or_else(|| (0..50).collect()),
            epochs,
            learning_rate: raw.learning_rate.unwrap_or(d.learning_rate),
            blocks_per_event,
            growth_interval,
            plateau_patience,
            plateau_min_improvement,
            initial_layers,
            matched_layers,
            deep_layers: raw.deep_layers.unwrap_or(d.deep_layers),
            teacher_layers: raw.teacher_layers.unwrap_or(d.teacher_layers),
            teacher_seed: raw.teacher_seed.unwrap_or(0),
            data_seed: raw.data_seed.unwrap_or(1),
            n_train: raw.n_train.unwrap_or(d.n_train),
            n_test: raw.n_test.unwrap_or(d.n_test),
            noise_sigma: raw.noise_sigma.unwrap_or(d.noise_sigma),
            n_collocation: raw.n_collocation.unwrap_or(laplace.n_collocation),
            n_boundary: raw.n_boundary.unwrap_or(laplace.n_boundary),
            boundary_weight: raw.boundary_weight.unwrap_or(laplace.boundary_weight),
            eval_grid: raw.eval_grid.unwrap_or(laplace.eval_grid),
            spectrum_qubits: raw.spectrum_qubits.unwrap_or(1),
            spectrum_layers: raw.spectrum_layers.unwrap_or(3),
            spectrum_psi: raw.spectrum_psi.unwrap_or(1.0),
            jobs: raw.jobs.unwrap_or(1),
            output_dir: raw.output_dir.unwrap_or_else(|| "runs".into()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::Parameter(format!("{name} must be at least 1")))
            } else {
                Ok(())
            }
        };
        positive("epochs", self.epochs)?;
        positive("blocks_per_event", self.blocks_per_event)?;
        positive("growth_interval", self.growth_interval)?;
        positive("jobs", self.jobs)?;
        positive("matched_layers", self.matched_layers)?;
        positive("deep_layers", self.deep_layers)?;
        if self.seeds.is_empty() {
            return Err(Error::Parameter("at least one seed is required".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Parameter("learning_rate must be positive".into()));
        }
        if self.initial_layers > self.matched_layers {
            return Err(Error::Parameter(format!(
                "initial_layers {} exceeds the growth ceiling {}",
                self.initial_layers, self.matched_layers
            )));
        }
        if self.variant.growth_strategy() == Some(GrowthStrategy::Block) && self.initial_layers == 0 {
            return Err(Error::Parameter("block growth needs at least one initial layer".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Parameter("noise_sigma must be non-negative".into()));
        }
        match self.experiment {
            ExperimentKind::StudentTeacher1q | ExperimentKind::StudentTeacher2q | ExperimentKind::NoisySt => {
                positive("teacher_layers", self.teacher_layers)?;
                positive("n_train", self.n_train)?;
                positive("n_test", self.n_test)?;
            }
            ExperimentKind::Laplace => self.laplace_problem().validate()?,
            ExperimentKind::Spectrum => {
                positive("spectrum_qubits", self.spectrum_qubits)?;
                positive("spectrum_layers", self.spectrum_layers)?;
            }
        }
        Ok(())
    }

    pub fn laplace_problem(&self) -> LaplaceProblem {
        LaplaceProblem {
            n_collocation: self.n_collocation,
            n_boundary: self.n_boundary,
            boundary_weight: self.boundary_weight,
            eval_grid: self.eval_grid,
        }
    }

    /// Structure shared by teacher and students.
    pub fn unit(&self) -> RepeatUnit {
        match self.experiment {
            ExperimentKind::StudentTeacher1q | ExperimentKind::NoisySt | ExperimentKind::Spectrum => {
                RepeatUnit::standard(1, AnsatzStyle::RyPairs, &[0])
            }
            ExperimentKind::StudentTeacher2q => RepeatUnit::standard(2, AnsatzStyle::RyPairs, &[0, 1]),
            ExperimentKind::Laplace => RepeatUnit::standard(2, AnsatzStyle::RyRxPairs, &[0, 1]),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.experiment {
            ExperimentKind::StudentTeacher2q | ExperimentKind::Laplace => 2,
            _ => 1,
        }
    }

    pub fn domain(&self) -> Domain {
        match self.experiment {
            ExperimentKind::StudentTeacher2q => Domain::cube(2, 0.0, TAU),
            ExperimentKind::Laplace => Domain::cube(2, 0.0, 1.0),
            _ => Domain::cube(1, 0.0, TAU),
        }
    }

    /// Teacher parameter ranges: small angles for one qubit, `[0, pi/5]` for two.
    pub fn teacher_init(&self) -> InitSpec {
        match self.experiment {
            ExperimentKind::StudentTeacher2q => InitSpec::Uniform {
                theta: (0.0, PI / 5.0),
                psi: (0.0, PI / 5.0),
            },
            _ => InitSpec::Uniform {
                theta: (0.0, 0.1),
                psi: (0.0, PI / 9.0),
            },
        }
    }

    pub fn teacher(&self) -> Result<ReuploaderModel> {
        let layout = Layout::reuploader(self.n_qubits(), self.domain().dims(), self.unit(), self.teacher_layers);
        build_reuploader(&layout, &self.teacher_init(), self.teacher_seed)
    }

    pub fn growth_schedule(&self) -> Option<GrowthSchedule> {
        let strategy = self.variant.growth_strategy()?;
        let trigger = match (self.plateau_patience, self.plateau_min_improvement) {
            (Some(patience), Some(min_improvement)) => Trigger::Plateau {
                patience,
                min_improvement,
            },
            _ => Trigger::FixedInterval {
                epochs: self.growth_interval,
            },
        };
        Some(GrowthSchedule {
            trigger,
            blocks_per_event: self.blocks_per_event,
            max_feature_map_blocks: self.matched_layers,
            strategy,
        })
    }

    /// The untrained student for `seed`.
    pub fn student(&self, seed: u64) -> Result<ReuploaderModel> {
        let (n, dims, unit) = (self.n_qubits(), self.domain().dims(), self.unit());
        let identity = growth_identity_init();
        let random = InitSpec::Uniform {
            theta: (0.0, PI),
            psi: (0.0, PI),
        };
        let (layout, init) = match self.variant {
            Variant::BlockGrowth => (Layout::reuploader(n, dims, unit, self.initial_layers), identity),
            Variant::SeqFm | Variant::IntFm => {
                let strategy = self.variant.growth_strategy().expect("growth variant");
                let order = fill_order(strategy, self.matched_layers);
                let filled = &order[..self.initial_layers];
                (Layout::ansatz_stack(n, dims, unit, self.matched_layers + 1, filled)?, identity)
            }
            Variant::CdlRandMatched => (Layout::reuploader(n, dims, unit, self.matched_layers), random),
            Variant::CdlRandDeep => (Layout::reuploader(n, dims, unit, self.deep_layers), random),
            Variant::CdlIdMatched => (Layout::reuploader(n, dims, unit, self.matched_layers), identity),
            Variant::CdlIdDeep => (Layout::reuploader(n, dims, unit, self.deep_layers), identity),
        };
        build_reuploader(&layout, &init, seed)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(self.epochs, self.learning_rate, seed);
        cfg.growth = self.growth_schedule();
        cfg
    }

    /// Trains one seed. `SPECTRUM` has nothing to train.
    pub fn run_seed(&self, seed: u64) -> Result<TrainReport> {
        let student = self.student(seed)?;
        let train = self.train_config(seed);
        match self.experiment {
            ExperimentKind::StudentTeacher1q | ExperimentKind::StudentTeacher2q | ExperimentKind::NoisySt => {
                let domain = self.domain();
                let data = make_teacher_dataset(
                    &self.teacher()?,
                    self.n_train,
                    self.n_test,
                    &domain,
                    self.noise_sigma,
                    self.data_seed,
                )?;
                train_regression(student, &data, &train, &domain)
            }
            ExperimentKind::Laplace => train_laplace(student, &self.laplace_problem(), &train),
            ExperimentKind::Spectrum => Err(Error::Parameter("SPECTRUM experiments have no training run".into())),
        }
    }

    /// Model analysed by the `SPECTRUM` experiment: `layers` repetitions of
    /// one `RX(psi x)` per qubit, all qubits reading the same input.
    pub fn spectrum_model(&self) -> Result<ReuploaderModel> {
        spectrum_model(self.spectrum_qubits, self.spectrum_layers, self.spectrum_psi)
    }
}

/// Identity-pair ranges used for every newly grown or identity-initialised gate.
pub fn growth_identity_init() -> InitSpec {
    InitSpec::IdentityPair {
        theta: NEW_ANSATZ_RANGE,
        psi: NEW_FEATURE_MAP_RANGE,
    }
}

/// `layers` repetitions of a single `RX(psi x)` per qubit between `RY` ansatz
/// layers, every qubit encoding input 0.
pub fn spectrum_model(qubits: usize, layers: usize, psi: f64) -> Result<ReuploaderModel> {
    let mut ansatz: Vec<GateTemplate> = (0..qubits).map(GateTemplate::ry).collect();
    ansatz.extend((1..qubits).map(|q| GateTemplate::cnot(0, q)));
    let unit = RepeatUnit {
        feature_map: BlockTemplate {
            role: BlockRole::FeatureMap,
            gates: (0..qubits).map(|q| GateTemplate::encoding(q, 0)).collect(),
        },
        ansatz: BlockTemplate {
            role: BlockRole::Ansatz,
            gates: ansatz,
        },
    };
    let layout = Layout::reuploader(qubits, 1, unit, layers);
    build_reuploader(
        &layout,
        &InitSpec::Uniform {
            theta: (0.0, PI),
            psi: (psi, psi),
        },
        0,
    )
}

/// Result of one seed in a sweep.
pub struct SeedRun {
    pub seed: u64,
    pub result: Result<TrainReport>,
}

impl SeedRun {
    pub fn outcome(&self) -> SeedOutcome {
        match &self.result {
            Ok(r) => SeedOutcome {
                seed: self.seed,
                best_loss: Some(r.best_loss),
                error: None,
            },
            Err(e) => SeedOutcome {
                seed: self.seed,
                best_loss: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Runs every seed on a pool of `jobs` workers. Runs are independent and
/// the summary is computed after sorting by seed, so the result does not
/// depend on scheduling.
pub fn seed_sweep(config: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<(Vec<SeedRun>, SweepSummary)> {
    if seeds.is_empty() {
        return Err(Error::Parameter("seed list is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let mut runs: Vec<SeedRun> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| SeedRun {
                seed,
                result: config.run_seed(seed),
            })
            .collect()
    });
    runs.sort_by_key(|r| r.seed);
    let summary = SweepSummary::from_outcomes(runs.iter().map(SeedRun::outcome).collect());
    Ok((runs, summary))
}
