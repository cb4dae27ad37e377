//! Training loops for regression and the Laplace problem.
//!
//! Each epoch runs one full-batch forward pass, computes the loss, takes one
//! Adam step, evaluates the updated model and then asks the growth schedule
//! whether to grow. Optimizer moments of existing slots survive growth.

mod adam;
mod data;
pub mod laplace;
mod sweep;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use adam::{adam_update, AdamHyper, AdamState};
pub use data::{make_teacher_dataset, mse_loss, Dataset};
pub use laplace::{
    exact_solution, l2_relative_error, laplace_loss, laplace_residual, model_l2_relative_error,
    AnalyticField, LaplaceProblem, Solution2d,
};
pub use sweep::{SeedOutcome, SweepSummary};

use crate::error::{Error, Result};
use crate::gradients::adjoint::value_and_gradient_compiled;
use crate::growth::{grow, should_grow, GrowthEvent, GrowthSchedule};
use crate::model::{forward_angles, Domain, ReuploaderModel};

const GROWTH_STREAM: u64 = 0x4752_4f57;
const EVAL_EPOCH: u64 = u64::MAX;

/// SplitMix64 mix of `(base, stream, index)` into an independent seed.
pub(crate) fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamHyper,
    pub seed: u64,
    /// `None` trains the initial circuit at fixed depth.
    pub growth: Option<GrowthSchedule>,
}

impl TrainConfig {
    pub fn new(epochs: usize, learning_rate: f64, seed: u64) -> Self {
        TrainConfig {
            epochs,
            adam: AdamHyper::with_learning_rate(learning_rate),
            seed,
            growth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Parameter("epochs must be at least 1".into()));
        }
        if !(self.adam.learning_rate > 0.0) || !self.adam.learning_rate.is_finite() {
            return Err(Error::Parameter(format!(
                "learning rate must be positive, got {}",
                self.adam.learning_rate
            )));
        }
        if let Some(g) = &self.growth {
            g.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training loss of the model entering each epoch.
    pub train_losses: Vec<f64>,
    /// Evaluation loss after each epoch's update.
    pub test_losses: Vec<f64>,
    /// Feature-map blocks in the model trained during each epoch.
    pub fm_blocks: Vec<usize>,
    pub growth_events: Vec<GrowthEvent>,
    pub best_loss: f64,
    pub best_epoch: usize,
    /// L2 relative error against the exact solution (Laplace runs only).
    pub l2_relative_error: Option<f64>,
    pub final_model: ReuploaderModel,
    pub wall_time_s: f64,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> f64 {
        *self.train_losses.last().expect("at least one epoch")
    }

    pub fn final_test_loss(&self) -> f64 {
        *self.test_losses.last().expect("at least one epoch")
    }
}

/// Shared epoch loop. `step` returns the training loss and gradient for the
/// current model at `epoch`; `eval` scores the updated model.
fn run_loop(
    mut model: ReuploaderModel,
    config: &TrainConfig,
    domain: &Domain,
    mut step: impl FnMut(&ReuploaderModel, usize) -> Result<(f64, Vec<f64>)>,
    mut eval: impl FnMut(&ReuploaderModel) -> Result<f64>,
) -> Result<TrainReport> {
    config.validate()?;
    let start = Instant::now();
    let mut adam = AdamState::new(model.params.trainable_len(), config.adam);
    let mut report = TrainReport {
        train_losses: Vec::with_capacity(config.epochs),
        test_losses: Vec::with_capacity(config.epochs),
        fm_blocks: Vec::with_capacity(config.epochs),
        growth_events: Vec::new(),
        best_loss: f64::INFINITY,
        best_epoch: 0,
        l2_relative_error: None,
        final_model: model.clone(),
        wall_time_s: 0.0,
    };
    let mut since_growth = 0;

    for epoch in 0..config.epochs {
        let at = |e: Error| e.at_epoch(epoch);
        let (loss, grad) = step(&model, epoch).map_err(at)?;
        let mut values = model.params.trainable_values();
        adam_update(&mut adam, &mut values, &grad).map_err(at)?;
        model.params.set_trainable_values(&values).map_err(at)?;
        let test = eval(&model).map_err(at)?;
        if !loss.is_finite() || !test.is_finite() {
            return Err(at(Error::Numeric(format!("loss diverged (train {loss}, eval {test})"))));
        }

        report.train_losses.push(loss);
        report.test_losses.push(test);
        report.fm_blocks.push(model.n_feature_map_blocks());
        if test < report.best_loss {
            report.best_loss = test;
            report.best_epoch = epoch;
        }

        let Some(schedule) = &config.growth else {
            continue;
        };
        let history = &report.test_losses[since_growth..];
        if should_grow(schedule, epoch, history, model.n_feature_map_blocks()) {
            let seed = derive_seed(config.seed, GROWTH_STREAM, epoch as u64);
            let (old_theta, old_psi) = (model.params.theta.len(), model.params.psi.len());
            let (grown, mut event) = grow(&model, schedule, seed, domain).map_err(at)?;
            event.epoch = epoch;
            let trainable_psi = |n: usize| if grown.params.psi_trainable { n } else { 0 };
            adam.regroup(
                old_theta,
                grown.params.theta.len(),
                trainable_psi(old_psi),
                trainable_psi(grown.params.psi.len()),
            );
            model = grown;
            report.growth_events.push(event);
            since_growth = report.test_losses.len();
        }
    }

    report.final_model = model;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Full-batch MSE regression; the evaluation loss is the test-set MSE.
pub fn train_regression(
    model: ReuploaderModel,
    data: &Dataset,
    config: &TrainConfig,
    domain: &Domain,
) -> Result<TrainReport> {
    data.validate(model.input_dim)?;
    if data.x_test.is_empty() {
        return Err(Error::Size("test set is empty".into()));
    }
    let step = |m: &ReuploaderModel, _epoch: usize| {
        let program = m.compile();
        let n = data.x_train.len() as f64;
        let mut grad = vec![0.0; m.params.trainable_len()];
        let mut loss = 0.0;
        for (x, &y) in data.x_train.iter().zip(&data.y_train) {
            let (f, g) = value_and_gradient_compiled(m, &program, x)?;
            let r = f - y;
            loss += r * r;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += 2.0 * r * gi / n;
            }
        }
        Ok((loss / n, grad))
    };
    let eval = |m: &ReuploaderModel| {
        let program = m.compile();
        let preds: Vec<f64> =
            data.x_test.iter().map(|x| forward_angles(m, &program, &m.angles(&program, x))).collect();
        mse_loss(&preds, &data.y_test)
    };
    run_loop(model, config, domain, step, eval)
}

/// Physics-informed training on points resampled every epoch. The
/// evaluation loss is the same objective on one fixed sample per seed.
pub fn train_laplace(
    model: ReuploaderModel,
    problem: &LaplaceProblem,
    config: &TrainConfig,
) -> Result<TrainReport> {
    problem.validate()?;
    if model.input_dim != 2 {
        return Err(Error::Shape {
            expected: 2,
            actual: model.input_dim,
        });
    }
    let seed = config.seed;
    let eval_sample = problem.sample(seed, EVAL_EPOCH);
    let step = |m: &ReuploaderModel, epoch: usize| {
        let sample = problem.sample(seed, epoch as u64);
        laplace::loss_and_gradient(m, problem, &sample)
    };
    let eval = |m: &ReuploaderModel| laplace::loss_on_sample(m, problem, &eval_sample);
    let domain = Domain::cube(2, 0.0, 1.0);
    let mut report = run_loop(model, config, &domain, step, eval)?;
    report.l2_relative_error = Some(model_l2_relative_error(&report.final_model, problem.eval_grid)?);
    Ok(report)
}
