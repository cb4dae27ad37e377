//! Datasets drawn from teacher circuits and the mean squared error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{forward, Domain, ReuploaderModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<f64>,
    pub x_test: Vec<Vec<f64>>,
    pub y_test: Vec<f64>,
}

impl Dataset {
    pub fn validate(&self, input_dim: usize) -> Result<()> {
        for (xs, ys) in [(&self.x_train, &self.y_train), (&self.x_test, &self.y_test)] {
            if xs.len() != ys.len() {
                return Err(Error::Shape {
                    expected: xs.len(),
                    actual: ys.len(),
                });
            }
            if let Some(x) = xs.iter().find(|x| x.len() != input_dim) {
                return Err(Error::Shape {
                    expected: input_dim,
                    actual: x.len(),
                });
            }
        }
        if self.x_train.is_empty() {
            return Err(Error::Size("training set is empty".into()));
        }
        Ok(())
    }
}

/// Samples inputs uniformly over `domain` and labels them with `teacher`.
///
/// Gaussian noise of width `noise_sigma` is added to the training targets
/// only; test targets stay clean so test loss measures generalisation.
pub fn make_teacher_dataset(
    teacher: &ReuploaderModel,
    n_train: usize,
    n_test: usize,
    domain: &Domain,
    noise_sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::Parameter(format!(
            "noise sigma must be finite and non-negative, got {noise_sigma}"
        )));
    }
    if domain.dims() != teacher.input_dim {
        return Err(Error::Shape {
            expected: teacher.input_dim,
            actual: domain.dims(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_train: Vec<Vec<f64>> = (0..n_train).map(|_| domain.sample(&mut rng)).collect();
    let x_test: Vec<Vec<f64>> = (0..n_test).map(|_| domain.sample(&mut rng)).collect();
    let mut y_train = x_train.iter().map(|x| forward(teacher, x)).collect::<Result<Vec<_>>>()?;
    let y_test = x_test.iter().map(|x| forward(teacher, x)).collect::<Result<Vec<_>>>()?;
    if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::Parameter(e.to_string()))?;
        for y in &mut y_train {
            *y += noise.sample(&mut rng);
        }
    }
    Ok(Dataset {
        x_train,
        y_train,
        x_test,
        y_test,
    })
}

pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape {
            expected: targets.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Size("mse of an empty set".into()));
    }
    let sum: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / predictions.len() as f64)
}
