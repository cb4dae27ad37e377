//! Bias-corrected Adam over the trainable parameter vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamHyper {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamHyper {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Updates applied so far; bias correction uses this shared count, also
    /// for slots added by growth.
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize, hyper: AdamHyper) -> Self {
        AdamState {
            hyper,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// Re-aligns moments after growth appended slots to the theta and psi
    /// groups. Existing moments are kept; new slots start at zero.
    pub fn regroup(&mut self, old_theta: usize, new_theta: usize, old_psi: usize, new_psi: usize) {
        debug_assert!(new_theta >= old_theta && new_psi >= old_psi);
        debug_assert_eq!(self.m.len(), old_theta + old_psi);
        let remap = |src: &[f64]| {
            let mut out = Vec::with_capacity(new_theta + new_psi);
            out.extend_from_slice(&src[..old_theta]);
            out.resize(new_theta, 0.0);
            out.extend_from_slice(&src[old_theta..]);
            out.resize(new_theta + new_psi, 0.0);
            out
        };
        self.m = remap(&self.m);
        self.v = remap(&self.v);
    }
}

/// One Adam step applied to `params` in place.
pub fn adam_update(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::Shape {
            expected: state.m.len(),
            actual: if params.len() != state.m.len() { params.len() } else { grads.len() },
        });
    }
    if let Some(g) = grads.iter().find(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite gradient {g}")));
    }
    let AdamHyper {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.hyper;
    state.step += 1;
    let t = state.step.min(i32::MAX as u64) as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}
