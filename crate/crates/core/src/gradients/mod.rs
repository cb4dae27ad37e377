//! Derivatives of the model output.
//!
//! Two independent routes are provided:
//!
//! - shift rules ([`parameter_shift_gradient`], [`input_derivative`]) built
//!   purely from shifted forward evaluations, and
//! - an adjoint sweep over jet-valued amplitudes ([`adjoint`]) that yields
//!   all parameter partials of the output and of its first and second input
//!   derivatives in a single backward pass. The trainers use this one.

pub mod adjoint;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{forward_angles, ReuploaderModel, Slot, GAMMA};

pub use adjoint::{jet_forward, jet_value_and_gradient, value_and_gradient};

/// Partials aligned with `ParameterStore::trainable_slots`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub partials: Vec<f64>,
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub(crate) fn checked(partials: Vec<f64>) -> Result<Self> {
        if let Some(i) = partials.iter().position(|p| !p.is_finite()) {
            return Err(Error::Numeric(format!("non-finite partial at trainable index {i}")));
        }
        Ok(GradientVector { partials })
    }
}

/// Which input derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivativeRequest {
    pub dim: usize,
    pub order: u8,
}

impl DerivativeRequest {
    pub fn first(dim: usize) -> Self {
        DerivativeRequest { dim, order: 1 }
    }

    pub fn second(dim: usize) -> Self {
        DerivativeRequest { dim, order: 2 }
    }
}

/// Exact gradient by the two-point shift rule at the gate-angle level.
///
/// A `psi` slot feeding angle `psi * x[d]` picks up the chain-rule factor `x[d]`.
pub fn parameter_shift_gradient(model: &ReuploaderModel, x: &[f64]) -> Result<GradientVector> {
    model.check_input(x)?;
    let program = model.compile();
    let base = model.angles(&program, x);
    let mut partials = vec![0.0; model.params.trainable_len()];
    let mut shifted = base.clone();
    for (k, g) in model.gates().enumerate() {
        let Some(slot) = g.slot else { continue };
        let Some(idx) = model.params.trainable_index(slot) else { continue };
        shifted[k] = base[k] + FRAC_PI_2;
        let plus = forward_angles(model, &program, &shifted);
        shifted[k] = base[k] - FRAC_PI_2;
        let minus = forward_angles(model, &program, &shifted);
        shifted[k] = base[k];
        let d_angle = 0.5 * (plus - minus);
        partials[idx] += match (slot, g.input_dim) {
            (Slot::Psi(_), Some(d)) => d_angle * GAMMA * x[d],
            _ => d_angle,
        };
    }
    GradientVector::checked(partials)
}

/// First or second derivative of the output with respect to `x[req.dim]`.
///
/// Built from shift rules on every encoding gate of that dimension; the
/// second derivative includes the cross terms between distinct gates that
/// encode the same coordinate. Returns exactly zero when no gate encodes
/// `req.dim`.
pub fn input_derivative(model: &ReuploaderModel, x: &[f64], req: DerivativeRequest) -> Result<f64> {
    model.check_input(x)?;
    if req.dim >= model.input_dim {
        return Err(Error::Shape {
            expected: model.input_dim,
            actual: req.dim + 1,
        });
    }
    if !(1..=2).contains(&req.order) {
        return Err(Error::Parameter(format!(
            "derivative order must be 1 or 2, got {}",
            req.order
        )));
    }
    let program = model.compile();
    let base = model.angles(&program, x);
    // (gate index, d angle / d x)
    let encoders: Vec<(usize, f64)> = model
        .gates()
        .enumerate()
        .filter_map(|(k, g)| match (g.slot, g.input_dim) {
            (Some(Slot::Psi(i)), Some(d)) if d == req.dim => Some((k, GAMMA * model.params.psi[i])),
            _ => None,
        })
        .collect();
    if encoders.is_empty() {
        return Ok(0.0);
    }

    let eval = |shifts: &[(usize, f64)]| {
        let mut a = base.clone();
        for &(k, s) in shifts {
            a[k] += s;
        }
        forward_angles(model, &program, &a)
    };

    let value = if req.order == 1 {
        encoders
            .iter()
            .map(|&(k, w)| w * 0.5 * (eval(&[(k, FRAC_PI_2)]) - eval(&[(k, -FRAC_PI_2)])))
            .sum()
    } else {
        let f0 = eval(&[]);
        let mut acc = 0.0;
        for (i, &(g, wg)) in encoders.iter().enumerate() {
            // same-gate term: shift rule applied twice
            acc += wg * wg * 0.25 * (eval(&[(g, PI)]) - 2.0 * f0 + eval(&[(g, -PI)]));
            for &(h, wh) in &encoders[i + 1..] {
                let s = FRAC_PI_2;
                let mixed = 0.25
                    * (eval(&[(g, s), (h, s)]) - eval(&[(g, s), (h, -s)]) - eval(&[(g, -s), (h, s)])
                        + eval(&[(g, -s), (h, -s)]));
                acc += 2.0 * wg * wh * mixed;
            }
        }
        acc
    };
    if !value.is_finite() {
        return Err(Error::Numeric("non-finite input derivative".into()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests;
