//! Adjoint differentiation over (jet-valued) statevectors.
//!
//! One forward run produces `|psi_N>`. Sweeping backwards with
//! `lambda = Z |psi_N>`, the derivative of `<Z>` with respect to the angle of
//! gate `k` is `Im <lambda_k| P_k |psi_k>`, where `P_k` is the gate's Pauli
//! generator and both vectors are taken right after gate `k`. Both vectors
//! are then uncomputed through `G_k^dagger`.
//!
//! With jet amplitudes and encoding angles `psi * (x_d + e)` the same sweep
//! differentiates the output's Taylor coefficients along `x_d`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{apply_compiled, run_program, AngleSource, CompiledGate, ReuploaderModel, GAMMA};
use crate::scalar::{Amplitude, ComplexJet, Jet, RealScalar};
use crate::simulator::{self, GateKind};

/// `<lam| P |psi>` for the rotation generator of `kind` on `target`.
fn generator_inner<A: Amplitude>(lam: &[A], psi: &[A], kind: GateKind, target: usize) -> A {
    let stride = 1usize << target;
    let mut acc = A::zero();
    for base in (0..psi.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let j = i + stride;
            match kind {
                // X: (u, v) -> (v, u)
                GateKind::Rx => {
                    acc += lam[i].conj_mul(psi[j]);
                    acc += lam[j].conj_mul(psi[i]);
                }
                // Y: (u, v) -> (-i v, i u)
                GateKind::Ry => {
                    acc += lam[j].conj_mul(psi[i]).mul_i();
                    acc += -lam[i].conj_mul(psi[j]).mul_i();
                }
                GateKind::Cnot => unreachable!(),
            }
        }
    }
    acc
}

/// Output and per-trainable-slot partials for arbitrary amplitude algebra.
///
/// `angle` maps each compiled gate to its angle; `chain` gives `d angle / d psi`
/// for encoding gates.
fn sweep<A: Amplitude>(
    model: &ReuploaderModel,
    program: &[CompiledGate],
    angles: &[A::Real],
    chain: impl Fn(usize) -> A::Real,
) -> (A::Real, Vec<A::Real>) {
    let mut psi: Vec<A> = run_program(model.n_qubits, program, angles);
    let bit = 1usize << model.measured_qubit;
    let mut lam: Vec<A> = psi
        .iter()
        .enumerate()
        .map(|(i, &a)| if i & bit == 0 { a } else { -a })
        .collect();
    let value = simulator::expectation_z(&psi, model.measured_qubit);

    let zero = <A::Real as RealScalar>::constant(0.0);
    let mut grad = vec![zero; model.params.trainable_len()];
    let n_theta = model.params.theta.len();
    for (g, &angle) in program.iter().zip(angles).rev() {
        if g.kind != GateKind::Cnot {
            let d_angle = generator_inner(&lam, &psi, g.kind, g.target).im();
            match g.source {
                AngleSource::Theta(i) => grad[i] += d_angle,
                AngleSource::Encoding { slot, dim } if model.params.psi_trainable => {
                    grad[n_theta + slot] += d_angle * chain(dim);
                }
                _ => {}
            }
        }
        let inverse = -angle;
        apply_compiled(&mut psi, g, inverse);
        apply_compiled(&mut lam, g, inverse);
    }
    (value, grad)
}

/// `(f(x), grad_params f(x))` in one forward and one backward sweep.
pub fn value_and_gradient(model: &ReuploaderModel, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    model.check_input(x)?;
    value_and_gradient_compiled(model, &model.compile(), x)
}

/// [`value_and_gradient`] for an already compiled program; `x` must be checked.
pub(crate) fn value_and_gradient_compiled(
    model: &ReuploaderModel,
    program: &[CompiledGate],
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let angles = model.angles(program, x);
    let (value, grad) = sweep::<Complex64>(model, program, &angles, |d| GAMMA * x[d]);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite value or gradient".into()));
    }
    Ok((value, grad))
}

fn jet_angles(model: &ReuploaderModel, program: &[CompiledGate], x: &[f64], dir: usize) -> Vec<Jet> {
    program
        .iter()
        .map(|g| match g.source {
            AngleSource::Fixed => Jet::constant(0.0),
            AngleSource::Theta(i) => Jet::constant(model.params.theta[i]),
            AngleSource::Encoding { slot, dim } => {
                let w = GAMMA * model.params.psi[slot];
                Jet::new(w * x[dim], if dim == dir { w } else { 0.0 })
            }
        })
        .collect()
}

fn check_dir(model: &ReuploaderModel, dir: usize) -> Result<()> {
    if dir >= model.input_dim {
        return Err(Error::Shape {
            expected: model.input_dim,
            actual: dir + 1,
        });
    }
    Ok(())
}

/// Output as a jet along `x[dir]`: value, first and second derivative.
pub fn jet_forward(model: &ReuploaderModel, x: &[f64], dir: usize) -> Result<Jet> {
    model.check_input(x)?;
    check_dir(model, dir)?;
    Ok(jet_forward_compiled(model, &model.compile(), x, dir))
}

pub(crate) fn jet_forward_compiled(
    model: &ReuploaderModel,
    program: &[CompiledGate],
    x: &[f64],
    dir: usize,
) -> Jet {
    let angles = jet_angles(model, program, x, dir);
    let amps: Vec<ComplexJet> = run_program(model.n_qubits, program, &angles);
    simulator::expectation_z(&amps, model.measured_qubit)
}

/// Jet output along `x[dir]` and the parameter partials of every jet coefficient.
///
/// `partials[p].second()` is `d/d param_p` of `d^2 f / d x_dir^2`.
pub fn jet_value_and_gradient(
    model: &ReuploaderModel,
    x: &[f64],
    dir: usize,
) -> Result<(Jet, Vec<Jet>)> {
    model.check_input(x)?;
    check_dir(model, dir)?;
    jet_value_and_gradient_compiled(model, &model.compile(), x, dir)
}

pub(crate) fn jet_value_and_gradient_compiled(
    model: &ReuploaderModel,
    program: &[CompiledGate],
    x: &[f64],
    dir: usize,
) -> Result<(Jet, Vec<Jet>)> {
    let angles = jet_angles(model, program, x, dir);
    let (value, grad) = sweep::<ComplexJet>(model, program, &angles, |d| {
        Jet::new(GAMMA * x[d], if d == dir { GAMMA } else { 0.0 })
    });
    let finite = |j: &Jet| j.0.iter().all(|c| c.is_finite());
    if !finite(&value) || !grad.iter().all(finite) {
        return Err(Error::Numeric("non-finite jet value or gradient".into()));
    }
    Ok((value, grad))
}
