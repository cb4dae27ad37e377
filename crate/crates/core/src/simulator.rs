//! Exact statevector simulation for small registers.
//!
//! Basis-state index convention: qubit 0 is the least-significant bit, so the
//! amplitude of `|q1 q0>` lives at index `q0 + 2 q1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Amplitude, RealScalar};

pub const MAX_QUBITS: usize = 20;

/// Norm tolerance after construction and single gate applications.
pub const NORM_TOL: f64 = 1e-12;
/// Norm tolerance after long gate chains.
pub const CHAIN_NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Cnot,
}

/// A concrete gate with all angles bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    /// `exp(-i angle X / 2)` on `target`.
    Rx { target: usize, angle: f64 },
    /// `exp(-i angle Y / 2)` on `target`.
    Ry { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Rx { .. } => GateKind::Rx,
            GateOp::Ry { .. } => GateKind::Ry,
            GateOp::Cnot { .. } => GateKind::Cnot,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::Index {
                    index: q,
                    n_qubits,
                })
            }
        };
        match *self {
            GateOp::Rx { target, angle } | GateOp::Ry { target, angle } => {
                check(target)?;
                if !angle.is_finite() {
                    return Err(Error::Numeric(format!("non-finite gate angle {angle}")));
                }
                Ok(())
            }
            GateOp::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::InvalidGate(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Complex amplitudes over `2^n_qubits` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place. Used by hot loops that own their state.
    pub fn apply_mut(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            GateOp::Rx { target, angle } => {
                let (c, s) = angle.half_cos_sin();
                apply_rx(&mut self.amplitudes, target, c, s);
            }
            GateOp::Ry { target, angle } => {
                let (c, s) = angle.half_cos_sin();
                apply_ry(&mut self.amplitudes, target, c, s);
            }
            GateOp::Cnot { control, target } => apply_cnot(&mut self.amplitudes, control, target),
        }
        Ok(())
    }
}

/// `|0...0>` on `n_qubits` qubits.
pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amplitudes[0] = Complex64::new(1.0, 0.0);
    Ok(StateVector {
        n_qubits,
        amplitudes,
    })
}

/// Returns `gate |state>`; the input state is left untouched.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_mut(gate)?;
    Ok(out)
}

/// `<state| Z_qubit |state>`.
pub fn expectation_pauli_z(state: &StateVector, qubit: usize) -> Result<f64> {
    if qubit >= state.n_qubits {
        return Err(Error::Index {
            index: qubit,
            n_qubits: state.n_qubits,
        });
    }
    Ok(expectation_z(&state.amplitudes, qubit))
}

// Generic kernels. They assume indices were validated by the caller.

#[inline]
pub(crate) fn apply_rx<A: Amplitude>(amps: &mut [A], target: usize, c: A::Real, s: A::Real) {
    let stride = 1usize << target;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (u, v) = (amps[i], amps[i + stride]);
            amps[i] = u.scale(c) - v.scale(s).mul_i();
            amps[i + stride] = v.scale(c) - u.scale(s).mul_i();
        }
    }
}

#[inline]
pub(crate) fn apply_ry<A: Amplitude>(amps: &mut [A], target: usize, c: A::Real, s: A::Real) {
    let stride = 1usize << target;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (u, v) = (amps[i], amps[i + stride]);
            amps[i] = u.scale(c) - v.scale(s);
            amps[i + stride] = u.scale(s) + v.scale(c);
        }
    }
}

#[inline]
pub(crate) fn apply_cnot<A: Amplitude>(amps: &mut [A], control: usize, target: usize) {
    let (cbit, tbit) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}

pub(crate) fn expectation_z<A: Amplitude>(amps: &[A], qubit: usize) -> A::Real {
    let bit = 1usize << qubit;
    let mut acc = <A::Real as RealScalar>::constant(0.0);
    for (i, a) in amps.iter().enumerate() {
        let p = a.conj_mul(*a).re();
        if i & bit == 0 {
            acc += p;
        } else {
            acc += -p;
        }
    }
    acc
}
