//! Growth-based training of data-reuploading parameterized quantum circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`simulator`]: exact statevector simulation with `RX`, `RY` and `CNOT`.
//! - [`model`]: reuploader layouts, parameter stores, forward evaluation and
//!   accessible-spectrum analysis.
//! - [`gradients`]: parameter-shift gradients, input derivatives and a
//!   jet-based adjoint engine used by the trainers.
//! - [`growth`]: Block, Seq FM and Int FM growth with function preservation.
//! - [`training`]: Adam, regression and Laplace losses, the training loop and
//!   multi-seed sweeps.
//! - [`experiment`]: experiment presets and configuration shared with the CLI.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod gradients;
pub mod growth;
pub mod model;
pub mod scalar;
pub mod simulator;
pub mod training;
pub mod verify;

pub use error::{Error, Result};
pub use experiment::{seed_sweep, ExperimentConfig, ExperimentKind, RawConfig, Variant};
pub use gradients::{
    input_derivative, jet_forward, jet_value_and_gradient, parameter_shift_gradient, value_and_gradient,
    DerivativeRequest, GradientVector,
};
pub use growth::{grow, should_grow, GrowthEvent, GrowthSchedule, GrowthStrategy, Trigger};
pub use model::{
    accessible_spectrum, build_reuploader, forward, fourier_coefficients, AnsatzStyle, BlockRole,
    BlockSpec, BlockTemplate, Domain, GateSpec, GateTemplate, InitSpec, Layout, OmegaSet,
    ParameterStore, RepeatUnit, ReuploaderModel, Slot,
};
pub use training::{
    make_teacher_dataset, mse_loss, train_laplace, train_regression, Dataset, LaplaceProblem, SweepSummary,
    TrainConfig, TrainReport,
};
pub use simulator::{apply_gate, expectation_pauli_z, zero_state, GateKind, GateOp, StateVector};
