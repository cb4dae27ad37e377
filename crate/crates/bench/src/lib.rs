//! Model fixtures shared by the benchmarks.

use qgrow::{build_reuploader, AnsatzStyle, InitSpec, Layout, RepeatUnit, ReuploaderModel};

/// A randomly initialised reuploader with one input per qubit.
pub fn fixture(n_qubits: usize, layers: usize) -> ReuploaderModel {
    let encoding: Vec<usize> = (0..n_qubits).collect();
    let unit = RepeatUnit::standard(n_qubits, AnsatzStyle::RyRxPairs, &encoding);
    let init = InitSpec::Uniform {
        theta: (0.0, std::f64::consts::PI),
        psi: (0.0, 1.0),
    };
    build_reuploader(&Layout::reuploader(n_qubits, n_qubits, unit, layers), &init, 7).expect("valid layout")
}

/// An input point inside the unit cube.
pub fn point(model: &ReuploaderModel) -> Vec<f64> {
    (0..model.input_dim).map(|d| 0.3 + 0.1 * d as f64).collect()
}
