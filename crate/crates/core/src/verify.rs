//! Randomized property suites: growth preservation and derivative checks
//! against central finite differences. Used by `qgrow verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gradients::{input_derivative, parameter_shift_gradient, DerivativeRequest};
use crate::growth::{grow, GrowthSchedule, GrowthStrategy, Trigger};
use crate::model::{build_reuploader, forward, AnsatzStyle, Domain, InitSpec, Layout, RepeatUnit, ReuploaderModel};

/// Tolerances pinned by the property contracts.
pub const PRESERVATION_TOL: f64 = 1e-10;
pub const PARAM_FD_STEP: f64 = 1e-5;
pub const PARAM_FD_TOL: f64 = 1e-6;
pub const INPUT_FD_STEP: f64 = 1e-4;
pub const INPUT_FD_TOL: f64 = 1e-4;

/// A random reuploader with at most two qubits and `2 * layers + 1 <= 9` blocks.
pub fn random_model(rng: &mut impl Rng) -> ReuploaderModel {
    let n_qubits = rng.random_range(1..=2);
    let style = if rng.random_bool(0.5) {
        AnsatzStyle::RyPairs
    } else {
        AnsatzStyle::RyRxPairs
    };
    let shared = n_qubits == 2 && rng.random_bool(0.3);
    let (encoding, input_dim): (Vec<usize>, usize) = if shared || n_qubits == 1 {
        (vec![0; n_qubits], 1)
    } else {
        ((0..n_qubits).collect(), n_qubits)
    };
    let unit = RepeatUnit::standard(n_qubits, style, &encoding);
    let layers = rng.random_range(1..=4);
    let layout = Layout::reuploader(n_qubits, input_dim, unit, layers);
    let init = if rng.random_bool(0.25) {
        InitSpec::IdentityPair {
            theta: (0.0, 0.5),
            psi: (0.0, 1.0),
        }
    } else {
        InitSpec::Uniform {
            theta: (-std::f64::consts::PI, std::f64::consts::PI),
            psi: (-1.0, 1.0),
        }
    };
    build_reuploader(&layout, &init, rng.random()).expect("random layout is valid")
}

/// Like [`random_model`] but laid out as a full ansatz stack with some empty gaps,
/// so feature-map strategies have room to grow.
pub fn random_stack_model(rng: &mut impl Rng) -> ReuploaderModel {
    let base = random_model(rng);
    let n_ansatz = rng.random_range(3..=5);
    let filled: Vec<usize> = (0..n_ansatz - 1).filter(|_| rng.random_bool(0.4)).collect();
    let layout = Layout::ansatz_stack(base.n_qubits, base.input_dim, base.unit.clone(), n_ansatz, &filled)
        .expect("valid stack");
    let init = InitSpec::Uniform {
        theta: (-std::f64::consts::PI, std::f64::consts::PI),
        psi: (-1.0, 1.0),
    };
    build_reuploader(&layout, &init, rng.random()).expect("random layout is valid")
}

fn random_input(model: &ReuploaderModel, rng: &mut impl Rng) -> Vec<f64> {
    (0..model.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Grows random models with every strategy and checks preservation on the probe grid.
pub fn preservation_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        name: "growth preservation".into(),
        tolerance: PRESERVATION_TOL,
        ..Default::default()
    };
    let strategies = [GrowthStrategy::Block, GrowthStrategy::SeqFm, GrowthStrategy::IntFm];
    let mut done = 0;
    while done < cases {
        let strategy = strategies[done % 3];
        let model = match strategy {
            GrowthStrategy::Block => random_model(&mut rng),
            _ => random_stack_model(&mut rng),
        };
        let schedule = GrowthSchedule {
            trigger: Trigger::FixedInterval { epochs: 1 },
            blocks_per_event: 1,
            max_feature_map_blocks: 16,
            strategy,
        };
        let domain = Domain::cube(model.input_dim, 0.0, std::f64::consts::TAU);
        match grow(&model, &schedule, rng.random(), &domain) {
            Ok((_, event)) => {
                report.max_deviation = report.max_deviation.max(event.residual);
                if !(event.residual < PRESERVATION_TOL) {
                    report.failures += 1;
                }
                done += 1;
            }
            // fully occupied stacks cannot grow; draw another model
            Err(crate::Error::Saturated(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    report.cases = done;
    Ok(report)
}

/// Central difference of `f` along one parameter slot.
fn param_fd(model: &ReuploaderModel, x: &[f64], idx: usize, h: f64) -> Result<f64> {
    let mut values = model.params.trainable_values();
    let mut shifted = model.clone();
    let v0 = values[idx];
    values[idx] = v0 + h;
    shifted.params.set_trainable_values(&values)?;
    let plus = forward(&shifted, x)?;
    values[idx] = v0 - h;
    shifted.params.set_trainable_values(&values)?;
    let minus = forward(&shifted, x)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Parameter-shift partials and second input derivatives against finite differences.
pub fn gradient_suite(cases: usize, seed: u64) -> Result<(SuiteReport, SuiteReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = SuiteReport {
        name: "parameter-shift vs finite differences".into(),
        cases,
        tolerance: PARAM_FD_TOL,
        ..Default::default()
    };
    let mut inputs = SuiteReport {
        name: "second input derivative vs 3-point stencil".into(),
        cases,
        tolerance: INPUT_FD_TOL,
        ..Default::default()
    };
    for _ in 0..cases {
        let model = random_model(&mut rng);
        let x = random_input(&model, &mut rng);
        let grad = parameter_shift_gradient(&model, &x)?;
        for (i, &g) in grad.partials.iter().enumerate() {
            let dev = (g - param_fd(&model, &x, i, PARAM_FD_STEP)?).abs();
            params.max_deviation = params.max_deviation.max(dev);
            if !(dev < PARAM_FD_TOL) {
                params.failures += 1;
            }
        }
        for dim in 0..model.input_dim {
            let h = INPUT_FD_STEP;
            let mut xp = x.clone();
            xp[dim] += h;
            let mut xm = x.clone();
            xm[dim] -= h;
            let stencil = (forward(&model, &xp)? - 2.0 * forward(&model, &x)? + forward(&model, &xm)?) / (h * h);
            let d2 = input_derivative(&model, &x, DerivativeRequest::second(dim))?;
            let dev = (d2 - stencil).abs();
            inputs.max_deviation = inputs.max_deviation.max(dev);
            if !(dev < INPUT_FD_TOL) {
                inputs.failures += 1;
            }
        }
    }
    Ok((params, inputs))
}
