use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{
    build_reuploader, forward, BlockRole, BlockTemplate, GateTemplate, InitSpec, Layout, RepeatUnit,
};
use crate::verify::random_model;

/// `RY(theta0) [RX(psi x) RY(theta)]^layers` on one qubit, unpaired gates.
fn plain_model(theta: &[f64], psi: &[f64]) -> ReuploaderModel {
    let unit = RepeatUnit {
        feature_map: BlockTemplate {
            role: BlockRole::FeatureMap,
            gates: vec![GateTemplate::encoding(0, 0)],
        },
        ansatz: BlockTemplate { role: BlockRole::Ansatz, gates: vec![GateTemplate::ry(0)] },
    };
    let layout = Layout::reuploader(1, 1, unit, psi.len());
    let mut m =
        build_reuploader(&layout, &InitSpec::Uniform { theta: (0.0, 0.0), psi: (0.0, 0.0) }, 0).unwrap();
    m.params.theta.copy_from_slice(theta);
    m.params.psi.copy_from_slice(psi);
    m
}

fn fd_param(model: &ReuploaderModel, x: &[f64], i: usize, h: f64) -> f64 {
    let mut v = model.params.trainable_values();
    let mut m = model.clone();
    let v0 = v[i];
    v[i] = v0 + h;
    m.params.set_trainable_values(&v).unwrap();
    let p = forward(&m, x).unwrap();
    v[i] = v0 - h;
    m.params.set_trainable_values(&v).unwrap();
    let q = forward(&m, x).unwrap();
    (p - q) / (2.0 * h)
}

#[test]
fn single_ry_shift_is_exact() {
    // RY(theta) alone: f = cos(theta)
    let m = plain_model(&[FRAC_PI_2], &[]);
    let g = parameter_shift_gradient(&m, &[0.3]).unwrap();
    assert!((g.partials[0] + 1.0).abs() < 1e-15);
    for theta in [0.1, 0.7, 2.0, -1.3] {
        let m = plain_model(&[theta], &[]);
        let g = parameter_shift_gradient(&m, &[0.0]).unwrap();
        assert!((g.partials[0] + theta.sin()).abs() < 1e-15);
    }
}

#[test]
fn psi_partial_of_cosine() {
    // f(x) = cos(psi x) with psi = 1, x = 2 -> df/dpsi = -2 sin 2
    let m = plain_model(&[0.0, 0.0], &[1.0]);
    let g = parameter_shift_gradient(&m, &[2.0]).unwrap();
    assert!((g.partials[2] + 2.0 * 2.0f64.sin()).abs() < 1e-14);
    assert!((g.partials[2] + 1.818_594_853_651_363).abs() < 1e-12);
}

#[test]
fn fully_identity_model_sits_at_a_stationary_point() {
    // f == 1 is the maximum of <Z>, so every partial vanishes there
    let unit = RepeatUnit::standard(1, crate::AnsatzStyle::RyPairs, &[0]);
    let layout = Layout::reuploader(1, 1, unit, 1);
    let m = build_reuploader(
        &layout,
        &InitSpec::IdentityPair { theta: (0.0, 0.1), psi: (0.0, PI / 9.0) },
        4,
    )
    .unwrap();
    let g = parameter_shift_gradient(&m, &[1.3]).unwrap();
    assert!(g.partials.iter().all(|p| p.abs() < 1e-12));
}

#[test]
fn identity_pair_block_inside_generic_model_has_nonzero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let m = random_model(&mut rng);
        let schedule = crate::growth::GrowthSchedule {
            trigger: crate::growth::Trigger::FixedInterval { epochs: 1 },
            blocks_per_event: 1,
            max_feature_map_blocks: 16,
            strategy: crate::growth::GrowthStrategy::Block,
        };
        let domain = crate::model::Domain::cube(m.input_dim, 0.0, std::f64::consts::TAU);
        let (g, _) = crate::growth::grow(&m, &schedule, 9, &domain).unwrap();
        let x: Vec<f64> = (0..g.input_dim).map(|_| rng.random_range(0.5..6.0)).collect();
        let grad = parameter_shift_gradient(&g, &x).unwrap();
        // new slots are appended at the end of each parameter group
        let new_theta = g.params.theta.len() - m.params.theta.len();
        let tail = &grad.partials[m.params.theta.len()..m.params.theta.len() + new_theta];
        let biggest = tail.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if forward(&m, &x).unwrap().abs() < 1.0 - 1e-6 {
            assert!(biggest > 1e-6, "new block gradient {biggest}");
        }
        for (i, &p) in grad.partials.iter().enumerate() {
            assert!((p - fd_param(&g, &x, i, 1e-5)).abs() < 1e-6);
        }
    }
}

#[test]
fn random_models_agree_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let m = random_model(&mut rng);
        let x: Vec<f64> = (0..m.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let g = parameter_shift_gradient(&m, &x).unwrap();
        assert_eq!(g.len(), m.params.trainable_len());
        for (i, &p) in g.partials.iter().enumerate() {
            assert!((p - fd_param(&m, &x, i, 1e-5)).abs() < 1e-6);
        }
    }
}

#[test]
fn adjoint_matches_parameter_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let m = random_model(&mut rng);
        let x: Vec<f64> = (0..m.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let shift = parameter_shift_gradient(&m, &x).unwrap();
        let (value, adj) = value_and_gradient(&m, &x).unwrap();
        assert!((value - forward(&m, &x).unwrap()).abs() < 1e-14);
        for (a, b) in adj.iter().zip(&shift.partials) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn frozen_psi_is_not_trainable() {
    let mut m = plain_model(&[0.2, 0.3], &[1.0]);
    m.params.psi_trainable = false;
    let g = parameter_shift_gradient(&m, &[1.0]).unwrap();
    assert_eq!(g.len(), 2);
    let (_, adj) = value_and_gradient(&m, &[1.0]).unwrap();
    assert_eq!(adj.len(), 2);
}

#[test]
fn scaled_output_scales_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = random_model(&mut rng);
    let x = vec![0.9; m.input_dim];
    let a = -2.5;
    let g = parameter_shift_gradient(&m, &x).unwrap();
    let wrapped = |mm: &ReuploaderModel| a * forward(mm, &x).unwrap();
    for (i, &p) in g.partials.iter().enumerate() {
        let mut v = m.params.trainable_values();
        let mut mm = m.clone();
        v[i] += 1e-5;
        mm.params.set_trainable_values(&v).unwrap();
        let up = wrapped(&mm);
        v[i] -= 2e-5;
        mm.params.set_trainable_values(&v).unwrap();
        let fd = (up - wrapped(&mm)) / 2e-5;
        assert!((fd - a * p).abs() < 1e-5);
    }
}

#[test]
fn input_derivative_examples() {
    let cos_x = plain_model(&[0.0, 0.0], &[1.0]);
    assert!(input_derivative(&cos_x, &[0.0], DerivativeRequest::first(0)).unwrap().abs() < 1e-15);
    assert!((input_derivative(&cos_x, &[0.0], DerivativeRequest::second(0)).unwrap() + 1.0).abs() < 1e-15);

    let cos_2x = plain_model(&[0.0, 0.0], &[2.0]);
    let d2 = input_derivative(&cos_2x, &[FRAC_PI_4], DerivativeRequest::second(0)).unwrap();
    assert!(d2.abs() < 1e-14);

    // two inputs, dimension 1 never encoded
    let mut unit = RepeatUnit::standard(1, crate::AnsatzStyle::RyPairs, &[0]);
    unit.feature_map.gates.truncate(1);
    let layout = Layout::reuploader(1, 2, unit, 2);
    let m = build_reuploader(&layout, &InitSpec::Uniform { theta: (0.0, 1.0), psi: (0.0, 1.0) }, 0).unwrap();
    assert_eq!(input_derivative(&m, &[0.3, 0.4], DerivativeRequest::second(1)).unwrap(), 0.0);
    assert_eq!(input_derivative(&m, &[0.3, 0.4], DerivativeRequest::first(1)).unwrap(), 0.0);
    assert!(matches!(
        input_derivative(&m, &[0.3, 0.4], DerivativeRequest { dim: 0, order: 3 }),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn second_derivative_consistent_with_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let m = random_model(&mut rng);
        let x: Vec<f64> = (0..m.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        for dim in 0..m.input_dim {
            let h = 1e-5;
            let mut xp = x.clone();
            xp[dim] += h;
            let mut xm = x.clone();
            xm[dim] -= h;
            let fd = (input_derivative(&m, &xp, DerivativeRequest::first(dim)).unwrap()
                - input_derivative(&m, &xm, DerivativeRequest::first(dim)).unwrap())
                / (2.0 * h);
            let d2 = input_derivative(&m, &x, DerivativeRequest::second(dim)).unwrap();
            assert!((fd - d2).abs() < 1e-5, "{fd} vs {d2}");
        }
    }
}

#[test]
fn jets_match_shift_rule_input_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let m = random_model(&mut rng);
        let x: Vec<f64> = (0..m.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        for dim in 0..m.input_dim {
            let jet = jet_forward(&m, &x, dim).unwrap();
            assert!((jet.value() - forward(&m, &x).unwrap()).abs() < 1e-13);
            let d1 = input_derivative(&m, &x, DerivativeRequest::first(dim)).unwrap();
            let d2 = input_derivative(&m, &x, DerivativeRequest::second(dim)).unwrap();
            assert!((jet.first() - d1).abs() < 1e-11);
            assert!((jet.second() - d2).abs() < 1e-10);
        }
    }
}

#[test]
fn jet_parameter_partials_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let m = random_model(&mut rng);
        let x: Vec<f64> = (0..m.input_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let dim = rng.random_range(0..m.input_dim);
        let (_, grad) = jet_value_and_gradient(&m, &x, dim).unwrap();
        let mut v = m.params.trainable_values();
        for (i, g) in grad.iter().enumerate() {
            let h = 1e-5;
            let mut mm = m.clone();
            let v0 = v[i];
            v[i] = v0 + h;
            mm.params.set_trainable_values(&v).unwrap();
            let up = jet_forward(&mm, &x, dim).unwrap();
            v[i] = v0 - h;
            mm.params.set_trainable_values(&v).unwrap();
            let down = jet_forward(&mm, &x, dim).unwrap();
            v[i] = v0;
            assert!((g.value() - (up.value() - down.value()) / (2.0 * h)).abs() < 1e-6);
            assert!((g.first() - (up.first() - down.first()) / (2.0 * h)).abs() < 1e-5);
            assert!((g.second() - (up.second() - down.second()) / (2.0 * h)).abs() < 1e-4);
        }
    }
}
