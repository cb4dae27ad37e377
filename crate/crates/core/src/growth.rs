//! Circuit growth: when to grow and how to insert blocks without changing
//! the function the model currently represents.
//!
//! New gates always arrive as identity pairs `(a, -a)`. Appended ansatz
//! blocks carry CNOTs controlled on the measured qubit, which commute with
//! the `Z` observable, so the output is unchanged up to rounding.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{forward, instantiate_block, BlockRole, Domain, InitSpec, ReuploaderModel};

/// Probe points per input dimension used to audit preservation.
pub const PROBE_POINTS: usize = 64;

/// Range of the first member of a new ansatz pair.
pub const NEW_ANSATZ_RANGE: (f64, f64) = (0.0, 0.1);
/// Range of the first member of a new feature-map pair.
pub const NEW_FEATURE_MAP_RANGE: (f64, f64) = (0.0, PI / 9.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthStrategy {
    /// Append `(F, U)` blocks at the end of the circuit.
    Block,
    /// Fill empty ansatz-ansatz gaps left to right.
    SeqFm,
    /// Fill empty ansatz-ansatz gaps from the middle outwards.
    IntFm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trigger {
    FixedInterval { epochs: usize },
    /// Grow when the best loss has not improved by a relative `min_improvement`
    /// within the last `patience` epochs.
    Plateau { patience: usize, min_improvement: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSchedule {
    pub trigger: Trigger,
    pub blocks_per_event: usize,
    pub max_feature_map_blocks: usize,
    pub strategy: GrowthStrategy,
}

impl GrowthSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_event == 0 {
            return Err(Error::Parameter("blocks_per_event must be at least 1".into()));
        }
        match self.trigger {
            Trigger::FixedInterval { epochs: 0 } => {
                Err(Error::Parameter("growth interval must be at least 1 epoch".into()))
            }
            Trigger::Plateau { patience: 0, .. } => {
                Err(Error::Parameter("plateau patience must be at least 1 epoch".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Audit record of one grow step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub epoch: usize,
    pub strategy: GrowthStrategy,
    pub blocks_added: usize,
    /// Block indices of the inserted blocks in the grown layout.
    pub positions: Vec<usize>,
    /// Max `|f_after - f_before|` over the probe grid.
    pub residual: f64,
}

/// Growth trigger. `history` holds the monitored losses since the last grow
/// event, oldest first.
pub fn should_grow(
    schedule: &GrowthSchedule,
    epoch: usize,
    history: &[f64],
    current_fm_blocks: usize,
) -> bool {
    if current_fm_blocks >= schedule.max_feature_map_blocks {
        return false;
    }
    match schedule.trigger {
        Trigger::FixedInterval { epochs } => epochs > 0 && epoch > 0 && epoch.is_multiple_of(epochs),
        Trigger::Plateau {
            patience,
            min_improvement,
        } => {
            if patience == 0 || history.len() <= patience {
                return false;
            }
            let split = history.len() - patience;
            let best_before = history[..split].iter().copied().fold(f64::INFINITY, f64::min);
            let best_recent = history[split..].iter().copied().fold(f64::INFINITY, f64::min);
            !(best_recent < best_before * (1.0 - min_improvement))
        }
    }
}

/// Gap fill order for `n_gaps` ansatz-ansatz gaps.
pub fn fill_order(strategy: GrowthStrategy, n_gaps: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_gaps).collect();
    if strategy == GrowthStrategy::IntFm {
        // distance from the centre in half-gap units; ties go left first
        let centre2 = n_gaps as i64 - 1;
        order.sort_by_key(|&g| ((2 * g as i64 - centre2).abs(), g));
    }
    order
}

/// Ansatz block indices and which gaps between consecutive ones are empty.
fn ansatz_gaps(model: &ReuploaderModel) -> (Vec<usize>, Vec<bool>) {
    let ansatz: Vec<usize> = model
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.role == BlockRole::Ansatz)
        .map(|(i, _)| i)
        .collect();
    let empty = ansatz.windows(2).map(|w| w[1] == w[0] + 1).collect();
    (ansatz, empty)
}

fn growth_init() -> InitSpec {
    InitSpec::IdentityPair {
        theta: NEW_ANSATZ_RANGE,
        psi: NEW_FEATURE_MAP_RANGE,
    }
}

/// Grows `model` by one event of `schedule`. Returns the new model and the
/// audit record (with `epoch` left at zero for the caller to fill in).
pub fn grow(
    model: &ReuploaderModel,
    schedule: &GrowthSchedule,
    seed: u64,
    domain: &Domain,
) -> Result<(ReuploaderModel, GrowthEvent)> {
    schedule.validate()?;
    let current = model.n_feature_map_blocks();
    if current >= schedule.max_feature_map_blocks {
        return Err(Error::Saturated(format!(
            "model already has {current} feature-map blocks (max {})",
            schedule.max_feature_map_blocks
        )));
    }
    let budget = schedule
        .blocks_per_event
        .min(schedule.max_feature_map_blocks - current);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = growth_init();
    let mut grown = model.clone();
    let mut positions = Vec::new();

    match schedule.strategy {
        GrowthStrategy::Block => {
            for _ in 0..budget {
                let unit = grown.unit.clone();
                let fm = instantiate_block(&unit.feature_map, &mut grown.params, &init, &mut rng);
                let an = instantiate_block(&unit.ansatz, &mut grown.params, &init, &mut rng);
                positions.push(grown.blocks.len());
                grown.blocks.push(fm);
                positions.push(grown.blocks.len());
                grown.blocks.push(an);
            }
        }
        GrowthStrategy::SeqFm | GrowthStrategy::IntFm => {
            let (ansatz, _) = ansatz_gaps(model);
            if ansatz.len() < 2 {
                return Err(Error::Saturated(
                    "feature-map growth needs a pre-allocated ansatz stack".into(),
                ));
            }
            let order = fill_order(schedule.strategy, ansatz.len() - 1);
            for _ in 0..budget {
                let (ansatz, empty) = ansatz_gaps(&grown);
                let Some(&gap) = order.iter().find(|&&g| empty[g]) else {
                    break;
                };
                let at = ansatz[gap] + 1;
                let unit = grown.unit.clone();
                let fm = instantiate_block(&unit.feature_map, &mut grown.params, &init, &mut rng);
                grown.blocks.insert(at, fm);
                for p in positions.iter_mut() {
                    if *p >= at {
                        *p += 1;
                    }
                }
                positions.push(at);
            }
            if positions.is_empty() {
                return Err(Error::Saturated("no empty ansatz gap remains".into()));
            }
        }
    }

    let blocks_added = match schedule.strategy {
        GrowthStrategy::Block => positions.len() / 2,
        _ => positions.len(),
    };
    let residual = verify_preservation(model, &grown, &domain.probe_grid(PROBE_POINTS))?;
    Ok((
        grown,
        GrowthEvent {
            epoch: 0,
            strategy: schedule.strategy,
            blocks_added,
            positions,
            residual,
        },
    ))
}

/// Max absolute output difference between two models over `probes`.
pub fn verify_preservation(
    before: &ReuploaderModel,
    after: &ReuploaderModel,
    probes: &[Vec<f64>],
) -> Result<f64> {
    if before.input_dim != after.input_dim {
        return Err(Error::Shape {
            expected: before.input_dim,
            actual: after.input_dim,
        });
    }
    let mut worst = 0.0f64;
    for x in probes {
        worst = worst.max((forward(after, x)? - forward(before, x)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{accessible_spectrum, build_reuploader, AnsatzStyle, Layout, RepeatUnit};
    use crate::verify::{random_model, random_stack_model};

    fn unit1() -> RepeatUnit {
        RepeatUnit::standard(1, AnsatzStyle::RyPairs, &[0])
    }

    fn schedule(strategy: GrowthStrategy, l: usize, max: usize) -> GrowthSchedule {
        GrowthSchedule {
            trigger: Trigger::FixedInterval { epochs: 100 },
            blocks_per_event: l,
            max_feature_map_blocks: max,
            strategy,
        }
    }

    fn rand_init() -> InitSpec {
        InitSpec::Uniform { theta: (0.0, PI), psi: (0.0, PI) }
    }

    fn domain() -> Domain {
        Domain::cube(1, 0.0, 2.0 * PI)
    }

    #[test]
    fn fixed_interval_trigger() {
        let s = schedule(GrowthStrategy::Block, 1, 5);
        assert!(should_grow(&s, 200, &[], 2));
        assert!(!should_grow(&s, 150, &[], 2));
        assert!(!should_grow(&s, 0, &[], 2));
        assert!(!should_grow(&s, 200, &[], 5));
    }

    #[test]
    fn plateau_trigger() {
        let mut s = schedule(GrowthStrategy::Block, 1, 5);
        s.trigger = Trigger::Plateau { patience: 50, min_improvement: 1e-3 };
        let decreasing: Vec<f64> = (0..200).map(|i| 0.99f64.powi(i)).collect();
        assert!(!should_grow(&s, 199, &decreasing, 1));
        let flat = vec![0.5; 80];
        assert!(should_grow(&s, 79, &flat, 1));
        assert!(!should_grow(&s, 79, &flat[..50], 1));
        assert!(!should_grow(&s, 79, &flat, 5));
    }

    #[test]
    fn block_growth_from_single_ansatz() {
        let layout = Layout::reuploader(1, 1, unit1(), 0);
        let m = build_reuploader(&layout, &rand_init(), 1).unwrap();
        let (g, ev) = grow(&m, &schedule(GrowthStrategy::Block, 1, 5), 3, &domain()).unwrap();
        assert_eq!(g.role_string(), "UFU");
        assert_eq!(ev.positions, vec![1, 2]);
        assert_eq!(ev.blocks_added, 1);
        assert!(ev.residual < 1e-10);
        // pre-existing parameters untouched
        assert_eq!(&g.params.theta[..m.params.theta.len()], &m.params.theta[..]);
    }

    #[test]
    fn block_growth_two_qubits_respects_max() {
        let unit = RepeatUnit::standard(2, AnsatzStyle::RyRxPairs, &[0, 1]);
        let m = build_reuploader(&Layout::reuploader(2, 2, unit, 2), &rand_init(), 5).unwrap();
        let d = Domain::cube(2, 0.0, 1.0);
        let (g, ev) = grow(&m, &schedule(GrowthStrategy::Block, 3, 4), 1, &d).unwrap();
        assert_eq!(g.n_feature_map_blocks(), 4);
        assert_eq!(ev.blocks_added, 2);
        assert!(ev.residual < 1e-10);
        assert!(matches!(
            grow(&g, &schedule(GrowthStrategy::Block, 1, 4), 1, &d),
            Err(Error::Saturated(_))
        ));
    }

    #[test]
    fn seq_fm_fills_leftmost_gap() {
        // U0 F0 U1 U2 U3
        let layout = Layout::ansatz_stack(1, 1, unit1(), 4, &[0]).unwrap();
        let m = build_reuploader(&layout, &rand_init(), 2).unwrap();
        assert_eq!(m.role_string(), "UFUUU");
        let (g, ev) = grow(&m, &schedule(GrowthStrategy::SeqFm, 1, 9), 0, &domain()).unwrap();
        assert_eq!(g.role_string(), "UFUFUU");
        assert_eq!(ev.positions, vec![3]);
        assert!(ev.residual < 1e-10);
        assert_eq!(g.params.theta, m.params.theta);
    }

    #[test]
    fn int_fm_fills_middle_out() {
        // U0 U1 F1 U2 U3
        let layout = Layout::ansatz_stack(1, 1, unit1(), 4, &[1]).unwrap();
        let m = build_reuploader(&layout, &rand_init(), 2).unwrap();
        assert_eq!(m.role_string(), "UUFUU");
        let s = schedule(GrowthStrategy::IntFm, 1, 9);
        let (g1, _) = grow(&m, &s, 0, &domain()).unwrap();
        assert_eq!(g1.role_string(), "UFUFUU");
        let (g2, _) = grow(&g1, &s, 1, &domain()).unwrap();
        assert_eq!(g2.role_string(), "UFUFUFU");
        assert!(matches!(grow(&g2, &s, 2, &domain()), Err(Error::Saturated(_))));
    }

    #[test]
    fn fill_orders() {
        assert_eq!(fill_order(GrowthStrategy::SeqFm, 4), vec![0, 1, 2, 3]);
        assert_eq!(fill_order(GrowthStrategy::IntFm, 3), vec![1, 0, 2]);
        assert_eq!(fill_order(GrowthStrategy::IntFm, 4), vec![1, 2, 0, 3]);
        assert_eq!(fill_order(GrowthStrategy::IntFm, 9), vec![4, 3, 5, 2, 6, 1, 7, 0, 8]);
    }

    #[test]
    fn fm_growth_rejects_models_without_stack() {
        let m = build_reuploader(&Layout::reuploader(1, 1, unit1(), 2), &rand_init(), 0).unwrap();
        assert!(matches!(
            grow(&m, &schedule(GrowthStrategy::SeqFm, 1, 9), 0, &domain()),
            Err(Error::Saturated(_))
        ));
    }

    #[test]
    fn verify_preservation_examples() {
        let m = build_reuploader(&Layout::reuploader(1, 1, unit1(), 2), &rand_init(), 0).unwrap();
        let probes = domain().probe_grid(PROBE_POINTS);
        assert_eq!(verify_preservation(&m, &m, &probes).unwrap(), 0.0);
        let mut p = m.clone();
        p.params.theta[0] += 0.1;
        assert!(verify_preservation(&m, &p, &probes).unwrap() > 1e-3);
    }

    #[test]
    fn random_preservation_and_spectrum_monotonicity() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..60 {
            let strategy = [GrowthStrategy::Block, GrowthStrategy::SeqFm, GrowthStrategy::IntFm][case % 3];
            let m = if strategy == GrowthStrategy::Block { random_model(&mut rng) } else { random_stack_model(&mut rng) };
            let d = Domain::cube(m.input_dim, 0.0, 2.0 * PI);
            let s = schedule(strategy, rng.random_range(1..=2), 12);
            let Ok((g, ev)) = grow(&m, &s, rng.random(), &d) else { continue };
            assert!(ev.residual < 1e-10, "{strategy:?} residual {}", ev.residual);
            if strategy != GrowthStrategy::Block {
                assert_eq!(g.params.theta, m.params.theta);
            }
            let k = |m: &ReuploaderModel| accessible_spectrum(m).ok().map(|s| s.iter().map(|o| o.k()).sum::<usize>());
            if let (Some(before), Some(after)) = (k(&m), k(&g)) {
                assert!(after > before);
            }
        }
    }
}
