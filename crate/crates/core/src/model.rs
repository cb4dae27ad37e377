//! Data-reuploading circuit structure, parameters and spectral analysis.
//!
//! A model is an ordered list of blocks that alternate between trainable
//! ansatz blocks `U(theta)` and feature-map blocks `F(x)`. Feature-map gates
//! are `RX(gamma * psi * x[d])` with `gamma = 1`, so each encoding gate has
//! generator `psi X / 2` and the model output is a Fourier series in `x`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Amplitude, RealScalar};
use crate::simulator::{self, GateKind};

/// Fixed, non-trainable generator prefactor of every encoding gate.
pub const GAMMA: f64 = 1.0;

/// Dedup tolerance for spectrum frequencies.
pub const SPECTRUM_TOL: f64 = 1e-9;

const MAX_SPECTRUM_LEN: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlockRole {
    Ansatz,
    FeatureMap,
}

/// Reference into the parameter store.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Theta(usize),
    Psi(usize),
}

/// Structure-only description of a gate, before parameters are assigned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateTemplate {
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    /// Second member of an identity pair with the preceding gate.
    #[serde(default)]
    pub pair_with_previous: bool,
}

impl GateTemplate {
    pub fn ry(target: usize) -> Self {
        Self::rotation(GateKind::Ry, target)
    }

    pub fn rx(target: usize) -> Self {
        Self::rotation(GateKind::Rx, target)
    }

    pub fn encoding(target: usize, input_dim: usize) -> Self {
        GateTemplate {
            input_dim: Some(input_dim),
            ..Self::rotation(GateKind::Rx, target)
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateTemplate {
            kind: GateKind::Cnot,
            target,
            control: Some(control),
            input_dim: None,
            pair_with_previous: false,
        }
    }

    fn rotation(kind: GateKind, target: usize) -> Self {
        GateTemplate {
            kind,
            target,
            control: None,
            input_dim: None,
            pair_with_previous: false,
        }
    }

    /// Same gate, marked as the cancelling partner of the previous one.
    pub fn paired(mut self) -> Self {
        self.pair_with_previous = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTemplate {
    pub role: BlockRole,
    pub gates: Vec<GateTemplate>,
}

/// The feature-map and ansatz templates a model grows with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatUnit {
    pub feature_map: BlockTemplate,
    pub ansatz: BlockTemplate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzStyle {
    /// `RY RY` per qubit.
    RyPairs,
    /// `RY RY RX RX` per qubit.
    RyRxPairs,
}

impl RepeatUnit {
    /// Ansatz: identity-pairable rotations on every qubit followed by CNOTs
    /// controlled on qubit 0. Feature map: an `RX` pair on every qubit,
    /// qubit `q` encoding input dimension `encoding[q]`.
    pub fn standard(n_qubits: usize, style: AnsatzStyle, encoding: &[usize]) -> Self {
        let mut ansatz = Vec::new();
        for q in 0..n_qubits {
            ansatz.push(GateTemplate::ry(q));
            ansatz.push(GateTemplate::ry(q).paired());
            if style == AnsatzStyle::RyRxPairs {
                ansatz.push(GateTemplate::rx(q));
                ansatz.push(GateTemplate::rx(q).paired());
            }
        }
        for q in 1..n_qubits {
            ansatz.push(GateTemplate::cnot(0, q));
        }
        let mut fm = Vec::new();
        for (q, &d) in encoding.iter().enumerate() {
            fm.push(GateTemplate::encoding(q, d));
            fm.push(GateTemplate::encoding(q, d).paired());
        }
        RepeatUnit {
            feature_map: BlockTemplate {
                role: BlockRole::FeatureMap,
                gates: fm,
            },
            ansatz: BlockTemplate {
                role: BlockRole::Ansatz,
                gates: ansatz,
            },
        }
    }
}

/// Circuit structure without parameter values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub n_qubits: usize,
    pub input_dim: usize,
    pub measured_qubit: usize,
    pub blocks: Vec<BlockTemplate>,
    pub unit: RepeatUnit,
}

impl Layout {
    /// `U (F U)^n_layers`.
    pub fn reuploader(n_qubits: usize, input_dim: usize, unit: RepeatUnit, n_layers: usize) -> Self {
        let mut blocks = vec![unit.ansatz.clone()];
        for _ in 0..n_layers {
            blocks.push(unit.feature_map.clone());
            blocks.push(unit.ansatz.clone());
        }
        Layout {
            n_qubits,
            input_dim,
            measured_qubit: 0,
            blocks,
            unit,
        }
    }

    /// `n_ansatz` ansatz blocks with feature maps only in the listed gaps
    /// (gap `g` sits between ansatz blocks `g` and `g + 1`).
    pub fn ansatz_stack(
        n_qubits: usize,
        input_dim: usize,
        unit: RepeatUnit,
        n_ansatz: usize,
        filled_gaps: &[usize],
    ) -> Result<Self> {
        if n_ansatz == 0 {
            return Err(Error::Layout("ansatz stack needs at least one block".into()));
        }
        if let Some(&g) = filled_gaps.iter().find(|&&g| g + 1 >= n_ansatz) {
            return Err(Error::Layout(format!(
                "gap {g} does not exist in a stack of {n_ansatz} ansatz blocks"
            )));
        }
        let mut blocks = Vec::new();
        for a in 0..n_ansatz {
            blocks.push(unit.ansatz.clone());
            if filled_gaps.contains(&a) {
                blocks.push(unit.feature_map.clone());
            }
        }
        Ok(Layout {
            n_qubits,
            input_dim,
            measured_qubit: 0,
            blocks,
            unit,
        })
    }
}

/// How initial parameter values are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InitSpec {
    /// Every slot independently uniform in its class range.
    Uniform { theta: (f64, f64), psi: (f64, f64) },
    /// Paired gates get `(a, -a)` with `a` uniform in the class range;
    /// unpaired rotations start at zero.
    IdentityPair { theta: (f64, f64), psi: (f64, f64) },
}

impl InitSpec {
    fn ranges(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            InitSpec::Uniform { theta, psi } | InitSpec::IdentityPair { theta, psi } => (theta, psi),
        }
    }
}

pub(crate) fn draw(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<Slot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<Slot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub role: BlockRole,
    pub gates: Vec<GateSpec>,
}

/// Ansatz angles `theta` and encoding frequency scales `psi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterStore {
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    #[serde(default = "default_true")]
    pub psi_trainable: bool,
}

fn default_true() -> bool {
    true
}

impl ParameterStore {
    pub fn get(&self, slot: Slot) -> f64 {
        match slot {
            Slot::Theta(i) => self.theta[i],
            Slot::Psi(i) => self.psi[i],
        }
    }

    pub fn set(&mut self, slot: Slot, value: f64) {
        match slot {
            Slot::Theta(i) => self.theta[i] = value,
            Slot::Psi(i) => self.psi[i] = value,
        }
    }

    /// Trainable slots in optimizer order: all theta, then psi when trainable.
    pub fn trainable_slots(&self) -> Vec<Slot> {
        let mut out: Vec<Slot> = (0..self.theta.len()).map(Slot::Theta).collect();
        if self.psi_trainable {
            out.extend((0..self.psi.len()).map(Slot::Psi));
        }
        out
    }

    pub fn trainable_len(&self) -> usize {
        self.theta.len() + if self.psi_trainable { self.psi.len() } else { 0 }
    }

    /// Position of `slot` in the trainable vector, if it is trainable.
    pub fn trainable_index(&self, slot: Slot) -> Option<usize> {
        match slot {
            Slot::Theta(i) => Some(i),
            Slot::Psi(i) if self.psi_trainable => Some(self.theta.len() + i),
            Slot::Psi(_) => None,
        }
    }

    pub fn trainable_values(&self) -> Vec<f64> {
        let mut out = self.theta.clone();
        if self.psi_trainable {
            out.extend_from_slice(&self.psi);
        }
        out
    }

    pub fn set_trainable_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.trainable_len() {
            return Err(Error::Shape {
                expected: self.trainable_len(),
                actual: values.len(),
            });
        }
        let n = self.theta.len();
        self.theta.copy_from_slice(&values[..n]);
        if self.psi_trainable {
            self.psi.copy_from_slice(&values[n..]);
        }
        Ok(())
    }
}

/// Axis-aligned box of inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn cube(dims: usize, lo: f64, hi: f64) -> Self {
        Domain {
            bounds: vec![(lo, hi); dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    /// Tensor grid with `n` uniformly spaced points (endpoints included) per dimension.
    pub fn probe_grid(&self, n: usize) -> Vec<Vec<f64>> {
        let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
            if n <= 1 {
                return vec![lo];
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
        for b in &self.bounds {
            let pts = axis(b);
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    pts.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        grid
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds.iter().map(|&b| draw(rng, b)).collect()
    }
}

/// A compiled data-reuploading circuit with bound parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReuploaderModel {
    pub n_qubits: usize,
    pub input_dim: usize,
    pub measured_qubit: usize,
    pub blocks: Vec<BlockSpec>,
    pub params: ParameterStore,
    pub unit: RepeatUnit,
}

fn validate_template(
    block: &BlockTemplate,
    n_qubits: usize,
    input_dim: usize,
    check_unit: &str,
) -> Result<()> {
    let err = |msg: String| Err(Error::Layout(format!("{check_unit}: {msg}")));
    for (i, g) in block.gates.iter().enumerate() {
        if g.target >= n_qubits {
            return err(format!("gate {i} targets qubit {} of {n_qubits}", g.target));
        }
        match g.kind {
            GateKind::Cnot => {
                let Some(c) = g.control else {
                    return err(format!("CNOT gate {i} has no control"));
                };
                if c >= n_qubits || c == g.target {
                    return err(format!("CNOT gate {i} has invalid control {c}"));
                }
                if g.pair_with_previous || g.input_dim.is_some() {
                    return err(format!("CNOT gate {i} cannot be paired or encode input"));
                }
            }
            GateKind::Rx | GateKind::Ry => {
                if g.control.is_some() {
                    return err(format!("rotation gate {i} has a control qubit"));
                }
            }
        }
        match block.role {
            BlockRole::FeatureMap => {
                if g.kind != GateKind::Rx {
                    return err(format!("feature-map gate {i} must be RX"));
                }
                match g.input_dim {
                    None => return err(format!("feature-map gate {i} has no input dimension")),
                    Some(d) if d >= input_dim => {
                        return err(format!(
                            "feature-map gate {i} encodes input dimension {d} but the model has {input_dim}"
                        ))
                    }
                    _ => {}
                }
            }
            BlockRole::Ansatz => {
                if g.input_dim.is_some() {
                    return err(format!("ansatz gate {i} encodes input"));
                }
            }
        }
        if g.pair_with_previous {
            let prev = i.checked_sub(1).map(|p| &block.gates[p]);
            match prev {
                Some(p)
                    if p.kind == g.kind
                        && p.target == g.target
                        && p.input_dim == g.input_dim
                        && !p.pair_with_previous => {}
                _ => return err(format!("gate {i} is paired but has no matching predecessor")),
            }
        }
    }
    Ok(())
}

/// Appends the gates of `template` to a model, allocating fresh slots.
pub(crate) fn instantiate_block(
    template: &BlockTemplate,
    params: &mut ParameterStore,
    init: &InitSpec,
    rng: &mut impl Rng,
) -> BlockSpec {
    let (theta_range, psi_range) = init.ranges();
    let identity = matches!(init, InitSpec::IdentityPair { .. });
    let mut gates: Vec<GateSpec> = Vec::with_capacity(template.gates.len());
    for (i, g) in template.gates.iter().enumerate() {
        let mut spec = GateSpec {
            kind: g.kind,
            target: g.target,
            control: g.control,
            slot: None,
            partner: None,
            input_dim: g.input_dim,
        };
        if g.kind != GateKind::Cnot {
            let (slot, range) = match template.role {
                BlockRole::Ansatz => {
                    params.theta.push(0.0);
                    (Slot::Theta(params.theta.len() - 1), theta_range)
                }
                BlockRole::FeatureMap => {
                    params.psi.push(0.0);
                    (Slot::Psi(params.psi.len() - 1), psi_range)
                }
            };
            let next_paired = template
                .gates
                .get(i + 1)
                .is_some_and(|n| n.pair_with_previous);
            let value = if !identity {
                draw(rng, range)
            } else if g.pair_with_previous {
                let first = gates[i - 1].slot.expect("paired predecessor has a slot");
                gates[i - 1].partner = Some(slot);
                spec.partner = Some(first);
                -params.get(first)
            } else if next_paired {
                draw(rng, range)
            } else {
                0.0
            };
            if !identity && g.pair_with_previous {
                let first = gates[i - 1].slot.expect("paired predecessor has a slot");
                gates[i - 1].partner = Some(slot);
                spec.partner = Some(first);
            }
            params.set(slot, value);
            spec.slot = Some(slot);
        }
        gates.push(spec);
    }
    BlockSpec {
        role: template.role,
        gates,
    }
}

/// Builds a model from a layout. Deterministic for a fixed seed.
pub fn build_reuploader(layout: &Layout, init: &InitSpec, seed: u64) -> Result<ReuploaderModel> {
    let n = layout.n_qubits;
    if n == 0 || n > simulator::MAX_QUBITS {
        return Err(Error::Size(format!("n_qubits must be in 1..={}", simulator::MAX_QUBITS)));
    }
    if layout.blocks.is_empty() {
        return Err(Error::Layout("layout has no blocks".into()));
    }
    if layout.blocks[0].role != BlockRole::Ansatz {
        return Err(Error::Layout("layout must begin with an ansatz block".into()));
    }
    if layout.measured_qubit >= n {
        return Err(Error::Layout(format!(
            "measured qubit {} out of range",
            layout.measured_qubit
        )));
    }
    for (b, block) in layout.blocks.iter().enumerate() {
        validate_template(block, n, layout.input_dim, &format!("block {b}"))?;
    }
    if layout.unit.feature_map.role != BlockRole::FeatureMap
        || layout.unit.ansatz.role != BlockRole::Ansatz
    {
        return Err(Error::Layout("repeat unit roles are swapped".into()));
    }
    validate_template(&layout.unit.feature_map, n, layout.input_dim, "unit feature map")?;
    validate_template(&layout.unit.ansatz, n, layout.input_dim, "unit ansatz")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterStore {
        theta: Vec::new(),
        psi: Vec::new(),
        psi_trainable: true,
    };
    let blocks = layout
        .blocks
        .iter()
        .map(|t| instantiate_block(t, &mut params, init, &mut rng))
        .collect();
    Ok(ReuploaderModel {
        n_qubits: n,
        input_dim: layout.input_dim,
        measured_qubit: layout.measured_qubit,
        blocks,
        params,
        unit: layout.unit.clone(),
    })
}

/// Where a compiled gate takes its angle from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum AngleSource {
    Fixed,
    Theta(usize),
    /// `GAMMA * psi[slot] * x[dim]`.
    Encoding { slot: usize, dim: usize },
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CompiledGate {
    pub kind: GateKind,
    pub target: usize,
    pub control: usize,
    pub source: AngleSource,
}

impl ReuploaderModel {
    pub fn gates(&self) -> impl Iterator<Item = &GateSpec> {
        self.blocks.iter().flat_map(|b| b.gates.iter())
    }

    pub fn n_feature_map_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.role == BlockRole::FeatureMap).count()
    }

    pub fn n_ansatz_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.role == BlockRole::Ansatz).count()
    }

    /// Block roles in order, e.g. for logging layouts.
    pub fn role_string(&self) -> String {
        self.blocks
            .iter()
            .map(|b| match b.role {
                BlockRole::Ansatz => 'U',
                BlockRole::FeatureMap => 'F',
            })
            .collect()
    }

    pub(crate) fn compile(&self) -> Vec<CompiledGate> {
        self.gates()
            .map(|g| CompiledGate {
                kind: g.kind,
                target: g.target,
                control: g.control.unwrap_or(0),
                source: match (g.slot, g.input_dim) {
                    (None, _) => AngleSource::Fixed,
                    (Some(Slot::Theta(i)), _) => AngleSource::Theta(i),
                    (Some(Slot::Psi(i)), Some(d)) => AngleSource::Encoding { slot: i, dim: d },
                    (Some(Slot::Psi(_)), None) => AngleSource::Fixed,
                },
            })
            .collect()
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Gate angles for input `x`, one per gate (zero for CNOTs).
    pub(crate) fn angles(&self, program: &[CompiledGate], x: &[f64]) -> Vec<f64> {
        program
            .iter()
            .map(|g| match g.source {
                AngleSource::Fixed => 0.0,
                AngleSource::Theta(i) => self.params.theta[i],
                AngleSource::Encoding { slot, dim } => GAMMA * self.params.psi[slot] * x[dim],
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Layout(format!("invalid model JSON: {e}")))
    }
}

/// Runs the compiled program on `|0..0>` with the given gate angles.
pub(crate) fn run_program<A: Amplitude>(
    n_qubits: usize,
    program: &[CompiledGate],
    angles: &[A::Real],
) -> Vec<A> {
    let mut amps = vec![A::zero(); 1 << n_qubits];
    amps[0] = A::one();
    for (g, &a) in program.iter().zip(angles) {
        apply_compiled(&mut amps, g, a);
    }
    amps
}

#[inline]
pub(crate) fn apply_compiled<A: Amplitude>(amps: &mut [A], g: &CompiledGate, angle: A::Real) {
    match g.kind {
        GateKind::Rx => {
            let (c, s) = angle.half_cos_sin();
            simulator::apply_rx(amps, g.target, c, s);
        }
        GateKind::Ry => {
            let (c, s) = angle.half_cos_sin();
            simulator::apply_ry(amps, g.target, c, s);
        }
        GateKind::Cnot => simulator::apply_cnot(amps, g.control, g.target),
    }
}

/// Evaluates a circuit with explicit per-gate angles.
pub(crate) fn forward_angles(model: &ReuploaderModel, program: &[CompiledGate], angles: &[f64]) -> f64 {
    let amps: Vec<Complex64> = run_program(model.n_qubits, program, angles);
    simulator::expectation_z(&amps, model.measured_qubit)
}

/// `<Z_measured>` of the circuit applied to `|0..0>` at input `x`.
pub fn forward(model: &ReuploaderModel, x: &[f64]) -> Result<f64> {
    model.check_input(x)?;
    let program = model.compile();
    let angles = model.angles(&program, x);
    Ok(forward_angles(model, &program, &angles))
}

/// Sorted, deduplicated set of accessible frequencies along one input dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSet {
    pub frequencies: Vec<f64>,
}

impl OmegaSet {
    pub fn k(&self) -> usize {
        self.frequencies.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.frequencies.iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    pub fn contains(&self, w: f64) -> bool {
        self.frequencies.iter().any(|f| (f - w).abs() <= SPECTRUM_TOL)
    }

    /// True when every frequency is an integer and they form a contiguous range.
    fn integer_range(&self) -> Option<(i64, i64)> {
        let ints: Vec<i64> = self
            .frequencies
            .iter()
            .map(|f| {
                let r = f.round();
                ((f - r).abs() <= SPECTRUM_TOL).then_some(r as i64)
            })
            .collect::<Option<_>>()?;
        let (lo, hi) = (*ints.first()?, *ints.last()?);
        (ints.len() as i64 == hi - lo + 1).then_some((lo, hi))
    }
}

impl fmt::Display for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.integer_range() {
            Some((lo, hi)) if lo != hi => write!(f, "Ω = {{{lo}..{hi}}}, K = {}", self.k()),
            _ => {
                let items: Vec<String> = self.frequencies.iter().map(|w| format!("{w}")).collect();
                write!(f, "Ω = {{{}}}, K = {}", items.join(", "), self.k())
            }
        }
    }
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for w in v {
        match out.last() {
            Some(&last) if (w - last).abs() <= SPECTRUM_TOL => {}
            _ => out.push(w),
        }
    }
    out
}

/// Accessible frequencies per input dimension.
///
/// Every encoding gate `exp(-i psi x X / 2)` contributes eigenvalues
/// `{-psi/2, psi/2}` on its own generator register, so the frequency set is
/// the Minkowski sum of the per-gate gap sets `{-psi, 0, psi}`. This is the
/// set of eigenvalue gaps of the summed generator over all repetitions, and
/// it stays valid after training drives paired gates apart.
pub fn accessible_spectrum(model: &ReuploaderModel) -> Result<Vec<OmegaSet>> {
    let mut per_dim: Vec<Vec<f64>> = vec![Vec::new(); model.input_dim];
    for g in model.gates() {
        if let (Some(Slot::Psi(i)), Some(d)) = (g.slot, g.input_dim) {
            per_dim[d].push(GAMMA * model.params.psi[i]);
        }
    }
    if per_dim.iter().all(|v| v.is_empty()) {
        return Err(Error::EmptySpectrum);
    }
    per_dim
        .into_iter()
        .map(|scales| {
            let mut set = vec![0.0];
            for w in scales {
                let next: Vec<f64> = set.iter().flat_map(|&s| [s - w, s, s + w]).collect();
                set = dedup_sorted(next);
                if set.len() > MAX_SPECTRUM_LEN {
                    return Err(Error::SpectrumTooLarge(set.len()));
                }
            }
            Ok(OmegaSet { frequencies: set })
        })
        .collect()
}

/// Empirical Fourier coefficients of `forward` along input dimension `dim`.
///
/// Samples `grid_points` uniform points on `[0, 2 pi)` with the other inputs
/// taken from `fixed`, and returns `c_k` for `|k| <= (grid_points - 1) / 2`.
pub fn fourier_coefficients(
    model: &ReuploaderModel,
    dim: usize,
    grid_points: usize,
    fixed: &[f64],
) -> Result<BTreeMap<i64, Complex64>> {
    model.check_input(fixed)?;
    if dim >= model.input_dim {
        return Err(Error::Shape {
            expected: model.input_dim,
            actual: dim + 1,
        });
    }
    for g in model.gates() {
        if let (Some(Slot::Psi(i)), Some(d)) = (g.slot, g.input_dim) {
            let w = GAMMA * model.params.psi[i];
            if d == dim && (w - w.round()).abs() > SPECTRUM_TOL {
                return Err(Error::NonIntegerFrequency(w));
            }
        }
    }
    let max_frequency = accessible_spectrum(model)?[dim].max_abs();
    let required = 2 * max_frequency.round() as usize + 1;
    if grid_points < required {
        return Err(Error::Aliasing {
            grid_points,
            max_frequency,
            required,
        });
    }

    let program = model.compile();
    let n = grid_points;
    let mut x = fixed.to_vec();
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            x[dim] = std::f64::consts::TAU * j as f64 / n as f64;
            forward_angles(model, &program, &model.angles(&program, &x))
        })
        .collect();
    let half = ((n - 1) / 2) as i64;
    Ok((-half..=half)
        .map(|k| {
            let c: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &f)| {
                    let phase = -std::f64::consts::TAU * (k * j as i64).rem_euclid(n as i64) as f64
                        / n as f64;
                    Complex64::from_polar(f, phase)
                })
                .sum();
            (k, c / n as f64)
        })
        .collect())
}
