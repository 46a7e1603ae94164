//! Native-gate circuits and the Trotter-step compiler.
//!
//! The gate set is the hardware one: virtual `RotateZ` (zero duration),
//! `SqrtX`, `PauliX`, `CNOT` and explicit `Idle` blocks. Durations are kept
//! in microseconds internally; the JSON interchange format uses
//! nanosecond-suffixed field names.
//!
//! A Trotter step compiles each Hamiltonian term per the hardware
//! decompositions:
//!
//! * local field `-eps/2 Z` as `RotateZ(-eps tau)`,
//! * `g Z(x)Z` as `CNOT . RotateZ(2 g tau) on target . CNOT`,
//! * `v X(x)X` as `CNOT . [Rz(pi/2) SqrtX Rz(2 v tau - pi) SqrtX Rz(pi/2)]
//!   on control . CNOT`,
//!
//! followed by an optional shared `Idle` block and, when symmetrizing,
//! `PauliX` flips of the system qubits. Odd-parity steps negate the
//! system-field RotateZ angles so the flipped frame realizes the same
//! simulated Hamiltonian.
//!
//! All printed rotation angles follow the `angle = parameter * tau`
//! convention; the ZZ inner angle is `2 g tau` and the XX inner angle
//! `2 v tau - pi`, fixed by the unitary-equivalence tests rather than by
//! figure labels.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{QubitLayout, SpinModel};
use crate::operators::pauli::pauli_x;
use crate::operators::{embed_operator, C64, ONE};

/// Duration of SqrtX / PauliX gates in microseconds (35.5 ns).
pub const SINGLE_QUBIT_GATE_US: f64 = 0.0355;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    RotateZ { angle: f64 },
    SqrtX,
    PauliX,
    Cnot,
    Idle,
}

/// One native gate. `qubits` are physical device indices; for `Cnot` the
/// order is `[control, target]`, for `Idle` the gate may span any number of
/// qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    #[serde(flatten)]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Physical duration in microseconds.
    pub duration_us: f64,
}

impl Gate {
    pub fn rotate_z(qubit: usize, angle: f64) -> Self {
        Gate { kind: GateKind::RotateZ { angle }, qubits: vec![qubit], duration_us: 0.0 }
    }

    pub fn sqrt_x(qubit: usize) -> Self {
        Gate { kind: GateKind::SqrtX, qubits: vec![qubit], duration_us: SINGLE_QUBIT_GATE_US }
    }

    pub fn pauli_x(qubit: usize) -> Self {
        Gate { kind: GateKind::PauliX, qubits: vec![qubit], duration_us: SINGLE_QUBIT_GATE_US }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubits: vec![control, target], duration_us: 0.0 }
    }

    pub fn idle(qubits: Vec<usize>, duration_us: f64) -> Self {
        Gate { kind: GateKind::Idle, qubits, duration_us }
    }

    /// Dense unitary on the gate's own qubits (identity for `Idle`).
    pub fn local_unitary(&self) -> CMat {
        match self.kind {
            GateKind::RotateZ { angle } => rz_matrix(angle),
            GateKind::SqrtX => sqrt_x_matrix(),
            GateKind::PauliX => pauli_x(),
            GateKind::Cnot => cnot_matrix(),
            GateKind::Idle => CMat::eye(1 << self.qubits.len()),
        }
    }
}

pub fn rz_matrix(angle: f64) -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 0]] = C64::from_polar(1.0, -angle / 2.0);
    m[[1, 1]] = C64::from_polar(1.0, angle / 2.0);
    m
}

pub fn sqrt_x_matrix() -> CMat {
    let a = C64::new(0.5, 0.5);
    let b = C64::new(0.5, -0.5);
    let mut m = CMat::zeros((2, 2));
    m[[0, 0]] = a;
    m[[0, 1]] = b;
    m[[1, 0]] = b;
    m[[1, 1]] = a;
    m
}

pub fn cnot_matrix() -> CMat {
    let mut m = CMat::zeros((4, 4));
    m[[0, 0]] = ONE;
    m[[1, 1]] = ONE;
    m[[2, 3]] = ONE;
    m[[3, 2]] = ONE;
    m
}

/// An ordered native-gate program over a fixed set of physical qubits.
///
/// `qubits` lists the physical indices in logical order (system spins first,
/// then bath spins); all dense representations use that ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: Vec<usize>,
    pub gates: Vec<Gate>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(qubits: Vec<usize>) -> Self {
        Circuit { qubits, gates: Vec::new(), metadata: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Logical position of a physical qubit.
    pub fn logical_index(&self, physical: usize) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&q| q == physical)
            .ok_or_else(|| Error::Validation(format!("physical qubit {physical} not in circuit")))
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            for &q in &g.qubits {
                self.logical_index(q)?;
            }
            if let GateKind::Cnot = g.kind {
                if g.qubits.len() != 2 || g.qubits[0] == g.qubits[1] {
                    return Err(Error::Validation(format!(
                        "CNOT must address two distinct qubits, got {:?}",
                        g.qubits
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total physical duration in microseconds.
    pub fn duration_us(&self) -> f64 {
        self.gates.iter().map(|g| g.duration_us).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CircuitFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: CircuitFile = serde_json::from_str(s)?;
        let c = f.into_circuit()?;
        c.validate()?;
        Ok(c)
    }
}

/// Serialized circuit: ordered gate records with explicit nanosecond
/// durations.
#[derive(Debug, Serialize, Deserialize)]
struct CircuitFile {
    qubits: Vec<usize>,
    gates: Vec<GateRecord>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GateRecord {
    kind: String,
    qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    duration_ns: f64,
}

impl From<&Circuit> for CircuitFile {
    fn from(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| {
                let (kind, angle) = match g.kind {
                    GateKind::RotateZ { angle } => ("rotate_z", Some(angle)),
                    GateKind::SqrtX => ("sqrt_x", None),
                    GateKind::PauliX => ("pauli_x", None),
                    GateKind::Cnot => ("cnot", None),
                    GateKind::Idle => ("idle", None),
                };
                GateRecord {
                    kind: kind.to_string(),
                    qubits: g.qubits.clone(),
                    angle,
                    duration_ns: g.duration_us * 1000.0,
                }
            })
            .collect();
        CircuitFile { qubits: c.qubits.clone(), gates, metadata: c.metadata.clone() }
    }
}

impl CircuitFile {
    fn into_circuit(self) -> Result<Circuit> {
        let mut c = Circuit::new(self.qubits);
        c.metadata = self.metadata;
        for r in self.gates {
            let kind = match r.kind.as_str() {
                "rotate_z" => GateKind::RotateZ {
                    angle: r
                        .angle
                        .ok_or_else(|| Error::Config("rotate_z gate without angle".into()))?,
                },
                "sqrt_x" => GateKind::SqrtX,
                "pauli_x" => GateKind::PauliX,
                "cnot" => GateKind::Cnot,
                "idle" => GateKind::Idle,
                other => return Err(Error::Config(format!("unknown gate kind '{other}'"))),
            };
            c.push(Gate { kind, qubits: r.qubits, duration_us: r.duration_ns / 1000.0 });
        }
        Ok(c)
    }
}

/// Step parity for the symmetrization protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Compilation plan for the Trotterized evolution.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    pub model: SpinModel,
    pub layout: QubitLayout,
    /// Simulated time per Trotter step.
    pub tau: f64,
    /// Additional idle block appended to each step, microseconds.
    pub extra_idle_us: f64,
    /// Surround every second step with system-qubit X flips.
    pub symmetrize: bool,
    /// Number of Trotter steps.
    pub steps: usize,
}

impl TrotterPlan {
    pub fn new(model: SpinModel, layout: QubitLayout) -> Result<Self> {
        layout.validate(&model)?;
        Ok(TrotterPlan { model, layout, tau: 1.0, extra_idle_us: 0.0, symmetrize: true, steps: 1 })
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate(&self.model)?;
        if self.tau <= 0.0 {
            return Err(Error::Validation(format!("tau must be positive, got {}", self.tau)));
        }
        if self.extra_idle_us < 0.0 {
            return Err(Error::Validation("extra idle must be nonnegative".into()));
        }
        Ok(())
    }

    /// Physical qubits in logical order (system spins first).
    pub fn physical_qubits(&self) -> Vec<usize> {
        let mut q = self.layout.system_qubits.clone();
        q.extend_from_slice(&self.layout.bath_qubits);
        q
    }
}

fn push_xx_block(c: &mut Circuit, control: usize, target: usize, v: f64, tau: f64) {
    c.push(Gate::cnot(control, target));
    c.push(Gate::rotate_z(control, std::f64::consts::FRAC_PI_2));
    c.push(Gate::sqrt_x(control));
    c.push(Gate::rotate_z(control, 2.0 * v * tau - std::f64::consts::PI));
    c.push(Gate::sqrt_x(control));
    c.push(Gate::rotate_z(control, std::f64::consts::FRAC_PI_2));
    c.push(Gate::cnot(control, target));
}

fn push_zz_block(c: &mut Circuit, control: usize, target: usize, g: f64, tau: f64) {
    c.push(Gate::cnot(control, target));
    c.push(Gate::rotate_z(target, 2.0 * g * tau));
    c.push(Gate::cnot(control, target));
}

/// Compile one Trotter step.
///
/// Order: local-field rotations (system then bath), ZZ blocks, XX blocks,
/// optional shared idle, symmetrization X flips. Odd parity negates the
/// system-field rotation angles.
pub fn trotter_step(plan: &TrotterPlan, parity: Parity) -> Result<Circuit> {
    plan.validate()?;
    let model = &plan.model;
    let layout = &plan.layout;
    let tau = plan.tau;
    let mut c = Circuit::new(plan.physical_qubits());
    c.metadata.insert(
        "parity".into(),
        match parity {
            Parity::Even => "even".into(),
            Parity::Odd => "odd".into(),
        },
    );

    let field_sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => {
            if plan.symmetrize {
                -1.0
            } else {
                1.0
            }
        }
    };
    for (i, &eps) in model.system_splittings.iter().enumerate() {
        if eps != 0.0 {
            c.push(Gate::rotate_z(layout.system_qubits[i], field_sign * (-eps * tau)));
        }
    }
    for (j, &eps) in model.bath_splittings.iter().enumerate() {
        if eps != 0.0 {
            c.push(Gate::rotate_z(layout.bath_qubits[j], -eps * tau));
        }
    }
    // ZZ blocks in descending chain order, matching the submitted circuits
    for (&(i, ip), &g) in model.system_couplings.iter().rev() {
        let (pa, pb) = (layout.system_qubits[i], layout.system_qubits[ip]);
        match layout.directed_edge(pa, pb) {
            Some((ctrl, trg)) => push_zz_block(&mut c, ctrl, trg, g, tau),
            None if g == 0.0 => {}
            None => {
                return Err(Error::Validation(format!(
                    "cannot compile ZZ coupling ({i},{ip}): no connectivity edge {pa}-{pb}"
                )))
            }
        }
    }
    for (&(i, j), &v) in &model.sb_couplings {
        let (pa, pb) = (layout.system_qubits[i], layout.bath_qubits[j]);
        match layout.directed_edge(pa, pb) {
            Some((ctrl, trg)) => push_xx_block(&mut c, ctrl, trg, v, tau),
            None if v == 0.0 => {}
            None => {
                return Err(Error::Validation(format!(
                    "cannot compile XX coupling ({i},{j}): no connectivity edge {pa}-{pb}"
                )))
            }
        }
    }
    if plan.extra_idle_us > 0.0 {
        c.push(Gate::idle(c.qubits.clone(), plan.extra_idle_us));
    }
    if plan.symmetrize {
        for &q in &layout.system_qubits {
            c.push(Gate::pauli_x(q));
        }
    }
    Ok(c)
}

/// All `m` step circuits of the plan, alternating parity when symmetrizing.
pub fn full_sequence(plan: &TrotterPlan) -> Result<Vec<Circuit>> {
    (0..plan.steps)
        .map(|k| {
            let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
            let mut c = trotter_step(plan, parity)?;
            c.metadata.insert("step".into(), k.to_string());
            Ok(c)
        })
        .collect()
}

/// Noiseless unitary of a circuit (ordered product of gate unitaries; `Idle`
/// contributes the identity), in the circuit's logical qubit order.
pub fn circuit_unitary(c: &Circuit) -> Result<CMat> {
    c.validate()?;
    let n = c.n_qubits();
    let d = 1usize << n;
    let mut u = CMat::eye(d);
    for g in &c.gates {
        if matches!(g.kind, GateKind::Idle) {
            continue;
        }
        let local = g.local_unitary();
        let logical: Vec<usize> =
            g.qubits.iter().map(|&q| c.logical_index(q)).collect::<Result<_>>()?;
        let full = embed_operator(&local, &logical, n)?;
        u = full.dot(&u);
    }
    Ok(u)
}

/// Characterization probe kinds from the single- and two-qubit noise
/// tomography experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Prepare the sigma_x eigenstate, idle, measure sigma_z.
    IdleDecay,
    /// Prepare the sigma_x eigenstate, idle, measure sigma_x.
    IdleDephase,
    /// Four SqrtX per step (identity up to global phase), measure sigma_z.
    SqrtxCycle,
    /// Two PauliX per step, measure sigma_z.
    XCycle,
    /// Two CNOTs per step, measure sigma_z on both qubits.
    CnotCycle,
}

impl ProbeKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "idle_decay" => ProbeKind::IdleDecay,
            "idle_dephase" => ProbeKind::IdleDephase,
            "sqrtx_cycle" => ProbeKind::SqrtxCycle,
            "x_cycle" => ProbeKind::XCycle,
            "cnot_cycle" => ProbeKind::CnotCycle,
            other => {
                return Err(Error::Config(format!(
                    "unknown probe kind '{other}'; available: idle_decay, idle_dephase, \
                     sqrtx_cycle, x_cycle, cnot_cycle"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProbeKind::IdleDecay => "idle_decay",
            ProbeKind::IdleDephase => "idle_dephase",
            ProbeKind::SqrtxCycle => "sqrtx_cycle",
            ProbeKind::XCycle => "x_cycle",
            ProbeKind::CnotCycle => "cnot_cycle",
        }
    }
}

/// Parameters for characterization probes.
#[derive(Debug, Clone)]
pub struct ProbeParams {
    /// Physical qubit (single-qubit probes) or [control, target] pair.
    pub qubits: Vec<usize>,
    /// Number of repetition steps.
    pub steps: usize,
    /// Idle duration per step for the idle probes, microseconds.
    pub idle_us: f64,
}

/// Preparation circuit and single-step cycle for a probe kind.
pub fn probe_prep_and_cycle(kind: ProbeKind, params: &ProbeParams) -> Result<(Circuit, Circuit)> {
    match kind {
        ProbeKind::IdleDecay | ProbeKind::IdleDephase => {
            let q = *params
                .qubits
                .first()
                .ok_or_else(|| Error::Config("idle probe needs one qubit".into()))?;
            let mut prep = Circuit::new(vec![q]);
            // |0> -> sigma_x eigenstate: SqrtX then Rz(pi/2)
            prep.push(Gate::sqrt_x(q));
            prep.push(Gate::rotate_z(q, std::f64::consts::FRAC_PI_2));
            let mut cycle = Circuit::new(vec![q]);
            cycle.push(Gate::idle(vec![q], params.idle_us));
            Ok((prep, cycle))
        }
        ProbeKind::SqrtxCycle => {
            let q = *params
                .qubits
                .first()
                .ok_or_else(|| Error::Config("sqrtx_cycle needs one qubit".into()))?;
            let prep = Circuit::new(vec![q]);
            let mut cycle = Circuit::new(vec![q]);
            for _ in 0..4 {
                cycle.push(Gate::sqrt_x(q));
            }
            Ok((prep, cycle))
        }
        ProbeKind::XCycle => {
            let q = *params
                .qubits
                .first()
                .ok_or_else(|| Error::Config("x_cycle needs one qubit".into()))?;
            let prep = Circuit::new(vec![q]);
            let mut cycle = Circuit::new(vec![q]);
            cycle.push(Gate::pauli_x(q));
            cycle.push(Gate::pauli_x(q));
            Ok((prep, cycle))
        }
        ProbeKind::CnotCycle => {
            if params.qubits.len() != 2 {
                return Err(Error::Config("cnot_cycle needs [control, target]".into()));
            }
            let (c0, t0) = (params.qubits[0], params.qubits[1]);
            let prep = Circuit::new(vec![c0, t0]);
            let mut cycle = Circuit::new(vec![c0, t0]);
            cycle.push(Gate::cnot(c0, t0));
            cycle.push(Gate::cnot(c0, t0));
            Ok((prep, cycle))
        }
    }
}

/// Characterization circuits: element `k` performs the preparation followed
/// by `k` probe cycles (k = 0..=steps). The measurement basis is recorded in
/// the metadata.
pub fn characterization_circuit(kind: ProbeKind, params: &ProbeParams) -> Result<Vec<Circuit>> {
    let (prep, cycle) = probe_prep_and_cycle(kind, params)?;
    let basis = match kind {
        ProbeKind::IdleDephase => "X",
        _ => "Z",
    };
    let mut out = Vec::with_capacity(params.steps + 1);
    for k in 0..=params.steps {
        let mut c = prep.clone();
        for _ in 0..k {
            for g in &cycle.gates {
                c.push(g.clone());
            }
        }
        c.metadata.insert("probe".into(), kind.name().into());
        c.metadata.insert("measurement_basis".into(), basis.into());
        c.metadata.insert("cycles".into(), k.to_string());
        out.push(c);
    }
    Ok(out)
}
