//! Quantum-computer-media storage.
//!
//! Each q-ensemble is a large collection of qubits in the same state, so the
//! store keeps one single-qubit density matrix per ensemble. Two-qubit gates act
//! on the product of two ensemble states and hand back the two marginals. The
//! correlation between those marginals is dropped, which is only sound if the
//! correlated pair is never brought together again: every operand is therefore
//! consumed on use, and a value needed twice must be cloned first.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::densop::{gate_cnot, DensityMatrix, Operator, RegisterIndex, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a q-ensemble. Never reused within a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnsembleId(u64);

impl EnsembleId {
    pub fn from_raw(raw: u64) -> Self {
        Self(raw)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Display for EnsembleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Fresh ensemble from the free storage, state `|0⟩⟨0|`.
    Alloc,
    /// Single-qubit rotation of a fresh ensemble to a chosen `S₁₁`.
    Prepare,
    /// Splitting an ensemble into two parts in the same state.
    Clone,
    /// A unitary or classical gate.
    Gate,
    /// Simulation-only re-encoding.
    Renormalize,
}

/// One step of the circuit trace. Serialises as
/// `{"step":k,"gate":"CNOT","in":[3,7],"out":[8,9],"physical":true}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateEvent {
    pub step: u64,
    #[serde(rename = "gate")]
    pub gate_label: String,
    #[serde(rename = "in")]
    pub inputs: Vec<EnsembleId>,
    #[serde(rename = "out")]
    pub outputs: Vec<EnsembleId>,
    pub physical: bool,
    #[serde(skip)]
    pub kind: EventKind,
}

/// Selects trace events; unset fields match everything.
#[derive(Debug, Clone, Default)]
pub struct EventFilter {
    pub kind: Option<EventKind>,
    pub label: Option<String>,
    pub physical: Option<bool>,
}

impl EventFilter {
    pub fn physical() -> Self {
        Self {
            physical: Some(true),
            ..Self::default()
        }
    }

    pub fn kind(kind: EventKind) -> Self {
        Self {
            kind: Some(kind),
            ..Self::default()
        }
    }

    pub fn label(label: impl Into<String>) -> Self {
        Self {
            label: Some(label.into()),
            ..Self::default()
        }
    }

    fn matches(&self, e: &GateEvent) -> bool {
        self.kind.is_none_or(|k| k == e.kind)
            && self.label.as_deref().is_none_or(|l| l == e.gate_label)
            && self.physical.is_none_or(|p| p == e.physical)
    }
}

#[derive(Debug, Clone)]
struct Entry<T: Scalar> {
    state: DensityMatrix<T>,
    consumed: bool,
}

/// Default floor below which a `Real4` denominator is treated as zero.
pub const DEFAULT_DEN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EnsembleStore<T: Scalar = f64> {
    ensembles: BTreeMap<EnsembleId, Entry<T>>,
    next_id: u64,
    trace: Vec<GateEvent>,
    den_floor: f64,
    op_counts: BTreeMap<&'static str, u64>,
}

impl<T: Scalar> Default for EnsembleStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> EnsembleStore<T> {
    pub fn new() -> Self {
        Self {
            ensembles: BTreeMap::new(),
            next_id: 0,
            trace: Vec::new(),
            den_floor: DEFAULT_DEN_FLOOR,
            op_counts: BTreeMap::new(),
        }
    }

    pub fn with_den_floor(den_floor: f64) -> Result<Self> {
        let mut store = Self::new();
        store.set_den_floor(den_floor)?;
        Ok(store)
    }

    pub fn den_floor(&self) -> f64 {
        self.den_floor
    }

    pub fn set_den_floor(&mut self, den_floor: f64) -> Result<()> {
        if !den_floor.is_finite() {
            return Err(Error::NonFinite(den_floor));
        }
        if den_floor < 0.0 {
            return Err(Error::OutOfRange {
                value: den_floor,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        self.den_floor = den_floor;
        Ok(())
    }

    fn insert(&mut self, state: DensityMatrix<T>) -> EnsembleId {
        debug_assert_eq!(state.n_qubits(), 1);
        let id = EnsembleId(self.next_id);
        self.next_id += 1;
        self.ensembles.insert(
            id,
            Entry {
                state,
                consumed: false,
            },
        );
        id
    }

    fn log(
        &mut self,
        kind: EventKind,
        label: &str,
        inputs: Vec<EnsembleId>,
        outputs: Vec<EnsembleId>,
    ) {
        self.trace.push(GateEvent {
            step: self.trace.len() as u64,
            gate_label: label.to_string(),
            inputs,
            outputs,
            physical: kind != EventKind::Renormalize,
            kind,
        });
    }

    fn live(&self, a: EnsembleId) -> Result<&DensityMatrix<T>> {
        match self.ensembles.get(&a) {
            None => Err(Error::UnknownEnsemble(a)),
            Some(e) if e.consumed => Err(Error::ConsumedEnsemble(a)),
            Some(e) => Ok(&e.state),
        }
    }

    fn consume(&mut self, a: EnsembleId) {
        if let Some(e) = self.ensembles.get_mut(&a) {
            e.consumed = true;
        }
    }

    /// New ensemble from the free storage, in state `diag(1, 0)`.
    pub fn fresh_zero(&mut self) -> EnsembleId {
        let id = self.insert(DensityMatrix::classical(&[false]).expect("one-qubit state"));
        self.log(EventKind::Alloc, "alloc0", vec![], vec![id]);
        id
    }

    /// New ensemble in the pure state `cos(θ/2)|0⟩ + sin(θ/2)|1⟩`,
    /// `θ = 2·asin(√p)`, so that `S₁₁ = p`.
    pub fn prepare(&mut self, p: f64) -> Result<EnsembleId> {
        if !p.is_finite() {
            return Err(Error::NonFinite(p));
        }
        self.prepare_exact(T::from_f64(p))
    }

    /// [`prepare`](Self::prepare) with a probability already in the store's scalar type.
    pub fn prepare_exact(&mut self, p: T) -> Result<EnsembleId> {
        let state = DensityMatrix::pure_qubit(p)?;
        let id = self.insert(state);
        self.log(EventKind::Prepare, "prep", vec![], vec![id]);
        Ok(id)
    }

    /// Splits off part of ensemble `a` as a new ensemble in the same state.
    /// `a` stays usable.
    pub fn clone_ensemble(&mut self, a: EnsembleId) -> Result<EnsembleId> {
        let state = self.live(a)?.clone();
        let id = self.insert(state);
        self.log(EventKind::Clone, "clone", vec![a], vec![id]);
        Ok(id)
    }

    /// Applies a one-qubit gate; consumes `a`.
    pub fn apply1<G: Operator<T> + ?Sized>(
        &mut self,
        gate: &G,
        a: EnsembleId,
    ) -> Result<EnsembleId> {
        let out = self.live(a)?.conjugate(gate, &RegisterIndex::all(1))?;
        self.consume(a);
        let id = self.insert(out);
        self.log(EventKind::Gate, gate.label(), vec![a], vec![id]);
        Ok(id)
    }

    /// Applies a two-qubit gate to the product `S(a) ⊗ S(b)` and stores both
    /// marginals of the result as new ensembles; consumes `a` and `b`.
    pub fn apply2<G: Operator<T> + ?Sized>(
        &mut self,
        gate: &G,
        a: EnsembleId,
        b: EnsembleId,
    ) -> Result<(EnsembleId, EnsembleId)> {
        if a == b {
            return Err(Error::SameOperand(a));
        }
        let joint = self.live(a)?.tensor(self.live(b)?)?;
        let out = joint.conjugate(gate, &RegisterIndex::all(2))?;
        let first = out.partial_trace(&RegisterIndex::new([0])?)?;
        let second = out.partial_trace(&RegisterIndex::new([1])?)?;
        self.consume(a);
        self.consume(b);
        let (ia, ib) = (self.insert(first), self.insert(second));
        self.log(EventKind::Gate, gate.label(), vec![a, b], vec![ia, ib]);
        Ok((ia, ib))
    }

    /// Moves `a` to the equivalent diagonal state `diag(S₀₀, S₁₁)` by a CNOT
    /// onto a fresh zero ensemble; the ancilla output is discarded.
    pub fn diagonalize(&mut self, a: EnsembleId) -> Result<EnsembleId> {
        self.live(a)?;
        let b = self.fresh_zero();
        let (out, ancilla) = self.apply2(&gate_cnot(), a, b)?;
        self.consume(ancilla);
        Ok(out)
    }

    /// Marks `a` consumed without recording an event (an output nobody reads).
    pub fn discard(&mut self, a: EnsembleId) -> Result<()> {
        self.live(a)?;
        self.consume(a);
        Ok(())
    }

    /// Inserts an ensemble in an arbitrary single-qubit state, logged as a
    /// non-physical `load` event.
    pub fn load(&mut self, state: DensityMatrix<T>) -> Result<EnsembleId> {
        Ok(self.resynthesize("load", &[], vec![state])?[0])
    }

    /// Replaces `inputs` by fresh ensembles in the given states, logged as a
    /// single non-physical event.
    pub fn resynthesize(
        &mut self,
        label: &str,
        inputs: &[EnsembleId],
        states: Vec<DensityMatrix<T>>,
    ) -> Result<Vec<EnsembleId>> {
        for &a in inputs {
            self.live(a)?;
        }
        for s in &states {
            if s.n_qubits() != 1 {
                return Err(Error::InvalidState(format!(
                    "ensemble states are single-qubit, got {} qubits",
                    s.n_qubits()
                )));
            }
        }
        for &a in inputs {
            self.consume(a);
        }
        let outputs: Vec<_> = states.into_iter().map(|s| self.insert(s)).collect();
        self.log(
            EventKind::Renormalize,
            label,
            inputs.to_vec(),
            outputs.clone(),
        );
        Ok(outputs)
    }

    /// `S₁₁` of ensemble `a`, as an `f64` in `[0, 1]`. Reading does not consume.
    pub fn r1(&self, a: EnsembleId) -> Result<f64> {
        Ok(self.p_one(a)?.to_f64().clamp(0.0, 1.0))
    }

    /// `S₁₁` of ensemble `a` in the store's scalar type.
    pub fn p_one(&self, a: EnsembleId) -> Result<T> {
        let p = self.live(a)?.p_one();
        debug_assert!(p.to_f64() >= -STRUCTURAL_TOL && p.to_f64() <= 1.0 + STRUCTURAL_TOL);
        Ok(p)
    }

    /// State of ensemble `a`, consumed or not.
    pub fn state(&self, a: EnsembleId) -> Result<&DensityMatrix<T>> {
        self.ensembles
            .get(&a)
            .map(|e| &e.state)
            .ok_or(Error::UnknownEnsemble(a))
    }

    pub fn is_consumed(&self, a: EnsembleId) -> Result<bool> {
        self.ensembles
            .get(&a)
            .map(|e| e.consumed)
            .ok_or(Error::UnknownEnsemble(a))
    }

    /// Number of ensembles ever created.
    pub fn len(&self) -> usize {
        self.ensembles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ensembles.is_empty()
    }

    pub fn trace(&self) -> &[GateEvent] {
        &self.trace
    }

    pub fn gate_count(&self, filter: &EventFilter) -> usize {
        self.trace.iter().filter(|e| filter.matches(e)).count()
    }

    /// Counts invocations of a named higher-level operation (e.g. `mul_r4`).
    pub fn record_op(&mut self, name: &'static str) {
        *self.op_counts.entry(name).or_default() += 1;
    }

    pub fn op_count(&self, name: &str) -> u64 {
        self.op_counts.get(name).copied().unwrap_or(0)
    }

    pub fn write_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        for event in &self.trace {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn trace_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_trace(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}
