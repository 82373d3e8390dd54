use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{adjoint2, adjoint4, prep_unitary, Mat2, Mat4, Matrix};
use crate::sim::circuit::Circuit;
use crate::sim::fixed::decode_pair;
use crate::sim::gate::{Direction, Gate, GateKind, OracleId};
use crate::sim::oracle::{Bindings, ClassicalFunction, OracleAction};

/// Nesting limit for circuit-backed oracles calling other oracles.
pub const MAX_ORACLE_NESTING: usize = 16;

/// Primitive operations a simulator must provide. Register values passed to
/// callbacks read the listed qubits most-significant first.
pub trait Backend {
    fn num_qubits(&self) -> usize;
    fn apply_1q(&mut self, q: usize, m: &Mat2) -> Result<()>;
    fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) -> Result<()>;
    fn apply_dense(&mut self, qubits: &[usize], m: &Matrix) -> Result<()>;
    fn apply_mcx(&mut self, target: usize, controls: &[usize]) -> Result<()>;
    fn apply_fanout(&mut self, source: usize, outputs: &[usize]) -> Result<()>;
    /// Negates the amplitude of basis states whose `qubits` read `pattern`.
    fn apply_reflection(&mut self, qubits: &[usize], pattern: &[bool]) -> Result<()>;
    fn apply_xor_function(
        &mut self,
        inputs: &[usize],
        outputs: &[usize],
        f: &dyn ClassicalFunction,
    ) -> Result<()>;
    /// Applies `select(value of controls)` to `target`.
    fn apply_selected(
        &mut self,
        controls: &[usize],
        target: usize,
        select: &dyn Fn(u128) -> Mat2,
    ) -> Result<()>;
}

/// Oracle calls executed, per oracle id, including calls made inside
/// circuit-backed oracles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryLog {
    calls: BTreeMap<OracleId, (u64, u64)>,
}

impl QueryLog {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, id: &OracleId, dir: Direction) {
        let e = self.calls.entry(id.clone()).or_insert((0, 0));
        match dir {
            Direction::Forward => e.0 += 1,
            Direction::Backward => e.1 += 1,
        }
    }

    /// `(forward, backward)` counts for one oracle.
    pub fn get(&self, id: &OracleId) -> (u64, u64) {
        self.calls.get(id).copied().unwrap_or((0, 0))
    }

    pub fn total(&self) -> u64 {
        self.calls.values().map(|(f, b)| f + b).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OracleId, &(u64, u64))> {
        self.calls.iter()
    }
}

fn check_targets(gate: &Gate, num_qubits: usize) -> Result<()> {
    for &q in &gate.targets {
        if q >= num_qubits {
            return Err(Error::TargetOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
    }
    Ok(())
}

/// Applies `gate` (or its adjoint) to `state`, resolving oracle calls in `bindings`.
pub fn apply_gate_to<B: Backend + ?Sized>(
    state: &mut B,
    gate: &Gate,
    adjoint: bool,
    bindings: &Bindings,
    log: &mut QueryLog,
) -> Result<()> {
    apply_nested(state, gate, adjoint, bindings, log, 0)
}

fn apply_nested<B: Backend + ?Sized>(
    state: &mut B,
    gate: &Gate,
    adjoint: bool,
    bindings: &Bindings,
    log: &mut QueryLog,
    nesting: usize,
) -> Result<()> {
    check_targets(gate, state.num_qubits())?;
    let t = &gate.targets;
    match &gate.kind {
        GateKind::OneQubit(m) => {
            if adjoint {
                state.apply_1q(t[0], &adjoint2(m))
            } else {
                state.apply_1q(t[0], m)
            }
        }
        GateKind::TwoQubit(m) => {
            if adjoint {
                state.apply_2q(t[0], t[1], &adjoint4(m))
            } else {
                state.apply_2q(t[0], t[1], m)
            }
        }
        GateKind::Toffoli => state.apply_mcx(t[0], &t[1..]),
        GateKind::Fanout => state.apply_fanout(t[0], &t[1..]),
        GateKind::BasisReflection(p) => state.apply_reflection(t, p),
        GateKind::PrepFromRegister {
            precision_bits,
            adjoint: adj,
        } => {
            let b = *precision_bits;
            let flip = adjoint ^ *adj;
            let (reg, target) = t.split_at(t.len() - 1);
            state.apply_selected(reg, target[0], &|v| {
                let (b0, b1) = decode_pair(v, b);
                let u = prep_unitary(b0, b1);
                if flip {
                    adjoint2(&u)
                } else {
                    u
                }
            })
        }
        GateKind::OracleCall { direction, oracle } => {
            let dir = if adjoint {
                direction.flipped()
            } else {
                *direction
            };
            log.record(oracle, dir);
            let action = bindings.get(oracle)?;
            if action.width() != t.len() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "oracle `{oracle}` acts on {} qubits but the call has {} targets",
                    action.width(),
                    t.len()
                )));
            }
            match action {
                OracleAction::Unitary(m) => {
                    if dir == Direction::Backward {
                        state.apply_dense(t, &m.adjoint())
                    } else {
                        state.apply_dense(t, m)
                    }
                }
                OracleAction::Classical(f) => {
                    let (inp, out) = t.split_at(f.input_bits());
                    state.apply_xor_function(inp, out, f.as_ref())
                }
                OracleAction::Circuit(c) => {
                    if nesting >= MAX_ORACLE_NESTING {
                        return Err(Error::MalformedOracle(alloc::format!(
                            "oracle `{oracle}` nests deeper than {MAX_ORACLE_NESTING} levels"
                        )));
                    }
                    apply_mapped(
                        state,
                        c,
                        t,
                        dir == Direction::Backward,
                        bindings,
                        log,
                        nesting + 1,
                    )
                }
            }
        }
    }
}

fn apply_mapped<B: Backend + ?Sized>(
    state: &mut B,
    circuit: &Circuit,
    map: &[usize],
    adjoint: bool,
    bindings: &Bindings,
    log: &mut QueryLog,
    nesting: usize,
) -> Result<()> {
    let mut gates: Vec<&Gate> = circuit.gates().collect();
    if adjoint {
        gates.reverse();
    }
    for i in causal_order(&gates, circuit.num_qubits()) {
        let g = gates[i];
        let mapped = Gate {
            kind: g.kind.clone(),
            targets: g.targets.iter().map(|&q| map[q]).collect(),
        };
        apply_nested(state, &mapped, adjoint, bindings, log, nesting)?;
    }
    Ok(())
}

fn monomial<const N: usize>(m: &[[crate::linalg::C64; N]; N]) -> bool {
    m.iter()
        .all(|r| r.iter().filter(|z| z.norm_sqr() > 1e-28).count() <= 1)
}

/// Whether `g` can map a basis state to a superposition.
fn branches(g: &Gate) -> bool {
    match &g.kind {
        GateKind::OneQubit(m) => !monomial(m),
        GateKind::TwoQubit(m) => !monomial(m),
        GateKind::Toffoli | GateKind::Fanout | GateKind::BasisReflection(_) => false,
        GateKind::OracleCall { .. } | GateKind::PrepFromRegister { .. } => true,
    }
}

/// A topological order of `gates` (given in a valid order) chosen to keep
/// sparse states small. Gates that cannot branch run as soon as they are
/// ready. Branching gates wait, and the deepest one (longest dependency
/// chain, earliest readied on ties) goes next, so a gadget that passes
/// through a superposition tends to be closed before a shallower one is
/// opened. Gates that commute give the same state in any order, so this
/// matches layer order.
pub fn causal_order(gates: &[&Gate], num_qubits: usize) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let mut offset = Vec::with_capacity(gates.len() + 1);
    offset.push(0);
    for g in gates {
        offset.push(offset.last().unwrap() + g.targets.len());
    }
    let mut next = vec![NONE; *offset.last().unwrap()];
    let mut indegree = vec![0u32; gates.len()];
    let mut last = vec![NONE; num_qubits];
    let mut level = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        for &q in &g.targets {
            let p = last[q];
            if p != NONE {
                level[i] = level[i].max(level[p] + 1);
                indegree[i] += 1;
                let slot = gates[p].targets.iter().position(|&t| t == q).unwrap();
                next[offset[p] + slot] = i;
            }
            last[q] = i;
        }
    }
    let branching: Vec<bool> = gates.iter().map(|g| branches(g)).collect();
    let roots = (0..gates.len()).filter(|&i| indegree[i] == 0);
    let (mut waiting, mut plain): (Vec<usize>, Vec<usize>) = roots.partition(|&i| branching[i]);
    plain.reverse();
    let mut order = Vec::with_capacity(gates.len());
    loop {
        let i = if let Some(i) = plain.pop() {
            i
        } else if let Some(k) = (0..waiting.len()).rev().max_by_key(|&k| level[waiting[k]]) {
            waiting.remove(k)
        } else {
            break;
        };
        order.push(i);
        for s in next[offset[i]..offset[i + 1]].iter().rev().copied() {
            if s != NONE {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    if branching[s] {
                        waiting.push(s);
                    } else {
                        plain.push(s);
                    }
                }
            }
        }
    }
    debug_assert_eq!(order.len(), gates.len());
    order
}

/// Applies a range of layers of `circuit` in order.
pub fn run_layers<B: Backend + ?Sized>(
    state: &mut B,
    circuit: &Circuit,
    layers: core::ops::Range<usize>,
    bindings: &Bindings,
    log: &mut QueryLog,
) -> Result<()> {
    if circuit.num_qubits() != state.num_qubits() {
        return Err(Error::QubitCountMismatch {
            expected: circuit.num_qubits(),
            found: state.num_qubits(),
        });
    }
    let gates: Vec<&Gate> = circuit.layers()[layers].iter().flatten().collect();
    for i in causal_order(&gates, circuit.num_qubits()) {
        apply_gate_to(state, gates[i], false, bindings, log)?;
    }
    Ok(())
}

/// Applies the whole circuit and returns the oracle calls made.
pub fn run_circuit<B: Backend + ?Sized>(
    state: &mut B,
    circuit: &Circuit,
    bindings: &Bindings,
) -> Result<QueryLog> {
    let mut log = QueryLog::new();
    run_layers(state, circuit, 0..circuit.depth(), bindings, &mut log)?;
    Ok(log)
}

/// Value of `qubits` in basis index `index` of an `n`-qubit register.
#[inline]
pub fn register_value(index: usize, n: usize, qubits: &[usize]) -> u128 {
    qubits.iter().fold(0u128, |acc, &q| {
        (acc << 1) | ((index >> (n - 1 - q)) & 1) as u128
    })
}
