use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Result;
use crate::sim::circuit::{Circuit, GateSink, Registers};
use crate::sim::gate::{Direction, Gate, GateKind, OracleId};
use crate::sim::lower::CostCache;
use crate::sim::oracle::{Bindings, OracleAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResourceReport {
    pub depth: usize,
    pub size: usize,
    pub ancillae: usize,
    pub forward_queries: usize,
    pub backward_queries: usize,
}

impl ResourceReport {
    pub fn queries(&self) -> usize {
        self.forward_queries + self.backward_queries
    }
}

/// Qubits outside the `input` and `output` registers. Circuits naming
/// neither register have no ancillae.
fn ancillae_of(num_qubits: usize, registers: &Registers) -> usize {
    let mut io = alloc::vec![false; num_qubits];
    let mut any = false;
    for name in ["input", "output"] {
        if let Some(&(s, l)) = registers.get(name) {
            any = true;
            io[s..s + l].iter_mut().for_each(|b| *b = true);
        }
    }
    if any {
        io.iter().filter(|b| !**b).count()
    } else {
        0
    }
}

fn count_direction(gate: &Gate, report: &mut ResourceReport) {
    if let GateKind::OracleCall { direction, .. } = gate.kind {
        match direction {
            Direction::Forward => report.forward_queries += 1,
            Direction::Backward => report.backward_queries += 1,
        }
    }
}

/// Counts of the circuit as written; oracle calls count one layer each.
pub fn resources(circuit: &Circuit) -> ResourceReport {
    let mut r = ResourceReport {
        depth: circuit.depth(),
        size: circuit.size(),
        ancillae: ancillae_of(circuit.num_qubits(), circuit.registers()),
        ..Default::default()
    };
    for g in circuit.gates() {
        count_direction(g, &mut r);
    }
    r
}

/// Like [`resources`], but a call to a circuit-backed oracle contributes the
/// (recursively expanded) depth and size of its body.
pub fn expanded_resources(circuit: &Circuit, bindings: &Bindings) -> Result<ResourceReport> {
    let mut r = resources(circuit);
    let (depth, size) = expanded_depth_size(circuit, bindings, 0)?;
    r.depth = depth;
    r.size = size;
    Ok(r)
}

fn expanded_depth_size(
    circuit: &Circuit,
    bindings: &Bindings,
    nesting: usize,
) -> Result<(usize, usize)> {
    if nesting > crate::sim::backend::MAX_ORACLE_NESTING {
        return Err(crate::error::Error::MalformedOracle(
            "oracle nesting too deep".to_string(),
        ));
    }
    let mut depth = 0;
    let mut size = 0;
    for layer in circuit.layers() {
        let mut ld = 0;
        for g in layer {
            let (d, s) = match &g.kind {
                GateKind::OracleCall { oracle, .. } => match bindings.get(oracle)? {
                    OracleAction::Circuit(c) => expanded_depth_size(c, bindings, nesting + 1)?,
                    _ => (1, 1),
                },
                _ => (1, 1),
            };
            ld = ld.max(d);
            size += s;
        }
        depth += ld;
    }
    Ok((depth, size))
}

#[derive(Debug, Clone, Copy, Default)]
struct LayerTally {
    gates: usize,
    lowered_depth: usize,
    lowered_size: usize,
    lowered_ancillae: usize,
    expanded_depth: usize,
    expanded_size: usize,
}

/// Streaming resource counter: a [`GateSink`] that keeps per-layer totals
/// instead of gates, for circuits too large to materialize. Lowered figures
/// match [`crate::sim::lower::lower_to_qnc`] exactly.
#[derive(Debug, Default)]
pub struct ResourceTally {
    next_qubit: usize,
    registers: Registers,
    layers: Vec<LayerTally>,
    forward: usize,
    backward: usize,
    /// Lowered (depth, size) of circuit-backed oracle bodies.
    bodies: BTreeMap<OracleId, (usize, usize)>,
    cache: CostCache,
}

impl ResourceTally {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares the lowered depth and size of the body behind `id`.
    pub fn with_body(mut self, id: impl Into<String>, depth: usize, size: usize) -> Self {
        self.bodies.insert(OracleId(id.into()), (depth, size));
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.next_qubit
    }

    fn nonempty(&self) -> impl Iterator<Item = &LayerTally> {
        self.layers.iter().filter(|l| l.gates > 0)
    }

    /// Report of the circuit as built.
    pub fn report(&self) -> ResourceReport {
        ResourceReport {
            depth: self.nonempty().count(),
            size: self.nonempty().map(|l| l.gates).sum(),
            ancillae: ancillae_of(self.next_qubit, &self.registers),
            forward_queries: self.forward,
            backward_queries: self.backward,
        }
    }

    /// Extra qubits the lowering needs.
    pub fn lowering_pool(&self) -> usize {
        self.nonempty()
            .map(|l| l.lowered_ancillae)
            .max()
            .unwrap_or(0)
    }

    /// Report of the lowered circuit (oracle calls still one layer each).
    pub fn lowered_report(&self) -> ResourceReport {
        ResourceReport {
            depth: self.nonempty().map(|l| l.lowered_depth).sum(),
            size: self.nonempty().map(|l| l.lowered_size).sum(),
            ancillae: ancillae_of(self.next_qubit, &self.registers) + self.lowering_pool(),
            ..self.report()
        }
    }

    /// Lowered report with oracle bodies expanded.
    pub fn expanded_lowered_report(&self) -> ResourceReport {
        ResourceReport {
            depth: self.nonempty().map(|l| l.expanded_depth).sum(),
            size: self.nonempty().map(|l| l.expanded_size).sum(),
            ..self.lowered_report()
        }
    }
}

impl GateSink for ResourceTally {
    fn alloc(&mut self, count: usize) -> usize {
        let s = self.next_qubit;
        self.next_qubit += count;
        s
    }

    fn place(&mut self, layer: usize, gate: Gate) {
        if self.layers.len() <= layer {
            self.layers.resize(layer + 1, LayerTally::default());
        }
        let cost = self.cache.cost(&gate);
        let (ed, es) = match &gate.kind {
            GateKind::OracleCall { oracle, direction } => {
                match direction {
                    Direction::Forward => self.forward += 1,
                    Direction::Backward => self.backward += 1,
                }
                self.bodies.get(oracle).copied().unwrap_or((1, 1))
            }
            _ => (cost.depth, cost.size),
        };
        let l = &mut self.layers[layer];
        l.gates += 1;
        l.lowered_depth = l.lowered_depth.max(cost.depth);
        l.lowered_size += cost.size;
        l.lowered_ancillae += cost.ancillae;
        l.expanded_depth = l.expanded_depth.max(ed);
        l.expanded_size += es;
    }

    fn name_register(&mut self, name: &str, start: usize, len: usize) {
        self.registers.insert(name.to_string(), (start, len));
    }
}
