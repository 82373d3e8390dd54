use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::sim::gate::{Gate, GateKind};

/// Gate-set class. Each class admits every gate of the classes before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateClass {
    Qnc,
    Qacf0,
    Oracle,
}

impl GateClass {
    pub fn name(self) -> &'static str {
        match self {
            GateClass::Qnc => "QNC",
            GateClass::Qacf0 => "QACf0",
            GateClass::Oracle => "ORACLE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "QNC" => Some(GateClass::Qnc),
            "QACf0" => Some(GateClass::Qacf0),
            "ORACLE" => Some(GateClass::Oracle),
            _ => None,
        }
    }

    pub fn admits(self, kind: &GateKind) -> bool {
        match kind {
            GateKind::OneQubit(_) | GateKind::TwoQubit(_) | GateKind::OracleCall { .. } => true,
            GateKind::Toffoli | GateKind::Fanout | GateKind::BasisReflection(_) => {
                self >= GateClass::Qacf0
            }
            GateKind::PrepFromRegister { .. } => self == GateClass::Oracle,
        }
    }

    /// Smallest class admitting `kind`.
    pub fn of_kind(kind: &GateKind) -> Self {
        [GateClass::Qnc, GateClass::Qacf0, GateClass::Oracle]
            .into_iter()
            .find(|c| c.admits(kind))
            .unwrap_or(GateClass::Oracle)
    }
}

/// Named contiguous qubit ranges, stored as `(start, len)`.
pub type Registers = BTreeMap<String, (usize, usize)>;

/// Layered circuit. Qubit 0 is the most significant bit of a basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gate_class: GateClass,
    registers: Registers,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    /// Validates every gate, the class restriction and layer disjointness.
    pub fn new(
        num_qubits: usize,
        gate_class: GateClass,
        registers: Registers,
        layers: Vec<Vec<Gate>>,
    ) -> Result<Self> {
        for (name, &(start, len)) in &registers {
            if start + len > num_qubits {
                return Err(Error::InvalidParameter(alloc::format!(
                    "register `{name}` [{start}, {}) exceeds {num_qubits} qubits",
                    start + len
                )));
            }
        }
        let mut seen = alloc::vec![usize::MAX; num_qubits];
        for (li, layer) in layers.iter().enumerate() {
            for gate in layer {
                gate.validate(num_qubits)?;
                if !gate_class.admits(&gate.kind) {
                    return Err(Error::GateClassViolation {
                        class: gate_class.name(),
                        kind: gate.kind.name(),
                    });
                }
                for &q in &gate.targets {
                    if seen[q] == li {
                        return Err(Error::LayerConflict {
                            layer: li,
                            qubit: q,
                        });
                    }
                    seen[q] = li;
                }
            }
        }
        Ok(Circuit {
            num_qubits,
            gate_class,
            registers,
            layers,
        })
    }

    pub fn empty(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gate_class: GateClass::Qnc,
            registers: Registers::new(),
            layers: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gate_class(&self) -> GateClass {
        self.gate_class
    }

    pub fn registers(&self) -> &Registers {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<Range<usize>> {
        self.registers.get(name).map(|&(s, l)| s..s + l)
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Vec<Gate>> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    /// Same circuit declared under a wider class.
    pub fn with_class(mut self, class: GateClass) -> Result<Self> {
        if let Some(g) = self.gates().find(|g| !class.admits(&g.kind)) {
            return Err(Error::GateClassViolation {
                class: class.name(),
                kind: g.kind.name(),
            });
        }
        self.gate_class = class;
        Ok(self)
    }

    pub fn with_register(mut self, name: &str, start: usize, len: usize) -> Result<Self> {
        if start + len > self.num_qubits {
            return Err(Error::InvalidParameter(alloc::format!(
                "register `{name}` exceeds {} qubits",
                self.num_qubits
            )));
        }
        self.registers.insert(name.to_string(), (start, len));
        Ok(self)
    }

    /// Reversed layers with every gate replaced by its adjoint.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gate_class: self.gate_class,
            registers: self.registers.clone(),
            layers: self
                .layers
                .iter()
                .rev()
                .map(|layer| layer.iter().map(Gate::adjoint).collect())
                .collect(),
        }
    }
}

pub fn inverse(circuit: &Circuit) -> Circuit {
    circuit.inverse()
}

/// Destination for emitted gates. Builders place gates at explicit layer
/// indices and allocate qubits through the sink, so the same builder can
/// either materialize a circuit or only count its resources.
pub trait GateSink {
    /// Reserves `count` fresh qubits and returns the first index.
    fn alloc(&mut self, count: usize) -> usize;
    fn place(&mut self, layer: usize, gate: Gate);
    fn name_register(&mut self, _name: &str, _start: usize, _len: usize) {}
}

pub struct CircuitBuilder {
    num_qubits: usize,
    gate_class: GateClass,
    registers: Registers,
    layers: Vec<Vec<Gate>>,
}

impl CircuitBuilder {
    pub fn new(gate_class: GateClass) -> Self {
        CircuitBuilder {
            num_qubits: 0,
            gate_class,
            registers: Registers::new(),
            layers: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Appends a whole circuit starting at `layer`, with qubit `i` of the
    /// circuit mapped to `map[i]`. Returns the first layer after it.
    pub fn append(&mut self, layer: usize, circuit: &Circuit, map: &[usize]) -> usize {
        append_mapped(self, layer, circuit, map)
    }

    /// Drops empty layers and validates the result.
    pub fn finish(self) -> Result<Circuit> {
        let layers = self.layers.into_iter().filter(|l| !l.is_empty()).collect();
        Circuit::new(self.num_qubits, self.gate_class, self.registers, layers)
    }
}

impl GateSink for CircuitBuilder {
    fn alloc(&mut self, count: usize) -> usize {
        let start = self.num_qubits;
        self.num_qubits += count;
        start
    }

    fn place(&mut self, layer: usize, gate: Gate) {
        if self.layers.len() <= layer {
            self.layers.resize_with(layer + 1, Vec::new);
        }
        self.layers[layer].push(gate);
    }

    fn name_register(&mut self, name: &str, start: usize, len: usize) {
        self.registers.insert(name.to_string(), (start, len));
    }
}

pub fn append_mapped<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    circuit: &Circuit,
    map: &[usize],
) -> usize {
    for (i, l) in circuit.layers().iter().enumerate() {
        for g in l {
            sink.place(
                layer + i,
                Gate {
                    kind: g.kind.clone(),
                    targets: g.targets.iter().map(|&q| map[q]).collect(),
                },
            );
        }
    }
    layer + circuit.depth()
}
