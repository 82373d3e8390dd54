//! Lowering of generalized Toffoli, fanout and basis-reflection gates to
//! one- and two-qubit gates with log-depth ancilla trees.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c64, hadamard, mul2, pauli_x, Mat2, Mat4, ONE, ZERO};
use crate::sim::circuit::{Circuit, CircuitBuilder, GateClass, GateSink};
use crate::sim::gate::{Gate, GateKind};

/// `sqrt(X)`
fn sqrt_x() -> Mat2 {
    let p = c64(0.5, 0.5);
    let m = c64(0.5, -0.5);
    [[p, m], [m, p]]
}

fn diag_reflection(k: usize, index: usize) -> (Option<Mat2>, Option<Mat4>) {
    if k == 1 {
        let mut m = [[ONE, ZERO], [ZERO, ONE]];
        m[index][index] = -ONE;
        (Some(m), None)
    } else {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = if i == index { -ONE } else { ONE };
        }
        (None, Some(m))
    }
}

/// Fresh ancillae a lowered gate needs (all returned to |0>).
pub fn ancillae_needed(gate: &Gate) -> usize {
    let k = gate.targets.len();
    match gate.kind {
        GateKind::Toffoli => (k - 1).saturating_sub(2),
        GateKind::Fanout => k.saturating_sub(2),
        GateKind::BasisReflection(_) => k.saturating_sub(3),
        _ => 0,
    }
}

pub fn needs_lowering(gate: &Gate) -> bool {
    matches!(
        gate.kind,
        GateKind::Toffoli | GateKind::Fanout | GateKind::BasisReflection(_)
    )
}

/// Five two-qubit gates: `CNOT(c1,c2) CV^dag(c2,t) CNOT(c1,c2) CV(c2,t) CV(c1,t)`,
/// i.e. `V^(c1 + c2 - c1 xor c2)`. Both controls are needed before `t` is
/// touched, so a sparse simulation opens and closes `t` back to back.
fn emit_ccx<S: GateSink + ?Sized>(sink: &mut S, layer: usize, c1: usize, c2: usize, t: usize) {
    let v = sqrt_x();
    let vd = crate::linalg::adjoint2(&v);
    sink.place(layer, Gate::cnot(c1, c2));
    sink.place(layer + 1, Gate::controlled(c2, t, &vd));
    sink.place(layer + 2, Gate::cnot(c1, c2));
    sink.place(layer + 3, Gate::controlled(c2, t, &v));
    sink.place(layer + 4, Gate::controlled(c1, t, &v));
}

const CCX_DEPTH: usize = 5;

/// Multi-controlled X via a balanced AND tree over `controls.len() - 2` ancillae.
/// Returns the depth used.
pub fn emit_mcx<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    target: usize,
    controls: &[usize],
    ancillae: &[usize],
) -> usize {
    match controls.len() {
        0 => {
            sink.place(layer, Gate::one_qubit(target, pauli_x()));
            1
        }
        1 => {
            sink.place(layer, Gate::cnot(controls[0], target));
            1
        }
        2 => {
            emit_ccx(sink, layer, controls[0], controls[1], target);
            CCX_DEPTH
        }
        _ => {
            let mut next_anc = ancillae.iter().copied();
            let mut current = controls.to_vec();
            let mut levels: Vec<Vec<(usize, usize, usize)>> = Vec::new();
            while current.len() > 2 {
                let mut level = Vec::new();
                let mut reduced = Vec::new();
                for pair in current.chunks(2) {
                    if let [a, b] = pair {
                        let out = next_anc.next().expect("ancilla pool too small");
                        level.push((*a, *b, out));
                        reduced.push(out);
                    } else {
                        reduced.push(pair[0]);
                    }
                }
                levels.push(level);
                current = reduced;
            }
            let mut l = layer;
            for level in &levels {
                for &(a, b, out) in level {
                    emit_ccx(sink, l, a, b, out);
                }
                l += CCX_DEPTH;
            }
            emit_ccx(sink, l, current[0], current[1], target);
            l += CCX_DEPTH;
            for level in levels.iter().rev() {
                for &(a, b, out) in level {
                    emit_ccx(sink, l, a, b, out);
                }
                l += CCX_DEPTH;
            }
            l - layer
        }
    }
}

/// Fanout through a doubling copy tree on `outputs.len() - 1` ancillae.
pub fn emit_fanout<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    source: usize,
    outputs: &[usize],
    ancillae: &[usize],
) -> usize {
    let t = outputs.len();
    if t == 1 {
        sink.place(layer, Gate::cnot(source, outputs[0]));
        return 1;
    }
    let mut holders = alloc::vec![source];
    let mut rounds: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut next_anc = ancillae.iter().copied();
    while holders.len() < t {
        let mut round = Vec::new();
        let have = holders.len();
        for h in 0..have {
            if holders.len() == t {
                break;
            }
            let a = next_anc.next().expect("ancilla pool too small");
            round.push((holders[h], a));
            holders.push(a);
        }
        rounds.push(round);
    }
    let mut l = layer;
    for round in &rounds {
        for &(from, to) in round {
            sink.place(l, Gate::cnot(from, to));
        }
        l += 1;
    }
    for (h, &o) in holders.iter().zip(outputs) {
        sink.place(l, Gate::cnot(*h, o));
    }
    l += 1;
    for round in rounds.iter().rev() {
        for &(from, to) in round {
            sink.place(l, Gate::cnot(from, to));
        }
        l += 1;
    }
    l - layer
}

/// `I - 2|p><p|` as X conjugation around `H MCX H` on the last target.
pub fn emit_reflection<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    targets: &[usize],
    pattern: &[bool],
    ancillae: &[usize],
) -> usize {
    let k = targets.len();
    if k <= 2 {
        let index = pattern
            .iter()
            .fold(0, |acc, &p| (acc << 1) | usize::from(p));
        match diag_reflection(k, index) {
            (Some(m), _) => sink.place(layer, Gate::one_qubit(targets[0], m)),
            (_, Some(m)) => sink.place(layer, Gate::two_qubit(targets[0], targets[1], m)),
            _ => unreachable!(),
        }
        return 1;
    }
    let (controls, last) = targets.split_at(k - 1);
    let last = last[0];
    let h = hadamard();
    let x = pauli_x();
    let flip_last = !pattern[k - 1];
    for (&q, &p) in controls.iter().zip(pattern) {
        if !p {
            sink.place(layer, Gate::one_qubit(q, x));
        }
    }
    sink.place(
        layer,
        Gate::one_qubit(last, if flip_last { mul2(&h, &x) } else { h }),
    );
    let d = emit_mcx(sink, layer + 1, last, controls, ancillae);
    let post = layer + 1 + d;
    for (&q, &p) in controls.iter().zip(pattern) {
        if !p {
            sink.place(post, Gate::one_qubit(q, x));
        }
    }
    sink.place(
        post,
        Gate::one_qubit(last, if flip_last { mul2(&x, &h) } else { h }),
    );
    d + 2
}

/// Emits the lowered form of `gate` at `layer`; returns its depth.
/// Gates that need no lowering are copied as a single layer.
pub fn emit_lowered<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    gate: &Gate,
    ancillae: &[usize],
) -> usize {
    let t = &gate.targets;
    match &gate.kind {
        GateKind::Toffoli => emit_mcx(sink, layer, t[0], &t[1..], ancillae),
        GateKind::Fanout => emit_fanout(sink, layer, t[0], &t[1..], ancillae),
        GateKind::BasisReflection(p) => emit_reflection(sink, layer, t, p, ancillae),
        _ => {
            sink.place(layer, gate.clone());
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoweringCost {
    pub depth: usize,
    pub size: usize,
    pub ancillae: usize,
}

struct CountingSink {
    depth: usize,
    size: usize,
}

impl GateSink for CountingSink {
    fn alloc(&mut self, _count: usize) -> usize {
        0
    }

    fn place(&mut self, layer: usize, _gate: Gate) {
        self.depth = self.depth.max(layer + 1);
        self.size += 1;
    }
}

/// Depth, size and ancillae of the lowered form of `gate`.
pub fn lowering_cost(gate: &Gate) -> LoweringCost {
    let ancillae = ancillae_needed(gate);
    if !needs_lowering(gate) {
        return LoweringCost {
            depth: 1,
            size: 1,
            ancillae: 0,
        };
    }
    let pool: Vec<usize> = (0..ancillae).map(|i| gate.targets.len() + i).collect();
    let mut sink = CountingSink { depth: 0, size: 0 };
    let depth = emit_lowered(&mut sink, 0, gate, &pool);
    debug_assert_eq!(depth, sink.depth);
    LoweringCost {
        depth,
        size: sink.size,
        ancillae,
    }
}

/// Memoized [`lowering_cost`], keyed by gate shape.
#[derive(Debug, Default)]
pub struct CostCache {
    map: BTreeMap<(u8, usize, usize, bool), LoweringCost>,
}

impl CostCache {
    pub fn cost(&mut self, gate: &Gate) -> LoweringCost {
        let key = match &gate.kind {
            GateKind::Toffoli => (0, gate.targets.len(), 0, false),
            GateKind::Fanout => (1, gate.targets.len(), 0, false),
            GateKind::BasisReflection(p) => (
                2,
                p.len(),
                p.iter().filter(|b| !**b).count(),
                p.last().copied().unwrap_or(false),
            ),
            _ => {
                return LoweringCost {
                    depth: 1,
                    size: 1,
                    ancillae: 0,
                }
            }
        };
        *self.map.entry(key).or_insert_with(|| lowering_cost(gate))
    }
}

/// Replaces every Toffoli, fanout and basis reflection by QNC sub-circuits.
/// Gates of one layer are lowered side by side on disjoint ancillae; the
/// ancilla pool is shared across layers.
pub fn lower_to_qnc(circuit: &Circuit) -> Result<Circuit> {
    if let Some(g) = circuit
        .gates()
        .find(|g| matches!(g.kind, GateKind::PrepFromRegister { .. }))
    {
        return Err(Error::GateClassViolation {
            class: GateClass::Qnc.name(),
            kind: g.kind.name(),
        });
    }
    let base = circuit.num_qubits();
    let pool = circuit
        .layers()
        .iter()
        .map(|l| l.iter().map(ancillae_needed).sum::<usize>())
        .max()
        .unwrap_or(0);
    let mut b = CircuitBuilder::new(GateClass::Qnc);
    b.alloc(base + pool);
    for (name, &(s, l)) in circuit.registers() {
        b.name_register(name, s, l);
    }
    if pool > 0 {
        let name = if circuit.registers().contains_key("ancilla") {
            "lowering"
        } else {
            "ancilla"
        };
        b.name_register(name, base, pool);
    }
    let mut out_layer = 0;
    for layer in circuit.layers() {
        let mut next = base;
        let mut depth = 0;
        for g in layer {
            let need = ancillae_needed(g);
            let anc: Vec<usize> = (next..next + need).collect();
            next += need;
            depth = depth.max(emit_lowered(&mut b, out_layer, g, &anc));
        }
        out_layer += depth;
    }
    b.finish()
}
