//! A qRAM for `U` built from gates: one controlled state preparation of
//! `U|y>` per basis input `y`, a bitwise OR into `S`, and an XOR of `S` back
//! into the selected register.
//!
//! Layout: `[x: n][S: n][R_0: n]...[R_{2^n - 1}: n]` then ancillae, so the
//! circuit satisfies the qRAM property with `S` as the output block.

use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{pauli_x, Matrix};
use crate::qram::{QramOracle, DEFAULT_QRAM_ID};
use crate::sim::{
    lower_to_qnc, Bindings, Circuit, CircuitBuilder, Gate, GateClass, GateKind, GateSink,
    OracleAction, StateVector,
};
use crate::statesynth::{amplitude_tree, emit_state_prep};

use crate::qram::check_unitary;

/// Layers in local numbering, qubits allocated from zero.
#[derive(Debug, Default)]
struct GateBuffer {
    num_qubits: usize,
    layers: Vec<Vec<Gate>>,
}

impl GateSink for GateBuffer {
    fn alloc(&mut self, count: usize) -> usize {
        let s = self.num_qubits;
        self.num_qubits += count;
        s
    }

    fn place(&mut self, layer: usize, gate: Gate) {
        if self.layers.len() <= layer {
            self.layers.resize_with(layer + 1, Vec::new);
        }
        self.layers[layer].push(gate);
    }
}

/// Layer indices where the three steps end (exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QramStages {
    /// `U|x>` prepared in `R_x`.
    pub prepared: usize,
    /// `S` holds the OR of all `R_y`.
    pub or_done: usize,
    /// `S` XOR-ed back into `R_x` and its copies cleared.
    pub xor_done: usize,
}

#[derive(Debug, Clone)]
pub struct GateLevelQram {
    pub circuit: Circuit,
    pub stages: QramStages,
}

fn x_gate(q: usize) -> Gate {
    Gate::one_qubit(q, pauli_x())
}

fn bit(y: usize, k: usize, n: usize) -> bool {
    (y >> (n - 1 - k)) & 1 == 1
}

/// Emits the circuit for `U` (columns `U|y>`). Returns the stage boundaries.
pub fn emit_gate_level_qram<S: GateSink + ?Sized>(sink: &mut S, u: &Matrix) -> Result<QramStages> {
    let n = check_unitary(u)?;
    let dim = 1usize << n;
    let x0 = sink.alloc(n);
    let s0 = sink.alloc(n);
    let r0 = sink.alloc(n * dim);
    sink.name_register("x", x0, n);
    sink.name_register("S", s0, n);
    sink.name_register("R", r0, n * dim);
    let rq = |y: usize, k: usize| r0 + n * y + k;

    // state preparations in local numbering; every block has the same shape
    let mut blocks = Vec::with_capacity(dim);
    for y in 0..dim {
        let col: Vec<_> = (0..dim).map(|i| u[(i, y)]).collect();
        let tree = amplitude_tree(&StateVector::from_amps_unchecked(col))?;
        let mut buf = GateBuffer::default();
        let out = buf.alloc(n);
        let outs: Vec<usize> = (out..out + n).collect();
        emit_state_prep(&mut buf, 0, &outs, &tree);
        blocks.push(buf);
    }
    let width = blocks[0]
        .layers
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
        .max(n);
    let fanouts = blocks[0]
        .layers
        .iter()
        .map(|l| {
            l.iter()
                .filter(|g| matches!(g.kind, GateKind::Fanout))
                .count()
        })
        .max()
        .unwrap_or(0);
    let local = blocks[0].num_qubits;

    let xc: Vec<usize> = (0..n).map(|_| sink.alloc(dim)).collect();
    let e0 = sink.alloc(dim);
    let ec: Vec<usize> = (0..dim).map(|_| sink.alloc(width)).collect();
    let anc: Vec<usize> = (0..dim).map(|_| sink.alloc(local - n)).collect();
    let dpool: Vec<usize> = (0..dim).map(|_| sink.alloc(fanouts)).collect();
    let sc: Vec<usize> = (0..n).map(|_| sink.alloc(dim)).collect();

    // e_y = [x == y]
    let copy_x = |sink: &mut S, at: usize| {
        for k in 0..n {
            let outs: Vec<usize> = (xc[k]..xc[k] + dim).collect();
            sink.place(at, Gate::fanout(x0 + k, &outs));
        }
    };
    let negate_x = |sink: &mut S, at: usize| {
        for y in 0..dim {
            for k in 0..n {
                if !bit(y, k, n) {
                    sink.place(at, x_gate(xc[k] + y));
                }
            }
        }
    };
    let equality = |sink: &mut S, at: usize| {
        for y in 0..dim {
            let ctrls: Vec<usize> = (0..n).map(|k| xc[k] + y).collect();
            sink.place(at, Gate::toffoli(e0 + y, &ctrls));
        }
    };
    let copy_e = |sink: &mut S, at: usize| {
        for y in 0..dim {
            let outs: Vec<usize> = (ec[y]..ec[y] + width).collect();
            sink.place(at, Gate::fanout(e0 + y, &outs));
        }
    };
    copy_x(sink, 0);
    negate_x(sink, 1);
    equality(sink, 2);
    negate_x(sink, 3);
    copy_e(sink, 3);
    copy_x(sink, 4);

    // step 1: each block controlled on its e_y
    let mut l = 4;
    let sublayers: Vec<usize> = blocks[0]
        .layers
        .iter()
        .map(|g| {
            if g.iter().any(|g| matches!(g.kind, GateKind::Fanout)) {
                3
            } else {
                1
            }
        })
        .collect();
    for (y, block) in blocks.into_iter().enumerate() {
        let map = |q: usize| if q < n { rq(y, q) } else { anc[y] + q - n };
        let mut at = l;
        for (li, layer) in block.layers.into_iter().enumerate() {
            let mut d = 0;
            for (i, g) in layer.into_iter().enumerate() {
                let e = ec[y] + i;
                let t: Vec<usize> = g.targets.iter().map(|&q| map(q)).collect();
                match g.kind {
                    GateKind::OneQubit(m) => sink.place(at, Gate::controlled(e, t[0], &m)),
                    GateKind::Toffoli => {
                        let mut ctrls = t[1..].to_vec();
                        ctrls.push(e);
                        sink.place(at, Gate::toffoli(t[0], &ctrls));
                    }
                    GateKind::Fanout => {
                        let dq = dpool[y] + d;
                        d += 1;
                        sink.place(at, Gate::toffoli(dq, &[e, t[0]]));
                        sink.place(at + 1, Gate::fanout(dq, &t[1..]));
                        sink.place(at + 2, Gate::toffoli(dq, &[e, t[0]]));
                    }
                    _ => unreachable!("state preparation emits only 1Q, Toffoli and fanout"),
                }
            }
            at += sublayers[li];
        }
        if y + 1 == dim {
            l = at;
        }
    }
    let prepared = l;

    // step 2: S_k = OR_y R_y[k]
    let flip_r = |sink: &mut S, at: usize| {
        for q in r0..r0 + n * dim {
            sink.place(at, x_gate(q));
        }
    };
    flip_r(sink, l);
    for k in 0..n {
        let ctrls: Vec<usize> = (0..dim).map(|y| rq(y, k)).collect();
        sink.place(l + 1, Gate::toffoli(s0 + k, &ctrls));
    }
    for k in 0..n {
        sink.place(l + 2, x_gate(s0 + k));
    }
    flip_r(sink, l + 2);
    let or_done = l + 3;

    // step 3: R_x ^= S where e_x
    let copy_s = |sink: &mut S, at: usize| {
        for k in 0..n {
            let outs: Vec<usize> = (sc[k]..sc[k] + dim).collect();
            sink.place(at, Gate::fanout(s0 + k, &outs));
        }
    };
    copy_s(sink, or_done);
    for y in 0..dim {
        for k in 0..n {
            sink.place(
                or_done + 1,
                Gate::toffoli(rq(y, k), &[ec[y] + k, sc[k] + y]),
            );
        }
    }
    copy_s(sink, or_done + 2);
    copy_e(sink, or_done + 2);
    copy_x(sink, or_done + 2);
    let xor_done = or_done + 3;
    negate_x(sink, xor_done);
    equality(sink, xor_done + 1);
    negate_x(sink, xor_done + 2);
    copy_x(sink, xor_done + 3);
    Ok(QramStages {
        prepared,
        or_done,
        xor_done,
    })
}

/// The QACf0 qRAM circuit for `U` and its stage boundaries.
pub fn build_gate_level_qram(u: &Matrix) -> Result<GateLevelQram> {
    let mut b = CircuitBuilder::new(GateClass::Qacf0);
    let stages = emit_gate_level_qram(&mut b, u)?;
    let circuit = b.finish()?;
    debug_assert!(circuit.depth() >= stages.xor_done);
    Ok(GateLevelQram { circuit, stages })
}

/// Wraps a qRAM circuit on `[x][S]...` as an oracle bound to `qram`.
pub fn circuit_qram(n: usize, circuit: Circuit) -> Result<QramOracle> {
    let m = circuit.num_qubits();
    let bindings = Bindings::new().with(
        DEFAULT_QRAM_ID,
        OracleAction::Circuit(alloc::boxed::Box::new(circuit)),
    );
    QramOracle::new(n, m, DEFAULT_QRAM_ID, bindings)
}

/// The gate-level qRAM lowered to one- and two-qubit gates, as an oracle.
pub fn lowered_gate_level_qram(u: &Matrix) -> Result<QramOracle> {
    let n = check_unitary(u)?;
    let g = build_gate_level_qram(u)?;
    circuit_qram(n, lower_to_qnc(&g.circuit)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, random_unitary};
    use crate::qram::verify_qram;
    use crate::sim::{run_layers, Bindings, SparseState};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_qram() {
        let h = hadamard();
        let u = Matrix::from_fn(2, 2, |i, j| h[i][j]);
        let g = build_gate_level_qram(&u).unwrap();
        let a = circuit_qram(1, g.circuit).unwrap();
        let r = verify_qram(&a, &u).unwrap();
        assert!(r.ok, "{}", r.worst_deviation);
    }

    #[test]
    fn identity_and_random_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for u in [Matrix::identity(4, 4), random_unitary(4, &mut rng)] {
            let g = build_gate_level_qram(&u).unwrap();
            let a = circuit_qram(2, g.circuit.clone()).unwrap();
            let r = verify_qram(&a, &u).unwrap();
            assert!(r.ok, "{}", r.worst_deviation);
        }
    }

    #[test]
    fn staged_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_unitary(4, &mut rng);
        let g = build_gate_level_qram(&u).unwrap();
        let c = &g.circuit;
        let m = c.num_qubits();
        let xq: Vec<usize> = (0..2).collect();
        let sq: Vec<usize> = (2..4).collect();
        for x in 0..4usize {
            let ux: Vec<_> = (0..4).map(|i| u[(i, x)]).collect();
            let rx: Vec<usize> = (4 + 2 * x..6 + 2 * x).collect();
            let mut s = SparseState::basis(m, &xq, x as u128);
            let b = Bindings::new();
            run_layers(
                &mut s,
                c,
                0..g.stages.prepared,
                &b,
                &mut crate::sim::QueryLog::new(),
            )
            .unwrap();
            assert!(s.reduced_fidelity(&rx, &ux) >= 1.0 - 1e-9);
            run_layers(
                &mut s,
                c,
                g.stages.prepared..g.stages.or_done,
                &b,
                &mut crate::sim::QueryLog::new(),
            )
            .unwrap();
            // sum_z alpha_z |z>_{R_x} |z>_S
            let mut both = rx.clone();
            both.extend_from_slice(&sq);
            let mut diag = alloc::vec![crate::linalg::ZERO; 16];
            for z in 0..4 {
                diag[(z << 2) | z] = ux[z];
            }
            assert!(s.reduced_fidelity(&both, &diag) >= 1.0 - 1e-9);
            run_layers(
                &mut s,
                c,
                g.stages.or_done..g.stages.xor_done,
                &b,
                &mut crate::sim::QueryLog::new(),
            )
            .unwrap();
            assert!(s.reduced_fidelity(&sq, &ux) >= 1.0 - 1e-9);
        }
    }
}
