//! Constant-layer state preparation with fanout and unbounded Toffoli gates.
//!
//! Registers: one qubit `R_x` per prefix `x` of length `< n` (heap order),
//! the output `S`, and ancillae. Each `R_x` is prepared in
//! `|phi_x> = beta_{x0}|0> + beta_{x1}|1>`; the DNF for `f` writes the
//! selected path `t` into `S`; then every `R_x` is returned to `|0>`, either
//! by XOR-ing `t_i` (on the path) or by `V_x^dag` (off the path).

use alloc::vec;
use alloc::vec::Vec;

use super::dnf::build_f_dnf;
use super::tree::{amplitude_tree, prefix_of, AmplitudeTree};
use crate::error::Result;
use crate::linalg::{abc_decomposition, adjoint2, pauli_x, phase, prep_unitary};
use crate::sim::{lower_to_qnc, Circuit, CircuitBuilder, Gate, GateClass, GateSink, StateVector};

/// Layers used by [`emit_state_prep`] for `n >= 2`.
pub const STATE_PREP_LAYERS: usize = 20;

fn x_gate(q: usize) -> Gate {
    Gate::one_qubit(q, pauli_x())
}

/// Places the preparation of the tree's state into `out` (which must be
/// `|0>`), starting at `layer`. Allocates the `R` register and ancillae from
/// `sink`, all returned to `|0>`. Uses only one-qubit, Toffoli and fanout
/// gates. Returns the number of layers used.
pub fn emit_state_prep<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    out: &[usize],
    tree: &AmplitudeTree,
) -> usize {
    let n = tree.n();
    debug_assert_eq!(out.len(), n);
    if n == 1 {
        let (b0, b1) = tree.children(1);
        sink.place(layer, Gate::one_qubit(out[0], prep_unitary(b0, b1)));
        return 1;
    }
    let prefixes = (1usize << n) - 1;
    let r0 = sink.alloc(prefixes);
    sink.name_register("R", r0, prefixes);
    let r = |h: usize| r0 + h - 1;

    // one copy of R_v per literal occurrence
    let dnf = build_f_dnf(n);
    let terms: Vec<(usize, &Vec<_>)> = dnf
        .outputs
        .iter()
        .enumerate()
        .flat_map(|(j, ts)| ts.iter().map(move |t| (j, t)))
        .collect();
    let mut uses = vec![0usize; prefixes];
    for (_, t) in &terms {
        for l in t.iter() {
            uses[l.var] += 1;
        }
    }
    let mut copy_start = vec![0usize; prefixes];
    for v in 0..prefixes {
        copy_start[v] = sink.alloc(uses[v]);
    }
    let mut next = vec![0usize; prefixes];
    let mut lit_copy: Vec<Vec<(usize, bool)>> = Vec::with_capacity(terms.len());
    for (_, t) in &terms {
        lit_copy.push(
            t.iter()
                .map(|l| {
                    let q = copy_start[l.var] + next[l.var];
                    next[l.var] += 1;
                    (q, l.positive)
                })
                .collect(),
        );
    }
    let term_start = sink.alloc(terms.len());

    // copies of S_k: one per prefix literal `S_k == x_k` and one per XOR use
    let mut s_uses: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut p_ctrl: Vec<Vec<(usize, bool)>> = vec![Vec::new(); prefixes + 1];
    let mut s_ctrl = vec![0usize; prefixes + 1];
    let mut s_count = vec![0usize; n];
    for h in 1..=prefixes {
        let (len, _) = prefix_of(h);
        for k in 0..len {
            s_count[k] += 1;
        }
        s_count[len] += 1;
    }
    let s_start: Vec<usize> = s_count.iter().map(|&c| sink.alloc(c)).collect();
    let mut s_next = vec![0usize; n];
    let take = |k: usize, s_next: &mut Vec<usize>| {
        let q = s_start[k] + s_next[k];
        s_next[k] += 1;
        q
    };
    for h in 1..=prefixes {
        let (len, value) = prefix_of(h);
        for k in 0..len {
            let bit = (value >> (len - 1 - k)) & 1 == 1;
            p_ctrl[h].push((take(k, &mut s_next), bit));
        }
        s_ctrl[h] = take(len, &mut s_next);
    }
    for k in 0..n {
        s_uses[k] = (s_start[k]..s_start[k] + s_count[k]).collect();
    }
    // prefix-match flags P_x for nonempty prefixes
    let p0 = sink.alloc(prefixes - 1);
    let p = |h: usize| p0 + h - 2;
    let decomps: Vec<_> = (2..=prefixes)
        .map(|h| {
            let (b0, b1) = tree.children(h);
            abc_decomposition(&adjoint2(&prep_unitary(b0, b1)))
        })
        .collect();

    let l = layer;
    for h in 1..=prefixes {
        let (b0, b1) = tree.children(h);
        sink.place(l, Gate::one_qubit(r(h), prep_unitary(b0, b1)));
    }
    // U_f: literals, terms, De Morgan OR into S, uncompute
    let fan_r = |sink: &mut S, at: usize| {
        for v in 0..prefixes {
            let outs: Vec<usize> = (copy_start[v]..copy_start[v] + uses[v]).collect();
            sink.place(at, Gate::fanout(r(v + 1), &outs));
        }
    };
    let negate_literals = |sink: &mut S, at: usize| {
        for lits in &lit_copy {
            for &(q, pos) in lits {
                if !pos {
                    sink.place(at, x_gate(q));
                }
            }
        }
    };
    let term_toffolis = |sink: &mut S, at: usize| {
        for (i, lits) in lit_copy.iter().enumerate() {
            let ctrls: Vec<usize> = lits.iter().map(|&(q, _)| q).collect();
            sink.place(at, Gate::toffoli(term_start + i, &ctrls));
        }
    };
    let x_terms = |sink: &mut S, at: usize| {
        for i in 0..terms.len() {
            sink.place(at, x_gate(term_start + i));
        }
    };
    fan_r(sink, l + 1);
    negate_literals(sink, l + 2);
    term_toffolis(sink, l + 3);
    x_terms(sink, l + 4);
    for j in 0..n {
        let ctrls: Vec<usize> = terms
            .iter()
            .enumerate()
            .filter(|(_, (jj, _))| *jj == j)
            .map(|(i, _)| term_start + i)
            .collect();
        sink.place(l + 5, Gate::toffoli(out[j], &ctrls));
    }
    for &q in out {
        sink.place(l + 6, x_gate(q));
    }
    x_terms(sink, l + 7);
    let fan_s = |sink: &mut S, at: usize| {
        for k in 0..n {
            sink.place(at, Gate::fanout(out[k], &s_uses[k]));
        }
    };
    fan_s(sink, l + 7);
    term_toffolis(sink, l + 8);
    let negate_s = |sink: &mut S, at: usize| {
        for ctrls in &p_ctrl {
            for &(q, bit) in ctrls {
                if !bit {
                    sink.place(at, x_gate(q));
                }
            }
        }
    };
    negate_s(sink, l + 8);
    negate_literals(sink, l + 9);
    let p_toffolis = |sink: &mut S, at: usize| {
        for h in 2..=prefixes {
            let ctrls: Vec<usize> = p_ctrl[h].iter().map(|&(q, _)| q).collect();
            sink.place(at, Gate::toffoli(p(h), &ctrls));
        }
    };
    p_toffolis(sink, l + 9);
    fan_r(sink, l + 10);
    // return every R_x to |0>
    sink.place(l + 11, Gate::toffoli(r(1), &[s_ctrl[1]]));
    for h in 2..=prefixes {
        sink.place(l + 11, Gate::toffoli(r(h), &[p(h), s_ctrl[h]]));
        let d = &decomps[h - 2];
        sink.place(l + 12, x_gate(p(h)));
        sink.place(l + 12, Gate::one_qubit(r(h), d.c));
        sink.place(l + 13, Gate::toffoli(r(h), &[p(h)]));
        sink.place(l + 14, Gate::one_qubit(r(h), d.b));
        sink.place(l + 14, Gate::one_qubit(p(h), phase(d.alpha)));
        sink.place(l + 15, Gate::toffoli(r(h), &[p(h)]));
        sink.place(l + 16, Gate::one_qubit(r(h), d.a));
        sink.place(l + 16, x_gate(p(h)));
    }
    p_toffolis(sink, l + 17);
    negate_s(sink, l + 18);
    fan_s(sink, l + 19);
    STATE_PREP_LAYERS
}

/// QACf0 circuit preparing `psi` in the `output` register from `|0...0>`.
pub fn build_qacf0_state_circuit(psi: &StateVector) -> Result<Circuit> {
    let tree = amplitude_tree(psi)?;
    let n = tree.n();
    let mut b = CircuitBuilder::new(GateClass::Qacf0);
    let s = b.alloc(n);
    b.name_register("output", s, n);
    let out: Vec<usize> = (s..s + n).collect();
    emit_state_prep(&mut b, 0, &out, &tree);
    b.finish()
}

/// The same circuit lowered to one- and two-qubit gates.
pub fn build_qnc_state_circuit(psi: &StateVector) -> Result<Circuit> {
    lower_to_qnc(&build_qacf0_state_circuit(psi)?)
}
