//! State preparation driven by a classical table of conditional amplitudes.
//!
//! For `k = 1..n`: query the table at the current prefix held in
//! `R_1..R_{k-1}`, rotate `R_k` to the decoded children, and query again to
//! clear the value register.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::any::Any;

use super::tree::{amplitude_tree, heap_index};
use crate::error::{Error, Result};
use crate::sim::fixed::{encode_pair, pair_bits, MAX_PRECISION_BITS};
use crate::sim::{
    run_circuit, Bindings, BoundCircuit, CircuitBuilder, ClassicalFunction, Direction, Gate,
    GateClass, GateSink, OracleAction, OracleId, SparseState, StateVector,
};

pub const MIN_PRECISION_BITS: u32 = 2;

/// Table from address to packed `(beta_{x0}, beta_{x1})`.
///
/// Addresses are `(index << n) | h` where `h` is the heap index of the
/// prefix (`1` for the empty prefix) and `index` is an optional key of
/// `index_bits` bits (used to store one tree per basis input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalBitOracle {
    pub n: usize,
    pub index_bits: usize,
    pub precision_bits: u32,
    pub entries: BTreeMap<u64, u128>,
}

impl ClassicalBitOracle {
    pub fn value_bits(&self) -> usize {
        pair_bits(self.precision_bits)
    }

    pub fn lookup(&self, address: u64) -> u128 {
        self.entries.get(&address).copied().unwrap_or(0)
    }

    /// Storage in bits: one packed pair per entry.
    pub fn size_bits(&self) -> usize {
        self.entries.len() * self.value_bits()
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0
            || self.precision_bits < MIN_PRECISION_BITS
            || self.precision_bits > MAX_PRECISION_BITS
            || self.n + self.index_bits > 63
        {
            return Err(Error::MalformedOracle(alloc::format!(
                "unsupported table shape n = {}, index bits = {}, b = {}",
                self.n,
                self.index_bits,
                self.precision_bits
            )));
        }
        let limit = 1u64 << (self.n + self.index_bits);
        let vb = self.value_bits() as u32;
        for (&a, &v) in &self.entries {
            if a >= limit || a & ((1 << self.n) - 1) == 0 || v.checked_shr(vb).unwrap_or(0) != 0 {
                return Err(Error::MalformedOracle(alloc::format!(
                    "entry {a:#x} -> {v:#x} out of range"
                )));
            }
        }
        Ok(())
    }

    /// Adds the entries of `psi`'s tree under key `index`.
    pub fn insert_state(&mut self, index: u64, psi: &StateVector) -> Result<()> {
        let tree = amplitude_tree(psi)?;
        for h in 1..1usize << self.n {
            let (b0, b1) = tree.children(h);
            self.entries.insert(
                (index << self.n) | h as u64,
                encode_pair(b0, b1, self.precision_bits),
            );
        }
        Ok(())
    }
}

fn check_precision(b: u32) -> Result<()> {
    if !(MIN_PRECISION_BITS..=MAX_PRECISION_BITS).contains(&b) {
        return Err(Error::InvalidParameter(alloc::format!(
            "precision bits must lie in {MIN_PRECISION_BITS}..={MAX_PRECISION_BITS}, got {b}"
        )));
    }
    Ok(())
}

/// Rounded conditional amplitudes of `psi` with `b` bits per real part.
pub fn beta_oracle(psi: &StateVector, b: u32) -> Result<ClassicalBitOracle> {
    check_precision(b)?;
    let mut o = ClassicalBitOracle {
        n: psi.num_qubits(),
        index_bits: 0,
        precision_bits: b,
        entries: BTreeMap::new(),
    };
    o.insert_state(0, psi)?;
    Ok(o)
}

/// The level-`k` query: input `index ++ R_1..R_{k-1}`, output the packed pair.
#[derive(Debug, Clone)]
pub struct LevelOracle {
    pub table: Arc<ClassicalBitOracle>,
    pub level: usize,
}

impl ClassicalFunction for LevelOracle {
    fn input_bits(&self) -> usize {
        self.table.index_bits + self.level - 1
    }
    fn output_bits(&self) -> usize {
        self.table.value_bits()
    }
    fn eval(&self, input: u128) -> u128 {
        let k = self.level - 1;
        let prefix = (input as u64) & ((1u64 << k) - 1);
        let index = (input >> k) as u64;
        let h = heap_index(k, prefix as usize) as u64;
        self.table.lookup((index << self.table.n) | h)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn level_oracle_id(prefix: &str, k: usize) -> OracleId {
    OracleId::new(alloc::format!("{prefix}{k}"))
}

/// Binds `{prefix}1..{prefix}n` to the level queries of `table`.
pub fn level_bindings(table: &Arc<ClassicalBitOracle>, prefix: &str) -> Bindings {
    let mut b = Bindings::new();
    for k in 1..=table.n {
        b.bind(
            level_oracle_id(prefix, k),
            OracleAction::Classical(Arc::new(LevelOracle {
                table: table.clone(),
                level: k,
            })),
        );
    }
    b
}

/// Places the `3n` layers of the query loop. `index` may be empty.
pub fn emit_oracle_prep<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    index: &[usize],
    r: &[usize],
    value: &[usize],
    precision_bits: u32,
    prefix: &str,
) -> usize {
    for k in 1..=r.len() {
        let mut targets: Vec<usize> = index.to_vec();
        targets.extend_from_slice(&r[..k - 1]);
        targets.extend_from_slice(value);
        let id = level_oracle_id(prefix, k);
        let l = layer + 3 * (k - 1);
        sink.place(
            l,
            Gate::oracle(id.clone(), Direction::Forward, targets.clone()),
        );
        sink.place(
            l + 1,
            Gate::prep_from_register(value, r[k - 1], precision_bits),
        );
        sink.place(l + 2, Gate::oracle(id, Direction::Forward, targets));
    }
    3 * r.len()
}

pub const STATE_ORACLE_PREFIX: &str = "beta";

/// Circuit `[output: n][value: 4(b + 1)]` running the query loop.
pub fn build_oracle_state_circuit(oracle: &ClassicalBitOracle) -> Result<BoundCircuit> {
    oracle.check()?;
    if oracle.index_bits != 0 {
        return Err(Error::MalformedOracle(
            "state synthesis needs a table without index bits".into(),
        ));
    }
    let n = oracle.n;
    let vb = oracle.value_bits();
    let mut b = CircuitBuilder::new(GateClass::Oracle);
    let r = b.alloc(n);
    let v = b.alloc(vb);
    b.name_register("output", r, n);
    b.name_register("value", v, vb);
    let rq: Vec<usize> = (r..r + n).collect();
    let vq: Vec<usize> = (v..v + vb).collect();
    emit_oracle_prep(
        &mut b,
        0,
        &[],
        &rq,
        &vq,
        oracle.precision_bits,
        STATE_ORACLE_PREFIX,
    );
    let table = Arc::new(oracle.clone());
    Ok(BoundCircuit {
        circuit: b.finish()?,
        bindings: level_bindings(&table, STATE_ORACLE_PREFIX),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSynthesis {
    pub state: StateVector,
    pub queries: u64,
}

/// Simulates the query loop and returns the state left in `R`.
pub fn oracle_state_synth(n: usize, oracle: &ClassicalBitOracle) -> Result<OracleSynthesis> {
    if oracle.n != n {
        return Err(Error::MalformedOracle(alloc::format!(
            "table is for {} qubits, asked for {n}",
            oracle.n
        )));
    }
    let bc = build_oracle_state_circuit(oracle)?;
    let mut s = SparseState::zero(bc.circuit.num_qubits());
    let log = run_circuit(&mut s, &bc.circuit, &bc.bindings)?;
    let out: Vec<usize> = (0..n).collect();
    let amps = s.project_register(&out);
    Ok(OracleSynthesis {
        state: StateVector::from_amps_unchecked(amps),
        queries: log.total(),
    })
}
