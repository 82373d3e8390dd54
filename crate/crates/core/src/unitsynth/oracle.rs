//! Synthesis from a classical table: one tree of rounded conditional
//! amplitudes per column `U|x>`, queried level by level. The controlled
//! preparation is itself a qRAM for `U`, fed to the qRAM reduction.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::qram::{check_unitary, implement_via_qram, QramOracle, DEFAULT_QRAM_ID, QRAM_TOL};
use crate::sim::fixed::pair_bits;
use crate::sim::{
    implementation_distance, BoundCircuit, CircuitBuilder, GateClass, GateSink, OracleAction,
    SimConfig, StateVector,
};
use crate::statesynth::oracle::{emit_oracle_prep, level_bindings, ClassicalBitOracle};

pub const UNITARY_ORACLE_PREFIX: &str = "O";

#[derive(Debug, Clone)]
pub struct OracleUnitarySynthesis {
    pub table: ClassicalBitOracle,
    pub circuit: BoundCircuit,
    /// Implementation distance of `circuit` from `U`.
    pub distance: f64,
    /// Classical-oracle gates executed by one run.
    pub classical_queries: usize,
}

/// The joint table keyed by `(x, prefix)`.
pub fn unitary_table(u: &Matrix, b: u32) -> Result<ClassicalBitOracle> {
    let n = check_unitary(u)?;
    let dim = 1usize << n;
    let mut table = ClassicalBitOracle {
        n,
        index_bits: n,
        precision_bits: b,
        entries: BTreeMap::new(),
    };
    for x in 0..dim {
        let col: Vec<_> = (0..dim).map(|i| u[(i, x)]).collect();
        table.insert_state(x as u64, &StateVector::from_amps_unchecked(col))?;
    }
    table.check()?;
    Ok(table)
}

/// The query loop controlled on `x`, on `[x: n][R: n][value: 4(b + 1)]`.
pub fn table_qram(table: &ClassicalBitOracle) -> Result<QramOracle> {
    let n = table.n;
    let b = table.precision_bits;
    let vb = pair_bits(b);
    let mut builder = CircuitBuilder::new(GateClass::Oracle);
    let x = builder.alloc(n);
    let r = builder.alloc(n);
    let v = builder.alloc(vb);
    let xq: Vec<usize> = (x..x + n).collect();
    let rq: Vec<usize> = (r..r + n).collect();
    let vq: Vec<usize> = (v..v + vb).collect();
    emit_oracle_prep(&mut builder, 0, &xq, &rq, &vq, b, UNITARY_ORACLE_PREFIX);
    let body = builder.finish()?;
    let mut bindings = level_bindings(&Arc::new(table.clone()), UNITARY_ORACLE_PREFIX);
    bindings.bind(
        DEFAULT_QRAM_ID.into(),
        OracleAction::Circuit(Box::new(body)),
    );
    let mut a = QramOracle::new(n, 2 * n + vb, DEFAULT_QRAM_ID, bindings)?;
    // rounding leaves the loaded columns slightly non-orthonormal
    a.tolerance = QRAM_TOL.max(libm::ldexp((n << (n + 3)) as f64, -(b as i32)));
    Ok(a)
}

pub fn oracle_synthesize(u: &Matrix, b: u32) -> Result<OracleUnitarySynthesis> {
    let table = unitary_table(u, b)?;
    let a = table_qram(&table)?;
    let per_call = match a.action() {
        OracleAction::Circuit(c) => c.gates().filter(|g| g.is_oracle_call()).count(),
        _ => 0,
    };
    let circuit = implement_via_qram(&a)?;
    let calls = circuit
        .circuit
        .gates()
        .filter(|g| g.is_oracle_call())
        .count();
    let distance = implementation_distance(
        &circuit.circuit,
        &circuit.bindings,
        u,
        &SimConfig::default(),
    )?;
    Ok(OracleUnitarySynthesis {
        table,
        circuit,
        distance,
        classical_queries: calls * per_call,
    })
}
