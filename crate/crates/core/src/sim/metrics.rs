use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{qubits_of_dim, Matrix, C64, ZERO};
use crate::sim::backend::run_circuit;
use crate::sim::circuit::Circuit;
use crate::sim::dense::StateVector;
use crate::sim::oracle::Bindings;
use crate::sim::sparse::{SparseState, DEFAULT_MAX_SUPPORT};

pub const DEFAULT_QUBIT_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Cap on qubits for dense simulation and on input qubits of distance checks.
    pub qubit_cap: usize,
    /// Cap on sparse support.
    pub max_support: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_cap: DEFAULT_QUBIT_CAP,
            max_support: DEFAULT_MAX_SUPPORT,
        }
    }
}

/// Unitary of the circuit; column `j` is the circuit applied to basis state `j`.
pub fn circuit_as_matrix(
    circuit: &Circuit,
    bindings: &Bindings,
    cfg: &SimConfig,
) -> Result<Matrix> {
    let m = circuit.num_qubits();
    if m > cfg.qubit_cap {
        return Err(Error::TooManyQubits {
            requested: m,
            cap: cfg.qubit_cap,
        });
    }
    let dim = 1usize << m;
    let mut out = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = StateVector::basis(m, j);
        run_circuit(&mut s, circuit, bindings)?;
        for (i, a) in s.amps().iter().enumerate() {
            out[(i, j)] = *a;
        }
    }
    Ok(out)
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Qubits holding the `n`-qubit input: the `input` register if named, else `0..n`.
pub fn input_qubits(circuit: &Circuit, n: usize) -> Result<Vec<usize>> {
    match circuit.register("input") {
        Some(r) if r.len() == n => Ok(r.collect()),
        Some(r) => Err(Error::DimensionMismatch(alloc::format!(
            "input register has {} qubits, unitary acts on {n}",
            r.len()
        ))),
        None if n <= circuit.num_qubits() => Ok((0..n).collect()),
        None => Err(Error::DimensionMismatch(alloc::format!(
            "unitary on {n} qubits, circuit has {}",
            circuit.num_qubits()
        ))),
    }
}

/// `|| C (I_n (x) |0...0>) - U (x) |0...0> ||_op`, with `U` acting on the
/// input register. Simulated sparsely column by column; the cap applies to `n`.
pub fn implementation_distance(
    circuit: &Circuit,
    bindings: &Bindings,
    u: &Matrix,
    cfg: &SimConfig,
) -> Result<f64> {
    let n = match qubits_of_dim(u.nrows()) {
        Some(n) if u.nrows() == u.ncols() => n,
        _ => {
            return Err(Error::DimensionMismatch(alloc::format!(
                "target is {}x{}",
                u.nrows(),
                u.ncols()
            )))
        }
    };
    if n > cfg.qubit_cap {
        return Err(Error::TooManyQubits {
            requested: n,
            cap: cfg.qubit_cap,
        });
    }
    let input = input_qubits(circuit, n)?;
    let m = circuit.num_qubits();
    let dim = 1usize << n;
    let mut rows: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut columns: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim);
    for x in 0..dim {
        let mut s = SparseState::basis(m, &input, x as u128).with_max_support(cfg.max_support);
        run_circuit(&mut s, circuit, bindings)?;
        let mut col: Vec<(usize, C64)> = Vec::new();
        for (key, a) in s.entries() {
            let next = rows.len();
            let r = *rows.entry(key.to_vec()).or_insert(next);
            col.push((r, a));
        }
        for z in 0..dim {
            let e = u[(z, x)];
            if e == ZERO {
                continue;
            }
            let ideal = SparseState::basis(m, &input, z as u128);
            let key = ideal
                .entries()
                .next()
                .map(|(k, _)| k.to_vec())
                .unwrap_or_default();
            let next = rows.len();
            let r = *rows.entry(key).or_insert(next);
            col.push((r, -e));
        }
        columns.push(col);
    }
    let mut d = Matrix::zeros(rows.len(), dim);
    for (x, col) in columns.iter().enumerate() {
        for &(r, a) in col {
            d[(r, x)] += a;
        }
    }
    Ok(operator_norm(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, pauli_x, ONE};
    use crate::sim::circuit::{GateClass, Registers};
    use crate::sim::gate::Gate;
    use alloc::vec;

    #[test]
    fn hadamard_matrix() {
        let c = Circuit::new(
            1,
            GateClass::Qnc,
            Registers::new(),
            vec![vec![Gate::one_qubit(0, hadamard())]],
        )
        .unwrap();
        let m = circuit_as_matrix(&c, &Bindings::new(), &SimConfig::default()).unwrap();
        let h = hadamard();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - h[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cnot_matrix_is_permutation() {
        let c = Circuit::new(
            2,
            GateClass::Qnc,
            Registers::new(),
            vec![vec![Gate::cnot(0, 1)]],
        )
        .unwrap();
        let m = circuit_as_matrix(&c, &Bindings::new(), &SimConfig::default()).unwrap();
        let perm = [0, 1, 3, 2];
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(m[(i, j)], ONE);
        }
    }

    #[test]
    fn distance_examples() {
        let id = Matrix::identity(2, 2);
        let empty = Circuit::empty(1);
        assert!(
            implementation_distance(&empty, &Bindings::new(), &id, &SimConfig::default()).unwrap()
                < 1e-15
        );
        let x = Circuit::new(
            1,
            GateClass::Qnc,
            Registers::new(),
            vec![vec![Gate::one_qubit(0, pauli_x())]],
        )
        .unwrap();
        let d = implementation_distance(&x, &Bindings::new(), &id, &SimConfig::default()).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let c = Circuit::empty(15);
        assert!(matches!(
            circuit_as_matrix(&c, &Bindings::new(), &SimConfig::default()),
            Err(Error::TooManyQubits { .. })
        ));
    }
}
