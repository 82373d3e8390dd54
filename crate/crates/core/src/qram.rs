//! qRAM oracles and the reduction from qRAM queries to implementing `U`.
//!
//! Every oracle here uses the layout `[x: n][U|x>: n][padding: m - 2n]`, so
//! `A|x, 0> = |x> (x) U|x> (x) |0>`.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::any::Any;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grover::emit_grover;
use crate::linalg::{qubits_of_dim, unitarity_deviation, Matrix, C64, UNITARITY_TOL, ZERO};
use crate::sim::{
    run_circuit, Backend, Bindings, BoundCircuit, Circuit, CircuitBuilder, ClassicalFunction,
    Direction, Gate, GateClass, GateSink, OracleAction, OracleId, QueryLog, Registers, SparseState,
};

/// Tolerance of the qRAM property for exact oracles.
pub const QRAM_TOL: f64 = 1e-9;
/// Largest `n` verified over every input; above it a seeded sample is used.
pub const EXHAUSTIVE_VERIFY_BITS: usize = 8;
pub const VERIFY_SAMPLES: usize = 256;

pub const DEFAULT_QRAM_ID: &str = "qram";

#[derive(Debug, Clone)]
pub struct QramOracle {
    pub n: usize,
    pub m: usize,
    /// Name the action is bound to in `bindings`.
    pub id: OracleId,
    /// The action plus anything it calls.
    pub bindings: Bindings,
    /// Allowed deviation from the qRAM property (rounded oracles need slack).
    pub tolerance: f64,
    pub forward_queries: u64,
    pub backward_queries: u64,
}

impl QramOracle {
    pub fn new(n: usize, m: usize, id: impl Into<OracleId>, bindings: Bindings) -> Result<Self> {
        let id = id.into();
        if n == 0 || m < 2 * n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "qRAM needs m >= 2n >= 2, got n = {n}, m = {m}"
            )));
        }
        let w = bindings.get(&id)?.width();
        if w != m {
            return Err(Error::DimensionMismatch(alloc::format!(
                "oracle `{id}` acts on {w} qubits, expected {m}"
            )));
        }
        Ok(QramOracle {
            n,
            m,
            id,
            bindings,
            tolerance: QRAM_TOL,
            forward_queries: 0,
            backward_queries: 0,
        })
    }

    pub fn action(&self) -> &OracleAction {
        self.bindings
            .get(&self.id)
            .expect("checked at construction")
    }

    /// Adds the calls to this oracle found in `log`.
    pub fn record(&mut self, log: &QueryLog) {
        let (f, b) = log.get(&self.id);
        self.forward_queries += f;
        self.backward_queries += b;
    }

    /// `A` as a one-gate circuit on `m` qubits.
    pub fn as_circuit(&self) -> Circuit {
        Circuit::new(
            self.m,
            GateClass::Qnc,
            Registers::new(),
            vec![vec![Gate::oracle(
                self.id.clone(),
                Direction::Forward,
                (0..self.m).collect(),
            )]],
        )
        .expect("single oracle call is well formed")
    }

    /// `A|x, 0>` projected onto `|x> (x) . (x) |0>`, and the squared mass outside.
    fn column(&self, x: usize) -> Result<(Vec<C64>, f64)> {
        let (n, m) = (self.n, self.m);
        let xq: Vec<usize> = (0..n).collect();
        let block: Vec<usize> = (n..2 * n).collect();
        let mut s = SparseState::basis(m, &xq, x as u128);
        run_circuit(&mut s, &self.as_circuit(), &self.bindings)?;
        let reference = SparseState::basis(m, &xq, x as u128);
        let want: Vec<u64> = reference
            .entries()
            .next()
            .map(|(k, _)| k.to_vec())
            .unwrap_or_default();
        let mut col = vec![ZERO; 1 << n];
        let mut inside = 0.0;
        for (key, a) in s.entries() {
            let mut k = key.to_vec();
            for &q in &block {
                k[q >> 6] &= !(1u64 << (q & 63));
            }
            if k == want {
                let y = SparseState::key_value(key, &block) as usize;
                col[y] += a;
                inside += a.norm_sqr();
            }
        }
        Ok((col, (s.norm_sqr() - inside).max(0.0)))
    }

    /// The unitary `A` loads, read off column by column, and the worst
    /// deviation from the qRAM layout (mass leaking outside the block).
    pub fn implied_unitary(&self) -> Result<(Matrix, f64)> {
        if self.n > EXHAUSTIVE_VERIFY_BITS {
            return Err(Error::InvalidParameter(alloc::format!(
                "reading a {}-qubit unitary off a qRAM is not supported",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let mut u = Matrix::zeros(dim, dim);
        let mut worst = 0.0f64;
        for x in 0..dim {
            let (col, outside) = self.column(x)?;
            for (y, a) in col.into_iter().enumerate() {
                u[(y, x)] = a;
            }
            worst = worst.max(libm::sqrt(outside));
        }
        Ok((u, worst))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QramReport {
    pub ok: bool,
    pub worst_deviation: f64,
}

/// Number of qubits `U` acts on, after checking it is unitary.
pub fn check_unitary(u: &Matrix) -> Result<usize> {
    let n = match qubits_of_dim(u.nrows()) {
        Some(n) if n >= 1 && u.nrows() == u.ncols() => n,
        _ => {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected a 2^n x 2^n matrix, got {}x{}",
                u.nrows(),
                u.ncols()
            )))
        }
    };
    let dev = unitarity_deviation(u);
    if !(dev <= UNITARITY_TOL) {
        return Err(Error::NonUnitaryInput(dev));
    }
    Ok(n)
}

/// `A|x, y> = |x> (x) U|x xor y>`: CNOTs copy `x`, then `U` acts on the copy.
pub fn functional_qram(u: &Matrix) -> Result<QramOracle> {
    let n = check_unitary(u)?;
    let u_id = OracleId::new("qram.U");
    let mut layers = vec![(0..n).map(|i| Gate::cnot(i, n + i)).collect::<Vec<_>>()];
    layers.push(vec![Gate::oracle(
        u_id.clone(),
        Direction::Forward,
        (n..2 * n).collect(),
    )]);
    let body = Circuit::new(2 * n, GateClass::Qnc, Registers::new(), layers)?;
    let bindings = Bindings::new()
        .with(DEFAULT_QRAM_ID, OracleAction::Circuit(Box::new(body)))
        .with(u_id, OracleAction::Unitary(u.clone()));
    QramOracle::new(n, 2 * n, DEFAULT_QRAM_ID, bindings)
}

/// `(x, y) -> (x, y xor sigma(x))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationXor {
    pub n: usize,
    pub table: Vec<u64>,
}

impl ClassicalFunction for PermutationXor {
    fn input_bits(&self) -> usize {
        self.n
    }
    fn output_bits(&self) -> usize {
        self.n
    }
    fn eval(&self, input: u128) -> u128 {
        self.table[input as usize] as u128
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// XOR oracle of a permutation of `n`-bit strings; a `P_sigma`-qRAM.
pub fn permutation_qram(sigma: &[u64]) -> Result<QramOracle> {
    let n = match qubits_of_dim(sigma.len()) {
        Some(n) if n >= 1 && n <= 30 => n,
        _ => {
            return Err(Error::DimensionMismatch(alloc::format!(
                "permutation table of length {} is not 2^n",
                sigma.len()
            )))
        }
    };
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s as usize >= sigma.len() || core::mem::replace(&mut seen[s as usize], true) {
            return Err(Error::NotABijection(n));
        }
    }
    let f = PermutationXor {
        n,
        table: sigma.to_vec(),
    };
    let bindings = Bindings::new().with(DEFAULT_QRAM_ID, OracleAction::Classical(Arc::new(f)));
    QramOracle::new(n, 2 * n, DEFAULT_QRAM_ID, bindings)
}

/// Permutation matrix `|x> -> |sigma(x)>`.
pub fn permutation_matrix(sigma: &[u64]) -> Matrix {
    let d = sigma.len();
    let mut p = Matrix::zeros(d, d);
    for (x, &s) in sigma.iter().enumerate() {
        p[(s as usize, x)] = crate::linalg::ONE;
    }
    p
}

/// Checks `A|x, 0> = |x> (x) U|x> (x) |0>` on every `x` (or a seeded sample of
/// 256 when `n > 8`); the deviation is the 2-norm error of the output state.
pub fn verify_qram(a: &QramOracle, u: &Matrix) -> Result<QramReport> {
    if u.nrows() != 1 << a.n || u.ncols() != 1 << a.n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "qRAM is for {} qubits, unitary is {}x{}",
            a.n,
            u.nrows(),
            u.ncols()
        )));
    }
    let xs: Vec<usize> = if a.n <= EXHAUSTIVE_VERIFY_BITS {
        (0..1 << a.n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..VERIFY_SAMPLES)
            .map(|_| rng.random_range(0..1usize << a.n))
            .collect()
    };
    let mut worst = 0.0f64;
    for x in xs {
        let (col, outside) = a.column(x)?;
        let inside: f64 = col
            .iter()
            .enumerate()
            .map(|(y, c)| (*c - u[(y, x)]).norm_sqr())
            .sum();
        worst = worst.max(libm::sqrt(inside + outside));
    }
    Ok(QramReport {
        ok: worst <= a.tolerance,
        worst_deviation: worst,
    })
}

/// Places `C = (A (x) I)(I_n (x) R)(A^dag (x) I)` in three layers, where `R`
/// reflects `block` = 0 with `flag` = 1. `address` are `A`'s first `n` qubits.
pub fn emit_reflection<S: GateSink + ?Sized>(
    sink: &mut S,
    layer: usize,
    id: &OracleId,
    address: &[usize],
    block: &[usize],
    flag: usize,
) -> usize {
    let a_targets: Vec<usize> = address.iter().chain(block).copied().collect();
    let mut r_targets = block.to_vec();
    r_targets.push(flag);
    let mut pattern = vec![false; block.len()];
    pattern.push(true);
    sink.place(
        layer,
        Gate::oracle(id.clone(), Direction::Backward, a_targets.clone()),
    );
    sink.place(layer + 1, Gate::reflection(r_targets, pattern));
    sink.place(
        layer + 2,
        Gate::oracle(id.clone(), Direction::Forward, a_targets),
    );
    3
}

/// `C` on `m + 1` qubits laid out `[x: n][U|x>, padding: m - n][flag]`.
pub fn reflection_from_qram(a: &QramOracle) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(GateClass::Qacf0);
    let x = b.alloc(a.n);
    let block = b.alloc(a.m - a.n);
    let flag = b.alloc(1);
    b.name_register("input", x, a.n);
    b.name_register("qram", block, a.m - a.n);
    b.name_register("flag", flag, 1);
    let xq: Vec<usize> = (x..x + a.n).collect();
    let bq: Vec<usize> = (block..block + a.m - a.n).collect();
    emit_reflection(&mut b, 0, &a.id, &xq, &bq, flag);
    b.finish()
}

/// Emits the full reduction for an `(n, m)` qRAM bound to `id`: one call to
/// `A`, reverse Grover with `C` as the oracle, then a swap of `U|x>` into the
/// input register. Layout `[input: n][flag][qram: m - n]`, `m + 1` qubits.
pub fn emit_implement_via_qram<S: GateSink + ?Sized>(
    sink: &mut S,
    n: usize,
    m: usize,
    id: &OracleId,
) -> Result<usize> {
    let input = sink.alloc(n);
    let flag = sink.alloc(1);
    let block = sink.alloc(m - n);
    sink.name_register("input", input, n);
    sink.name_register("output", input, n);
    sink.name_register("flag", flag, 1);
    sink.name_register("qram", block, m - n);
    let iq: Vec<usize> = (input..input + n).collect();
    let bq: Vec<usize> = (block..block + m - n).collect();
    let a_targets: Vec<usize> = iq.iter().chain(&bq).copied().collect();
    sink.place(0, Gate::oracle(id.clone(), Direction::Forward, a_targets));
    let end = emit_grover(sink, 1, &iq, flag, true, &mut |s, l| {
        emit_reflection(s, l, id, &iq, &bq, flag)
    })?;
    for i in 0..n {
        sink.place(end, Gate::swap(iq[i], bq[i]));
    }
    Ok(end + 1)
}

/// Circuit implementing `U` exactly from `1 + 2t` queries to its qRAM.
pub fn implement_via_qram(a: &QramOracle) -> Result<BoundCircuit> {
    let (u, structural) = a.implied_unitary()?;
    let dev = structural.max(unitarity_deviation(&u));
    if !(dev <= a.tolerance) {
        return Err(Error::QramPropertyViolated(dev));
    }
    let mut b = CircuitBuilder::new(GateClass::Qacf0);
    emit_implement_via_qram(&mut b, a.n, a.m, &a.id)?;
    Ok(BoundCircuit {
        circuit: b.finish()?,
        bindings: a.bindings.clone(),
    })
}

/// Runs `circuit` on a sparse basis state and records the queries to `a`.
pub fn run_counted<B: Backend + ?Sized>(
    state: &mut B,
    circuit: &Circuit,
    a: &mut QramOracle,
) -> Result<QueryLog> {
    let log = run_circuit(state, circuit, &a.bindings)?;
    a.record(&log);
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::grover_params;
    use crate::linalg::{c64, hadamard, pauli_x, random_unitary, ONE};
    use crate::sim::{circuit_as_matrix, implementation_distance, SimConfig, StateVector};

    fn mat(m: &crate::linalg::Mat2) -> Matrix {
        Matrix::from_fn(2, 2, |i, j| m[i][j])
    }

    #[test]
    fn functional_identity_is_cnot() {
        let a = functional_qram(&Matrix::identity(2, 2)).unwrap();
        let m = circuit_as_matrix(&a.as_circuit(), &a.bindings, &SimConfig::default()).unwrap();
        for (j, i) in [0usize, 1, 3, 2].into_iter().enumerate() {
            assert_eq!(m[(i, j)], ONE);
        }
    }

    #[test]
    fn functional_hadamard_column() {
        let a = functional_qram(&mat(&hadamard())).unwrap();
        let mut s = StateVector::basis(2, 0b10);
        run_circuit(&mut s, &a.as_circuit(), &a.bindings).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps()[2] - c64(r, 0.0)).norm() < 1e-12);
        assert!((s.amps()[3] - c64(-r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn verify_detects_wrong_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        let v = random_unitary(4, &mut rng);
        let a = functional_qram(&u).unwrap();
        let good = verify_qram(&a, &u).unwrap();
        assert!(good.ok && good.worst_deviation <= 1e-10);
        assert!(!verify_qram(&a, &v).unwrap().ok);
        assert!(matches!(
            verify_qram(&a, &Matrix::identity(2, 2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn permutation_oracle() {
        let sigma = [1u64, 2, 3, 0];
        let a = permutation_qram(&sigma).unwrap();
        let m = circuit_as_matrix(&a.as_circuit(), &a.bindings, &SimConfig::default()).unwrap();
        for x in 0..4usize {
            for y in 0..4usize {
                let out = (x << 2) | (y ^ sigma[x] as usize);
                assert_eq!(m[(out, (x << 2) | y)], ONE);
            }
        }
        assert!((&m * &m - Matrix::identity(16, 16))
            .iter()
            .all(|z| z.norm() < 1e-15));
        assert!(verify_qram(&a, &permutation_matrix(&sigma)).unwrap().ok);
        assert_eq!(
            permutation_qram(&[0, 0]).unwrap_err(),
            Error::NotABijection(1)
        );
    }

    #[test]
    fn reflection_closed_form() {
        let a = functional_qram(&Matrix::identity(2, 2)).unwrap();
        let c = reflection_from_qram(&a).unwrap();
        let m = circuit_as_matrix(&c, &a.bindings, &SimConfig::default()).unwrap();
        let mut want = Matrix::identity(8, 8);
        for y in 0..2usize {
            let i = (y << 2) | (y << 1) | 1;
            want[(i, i)] -= c64(2.0, 0.0);
        }
        assert!((&m - &want).iter().all(|z| z.norm() < 1e-10));
        assert!((&m * &m - Matrix::identity(8, 8))
            .iter()
            .all(|z| z.norm() < 1e-10));
        assert_eq!(c.gates().filter(|g| g.is_oracle_call()).count(), 2);
    }

    #[test]
    fn bit_flip_end_to_end() {
        let mut a = functional_qram(&mat(&pauli_x())).unwrap();
        let bc = implement_via_qram(&a).unwrap();
        let mut s = StateVector::zero(bc.circuit.num_qubits());
        run_counted(&mut s, &bc.circuit, &mut a).unwrap();
        assert!(s.probability(1 << (bc.circuit.num_qubits() - 1)) > 1.0 - 1e-9);
        let t = grover_params(1).unwrap().t as u64;
        assert_eq!(a.forward_queries, 1 + t);
        assert_eq!(a.backward_queries, t);
    }

    #[test]
    fn random_unitaries_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3usize {
            let u = random_unitary(1 << n, &mut rng);
            let a = functional_qram(&u).unwrap();
            let bc = implement_via_qram(&a).unwrap();
            assert_eq!(bc.circuit.num_qubits(), 2 * n + 1);
            let d = implementation_distance(&bc.circuit, &bc.bindings, &u, &SimConfig::default())
                .unwrap();
            assert!(d <= 1e-8, "n={n} d={d}");
            let t = grover_params(n).unwrap().t;
            let calls = bc.circuit.gates().filter(|g| g.is_oracle_call()).count();
            assert_eq!(calls, 1 + 2 * t);
        }
    }

    #[test]
    fn rejects_broken_qram() {
        // U|x> lands in the block but x is overwritten
        let n = 1;
        let body = Circuit::new(
            2,
            GateClass::Qnc,
            Registers::new(),
            vec![vec![Gate::one_qubit(0, hadamard())]],
        )
        .unwrap();
        let bindings = Bindings::new().with(DEFAULT_QRAM_ID, OracleAction::Circuit(Box::new(body)));
        let a = QramOracle::new(n, 2, DEFAULT_QRAM_ID, bindings).unwrap();
        assert!(matches!(
            implement_via_qram(&a),
            Err(Error::QramPropertyViolated(_))
        ));
    }
}
