//! Low-depth synthesis: the gate-level qRAM, lowered, driven by the qRAM
//! reduction.

use crate::error::Result;
use crate::linalg::Matrix;
use crate::qram::{check_unitary, emit_implement_via_qram, implement_via_qram, DEFAULT_QRAM_ID};
use crate::sim::{lower_to_qnc, BoundCircuit, OracleId, ResourceReport, ResourceTally};

use super::gate_qram::{emit_gate_level_qram, lowered_gate_level_qram};

/// QNC circuit implementing `U`; its `qram` oracle is the lowered
/// gate-level qRAM (bound in the returned bindings).
pub fn depth_synthesize(u: &Matrix) -> Result<BoundCircuit> {
    let a = lowered_gate_level_qram(u)?;
    let bc = implement_via_qram(&a)?;
    Ok(BoundCircuit {
        circuit: lower_to_qnc(&bc.circuit)?,
        bindings: bc.bindings,
    })
}

/// Resource counts of [`depth_synthesize`] with the qRAM body expanded,
/// computed by streaming gates instead of building circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthResources {
    /// Whole circuit, every qRAM call expanded into its lowered body.
    pub report: ResourceReport,
    /// Qubits of the whole circuit, including lowering ancillae.
    pub num_qubits: usize,
    pub qram_depth: usize,
    pub qram_size: usize,
    pub qram_qubits: usize,
}

pub fn depth_synthesis_resources(u: &Matrix) -> Result<DepthResources> {
    let n = check_unitary(u)?;
    let mut a = ResourceTally::new();
    emit_gate_level_qram(&mut a, u)?;
    let low = a.lowered_report();
    let m = a.num_qubits() + a.lowering_pool();
    let mut outer = ResourceTally::new().with_body(DEFAULT_QRAM_ID, low.depth, low.size);
    emit_implement_via_qram(&mut outer, n, m, &OracleId::new(DEFAULT_QRAM_ID))?;
    Ok(DepthResources {
        report: outer.expanded_lowered_report(),
        num_qubits: outer.num_qubits() + outer.lowering_pool(),
        qram_depth: low.depth,
        qram_size: low.size,
        qram_qubits: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, random_unitary};
    use crate::sim::{expanded_resources, implementation_distance, SimConfig};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bit_flip() {
        let x = pauli_x();
        let u = Matrix::from_fn(2, 2, |i, j| x[i][j]);
        let bc = depth_synthesize(&u).unwrap();
        let d =
            implementation_distance(&bc.circuit, &bc.bindings, &u, &SimConfig::default()).unwrap();
        assert!(d <= 1e-8, "{d}");
    }

    #[test]
    fn tally_matches_materialized() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=2usize {
            let u = random_unitary(1 << n, &mut rng);
            let bc = depth_synthesize(&u).unwrap();
            let r = expanded_resources(&bc.circuit, &bc.bindings).unwrap();
            let t = depth_synthesis_resources(&u).unwrap();
            assert_eq!(t.report.depth, r.depth);
            assert_eq!(t.report.size, r.size);
            assert_eq!(t.report.queries(), r.queries());
            assert_eq!(t.num_qubits, bc.circuit.num_qubits());
            assert_eq!(t.report.ancillae, r.ancillae);
        }
    }
}
