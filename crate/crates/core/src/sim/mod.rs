//! Circuit IR, simulators, lowering and metrics.

pub mod backend;
pub mod circuit;
pub mod dense;
pub mod fixed;
pub mod gate;
pub mod lower;
pub mod metrics;
pub mod oracle;
pub mod resources;
pub mod sparse;

pub use backend::{apply_gate_to, run_circuit, run_layers, Backend, QueryLog};
pub use circuit::{inverse, Circuit, CircuitBuilder, GateClass, GateSink, Registers};
pub use dense::StateVector;
pub use gate::{Direction, Gate, GateKind, OracleId};
pub use lower::{lower_to_qnc, lowering_cost, LoweringCost};
pub use metrics::{circuit_as_matrix, implementation_distance, operator_norm, SimConfig};
pub use oracle::{Bindings, BoundCircuit, ClassicalFunction, OracleAction};
pub use resources::{expanded_resources, resources, ResourceReport, ResourceTally};
pub use sparse::SparseState;

use crate::error::Result;

/// Applies one gate to a copy of `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate, bindings: &Bindings) -> Result<StateVector> {
    gate.validate(state.num_qubits())?;
    let mut out = state.clone();
    apply_gate_to(&mut out, gate, false, bindings, &mut QueryLog::new())?;
    Ok(out)
}

/// Applies `circuit` to a copy of `state`. The report's query counts are the
/// oracle calls actually executed at the top level.
pub fn apply_circuit(
    state: &StateVector,
    circuit: &Circuit,
    bindings: &Bindings,
) -> Result<(StateVector, ResourceReport)> {
    let mut out = state.clone();
    run_circuit(&mut out, circuit, bindings)?;
    Ok((out, resources(circuit)))
}
