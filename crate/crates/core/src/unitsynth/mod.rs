//! Unitary synthesis pipelines: from a classical amplitude table, from a
//! gate-level qRAM (low depth), and by teleportation with Pauli retries.

pub mod depth;
pub mod gate_qram;
pub mod oracle;
pub mod teleport;

pub use depth::{depth_synthesis_resources, depth_synthesize, DepthResources};
pub use gate_qram::{
    build_gate_level_qram, circuit_qram, emit_gate_level_qram, lowered_gate_level_qram,
    GateLevelQram, QramStages,
};
pub use oracle::{oracle_synthesize, table_qram, unitary_table, OracleUnitarySynthesis};
pub use teleport::{
    bell_outcomes, teleport_synthesize, teleport_synthesize_with, PauliLabel, TeleportTrace,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qram::check_unitary;
use crate::sim::{implementation_distance, BoundCircuit, SimConfig, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Oracle,
    Depth,
    Teleport,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Depth => "depth",
            Method::Teleport => "teleport",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "oracle" => Some(Method::Oracle),
            "depth" => Some(Method::Depth),
            "teleport" => Some(Method::Teleport),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisJob {
    pub u: Matrix,
    pub method: Method,
    /// Used by [`Method::Oracle`].
    pub precision_bits: u32,
    /// Used by [`Method::Teleport`].
    pub seed: u64,
    /// State to teleport; `|0...0>` if absent.
    pub input: Option<StateVector>,
}

#[derive(Debug, Clone)]
pub enum SynthesisOutput {
    Circuit {
        circuit: BoundCircuit,
        /// Implementation distance, when within the simulation cap.
        distance: Option<f64>,
    },
    Teleport(TeleportTrace),
}

impl SynthesisJob {
    pub fn run(&self, cfg: &SimConfig) -> Result<SynthesisOutput> {
        let n = check_unitary(&self.u)?;
        let measure = |bc: &BoundCircuit| match implementation_distance(
            &bc.circuit,
            &bc.bindings,
            &self.u,
            cfg,
        ) {
            Ok(d) => Ok(Some(d)),
            Err(Error::TooManyQubits { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        match self.method {
            Method::Oracle => {
                let s = oracle_synthesize(&self.u, self.precision_bits)?;
                Ok(SynthesisOutput::Circuit {
                    circuit: s.circuit,
                    distance: Some(s.distance),
                })
            }
            Method::Depth => {
                let circuit = depth_synthesize(&self.u)?;
                let distance = measure(&circuit)?;
                Ok(SynthesisOutput::Circuit { circuit, distance })
            }
            Method::Teleport => {
                let psi = self.input.clone().unwrap_or_else(|| StateVector::zero(n));
                Ok(SynthesisOutput::Teleport(teleport_synthesize(
                    &self.u, &psi, self.seed,
                )?))
            }
        }
    }
}
