use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use core::any::Any;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::linalg::{qubits_of_dim, Matrix};
use crate::sim::circuit::Circuit;
use crate::sim::gate::OracleId;

/// Reversible classical oracle `|x, y> -> |x, y xor f(x)>`.
pub trait ClassicalFunction: Debug + Send + Sync {
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    fn eval(&self, input: u128) -> u128;
    fn as_any(&self) -> &dyn Any;
}

#[derive(Debug, Clone)]
pub enum OracleAction {
    /// Dense unitary on the call targets.
    Unitary(Matrix),
    /// Circuit whose qubit `i` is the `i`-th call target.
    Circuit(Box<Circuit>),
    /// XOR oracle; the targets are the input bits followed by the output bits.
    Classical(Arc<dyn ClassicalFunction>),
}

impl OracleAction {
    pub fn width(&self) -> usize {
        match self {
            OracleAction::Unitary(m) => qubits_of_dim(m.nrows()).unwrap_or(usize::MAX),
            OracleAction::Circuit(c) => c.num_qubits(),
            OracleAction::Classical(f) => f.input_bits() + f.output_bits(),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            OracleAction::Unitary(m) => {
                if m.nrows() != m.ncols() || qubits_of_dim(m.nrows()).is_none() {
                    return Err(Error::DimensionMismatch(alloc::format!(
                        "oracle matrix is {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let dev = crate::linalg::unitarity_deviation(m);
                if dev > crate::linalg::UNITARITY_TOL {
                    return Err(Error::NonUnitaryGate(dev));
                }
                Ok(())
            }
            OracleAction::Circuit(_) => Ok(()),
            OracleAction::Classical(f) => {
                if f.input_bits() > 128 || f.output_bits() > 128 {
                    Err(Error::MalformedOracle(alloc::format!(
                        "classical oracle with {} -> {} bits exceeds 128-bit words",
                        f.input_bits(),
                        f.output_bits()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Global oracle namespace; circuit-backed actions resolve nested calls here too.
#[derive(Debug, Clone, Default)]
pub struct Bindings(BTreeMap<OracleId, OracleAction>);

impl Bindings {
    pub fn new() -> Self {
        Bindings(BTreeMap::new())
    }

    pub fn bind(&mut self, id: OracleId, action: OracleAction) -> &mut Self {
        self.0.insert(id, action);
        self
    }

    pub fn with(mut self, id: impl Into<OracleId>, action: OracleAction) -> Self {
        self.0.insert(id.into(), action);
        self
    }

    pub fn get(&self, id: &OracleId) -> Result<&OracleAction> {
        self.0
            .get(id)
            .ok_or_else(|| Error::UnboundOracle(id.0.clone()))
    }

    pub fn merge(&mut self, other: &Bindings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OracleId, &OracleAction)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<alloc::string::String> for OracleId {
    fn from(s: alloc::string::String) -> Self {
        OracleId(s)
    }
}

/// A circuit together with the oracles it calls.
#[derive(Debug, Clone)]
pub struct BoundCircuit {
    pub circuit: Circuit,
    pub bindings: Bindings,
}
