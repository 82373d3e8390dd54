use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint2, adjoint4, cnot, controlled, is_finite, swap, unitarity_deviation2,
    unitarity_deviation4, Mat2, Mat4, UNITARITY_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Name of an oracle placeholder, resolved through [`crate::sim::Bindings`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleId(pub String);

impl OracleId {
    pub fn new(name: impl Into<String>) -> Self {
        OracleId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OracleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OracleId {
    fn from(s: &str) -> Self {
        OracleId::new(s)
    }
}

/// Gate kinds. Target conventions:
///
/// * `Toffoli`: `targets[0]` is flipped iff every other target is 1.
/// * `Fanout`: `targets[0]` is XORed onto every other target.
/// * `BasisReflection`: `I - 2|p><p|` with `pattern[i]` the bit on `targets[i]`.
/// * `PrepFromRegister`: the first `4 (b + 1)` targets hold a fixed-point
///   encoding of two complex amplitudes; the last target is rotated by the
///   one-qubit unitary that prepares the (renormalized) decoded pair.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    OneQubit(Mat2),
    TwoQubit(Box<Mat4>),
    Toffoli,
    Fanout,
    BasisReflection(Vec<bool>),
    OracleCall {
        direction: Direction,
        oracle: OracleId,
    },
    PrepFromRegister {
        precision_bits: u32,
        adjoint: bool,
    },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::OneQubit(_) => "one_qubit",
            GateKind::TwoQubit(_) => "two_qubit",
            GateKind::Toffoli => "toffoli",
            GateKind::Fanout => "fanout",
            GateKind::BasisReflection(_) => "basis_reflection",
            GateKind::OracleCall { .. } => "oracle_call",
            GateKind::PrepFromRegister { .. } => "prep_from_register",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn one_qubit(q: usize, m: Mat2) -> Self {
        Gate {
            kind: GateKind::OneQubit(m),
            targets: vec![q],
        }
    }

    /// `q0` is the more significant qubit of the 4x4 matrix.
    pub fn two_qubit(q0: usize, q1: usize, m: Mat4) -> Self {
        Gate {
            kind: GateKind::TwoQubit(Box::new(m)),
            targets: vec![q0, q1],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::two_qubit(control, target, cnot())
    }

    pub fn controlled(control: usize, target: usize, m: &Mat2) -> Self {
        Gate::two_qubit(control, target, controlled(m))
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::two_qubit(a, b, swap())
    }

    pub fn toffoli(target: usize, controls: &[usize]) -> Self {
        let mut targets = Vec::with_capacity(controls.len() + 1);
        targets.push(target);
        targets.extend_from_slice(controls);
        Gate {
            kind: GateKind::Toffoli,
            targets,
        }
    }

    pub fn fanout(source: usize, outputs: &[usize]) -> Self {
        let mut targets = Vec::with_capacity(outputs.len() + 1);
        targets.push(source);
        targets.extend_from_slice(outputs);
        Gate {
            kind: GateKind::Fanout,
            targets,
        }
    }

    pub fn reflection(targets: Vec<usize>, pattern: Vec<bool>) -> Self {
        Gate {
            kind: GateKind::BasisReflection(pattern),
            targets,
        }
    }

    pub fn oracle(oracle: OracleId, direction: Direction, targets: Vec<usize>) -> Self {
        Gate {
            kind: GateKind::OracleCall { direction, oracle },
            targets,
        }
    }

    pub fn prep_from_register(register: &[usize], target: usize, precision_bits: u32) -> Self {
        let mut targets = register.to_vec();
        targets.push(target);
        Gate {
            kind: GateKind::PrepFromRegister {
                precision_bits,
                adjoint: false,
            },
            targets,
        }
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn adjoint(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::OneQubit(m) => GateKind::OneQubit(adjoint2(m)),
            GateKind::TwoQubit(m) => GateKind::TwoQubit(Box::new(adjoint4(m))),
            GateKind::OracleCall { direction, oracle } => GateKind::OracleCall {
                direction: direction.flipped(),
                oracle: oracle.clone(),
            },
            GateKind::PrepFromRegister {
                precision_bits,
                adjoint,
            } => GateKind::PrepFromRegister {
                precision_bits: *precision_bits,
                adjoint: !adjoint,
            },
            self_inverse => self_inverse.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
        }
    }

    /// Checks arity, duplicate targets, range and unitarity.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for &q in &self.targets {
            if q >= num_qubits {
                return Err(Error::TargetOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
        }
        let mut sorted = self.targets.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGate(format!(
                "{} gate has duplicate targets",
                self.kind.name()
            )));
        }
        let k = self.targets.len();
        let arity_ok = match &self.kind {
            GateKind::OneQubit(_) => k == 1,
            GateKind::TwoQubit(_) => k == 2,
            GateKind::Toffoli | GateKind::Fanout => k >= 2,
            GateKind::BasisReflection(p) => k >= 1 && p.len() == k,
            GateKind::OracleCall { .. } => k >= 1,
            GateKind::PrepFromRegister { precision_bits, .. } => {
                *precision_bits >= 1
                    && *precision_bits <= 31
                    && k == 4 * (*precision_bits as usize + 1) + 1
            }
        };
        if !arity_ok {
            return Err(Error::InvalidGate(format!(
                "{} gate cannot act on {k} targets",
                self.kind.name()
            )));
        }
        let deviation = match &self.kind {
            GateKind::OneQubit(m) => {
                if !m.iter().flatten().all(|z| is_finite(*z)) {
                    f64::INFINITY
                } else {
                    unitarity_deviation2(m)
                }
            }
            GateKind::TwoQubit(m) => {
                if !m.iter().flatten().all(|z| is_finite(*z)) {
                    f64::INFINITY
                } else {
                    unitarity_deviation4(m)
                }
            }
            _ => 0.0,
        };
        if deviation > UNITARITY_TOL {
            return Err(Error::NonUnitaryGate(deviation));
        }
        Ok(())
    }

    pub fn is_oracle_call(&self) -> bool {
        matches!(self.kind, GateKind::OracleCall { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, hadamard, pauli_x};

    #[test]
    fn validation_rejects_bad_gates() {
        assert!(Gate::one_qubit(3, pauli_x()).validate(3).is_err());
        assert!(Gate::toffoli(0, &[0]).validate(3).is_err());
        assert!(Gate::fanout(1, &[]).validate(3).is_err());
        let bad = [
            [c64(1.0, 0.0), c64(1.0, 0.0)],
            [c64(0.0, 0.0), c64(1.0, 0.0)],
        ];
        assert!(matches!(
            Gate::one_qubit(0, bad).validate(1),
            Err(Error::NonUnitaryGate(_))
        ));
        let nan = [
            [c64(f64::NAN, 0.0), c64(0.0, 0.0)],
            [c64(0.0, 0.0), c64(1.0, 0.0)],
        ];
        assert!(Gate::one_qubit(0, nan).validate(1).is_err());
        assert!(Gate::one_qubit(0, hadamard()).validate(1).is_ok());
        assert!(Gate::reflection(vec![0, 1], vec![true])
            .validate(2)
            .is_err());
    }

    #[test]
    fn adjoint_flips_oracle_direction() {
        let g = Gate::oracle("A".into(), Direction::Forward, vec![0, 1]);
        let a = g.adjoint();
        assert!(matches!(
            a.kind,
            GateKind::OracleCall {
                direction: Direction::Backward,
                ..
            }
        ));
        assert_eq!(a.adjoint(), g);
    }
}
