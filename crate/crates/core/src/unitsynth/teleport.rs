//! Applying `U` by teleporting through its Choi state, retrying on Pauli
//! byproducts: after outcome `P`, Bob holds `P U P |psi>`, so the next round
//! targets `U P U^dag P`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{cnot, hadamard, nearest_unitary, Matrix, C64, ZERO};
use crate::qram::check_unitary;
use crate::sim::{Backend, StateVector};
use crate::statesynth::tree::check_normalized;

/// Default cap is this many times `4^n` rounds.
pub const DEFAULT_ROUND_FACTOR: usize = 64;

/// Outcome `Z^z X^x`, bit `i` of `z`/`x` for qubit `i` (MSB first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    pub n: usize,
    pub z: u64,
    pub x: u64,
}

impl PauliLabel {
    pub fn is_identity(&self) -> bool {
        self.z == 0 && self.x == 0
    }

    /// `Z^z X^x` on `n` qubits.
    pub fn matrix(&self) -> Matrix {
        let dim = 1usize << self.n;
        let mut p = Matrix::zeros(dim, dim);
        for c in 0..dim {
            let r = c ^ self.x as usize;
            let sign = if (r as u64 & self.z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            p[(r, c)] = C64::new(sign, 0.0);
        }
        p
    }
}

/// `z_1 x_1 z_2 x_2 ...` as a bit string.
impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let s = self.n - 1 - i;
            write!(f, "{}{}", (self.z >> s) & 1, (self.x >> s) & 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportTrace {
    pub rounds: usize,
    pub corrections: Vec<PauliLabel>,
    pub final_state: StateVector,
}

impl TeleportTrace {
    pub fn labels(&self) -> Vec<String> {
        self.corrections
            .iter()
            .map(|p| alloc::format!("{p}"))
            .collect()
    }
}

/// One Bell-measurement outcome: its probability and Bob's corrected state.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: PauliLabel,
    pub probability: f64,
    pub bob: Vec<C64>,
}

/// Teleports `psi` through `(I (x) U)|Phi>` on `3n` qubits
/// `[psi][Alice's half][Bob's half]` and returns all `4^n` outcomes.
pub fn bell_outcomes(u: &Matrix, psi: &StateVector) -> Result<Vec<Outcome>> {
    let n = psi.num_qubits();
    let dim = 1usize << n;
    let norm = 1.0 / libm::sqrt(dim as f64);
    let mut theta = vec![ZERO; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            theta[(a << n) | b] = u[(b, a)] * norm;
        }
    }
    let mut s = psi.tensor(&StateVector::from_amps_unchecked(theta));
    for i in 0..n {
        s.apply_2q(i, n + i, &cnot())?;
        s.apply_1q(i, &hadamard())?;
    }
    let mut out = Vec::with_capacity(dim * dim);
    let amps = s.amps();
    for z in 0..dim {
        for x in 0..dim {
            let base = (z << (2 * n)) | (x << n);
            let slice = &amps[base..base + dim];
            let probability: f64 = slice.iter().map(|a| a.norm_sqr()).sum();
            let label = PauliLabel {
                n,
                z: z as u64,
                x: x as u64,
            };
            let bob = if probability > 0.0 {
                let scale = 1.0 / libm::sqrt(probability);
                let raw: Vec<C64> = slice.iter().map(|a| a * scale).collect();
                let v = label.matrix() * Matrix::from_column_slice(dim, 1, &raw);
                v.iter().copied().collect()
            } else {
                vec![ZERO; dim]
            };
            out.push(Outcome {
                label,
                probability,
                bob,
            });
        }
    }
    Ok(out)
}

pub fn teleport_synthesize(u: &Matrix, psi: &StateVector, seed: u64) -> Result<TeleportTrace> {
    let n = psi.num_qubits();
    let cap = DEFAULT_ROUND_FACTOR << (2 * n);
    teleport_synthesize_with(u, psi, &mut ChaCha8Rng::seed_from_u64(seed), cap)
}

pub fn teleport_synthesize_with<R: Rng + ?Sized>(
    u: &Matrix,
    psi: &StateVector,
    rng: &mut R,
    round_cap: usize,
) -> Result<TeleportTrace> {
    let n = check_unitary(u)?;
    check_normalized(psi)?;
    if psi.num_qubits() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "state on {} qubits, unitary on {n}",
            psi.num_qubits()
        )));
    }
    let mut target = u.clone();
    let mut state = psi.clone();
    let mut corrections = Vec::new();
    while corrections.len() < round_cap {
        let outcomes = bell_outcomes(&target, &state)?;
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = outcomes.len() - 1;
        for (i, o) in outcomes.iter().enumerate() {
            acc += o.probability;
            if r < acc {
                pick = i;
                break;
            }
        }
        let o = &outcomes[pick];
        corrections.push(o.label);
        state = StateVector::from_amps_unchecked(o.bob.clone());
        if o.label.is_identity() {
            return Ok(TeleportTrace {
                rounds: corrections.len(),
                corrections,
                final_state: state,
            });
        }
        let p = o.label.matrix();
        // the product doubles any rounding error each round; project it away
        target = nearest_unitary(&(&target * &p * target.adjoint() * &p));
    }
    Err(Error::RoundCapExceeded(round_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, random_unit_vector, random_unitary};

    fn apply(u: &Matrix, psi: &StateVector) -> StateVector {
        let v = u * Matrix::from_column_slice(psi.amps().len(), 1, psi.amps());
        StateVector::from_amps_unchecked(v.iter().copied().collect())
    }

    #[test]
    fn z_on_plus() {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_amps(vec![c64(r, 0.0), c64(r, 0.0)]).unwrap();
        let minus = StateVector::from_amps(vec![c64(r, 0.0), c64(-r, 0.0)]).unwrap();
        let z = Matrix::from_fn(2, 2, |i, j| {
            if i != j {
                ZERO
            } else if i == 0 {
                c64(1.0, 0.0)
            } else {
                c64(-1.0, 0.0)
            }
        });
        for seed in 0..20 {
            let t = teleport_synthesize(&z, &plus, seed).unwrap();
            assert!(t.final_state.fidelity(&minus) >= 1.0 - 1e-9);
            assert!(t.corrections.last().unwrap().is_identity());
            assert_eq!(t.rounds, t.corrections.len());
        }
    }

    #[test]
    fn outcomes_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=2usize {
            let u = random_unitary(1 << n, &mut rng);
            let psi = StateVector::from_amps(random_unit_vector(1 << n, &mut rng)).unwrap();
            let outs = bell_outcomes(&u, &psi).unwrap();
            assert_eq!(outs.len(), 1 << (2 * n));
            for o in &outs {
                assert!((o.probability - libm::pow(4.0, -(n as f64))).abs() < 1e-12);
                // Bob holds P U P |psi>
                let p = o.label.matrix();
                let want = apply(&(&p * &u * &p), &psi);
                assert!(
                    StateVector::from_amps_unchecked(o.bob.clone()).fidelity(&want) >= 1.0 - 1e-12
                );
            }
        }
    }

    #[test]
    fn random_targets_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = random_unitary(4, &mut rng);
        let psi = StateVector::from_amps(random_unit_vector(4, &mut rng)).unwrap();
        let want = apply(&u, &psi);
        for seed in 0..10 {
            let t = teleport_synthesize(&u, &psi, seed).unwrap();
            assert!(t.final_state.fidelity(&want) >= 1.0 - 1e-9);
            assert_eq!(t, teleport_synthesize(&u, &psi, seed).unwrap());
        }
    }

    #[test]
    fn long_runs_stay_exact() {
        // every round draws one uniform and succeeds below 4^-n, so the
        // round count is fixed by the seed alone
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = random_unitary(4, &mut rng);
        let psi = StateVector::from_amps(random_unit_vector(4, &mut rng)).unwrap();
        let want = apply(&u, &psi);
        let mut longest = 0;
        for seed in 0..300 {
            let mut draws = ChaCha8Rng::seed_from_u64(seed);
            let mut rounds = 1;
            while draws.random::<f64>() >= 1.0 / 16.0 {
                rounds += 1;
            }
            let t = teleport_synthesize(&u, &psi, seed).unwrap();
            assert_eq!(t.rounds, rounds, "seed {seed}");
            assert!(t.final_state.fidelity(&want) >= 1.0 - 1e-9);
            longest = longest.max(rounds);
        }
        assert!(longest > 60);
    }

    #[test]
    fn cap_is_enforced() {
        let u = Matrix::identity(2, 2);
        let psi = StateVector::zero(1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = (0..50).find_map(|_| teleport_synthesize_with(&u, &psi, &mut rng, 1).err());
        assert_eq!(r, Some(Error::RoundCapExceeded(1)));
    }

    #[test]
    fn label_format() {
        let p = PauliLabel {
            n: 2,
            z: 0b10,
            x: 0b01,
        };
        assert_eq!(alloc::format!("{p}"), "1001");
    }
}
