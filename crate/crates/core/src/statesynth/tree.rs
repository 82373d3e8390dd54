use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c64, C64, ONE, ZERO};
use crate::sim::StateVector;

/// Heap index of the prefix of length `len` with value `value` (MSB first).
/// The empty prefix is 1; children of `h` are `2h` and `2h + 1`.
pub fn heap_index(len: usize, value: usize) -> usize {
    (1 << len) | value
}

/// `(len, value)` of heap index `h >= 1`.
pub fn prefix_of(h: usize) -> (usize, usize) {
    let len = (usize::BITS - 1 - h.leading_zeros()) as usize;
    (len, h ^ (1 << len))
}

/// Conditional amplitudes `beta_x` for every nonempty prefix `x` of length
/// at most `n`, so that `alpha_x` is the product along the path to `x`.
/// Internal levels are real and nonnegative; phases sit on the last level.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTree {
    n: usize,
    beta: Vec<C64>,
}

impl AmplitudeTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `beta` at heap index `h` in `2..2^{n+1}`.
    pub fn beta(&self, h: usize) -> C64 {
        self.beta[h]
    }

    /// `(beta_{x0}, beta_{x1})` for the prefix at heap index `h < 2^n`.
    pub fn children(&self, h: usize) -> (C64, C64) {
        (self.beta[2 * h], self.beta[2 * h + 1])
    }

    /// `beta` of a prefix written as a bit string.
    pub fn beta_of(&self, prefix: &str) -> Option<C64> {
        if prefix.is_empty() || prefix.len() > self.n {
            return None;
        }
        let v = prefix.chars().try_fold(0usize, |acc, c| match c {
            '0' => Some(acc << 1),
            '1' => Some((acc << 1) | 1),
            _ => None,
        })?;
        Some(self.beta[heap_index(prefix.len(), v)])
    }

    /// Product of `beta` along the path to the full string `x`.
    pub fn amplitude(&self, x: usize) -> C64 {
        let mut h = heap_index(self.n, x);
        let mut a = ONE;
        while h > 1 {
            a *= self.beta[h];
            h >>= 1;
        }
        a
    }

    pub fn reconstruct(&self) -> Vec<C64> {
        (0..1usize << self.n).map(|x| self.amplitude(x)).collect()
    }
}

/// Largest accepted deviation of the input norm from 1.
pub const NORM_TOL: f64 = 1e-10;

pub fn check_normalized(psi: &StateVector) -> Result<()> {
    let dev = (psi.norm_sqr() - 1.0).abs();
    if !(dev <= NORM_TOL) {
        return Err(Error::UnnormalizedState(dev));
    }
    Ok(())
}

/// Builds the tree; prefixes of zero mass get `beta_{x0} = 1, beta_{x1} = 0`.
pub fn amplitude_tree(psi: &StateVector) -> Result<AmplitudeTree> {
    check_normalized(psi)?;
    let n = psi.num_qubits();
    let leaves = 1usize << n;
    let mut mass = vec![0.0f64; 2 * leaves];
    for (x, a) in psi.amps().iter().enumerate() {
        mass[leaves + x] = a.norm_sqr();
    }
    for h in (1..leaves).rev() {
        mass[h] = mass[2 * h] + mass[2 * h + 1];
    }
    let mut beta = vec![ZERO; 2 * leaves];
    beta[1] = ONE;
    for h in 1..leaves {
        let (len, _) = prefix_of(h);
        let (b0, b1) = if mass[h] == 0.0 {
            (ONE, ZERO)
        } else if len + 1 < n {
            let s = libm::sqrt(mass[h]);
            (
                c64(libm::sqrt(mass[2 * h]) / s, 0.0),
                c64(libm::sqrt(mass[2 * h + 1]) / s, 0.0),
            )
        } else {
            let s = libm::sqrt(mass[h]);
            let amps = psi.amps();
            (amps[2 * h - leaves] / s, amps[2 * h + 1 - leaves] / s)
        };
        beta[2 * h] = b0;
        beta[2 * h + 1] = b1;
    }
    Ok(AmplitudeTree { n, beta })
}
