use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{is_finite, Mat2, Mat4, Matrix, C64, ONE, UNITARITY_TOL, ZERO};
use crate::sim::backend::{register_value, Backend};
use crate::sim::oracle::ClassicalFunction;

/// Dense state vector; qubit 0 is the most significant bit of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1usize << num_qubits];
        amps[index] = ONE;
        StateVector { num_qubits, amps }
    }

    /// Checks length, finiteness and normalization.
    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "state of length {len} is not 2^m with m >= 1"
            )));
        }
        if !amps.iter().all(|z| is_finite(*z)) {
            return Err(Error::UnnormalizedState(f64::NAN));
        }
        let dev = (amps.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs();
        if dev > UNITARITY_TOL {
            return Err(Error::UnnormalizedState(dev));
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Skips the normalization check (used for projected or intermediate vectors).
    pub fn from_amps_unchecked(amps: Vec<C64>) -> Self {
        StateVector {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &StateVector) -> f64 {
        libm::sqrt(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum(),
        )
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Index of the largest-probability basis state.
    pub fn most_likely(&self) -> usize {
        let mut best = 0;
        for (i, z) in self.amps.iter().enumerate() {
            if z.norm_sqr() > self.amps[best].norm_sqr() {
                best = i;
            }
        }
        best
    }

    /// Tensor product `self (x) other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    fn bit(&self, q: usize) -> usize {
        1usize << (self.num_qubits - 1 - q)
    }

    fn mask(&self, qubits: &[usize]) -> usize {
        qubits.iter().fold(0, |m, &q| m | self.bit(q))
    }

    fn permute(&mut self, map: impl Fn(usize) -> usize) {
        let mut out = vec![ZERO; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[map(i)] = *a;
        }
        self.amps = out;
    }
}

impl Backend for StateVector {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply_1q(&mut self, q: usize, m: &Mat2) -> Result<()> {
        let bit = self.bit(q);
        let n = self.amps.len();
        let mut base = 0;
        while base < n {
            for i in base..base + bit {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
            base += 2 * bit;
        }
        Ok(())
    }

    fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) -> Result<()> {
        let (b0, b1) = (self.bit(q0), self.bit(q1));
        let both = b0 | b1;
        for i in 0..self.amps.len() {
            if i & both != 0 {
                continue;
            }
            let idx = [i, i | b1, i | b0, i | both];
            let v = idx.map(|j| self.amps[j]);
            for (r, &j) in idx.iter().enumerate() {
                self.amps[j] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        Ok(())
    }

    fn apply_dense(&mut self, qubits: &[usize], m: &Matrix) -> Result<()> {
        let k = qubits.len();
        let dim = 1usize << k;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} matrix on {k} qubits",
                m.nrows(),
                m.ncols()
            )));
        }
        let offsets: Vec<usize> = (0..dim)
            .map(|l| {
                (0..k)
                    .filter(|j| (l >> (k - 1 - j)) & 1 == 1)
                    .fold(0, |acc, j| acc | self.bit(qubits[j]))
            })
            .collect();
        let mask = self.mask(qubits);
        let mut local = vec![ZERO; dim];
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                local[l] = self.amps[i | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, v) in local.iter().enumerate() {
                    acc += m[(r, c)] * v;
                }
                self.amps[i | off] = acc;
            }
        }
        Ok(())
    }

    fn apply_mcx(&mut self, target: usize, controls: &[usize]) -> Result<()> {
        let cmask = self.mask(controls);
        let tbit = self.bit(target);
        for i in 0..self.amps.len() {
            if i & cmask == cmask && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    fn apply_fanout(&mut self, source: usize, outputs: &[usize]) -> Result<()> {
        let s = self.bit(source);
        let out = self.mask(outputs);
        for i in 0..self.amps.len() {
            let j = i ^ out;
            if i & s != 0 && i < j {
                self.amps.swap(i, j);
            }
        }
        Ok(())
    }

    fn apply_reflection(&mut self, qubits: &[usize], pattern: &[bool]) -> Result<()> {
        let mask = self.mask(qubits);
        let pat = qubits
            .iter()
            .zip(pattern)
            .filter(|(_, &p)| p)
            .fold(0, |m, (&q, _)| m | self.bit(q));
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == pat {
                *a = -*a;
            }
        }
        Ok(())
    }

    fn apply_xor_function(
        &mut self,
        inputs: &[usize],
        outputs: &[usize],
        f: &dyn ClassicalFunction,
    ) -> Result<()> {
        let n = self.num_qubits;
        let out_bits: Vec<usize> = outputs.iter().map(|&q| self.bit(q)).collect();
        let k = outputs.len();
        self.permute(|i| {
            let y = f.eval(register_value(i, n, inputs));
            let mut j = i;
            for (idx, b) in out_bits.iter().enumerate() {
                if (y >> (k - 1 - idx)) & 1 == 1 {
                    j ^= b;
                }
            }
            j
        });
        Ok(())
    }

    fn apply_selected(
        &mut self,
        controls: &[usize],
        target: usize,
        select: &dyn Fn(u128) -> Mat2,
    ) -> Result<()> {
        let n = self.num_qubits;
        let bit = self.bit(target);
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let m = select(register_value(i, n, controls));
            let (a, b) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0][0] * a + m[0][1] * b;
            self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
        }
        Ok(())
    }
}
