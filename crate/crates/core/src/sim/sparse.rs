//! Sparse state keyed by basis strings, for circuits whose width is far past
//! dense simulation but whose support stays small (ancilla-heavy builders).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, Matrix, C64, ONE, ZERO};
use crate::sim::backend::Backend;
use crate::sim::dense::StateVector;
use crate::sim::oracle::ClassicalFunction;

/// Amplitudes below this magnitude are dropped after non-permutation gates.
pub const PRUNE_TOL: f64 = 1e-15;
/// Squared magnitude treated as an exact zero when recognizing gate shapes.
const MONOMIAL_EPS: f64 = 1e-28;
pub const DEFAULT_MAX_SUPPORT: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct SparseState {
    num_qubits: usize,
    words: usize,
    keys: Vec<u64>,
    amps: Vec<C64>,
    max_support: usize,
}

#[inline]
fn get(key: &[u64], q: usize) -> bool {
    (key[q >> 6] >> (q & 63)) & 1 == 1
}

#[inline]
fn flip(key: &mut [u64], q: usize) {
    key[q >> 6] ^= 1 << (q & 63);
}

#[inline]
fn set(key: &mut [u64], q: usize, v: bool) {
    if v {
        key[q >> 6] |= 1 << (q & 63);
    } else {
        key[q >> 6] &= !(1 << (q & 63));
    }
}

#[inline]
fn read(key: &[u64], qubits: &[usize]) -> u128 {
    qubits
        .iter()
        .fold(0u128, |acc, &q| (acc << 1) | u128::from(get(key, q)))
}

impl SparseState {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let words = num_qubits.div_ceil(64).max(1);
        SparseState {
            num_qubits,
            words,
            keys: vec![0; words],
            amps: vec![ONE],
            max_support: DEFAULT_MAX_SUPPORT,
        }
    }

    /// Basis state with `qubits` set to `value` (most significant first), others 0.
    pub fn basis(num_qubits: usize, qubits: &[usize], value: u128) -> Self {
        let mut s = Self::zero(num_qubits);
        let k = qubits.len();
        for (i, &q) in qubits.iter().enumerate() {
            set(&mut s.keys, q, (value >> (k - 1 - i)) & 1 == 1);
        }
        s
    }

    /// Embeds a dense vector on `qubits`, all other qubits 0.
    pub fn from_register(num_qubits: usize, qubits: &[usize], amps: &[C64]) -> Self {
        let mut s = Self::zero(num_qubits);
        s.keys.clear();
        s.amps.clear();
        let k = qubits.len();
        for (v, a) in amps.iter().enumerate() {
            if a.norm() <= PRUNE_TOL {
                continue;
            }
            let start = s.keys.len();
            s.keys.resize(start + s.words, 0);
            for (i, &q) in qubits.iter().enumerate() {
                set(&mut s.keys[start..], q, (v >> (k - 1 - i)) & 1 == 1);
            }
            s.amps.push(*a);
        }
        s
    }

    pub fn from_dense(state: &StateVector) -> Self {
        let qubits: Vec<usize> = (0..state.num_qubits()).collect();
        Self::from_register(state.num_qubits(), &qubits, state.amps())
    }

    pub fn with_max_support(mut self, max_support: usize) -> Self {
        self.max_support = max_support;
        self
    }

    pub fn support(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Iterates `(key words, amplitude)`; bit `q` of the key is qubit `q`.
    pub fn entries(&self) -> impl Iterator<Item = (&[u64], C64)> {
        self.keys
            .chunks_exact(self.words)
            .zip(self.amps.iter().copied())
    }

    /// Value of `qubits` in a key returned by [`Self::entries`].
    pub fn key_value(key: &[u64], qubits: &[usize]) -> u128 {
        read(key, qubits)
    }

    /// Amplitudes on `register` restricted to basis states where every other
    /// qubit reads 0. Its squared norm is the probability that the rest is clean.
    pub fn project_register(&self, register: &[usize]) -> Vec<C64> {
        let mut out = vec![ZERO; 1usize << register.len()];
        let mut scratch = vec![0u64; self.words];
        for (key, a) in self.entries() {
            scratch.copy_from_slice(key);
            for &q in register {
                set(&mut scratch, q, false);
            }
            if scratch.iter().all(|&w| w == 0) {
                out[read(key, register) as usize] += a;
            }
        }
        out
    }

    /// `<e| rho |e>` for the reduced state on `register`, with `expected`
    /// indexed by the register value.
    pub fn reduced_fidelity(&self, register: &[usize], expected: &[C64]) -> f64 {
        let mut groups: BTreeMap<Vec<u64>, C64> = BTreeMap::new();
        let mut scratch = vec![0u64; self.words];
        for (key, a) in self.entries() {
            scratch.copy_from_slice(key);
            for &q in register {
                set(&mut scratch, q, false);
            }
            let e = expected[read(key, register) as usize];
            *groups.entry(scratch.clone()).or_insert(ZERO) += e.conj() * a;
        }
        groups.values().map(|z| z.norm_sqr()).sum()
    }

    /// Dense copy; only for states within dense limits.
    pub fn to_dense(&self) -> Result<StateVector> {
        if self.num_qubits > 30 {
            return Err(Error::TooManyQubits {
                requested: self.num_qubits,
                cap: 30,
            });
        }
        let qubits: Vec<usize> = (0..self.num_qubits).collect();
        Ok(StateVector::from_amps_unchecked(
            self.project_register(&qubits),
        ))
    }

    fn check_support(&self) -> Result<()> {
        if self.amps.len() > self.max_support {
            Err(Error::SupportLimitExceeded(self.amps.len()))
        } else {
            Ok(())
        }
    }

    /// In-place update for a matrix with one nonzero per column; false
    /// (and nothing done) if `m` is not of that form.
    fn try_monomial<const N: usize>(&mut self, qubits: &[usize], m: &[[C64; N]; N]) -> bool {
        let mut image = [(0usize, ZERO); N];
        for (c, slot) in image.iter_mut().enumerate() {
            let mut nz = (0..N).filter(|&r| m[r][c].norm_sqr() > MONOMIAL_EPS);
            match (nz.next(), nz.next()) {
                (Some(r), None) => *slot = (r, m[r][c]),
                _ => return false,
            }
        }
        let (w, k) = (self.words, qubits.len());
        for (key, a) in self.keys.chunks_exact_mut(w).zip(self.amps.iter_mut()) {
            let (r, f) = image[read(key, qubits) as usize];
            for (bit, &q) in qubits.iter().enumerate() {
                set(key, q, (r >> (k - 1 - bit)) & 1 == 1);
            }
            *a *= f;
        }
        true
    }

    /// Runs `f` on the entries whose `control` qubit is 1 only.
    fn on_control(
        &mut self,
        control: usize,
        f: impl FnOnce(&mut SparseState) -> Result<()>,
    ) -> Result<()> {
        let w = self.words;
        let mut sub = SparseState {
            num_qubits: self.num_qubits,
            words: w,
            keys: Vec::new(),
            amps: Vec::new(),
            max_support: self.max_support,
        };
        let (mut keys, mut amps) = (
            Vec::with_capacity(self.keys.len()),
            Vec::with_capacity(self.amps.len()),
        );
        for (key, &a) in self.keys.chunks_exact(w).zip(&self.amps) {
            let (ks, am) = if get(key, control) {
                (&mut sub.keys, &mut sub.amps)
            } else {
                (&mut keys, &mut amps)
            };
            ks.extend_from_slice(key);
            am.push(a);
        }
        f(&mut sub)?;
        keys.extend_from_slice(&sub.keys);
        amps.extend_from_slice(&sub.amps);
        self.keys = keys;
        self.amps = amps;
        self.check_support()
    }

    fn map_keys(&mut self, mut f: impl FnMut(&mut [u64])) {
        for key in self.keys.chunks_exact_mut(self.words) {
            f(key);
        }
    }

    /// Groups entries by their key with `qubits` cleared, hands each group's
    /// local `2^k` vector to `op`, and rebuilds the state.
    fn transform(
        &mut self,
        qubits: &[usize],
        op: &mut dyn FnMut(&[u64], &mut [C64]),
    ) -> Result<()> {
        let w = self.words;
        let k = qubits.len();
        let dim = 1usize << k;
        let count = self.amps.len();
        let mut base = self.keys.clone();
        let mut local_idx = Vec::with_capacity(count);
        for e in 0..count {
            let key = &mut base[e * w..(e + 1) * w];
            local_idx.push(read(key, qubits) as usize);
            for &q in qubits {
                set(key, q, false);
            }
        }
        let mut group_of: HashMap<&[u64], usize> = HashMap::with_capacity(count);
        let mut heads = Vec::new();
        let mut local = Vec::new();
        for e in 0..count {
            let g = *group_of
                .entry(&base[e * w..(e + 1) * w])
                .or_insert_with(|| {
                    heads.push(e);
                    local.resize(local.len() + dim, ZERO);
                    heads.len() - 1
                });
            local[g * dim + local_idx[e]] += self.amps[e];
        }

        let mut keys = Vec::with_capacity(self.keys.len());
        let mut amps = Vec::with_capacity(count);
        for (g, &head) in heads.iter().enumerate() {
            let group_key = &base[head * w..(head + 1) * w];
            let v = &mut local[g * dim..(g + 1) * dim];
            op(group_key, v);
            for (l, a) in v.iter().enumerate() {
                if a.norm() > PRUNE_TOL {
                    let start = keys.len();
                    keys.extend_from_slice(group_key);
                    for (bit, &q) in qubits.iter().enumerate() {
                        set(&mut keys[start..], q, (l >> (k - 1 - bit)) & 1 == 1);
                    }
                    amps.push(*a);
                }
            }
        }
        self.keys = keys;
        self.amps = amps;
        self.check_support()
    }
}

impl Backend for SparseState {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply_1q(&mut self, q: usize, m: &Mat2) -> Result<()> {
        if self.try_monomial(&[q], m) {
            return Ok(());
        }
        self.transform(&[q], &mut |_, v| {
            let (a, b) = (v[0], v[1]);
            v[0] = m[0][0] * a + m[0][1] * b;
            v[1] = m[1][0] * a + m[1][1] * b;
        })
    }

    fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) -> Result<()> {
        if self.try_monomial(&[q0, q1], m) {
            return Ok(());
        }
        // controlled on q0: identity block first, no coupling between blocks
        let controlled = (0..4).all(|r| {
            (0..4).all(|c| {
                let want = if r < 2 && c < 2 && r == c { ONE } else { ZERO };
                (r >= 2 && c >= 2) || (m[r][c] - want).norm_sqr() <= MONOMIAL_EPS
            })
        });
        if controlled {
            let u = [[m[2][2], m[2][3]], [m[3][2], m[3][3]]];
            return self.on_control(q0, |sub| sub.apply_1q(q1, &u));
        }
        self.transform(&[q0, q1], &mut |_, v| {
            let x = [v[0], v[1], v[2], v[3]];
            for (r, out) in v.iter_mut().enumerate() {
                *out = m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2] + m[r][3] * x[3];
            }
        })
    }

    fn apply_dense(&mut self, qubits: &[usize], m: &Matrix) -> Result<()> {
        let dim = 1usize << qubits.len();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} matrix on {} qubits",
                m.nrows(),
                m.ncols(),
                qubits.len()
            )));
        }
        let mut scratch = vec![ZERO; dim];
        self.transform(qubits, &mut |_, v| {
            for (r, out) in scratch.iter_mut().enumerate() {
                *out = (0..dim).map(|c| m[(r, c)] * v[c]).sum();
            }
            v.copy_from_slice(&scratch);
        })
    }

    fn apply_mcx(&mut self, target: usize, controls: &[usize]) -> Result<()> {
        self.map_keys(|key| {
            if controls.iter().all(|&c| get(key, c)) {
                flip(key, target);
            }
        });
        Ok(())
    }

    fn apply_fanout(&mut self, source: usize, outputs: &[usize]) -> Result<()> {
        self.map_keys(|key| {
            if get(key, source) {
                for &o in outputs {
                    flip(key, o);
                }
            }
        });
        Ok(())
    }

    fn apply_reflection(&mut self, qubits: &[usize], pattern: &[bool]) -> Result<()> {
        let w = self.words;
        for (key, a) in self.keys.chunks_exact(w).zip(self.amps.iter_mut()) {
            if qubits.iter().zip(pattern).all(|(&q, &p)| get(key, q) == p) {
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
        let k = outputs.len();
        self.map_keys(|key| {
            let y = f.eval(read(key, inputs));
            for (i, &q) in outputs.iter().enumerate() {
                if (y >> (k - 1 - i)) & 1 == 1 {
                    flip(key, q);
                }
            }
        });
        Ok(())
    }

    fn apply_selected(
        &mut self,
        controls: &[usize],
        target: usize,
        select: &dyn Fn(u128) -> Mat2,
    ) -> Result<()> {
        self.transform(&[target], &mut |key, v| {
            let m = select(read(key, controls));
            let (a, b) = (v[0], v[1]);
            v[0] = m[0][0] * a + m[0][1] * b;
            v[1] = m[1][0] * a + m[1][1] * b;
        })
    }
}
