//! Small dense linear-algebra helpers shared by the simulator and the builders.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix, row-major indexing `m[(row, col)]`.
pub type Matrix = DMatrix<C64>;
/// 2x2 matrix stored as `[row][col]`.
pub type Mat2 = [[C64; 2]; 2];
/// 4x4 matrix stored as `[row][col]`.
pub type Mat4 = [[C64; 4]; 4];

/// Unitarity and normalization tolerance.
pub const UNITARITY_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i phi}`
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::new(libm::cos(phi), libm::sin(phi))
}

#[inline]
pub fn arg(z: C64) -> f64 {
    libm::atan2(z.im, z.re)
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn hadamard() -> Mat2 {
    let h = c64(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `exp(-i theta Y / 2)`
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    [[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]]
}

/// `exp(-i theta Z / 2)`
pub fn rz(theta: f64) -> Mat2 {
    [[cis(-theta / 2.0), ZERO], [ZERO, cis(theta / 2.0)]]
}

/// `diag(1, e^{i alpha})`
pub fn phase(alpha: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, cis(alpha)]]
}

pub fn scale2(s: C64, m: &Mat2) -> Mat2 {
    let mut out = *m;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn adjoint2(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

pub fn adjoint4(m: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = m[j][i].conj();
        }
    }
    out
}

/// Largest entrywise deviation of `M^dagger M` from the identity.
pub fn unitarity_deviation_slice(dim: usize, entry: impl Fn(usize, usize) -> C64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += entry(k, i).conj() * entry(k, j);
            }
            if i == j {
                acc -= ONE;
            }
            let d = acc.norm();
            if !d.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

pub fn unitarity_deviation2(m: &Mat2) -> f64 {
    unitarity_deviation_slice(2, |i, j| m[i][j])
}

pub fn unitarity_deviation4(m: &Mat4) -> f64 {
    unitarity_deviation_slice(4, |i, j| m[i][j])
}

pub fn unitarity_deviation(m: &Matrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    unitarity_deviation_slice(m.nrows(), |i, j| m[(i, j)])
}

/// Number of qubits a square matrix acts on, if its dimension is a power of two.
pub fn qubits_of_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim > 0).then(|| dim.trailing_zeros() as usize)
}

/// Controlled version of a one-qubit gate; the control is the first (most significant) qubit.
pub fn controlled(m: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    out[0][0] = ONE;
    out[1][1] = ONE;
    out[2][2] = m[0][0];
    out[2][3] = m[0][1];
    out[3][2] = m[1][0];
    out[3][3] = m[1][1];
    out
}

pub fn cnot() -> Mat4 {
    controlled(&pauli_x())
}

pub fn swap() -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    out[0][0] = ONE;
    out[1][2] = ONE;
    out[2][1] = ONE;
    out[3][3] = ONE;
    out
}

/// One-qubit unitary mapping `|0>` to `b0|0> + b1|1>` (assumes unit norm).
pub fn prep_unitary(b0: C64, b1: C64) -> Mat2 {
    [[b0, -b1.conj()], [b1, b0.conj()]]
}

/// Euler angles with `V = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zyz {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

pub fn zyz(v: &Mat2) -> Zyz {
    let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    let alpha = arg(det) / 2.0;
    let w = scale2(cis(-alpha), v);
    let (a, b) = (w[0][0], w[1][0]);
    let gamma = 2.0 * libm::atan2(b.norm(), a.norm());
    let (pa, pb) = (arg(a), arg(b));
    Zyz {
        alpha,
        beta: pb - pa,
        gamma,
        delta: -pa - pb,
    }
}

/// `A, B, C` with `ABC = I` and `e^{i alpha} A X B X C = V`.
#[derive(Debug, Clone, Copy)]
pub struct AbcDecomposition {
    pub a: Mat2,
    pub b: Mat2,
    pub c: Mat2,
    pub alpha: f64,
}

pub fn abc_decomposition(v: &Mat2) -> AbcDecomposition {
    let Zyz {
        alpha,
        beta,
        gamma,
        delta,
    } = zyz(v);
    AbcDecomposition {
        a: mul2(&rz(beta), &ry(gamma / 2.0)),
        b: mul2(&ry(-gamma / 2.0), &rz(-(delta + beta) / 2.0)),
        c: rz((delta - beta) / 2.0),
        alpha,
    }
}

/// Closest unitary to `m` (the unitary polar factor `W V^dag` of its SVD).
pub fn nearest_unitary(m: &Matrix) -> Matrix {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Matrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Haar-random unitary of the given dimension (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar-random unit vector of length `dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close2(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
    }

    #[test]
    fn zyz_reconstructs_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = random_unitary(2, &mut rng);
            let v = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
            let e = zyz(&v);
            let rebuilt = scale2(
                cis(e.alpha),
                &mul2(&mul2(&rz(e.beta), &ry(e.gamma)), &rz(e.delta)),
            );
            assert!(close2(&rebuilt, &v, 1e-12));
        }
    }

    #[test]
    fn abc_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = pauli_x();
        let mut samples: Vec<Mat2> = vec![identity2(), pauli_x(), pauli_z(), hadamard()];
        for _ in 0..100 {
            let u = random_unitary(2, &mut rng);
            samples.push([[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]]);
        }
        for v in samples {
            let d = abc_decomposition(&v);
            let abc = mul2(&mul2(&d.a, &d.b), &d.c);
            assert!(close2(&abc, &identity2(), 1e-12));
            let axbxc = mul2(&mul2(&mul2(&mul2(&d.a, &x), &d.b), &x), &d.c);
            assert!(close2(&scale2(cis(d.alpha), &axbxc), &v, 1e-12));
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [1, 2, 4, 8, 16] {
            assert!(unitarity_deviation(&random_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn prep_unitary_maps_zero() {
        let b0 = c64(0.6, 0.0);
        let b1 = c64(0.0, 0.8);
        let v = prep_unitary(b0, b1);
        assert!(unitarity_deviation2(&v) < 1e-15);
        assert_eq!(v[0][0], b0);
        assert_eq!(v[1][0], b1);
    }
}
