//! Fixed-point encoding of amplitude pairs.
//!
//! A real number in `[-1, 1]` is stored as one sign bit followed by `b`
//! magnitude bits, `round(|v| (2^b - 1))`. A pair of complex amplitudes
//! `(b0, b1)` packs four such fields, most significant first:
//! `re(b0) | im(b0) | re(b1) | im(b1)`, for `4 (b + 1)` bits in total.

use crate::linalg::{c64, C64, ONE, ZERO};

pub const MAX_PRECISION_BITS: u32 = 31;

pub fn field_bits(b: u32) -> usize {
    b as usize + 1
}

pub fn pair_bits(b: u32) -> usize {
    4 * field_bits(b)
}

fn scale(b: u32) -> f64 {
    ((1u64 << b) - 1) as f64
}

pub fn encode_real(v: f64, b: u32) -> u128 {
    let mag = libm::round(libm::fabs(v).min(1.0) * scale(b)) as u128;
    let sign = u128::from(v < 0.0 && mag != 0);
    (sign << b) | mag
}

pub fn decode_real(field: u128, b: u32) -> f64 {
    let mag = (field & ((1u128 << b) - 1)) as f64 / scale(b);
    if (field >> b) & 1 == 1 {
        -mag
    } else {
        mag
    }
}

pub fn encode_pair(b0: C64, b1: C64, b: u32) -> u128 {
    let w = field_bits(b);
    [b0.re, b0.im, b1.re, b1.im]
        .iter()
        .fold(0u128, |acc, &v| (acc << w) | encode_real(v, b))
}

/// Decoded values before renormalization.
pub fn decode_pair_raw(word: u128, b: u32) -> (C64, C64) {
    let w = field_bits(b);
    let mask = (1u128 << w) - 1;
    let field = |i: usize| decode_real((word >> (w * (3 - i))) & mask, b);
    (c64(field(0), field(1)), c64(field(2), field(3)))
}

/// Decoded and renormalized pair; an all-zero pair decodes to `|0>`.
pub fn decode_pair(word: u128, b: u32) -> (C64, C64) {
    let (b0, b1) = decode_pair_raw(word, b);
    let norm = libm::sqrt(b0.norm_sqr() + b1.norm_sqr());
    if norm == 0.0 {
        (ONE, ZERO)
    } else {
        (b0 / norm, b1 / norm)
    }
}
