//! Hafnians by recursive pairing of the lowest remaining index.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::exact::ScaledIntegers;
use super::Scalar;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const HAFNIAN_MAX: usize = 16;
const SYMMETRY_TOL: f64 = 1e-12;

/// Σ over perfect pairings of `0..n` of the product of paired entries.
pub fn pairing_sum<T: Scalar>(n: usize, entries: &[T]) -> T {
    fn rec<T: Scalar>(n: usize, entries: &[T], remaining: u32) -> T {
        if remaining == 0 {
            return T::one();
        }
        let first = remaining.trailing_zeros() as usize;
        let rest = remaining & !(1 << first);
        let mut total = T::zero();
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let a = &entries[first * n + j];
            if !a.is_zero() {
                total = total + a.clone() * rec(n, entries, rest & !(1 << j));
            }
        }
        total
    }
    if n % 2 == 1 {
        return T::zero();
    }
    rec(n, entries, ((1u64 << n) - 1) as u32)
}

fn validate(a: &Matrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Dimension(alloc::format!(
            "hafnian needs a square matrix, got {}×{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > HAFNIAN_MAX {
        return Err(Error::SizeLimit {
            what: "hafnian dimension",
            size: a.rows(),
            limit: HAFNIAN_MAX,
        });
    }
    if let Some((row, col)) = a.asymmetry(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric { row, col });
    }
    Ok(a.rows())
}

/// Hafnian of a symmetric matrix; 0 for odd dimension, 1 for the empty matrix.
/// Integer matrices are evaluated exactly.
pub fn hafnian(a: &Matrix) -> Result<f64> {
    let n = validate(a)?;
    if a.is_integral() {
        let max = a.entries().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        // (n−1)!! ≤ 2^(n·log2 n / 2); keep the product inside i128.
        let log2 = (n as f64 / 2.0) * (libm::log2(max) + libm::log2(n.max(1) as f64));
        if log2 < 120.0 {
            let ints: Vec<i128> = a.entries().iter().map(|&x| x as i128).collect();
            return Ok(pairing_sum(n, &ints) as f64);
        }
    }
    Ok(pairing_sum(n, a.entries()))
}

/// Exact hafnian as a rational.
pub fn hafnian_exact(a: &Matrix) -> Result<BigRational> {
    let n = validate(a)?;
    let scaled = ScaledIntegers::from_f64(a.entries());
    let num = pairing_sum(n, &scaled.numerators);
    let den = BigInt::from(1u8) << (scaled.shift as usize * n / 2);
    Ok(BigRational::new(num, den))
}
