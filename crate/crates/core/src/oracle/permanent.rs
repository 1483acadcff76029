//! Permanents by Ryser's inclusion–exclusion formula (Gray-code order,
//! `O(2ⁿ·n)`) and by naive expansion over permutations.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::exact::ScaledIntegers;
use super::Scalar;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const RYSER_MAX: usize = 20;
pub const NAIVE_MAX: usize = 8;

fn check_square(a: &Matrix, limit: usize) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Dimension(alloc::format!(
            "permanent needs a square matrix, got {}×{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > limit {
        return Err(Error::SizeLimit {
            what: "permanent dimension",
            size: a.rows(),
            limit,
        });
    }
    Ok(a.rows())
}

/// Ryser's formula over any commutative ring, entries given row-major.
pub fn ryser<T: Scalar>(n: usize, entries: &[T]) -> T {
    if n == 0 {
        return T::one();
    }
    debug_assert_eq!(entries.len(), n * n);
    // perm = (−1)^n Σ_{S≠∅} (−1)^{|S|} Π_i Σ_{j∈S} a_ij, walking subsets in Gray-code order.
    let mut row_sums: Vec<T> = alloc::vec![T::zero(); n];
    let mut in_set = alloc::vec![false; n];
    let mut positive = T::zero();
    let mut negative = T::zero();
    let mut size = 0usize;
    for step in 1u64..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        if in_set[j] {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = s.clone() - entries[i * n + j].clone();
            }
            size -= 1;
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = s.clone() + entries[i * n + j].clone();
            }
            size += 1;
        }
        in_set[j] = !in_set[j];
        let mut prod = T::one();
        for s in &row_sums {
            prod = prod * s.clone();
        }
        if (n - size).is_multiple_of(2) {
            positive = positive + prod;
        } else {
            negative = negative + prod;
        }
    }
    positive - negative
}

/// Sum over all permutations; used to cross-check [`ryser`].
pub fn naive<T: Scalar>(n: usize, entries: &[T]) -> T {
    fn rec<T: Scalar>(n: usize, entries: &[T], row: usize, used: &mut [bool], acc: T) -> T {
        if row == n {
            return acc;
        }
        let mut total = T::zero();
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                total = total
                    + rec(
                        n,
                        entries,
                        row + 1,
                        used,
                        acc.clone() * entries[row * n + col].clone(),
                    );
                used[col] = false;
            }
        }
        total
    }
    rec(n, entries, 0, &mut alloc::vec![false; n], T::one())
}

/// Whether Ryser on these integers stays inside `i128`.
fn fits_i128(n: usize, ints: &[BigInt]) -> bool {
    // Every row sum over a subset is bounded by the row's absolute sum, and at
    // most 2ⁿ products are accumulated on each side.
    let mut log2_bound = n as f64;
    for i in 0..n {
        let row: f64 = ints[i * n..(i + 1) * n]
            .iter()
            .map(|x| x.to_f64().map_or(f64::INFINITY, f64::abs))
            .sum();
        log2_bound += libm::log2(row.max(1.0));
    }
    log2_bound < 120.0
}

/// Exact permanent of integer entries.
fn integer_permanent(n: usize, ints: &[BigInt]) -> BigInt {
    if fits_i128(n, ints) {
        let small: Vec<i128> = ints.iter().map(|x| x.to_i128().expect("bounded")).collect();
        BigInt::from(ryser(n, &small))
    } else {
        ryser(n, ints)
    }
}

/// Exact permanent (entries converted to rationals without rounding).
pub fn permanent_exact(a: &Matrix) -> Result<BigRational> {
    let n = check_square(a, RYSER_MAX)?;
    let scaled = ScaledIntegers::from_f64(a.entries());
    let num = integer_permanent(n, &scaled.numerators);
    let den = BigInt::from(1u8) << (scaled.shift as usize * n);
    Ok(BigRational::new(num, den))
}

/// Permanent by Ryser's formula. All-integer inputs are evaluated exactly.
pub fn permanent(a: &Matrix) -> Result<f64> {
    let n = check_square(a, RYSER_MAX)?;
    if a.is_integral() {
        let ints: Vec<BigInt> = a
            .entries()
            .iter()
            .map(|&x| BigInt::from(x as i64))
            .collect();
        return Ok(integer_permanent(n, &ints)
            .to_f64()
            .unwrap_or(f64::INFINITY));
    }
    Ok(ryser(n, a.entries()))
}

/// Permanent by naive expansion, for cross-checking on small matrices.
pub fn permanent_naive(a: &Matrix) -> Result<f64> {
    let n = check_square(a, NAIVE_MAX)?;
    if a.is_integral() {
        let ints: Vec<i128> = a.entries().iter().map(|&x| x as i128).collect();
        return Ok(naive(n, &ints) as f64);
    }
    Ok(naive(n, a.entries()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn small_permanents() {
        assert_eq!(permanent(&Matrix::identity(3)).unwrap(), 1.0);
        assert_eq!(permanent(&Matrix::from_fn(3, 3, |_, _| 1.0)).unwrap(), 6.0);
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(permanent(&a).unwrap(), 10.0);
        assert_eq!(permanent_naive(&a).unwrap(), 10.0);
        assert_eq!(permanent(&Matrix::zeros(0, 0)).unwrap(), 1.0);
    }

    #[test]
    fn factorial_of_all_ones() {
        let mut f = 1.0;
        for n in 1..=10 {
            f *= n as f64;
            assert_eq!(permanent(&Matrix::from_fn(n, n, |_, _| 1.0)).unwrap(), f);
        }
    }

    #[test]
    fn exact_fractional_permanent() {
        let a = Matrix::from_rows(&[vec![0.5, 0.25], vec![1.0, 0.5]]).unwrap();
        let p = permanent_exact(&a).unwrap();
        assert_eq!(p, BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert!((permanent(&a).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn limits_and_shape_errors() {
        assert!(matches!(
            permanent(&Matrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            permanent(&Matrix::zeros(21, 21)),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            permanent_naive(&Matrix::zeros(9, 9)),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn large_integers_fall_back_to_bigint() {
        let a = Matrix::from_fn(6, 6, |_, _| 1.0e6);
        let expect = 720.0 * 1.0e36;
        let got = permanent(&a).unwrap();
        assert!((got - expect).abs() / expect < 1e-15);
    }
}
