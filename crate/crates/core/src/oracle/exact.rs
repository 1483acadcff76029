//! Exact arithmetic helpers. Every finite `f64` is a dyadic rational
//! `mantissa · 2^exp`, so a list of weights can be scaled by a common power of
//! two into integers without rounding.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::float::FloatCore;
use num_traits::{One, Zero};

/// Integers `numerators[i] = values[i] · 2^shift`, exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledIntegers {
    pub numerators: Vec<BigInt>,
    pub shift: u32,
}

impl ScaledIntegers {
    pub fn from_f64(values: &[f64]) -> Self {
        let decoded: Vec<(u64, i16, i8)> = values
            .iter()
            .map(|&x| {
                assert!(x.is_finite(), "exact conversion of a non-finite value");
                let (mut mantissa, mut exp, sign) = x.integer_decode();
                while mantissa != 0 && mantissa & 1 == 0 {
                    mantissa >>= 1;
                    exp += 1;
                }
                (mantissa, exp, sign)
            })
            .collect();
        let shift = decoded
            .iter()
            .filter(|(m, _, _)| *m != 0)
            .map(|&(_, e, _)| (-(e as i32)).max(0) as u32)
            .max()
            .unwrap_or(0);
        let numerators = decoded
            .iter()
            .map(|&(mantissa, exp, sign)| {
                if mantissa == 0 {
                    return BigInt::zero();
                }
                let v = BigInt::from(mantissa) << ((exp as i32 + shift as i32) as u32 as usize);
                if sign < 0 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        Self { numerators, shift }
    }

    /// `2^shift` as a big integer.
    pub fn denominator(&self) -> BigInt {
        BigInt::one() << self.shift as usize
    }
}

/// The exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    let s = ScaledIntegers::from_f64(&[x]);
    BigRational::new(s.numerators[0].clone(), s.denominator())
}

/// `x^e` for big rationals.
pub fn rational_pow(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_scaling_is_exact() {
        let s = ScaledIntegers::from_f64(&[0.25, 3.0, 0.0, -1.5]);
        assert_eq!(s.shift, 2);
        let expect: Vec<BigInt> = [1, 12, 0, -6].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(s.numerators, expect);
        assert_eq!(
            rational_from_f64(0.1) * BigRational::from_integer(BigInt::from(1u64 << 55)),
            BigRational::from_integer(BigInt::from(3602879701896397u64))
        );
    }

    #[test]
    fn integers_need_no_shift() {
        let s = ScaledIntegers::from_f64(&[1.0, 2.0, 1024.0]);
        assert_eq!(s.shift, 0);
        assert_eq!(s.numerators[2], BigInt::from(1024));
    }
}
