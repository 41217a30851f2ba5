//! Numeric backends shared by the curve queries and the solvers.
//!
//! Every query is written once against [`Scalar`] and instantiated twice:
//! with [`Rational`] where results must be exact, and with `f64` inside the
//! approximation solvers' inner loops.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// Arbitrary-precision rational used by the exact code paths.
pub type Rational = BigRational;

pub trait Scalar: Clone + PartialOrd + fmt::Debug + Num + Signed {
    /// Converts a finite float. For [`Rational`] the conversion is exact.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_usize(n: usize) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x} in exact arithmetic"))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

pub fn rat(x: f64) -> Rational {
    Rational::from_f64(x)
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn min_of<N: PartialOrd>(a: N, b: N) -> N {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_of<N: PartialOrd>(a: N, b: N) -> N {
    if b > a {
        b
    } else {
        a
    }
}

/// Smallest integer `n` with `n >= x` for a nonnegative rational.
pub fn ceil_nonneg(x: &Rational) -> u64 {
    x.ceil().to_integer().to_u64().expect("ceiling out of range")
}

/// Largest integer `n` with `n <= x` for a nonnegative rational.
pub fn floor_nonneg(x: &Rational) -> u64 {
    x.floor().to_integer().to_u64().expect("floor out of range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_is_exact_for_floats() {
        for x in [0.0, 0.1, 0.625, 12.6, 1440.0, 1e-300, 3.0e10] {
            assert_eq!(Scalar::to_f64(&rat(x)), x);
        }
    }

    #[test]
    fn correctly_rounded_division() {
        // 0.625 * 2016 / 100 must round to the literal 12.6
        let v = rat(0.625) * rat_int(2016) / rat_int(100);
        assert_eq!(Scalar::to_f64(&v), 12.6);
    }

    #[test]
    fn ceil_and_floor() {
        assert_eq!(ceil_nonneg(&(rat_int(2016) / rat_int(3200))), 1);
        assert_eq!(ceil_nonneg(&rat_int(3)), 3);
        assert_eq!(floor_nonneg(&(rat_int(7) / rat_int(2))), 3);
    }
}
