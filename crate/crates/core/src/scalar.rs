//! Scalar abstraction shared by the Markov and moment calculus.
//!
//! Every closed form in this crate is a rational function of the alphabet
//! size, so the same code can be evaluated exactly (`BigRational`,
//! `Rational64`) or approximately (`f64`, `f32`). Conversion to `f64` for
//! statistics goes through [`Scalar::to_f64_lossy`] and nowhere else.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, One, Signed, ToPrimitive};

/// A field-like number type usable by the generic moment and Markov code.
pub trait Scalar:
    Clone + Num + Signed + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    /// `num / den`; `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn to_f64_lossy(&self) -> f64;

    /// Equality for exact types, relative closeness for floats.
    fn agrees_with(&self, other: &Self) -> bool;

    /// Exact `p/q` rendering for rationals, shortest round-trip decimal for floats.
    fn to_fraction_string(&self) -> String {
        format!("{self}")
    }
}

fn float_close(a: f64, b: f64, rel: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b).abs() <= rel * scale
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn agrees_with(&self, other: &Self) -> bool {
        float_close(*self, *other, 1e-12)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
    fn agrees_with(&self, other: &Self) -> bool {
        float_close(*self as f64, *other as f64, 1e-5)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64_lossy(&self) -> f64 {
        // ToPrimitive on big ratios handles huge numerators/denominators.
        self.to_f64().unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn agrees_with(&self, other: &Self) -> bool {
        self == other
    }
    fn to_fraction_string(&self) -> String {
        if self.denom().is_one() {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for Rational64 {
    const EXACT: bool = true;
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn agrees_with(&self, other: &Self) -> bool {
        self == other
    }
    fn to_fraction_string(&self) -> String {
        if *self.denom() == 1 {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Decimal rendering with 17 significant digits.
pub fn decimal17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{:.16e}", v)
}

/// Builds an exact rational from integer parts.
pub fn big_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Sum of a slice of scalars.
pub fn sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let third = BigRational::ratio(1, 3);
        assert_eq!(third.clone() + third.clone() + third, BigRational::one());
        assert_eq!(BigRational::ratio(2, 6).to_fraction_string(), "1/3");
        assert_eq!(Rational64::ratio(4, 2).to_fraction_string(), "2");
    }

    #[test]
    fn float_agreement_is_relative() {
        assert!(1.0f64.agrees_with(&(1.0 + 1e-14)));
        assert!(!1.0f64.agrees_with(&1.001));
        assert!(0.1f32.agrees_with(&0.1000001));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = BigRational::ratio(1, 3);
        assert_eq!(x.powi(3), BigRational::ratio(1, 27));
        assert_eq!(2.0f64.powi(10), 1024.0);
        assert_eq!(x.powi(0), BigRational::one());
    }

    #[test]
    fn decimal_has_seventeen_digits() {
        let s = decimal17(1.0 / 9.0);
        assert!(s.starts_with("1.1111111111111110e-1"), "{s}");
    }
}
