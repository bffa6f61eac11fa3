//! Scalar backends.
//!
//! Everything downstream of a moment sequence (Hankel-type determinants,
//! projection coefficients, the correction series) is generic over a
//! [`Scalar`]. Two backends are supported:
//!
//! - [`Exact`]: arbitrary-precision rationals. Moment determinants are
//!   notoriously ill-conditioned, and the identities this crate checks hold
//!   algebraically, so whenever the inputs are rational they can be verified
//!   as literal equalities.
//! - `f64`: binary floating point for measured or irrational inputs. Zero
//!   tests become tolerance tests against standardized (unit-variance)
//!   quantities.

use std::fmt::{Debug, Display};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar.
pub type Exact = Ratio<BigInt>;

/// Arithmetic required by the moment/determinant pipeline.
pub trait Scalar:
    Clone + PartialOrd + Signed + Display + Debug + Send + Sync + 'static
{
    /// True when arithmetic is exact and zero tests are literal.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// `num / den`. Panics when `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    /// Conversion from a finite float. Exact for both backends: every finite
    /// `f64` is a binary rational. Returns `None` for NaN/infinite input.
    fn from_f64(x: f64) -> Option<Self>;

    /// Lossy view, used for display, condition estimates, and the real
    /// eigenvalue path.
    fn to_f64(&self) -> f64;

    /// Backend zero test: literal `== 0` for [`Exact`], `|x| <= eps` for
    /// `f64`. Callers are responsible for passing `eps` against values that
    /// have already been made dimensionless.
    fn near_zero(&self, eps: f64) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn near_zero(&self, eps: f64) -> bool {
        self.abs() <= eps
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        Ratio::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Out-of-range magnitudes still carry a meaningful sign.
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn near_zero(&self, _eps: f64) -> bool {
        self.is_zero()
    }
}

/// `base^exp` by repeated multiplication.
pub fn int_pow<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_roundtrip() {
        let x = Exact::ratio(9, 46);
        assert_eq!(x.to_string(), "9/46");
        assert!((Scalar::to_f64(&x) - 0.1956521739130435).abs() < 1e-15);
    }

    #[test]
    fn from_f64_is_exact_for_dyadic() {
        let x = Exact::from_f64(0.5).unwrap();
        assert_eq!(x, Exact::ratio(1, 2));
    }

    #[test]
    fn near_zero_semantics_differ() {
        assert!(!Exact::ratio(1, 1_000_000_000_000).near_zero(1e-6));
        assert!(1e-12_f64.near_zero(1e-6));
    }

    #[test]
    fn int_pow_matches() {
        assert_eq!(int_pow(&Exact::from_int(3), 4), Exact::from_int(81));
        assert_eq!(int_pow(&2.0_f64, 10), 1024.0);
    }
}
