//! Scalar abstraction shared by the LP, pricing and column-generation layers.
//!
//! Floating types carry the working tolerances; the exact rational type uses
//! zero tolerances so the same code paths double as exact oracles.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// True for exact arithmetic (tolerances collapse to zero).
    const EXACT: bool;

    /// Map a nominal double-precision tolerance onto this type.
    fn tolerance(nominal: f64) -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| panic!("value {v} not representable"))
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Pivot magnitude below which a tableau entry is treated as zero.
    fn pivot_tol() -> Self {
        Self::tolerance(1e-9)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance(nominal: f64) -> Self {
        nominal
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    // single precision cannot resolve the double-precision tolerances
    fn tolerance(nominal: f64) -> Self {
        nominal.max(2e-5) as f32
    }

    fn pivot_tol() -> Self {
        1e-6
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance(_nominal: f64) -> Self {
        BigRational::zero()
    }

    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(|| panic!("value {v} not representable"))
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Sum of `values[i]` over `indices`, accumulated in the order given.
pub fn indexed_sum<T: Scalar>(values: &[T], indices: &[usize]) -> T {
    indices
        .iter()
        .fold(T::zero(), |acc, &i| acc + values[i].clone())
}
