//! Coefficient rings for exact and floating-point operator algebra.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A commutative ring that contains the non-negative integers.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
    fn from_u64(n: u64) -> Self;
    fn from_biguint(n: &BigUint) -> Self;

    /// Equality for exact rings; agreement to a few ulps for floating types.
    fn agrees_with(&self, other: &Self) -> bool {
        self == other
    }
}

const FLOAT_AGREEMENT: f64 = 64.0 * f64::EPSILON;

/// Scalars that also support exact or rounded division.
pub trait FieldScalar: Scalar + std::ops::Div<Output = Self> {}

impl Scalar for f64 {
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }
    fn agrees_with(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_AGREEMENT * self.abs().max(other.abs())
    }
}

impl Scalar for C64 {
    fn from_u64(n: u64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_biguint(n: &BigUint) -> Self {
        C64::new(f64::from_biguint(n), 0.0)
    }
    fn agrees_with(&self, other: &Self) -> bool {
        (self - other).norm() <= FLOAT_AGREEMENT * self.norm().max(other.norm())
    }
}

impl Scalar for BigInt {
    fn from_u64(n: u64) -> Self {
        BigInt::from(n)
    }
    fn from_biguint(n: &BigUint) -> Self {
        BigInt::from(n.clone())
    }
}

impl Scalar for BigRational {
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }
}

impl FieldScalar for f64 {}
impl FieldScalar for C64 {}
impl FieldScalar for BigRational {}
