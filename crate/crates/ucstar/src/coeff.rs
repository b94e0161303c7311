//! Exact Gaussian-rational scalars.
//!
//! Every coefficient in the free *-algebra is a complex number with exact
//! rational real and imaginary parts. No floating point enters until a term
//! is evaluated against a concrete representation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A complex number with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coefficient {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coefficient { re, im }
    }

    pub fn zero() -> Self {
        Coefficient::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Coefficient::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Coefficient::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Coefficient::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// Exact rational `num/den` as a real coefficient. Panics on zero denominator.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Coefficient::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Coefficient::new(
            BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Coefficient::new(self.re.clone(), -self.im.clone())
    }

    /// True when the canonical sign is negative (used by the printer).
    pub fn is_negative(&self) -> bool {
        self.re.is_negative() || (self.re.is_zero() && self.im.is_negative())
    }

    /// Lossy conversion for numeric evaluation.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        Coefficient::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &Coefficient) -> Coefficient {
        Coefficient::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        Coefficient::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient::new(-self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}{}i)", self.re, self.im)
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}
