//! Arithmetic in prime fields GF(p).
//!
//! Words and matrices throughout the crate store raw residues as `u32`
//! together with a [`PrimeField`]; [`FieldElement`] is the checked scalar
//! type for callers that want field membership tracked per value.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive). Products of two residues then fit in a `u32`.
pub const MAX_MODULUS: u32 = 1 << 16;

/// The prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p >= MAX_MODULUS || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(PrimeField { p })
    }

    /// GF(2).
    pub fn binary() -> Self {
        PrimeField { p: 2 }
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % self.p as u64) as u32,
            field: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        (a * b) % self.p
    }

    /// `a + b * c`, the inner step of every dot product.
    #[inline]
    pub fn mul_add(self, a: u32, b: u32, c: u32) -> u32 {
        self.add(a, self.mul(b, c))
    }

    pub fn inv(self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::DivisionByZero);
        }
        // Fermat: a^(p-2).
        Ok(self.pow(a, self.p - 2))
    }

    pub fn div(self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Checks that every entry is a residue below `p`.
    pub fn check_word(self, word: &[u32]) -> Result<()> {
        match word.iter().find(|&&v| v >= self.p) {
            Some(v) => Err(Error::Shape(format!(
                "entry {v} is not a residue modulo {}",
                self.p
            ))),
            None => Ok(()),
        }
    }
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.p
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A residue tagged with its field. Binary operations on elements of
/// different fields fail with [`Error::FieldMismatch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

// Fallible because the operands may live in different fields, so the
// operator traits do not fit.
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) -> Result<PrimeField> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.p, other.field.p));
        }
        Ok(self.field)
    }

    fn wrap(self, value: u32) -> FieldElement {
        FieldElement {
            value,
            field: self.field,
        }
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(self.wrap(f.add(self.value, other.value)))
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(self.wrap(f.sub(self.value, other.value)))
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(self.wrap(f.mul(self.value, other.value)))
    }

    pub fn div(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(self.wrap(f.div(self.value, other.value)?))
    }

    pub fn neg(self) -> FieldElement {
        self.wrap(self.field.neg(self.value))
    }

    pub fn inv(self) -> Result<FieldElement> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
