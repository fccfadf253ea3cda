//! Exact coefficient fields: prime fields `F_p` and the rationals.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic of an exact field. Elements are plain values; the field value
/// carries whatever context (the modulus) the operations need.
pub trait Field: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Uniform element for finite fields, a small integer for the rationals.
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Number of elements, `None` when infinite.
    fn order(&self) -> Option<u64>;
    fn spec(&self) -> FieldSpec;
    /// Exact textual form used by the JSON serializers.
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Rescales a vector by a nonzero scalar so that all entries are
    /// integers. A no-op for finite fields.
    fn clear_denominators(&self, _v: &mut [Self::Elem]) {}
}

/// Serializable description of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldSpec::Rationals => Ok(()),
            FieldSpec::PrimeField(p) if is_prime(p) && p < (1 << 31) => Ok(()),
            FieldSpec::PrimeField(p) => Err(Error::InvalidField(format!("{p} is not a usable prime"))),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The primes `>= start` in increasing order.
pub fn primes_from(start: u64) -> impl Iterator<Item = u64> {
    (start..).filter(|&p| is_prime(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        FieldSpec::PrimeField(p).validate()?;
        Ok(Self { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        acc
    }

    /// Reduction of a rational number; fails when `p` divides the denominator.
    pub fn reduce(&self, q: &BigRational) -> Result<u64> {
        let p = BigInt::from(self.p);
        let num = q.numer().mod_floor(&p).to_u64().unwrap();
        let den = q.denom().mod_floor(&p).to_u64().unwrap();
        if den == 0 {
            return Err(Error::BadReduction { p: self.p, value: q.to_string() });
        }
        Ok(num * self.pow(den, self.p - 2) % self.p)
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(*a, self.p - 2))
        }
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::PrimeField(self.p)
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<u64> {
        let q = parse_rational(s)?;
        self.reduce(&q)
    }
}

/// The field of rational numbers with arbitrary precision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        self.from_i64(rng.gen_range(-3..=3))
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Rationals
    }
    fn format(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
    fn parse(&self, s: &str) -> Result<BigRational> {
        parse_rational(s)
    }
    fn clear_denominators(&self, v: &mut [BigRational]) {
        let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let scale = BigRational::from_integer(l);
        for q in v.iter_mut() {
            *q = &*q * &scale;
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not an exact number: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `Some(n)` when the rational is an integer fitting in `i64`.
pub fn rational_to_i64(q: &BigRational) -> Option<i64> {
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_inverses() {
        let f = PrimeField::new(13).unwrap();
        for a in 1..13 {
            let b = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &b), 1);
        }
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.from_i64(-1), 12);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(PrimeField::new(15).is_err());
        assert!(PrimeField::new(2).is_ok());
    }

    #[test]
    fn reduce_rationals() {
        let f = PrimeField::new(7).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(f.reduce(&half).unwrap(), 4);
        let seventh = BigRational::new(1.into(), 7.into());
        assert!(f.reduce(&seventh).is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        let q = Rationals;
        for s in ["0", "-3", "5/7", "-2/9"] {
            let v = q.parse(s).unwrap();
            assert_eq!(q.format(&v), s);
        }
        assert!(q.parse("1/0").is_err());
    }
}
