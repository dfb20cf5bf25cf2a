//! Scalar arithmetic contexts.
//!
//! Codes and matrices are generic over a [`Field`], a small context object that
//! owns the arithmetic. [`Real`] works on `f64`; [`PrimeField`] works on
//! residues modulo a runtime-chosen prime and is exact.

use std::fmt::Debug;

use crate::error::{Error, Result};

/// Default modulus for exact verification, the Mersenne prime 2^31 - 1.
pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;

pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Copy + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;

    /// True when arithmetic is exact (no rounding).
    fn is_exact(&self) -> bool;

    /// Magnitude used for error reporting: `|a|` for reals, 0/1 for residues.
    fn magnitude(&self, a: Self::Elem) -> f64;

    fn distance(&self, a: Self::Elem, b: Self::Elem) -> f64 {
        self.magnitude(self.sub(a, b))
    }

    fn pow(&self, base: Self::Elem, mut exp: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// `acc + a * b`
    fn mul_add(&self, acc: Self::Elem, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(acc, self.mul(a, b))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Real;

impl Field for Real {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn inv(&self, a: f64) -> Option<f64> {
        if a == 0.0 {
            None
        } else {
            Some(1.0 / a)
        }
    }
    fn from_i64(&self, v: i64) -> f64 {
        v as f64
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn magnitude(&self, a: f64) -> f64 {
        a.abs()
    }
    fn mul_add(&self, acc: f64, a: f64, b: f64) -> f64 {
        a.mul_add(b, acc)
    }
}

/// Integers modulo a prime `p < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus >= 1 << 63 {
            return Err(Error::invalid(format!("modulus {modulus} exceeds 2^63")));
        }
        if !is_prime(modulus) {
            return Err(Error::invalid(format!("modulus {modulus} is not prime")));
        }
        Ok(PrimeField { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Lift a residue to its balanced representative in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.modulus / 2 {
            a as i64 - self.modulus as i64
        } else {
            a as i64
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField {
            modulus: DEFAULT_PRIME,
        }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }
    fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            // Fermat: a^(p-2)
            Some(self.pow(a, self.modulus - 2))
        }
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn magnitude(&self, a: u64) -> f64 {
        if a == 0 {
            0.0
        } else {
            1.0
        }
    }
}

/// Inverts every element of `values` with a single field inversion
/// (Montgomery's trick). Fails if any element is zero.
pub fn batch_inverse<F: Field>(field: &F, values: &[F::Elem]) -> Option<Vec<F::Elem>> {
    if values.is_empty() {
        return Some(Vec::new());
    }
    let mut prefix = Vec::with_capacity(values.len());
    let mut acc = field.one();
    for &v in values {
        if field.magnitude(v) == 0.0 {
            return None;
        }
        prefix.push(acc);
        acc = field.mul(acc, v);
    }
    let mut inv_acc = field.inv(acc)?;
    let mut out = vec![field.zero(); values.len()];
    for i in (0..values.len()).rev() {
        out[i] = field.mul(inv_acc, prefix[i]);
        inv_acc = field.mul(inv_acc, values[i]);
    }
    Some(out)
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(257));
        assert!(is_prime(DEFAULT_PRIME));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(1));
        assert!(!is_prime(561)); // Carmichael
        assert!(!is_prime(DEFAULT_PRIME + 2));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(PrimeField::new(256).is_err());
        assert!(PrimeField::new(257).is_ok());
    }

    #[test]
    fn field_inverse_and_negatives() {
        let f = PrimeField::new(257).unwrap();
        for a in 1..257 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
        assert_eq!(f.from_i64(-1), 256);
        assert_eq!(f.to_signed(256), -1);
    }

    #[test]
    fn batch_inverse_matches_single() {
        let f = PrimeField::default();
        let vals: Vec<u64> = (1..50).map(|v| v * 7919).collect();
        let inv = batch_inverse(&f, &vals).unwrap();
        for (v, i) in vals.iter().zip(&inv) {
            assert_eq!(f.mul(*v, *i), 1);
        }
        assert!(batch_inverse(&f, &[3, 0, 5]).is_none());
    }
}
