//! Imaginary quadratic fields `Q(√-d)` with `d` squarefree.
//!
//! Elements of the ring of integers are written `x + yω` with
//! `ω = √-d` when `d ≢ 3 (mod 4)` and `ω = (1 + √-d)/2` otherwise.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_squarefree, jacobi, kronecker_two, sqrt_mod_prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a positive squarefree integer")]
    NotSquarefree(u64),
    #[error("{ell} does not split in Q(sqrt(-{d}))")]
    NotSplit { d: u64, ell: u64 },
    #[error("no primitive representation of {ell}^{h} by the norm form of Q(sqrt(-{d}))")]
    NoRepresentation { d: u64, ell: u64, h: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OmegaCase {
    /// `ω = √-d`
    SqrtMinusD,
    /// `ω = (1 + √-d)/2`
    HalfInteger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImagQuadField {
    d: u64,
    disc: i64,
    omega: OmegaCase,
}

impl ImagQuadField {
    pub fn from_squarefree(d: u64) -> Result<Self, FieldError> {
        if d == 0 || d > (i64::MAX as u64) / 4 || !is_squarefree(d) {
            return Err(FieldError::NotSquarefree(d));
        }
        let (disc, omega) = if d % 4 == 3 {
            (-(d as i64), OmegaCase::HalfInteger)
        } else {
            (-4 * d as i64, OmegaCase::SqrtMinusD)
        };
        Ok(Self { d, disc, omega })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// `|disc|`, the label used in tables.
    pub fn disc_label(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn omega(&self) -> OmegaCase {
        self.omega
    }

    /// `(d + 1)/4` in the half-integer case, where `ω² = ω - t`.
    fn t(&self) -> BigInt {
        BigInt::from((self.d + 1) / 4)
    }

    pub fn norm(&self, e: &QuadInteger) -> BigInt {
        let (x, y) = (&e.x, &e.y);
        match self.omega {
            OmegaCase::SqrtMinusD => x * x + BigInt::from(self.d) * y * y,
            OmegaCase::HalfInteger => x * x + x * y + self.t() * y * y,
        }
    }

    pub fn mul(&self, e: &QuadInteger, f: &QuadInteger) -> QuadInteger {
        let xx = &e.x * &f.x;
        let yy = &e.y * &f.y;
        let cross = &e.x * &f.y + &e.y * &f.x;
        match self.omega {
            OmegaCase::SqrtMinusD => QuadInteger::new(xx - BigInt::from(self.d) * yy, cross),
            OmegaCase::HalfInteger => QuadInteger::new(xx - self.t() * &yy, cross + yy),
        }
    }

    pub fn pow(&self, e: &QuadInteger, mut k: u64) -> QuadInteger {
        let mut acc = QuadInteger::one();
        let mut base = e.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// `x + yω` in the ring of integers of some field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadInteger {
    pub x: BigInt,
    pub y: BigInt,
}

impl QuadInteger {
    pub fn new(x: BigInt, y: BigInt) -> Self {
        Self { x, y }
    }

    pub fn one() -> Self {
        Self::new(BigInt::one(), BigInt::zero())
    }
}

/// The field of discriminant `-n`, if `-n` is fundamental.
pub fn to_fundamental(n: u64) -> Option<ImagQuadField> {
    if n == 0 {
        return None;
    }
    match n % 4 {
        3 => ImagQuadField::from_squarefree(n).ok(),
        0 => {
            let m = n / 4;
            if m % 4 == 1 || m % 4 == 2 {
                ImagQuadField::from_squarefree(m).ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Decomposition of the prime `p` in `K`, from the Kronecker symbol `(disc | p)`.
pub fn splitting_type(k: &ImagQuadField, p: u64) -> SplittingType {
    let s = if p == 2 {
        kronecker_two(k.disc)
    } else {
        jacobi(k.disc, p)
    };
    match s {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

/// Root of `x² ≡ a (mod ell^h)` lifted from a root mod `ell`, for `ell ∤ 2a`.
fn hensel_sqrt(a: &BigInt, r0: u64, ell: u64, h: u32) -> BigInt {
    let ell_b = BigInt::from(ell);
    let mut r = BigInt::from(r0);
    let mut k = 1u32;
    while k < h {
        k = (2 * k).min(h);
        let m = ell_b.pow(k);
        let f = (&r * &r - a).mod_floor(&m);
        let two_r = (BigInt::from(2) * &r).mod_floor(&m);
        let inv = two_r.modinv(&m).expect("2r is a unit");
        r = (&r - f * inv).mod_floor(&m);
    }
    r
}

/// Euclid on `(m, r)` until the remainder drops below `bound`.
fn cornacchia_descent(m: &BigInt, r: &BigInt, bound: &BigInt) -> BigInt {
    let mut a = m.clone();
    let mut b = r.clone();
    while &b > bound {
        let t = a.mod_floor(&b);
        a = b;
        b = t;
    }
    b
}

/// Coprime `(a, b)` with `Norm(a + bω) = ell^h` and `b > 0`.
pub fn represent_power(
    k: &ImagQuadField,
    ell: u64,
    h: u64,
) -> Result<(BigInt, BigInt), FieldError> {
    if ell == 2 || !crate::arith::is_prime(ell) {
        return Err(FieldError::NotOddPrime(ell));
    }
    if splitting_type(k, ell) != SplittingType::Split {
        return Err(FieldError::NotSplit { d: k.d, ell });
    }
    let fail = FieldError::NoRepresentation { d: k.d, ell, h };
    let h32 = u32::try_from(h).map_err(|_| fail.clone())?;
    let minus_d = -BigInt::from(k.d);
    let r0 = sqrt_mod_prime(
        minus_d.mod_floor(&BigInt::from(ell)).try_into().unwrap(),
        ell,
    )
    .ok_or_else(|| fail.clone())?;
    let q = BigInt::from(ell).pow(h32);
    let r = hensel_sqrt(&minus_d, r0, ell, h32);
    let dd = BigInt::from(k.d);

    for root in [r.clone(), (&q - &r).mod_floor(&q)] {
        let found = match k.omega {
            OmegaCase::SqrtMinusD => {
                let x = cornacchia_descent(&q, &root, &q.sqrt());
                let rest = &q - &x * &x;
                if rest.is_negative() || !rest.is_multiple_of(&dd) {
                    None
                } else {
                    let y2 = rest / &dd;
                    let y = y2.sqrt();
                    (&y * &y == y2).then_some((x, y))
                }
            }
            OmegaCase::HalfInteger => {
                // x² + d y² = 4q with x odd, then a = (x - y)/2, b = y.
                let two_q = BigInt::from(2) * &q;
                let mut root = root.clone();
                if root.is_even() {
                    root += &q;
                }
                let x = cornacchia_descent(&two_q, &root, &(BigInt::from(4) * &q).sqrt());
                let rest = BigInt::from(4) * &q - &x * &x;
                if rest.is_negative() || !rest.is_multiple_of(&dd) {
                    None
                } else {
                    let y2 = rest / &dd;
                    let y = y2.sqrt();
                    if &y * &y == y2 && (&x - &y).is_even() {
                        Some(((&x - &y) / 2, y))
                    } else {
                        None
                    }
                }
            }
        };
        if let Some((mut a, mut b)) = found {
            if b.is_zero() || !a.gcd(&b).is_one() {
                continue;
            }
            if b.is_negative() {
                a = -a;
                b = -b;
            }
            debug_assert_eq!(k.norm(&QuadInteger::new(a.clone(), b.clone())), q);
            return Ok((a, b));
        }
    }
    Err(fail)
}
