//! Primitive positive-definite binary quadratic forms `ax² + bxy + cy²`.
//!
//! Forms are kept reduced, so two forms are in the same class exactly when
//! their coefficients agree. [`QuadForm`] uses big integers; [`SmallForm`]
//! is the `i128` variant used in sweeps, valid while `|D| < 2^60`.

mod pgroup;
mod sieve;

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use thiserror::Error;

pub use pgroup::{AbelianPGroup, GroupError};
pub use sieve::DivisorSieve;

use crate::arith::is_prime;

/// Largest `|D|` accepted by the `i128` code paths.
pub const SMALL_DISC_LIMIT: u64 = 1 << 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("discriminant {0} is not negative")]
    NonNegativeDiscriminant(String),
    #[error("discriminant {0} is not 0 or 1 mod 4")]
    BadResidue(String),
    #[error("form ({0}, {1}, {2}) is not primitive")]
    NonPrimitive(String, String, String),
    #[error("leading coefficient {0} is not positive")]
    NonPositiveLeading(String),
    #[error("b^2 - D is not divisible by 4a")]
    NotIntegral,
    #[error("discriminants differ: {0} vs {1}")]
    MismatchedDiscriminants(String, String),
    #[error("|D| = {0} is too large for direct enumeration")]
    TooLarge(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
}

/// Integer types that forms can be built over.
pub trait FormInt:
    Clone
    + fmt::Debug
    + fmt::Display
    + Integer
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Hash
    + Send
    + Sync
{
}

impl<T> FormInt for T where
    T: Clone
        + fmt::Debug
        + fmt::Display
        + Integer
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Hash
        + Send
        + Sync
{
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form<T> {
    a: T,
    b: T,
    c: T,
}

pub type QuadForm = Form<BigInt>;
pub type SmallForm = Form<i128>;

fn int<T: FormInt>(n: i64) -> T {
    T::from_i64(n).expect("small constant")
}

impl<T: FormInt> Form<T> {
    /// A validated form. The result is not reduced; call [`Form::reduce`].
    pub fn new(a: T, b: T, c: T) -> Result<Self, FormError> {
        if !a.is_positive() {
            return Err(FormError::NonPositiveLeading(a.to_string()));
        }
        let f = Self { a, b, c };
        let disc = f.discriminant();
        if !disc.is_negative() {
            return Err(FormError::NonNegativeDiscriminant(disc.to_string()));
        }
        if !f.a.gcd(&f.b).gcd(&f.c).is_one() {
            return Err(FormError::NonPrimitive(
                f.a.to_string(),
                f.b.to_string(),
                f.c.to_string(),
            ));
        }
        Ok(f)
    }

    /// The form `(a, b, (b² - D) / 4a)`.
    pub fn from_ab(a: T, b: T, disc: &T) -> Result<Self, FormError> {
        let four_a = a.clone() * int(4);
        if four_a.is_zero() {
            return Err(FormError::NonPositiveLeading(a.to_string()));
        }
        let num = b.clone() * b.clone() - disc.clone();
        let (c, r) = num.div_rem(&four_a);
        if !r.is_zero() {
            return Err(FormError::NotIntegral);
        }
        Self::new(a, b, c)
    }

    pub(crate) fn from_parts_unchecked(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn principal(disc: &T) -> Result<Self, FormError> {
        check_disc(disc)?;
        let b = if disc.is_odd() { T::one() } else { T::zero() };
        Self::from_ab(T::one(), b, disc)
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    pub fn c(&self) -> &T {
        &self.c
    }

    pub fn discriminant(&self) -> T {
        self.b.clone() * self.b.clone() - int::<T>(4) * self.a.clone() * self.c.clone()
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let abs_b = b.abs();
        if abs_b > *a || a > c {
            return false;
        }
        if (abs_b == *a || a == c) && b.is_negative() {
            return false;
        }
        true
    }

    /// The reduced form of the same class.
    pub fn reduce(&self) -> Self {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        loop {
            if b > a || b <= -a.clone() {
                let two_a = a.clone() + a.clone();
                let mut r = b.mod_floor(&two_a);
                if r > a {
                    r = r - two_a.clone();
                }
                let k = (r.clone() - b.clone()) / two_a;
                c = a.clone() * k.clone() * k.clone() + b.clone() * k + c;
                b = r;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            break;
        }
        if a == c && b.is_negative() {
            b = -b;
        }
        Self { a, b, c }
    }

    /// Composition of classes, reduced. Fails on mismatched discriminants.
    pub fn compose(&self, other: &Self) -> Result<Self, FormError> {
        let (d1, d2) = (self.discriminant(), other.discriminant());
        if d1 != d2 {
            return Err(FormError::MismatchedDiscriminants(
                d1.to_string(),
                d2.to_string(),
            ));
        }
        Ok(self.mul(other))
    }

    /// Composition without the discriminant check.
    pub fn mul(&self, other: &Self) -> Self {
        let (f1, f2) = if self.a > other.a {
            (other, self)
        } else {
            (self, other)
        };
        let (a1, b1) = (&f1.a, &f1.b);
        let (a2, b2, c2) = (&f2.a, &f2.b, &f2.c);
        let s = (b1.clone() + b2.clone()) / int(2);
        let n = b2.clone() - s.clone();

        let (y1, d) = if a2.is_multiple_of(a1) {
            (T::zero(), a1.clone())
        } else {
            let e = a2.extended_gcd(a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s.is_multiple_of(&d) {
            (T::zero(), -T::one(), d)
        } else {
            let e = s.extended_gcd(&d);
            (e.x, -e.y, e.gcd)
        };

        let v1 = a1.clone() / d1.clone();
        let v2 = a2.clone() / d1.clone();
        let r = (y1 * y2 * n - x2 * c2.clone()).mod_floor(&v1);
        let b3 = b2.clone() + int::<T>(2) * v2.clone() * r.clone();
        let a3 = v1.clone() * v2.clone();
        let c3 = (c2.clone() * d1 + r.clone() * (b2.clone() + v2 * r)) / v1;
        Self {
            a: a3,
            b: b3,
            c: c3,
        }
        .reduce()
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// The inverse class `(a, -b, c)`, reduced.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -self.b.clone(),
            c: self.c.clone(),
        }
        .reduce()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::principal(&self.discriminant()).expect("valid discriminant");
        let mut base = self.reduce();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// True for the reduced identity form.
    pub fn is_principal(&self) -> bool {
        self.a.is_one()
    }
}

impl SmallForm {
    pub fn to_big(&self) -> QuadForm {
        Form {
            a: BigInt::from(self.a),
            b: BigInt::from(self.b),
            c: BigInt::from(self.c),
        }
    }
}

impl QuadForm {
    /// Narrows to `i128` coefficients when the discriminant is small enough.
    pub fn to_small(&self) -> Option<SmallForm> {
        let disc = self.discriminant();
        if disc.abs() >= BigInt::from(SMALL_DISC_LIMIT) {
            return None;
        }
        Some(Form {
            a: self.a.to_i128()?,
            b: self.b.to_i128()?,
            c: self.c.to_i128()?,
        })
    }
}

impl<T: FormInt> fmt::Display for Form<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

fn check_disc<T: FormInt>(disc: &T) -> Result<(), FormError> {
    if !disc.is_negative() {
        return Err(FormError::NonNegativeDiscriminant(disc.to_string()));
    }
    let r = disc.mod_floor(&int(4));
    if !(r.is_zero() || r.is_one()) {
        return Err(FormError::BadResidue(disc.to_string()));
    }
    Ok(())
}

/// Reduces a form; see [`Form::reduce`].
pub fn reduce<T: FormInt>(f: &Form<T>) -> Form<T> {
    f.reduce()
}

/// Composes two forms; see [`Form::compose`].
pub fn compose<T: FormInt>(f: &Form<T>, g: &Form<T>) -> Result<Form<T>, FormError> {
    f.compose(g)
}

/// A negative integer congruent to 0 or 1 mod 4.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormDiscriminant(BigInt);

impl FormDiscriminant {
    pub fn new(d: BigInt) -> Result<Self, FormError> {
        check_disc(&d)?;
        Ok(Self(d))
    }

    pub fn from_i64(d: i64) -> Result<Self, FormError> {
        Self::new(BigInt::from(d))
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }

    /// `|D| / 4` when `4 | D`.
    pub fn m(&self) -> Option<BigInt> {
        let four = BigInt::from(4);
        self.0.is_multiple_of(&four).then(|| -&self.0 / four)
    }
}

/// All reduced forms of one discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormClassGroup {
    discriminant: FormDiscriminant,
    reduced_forms: Vec<QuadForm>,
}

impl FormClassGroup {
    pub fn discriminant(&self) -> &FormDiscriminant {
        &self.discriminant
    }

    pub fn reduced_forms(&self) -> &[QuadForm] {
        &self.reduced_forms
    }

    pub fn h(&self) -> u64 {
        self.reduced_forms.len() as u64
    }

    pub fn principal(&self) -> QuadForm {
        QuadForm::principal(self.discriminant.value()).expect("validated discriminant")
    }
}

/// Reduced primitive forms of discriminant `disc`, sorted by `(a, b)`.
///
/// Direct scan over `a <= sqrt(|D|/3)` and `|b| <= a` with `b ≡ D (mod 2)`.
pub fn reduced_forms_small(disc: i64) -> Vec<SmallForm> {
    assert!(
        disc < 0 && disc.rem_euclid(4) <= 1,
        "invalid discriminant {disc}"
    );
    let n = -(disc as i128);
    let a_max = ((n / 3) as f64).sqrt() as i128 + 1;
    let mut out = Vec::new();
    let parity = n & 1;
    for a in 1..=a_max {
        if 3 * a * a > n {
            break;
        }
        let four_a = 4 * a;
        let mut b = -a + 1;
        if (b & 1) != parity {
            b += 1;
        }
        while b <= a {
            let num = b * b + n;
            if num % four_a == 0 {
                let c = num / four_a;
                if c >= a && !(c == a && b < 0) && a.gcd(&b).gcd(&c) == 1 {
                    out.push(Form { a, b, c });
                }
            }
            b += 2;
        }
    }
    out
}

/// Every reduced primitive form of discriminant `D`.
pub fn enumerate_reduced(disc: &FormDiscriminant) -> Result<FormClassGroup, FormError> {
    let d = disc
        .to_i64()
        .filter(|d| d.unsigned_abs() < SMALL_DISC_LIMIT)
        .ok_or_else(|| FormError::TooLarge(disc.value().to_string()))?;
    let forms = reduced_forms_small(d)
        .iter()
        .map(SmallForm::to_big)
        .collect();
    Ok(FormClassGroup {
        discriminant: disc.clone(),
        reduced_forms: forms,
    })
}

/// Elements `g` with `g^M` principal.
pub fn subgroup_exponent_dividing(g: &FormClassGroup, m: u64) -> Vec<QuadForm> {
    g.reduced_forms
        .iter()
        .filter(|f| f.pow(m).is_principal())
        .cloned()
        .collect()
}

/// Structure of the p-Sylow subgroup of the form class group of `D`.
pub fn p_sylow_structure(disc: &FormDiscriminant, p: u64) -> Result<AbelianPGroup, FormError> {
    check_odd_prime(p)?;
    let d = disc
        .to_i64()
        .filter(|d| d.unsigned_abs() < SMALL_DISC_LIMIT)
        .ok_or_else(|| FormError::TooLarge(disc.value().to_string()))?;
    let forms = reduced_forms_small(d);
    Ok(sylow_structure(&forms, p))
}

pub(crate) fn check_odd_prime(p: u64) -> Result<(), FormError> {
    if p == 2 || !is_prime(p) {
        return Err(FormError::NotOddPrime(p));
    }
    Ok(())
}

/// The p-Sylow subgroup of the group formed by `forms` (all classes of one
/// discriminant), as a list of elements.
pub fn sylow_elements<T: FormInt>(forms: &[Form<T>], p: u64) -> Vec<Form<T>> {
    let h = forms.len() as u64;
    let mut u = h;
    let mut target = 1u64;
    while u.is_multiple_of(p) {
        u /= p;
        target *= p;
    }
    let identity = Form::principal(&forms[0].discriminant()).expect("valid discriminant");
    let mut seen: HashSet<Form<T>> = HashSet::from([identity.clone()]);
    let mut elems = vec![identity];
    for f in forms {
        if elems.len() as u64 == target {
            break;
        }
        let x = f.pow(u);
        if seen.contains(&x) {
            continue;
        }
        let base = elems.clone();
        let mut step = x.clone();
        while !seen.contains(&step) {
            for s in &base {
                let y = s.mul(&step);
                if seen.insert(y.clone()) {
                    elems.push(y);
                }
            }
            step = step.mul(&x);
        }
    }
    debug_assert_eq!(elems.len() as u64, target);
    elems
}

/// Exponent partition of the p-Sylow subgroup, read off from the counts
/// `#{x : x^(p^j) = 1} = p^(sum min(e_i, j))`.
pub fn sylow_structure<T: FormInt>(forms: &[Form<T>], p: u64) -> AbelianPGroup {
    let elems = sylow_elements(forms, p);
    structure_from_elements(&elems, p)
}

fn structure_from_elements<T: FormInt>(elems: &[Form<T>], p: u64) -> AbelianPGroup {
    let mut order_log = Vec::with_capacity(elems.len());
    for x in elems {
        let mut y = x.clone();
        let mut j = 0u32;
        while !y.is_principal() {
            y = y.pow(p);
            j += 1;
        }
        order_log.push(j);
    }
    let top = order_log.iter().copied().max().unwrap_or(0);
    // s[j] = log_p #{x : ord(x) | p^j}
    let mut s = vec![0u32; top as usize + 1];
    for j in 0..=top {
        let n = order_log.iter().filter(|&&o| o <= j).count() as u64;
        s[j as usize] = crate::arith::valuation(n, p);
    }
    // number of cyclic factors of exponent >= j is s[j] - s[j-1]
    let mut exps = Vec::new();
    for j in 1..=top as usize {
        let ge_j = s[j] - s[j - 1];
        let ge_next = if j < top as usize { s[j + 1] - s[j] } else { 0 };
        for _ in 0..(ge_j - ge_next) {
            exps.push(j as u32);
        }
    }
    AbelianPGroup::new(p, exps).expect("p checked by caller")
}
