//! Intersection depth of the p-Hilbert class field with the anti-cyclotomic
//! Z_p-extension, from the splitting of auxiliary primes.
//!
//! For a split prime `ℓ` write `ℓ^h = Norm(a + bω)` and `(a + bω)^E = a* + b*ω`.
//! Then `ν = offset + θ - min_ℓ v_p(b*)`, where `E` and `offset` depend on
//! how `p` decomposes:
//!
//! | case        | E     | offset |
//! |-------------|-------|--------|
//! | split       | p - 1 | 1      |
//! | inert       | p + 1 | 1      |
//! | ramified    | 1     | 0      |
//! | exceptional | 3     | 2      |
//!
//! The exceptional case is `p = 3`, `d ≡ 3 (mod 9)`.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, primes_up_to, sqrt_mod_prime, valuation, valuation_big};
use crate::bqf::{self, Form, FormDiscriminant, FormError, FormInt, SMALL_DISC_LIMIT};
use crate::quadfield::{
    represent_power, splitting_type, FieldError, ImagQuadField, QuadInteger, SplittingType,
};

pub const DEFAULT_ELL_BOUND: u64 = 400;
/// Witnesses needed before a result is considered reliable.
pub const MIN_WITNESSES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrinkError {
    #[error("Q(sqrt(-{0})) has extra units and is excluded")]
    ExcludedField(u64),
    #[error("no prime below {bound} splits in Q(sqrt(-{d}))")]
    NoSplitPrimes { d: u64, bound: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("auxiliary prime {ell} must be odd, split and different from p")]
    BadAuxiliaryPrime { ell: u64 },
    #[error("b* vanished for ell = {0}")]
    ZeroCoefficient(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrinkCase {
    Split,
    Inert,
    Ramified,
    Exceptional,
}

impl BrinkCase {
    pub fn of(k: &ImagQuadField, p: u64) -> Self {
        match splitting_type(k, p) {
            SplittingType::Split => Self::Split,
            SplittingType::Inert => Self::Inert,
            SplittingType::Ramified if p == 3 && k.d() % 9 == 3 => Self::Exceptional,
            SplittingType::Ramified => Self::Ramified,
        }
    }

    /// Power applied to `a + bω` before reading off `v_p`.
    pub fn exponent(self, p: u64) -> u64 {
        match self {
            Self::Split => p - 1,
            Self::Inert => p + 1,
            Self::Ramified => 1,
            Self::Exceptional => 3,
        }
    }

    pub fn offset(self) -> i64 {
        match self {
            Self::Split | Self::Inert => 1,
            Self::Ramified => 0,
            Self::Exceptional => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// `θ = 0`
    Trivial,
    /// `ν = θ > 0`
    Contained,
    /// `0 < ν < θ`
    Partial,
    /// `ν = 0 < θ`
    Disjoint,
}

impl Classification {
    pub fn of(theta: u32, nu: u32) -> Self {
        if theta == 0 {
            Self::Trivial
        } else if nu == theta {
            Self::Contained
        } else if nu == 0 {
            Self::Disjoint
        } else {
            Self::Partial
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub ell: u64,
    pub valuation: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionResult {
    pub d: u64,
    pub d_label: u64,
    pub p: u64,
    pub h: u64,
    pub theta: u32,
    pub nu: u32,
    /// `offset + θ - min v` before clamping to `[0, θ]`.
    pub raw_nu: i64,
    pub case: BrinkCase,
    pub witnesses: Vec<Witness>,
    pub classification: Classification,
    pub low_confidence: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValuationMethod {
    /// Solve the norm equation, raise to the power E and read `v_p(b*)`.
    Cornacchia,
    /// Test triviality of the class of `ℓ^(hE)` in ring class groups of
    /// conductor `p^m`.
    RingClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BrinkOptions {
    pub ell_bound: u64,
    pub method: ValuationMethod,
    /// Stop sampling once `ν` is pinned at `θ` and enough witnesses exist.
    pub early_exit: bool,
}

impl Default for BrinkOptions {
    fn default() -> Self {
        Self {
            ell_bound: DEFAULT_ELL_BOUND,
            method: ValuationMethod::Cornacchia,
            early_exit: false,
        }
    }
}

impl BrinkOptions {
    pub fn fast(ell_bound: u64) -> Self {
        Self {
            ell_bound,
            method: ValuationMethod::RingClass,
            early_exit: true,
        }
    }
}

fn check_inputs(k: &ImagQuadField, p: u64) -> Result<(), BrinkError> {
    if k.d() == 1 || k.d() == 3 {
        return Err(BrinkError::ExcludedField(k.d()));
    }
    if p == 2 || !is_prime(p) {
        return Err(BrinkError::NotOddPrime(p));
    }
    Ok(())
}

/// `v_p(b*)` for the split prime `ell`, with `h` the class number of `K`.
pub fn star_valuation(k: &ImagQuadField, p: u64, ell: u64, h: u64) -> Result<u32, BrinkError> {
    check_inputs(k, p)?;
    if ell == p || ell == 2 {
        return Err(BrinkError::BadAuxiliaryPrime { ell });
    }
    let (a, b) = represent_power(k, ell, h)?;
    let case = BrinkCase::of(k, p);
    let e = case.exponent(p);
    let b_star = if e == 1 {
        b
    } else {
        k.pow(&QuadInteger::new(a, b), e).y
    };
    valuation_big(&b_star, p).ok_or(BrinkError::ZeroCoefficient(ell))
}

/// `min(v_p(b*), cap)` computed in ring class groups: `p^m | b*` exactly when
/// the class of `(ℓ O_f)^(hE)` is trivial for the order of conductor `f = p^m`.
pub fn star_valuation_ring_class(
    k: &ImagQuadField,
    p: u64,
    ell: u64,
    h: u64,
    cap: u32,
) -> Result<u32, BrinkError> {
    check_inputs(k, p)?;
    if ell == p || ell == 2 || splitting_type(k, ell) != SplittingType::Split {
        return Err(BrinkError::BadAuxiliaryPrime { ell });
    }
    let disc = k.disc() as i128;
    // b0² ≡ disc (mod 4ℓ), b0 ≡ disc (mod 2)
    let r = sqrt_mod_prime(disc.rem_euclid(ell as i128) as u64, ell).expect("ell splits") as i128;
    let ell_i = ell as i128;
    let b0 = if (r - disc).rem_euclid(2) == 0 {
        r
    } else {
        r + ell_i
    };
    let e = h * BrinkCase::of(k, p).exponent(p);

    let fits = |m: u32| -> bool {
        (k.disc_label() as f64) * (p as f64).powi(2 * m as i32) < SMALL_DISC_LIMIT as f64
    };
    let mut f: i128 = 1;
    for m in 1..=cap {
        f *= p as i128;
        let trivial = if fits(m) {
            ell_power_trivial::<i128>(ell_i, f * b0, disc * f * f, e)
        } else {
            ell_power_trivial::<BigInt>(
                BigInt::from(ell),
                BigInt::from(f) * b0,
                BigInt::from(disc) * BigInt::from(f) * BigInt::from(f),
                e,
            )
        };
        if !trivial {
            return Ok(m - 1);
        }
    }
    Ok(cap)
}

fn ell_power_trivial<T: FormInt>(ell: T, b: T, disc: T, e: u64) -> bool {
    let f = Form::from_ab(ell, b, &disc).expect("prime form").reduce();
    f.pow(e).is_principal()
}

/// `ν` using the class number from form enumeration and the default options.
pub fn intersection_depth(
    k: &ImagQuadField,
    p: u64,
    ell_bound: u64,
) -> Result<IntersectionResult, BrinkError> {
    check_inputs(k, p)?;
    let h = bqf::enumerate_reduced(&FormDiscriminant::from_i64(k.disc())?)?.h();
    intersection_depth_with(
        k,
        p,
        h,
        &BrinkOptions {
            ell_bound,
            ..BrinkOptions::default()
        },
    )
}

/// `ν` for a field whose class number `h` is already known.
pub fn intersection_depth_with(
    k: &ImagQuadField,
    p: u64,
    h: u64,
    opts: &BrinkOptions,
) -> Result<IntersectionResult, BrinkError> {
    check_inputs(k, p)?;
    let theta = valuation(h, p);
    let case = BrinkCase::of(k, p);
    let mut result = IntersectionResult {
        d: k.d(),
        d_label: k.disc_label(),
        p,
        h,
        theta,
        nu: 0,
        raw_nu: 0,
        case,
        witnesses: Vec::new(),
        classification: Classification::Trivial,
        low_confidence: false,
    };
    if theta == 0 {
        return Ok(result);
    }
    let offset = case.offset();
    // v >= offset + θ already forces ν = 0, so larger values need not be resolved.
    let cap = (offset + theta as i64) as u32;
    let mut min_v: Option<u32> = None;
    for ell in primes_up_to(opts.ell_bound.saturating_sub(1)) {
        if ell == 2 || ell == p || splitting_type(k, ell) != SplittingType::Split {
            continue;
        }
        let v = match opts.method {
            ValuationMethod::Cornacchia => star_valuation(k, p, ell, h)?,
            ValuationMethod::RingClass => star_valuation_ring_class(k, p, ell, h, cap)?,
        };
        result.witnesses.push(Witness { ell, valuation: v });
        min_v = Some(min_v.map_or(v, |m| m.min(v)));
        if opts.early_exit
            && result.witnesses.len() >= MIN_WITNESSES
            && (min_v.unwrap() as i64) <= offset
        {
            break;
        }
    }
    let min_v = min_v.ok_or(BrinkError::NoSplitPrimes {
        d: k.d(),
        bound: opts.ell_bound,
    })?;
    let raw = offset + theta as i64 - min_v as i64;
    result.raw_nu = raw;
    result.nu = raw.clamp(0, theta as i64) as u32;
    if raw > theta as i64 && result.witnesses.len() >= MIN_WITNESSES {
        log::warn!(
            "d={} p={}: unclamped depth {} exceeds theta={}",
            k.d(),
            p,
            raw,
            theta
        );
    }
    result.classification = Classification::of(theta, result.nu);
    result.low_confidence = result.witnesses.len() < MIN_WITNESSES;
    Ok(result)
}
