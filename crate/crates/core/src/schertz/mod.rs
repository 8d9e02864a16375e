//! Defining polynomials for layers of the anti-cyclotomic Z_3-extension from
//! Schertz class invariants of ring class fields of conductor `3^k` (or `2·3^k`).
//!
//! For the order of discriminant `D = -4m` let `G` be its form class group and
//! `H = {g : g^M = 1}`. When `G/H` is cyclic of 3-power order, the coset sums of
//! the class invariant `g(α)` are the conjugates of a generator of the fixed
//! field of `H`, and their product polynomial has integer coefficients.

pub mod numeric;
pub mod poly;

use std::collections::HashMap;

use astro_float::{BigFloat, Consts};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use numeric::{eta, weber_f, weber_f1, Complex, PrecisionContext};
pub use poly::{factor_pattern, irreducibility, same_patterns, IntPoly, Irreducibility};

use crate::arith::inv_mod;
use crate::bqf::{enumerate_reduced, FormDiscriminant, FormError, QuadForm};
use crate::quadfield::ImagQuadField;
use numeric::{from_bigint, log2_abs, new_consts, rm, round_to_bigint, sqrt_u64};

/// Primes below this bound are used for irreducibility and field comparisons.
pub const PATTERN_BOUND: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchertzError {
    #[error("precision of {0} digits is below the minimum of 50")]
    PrecisionTooLow(u32),
    #[error("imaginary part {0} is too small for the eta series")]
    ImaginaryPartTooSmall(f64),
    #[error("discriminant {0} is not of the form -4m")]
    OddDiscriminant(String),
    #[error("form ({0}) does not have odd A and 32 | B")]
    NotNormalized(String),
    #[error("no class invariant for m ≡ {0} (mod 8)")]
    UnsupportedResidue(u64),
    #[error("only p = 3 towers are supported, got p = {0}")]
    UnsupportedPrime(u64),
    #[error("G/H is not cyclic of 3-power order (#G = {group}, #H = {subgroup})")]
    NonCyclicQuotient { group: u64, subgroup: u64 },
    #[error("rounding residual 10^{residual_log10:.1} exceeds 10^-{guard} at {digits} digits")]
    RoundingFailure {
        residual_log10: f64,
        digits: u32,
        guard: u32,
    },
    #[error("polynomial is not certified irreducible ({0:?})")]
    NotIrreducible(Irreducibility),
    #[error("resultant stayed degenerate for every shift tried")]
    DegenerateResultant,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A form `Ax² + Bxy + Cy²` with `A` odd and `32 | B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizedForm {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl NormalizedForm {
    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    fn check(&self) -> Result<(), SchertzError> {
        if self.a.is_even() || !(&self.b % BigInt::from(32)).is_zero() {
            return Err(SchertzError::NotNormalized(format!(
                "{}, {}, {}",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

/// `y ↦ x + y` when `a` is even, then `x ↦ x + ty` with `b + 2at ≡ 0 (mod 32)`.
pub fn normalize_form(f: &QuadForm) -> Result<NormalizedForm, SchertzError> {
    let (mut a, mut b, c) = (f.a().clone(), f.b().clone(), f.c().clone());
    if b.is_odd() {
        return Err(SchertzError::OddDiscriminant(f.discriminant().to_string()));
    }
    if a.is_even() {
        a = &a + &b + &c;
        b = &b + BigInt::from(2) * &c;
    }
    // a·t ≡ -b/2 (mod 16)
    let sixteen = BigInt::from(16);
    let a16 = a.mod_floor(&sixteen).to_i128().unwrap();
    let inv = inv_mod(a16, 16).expect("odd leading coefficient");
    let half_b = (-(&b / BigInt::from(2)))
        .mod_floor(&sixteen)
        .to_i128()
        .unwrap();
    let t = BigInt::from(half_b * inv % 16);
    let c2 = &c + &t * &b + &t * &t * &a;
    let b2 = &b + BigInt::from(2) * &a * &t;
    Ok(NormalizedForm { a, b: b2, c: c2 })
}

fn legendre_two(a: &BigInt) -> i8 {
    match a.mod_floor(&BigInt::from(8)).to_u8().unwrap() {
        1 | 7 => 1,
        _ => -1,
    }
}

/// The root `α = (-B + √D) / 2A` in the upper half plane.
pub fn root_in_upper_half_plane(nf: &NormalizedForm, p: usize) -> Complex {
    let r = rm();
    let m = (-nf.discriminant()) / 4;
    let two_a = from_bigint(&(BigInt::from(2) * &nf.a), p);
    let re = from_bigint(&-&nf.b, p).div(&two_a, p, r);
    let sqrt_m = from_bigint(&m, p).sqrt(p, r);
    let im = sqrt_m.div(&from_bigint(&nf.a, p), p, r);
    Complex::new(re, im)
}

/// The class invariant `g(α)` for `D = -4m`, chosen by `m mod 8`.
pub fn schertz_invariant(
    nf: &NormalizedForm,
    m: &BigInt,
    ctx: &PrecisionContext,
    cc: &mut Consts,
) -> Result<Complex, SchertzError> {
    nf.check()?;
    if nf.discriminant() != BigInt::from(-4) * m {
        return Err(SchertzError::OddDiscriminant(nf.discriminant().to_string()));
    }
    let residue = m.mod_floor(&BigInt::from(8)).to_u64().unwrap();
    let p = ctx.bits();
    let r = rm();
    let alpha = root_in_upper_half_plane(nf, p + 64);
    let sign = BigFloat::from_i8(legendre_two(&nf.a), p);
    let sqrt2 = sqrt_u64(2, p);
    let base = match residue {
        1 => weber_f(&alpha, ctx, cc)?
            .powi(2, p)
            .scale(&sign.div(&sqrt2, p, r), p),
        3 => weber_f(&alpha, ctx, cc)?,
        5 => weber_f(&alpha, ctx, cc)?
            .powi(4, p)
            .scale(&BigFloat::from_f64(0.5, p), p),
        7 => weber_f(&alpha, ctx, cc)?.scale(&sign.div(&sqrt2, p, r), p),
        2 | 6 => weber_f1(&alpha, ctx, cc)?
            .powi(2, p)
            .scale(&sign.div(&sqrt2, p, r), p),
        4 => {
            let two_sqrt2 = sqrt2.mul(&BigFloat::from_word(2, p), p, r);
            weber_f1(&alpha, ctx, cc)?
                .powi(2, p)
                .scale(&sign.div(&two_sqrt2, p, r), p)
        }
        other => return Err(SchertzError::UnsupportedResidue(other)),
    };
    Ok(base.powi(3, p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePolynomial {
    /// Constant term first; monic of degree `[G:H]`.
    pub coefficients: Vec<BigInt>,
    /// `max |c - round(c)|` over all coefficients, imaginary parts included.
    pub residual: f64,
    pub residual_log10: f64,
    pub level_k: u32,
    #[serde(rename = "M")]
    pub m_param: u64,
    pub discriminant: i64,
    pub group_order: u64,
    pub subgroup_order: u64,
    /// Decimal digits actually used after automatic escalation.
    pub digits: u32,
}

impl TracePolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// `disc(K)·9^k`, multiplied by 4 first when `disc(K)` is odd.
pub fn order_discriminant(field: &ImagQuadField, k: u32) -> i64 {
    let disc = field.disc();
    let base = if disc % 4 == 0 { disc } else { 4 * disc };
    base * 9i64.pow(k)
}

/// `24 · (prime-to-3 part of h(K))`.
pub fn default_m(field: &ImagQuadField) -> Result<u64, SchertzError> {
    let h = enumerate_reduced(&FormDiscriminant::from_i64(field.disc())?)?.h();
    let mut h3 = h;
    while h3 % 3 == 0 {
        h3 /= 3;
    }
    Ok(24 * h3)
}

pub fn default_digits(k: u32) -> u32 {
    if k <= 3 {
        300
    } else {
        2000
    }
}

/// The cosets of `H` in `G`, in order of first appearance in `forms`.
pub(crate) fn cosets(forms: &[QuadForm], h: &[QuadForm]) -> Vec<Vec<QuadForm>> {
    let mut seen: HashMap<&QuadForm, usize> = HashMap::new();
    let mut out: Vec<Vec<QuadForm>> = Vec::new();
    let index: HashMap<QuadForm, usize> = forms
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();
    for f in forms {
        if seen.contains_key(f) {
            continue;
        }
        let id = out.len();
        let coset: Vec<QuadForm> = h.iter().map(|g| f.mul(g)).collect();
        for g in &coset {
            seen.insert(&forms[index[g]], id);
        }
        out.push(coset);
    }
    out
}

struct Evaluated {
    values: Vec<Vec<Complex>>,
    bound_log2: f64,
}

fn log2_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}

fn evaluate_cosets(
    cos: &[Vec<QuadForm>],
    m: &BigInt,
    ctx: &PrecisionContext,
) -> Result<Evaluated, SchertzError> {
    let flat: Vec<(usize, &QuadForm)> = cos
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |f| (i, f)))
        .collect();
    let vals: Vec<(usize, Complex)> = flat
        .par_iter()
        .map_init(new_consts, |cc, &(i, f)| {
            let nf = normalize_form(f)?;
            Ok((i, schertz_invariant(&nf, m, ctx, cc)?))
        })
        .collect::<Result<_, SchertzError>>()?;
    let mut values: Vec<Vec<Complex>> = vec![Vec::new(); cos.len()];
    for (i, v) in vals {
        values[i].push(v);
    }
    let bound_log2 = values
        .iter()
        .map(|vs| {
            let s = vs
                .iter()
                .map(|v| v.log2_magnitude() + 0.5)
                .fold(f64::NEG_INFINITY, log2_sum);
            log2_sum(0.0, s)
        })
        .sum();
    Ok(Evaluated { values, bound_log2 })
}

fn check_cyclic_quotient(g: &[QuadForm], h_len: usize, m_param: u64) -> Result<u32, SchertzError> {
    let err = SchertzError::NonCyclicQuotient {
        group: g.len() as u64,
        subgroup: h_len as u64,
    };
    if h_len == 0 || !g.len().is_multiple_of(h_len) {
        return Err(err);
    }
    let mut index = (g.len() / h_len) as u64;
    let mut e = 0u32;
    while index.is_multiple_of(3) {
        index /= 3;
        e += 1;
    }
    if index != 1 {
        return Err(err);
    }
    if e == 0 {
        return Ok(0);
    }
    let top = 3u64.pow(e - 1) * m_param;
    if g.iter().any(|x| !x.pow(top).is_principal()) {
        Ok(e)
    } else {
        Err(err)
    }
}

/// The polynomial `∏_{aH ∈ G/H} (x - Σ_{h∈H} g(α_{ah}))` for the order of conductor `3^k`
/// (times 2 when `disc(K)` is odd). Precision is raised automatically until the
/// coefficient bound fits; `ctx.digits` is a floor.
pub fn layer_polynomial(
    field: &ImagQuadField,
    p: u64,
    k: u32,
    m_param: Option<u64>,
    ctx: &PrecisionContext,
) -> Result<TracePolynomial, SchertzError> {
    layer_polynomial_ordered(field, p, k, m_param, ctx, false)
}

pub(crate) fn layer_polynomial_ordered(
    field: &ImagQuadField,
    p: u64,
    k: u32,
    m_param: Option<u64>,
    ctx: &PrecisionContext,
    reverse_representatives: bool,
) -> Result<TracePolynomial, SchertzError> {
    if p != 3 {
        return Err(SchertzError::UnsupportedPrime(p));
    }
    let big_m = match m_param {
        Some(v) => v,
        None => default_m(field)?,
    };
    let disc = order_discriminant(field, k);
    let m = BigInt::from(-disc / 4);
    let group = enumerate_reduced(&FormDiscriminant::from_i64(disc)?)?;
    let mut forms = group.reduced_forms().to_vec();
    let h: Vec<QuadForm> = forms
        .iter()
        .filter(|f| f.pow(big_m).is_principal())
        .cloned()
        .collect();
    check_cyclic_quotient(&forms, h.len(), big_m)?;
    if reverse_representatives {
        forms.reverse();
    }
    let cos = cosets(&forms, &h);

    let mut work = *ctx;
    let mut ev = evaluate_cosets(&cos, &m, &work)?;
    let needed = (ev.bound_log2 / std::f64::consts::LOG2_10).ceil() as u32 + ctx.guard + 10;
    if needed > work.digits {
        work = work.raised_to(needed);
        ev = evaluate_cosets(&cos, &m, &work)?;
    }
    let bits = work.bits();

    let traces: Vec<Complex> = ev
        .values
        .iter()
        .map(|vs| {
            vs.iter()
                .fold(Complex::real(BigFloat::new(bits), bits), |acc, v| {
                    acc.add(v, bits)
                })
        })
        .collect();
    let mut coeffs = vec![Complex::one(bits)];
    for t in &traces {
        let mut next = vec![Complex::real(BigFloat::new(bits), bits); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c, bits);
            next[i] = next[i].sub(&c.mul(t, bits), bits);
        }
        coeffs = next;
    }

    let mut residual_log2 = f64::NEG_INFINITY;
    let mut ints = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        let (n, dist) = round_to_bigint(&c.re, bits).ok_or(SchertzError::RoundingFailure {
            residual_log10: f64::INFINITY,
            digits: work.digits,
            guard: work.guard,
        })?;
        residual_log2 = residual_log2.max(log2_abs(&dist)).max(log2_abs(&c.im));
        ints.push(n);
    }
    let residual_log10 = residual_log2 / std::f64::consts::LOG2_10;
    if !(residual_log10 < -(work.guard as f64)) {
        return Err(SchertzError::RoundingFailure {
            residual_log10,
            digits: work.digits,
            guard: work.guard,
        });
    }
    Ok(TracePolynomial {
        coefficients: ints,
        residual: residual_log2.exp2(),
        residual_log10,
        level_k: k,
        m_param: big_m,
        discriminant: disc,
        group_order: forms.len() as u64,
        subgroup_order: h.len() as u64,
        digits: work.digits,
    })
}

/// Traces `Σ_{h∈H} g(α_{ah})` as `f64` pairs, for comparing coset representative choices.
pub fn coset_traces_f64(
    field: &ImagQuadField,
    k: u32,
    m_param: u64,
    ctx: &PrecisionContext,
    reverse_representatives: bool,
) -> Result<Vec<(f64, f64)>, SchertzError> {
    let disc = order_discriminant(field, k);
    let m = BigInt::from(-disc / 4);
    let group = enumerate_reduced(&FormDiscriminant::from_i64(disc)?)?;
    let mut forms = group.reduced_forms().to_vec();
    let h: Vec<QuadForm> = forms
        .iter()
        .filter(|f| f.pow(m_param).is_principal())
        .cloned()
        .collect();
    if reverse_representatives {
        forms.reverse();
    }
    let ev = evaluate_cosets(&cosets(&forms, &h), &m, ctx)?;
    let bits = ctx.bits();
    Ok(ev
        .values
        .iter()
        .map(|vs| {
            vs.iter()
                .fold(Complex::real(BigFloat::new(bits), bits), |acc, v| {
                    acc.add(v, bits)
                })
                .to_f64_pair()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Compositum {
    /// Constant term first, degree twice the input degree.
    pub coefficients: Vec<BigInt>,
    /// The generator is `θ + s·√disc(K)`.
    pub shift: u32,
}

/// A defining polynomial for `K(θ)` with `θ` a root of `poly`:
/// `Res_y(P(y), (x - y)² - s²·disc(K))`, retrying `s = 2, 3, ...` while it is not squarefree.
pub fn compositum_polynomial(
    poly: &[BigInt],
    field: &ImagQuadField,
) -> Result<Compositum, SchertzError> {
    match irreducibility(poly, PATTERN_BOUND) {
        Irreducibility::Irreducible => {}
        other => return Err(SchertzError::NotIrreducible(other)),
    }
    let disc = BigInt::from(field.disc());
    for s in 1u32..=16 {
        let r = &disc * BigInt::from(s * s);
        let res = poly::norm_shift(poly, &r);
        if squarefree_fast(&res) {
            return Ok(Compositum {
                coefficients: res,
                shift: s,
            });
        }
    }
    Err(SchertzError::DegenerateResultant)
}

fn squarefree_fast(f: &[BigInt]) -> bool {
    let small_hit = crate::arith::primes_up_to(200)
        .into_iter()
        .any(|q| factor_pattern(f, q).is_some());
    small_hit || poly::is_squarefree(f)
}
