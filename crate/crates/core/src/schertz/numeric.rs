//! Complex arithmetic on `astro_float::BigFloat`, Dedekind eta and the Weber functions.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::SchertzError;

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;
/// Pentagonal terms allowed before giving up on a point too close to the real axis.
pub const MAX_ETA_TERMS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionContext {
    pub digits: u32,
    pub guard: u32,
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 50;
    pub const DEFAULT_GUARD: u32 = 10;

    pub fn new(digits: u32) -> Result<Self, SchertzError> {
        Self::with_guard(digits, Self::DEFAULT_GUARD)
    }

    pub fn with_guard(digits: u32, guard: u32) -> Result<Self, SchertzError> {
        if digits < Self::MIN_DIGITS {
            return Err(SchertzError::PrecisionTooLow(digits));
        }
        Ok(Self { digits, guard })
    }

    /// Working precision in bits, guard digits included.
    pub fn bits(&self) -> usize {
        digits_to_bits(self.digits + self.guard)
    }

    pub fn doubled(&self) -> Self {
        Self {
            digits: self.digits * 2,
            guard: self.guard,
        }
    }

    pub(crate) fn raised_to(&self, digits: u32) -> Self {
        Self {
            digits: self.digits.max(digits),
            guard: self.guard,
        }
    }
}

pub(crate) fn digits_to_bits(d: u32) -> usize {
    (d as f64 * LOG2_10).ceil() as usize + 64
}

pub fn new_consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

/// `log2 |x|`, or `-inf` for zero.
pub fn log2_abs(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        Some((m, _, _, e, _)) if !x.is_zero() => {
            let top = *m.last().expect("non-empty mantissa") as f64 / 2f64.powi(64);
            e as f64 + top.log2()
        }
        _ => f64::NEG_INFINITY,
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    let l = log2_abs(x);
    if l == f64::NEG_INFINITY {
        return 0.0;
    }
    let v = l.exp2();
    if x.is_negative() {
        -v
    } else {
        v
    }
}

pub fn from_bigint(n: &BigInt, p: usize) -> BigFloat {
    if let Some(v) = n.to_i128() {
        return BigFloat::from_i128(v, p);
    }
    let bits = n.bits() as usize;
    let words = bits.div_ceil(64);
    let m = (n.magnitude() << (words * 64 - bits)).to_u64_digits();
    let s = if n.sign() == num_bigint::Sign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    let mut f = BigFloat::from_words(&m, s, bits as i32);
    f.set_precision(p.max(words * 64), RM).expect("precision");
    f
}

fn words_to_biguint(m: &[u64]) -> BigUint {
    BigUint::new(
        m.iter()
            .flat_map(|&w| [w as u32, (w >> 32) as u32])
            .collect(),
    )
}

/// Nearest integer to `x`, together with `|x - round(x)|`.
pub fn round_to_bigint(x: &BigFloat, p: usize) -> Option<(BigInt, BigFloat)> {
    if x.is_nan() || x.is_inf() {
        return None;
    }
    let r = x.round(0, RM);
    let dist = x.sub(&r, p, RM).abs();
    if r.is_zero() {
        return Some((BigInt::zero(), dist));
    }
    let (m, _, s, e, _) = r.as_raw_parts()?;
    let mant = words_to_biguint(m);
    let shift = e as i64 - (m.len() * 64) as i64;
    let mag = if shift >= 0 {
        mant << shift as usize
    } else {
        mant >> (-shift) as usize
    };
    let v = BigInt::from(mag);
    Some((if s == Sign::Neg { -v } else { v }, dist))
}

#[derive(Clone, Debug)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigFloat, p: usize) -> Self {
        Self {
            re,
            im: BigFloat::new(p),
        }
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        Self::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p))
    }

    pub fn one(p: usize) -> Self {
        Self::real(BigFloat::from_word(1, p), p)
    }

    pub fn add(&self, o: &Self, p: usize) -> Self {
        Self::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn sub(&self, o: &Self, p: usize) -> Self {
        Self::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM))
    }

    pub fn mul(&self, o: &Self, p: usize) -> Self {
        let rr = self.re.mul(&o.re, p, RM);
        let ii = self.im.mul(&o.im, p, RM);
        let ri = self.re.mul(&o.im, p, RM);
        let ir = self.im.mul(&o.re, p, RM);
        Self::new(rr.sub(&ii, p, RM), ri.add(&ir, p, RM))
    }

    pub fn scale(&self, s: &BigFloat, p: usize) -> Self {
        Self::new(self.re.mul(s, p, RM), self.im.mul(s, p, RM))
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn div(&self, o: &Self, p: usize) -> Self {
        let n = o.norm_sqr(p);
        let conj = Self::new(o.re.clone(), o.im.neg());
        let t = self.mul(&conj, p);
        Self::new(t.re.div(&n, p, RM), t.im.div(&n, p, RM))
    }

    pub fn powi(&self, mut e: u32, p: usize) -> Self {
        let mut acc = Self::one(p);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, p);
            }
        }
        acc
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    /// `log2` of `max(|re|, |im|)`, within one bit of `log2 |z|`.
    pub fn log2_magnitude(&self) -> f64 {
        log2_abs(&self.re).max(log2_abs(&self.im))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (to_f64(&self.re), to_f64(&self.im))
    }

    pub fn with_precision(mut self, p: usize) -> Self {
        self.re.set_precision(p, RM).expect("precision");
        self.im.set_precision(p, RM).expect("precision");
        self
    }
}

/// `e^(i·2π·t)`.
fn cis_turns(t: &BigFloat, p: usize, cc: &mut Consts) -> Complex {
    let two_pi = cc.pi(p, RM).mul(&BigFloat::from_word(2, p), p, RM);
    let th = t.mul(&two_pi, p, RM);
    Complex::new(th.cos(p, RM, cc), th.sin(p, RM, cc))
}

/// `t mod n` in `[0, n)`.
fn frac_mod(t: &BigFloat, n: u64, p: usize) -> BigFloat {
    let nf = BigFloat::from_u64(n, p);
    let k = t.div(&nf, p, RM).floor();
    t.sub(&k.mul(&nf, p, RM), p, RM)
}

/// `η(z) = q^(1/24) Σ (-1)^k q^(k(3k-1)/2)`, `q = e^(2πiz)`.
pub fn eta(z: &Complex, ctx: &PrecisionContext, cc: &mut Consts) -> Result<Complex, SchertzError> {
    let y = to_f64(&z.im);
    if !(y > 0.0) {
        return Err(SchertzError::ImaginaryPartTooSmall(y));
    }
    let target_bits = ctx.bits() as f64;
    // |q|^e < 2^-bits for e beyond this
    let decay = 2.0 * std::f64::consts::PI * y / std::f64::consts::LN_2;
    let k_est = ((2.0 * target_bits / (3.0 * decay)).sqrt() + 2.0).ceil();
    let loss_digits =
        std::f64::consts::PI / (12.0 * y * std::f64::consts::LN_10) + k_est.log10() + 5.0;
    let work_bits = target_bits + loss_digits * LOG2_10;
    let k_max = ((2.0 * work_bits / (3.0 * decay)).sqrt() + 2.0).ceil();
    if !k_max.is_finite() || k_max as usize > MAX_ETA_TERMS {
        return Err(SchertzError::ImaginaryPartTooSmall(y));
    }
    let p = work_bits.ceil() as usize;

    let pi = cc.pi(p, RM);
    let two_pi = pi.mul(&BigFloat::from_word(2, p), p, RM);
    let im = z.im.clone().with_precision_of(p);
    let q_abs = im.mul(&two_pi, p, RM).neg().exp(p, RM, cc);
    let q = cis_turns(&frac_mod(&z.re, 1, p), p, cc).scale(&q_abs, p);

    let mut sum = Complex::one(p);
    let mut qk = Complex::one(p); // q^k
    let mut q_e1 = Complex::one(p); // q^(k(3k-1)/2)
    let mut step = q.clone(); // q^(3k+1)
    let q3 = q.powi(3, p);
    let mut k: u64 = 0;
    loop {
        k += 1;
        q_e1 = q_e1.mul(&step, p);
        step = step.mul(&q3, p);
        qk = qk.mul(&q, p);
        let q_e2 = q_e1.mul(&qk, p);
        let pair = q_e1.add(&q_e2, p);
        sum = if k % 2 == 1 {
            sum.sub(&pair, p)
        } else {
            sum.add(&pair, p)
        };
        let e1 = (k * (3 * k - 1) / 2) as f64;
        if e1 * decay > work_bits + 8.0 {
            break;
        }
        if k as usize > MAX_ETA_TERMS {
            return Err(SchertzError::ImaginaryPartTooSmall(y));
        }
    }

    let x24 = frac_mod(&z.re, 24, p).div(&BigFloat::from_word(24, p), p, RM);
    let pref_abs = im
        .mul(&two_pi, p, RM)
        .div(&BigFloat::from_word(24, p), p, RM)
        .neg()
        .exp(p, RM, cc);
    let pref = cis_turns(&x24, p, cc).scale(&pref_abs, p);
    Ok(pref.mul(&sum, p).with_precision(ctx.bits()))
}

trait WithPrecisionOf {
    fn with_precision_of(self, p: usize) -> Self;
}

impl WithPrecisionOf for BigFloat {
    fn with_precision_of(mut self, p: usize) -> Self {
        self.set_precision(p, RM).expect("precision");
        self
    }
}

/// `f(z) = e^(-πi/24) η((z+1)/2) / η(z)`.
pub fn weber_f(
    z: &Complex,
    ctx: &PrecisionContext,
    cc: &mut Consts,
) -> Result<Complex, SchertzError> {
    let p = ctx.bits();
    let half = BigFloat::from_f64(0.5, p);
    let shifted = Complex::new(
        z.re.add(&BigFloat::from_word(1, p), p, RM)
            .mul(&half, p, RM),
        z.im.mul(&half, p, RM),
    );
    let num = eta(&shifted, ctx, cc)?;
    let den = eta(z, ctx, cc)?;
    let rot = cis_turns(
        &BigFloat::from_i8(-1, p).div(&BigFloat::from_word(48, p), p, RM),
        p,
        cc,
    );
    Ok(rot.mul(&num.div(&den, p), p))
}

/// `f1(z) = η(z/2) / η(z)`.
pub fn weber_f1(
    z: &Complex,
    ctx: &PrecisionContext,
    cc: &mut Consts,
) -> Result<Complex, SchertzError> {
    let p = ctx.bits();
    let half = BigFloat::from_f64(0.5, p);
    let num = eta(&z.scale(&half, p), ctx, cc)?;
    let den = eta(z, ctx, cc)?;
    Ok(num.div(&den, p))
}

/// `√n` at `p` bits.
pub fn sqrt_u64(n: u64, p: usize) -> BigFloat {
    BigFloat::from_u64(n, p).sqrt(p, RM)
}

pub fn pi(p: usize, cc: &mut Consts) -> BigFloat {
    cc.pi(p, RM)
}

pub(crate) fn rm() -> RoundingMode {
    RM
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    fn close(a: &Complex, b: &Complex, p: usize, log2_tol: f64) -> bool {
        a.sub(b, p).log2_magnitude() < log2_tol
    }

    #[test]
    fn bigint_round_trip() {
        let p = 512;
        for s in [
            "0",
            "12345",
            "-98765",
            "340282366920938463463374607431768211457",
            "-7",
        ] {
            let n: BigInt = s.parse().unwrap();
            let f = from_bigint(&n, p);
            let (r, dist) = round_to_bigint(&f, p).unwrap();
            assert_eq!(r, n);
            assert!(dist.is_zero());
        }
        let big = BigInt::from(3).pow(200) + 1;
        let (r, _) = round_to_bigint(&from_bigint(&big, 1024), 1024).unwrap();
        assert_eq!(r, big);
        let x = BigFloat::from_f64(-2.75, p);
        let (r, dist) = round_to_bigint(&x, p).unwrap();
        assert_eq!(r, BigInt::from(-3));
        assert!((to_f64(&dist) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn precision_floor() {
        assert!(PrecisionContext::new(49).is_err());
        assert_eq!(ctx(50).doubled().digits, 100);
    }

    #[test]
    fn eta_at_i() {
        let c = ctx(60);
        let mut cc = new_consts();
        let v = eta(&Complex::from_f64(0.0, 1.0, c.bits()), &c, &mut cc).unwrap();
        let (re, im) = v.to_f64_pair();
        assert!((re - 0.768_225_422_326_056_7).abs() < 1e-15);
        assert!(im.abs() < 1e-50);
    }

    #[test]
    fn eta_rejects_lower_half_plane() {
        let c = ctx(50);
        let mut cc = new_consts();
        let z = Complex::from_f64(0.3, -1.0, c.bits());
        assert!(matches!(
            eta(&z, &c, &mut cc),
            Err(SchertzError::ImaginaryPartTooSmall(_))
        ));
        let z = Complex::from_f64(0.3, 1e-9, c.bits());
        assert!(matches!(
            eta(&z, &c, &mut cc),
            Err(SchertzError::ImaginaryPartTooSmall(_))
        ));
    }

    #[test]
    fn eta_translation() {
        let c = ctx(80);
        let p = c.bits();
        let mut cc = new_consts();
        let z = Complex::from_f64(0.37, 0.81, p);
        let z1 = z.add(&Complex::one(p), p);
        let lhs = eta(&z1, &c, &mut cc).unwrap();
        let rot = cis_turns(
            &BigFloat::from_word(1, p).div(&BigFloat::from_word(24, p), p, RM),
            p,
            &mut cc,
        );
        let rhs = rot.mul(&eta(&z, &c, &mut cc).unwrap(), p);
        assert!(close(&lhs, &rhs, p, -(80.0 * LOG2_10)));
    }

    #[test]
    fn weber_values_are_finite_and_nonzero() {
        let c = ctx(60);
        let p = c.bits();
        let mut cc = new_consts();
        let i = Complex::from_f64(0.0, 1.0, p);
        let f = weber_f(&i, &c, &mut cc).unwrap();
        let f1 = weber_f1(&i, &c, &mut cc).unwrap();
        for v in [&f, &f1] {
            let m = v.log2_magnitude();
            assert!(m.is_finite() && m > -10.0 && m < 10.0);
        }
        // f(i) = 2^(1/4)
        let (re, im) = f.to_f64_pair();
        assert!((re - 2f64.powf(0.25)).abs() < 1e-14 && im.abs() < 1e-14);
    }
}
