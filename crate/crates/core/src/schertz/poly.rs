//! Integer polynomials (constant term first) and their factorization patterns modulo small primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{inv_mod, primes_up_to};

pub type IntPoly = Vec<BigInt>;

pub fn trim(mut f: IntPoly) -> IntPoly {
    while f.len() > 1 && f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    f
}

pub fn degree(f: &[BigInt]) -> usize {
    trim(f.to_vec()).len().saturating_sub(1)
}

pub fn from_i64(c: &[i64]) -> IntPoly {
    c.iter().map(|&v| BigInt::from(v)).collect()
}

pub fn add(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    let n = f.len().max(g.len());
    let z = BigInt::zero();
    trim(
        (0..n)
            .map(|i| f.get(i).unwrap_or(&z) + g.get(i).unwrap_or(&z))
            .collect(),
    )
}

pub fn scale(f: &[BigInt], s: &BigInt) -> IntPoly {
    trim(f.iter().map(|c| c * s).collect())
}

pub fn mul(f: &[BigInt], g: &[BigInt]) -> IntPoly {
    if f.is_empty() || g.is_empty() {
        return vec![BigInt::zero()];
    }
    let mut out = vec![BigInt::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    trim(out)
}

pub fn derivative(f: &[BigInt]) -> IntPoly {
    if f.len() <= 1 {
        return vec![BigInt::zero()];
    }
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect(),
    )
}

/// `f(x + w)` and `f(x - w)` multiplied, with `w² = r`: the norm of `f(x + w)` down to `Z[x]`.
pub fn norm_shift(f: &[BigInt], r: &BigInt) -> IntPoly {
    // (A + wB)(x + w) = (xA + rB) + w(A + xB)
    let mut a: IntPoly = vec![BigInt::zero()];
    let mut b: IntPoly = vec![BigInt::zero()];
    for c in f.iter().rev() {
        let xa = shift_up(&a);
        let xb = shift_up(&b);
        let na = add(&add(&xa, &scale(&b, r)), std::slice::from_ref(c));
        let nb = add(&a, &xb);
        a = na;
        b = nb;
    }
    let a2 = mul(&a, &a);
    let b2 = mul(&b, &b);
    add(&a2, &scale(&b2, &-r))
}

fn shift_up(f: &[BigInt]) -> IntPoly {
    let mut out = vec![BigInt::zero()];
    out.extend_from_slice(f);
    trim(out)
}

fn rat_trim(mut f: Vec<BigRational>) -> Vec<BigRational> {
    while f.len() > 1 && f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    f
}

/// Degree of `gcd(f, g)` over the rationals.
pub fn gcd_degree(f: &[BigInt], g: &[BigInt]) -> usize {
    let to_q = |p: &[BigInt]| rat_trim(p.iter().cloned().map(BigRational::from_integer).collect());
    let (mut a, mut b) = (to_q(f), to_q(g));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !(b.len() == 1 && b[0].is_zero()) {
        // a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() && !(a.len() == 1 && a[0].is_zero()) {
            let k = a.len() - b.len();
            let coef = a.last().unwrap() / &lb;
            for (i, c) in b.iter().enumerate() {
                a[i + k] -= &coef * c;
            }
            a.pop();
            a = rat_trim(if a.is_empty() {
                vec![BigRational::zero()]
            } else {
                a
            });
        }
        std::mem::swap(&mut a, &mut b);
        // content reduction keeps coefficient growth in check
        let lead = a.last().unwrap().clone();
        if !lead.is_zero() {
            a.iter_mut().for_each(|c| *c /= &lead);
        }
    }
    a.len() - 1
}

pub fn is_squarefree(f: &[BigInt]) -> bool {
    gcd_degree(f, &derivative(f)) == 0
}

fn reduce_mod(f: &[BigInt], q: u64) -> Vec<u64> {
    let qb = BigInt::from(q);
    let mut out: Vec<u64> = f
        .iter()
        .map(|c| c.mod_floor(&qb).to_u64().unwrap())
        .collect();
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    out
}

fn mtrim(f: &mut Vec<u64>) {
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
}

fn mis_zero(f: &[u64]) -> bool {
    f.iter().all(|&c| c == 0)
}

fn mrem(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
    let mut a = f.to_vec();
    let lg_inv = inv_mod(*g.last().unwrap() as i128, q as i128).unwrap() as u64;
    while a.len() >= g.len() && !mis_zero(&a) {
        let k = a.len() - g.len();
        let coef = a.last().unwrap() * lg_inv % q;
        for (i, &c) in g.iter().enumerate() {
            a[i + k] = (a[i + k] + q - coef * c % q) % q;
        }
        a.pop();
        if a.is_empty() {
            a.push(0);
        }
        mtrim(&mut a);
    }
    a
}

fn mmul(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + a * b) % q;
        }
    }
    mtrim(&mut out);
    out
}

fn mgcd(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
    let (mut a, mut b) = (f.to_vec(), g.to_vec());
    while !mis_zero(&b) {
        let r = mrem(&a, &b, q);
        a = b;
        b = r;
    }
    let inv = inv_mod(*a.last().unwrap() as i128, q as i128).unwrap() as u64;
    a.iter().map(|&c| c * inv % q).collect()
}

fn mdiv(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
    let mut a = f.to_vec();
    let lg_inv = inv_mod(*g.last().unwrap() as i128, q as i128).unwrap() as u64;
    let mut quot = vec![0u64; f.len().saturating_sub(g.len()) + 1];
    while a.len() >= g.len() && !mis_zero(&a) {
        let k = a.len() - g.len();
        let coef = a.last().unwrap() * lg_inv % q;
        quot[k] = coef;
        for (i, &c) in g.iter().enumerate() {
            a[i + k] = (a[i + k] + q - coef * c % q) % q;
        }
        a.pop();
        if a.is_empty() {
            a.push(0);
        }
    }
    mtrim(&mut quot);
    quot
}

/// `base^e mod f`.
fn mpow(base: &[u64], mut e: u64, f: &[u64], q: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = mrem(base, f, q);
    while e > 0 {
        if e & 1 == 1 {
            acc = mrem(&mmul(&acc, &base, q), f, q);
        }
        e >>= 1;
        if e > 0 {
            base = mrem(&mmul(&base, &base, q), f, q);
        }
    }
    acc
}

/// Degrees of the irreducible factors of `f` mod `q`, sorted. `None` when `q`
/// divides the leading coefficient or `f` is not squarefree mod `q`.
pub fn factor_pattern(f: &[BigInt], q: u64) -> Option<Vec<usize>> {
    let f = trim(f.to_vec());
    let fm = reduce_mod(&f, q);
    if fm.len() != f.len() {
        return None;
    }
    let n = fm.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let mut dfm: Vec<u64> = fm
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| (i as u64 % q) * c % q)
        .collect();
    mtrim(&mut dfm);
    if mis_zero(&dfm) || mgcd(&fm, &dfm, q).len() > 1 {
        return None;
    }
    let mut pattern = Vec::new();
    let mut rest = fm;
    let mut h = mpow(&[0, 1], q, &rest, q);
    let mut d = 1usize;
    while rest.len() > 1 {
        if 2 * d > rest.len() - 1 {
            pattern.push(rest.len() - 1);
            break;
        }
        let mut diff = h.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + q - 1) % q;
        mtrim(&mut diff);
        let g = mgcd(&rest, &diff, q);
        let gd = g.len() - 1;
        if gd > 0 {
            pattern.extend(std::iter::repeat_n(d, gd / d));
            rest = mdiv(&rest, &g, q);
            h = mrem(&h, &rest, q);
        }
        d += 1;
        if rest.len() > 1 {
            h = mpow(&h, q, &rest, q);
        }
    }
    pattern.sort_unstable();
    Some(pattern)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Reducible,
    Undetermined,
}

/// Irreducibility over the rationals from factor degrees modulo primes below `bound`:
/// a factor over Q of degree `k` forces a sub-multiset of degree sum `k` in every pattern.
pub fn irreducibility(f: &[BigInt], bound: u64) -> Irreducibility {
    let f = trim(f.to_vec());
    let n = f.len() - 1;
    if n <= 1 {
        return Irreducibility::Irreducible;
    }
    if f[0].is_zero() {
        return Irreducibility::Reducible;
    }
    if !is_squarefree(&f) || has_small_integer_root(&f) {
        return Irreducibility::Reducible;
    }
    let mut possible = vec![true; n + 1];
    for q in primes_up_to(bound) {
        let Some(pat) = factor_pattern(&f, q) else {
            continue;
        };
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for &d in &pat {
            for s in (d..=n).rev() {
                if sums[s - d] {
                    sums[s] = true;
                }
            }
        }
        for k in 0..=n {
            possible[k] &= sums[k];
        }
        if (1..n).all(|k| !possible[k]) {
            return Irreducibility::Irreducible;
        }
    }
    Irreducibility::Undetermined
}

fn eval(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Integer roots of absolute value at most 1000.
fn has_small_integer_root(f: &[BigInt]) -> bool {
    (1..=1000i64).any(|r| {
        let rb = BigInt::from(r);
        (&f[0] % &rb).is_zero() && (eval(f, &rb).is_zero() || eval(f, &-rb).is_zero())
    })
}

/// True when `f` and `g` have identical factor patterns modulo every prime below
/// `bound` at which both are squarefree with unit leading coefficient.
pub fn same_patterns(f: &[BigInt], g: &[BigInt], bound: u64) -> (bool, usize) {
    let mut compared = 0;
    for q in primes_up_to(bound) {
        if let (Some(a), Some(b)) = (factor_pattern(f, q), factor_pattern(g, q)) {
            compared += 1;
            if a != b {
                return (false, compared);
            }
        }
    }
    (true, compared)
}

/// Content-free monic test helper: true when `f` is monic.
pub fn is_monic(f: &[BigInt]) -> bool {
    trim(f.to_vec()).last().is_some_and(One::is_one)
}

pub fn max_abs_bits(f: &[BigInt]) -> u64 {
    f.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_pattern(f: &[i64], q: u64) -> Vec<usize> {
        // count roots of each degree via point counts over F_q is awkward; use
        // exhaustive search over monic polynomials up to degree 2 and deflate.
        let mut g: Vec<u64> = f.iter().map(|&c| c.rem_euclid(q as i64) as u64).collect();
        mtrim(&mut g);
        let mut out = Vec::new();
        for d in 1..=2usize {
            let mut coeffs = vec![0u64; d];
            loop {
                let mut cand = coeffs.clone();
                cand.push(1);
                let irreducible =
                    d == 1 || (0..q).all(|x| (cand[0] + cand[1] * x + x * x) % q != 0);
                if irreducible {
                    while g.len() > d && mis_zero(&mrem(&g, &cand, q)) {
                        g = mdiv(&g, &cand, q);
                        out.push(d);
                    }
                }
                let mut i = 0;
                loop {
                    if i == d {
                        break;
                    }
                    coeffs[i] += 1;
                    if coeffs[i] < q {
                        break;
                    }
                    coeffs[i] = 0;
                    i += 1;
                }
                if i == d {
                    break;
                }
            }
        }
        if g.len() > 1 {
            out.push(g.len() - 1);
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn patterns_match_exhaustive_deflation() {
        let polys: [&[i64]; 4] = [
            &[-40, 42, 0, 1],
            &[1, 1, 0, 0, 1],
            &[-2, 0, 0, 1],
            &[6, -5, 1],
        ];
        for f in polys {
            let fb = from_i64(f);
            for q in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
                if let Some(p) = factor_pattern(&fb, q) {
                    if p.iter().all(|&d| d <= 2) || f.len() <= 4 {
                        assert_eq!(p, brute_pattern(f, q), "{f:?} mod {q}");
                    }
                    assert_eq!(p.iter().sum::<usize>(), f.len() - 1);
                }
            }
        }
    }

    #[test]
    fn irreducibility_examples() {
        assert_eq!(
            irreducibility(&from_i64(&[-40, 42, 0, 1]), 1000),
            Irreducibility::Irreducible
        );
        assert_eq!(
            irreducibility(&from_i64(&[6, -5, 1]), 1000),
            Irreducibility::Reducible
        );
        // x^4 + 1 is reducible mod every prime but irreducible over Q
        assert_eq!(
            irreducibility(&from_i64(&[1, 0, 0, 0, 1]), 1000),
            Irreducibility::Undetermined
        );
        // (x^2 + 1)(x^2 + 2)
        assert_ne!(
            irreducibility(&from_i64(&[2, 0, 3, 0, 1]), 1000),
            Irreducibility::Irreducible
        );
    }

    #[test]
    fn norm_shift_examples() {
        // P = x, w² = -1048 gives x² + 1048
        assert_eq!(
            norm_shift(&from_i64(&[0, 1]), &BigInt::from(-1048)),
            from_i64(&[1048, 0, 1])
        );
        // P = x - 1, w² = -3: (x - 1)² + 3
        assert_eq!(
            norm_shift(&from_i64(&[-1, 1]), &BigInt::from(-3)),
            from_i64(&[4, -2, 1])
        );
    }

    #[test]
    fn squarefree_and_gcd() {
        let f = mul(&from_i64(&[-1, 1]), &from_i64(&[-1, 1]));
        assert!(!is_squarefree(&f));
        assert!(is_squarefree(&from_i64(&[-40, 42, 0, 1])));
        assert_eq!(gcd_degree(&from_i64(&[2, 3, 1]), &from_i64(&[3, 4, 1])), 1);
    }
}
