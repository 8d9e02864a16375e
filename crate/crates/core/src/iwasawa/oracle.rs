//! Exhaustive checks on the affine group
//! `{[[a, b], [0, 1]] : a ∈ 1 + p^u Z/p^(u+1), b ∈ Z/p^(u+1)}`.

use serde::Serialize;

use super::IwasawaError;
use crate::arith::{inv_mod, is_prime};

pub const MAX_ORACLE_ORDER: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Elem {
    a: u64,
    b: u64,
}

struct AffineGroup {
    n: u64,
    elems: Vec<Elem>,
}

impl AffineGroup {
    fn new(p: u64, u: u32) -> Self {
        let pu = p.pow(u);
        let n = pu * p;
        let mut elems = Vec::new();
        for k in 0..p {
            for b in 0..n {
                elems.push(Elem {
                    a: (1 + k * pu) % n,
                    b,
                });
            }
        }
        Self { n, elems }
    }

    fn mul(&self, x: Elem, y: Elem) -> Elem {
        Elem {
            a: x.a * y.a % self.n,
            b: (x.a * y.b + x.b) % self.n,
        }
    }

    fn pow(&self, x: Elem, mut e: u64) -> Elem {
        let mut acc = Elem { a: 1, b: 0 };
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn inv(&self, x: Elem) -> Elem {
        let ai = inv_mod(x.a as i128, self.n as i128).unwrap() as u64;
        Elem {
            a: ai,
            b: (self.n - ai * x.b % self.n) % self.n,
        }
    }

    fn index(&self, x: Elem) -> usize {
        // a = 1 + k p^u
        let pu = self.n / (self.elems.len() as u64 / self.n);
        let k = ((x.a + self.n - 1) % self.n) / pu;
        (k * self.n + x.b) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub p: u64,
    pub u: u32,
    pub order: u64,
    /// `M^p = [[1, pb], [0, 1]]` for every element.
    pub power_identity: bool,
    pub automorphisms: u64,
    /// Automorphisms sending `diag(a, 1)` to `[[1/a, *], [0, 1]]`.
    pub inverting_automorphisms: u64,
    pub non_abelian: bool,
    pub exponent: u64,
    pub center_order: u64,
}

impl OracleVerdict {
    pub fn verified(&self) -> bool {
        self.power_identity && self.inverting_automorphisms == 0 && self.automorphisms > 0
    }
}

/// Builds the group of order `p^(u+2)` and checks both statements by brute force.
pub fn matrix_group_oracle(p: u64, u: u32) -> Result<OracleVerdict, IwasawaError> {
    if p == 2 || !is_prime(p) {
        return Err(IwasawaError::NotOddPrime(p));
    }
    if u == 0 {
        return Err(IwasawaError::OracleRange { p, u });
    }
    let order = p
        .checked_pow(u + 2)
        .filter(|&o| o <= MAX_ORACLE_ORDER)
        .ok_or(IwasawaError::OracleRange { p, u })?;
    let g = AffineGroup::new(p, u);
    let n = g.n;
    let pu = n / p;

    let power_identity = g.elems.iter().all(|&x| {
        let y = g.pow(x, p);
        y.a == 1 && y.b == p * x.b % n
    });

    let non_abelian = g
        .elems
        .iter()
        .any(|&x| g.elems.iter().any(|&y| g.mul(x, y) != g.mul(y, x)));
    let center_order = g
        .elems
        .iter()
        .filter(|&&x| g.elems.iter().all(|&y| g.mul(x, y) == g.mul(y, x)))
        .count() as u64;
    let exponent = g
        .elems
        .iter()
        .map(|&x| {
            let mut k = 1;
            while g.pow(x, k) != (Elem { a: 1, b: 0 }) {
                k *= p;
            }
            k
        })
        .max()
        .unwrap_or(1);

    // Generators P = diag(1 + p^u, 1), T = [[1, 1], [0, 1]] with
    // P^p = T^n = 1 and P T P^-1 = T^(1 + p^u). Every element is T^j P^i.
    let big_p = Elem {
        a: (1 + pu) % n,
        b: 0,
    };
    let target_a = inv_mod(big_p.a as i128, n as i128).unwrap() as u64;
    let one = Elem { a: 1, b: 0 };
    let mut automorphisms = 0u64;
    let mut inverting = 0u64;
    let mut seen = vec![false; g.elems.len()];
    for &x in &g.elems {
        if g.pow(x, p) != one {
            continue;
        }
        let x_inv = g.inv(x);
        for &y in &g.elems {
            if g.pow(y, n) != one {
                continue;
            }
            if g.mul(g.mul(x, y), x_inv) != g.pow(y, 1 + pu) {
                continue;
            }
            seen.iter_mut().for_each(|s| *s = false);
            let mut injective = true;
            let mut xi = one;
            'outer: for _ in 0..p {
                let mut yj = one;
                for _ in 0..n {
                    let idx = g.index(g.mul(yj, xi));
                    if seen[idx] {
                        injective = false;
                        break 'outer;
                    }
                    seen[idx] = true;
                    yj = g.mul(yj, y);
                }
                xi = g.mul(xi, x);
            }
            if injective {
                automorphisms += 1;
                if x.a == target_a {
                    inverting += 1;
                }
            }
        }
    }

    Ok(OracleVerdict {
        p,
        u,
        order,
        power_identity,
        automorphisms,
        inverting_automorphisms: inverting,
        non_abelian,
        exponent,
        center_order,
    })
}
