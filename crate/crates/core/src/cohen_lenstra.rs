//! Counting functions on finite abelian p-groups and the heuristic
//! distributions built from them.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bqf::AbelianPGroup;

fn big_pow(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// Order of the automorphism group.
pub fn aut_order(g: &AbelianPGroup) -> BigUint {
    let p = g.p();
    let mut e: Vec<u32> = g.exponents().to_vec();
    e.reverse();
    let n = e.len();
    let mut out = BigUint::one();
    for k in 0..n {
        // 1-based positions of the first and last part equal to e[k]
        let d_k = e.iter().rposition(|&x| x == e[k]).unwrap() + 1;
        let c_k = e.iter().position(|&x| x == e[k]).unwrap() + 1;
        out *= big_pow(p, d_k as u32) - big_pow(p, k as u32);
        out *= big_pow(p, e[k]).pow((n - d_k) as u32);
        out *= big_pow(p, e[k] - 1).pow((n - c_k + 1) as u32);
    }
    out
}

/// `#{x in G : x^(p^n) = 1}`.
fn torsion_count(g: &AbelianPGroup, n: u32) -> BigUint {
    g.exponents()
        .iter()
        .map(|&e| big_pow(g.p(), e.min(n)))
        .product()
}

/// Number of elements of order exactly `p^n`.
pub fn count_exact_order(g: &AbelianPGroup, n: u32) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    torsion_count(g, n) - torsion_count(g, n - 1)
}

/// Number of surjections `G -> Z/p^n`: all homomorphisms minus those
/// landing in the unique maximal subgroup `pZ/p^n`.
pub fn surjection_count(g: &AbelianPGroup, n: u32) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let hom = |m: u32| -> BigUint {
        let mut acc = BigUint::one();
        for &e in g.exponents() {
            acc *= big_pow(g.p(), e.min(m));
        }
        acc
    };
    hom(n) - hom(n - 1)
}

/// Probability of each intersection level `n`, for a fixed group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicDistribution {
    group: AbelianPGroup,
    probs: BTreeMap<u32, BigRational>,
}

impl HeuristicDistribution {
    pub fn group(&self) -> &AbelianPGroup {
        &self.group
    }

    pub fn probs(&self) -> &BTreeMap<u32, BigRational> {
        &self.probs
    }

    pub fn prob(&self, n: u32) -> BigRational {
        self.probs
            .get(&n)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn to_f64(&self) -> BTreeMap<u32, f64> {
        self.probs
            .iter()
            .map(|(&n, q)| (n, q.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }
}

impl Serialize for HeuristicDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            n: u32,
            exact: String,
            value: f64,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            group: String,
            exponents: &'a [u32],
            probs: Vec<Row>,
        }
        let probs = self
            .probs
            .iter()
            .map(|(&n, q)| Row {
                n,
                exact: q.to_string(),
                value: q.to_f64().unwrap_or(f64::NAN),
            })
            .collect();
        Out {
            group: self.group.to_string(),
            exponents: self.group.exponents(),
            probs,
        }
        .serialize(s)
    }
}

/// `n -> #{elements of order exactly p^n} / #G`.
pub fn intersection_distribution(g: &AbelianPGroup) -> HeuristicDistribution {
    let order = BigInt::from(g.order());
    let top = g.exponents().first().copied().unwrap_or(0);
    let probs = (0..=top)
        .map(|n| {
            let c = BigInt::from(count_exact_order(g, n));
            (n, BigRational::new(c, order.clone()))
        })
        .collect();
    HeuristicDistribution {
        group: g.clone(),
        probs,
    }
}

/// Partitions of `k` into non-increasing positive parts.
pub fn partitions(k: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, k, &mut Vec::new(), &mut out);
    out
}

/// Largest `k` accepted by [`w_weight`].
pub const MAX_WEIGHT_K: u32 = 64;

/// `sum over groups of order p^k of 1/#Aut`.
pub fn w_weight(p: u64, k: u32) -> BigRational {
    assert!(
        k <= MAX_WEIGHT_K,
        "w_weight is capped at k = {MAX_WEIGHT_K}"
    );
    let mut acc = BigRational::zero();
    for part in partitions(k) {
        let g = AbelianPGroup::new(p, part).expect("odd prime");
        acc += BigRational::new(BigInt::one(), BigInt::from(aut_order(&g)));
    }
    acc
}

pub const DEFAULT_TERMS: u32 = 64;

/// `1 - 1/p`.
pub fn prob_disjoint(p: u64) -> BigRational {
    BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p))
}

/// `prod_{j=1..terms} (1 - p^-j)`.
pub fn euler_product(p: u64, terms: u32) -> f64 {
    let x = 1.0 / p as f64;
    let mut acc = 1.0;
    let mut pw = 1.0;
    for _ in 0..terms {
        pw *= x;
        acc *= 1.0 - pw;
    }
    acc
}

/// `1/(p-1) * prod_{j>=1} (1 - p^-j)`, truncated after `terms` factors.
pub fn prob_contained(p: u64, terms: u32) -> f64 {
    euler_product(p, terms) / (p as f64 - 1.0)
}

/// `prob_disjoint(p) + prob_contained(p)`.
pub fn invariants_lower_bound(p: u64, terms: u32) -> f64 {
    prob_disjoint(p).to_f64().unwrap() + prob_contained(p, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: u64, e: &[u32]) -> AbelianPGroup {
        AbelianPGroup::new(p, e.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(aut_order(&g(3, &[1])), 2u32.into());
        assert_eq!(aut_order(&g(3, &[2])), 6u32.into());
        assert_eq!(aut_order(&g(3, &[1, 1])), 48u32.into());
        assert_eq!(aut_order(&g(3, &[])), 1u32.into());
        // GL_3(F_5)
        assert_eq!(aut_order(&g(5, &[1, 1, 1])), (124u32 * 120 * 100).into());
    }

    #[test]
    fn exact_order_examples() {
        assert_eq!(count_exact_order(&g(3, &[2]), 2), 6u32.into());
        assert_eq!(count_exact_order(&g(3, &[3, 2]), 2), 72u32.into());
        assert_eq!(count_exact_order(&g(3, &[]), 0), 1u32.into());
        assert_eq!(count_exact_order(&g(3, &[1]), 2), 0u32.into());
        assert_eq!(surjection_count(&g(3, &[1, 1]), 1), 8u32.into());
        assert_eq!(surjection_count(&g(5, &[3]), 3), 100u32.into());
        assert_eq!(surjection_count(&g(5, &[3, 1]), 0), 1u32.into());
    }

    #[test]
    fn distributions() {
        let d = intersection_distribution(&g(3, &[2]));
        assert_eq!(d.prob(0), q(1, 9));
        assert_eq!(d.prob(1), q(2, 9));
        assert_eq!(d.prob(2), q(2, 3));
        let d = intersection_distribution(&g(3, &[2, 2]));
        assert_eq!(d.prob(2), q(8, 9));
        assert_eq!(d.prob(1), q(8, 81));
        assert_eq!(d.prob(0), q(1, 81));
        let d = intersection_distribution(&g(3, &[]));
        assert_eq!(d.probs().len(), 1);
        assert_eq!(d.prob(0), q(1, 1));
    }

    #[test]
    fn weights() {
        assert_eq!(w_weight(3, 0), q(1, 1));
        assert_eq!(w_weight(3, 1), q(1, 2));
        assert_eq!(w_weight(3, 2), q(3, 16));
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(0), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn closed_form_probabilities() {
        assert_eq!(prob_disjoint(3), q(2, 3));
        let b3 = invariants_lower_bound(3, DEFAULT_TERMS);
        assert!((0.9467..=0.9468).contains(&b3), "{b3}");
        assert!(invariants_lower_bound(5, DEFAULT_TERMS) >= 0.99);
        let a = prob_contained(3, 10);
        let b = prob_contained(3, 64);
        assert!((a - b).abs() < 3f64.powi(-10));
    }
}
