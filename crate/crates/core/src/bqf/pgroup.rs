use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("cannot parse group label {0:?}")]
    BadLabel(String),
    #[error("cyclic factor {factor} is not a power of {p}")]
    NotPrimePower { factor: u64, p: u64 },
}

/// A finite abelian p-group, stored as its exponent partition
/// `[e1 >= e2 >= ...]` for the product of cyclic groups `Z/p^ei`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbelianPGroup {
    p: u64,
    exponents: Vec<u32>,
}

impl AbelianPGroup {
    /// Builds the group from exponents in any order; zero exponents are dropped.
    pub fn new(p: u64, mut exponents: Vec<u32>) -> Result<Self, GroupError> {
        if p == 2 || !is_prime(p) {
            return Err(GroupError::NotOddPrime(p));
        }
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { p, exponents })
    }

    pub fn trivial(p: u64) -> Result<Self, GroupError> {
        Self::new(p, Vec::new())
    }

    pub fn cyclic(p: u64, e: u32) -> Result<Self, GroupError> {
        Self::new(p, vec![e])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// `log_p` of the order.
    pub fn log_order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn order(&self) -> BigUint {
        let mut n = BigUint::one();
        for &e in &self.exponents {
            n *= BigUint::from(self.p).pow(e);
        }
        n
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.exponents.len() <= 1
    }

    pub fn is_elementary(&self) -> bool {
        self.exponents.iter().all(|&e| e == 1)
    }

    /// Exponents joined by dashes, e.g. `2-1` for `Z/9 x Z/3`. Empty for the trivial group.
    pub fn dash_label(&self) -> String {
        self.exponents
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn from_dash_label(p: u64, label: &str) -> Result<Self, GroupError> {
        if label.trim().is_empty() {
            return Self::trivial(p);
        }
        let exps = label
            .split('-')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| GroupError::BadLabel(label.to_string()))?;
        Self::new(p, exps)
    }

    /// Parses labels such as `27×9`, `3x3` or `1`.
    pub fn parse_factors(p: u64, label: &str) -> Result<Self, GroupError> {
        let label = label.trim();
        if label == "1" {
            return Self::trivial(p);
        }
        let mut exps = Vec::new();
        for part in label.split(['×', 'x', '*']) {
            let mut n: u64 = part
                .trim()
                .parse()
                .map_err(|_| GroupError::BadLabel(label.to_string()))?;
            let mut e = 0;
            while n > 1 && n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if n != 1 || e == 0 {
                return Err(GroupError::NotPrimePower {
                    factor: part.trim().parse().unwrap_or(0),
                    p,
                });
            }
            exps.push(e);
        }
        Self::new(p, exps)
    }
}

impl fmt::Display for AbelianPGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|&e| self.p.pow(e).to_string())
            .collect();
        write!(f, "{}", parts.join("×"))
    }
}

impl FromStr for AbelianPGroup {
    type Err = GroupError;

    /// Accepts `p:label`, e.g. `3:9×3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, rest) = s
            .split_once(':')
            .ok_or_else(|| GroupError::BadLabel(s.to_string()))?;
        let p = p
            .trim()
            .parse()
            .map_err(|_| GroupError::BadLabel(s.to_string()))?;
        Self::parse_factors(p, rest)
    }
}
