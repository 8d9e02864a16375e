//! Sweeps over congruence families of discriminant labels, tabulating how
//! far the p-Hilbert class field reaches into the anti-cyclotomic tower.

mod checkpoint;
mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{Checkpoint, RunStatus, SurveyRunner};
pub use report::{compare_expected, tabulate, Deviation, GroupRow, SurveyReport, Tally};

use crate::arith::valuation;
use crate::bqf::{sylow_structure, AbelianPGroup, DivisorSieve};
use crate::brink::{intersection_depth_with, BrinkError, BrinkOptions, DEFAULT_ELL_BOUND};
use crate::quadfield::{splitting_type, to_fundamental, SplittingType};

/// Largest sieve table built for a sweep; beyond it class numbers come from the direct scan.
pub const MAX_SIEVE_LIMIT: u64 = 50_000_000;
pub const DEFAULT_BLOCK_SIZE: u64 = 2_000;

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("cannot parse family {0:?}; expected a*k+b, e.g. 9k+3 or 3k-1")]
    BadFamily(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("checkpoint does not match this run: {0}")]
    CheckpointMismatch(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Discriminant labels `a·k + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Family {
    pub a: u64,
    pub b: i64,
}

impl Family {
    pub fn new(a: u64, b: i64) -> Result<Self, SurveyError> {
        if a == 0 {
            return Err(SurveyError::BadFamily(format!("{a}k{b:+}")));
        }
        Ok(Self { a, b })
    }

    pub fn label(&self, k: u64) -> Option<u64> {
        let v = self.a as i128 * k as i128 + self.b as i128;
        (v > 0).then_some(v as u64)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.b {
            0 => write!(f, "{}k", self.a),
            b if b > 0 => write!(f, "{}k+{}", self.a, b),
            b => write!(f, "{}k-{}", self.a, -b),
        }
    }
}

impl FromStr for Family {
    type Err = SurveyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SurveyError::BadFamily(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rest) = t.split_once('k').ok_or_else(bad)?;
        let lhs = lhs.trim_end_matches('*');
        let a: u64 = if lhs.is_empty() {
            1
        } else {
            lhs.parse().map_err(|_| bad())?
        };
        let b: i64 = if rest.is_empty() {
            0
        } else {
            let (sign, digits) = rest.split_at(1);
            let v: i64 = digits.parse().map_err(|_| bad())?;
            match sign {
                "+" => v,
                "-" => -v,
                _ => return Err(bad()),
            }
        };
        Family::new(a, b).map_err(|_| bad())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub d_label: u64,
    pub d: u64,
    pub p: u64,
    pub splitting: SplittingType,
    pub h: u64,
    pub theta: u32,
    #[serde(rename = "A0")]
    pub a0: AbelianPGroup,
    pub nu: u32,
    pub low_confidence: bool,
}

impl SurveyRecord {
    pub fn csv_row(&self) -> [String; 9] {
        [
            self.d_label.to_string(),
            self.d.to_string(),
            self.p.to_string(),
            format!("{:?}", self.splitting).to_lowercase(),
            self.h.to_string(),
            self.theta.to_string(),
            self.a0.dash_label(),
            self.nu.to_string(),
            self.low_confidence.to_string(),
        ]
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "d_label",
    "d",
    "p",
    "splitting",
    "h",
    "theta",
    "A0",
    "nu",
    "low_confidence",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Family,
    pub k_start: u64,
    /// Inclusive.
    pub k_end: u64,
    pub p: u64,
    pub ell_bound: u64,
    pub block_size: u64,
}

impl SweepConfig {
    pub fn new(family: Family, k_start: u64, k_end: u64, p: u64) -> Self {
        Self {
            family,
            k_start,
            k_end,
            p,
            ell_bound: DEFAULT_ELL_BOUND,
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }

    fn max_label(&self) -> u64 {
        if self.k_end < self.k_start {
            return 0;
        }
        self.family.label(self.k_end).unwrap_or(0)
    }
}

/// Per-field computation shared by every sweep.
pub struct FieldSurveyor {
    p: u64,
    opts: BrinkOptions,
    sieve: DivisorSieve,
}

impl FieldSurveyor {
    pub fn new(p: u64, ell_bound: u64, max_label: u64) -> Result<Self, SurveyError> {
        if p == 2 || !crate::arith::is_prime(p) {
            return Err(SurveyError::NotOddPrime(p));
        }
        Ok(Self {
            p,
            opts: BrinkOptions::fast(ell_bound),
            sieve: DivisorSieve::for_discriminants(max_label.min(3 * MAX_SIEVE_LIMIT)),
        })
    }

    /// `None` unless `-d_label` is a fundamental discriminant.
    pub fn record(&self, d_label: u64) -> Option<SurveyRecord> {
        let k = to_fundamental(d_label)?;
        let forms = self.sieve.reduced_forms(k.disc());
        let h = forms.len() as u64;
        let theta = valuation(h, self.p);
        let a0 = if theta == 0 {
            AbelianPGroup::trivial(self.p).expect("odd prime")
        } else {
            sylow_structure(&forms, self.p)
        };
        let (nu, low_confidence) = if theta == 0 {
            (0, false)
        } else {
            match intersection_depth_with(&k, self.p, h, &self.opts) {
                Ok(r) => (r.nu, r.low_confidence),
                Err(BrinkError::NoSplitPrimes { .. }) | Err(BrinkError::ExcludedField(_)) => {
                    (0, true)
                }
                Err(e) => {
                    log::warn!("d={d_label}: {e}");
                    (0, true)
                }
            }
        };
        Some(SurveyRecord {
            d_label,
            d: k.d(),
            p: self.p,
            splitting: splitting_type(&k, self.p),
            h,
            theta,
            a0,
            nu,
            low_confidence,
        })
    }

    /// Records for `k` in `[k0, k1]`, ordered by `k`.
    pub fn block(&self, family: Family, k0: u64, k1: u64) -> Vec<SurveyRecord> {
        (k0..=k1)
            .into_par_iter()
            .filter_map(|k| family.label(k).and_then(|d| self.record(d)))
            .collect()
    }
}

/// Every record of the sweep, in order of `d_label`.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SurveyRecord>, SurveyError> {
    if config.k_end < config.k_start {
        return Ok(Vec::new());
    }
    let s = FieldSurveyor::new(config.p, config.ell_bound, config.max_label())?;
    let mut out = Vec::new();
    let mut k = config.k_start;
    while k <= config.k_end {
        let k1 = k.saturating_add(config.block_size - 1).min(config.k_end);
        out.extend(s.block(config.family, k, k1));
        k = k1 + 1;
    }
    Ok(out)
}
