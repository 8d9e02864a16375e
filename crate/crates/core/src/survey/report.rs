use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::SurveyRecord;
use crate::bqf::AbelianPGroup;
use crate::cohen_lenstra::intersection_distribution;

/// Groups with fewer fields than this get the `weak` flag in comparisons.
pub const WEAK_COUNT: u64 = 30;

/// Counts of `nu` per `A0` structure. Merging is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TallyRepr", from = "TallyRepr")]
pub struct Tally {
    pub records: u64,
    pub low_confidence: u64,
    cells: BTreeMap<Vec<u32>, BTreeMap<u32, u64>>,
}

#[derive(Serialize, Deserialize)]
struct TallyRepr {
    records: u64,
    low_confidence: u64,
    groups: Vec<(Vec<u32>, BTreeMap<u32, u64>)>,
}

impl From<Tally> for TallyRepr {
    fn from(t: Tally) -> Self {
        Self {
            records: t.records,
            low_confidence: t.low_confidence,
            groups: t.cells.into_iter().collect(),
        }
    }
}

impl From<TallyRepr> for Tally {
    fn from(r: TallyRepr) -> Self {
        Self {
            records: r.records,
            low_confidence: r.low_confidence,
            cells: r.groups.into_iter().collect(),
        }
    }
}

impl Tally {
    pub fn add(&mut self, r: &SurveyRecord) {
        self.records += 1;
        self.low_confidence += r.low_confidence as u64;
        *self
            .cells
            .entry(r.a0.exponents().to_vec())
            .or_default()
            .entry(r.nu)
            .or_default() += 1;
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a SurveyRecord>) -> Self {
        let mut t = Self::default();
        for r in records {
            t.add(r);
        }
        t
    }

    pub fn merge(&mut self, other: &Tally) {
        self.records += other.records;
        self.low_confidence += other.low_confidence;
        for (g, row) in &other.cells {
            let mine = self.cells.entry(g.clone()).or_default();
            for (&nu, &c) in row {
                *mine.entry(nu).or_default() += c;
            }
        }
    }

    /// Number of fields with the given `A0` exponents.
    pub fn count(&self, exponents: &[u32]) -> u64 {
        self.cells
            .get(exponents)
            .map_or(0, |row| row.values().sum())
    }

    pub fn cell(&self, exponents: &[u32], nu: u32) -> u64 {
        self.cells
            .get(exponents)
            .and_then(|row| row.get(&nu))
            .copied()
            .unwrap_or(0)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&Vec<u32>, &BTreeMap<u32, u64>)> {
        self.cells.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: String,
    pub exponents: Vec<u32>,
    pub count: u64,
    /// Indexed by `nu`.
    pub counts: Vec<u64>,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub expected_exact: Vec<String>,
}

impl GroupRow {
    pub fn top(&self) -> u32 {
        self.exponents.first().copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub p: u64,
    pub caption: String,
    pub records: u64,
    pub low_confidence: u64,
    /// Fields with trivial `A0`.
    pub trivial: u64,
    pub groups: Vec<GroupRow>,
}

fn group_order_key(e: &[u32]) -> (u32, Vec<u32>) {
    (e.iter().sum(), e.to_vec())
}

/// Observed and expected `nu` fractions per nontrivial `A0`, ordered by group order.
pub fn tabulate(p: u64, caption: &str, tally: &Tally) -> SurveyReport {
    let mut keys: Vec<&Vec<u32>> = tally.cells.keys().filter(|e| !e.is_empty()).collect();
    keys.sort_by_key(|e| group_order_key(e));
    let groups = keys
        .into_iter()
        .map(|e| {
            let g = AbelianPGroup::new(p, e.clone()).expect("tally holds valid groups");
            let top = e[0];
            let row = &tally.cells[e];
            let count: u64 = row.values().sum();
            let counts: Vec<u64> = (0..=top)
                .map(|n| row.get(&n).copied().unwrap_or(0))
                .collect();
            let observed = counts.iter().map(|&c| c as f64 / count as f64).collect();
            let dist = intersection_distribution(&g);
            let exact: Vec<_> = (0..=top).map(|n| dist.prob(n)).collect();
            GroupRow {
                group: g.to_string(),
                exponents: e.clone(),
                count,
                counts,
                observed,
                expected: exact
                    .iter()
                    .map(|q| q.to_f64().unwrap_or(f64::NAN))
                    .collect(),
                expected_exact: exact.iter().map(|q| q.to_string()).collect(),
            }
        })
        .collect();
    SurveyReport {
        p,
        caption: caption.to_string(),
        records: tally.records,
        low_confidence: tally.low_confidence,
        trivial: tally.count(&[]),
        groups,
    }
}

fn cell(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.6}")
    }
}

impl SurveyReport {
    pub fn group(&self, exponents: &[u32]) -> Option<&GroupRow> {
        self.groups.iter().find(|g| g.exponents == exponents)
    }

    /// Aligned table, columns `p^top .. p, 1`.
    pub fn to_text(&self) -> String {
        let top = self.groups.iter().map(GroupRow::top).max().unwrap_or(1);
        let mut head = vec!["A0".to_string(), "Number".to_string()];
        for n in (0..=top).rev() {
            head.push(match n {
                0 => "1".to_string(),
                1 => self.p.to_string(),
                _ => format!("{}^{}", self.p, n),
            });
        }
        let mut rows = vec![head];
        for g in &self.groups {
            let mut obs = vec![g.group.clone(), g.count.to_string()];
            let mut exp = vec!["Expected".to_string(), String::new()];
            for n in (0..=top as usize).rev() {
                obs.push(cell(g.observed.get(n).copied().unwrap_or(0.0)));
                exp.push(cell(g.expected.get(n).copied().unwrap_or(0.0)));
            }
            rows.push(obs);
            rows.push(exp);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        if !self.caption.is_empty() {
            let _ = writeln!(out, "{}", self.caption);
        }
        for (i, r) in rows.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 || i % 2 == 0 {
                let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        let _ = writeln!(
            out,
            "fields: {}  trivial A0: {}  low confidence: {}",
            self.records, self.trivial, self.low_confidence
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub group: String,
    pub nu: u32,
    pub count: u64,
    pub observed: f64,
    pub expected: f64,
    pub diff: f64,
    /// Binomial standard error `sqrt(q(1-q)/n)` at the expected `q`.
    pub std_error: f64,
    pub exceeds_tolerance: bool,
    pub weak: bool,
}

/// One entry per cell of every group.
pub fn compare_expected(report: &SurveyReport, tolerance: f64) -> Vec<Deviation> {
    let mut out = Vec::new();
    for g in &report.groups {
        for (n, (&o, &e)) in g.observed.iter().zip(&g.expected).enumerate() {
            let diff = (o - e).abs();
            out.push(Deviation {
                group: g.group.clone(),
                nu: n as u32,
                count: g.count,
                observed: o,
                expected: e,
                diff,
                std_error: (e * (1.0 - e) / g.count as f64).sqrt(),
                exceeds_tolerance: diff > tolerance,
                weak: g.count < WEAK_COUNT,
            });
        }
    }
    out
}
