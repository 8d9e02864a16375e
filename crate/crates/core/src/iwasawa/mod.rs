//! Criteria for `λ = μ = 0` in the anti-cyclotomic Z_p-extension, applied to
//! class groups `A_0, A_1, ...` of the first layers.
//!
//! Every rule assumes the tower has a single ramified prime which is totally
//! ramified from some level on; [`LayerData::ramified_from`] records that
//! level (0 when the p-Hilbert class field is disjoint from the tower,
//! otherwise the intersection depth).

pub mod fixtures;
mod oracle;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

pub use oracle::{matrix_group_oracle, OracleVerdict, MAX_ORACLE_ORDER};

use crate::bqf::{AbelianPGroup, GroupError};
use crate::brink::IntersectionResult;
use crate::quadfield::SplittingType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IwasawaError {
    #[error("#A_{next} < #A_{level} although the tower is totally ramified from level {from}")]
    InconsistentSizes { level: u32, next: u32, from: u32 },
    #[error("levels {n0}..{n1} are not usable (have {available} levels, ramified from {from})")]
    BadLevels {
        n0: u32,
        n1: u32,
        available: u32,
        from: u32,
    },
    #[error("groups at different primes: expected {expected}, found {found}")]
    MixedPrimes { expected: u64, found: u64 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("oracle group for p={p}, u={u} is outside the exhaustive range")]
    OracleRange { p: u64, u: u32 },
    #[error("fixtures: {0}")]
    Fixtures(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Class groups of the layers `K_0 = K, K_1, ..., K_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerData {
    pub d: u64,
    pub p: u64,
    a: Vec<AbelianPGroup>,
    ramified_from: u32,
    capitulates: Option<bool>,
}

impl LayerData {
    pub fn new(
        d: u64,
        p: u64,
        a: Vec<AbelianPGroup>,
        ramified_from: u32,
        capitulates: Option<bool>,
    ) -> Result<Self, IwasawaError> {
        for g in &a {
            if g.p() != p {
                return Err(IwasawaError::MixedPrimes {
                    expected: p,
                    found: g.p(),
                });
            }
        }
        for n in ramified_from as usize..a.len().saturating_sub(1) {
            if a[n + 1].log_order() < a[n].log_order() {
                return Err(IwasawaError::InconsistentSizes {
                    level: n as u32,
                    next: n as u32 + 1,
                    from: ramified_from,
                });
            }
        }
        Ok(Self {
            d,
            p,
            a,
            ramified_from,
            capitulates,
        })
    }

    pub fn levels(&self) -> &[AbelianPGroup] {
        &self.a
    }

    pub fn level(&self, n: u32) -> Option<&AbelianPGroup> {
        self.a.get(n as usize)
    }

    pub fn ramified_from(&self) -> u32 {
        self.ramified_from
    }

    /// Whether every class of `A_0` is known to become trivial in some layer.
    pub fn capitulates(&self) -> Option<bool> {
        self.capitulates
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Bound {
    KnownZero,
    Bounded(u64),
    Unknown,
}

impl Bound {
    fn from_upper(b: u64) -> Self {
        if b == 0 {
            Self::KnownZero
        } else {
            Self::Bounded(b)
        }
    }

    fn meet(self, other: Self) -> Self {
        match (self, other) {
            (Self::KnownZero, _) | (_, Self::KnownZero) => Self::KnownZero,
            (Self::Bounded(a), Self::Bounded(b)) => Self::Bounded(a.min(b)),
            (Self::Bounded(a), Self::Unknown) | (Self::Unknown, Self::Bounded(a)) => {
                Self::Bounded(a)
            }
            (Self::Unknown, Self::Unknown) => Self::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Sands,
    MuZero,
    Nakayama,
    Elementary,
    Specific,
    Fujii,
    Capitulation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleFiring {
    pub rule: Rule,
    pub levels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantConclusion {
    pub mu: Bound,
    pub lambda: Bound,
    pub rules_fired: Vec<RuleFiring>,
}

impl InvariantConclusion {
    fn zero(rule: Rule, levels: Vec<u32>) -> Self {
        Self {
            mu: Bound::KnownZero,
            lambda: Bound::KnownZero,
            rules_fired: vec![RuleFiring { rule, levels }],
        }
    }

    pub fn both_zero(&self) -> bool {
        self.mu == Bound::KnownZero && self.lambda == Bound::KnownZero
    }

    pub fn fired(&self, rule: Rule) -> bool {
        self.rules_fired.iter().any(|f| f.rule == rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SandsBound {
    /// Largest `μ` compatible with the growth between the two levels.
    pub mu_bound: u64,
    /// Bound on `λ` assuming `μ = 0`; `None` when the growth is too large to constrain it.
    pub lambda_bound_if_mu_zero: Option<u64>,
}

fn pow_minus_one(p: u64, m: u32) -> u64 {
    p.pow(m) - 1
}

/// From `#A_n1 >= #A_n0 · p^(μ(p^m - 1) + min(p^m - 1, λ))`, `m = n1 - n0`.
pub fn sands_constraints(data: &LayerData, n0: u32, n1: u32) -> Result<SandsBound, IwasawaError> {
    let available = data.a.len() as u32;
    if n1 <= n0 || n1 >= available || n0 < data.ramified_from {
        return Err(IwasawaError::BadLevels {
            n0,
            n1,
            available,
            from: data.ramified_from,
        });
    }
    let (s0, s1) = (
        data.a[n0 as usize].log_order(),
        data.a[n1 as usize].log_order(),
    );
    if s1 < s0 {
        return Err(IwasawaError::InconsistentSizes {
            level: n0,
            next: n1,
            from: data.ramified_from,
        });
    }
    let v = (s1 - s0) as u64;
    let span = pow_minus_one(data.p, n1 - n0);
    Ok(SandsBound {
        mu_bound: v / span,
        lambda_bound_if_mu_zero: (v < span).then_some(v),
    })
}

/// `A_n ≅ A_(n+1)` at consecutive levels.
pub fn nakayama_rule(data: &LayerData) -> Option<InvariantConclusion> {
    let from = data.ramified_from as usize;
    (from..data.a.len().saturating_sub(1))
        .find(|&n| data.a[n] == data.a[n + 1])
        .map(|n| InvariantConclusion::zero(Rule::Nakayama, vec![n as u32, n as u32 + 1]))
}

/// `A_n`, `A_(n+1)` elementary with `rank A_(n+1) <= rank A_n + p - 2`.
pub fn elementary_rule(data: &LayerData, n: u32) -> Option<InvariantConclusion> {
    if n < data.ramified_from {
        return None;
    }
    let (an, an1) = (data.level(n)?, data.level(n + 1)?);
    if an.is_trivial() || !an.is_elementary() || !an1.is_elementary() {
        return None;
    }
    if an1.rank() as u64 <= an.rank() as u64 + data.p - 2 {
        Some(InvariantConclusion::zero(Rule::Elementary, vec![n, n + 1]))
    } else {
        None
    }
}

/// `A_0 = Z/p², A_1 = Z/p² × Z/p, A_2 = Z/p² × Z/p²`, ramified from level 0.
pub fn specific_rule(data: &LayerData) -> Option<InvariantConclusion> {
    if data.ramified_from != 0 {
        return None;
    }
    let pattern: [&[u32]; 3] = [&[2], &[2, 1], &[2, 2]];
    for (n, want) in pattern.iter().enumerate() {
        if data.level(n as u32)?.exponents() != *want {
            return None;
        }
    }
    Some(InvariantConclusion::zero(Rule::Specific, vec![0, 1, 2]))
}

/// Class field contained in the tower with cyclic `A_0`, or `A_0` trivial.
pub fn fujii_rule(ir: &IntersectionResult, a0: &AbelianPGroup) -> Option<InvariantConclusion> {
    if ir.theta == 0 || (a0.is_cyclic() && ir.nu == ir.theta) {
        Some(InvariantConclusion::zero(Rule::Fujii, vec![0]))
    } else {
        None
    }
}

/// Every class of `A_0` dies in some layer, with ramification from level 0.
pub fn capitulation_rule(data: &LayerData) -> Option<InvariantConclusion> {
    (data.ramified_from == 0 && data.capitulates == Some(true))
        .then(|| InvariantConclusion::zero(Rule::Capitulation, vec![0]))
}

/// `μ = 0` when `#A_2 < #A_0 · p^(p² - 1)`.
pub fn mu_zero_check(data: &LayerData) -> Option<InvariantConclusion> {
    if data.ramified_from != 0 {
        return None;
    }
    let (a0, a2) = (data.level(0)?, data.level(2)?);
    let lhs = a2.order();
    let rhs = a0.order() * BigUint::from(data.p).pow((data.p * data.p - 1) as u32);
    (lhs < rhs).then(|| InvariantConclusion {
        mu: Bound::KnownZero,
        lambda: Bound::Unknown,
        rules_fired: vec![RuleFiring {
            rule: Rule::MuZero,
            levels: vec![0, 2],
        }],
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "levels")]
pub enum Verdict {
    Pass,
    /// Levels whose data contradict the statement.
    Violation(Vec<u32>),
    NotApplicable,
}

/// With `ν = 0`, `A_0 ≠ 1` and `p` not split, every `A_n` with `n >= 1` must be non-cyclic.
pub fn noncyclic_check(
    ir: &IntersectionResult,
    splitting: SplittingType,
    data: &LayerData,
) -> Verdict {
    let a0_trivial = data.level(0).is_none_or(AbelianPGroup::is_trivial);
    if a0_trivial {
        return Verdict::Pass;
    }
    if ir.nu != 0 || splitting == SplittingType::Split {
        return Verdict::NotApplicable;
    }
    let bad: Vec<u32> = (1..data.a.len() as u32)
        .filter(|&n| data.a[n as usize].is_cyclic())
        .collect();
    if bad.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Violation(bad)
    }
}

/// With `A_0` cyclic and `K_ν` inside the class field, the class field of
/// `K_ν` is that of `K`, so `#A_ν = #A_0 / p^ν`.
pub fn hilbert_tower_rule(ir: &IntersectionResult, data: &LayerData) -> Verdict {
    let Some(a0) = data.level(0) else {
        return Verdict::NotApplicable;
    };
    if !a0.is_cyclic() || ir.nu == 0 {
        return Verdict::NotApplicable;
    }
    let mut bad = Vec::new();
    for n in 1..=ir.nu {
        let Some(an) = data.level(n) else { break };
        if an.log_order() + n != a0.log_order() {
            bad.push(n);
        }
    }
    if bad.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Violation(bad)
    }
}

/// Runs every applicable rule and combines the results.
pub fn evaluate(data: &LayerData, ir: Option<&IntersectionResult>) -> InvariantConclusion {
    let mut firings = Vec::new();
    let mut mu = Bound::Unknown;
    let mut lambda = Bound::Unknown;

    let mut zero_rules: Vec<InvariantConclusion> = Vec::new();
    zero_rules.extend(nakayama_rule(data));
    zero_rules
        .extend((data.ramified_from..data.a.len() as u32).filter_map(|n| elementary_rule(data, n)));
    zero_rules.extend(specific_rule(data));
    zero_rules.extend(capitulation_rule(data));
    if let (Some(ir), Some(a0)) = (ir, data.level(0)) {
        zero_rules.extend(fujii_rule(ir, a0));
    }
    for c in zero_rules {
        mu = mu.meet(c.mu);
        lambda = lambda.meet(c.lambda);
        firings.extend(c.rules_fired);
    }

    if let Some(c) = mu_zero_check(data) {
        mu = mu.meet(c.mu);
        firings.extend(c.rules_fired);
    }
    let n0 = data.ramified_from;
    let top = data.a.len() as u32;
    if top > n0 + 1 {
        if let Ok(s) = sands_constraints(data, n0, top - 1) {
            mu = mu.meet(Bound::from_upper(s.mu_bound));
            if mu == Bound::KnownZero {
                if let Some(l) = s.lambda_bound_if_mu_zero {
                    lambda = lambda.meet(Bound::from_upper(l));
                }
            }
            firings.push(RuleFiring {
                rule: Rule::Sands,
                levels: vec![n0, top - 1],
            });
        }
    }
    InvariantConclusion {
        mu,
        lambda,
        rules_fired: firings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brink::{BrinkCase, Classification};

    fn grp(e: &[u32]) -> AbelianPGroup {
        AbelianPGroup::new(3, e.to_vec()).unwrap()
    }

    fn data(levels: &[&[u32]]) -> LayerData {
        LayerData::new(0, 3, levels.iter().map(|e| grp(e)).collect(), 0, None).unwrap()
    }

    fn ir(theta: u32, nu: u32) -> IntersectionResult {
        IntersectionResult {
            d: 0,
            d_label: 0,
            p: 3,
            h: 3u64.pow(theta),
            theta,
            nu,
            raw_nu: nu as i64,
            case: BrinkCase::Inert,
            witnesses: vec![],
            classification: Classification::of(theta, nu),
            low_confidence: false,
        }
    }

    #[test]
    fn sands_examples() {
        let d1843 = data(&[&[1], &[3, 2], &[4, 3]]);
        let s = sands_constraints(&d1843, 0, 2).unwrap();
        assert_eq!(s.mu_bound, 0);
        assert_eq!(s.lambda_bound_if_mu_zero, Some(6));
        let d141412 = data(&[&[1, 1], &[2, 1, 1, 1], &[3, 2, 1, 1]]);
        let s = sands_constraints(&d141412, 0, 2).unwrap();
        assert_eq!((s.mu_bound, s.lambda_bound_if_mu_zero), (0, Some(5)));
        let t = data(&[&[], &[], &[]]);
        let s = sands_constraints(&t, 0, 2).unwrap();
        assert_eq!((s.mu_bound, s.lambda_bound_if_mu_zero), (0, Some(0)));
    }

    #[test]
    fn sands_one_step_bounds() {
        // #A_1 = 3, #A_2 = 27 over one step gives μ <= 1 and no λ bound.
        let d = LayerData::new(367, 3, vec![grp(&[2]), grp(&[1]), grp(&[2, 1])], 1, None).unwrap();
        let s = sands_constraints(&d, 1, 2).unwrap();
        assert_eq!((s.mu_bound, s.lambda_bound_if_mu_zero), (1, None));
        assert!(sands_constraints(&d, 0, 2).is_err());
        assert!(sands_constraints(&d, 2, 2).is_err());
    }

    #[test]
    fn inconsistent_sizes_are_rejected() {
        let r = LayerData::new(0, 3, vec![grp(&[2]), grp(&[1])], 0, None);
        assert!(matches!(r, Err(IwasawaError::InconsistentSizes { .. })));
        let r = LayerData::new(
            0,
            3,
            vec![grp(&[2]), AbelianPGroup::trivial(5).unwrap()],
            0,
            None,
        );
        assert!(matches!(r, Err(IwasawaError::MixedPrimes { .. })));
    }

    #[test]
    fn nakayama_examples() {
        assert!(nakayama_rule(&data(&[&[1], &[2, 2], &[2, 2]]))
            .unwrap()
            .both_zero());
        assert!(nakayama_rule(&data(&[&[1], &[1], &[1, 1]])).is_some());
        assert!(nakayama_rule(&data(&[&[1], &[1, 1, 1], &[1, 1, 1, 1]])).is_none());
    }

    #[test]
    fn elementary_examples() {
        assert!(elementary_rule(&data(&[&[1], &[1, 1], &[1, 1]]), 1).is_some());
        assert!(elementary_rule(&data(&[&[1], &[1, 1, 1], &[1, 1, 1, 1]]), 1).is_some());
        assert!(elementary_rule(&data(&[&[1], &[1, 1], &[1, 1, 1, 1]]), 1).is_none());
        assert!(elementary_rule(&data(&[&[1], &[2, 1], &[2, 1]]), 1).is_none());
    }

    #[test]
    fn specific_examples() {
        assert!(specific_rule(&data(&[&[2], &[2, 1], &[2, 2]])).is_some());
        assert!(specific_rule(&data(&[&[2], &[2, 1], &[2, 1]])).is_none());
        assert!(nakayama_rule(&data(&[&[2], &[2, 1], &[2, 1]])).is_some());
        let late =
            LayerData::new(0, 3, vec![grp(&[2]), grp(&[2, 1]), grp(&[2, 2])], 1, None).unwrap();
        assert!(specific_rule(&late).is_none());
    }

    #[test]
    fn fujii_examples() {
        assert!(fujii_rule(&ir(1, 1), &grp(&[1])).is_some());
        assert!(fujii_rule(&ir(2, 1), &grp(&[2])).is_none());
        assert!(fujii_rule(&ir(0, 0), &grp(&[])).is_some());
        assert!(fujii_rule(&ir(2, 2), &grp(&[1, 1])).is_none());
        // the trivial route agrees with the growth bound
        let s = sands_constraints(&data(&[&[], &[], &[]]), 0, 2).unwrap();
        assert_eq!((s.mu_bound, s.lambda_bound_if_mu_zero), (0, Some(0)));
    }

    #[test]
    fn mu_zero_examples() {
        assert!(mu_zero_check(&data(&[&[1], &[3, 2], &[4, 3]])).is_some());
        assert!(mu_zero_check(&data(&[&[1], &[5, 4], &[5, 4]])).is_none());
        let c = mu_zero_check(&data(&[&[1, 1], &[2, 1, 1, 1], &[3, 2, 1, 1]])).unwrap();
        assert_eq!((c.mu, c.lambda), (Bound::KnownZero, Bound::Unknown));
    }

    #[test]
    fn noncyclic_examples() {
        let d643 = data(&[&[1], &[1, 1], &[1, 1]]);
        assert_eq!(
            noncyclic_check(&ir(1, 0), SplittingType::Inert, &d643),
            Verdict::Pass
        );
        let bad = data(&[&[1], &[2], &[2, 1]]);
        assert_eq!(
            noncyclic_check(&ir(1, 0), SplittingType::Inert, &bad),
            Verdict::Violation(vec![1])
        );
        let triv = data(&[&[], &[]]);
        assert_eq!(
            noncyclic_check(&ir(0, 0), SplittingType::Inert, &triv),
            Verdict::Pass
        );
        assert_eq!(
            noncyclic_check(&ir(1, 0), SplittingType::Split, &bad),
            Verdict::NotApplicable
        );
    }

    #[test]
    fn hilbert_tower_examples() {
        let d367 =
            LayerData::new(367, 3, vec![grp(&[2]), grp(&[1]), grp(&[2, 1])], 1, None).unwrap();
        assert_eq!(hilbert_tower_rule(&ir(2, 1), &d367), Verdict::Pass);
        let nc = LayerData::new(0, 3, vec![grp(&[1, 1]), grp(&[1, 1, 1])], 1, None).unwrap();
        assert_eq!(hilbert_tower_rule(&ir(2, 1), &nc), Verdict::NotApplicable);
        let wrong = LayerData::new(0, 3, vec![grp(&[2]), grp(&[2])], 1, None).unwrap();
        assert_eq!(
            hilbert_tower_rule(&ir(2, 1), &wrong),
            Verdict::Violation(vec![1])
        );
    }

    #[test]
    fn evaluate_combines_rules() {
        let c = evaluate(&data(&[&[1], &[3, 2], &[4, 3]]), Some(&ir(1, 0)));
        assert_eq!(c.mu, Bound::KnownZero);
        assert_eq!(c.lambda, Bound::Bounded(6));
        assert!(c.fired(Rule::Sands) && c.fired(Rule::MuZero));
        let c = evaluate(&data(&[&[2], &[2, 1], &[2, 2]]), Some(&ir(2, 0)));
        assert!(c.both_zero() && c.fired(Rule::Specific));
        let mut cap = data(&[&[1], &[3, 2], &[3, 3]]);
        cap.capitulates = Some(true);
        assert!(evaluate(&cap, None).fired(Rule::Capitulation));
    }
}
