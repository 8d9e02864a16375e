mod common;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use anticyclo::arith::{is_prime, sqrt_mod_prime};
use anticyclo::bqf::{reduced_forms_small, AbelianPGroup, QuadForm, SmallForm};
use anticyclo::cohen_lenstra::{count_exact_order, intersection_distribution, surjection_count};
use anticyclo::quadfield::{splitting_type, to_fundamental, SplittingType};
use anticyclo::schertz::{eta, weber_f1, Complex, PrecisionContext};
use anticyclo::survey::{tabulate, Family, RunStatus, SurveyRunner, SweepConfig};

use common::{brute_surjections, check_laws, element_order, elements, partitions};

const RM: RoundingMode = RoundingMode::ToEven;

// ---------------------------------------------------------------- forms

fn small_case(disc: i64, seed: u64) -> Option<[SmallForm; 3]> {
    let forms = reduced_forms_small(disc);
    if forms.len() < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = || forms[rng.gen_range(0..forms.len())].clone();
    Some([pick(), pick(), pick()])
}

fn check_small(disc: i64, seed: u64) {
    if let Some([f, g, h]) = small_case(disc, seed) {
        let one = SmallForm::principal(&(disc as i128)).unwrap();
        check_laws(&f, &g, &h, &one);
        let big = f.to_big().mul(&g.to_big());
        assert_eq!(Some(big.to_small().unwrap()), Some(f.mul(&g)));
    }
}

/// A prime form `(l, b, c)` of discriminant `disc`, `l` the first suitable prime after `start`.
fn prime_form(disc: &BigInt, start: u64) -> QuadForm {
    let mut l = start | 1;
    loop {
        l += 2;
        if !is_prime(l) {
            continue;
        }
        let r = (disc % BigInt::from(l) + BigInt::from(l)) % BigInt::from(l);
        let r = r.to_u64().unwrap();
        if r == 0 {
            continue;
        }
        if let Some(mut b) = sqrt_mod_prime(r, l) {
            let parity = if disc % 2u32 == BigInt::from(0) { 0 } else { 1 };
            if b % 2 != parity {
                b = l - b;
            }
            return QuadForm::from_ab(BigInt::from(l), BigInt::from(b), disc)
                .unwrap()
                .reduce();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn group_laws_d_3_mod_8(m in 1i64..200_000, seed: u64) {
        check_small(-(8 * m + 3), seed);
    }

    #[test]
    fn group_laws_d_7_mod_8(m in 1i64..200_000, seed: u64) {
        check_small(-(8 * m + 7), seed);
    }

    #[test]
    fn group_laws_even(m in 1i64..400_000, seed: u64) {
        check_small(-4 * m, seed);
    }

    #[test]
    fn group_laws_non_fundamental(m in 1i64..5_000, f in 2i64..30, seed: u64) {
        check_small(-(4 * m + 3) * f * f, seed);
    }

    #[test]
    fn group_laws_large(hi in 1u64..u64::MAX / 8, lo: u64, s in 0u64..1_000_000) {
        let n: BigInt = (BigInt::from(hi) << 64) + BigInt::from(lo);
        let disc: BigInt = -(n * BigInt::from(4) + BigInt::from(3));
        let f = prime_form(&disc, 3 + s % 1000);
        let g = prime_form(&disc, 1000 + s % 5000);
        let h = prime_form(&disc, 7000 + s);
        let one = QuadForm::principal(&disc).unwrap();
        check_laws(&f, &g, &h, &one);
    }
}

// ------------------------------------------------- homomorphism counts

#[test]
fn surjections_match_exact_orders_for_groups_up_to_81() {
    let mut groups = 0;
    for p in (3..=81u64).filter(|&p| is_prime(p)) {
        let mut k = 1;
        while p.pow(k) <= 81 {
            for e in partitions(k, k) {
                let g = AbelianPGroup::new(p, e.clone()).unwrap();
                let elems = elements(p, &e);
                for n in 0..=e[0] + 1 {
                    let exact = elems
                        .iter()
                        .filter(|x| element_order(p, &e, x) == n)
                        .count() as u64;
                    let surj = brute_surjections(p, &e, n);
                    assert_eq!(count_exact_order(&g, n), BigUint::from(exact), "{g} n={n}");
                    assert_eq!(surjection_count(&g, n), BigUint::from(surj), "{g} n={n}");
                    assert_eq!(surj, exact, "{g} n={n}");
                }
                groups += 1;
            }
            k += 1;
        }
    }
    assert!(groups >= 25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distribution_sums_to_one(pi in 0usize..4, e in proptest::collection::vec(1u32..6, 1..4)) {
        let p = [3u64, 5, 7, 11][pi];
        let g = AbelianPGroup::new(p, e).unwrap();
        let d = intersection_distribution(&g);
        let total: BigRational = d.probs().values().sum();
        prop_assert!(total.is_one());
        prop_assert_eq!(d.probs().len() as u32, g.exponents()[0] + 1);
    }
}

// ------------------------------------------------------------------ eta

fn raw_eta(x: f64, y: f64) -> (f64, f64) {
    let tau = std::f64::consts::TAU;
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let cexp = |re: f64, im: f64| (re.exp() * im.cos(), re.exp() * im.sin());
    let q = cexp(-tau * y, tau * x);
    let mut acc = cexp(-tau * y / 24.0, tau * x / 24.0);
    let mut qn = (1.0, 0.0);
    for _ in 0..400 {
        qn = mul(qn, q);
        acc = mul(acc, (1.0 - qn.0, -qn.1));
    }
    acc
}

#[test]
fn pentagonal_series_matches_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ctx = PrecisionContext::new(50).unwrap();
    let mut cc = Consts::new().unwrap();
    for _ in 0..20 {
        let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.5..3.0));
        let z = Complex::from_f64(x, y, ctx.bits());
        let (re, im) = eta(&z, &ctx, &mut cc).unwrap().to_f64_pair();
        let (r2, i2) = raw_eta(x, y);
        let scale = r2.hypot(i2);
        assert!(
            (re - r2).hypot(im - i2) < 1e-12 * scale.max(1e-300),
            "z = {x} + {y}i"
        );
    }
}

fn agm(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    let (mut a, mut b) = (a.clone(), b.clone());
    let two = BigFloat::from_word(2, p);
    for _ in 0..64 {
        let an = a.add(&b, p, RM).div(&two, p, RM);
        b = a.mul(&b, p, RM).sqrt(p, RM);
        a = an;
    }
    a
}

fn rel_err(x: &BigFloat, y: &BigFloat, p: usize) -> f64 {
    let d = x.sub(y, p, RM).div(y, p, RM).abs();
    if d.is_zero() {
        return f64::NEG_INFINITY;
    }
    (d.exponent().unwrap() as f64) * std::f64::consts::LOG10_2
}

#[test]
fn eta_at_i_matches_gamma_quarter() {
    // Γ(1/4)^2 = (2π)^(3/2) / AGM(1, √2),  η(i) = Γ(1/4) / (2 π^(3/4))
    let ctx = PrecisionContext::new(120).unwrap();
    let p = ctx.bits();
    let mut cc = Consts::new().unwrap();
    let pi = cc.pi(p, RM);
    let two = BigFloat::from_word(2, p);
    let one = BigFloat::from_word(1, p);
    let two_pi = pi.mul(&two, p, RM);
    let num = two_pi.mul(&two_pi.sqrt(p, RM), p, RM);
    let gamma = num.div(&agm(&one, &two.sqrt(p, RM), p), p, RM).sqrt(p, RM);
    let pi34 = pi.sqrt(p, RM).mul(&pi.sqrt(p, RM).sqrt(p, RM), p, RM);
    let want = gamma.div(&two.mul(&pi34, p, RM), p, RM);

    let i = Complex::from_f64(0.0, 1.0, p);
    let got = eta(&i, &ctx, &mut cc).unwrap();
    assert!(rel_err(&got.re, &want, p) < -110.0);
    let im = got.im.abs();
    assert!(im.is_zero() || (im.exponent().unwrap() as f64) * std::f64::consts::LOG10_2 < -110.0);

    // η(2i) / η(i) = 2^(-3/8)
    let two_i = Complex::from_f64(0.0, 2.0, p);
    let ratio = eta(&two_i, &ctx, &mut cc).unwrap().re.div(&got.re, p, RM);
    let q = two.sqrt(p, RM).sqrt(p, RM);
    let want = one.div(&q.mul(&q.sqrt(p, RM), p, RM), p, RM);
    assert!(rel_err(&ratio, &want, p) < -110.0);
}

#[test]
fn weber_f1_is_stable_under_precision_doubling() {
    let ctx = PrecisionContext::new(60).unwrap();
    let wide = ctx.doubled();
    let mut cc = Consts::new().unwrap();
    let z = Complex::from_f64(0.0, 2.0, wide.bits());
    let a = weber_f1(&z, &ctx, &mut cc).unwrap();
    let b = weber_f1(&z, &wide, &mut cc).unwrap();
    assert!(rel_err(&a.re, &b.re, wide.bits()) < -55.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn eta_is_stable_under_precision_doubling(x in -2.0f64..2.0, y in 0.5f64..2.5) {
        let ctx = PrecisionContext::new(60).unwrap();
        let wide = ctx.doubled();
        let mut cc = Consts::new().unwrap();
        let z = Complex::from_f64(x, y, wide.bits());
        let a = eta(&z, &ctx, &mut cc).unwrap();
        let b = eta(&z, &wide, &mut cc).unwrap();
        let p = wide.bits();
        let d = a.sub(&b, p);
        let mag = b.log2_magnitude();
        prop_assert!(d.log2_magnitude() - mag < -55.0 / std::f64::consts::LOG10_2);
    }
}

// ------------------------------------------------------- discriminants

fn squarefree_by_trial(n: u64) -> bool {
    let mut i = 2u64;
    while i * i <= n {
        if n.is_multiple_of(i * i) {
            return false;
        }
        i += 1;
    }
    true
}

fn fundamental_by_congruence(n: u64) -> bool {
    match n % 4 {
        3 => squarefree_by_trial(n),
        0 => matches!((n / 4) % 4, 1 | 2) && squarefree_by_trial(n / 4),
        _ => false,
    }
}

#[test]
fn fundamental_filter_matches_trial_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100_000 {
        let n = rng.gen_range(1..10_000_000u64);
        assert_eq!(
            to_fundamental(n).is_some(),
            fundamental_by_congruence(n),
            "n = {n}"
        );
    }
    for n in 1..2000 {
        assert_eq!(
            to_fundamental(n).is_some(),
            fundamental_by_congruence(n),
            "n = {n}"
        );
    }
}

#[test]
fn splitting_of_three_by_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (fam, want) in [
        ("3k-1", SplittingType::Split),
        ("3k+1", SplittingType::Inert),
        ("9k+3", SplittingType::Ramified),
        ("9k+6", SplittingType::Ramified),
    ] {
        let fam: Family = fam.parse().unwrap();
        let mut seen = 0;
        while seen < 1000 {
            let d = fam.label(rng.gen_range(1..100_000_000)).unwrap();
            if let Some(k) = to_fundamental(d) {
                assert_eq!(splitting_type(&k, 3), want, "d = {d}");
                seen += 1;
            }
        }
    }
}

// ---------------------------------------------------------------- survey

fn small_config() -> SweepConfig {
    let mut c = SweepConfig::new("9k+3".parse().unwrap(), 100_000, 104_000, 3);
    c.block_size = 250;
    c
}

fn run_with_threads(threads: usize, csv: &std::path::Path) -> RunStatus {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let runner = SurveyRunner {
        csv: Some(csv.to_path_buf()),
        ..SurveyRunner::new(small_config())
    };
    pool.install(|| runner.run()).unwrap()
}

fn report_json(status: &RunStatus) -> String {
    let r = tabulate(3, "", status.tally());
    serde_json::to_string(&r).unwrap()
}

#[test]
fn survey_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let sa = run_with_threads(1, &a);
    let sb = run_with_threads(4, &b);
    assert!(sa.is_complete() && sb.is_complete());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(report_json(&sa), report_json(&sb));
}

#[test]
fn checkpoint_rejects_a_different_run() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let runner = SurveyRunner {
        checkpoint: Some(cp.clone()),
        max_blocks: Some(1),
        ..SurveyRunner::new(small_config())
    };
    runner.run().unwrap();
    let mut other = small_config();
    other.p = 5;
    let runner = SurveyRunner {
        checkpoint: Some(cp),
        ..SurveyRunner::new(other)
    };
    assert!(runner.run().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn resumed_survey_matches_uninterrupted(stops in proptest::collection::vec(1u64..6, 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let full_csv = dir.path().join("full.csv");
        let full = SurveyRunner {
            csv: Some(full_csv.clone()),
            ..SurveyRunner::new(small_config())
        }
        .run()
        .unwrap();

        let csv = dir.path().join("part.csv");
        let cp = dir.path().join("part.json");
        let mut status = None;
        for &m in stops.iter().chain(std::iter::repeat(&u64::MAX)) {
            let runner = SurveyRunner {
                csv: Some(csv.clone()),
                checkpoint: Some(cp.clone()),
                max_blocks: Some(m),
                ..SurveyRunner::new(small_config())
            };
            let s = runner.run().unwrap();
            if s.is_complete() {
                status = Some(s);
                break;
            }
            // a crash after the checkpoint may leave a longer CSV behind
            std::fs::OpenOptions::new()
                .append(true)
                .open(&csv)
                .and_then(|mut f| std::io::Write::write_all(&mut f, b"999,partial"))
                .unwrap();
        }
        let status = status.unwrap();
        prop_assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&full_csv).unwrap());
        prop_assert_eq!(report_json(&status), report_json(&full));
    }
}
