//! Exact-count and transform-oracle checks over a fixed suite of groups.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fourier::{convolve, dft_naive, FftPlan, GroupFunction};
use crate::group::GroupSpec;

/// Built-in suite: Z12, Z8 x Z3, (Z2)^6, Z4 x Z2 x Z5, (Z2)^4 x Z3.
pub const SELFTEST_GROUPS: [&str; 5] = ["12", "8,3", "2^6", "4,2,5", "2^4,3"];

/// Random functions per group for the oracle comparison.
pub const ORACLE_SAMPLES: usize = 50;
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

pub fn run_selftest() -> SelftestReport {
    run_selftest_with(FftPlan::new)
}

/// Runs the suite with plans from `make_plan`, so a harness can inject a
/// faulty transform.
pub fn run_selftest_with(make_plan: impl Fn(&GroupSpec) -> FftPlan) -> SelftestReport {
    let mut checks = Vec::new();
    for spec in SELFTEST_GROUPS {
        let g: GroupSpec = spec.parse().expect("built-in group spec");
        checks.extend(exact_checks(&g));
        checks.extend(transform_checks(&g, &make_plan(&g)));
    }
    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { checks, passed }
}

/// Involution/real-character counts and restriction multiplicities.
pub fn exact_checks(g: &GroupSpec) -> Vec<CheckOutcome> {
    let n = g.size();
    let brute_inv = (0..n).filter(|&a| g.mul_index(a, a) == 0).count();
    let real = g.real_character_count();
    let inv = g.involution_count();
    let mut out = vec![CheckOutcome::new(
        format!("involutions equal real characters [{g}]"),
        brute_inv == real && inv == real,
        format!("enumerated involutions {brute_inv}, formula {inv}, real characters {real}"),
    )];

    let a = g.involutions();
    let classes = g.characters_by_restriction(&a);
    let want = n / a.len();
    let ok = classes.len() == a.len() && classes.values().all(|c| c.len() == want);
    out.push(CheckOutcome::new(
        format!("restriction multiplicities [{g}]"),
        ok,
        format!(
            "|A| = {}, distinct restrictions {}, class sizes {:?} (want {want})",
            a.len(),
            classes.len(),
            classes
                .values()
                .map(|c| c.len())
                .collect::<std::collections::BTreeSet<_>>()
        ),
    ));

    let mut worst: f64 = 0.0;
    for t1 in 0..n {
        for t2 in 0..n {
            let s: Complex64 = (0..n)
                .map(|x| g.char_value_index(t1, x) * g.char_value_index(t2, x).conj())
                .sum();
            let expect = if t1 == t2 { n as f64 } else { 0.0 };
            worst = worst.max((s - expect).norm());
        }
    }
    out.push(CheckOutcome::new(
        format!("character orthogonality [{g}]"),
        worst < 1e-8 * n as f64,
        format!("max deviation {worst:.3e}"),
    ));
    out
}

pub fn random_function(g: &GroupSpec, rng: &mut impl Rng) -> GroupFunction {
    let values = (0..g.size())
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    GroupFunction::new(g.clone(), values).expect("finite values of the right length")
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Oracle agreement, Parseval, round trip and the convolution theorem.
pub fn transform_checks(g: &GroupSpec, plan: &FftPlan) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_7e57 ^ g.size() as u64);
    let n = g.size() as f64;
    let (mut oracle, mut parseval, mut round) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ORACLE_SAMPLES {
        let f = random_function(g, &mut rng);
        let fast = plan.forward(&f).expect("plan for this group");
        oracle = oracle.max(max_abs_diff(fast.values(), dft_naive(&f).values()));
        parseval = parseval.max((fast.norm_sqr() - n * f.norm_sqr()).abs() / (n * f.norm_sqr()));
        let back = plan.inverse(&fast).expect("plan for this group");
        round = round.max(max_abs_diff(back.values(), f.values()));
    }
    let mut out = vec![
        CheckOutcome::new(
            format!("fast transform matches direct sum [{g}]"),
            oracle < ORACLE_TOL,
            format!("max entry error {oracle:.3e} over {ORACLE_SAMPLES} functions"),
        ),
        CheckOutcome::new(
            format!("Parseval [{g}]"),
            parseval < ORACLE_TOL,
            format!("max relative error {parseval:.3e}"),
        ),
        CheckOutcome::new(
            format!("inverse round trip [{g}]"),
            round < ORACLE_TOL,
            format!("max entry error {round:.3e}"),
        ),
    ];
    if g.size() <= 256 {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let f = random_function(g, &mut rng);
            let h = random_function(g, &mut rng);
            let lhs = plan
                .forward(&convolve(&f, &h).expect("same group"))
                .expect("plan");
            let ff = plan.forward(&f).expect("plan");
            let hh = plan.forward(&h).expect("plan");
            let rhs: Vec<Complex64> = ff
                .values()
                .iter()
                .zip(hh.values())
                .map(|(a, b)| a * b)
                .collect();
            worst = worst.max(max_abs_diff(lhs.values(), &rhs));
        }
        out.push(CheckOutcome::new(
            format!("convolution theorem [{g}]"),
            worst < ORACLE_TOL * n,
            format!("max entry error {worst:.3e}"),
        ));
    }
    out
}
