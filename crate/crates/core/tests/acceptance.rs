//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;

use gcirc_core::experiment::{run_experiment, Check, ExperimentPlan};
use gcirc_core::{
    dft_naive, distance_report, eigen_residual, eigenvalues_with, fft_fast, ks_distance_real,
    limit_for, lindeberg_statistic, norm_ratio_curve, sample_entries, BaseDistribution, Complex64,
    EnsembleConfig, FftPlan, GroupFunction, GroupSpec, LimitLaw, Spectrum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn cfg(
    base: BaseDistribution,
    alpha: f64,
    beta: f64,
    hermitian: bool,
    seed: u64,
) -> EnsembleConfig {
    EnsembleConfig::new(base, alpha, beta, hermitian, seed).expect("valid config")
}

fn run_spectra(g: &GroupSpec, c: &EnsembleConfig, trials: usize) -> Vec<Spectrum> {
    let plan = FftPlan::new(g);
    let mut scratch = Vec::new();
    (0..trials as u64)
        .map(|t| eigenvalues_with(&plan, &sample_entries(g, c, t).unwrap(), &mut scratch).unwrap())
        .collect()
}

fn brute_char(g: &GroupSpec, chi: usize, a: usize) -> Complex64 {
    let (t, x) = (g.coords_of(chi), g.coords_of(a));
    let phase: f64 = g
        .orders()
        .iter()
        .enumerate()
        .map(|(j, &d)| (t[j] * x[j] % d) as f64 / d as f64)
        .sum();
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
}

fn brute_involutions(g: &GroupSpec) -> Vec<usize> {
    (0..g.size())
        .filter(|&a| {
            g.coords_of(a)
                .iter()
                .zip(g.orders())
                .all(|(&x, &d)| (2 * x) % d == 0)
        })
        .collect()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn transform_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut parseval) = (0.0f64, 0.0f64);
    for spec in ["12", "8,3", "2^6", "4,2,5"] {
        let g: GroupSpec = spec.parse().unwrap();
        let n = g.size() as f64;
        for _ in 0..50 {
            let v: Vec<Complex64> = (0..g.size())
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let f = GroupFunction::new(g.clone(), v).unwrap();
            let fast = fft_fast(&f);
            let slow = dft_naive(&f);
            for (a, b) in fast.values().iter().zip(slow.values()) {
                worst = worst.max((a - b).norm());
            }
            parseval =
                parseval.max((fast.norm_sqr() - n * f.norm_sqr()).abs() / (n * f.norm_sqr()));
        }
    }
    ensure(
        worst < 1e-9 && parseval < 1e-9,
        format!("max entry error {worst:.2e}, max Parseval relative error {parseval:.2e}"),
    )
}

fn involution_counts() -> Outcome {
    let cases: [(&str, Option<usize>); 12] = [
        ("12", Some(2)),
        ("4,2", Some(4)),
        ("2^6", Some(64)),
        ("9", Some(1)),
        ("8,3", None),
        ("4,2,5", None),
        ("2^4,3", None),
        ("6,6", None),
        ("2,4,8", None),
        ("3,3,3", None),
        ("16,4", None),
        ("10,12,7", None),
    ];
    let mut details = Vec::new();
    for (spec, expected) in cases {
        let g: GroupSpec = spec.parse().unwrap();
        let brute = brute_involutions(&g).len();
        let real = (0..g.size())
            .filter(|&chi| (0..g.size()).all(|a| brute_char(&g, chi, a).im.abs() < 1e-9))
            .count();
        if expected.is_some_and(|e| e != brute)
            || brute != real
            || g.involution_count() != brute
            || g.real_character_count() != real
        {
            return Err(format!(
                "{spec}: enumerated {brute}, real characters {real}, expected {expected:?}"
            ));
        }
        details.push(format!("{spec}:{brute}"));
    }
    Ok(format!("{} groups [{}]", cases.len(), details.join(" ")))
}

/// Partition characters by their numerical values on `h`; returns class sizes.
fn restriction_classes(g: &GroupSpec, h: &[usize]) -> Vec<usize> {
    let n = g.size();
    let mut assigned = vec![false; n];
    let mut sizes = Vec::new();
    for chi in 0..n {
        if assigned[chi] {
            continue;
        }
        let mut size = 0;
        for psi in chi..n {
            if !assigned[psi]
                && h.iter()
                    .all(|&a| (brute_char(g, chi, a) - brute_char(g, psi, a)).norm() < 1e-9)
            {
                assigned[psi] = true;
                size += 1;
            }
        }
        sizes.push(size);
    }
    sizes
}

fn restriction_multiplicity() -> Outcome {
    let v4: GroupSpec = "4,2".parse().unwrap();
    let a = brute_involutions(&v4);
    let sizes = restriction_classes(&v4, &a);
    if a.len() != 4 || sizes != vec![2; 4] {
        return Err(format!("Z4 x Z2: |A| = {}, class sizes {sizes:?}", a.len()));
    }
    let mut checked = 0;
    for spec in [
        "12", "8,3", "2^6", "4,2,5", "2^4,3", "4,2", "9", "6,6", "2,4,8", "3,3,3", "16,4",
    ] {
        let g: GroupSpec = spec.parse().unwrap();
        let mut subgroups = vec![brute_involutions(&g)];
        for x in 0..g.size() {
            subgroups.push(g.subgroup_closure(&[g.element_at(x)]).unwrap());
        }
        for h in subgroups {
            let sizes = restriction_classes(&g, &h);
            if sizes.len() != h.len() || sizes.iter().any(|&s| s * h.len() != g.size()) {
                return Err(format!("{spec}: |H| = {}, class sizes {sizes:?}", h.len()));
            }
            let lib = g.characters_by_restriction(&h);
            if lib.len() != sizes.len() {
                return Err(format!(
                    "{spec}: library found {} classes, oracle {}",
                    lib.len(),
                    sizes.len()
                ));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "Z4 x Z2: |A| = 4 with 2 extensions each; {checked} subgroups verified"
    ))
}

fn eigen_relation() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    let bases = [
        BaseDistribution::Gaussian,
        BaseDistribution::Rademacher,
        BaseDistribution::Uniform,
    ];
    for spec in [
        "12", "8,3", "2^6", "4,2,5", "2^4,3", "4,2", "9", "2^9", "3,2^7", "7,5,4", "512",
    ] {
        let g: GroupSpec = spec.parse().unwrap();
        for k in 0..20u64 {
            let c = cfg(
                bases[k as usize % 3],
                (k % 5) as f64 / 4.0,
                0.5 + (k % 3) as f64,
                k % 2 == 0,
                77 + k,
            );
            let t = sample_entries(&g, &c, k).unwrap();
            worst = worst.max(eigen_residual(&t).unwrap());
            count += 1;
        }
    }
    ensure(
        worst < 1e-9,
        format!("max residual {worst:.2e} over {count} ensembles"),
    )
}

fn gaussian_exactness() -> Outcome {
    let c = cfg(BaseDistribution::Gaussian, 0.0, 1.0, false, 1);
    let mut parts = Vec::new();
    let mut ok = true;
    for spec in ["4096", "2^12"] {
        let g: GroupSpec = spec.parse().unwrap();
        let r = distance_report(&c, &run_spectra(&g, &c, 20)).unwrap();
        ok &= r.pooled_ks_re < 0.01 && r.pooled_ks_im < 0.01 && r.per_trial_ks_median < 0.026;
        parts.push(format!(
            "{spec}: KS re {:.4} im {:.4} median {:.4}",
            r.pooled_ks_re, r.pooled_ks_im, r.per_trial_ks_median
        ));
    }
    ensure(ok, parts.join("; "))
}

fn hermitian_gaussian() -> Outcome {
    let g: GroupSpec = "4096".parse().unwrap();
    let tol = 1e-9 * (g.size() as f64).sqrt();
    let c = cfg(BaseDistribution::Gaussian, 0.0, 1.0, true, 1);
    let s = run_spectra(&g, &c, 20);
    let max_im = s.iter().map(Spectrum::max_abs_im).fold(0.0, f64::max);
    let pooled: Vec<f64> = s
        .iter()
        .flat_map(|x| x.eigenvalues().iter().map(|z| z.re))
        .collect();
    let ks = ks_distance_real(&pooled, &LimitLaw::gamma_real()).unwrap();
    let rc = cfg(BaseDistribution::Rademacher, 0.0, 1.0, true, 1);
    let rs = run_spectra(&g, &rc, 20);
    let rad_im = rs.iter().map(Spectrum::max_abs_im).fold(0.0, f64::max);
    let rpooled: Vec<f64> = rs
        .iter()
        .flat_map(|x| x.eigenvalues().iter().map(|z| z.re))
        .collect();
    let rks = ks_distance_real(&rpooled, &LimitLaw::gamma_real()).unwrap();
    ensure(
        max_im < tol && rad_im < tol && ks < 0.01 && rks < 0.02,
        format!("max |Im| {max_im:.2e}, gaussian KS {ks:.4}, rademacher KS {rks:.4}"),
    )
}

fn nonhermitian_mixture() -> Outcome {
    let g: GroupSpec = "4,2^9".parse().unwrap();
    let c = cfg(BaseDistribution::Rademacher, 1.0, 1.0, false, 1);
    let s = run_spectra(&g, &c, 40);
    // half gamma_C, half gamma_R: Re ~ N(0,1/2) or N(0,1); Im ~ N(0,1/2) or 0
    let re_law = LimitLaw::real_mixture(&[(0.5, 0.5), (0.5, 1.0)]).unwrap();
    let im_law = LimitLaw::real_mixture(&[(0.5, 0.5), (0.5, 0.0)]).unwrap();
    let re: Vec<f64> = s
        .iter()
        .flat_map(|x| x.eigenvalues().iter().map(|z| z.re))
        .collect();
    let im: Vec<f64> = s
        .iter()
        .flat_map(|x| x.eigenvalues().iter().map(|z| z.im))
        .collect();
    let (kr, ki) = (
        ks_distance_real(&re, &re_law).unwrap(),
        ks_distance_real(&im, &im_law).unwrap(),
    );
    let lib = limit_for(&c, g.p2()).unwrap();
    let consistent = (lib.re_marginal().cdf(0.7) - re_law.cdf(0.7)).abs() < 1e-12
        && (lib.im_marginal().cdf(0.3) - im_law.cdf(0.3)).abs() < 1e-12;
    ensure(
        kr < 0.02 && ki < 0.02 && consistent,
        format!(
            "p2 = {}, KS re {kr:.4} im {ki:.4}, library law consistent: {consistent}",
            g.p2()
        ),
    )
}

fn hermitian_mixture() -> Outcome {
    let g: GroupSpec = "3,2^10".parse().unwrap();
    let c = cfg(BaseDistribution::Rademacher, 1.0, 1.0, true, 1);
    let s = run_spectra(&g, &c, 40);
    let law = LimitLaw::real_mixture(&[(2.0 / 3.0, 2.0 / 3.0), (1.0 / 3.0, 5.0 / 3.0)]).unwrap();
    let xs: Vec<f64> = s
        .iter()
        .flat_map(|x| x.eigenvalues().iter().map(|z| z.re))
        .collect();
    let ks = ks_distance_real(&xs, &law).unwrap();
    let lib = limit_for(&c, g.p2()).unwrap();
    let consistent = [-1.5, -0.2, 0.4, 2.0]
        .iter()
        .all(|&x| (lib.cdf(x) - law.cdf(x)).abs() < 1e-12);
    ensure(
        ks < 0.02 && consistent,
        format!(
            "p2 = {}, KS {ks:.4}, library law consistent: {consistent}",
            g.p2()
        ),
    )
}

fn covariance_structure() -> Outcome {
    let g: GroupSpec = "4,2".parse().unwrap();
    let (alpha, beta) = (1.0, 1.0);
    let c = cfg(BaseDistribution::Rademacher, alpha, beta, true, 1);
    let s = run_spectra(&g, &c, 20_000);
    let a = brute_involutions(&g);
    let p2 = a.len() as f64 / g.size() as f64;
    let n = g.size();
    let conj = |chi: usize| {
        (0..n)
            .find(|&psi| {
                (0..n)
                    .all(|x| (brute_char(&g, psi, x) - brute_char(&g, chi, x).conj()).norm() < 1e-9)
            })
            .unwrap()
    };
    let same_on_a = |c1: usize, c2: usize| {
        a.iter()
            .all(|&x| (brute_char(&g, c1, x) - brute_char(&g, c2, x)).norm() < 1e-9)
    };
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for c1 in 0..n {
        for c2 in 0..n {
            let ind = |b: bool| if b { 1.0 } else { 0.0 };
            let predicted = if same_on_a(c1, c2) {
                ind(c1 == c2) + alpha * ind(c1 == conj(c2)) + p2 * (beta - alpha - 1.0)
            } else {
                ind(c1 == c2) + alpha * ind(c1 == conj(c2))
            };
            let emp: f64 = s
                .iter()
                .map(|x| (x.eigenvalues()[c1] * x.eigenvalues()[c2]).re)
                .sum::<f64>()
                / s.len() as f64;
            worst = worst.max((emp - predicted).abs());
            pairs += 1;
        }
    }
    ensure(
        worst < 0.05,
        format!("max |empirical - predicted| {worst:.4} over {pairs} pairs, 20000 trials"),
    )
}

fn norm_ratio() -> Outcome {
    let c = cfg(BaseDistribution::Gaussian, 0.0, 1.0, false, 1);
    let groups: Vec<GroupSpec> = ["256", "1024", "4096", "16384"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let curve = norm_ratio_curve(&c, &groups, 20).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, p) in groups.iter().zip(&curve) {
        let s = run_spectra(g, &c, 20);
        let direct = s
            .iter()
            .map(|x| {
                x.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
                    / (g.size() as f64).ln().sqrt()
            })
            .sum::<f64>()
            / 20.0;
        ok &= (0.8..=1.3).contains(&p.mean_ratio) && (direct - p.mean_ratio).abs() < 1e-12;
        parts.push(format!("N={} {:.4}", g.size(), p.mean_ratio));
    }
    ensure(ok, parts.join(", "))
}

fn lindeberg() -> Outcome {
    let g: GroupSpec = "4096".parse().unwrap();
    let mut rad_max = 0.0f64;
    for seed in 0..10 {
        for hermitian in [false, true] {
            let t = sample_entries(
                &g,
                &cfg(BaseDistribution::Rademacher, 0.0, 1.0, hermitian, seed),
                0,
            )
            .unwrap();
            rad_max = rad_max.max(lindeberg_statistic(&t, 0.5).unwrap());
        }
    }
    let below = (0..100)
        .filter(|&seed| {
            let t = sample_entries(
                &g,
                &cfg(BaseDistribution::Gaussian, 0.0, 1.0, false, seed),
                0,
            )
            .unwrap();
            lindeberg_statistic(&t, 1.0).unwrap() < 1e-6
        })
        .count();
    ensure(
        rad_max == 0.0 && below >= 95,
        format!("rademacher eps=0.5 max statistic {rad_max}; gaussian eps=1 below 1e-6 in {below}/100 seeds"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let c = cfg(BaseDistribution::Uniform, 0.4, 2.0, true, 99);
    let mut outputs = Vec::new();
    for jobs in [1, 3, 8] {
        let mut plan = ExperimentPlan::new(
            "3,2^6".parse().unwrap(),
            c.clone(),
            24,
            vec![Check::LimitDistance, Check::NormCurve, Check::Lindeberg],
        );
        plan.eigen_csv = Some(dir.path().join(format!("eig{jobs}.csv")));
        let r = run_experiment(&plan, jobs).map_err(|e| e.to_string())?;
        let csv = std::fs::read(plan.eigen_csv.as_ref().unwrap()).map_err(|e| e.to_string())?;
        outputs.push((
            r.to_json_without_timestamp().map_err(|e| e.to_string())?,
            csv,
        ));
    }
    ensure(
        outputs.windows(2).all(|w| w[0] == w[1]),
        "jobs 1, 3, 8 give identical reports and eigenvalue CSVs".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("transform oracle", transform_oracle),
        ("involutions equal real characters", involution_counts),
        ("restriction multiplicities", restriction_multiplicity),
        ("eigen-relation residual", eigen_relation),
        ("gaussian non-Hermitian exactness", gaussian_exactness),
        ("hermitian gaussian and rademacher", hermitian_gaussian),
        ("non-Hermitian alpha=1 mixture", nonhermitian_mixture),
        ("hermitian mixture at p=1/3", hermitian_mixture),
        ("eigenvalue covariance structure", covariance_structure),
        ("norm ratio band", norm_ratio),
        ("lindeberg diagnostic", lindeberg),
        ("determinism across jobs", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
