//! Reproducible experiments: sample trials, compute spectra, compare with
//! the limiting law and emit a JSON report.
//!
//! Trial `k` always uses stream `(seed, k)`, and per-trial results are
//! collected in trial order, so the report does not depend on how many
//! worker threads ran the trials. The only run-dependent field is
//! `timestamp`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{lindeberg_statistic, sample_entries, EnsembleConfig};
use crate::error::{Error, Result};
use crate::fourier::FftPlan;
use crate::group::GroupSpec;
use crate::limit_laws::{
    distance_report, empirical_eigen_covariance, predicted_covariance, DistanceReport, PairFlags,
    MIN_COVARIANCE_TRIALS,
};
use crate::selftest::{run_selftest, CheckOutcome, SelftestReport};
use crate::spectra::{eigenvalues_with, spectral_norm, Spectrum, SpectrumMeta};

/// Largest group on which the all-pairs covariance check runs.
pub const COVARIANCE_GROUP_CAP: usize = 64;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    LimitDistance,
    Covariance,
    NormCurve,
    Lindeberg,
    Selftest,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::LimitDistance,
        Check::Covariance,
        Check::NormCurve,
        Check::Lindeberg,
        Check::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::LimitDistance => "limit_distance",
            Check::Covariance => "covariance",
            Check::NormCurve => "norm_curve",
            Check::Lindeberg => "lindeberg",
            Check::Selftest => "selftest",
        }
    }

    /// Parses a comma-separated list such as `"limit_distance,lindeberg"`.
    pub fn parse_list(s: &str) -> Result<Vec<Check>> {
        let mut out: Vec<Check> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim().replace('-', "_"))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown check {s:?} (expected one of limit_distance, covariance, norm_curve, lindeberg, selftest)"
                ))
            })
    }
}

/// Pass/fail thresholds. Defaults follow the acceptance targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Pooled marginal KS distance, real and imaginary parts.
    pub pooled_ks_max: f64,
    /// Median over trials of the per-trial KS distance.
    pub per_trial_ks_median_max: f64,
    /// `|corr(Re, Im)|` of the pooled eigenvalues.
    pub corr_max: f64,
    /// Hermitian spectra must have `|Im lambda| <= hermitian_im_tol * sqrt(N)`.
    pub hermitian_im_tol: f64,
    /// Absolute tolerance on each predicted second moment.
    pub covariance_tol: f64,
    /// Band for the mean of `||M|| / sqrt(ln N)`.
    pub norm_ratio_min: f64,
    pub norm_ratio_max: f64,
    pub lindeberg_epsilon: f64,
    pub lindeberg_max: f64,
    /// Fraction of trials that must have a statistic below `lindeberg_max`.
    pub lindeberg_min_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pooled_ks_max: 0.02,
            per_trial_ks_median_max: 0.05,
            corr_max: 0.02,
            hermitian_im_tol: 1e-9,
            covariance_tol: 0.05,
            norm_ratio_min: 0.8,
            norm_ratio_max: 1.3,
            lindeberg_epsilon: 1.0,
            lindeberg_max: 1e-6,
            lindeberg_min_fraction: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub group: GroupSpec,
    /// Ensemble parameters; `ensemble.seed` is the master seed.
    pub ensemble: EnsembleConfig,
    pub trials: usize,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// JSON report destination.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Optional per-trial eigenvalue CSV.
    #[serde(default)]
    pub eigen_csv: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn new(
        group: GroupSpec,
        ensemble: EnsembleConfig,
        trials: usize,
        checks: Vec<Check>,
    ) -> Self {
        Self {
            group,
            ensemble,
            trials,
            checks,
            thresholds: Thresholds::default(),
            out: None,
            eigen_csv: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.checks.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one check is required (--checks limit_distance,...)".into(),
            ));
        }
        self.ensemble.validate()?;
        if self.checks.contains(&Check::Covariance) {
            if self.trials < MIN_COVARIANCE_TRIALS {
                return Err(Error::InvalidParameter(format!(
                    "the covariance check needs at least {MIN_COVARIANCE_TRIALS} trials, got {}",
                    self.trials
                )));
            }
            if self.group.size() > COVARIANCE_GROUP_CAP {
                return Err(Error::InvalidParameter(format!(
                    "the covariance check compares all character pairs and is limited to groups of size <= {COVARIANCE_GROUP_CAP}"
                )));
            }
        }
        if self.checks.contains(&Check::NormCurve) && self.group.size() < 2 {
            return Err(Error::InvalidParameter(
                "the norm check needs a group with at least 2 elements".into(),
            ));
        }
        let eps = self.thresholds.lindeberg_epsilon;
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidParameter(
                "lindeberg_epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupInfo {
    pub spec: String,
    pub size: usize,
    pub involution_count: usize,
    pub real_character_count: usize,
    pub p2: f64,
    pub p2_exact: String,
}

impl GroupInfo {
    pub fn of(g: &GroupSpec) -> Self {
        let p = g.p2();
        Self {
            spec: g.to_string(),
            size: g.size(),
            involution_count: g.involution_count(),
            real_character_count: g.real_character_count(),
            p2: *p.numer() as f64 / *p.denom() as f64,
            p2_exact: p.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub pairs_checked: usize,
    /// Largest deviation of an estimated moment from its prediction.
    pub max_deviation: f64,
    pub worst_pair: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub mean_ratio: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindebergCheck {
    pub epsilon: f64,
    pub max_statistic: f64,
    pub fraction_below: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub group: GroupInfo,
    pub ensemble: EnsembleConfig,
    pub trials: usize,
    pub checks_requested: Vec<Check>,
    pub thresholds: Thresholds,
    pub limit_distance: Option<DistanceReport>,
    pub covariance: Option<CovarianceCheck>,
    pub norm_curve: Option<NormCheck>,
    pub lindeberg: Option<LindebergCheck>,
    pub selftest: Option<SelftestReport>,
    pub outcomes: Vec<CheckOutcome>,
    pub passed: bool,
    /// Wall-clock seconds since the Unix epoch; excluded from comparisons.
    pub timestamp: String,
}

impl ExperimentReport {
    /// Pretty JSON with the timestamp blanked, for reproducibility checks.
    pub fn to_json_without_timestamp(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timestamp = String::new();
        Ok(serde_json::to_string_pretty(&copy)?)
    }
}

struct TrialResult {
    spectrum: Spectrum,
    lindeberg: Option<f64>,
}

fn run_trial(plan: &ExperimentPlan, fft: &FftPlan, trial: u64) -> Result<TrialResult> {
    let table = sample_entries(&plan.group, &plan.ensemble, trial)?;
    let lindeberg = if plan.checks.contains(&Check::Lindeberg) {
        Some(lindeberg_statistic(
            &table,
            plan.thresholds.lindeberg_epsilon,
        )?)
    } else {
        None
    };
    let spectrum = eigenvalues_with(fft, &table, &mut Vec::new())?.with_meta(SpectrumMeta {
        config_hash: plan.ensemble.stable_hash(),
        seed: plan.ensemble.seed,
        trial,
    });
    Ok(TrialResult {
        spectrum,
        lindeberg,
    })
}

/// Runs every trial of `plan` on `jobs` worker threads (0 = rayon default)
/// and evaluates the requested checks. Writes the report and CSV when the
/// plan names output paths.
pub fn run_experiment(plan: &ExperimentPlan, jobs: usize) -> Result<ExperimentReport> {
    plan.validate()?;
    let fft = FftPlan::new(&plan.group);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        (0..plan.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(plan, &fft, t))
            .collect::<Result<_>>()
    })?;
    let spectra: Vec<Spectrum> = results.iter().map(|r| r.spectrum.clone()).collect();
    let th = &plan.thresholds;
    let n = plan.group.size();
    let mut outcomes = Vec::new();

    let mut report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        group: GroupInfo::of(&plan.group),
        ensemble: plan.ensemble.clone(),
        trials: plan.trials,
        checks_requested: plan.checks.clone(),
        thresholds: th.clone(),
        limit_distance: None,
        covariance: None,
        norm_curve: None,
        lindeberg: None,
        selftest: None,
        outcomes: Vec::new(),
        passed: false,
        timestamp: String::new(),
    };

    for &check in &plan.checks {
        match check {
            Check::LimitDistance => {
                let d = distance_report(&plan.ensemble, &spectra)?;
                let mut ok = d.pooled_ks_re <= th.pooled_ks_max
                    && d.pooled_ks_im <= th.pooled_ks_max
                    && d.per_trial_ks_median <= th.per_trial_ks_median_max
                    && d.corr_re_im.is_none_or(|c| c <= th.corr_max);
                if plan.ensemble.hermitian {
                    ok &= d.max_abs_im <= th.hermitian_im_tol * (n as f64).sqrt();
                }
                outcomes.push(CheckOutcome::new(
                    check.name(),
                    ok,
                    format!(
                        "pooled KS re {:.4} im {:.4}, per-trial median {:.4}, corr {:?}, max |Im| {:.2e}",
                        d.pooled_ks_re, d.pooled_ks_im, d.per_trial_ks_median, d.corr_re_im, d.max_abs_im
                    ),
                ));
                report.limit_distance = Some(d);
            }
            Check::Covariance => {
                let c = covariance_check(plan, &spectra)?;
                outcomes.push(CheckOutcome::new(
                    check.name(),
                    c.max_deviation <= th.covariance_tol,
                    format!(
                        "max deviation {:.4} at characters {:?} over {} pairs",
                        c.max_deviation, c.worst_pair, c.pairs_checked
                    ),
                ));
                report.covariance = Some(c);
            }
            Check::NormCurve => {
                let denom = (n as f64).ln().sqrt();
                let ratios: Vec<f64> = spectra.iter().map(|s| spectral_norm(s) / denom).collect();
                let (mean_ratio, std_err) = crate::spectra::mean_and_se(&ratios);
                outcomes.push(CheckOutcome::new(
                    check.name(),
                    (th.norm_ratio_min..=th.norm_ratio_max).contains(&mean_ratio),
                    format!("mean ||M||/sqrt(ln N) = {mean_ratio:.4}"),
                ));
                report.norm_curve = Some(NormCheck {
                    mean_ratio,
                    std_err,
                });
            }
            Check::Lindeberg => {
                let stats: Vec<f64> = results.iter().filter_map(|r| r.lindeberg).collect();
                let below = stats.iter().filter(|&&s| s < th.lindeberg_max).count();
                let fraction_below = below as f64 / stats.len() as f64;
                let max_statistic = stats.iter().copied().fold(0.0, f64::max);
                outcomes.push(CheckOutcome::new(
                    check.name(),
                    fraction_below >= th.lindeberg_min_fraction,
                    format!(
                        "{below}/{} trials below {:e}",
                        stats.len(),
                        th.lindeberg_max
                    ),
                ));
                report.lindeberg = Some(LindebergCheck {
                    epsilon: th.lindeberg_epsilon,
                    max_statistic,
                    fraction_below,
                });
            }
            Check::Selftest => {
                let s = run_selftest();
                let failed = s.checks.iter().filter(|c| !c.passed).count();
                outcomes.push(CheckOutcome::new(
                    check.name(),
                    s.passed,
                    format!("{failed} of {} self-checks failed", s.checks.len()),
                ));
                report.selftest = Some(s);
            }
        }
    }

    report.passed = outcomes.iter().all(|o| o.passed);
    report.outcomes = outcomes;
    report.timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default();

    if let Some(path) = &plan.out {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    if let Some(path) = &plan.eigen_csv {
        write_eigen_csv(BufWriter::new(File::create(path)?), &spectra)?;
    }
    Ok(report)
}

fn covariance_check(plan: &ExperimentPlan, spectra: &[Spectrum]) -> Result<CovarianceCheck> {
    let g = &plan.group;
    let n = g.size();
    let p = g.p2();
    let p2 = *p.numer() as f64 / *p.denom() as f64;
    let cfg = &plan.ensemble;
    let mut worst = (0.0f64, (0, 0));
    let mut pairs = 0;
    for chi1 in 0..n {
        for chi2 in chi1..n {
            let flags = (chi1 != chi2).then(|| PairFlags::between(g, chi1, chi2));
            let pred = predicted_covariance(
                g.is_real_character_index(chi1),
                flags,
                cfg.alpha,
                cfg.beta,
                p2,
                cfg.hermitian,
            );
            let emp = empirical_eigen_covariance(spectra, chi1, chi2)?;
            let dev = (emp.pseudo - pred.pseudo)
                .norm()
                .max((emp.hermitian - pred.hermitian).norm());
            if dev > worst.0 {
                worst = (dev, (chi1, chi2));
            }
            pairs += 1;
        }
    }
    Ok(CovarianceCheck {
        pairs_checked: pairs,
        max_deviation: worst.0,
        worst_pair: worst.1,
    })
}

#[derive(Serialize)]
struct EigenRow {
    trial: u64,
    character_index: usize,
    re_lambda: f64,
    im_lambda: f64,
    is_real_character: bool,
}

/// Per-trial eigenvalues as `trial,character_index,re_lambda,im_lambda,is_real_character`.
pub fn write_eigen_csv<W: Write>(w: W, spectra: &[Spectrum]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (k, s) in spectra.iter().enumerate() {
        let trial = s.meta().map_or(k as u64, |m| m.trial);
        for row in s.csv_rows() {
            out.serialize(EigenRow {
                trial,
                character_index: row.character_index,
                re_lambda: row.re_lambda,
                im_lambda: row.im_lambda,
                is_real_character: row.is_real_character,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// All eigenvalues of `spectra`, concatenated in trial order.
pub fn pooled_eigenvalues(spectra: &[Spectrum]) -> Vec<Complex64> {
    spectra
        .iter()
        .flat_map(|s| s.eigenvalues().iter().copied())
        .collect()
}
