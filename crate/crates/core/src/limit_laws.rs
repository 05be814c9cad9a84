//! Limiting spectral laws, predicted eigenvalue covariances and
//! distances between empirical spectra and their limits.
//!
//! Weak convergence is measured through marginal Kolmogorov-Smirnov
//! distances of the real and imaginary parts plus the empirical
//! correlation of `(Re, Im)`. Every limit here is a mixture of centered
//! Gaussians with diagonal covariance, so those three numbers pin it down
//! in practice.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleConfig;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::special::normal_cdf;
use crate::spectra::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    ComplexGaussianMixture,
    RealGaussianMixture,
}

/// One centered Gaussian with covariance `diag(var_re, var_im)` on `R^2`.
/// A zero variance is a point mass at 0 in that coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub var_re: f64,
    pub var_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub kind: LawKind,
    pub components: Vec<MixtureComponent>,
}

impl LimitLaw {
    /// Real mixture `sum_c w_c N(0, v_c)` from `(weight, variance)` pairs.
    pub fn real_mixture(parts: &[(f64, f64)]) -> Result<Self> {
        let comps = parts
            .iter()
            .map(|&(weight, var)| MixtureComponent {
                weight,
                var_re: var,
                var_im: 0.0,
            })
            .collect();
        Self::build(LawKind::RealGaussianMixture, comps)
    }

    /// Complex mixture `sum_c w_c gamma_{alpha_c}` from `(weight, alpha)` pairs,
    /// where `gamma_alpha` has covariance `diag(1 + alpha, 1 - alpha) / 2`.
    pub fn complex_mixture(parts: &[(f64, f64)]) -> Result<Self> {
        for &(_, a) in parts {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!("alpha {a} outside [0, 1]")));
            }
        }
        let comps = parts
            .iter()
            .map(|&(weight, a)| MixtureComponent {
                weight,
                var_re: (1.0 + a) / 2.0,
                var_im: (1.0 - a) / 2.0,
            })
            .collect();
        Self::build(LawKind::ComplexGaussianMixture, comps)
    }

    /// Standard real Gaussian.
    pub fn gamma_real() -> Self {
        Self::real_mixture(&[(1.0, 1.0)]).expect("valid law")
    }

    /// Standard complex Gaussian, `E|Z|^2 = 1`.
    pub fn gamma_complex() -> Self {
        Self::complex_mixture(&[(1.0, 0.0)]).expect("valid law")
    }

    fn build(kind: LawKind, comps: Vec<MixtureComponent>) -> Result<Self> {
        let mut merged: Vec<MixtureComponent> = Vec::new();
        for c in comps {
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::InvalidParameter(format!(
                    "weight {} outside [0, 1]",
                    c.weight
                )));
            }
            if !(c.var_re >= 0.0 && c.var_im >= 0.0) {
                return Err(Error::InvalidParameter(
                    "variances must be nonnegative".into(),
                ));
            }
            if c.weight == 0.0 {
                continue;
            }
            match merged
                .iter_mut()
                .find(|m| m.var_re == c.var_re && m.var_im == c.var_im)
            {
                Some(m) => m.weight += c.weight,
                None => merged.push(c),
            }
        }
        let total: f64 = merged.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            kind,
            components: merged,
        })
    }

    pub fn is_real(&self) -> bool {
        self.kind == LawKind::RealGaussianMixture
    }

    /// Law of the real part, as a real mixture.
    pub fn re_marginal(&self) -> LimitLaw {
        let parts: Vec<(f64, f64)> = self
            .components
            .iter()
            .map(|c| (c.weight, c.var_re))
            .collect();
        Self::real_mixture(&parts).expect("marginal of a valid law")
    }

    /// Law of the imaginary part (a point mass at 0 for real laws).
    pub fn im_marginal(&self) -> LimitLaw {
        let parts: Vec<(f64, f64)> = self
            .components
            .iter()
            .map(|c| (c.weight, c.var_im))
            .collect();
        Self::real_mixture(&parts).expect("marginal of a valid law")
    }

    /// `(E Re^2, E Im^2)`.
    pub fn second_moments(&self) -> (f64, f64) {
        self.components.iter().fold((0.0, 0.0), |(r, i), c| {
            (r + c.weight * c.var_re, i + c.weight * c.var_im)
        })
    }

    /// CDF of the real-part marginal, `sum_c w_c Phi(x / sqrt(v_c))`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * component_cdf(x, c.var_re, false))
            .sum::<f64>()
            .min(1.0)
    }

    /// Left limit `P(X < x)` of [`LimitLaw::cdf`].
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * component_cdf(x, c.var_re, true))
            .sum::<f64>()
            .min(1.0)
    }
}

fn component_cdf(x: f64, var: f64, left: bool) -> f64 {
    if var == 0.0 {
        let hit = if left { x > 0.0 } else { x >= 0.0 };
        return if hit { 1.0 } else { 0.0 };
    }
    normal_cdf(x / var.sqrt())
}

/// Limit of the empirical spectral measure for `cfg` on groups whose
/// involution fraction is `p`.
///
/// Non-Hermitian: `(1 - p) gamma_C + p gamma_alpha`. Hermitian with
/// `p < 1`: `(1 - p) N(0, 1 + p s) + p N(0, 1 + alpha + p s)` where
/// `s = beta - alpha - 1`; Hermitian with `p = 1`: `N(0, beta)`.
pub fn limit_for(cfg: &EnsembleConfig, p: Ratio<u64>) -> Result<LimitLaw> {
    cfg.validate()?;
    if *p.denom() == 0 || p > Ratio::from_integer(1) {
        return Err(Error::InvalidParameter(format!(
            "involution fraction {p} outside [0, 1]"
        )));
    }
    let pf = *p.numer() as f64 / *p.denom() as f64;
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    if !cfg.hermitian {
        return LimitLaw::complex_mixture(&[(1.0 - pf, 0.0), (pf, alpha)]);
    }
    if p == Ratio::from_integer(1) {
        return LimitLaw::real_mixture(&[(1.0, beta)]);
    }
    if p > Ratio::new(1, 2) {
        return Err(Error::ImpossibleInvolutionFraction(pf));
    }
    let shift = pf * (beta - alpha - 1.0);
    LimitLaw::real_mixture(&[(1.0 - pf, 1.0 + shift), (pf, 1.0 + alpha + shift)])
}

/// How a second character relates to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlags {
    pub chi2_real: bool,
    /// `chi1 = chi2`.
    pub equal: bool,
    /// `chi1 = conj(chi2)`.
    pub conjugate: bool,
    /// `chi1` and `chi2` agree on the involution subgroup.
    pub same_restriction: bool,
}

impl PairFlags {
    pub fn between(g: &GroupSpec, chi1: usize, chi2: usize) -> Self {
        Self {
            chi2_real: g.is_real_character_index(chi2),
            equal: chi1 == chi2,
            conjugate: chi1 == g.conjugate_character_index(chi2),
            same_restriction: g.same_restriction_to_involutions(chi1, chi2),
        }
    }
}

/// Second moments of `(Re l1, Im l1)` or `(Re l1, Im l1, Re l2, Im l2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedCovariance {
    pub dim: usize,
    /// Row-major `dim x dim`.
    pub matrix: Vec<f64>,
    /// `E l1 l2` (or `E l1^2`).
    pub pseudo: Complex64,
    /// `E l1 conj(l2)` (or `E |l1|^2`).
    pub hermitian: Complex64,
}

impl PredictedCovariance {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Positive semidefiniteness via an `LDL^T` sweep that tolerates zero pivots.
    pub fn is_psd(&self, tol: f64) -> bool {
        let n = self.dim;
        let mut a = self.matrix.clone();
        for k in 0..n {
            let pivot = a[k * n + k];
            if pivot < -tol {
                return false;
            }
            if pivot <= tol {
                if (k + 1..n).any(|i| a[i * n + k].abs() > tol) {
                    return false;
                }
                continue;
            }
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        true
    }
}

/// Predicted second moments of eigenvalues.
///
/// With `chi2 = None` the result is the 2x2 covariance of
/// `(Re l_chi, Im l_chi)`: `(I + 1{chi real} diag(alpha, -alpha)) / 2` in
/// the non-Hermitian case and `diag(1 + alpha 1{chi real} + p2 s, 0)` with
/// `s = beta - alpha - 1` in the Hermitian case. With a second character
/// the 4x4 joint matrix is returned, built from
/// `E l1 conj(l2) = 1{chi1 = chi2}`, `E l1 l2 = alpha 1{chi1 = conj chi2}`
/// (non-Hermitian) or
/// `E l1 l2 = 1{chi1 = chi2} + alpha 1{chi1 = conj chi2} + p2 s 1{chi1|A = chi2|A}`
/// (Hermitian).
pub fn predicted_covariance(
    chi1_real: bool,
    chi2: Option<PairFlags>,
    alpha: f64,
    beta: f64,
    p2: f64,
    hermitian: bool,
) -> PredictedCovariance {
    let self_flags = PairFlags {
        chi2_real: chi1_real,
        equal: true,
        conjugate: chi1_real,
        same_restriction: true,
    };
    let moments = |f: &PairFlags| -> (Complex64, Complex64) {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        if hermitian {
            let v = ind(f.equal)
                + alpha * ind(f.conjugate)
                + p2 * (beta - alpha - 1.0) * ind(f.same_restriction);
            (Complex64::new(v, 0.0), Complex64::new(v, 0.0))
        } else {
            (
                Complex64::new(alpha * ind(f.conjugate), 0.0),
                Complex64::new(ind(f.equal), 0.0),
            )
        }
    };
    // real 2x2 block of E[(Re a, Im a)^T (Re b, Im b)] from P = E ab, C = E a conj(b)
    let block = |p: Complex64, c: Complex64| -> [[f64; 2]; 2] {
        [
            [0.5 * (p + c).re, 0.5 * (p - c).im],
            [0.5 * (p - c.conj()).im, 0.5 * (c - p).re],
        ]
    };
    let (p11, c11) = moments(&self_flags);
    match chi2 {
        None => {
            let b = block(p11, c11);
            PredictedCovariance {
                dim: 2,
                matrix: vec![b[0][0], b[0][1], b[1][0], b[1][1]],
                pseudo: p11,
                hermitian: c11,
            }
        }
        Some(f) => {
            let (p12, c12) = moments(&f);
            let (p22, c22) = moments(&PairFlags {
                chi2_real: f.chi2_real,
                equal: true,
                conjugate: f.chi2_real,
                same_restriction: true,
            });
            let b11 = block(p11, c11);
            let b12 = block(p12, c12);
            let b21 = block(p12, c12.conj());
            let b22 = block(p22, c22);
            let mut m = vec![0.0; 16];
            for i in 0..2 {
                for j in 0..2 {
                    m[i * 4 + j] = b11[i][j];
                    m[i * 4 + j + 2] = b12[i][j];
                    m[(i + 2) * 4 + j] = b21[i][j];
                    m[(i + 2) * 4 + j + 2] = b22[i][j];
                }
            }
            PredictedCovariance {
                dim: 4,
                matrix: m,
                pseudo: p12,
                hermitian: c12,
            }
        }
    }
}

/// Kolmogorov-Smirnov distance between the ECDF of `samples` and a real law.
/// Ties and point masses are handled exactly.
pub fn ks_distance_real(samples: &[f64], law: &LimitLaw) -> Result<f64> {
    if !law.is_real() {
        return Err(Error::InvalidParameter("expected a real law".into()));
    }
    ks_against(samples, law)
}

fn ks_against(samples: &[f64], law: &LimitLaw) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        d = d
            .max((j as f64 / n - law.cdf(v)).abs())
            .max((i as f64 / n - law.cdf_left(v)).abs());
        i = j;
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDistance {
    pub ks_re: f64,
    pub ks_im: f64,
    /// `|corr(Re, Im)|`; `None` when either part has zero variance.
    pub corr_re_im: Option<f64>,
}

/// Marginal KS distances and `(Re, Im)` correlation against a complex law.
pub fn distance_complex(samples: &[Complex64], law: &LimitLaw) -> Result<ComplexDistance> {
    if law.is_real() {
        return Err(Error::InvalidParameter("expected a complex law".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    Ok(ComplexDistance {
        ks_re: ks_against(&re, &law.re_marginal())?,
        ks_im: ks_against(&im, &law.im_marginal())?,
        corr_re_im: abs_correlation(&re, &im),
    })
}

pub(crate) fn abs_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).abs())
}

/// Monte Carlo second moments of `(Re l1, Im l1[, Re l2, Im l2])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalCovariance {
    pub trials: usize,
    pub dim: usize,
    pub matrix: Vec<f64>,
    pub std_errs: Vec<f64>,
    /// Estimate of `E l1 l2`.
    pub pseudo: Complex64,
    pub pseudo_se: f64,
    /// Estimate of `E l1 conj(l2)`.
    pub hermitian: Complex64,
    pub hermitian_se: f64,
}

impl EmpiricalCovariance {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }
}

pub const MIN_COVARIANCE_TRIALS: usize = 1000;

/// Uncentered second moments of the eigenvalues at characters `chi1`, `chi2`
/// across independent spectra.
pub fn empirical_eigen_covariance(
    spectra: &[Spectrum],
    chi1: usize,
    chi2: usize,
) -> Result<EmpiricalCovariance> {
    if spectra.len() < MIN_COVARIANCE_TRIALS {
        return Err(Error::InsufficientTrials {
            needed: MIN_COVARIANCE_TRIALS,
            got: spectra.len(),
        });
    }
    let n = spectra[0].group().size();
    if chi1 >= n || chi2 >= n {
        return Err(Error::InvalidParameter(format!(
            "character index out of range for size {n}"
        )));
    }
    if spectra.iter().any(|s| s.group() != spectra[0].group()) {
        return Err(Error::GroupMismatch);
    }
    let dim = if chi1 == chi2 { 2 } else { 4 };
    let rows: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| {
            let (a, b) = (s.eigenvalues()[chi1], s.eigenvalues()[chi2]);
            if dim == 2 {
                vec![a.re, a.im]
            } else {
                vec![a.re, a.im, b.re, b.im]
            }
        })
        .collect();
    let mut matrix = vec![0.0; dim * dim];
    let mut std_errs = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let prods: Vec<f64> = rows.iter().map(|r| r[i] * r[j]).collect();
            let (m, se) = crate::spectra::mean_and_se(&prods);
            matrix[i * dim + j] = m;
            std_errs[i * dim + j] = se;
        }
    }
    let pairs: Vec<(Complex64, Complex64)> = spectra
        .iter()
        .map(|s| {
            let (a, b) = (s.eigenvalues()[chi1], s.eigenvalues()[chi2]);
            (a * b, a * b.conj())
        })
        .collect();
    let (pseudo, pseudo_se) = complex_mean_se(pairs.iter().map(|p| p.0));
    let (hermitian, hermitian_se) = complex_mean_se(pairs.iter().map(|p| p.1));
    Ok(EmpiricalCovariance {
        trials: spectra.len(),
        dim,
        matrix,
        std_errs,
        pseudo,
        pseudo_se,
        hermitian,
        hermitian_se,
    })
}

fn complex_mean_se(it: impl Iterator<Item = Complex64> + Clone) -> (Complex64, f64) {
    let re: Vec<f64> = it.clone().map(|z| z.re).collect();
    let im: Vec<f64> = it.map(|z| z.im).collect();
    let (mr, sr) = crate::spectra::mean_and_se(&re);
    let (mi, si) = crate::spectra::mean_and_se(&im);
    (Complex64::new(mr, mi), sr.max(si))
}

/// Distance of a batch of spectra from the limit for their group and ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub group: String,
    pub ensemble: EnsembleConfig,
    pub trials: usize,
    pub pooled_ks_re: f64,
    pub pooled_ks_im: f64,
    /// Median over trials of the per-trial KS distance (the larger of the two
    /// marginals for complex laws).
    pub per_trial_ks_median: f64,
    pub corr_re_im: Option<f64>,
    pub p2: f64,
    pub p2_exact: String,
    pub limit_params: LimitLaw,
    /// Largest `|Im lambda|` over all spectra.
    pub max_abs_im: f64,
}

/// Imaginary parts at or below `1e-9 sqrt(N)` count as exactly zero for
/// Hermitian spectra.
pub const HERMITIAN_IM_TOL: f64 = 1e-9;

/// Pools all eigenvalues (estimating the mean measure) and also measures
/// each trial separately.
pub fn distance_report(cfg: &EnsembleConfig, spectra: &[Spectrum]) -> Result<DistanceReport> {
    let first = spectra.first().ok_or(Error::EmptySample)?;
    let g = first.group();
    if spectra.iter().any(|s| s.group() != g) {
        return Err(Error::GroupMismatch);
    }
    let p = g.p2();
    let law = limit_for(cfg, p)?;
    let re_law = law.re_marginal();
    let im_law = law.im_marginal();
    let im_tol = HERMITIAN_IM_TOL * (g.size() as f64).sqrt();
    let snap = |z: &Complex64| {
        if cfg.hermitian && z.im.abs() <= im_tol {
            0.0
        } else {
            z.im
        }
    };
    let mut per_trial = Vec::with_capacity(spectra.len());
    let mut pooled_re = Vec::new();
    let mut pooled_im = Vec::new();
    for s in spectra {
        let re: Vec<f64> = s.eigenvalues().iter().map(|z| z.re).collect();
        let im: Vec<f64> = s.eigenvalues().iter().map(snap).collect();
        let ks_re = ks_against(&re, &re_law)?;
        let ks = if law.is_real() {
            ks_re
        } else {
            ks_re.max(ks_against(&im, &im_law)?)
        };
        per_trial.push(ks);
        pooled_re.extend(re);
        pooled_im.extend(im);
    }
    per_trial.sort_by(f64::total_cmp);
    let median = if per_trial.len() % 2 == 1 {
        per_trial[per_trial.len() / 2]
    } else {
        let k = per_trial.len() / 2;
        0.5 * (per_trial[k - 1] + per_trial[k])
    };
    Ok(DistanceReport {
        group: g.to_string(),
        ensemble: cfg.clone(),
        trials: spectra.len(),
        pooled_ks_re: ks_against(&pooled_re, &re_law)?,
        pooled_ks_im: ks_against(&pooled_im, &im_law)?,
        per_trial_ks_median: median,
        corr_re_im: abs_correlation(&pooled_re, &pooled_im),
        p2: *p.numer() as f64 / *p.denom() as f64,
        p2_exact: p.to_string(),
        limit_params: law,
        max_abs_im: spectra.iter().map(|s| s.max_abs_im()).fold(0.0, f64::max),
    })
}
