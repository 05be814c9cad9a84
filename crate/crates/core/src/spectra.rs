//! Eigenvalues of random G-circulant matrices.
//!
//! For `M = [Y_{a b^-1} / sqrt(N)]`, every character is an eigenvector:
//! `M conj(chi) = lambda_chi conj(chi)` with
//! `lambda_chi = N^{-1/2} sum_a Y_a chi(a)`. The fast path is therefore a
//! single forward transform; [`dense_matrix`] and [`eigen_residual`]
//! check the relation directly for small groups.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_entries, EnsembleConfig, EntryTable};
use crate::error::{Error, Result};
use crate::fourier::FftPlan;
use crate::group::GroupSpec;

/// Largest group for which the dense oracle is built.
pub const DENSE_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub config_hash: u64,
    pub seed: u64,
    pub trial: u64,
}

/// The `N` eigenvalues `lambda_chi`, stored in character-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    group: GroupSpec,
    eigenvalues: Vec<Complex64>,
    hermitian: bool,
    meta: Option<SpectrumMeta>,
}

impl Spectrum {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Whether the source table carried the Hermitian constraint.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn meta(&self) -> Option<&SpectrumMeta> {
        self.meta.as_ref()
    }

    pub fn with_meta(mut self, meta: SpectrumMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn max_abs_im(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.im.abs())
            .fold(0.0, f64::max)
    }

    /// Writes `character_index,re_lambda,im_lambda,is_real_character` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.csv_rows() {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub(crate) fn csv_rows(&self) -> impl Iterator<Item = SpectrumRow> + '_ {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, l)| SpectrumRow {
                character_index: i,
                re_lambda: l.re,
                im_lambda: l.im,
                is_real_character: self.group.is_real_character_index(i),
            })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct SpectrumRow {
    pub character_index: usize,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub is_real_character: bool,
}

/// `lambda_chi = N^{-1/2} fft(Y)(chi)` for every character.
pub fn eigenvalues(t: &EntryTable) -> Spectrum {
    eigenvalues_with(&FftPlan::new(t.group()), t, &mut Vec::new())
        .expect("plan built for this group")
}

/// Like [`eigenvalues`] but reuses a plan and scratch buffer.
pub fn eigenvalues_with(
    plan: &FftPlan,
    t: &EntryTable,
    scratch: &mut Vec<Complex64>,
) -> Result<Spectrum> {
    if plan.group() != t.group() {
        return Err(Error::GroupMismatch);
    }
    let mut values = t.entries().to_vec();
    plan.forward_in_place(&mut values, scratch);
    let scale = 1.0 / (values.len() as f64).sqrt();
    for v in &mut values {
        *v *= scale;
    }
    Ok(Spectrum {
        group: t.group().clone(),
        eigenvalues: values,
        hermitian: t.is_hermitian(),
        meta: None,
    })
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    /// Exact (bitwise up to signed zero) equality with the conjugate transpose.
    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }
}

fn check_dense_cap(g: &GroupSpec) -> Result<()> {
    if g.size() > DENSE_CAP {
        return Err(Error::SizeCapExceeded {
            size: g.size(),
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

/// `M[a][b] = Y_{a b^-1} / sqrt(N)`.
pub fn dense_matrix(t: &EntryTable) -> Result<DenseMatrix> {
    let g = t.group();
    check_dense_cap(g)?;
    let n = g.size();
    let scale = 1.0 / (n as f64).sqrt();
    let y = t.entries();
    let mut data = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            data.push(y[g.div_index(a, b)] * scale);
        }
    }
    Ok(DenseMatrix { n, data })
}

/// `max_chi ||M conj(chi) - lambda_chi conj(chi)|| / sqrt(N)`, with
/// `lambda_chi` taken from the fast path.
pub fn eigen_residual(t: &EntryTable) -> Result<f64> {
    let m = dense_matrix(t)?;
    let spec = eigenvalues(t);
    let g = t.group();
    let n = g.size();
    let mut worst: f64 = 0.0;
    for chi in 0..n {
        let v: Vec<Complex64> = (0..n).map(|a| g.char_value_index(chi, a).conj()).collect();
        let mv = m.mul_vec(&v);
        let lambda = spec.eigenvalues[chi];
        let err: f64 = mv
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err / (n as f64).sqrt());
    }
    Ok(worst)
}

/// Operator norm of the (normal) matrix: `max_chi |lambda_chi|`.
pub fn spectral_norm(s: &Spectrum) -> f64 {
    s.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRatioPoint {
    pub group: String,
    pub size: usize,
    pub trials: usize,
    /// Monte Carlo mean of `||M|| / sqrt(ln N)`.
    pub mean_ratio: f64,
    pub std_err: f64,
}

/// Mean of `||M|| / sqrt(ln N)` over `trials` samples for each group.
pub fn norm_ratio_curve(
    cfg: &EnsembleConfig,
    groups: &[GroupSpec],
    trials: usize,
) -> Result<Vec<NormRatioPoint>> {
    if trials < 10 {
        return Err(Error::InsufficientTrials {
            needed: 10,
            got: trials,
        });
    }
    groups
        .iter()
        .map(|g| {
            if g.size() < 2 {
                return Err(Error::InvalidParameter(
                    "norm ratio needs a group with at least 2 elements".into(),
                ));
            }
            let plan = FftPlan::new(g);
            let mut scratch = Vec::new();
            let denom = (g.size() as f64).ln().sqrt();
            let mut ratios = Vec::with_capacity(trials);
            for trial in 0..trials as u64 {
                let t = sample_entries(g, cfg, trial)?;
                let s = eigenvalues_with(&plan, &t, &mut scratch)?;
                ratios.push(spectral_norm(&s) / denom);
            }
            let (mean, se) = mean_and_se(&ratios);
            Ok(NormRatioPoint {
                group: g.to_string(),
                size: g.size(),
                trials,
                mean_ratio: mean,
                std_err: se,
            })
        })
        .collect()
}

pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
