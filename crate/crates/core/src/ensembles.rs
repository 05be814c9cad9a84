//! Random entry families `{Y_a}` for G-circulant ensembles.
//!
//! Pair entries are `Y = s1 X1 + i s2 X2` with `s1 = sqrt((1 + alpha) / 2)`
//! and `s2 = sqrt((1 - alpha) / 2)`, where `X1, X2` are independent
//! standardized base draws. This gives `E|Y|^2 = 1` and `E Y^2 = alpha`.
//! Under the Hermitian constraint each involution gets a real entry
//! `sqrt(beta) X`, and each pair `{a, a^-1}` is drawn once at the smaller
//! index and mirrored as the conjugate.
//!
//! # Random streams
//!
//! Every draw comes from a ChaCha8 stream addressed by
//! `(seed, trial, element)`: the 256-bit key is four successive outputs of
//! SplitMix64 started at `seed ^ (trial * 0x9E37_79B9_7F4A_7C15)` and the
//! element index selects the ChaCha stream. Sampling is therefore
//! independent of iteration order and of thread count.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseDistribution {
    Gaussian,
    /// +1 or -1 with probability 1/2.
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

impl BaseDistribution {
    /// One draw with mean 0 and variance 1.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            BaseDistribution::Gaussian => rng.sample(StandardNormal),
            BaseDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BaseDistribution::Uniform => {
                let h = 3f64.sqrt();
                rng.random_range(-h..h)
            }
        }
    }
}

impl fmt::Display for BaseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseDistribution::Gaussian => "gaussian",
            BaseDistribution::Rademacher => "rademacher",
            BaseDistribution::Uniform => "uniform",
        })
    }
}

impl FromStr for BaseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown base distribution {other:?} (expected gaussian, rademacher or uniform)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub base: BaseDistribution,
    /// `E Y^2` for pair entries, in `[0, 1]`.
    pub alpha: f64,
    /// Variance of involution entries; only used when `hermitian`.
    pub beta: f64,
    pub hermitian: bool,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            base: BaseDistribution::Gaussian,
            alpha: 0.0,
            beta: 1.0,
            hermitian: false,
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn new(
        base: BaseDistribution,
        alpha: f64,
        beta: f64,
        hermitian: bool,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            base,
            alpha,
            beta,
            hermitian,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// FNV-1a over a canonical rendering of every field.
    pub fn stable_hash(&self) -> u64 {
        let text = format!(
            "{}|{:016x}|{:016x}|{}|{}",
            self.base,
            self.alpha.to_bits(),
            self.beta.to_bits(),
            self.hermitian,
            self.seed
        );
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    fn pair_scales(&self) -> (f64, f64) {
        (
            ((1.0 + self.alpha) / 2.0).sqrt(),
            ((1.0 - self.alpha) / 2.0).sqrt(),
        )
    }

    fn pair_entry(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let (s1, s2) = self.pair_scales();
        let x1 = self.base.draw(rng);
        let x2 = self.base.draw(rng);
        let im = if s2 == 0.0 { 0.0 } else { s2 * x2 };
        Complex64::new(s1 * x1, im)
    }

    fn involution_entry(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(self.beta.sqrt() * self.base.draw(rng), 0.0)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one `(seed, trial)` pair; clone it and call
/// [`EntryStreams::for_element`] for each element.
#[derive(Clone, Debug)]
pub struct EntryStreams {
    base: ChaCha8Rng,
}

impl EntryStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut state = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            base: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn for_element(&self, element: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(element);
        rng.set_word_pos(0);
        rng
    }
}

/// A sampled family `{Y_a}` indexed by element index.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryTable {
    group: GroupSpec,
    entries: Vec<Complex64>,
    hermitian: bool,
}

impl EntryTable {
    /// Wraps explicit entries. With `hermitian`, the conjugate-pair and
    /// real-involution constraints are checked exactly.
    pub fn from_entries(
        group: GroupSpec,
        entries: Vec<Complex64>,
        hermitian: bool,
    ) -> Result<Self> {
        if entries.len() != group.size() {
            return Err(Error::LengthMismatch {
                expected: group.size(),
                got: entries.len(),
            });
        }
        if hermitian {
            for a in 0..group.size() {
                if entries[group.inv_index(a)] != entries[a].conj() {
                    return Err(Error::InvalidParameter(format!(
                        "entries violate Y(a^-1) = conj(Y(a)) at element {a}"
                    )));
                }
            }
        }
        Ok(Self {
            group,
            entries,
            hermitian,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }
}

/// Samples one table for trial number `trial` of `cfg`.
pub fn sample_entries(g: &GroupSpec, cfg: &EnsembleConfig, trial: u64) -> Result<EntryTable> {
    cfg.validate()?;
    let streams = EntryStreams::new(cfg.seed, trial);
    let n = g.size();
    let mut entries = vec![Complex64::new(0.0, 0.0); n];
    if cfg.hermitian {
        for a in 0..n {
            let b = g.inv_index(a);
            if a == b {
                entries[a] = cfg.involution_entry(&mut streams.for_element(a as u64));
            } else if a < b {
                let y = cfg.pair_entry(&mut streams.for_element(a as u64));
                entries[a] = y;
                entries[b] = y.conj();
            }
        }
    } else {
        for (a, y) in entries.iter_mut().enumerate() {
            *y = cfg.pair_entry(&mut streams.for_element(a as u64));
        }
    }
    Ok(EntryTable {
        group: g.clone(),
        entries,
        hermitian: cfg.hermitian,
    })
}

/// `(1/N) sum_a |Y_a|^2 1{|Y_a| >= epsilon sqrt(N)}` for one realized table.
pub fn lindeberg_statistic(t: &EntryTable, epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = t.entries.len() as f64;
    let threshold = epsilon * n.sqrt();
    let total: f64 = t
        .entries
        .iter()
        .map(|y| y.norm_sqr())
        .filter(|&m| m.sqrt() >= threshold)
        .fold(0.0, |a, m| a + m);
    Ok(total / n)
}

/// Empirical scalar moments of the sampler with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub trials: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub mean_se: f64,
    /// `E |Y|^2` for pair entries.
    pub abs_sq: f64,
    pub abs_sq_se: f64,
    /// `E Y^2` for pair entries.
    pub sq_re: f64,
    pub sq_im: f64,
    pub sq_se: f64,
    /// `E Y^2` for involution entries (`beta` when Hermitian).
    pub involution_var: f64,
    pub involution_var_se: f64,
    /// Largest `|Im Y|` seen over pair entries.
    pub max_abs_im: f64,
}

#[derive(Default)]
struct Running {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn se(&self) -> f64 {
        let m = self.mean();
        let var = (self.sum_sq / self.n - m * m).max(0.0) * self.n / (self.n - 1.0);
        (var / self.n).sqrt()
    }
}

/// Draws `trials` pair entries and `trials` involution entries from
/// stream `stream` of `cfg.seed` and reports their moments.
pub fn moment_check(cfg: &EnsembleConfig, trials: usize, stream: u64) -> Result<MomentReport> {
    cfg.validate()?;
    if trials < 1000 {
        return Err(Error::InsufficientTrials {
            needed: 1000,
            got: trials,
        });
    }
    let streams = EntryStreams::new(cfg.seed, stream);
    let mut re = Running::default();
    let mut im = Running::default();
    let mut abs_sq = Running::default();
    let mut sq_re = Running::default();
    let mut sq_im = Running::default();
    let mut inv = Running::default();
    let mut max_abs_im: f64 = 0.0;
    for i in 0..trials as u64 {
        let y = cfg.pair_entry(&mut streams.for_element(i));
        re.push(y.re);
        im.push(y.im);
        abs_sq.push(y.norm_sqr());
        let y2 = y * y;
        sq_re.push(y2.re);
        sq_im.push(y2.im);
        max_abs_im = max_abs_im.max(y.im.abs());
        let x = cfg.involution_entry(&mut streams.for_element(trials as u64 + i));
        inv.push(x.re * x.re);
    }
    Ok(MomentReport {
        trials,
        mean_re: re.mean(),
        mean_im: im.mean(),
        mean_se: re.se().max(im.se()),
        abs_sq: abs_sq.mean(),
        abs_sq_se: abs_sq.se(),
        sq_re: sq_re.mean(),
        sq_im: sq_im.mean(),
        sq_se: sq_re.se().max(sq_im.se()),
        involution_var: inv.mean(),
        involution_var_se: inv.se(),
        max_abs_im,
    })
}
