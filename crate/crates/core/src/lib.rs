//! Fourier analysis on finite abelian groups and spectra of random
//! G-circulant matrices.
//!
//! A group is a product of cyclic groups `Z_{d_1} x ... x Z_{d_r}`
//! ([`GroupSpec`]). Elements and characters share one mixed-radix index in
//! which the first coordinate varies fastest. The eigenvalues of the random
//! G-circulant matrix with entry table `Y` are `fft(Y)(chi) / sqrt(N)`.

pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod group;
pub mod histogram;
pub mod limit_laws;
pub mod selftest;
pub mod special;
pub mod spectra;

pub use num_complex::Complex64;
pub use num_rational::Ratio;

pub use ensembles::{
    lindeberg_statistic, moment_check, sample_entries, BaseDistribution, EnsembleConfig,
    EntryStreams, EntryTable, MomentReport,
};
pub use error::{Error, Result};
pub use experiment::{run_experiment, Check, ExperimentPlan, ExperimentReport, Thresholds};
pub use fourier::{convolve, dft_naive, fft_fast, inverse_fft, FftPlan, GroupFunction};
pub use group::{unit_root, Character, Element, GroupSpec, RestrictedCharacter, DEFAULT_SIZE_CAP};
pub use histogram::{emit_histogram, read_eigenvalues_csv, Histogram};
pub use limit_laws::{
    distance_complex, distance_report, empirical_eigen_covariance, ks_distance_real, limit_for,
    predicted_covariance, ComplexDistance, DistanceReport, EmpiricalCovariance, LawKind, LimitLaw,
    MixtureComponent, PairFlags, PredictedCovariance,
};
pub use selftest::{run_selftest, SelftestReport};
pub use spectra::{
    dense_matrix, eigen_residual, eigenvalues, eigenvalues_with, norm_ratio_curve, spectral_norm,
    DenseMatrix, NormRatioPoint, Spectrum, SpectrumMeta,
};
