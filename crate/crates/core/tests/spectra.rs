use gcirc_core::{
    dense_matrix, eigen_residual, eigenvalues, sample_entries, spectral_norm, BaseDistribution,
    Complex64, EnsembleConfig, EntryTable, GroupSpec,
};
use proptest::prelude::*;

fn group_strategy(max_size: usize) -> impl Strategy<Value = GroupSpec> {
    prop::collection::vec(2usize..=10, 1..=3)
        .prop_filter("size cap", move |o| o.iter().product::<usize>() <= max_size)
        .prop_map(|o| GroupSpec::new(&o).unwrap())
}

fn config_strategy() -> impl Strategy<Value = EnsembleConfig> {
    (
        prop_oneof![
            Just(BaseDistribution::Gaussian),
            Just(BaseDistribution::Rademacher),
            Just(BaseDistribution::Uniform)
        ],
        0.0f64..=1.0,
        0.1f64..3.0,
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(b, a, be, h, s)| EnsembleConfig::new(b, a, be, h, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characters_are_eigenvectors(g in group_strategy(300), cfg in config_strategy(), trial in 0u64..1000) {
        let t = sample_entries(&g, &cfg, trial).unwrap();
        prop_assert!(eigen_residual(&t).unwrap() < 1e-9);
    }

    #[test]
    fn hermitian_tables_give_real_spectra(g in group_strategy(1000), cfg in config_strategy(), trial in 0u64..1000) {
        let cfg = EnsembleConfig { hermitian: true, ..cfg };
        let t = sample_entries(&g, &cfg, trial).unwrap();
        let s = eigenvalues(&t);
        prop_assert!(s.max_abs_im() < 1e-10 * (g.size() as f64).sqrt());
    }

    #[test]
    fn eigenvalue_energy_equals_entry_energy(g in group_strategy(1000), cfg in config_strategy(), trial in 0u64..1000) {
        let t = sample_entries(&g, &cfg, trial).unwrap();
        let s = eigenvalues(&t);
        let lhs: f64 = s.eigenvalues().iter().map(|z| z.norm_sqr()).sum();
        let rhs: f64 = t.entries().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }

    /// `Y'(a) = Y(a + b)` is `M` conjugated by a permutation; each eigenvalue
    /// picks up the phase `conj(chi(b))`.
    #[test]
    fn translation_multiplies_by_character(g in group_strategy(500), cfg in config_strategy(), pick in any::<prop::sample::Index>()) {
        let cfg = EnsembleConfig { hermitian: false, ..cfg };
        let t = sample_entries(&g, &cfg, 0).unwrap();
        let b = pick.index(g.size());
        let shifted: Vec<Complex64> = (0..g.size()).map(|a| t.entries()[g.mul_index(a, b)]).collect();
        let s0 = eigenvalues(&t);
        let s1 = eigenvalues(&EntryTable::from_entries(g.clone(), shifted, false).unwrap());
        for chi in 0..g.size() {
            let want = s0.eigenvalues()[chi] * g.char_value_index(chi, b).conj();
            prop_assert!((s1.eigenvalues()[chi] - want).norm() < 1e-9);
        }
    }

    /// Relabelling elements by an automorphism permutes the dense matrix and
    /// therefore permutes the spectrum.
    #[test]
    fn automorphism_permutes_spectrum(cfg in config_strategy(), d in 2usize..40, trial in 0u64..100) {
        let g = GroupSpec::new(&[d]).unwrap();
        let units: Vec<usize> = (1..d).filter(|&u| gcd(u, d) == 1).collect();
        let u = units[trial as usize % units.len()];
        let t = sample_entries(&g, &cfg, trial).unwrap();
        let relabelled: Vec<Complex64> = (0..d).map(|a| t.entries()[a * u % d]).collect();
        let t2 = EntryTable::from_entries(g.clone(), relabelled, t.is_hermitian()).unwrap();
        let mut a: Vec<(f64, f64)> = eigenvalues(&t).eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        let mut b: Vec<(f64, f64)> = eigenvalues(&t2).eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_norm_bounds_matrix_action(g in group_strategy(200), cfg in config_strategy()) {
        let t = sample_entries(&g, &cfg, 1).unwrap();
        let m = dense_matrix(&t).unwrap();
        let norm = spectral_norm(&eigenvalues(&t));
        let n = g.size();
        for a in 0..n.min(8) {
            let e: Vec<Complex64> = (0..n).map(|i| if i == a { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect();
            let img: f64 = m.mul_vec(&e).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(img <= norm * (1.0 + 1e-9));
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn hermitian_z6_spectrum_is_real() {
    let g = GroupSpec::new(&[6]).unwrap();
    let cfg = EnsembleConfig::new(BaseDistribution::Gaussian, 0.0, 1.0, true, 4).unwrap();
    let t = sample_entries(&g, &cfg, 0).unwrap();
    let m = dense_matrix(&t).unwrap();
    assert!(m.is_hermitian());
    let s = eigenvalues(&t);
    assert_eq!(s.eigenvalues().len(), 6);
    assert!(s.eigenvalues().iter().all(|z| z.im.abs() < 1e-10));
    assert!(eigen_residual(&t).unwrap() < 1e-10);
}
