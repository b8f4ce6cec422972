mod common;

use common::{random_layer, rng};
use harmonic_lattice::halfspace::{halfspace_layer, periodized_poisson_kernel};
use harmonic_lattice::lattice::wrap;
use harmonic_lattice::walk::{
    exit_average, periodized_frequencies, poisson_kernel_mc, sample_exit, sample_exits,
    total_variation_distance, KernelEstimate, WalkConfig,
};
use ndarray::{Array1, Axis};
use proptest::prelude::*;

#[test]
fn walk_average_reproduces_harmonic_extension() {
    let l = 16;
    let bottom = random_layer(&mut rng(1), 1, l);
    for z in [1u64, 2, 4, 8] {
        let exact = halfspace_layer(&bottom, z as usize).unwrap();
        for x in [0i64, 5, -7] {
            let cfg = WalkConfig::new(2, z, 100 + z).unwrap();
            let (mean, se) = exit_average(&bottom, &[x], &cfg, 10_000).unwrap();
            let target = exact[[wrap(x, l)]];
            assert!((mean - target).abs() <= 3.0 * se, "z={z} x={x}: {mean} vs {target} (se {se})");
        }
    }
}

#[test]
fn three_dimensional_marginal_matches_spectral_kernel() {
    let (l, z) = (16, 3);
    let cfg = WalkConfig::new(3, z, 4).unwrap();
    let exits = sample_exits(&cfg, 20_000).unwrap();
    let mc = periodized_frequencies(&exits, 2, l).sum_axis(Axis(1));
    let exact = periodized_poisson_kernel(z as usize, 3, l).unwrap().sum_axis(Axis(1));
    let tv = total_variation_distance(&mc.into_dyn(), &exact.into_dyn());
    assert!(tv < 0.04, "tv {tv}");
}

#[test]
fn exit_law_is_mirror_symmetric() {
    let cfg = WalkConfig::new(2, 3, 5).unwrap();
    let exits = sample_exits(&cfg, 50_000).unwrap();
    let mirrored: Vec<Vec<i64>> = exits.iter().map(|x| vec![-x[0]]).collect();
    let a = periodized_frequencies(&exits, 1, 16);
    let b = periodized_frequencies(&mirrored, 1, 16);
    assert!(total_variation_distance(&a, &b) < 0.02);
    let mean = exits.iter().map(|x| x[0] as f64).sum::<f64>() / exits.len() as f64;
    let spread = (exits.iter().map(|x| (x[0] as f64).powi(2)).sum::<f64>() / exits.len() as f64).sqrt();
    assert!(mean.abs() < 5.0 * spread / (exits.len() as f64).sqrt());
}

#[test]
fn estimate_accounts_for_all_mass() {
    let cfg = WalkConfig::new(2, 4, 6).unwrap();
    let est = poisson_kernel_mc(&cfg, 5_000, 8).unwrap();
    assert!((est.recorded_mass() + est.outside_mass() - 1.0).abs() < 1e-12);
    let p = est.probability(&[0]);
    assert_eq!(est.std_error(&[0]), (p * (1.0 - p) / 5_000.0).sqrt());
    assert_eq!(est.probability(&[100]), 0.0);
    assert!(poisson_kernel_mc(&cfg, 0, 8).is_err());
}

#[test]
fn window_counts_partition_exits() {
    let exits = vec![vec![0], vec![2], vec![-2], vec![3], vec![-9]];
    let est = KernelEstimate::from_exits(&exits, 1, 2);
    assert_eq!(est.counts, Array1::from(vec![1u64, 0, 1, 0, 1]).into_dyn());
    assert_eq!(est.outside, 2);
}

#[test]
fn rejects_bad_configuration() {
    assert!(WalkConfig::new(1, 3, 0).is_err());
    assert!(WalkConfig::new(2, 0, 0).is_err());
    assert!(WalkConfig::DEFAULT_CAP >= 1_000_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn walks_are_reproducible(seed in any::<u64>(), index in any::<u64>(), z in 1u64..64, d in 2usize..5) {
        let cfg = WalkConfig::new(d, z, seed).unwrap();
        let a = sample_exit(&cfg, index).unwrap();
        prop_assert_eq!(a.len(), d - 1);
        prop_assert_eq!(a, sample_exit(&cfg, index).unwrap());
    }

    #[test]
    fn batch_matches_single_walks(seed in any::<u64>(), z in 1u64..16) {
        let cfg = WalkConfig::new(2, z, seed).unwrap();
        let batch = sample_exits(&cfg, 16).unwrap();
        for (i, x) in batch.iter().enumerate() {
            prop_assert_eq!(x, &sample_exit(&cfg, i as u64).unwrap());
        }
    }
}
