use std::collections::HashMap;

use proptest::prelude::*;
use rrvr_core::sampling::{conditional_next_distribution, is_permutation};
use rrvr_core::stats::{chi_square_sf, chi_square_test, gamma_q};
use rrvr_core::{Permutation, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::gamma_ur;

#[test]
fn permutations_of_four_are_uniform() {
    let mut rng = RngStream::new(2024);
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for _ in 0..120_000 {
        *counts.entry(rng.random_permutation(4).into_vec()).or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    let tallies: Vec<u64> = counts.values().copied().collect();
    let test = chi_square_test(&tallies, &[1.0 / 24.0; 24]).unwrap();
    assert_eq!(test.dof, 23);
    assert!(test.p_value > 0.001, "{test:?}");
}

#[test]
fn uniform_index_buckets_within_five_sigma() {
    let mut rng = RngStream::new(77);
    let mut buckets = [0u64; 5];
    for _ in 0..100_000 {
        buckets[rng.uniform_index(5)] += 1;
    }
    let sigma = (100_000.0f64 * 0.2 * 0.8).sqrt();
    for b in buckets {
        assert!((b as f64 - 20_000.0).abs() <= 5.0 * sigma, "{buckets:?}");
    }
    assert_eq!(RngStream::new(0).uniform_index(1), 0);
    assert_eq!(RngStream::new(0).random_permutation(1).as_slice(), &[0]);
}

#[test]
fn next_entry_given_prefix_follows_conditional_law() {
    // Condition on σ(1) = 2 for n = 5 and look at σ(2).
    let mut rng = RngStream::new(31);
    let expect = conditional_next_distribution(&[2], 5).unwrap();
    let mut counts = [0u64; 5];
    let mut kept = 0;
    while kept < 40_000 {
        let p = rng.random_permutation(5);
        if p.as_slice()[0] == 2 {
            counts[p.as_slice()[1]] += 1;
            kept += 1;
        }
    }
    assert_eq!(counts[2], 0);
    let test = chi_square_test(&counts, &expect).unwrap();
    assert_eq!(test.dof, 3);
    assert!(test.p_value > 0.001, "{test:?}");
}

#[test]
fn for_run_streams_are_distinct_and_reproducible() {
    let a: Vec<u64> = (0..4).map(|i| RngStream::for_run(9, i).next_u64()).collect();
    let b: Vec<u64> = (0..4).map(|i| RngStream::for_run(9, i).next_u64()).collect();
    assert_eq!(a, b);
    let mut sorted = a.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 4);
}

#[test]
fn gamma_q_agrees_with_statrs() {
    for &a in &[0.5, 1.0, 2.5, 7.0, 11.5, 40.0, 150.0] {
        for &x in &[1e-3, 0.3, 1.0, 3.0, 7.5, 20.0, 60.0, 200.0] {
            let ours = gamma_q(a, x);
            let theirs = gamma_ur(a, x);
            let tol = 1e-12_f64.max(1e-10 * theirs);
            assert!((ours - theirs).abs() <= tol, "Q({a}, {x}): {ours} vs {theirs}");
        }
    }
}

#[test]
fn chi_square_sf_agrees_with_statrs() {
    for dof in [1usize, 3, 7, 23, 100] {
        let dist = ChiSquared::new(dof as f64).unwrap();
        for stat in [0.1, 1.0, 5.0, 20.0, 50.0, 130.0] {
            let theirs = 1.0 - dist.cdf(stat);
            assert!((chi_square_sf(stat, dof) - theirs).abs() <= 1e-10, "dof {dof}, stat {stat}");
        }
    }
}

#[test]
fn chi_square_of_exact_counts_is_one() {
    let t = chi_square_test(&[25, 25, 25, 25], &[0.25; 4]).unwrap();
    assert_eq!(t.statistic, 0.0);
    assert!((t.p_value - 1.0).abs() <= 1e-15);
    assert!(chi_square_test(&[1, 2], &[0.5, 0.4]).is_err());
}

proptest! {
    #[test]
    fn permutations_are_bijections(seed in any::<u64>(), n in 1usize..64) {
        let p = RngStream::new(seed).random_permutation(n);
        prop_assert!(is_permutation(p.as_slice()));
        prop_assert_eq!(p.len(), n);
        prop_assert!(Permutation::from_vec(p.into_vec()).is_ok());
    }

    #[test]
    fn conditional_law_sums_to_one(seed in any::<u64>(), n in 1usize..20, cut in 0usize..20) {
        let p = RngStream::new(seed).random_permutation(n);
        let prefix = &p.as_slice()[..cut.min(n - 1)];
        let probs = conditional_next_distribution(prefix, n).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for &used in prefix {
            prop_assert_eq!(probs[used], 0.0);
        }
    }

    #[test]
    fn uniform_draws_stay_in_range(seed in any::<u64>(), n in 1usize..1000) {
        let mut rng = RngStream::new(seed);
        for _ in 0..50 {
            prop_assert!(rng.uniform_index(n) < n);
            let u = rng.next_f64();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}
