use gsi_core::experiments::{bandlimited_signal, derive_seed, random_geometric_graph};
use gsi_core::graph::{markov_matrix, Kernel};
use gsi_core::interpolation::*;
use gsi_core::sampling::uniform_sample;
use gsi_core::smoothness::{markov_variation, Norm};
use gsi_core::spectral::markov_eigs;
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Sampled values are the one-hop Markov average of the synthesized
    /// signal `V y`.
    #[test]
    fn samples_are_markov_averages_of_synthesis(seed in 0u64..10_000, r in 3usize..15) {
        let (g, _) = random_geometric_graph(40, 5, seed, Kernel::ExpNegDist).unwrap();
        let b = markov_eigs(&g).unwrap();
        let x: Vec<f64> = (0..40).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        let m = uniform_sample(40, r, seed).unwrap();
        let s = SampleSet::from_signal(&x, &m).unwrap();
        let res = interpolate_one_shot(&b, &s, 1e-8, 40).unwrap();
        let synth = b.eigenvectors() * DVector::from_vec(res.spectrum.clone());
        let avg = markov_matrix(&g).unwrap().shift(synth.as_slice()).unwrap();
        for (&i, &v) in m.iter().zip(s.values()) {
            prop_assert!((avg[i] - v).abs() <= 1e-7 * (1.0 + v.abs()));
            prop_assert!((res.signal[i] - v).abs() <= 1e-7 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn iterative_keeps_samples_and_grows_monotonically(seed in 0u64..10_000, r in 2usize..8) {
        let (g, _) = random_geometric_graph(50, 5, seed, Kernel::ExpNegDist).unwrap();
        let b = markov_eigs(&g).unwrap();
        let x = bandlimited_signal(&b, 8, derive_seed(seed, 3)).unwrap();
        let m = uniform_sample(50, r, seed).unwrap();
        let s = SampleSet::from_signal(&x, &m).unwrap();
        let res = interpolate_iterative(&g, &b, &s, 1e-8, 50).unwrap();
        let it = &res.iterations;
        prop_assert!(it.windows(2).all(|w| w[1].active > w[0].active));
        prop_assert!(it.windows(2).all(|w| w[1].spectrum_l1 >= w[0].spectrum_l1 - 1e-6));
        for (&i, &v) in m.iter().zip(s.values()) {
            prop_assert!((res.signal[i] - v).abs() <= 1e-7);
        }
        let hops = g.hop_distances(&m).unwrap();
        let reach = hops.iter().flatten().max().copied().unwrap();
        prop_assert!(it.len() <= reach + 1);
        let last = markov_variation(&g, &res.signal, Norm::L2).unwrap();
        prop_assert!(last <= it[0].markov_variation.unwrap() + 1e-8);
    }

    #[test]
    fn least_squares_fits_samples(seed in 0u64..10_000, r in 1usize..20) {
        let (g, _) = random_geometric_graph(30, 5, seed, Kernel::ExpNegDist).unwrap();
        let b = markov_eigs(&g).unwrap();
        let x: Vec<f64> = (0..30).map(|i| (i as f64 + seed as f64).sin()).collect();
        let m = uniform_sample(30, r, seed).unwrap();
        let s = SampleSet::from_signal(&x, &m).unwrap();
        let res = least_squares_baseline(&b, &s, 30).unwrap();
        for (&i, &v) in m.iter().zip(s.values()) {
            prop_assert!((res.signal[i] - v).abs() < 1e-8);
        }
    }
}

#[test]
fn bandlimited_signal_recovered_with_enough_samples() {
    let (g, _) = random_geometric_graph(60, 6, 1, Kernel::ExpNegDist).unwrap();
    let b = markov_eigs(&g).unwrap();
    let x = bandlimited_signal(&b, 4, 9).unwrap();
    let m = uniform_sample(60, 30, 2).unwrap();
    let s = SampleSet::from_signal(&x, &m).unwrap();
    let spec = spectral_regression_baseline(&b, &s, 4).unwrap();
    assert!(!spec.fallback);
    for (p, q) in spec.signal.iter().zip(&x) {
        assert!((p - q).abs() < 1e-8);
    }
}

#[test]
fn methods_round_trip_through_names() {
    for m in Method::ALL {
        assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
    }
}
