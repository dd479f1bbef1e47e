use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use renoq::red::{cl_moments, red_drop_profile, red_stationary, RedAnalysis, RedModel};
use renoq::sim::{simulate_red, SimConfig, SimEstimate};

fn tail_drop(c: usize) -> Vec<f64> {
    let mut d = vec![0.0; c + 1];
    d[c] = 1.0;
    d
}

fn random_drop(rng: &mut ChaCha8Rng, c: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..=c)
        .map(|_| if rng.random_bool(0.4) { 0.0 } else { rng.random_range(0.0..0.9) })
        .collect();
    d[c] = 1.0;
    d
}

fn within_4se(e: &SimEstimate, value: f64) -> bool {
    let n = e.replication_values.len() as f64;
    let ss: f64 = e.replication_values.iter().map(|v| (v - e.mean).powi(2)).sum();
    let se = (ss / (n - 1.0)).sqrt() / n.sqrt();
    (e.mean - value).abs() <= 4.0 * se + 1e-12
}

#[test]
fn tail_drop_runs_are_geometric() {
    for (lambda, mu) in [(0.3, 1.0), (1.0, 1.0), (2.5, 1.0), (0.7, 3.0)] {
        for c in [1, 2, 5, 10, 30] {
            let m = RedModel::new(lambda, mu, c, tail_drop(c)).unwrap();
            let a = RedAnalysis::new(&m, 50).unwrap();
            let delta = lambda / (lambda + mu);
            for (k, p) in a.cl.pmf.iter().enumerate() {
                let expected = delta.powi(k as i32) * (1.0 - delta);
                assert!((p - expected).abs() < 1e-10, "λ={lambda} μ={mu} C={c} k={}", k + 1);
            }
            let full = RedAnalysis::new(&m, 400).unwrap();
            let mean = cl_moments(&full.cl, 1).unwrap();
            assert!((mean - 1.0 / (1.0 - delta)).abs() < 1e-9);
        }
    }
}

#[test]
fn classical_finite_queue_occupancy() {
    let (lambda, mu, c) = (0.6, 1.0, 7);
    let pn = red_stationary(&RedModel::new(lambda, mu, c, tail_drop(c)).unwrap());
    let rho: f64 = lambda / mu;
    for (n, p) in pn.iter().enumerate() {
        let expected = rho.powi(n as i32) * (1.0 - rho) / (1.0 - rho.powi(c as i32 + 1));
        assert!((p - expected).abs() < 1e-12);
    }
}

#[test]
fn mean_run_length_grows_with_arrival_rate() {
    let drop = red_drop_profile(2, 6, 0.4, 8).unwrap();
    let mut prev = 0.0;
    for step in 1..=40 {
        let lambda = 0.1 * step as f64;
        let a = RedAnalysis::new(&RedModel::new(lambda, 1.0, 8, drop.clone()).unwrap(), 2000).unwrap();
        let mean = cl_moments(&a.cl, 1).unwrap();
        assert!(mean >= prev - 1e-12, "λ={lambda}: {mean} < {prev}");
        prev = mean;
    }
}

/// With 20 replications a 4-SE miss has probability about 8e-4 per check
/// (Student t, 19 degrees of freedom); over the 110 checks one miss is
/// tolerated.
#[test]
fn random_profiles_match_simulation_within_four_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut misses = Vec::new();
    for case in 0..10 {
        let c = rng.random_range(1..=10);
        let model = RedModel::new(rng.random_range(0.3..2.0), rng.random_range(0.5..1.5), c, random_drop(&mut rng, c))
            .unwrap();
        let a = RedAnalysis::new(&model, 10).unwrap();
        let mut sim = SimConfig::new(100_000, 20, 900 + case);
        sim.kmax = 10;
        let report = simulate_red(&model, &sim).unwrap();
        for (k, (p, e)) in a.cl.pmf.iter().zip(&report.cl_histogram).enumerate() {
            if !within_4se(e, *p) {
                misses.push(format!("case {case} k={}: {} vs {p}", k + 1, e.mean));
            }
        }
        if !within_4se(&report.loss_prob, a.loss()) {
            misses.push(format!("case {case} loss: {} vs {}", report.loss_prob.mean, a.loss()));
        }
    }
    assert!(misses.len() <= 1, "{misses:#?}");
}

proptest! {
    #[test]
    fn pmf_is_a_subprobability_that_normalizes(seed in any::<u64>(), c in 1usize..12, lambda in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = RedModel::new(lambda, 1.0, c, random_drop(&mut rng, c)).unwrap();
        let a = RedAnalysis::new(&model, 3000).unwrap();
        prop_assert!(a.cl.pmf.iter().all(|p| *p >= 0.0));
        let s: f64 = a.cl.pmf.iter().sum();
        prop_assert!(s <= 1.0 + 1e-12);
        prop_assert!((s - 1.0).abs() < 1e-9);
        prop_assert!((a.pn.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
