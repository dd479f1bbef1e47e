//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's numerical code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use renoq::{ModelParams, Resolution};

/// `P{Poisson(ρ) = k}` from logarithms.
pub fn poisson(rho: f64, k: usize) -> f64 {
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    (k as f64 * rho.ln() - rho - ln_fact).exp()
}

/// Stationary vector of a stochastic matrix by a dense LU solve of
/// `(I - Pᵀ) x = 0` with the last equation replaced by `Σ x = 1`.
pub fn lu_stationary(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut a = DMatrix::<f64>::identity(n, n) - p.transpose();
    let mut b = DVector::<f64>::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain").iter().copied().collect()
}

/// Probabilities of `min(A, cap)` for `A ~ Poisson(ρ)`, `0..=cap`.
fn capped_arrivals(rho: f64, cap: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..cap).map(|k| poisson(rho, k)).collect();
    let head: f64 = w.iter().sum();
    w.push((1.0 - head).max(0.0));
    w
}

/// Time-stationary queue-length distribution of the classical M/D/1/N
/// queue (room for `n` waiting, `n + 1` in system) via the departure chain
/// and the standard finite-buffer conversion.
pub fn classic_md1n(lambda: f64, d: f64, n: usize) -> Vec<f64> {
    let rho = lambda * d;
    let mut p = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let start = i.max(1) - 1;
        for (a, w) in capped_arrivals(rho, n - start).into_iter().enumerate() {
            p[(i, start + a)] += w;
        }
    }
    let dep = lu_stationary(&p);
    let denom = dep[0] + rho;
    let mut out: Vec<f64> = dep.iter().map(|x| x / denom).collect();
    out.push(1.0 - 1.0 / denom);
    out
}

/// Embedded-chain matrix by enumerating the number of arrivals during a
/// service and the renovation draw.
pub fn brute_matrix(params: &ModelParams) -> DMatrix<f64> {
    let n = params.capacity;
    let rho = params.arrival_rate * params.service_time;
    let mut p = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let start = i.max(1);
        for (a, w) in capped_arrivals(rho, n + 1 - start).into_iter().enumerate() {
            let waiting = start + a - 1;
            for (drawn, qj) in params.renovation.iter().enumerate() {
                let removed = match params.option {
                    _ if drawn < waiting => drawn,
                    Resolution::KeepLast => waiting.saturating_sub(1),
                    Resolution::Cancel => 0,
                };
                p[(i, waiting - removed)] += w * qj;
            }
        }
    }
    p
}

pub fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random vector on the simplex with roughly a third of its entries zeroed.
pub fn sparse_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|i| {
            if i > 0 && rng.random_bool(0.3) {
                0.0
            } else {
                Exp1.sample(rng)
            }
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Parameters with `λd` in `rho`, `N` in `capacity` and a random `q`.
pub fn random_params(
    rng: &mut ChaCha8Rng,
    rho: (f64, f64),
    capacity: (usize, usize),
    option: Resolution,
) -> ModelParams {
    let d = rng.random_range(0.5..2.0);
    let r = rng.random_range(rho.0..=rho.1);
    let n = rng.random_range(capacity.0..=capacity.1);
    let q = if rng.random_bool(0.5) {
        random_simplex(rng, n + 1)
    } else {
        sparse_simplex(rng, n + 1)
    };
    ModelParams::new(r / d, d, n, q, option).unwrap()
}

/// `q` supported on `{0, 1}`.
pub fn single_removal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let q1: f64 = rng.random_range(0.0..1.0);
    let mut q = vec![0.0; n + 1];
    q[0] = 1.0 - q1;
    q[1] = q1;
    q
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
