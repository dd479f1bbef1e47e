//! Time-stationary queue-length distribution reconstructed from the
//! embedded chain, together with the elapsed-service-time densities.

use crate::chain::EmbeddedChain;
use crate::error::{Error, Result};
use crate::model::{poisson_tail, ModelParams, PoissonKernel};

/// Boundary densities this far below zero are floating-point residue.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    /// `P_0..P_{N+1}`.
    pub pn: Vec<f64>,
    /// Mean time between embedded epochs.
    pub fstar: f64,
    /// Mean times `f_{01}..f_{0,N+1}` spent at each level during a service
    /// that starts with one customer.
    pub f0: Vec<f64>,
    /// Boundary densities `p_1(0)..p_N(0)`.
    pub p0: Vec<f64>,
}

impl StationaryProfile {
    pub fn compute(
        params: &ModelParams,
        kernel: &PoissonKernel,
        chain: &EmbeddedChain,
    ) -> Result<Self> {
        let f0 = sojourn_times(params, kernel);
        let fstar = mean_cycle_time(chain.pplus[0], params);
        let pn = time_stationary(&chain.pplus, params, kernel);
        let p0 = boundary_densities(&pn, params, kernel)?;
        Ok(StationaryProfile { pn, fstar, f0, p0 })
    }

    pub fn capacity(&self) -> usize {
        self.pn.len() - 2
    }

    pub fn blocking(&self) -> f64 {
        self.pn[self.pn.len() - 1]
    }

    pub fn moment(&self, m: u32) -> f64 {
        queue_moments(&self.pn, m)
    }

    pub fn density(&self, n: usize, x: f64, params: &ModelParams) -> f64 {
        density_at(n, x, &self.p0, params)
    }
}

/// `f* = P⁺_0 (1/λ + d) + (1 - P⁺_0) d`.
pub fn mean_cycle_time(pplus0: f64, params: &ModelParams) -> f64 {
    pplus0 * (1.0 / params.arrival_rate + params.service_time)
        + (1.0 - pplus0) * params.service_time
}

/// `f_{01}..f_{0,N+1}`. Levels below `N + 1` use `f_{0n} = B_{n-1} / λ`;
/// the full level takes whatever is left of the service time.
pub fn sojourn_times(params: &ModelParams, kernel: &PoissonKernel) -> Vec<f64> {
    let n = params.capacity;
    let lambda = params.arrival_rate;
    let mut f: Vec<f64> = (1..=n).map(|m| kernel.tail(m as isize - 1) / lambda).collect();
    let used: f64 = f.iter().sum();
    f.push((params.service_time - used).max(0.0));
    f
}

/// Mean time spent at level `n` during an embedded cycle that starts in
/// state `i`. Below the full level a service started with `i` customers
/// behaves like one started with a single customer shifted by `i - 1`;
/// the full level `N + 1` absorbs the rest of the service time, so every
/// row with `i >= 1` sums to `d`.
pub fn sojourn(i: usize, n: usize, f0: &[f64], lambda: f64) -> f64 {
    let full = f0.len();
    match (i, n) {
        (0, 0) => 1.0 / lambda,
        (0, n) => f0[n - 1],
        (_, n) if n < i => 0.0,
        (i, n) if n < full => f0[n - i],
        (i, _) => {
            let below: f64 = f0[..full - i].iter().sum();
            let total: f64 = f0.iter().sum();
            (total - below).max(0.0)
        }
    }
}

/// `P_n = Σ_i P⁺_i f_{in} / f*` for `n = 0..=N+1`.
pub fn time_stationary(pplus: &[f64], params: &ModelParams, kernel: &PoissonKernel) -> Vec<f64> {
    let f0 = sojourn_times(params, kernel);
    let fstar = mean_cycle_time(pplus[0], params);
    let lambda = params.arrival_rate;
    let levels = params.capacity + 2;
    let mut pn: Vec<f64> = (0..levels)
        .map(|n| {
            pplus
                .iter()
                .enumerate()
                .map(|(i, p)| p * sojourn(i, n, &f0, lambda))
                .sum::<f64>()
                / fstar
        })
        .collect();
    let total: f64 = pn.iter().sum();
    for p in &mut pn {
        *p /= total;
    }
    pn
}

/// `E N^m = Σ k^m P_k`.
pub fn queue_moments(pn: &[f64], m: u32) -> f64 {
    pn.iter()
        .enumerate()
        .map(|(k, p)| (k as f64).powi(m as i32) * p)
        .sum()
}

/// Solves `λ P_n = Σ_{k<n} B_k p_{n-k}(0)` forward for `p_1(0)..p_N(0)`.
pub fn boundary_densities(
    pn: &[f64],
    params: &ModelParams,
    kernel: &PoissonKernel,
) -> Result<Vec<f64>> {
    let b0 = kernel.tail(0);
    if !(b0 > 0.0) {
        return Err(Error::DegenerateService);
    }
    let n = params.capacity;
    let lambda = params.arrival_rate;
    let mut p0: Vec<f64> = Vec::with_capacity(n);
    for level in 1..=n {
        let carried: f64 = (1..level)
            .map(|k| kernel.tail(k as isize) * p0[level - k - 1])
            .sum();
        let v = (lambda * pn[level] - carried) / b0;
        if v < -NEGATIVE_DENSITY_TOL {
            return Err(Error::Consistency(format!(
                "boundary density p_{level}(0) = {v:e} is negative"
            )));
        }
        p0.push(v.max(0.0));
    }
    Ok(p0)
}

/// Joint density of `n` in system and elapsed service time `x`.
pub fn density_at(n: usize, x: f64, p0: &[f64], params: &ModelParams) -> f64 {
    assert!(n >= 1 && n <= p0.len(), "level {n} has no elapsed-time density");
    if x < 0.0 || x >= params.service_time {
        return 0.0;
    }
    let lx = params.arrival_rate * x;
    let mut term = 1.0;
    let mut acc = 0.0;
    for k in 0..n {
        if k > 0 {
            term *= lx / k as f64;
        }
        acc += p0[n - k - 1] * term;
    }
    (-lx).exp() * acc
}

/// `P_n(x) = ∫_0^x p_n(t) dt`, using `∫_0^x e^{-λt}(λt)^k/k! dt = P{Poisson(λx) > k}/λ`.
pub fn cumulative_at(n: usize, x: f64, p0: &[f64], params: &ModelParams) -> f64 {
    assert!(n >= 1 && n <= p0.len());
    let x = x.clamp(0.0, params.service_time);
    let lx = params.arrival_rate * x;
    (0..n)
        .map(|k| p0[n - k - 1] * poisson_tail(lx, k))
        .sum::<f64>()
        / params.arrival_rate
}
