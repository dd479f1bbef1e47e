//! Loss probability of a tagged arrival: blocked on arrival, or removed
//! from the queue by a later renovation.
//!
//! A tagged customer that sees `n` customers (`1 <= n <= N`) joins with
//! `n - 1` customers waiting ahead of it. Whether it is eventually removed
//! depends on how many customers wait ahead, whether anyone stands behind
//! it, and on the renovation rule; the risk tables below hold those
//! absorption probabilities, evaluated at the start of a fresh service.

use serde::Serialize;

use crate::model::{ModelParams, PoissonKernel, RenovationTail};
use crate::stationary::StationaryProfile;

/// Stop extending the `γ` table once every row recovers `P_i` to this.
pub const GAMMA_MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub pi: f64,
    pub blocked: f64,
    pub renovated: f64,
}

impl LossBreakdown {
    fn new(blocked: f64, renovated: f64) -> Self {
        let renovated = renovated.max(0.0);
        LossBreakdown {
            pi: (blocked + renovated).min(1.0),
            blocked,
            renovated,
        }
    }
}

/// Option 1 risks: `r[i]` with `i` ahead and nobody behind, `rstar[i]` with
/// at least one customer behind, `0 <= i <= N - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenovationRisk1 {
    pub r: Vec<f64>,
    pub rstar: Vec<f64>,
}

pub fn risks_option1(params: &ModelParams, kernel: &PoissonKernel) -> RenovationRisk1 {
    let n = params.capacity;
    let q = &params.renovation;
    let tail = params.tail();
    let len = n.saturating_sub(1);
    let mut r = Vec::with_capacity(len);
    let mut rstar = Vec::with_capacity(len);
    if len == 0 {
        return RenovationRisk1 { r, rstar };
    }
    let idle = kernel.beta(0);
    let busy = kernel.tail(0);
    r.push(busy * tail.get(1));
    rstar.push(tail.get(1));
    for i in 1..len {
        let quiet: f64 = (0..i).map(|j| q[j] * r[i - 1 - j]).sum();
        let crowded: f64 = (0..i).map(|j| q[j] * rstar[i - 1 - j]).sum::<f64>() + tail.get(i + 1);
        r.push(idle * quiet + busy * crowded);
        rstar.push(crowded);
    }
    RenovationRisk1 { r, rstar }
}

/// For a tagged arrival seeing `i` customers (`1..=N`): the mass of
/// `p_i(x)` split by whether the remaining service `d - x` brings no
/// arrival or at least one. Closed form of
/// `∫_0^d p_i(x) e^{-λ(d-x)} dx = (1/λ) Σ_k p_{i-k}(0) β_{k+1}`.
pub fn arrival_split(
    profile: &StationaryProfile,
    params: &ModelParams,
    kernel: &PoissonKernel,
) -> Vec<(f64, f64)> {
    let lambda = params.arrival_rate;
    (1..=params.capacity)
        .map(|i| {
            let quiet = (0..i)
                .map(|k| profile.p0[i - k - 1] * kernel.beta(k + 1))
                .sum::<f64>()
                / lambda;
            let total = (0..i)
                .map(|k| profile.p0[i - k - 1] * kernel.tail(k as isize))
                .sum::<f64>()
                / lambda;
            (quiet, (total - quiet).max(0.0))
        })
        .collect()
}

pub fn loss_option1(
    profile: &StationaryProfile,
    risks: &RenovationRisk1,
    params: &ModelParams,
    kernel: &PoissonKernel,
) -> LossBreakdown {
    let n = params.capacity;
    let q = &params.renovation;
    let tail = params.tail();
    let blocked = profile.blocking();
    if n < 2 {
        // nobody can queue behind the tagged customer, and the last
        // waiting customer is never removed
        return LossBreakdown::new(blocked, 0.0);
    }
    let split = arrival_split(profile, params, kernel);
    let mut renovated = tail.get(1) * split[0].1;
    for i in 2..n {
        let (quiet, crowded) = split[i - 1];
        let alone: f64 = (0..=i - 2).map(|j| q[j] * risks.r[i - 2 - j]).sum();
        let followed: f64 =
            (0..=i - 2).map(|j| q[j] * risks.rstar[i - 2 - j]).sum::<f64>() + tail.get(i);
        renovated += quiet * alone + crowded * followed;
    }
    let last: f64 = (0..=n - 2).map(|j| q[j] * risks.r[n - 2 - j]).sum();
    renovated += profile.pn[n] * last;
    LossBreakdown::new(blocked, renovated)
}

/// `γ_{ij}`: probability that an arrival sees `i` customers and exactly `j`
/// further customers arrive before the current service ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    /// `rows[i - 1][j]` for `i = 1..=N`, `j = 0..=jmax`.
    pub rows: Vec<Vec<f64>>,
}

impl GammaTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i - 1].get(j).copied().unwrap_or(0.0)
    }

    pub fn jmax(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len() - 1)
    }

    /// `Σ_{j > last} γ_{ij}`, taken as `P_i` minus the head of the row.
    pub fn tail_beyond(&self, i: usize, last: usize, p_i: f64) -> f64 {
        let head: f64 = self.rows[i - 1].iter().take(last + 1).sum();
        (p_i - head).max(0.0)
    }
}

/// Closed-form `γ_{ij}`. Arrivals counted here fall in the residual service
/// time `d - x`, and substituting the elapsed-time density gives
/// `∫_0^d e^{-λx}(λx)^k/k! · e^{-λ(d-x)}(λ(d-x))^j/j! dx = β_{k+j+1}/λ`, so
/// `γ_{ij} = (1/λ) Σ_{k<i} p_{i-k}(0) β_{k+j+1}`.
pub fn gamma_coefficients(
    profile: &StationaryProfile,
    params: &ModelParams,
    kernel: &PoissonKernel,
) -> GammaTable {
    let n = params.capacity;
    let lambda = params.arrival_rate;
    let cap = n + kernel.truncation() + 1;
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut sums = vec![0.0; n];
    for j in 0..=cap {
        for i in 1..=n {
            let g = (0..i)
                .map(|k| profile.p0[i - k - 1] * kernel.beta(k + j + 1))
                .sum::<f64>()
                / lambda;
            rows[i - 1].push(g);
            sums[i - 1] += g;
        }
        let converged = (1..=n).all(|i| profile.pn[i] - sums[i - 1] <= GAMMA_MASS_TOL);
        if converged && j >= n {
            break;
        }
    }
    GammaTable { rows }
}

/// Option 2 risks `r_{ij}`: probability that a waiting customer with
/// `ahead` customers in front of it (excluding the one in service) and
/// `behind` customers behind it is eventually removed.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingRisk {
    /// `r[ahead][behind]`, `behind <= N - 1 - ahead`.
    pub r: Vec<Vec<f64>>,
}

impl WaitingRisk {
    pub fn get(&self, behind: usize, ahead: usize) -> f64 {
        self.r[ahead][behind]
    }
}

/// Expectation of `f(min(start + K, cap))` for `K ~ Poisson(λd)` arrivals.
fn capped(kernel: &PoissonKernel, start: usize, cap: usize, f: impl Fn(usize) -> f64) -> f64 {
    debug_assert!(start <= cap);
    let free = cap - start;
    (0..free).map(|m| kernel.beta(m) * f(start + m)).sum::<f64>()
        + kernel.tail(free as isize - 1) * f(cap)
}

struct RangeSums {
    // prefix[k] = q_0 + ... + q_{k-1}
    prefix: Vec<f64>,
}

impl RangeSums {
    fn new(q: &[f64]) -> Self {
        let mut prefix = vec![0.0; q.len() + 1];
        for (k, v) in q.iter().enumerate() {
            prefix[k + 1] = prefix[k] + v;
        }
        RangeSums { prefix }
    }

    /// `q_lo + ... + q_hi`, empty when `hi < lo`.
    fn range(&self, lo: usize, hi: usize) -> f64 {
        if hi < lo {
            0.0
        } else {
            let hi = hi.min(self.prefix.len() - 2);
            (self.prefix[hi + 1] - self.prefix[lo]).max(0.0)
        }
    }
}

pub fn risks_option2(params: &ModelParams, kernel: &PoissonKernel) -> WaitingRisk {
    let n = params.capacity;
    let q = &params.renovation;
    let tail = params.tail();
    let sums = RangeSums::new(q);
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(n);
    for ahead in 0..n {
        let cap = n - 1 - ahead;
        let row: Vec<f64> = (0..=cap)
            .map(|behind| {
                capped(kernel, behind, cap, |b| {
                    if ahead == 0 {
                        return sums.range(1, b);
                    }
                    let shifted: f64 = (0..ahead).map(|k| q[k] * r[ahead - 1 - k][b]).sum();
                    shifted
                        + sums.range(ahead + 1, ahead + b)
                        + tail.get(ahead + b + 1) * r[ahead - 1][b]
                })
            })
            .collect();
        r.push(row);
    }
    WaitingRisk { r }
}

/// Bracket of the Option 2 loss sum: the removal probability of a tagged
/// customer that arrived seeing `i` customers once `behind` customers have
/// queued behind it by the end of the current service.
fn tagged_risk(i: usize, behind: usize, q: &[f64], tail: &RenovationTail, risk: &WaitingRisk, sums: &RangeSums) -> f64 {
    let shifted: f64 = (0..i.saturating_sub(1))
        .map(|k| q[k] * risk.r[i - 2 - k][behind])
        .sum();
    let overtaken = sums.range(i, i + behind - 1);
    let cancelled = if i >= 2 {
        tail.get(i + behind) * risk.r[i - 2][behind]
    } else {
        0.0
    };
    shifted + overtaken + cancelled
}

pub fn loss_option2(
    profile: &StationaryProfile,
    gamma: &GammaTable,
    risk: &WaitingRisk,
    params: &ModelParams,
) -> LossBreakdown {
    let n = params.capacity;
    let q = &params.renovation;
    let tail = params.tail();
    let sums = RangeSums::new(q);
    let mut renovated = 0.0;
    for i in 1..=n {
        let room = n - i;
        for j in 0..=room {
            renovated += gamma.get(i, j) * tagged_risk(i, j, q, &tail, risk, &sums);
        }
        let beyond = gamma.tail_beyond(i, room, profile.pn[i]);
        renovated += beyond * tagged_risk(i, room, q, &tail, risk, &sums);
    }
    LossBreakdown::new(profile.blocking(), renovated)
}
