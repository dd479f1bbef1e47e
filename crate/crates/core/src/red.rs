//! M/M/1/C queue with state-dependent (RED-style) drop probabilities and
//! the distribution of consecutive-loss run lengths.
//!
//! `C` counts every position including the server, and an arrival that
//! sees `n` customers is dropped with probability `drop[n]`. `drop[C]` must
//! be one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of run-length probabilities computed.
pub const DEFAULT_KMAX: usize = 200;

/// Largest pmf deficit accepted when forming moments.
pub const MOMENT_TAIL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedModel {
    pub arrival_rate: f64,
    pub service_rate: f64,
    pub capacity: usize,
    /// `drop[n]`, `n = 0..=capacity`.
    pub drop: Vec<f64>,
}

impl RedModel {
    pub fn new(arrival_rate: f64, service_rate: f64, capacity: usize, drop: Vec<f64>) -> Result<Self> {
        RedModel {
            arrival_rate,
            service_rate,
            capacity,
            drop,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        for (name, value) in [
            ("arrival_rate", self.arrival_rate),
            ("service_rate", self.service_rate),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NegativeRate { name, value });
            }
        }
        if self.capacity < 1 {
            return Err(Error::CapacityTooSmall(self.capacity));
        }
        if self.drop.len() != self.capacity + 1 {
            return Err(Error::BadProbabilityVector(format!(
                "drop profile needs {} entries, got {}",
                self.capacity + 1,
                self.drop.len()
            )));
        }
        if let Some((n, v)) = self
            .drop
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::BadProbabilityVector(format!(
                "drop probability {n} = {v} is outside [0, 1]"
            )));
        }
        if self.drop[self.capacity] != 1.0 {
            return Err(Error::BadProbabilityVector(
                "an arrival seeing a full system must be dropped (drop[C] = 1)".into(),
            ));
        }
        Ok(self)
    }

    /// Probability that the next event in a busy system is an arrival.
    pub fn delta(&self) -> f64 {
        self.arrival_rate / (self.arrival_rate + self.service_rate)
    }
}

/// Linear RED profile: zero below `min_th`, rising to `p_max` at `max_th`,
/// one above it, and always one at `C`.
pub fn red_drop_profile(min_th: usize, max_th: usize, p_max: f64, capacity: usize) -> Result<Vec<f64>> {
    if min_th >= max_th || max_th > capacity {
        return Err(Error::BadThresholds(format!(
            "need min_th < max_th <= C, got {min_th}, {max_th}, C = {capacity}"
        )));
    }
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::BadThresholds(format!("p_max = {p_max} is outside (0, 1]")));
    }
    let span = (max_th - min_th) as f64;
    let mut d: Vec<f64> = (0..=capacity)
        .map(|n| {
            if n < min_th {
                0.0
            } else if n <= max_th {
                p_max * (n - min_th) as f64 / span
            } else {
                1.0
            }
        })
        .collect();
    d[capacity] = 1.0;
    Ok(d)
}

/// Stationary distribution of the thinned birth–death chain, formed in log
/// space.
pub fn red_stationary(model: &RedModel) -> Vec<f64> {
    let ratio = (model.arrival_rate / model.service_rate).ln();
    let mut logs = Vec::with_capacity(model.capacity + 1);
    let mut acc = 0.0f64;
    logs.push(0.0);
    for n in 1..=model.capacity {
        let admit = 1.0 - model.drop[n - 1];
        acc += if admit > 0.0 {
            ratio + admit.ln()
        } else {
            f64::NEG_INFINITY
        };
        logs.push(acc);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClDistribution {
    /// `pmf[k - 1] = P{L = k}` for `k = 1..=kmax`.
    pub pmf: Vec<f64>,
    pub delta: f64,
    /// `1 - Σ pmf`, the mass beyond `kmax`.
    pub tail_deficit: f64,
}

/// Run-length distribution of losses between two accepted arrivals.
///
/// `ahead[k][i]` is the probability that, starting from `i` customers just
/// after an event, the next `k` arrivals are dropped and the one after is
/// admitted. Runs are conditioned on the arrival after an admission being
/// dropped.
pub fn cl_distribution(model: &RedModel, profile: &[f64], kmax: usize) -> ClDistribution {
    assert!(kmax >= 1, "kmax must be at least 1");
    let c = model.capacity;
    let delta = model.delta();
    let d = &model.drop;

    // admitted[i]: next arrival admitted; dropped[i]: next arrival dropped
    let mut admitted = vec![0.0; c + 1];
    let mut dropped = vec![0.0; c + 1];
    admitted[0] = 1.0 - d[0];
    dropped[0] = d[0];
    for i in 1..=c {
        admitted[i] = delta * (1.0 - d[i]) + (1.0 - delta) * admitted[i - 1];
        dropped[i] = delta * d[i] + (1.0 - delta) * dropped[i - 1];
    }

    let weights: Vec<f64> = (0..c).map(|n| profile[n] * (1.0 - d[n])).collect();
    let denom: f64 = (0..c).map(|n| weights[n] * dropped[n + 1]).sum();

    let mut pmf = Vec::with_capacity(kmax);
    let mut prev = admitted;
    for _ in 0..kmax {
        let mut cur = vec![0.0; c + 1];
        cur[0] = d[0] * prev[0];
        for i in 1..=c {
            cur[i] = delta * d[i] * prev[i] + (1.0 - delta) * cur[i - 1];
        }
        let num: f64 = (0..c).map(|n| weights[n] * cur[n + 1]).sum();
        pmf.push(if denom > 0.0 { num / denom } else { 0.0 });
        prev = cur;
    }
    let tail_deficit = if denom > 0.0 {
        (1.0 - pmf.iter().sum::<f64>()).max(0.0)
    } else {
        1.0
    };
    ClDistribution {
        pmf,
        delta,
        tail_deficit,
    }
}

/// `E L^m`.
pub fn cl_moments(dist: &ClDistribution, m: u32) -> Result<f64> {
    if dist.tail_deficit >= MOMENT_TAIL_TOL {
        return Err(Error::TailNotConverged {
            deficit: dist.tail_deficit,
            tolerance: MOMENT_TAIL_TOL,
        });
    }
    Ok(dist
        .pmf
        .iter()
        .enumerate()
        .map(|(k, p)| ((k + 1) as f64).powi(m as i32) * p)
        .sum())
}

/// Analytic summary used by the CLI and the comparison harness.
#[derive(Debug, Clone)]
pub struct RedAnalysis {
    pub model: RedModel,
    pub pn: Vec<f64>,
    pub cl: ClDistribution,
}

impl RedAnalysis {
    pub fn new(model: &RedModel, kmax: usize) -> Result<Self> {
        let model = model.clone().validated()?;
        let pn = red_stationary(&model);
        let cl = cl_distribution(&model, &pn, kmax);
        Ok(RedAnalysis { model, pn, cl })
    }

    pub fn mean_queue(&self) -> f64 {
        self.pn.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Fraction of arrivals dropped (PASTA).
    pub fn loss(&self) -> f64 {
        self.pn.iter().zip(&self.model.drop).map(|(p, d)| p * d).sum()
    }
}
