//! Discrete-event simulation of both queueing models, used as an oracle for
//! the analytic results.
//!
//! Replication `r` draws from stream `r` of a ChaCha8 generator keyed by the
//! configured seed, so replications never share random numbers and can run
//! in any order.

mod red;
mod renovation;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub use red::simulate_red;
pub use renovation::simulate_renovation;
pub use stats::{FlowCounts, ReplicationStats};

/// Smallest replication length for which confidence intervals are reported
/// as meaningful.
pub const MIN_ARRIVALS: u64 = 1_000;

pub const DEFAULT_WARMUP: f64 = 0.1;

/// Longest run length tracked individually by default.
pub const DEFAULT_SIM_KMAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Arrivals generated per replication.
    pub arrivals: u64,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    /// Number of run lengths `1..=kmax` in the consecutive-loss histogram.
    #[serde(default = "default_kmax")]
    pub kmax: usize,
}

fn default_warmup() -> f64 {
    DEFAULT_WARMUP
}

fn default_kmax() -> usize {
    DEFAULT_SIM_KMAX
}

impl SimConfig {
    pub fn new(arrivals: u64, replications: usize, seed: u64) -> Self {
        SimConfig {
            arrivals,
            replications,
            seed,
            warmup_fraction: DEFAULT_WARMUP,
            kmax: DEFAULT_SIM_KMAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrivals < MIN_ARRIVALS {
            return Err(Error::BadSimConfig(format!(
                "at least {MIN_ARRIVALS} arrivals per replication are required, got {}",
                self.arrivals
            )));
        }
        if self.replications < 1 {
            return Err(Error::BadSimConfig("at least one replication is required".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::BadSimConfig(format!(
                "warmup fraction {} is outside [0, 1)",
                self.warmup_fraction
            )));
        }
        if self.kmax < 1 {
            return Err(Error::BadSimConfig("kmax must be at least 1".into()));
        }
        Ok(())
    }

    /// Arrivals discarded before statistics start.
    pub fn warmup_arrivals(&self) -> u64 {
        (self.warmup_fraction * self.arrivals as f64).floor() as u64
    }

    pub(crate) fn stream(&self, replication: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub metric: String,
    pub mean: f64,
    /// Student-t 99% half-width; infinite with a single replication.
    pub half_width_99: f64,
    pub replication_values: Vec<f64>,
}

impl SimEstimate {
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.half_width_99 + 1e-12
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width_99
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width_99
    }
}

/// Mean and 99% Student-t half-width over per-replication values.
pub fn merge_replications(metric: impl Into<String>, values: &[f64]) -> SimEstimate {
    let n = values.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    let half_width_99 = if n < 2 {
        f64::INFINITY
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var == 0.0 {
            0.0
        } else {
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("degrees of freedom are positive")
                .inverse_cdf(0.995);
            t * (var / n as f64).sqrt()
        }
    };
    SimEstimate {
        metric: metric.into(),
        mean,
        half_width_99,
        replication_values: values.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub loss_prob: SimEstimate,
    pub blocked_prob: SimEstimate,
    pub renovated_prob: SimEstimate,
    /// Time-average fraction of time at each level.
    pub occupancy: Vec<SimEstimate>,
    pub mean_queue: SimEstimate,
    /// Empirical `P{L = k}`, `k = 1..=kmax`.
    pub cl_histogram: Vec<SimEstimate>,
    pub cl_mean: SimEstimate,
    pub flows: Vec<FlowCounts>,
}

impl SimReport {
    pub(crate) fn from_replications(reps: &[ReplicationStats]) -> Self {
        let column = |name: &str, f: &dyn Fn(&ReplicationStats) -> f64| {
            let values: Vec<f64> = reps.iter().map(f).collect();
            merge_replications(name, &values)
        };
        let levels = reps[0].occupancy.len();
        let kmax = reps[0].cl_histogram.len();
        SimReport {
            loss_prob: column("loss_prob", &|r| r.loss),
            blocked_prob: column("blocked_prob", &|r| r.blocked),
            renovated_prob: column("renovated_prob", &|r| r.renovated),
            occupancy: (0..levels)
                .map(|n| column(&format!("P_{n}"), &|r| r.occupancy[n]))
                .collect(),
            mean_queue: column("mean_queue", &|r| r.mean_queue),
            cl_histogram: (0..kmax)
                .map(|k| column(&format!("P(L={})", k + 1), &|r| r.cl_histogram[k]))
                .collect(),
            cl_mean: column("cl_mean", &|r| r.cl_mean),
            flows: reps.iter().map(|r| r.flow).collect(),
        }
    }
}
