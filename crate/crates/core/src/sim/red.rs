use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::stats::{FlowCounts, Occupancy, ReplicationStats, RunCounter};
use super::{SimConfig, SimReport};
use crate::error::Result;
use crate::red::RedModel;

/// Simulates the M/M/1/C queue where an arrival seeing `n` customers is
/// dropped with probability `drop[n]`. Outcomes are known on arrival, so
/// runs are counted directly in arrival order.
pub fn simulate_red(model: &RedModel, config: &SimConfig) -> Result<SimReport> {
    let model = model.clone().validated()?;
    config.validate()?;
    let reps: Vec<ReplicationStats> = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(&model, config, r))
        .collect();
    Ok(SimReport::from_replications(&reps))
}

fn replicate(model: &RedModel, config: &SimConfig, replication: usize) -> ReplicationStats {
    let mut rng = config.stream(replication);
    let lambda = model.arrival_rate;
    let mu = model.service_rate;
    let busy_clock = Exp::new(lambda + mu).expect("validated rates");
    let idle_clock = Exp::new(lambda).expect("validated rates");
    let arrival_share = lambda / (lambda + mu);
    let warm_n = config.warmup_arrivals();

    // counted flags of the customers present, in FIFO order
    let mut system: VecDeque<bool> = VecDeque::with_capacity(model.capacity);
    let mut runs = RunCounter::new(config.kmax);
    let mut occupancy = Occupancy::new(model.capacity + 1);
    let mut flow = FlowCounts::default();
    let mut generated = 0u64;
    let mut now = 0.0;
    if warm_n == 0 {
        occupancy.start(0.0);
    }

    while generated < config.arrivals {
        let n = system.len();
        let arrival = if n == 0 {
            now += idle_clock.sample(&mut rng);
            true
        } else {
            now += busy_clock.sample(&mut rng);
            rng.random::<f64>() < arrival_share
        };
        if arrival && generated == warm_n {
            occupancy.start(now);
        }
        occupancy.advance(now, n);
        if !arrival {
            if system.pop_front() == Some(true) {
                flow.served += 1;
            }
            continue;
        }
        let counted = generated >= warm_n;
        generated += 1;
        if counted {
            flow.arrivals += 1;
        }
        let dropped = model.drop[n] >= 1.0 || rng.random::<f64>() < model.drop[n];
        if dropped {
            runs.loss();
            if counted {
                flow.blocked += 1;
            }
        } else {
            runs.success(counted);
            system.push_back(counted);
        }
    }

    flow.in_system = system.iter().filter(|c| **c).count() as u64;
    let arrivals = flow.arrivals.max(1) as f64;
    let blocked = flow.blocked as f64 / arrivals;
    let (occupancy, mean_queue) = occupancy.finish();
    let (cl_histogram, cl_mean) = runs.finish();
    ReplicationStats {
        loss: blocked,
        blocked,
        renovated: 0.0,
        occupancy,
        mean_queue,
        cl_histogram,
        cl_mean,
        flow,
    }
}
