use std::collections::VecDeque;

use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::stats::{FlowCounts, Occupancy, ReplicationStats, RunCounter};
use super::{SimConfig, SimReport};
use crate::error::Result;
use crate::model::{validate, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Pending,
    Success,
    Loss,
    /// Customer later removed; its loss is recorded where it happened.
    Withdrawn,
}

#[derive(Debug, Clone, Copy)]
struct Mark {
    outcome: Outcome,
    time: f64,
}

/// Time-ordered stream of outcomes. A served customer's success sits at its
/// arrival time, a loss at the instant it is realized. Entries are released
/// to the run counter once every earlier arrival has a known fate.
struct OutcomeStream {
    marks: VecDeque<Mark>,
    base: u64,
}

impl OutcomeStream {
    fn new() -> Self {
        OutcomeStream {
            marks: VecDeque::new(),
            base: 0,
        }
    }

    fn push(&mut self, outcome: Outcome, time: f64) -> u64 {
        self.marks.push_back(Mark { outcome, time });
        self.base + self.marks.len() as u64 - 1
    }

    fn resolve(&mut self, id: u64, outcome: Outcome) {
        self.marks[(id - self.base) as usize].outcome = outcome;
    }

    fn flush(&mut self, runs: &mut RunCounter, warm_time: Option<f64>) {
        while let Some(front) = self.marks.front() {
            match front.outcome {
                Outcome::Pending => break,
                Outcome::Success => {
                    runs.success(warm_time.is_some_and(|w| front.time >= w))
                }
                Outcome::Loss => runs.loss(),
                Outcome::Withdrawn => {}
            }
            self.marks.pop_front();
            self.base += 1;
        }
    }
}

struct Customer {
    mark: u64,
    counted: bool,
}

/// Simulates the M/D/1/N queue with renovation under the configured
/// resolution rule.
pub fn simulate_renovation(params: &ModelParams, config: &SimConfig) -> Result<SimReport> {
    let params = validate(params.clone())?;
    config.validate()?;
    let reps: Vec<ReplicationStats> = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(&params, config, r))
        .collect();
    Ok(SimReport::from_replications(&reps))
}

fn replicate(params: &ModelParams, config: &SimConfig, replication: usize) -> ReplicationStats {
    let mut rng = config.stream(replication);
    let interarrival = Exp::new(params.arrival_rate).expect("validated arrival rate");
    let removal = WeightedIndex::new(&params.renovation).expect("validated renovation vector");
    let full = params.capacity + 1;
    let d = params.service_time;
    let warm_n = config.warmup_arrivals();

    let mut system: VecDeque<Customer> = VecDeque::with_capacity(full);
    let mut stream = OutcomeStream::new();
    let mut runs = RunCounter::new(config.kmax);
    let mut occupancy = Occupancy::new(full + 1);
    let mut flow = FlowCounts::default();
    let mut warm_time: Option<f64> = None;

    let mut generated = 0u64;
    let mut next_arrival = interarrival.sample(&mut rng);
    let mut completion = f64::INFINITY;

    if warm_n == 0 {
        warm_time = Some(0.0);
        occupancy.start(0.0);
    }

    loop {
        if completion <= next_arrival {
            let now = completion;
            occupancy.advance(now, system.len());
            let done = system.pop_front().expect("completion with an empty server");
            if done.counted {
                flow.served += 1;
            }
            let waiting = system.len();
            if waiting > 0 {
                let drawn = removal.sample(&mut rng);
                for _ in 0..params.option.removed(drawn, waiting) {
                    let gone = system.pop_front().expect("removal within queue length");
                    stream.resolve(gone.mark, Outcome::Withdrawn);
                    stream.push(Outcome::Loss, now);
                    if gone.counted {
                        flow.renovated += 1;
                    }
                }
            }
            match system.front() {
                Some(next) => {
                    stream.resolve(next.mark, Outcome::Success);
                    completion = now + d;
                }
                None => completion = f64::INFINITY,
            }
        } else {
            let now = next_arrival;
            if generated == warm_n {
                warm_time = Some(now);
                occupancy.start(now);
            }
            occupancy.advance(now, system.len());
            let counted = generated >= warm_n;
            generated += 1;
            if counted {
                flow.arrivals += 1;
            }
            if system.len() == full {
                stream.push(Outcome::Loss, now);
                if counted {
                    flow.blocked += 1;
                }
            } else {
                let idle = system.is_empty();
                let outcome = if idle { Outcome::Success } else { Outcome::Pending };
                let mark = stream.push(outcome, now);
                system.push_back(Customer { mark, counted });
                if idle {
                    completion = now + d;
                }
            }
            if generated == config.arrivals {
                stream.flush(&mut runs, warm_time);
                break;
            }
            next_arrival = now + interarrival.sample(&mut rng);
        }
        stream.flush(&mut runs, warm_time);
    }

    flow.in_system = system.iter().filter(|c| c.counted).count() as u64;
    // the customer in service is already safe
    let unresolved = system.iter().skip(1).filter(|c| c.counted).count() as u64;
    let resolved = (flow.arrivals - unresolved).max(1) as f64;
    let blocked = flow.blocked as f64 / resolved;
    let renovated = flow.renovated as f64 / resolved;
    let (occupancy, mean_queue) = occupancy.finish();
    let (cl_histogram, cl_mean) = runs.finish();
    ReplicationStats {
        loss: blocked + renovated,
        blocked,
        renovated,
        occupancy,
        mean_queue,
        cl_histogram,
        cl_mean,
        flow,
    }
}
