use serde::Serialize;

/// Fate of every post-warmup arrival in one replication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FlowCounts {
    pub arrivals: u64,
    pub served: u64,
    pub blocked: u64,
    pub renovated: u64,
    /// Still in the system when the replication stops.
    pub in_system: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub loss: f64,
    pub blocked: f64,
    pub renovated: f64,
    pub occupancy: Vec<f64>,
    pub mean_queue: f64,
    pub cl_histogram: Vec<f64>,
    pub cl_mean: f64,
    pub flow: FlowCounts,
}

/// Time spent at each level, integrated exactly between events.
pub(crate) struct Occupancy {
    time_at: Vec<f64>,
    last: Option<f64>,
}

impl Occupancy {
    pub fn new(levels: usize) -> Self {
        Occupancy {
            time_at: vec![0.0; levels],
            last: None,
        }
    }

    pub fn start(&mut self, now: f64) {
        self.last = Some(now);
    }

    /// Credits `level` with the time since the previous event.
    pub fn advance(&mut self, now: f64, level: usize) {
        if let Some(last) = self.last {
            self.time_at[level] += now - last;
            self.last = Some(now);
        }
    }

    /// Fractions per level and the time-average level.
    pub fn finish(&self) -> (Vec<f64>, f64) {
        let total: f64 = self.time_at.iter().sum();
        if total <= 0.0 {
            let mut v = vec![0.0; self.time_at.len()];
            v[0] = 1.0;
            return (v, 0.0);
        }
        let fractions: Vec<f64> = self.time_at.iter().map(|t| t / total).collect();
        let mean = fractions.iter().enumerate().map(|(n, f)| n as f64 * f).sum();
        (fractions, mean)
    }
}

/// Counts runs of losses between two successes in a time-ordered stream of
/// outcomes. A run is recorded only if the success that opens it happened
/// after warmup.
pub(crate) struct RunCounter {
    counts: Vec<u64>,
    overflow: u64,
    length_sum: u64,
    open: bool,
    current: usize,
}

impl RunCounter {
    pub fn new(kmax: usize) -> Self {
        RunCounter {
            counts: vec![0; kmax],
            overflow: 0,
            length_sum: 0,
            open: false,
            current: 0,
        }
    }

    pub fn success(&mut self, counted: bool) {
        if self.open && self.current > 0 {
            self.length_sum += self.current as u64;
            match self.counts.get_mut(self.current - 1) {
                Some(c) => *c += 1,
                None => self.overflow += 1,
            }
        }
        self.open = counted;
        self.current = 0;
    }

    pub fn loss(&mut self) {
        if self.open {
            self.current += 1;
        }
    }

    /// Fractions of runs of each length and the mean run length.
    pub fn finish(&self) -> (Vec<f64>, f64) {
        let runs = self.counts.iter().sum::<u64>() + self.overflow;
        if runs == 0 {
            return (vec![0.0; self.counts.len()], 0.0);
        }
        let hist = self
            .counts
            .iter()
            .map(|c| *c as f64 / runs as f64)
            .collect();
        (hist, self.length_sum as f64 / runs as f64)
    }
}
