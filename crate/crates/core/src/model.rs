//! Model parameters and the Poisson / renovation kernels shared by the
//! analytic modules.
//!
//! The queue holds at most `capacity` waiting customers plus one in service,
//! so the number in system ranges over `0..=capacity + 1`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Above this mean the kernels switch from the multiplicative recurrence to
/// log-space terms and incomplete-gamma tails.
pub const LARGE_RHO: f64 = 50.0;

/// Kernels are extended until the Poisson tail drops below this value.
pub const KERNEL_TAIL_EPS: f64 = 1e-14;

const SIMPLEX_TOL: f64 = 1e-12;

/// What happens when a renovation asks for more customers than are waiting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resolution {
    /// Remove all waiting customers but the last one ("Option 1").
    #[serde(rename = "option1", alias = "keep_last")]
    KeepLast,
    /// Cancel the removal altogether ("Option 2").
    #[serde(rename = "option2", alias = "cancel")]
    Cancel,
}

impl Resolution {
    /// Number of customers actually removed when `drawn` removals are
    /// requested and `waiting` customers sit in the queue.
    pub fn removed(self, drawn: usize, waiting: usize) -> usize {
        if drawn < waiting {
            drawn
        } else {
            match self {
                Resolution::KeepLast => waiting.saturating_sub(1),
                Resolution::Cancel => 0,
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Resolution::KeepLast => "option1",
            Resolution::Cancel => "option2",
        }
    }
}

/// Parameters of the M/D/1/N queue with renovation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Poisson arrival rate.
    pub arrival_rate: f64,
    /// Deterministic service time.
    pub service_time: f64,
    /// Number of waiting places (the server position is not counted).
    pub capacity: usize,
    /// `renovation[i]` is the probability that `i` extra customers are
    /// removed at a service completion, `i = 0..=capacity`.
    pub renovation: Vec<f64>,
    pub option: Resolution,
}

impl ModelParams {
    pub fn new(
        arrival_rate: f64,
        service_time: f64,
        capacity: usize,
        renovation: Vec<f64>,
        option: Resolution,
    ) -> Result<Self> {
        validate(ModelParams {
            arrival_rate,
            service_time,
            capacity,
            renovation,
            option,
        })
    }

    /// The same queue without renovation: `q = (1, 0, ..., 0)`.
    pub fn classic(arrival_rate: f64, service_time: f64, capacity: usize) -> Result<Self> {
        let mut q = vec![0.0; capacity + 1];
        q[0] = 1.0;
        Self::new(arrival_rate, service_time, capacity, q, Resolution::KeepLast)
    }

    /// Offered load `λd`.
    pub fn rho(&self) -> f64 {
        self.arrival_rate * self.service_time
    }

    pub fn with_renovation(&self, renovation: Vec<f64>) -> Result<Self> {
        validate(ModelParams {
            renovation,
            ..self.clone()
        })
    }

    pub fn with_option(&self, option: Resolution) -> Self {
        ModelParams {
            option,
            ..self.clone()
        }
    }

    pub fn kernel(&self) -> PoissonKernel {
        PoissonKernel::new(self.rho(), self.capacity + 2)
    }

    pub fn tail(&self) -> RenovationTail {
        renovation_tail(&self.renovation)
    }
}

/// Checks every parameter invariant and hands the parameters back unchanged.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    for (name, value) in [
        ("arrival_rate", params.arrival_rate),
        ("service_time", params.service_time),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NegativeRate { name, value });
        }
    }
    if params.capacity < 1 {
        return Err(Error::CapacityTooSmall(params.capacity));
    }
    check_simplex(&params.renovation, params.capacity + 1)?;
    Ok(params)
}

/// Checks that `q` has `len` entries in `[0, 1]` summing to one.
pub fn check_simplex(q: &[f64], len: usize) -> Result<()> {
    if q.len() != len {
        return Err(Error::BadProbabilityVector(format!(
            "expected {len} entries, got {}",
            q.len()
        )));
    }
    if let Some((i, v)) = q
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::BadProbabilityVector(format!(
            "entry {i} = {v} is outside [0, 1]"
        )));
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::BadProbabilityVector(format!(
            "entries sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Poisson probabilities `β_i` and tails `B_i = P{X > i}` for `X ~ Poisson(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonKernel {
    rho: f64,
    beta: Vec<f64>,
    btail: Vec<f64>,
}

impl PoissonKernel {
    /// Builds a kernel holding at least `min_len` terms, extended further
    /// until the tail falls below [`KERNEL_TAIL_EPS`].
    pub fn new(rho: f64, min_len: usize) -> Self {
        assert!(rho >= 0.0 && rho.is_finite(), "Poisson mean must be finite and >= 0");
        let min_len = min_len.max(1);
        let mut beta = Vec::with_capacity(min_len);
        let mut btail = Vec::with_capacity(min_len);

        if rho <= LARGE_RHO {
            let mut b = (-rho).exp();
            let mut tail = 1.0 - b;
            beta.push(b);
            btail.push(tail.clamp(0.0, 1.0));
            let mut i = 1usize;
            while i < min_len || (tail > KERNEL_TAIL_EPS && b > 0.0) {
                b *= rho / i as f64;
                tail = (tail - b).clamp(0.0, 1.0);
                beta.push(b);
                btail.push(tail);
                i += 1;
            }
        } else {
            let mut i = 0usize;
            loop {
                let tail = gamma_lr(i as f64 + 1.0, rho).clamp(0.0, 1.0);
                beta.push(log_space_pmf(rho, i));
                btail.push(tail);
                i += 1;
                if i >= min_len && tail <= KERNEL_TAIL_EPS {
                    break;
                }
            }
        }
        PoissonKernel { rho, beta, btail }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Index of the last stored term.
    pub fn truncation(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn tails(&self) -> &[f64] {
        &self.btail
    }

    /// `β_i`; zero past the truncation point, where the mass is below
    /// [`KERNEL_TAIL_EPS`].
    pub fn beta(&self, i: usize) -> f64 {
        self.beta.get(i).copied().unwrap_or(0.0)
    }

    /// `B_i` for `i >= 0` and `B_{-1} = 1`.
    pub fn tail(&self, i: isize) -> f64 {
        if i < 0 {
            1.0
        } else {
            self.btail.get(i as usize).copied().unwrap_or(0.0)
        }
    }
}

fn log_space_pmf(rho: f64, i: usize) -> f64 {
    if rho == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    let i = i as f64;
    (i * rho.ln() - rho - ln_gamma(i + 1.0)).exp()
}

/// `β_i = ρ^i e^{-ρ} / i!`.
pub fn poisson_pmf(rho: f64, i: usize) -> f64 {
    if rho > LARGE_RHO {
        return log_space_pmf(rho, i);
    }
    let mut b = (-rho).exp();
    for k in 1..=i {
        b *= rho / k as f64;
    }
    b
}

/// `B_i = P{Poisson(ρ) > i}`, clamped to `[0, 1]`.
pub fn poisson_tail(rho: f64, i: usize) -> f64 {
    if rho > LARGE_RHO {
        return gamma_lr(i as f64 + 1.0, rho).clamp(0.0, 1.0);
    }
    let mut b = (-rho).exp();
    let mut tail = 1.0 - b;
    for k in 1..=i {
        b *= rho / k as f64;
        tail -= b;
    }
    tail.clamp(0.0, 1.0)
}

/// Tail sums `Q_i = q_i + ... + q_N` of the renovation distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RenovationTail {
    // q_tail[i] = Q_i for i = 0..=N+1, with Q_{N+1} = 0.
    q_tail: Vec<f64>,
}

impl RenovationTail {
    /// `Q_i`; zero for `i > N`.
    pub fn get(&self, i: usize) -> f64 {
        self.q_tail.get(i).copied().unwrap_or(0.0)
    }

    /// `Q_1..Q_{N+1}`.
    pub fn values(&self) -> &[f64] {
        &self.q_tail[1..]
    }
}

/// Backward summation of `q`, so no tail is formed by subtraction.
pub fn renovation_tail(q: &[f64]) -> RenovationTail {
    let mut q_tail = vec![0.0; q.len() + 1];
    for i in (0..q.len()).rev() {
        q_tail[i] = q_tail[i + 1] + q[i];
    }
    RenovationTail { q_tail }
}
