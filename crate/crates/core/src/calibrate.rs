//! Search for a renovation vector that makes the analytic loss probability
//! and mean queue length hit given targets.
//!
//! Two methods are offered: Nelder–Mead on softmax coordinates (the first
//! coordinate pinned at zero) with restarts, and a global-best particle swarm
//! that works directly on the simplex and projects after every move. Both
//! evaluate the analytic pipeline only and are deterministic given the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const MIN_BUDGET: usize = 10;

/// Objective value below which the search stops early.
pub const DEFAULT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    #[serde(default)]
    pub target_loss: Option<f64>,
    #[serde(default)]
    pub target_mean_queue: Option<f64>,
    /// Weights of the loss and mean-queue terms.
    #[serde(default = "unit_weights")]
    pub weights: (f64, f64),
}

fn unit_weights() -> (f64, f64) {
    (1.0, 1.0)
}

impl CalibrationTarget {
    pub fn new(target_loss: Option<f64>, target_mean_queue: Option<f64>) -> Self {
        CalibrationTarget {
            target_loss,
            target_mean_queue,
            weights: unit_weights(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_loss.is_none() && self.target_mean_queue.is_none() {
            return Err(Error::BadCalibration("no target is set".into()));
        }
        if let Some(t) = self.target_loss {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::BadCalibration(format!("target loss {t} is outside [0, 1]")));
            }
        }
        if let Some(t) = self.target_mean_queue {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::BadCalibration(format!("target mean queue {t} is negative")));
            }
        }
        let (wl, wq) = self.weights;
        if !(wl >= 0.0 && wq >= 0.0 && wl.is_finite() && wq.is_finite()) {
            return Err(Error::BadCalibration("weights must be finite and nonnegative".into()));
        }
        let active = self.target_loss.map_or(0.0, |_| wl) + self.target_mean_queue.map_or(0.0, |_| wq);
        if active <= 0.0 {
            return Err(Error::BadCalibration("every set target has zero weight".into()));
        }
        Ok(())
    }

    /// Weighted squared relative error; absolute error for a zero target.
    pub fn score(&self, loss: f64, mean_queue: f64) -> f64 {
        let term = |value: f64, target: f64| {
            let err = if target > 0.0 { (value - target) / target } else { value };
            err * err
        };
        let mut total = 0.0;
        if let Some(t) = self.target_loss {
            total += self.weights.0 * term(loss, t);
        }
        if let Some(t) = self.target_mean_queue {
            total += self.weights.1 * term(mean_queue, t);
        }
        if total.is_nan() {
            f64::INFINITY
        } else {
            total
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "direct")]
    DirectSearch,
    Pso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub q: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub q: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    /// Every improvement of the best-so-far objective, in order.
    pub trace: Vec<TracePoint>,
    pub status: Status,
}

/// Analytic objective of `q` with the other parameters taken from `base`.
/// Vectors the pipeline rejects score `+inf`.
pub fn objective(base: &ModelParams, target: &CalibrationTarget, q: &[f64]) -> f64 {
    match base.with_renovation(q.to_vec()).and_then(|p| analyze(&p)) {
        Ok(a) => target.score(a.loss.pi, a.mean_queue()),
        Err(e) => {
            log::debug!("objective rejected q = {q:?}: {e}");
            f64::INFINITY
        }
    }
}

/// Minimizes the target objective over renovation vectors of length
/// `capacity + 1`. The renovation vector of `base` is ignored.
pub fn calibrate(
    base: &ModelParams,
    target: &CalibrationTarget,
    budget: usize,
    method: Method,
    seed: u64,
) -> Result<CalibrationResult> {
    target.validate()?;
    if budget < MIN_BUDGET {
        return Err(Error::BadCalibration(format!(
            "budget {budget} is below the minimum of {MIN_BUDGET}"
        )));
    }
    let base = base.with_renovation(baseline(base.capacity))?;

    let mut search = Search::new(&base, target, budget, DEFAULT_TOLERANCE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // no renovation at all is a boundary point neither method reaches exactly
    search.evaluate(baseline(base.capacity));
    match method {
        _ if search.done() => {}
        Method::DirectSearch => direct_search(&mut search, &mut rng),
        Method::Pso => swarm(&mut search, &mut rng),
    }
    Ok(search.finish())
}

fn baseline(capacity: usize) -> Vec<f64> {
    let mut q = vec![0.0; capacity + 1];
    q[0] = 1.0;
    q
}

struct Search<'a> {
    base: &'a ModelParams,
    target: &'a CalibrationTarget,
    budget: usize,
    tolerance: f64,
    evaluations: usize,
    best_q: Vec<f64>,
    best: f64,
    trace: Vec<TracePoint>,
}

impl<'a> Search<'a> {
    fn new(base: &'a ModelParams, target: &'a CalibrationTarget, budget: usize, tolerance: f64) -> Self {
        Search {
            base,
            target,
            budget,
            tolerance,
            evaluations: 0,
            best_q: baseline(base.capacity),
            best: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    fn remaining(&self) -> usize {
        self.budget - self.evaluations
    }

    fn done(&self) -> bool {
        self.remaining() == 0 || self.best <= self.tolerance
    }

    fn dim(&self) -> usize {
        self.base.capacity + 1
    }

    fn evaluate(&mut self, q: Vec<f64>) -> f64 {
        let f = objective(self.base, self.target, &q);
        self.record(q, f);
        f
    }

    fn record(&mut self, q: Vec<f64>, f: f64) {
        self.evaluations += 1;
        if f < self.best || self.trace.is_empty() {
            self.best = f;
            self.best_q = q.clone();
            self.trace.push(TracePoint {
                evaluation: self.evaluations,
                q,
                objective: f,
            });
        }
    }

    fn finish(self) -> CalibrationResult {
        let status = if self.best <= self.tolerance {
            Status::Converged
        } else {
            Status::BudgetExhausted
        };
        CalibrationResult {
            q: self.best_q,
            objective: self.best,
            evaluations: self.evaluations,
            trace: self.trace,
            status,
        }
    }
}

/// Maps free coordinates `z_1..z_N` to the simplex with `z_0 = 0`.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let top = z.iter().cloned().fold(0.0f64, f64::max);
    let mut q = Vec::with_capacity(z.len() + 1);
    q.push((-top).exp());
    q.extend(z.iter().map(|v| (v - top).exp()));
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    q
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    let mut q: Vec<f64> = v.iter().map(|x| (x - shift).max(0.0)).collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    q
}

fn direct_search(search: &mut Search, rng: &mut ChaCha8Rng) {
    let n = search.dim() - 1;
    let start: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
        .collect();
    let (mut best, mut best_f) = nelder_mead(search, (start, None), &axes);
    let mut step = 0.5;
    while !search.done() {
        // a randomly oriented simplex around the incumbent breaks the
        // degeneracy that stalls the previous run
        let edges: Vec<Vec<f64>> = random_basis(n, rng)
            .into_iter()
            .map(|e| e.into_iter().map(|v| step * v).collect())
            .collect();
        (best, best_f) = nelder_mead(search, (best, Some(best_f)), &edges);
        step = (0.5 * step).max(1e-4);
    }
}

/// Orthonormal basis from Gram–Schmidt on Gaussian vectors.
fn random_basis(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// One Nelder–Mead run in softmax coordinates from `start` and the vertices
/// `start + edges[i]`, until the simplex collapses or stalls, or the search
/// is done. Returns the best vertex and its objective.
fn nelder_mead(search: &mut Search, start: (Vec<f64>, Option<f64>), edges: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = edges.len();
    // dimension-adapted coefficients keep expansions from overshooting
    let dim = n as f64;
    let expand = 1.0 + 2.0 / dim;
    let contract = 0.75 - 0.5 / dim;
    let shrink = 1.0 - 1.0 / dim.max(2.0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let vertex = |search: &mut Search, z: Vec<f64>| {
        let f = search.evaluate(softmax(&z));
        (z, f)
    };
    let (origin, known) = start;
    simplex.push(match known {
        Some(f) => (origin.clone(), f),
        None => vertex(search, origin.clone()),
    });
    for edge in edges {
        if search.done() {
            break;
        }
        let z = origin.iter().zip(edge).map(|(a, b)| a + b).collect();
        simplex.push(vertex(search, z));
    }

    let window = 20 * (n + 1);
    let mut checkpoint = (search.evaluations, search.best);
    while !search.done() && simplex.len() == n + 1 {
        if search.evaluations >= checkpoint.0 + window {
            // slow creep along a valley: a fresh simplex does better
            if search.best > 0.1 * checkpoint.1 {
                break;
            }
            checkpoint = (search.evaluations, search.best);
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_f, worst_f) = (simplex[0].1, simplex[n].1);
        let size = simplex[1..]
            .iter()
            .flat_map(|(z, _)| z.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if size < 1e-10 || (worst_f - best_f).abs() <= 1e-16 * best_f.abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(z, _)| z[k]).sum::<f64>() / n as f64)
            .collect();
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
        };
        let worst = simplex[n].0.clone();
        let (reflected, fr) = vertex(search, toward(-1.0, &worst));
        if fr < best_f {
            if search.done() {
                simplex[n] = (reflected, fr);
                break;
            }
            let (expanded, fe) = vertex(search, toward(-expand, &worst));
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        if search.done() {
            break;
        }
        let (contracted, fc) = if fr < worst_f {
            vertex(search, toward(-contract, &worst))
        } else {
            vertex(search, toward(contract, &worst))
        };
        if fc < fr.min(worst_f) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if search.done() {
                break;
            }
            let z: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + shrink * (x - b)).collect();
            *v = vertex(search, z);
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("the simplex always holds its origin")
}

const SWARM_SIZE: usize = 10;
const INERTIA: f64 = 0.7298;
const PULL: f64 = 1.49618;

fn swarm(search: &mut Search, rng: &mut ChaCha8Rng) {
    let dim = search.dim();
    let uniform_point = |rng: &mut ChaCha8Rng| {
        let e: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = e.iter().sum();
        e.into_iter().map(|x| x / total).collect::<Vec<f64>>()
    };
    let mut position: Vec<Vec<f64>> = (0..SWARM_SIZE).map(|_| uniform_point(rng)).collect();
    // start each particle moving halfway toward a random point
    let mut velocity: Vec<Vec<f64>> = Vec::with_capacity(SWARM_SIZE);
    for here in &position {
        let other = uniform_point(rng);
        velocity.push(other.iter().zip(here).map(|(a, b)| 0.5 * (a - b)).collect());
    }
    let mut personal: Vec<(Vec<f64>, f64)> = Vec::new();

    while !search.done() {
        let count = SWARM_SIZE.min(search.remaining());
        let scores: Vec<f64> = position[..count]
            .par_iter()
            .map(|q| objective(search.base, search.target, q))
            .collect();
        for (q, f) in position.iter().zip(&scores) {
            search.record(q.clone(), *f);
        }
        if count < SWARM_SIZE {
            break;
        }
        if personal.is_empty() {
            personal = position.iter().cloned().zip(scores).collect();
        } else {
            for (k, f) in scores.into_iter().enumerate() {
                if f < personal[k].1 {
                    personal[k] = (position[k].clone(), f);
                }
            }
        }
        let global = search.best_q.clone();
        for k in 0..SWARM_SIZE {
            for i in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                velocity[k][i] = INERTIA * velocity[k][i]
                    + PULL * r1 * (personal[k].0[i] - position[k][i])
                    + PULL * r2 * (global[i] - position[k][i]);
            }
            let moved: Vec<f64> = position[k].iter().zip(&velocity[k]).map(|(x, v)| x + v).collect();
            position[k] = project_simplex(&moved);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_pins_the_first_coordinate() {
        let q = softmax(&[0.0, 0.0]);
        assert!(q.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        let q = softmax(&[800.0]);
        assert_eq!(q, vec![0.0, 1.0]);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let q = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(q.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn target_validation() {
        assert!(CalibrationTarget::new(None, None).validate().is_err());
        assert!(CalibrationTarget::new(Some(1.5), None).validate().is_err());
        let mut t = CalibrationTarget::new(Some(0.1), None);
        t.weights = (0.0, 1.0);
        assert!(t.validate().is_err());
        assert!(CalibrationTarget::new(None, Some(2.0)).validate().is_ok());
    }

    proptest! {
        #[test]
        fn projection_lands_on_the_simplex(v in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let q = project_simplex(&v);
            prop_assert!(q.iter().all(|x| *x >= 0.0));
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn projection_is_closest(v in prop::collection::vec(-3.0f64..3.0, 2..6), w in prop::collection::vec(0.0f64..1.0, 6)) {
            let q = project_simplex(&v);
            let total: f64 = w[..v.len()].iter().sum::<f64>() + 1e-12;
            let other: Vec<f64> = w[..v.len()].iter().map(|x| (x + 1e-12 / v.len() as f64) / total).collect();
            let dist = |a: &[f64]| a.iter().zip(&v).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            prop_assert!(dist(&q) <= dist(&other) + 1e-12);
        }

        #[test]
        fn softmax_lands_on_the_simplex(z in prop::collection::vec(-50.0f64..50.0, 1..8)) {
            let q = softmax(&z);
            prop_assert!(q.iter().all(|x| *x >= 0.0));
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
