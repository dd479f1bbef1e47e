//! Embedded Markov chain at service-completion epochs.
//!
//! State `i` is the number of customers left in the system right after a
//! departure and the renovation that follows it, `0..=N`. From states 0 and
//! 1 the next service starts with one customer, so both rows coincide.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PoissonKernel, RenovationTail, Resolution};

/// Row sums of a freshly built matrix must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EmbeddedChain {
    pub matrix: DMatrix<f64>,
    pub pplus: Vec<f64>,
}

impl EmbeddedChain {
    pub fn solve(params: &ModelParams, kernel: &PoissonKernel) -> Result<Self> {
        let matrix = build_matrix(params, kernel);
        let pplus = stationary(&matrix)?;
        Ok(EmbeddedChain { matrix, pplus })
    }

    pub fn states(&self) -> usize {
        self.pplus.len()
    }
}

pub fn build_matrix(params: &ModelParams, kernel: &PoissonKernel) -> DMatrix<f64> {
    match params.option {
        Resolution::KeepLast => build_matrix_option1(params, kernel),
        Resolution::Cancel => build_matrix_option2(params, kernel),
    }
}

struct Terms<'a> {
    q: &'a [f64],
    tail: RenovationTail,
    kernel: &'a PoissonKernel,
}

impl Terms<'_> {
    fn q(&self, i: isize) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.q.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    fn big_q(&self, i: isize) -> f64 {
        if i < 0 {
            1.0
        } else {
            self.tail.get(i as usize)
        }
    }

    fn beta(&self, k: isize) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.kernel.beta(k as usize)
        }
    }

    fn b(&self, k: isize) -> f64 {
        self.kernel.tail(k)
    }

    /// `Σ_{k=lo}^{hi} β_k f(k)`, empty when `hi < lo`.
    fn sum(&self, lo: isize, hi: isize, f: impl Fn(isize) -> f64) -> f64 {
        (lo..=hi).map(|k| self.beta(k) * f(k)).sum()
    }
}

/// Transition matrix when an oversized renovation keeps the last customer.
pub fn build_matrix_option1(params: &ModelParams, kernel: &PoissonKernel) -> DMatrix<f64> {
    let n = params.capacity as isize;
    let t = Terms {
        q: &params.renovation,
        tail: params.tail(),
        kernel,
    };
    let size = params.capacity + 1;
    let mut p = DMatrix::zeros(size, size);

    // rows 0 and 1
    for j in 0..=n {
        let v = match j {
            0 => t.beta(0),
            1 => {
                t.sum(1, n, |k| t.q(k - 1))
                    + t.b(n) * t.q(n - 1)
                    + t.sum(1, n, |k| t.big_q(k))
                    + t.b(n) * t.q(n)
            }
            _ => t.sum(j, n, |k| t.q(k - j)) + t.b(n) * t.q(n - j),
        };
        p[(0, j as usize)] = v;
        p[(1, j as usize)] = v;
    }

    for i in 2..=n {
        let top = n + 1 - i;
        for j in 1..=n {
            let v = if j == 1 {
                t.sum(0, top, |k| t.big_q(k + i - 1))
                    + t.b(top) * t.q(n)
                    + t.sum((2 - i).max(0), top, |k| t.q(k + i - 2))
                    + t.b(top) * t.q(n - 1)
            } else {
                t.sum((j - i + 1).max(0), top, |k| t.q(k - j + i - 1)) + t.b(top) * t.q(n - j)
            };
            p[(i as usize, j as usize)] = v;
        }
    }
    p
}

/// Transition matrix when an oversized renovation is cancelled.
///
/// For rows `i >= 2` the arrival index carries an `i`-dependent shift: a
/// service started with `i` customers that sees `k` arrivals ends with
/// `min(i - 1 + k, N)` waiting.
pub fn build_matrix_option2(params: &ModelParams, kernel: &PoissonKernel) -> DMatrix<f64> {
    let n = params.capacity as isize;
    let t = Terms {
        q: &params.renovation,
        tail: params.tail(),
        kernel,
    };
    let size = params.capacity + 1;
    let mut p = DMatrix::zeros(size, size);

    for j in 0..=n {
        let v = if j == 0 {
            t.beta(0)
        } else if j < n {
            t.beta(j) * t.big_q(j) + t.sum(j, n, |k| t.q(k - j)) + t.b(n) * t.q(n - j)
        } else {
            (t.q(0) + t.q(n)) * t.b(n - 1)
        };
        p[(0, j as usize)] = v;
        p[(1, j as usize)] = v;
    }

    for i in 2..=n {
        let top = n + 1 - i;
        for j in 1..=n {
            let v = if j <= i - 2 {
                t.sum(0, top, |k| t.q(k + i - 1 - j)) + t.b(top) * t.q(n - j)
            } else if j < n {
                t.beta(j - i + 1) * t.big_q(j)
                    + t.sum(j - i + 1, top, |k| t.q(k + i - 1 - j))
                    + t.b(top) * t.q(n - j)
            } else {
                (t.q(0) + t.q(n)) * t.b(n - i)
            };
            p[(i as usize, j as usize)] = v;
        }
    }
    p
}

/// Stationary vector of an irreducible stochastic matrix by GTH state
/// reduction. No subtractions are performed, so the result keeps full
/// relative accuracy even for nearly decomposable chains.
pub fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let size = p.nrows();
    assert_eq!(size, p.ncols(), "transition matrix must be square");
    if size == 0 {
        return Ok(Vec::new());
    }
    let mut a = p.clone();
    for n in (1..size).rev() {
        let s: f64 = (0..n).map(|j| a[(n, j)]).sum();
        if !(s > 0.0) {
            return Err(Error::SingularChain { state: n });
        }
        for i in 0..n {
            a[(i, n)] /= s;
        }
        for i in 0..n {
            let ain = a[(i, n)];
            if ain != 0.0 {
                for j in 0..n {
                    a[(i, j)] += ain * a[(n, j)];
                }
            }
        }
    }
    let mut x = vec![0.0; size];
    x[0] = 1.0;
    for j in 1..size {
        x[j] = (0..j).map(|i| x[i] * a[(i, j)]).sum();
    }
    let total: f64 = x.iter().sum();
    Ok(x.into_iter().map(|v| v / total).collect())
}
