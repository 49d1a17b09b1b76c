//! Geometric core of the dual problem.
//!
//! For scaled points `p_x = q_x·v_x` with offsets `q_x` the dual of the
//! guessing problem is `min_k max_x (q_x + |k − p_x|)`. With equal offsets
//! this is the smallest enclosing ball of the points.

mod linalg;
mod minimax;
mod weights;
mod welzl;

use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::{Error, Result};
use crate::SolverOptions;

/// Scaled Bloch points with additive offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<BlochVector>,
    offsets: Vec<f64>,
}

impl PointSet {
    pub fn new(points: Vec<BlochVector>, offsets: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInstance("point set is empty".into()));
        }
        if points.len() != offsets.len() {
            return Err(Error::InvalidInstance(format!(
                "{} points but {} offsets",
                points.len(),
                offsets.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInstance("non-finite point".into()));
        }
        if offsets.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(Error::InvalidInstance("offsets must be finite and nonnegative".into()));
        }
        Ok(Self { points, offsets })
    }

    /// All offsets zero.
    pub fn unweighted(points: Vec<BlochVector>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![0.0; n])
    }

    pub fn points(&self) -> &[BlochVector] {
        &self.points
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn objective(&self, k: BlochVector) -> f64 {
        minimax::objective(&self.points, &self.offsets, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallMethod {
    /// Move-to-front recursion for the unweighted ball.
    EnclosingBall,
    /// Exhaustive active sets of size ≤ 4.
    ExactActiveSet,
    /// Averaged subgradient descent followed by an active-set solve.
    SubgradientPolish,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSolution {
    pub center: BlochVector,
    /// `max_x (offset_x + |center − p_x|)`.
    pub value: f64,
    pub support: Vec<usize>,
    /// One weight per point, zero off the support.
    pub support_weights: Vec<f64>,
    /// `|Σ λ_x u_x|` over the support.
    pub stationarity: f64,
    pub method: BallMethod,
    pub iterations: usize,
}

impl BallSolution {
    /// `value` minus the common offset, for the unweighted case.
    pub fn radius(&self, offset: f64) -> f64 {
        self.value - offset
    }
}

/// Smallest ball containing every point. `value` is the radius.
pub fn min_enclosing_ball(points: &[BlochVector], opts: &SolverOptions) -> Result<BallSolution> {
    let ps = PointSet::unweighted(points.to_vec())?;
    let center = welzl::enclosing_center(ps.points(), opts.seed);
    let mut sol = finish(center, &ps, opts)?;
    sol.method = BallMethod::EnclosingBall;
    check_stationary(sol, opts)
}

/// Global minimizer of `max_x (offset_x + |k − p_x|)`.
pub fn offset_minimax(ps: &PointSet, opts: &SolverOptions) -> Result<BallSolution> {
    let n = ps.len();
    if n <= opts.exact_limit {
        let all: Vec<usize> = (0..n).collect();
        let (k, _) = minimax::enumerate(ps.points(), ps.offsets(), &all);
        let mut sol = finish(k, ps, opts)?;
        sol.method = BallMethod::ExactActiveSet;
        return check_stationary(sol, opts);
    }

    let mut descent = minimax::Descent::new(ps.points(), ps.offsets());
    let mut epoch_len = 64;
    let mut last_residual = f64::INFINITY;
    while descent.iterations < opts.max_iters {
        descent.epoch(epoch_len.min(opts.max_iters - descent.iterations));
        epoch_len = (epoch_len * 2).min(1 << 15);

        let width = ps
            .points()
            .iter()
            .zip(ps.offsets())
            .filter(|(p, q)| **q + descent.k.distance(**p) >= descent.value - 1e-9)
            .count()
            .clamp(8, 14)
            .min(n);
        let near = descent.nearly_active(descent.k, width);
        let (k, v) = minimax::enumerate(ps.points(), ps.offsets(), &near);
        if v < descent.value {
            descent.k = k;
            descent.value = v;
        }
        match finish(k, ps, opts) {
            Ok(mut sol) if sol.stationarity <= opts.tol.stationary => {
                sol.method = BallMethod::SubgradientPolish;
                sol.iterations = descent.iterations;
                return Ok(sol);
            }
            Ok(sol) => last_residual = sol.stationarity,
            Err(Error::InfeasibleWeights { residual }) => last_residual = residual,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence {
        iterations: descent.iterations,
        residual: last_residual,
    })
}

/// Convex weights over the support of `(k, value)` balancing the unit
/// directions `u_x = (k − p_x)/|k − p_x|`.
///
/// A support point with `value − offset_x ≤ tol_active` sits at the center;
/// its subdifferential contains zero, so it takes weight 1 alone.
pub fn support_weights(
    k: BlochVector,
    value: f64,
    ps: &PointSet,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let tol = opts.tol.active;
    let support = support_of(k, value, ps, tol);
    let mut out = vec![0.0; ps.len()];
    if support.is_empty() {
        return Err(Error::InfeasibleWeights {
            residual: f64::INFINITY,
        });
    }
    if let Some(&x) = support
        .iter()
        .filter(|&&x| value - ps.offsets[x] <= tol)
        .min_by(|&&a, &&b| (value - ps.offsets[a]).total_cmp(&(value - ps.offsets[b])))
    {
        out[x] = 1.0;
        return Ok(out);
    }
    let dirs = directions(k, ps, &support)?;
    let lam0 = weights::min_norm_point(&dirs);
    let residual = combination(&dirs, &lam0).norm();
    if residual > tol {
        return Err(Error::InfeasibleWeights { residual });
    }
    let lam = weights::min_norm_weights(&dirs, &lam0);
    for (&x, l) in support.iter().zip(lam) {
        out[x] = l;
    }
    Ok(out)
}

fn support_of(k: BlochVector, value: f64, ps: &PointSet, tol: f64) -> Vec<usize> {
    (0..ps.len())
        .filter(|&x| ps.offsets[x] + k.distance(ps.points[x]) >= value - tol)
        .collect()
}

fn directions(k: BlochVector, ps: &PointSet, support: &[usize]) -> Result<Vec<BlochVector>> {
    support
        .iter()
        .map(|&x| {
            (k - ps.points[x])
                .normalized()
                .ok_or(Error::InfeasibleWeights { residual: 1.0 })
        })
        .collect()
}

fn combination(dirs: &[BlochVector], lam: &[f64]) -> BlochVector {
    dirs.iter()
        .zip(lam)
        .fold(BlochVector::ZERO, |acc, (u, l)| acc + *u * *l)
}

/// Support, weights and stationarity residual at `k`.
fn finish(k: BlochVector, ps: &PointSet, opts: &SolverOptions) -> Result<BallSolution> {
    let value = ps.objective(k);
    let support = support_of(k, value, ps, opts.tol.active);
    let weights = support_weights(k, value, ps, opts)?;
    let stationarity = if support
        .iter()
        .any(|&x| value - ps.offsets[x] <= opts.tol.active)
    {
        0.0
    } else {
        let dirs = directions(k, ps, &support)?;
        let lam: Vec<f64> = support.iter().map(|&x| weights[x]).collect();
        combination(&dirs, &lam).norm()
    };
    Ok(BallSolution {
        center: k,
        value,
        support,
        support_weights: weights,
        stationarity,
        method: BallMethod::ExactActiveSet,
        iterations: 0,
    })
}

fn check_stationary(sol: BallSolution, opts: &SolverOptions) -> Result<BallSolution> {
    if sol.stationarity > opts.tol.stationary {
        return Err(Error::NoConvergence {
            iterations: sol.iterations,
            residual: sol.stationarity,
        });
    }
    Ok(sol)
}
