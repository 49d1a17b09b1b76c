//! `min_k max_x (q_x + |k − p_x|)` by active-set enumeration, and by
//! restarted averaged subgradient steps finished with an exact active-set
//! solve on the nearly active points.
//!
//! At an optimum the active points `S` satisfy `q_x + |k − p_x| = t` and `k`
//! lies in the convex hull of `{p_x : x ∈ S}`. Some such `S` has at most four
//! affinely independent points, and for a fixed `S` the equalities reduce to
//! a linear system plus one quadratic in `τ = t − q_{s₀}`.

use arrayvec::ArrayVec;

use super::linalg;
use crate::bloch::BlochVector;

/// Objective value at `k`.
pub(crate) fn objective(points: &[BlochVector], offsets: &[f64], k: BlochVector) -> f64 {
    points
        .iter()
        .zip(offsets)
        .map(|(p, q)| q + k.distance(*p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Candidate centers at which every point of `subset` is active.
pub(crate) fn subset_centers(
    points: &[BlochVector],
    offsets: &[f64],
    subset: &[usize],
) -> ArrayVec<BlochVector, 2> {
    let mut out = ArrayVec::new();
    let p0 = points[subset[0]];
    if subset.len() == 1 {
        out.push(p0);
        return out;
    }
    let q0 = offsets[subset[0]];
    let d: ArrayVec<BlochVector, 3> = subset[1..].iter().map(|&i| points[i] - p0).collect();
    let e: ArrayVec<f64, 3> = subset[1..].iter().map(|&i| offsets[i] - q0).collect();
    let n = d.len();

    // G α = b + τ c, with G the Gram matrix of the edge vectors.
    let mut g = [[0.0; 5]; 5];
    let mut rhs = [[0.0; 2]; 5];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = d[i].dot(d[j]);
        }
        rhs[i][0] = (d[i].norm_sq() - e[i] * e[i]) / 2.0;
        rhs[i][1] = e[i];
    }
    if linalg::solve(&mut g, &mut rhs, n, 1e-10).is_none() {
        return out;
    }
    let mut y0 = BlochVector::ZERO;
    let mut y1 = BlochVector::ZERO;
    for j in 0..n {
        y0 += d[j] * rhs[j][0];
        y1 += d[j] * rhs[j][1];
    }

    // |y0 + τ y1|² = τ²
    let a = y1.norm_sq() - 1.0;
    let b = y0.dot(y1);
    let c = y0.norm_sq();
    let mut push = |tau: f64| {
        if tau.is_finite() && tau >= -1e-15 {
            let tau = tau.max(0.0);
            out.push(p0 + y0 + y1 * tau);
        }
    };
    if a.abs() <= 1e-14 {
        if b != 0.0 {
            push(-c / (2.0 * b));
        }
        return out;
    }
    let mut disc = b * b - a * c;
    if disc < 0.0 {
        if disc >= -1e-12 * (b * b + (a * c).abs()) {
            disc = 0.0;
        } else {
            return out;
        }
    }
    let root = disc.sqrt();
    let qn = -(b + b.signum() * root);
    if qn != 0.0 {
        push(qn / a);
        push(c / qn);
    } else {
        push(0.0);
    }
    out
}

/// Best center over every subset of `candidates` with size 1 to 4.
pub(crate) fn enumerate(
    points: &[BlochVector],
    offsets: &[f64],
    candidates: &[usize],
) -> (BlochVector, f64) {
    let mut best = (points[candidates[0]], f64::INFINITY);
    let n = candidates.len();
    let mut subset: ArrayVec<usize, 4> = ArrayVec::new();
    for size in 1..=n.min(4) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            subset.clear();
            subset.extend(idx.iter().map(|&i| candidates[i]));
            for k in subset_centers(points, offsets, &subset) {
                let v = objective(points, offsets, k);
                if v < best.1 {
                    best = (k, v);
                }
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    best
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// State of the iterative path between polish attempts.
pub(crate) struct Descent<'a> {
    points: &'a [BlochVector],
    offsets: &'a [f64],
    pub k: BlochVector,
    pub value: f64,
    step: f64,
    pub iterations: usize,
}

impl<'a> Descent<'a> {
    pub fn new(points: &'a [BlochVector], offsets: &'a [f64]) -> Self {
        let n = points.len() as f64;
        let k = points.iter().fold(BlochVector::ZERO, |a, p| a + *p) * (1.0 / n);
        let spread = points.iter().map(|p| k.distance(*p)).fold(0.0, f64::max);
        Self {
            points,
            offsets,
            k,
            value: objective(points, offsets, k),
            step: spread.max(1e-3) / 2.0,
            iterations: 0,
        }
    }

    /// One epoch of fixed-step subgradient descent; restarts from the better
    /// of the running average and the best iterate, then halves the step.
    pub fn epoch(&mut self, len: usize) {
        let mut k = self.k;
        let mut avg = BlochVector::ZERO;
        let mut best = (self.k, self.value);
        for t in 0..len {
            let (mut arg, mut top) = (0, f64::NEG_INFINITY);
            for (i, (p, q)) in self.points.iter().zip(self.offsets).enumerate() {
                let v = q + k.distance(*p);
                if v > top {
                    top = v;
                    arg = i;
                }
            }
            if top < best.1 {
                best = (k, top);
            }
            let g = (k - self.points[arg]).normalized().unwrap_or(BlochVector::ZERO);
            k = k - g * self.step;
            avg = avg * (t as f64 / (t + 1) as f64) + k * (1.0 / (t + 1) as f64);
        }
        self.iterations += len;
        let avg_value = objective(self.points, self.offsets, avg);
        if avg_value < best.1 {
            best = (avg, avg_value);
        }
        self.k = best.0;
        self.value = best.1;
        self.step /= 2.0;
    }

    /// Indices ordered by how close their constraint is to being active.
    pub fn nearly_active(&self, at: BlochVector, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        let gap = |i: usize| -(self.offsets[i] + at.distance(self.points[i]));
        idx.sort_by(|&a, &b| gap(a).total_cmp(&gap(b)));
        idx.truncate(count);
        idx
    }
}
