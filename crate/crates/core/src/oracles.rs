//! Independent checks of a solution.
//!
//! Nothing here calls into the ball solver or the Bloch operator helpers:
//! points, norms, objectives and eigenvalues are recomputed from raw
//! coordinates so that agreement with [`crate::solve`] means something.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discriminator::Solution;
use crate::ensemble::Ensemble;

struct Instance {
    points: Vec<[f64; 3]>,
    offsets: Vec<f64>,
}

impl Instance {
    fn new(e: &Ensemble) -> Self {
        let (points, offsets) = e
            .states()
            .iter()
            .zip(e.priors())
            .filter(|(_, &q)| q > 0.0)
            .map(|(s, &q)| {
                let v = s.bloch().to_array();
                ([q * v[0], q * v[1], q * v[2]], q)
            })
            .unzip();
        Self { points, offsets }
    }

    fn eval(&self, k: [f64; 3]) -> f64 {
        let mut top = f64::NEG_INFINITY;
        for (p, q) in self.points.iter().zip(&self.offsets) {
            let d0 = k[0] - p[0];
            let d1 = k[1] - p[1];
            let d2 = k[2] - p[2];
            let v = q + (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
            if v > top {
                top = v;
            }
        }
        top
    }

    /// Objective and the index attaining it.
    fn eval_arg(&self, k: [f64; 3]) -> (f64, usize) {
        let mut top = (f64::NEG_INFINITY, 0);
        for (i, (p, q)) in self.points.iter().zip(&self.offsets).enumerate() {
            let d0 = k[0] - p[0];
            let d1 = k[1] - p[1];
            let d2 = k[2] - p[2];
            let v = q + (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
            if v > top.0 {
                top = (v, i);
            }
        }
        top
    }
}

/// Minimum of the dual objective over the grid `step·ℤ³ ∩ [−1, 1]³`
/// restricted to `|k| ≤ 1 + step`.
///
/// The objective is 1-Lipschitz in `k`, so boxes of grid points whose center
/// value minus the box half-diagonal cannot beat the incumbent are skipped.
/// The result equals an exhaustive scan of the same grid.
pub fn grid_dual(e: &Ensemble, step: f64) -> f64 {
    assert!(step > 0.0 && step <= 0.5, "grid step must lie in (0, 0.5]");
    let inst = Instance::new(e);
    let m = (1.0 / step + 1e-9).floor() as i64;
    let grid = Grid {
        inst: &inst,
        step,
        radius: 1.0 + step,
    };
    let mut best = grid.value([0, 0, 0]).unwrap_or(f64::INFINITY);
    grid.search([-m, -m, -m], [m, m, m], &mut best);
    best
}

struct Grid<'a> {
    inst: &'a Instance,
    step: f64,
    radius: f64,
}

impl Grid<'_> {
    fn point(&self, idx: [i64; 3]) -> [f64; 3] {
        [idx[0] as f64 * self.step, idx[1] as f64 * self.step, idx[2] as f64 * self.step]
    }

    fn value(&self, idx: [i64; 3]) -> Option<f64> {
        let k = self.point(idx);
        let r2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        (r2 <= self.radius * self.radius).then(|| self.inst.eval(k))
    }

    fn search(&self, lo: [i64; 3], hi: [i64; 3], best: &mut f64) {
        // distance from the origin to the box, for the ball restriction
        let mut near2 = 0.0;
        for a in 0..3 {
            let l = lo[a] as f64 * self.step;
            let h = hi[a] as f64 * self.step;
            let c = if l > 0.0 {
                l
            } else if h < 0.0 {
                h
            } else {
                0.0
            };
            near2 += c * c;
        }
        if near2 > self.radius * self.radius {
            return;
        }

        let count: i64 = (0..3).map(|a| hi[a] - lo[a] + 1).product();
        if count <= 27 {
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for l in lo[2]..=hi[2] {
                        if let Some(v) = self.value([i, j, l]) {
                            if v < *best {
                                *best = v;
                            }
                        }
                    }
                }
            }
            return;
        }

        let mid = [(lo[0] + hi[0]).div_euclid(2), (lo[1] + hi[1]).div_euclid(2), (lo[2] + hi[2]).div_euclid(2)];
        let c = self.point(mid);
        let center_value = self.inst.eval(c);
        let mut reach2 = 0.0;
        for a in 0..3 {
            let span = (mid[a] - lo[a]).max(hi[a] - mid[a]) as f64 * self.step;
            reach2 += span * span;
        }
        if center_value - reach2.sqrt() > *best + 1e-12 {
            return;
        }

        let axis = (0..3).max_by_key(|&a| hi[a] - lo[a]).unwrap();
        let mut left_hi = hi;
        left_hi[axis] = mid[axis];
        let mut right_lo = lo;
        right_lo[axis] = mid[axis] + 1;
        let halves = [(lo, left_hi), (right_lo, hi)];
        // visit the half nearer to the descent direction first
        let order = if self.inst.eval(self.point(box_mid(halves[0]))) <= self.inst.eval(self.point(box_mid(halves[1]))) {
            [0, 1]
        } else {
            [1, 0]
        };
        for h in order {
            self.search(halves[h].0, halves[h].1, best);
        }
    }
}

fn box_mid((lo, hi): ([i64; 3], [i64; 3])) -> [i64; 3] {
    [(lo[0] + hi[0]).div_euclid(2), (lo[1] + hi[1]).div_euclid(2), (lo[2] + hi[2]).div_euclid(2)]
}

/// Restarted subgradient descent on the dual objective.
///
/// The budget is split into epochs of constant step; each epoch restarts from
/// the better of its Polyak average and its best iterate, then halves the
/// step. Returns the objective at the best point found, which is always a
/// valid upper bound on the guessing probability.
pub fn subgradient_dual(e: &Ensemble, iters: usize, seed: u64) -> f64 {
    assert!(iters >= 1);
    let inst = Instance::new(e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = [0.0; 3];
    for c in start.iter_mut() {
        *c = rng.gen_range(-0.1..0.1);
    }
    let mut best = (start, inst.eval(start));

    let epochs = 40usize.min(iters);
    let per_epoch = iters / epochs;
    let mut step = 0.5;
    let mut done = 0;
    for ep in 0..epochs {
        let len = if ep + 1 == epochs { iters - done } else { per_epoch };
        let mut k = best.0;
        let mut avg = [0.0; 3];
        for t in 0..len {
            let (v, arg) = inst.eval_arg(k);
            if v < best.1 {
                best = (k, v);
            }
            let p = inst.points[arg];
            let g = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
            let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if gn > 0.0 {
                for a in 0..3 {
                    k[a] -= step * g[a] / gn;
                }
            }
            let w = 1.0 / (t + 1) as f64;
            for a in 0..3 {
                avg[a] += (k[a] - avg[a]) * w;
            }
        }
        done += len;
        let av = inst.eval(avg);
        if av < best.1 {
            best = (avg, av);
        }
        step /= 2.0;
    }
    best.1
}

/// Certificate residuals recomputed from explicit 2×2 complex matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MatrixResiduals {
    /// Operator-norm spread of the decompositions `q_x ρ_x + r_x σ_x` and
    /// their distance to `K`.
    pub stationarity: f64,
    /// `max_x |r_x tr[σ_x M_x]|`.
    pub slackness: f64,
    /// Negative eigenvalues of `K − q_x ρ_x` and `σ_x`, and negative `r_x`.
    pub feasibility: f64,
    /// `|tr K − Σ q_x tr[M_x ρ_x]|`.
    pub duality_gap: f64,
    /// `‖Σ M_x − I‖` in operator norm.
    pub completeness: f64,
    /// Negative eigenvalues of the `M_x`.
    pub positivity: f64,
}

impl MatrixResiduals {
    pub fn max(&self) -> f64 {
        [
            self.stationarity,
            self.slackness,
            self.feasibility,
            self.duality_gap,
            self.completeness,
            self.positivity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

type M2 = Matrix2<Complex64>;

fn from_bloch(scalar: f64, v: [f64; 3]) -> M2 {
    let c = Complex64::new;
    let i = M2::identity();
    let x = M2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.));
    let y = M2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.));
    let z = M2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.));
    (i * c(scalar, 0.) + x * c(v[0], 0.) + y * c(v[1], 0.) + z * c(v[2], 0.)) * c(0.5, 0.)
}

fn eigenvalues(m: &M2) -> [f64; 2] {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let e = h.symmetric_eigenvalues();
    [e[0].min(e[1]), e[0].max(e[1])]
}

fn op_norm(m: &M2) -> f64 {
    let [lo, hi] = eigenvalues(m);
    lo.abs().max(hi.abs())
}

fn trace(m: &M2) -> f64 {
    (m[(0, 0)] + m[(1, 1)]).re
}

/// Rebuilds `K`, `ρ_x`, `σ_x` and `M_x` as matrices and re-evaluates the
/// optimality conditions.
pub fn matrix_check(e: &Ensemble, sol: &Solution) -> MatrixResiduals {
    let cert = &sol.certificate;
    let n = e.len();
    let k = from_bloch(cert.k0, cert.k.to_array());
    let rho: Vec<M2> = e.states().iter().map(|s| from_bloch(1.0, s.bloch().to_array())).collect();
    let sigma: Vec<M2> = cert
        .complementary
        .iter()
        .map(|c| from_bloch(1.0, c.u.to_array()))
        .collect();
    let povm: Vec<M2> = sol
        .povm
        .elements
        .iter()
        .map(|m| {
            let w = m.w.to_array();
            from_bloch(m.m, [m.m * w[0], m.m * w[1], m.m * w[2]])
        })
        .collect();

    let mut out = MatrixResiduals::default();
    let c = |v: f64| Complex64::new(v, 0.0);
    let decomp: Vec<M2> = (0..n)
        .map(|x| rho[x] * c(e.prior(x)) + sigma[x] * c(cert.complementary[x].r))
        .collect();
    for x in 0..n {
        out.stationarity = out.stationarity.max(op_norm(&(decomp[x] - k)));
        for y in x + 1..n {
            out.stationarity = out.stationarity.max(op_norm(&(decomp[x] - decomp[y])));
        }
        let r = cert.complementary[x].r;
        if let Some(mx) = povm.get(x) {
            out.slackness = out.slackness.max((r * trace(&(sigma[x] * mx))).abs());
            out.positivity = out.positivity.max(-eigenvalues(mx)[0]);
        }
        out.feasibility = out
            .feasibility
            .max(-eigenvalues(&(k - rho[x] * c(e.prior(x))))[0])
            .max(-eigenvalues(&sigma[x])[0])
            .max(-r);
    }
    let primal: f64 = (0..n.min(povm.len()))
        .map(|x| e.prior(x) * trace(&(povm[x] * rho[x])))
        .sum();
    out.duality_gap = (trace(&k) - primal).abs();
    let total = povm.iter().fold(M2::zeros(), |acc, m| acc + m);
    out.completeness = if povm.len() == n {
        op_norm(&(total - M2::identity()))
    } else {
        f64::INFINITY
    };
    out.feasibility = out.feasibility.max(0.0);
    out.positivity = out.positivity.max(0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{solve, BlochVector, QubitState, SolverOptions};

    fn st(x: f64, y: f64, z: f64) -> QubitState {
        QubitState::from_xyz(x, y, z).unwrap()
    }

    fn random_ensemble(seed: u64, n: usize) -> Ensemble {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = (0..n)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let f: f64 = rng.gen_range(0.0..1.0);
                let s = (1.0 - z * z).sqrt();
                st(f * s * phi.cos(), f * s * phi.sin(), f * z)
            })
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = w.iter().sum();
        Ensemble::new(states, w.iter().map(|v| v / t).collect()).unwrap()
    }

    fn exhaustive(e: &Ensemble, step: f64) -> f64 {
        let inst = Instance::new(e);
        let m = (1.0 / step + 1e-9).floor() as i64;
        let mut best = f64::INFINITY;
        for i in -m..=m {
            for j in -m..=m {
                for l in -m..=m {
                    let k = [i as f64 * step, j as f64 * step, l as f64 * step];
                    if k[0] * k[0] + k[1] * k[1] + k[2] * k[2] <= (1.0 + step) * (1.0 + step) {
                        best = best.min(inst.eval(k));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn pruned_grid_equals_exhaustive_scan() {
        for seed in 0..5 {
            let e = random_ensemble(seed, 5);
            for step in [0.1, 0.05] {
                assert_eq!(grid_dual(&e, step).to_bits(), exhaustive(&e, step).to_bits());
            }
        }
    }

    #[test]
    fn grid_examples() {
        let pm = Ensemble::equal(vec![st(0., 0., 1.), st(0., 0., -1.)]).unwrap();
        let v = grid_dual(&pm, 1e-2);
        assert!((1.0..=1.01).contains(&v), "{v}");
        let same = Ensemble::new(vec![st(0., 0., 1.), st(0., 0., 1.)], vec![0.9, 0.1]).unwrap();
        let v = grid_dual(&same, 1e-2);
        assert!((0.9..=0.91).contains(&v), "{v}");
        let e = random_ensemble(42, 5);
        let p = solve(&e, &SolverOptions::default()).unwrap().p_guess;
        let v = grid_dual(&e, 1e-2);
        assert!(v >= p - 1e-12 && v <= p + 1e-2);
    }

    #[test]
    fn grid_is_monotone_under_refinement() {
        let e = random_ensemble(3, 6);
        let mut prev = f64::INFINITY;
        for step in [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125] {
            let v = grid_dual(&e, step);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn fine_grid_is_fast_enough() {
        let e = random_ensemble(9, 16);
        let p = solve(&e, &SolverOptions::default()).unwrap().p_guess;
        let v = grid_dual(&e, 1e-3);
        assert!(v >= p - 1e-12 && v <= p + 1e-3);
    }

    #[test]
    fn subgradient_examples() {
        let pm = Ensemble::equal(vec![st(0., 0., 1.), st(0., 0., -1.)]).unwrap();
        assert!((subgradient_dual(&pm, 1_000_000, 1) - 1.0).abs() <= 1e-6);
        let s = 1.0 / 3f64.sqrt();
        let tetra = Ensemble::equal(vec![st(s, s, s), st(s, -s, -s), st(-s, s, -s), st(-s, -s, s)]).unwrap();
        assert!((subgradient_dual(&tetra, 1_000_000, 2) - 0.5).abs() <= 1e-6);
        for seed in 0..5 {
            let e = random_ensemble(100 + seed, 3 + seed as usize * 3);
            let p = solve(&e, &SolverOptions::default()).unwrap().p_guess;
            let v = subgradient_dual(&e, 1_000_000, seed);
            assert!(v >= p - 1e-12 && v - p <= 1e-6, "{seed}: {v} vs {p}");
        }
    }

    #[test]
    fn matrix_check_on_known_solutions() {
        let s = 1.0 / 3f64.sqrt();
        let tetra = Ensemble::equal(vec![st(s, s, s), st(s, -s, -s), st(-s, s, -s), st(-s, -s, s)]).unwrap();
        let sol = solve(&tetra, &SolverOptions::default()).unwrap();
        assert!(matrix_check(&tetra, &sol).max() <= 1e-12);

        let e = random_ensemble(5, 7);
        let sol = solve(&e, &SolverOptions::default()).unwrap();
        assert!(matrix_check(&e, &sol).max() <= 1e-8);

        let x = sol.support[0];
        let mut bad = sol.clone();
        let u = bad.certificate.complementary[x].u;
        bad.certificate.complementary[x].u = BlochVector::from_xyz(-u.x, -u.y, -u.z);
        assert!(matrix_check(&e, &bad).stationarity > 1e-3);
    }
}
