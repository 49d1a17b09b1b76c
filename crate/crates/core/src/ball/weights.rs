//! Convex weights certifying `0 ∈ conv{u_x}` for the unit directions of the
//! support. Phase one finds any weighting (Wolfe's minimum-norm point);
//! phase two moves to the minimum-Euclidean-norm weighting among all that
//! reproduce the same combination.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};

use super::linalg;
use crate::bloch::BlochVector;

/// Returns weights on the simplex minimizing `|Σ λ_i u_i|`.
pub(crate) fn min_norm_point(u: &[BlochVector]) -> Vec<f64> {
    let m = u.len();
    assert!(m > 0);
    let scale = u.iter().map(|v| v.norm_sq()).fold(0.0, f64::max).max(1e-300);

    let start = (0..m)
        .min_by(|&i, &j| u[i].norm_sq().total_cmp(&u[j].norm_sq()))
        .unwrap();
    let mut corral = vec![start];
    let mut lam = vec![1.0];
    let mut x = u[start];

    for _ in 0..(50 + 20 * m) {
        let xx = x.norm_sq();
        if xx <= 1e-32 * scale {
            break;
        }
        let j = (0..m)
            .min_by(|&i, &k| x.dot(u[i]).total_cmp(&x.dot(u[k])))
            .unwrap();
        if x.dot(u[j]) >= xx - 1e-15 * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lam.push(0.0);

        loop {
            let Some(mu) = affine_minimizer(u, &corral) else {
                // affinely dependent corral; drop the newcomer and stop
                corral.pop();
                lam.pop();
                break;
            };
            if mu.iter().all(|&v| v > 1e-15) {
                lam = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, mv) in lam.iter().zip(&mu) {
                if *mv <= 1e-15 {
                    let d = l - mv;
                    if d > 0.0 {
                        theta = theta.min(l / d);
                    }
                }
            }
            for (l, mv) in lam.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * mv;
            }
            let mut i = 0;
            let mut removed = false;
            while i < corral.len() {
                if lam[i] <= 1e-15 {
                    corral.remove(i);
                    lam.remove(i);
                    removed = true;
                } else {
                    i += 1;
                }
            }
            if !removed {
                // theta landed exactly; drop the smallest weight
                let (i, _) = lam
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                corral.remove(i);
                lam.remove(i);
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= s);
        }
        x = combine(u, &corral, &lam);
    }

    let mut out = vec![0.0; m];
    for (&i, &l) in corral.iter().zip(&lam) {
        out[i] = l;
    }
    out
}

fn combine(u: &[BlochVector], idx: &[usize], lam: &[f64]) -> BlochVector {
    idx.iter()
        .zip(lam)
        .fold(BlochVector::ZERO, |acc, (&i, &l)| acc + u[i] * l)
}

/// Minimizes `|Σ μ_i u_i|` over the affine hull (`Σ μ = 1`) of the corral.
fn affine_minimizer(u: &[BlochVector], idx: &[usize]) -> Option<Vec<f64>> {
    let n = idx.len();
    if n > 4 {
        return None;
    }
    let mut a = [[0.0; 5]; 5];
    let mut b = [[0.0; 1]; 5];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r][c] = u[i].dot(u[j]);
        }
        a[r][n] = 1.0;
        a[n][r] = 1.0;
    }
    b[n][0] = 1.0;
    linalg::solve(&mut a, &mut b, n + 1, 1e-13)?;
    Some((0..n).map(|r| b[r][0]).collect())
}

/// Among `λ ≥ 0` with `Σ λ u = Σ λ₀ u` and `Σ λ = 1`, the one of least
/// Euclidean norm. `lam0` must be feasible.
pub(crate) fn min_norm_weights(u: &[BlochVector], lam0: &[f64]) -> Vec<f64> {
    let m = u.len();
    let column = |i: usize| Vector4::new(u[i].x, u[i].y, u[i].z, 1.0);
    let target: Vector4<f64> = (0..m).map(|i| column(i) * lam0[i]).sum();

    let mut lam = lam0.to_vec();
    let mut fixed: Vec<bool> = lam.iter().map(|&l| l <= 0.0).collect();
    for l in lam.iter_mut() {
        *l = l.max(0.0);
    }

    for _ in 0..(20 + 10 * m) {
        let free: Vec<usize> = (0..m).filter(|&i| !fixed[i]).collect();
        let y = dual_solution(&free, &column, &target);
        let step: Vec<f64> = free.iter().map(|&i| column(i).dot(&y) - lam[i]).collect();
        let step_norm = step.iter().fold(0.0f64, |a, s| a.max(s.abs()));

        if step_norm <= 1e-14 {
            let release = (0..m)
                .filter(|&i| fixed[i])
                .map(|i| (i, -column(i).dot(&y)))
                .filter(|&(_, mult)| mult < -1e-12)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match release {
                Some((i, _)) => fixed[i] = false,
                None => break,
            }
        } else {
            let mut alpha = 1.0;
            let mut blocking = None;
            for (&i, &p) in free.iter().zip(&step) {
                if p < 0.0 {
                    let ratio = -lam[i] / p;
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(i);
                    }
                }
            }
            for (&i, &p) in free.iter().zip(&step) {
                lam[i] += alpha * p;
            }
            if let Some(b) = blocking {
                lam[b] = 0.0;
                fixed[b] = true;
            }
        }
    }

    for l in lam.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    let s: f64 = lam.iter().sum();
    if s > 0.0 {
        lam.iter_mut().for_each(|l| *l /= s);
    }
    lam
}

/// `y` with `λ_F = E_Fᵀ y` the least-norm solution of `E_F λ_F = target`.
fn dual_solution(
    free: &[usize],
    column: &impl Fn(usize) -> Vector4<f64>,
    target: &Vector4<f64>,
) -> Vector4<f64> {
    if free.is_empty() {
        return Vector4::zeros();
    }
    let e = DMatrix::from_fn(4, free.len(), |r, c| column(free[c])[r]);
    let gram: Matrix4<f64> = (&e * e.transpose()).fixed_view::<4, 4>(0, 0).into_owned();
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut y = Vector4::zeros();
    for k in 0..4 {
        let l = eig.eigenvalues[k];
        if l > 1e-12 * top {
            let v = eig.eigenvectors.column(k);
            y += v * (v.dot(target) / l);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::from_xyz(x, y, z)
    }

    fn residual(u: &[BlochVector], lam: &[f64]) -> f64 {
        u.iter()
            .zip(lam)
            .fold(BlochVector::ZERO, |acc, (v, l)| acc + *v * *l)
            .norm()
    }

    #[test]
    fn antipodal_pair_splits_evenly() {
        let u = [b(0., 0., 1.), b(0., 0., -1.)];
        let lam = min_norm_weights(&u, &min_norm_point(&u));
        assert!((lam[0] - 0.5).abs() < 1e-15 && (lam[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_weights_are_uniform() {
        let s = 1.0 / 3f64.sqrt();
        let u = [b(s, s, s), b(s, -s, -s), b(-s, s, -s), b(-s, -s, s)];
        let lam0 = min_norm_point(&u);
        assert!(residual(&u, &lam0) < 1e-15);
        let lam = min_norm_weights(&u, &lam0);
        for l in lam {
            assert!((l - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn octahedron_ties_resolve_to_uniform() {
        let u = [
            b(1., 0., 0.),
            b(-1., 0., 0.),
            b(0., 1., 0.),
            b(0., -1., 0.),
            b(0., 0., 1.),
            b(0., 0., -1.),
        ];
        let lam0 = min_norm_point(&u);
        assert!(residual(&u, &lam0) < 1e-15);
        let lam = min_norm_weights(&u, &lam0);
        for l in &lam {
            assert!((l - 1.0 / 6.0).abs() < 1e-13, "{lam:?}");
        }
    }

    #[test]
    fn origin_outside_hull_reports_nearest_point() {
        let u = [b(1., 0., 0.), b(0., 1., 0.)];
        let lam = min_norm_point(&u);
        assert!((residual(&u, &lam) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planar_triangle_weights() {
        // directions at 0°, 120°, 240° are balanced only by equal weights
        let u: Vec<_> = (0..3)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                b(t.cos(), t.sin(), 0.)
            })
            .collect();
        let lam = min_norm_weights(&u, &min_norm_point(&u));
        for l in lam {
            assert!((l - 1.0 / 3.0).abs() < 1e-14);
        }
    }
}
