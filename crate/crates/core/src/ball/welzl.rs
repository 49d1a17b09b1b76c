//! Smallest enclosing ball of a 3D point set by move-to-front recursion.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linalg;
use crate::bloch::BlochVector;

const CONTAIN_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
struct Ball {
    center: BlochVector,
    radius: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: BlochVector::ZERO,
        radius: -1.0,
    };

    fn contains(&self, p: BlochVector) -> bool {
        self.radius >= 0.0 && self.center.distance(p) <= self.radius + CONTAIN_EPS
    }
}

/// Center of the smallest enclosing ball. Exact up to rounding.
pub(crate) fn enclosing_center(points: &[BlochVector], seed: u64) -> BlochVector {
    let mut order: Vec<BlochVector> = points.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut boundary = Vec::with_capacity(4);
    let end = order.len();
    move_to_front(&mut order, end, &mut boundary).center
}

fn move_to_front(list: &mut Vec<BlochVector>, end: usize, boundary: &mut Vec<BlochVector>) -> Ball {
    let mut ball = ball_through(boundary);
    if boundary.len() == 4 {
        return ball;
    }
    for i in 0..end {
        let p = list[i];
        if !ball.contains(p) {
            boundary.push(p);
            ball = move_to_front(list, i, boundary);
            boundary.pop();
            let item = list.remove(i);
            list.insert(0, item);
        }
    }
    ball
}

/// Smallest ball with every boundary point on its surface; falls back to the
/// smallest ball of a subset when the points are affinely dependent.
fn ball_through(boundary: &[BlochVector]) -> Ball {
    match boundary.len() {
        0 => Ball::EMPTY,
        1 => Ball {
            center: boundary[0],
            radius: 0.0,
        },
        _ => circumball(boundary).unwrap_or_else(|| smallest_of_subsets(boundary)),
    }
}

/// Circumcenter within the affine hull: `c = p₀ + Σ α_j d_j` with
/// `d_i·(c − p₀) = |d_i|²/2`.
pub(crate) fn circumball_center(pts: &[BlochVector]) -> Option<BlochVector> {
    let p0 = pts[0];
    let d: Vec<BlochVector> = pts[1..].iter().map(|&p| p - p0).collect();
    let n = d.len();
    let mut a = [[0.0; 5]; 5];
    let mut b = [[0.0; 1]; 5];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = d[i].dot(d[j]);
        }
        b[i][0] = d[i].norm_sq() / 2.0;
    }
    linalg::solve(&mut a, &mut b, n, 1e-12)?;
    let c = d
        .iter()
        .enumerate()
        .fold(p0, |acc, (j, dj)| acc + *dj * b[j][0]);
    Some(c)
}

fn circumball(pts: &[BlochVector]) -> Option<Ball> {
    let center = circumball_center(pts)?;
    let radius = pts.iter().map(|p| center.distance(*p)).fold(0.0, f64::max);
    Some(Ball { center, radius })
}

fn smallest_of_subsets(pts: &[BlochVector]) -> Ball {
    let n = pts.len();
    let mut best = Ball {
        center: BlochVector::ZERO,
        radius: f64::INFINITY,
    };
    for mask in 1u32..(1 << n) - 1 {
        let sub: Vec<BlochVector> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pts[i]).collect();
        let cand = if sub.len() == 1 {
            Some(Ball {
                center: sub[0],
                radius: 0.0,
            })
        } else {
            circumball(&sub)
        };
        if let Some(c) = cand {
            let r = pts.iter().map(|p| c.center.distance(*p)).fold(0.0, f64::max);
            if r < best.radius {
                best = Ball {
                    center: c.center,
                    radius: r,
                };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::from_xyz(x, y, z)
    }

    #[test]
    fn degenerate_boundaries() {
        let c = circumball_center(&[b(0., 0., 0.), b(1., 0., 0.), b(2., 0., 0.)]);
        assert!(c.is_none());
        let ball = ball_through(&[b(0., 0., 0.), b(1., 0., 0.), b(2., 0., 0.)]);
        assert!((ball.center - b(1., 0., 0.)).norm() < 1e-15);
        assert!((ball.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_face_is_handled() {
        let pts = [b(1., 1., 0.), b(-1., 1., 0.), b(-1., -1., 0.), b(1., -1., 0.)];
        let c = enclosing_center(&pts, 7);
        assert!(c.norm() < 1e-14);
    }
}
