use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Priors, Scenario};
use crate::error::{Error, Result};

/// Built-in instance families, written `KIND[:PARAM[:PARAM...]]` on the
/// command line with list parameters separated by commas.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `pair[:ANGLE[:F1,F2[:Q1,Q2]]]`: states `f1·ẑ` and `f2·(sin a, 0, cos a)`.
    Pair {
        angle: f64,
        purities: [f64; 2],
        priors: Option<[f64; 2]>,
    },
    /// `halfplane:N[:F1,...,FN]`: `f_x (cos θ_x, sin θ_x, 0)` with `θ_x = 2πx/N`.
    HalfPlane { n: usize, purities: Vec<f64> },
    /// `fig1a[:F[:G2,G5,G6]]`: six equatorial states where `x = 1, 3, 4` share
    /// the largest purity `F` and sit 120° apart.
    Fig1a { f: f64, others: [f64; 3] },
    /// `polyhedron:N` for N in 4, 6, 8, 12, 20: pure states at the vertices.
    Polyhedron { n: usize },
    /// `random:N:SEED[:MIXED]`: uniform directions, exponential priors and,
    /// when mixed, uniform purities.
    Random { n: usize, seed: u64, mixed: bool },
}

fn bad(kind: &str, reason: impl Into<String>) -> Error {
    Error::BadParams {
        kind: kind.to_string(),
        reason: reason.into(),
    }
}

fn number<T: FromStr>(kind: &str, what: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(kind, format!("{what} `{s}` is not a valid number")))
}

fn list(kind: &str, what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| number(kind, what, p)).collect()
}

fn purity(kind: &str, f: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&f) {
        Ok(f)
    } else {
        Err(bad(kind, format!("purity {f} outside [0, 1]")))
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or_default();
        let params: Vec<&str> = parts.collect();
        let max_params = match kind {
            "pair" => 3,
            "halfplane" => 2,
            "fig1a" => 2,
            "polyhedron" => 1,
            "random" => 3,
            _ => return Err(Error::UnknownKind(kind.to_string())),
        };
        if params.len() > max_params {
            return Err(bad(kind, format!("at most {max_params} parameters, got {}", params.len())));
        }
        let gen = match kind {
            "pair" => {
                let angle = params.first().map(|s| number(kind, "angle", s)).transpose()?.unwrap_or(PI);
                let purities = match params.get(1) {
                    Some(s) => {
                        let v = list(kind, "purity", s)?;
                        let [a, b] = v[..] else {
                            return Err(bad(kind, "two purities expected"));
                        };
                        [purity(kind, a)?, purity(kind, b)?]
                    }
                    None => [1.0, 1.0],
                };
                let priors = match params.get(2) {
                    Some(s) => {
                        let v = list(kind, "prior", s)?;
                        let [a, b] = v[..] else {
                            return Err(bad(kind, "two priors expected"));
                        };
                        if !(a >= 0.0 && b >= 0.0 && (a + b - 1.0).abs() <= 1e-12) {
                            return Err(bad(kind, format!("priors {a}, {b} are not a distribution")));
                        }
                        Some([a, b])
                    }
                    None => None,
                };
                Generator::Pair { angle, purities, priors }
            }
            "halfplane" => {
                let n: usize = number(kind, "N", params.first().ok_or_else(|| bad(kind, "N is required"))?)?;
                if n < 2 {
                    return Err(bad(kind, "N must be at least 2"));
                }
                let purities = match params.get(1) {
                    Some(s) => list(kind, "purity", s)?
                        .into_iter()
                        .map(|f| purity(kind, f))
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![1.0; n],
                };
                if purities.len() != n {
                    return Err(bad(kind, format!("{} purities for N = {n}", purities.len())));
                }
                Generator::HalfPlane { n, purities }
            }
            "fig1a" => {
                let f = params.first().map(|s| number(kind, "F", s)).transpose()?.unwrap_or(0.9);
                let others = match params.get(1) {
                    Some(s) => {
                        let v = list(kind, "purity", s)?;
                        let [a, b, c] = v[..] else {
                            return Err(bad(kind, "three purities expected for x = 2, 5, 6"));
                        };
                        [a, b, c]
                    }
                    None => [0.5, 0.6, 0.7],
                };
                purity(kind, f)?;
                for g in others {
                    if purity(kind, g)? >= f {
                        return Err(bad(kind, format!("purity {g} is not below F = {f}")));
                    }
                }
                Generator::Fig1a { f, others }
            }
            "polyhedron" => {
                let n: usize = number(kind, "N", params.first().ok_or_else(|| bad(kind, "N is required"))?)?;
                if ![4, 6, 8, 12, 20].contains(&n) {
                    return Err(bad(kind, format!("N = {n} is not one of 4, 6, 8, 12, 20")));
                }
                Generator::Polyhedron { n }
            }
            _ => {
                let n: usize = number(kind, "N", params.first().ok_or_else(|| bad(kind, "N is required"))?)?;
                if n < 1 {
                    return Err(bad(kind, "N must be at least 1"));
                }
                let seed = number(kind, "seed", params.get(1).ok_or_else(|| bad(kind, "seed is required"))?)?;
                let mixed = match params.get(2).copied() {
                    None | Some("true") | Some("mixed") => true,
                    Some("false") | Some("pure") => false,
                    Some(s) => return Err(bad(kind, format!("mixed flag `{s}` is not true/false"))),
                };
                Generator::Random { n, seed, mixed }
            }
        };
        Ok(gen)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Generator::Pair { angle, purities, priors } => {
                write!(f, "pair:{angle}:{}", join(purities))?;
                if let Some(q) = priors {
                    write!(f, ":{}", join(q))?;
                }
                Ok(())
            }
            Generator::HalfPlane { n, purities } => write!(f, "halfplane:{n}:{}", join(purities)),
            Generator::Fig1a { f: top, others } => write!(f, "fig1a:{top}:{}", join(others)),
            Generator::Polyhedron { n } => write!(f, "polyhedron:{n}"),
            Generator::Random { n, seed, mixed } => write!(f, "random:{n}:{seed}:{mixed}"),
        }
    }
}

fn equatorial(f: f64, theta: f64) -> [f64; 3] {
    [f * theta.cos(), f * theta.sin(), 0.0]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Vertex directions of the regular polyhedron with `n` vertices.
pub fn polyhedron_vertices(n: usize) -> Option<Vec<[f64; 3]>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let signs = [1.0, -1.0];
    let mut v = Vec::new();
    match n {
        4 => v.extend([[1., 1., 1.], [1., -1., -1.], [-1., 1., -1.], [-1., -1., 1.]]),
        6 => v.extend([[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]]),
        8 => {
            for a in signs {
                for b in signs {
                    for c in signs {
                        v.push([a, b, c]);
                    }
                }
            }
        }
        12 => {
            for a in signs {
                for b in signs {
                    v.push([0.0, a, b * phi]);
                    v.push([a, b * phi, 0.0]);
                    v.push([b * phi, 0.0, a]);
                }
            }
        }
        20 => {
            for a in signs {
                for b in signs {
                    for c in signs {
                        v.push([a, b, c]);
                    }
                    v.push([0.0, a / phi, b * phi]);
                    v.push([a / phi, b * phi, 0.0]);
                    v.push([b * phi, 0.0, a / phi]);
                }
            }
        }
        _ => return None,
    }
    Some(v.into_iter().map(unit).collect())
}

impl Generator {
    pub fn scenario(&self) -> Scenario {
        let name = self.to_string();
        match self {
            Generator::Pair { angle, purities, priors } => {
                let [f1, f2] = *purities;
                let v = [[0.0, 0.0, f1], [f2 * angle.sin(), 0.0, f2 * angle.cos()]];
                let priors = priors.map_or(Priors::Equal, |q| Priors::List(q.to_vec()));
                Scenario::from_bloch(name, &v, priors)
            }
            Generator::HalfPlane { n, purities } => {
                let v: Vec<[f64; 3]> = (1..=*n)
                    .map(|x| equatorial(purities[x - 1], TAU * x as f64 / *n as f64))
                    .collect();
                Scenario::from_bloch(name, &v, Priors::Equal)
            }
            Generator::Fig1a { f, others } => {
                let [g2, g5, g6] = *others;
                let deg = PI / 180.0;
                let v = [
                    equatorial(*f, 60.0 * deg),
                    equatorial(g2, 120.0 * deg),
                    equatorial(*f, 180.0 * deg),
                    equatorial(*f, 300.0 * deg),
                    equatorial(g5, 240.0 * deg),
                    equatorial(g6, 0.0),
                ];
                Scenario::from_bloch(name, &v, Priors::Equal)
            }
            Generator::Polyhedron { n } => {
                let v = polyhedron_vertices(*n).expect("validated vertex count");
                Scenario::from_bloch(name, &v, Priors::Equal)
            }
            Generator::Random { n, seed, mixed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut v = Vec::with_capacity(*n);
                let mut w = Vec::with_capacity(*n);
                for _ in 0..*n {
                    let z: f64 = rng.gen_range(-1.0..=1.0);
                    let az: f64 = rng.gen_range(0.0..TAU);
                    let f: f64 = if *mixed { rng.gen_range(0.0..=1.0) } else { 1.0 };
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    v.push([f * s * az.cos(), f * s * az.sin(), f * z]);
                    w.push(-(1.0 - rng.gen::<f64>()).ln() + 1e-3);
                }
                let total: f64 = w.iter().sum();
                let mut q: Vec<f64> = w.iter().map(|x| x / total).collect();
                // put the rounding error on the largest prior
                let drift = 1.0 - q.iter().sum::<f64>();
                let top = (0..*n).max_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap();
                q[top] += drift;
                Scenario::from_bloch(name, &v, Priors::List(q))
            }
        }
    }
}

/// Parses `KIND[:PARAMS]` and builds the scenario.
pub fn generate(spec: &str) -> Result<Scenario> {
    Ok(spec.parse::<Generator>()?.scenario())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron() {
        let s = generate("polyhedron:4").unwrap();
        let e = s.ensemble().unwrap();
        assert_eq!(e.priors(), &[0.25; 4]);
        for st in e.states() {
            assert!((st.bloch().norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vertex_counts_and_regularity() {
        for n in [4, 6, 8, 12, 20] {
            let v = polyhedron_vertices(n).unwrap();
            assert_eq!(v.len(), n);
            let sum = v.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
            assert!(sum.iter().all(|c| c.abs() < 1e-14));
            let min_dist = |i: usize| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (0..3).map(|a| (v[i][a] - v[j][a]).powi(2)).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min)
            };
            let d0 = min_dist(0);
            assert!((0..n).all(|i| (min_dist(i) - d0).abs() < 1e-14));
        }
    }

    #[test]
    fn random_is_reproducible() {
        let a = generate("random:5:42:true").unwrap();
        let b = generate("random:5:42").unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.states.len(), 5);
        assert_ne!(a.states, generate("random:5:43").unwrap().states);
        a.ensemble().unwrap();
    }

    #[test]
    fn halfplane_angles() {
        let s = generate("halfplane:4:1,0.5,1,0.5").unwrap();
        let v = s.states[0].bloch();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bad_specs() {
        assert!(matches!(generate("cube"), Err(Error::UnknownKind(_))));
        assert!(matches!(generate("polyhedron:5"), Err(Error::BadParams { .. })));
        assert!(matches!(generate("halfplane:3:1,1"), Err(Error::BadParams { .. })));
        assert!(matches!(generate("fig1a:0.5:0.6,0.1,0.1"), Err(Error::BadParams { .. })));
        assert!(matches!(generate("random:3"), Err(Error::BadParams { .. })));
        assert!(matches!(generate("pair:x"), Err(Error::BadParams { .. })));
        assert!(matches!(generate("polyhedron:4:1"), Err(Error::BadParams { .. })));
    }

    #[test]
    fn names_reparse() {
        for spec in ["pair", "pair:1:0.5,1:0.3,0.7", "halfplane:3", "fig1a", "polyhedron:12", "random:7:1:false"] {
            let g: Generator = spec.parse().unwrap();
            assert_eq!(g.to_string().parse::<Generator>().unwrap(), g);
        }
    }
}
