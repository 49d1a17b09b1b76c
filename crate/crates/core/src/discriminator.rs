//! Optimal discrimination of an ensemble together with its certificate.
//!
//! Writing `K = (k0·I + k·σ)/2`, the operator `K − q_x ρ_x` has half-trace
//! `k0 − q_x` and Bloch part `k − q_x v_x`, so `K ≥ q_x ρ_x` holds exactly
//! when `k0 − q_x ≥ |k − q_x v_x|`. Minimizing `tr K = k0` therefore gives
//!
//! ```text
//! P_guess = min_k max_x (q_x + |k − q_x v_x|)
//! ```
//!
//! with no approximation. For equal priors `q` this is `q` plus the radius of
//! the smallest ball around `{q·v_x}`. The complementary states follow from
//! `K = q_x ρ_x + r_x σ_x`: `r_x = k0 − q_x` and `u_x = (k − q_x v_x)/r_x`,
//! which makes the complementary polytope a point reflection of the weighted
//! one, so the edge-parallelism condition holds by construction.

use serde::{Deserialize, Serialize};

use crate::ball::{self, BallMethod, PointSet};
use crate::bloch::{born_probability, weighted_difference, BlochVector, HermitianOp, Povm, PovmElement};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::SolverOptions;

/// `σ_x` with coefficient `r_x` in `K = q_x ρ_x + r_x σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementaryState {
    pub r: f64,
    pub u: BlochVector,
    /// The dual constraint of this state is active; `σ_x` is pure.
    pub pure: bool,
    /// `r_x ≈ 0`, so `σ_x` is undefined and `u` is set to zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// Spread of the decompositions `q_x ρ_x + r_x σ_x` and their distance to `K`.
    pub stationarity: f64,
    /// `max_x |r_x tr[σ_x M_x]|`.
    pub slackness: f64,
    /// Violation of `K ≥ q_x ρ_x`, `r_x ≥ 0` and `|u_x| ≤ 1`.
    pub feasibility: f64,
    /// `|tr K − Σ q_x tr[M_x ρ_x]|`.
    pub duality_gap: f64,
    /// POVM completeness.
    pub completeness: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.slackness)
            .max(self.feasibility)
            .max(self.duality_gap)
            .max(self.completeness)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub k0: f64,
    pub k: BlochVector,
    pub complementary: Vec<ComplementaryState>,
    pub residuals: KktResiduals,
}

impl DualCertificate {
    pub fn operator(&self) -> HermitianOp {
        HermitianOp::new(self.k0, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    /// Equal priors: smallest enclosing ball.
    EqualPriorBall,
    /// Unequal priors, exhaustive active sets.
    MinimaxExact,
    /// Unequal priors, subgradient descent with active-set polish.
    MinimaxIterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub path: SolverPath,
    pub iterations: usize,
    /// Zero-prior states left out of the solve.
    pub dropped: Vec<usize>,
    pub ball_stationarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub p_guess: f64,
    pub certificate: DualCertificate,
    pub povm: Povm,
    pub support: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// Guessing probability, optimal POVM and KKT certificate.
pub fn solve(e: &Ensemble, opts: &SolverOptions) -> Result<Solution> {
    let active = e.active_indices();
    let points: Vec<BlochVector> = active.iter().map(|&x| e.scaled_point(x)).collect();
    let offsets: Vec<f64> = active.iter().map(|&x| e.prior(x)).collect();

    let (ball, value, path) = if e.has_equal_priors() {
        let sol = ball::min_enclosing_ball(&points, opts)?;
        let value = offsets[0] + sol.value;
        (sol, value, SolverPath::EqualPriorBall)
    } else {
        let sol = ball::offset_minimax(&PointSet::new(points, offsets)?, opts)?;
        let path = match sol.method {
            BallMethod::SubgradientPolish => SolverPath::MinimaxIterative,
            _ => SolverPath::MinimaxExact,
        };
        (sol.clone(), sol.value, path)
    };

    let k0 = value;
    let k = ball.center;
    let complementary = complementary_states(k0, k, e, opts)?;
    let support: Vec<usize> = ball.support.iter().map(|&i| active[i]).collect();
    let mut weights = vec![0.0; e.len()];
    for (i, &x) in active.iter().enumerate() {
        weights[x] = ball.support_weights[i];
    }
    let povm = optimal_povm(&support, &complementary, &weights, opts)?;

    let mut sol = Solution {
        p_guess: k0,
        certificate: DualCertificate {
            k0,
            k,
            complementary,
            residuals: KktResiduals::default(),
        },
        povm,
        support,
        diagnostics: Diagnostics {
            path,
            iterations: ball.iterations,
            dropped: e.zero_prior_indices(),
            ball_stationarity: ball.stationarity,
        },
    };
    let residuals = kkt_verify(e, &sol);
    sol.certificate.residuals = residuals;
    if !residuals.passes(opts.tol.cert) {
        return Err(Error::CertificateFailure(format!(
            "largest KKT residual {:e} exceeds {:e}",
            residuals.max(),
            opts.tol.cert
        )));
    }
    Ok(sol)
}

/// Recovers `{r_x, σ_x}` from a dual-feasible `(k0, k)`.
pub fn complementary_states(
    k0: f64,
    k: BlochVector,
    e: &Ensemble,
    opts: &SolverOptions,
) -> Result<Vec<ComplementaryState>> {
    let tol = opts.tol.active;
    (0..e.len())
        .map(|x| {
            let r = k0 - e.prior(x);
            let arm = k - e.scaled_point(x);
            let dist = arm.norm();
            if r < -tol || dist > r + tol {
                return Err(Error::InfeasibleCertificate(format!(
                    "state {x}: r = {r:e}, |k − q v| = {dist:e}"
                )));
            }
            if r <= tol {
                return Ok(ComplementaryState {
                    r: r.max(0.0),
                    u: BlochVector::ZERO,
                    pure: false,
                    degenerate: true,
                });
            }
            Ok(ComplementaryState {
                r,
                u: arm * (1.0 / r),
                pure: dist >= r - tol,
                degenerate: false,
            })
        })
        .collect()
}

/// `M_x = 2λ_x·|ψ_x^⊥⟩⟨ψ_x^⊥|` on the support, zero elsewhere.
///
/// A degenerate support state (`r_x = 0`) gets the full-rank element
/// `2λ_x·I/2`; with the weight convention of the ball solver that is `M_x = I`.
pub fn optimal_povm(
    support: &[usize],
    comp: &[ComplementaryState],
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<Povm> {
    let mut elements = vec![PovmElement::ZERO; comp.len()];
    for &x in support {
        let lam = weights[x];
        if lam <= 0.0 {
            continue;
        }
        let c = &comp[x];
        elements[x] = if c.degenerate {
            PovmElement {
                m: 2.0 * lam,
                w: BlochVector::ZERO,
            }
        } else if c.pure {
            PovmElement::rank_one(2.0 * lam, -c.u)?
        } else {
            return Err(Error::InfeasibleWeights {
                residual: 1.0 - c.u.norm(),
            });
        };
    }
    Povm::new(elements, opts.tol.povm).map_err(|err| match err {
        Error::IncompletePovm { residual } => Error::InfeasibleWeights { residual },
        other => other,
    })
}

/// Evaluates every KKT condition of `sol` against `e`.
pub fn kkt_verify(e: &Ensemble, sol: &Solution) -> KktResiduals {
    let cert = &sol.certificate;
    let n = e.len();
    let decomp: Vec<(f64, BlochVector)> = (0..n)
        .map(|x| {
            let c = &cert.complementary[x];
            (e.prior(x) + c.r, e.scaled_point(x) + c.u * c.r)
        })
        .collect();

    let mut stationarity = 0.0f64;
    for x in 0..n {
        stationarity = stationarity
            .max((decomp[x].0 - cert.k0).abs())
            .max((decomp[x].1 - cert.k).norm());
        for y in x + 1..n {
            stationarity = stationarity
                .max((decomp[x].0 - decomp[y].0).abs())
                .max((decomp[x].1 - decomp[y].1).norm());
        }
    }

    let mut slackness = 0.0f64;
    let mut feasibility = 0.0f64;
    let k_op = cert.operator();
    for x in 0..n {
        let c = &cert.complementary[x];
        if let Some(m) = sol.povm.elements.get(x) {
            slackness = slackness.max((c.r * m.m * (1.0 + m.w.dot(c.u)) / 2.0).abs());
        }
        let slack = k_op - e.state(x).as_operator() * e.prior(x);
        feasibility = feasibility
            .max(-slack.min_eig())
            .max(-c.r)
            .max(c.u.norm() - 1.0);
    }

    let primal: f64 = (0..n.min(sol.povm.len()))
        .map(|x| e.prior(x) * born_probability(&sol.povm.elements[x], e.state(x)))
        .sum();
    let completeness = if sol.povm.len() == n {
        sol.povm.completeness_residual()
    } else {
        f64::INFINITY
    };

    KktResiduals {
        stationarity,
        slackness,
        feasibility: feasibility.max(0.0),
        duality_gap: (cert.k0 - primal).abs(),
        completeness,
    }
}

/// `Σ_x q_x tr[M_x ρ_x]`.
pub fn primal_value(e: &Ensemble, povm: &Povm, opts: &SolverOptions) -> Result<f64> {
    if povm.len() != e.len() {
        return Err(Error::WrongArity {
            expected: e.len(),
            got: povm.len(),
        });
    }
    let residual = povm.completeness_residual();
    if residual > opts.tol.povm {
        return Err(Error::IncompletePovm { residual });
    }
    Ok(povm
        .elements
        .iter()
        .zip(e.states().iter().zip(e.priors()))
        .map(|(m, (s, q))| q * born_probability(m, s))
        .sum())
}

/// Two-state optimum `1/2 + ‖q₁ρ₁ − q₂ρ₂‖₁/2`.
pub fn helstrom(e: &Ensemble) -> Result<f64> {
    if e.len() != 2 {
        return Err(Error::WrongArity {
            expected: 2,
            got: e.len(),
        });
    }
    let d = weighted_difference(e.prior(0), e.state(0), e.prior(1), e.state(1));
    Ok(0.5 + d.trace_norm() / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub radius_a: f64,
    pub radius_b: f64,
    pub p_guess_a: f64,
    pub p_guess_b: f64,
}

/// Equal-prior ensembles of the same size are equivalent for guessing when
/// their weighted points have the same enclosing-ball radius.
pub fn equivalence_class_check(a: &Ensemble, b: &Ensemble, opts: &SolverOptions) -> Result<EquivalenceReport> {
    if !a.has_equal_priors() {
        return Err(Error::PriorMismatch("a"));
    }
    if !b.has_equal_priors() {
        return Err(Error::PriorMismatch("b"));
    }
    let radius = |e: &Ensemble| -> Result<(usize, f64, f64)> {
        let active = e.active_indices();
        let pts: Vec<BlochVector> = active.iter().map(|&x| e.scaled_point(x)).collect();
        let ball = ball::min_enclosing_ball(&pts, opts)?;
        Ok((active.len(), ball.value, e.prior(active[0]) + ball.value))
    };
    let (na, ra, pa) = radius(a)?;
    let (nb, rb, pb) = radius(b)?;
    let equivalent = na == nb && (ra - rb).abs() <= 1e-10;
    if equivalent && (pa - pb).abs() > 1e-10 {
        return Err(Error::CertificateFailure(format!(
            "equal radii but guessing probabilities {pa} and {pb}"
        )));
    }
    Ok(EquivalenceReport {
        equivalent,
        radius_a: ra,
        radius_b: rb,
        p_guess_a: pa,
        p_guess_b: pb,
    })
}
