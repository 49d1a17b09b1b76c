use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the solver pipeline.
///
/// `active` drives discrete decisions (support membership, purity flags) and
/// is deliberately looser than `stationary`, which bounds continuous residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Slack on the Bloch norm before a state is rejected.
    pub state: f64,
    /// Slack on the sum of priors.
    pub prior: f64,
    /// POVM completeness.
    pub povm: f64,
    /// Support detection and degenerate complementary states.
    pub active: f64,
    /// Stationarity residual of the dual minimizer.
    pub stationary: f64,
    /// Every KKT residual of a returned certificate.
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            state: 1e-12,
            prior: 1e-12,
            povm: 1e-9,
            active: 1e-8,
            stationary: 1e-10,
            cert: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: Tolerances,
    /// Seed for the randomized point order of the enclosing-ball recursion.
    pub seed: u64,
    /// Subgradient step budget of the iterative minimax path.
    pub max_iters: usize,
    /// Largest instance solved by exhaustive active-set enumeration.
    pub exact_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed: 0x5eed,
            max_iters: 1_000_000,
            exact_limit: 12,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(tol: Tolerances) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}
