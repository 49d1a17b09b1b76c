use serde::Serialize;

use crate::bloch::{BlochVector, QubitState};
use crate::error::{Error, Result};
use crate::Tolerances;

/// States with priors on the probability simplex.
///
/// Zero-prior states keep their index so that POVMs and certificates line up
/// with the caller's labelling; the solver ignores them and reports them in
/// its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    states: Vec<QubitState>,
    priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<QubitState>, priors: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(states, priors, Tolerances::default().prior)
    }

    pub fn with_tolerance(states: Vec<QubitState>, priors: Vec<f64>, tol_prior: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInstance("ensemble has no states".into()));
        }
        if states.len() != priors.len() {
            return Err(Error::InvalidInstance(format!(
                "{} states but {} priors",
                states.len(),
                priors.len()
            )));
        }
        if let Some((i, q)) = priors
            .iter()
            .enumerate()
            .find(|(_, q)| !(q.is_finite() && **q >= 0.0))
        {
            return Err(Error::InvalidInstance(format!("prior {i} is {q}")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > tol_prior {
            return Err(Error::InvalidInstance(format!("priors sum to {total}, not 1")));
        }
        Ok(Self { states, priors })
    }

    /// `n` states with prior `1/n` each.
    pub fn equal(states: Vec<QubitState>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidInstance("ensemble has no states".into()));
        }
        Self::new(states, vec![1.0 / n as f64; n])
    }

    pub fn from_bloch(vectors: &[[f64; 3]], priors: Vec<f64>) -> Result<Self> {
        let states = vectors
            .iter()
            .map(|v| QubitState::new(BlochVector::new(v[0], v[1], v[2])?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, priors)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[QubitState] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn state(&self, x: usize) -> &QubitState {
        &self.states[x]
    }

    pub fn prior(&self, x: usize) -> f64 {
        self.priors[x]
    }

    /// `q_x·v_x`, the vertex of the weighted-state polytope.
    pub fn scaled_point(&self, x: usize) -> BlochVector {
        self.states[x].bloch() * self.priors[x]
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.priors[x] > 0.0).collect()
    }

    pub fn zero_prior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.priors[x] == 0.0).collect()
    }

    /// True when every positive prior is the same number.
    pub fn has_equal_priors(&self) -> bool {
        let mut positive = self.priors.iter().copied().filter(|&q| q > 0.0);
        let first = match positive.next() {
            Some(q) => q,
            None => return false,
        };
        positive.all(|q| (q - first).abs() <= 1e-15)
    }

    pub fn max_prior(&self) -> f64 {
        self.priors.iter().copied().fold(0.0, f64::max)
    }

    /// Same priors, every Bloch vector mapped through `f`.
    pub fn map_states(&self, f: impl Fn(BlochVector) -> BlochVector, tol_state: f64) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| QubitState::with_tolerance(f(s.bloch()), tol_state))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states,
            priors: self.priors.clone(),
        })
    }
}
