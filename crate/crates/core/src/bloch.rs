//! Qubit states, operators and measurement elements in Bloch form.
//!
//! A Hermitian 2x2 operator is stored as `(t·I + a·σ)/2`, so a density
//! operator is `t = 1` with `a` its Bloch vector. Everything here is closed
//! form; no complex matrices are formed.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Checked constructor: rejects NaN and infinite components.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidState(format!(
                "non-finite Bloch component ({x}, {y}, {z})"
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Unchecked constructor for values produced by arithmetic on finite data.
    #[inline]
    pub const fn from_xyz(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        Self::from_xyz(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.to_array()
    }
}

impl Add for BlochVector {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::from_xyz(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for BlochVector {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for BlochVector {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::from_xyz(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::from_xyz(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<BlochVector> for f64 {
    type Output = BlochVector;
    #[inline]
    fn mul(self, v: BlochVector) -> BlochVector {
        v * self
    }
}

impl Neg for BlochVector {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::from_xyz(-self.x, -self.y, -self.z)
    }
}

/// A qubit density operator `(I + v·σ)/2` with `|v| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitState {
    bloch: BlochVector,
}

impl QubitState {
    pub const MAXIMALLY_MIXED: QubitState = QubitState {
        bloch: BlochVector::ZERO,
    };

    pub fn new(bloch: BlochVector) -> Result<Self> {
        Self::with_tolerance(bloch, crate::Tolerances::default().state)
    }

    /// Accepts `|v| ≤ 1 + tol`; vectors in `(1, 1 + tol]` are renormalized to
    /// the sphere, anything longer is rejected.
    pub fn with_tolerance(bloch: BlochVector, tol: f64) -> Result<Self> {
        if !bloch.is_finite() {
            return Err(Error::InvalidState(format!(
                "non-finite Bloch vector {:?}",
                bloch.to_array()
            )));
        }
        let n = bloch.norm();
        if n > 1.0 + tol {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {n} exceeds 1"
            )));
        }
        let bloch = if n > 1.0 { bloch * (1.0 / n) } else { bloch };
        Ok(Self { bloch })
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(BlochVector::new(x, y, z)?)
    }

    #[inline]
    pub fn bloch(&self) -> BlochVector {
        self.bloch
    }

    /// Length of the Bloch vector: 1 for pure states, 0 for `I/2`.
    #[inline]
    pub fn purity(&self) -> f64 {
        self.bloch.norm()
    }

    pub fn as_operator(&self) -> HermitianOp {
        HermitianOp::new(1.0, self.bloch)
    }
}

/// Hermitian operator `(t·I + a·σ)/2`; its eigenvalues are `(t ± |a|)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianOp {
    pub t: f64,
    pub a: BlochVector,
}

impl HermitianOp {
    pub const fn new(t: f64, a: BlochVector) -> Self {
        Self { t, a }
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn min_eig(&self) -> f64 {
        (self.t - self.a.norm()) / 2.0
    }

    #[inline]
    pub fn max_eig(&self) -> f64 {
        (self.t + self.a.norm()) / 2.0
    }

    pub fn trace_norm(&self) -> f64 {
        let n = self.a.norm();
        (self.t + n).abs() / 2.0 + (self.t - n).abs() / 2.0
    }
}

impl Sub for HermitianOp {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t - o.t, self.a - o.a)
    }
}

impl Mul<f64> for HermitianOp {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.t * s, self.a * s)
    }
}

/// One POVM outcome, `m·(I + w·σ)/2`.
///
/// For `m > 0` the direction is either a unit vector (a scaled rank-one
/// projector) or zero, which encodes the full-rank element `m·I/2` used by
/// the no-measurement guess `M = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmElement {
    pub m: f64,
    pub w: BlochVector,
}

impl PovmElement {
    pub const ZERO: PovmElement = PovmElement {
        m: 0.0,
        w: BlochVector::ZERO,
    };

    /// The identity operator `I`: guess this outcome without measuring.
    pub const IDENTITY: PovmElement = PovmElement {
        m: 2.0,
        w: BlochVector::ZERO,
    };

    /// `m·|ψ⟩⟨ψ|·` scaled so that `w` is the Bloch vector of `ψ`.
    pub fn rank_one(m: f64, w: BlochVector) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::InvalidState(format!("POVM weight {m} is negative")));
        }
        if m == 0.0 {
            return Ok(Self::ZERO);
        }
        let w = w
            .normalized()
            .ok_or_else(|| Error::InvalidState("rank-one POVM element needs a direction".into()))?;
        Ok(Self { m, w })
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0.0
    }

    pub fn is_rank_one(&self) -> bool {
        self.m > 0.0 && self.w.norm_sq() > 0.0
    }

    pub fn as_operator(&self) -> HermitianOp {
        HermitianOp::new(self.m, self.w * self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub elements: Vec<PovmElement>,
}

impl Povm {
    /// Builds a POVM and checks completeness: `Σ m = 2` and `Σ m·w = 0`.
    pub fn new(elements: Vec<PovmElement>, tol: f64) -> Result<Self> {
        let povm = Self { elements };
        let residual = povm.completeness_residual();
        if residual > tol {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(povm)
    }

    /// Wraps elements without the completeness check.
    pub fn from_elements_unchecked(elements: Vec<PovmElement>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `max(|Σ m − 2|, |Σ m·w|)`.
    pub fn completeness_residual(&self) -> f64 {
        let mut total = 0.0;
        let mut bloch = BlochVector::ZERO;
        for e in &self.elements {
            total += e.m;
            bloch += e.w * e.m;
        }
        (total - 2.0).abs().max(bloch.norm())
    }
}

/// `q1·ρ1 − q2·ρ2`.
pub fn weighted_difference(q1: f64, s1: &QubitState, q2: f64, s2: &QubitState) -> HermitianOp {
    HermitianOp::new(q1 - q2, s1.bloch * q1 - s2.bloch * q2)
}

pub fn trace_norm(op: &HermitianOp) -> f64 {
    op.trace_norm()
}

pub fn min_eig(op: &HermitianOp) -> f64 {
    op.min_eig()
}

/// `tr[M ρ] = m·(1 + w·v)/2`.
pub fn born_probability(m: &PovmElement, s: &QubitState) -> f64 {
    m.m * (1.0 + m.w.dot(s.bloch)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn state(x: f64, y: f64, z: f64) -> QubitState {
        QubitState::from_xyz(x, y, z).unwrap()
    }

    fn matrix(op: &HermitianOp) -> Matrix2<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Matrix2::new(
            c((op.t + op.a.z) / 2.0, 0.0),
            c(op.a.x / 2.0, -op.a.y / 2.0),
            c(op.a.x / 2.0, op.a.y / 2.0),
            c((op.t - op.a.z) / 2.0, 0.0),
        )
    }

    fn eigen_trace_norm(op: &HermitianOp) -> f64 {
        let eig = matrix(op).symmetric_eigenvalues();
        eig.iter().map(|l| l.abs()).sum()
    }

    fn rotation(axis: [f64; 3], angle: f64) -> impl Fn(BlochVector) -> BlochVector {
        let r = nalgebra::Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(nalgebra::Vector3::from(axis)),
            angle,
        );
        move |v| {
            let w = r * nalgebra::Vector3::new(v.x, v.y, v.z);
            BlochVector::from_xyz(w.x, w.y, w.z)
        }
    }

    #[test]
    fn weighted_difference_examples() {
        let d = weighted_difference(0.5, &state(0., 0., 1.), 0.5, &state(0., 0., -1.));
        assert_eq!(d.t, 0.0);
        assert_eq!(d.a, BlochVector::from_xyz(0., 0., 1.));

        let s = state(0.3, -0.2, 0.1);
        let d = weighted_difference(0.25, &s, 0.25, &s);
        assert_eq!(d.t, 0.0);
        assert_eq!(d.a, BlochVector::ZERO);

        let d = weighted_difference(0.7, &state(0., 0., 1.), 0.3, &state(1., 0., 0.));
        assert!((d.t - 0.4).abs() < 1e-15);
        assert!((d.a - BlochVector::from_xyz(-0.3, 0., 0.7)).norm() < 1e-15);
    }

    #[test]
    fn trace_norm_examples() {
        let op = HermitianOp::new(0.0, BlochVector::from_xyz(0., 0., 1.));
        assert_eq!(trace_norm(&op), 1.0);
        let op = HermitianOp::new(1.0, BlochVector::ZERO);
        assert_eq!(trace_norm(&op), 1.0);

        let op = HermitianOp::new(0.4, BlochVector::from_xyz(-0.3, 0., 0.7));
        let oracle = eigen_trace_norm(&op);
        assert!((oracle - 0.58f64.sqrt()).abs() < 1e-12);
        assert!((trace_norm(&op) - oracle).abs() < 1e-12);
        assert!((trace_norm(&op) - 0.761577310586391).abs() < 1e-12);
    }

    #[test]
    fn born_probability_examples() {
        let z = BlochVector::from_xyz(0., 0., 1.);
        let e = PovmElement::rank_one(1.0, z).unwrap();
        assert_eq!(born_probability(&e, &state(0., 0., 1.)), 1.0);
        assert_eq!(born_probability(&e, &state(0., 0., -1.)), 0.0);
        let e = PovmElement::rank_one(0.5, BlochVector::from_xyz(1., 0., 0.)).unwrap();
        assert_eq!(born_probability(&e, &QubitState::MAXIMALLY_MIXED), 0.25);
        assert_eq!(born_probability(&PovmElement::IDENTITY, &state(0.2, 0.1, -0.9)), 1.0);
    }

    #[test]
    fn min_eig_examples() {
        assert_eq!(min_eig(&HermitianOp::new(1.0, BlochVector::from_xyz(0., 0., 1.))), 0.0);
        assert_eq!(min_eig(&HermitianOp::new(2.0, BlochVector::ZERO)), 1.0);
        assert_eq!(min_eig(&HermitianOp::new(0.0, BlochVector::from_xyz(0., 1., 0.))), -0.5);
    }

    #[test]
    fn state_construction_rules() {
        assert!(BlochVector::new(f64::NAN, 0., 0.).is_err());
        assert!(BlochVector::new(0., f64::INFINITY, 0.).is_err());
        assert!(QubitState::from_xyz(0., 0., 1.0 + 1e-9).is_err());
        let s = QubitState::from_xyz(0., 0., 1.0 + 5e-13).unwrap();
        assert_eq!(s.purity(), 1.0);
        assert_eq!(state(0.6, 0., 0.).purity(), 0.6);
    }

    #[test]
    fn povm_completeness() {
        let z = BlochVector::from_xyz(0., 0., 1.);
        let ok = Povm::new(
            vec![
                PovmElement::rank_one(1.0, z).unwrap(),
                PovmElement::rank_one(1.0, -z).unwrap(),
            ],
            1e-9,
        );
        assert!(ok.is_ok());
        let bad = Povm::new(vec![PovmElement::rank_one(1.0, z).unwrap()], 1e-9);
        assert!(matches!(bad, Err(Error::IncompletePovm { .. })));
        assert!(Povm::new(vec![PovmElement::IDENTITY, PovmElement::ZERO], 1e-9).is_ok());
        assert!(PovmElement::rank_one(-0.1, z).is_err());
        assert!(PovmElement::rank_one(0.3, BlochVector::ZERO).is_err());
    }

    fn vec3() -> impl Strategy<Value = BlochVector> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| BlochVector::from_xyz(x, y, z))
    }

    fn qubit() -> impl Strategy<Value = QubitState> {
        (vec3(), 0.0..=1.0f64).prop_map(|(v, f)| {
            let v = v.normalized().unwrap_or(BlochVector::from_xyz(0., 0., 1.)) * f;
            QubitState::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn operator_identities(t in -2.0..2.0f64, a in vec3()) {
            let op = HermitianOp::new(t, a);
            prop_assert_eq!(op.trace(), t);
            prop_assert!((op.min_eig() + op.max_eig() - t).abs() <= 1e-15);
            prop_assert!(op.trace_norm() >= t.abs() - 1e-15);
            prop_assert!((op.trace_norm() - eigen_trace_norm(&op)).abs() <= 1e-12);
        }

        #[test]
        fn unitary_covariance(
            q1 in 0.0..1.0f64, s1 in qubit(), q2 in 0.0..1.0f64, s2 in qubit(),
            axis in vec3(), angle in -3.2..3.2f64,
        ) {
            prop_assume!(axis.norm() > 1e-3);
            let rot = rotation(axis.to_array(), angle);
            let d = weighted_difference(q1, &s1, q2, &s2);
            let r1 = QubitState::with_tolerance(rot(s1.bloch()), 1e-9).unwrap();
            let r2 = QubitState::with_tolerance(rot(s2.bloch()), 1e-9).unwrap();
            let dr = weighted_difference(q1, &r1, q2, &r2);
            prop_assert!((trace_norm(&d) - trace_norm(&dr)).abs() <= 1e-12);
            prop_assert!((min_eig(&d) - min_eig(&dr)).abs() <= 1e-12);
        }

        #[test]
        fn self_difference_vanishes(q in 0.0..1.0f64, s in qubit()) {
            prop_assert_eq!(trace_norm(&weighted_difference(q, &s, q, &s)), 0.0);
        }

        #[test]
        fn born_sums_to_one_on_complete_povm(dir in vec3(), m in 0.0..2.0f64, s in qubit()) {
            prop_assume!(dir.norm() > 1e-3);
            // two antipodal elements with unequal weights need a third to close
            let w = dir.normalized().unwrap();
            let povm = Povm::new(
                vec![
                    PovmElement::rank_one(m / 2.0, w).unwrap(),
                    PovmElement::rank_one(m / 2.0, -w).unwrap(),
                    if m < 2.0 { PovmElement { m: 2.0 - m, w: BlochVector::ZERO } } else { PovmElement::ZERO },
                ],
                1e-9,
            ).unwrap();
            let total: f64 = povm.elements.iter().map(|e| born_probability(e, &s)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            for e in &povm.elements {
                let p = born_probability(e, &s);
                prop_assert!(p >= -1e-15 && p <= e.m + 1e-15);
            }
        }
    }
}
