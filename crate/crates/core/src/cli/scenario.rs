use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bloch::{BlochVector, QubitState};
use crate::config::Tolerances;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

/// An input document: states, priors and optional tolerance overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub states: Vec<StateSpec>,
    pub priors: Priors,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// One state, either as a Bloch vector or as `(θ, φ, purity)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", untagged)]
pub enum StateSpec {
    Bloch { bloch: [f64; 3] },
    Spherical { theta: f64, phi: f64, purity: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    bloch: Option<[f64; 3]>,
    theta: Option<f64>,
    phi: Option<f64>,
    purity: Option<f64>,
}

impl TryFrom<RawState> for StateSpec {
    type Error = String;

    fn try_from(raw: RawState) -> std::result::Result<Self, String> {
        match raw {
            RawState {
                bloch: Some(bloch),
                theta: None,
                phi: None,
                purity: None,
            } => Ok(StateSpec::Bloch { bloch }),
            RawState {
                bloch: None,
                theta: Some(theta),
                phi: Some(phi),
                purity: Some(purity),
            } => Ok(StateSpec::Spherical { theta, phi, purity }),
            RawState { bloch: Some(_), .. } => {
                Err("state has both `bloch` and spherical fields".into())
            }
            RawState { bloch: None, .. } => {
                Err("state needs `bloch` or all of `theta`, `phi`, `purity`".into())
            }
        }
    }
}

impl StateSpec {
    pub fn bloch(&self) -> [f64; 3] {
        match *self {
            StateSpec::Bloch { bloch } => bloch,
            StateSpec::Spherical { theta, phi, purity } => [
                purity * theta.sin() * phi.cos(),
                purity * theta.sin() * phi.sin(),
                purity * theta.cos(),
            ],
        }
    }

    fn is_spherical(&self) -> bool {
        matches!(self, StateSpec::Spherical { .. })
    }
}

/// Either the keyword `"equal"` or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum Priors {
    Equal,
    List(Vec<f64>),
}

impl Serialize for Priors {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Priors::Equal => s.serialize_str("equal"),
            Priors::List(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Priors {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PriorsVisitor;

        impl<'de> Visitor<'de> for PriorsVisitor {
            type Value = Priors;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("the string \"equal\" or a list of numbers")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Priors, E> {
                if v == "equal" {
                    Ok(Priors::Equal)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Priors, A::Error> {
                let mut out = Vec::new();
                while let Some(q) = seq.next_element::<f64>()? {
                    out.push(q);
                }
                Ok(Priors::List(out))
            }
        }

        d.deserialize_any(PriorsVisitor)
    }
}

impl Scenario {
    pub fn from_bloch(name: impl Into<String>, vectors: &[[f64; 3]], priors: Priors) -> Self {
        Self {
            name: name.into(),
            states: vectors.iter().map(|&bloch| StateSpec::Bloch { bloch }).collect(),
            priors,
            tolerances: None,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    /// Checks the invariants that the document structure cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Validation("states: list is empty".into()));
        }
        let spherical = self.states.iter().filter(|s| s.is_spherical()).count();
        if spherical != 0 && spherical != self.states.len() {
            return Err(Error::Validation(
                "states: bloch and spherical encodings are mixed".into(),
            ));
        }
        let tol = self.tolerances();
        for (i, s) in self.states.iter().enumerate() {
            let v = s.bloch();
            QubitState::with_tolerance(BlochVector::from(v), tol.state)
                .map_err(|e| Error::Validation(format!("states[{i}]: {e}")))?;
        }
        if let Priors::List(q) = &self.priors {
            if q.len() != self.states.len() {
                return Err(Error::Validation(format!(
                    "priors: {} values for {} states",
                    q.len(),
                    self.states.len()
                )));
            }
            if let Some((i, v)) = q.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Validation(format!("priors[{i}]: {v} is not a probability")));
            }
            let total: f64 = q.iter().sum();
            if (total - 1.0).abs() > tol.prior {
                return Err(Error::Validation(format!("priors: sum {total} differs from 1")));
            }
        }
        Ok(())
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        self.validate()?;
        let tol = self.tolerances();
        let states = self
            .states
            .iter()
            .map(|s| QubitState::with_tolerance(BlochVector::from(s.bloch()), tol.state))
            .collect::<Result<Vec<_>>>()?;
        let priors = match &self.priors {
            Priors::Equal => vec![1.0 / states.len() as f64; states.len()],
            Priors::List(q) => q.clone(),
        };
        Ensemble::with_tolerance(states, priors, tol.prior).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        super::report::to_json(self)
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_pair() {
        let s = parse_scenario(r#"{"states":[{"bloch":[0,0,1]},{"bloch":[0,0,-1]}],"priors":"equal"}"#).unwrap();
        assert_eq!(s.states.len(), 2);
        assert_eq!(s.priors, Priors::Equal);
        assert_eq!(s.ensemble().unwrap().priors(), &[0.5, 0.5]);
    }

    #[test]
    fn prior_sum_is_validated() {
        let err = parse_scenario(r#"{"states":[{"bloch":[0,0,1]},{"bloch":[0,0,-1]}],"priors":[0.6,0.5]}"#);
        assert!(matches!(err, Err(Error::Validation(m)) if m.contains("1.1")));
    }

    #[test]
    fn spherical_conversion() {
        let s = parse_scenario(r#"{"states":[{"theta":1.5707963,"phi":0,"purity":0.5}],"priors":[1]}"#).unwrap();
        let v = s.states[0].bloch();
        assert!((v[0] - 0.5).abs() < 1e-12 && v[1] == 0.0 && v[2].abs() < 1e-7);
    }

    #[test]
    fn errors_name_position_and_field() {
        let text = "{\n  \"states\": [{\"bloch\": [0, 0, 1], \"purity\": 1}],\n  \"priors\": \"equal\"\n}";
        let Err(Error::Parse(m)) = parse_scenario(text) else { panic!() };
        assert!(m.contains("line 2"), "{m}");
        let Err(Error::Parse(m)) = parse_scenario(r#"{"states":[],"prior":"equal"}"#) else { panic!() };
        assert!(m.contains("prior"), "{m}");
        let Err(Error::Parse(m)) = parse_scenario(r#"{"states":[{"bloch":[0,0,1]}],"priors":"uniform"}"#) else {
            panic!()
        };
        assert!(m.contains("uniform"), "{m}");
        assert!(matches!(parse_scenario("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn mixed_encodings_rejected() {
        let text = r#"{"states":[{"bloch":[0,0,1]},{"theta":0,"phi":0,"purity":1}],"priors":"equal"}"#;
        assert!(matches!(parse_scenario(text), Err(Error::Validation(m)) if m.contains("mixed")));
    }

    #[test]
    fn overlong_vector_rejected() {
        let text = r#"{"states":[{"bloch":[0,0,1.1]}],"priors":[1]}"#;
        assert!(matches!(parse_scenario(text), Err(Error::Validation(m)) if m.starts_with("states[0]")));
    }

    #[test]
    fn tolerance_overrides() {
        let text = r#"{"states":[{"bloch":[0,0,1]}],"priors":[1],"tolerances":{"cert":1e-6}}"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.tolerances().cert, 1e-6);
        assert_eq!(s.tolerances().active, Tolerances::default().active);
    }
}
