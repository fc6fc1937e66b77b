//! Pointwise activation functions with range in `[0, 1]`.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::degree::GradedScale;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    NonDecreasing,
    None,
}

impl Monotonicity {
    /// Whether `self` is at least as strong as `other`.
    pub fn implies(self, other: Monotonicity) -> bool {
        matches!(
            (self, other),
            (_, Monotonicity::None)
                | (Monotonicity::Increasing, _)
                | (Monotonicity::NonDecreasing, Monotonicity::NonDecreasing)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "RawActivation")]
pub enum Activation {
    /// `1 / (1 + exp(-k (u - x0)))`.
    Logistic { k: f64, x0: f64 },
    /// `min(max(u, 0), 1)`.
    ClampedRelu,
    /// `(tanh(u) + 1) / 2`.
    ShiftedTanh,
    /// `1` if `u > t`, else `0`.
    BinaryStep { t: f64 },
    /// `u` clamped to `[0, 1]`.
    IdentityClamped,
}

#[derive(Deserialize)]
struct RawActivation {
    kind: String,
    k: Option<f64>,
    x0: Option<f64>,
    t: Option<f64>,
}

impl TryFrom<RawActivation> for Activation {
    type Error = Error;

    fn try_from(raw: RawActivation) -> Result<Self> {
        let kind = raw.kind.to_ascii_lowercase().replace('_', "-");
        let a = match kind.as_str() {
            "logistic" | "sigmoid" => Activation::Logistic {
                k: raw.k.unwrap_or(1.0),
                x0: raw.x0.unwrap_or(0.0),
            },
            "clamped-relu" => Activation::ClampedRelu,
            "shifted-tanh" => Activation::ShiftedTanh,
            "binary-step" | "step" => Activation::BinaryStep {
                t: raw.t.unwrap_or(0.0),
            },
            "identity-clamped" => Activation::IdentityClamped,
            "softmax" => {
                return Err(Error::UnsupportedActivation(
                    raw.kind,
                    "softmax is not a pointwise activation; replace the output layer by per-unit \
                     activations"
                        .into(),
                ))
            }
            "relu" => {
                return Err(Error::UnsupportedActivation(
                    raw.kind,
                    "raw relu is unbounded; use clamped-relu".into(),
                ))
            }
            _ => {
                return Err(Error::UnsupportedActivation(
                    raw.kind,
                    "expected one of logistic, clamped-relu, shifted-tanh, binary-step, \
                     identity-clamped"
                        .into(),
                ))
            }
        };
        a.validate()?;
        Ok(a)
    }
}

impl Default for Activation {
    fn default() -> Self {
        Activation::Logistic { k: 1.0, x0: 0.0 }
    }
}

impl Activation {
    pub fn logistic() -> Self {
        Self::default()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Logistic { .. } => "logistic",
            Activation::ClampedRelu => "clamped-relu",
            Activation::ShiftedTanh => "shifted-tanh",
            Activation::BinaryStep { .. } => "binary-step",
            Activation::IdentityClamped => "identity-clamped",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Activation::Logistic { k, x0 } if !(k.is_finite() && k > 0.0 && x0.is_finite()) => {
                Err(Error::UnsupportedActivation(
                    self.name().into(),
                    format!("needs finite k > 0 and finite x0, got k={k}, x0={x0}"),
                ))
            }
            Activation::BinaryStep { t } if !t.is_finite() => Err(Error::UnsupportedActivation(
                self.name().into(),
                format!("threshold {t} is not finite"),
            )),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            Activation::Logistic { k, x0 } => 1.0 / (1.0 + (-k * (u - x0)).exp()),
            Activation::ClampedRelu | Activation::IdentityClamped => u.clamp(0.0, 1.0),
            Activation::ShiftedTanh => (u.tanh() + 1.0) / 2.0,
            Activation::BinaryStep { t } => {
                if u > t {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `φₙ(u) = [φ(u)]ⁿ`.
    #[inline]
    pub fn apply_quantized(&self, u: f64, scale: GradedScale) -> f64 {
        scale.quantize(self.apply(u))
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            Activation::Logistic { .. } | Activation::ShiftedTanh => Monotonicity::Increasing,
            Activation::ClampedRelu | Activation::BinaryStep { .. } | Activation::IdentityClamped => {
                Monotonicity::NonDecreasing
            }
        }
    }

    /// Sample the function at 1000 points around its active region and
    /// confirm the declared monotonicity class and the `[0, 1]` range.
    pub fn spot_check(&self) -> Result<()> {
        let (lo, hi) = match *self {
            Activation::Logistic { k, x0 } => (x0 - 8.0 / k, x0 + 8.0 / k),
            Activation::ShiftedTanh => (-4.0, 4.0),
            Activation::BinaryStep { t } => (t - 1.0, t + 1.0),
            Activation::ClampedRelu | Activation::IdentityClamped => (-0.5, 1.5),
        };
        let class = self.monotonicity();
        let mut prev: Option<f64> = None;
        for i in 0..1000 {
            let u = lo + (hi - lo) * i as f64 / 999.0;
            let y = self.apply(u);
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::UnsupportedActivation(
                    self.name().into(),
                    format!("value {y} at {u} is outside [0, 1]"),
                ));
            }
            if let Some(p) = prev {
                let bad = match class {
                    Monotonicity::Increasing => y <= p,
                    Monotonicity::NonDecreasing => y < p,
                    Monotonicity::None => false,
                };
                if bad {
                    return Err(Error::UnsupportedActivation(
                        self.name().into(),
                        format!("not {class:?} near {u}"),
                    ));
                }
            }
            prev = Some(y);
        }
        Ok(())
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Logistic { k, x0 } => write!(f, "logistic(k={k}, x0={x0})"),
            Activation::BinaryStep { t } => write!(f, "binary-step(t={t})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Activation per distinguished concept; stored as a JSON sidecar next to
/// a `.kb` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivationSpec(pub IndexMap<String, Activation>);

impl ActivationSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same activation for every listed concept.
    pub fn uniform<'a>(names: impl IntoIterator<Item = &'a str>, a: Activation) -> Self {
        ActivationSpec(names.into_iter().map(|n| (n.to_string(), a)).collect())
    }

    pub fn insert(&mut self, concept: impl Into<String>, a: Activation) {
        self.0.insert(concept.into(), a);
    }

    pub fn get(&self, concept: &str) -> Result<Activation> {
        self.0
            .get(concept)
            .copied()
            .ok_or_else(|| Error::MissingActivation(concept.to_string()))
    }

    /// Weakest monotonicity class across all entries.
    pub fn monotonicity(&self) -> Monotonicity {
        self.0
            .values()
            .map(Activation::monotonicity)
            .fold(Monotonicity::Increasing, |acc, m| match (acc, m) {
                (Monotonicity::None, _) | (_, Monotonicity::None) => Monotonicity::None,
                (Monotonicity::Increasing, Monotonicity::Increasing) => Monotonicity::Increasing,
                _ => Monotonicity::NonDecreasing,
            })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ActivationSpec = serde_json::from_str(text)?;
        for a in spec.0.values() {
            a.spot_check()?;
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_at_one() {
        assert!((Activation::logistic().apply(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn step_is_open_at_threshold() {
        let s = Activation::BinaryStep { t: 0.0 };
        assert_eq!(s.apply(0.0), 0.0);
        assert_eq!(s.apply(1e-300), 1.0);
    }

    #[test]
    fn clamps() {
        assert_eq!(Activation::IdentityClamped.apply(1.7), 1.0);
        assert_eq!(Activation::ClampedRelu.apply(-2.0), 0.0);
    }

    #[test]
    fn catalog_passes_spot_checks() {
        for a in [
            Activation::logistic(),
            Activation::Logistic { k: 3.0, x0: -1.0 },
            Activation::ClampedRelu,
            Activation::ShiftedTanh,
            Activation::BinaryStep { t: 0.5 },
            Activation::IdentityClamped,
        ] {
            a.spot_check().unwrap();
        }
    }

    #[test]
    fn json_forms() {
        let a: Activation = serde_json::from_str(r#"{"kind":"logistic","k":2.0,"x0":0.5}"#).unwrap();
        assert_eq!(a, Activation::Logistic { k: 2.0, x0: 0.5 });
        let a: Activation = serde_json::from_str(r#"{"kind":"binary-step"}"#).unwrap();
        assert_eq!(a, Activation::BinaryStep { t: 0.0 });
        let back: Activation = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
        let err = serde_json::from_str::<Activation>(r#"{"kind":"softmax"}"#).unwrap_err();
        assert!(err.to_string().contains("softmax"));
        assert!(serde_json::from_str::<Activation>(r#"{"kind":"relu"}"#).is_err());
    }

    #[test]
    fn spec_monotonicity_is_weakest() {
        let mut s = ActivationSpec::uniform(["A", "B"], Activation::logistic());
        assert_eq!(s.monotonicity(), Monotonicity::Increasing);
        s.insert("C", Activation::BinaryStep { t: 0.0 });
        assert_eq!(s.monotonicity(), Monotonicity::NonDecreasing);
        assert!(matches!(s.get("D"), Err(Error::MissingActivation(_))));
    }
}
