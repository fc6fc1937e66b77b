//! Weighted conditional knowledge bases and the faithful, coherent and
//! φ-coherent model conditions.

use std::cmp::Ordering;

use serde::Serialize;

use crate::activation::ActivationSpec;
use crate::concept::Axiom;
use crate::degree::GradedScale;
use crate::error::{Error, Result};
use crate::interpretation::{par_map, AxiomCheck, Interpretation};
use crate::syntax::{KbDocument, WeightedInclusion};

/// Relative tolerance for comparing element weights; only absorbs float
/// noise from re-associated sums.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKb {
    document: KbDocument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Faithful,
    Coherent,
    Phi,
}

/// A pair of elements on which the preference of `concept` and the
/// weights disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairViolation {
    pub concept: String,
    pub x: String,
    pub y: String,
    pub degree_x: f64,
    pub degree_y: f64,
    /// `None` stands for `-inf`.
    pub weight_x: Option<f64>,
    pub weight_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub kind: CheckKind,
    pub holds: bool,
    pub failed_axioms: Vec<AxiomCheck>,
    pub violations: Vec<PairViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub concept: String,
    pub element: String,
    pub index: usize,
    pub degree: f64,
    pub expected: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiReport {
    pub holds: bool,
    pub tolerance: f64,
    pub max_residual: f64,
    pub failed_axioms: Vec<AxiomCheck>,
    pub residuals: Vec<Residual>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub n: u32,
    pub max_residual: f64,
}

impl WeightedKb {
    pub fn new(document: KbDocument) -> Result<Self> {
        for (name, block) in &document.weighted_blocks {
            if block.is_empty() {
                return Err(Error::Invalid(format!(
                    "distinguished concept `{name}` has no weighted inclusion"
                )));
            }
            for w in block {
                if !w.weight.is_finite() {
                    return Err(Error::Invalid(format!(
                        "weight {} in the block of `{name}` is not finite",
                        w.weight
                    )));
                }
                if w.rhs.has_typicality() {
                    return Err(Error::Invalid(format!(
                        "typicality on the right of a weighted inclusion for `{name}`: {}",
                        w.rhs
                    )));
                }
            }
        }
        for a in document.strict_axioms.iter().chain(&document.assertions) {
            for c in a.concepts() {
                c.validate()?;
            }
        }
        Ok(WeightedKb { document })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(crate::syntax::parse_kb(text)?)
    }

    pub fn document(&self) -> &KbDocument {
        &self.document
    }

    pub fn into_document(self) -> KbDocument {
        self.document
    }

    pub fn distinguished(&self) -> Vec<&str> {
        self.document.distinguished().collect()
    }

    pub fn is_distinguished(&self, name: &str) -> bool {
        self.document.weighted_blocks.contains_key(name)
    }

    pub fn block(&self, name: &str) -> Result<&[WeightedInclusion]> {
        self.document
            .weighted_blocks
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::NotDistinguished(name.to_string()))
    }

    pub fn strict_axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.document.strict_axioms.iter().chain(&self.document.assertions)
    }

    /// `Σ_h w_h D_h(x)` for every element, summed in block order.
    pub fn raw_sums(&self, i: &Interpretation, name: &str) -> Result<Vec<f64>> {
        let block = self.block(name)?;
        let mut sums = vec![0.0f64; i.len()];
        for w in block {
            let d = i.eval_all(&w.rhs)?;
            for (s, v) in sums.iter_mut().zip(d) {
                *s += w.weight * v;
            }
        }
        Ok(sums)
    }

    /// `W_i(x)` for every element: the raw sum where `C_i(x) > 0`, `-inf` elsewhere.
    pub fn weights(&self, i: &Interpretation, name: &str) -> Result<Vec<f64>> {
        let sums = self.raw_sums(i, name)?;
        let c = i.concept(name)?;
        let mode = i.mode();
        Ok(sums
            .into_iter()
            .zip(c)
            .map(|(s, &d)| if mode.gt(d, 0.0) { s } else { f64::NEG_INFINITY })
            .collect())
    }

    pub fn element_weight(&self, i: &Interpretation, name: &str, x: usize) -> Result<f64> {
        if x >= i.len() {
            return Err(Error::UnknownElement(x.to_string()));
        }
        Ok(self.weights(i, name)?[x])
    }

    fn failed_axioms(&self, i: &Interpretation) -> Result<Vec<AxiomCheck>> {
        let mut out = Vec::new();
        for a in self.strict_axioms() {
            let r = i.check_axiom(a)?;
            if !r.holds {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub fn check_faithful(&self, i: &Interpretation) -> Result<ModelReport> {
        self.check_preferences(i, CheckKind::Faithful)
    }

    pub fn check_coherent(&self, i: &Interpretation) -> Result<ModelReport> {
        self.check_preferences(i, CheckKind::Coherent)
    }

    fn check_preferences(&self, i: &Interpretation, kind: CheckKind) -> Result<ModelReport> {
        let failed_axioms = self.failed_axioms(i)?;
        let mode = i.mode();
        let mut violations = Vec::new();
        for name in self.distinguished() {
            let c = i.concept(name)?;
            let w = self.weights(i, name)?;
            let rows = par_map(i.len(), |x| {
                let mut row = Vec::new();
                for y in 0..i.len() {
                    let pref = mode.cmp(c[x], c[y]) == Ordering::Greater;
                    let heavier = weight_gt(w[x], w[y]);
                    let bad = match kind {
                        CheckKind::Faithful => pref && !heavier,
                        _ => pref != heavier,
                    };
                    if bad {
                        row.push(PairViolation {
                            concept: name.to_string(),
                            x: i.domain()[x].clone(),
                            y: i.domain()[y].clone(),
                            degree_x: c[x],
                            degree_y: c[y],
                            weight_x: finite(w[x]),
                            weight_y: finite(w[y]),
                        });
                    }
                }
                row
            });
            violations.extend(rows.into_iter().flatten());
        }
        Ok(ModelReport {
            kind,
            holds: failed_axioms.is_empty() && violations.is_empty(),
            failed_axioms,
            violations,
        })
    }

    /// Residuals `|C_i(x) - φ_i(Σ_h w_h D_h(x))|` over every element,
    /// including those outside `C_i`. On a graded interpretation `φ_i` is
    /// replaced by `φₙ` and the comparison is exact.
    pub fn check_phi_coherent(&self, i: &Interpretation, phi: &ActivationSpec, tol: f64) -> Result<PhiReport> {
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::Invalid(format!("tolerance {tol} must be non-negative")));
        }
        let failed_axioms = self.failed_axioms(i)?;
        let scale = i.mode().scale();
        let mut residuals = Vec::new();
        let mut ok = true;
        for name in self.distinguished() {
            let act = phi.get(name)?;
            let c = i.concept(name)?;
            let sums = self.raw_sums(i, name)?;
            for (x, (&d, s)) in c.iter().zip(sums).enumerate() {
                let expected = match scale {
                    Some(n) => act.apply_quantized(s, n),
                    None => act.apply(s),
                };
                let r = (d - expected).abs();
                ok &= match scale {
                    Some(n) => n.index_of(d) == n.index_of(expected),
                    None => r <= tol,
                };
                residuals.push(Residual {
                    concept: name.to_string(),
                    element: i.domain()[x].clone(),
                    index: x,
                    degree: d,
                    expected,
                    residual: r,
                });
            }
        }
        let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
        Ok(PhiReport {
            holds: ok && failed_axioms.is_empty(),
            tolerance: if scale.is_some() { 0.0 } else { tol },
            max_residual,
            failed_axioms,
            residuals,
        })
    }

    /// Maximum φₙ-residual of the quantized interpretation, one row per `n`.
    pub fn coherence_residual_profile(
        &self,
        i: &Interpretation,
        phi: &ActivationSpec,
        scales: &[u32],
    ) -> Result<Vec<ProfileRow>> {
        scales
            .iter()
            .map(|&n| {
                let scale = GradedScale::new(n)?;
                let q = i.quantized(scale);
                let mut max_residual = 0.0f64;
                for name in self.distinguished() {
                    let act = phi.get(name)?;
                    let c = q.concept(name)?;
                    let sums = self.raw_sums(&q, name)?;
                    for (&d, s) in c.iter().zip(sums) {
                        max_residual = max_residual.max((d - act.apply_quantized(s, scale)).abs());
                    }
                }
                Ok(ProfileRow { n, max_residual })
            })
            .collect()
    }
}

fn finite(w: f64) -> Option<f64> {
    (w != f64::NEG_INFINITY).then_some(w)
}

/// `a > b` with `-inf` below every real and equal to itself.
pub fn weight_gt(a: f64, b: f64) -> bool {
    match (a == f64::NEG_INFINITY, b == f64::NEG_INFINITY) {
        (true, _) => false,
        (false, true) => true,
        (false, false) => a - b > WEIGHT_TOLERANCE * a.abs().max(b.abs()).max(1.0),
    }
}
