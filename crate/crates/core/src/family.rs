//! Combination functions: t-norms, s-norms, implications and negations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::degree::Degree;
use crate::error::Error;

/// The operations a many-valued logic needs to interpret the boolean
/// constructors and role restrictions.
pub trait Combination {
    fn tnorm(&self, a: f64, b: f64) -> f64;
    fn snorm(&self, a: f64, b: f64) -> f64;
    fn implies(&self, a: f64, b: f64) -> f64;
    fn negate(&self, a: f64) -> f64;
}

/// Built-in combination families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombinationFamily {
    /// Gödel t-norm, s-norm and implication with Gödel negation.
    Goedel,
    /// Gödel connectives with the standard involutive negation `1 - a`.
    #[default]
    GoedelInvolutive,
    Lukasiewicz,
    Product,
}

impl CombinationFamily {
    pub const ALL: [CombinationFamily; 4] = [
        CombinationFamily::Goedel,
        CombinationFamily::GoedelInvolutive,
        CombinationFamily::Lukasiewicz,
        CombinationFamily::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombinationFamily::Goedel => "goedel",
            CombinationFamily::GoedelInvolutive => "goedel-involutive",
            CombinationFamily::Lukasiewicz => "lukasiewicz",
            CombinationFamily::Product => "product",
        }
    }

    /// Whether min/max/1-x style connectives keep values on every `C_n`.
    pub fn is_goedel(self) -> bool {
        matches!(self, CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive)
    }
}

impl Combination for CombinationFamily {
    #[inline]
    fn tnorm(&self, a: f64, b: f64) -> f64 {
        match self {
            CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => a.min(b),
            CombinationFamily::Lukasiewicz => (a - (1.0 - b)).max(0.0),
            CombinationFamily::Product => a * b,
        }
    }

    #[inline]
    fn snorm(&self, a: f64, b: f64) -> f64 {
        match self {
            CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => a.max(b),
            CombinationFamily::Lukasiewicz => (a + b).min(1.0),
            CombinationFamily::Product => a + b - a * b,
        }
    }

    #[inline]
    fn implies(&self, a: f64, b: f64) -> f64 {
        match self {
            CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => {
                if a <= b {
                    1.0
                } else {
                    b
                }
            }
            CombinationFamily::Lukasiewicz => (1.0 - (a - b)).min(1.0),
            CombinationFamily::Product => {
                if a <= b {
                    1.0
                } else {
                    b / a
                }
            }
        }
    }

    #[inline]
    fn negate(&self, a: f64) -> f64 {
        match self {
            CombinationFamily::Goedel | CombinationFamily::Product => {
                if a == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CombinationFamily::GoedelInvolutive | CombinationFamily::Lukasiewicz => 1.0 - a,
        }
    }
}

impl fmt::Display for CombinationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombinationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "goedel" | "godel" | "gödel" | "g" => Ok(CombinationFamily::Goedel),
            "goedel-involutive" | "godel-involutive" | "gi" => Ok(CombinationFamily::GoedelInvolutive),
            "lukasiewicz" | "l" => Ok(CombinationFamily::Lukasiewicz),
            "product" | "p" => Ok(CombinationFamily::Product),
            other => Err(Error::Invalid(format!(
                "unknown combination family `{other}` (expected goedel, goedel-involutive, lukasiewicz or product)"
            ))),
        }
    }
}

/// Selects one of the four combination functions for [`combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    TNorm,
    SNorm,
    Implication,
    Negation,
}

/// Apply one connective of `family`. `b` is ignored for negation and
/// treated as `1` when missing for binary connectives.
pub fn combine<F: Combination + ?Sized>(family: &F, op: Connective, a: Degree, b: Option<Degree>) -> Degree {
    let a = a.value();
    let b = b.map(Degree::value).unwrap_or(1.0);
    let v = match op {
        Connective::TNorm => family.tnorm(a, b),
        Connective::SNorm => family.snorm(a, b),
        Connective::Implication => family.implies(a, b),
        Connective::Negation => family.negate(a),
    };
    Degree::saturating(v)
}

/// One failed axiom instance found by [`validate_family`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub operands: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FamilyReport {
    pub checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl FamilyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, axiom: &'static str, operands: &[f64], detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(AxiomViolation {
                axiom,
                operands: operands.to_vec(),
                detail: detail(),
            });
        }
    }
}

/// Tolerance used when comparing results of the connectives.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

/// Check every t-norm/s-norm axiom and every implication/negation axiom on
/// all pairs and triples drawn from `samples`.
pub fn validate_family<F: Combination + ?Sized>(family: &F, samples: &[f64]) -> FamilyReport {
    let tol = AXIOM_TOLERANCE;
    let close = |x: f64, y: f64| (x - y).abs() <= tol;
    let le = |x: f64, y: f64| x <= y + tol;
    let mut r = FamilyReport::default();

    let in_range = |v: f64| (-tol..=1.0 + tol).contains(&v);

    // Negation tautology is operand-free.
    r.check(
        close(family.negate(0.0), 1.0),
        "negation tautology: -0 = 1",
        &[],
        || format!("-0 = {}", family.negate(0.0)),
    );
    r.check(
        close(family.negate(1.0), 0.0),
        "negation tautology: -1 = 0",
        &[],
        || format!("-1 = {}", family.negate(1.0)),
    );
    r.check(
        close(family.implies(1.0, 0.0), 0.0),
        "implication tautology: 1 > 0 = 0",
        &[],
        || format!("1 > 0 = {}", family.implies(1.0, 0.0)),
    );

    for &a in samples {
        let t0 = family.tnorm(a, 0.0);
        r.check(close(t0, 0.0), "t-norm contradiction: a * 0 = 0", &[a], || {
            format!("got {t0}")
        });
        let t1 = family.tnorm(a, 1.0);
        r.check(close(t1, a), "t-norm identity: a * 1 = a", &[a], || format!("got {t1}"));
        let s1 = family.snorm(a, 1.0);
        r.check(close(s1, 1.0), "s-norm tautology: a + 1 = 1", &[a], || {
            format!("got {s1}")
        });
        let s0 = family.snorm(a, 0.0);
        r.check(close(s0, a), "s-norm identity: a + 0 = a", &[a], || format!("got {s0}"));
        let i0 = family.implies(0.0, a);
        r.check(close(i0, 1.0), "implication tautology: 0 > b = 1", &[a], || {
            format!("got {i0}")
        });
        let i1 = family.implies(a, 1.0);
        r.check(close(i1, 1.0), "implication tautology: a > 1 = 1", &[a], || {
            format!("got {i1}")
        });
        let n = family.negate(a);
        r.check(in_range(n), "negation range", &[a], || format!("got {n}"));

        for &b in samples {
            let (ab, ba) = (family.tnorm(a, b), family.tnorm(b, a));
            r.check(in_range(ab), "t-norm range", &[a, b], || format!("got {ab}"));
            r.check(close(ab, ba), "t-norm commutativity", &[a, b], || {
                format!("{ab} vs {ba}")
            });
            let (sab, sba) = (family.snorm(a, b), family.snorm(b, a));
            r.check(in_range(sab), "s-norm range", &[a, b], || format!("got {sab}"));
            r.check(close(sab, sba), "s-norm commutativity", &[a, b], || {
                format!("{sab} vs {sba}")
            });
            let iab = family.implies(a, b);
            r.check(in_range(iab), "implication range", &[a, b], || format!("got {iab}"));
            if a <= b {
                let (na, nb) = (family.negate(a), family.negate(b));
                r.check(le(nb, na), "negation antitonicity", &[a, b], || {
                    format!("-a = {na}, -b = {nb}")
                });
            }

            for &c in samples {
                let l = family.tnorm(family.tnorm(a, b), c);
                let rr = family.tnorm(a, family.tnorm(b, c));
                r.check(close(l, rr), "t-norm associativity", &[a, b, c], || {
                    format!("{l} vs {rr}")
                });
                let l = family.snorm(family.snorm(a, b), c);
                let rr = family.snorm(a, family.snorm(b, c));
                r.check(close(l, rr), "s-norm associativity", &[a, b, c], || {
                    format!("{l} vs {rr}")
                });
                if b <= c {
                    let (x, y) = (family.tnorm(a, b), family.tnorm(a, c));
                    r.check(le(x, y), "t-norm monotonicity", &[a, b, c], || format!("{x} > {y}"));
                    let (x, y) = (family.snorm(a, b), family.snorm(a, c));
                    r.check(le(x, y), "s-norm monotonicity", &[a, b, c], || format!("{x} > {y}"));
                    let (x, y) = (family.implies(a, b), family.implies(a, c));
                    r.check(le(x, y), "implication monotonicity", &[a, b, c], || {
                        format!("{x} > {y}")
                    });
                }
                if a <= b {
                    let (x, y) = (family.implies(a, c), family.implies(b, c));
                    r.check(le(y, x), "implication antitonicity", &[a, b, c], || {
                        format!("{x} < {y}")
                    });
                }
            }
        }
    }
    r
}

/// Evenly spaced samples `0, step, 2 step, ..., 1`.
pub fn grid(step: f64) -> Vec<f64> {
    let k = (1.0 / step).round() as usize;
    (0..=k).map(|i| i as f64 / k as f64).collect()
}
