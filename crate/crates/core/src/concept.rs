//! Concept expressions and fuzzy axioms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A concept of ALC extended with a (non-nested) typicality operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConceptExpr {
    Top,
    Bot,
    Name(String),
    Not(Box<ConceptExpr>),
    And(Box<ConceptExpr>, Box<ConceptExpr>),
    Or(Box<ConceptExpr>, Box<ConceptExpr>),
    Exists(String, Box<ConceptExpr>),
    Forall(String, Box<ConceptExpr>),
    Typ(Box<ConceptExpr>),
}

impl ConceptExpr {
    pub fn name(n: impl Into<String>) -> Self {
        ConceptExpr::Name(n.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: ConceptExpr) -> Self {
        ConceptExpr::Not(Box::new(c))
    }

    pub fn and(a: ConceptExpr, b: ConceptExpr) -> Self {
        ConceptExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ConceptExpr, b: ConceptExpr) -> Self {
        ConceptExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(role: impl Into<String>, c: ConceptExpr) -> Self {
        ConceptExpr::Exists(role.into(), Box::new(c))
    }

    pub fn forall(role: impl Into<String>, c: ConceptExpr) -> Self {
        ConceptExpr::Forall(role.into(), Box::new(c))
    }

    /// `T(c)`; fails when `c` already contains a typicality operator.
    pub fn typ(c: ConceptExpr) -> Result<Self> {
        if c.has_typicality() {
            return Err(Error::NestedTypicality(format!("T({c})")));
        }
        Ok(ConceptExpr::Typ(Box::new(c)))
    }

    pub fn has_typicality(&self) -> bool {
        match self {
            ConceptExpr::Typ(_) => true,
            ConceptExpr::Top | ConceptExpr::Bot | ConceptExpr::Name(_) => false,
            ConceptExpr::Not(c) | ConceptExpr::Exists(_, c) | ConceptExpr::Forall(_, c) => c.has_typicality(),
            ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => a.has_typicality() || b.has_typicality(),
        }
    }

    pub fn has_roles(&self) -> bool {
        match self {
            ConceptExpr::Exists(..) | ConceptExpr::Forall(..) => true,
            ConceptExpr::Top | ConceptExpr::Bot | ConceptExpr::Name(_) => false,
            ConceptExpr::Not(c) | ConceptExpr::Typ(c) => c.has_roles(),
            ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => a.has_roles() || b.has_roles(),
        }
    }

    /// Rejects `T` nested inside `T` anywhere in the tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConceptExpr::Typ(inner) => {
                if inner.has_typicality() {
                    Err(Error::NestedTypicality(self.to_string()))
                } else {
                    Ok(())
                }
            }
            ConceptExpr::Top | ConceptExpr::Bot | ConceptExpr::Name(_) => Ok(()),
            ConceptExpr::Not(c) | ConceptExpr::Exists(_, c) | ConceptExpr::Forall(_, c) => c.validate(),
            ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => {
                a.validate()?;
                b.validate()
            }
        }
    }

    pub fn concept_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn role_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_names(&self, concepts: &mut BTreeSet<String>, roles: &mut BTreeSet<String>) {
        match self {
            ConceptExpr::Top | ConceptExpr::Bot => {}
            ConceptExpr::Name(n) => {
                concepts.insert(n.clone());
            }
            ConceptExpr::Not(c) | ConceptExpr::Typ(c) => c.collect_names(concepts, roles),
            ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => {
                a.collect_names(concepts, roles);
                b.collect_names(concepts, roles);
            }
            ConceptExpr::Exists(r, c) | ConceptExpr::Forall(r, c) => {
                roles.insert(r.clone());
                c.collect_names(concepts, roles);
            }
        }
    }

    /// Every `T(..)` subterm, outermost first, without duplicates.
    pub fn typicality_subterms(&self) -> Vec<&ConceptExpr> {
        let mut out: Vec<&ConceptExpr> = Vec::new();
        self.walk(&mut |c| {
            if let ConceptExpr::Typ(inner) = c {
                if !out.contains(&&**inner) {
                    out.push(inner);
                }
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ConceptExpr)) {
        f(self);
        match self {
            ConceptExpr::Top | ConceptExpr::Bot | ConceptExpr::Name(_) => {}
            ConceptExpr::Not(c) | ConceptExpr::Typ(c) | ConceptExpr::Exists(_, c) | ConceptExpr::Forall(_, c) => {
                c.walk(f)
            }
            ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn precedence(&self) -> u8 {
        match self {
            ConceptExpr::Or(..) => 1,
            ConceptExpr::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        if p < min {
            f.write_str("(")?;
        }
        match self {
            ConceptExpr::Top => f.write_str("top")?,
            ConceptExpr::Bot => f.write_str("bot")?,
            ConceptExpr::Name(n) => f.write_str(n)?,
            ConceptExpr::Not(c) => {
                f.write_str("not ")?;
                c.fmt_prec(f, 3)?;
            }
            ConceptExpr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 3)?;
            }
            ConceptExpr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 2)?;
            }
            ConceptExpr::Exists(r, c) => {
                write!(f, "some {r} . ")?;
                c.fmt_prec(f, 3)?;
            }
            ConceptExpr::Forall(r, c) => {
                write!(f, "all {r} . ")?;
                c.fmt_prec(f, 3)?;
            }
            ConceptExpr::Typ(c) => {
                f.write_str("T(")?;
                c.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if p < min {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ConceptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Serialize for ConceptExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConceptExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::syntax::parse_concept(&text).map_err(serde::de::Error::custom)
    }
}

/// The comparator `θ` of a fuzzy axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Lt => "<",
        }
    }

    /// `>=` and `>` constrain every element; `<=` and `<` need a witness.
    pub fn is_lower_bound(self) -> bool {
        matches!(self, Comparator::Ge | Comparator::Gt)
    }

    /// Evaluate `value θ threshold` given a three-way comparison of the two.
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Ge => ord != Less,
            Comparator::Gt => ord == Greater,
            Comparator::Le => ord != Greater,
            Comparator::Lt => ord == Less,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AxiomKind {
    Inclusion {
        lhs: ConceptExpr,
        rhs: ConceptExpr,
    },
    ConceptAssertion {
        concept: ConceptExpr,
        individual: String,
    },
    RoleAssertion {
        role: String,
        subject: String,
        object: String,
    },
}

/// A threshold, kept with its written form so `k/n` survives a round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    /// `Some((k, n))` when written as the fraction `k/n`.
    pub fraction: Option<(u32, u32)>,
}

impl Threshold {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
            return Err(Error::DegreeOutOfRange(value));
        }
        Ok(Threshold { value, fraction: None })
    }

    pub fn fraction(k: u32, n: u32) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::DegreeOutOfRange(if n == 0 {
                f64::INFINITY
            } else {
                k as f64 / n as f64
            }));
        }
        Ok(Threshold {
            value: k as f64 / n as f64,
            fraction: Some((k, n)),
        })
    }
}

impl PartialEq<f64> for Threshold {
    fn eq(&self, other: &f64) -> bool {
        self.value == *other
    }
}

impl Eq for Threshold {}

impl std::hash::Hash for Threshold {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.value.to_bits().hash(state);
        self.fraction.hash(state);
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fraction {
            Some((k, n)) => write!(f, "{k}/{n}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// A fuzzy axiom `E θ threshold`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Axiom {
    pub kind: AxiomKind,
    pub comparator: Comparator,
    pub threshold: Threshold,
}

impl Axiom {
    pub fn inclusion(lhs: ConceptExpr, rhs: ConceptExpr, comparator: Comparator, threshold: f64) -> Result<Self> {
        lhs.validate()?;
        rhs.validate()?;
        Ok(Axiom {
            kind: AxiomKind::Inclusion { lhs, rhs },
            comparator,
            threshold: Threshold::new(threshold)?,
        })
    }

    pub fn with_threshold(mut self, threshold: Threshold) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn is_inclusion(&self) -> bool {
        matches!(self.kind, AxiomKind::Inclusion { .. })
    }

    pub fn concepts(&self) -> Vec<&ConceptExpr> {
        match &self.kind {
            AxiomKind::Inclusion { lhs, rhs } => vec![lhs, rhs],
            AxiomKind::ConceptAssertion { concept, .. } => vec![concept],
            AxiomKind::RoleAssertion { .. } => vec![],
        }
    }

    pub fn concept_names(&self) -> BTreeSet<String> {
        self.concepts().into_iter().flat_map(|c| c.concept_names()).collect()
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AxiomKind::Inclusion { lhs, rhs } => write!(f, "{lhs} <: {rhs}")?,
            AxiomKind::ConceptAssertion { concept, individual } => match concept {
                ConceptExpr::Name(_) | ConceptExpr::Top | ConceptExpr::Bot => write!(f, "{concept}({individual})")?,
                _ => write!(f, "({concept})({individual})")?,
            },
            AxiomKind::RoleAssertion { role, subject, object } => write!(f, "{role}({subject}, {object})")?,
        }
        write!(f, " {} {}", self.comparator, self.threshold)
    }
}

impl Serialize for Axiom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
