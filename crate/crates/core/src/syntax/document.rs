use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::Serialize;

use crate::concept::{Axiom, ConceptExpr};

/// One weighted typicality inclusion `T(C) <: rhs @ weight`; the subject
/// concept `C` is the key of the block that holds it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedInclusion {
    pub rhs: ConceptExpr,
    pub weight: f64,
}

impl WeightedInclusion {
    pub fn new(rhs: ConceptExpr, weight: f64) -> Self {
        WeightedInclusion { rhs, weight }
    }
}

/// The content of a `.kb` file: strict TBox, ABox, and one block of
/// weighted typicality inclusions per distinguished concept.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KbDocument {
    pub strict_axioms: Vec<Axiom>,
    pub assertions: Vec<Axiom>,
    pub weighted_blocks: IndexMap<String, Vec<WeightedInclusion>>,
}

impl KbDocument {
    pub fn is_empty(&self) -> bool {
        self.strict_axioms.is_empty() && self.assertions.is_empty() && self.weighted_blocks.is_empty()
    }

    pub fn distinguished(&self) -> impl Iterator<Item = &str> {
        self.weighted_blocks.keys().map(String::as_str)
    }

    /// Every concept name mentioned anywhere in the document.
    pub fn concept_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in self.strict_axioms.iter().chain(&self.assertions) {
            out.extend(a.concept_names());
        }
        for (c, block) in &self.weighted_blocks {
            out.insert(c.clone());
            for w in block {
                out.extend(w.rhs.concept_names());
            }
        }
        out
    }

    pub fn to_kb_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for KbDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for a in &self.strict_axioms {
            writeln!(out, "{a}")?;
        }
        if !self.strict_axioms.is_empty() && !self.assertions.is_empty() {
            out.push('\n');
        }
        for a in &self.assertions {
            writeln!(out, "{a}")?;
        }
        for (name, block) in &self.weighted_blocks {
            if !out.is_empty() {
                out.push('\n');
            }
            writeln!(out, "{name} {{")?;
            for w in block {
                writeln!(out, "  T({name}) <: {} @ {}", w.rhs, w.weight)?;
            }
            writeln!(out, "}}")?;
        }
        f.write_str(&out)
    }
}
