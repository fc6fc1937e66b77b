//! The textual `.kb` language.
//!
//! ```text
//! # strict inclusions and assertions
//! Yellow and Black <: bot >= 1
//! some hasParent . Tall <: Tall >= 0.7
//! Fly(reddy) >= 1
//! hasParent(bob, mary) >= 1
//!
//! # weighted typicality inclusions, one block per distinguished concept
//! Bird {
//!   T(Bird) <: Fly @ 20
//!   T(Bird) <: some hasWings . top @ 50
//! }
//! ```
//!
//! Precedence is `not` > `and` > `or`; `some r . C` and `all r . C` bind
//! like `not`. Thresholds may be decimals or fractions `k/n`.

mod document;
mod lexer;
mod parser;

pub use document::{KbDocument, WeightedInclusion};

use crate::concept::{Axiom, ConceptExpr};
use crate::degree::GradedScale;
use crate::error::Result;
use parser::Parser;

pub fn parse_concept(text: &str) -> Result<ConceptExpr> {
    let mut p = Parser::new(text, None)?;
    let c = p.concept()?;
    p.expect_eof()?;
    Ok(c)
}

/// Parse one strict inclusion or assertion, e.g. `T(A) <: B >= 3/5`.
pub fn parse_axiom(text: &str) -> Result<Axiom> {
    parse_axiom_graded(text, None)
}

/// Like [`parse_axiom`], rejecting thresholds that are not on `scale`.
pub fn parse_axiom_graded(text: &str, scale: Option<GradedScale>) -> Result<Axiom> {
    let mut p = Parser::new(text, scale)?;
    let a = p.axiom()?;
    p.expect_eof()?;
    Ok(a)
}

pub fn parse_kb(text: &str) -> Result<KbDocument> {
    Ok(parse_kb_with_warnings(text, None)?.0)
}

/// Parse a document, returning non-fatal warnings (empty or duplicate
/// blocks) alongside it. With a scale, every threshold must lie on it.
pub fn parse_kb_with_warnings(text: &str, scale: Option<GradedScale>) -> Result<(KbDocument, Vec<String>)> {
    let mut p = Parser::new(text, scale)?;
    let doc = p.document()?;
    Ok((doc, p.warnings))
}

pub fn serialize_kb(doc: &KbDocument) -> String {
    doc.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{AxiomKind, Comparator};
    use crate::error::Error;

    fn name(n: &str) -> ConceptExpr {
        ConceptExpr::name(n)
    }

    #[test]
    fn concept_productions() {
        assert_eq!(
            parse_concept("T(Bird)").unwrap(),
            ConceptExpr::Typ(Box::new(name("Bird")))
        );
        assert_eq!(
            parse_concept("some hasParent . Tall").unwrap(),
            ConceptExpr::exists("hasParent", name("Tall"))
        );
        assert_eq!(
            parse_concept("not A and B or C").unwrap(),
            ConceptExpr::or(ConceptExpr::and(ConceptExpr::not(name("A")), name("B")), name("C"))
        );
        assert_eq!(
            parse_concept("all r . (A or B)").unwrap(),
            ConceptExpr::forall("r", ConceptExpr::or(name("A"), name("B")))
        );
        assert_eq!(
            parse_concept("top and bot").unwrap(),
            ConceptExpr::and(ConceptExpr::Top, ConceptExpr::Bot)
        );
    }

    #[test]
    fn nested_typicality_is_an_error() {
        match parse_concept("T(T(A))") {
            Err(Error::Syntax { message, .. }) => assert!(message.contains("nested")),
            other => panic!("{other:?}"),
        }
        assert!(parse_concept("T(A and T(B))").is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_concept("A and\n  or B") {
            Err(Error::Syntax { line, column, message }) => {
                assert_eq!((line, column), (2, 3));
                assert!(message.contains("expected"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_concept("and").is_err());
        assert!(parse_concept("A B").is_err());
    }

    #[test]
    fn weighted_block_example() {
        let doc = parse_kb("Bird { T(Bird) <: Fly @ 20  T(Bird) <: some hasWings . top @ 50 }").unwrap();
        let block = &doc.weighted_blocks["Bird"];
        assert_eq!(block.len(), 2);
        assert_eq!(block[0].weight, 20.0);
        assert_eq!(block[1].weight, 50.0);
        assert_eq!(block[1].rhs, ConceptExpr::exists("hasWings", ConceptExpr::Top));
    }

    #[test]
    fn strict_axiom_example() {
        let doc = parse_kb("Yellow and Black <: bot >= 1").unwrap();
        assert_eq!(doc.strict_axioms.len(), 1);
        let a = &doc.strict_axioms[0];
        assert_eq!(a.comparator, Comparator::Ge);
        assert_eq!(a.threshold.value, 1.0);
        assert!(matches!(
            &a.kind,
            AxiomKind::Inclusion {
                rhs: ConceptExpr::Bot,
                ..
            }
        ));
    }

    #[test]
    fn empty_document() {
        assert_eq!(parse_kb("").unwrap(), KbDocument::default());
        assert_eq!(parse_kb("  # only a comment\n").unwrap(), KbDocument::default());
    }

    #[test]
    fn assertions() {
        let doc =
            parse_kb("Fly(reddy) >= 1 hasParent(bob, mary) >= 0.5 (some hasWings . Small)(reddy) >= 1 Fly(opus) <= 0")
                .unwrap();
        assert_eq!(doc.assertions.len(), 4);
        assert!(matches!(&doc.assertions[1].kind, AxiomKind::RoleAssertion { role, .. } if role == "hasParent"));
        let text = doc.to_string();
        assert_eq!(parse_kb(&text).unwrap(), doc);
    }

    #[test]
    fn thresholds_outside_unit_interval_rejected() {
        assert!(parse_kb("A <: B >= 1.5").is_err());
        assert!(parse_kb("A <: B >= 6/5").is_err());
        assert!(parse_axiom("A(a) >= 2").is_err());
    }

    #[test]
    fn graded_thresholds_validated_against_scale() {
        let c5 = GradedScale::new(5).unwrap();
        assert!(parse_axiom_graded("T(E) <: F >= 3/5", Some(c5)).is_ok());
        assert!(parse_axiom_graded("T(E) <: F >= 0.4", Some(c5)).is_ok());
        assert!(parse_axiom_graded("T(E) <: F >= 1/3", Some(c5)).is_err());
        let a = parse_axiom("T(E) <: F >= 3/5").unwrap();
        assert_eq!(a.to_string(), "T(E) <: F >= 3/5");
    }

    #[test]
    fn duplicate_blocks_merge_with_warning() {
        let (doc, warnings) = parse_kb_with_warnings("A { T(A) <: B @ 1 } A { T(A) <: C @ -2 } E { }", None).unwrap();
        assert_eq!(doc.weighted_blocks["A"].len(), 2);
        assert!(!doc.weighted_blocks.contains_key("E"));
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn weighted_inclusion_shape_enforced() {
        assert!(parse_kb("A { T(B) <: C @ 1 }").is_err());
        assert!(parse_kb("A { A <: C @ 1 }").is_err());
        assert!(parse_kb("A { T(A) <: T(C) @ 1 }").is_err());
        assert!(parse_kb("A { T(A) <: C @ 1e999 }").is_err());
        // Top-level weighted inclusions join the subject's block.
        let doc = parse_kb("T(A) <: C @ -1.5").unwrap();
        assert_eq!(doc.weighted_blocks["A"][0].weight, -1.5);
    }

    #[test]
    fn reserved_words_are_not_names() {
        assert!(parse_concept("some and . A").is_err());
        assert!(parse_concept("T").is_err());
    }
}
