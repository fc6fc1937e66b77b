use crate::concept::{Axiom, AxiomKind, Comparator, ConceptExpr, Threshold};
use crate::degree::GradedScale;
use crate::error::{Error, Result};

use super::document::{KbDocument, WeightedInclusion};
use super::lexer::{tokenize, Tok, Token};

const KEYWORDS: &[&str] = &["top", "bot", "not", "and", "or", "some", "all", "T"];

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scale: Option<GradedScale>,
    pub(crate) warnings: Vec<String>,
}

/// A top-level item of a `.kb` document.
enum Item {
    Strict(Axiom),
    Assertion(Axiom),
    Weighted(String, WeightedInclusion),
    Block(String, Vec<WeightedInclusion>, usize),
}

impl Parser {
    pub(crate) fn new(text: &str, scale: Option<GradedScale>) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            scale,
            warnings: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expected(&self, what: &str) -> Error {
        self.error_here(format!("expected {what}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => Err(self.error_here(format!("`{s}` is a reserved word, expected {what}"))),
            _ => Err(self.expected(what)),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_eof(&mut self) -> Result<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.expected("end of input"))
        }
    }

    pub(crate) fn concept(&mut self) -> Result<ConceptExpr> {
        let mut lhs = self.conjunction()?;
        while self.is_keyword("or") {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = ConceptExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<ConceptExpr> {
        let mut lhs = self.unary()?;
        while self.is_keyword("and") {
            self.bump();
            let rhs = self.unary()?;
            lhs = ConceptExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ConceptExpr> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(ConceptExpr::not(self.unary()?));
        }
        for (kw, exists) in [("some", true), ("all", false)] {
            if self.is_keyword(kw) {
                self.bump();
                let role = self.ident("role name")?;
                self.expect(Tok::Dot, "`.` after role name")?;
                let filler = self.unary()?;
                return Ok(if exists {
                    ConceptExpr::exists(role, filler)
                } else {
                    ConceptExpr::forall(role, filler)
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ConceptExpr> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(ConceptExpr::Top)
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(ConceptExpr::Bot)
            }
            Tok::Ident(s) if s == "T" && *self.peek_at(1) == Tok::LParen => {
                let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
                self.bump();
                self.bump();
                let inner = self.concept()?;
                self.expect(Tok::RParen, "`)` closing T(")?;
                if inner.has_typicality() {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!("nested typicality is not allowed: T({inner})"),
                    });
                }
                Ok(ConceptExpr::Typ(Box::new(inner)))
            }
            Tok::Ident(_) => Ok(ConceptExpr::Name(self.ident("concept name")?)),
            Tok::LParen => {
                self.bump();
                let c = self.concept()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            _ => Err(self.expected("a concept (name, `top`, `bot`, `not`, `some`, `all`, `T(` or `(`)")),
        }
    }

    fn comparator(&mut self) -> Result<Comparator> {
        let c = match self.peek() {
            Tok::Ge => Comparator::Ge,
            Tok::Le => Comparator::Le,
            Tok::Gt => Comparator::Gt,
            Tok::Lt => Comparator::Lt,
            _ => return Err(self.expected("comparator `>=`, `<=`, `>` or `<`")),
        };
        self.bump();
        Ok(c)
    }

    fn threshold(&mut self) -> Result<Threshold> {
        let value = match *self.peek() {
            Tok::Number(v) => v,
            _ => return Err(self.expected("threshold in [0, 1]")),
        };
        self.bump();
        let t = if *self.peek() == Tok::Slash {
            self.bump();
            let den = match *self.peek() {
                Tok::Number(v) => v,
                _ => return Err(self.expected("denominator")),
            };
            self.bump();
            if value.fract() != 0.0
                || den.fract() != 0.0
                || den < 1.0
                || value > u32::MAX as f64
                || den > u32::MAX as f64
            {
                return Err(self.error_here(format!("malformed fraction {value}/{den}")));
            }
            Threshold::fraction(value as u32, den as u32)
                .map_err(|_| self.error_here(format!("threshold {value}/{den} is outside [0, 1]")))?
        } else {
            Threshold::new(value).map_err(|_| self.error_here(format!("threshold {value} is outside [0, 1]")))?
        };
        if let Some(scale) = self.scale {
            if !scale.contains(t.value) {
                return Err(self.error_here(format!("threshold {t} is not a value of the truth space {scale}")));
            }
        }
        Ok(t)
    }

    fn weight(&mut self) -> Result<f64> {
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        match *self.peek() {
            Tok::Number(v) if v.is_finite() => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            Tok::Number(v) => Err(self.error_here(format!("weight {v} is not a finite real"))),
            _ => Err(self.expected("weight")),
        }
    }

    fn typicality_subject(&self, lhs: &ConceptExpr) -> Option<String> {
        match lhs {
            ConceptExpr::Typ(inner) => match &**inner {
                ConceptExpr::Name(n) => Some(n.clone()),
                _ => None,
            },
            _ => None,
        }
    }

    fn weighted_subject(&self, lhs: &ConceptExpr, start: (usize, usize)) -> Result<String> {
        self.typicality_subject(lhs).ok_or_else(|| Error::Syntax {
            line: start.0,
            column: start.1,
            message: format!("weighted inclusions must have the form T(Name) <: D, found {lhs}"),
        })
    }

    fn item(&mut self) -> Result<Item> {
        // Block: Name { ... }
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::LBrace && !KEYWORDS.contains(&name.as_str()) {
                let line = self.toks[self.pos].line;
                self.bump();
                self.bump();
                let mut entries = Vec::new();
                while *self.peek() != Tok::RBrace {
                    if *self.peek() == Tok::Semi {
                        self.bump();
                        continue;
                    }
                    if self.at_eof() {
                        return Err(self.expected("`}` closing the weighted block"));
                    }
                    let start = (self.toks[self.pos].line, self.toks[self.pos].column);
                    let lhs = self.concept()?;
                    self.expect(Tok::Sub, "`<:`")?;
                    let rhs = self.concept()?;
                    self.expect(Tok::At, "`@` and a weight")?;
                    let weight = self.weight()?;
                    let subject = self.weighted_subject(&lhs, start)?;
                    if subject != name {
                        return Err(Error::Syntax {
                            line: start.0,
                            column: start.1,
                            message: format!("inclusion for T({subject}) inside the block of `{name}`"),
                        });
                    }
                    if rhs.has_typicality() {
                        return Err(Error::Syntax {
                            line: start.0,
                            column: start.1,
                            message: "typicality may only occur on the left of a weighted inclusion".into(),
                        });
                    }
                    entries.push(WeightedInclusion { rhs, weight });
                }
                self.bump();
                return Ok(Item::Block(name, entries, line));
            }
        }

        let start = (self.toks[self.pos].line, self.toks[self.pos].column);
        let concept = self.concept()?;
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let a = self.ident("individual name")?;
                let b = if *self.peek() == Tok::Comma {
                    self.bump();
                    Some(self.ident("individual name")?)
                } else {
                    None
                };
                self.expect(Tok::RParen, "`)` closing the assertion")?;
                let comparator = self.comparator()?;
                let threshold = self.threshold()?;
                let kind = match b {
                    None => AxiomKind::ConceptAssertion { concept, individual: a },
                    Some(b) => match concept {
                        ConceptExpr::Name(role) => AxiomKind::RoleAssertion {
                            role,
                            subject: a,
                            object: b,
                        },
                        other => {
                            return Err(Error::Syntax {
                                line: start.0,
                                column: start.1,
                                message: format!("role assertion needs a role name, found {other}"),
                            })
                        }
                    },
                };
                Ok(Item::Assertion(Axiom {
                    kind,
                    comparator,
                    threshold,
                }))
            }
            Tok::Sub => {
                self.bump();
                let rhs = self.concept()?;
                if *self.peek() == Tok::At {
                    self.bump();
                    let weight = self.weight()?;
                    let subject = self.weighted_subject(&concept, start)?;
                    if rhs.has_typicality() {
                        return Err(Error::Syntax {
                            line: start.0,
                            column: start.1,
                            message: "typicality may only occur on the left of a weighted inclusion".into(),
                        });
                    }
                    return Ok(Item::Weighted(subject, WeightedInclusion { rhs, weight }));
                }
                let comparator = self.comparator()?;
                let threshold = self.threshold()?;
                Ok(Item::Strict(Axiom {
                    kind: AxiomKind::Inclusion { lhs: concept, rhs },
                    comparator,
                    threshold,
                }))
            }
            _ => Err(self.expected("`<:` or `(individual)` after the concept")),
        }
    }

    /// A single axiom (strict inclusion or assertion).
    pub(crate) fn axiom(&mut self) -> Result<Axiom> {
        match self.item()? {
            Item::Strict(a) | Item::Assertion(a) => Ok(a),
            Item::Weighted(..) | Item::Block(..) => {
                Err(self.error_here("expected a fuzzy axiom, found a weighted inclusion"))
            }
        }
    }

    pub(crate) fn document(&mut self) -> Result<KbDocument> {
        let mut doc = KbDocument::default();
        let mut block_seen = std::collections::HashSet::new();
        while !self.at_eof() {
            if *self.peek() == Tok::Semi {
                self.bump();
                continue;
            }
            match self.item()? {
                Item::Strict(a) => doc.strict_axioms.push(a),
                Item::Assertion(a) => doc.assertions.push(a),
                Item::Weighted(c, w) => doc.weighted_blocks.entry(c).or_default().push(w),
                Item::Block(name, entries, line) => {
                    if entries.is_empty() {
                        self.warnings.push(format!("line {line}: empty block `{name}` ignored"));
                        continue;
                    }
                    if !block_seen.insert(name.clone()) {
                        self.warnings.push(format!(
                            "line {line}: duplicate block `{name}` merged into the earlier one"
                        ));
                    }
                    doc.weighted_blocks.entry(name).or_default().extend(entries);
                }
            }
        }
        Ok(doc)
    }
}
