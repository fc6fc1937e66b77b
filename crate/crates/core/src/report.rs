//! Counterexample counts per threshold, one row per axiom.

use serde::Serialize;

use crate::concept::{Axiom, AxiomKind, ConceptExpr, Threshold};
use crate::error::Result;
use crate::interpretation::Interpretation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub threshold: Threshold,
    pub holds: bool,
    pub counterexamples: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `E` for an inclusion `T(E) <: F`, else the whole left-hand side.
    pub e: String,
    pub f: String,
    pub cells: Vec<SweepCell>,
    /// `|typical_set(E)|`, when the left-hand side is `T(E)`.
    pub typical: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// Check every axiom at every threshold (or at its own threshold when
/// `thresholds` is empty), counting counterexamples.
pub fn threshold_sweep(i: &Interpretation, axioms: &[Axiom], thresholds: &[Threshold]) -> Result<SweepReport> {
    let mut rows = Vec::with_capacity(axioms.len());
    for ax in axioms {
        let (e, f, typical) = match &ax.kind {
            AxiomKind::Inclusion { lhs, rhs } => match lhs {
                ConceptExpr::Typ(inner) => (inner.to_string(), rhs.to_string(), Some(i.typical_set(inner)?.len())),
                _ => (lhs.to_string(), rhs.to_string(), None),
            },
            _ => {
                let s = ax.to_string();
                let head = s.rsplit_once(' ').map_or(s.as_str(), |(h, _)| h);
                let head = head.rsplit_once(' ').map_or(head, |(h, _)| h);
                (head.to_string(), String::new(), None)
            }
        };
        let ts: Vec<Threshold> = if thresholds.is_empty() {
            vec![ax.threshold]
        } else {
            thresholds.to_vec()
        };
        let cells = ts
            .into_iter()
            .map(|t| {
                let r = i.check_axiom(&ax.clone().with_threshold(t))?;
                let counterexamples = if ax.comparator.is_lower_bound() {
                    r.counterexamples.len()
                } else {
                    usize::from(!r.holds)
                };
                Ok(SweepCell {
                    threshold: t,
                    holds: r.holds,
                    counterexamples,
                    value: r.value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(SweepRow { e, f, cells, typical });
    }
    Ok(SweepReport { rows })
}

fn label(t: &Threshold) -> String {
    match t.fraction {
        Some((k, _)) => format!("k={k}"),
        None => format!("{}", t.value),
    }
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.cells.iter().all(|c| c.holds))
    }

    /// Columns `E | F | <one per threshold> | #T(E)`. Rows whose
    /// thresholds differ from the first row's get a `θ=` prefix per cell.
    pub fn to_table(&self) -> String {
        let head: Vec<String> = self
            .rows
            .first()
            .map(|r| r.cells.iter().map(|c| label(&c.threshold)).collect())
            .unwrap_or_default();
        let mut grid: Vec<Vec<String>> = Vec::with_capacity(self.rows.len() + 1);
        let mut h = vec!["E".to_string(), "F".to_string()];
        h.extend(head.iter().cloned());
        h.push("#T(E)".into());
        grid.push(h);
        for r in &self.rows {
            let mut line = vec![r.e.clone(), r.f.clone()];
            for (j, c) in r.cells.iter().enumerate() {
                let l = label(&c.threshold);
                if head.get(j) == Some(&l) {
                    line.push(c.counterexamples.to_string());
                } else {
                    line.push(format!("{}: {}", l, c.counterexamples));
                }
            }
            line.push(r.typical.map_or("-".into(), |t| t.to_string()));
            grid.push(line);
        }
        let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
        let width: Vec<usize> = (0..cols)
            .map(|j| {
                grid.iter()
                    .filter_map(|l| l.get(j))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut s = String::new();
        for (n, line) in grid.iter().enumerate() {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if j < 2 {
                        format!("{c:<w$}", w = width[j])
                    } else {
                        format!("{c:>w$}", w = width[j])
                    }
                })
                .collect();
            s.push_str(cells.join(" | ").trim_end());
            s.push('\n');
            if n == 0 {
                let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
                s.push_str(&rule.join("-+-"));
                s.push('\n');
            }
        }
        s
    }
}
