//! Finite many-valued interpretations and model checking.
//!
//! Concepts are evaluated over the whole domain at once: typicality needs
//! the maximum of its argument over `Δ`, and role restrictions need the
//! filler's degree at every element.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Read;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::concept::{Axiom, AxiomKind, Comparator, ConceptExpr};
use crate::degree::{Degree, GradedScale, Mode};
use crate::error::{Error, Result};
use crate::family::{Combination, CombinationFamily};

#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    domain: Vec<String>,
    index: HashMap<String, usize>,
    concepts: IndexMap<String, Vec<f64>>,
    /// Row-major `|Δ| x |Δ|` matrices.
    roles: IndexMap<String, Vec<f64>>,
    individuals: IndexMap<String, usize>,
    family: CombinationFamily,
    mode: Mode,
}

/// Outcome of comparing two elements under the preference induced by a
/// concept: `Less` means the first element is strictly preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preference {
    Less,
    Greater,
    Equal,
}

/// The strict order `<_C` on the domain, backed by the membership vector of `C`.
#[derive(Debug, Clone)]
pub struct PreferenceView {
    pub concept: ConceptExpr,
    degrees: Vec<f64>,
    mode: Mode,
}

impl PreferenceView {
    pub fn compare(&self, x: usize, y: usize) -> Preference {
        match self.mode.cmp(self.degrees[x], self.degrees[y]) {
            Ordering::Greater => Preference::Less,
            Ordering::Less => Preference::Greater,
            Ordering::Equal => Preference::Equal,
        }
    }

    /// `x <_C y`.
    pub fn less(&self, x: usize, y: usize) -> bool {
        self.compare(x, y) == Preference::Less
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
}

/// One element that violates an axiom, or witnesses an upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub element: String,
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Pointwise value of the axiom at this element.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub holds: bool,
    pub value: f64,
    /// For `>=`/`>`: every violating element, worst first.
    pub counterexamples: Vec<Counterexample>,
    /// For `<=`/`<`: an element establishing the bound, when one exists.
    pub witness: Option<Counterexample>,
}

impl Interpretation {
    /// An interpretation over `domain` with no concept, role or individual yet.
    pub fn new(domain: Vec<String>, family: CombinationFamily, mode: Mode) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidInterpretation("the domain is empty".into()));
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (i, d) in domain.iter().enumerate() {
            if index.insert(d.clone(), i).is_some() {
                return Err(Error::InvalidInterpretation(format!("duplicate domain element `{d}`")));
            }
        }
        if let Mode::Fuzzy { epsilon } = mode {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(Error::InvalidInterpretation(format!(
                    "tolerance {epsilon} must be a non-negative real"
                )));
            }
        }
        Ok(Interpretation {
            domain,
            index,
            concepts: IndexMap::new(),
            roles: IndexMap::new(),
            individuals: IndexMap::new(),
            family,
            mode,
        })
    }

    /// Domain `e0, e1, ...` of the given size.
    pub fn anonymous(size: usize, family: CombinationFamily, mode: Mode) -> Result<Self> {
        Self::new((0..size).map(|i| format!("e{i}")).collect(), family, mode)
    }

    fn check_degree(&self, what: &str, v: f64) -> Result<f64> {
        let d = Degree::new(v)
            .map_err(|_| Error::InvalidInterpretation(format!("{what}: degree {v} is outside [0, 1]")))?;
        if let Mode::Graded { n } = self.mode {
            match n.index_of(v) {
                Some(i) => return Ok(n.value(i)),
                None => {
                    return Err(Error::InvalidInterpretation(format!(
                        "{what}: degree {v} is not on the truth space {n}"
                    )))
                }
            }
        }
        Ok(d.value())
    }

    pub fn set_concept(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.domain.len() {
            return Err(Error::InvalidInterpretation(format!(
                "concept `{name}` has {} values for a domain of {}",
                values.len(),
                self.domain.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|v| self.check_degree(&name, v))
            .collect::<Result<Vec<_>>>()?;
        self.concepts.insert(name, values);
        Ok(())
    }

    pub fn with_concept(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.set_concept(name, values)?;
        Ok(self)
    }

    /// Set a role from a full `|Δ| x |Δ|` matrix.
    pub fn set_role(&mut self, name: impl Into<String>, matrix: Vec<Vec<f64>>) -> Result<()> {
        let name = name.into();
        let n = self.domain.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInterpretation(format!(
                "role `{name}` must be a {n}x{n} matrix"
            )));
        }
        let flat = matrix
            .into_iter()
            .flatten()
            .map(|v| self.check_degree(&name, v))
            .collect::<Result<Vec<_>>>()?;
        self.roles.insert(name, flat);
        Ok(())
    }

    pub fn with_role(mut self, name: impl Into<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        self.set_role(name, matrix)?;
        Ok(self)
    }

    /// Set a single role edge, creating an all-zero role if needed.
    pub fn set_role_edge(&mut self, name: &str, x: usize, y: usize, v: f64) -> Result<()> {
        let n = self.domain.len();
        if x >= n || y >= n {
            return Err(Error::InvalidInterpretation(format!(
                "role edge ({x}, {y}) outside a domain of {n}"
            )));
        }
        let v = self.check_degree(name, v)?;
        self.roles.entry(name.to_string()).or_insert_with(|| vec![0.0; n * n])[x * n + y] = v;
        Ok(())
    }

    pub fn set_individual(&mut self, name: impl Into<String>, element: usize) -> Result<()> {
        if element >= self.domain.len() {
            return Err(Error::InvalidInterpretation(format!(
                "individual mapped to element {element} outside the domain"
            )));
        }
        self.individuals.insert(name.into(), element);
        Ok(())
    }

    pub fn with_individual(mut self, name: impl Into<String>, element: usize) -> Result<Self> {
        self.set_individual(name, element)?;
        Ok(self)
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn family(&self) -> CombinationFamily {
        self.family
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_family(mut self, family: CombinationFamily) -> Self {
        self.family = family;
        self
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &str> {
        self.concepts.keys().map(String::as_str)
    }

    pub fn role_names(&self) -> impl Iterator<Item = &str> {
        self.roles.keys().map(String::as_str)
    }

    pub fn individuals(&self) -> impl Iterator<Item = (&str, usize)> {
        self.individuals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn concept(&self, name: &str) -> Result<&[f64]> {
        self.concepts
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownConcept(name.to_string()))
    }

    pub fn role(&self, name: &str, x: usize, y: usize) -> Result<f64> {
        let n = self.domain.len();
        self.roles
            .get(name)
            .map(|m| m[x * n + y])
            .ok_or_else(|| Error::UnknownRole(name.to_string()))
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn individual(&self, name: &str) -> Result<usize> {
        self.individuals
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownIndividual(name.to_string()))
    }

    /// Keep only the listed concept columns (roles and individuals stay).
    pub fn restrict_concepts(&self, keep: &[String]) -> Result<Self> {
        let mut out = self.clone();
        out.concepts.clear();
        for k in keep {
            let col = self.concept(k).map_err(|_| {
                Error::UnknownConcept(format!(
                    "{k} (available: {})",
                    self.concepts.keys().cloned().collect::<Vec<_>>().join(", ")
                ))
            })?;
            out.concepts.insert(k.clone(), col.to_vec());
        }
        Ok(out)
    }

    /// Every stored degree mapped through `[·]ⁿ`; individuals are kept.
    pub fn quantized(&self, scale: GradedScale) -> Self {
        self.map_degrees(Mode::graded(scale), |v| scale.quantize(v))
    }

    /// Apply `f` to every stored degree, switching to `mode`.
    fn map_degrees(&self, mode: Mode, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.mode = mode;
        for v in out.concepts.values_mut() {
            v.iter_mut().for_each(|d| *d = f(*d));
        }
        for v in out.roles.values_mut() {
            v.iter_mut().for_each(|d| *d = f(*d));
        }
        out
    }

    #[inline]
    fn norm(&self, v: f64) -> f64 {
        self.mode.normalize(v)
    }

    /// Degrees of `c` at every domain element.
    pub fn eval_all(&self, c: &ConceptExpr) -> Result<Vec<f64>> {
        let n = self.domain.len();
        let f = &self.family;
        Ok(match c {
            ConceptExpr::Top => vec![1.0; n],
            ConceptExpr::Bot => vec![0.0; n],
            ConceptExpr::Name(name) => self.concept(name)?.to_vec(),
            ConceptExpr::Not(inner) => self
                .eval_all(inner)?
                .into_iter()
                .map(|a| self.norm(f.negate(a)))
                .collect(),
            ConceptExpr::And(a, b) => {
                let (a, b) = (self.eval_all(a)?, self.eval_all(b)?);
                a.iter().zip(&b).map(|(&x, &y)| self.norm(f.tnorm(x, y))).collect()
            }
            ConceptExpr::Or(a, b) => {
                let (a, b) = (self.eval_all(a)?, self.eval_all(b)?);
                a.iter().zip(&b).map(|(&x, &y)| self.norm(f.snorm(x, y))).collect()
            }
            ConceptExpr::Exists(r, inner) => {
                let m = self.roles.get(r).ok_or_else(|| Error::UnknownRole(r.clone()))?;
                let filler = self.eval_all(inner)?;
                par_map(n, |x| {
                    let row = &m[x * n..(x + 1) * n];
                    let sup = row
                        .iter()
                        .zip(&filler)
                        .map(|(&r, &c)| f.tnorm(r, c))
                        .fold(0.0f64, f64::max);
                    self.norm(sup)
                })
            }
            ConceptExpr::Forall(r, inner) => {
                let m = self.roles.get(r).ok_or_else(|| Error::UnknownRole(r.clone()))?;
                let filler = self.eval_all(inner)?;
                par_map(n, |x| {
                    let row = &m[x * n..(x + 1) * n];
                    let inf = row
                        .iter()
                        .zip(&filler)
                        .map(|(&r, &c)| f.implies(r, c))
                        .fold(1.0f64, f64::min);
                    self.norm(inf)
                })
            }
            ConceptExpr::Typ(inner) => {
                let vals = self.eval_all(inner)?;
                let mask = typical_mask(&vals, self.mode);
                vals.into_iter()
                    .zip(mask)
                    .map(|(v, t)| if t { v } else { 0.0 })
                    .collect()
            }
        })
    }

    /// Degree of `c` at element `x`.
    pub fn eval_concept(&self, c: &ConceptExpr, x: usize) -> Result<Degree> {
        if x >= self.domain.len() {
            return Err(Error::UnknownElement(x.to_string()));
        }
        let v = self.eval_at(c, x)?;
        Ok(Degree::saturating(v))
    }

    fn eval_at(&self, c: &ConceptExpr, x: usize) -> Result<f64> {
        let f = &self.family;
        let n = self.domain.len();
        Ok(match c {
            ConceptExpr::Top => 1.0,
            ConceptExpr::Bot => 0.0,
            ConceptExpr::Name(name) => self.concept(name)?[x],
            ConceptExpr::Not(a) => self.norm(f.negate(self.eval_at(a, x)?)),
            ConceptExpr::And(a, b) => self.norm(f.tnorm(self.eval_at(a, x)?, self.eval_at(b, x)?)),
            ConceptExpr::Or(a, b) => self.norm(f.snorm(self.eval_at(a, x)?, self.eval_at(b, x)?)),
            ConceptExpr::Exists(..) | ConceptExpr::Forall(..) | ConceptExpr::Typ(_) => {
                // These need the filler over the whole domain anyway.
                let all = self.eval_all(c)?;
                debug_assert_eq!(all.len(), n);
                all[x]
            }
        })
    }

    /// Elements whose degree in `c` is positive and maximal.
    pub fn typical_set(&self, c: &ConceptExpr) -> Result<Vec<usize>> {
        let vals = self.eval_all(c)?;
        Ok(typical_mask(&vals, self.mode)
            .into_iter()
            .enumerate()
            .filter_map(|(i, t)| t.then_some(i))
            .collect())
    }

    pub fn preference_view(&self, c: &ConceptExpr) -> Result<PreferenceView> {
        Ok(PreferenceView {
            concept: c.clone(),
            degrees: self.eval_all(c)?,
            mode: self.mode,
        })
    }

    /// Compare `x` and `y` under `<_C`.
    pub fn preference(&self, c: &ConceptExpr, x: usize, y: usize) -> Result<Preference> {
        let (a, b) = (self.eval_concept(c, x)?, self.eval_concept(c, y)?);
        Ok(match self.mode.cmp(a.value(), b.value()) {
            Ordering::Greater => Preference::Less,
            Ordering::Less => Preference::Greater,
            Ordering::Equal => Preference::Equal,
        })
    }

    /// Model check a fuzzy axiom.
    pub fn check_axiom(&self, ax: &Axiom) -> Result<AxiomCheck> {
        let thr = ax.threshold.value;
        let cmp = ax.comparator;
        match &ax.kind {
            AxiomKind::Inclusion { lhs, rhs } => {
                let l = self.eval_all(lhs)?;
                let r = self.eval_all(rhs)?;
                let points: Vec<f64> = l
                    .iter()
                    .zip(&r)
                    .map(|(&a, &b)| self.norm(self.family.implies(a, b)))
                    .collect();
                let value = points.iter().copied().fold(1.0f64, f64::min);
                let holds = cmp.holds(self.mode.cmp(value, thr));
                let make = |i: usize| Counterexample {
                    element: self.domain[i].clone(),
                    index: i,
                    lhs: l[i],
                    rhs: r[i],
                    value: points[i],
                };
                let mut counterexamples = Vec::new();
                let mut witness = None;
                if cmp.is_lower_bound() {
                    counterexamples = points
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| !cmp.holds(self.mode.cmp(p, thr)))
                        .map(|(i, _)| make(i))
                        .collect();
                    sort_counterexamples(&mut counterexamples);
                } else {
                    witness = points
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| cmp.holds(self.mode.cmp(p, thr)))
                        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                        .map(|(i, _)| make(i));
                }
                Ok(AxiomCheck {
                    axiom: ax.to_string(),
                    holds,
                    value,
                    counterexamples,
                    witness,
                })
            }
            AxiomKind::ConceptAssertion { concept, individual } => {
                let x = self.individual(individual)?;
                let v = self.eval_concept(concept, x)?.value();
                Ok(self.point_check(ax, x, v, thr, cmp))
            }
            AxiomKind::RoleAssertion { role, subject, object } => {
                let (x, y) = (self.individual(subject)?, self.individual(object)?);
                let v = self.role(role, x, y)?;
                Ok(self.point_check(ax, x, v, thr, cmp))
            }
        }
    }

    fn point_check(&self, ax: &Axiom, x: usize, v: f64, thr: f64, cmp: Comparator) -> AxiomCheck {
        let holds = cmp.holds(self.mode.cmp(v, thr));
        let c = Counterexample {
            element: self.domain[x].clone(),
            index: x,
            lhs: v,
            rhs: thr,
            value: v,
        };
        let (counterexamples, witness) = match (cmp.is_lower_bound(), holds) {
            (true, false) => (vec![c], None),
            (true, true) => (vec![], None),
            (false, true) => (vec![], Some(c)),
            (false, false) => (vec![], None),
        };
        AxiomCheck {
            axiom: ax.to_string(),
            holds,
            value: v,
            counterexamples,
            witness,
        }
    }

    // ---- I/O -----------------------------------------------------------

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InterpretationFile = serde_json::from_str(text)?;
        file.into_interpretation()
    }

    pub fn to_file(&self) -> InterpretationFile {
        let n = self.domain.len();
        InterpretationFile {
            domain: self.domain.clone(),
            concepts: self.concepts.clone(),
            roles: self
                .roles
                .iter()
                .map(|(k, m)| (k.clone(), m.chunks(n).map(<[f64]>::to_vec).collect()))
                .collect(),
            individuals: self.individuals.clone(),
            family: Some(self.family),
            grade: self.mode.scale().map(GradedScale::n),
        }
    }

    /// Role-free models as CSV: one row per element, one column per
    /// concept. A leading `id` or `element` column names the elements.
    pub fn from_csv<R: Read>(reader: R, family: CombinationFamily, mode: Mode) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let has_id = headers
            .first()
            .is_some_and(|h| h.eq_ignore_ascii_case("id") || h.eq_ignore_ascii_case("element"));
        let names: Vec<String> = headers.iter().skip(has_id as usize).cloned().collect();
        let mut ids = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if has_id {
                ids.push(rec.get(0).unwrap_or_default().to_string());
            } else {
                ids.push(format!("e{row}"));
            }
            for (j, col) in cols.iter_mut().enumerate() {
                let cell = rec.get(j + has_id as usize).ok_or_else(|| {
                    Error::InvalidInterpretation(format!("row {} is missing column `{}`", row + 1, names[j]))
                })?;
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::InvalidInterpretation(format!("row {}: `{cell}` is not a number", row + 1)))?;
                col.push(v);
            }
        }
        let mut out = Interpretation::new(ids, family, mode)?;
        for (name, col) in names.into_iter().zip(cols) {
            out.set_concept(name, col)?;
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> Result<String> {
        if !self.roles.is_empty() {
            return Err(Error::Invalid(
                "only role-free interpretations can be written as CSV".into(),
            ));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.concepts.keys().cloned());
        w.write_record(&header)?;
        for (i, id) in self.domain.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.concepts.values().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// The JSON layout of an interpretation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpretationFile {
    pub domain: Vec<String>,
    #[serde(default)]
    pub concepts: IndexMap<String, Vec<f64>>,
    #[serde(default)]
    pub roles: IndexMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub individuals: IndexMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<CombinationFamily>,
    /// `n` of the truth space `C_n`; absent for continuous degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<u32>,
}

impl InterpretationFile {
    pub fn into_interpretation(self) -> Result<Interpretation> {
        let mode = match self.grade {
            Some(n) => Mode::graded(GradedScale::new(n)?),
            None => Mode::default(),
        };
        let mut out = Interpretation::new(self.domain, self.family.unwrap_or_default(), mode)?;
        for (k, v) in self.concepts {
            out.set_concept(k, v)?;
        }
        for (k, m) in self.roles {
            out.set_role(k, m)?;
        }
        for (k, x) in self.individuals {
            out.set_individual(k, x)?;
        }
        Ok(out)
    }
}

/// Positive degrees equal (under `mode`) to the maximum.
pub fn typical_mask(vals: &[f64], mode: Mode) -> Vec<bool> {
    let max = vals.iter().copied().fold(0.0f64, f64::max);
    if !mode.gt(max, 0.0) {
        return vec![false; vals.len()];
    }
    vals.iter()
        .map(|&v| mode.gt(v, 0.0) && mode.cmp(v, max) != Ordering::Less)
        .collect()
}

fn sort_counterexamples(v: &mut [Counterexample]) {
    // Larger violation (smaller pointwise value) first, then element order.
    v.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    if n >= 2048 {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}
