//! Feedforward networks with pointwise `[0, 1]`-valued activations.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::degree::GradedScale;
use crate::error::{Error, Result};
use crate::interpretation::par_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    #[serde(deserialize_with = "de_id")]
    pub id: String,
    #[serde(default)]
    pub activation: Option<Activation>,
    #[serde(default)]
    pub bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Unit {
    pub fn source(id: impl Into<String>, name: Option<&str>) -> Self {
        Unit {
            id: id.into(),
            activation: None,
            bias: 0.0,
            name: name.map(str::to_string),
        }
    }

    pub fn hidden(id: impl Into<String>, activation: Activation, bias: f64, name: Option<&str>) -> Self {
        Unit {
            id: id.into(),
            activation: Some(activation),
            bias,
            name: name.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(deserialize_with = "de_id")]
    pub from: String,
    #[serde(deserialize_with = "de_id")]
    pub to: String,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, weight: f64) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            weight,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkFile {
    units: Vec<Unit>,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(deserialize_with = "de_ids")]
    inputs: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Int(i64),
    Str(String),
}

impl From<RawId> for String {
    fn from(r: RawId) -> String {
        match r {
            RawId::Int(i) => i.to_string(),
            RawId::Str(s) => s,
        }
    }
}

fn de_id<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    Ok(RawId::deserialize(d)?.into())
}

fn de_ids<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    Ok(Vec::<RawId>::deserialize(d)?.into_iter().map(String::from).collect())
}

#[derive(Debug, Clone)]
pub struct Network {
    units: Vec<Unit>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    /// Incoming `(source, weight)` pairs per unit, in file order.
    incoming: Vec<Vec<(usize, f64)>>,
    inputs: Vec<usize>,
    order: Vec<usize>,
}

/// A batch of input patterns with their element ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimuli {
    pub ids: Vec<String>,
    /// One row per stimulus, ordered like [`Network::inputs`].
    pub rows: Vec<Vec<f64>>,
}

const KEYWORDS: [&str; 8] = ["top", "bot", "not", "and", "or", "some", "all", "T"];

/// Whether `s` can be used as a concept name in the `.kb` language.
pub fn is_concept_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

impl Network {
    pub fn new(units: Vec<Unit>, edges: Vec<Edge>, inputs: Vec<String>) -> Result<Self> {
        let bad = |m: String| Error::InvalidNetwork(m);
        let mut index = HashMap::new();
        for (i, u) in units.iter().enumerate() {
            if index.insert(u.id.clone(), i).is_some() {
                return Err(bad(format!("duplicate unit id {}", u.id)));
            }
            if !u.bias.is_finite() {
                return Err(bad(format!("unit {} has non-finite bias", u.id)));
            }
            if let Some(a) = &u.activation {
                a.spot_check()?;
            }
        }
        let mut names = BTreeSet::new();
        for u in &units {
            if let Some(n) = &u.name {
                if !is_concept_name(n) {
                    return Err(bad(format!("unit {}: `{n}` is not a valid concept name", u.id)));
                }
                if !names.insert(n.as_str()) {
                    return Err(bad(format!("concept name `{n}` is used by two units")));
                }
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidNetwork(format!("edge refers to unknown unit {id}")))
        };
        let mut incoming = vec![Vec::new(); units.len()];
        for e in &edges {
            let (f, t) = (lookup(&e.from)?, lookup(&e.to)?);
            if !e.weight.is_finite() {
                return Err(bad(format!("edge {} -> {} has non-finite weight", e.from, e.to)));
            }
            incoming[t].push((f, e.weight));
        }
        let mut input_idx = Vec::with_capacity(inputs.len());
        for id in &inputs {
            let i = index
                .get(id)
                .copied()
                .ok_or_else(|| bad(format!("input {id} is not a unit")))?;
            if input_idx.contains(&i) {
                return Err(bad(format!("input {id} listed twice")));
            }
            input_idx.push(i);
        }
        for (i, u) in units.iter().enumerate() {
            let is_input = input_idx.contains(&i);
            match (is_input, incoming[i].is_empty(), u.activation.is_some()) {
                (true, true, false) | (false, false, true) => {}
                (true, false, _) => return Err(bad(format!("input unit {} has incoming edges", u.id))),
                (true, true, true) => return Err(bad(format!("input unit {} must not have an activation", u.id))),
                (false, true, _) => {
                    return Err(bad(format!(
                        "unit {} has no incoming edge but is not listed as an input",
                        u.id
                    )))
                }
                (false, false, false) => {
                    return Err(bad(format!("unit {} has incoming edges but no activation", u.id)))
                }
            }
        }
        let order = topological_order(&units, &incoming)?;
        Ok(Network {
            units,
            edges,
            index,
            incoming,
            inputs: input_idx,
            order,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: NetworkFile = serde_json::from_str(text)?;
        Self::new(f.units, f.edges, f.inputs)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = NetworkFile {
            units: self.units.clone(),
            edges: self.edges.clone(),
            inputs: self.inputs.iter().map(|&i| self.units[i].id.clone()).collect(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn unit_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::InvalidNetwork(format!("unknown unit {id}")))
    }

    /// Positions of the input units, in input order.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// Incoming `(source position, weight)` pairs of a unit.
    pub fn incoming(&self, unit: usize) -> &[(usize, f64)] {
        &self.incoming[unit]
    }

    /// Unit positions, sources first, each after all of its predecessors.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Concept name of a unit; `u<id>` for anonymous units when `force` is set.
    pub fn concept_name(&self, unit: usize, force: bool) -> Result<String> {
        let u = &self.units[unit];
        match (&u.name, force) {
            (Some(n), _) => Ok(n.clone()),
            (None, true) => {
                let n = format!("u{}", u.id);
                if is_concept_name(&n) {
                    Ok(n)
                } else {
                    Err(Error::UnnamedUnit(u.id.clone()))
                }
            }
            (None, false) => Err(Error::UnnamedUnit(u.id.clone())),
        }
    }

    /// Names of the input units (concept name if present, otherwise the id).
    pub fn input_labels(&self) -> Vec<String> {
        self.inputs
            .iter()
            .map(|&i| self.units[i].name.clone().unwrap_or_else(|| self.units[i].id.clone()))
            .collect()
    }

    fn check_stimulus(&self, x: &[f64], scale: Option<GradedScale>) -> Result<()> {
        if x.len() != self.inputs.len() {
            return Err(Error::Stimulus(format!(
                "expected {} input values, got {}",
                self.inputs.len(),
                x.len()
            )));
        }
        for &v in x {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Stimulus(format!("input value {v} is outside [0, 1]")));
            }
            if let Some(n) = scale {
                if !n.contains(v) {
                    return Err(Error::Stimulus(format!("input value {v} is not on {n}")));
                }
            }
        }
        Ok(())
    }

    fn run(&self, x: &[f64], scale: Option<GradedScale>) -> Vec<f64> {
        let mut y = vec![0.0; self.units.len()];
        for (k, &i) in self.inputs.iter().enumerate() {
            y[i] = x[k];
        }
        for &k in &self.order {
            let Some(act) = &self.units[k].activation else {
                continue;
            };
            let u = self.local_field(k, &y);
            y[k] = match scale {
                Some(n) => act.apply_quantized(u, n),
                None => act.apply(u),
            };
        }
        y
    }

    /// `u_k`: weighted inputs in edge order, then the bias.
    #[inline]
    pub fn local_field(&self, unit: usize, y: &[f64]) -> f64 {
        let mut u = 0.0;
        for &(j, w) in &self.incoming[unit] {
            u += w * y[j];
        }
        u + self.units[unit].bias
    }

    /// Activation of every unit, indexed by unit position.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_stimulus(x, None)?;
        Ok(self.run(x, None))
    }

    /// Like [`forward`](Self::forward) with every activation replaced by `φₙ`.
    pub fn forward_quantized(&self, x: &[f64], scale: GradedScale) -> Result<Vec<f64>> {
        self.check_stimulus(x, Some(scale))?;
        Ok(self.run(x, Some(scale)))
    }

    /// Activations keyed by unit id.
    pub fn forward_map(&self, x: &[f64]) -> Result<IndexMap<String, f64>> {
        let y = self.forward(x)?;
        Ok(self.units.iter().map(|u| u.id.clone()).zip(y).collect())
    }

    pub fn forward_batch(&self, xs: &[Vec<f64>], scale: Option<GradedScale>) -> Result<Vec<Vec<f64>>> {
        for x in xs {
            self.check_stimulus(x, scale)?;
        }
        Ok(par_map(xs.len(), |i| self.run(&xs[i], scale)))
    }

    /// Read stimuli from CSV. The header names the inputs (by concept name
    /// or unit id) in any order; an optional leading `id` column names the
    /// stimuli, which otherwise become `s0, s1, ...`.
    pub fn read_stimuli<R: Read>(&self, reader: R) -> Result<Stimuli> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let has_id = headers.first().is_some_and(|h| h.eq_ignore_ascii_case("id"));
        let labels = self.input_labels();
        let mut columns = vec![usize::MAX; self.inputs.len()];
        for (c, h) in headers.iter().enumerate().skip(has_id as usize) {
            let pos = labels
                .iter()
                .position(|l| l == h)
                .or_else(|| self.inputs.iter().position(|&i| self.units[i].id == *h))
                .ok_or_else(|| {
                    Error::Stimulus(format!("column `{h}` is not an input (inputs: {})", labels.join(", ")))
                })?;
            if columns[pos] != usize::MAX {
                return Err(Error::Stimulus(format!("input `{h}` appears twice")));
            }
            columns[pos] = c;
        }
        if let Some(k) = columns.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Stimulus(format!("no column for input `{}`", labels[k])));
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            ids.push(if has_id {
                rec.get(0).unwrap_or_default().to_string()
            } else {
                format!("s{r}")
            });
            let row = columns
                .iter()
                .map(|&c| {
                    let cell = rec.get(c).unwrap_or_default();
                    cell.parse::<f64>()
                        .map_err(|_| Error::Stimulus(format!("row {}: `{cell}` is not a number", r + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            self.check_stimulus(&row, None)
                .map_err(|e| Error::Stimulus(format!("row {}: {e}", r + 1)))?;
            rows.push(row);
        }
        Ok(Stimuli { ids, rows })
    }

    pub fn write_stimuli(&self, stimuli: &Stimuli) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.input_labels());
        w.write_record(&header)?;
        for (id, row) in stimuli.ids.iter().zip(&stimuli.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn topological_order(units: &[Unit], incoming: &[Vec<(usize, f64)>]) -> Result<Vec<usize>> {
    let n = units.len();
    let mut indeg: Vec<usize> = incoming.iter().map(Vec::len).collect();
    let mut out_edges = vec![Vec::new(); n];
    for (t, inc) in incoming.iter().enumerate() {
        for &(f, _) in inc {
            out_edges[f].push(t);
        }
    }
    // Smallest id first keeps the order independent of the unit list order.
    let mut ready: BTreeSet<(&str, usize)> = (0..n)
        .filter(|&i| indeg[i] == 0)
        .map(|i| (units[i].id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let i = first.1;
        order.push(i);
        for &t in &out_edges[i] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.insert((units[t].id.as_str(), t));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indeg[i] > 0).expect("a unit left on the cycle");
        return Err(Error::CyclicNetwork(units[stuck].id.clone()));
    }
    Ok(order)
}
