//! Entailment over canonical φₙ-coherent models of role-free weighted
//! knowledge bases.
//!
//! The canonical model is identified with the set of all φₙ-coherent
//! valuations of the concept names that satisfy the strict TBox. In
//! acyclic-grid mode only the non-distinguished concepts are enumerated and
//! the distinguished ones are computed by propagation; general-search mode
//! enumerates every name and filters by the coherence equations.
//!
//! The enumerated grid is split into fixed blocks searched independently,
//! so results and statistics do not depend on the number of workers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize, Serializer};

use crate::activation::{ActivationSpec, Monotonicity};
use crate::bridge::{build_model, extract_kb, full_grid, BuildOptions};
use crate::concept::{Axiom, AxiomKind, Comparator, ConceptExpr};
use crate::degree::{GradedScale, Mode};
use crate::error::{Error, Result};
use crate::family::{Combination, CombinationFamily};
use crate::interpretation::Interpretation;
use crate::network::{Network, Stimuli};
use crate::weighted::WeightedKb;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    AcyclicGrid,
    GeneralSearch,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acyclic-grid" | "acyclic" | "grid" => Ok(SearchMode::AcyclicGrid),
            "general-search" | "general" => Ok(SearchMode::GeneralSearch),
            _ => Err(Error::Invalid(format!(
                "unknown search mode `{s}` (expected acyclic-grid or general-search)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntailmentQuery {
    pub axiom: Axiom,
    pub scale: GradedScale,
    pub mode: SearchMode,
}

#[derive(Debug, Clone)]
pub struct EntailOptions {
    pub family: CombinationFamily,
    /// Largest grid the search may enumerate.
    pub budget: u64,
    /// Skip subtrees whose interval bound rules them out.
    pub prune: bool,
    /// Cap on the number of counterexample valuations kept (the count is exact).
    pub max_counterexamples: usize,
    /// Concept names to enumerate in addition to those of the KB and query.
    pub extra_concepts: Vec<String>,
}

impl Default for EntailOptions {
    fn default() -> Self {
        EntailOptions {
            family: CombinationFamily::default(),
            budget: DEFAULT_BUDGET,
            prune: true,
            max_counterexamples: 10_000,
            extra_concepts: Vec::new(),
        }
    }
}

/// A graded valuation of concept names, stored as numerators over `n`.
/// Ordered lexicographically by concept name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation {
    pub n: u32,
    pub numerators: BTreeMap<String, u32>,
}

impl Valuation {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.numerators.get(name).map(|&i| i as f64 / self.n as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.numerators
            .iter()
            .map(|(k, &i)| (k.as_str(), i as f64 / self.n as f64))
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.iter())
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .numerators
            .iter()
            .map(|(k, i)| format!("{k}={i}/{}", self.n))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntailmentResult {
    pub query: String,
    pub entailed: bool,
    /// The left-hand side is 0 on every coherent valuation.
    pub vacuous: bool,
    /// No model exists: no coherent valuation, or an ABox or upper-bound
    /// axiom that no valuation realizes.
    pub inconsistent: bool,
    /// Maximum degree of the (first) typicality argument of the query.
    pub max_value: Option<f64>,
    /// Degree of the query axiom in the canonical model.
    pub value: f64,
    /// The lexicographically least violating valuation.
    pub counterexample: Option<Valuation>,
    pub counterexample_count: u64,
    pub counterexamples: Vec<Valuation>,
    /// For `<=`/`<` queries, the least valuation establishing the bound.
    pub witness: Option<Valuation>,
    pub explored: u64,
    pub pruned: u64,
    pub elapsed_ms: u128,
}

/// Wall-clock timer; reads 0 where the platform has no clock.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn elapsed_ms(&self) -> u128 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_millis();
        #[cfg(target_arch = "wasm32")]
        0
    }
}

// ---- compiled expressions ------------------------------------------------

#[derive(Debug, Clone)]
enum Expr {
    Top,
    Bot,
    Var(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Typ(usize, Box<Expr>),
}

#[derive(Debug, Clone)]
enum Cond {
    Incl {
        lhs: Expr,
        rhs: Expr,
        cmp: Comparator,
        thr: f64,
    },
    Point {
        expr: Expr,
        cmp: Comparator,
        thr: f64,
    },
}

struct Rule {
    target: usize,
    terms: Vec<(Expr, f64)>,
    act: crate::activation::Activation,
}

struct Space {
    names: Vec<String>,
    scale: GradedScale,
    family: CombinationFamily,
    mode: Mode,
    search: SearchMode,
    /// Enumerated concept indices, most significant first.
    vars: Vec<usize>,
    rules: Vec<Rule>,
    universal: Vec<Cond>,
    existential: Vec<Vec<Cond>>,
    individual_groups: HashMap<String, usize>,
    bounded: bool,
}

fn compile(index: &HashMap<&str, usize>, c: &ConceptExpr, slots: &mut Option<&mut Vec<Expr>>) -> Result<Expr> {
    Ok(match c {
        ConceptExpr::Top => Expr::Top,
        ConceptExpr::Bot => Expr::Bot,
        ConceptExpr::Name(n) => Expr::Var(*index.get(n.as_str()).ok_or_else(|| Error::UnknownConcept(n.clone()))?),
        ConceptExpr::Not(a) => Expr::Not(Box::new(compile(index, a, slots)?)),
        ConceptExpr::And(a, b) => Expr::And(Box::new(compile(index, a, slots)?), Box::new(compile(index, b, slots)?)),
        ConceptExpr::Or(a, b) => Expr::Or(Box::new(compile(index, a, slots)?), Box::new(compile(index, b, slots)?)),
        ConceptExpr::Exists(..) | ConceptExpr::Forall(..) => return Err(Error::NotRoleFree(c.to_string())),
        ConceptExpr::Typ(inner) => {
            let Some(slots) = slots.as_mut() else {
                return Err(Error::Invalid(format!(
                    "typicality in strict axioms is not supported by entailment: {c}"
                )));
            };
            let arg = compile(index, inner, &mut None)?;
            slots.push(arg.clone());
            Expr::Typ(slots.len() - 1, Box::new(arg))
        }
    })
}

impl Space {
    fn new(
        kb: &WeightedKb,
        phi: &ActivationSpec,
        scale: GradedScale,
        search: SearchMode,
        opts: &EntailOptions,
        query: Option<&Axiom>,
    ) -> Result<Self> {
        let doc = kb.document();
        let mut names: BTreeSet<String> = doc.concept_names();
        if let Some(q) = query {
            names.extend(q.concept_names());
        }
        names.extend(opts.extra_concepts.iter().cloned());
        let names: Vec<String> = names.into_iter().collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

        let distinguished = kb.distinguished();
        let order: Vec<&str> = match search {
            SearchMode::AcyclicGrid => dependency_order(kb)?,
            SearchMode::GeneralSearch => distinguished.clone(),
        };
        let mut rules = Vec::new();
        for name in &order {
            let terms = kb
                .block(name)?
                .iter()
                .map(|w| Ok((compile(&index, &w.rhs, &mut None)?, w.weight)))
                .collect::<Result<Vec<_>>>()?;
            rules.push(Rule {
                target: index[name],
                terms,
                act: phi.get(name)?,
            });
        }
        let vars: Vec<usize> = match search {
            SearchMode::AcyclicGrid => (0..names.len()).filter(|&i| !kb.is_distinguished(&names[i])).collect(),
            SearchMode::GeneralSearch => (0..names.len()).collect(),
        };

        let mut universal = Vec::new();
        let mut existential = Vec::new();
        for ax in &doc.strict_axioms {
            let cond = compile_cond(&index, ax, &mut None)?;
            if ax.comparator.is_lower_bound() && ax.is_inclusion() {
                universal.push(cond);
            } else {
                existential.push(vec![cond]);
            }
        }
        let mut individual_groups = HashMap::new();
        for ax in &doc.assertions {
            let who = match &ax.kind {
                AxiomKind::ConceptAssertion { individual, .. } => individual.clone(),
                AxiomKind::RoleAssertion { role, .. } => return Err(Error::NotRoleFree(role.clone())),
                AxiomKind::Inclusion { .. } => {
                    existential.push(vec![compile_cond(&index, ax, &mut None)?]);
                    continue;
                }
            };
            let cond = compile_cond(&index, ax, &mut None)?;
            let g = *individual_groups.entry(who).or_insert_with(|| {
                existential.push(Vec::new());
                existential.len() - 1
            });
            existential[g].push(cond);
        }
        let bounded = search == SearchMode::AcyclicGrid
            && rules
                .iter()
                .all(|r| r.act.monotonicity().implies(Monotonicity::NonDecreasing));
        Ok(Space {
            names,
            scale,
            family: opts.family,
            mode: Mode::graded(scale),
            search,
            vars,
            rules,
            universal,
            existential,
            individual_groups,
            bounded,
        })
    }

    fn base(&self) -> u32 {
        self.scale.n() + 1
    }

    fn space_size(&self) -> f64 {
        (self.base() as f64).powi(self.vars.len() as i32)
    }

    fn check_budget(&self, budget: u64) -> Result<()> {
        let size = self.space_size();
        if size > budget as f64 {
            return Err(Error::BudgetExceeded {
                explored: 0,
                budget,
                space: size,
            });
        }
        Ok(())
    }

    #[inline]
    fn norm(&self, v: f64) -> f64 {
        self.mode.normalize(v)
    }

    fn eval(&self, e: &Expr, vals: &[f64], maxes: &[f64]) -> f64 {
        let f = &self.family;
        match e {
            Expr::Top => 1.0,
            Expr::Bot => 0.0,
            Expr::Var(i) => vals[*i],
            Expr::Not(a) => self.norm(f.negate(self.eval(a, vals, maxes))),
            Expr::And(a, b) => self.norm(f.tnorm(self.eval(a, vals, maxes), self.eval(b, vals, maxes))),
            Expr::Or(a, b) => self.norm(f.snorm(self.eval(a, vals, maxes), self.eval(b, vals, maxes))),
            Expr::Typ(slot, a) => {
                let v = self.eval(a, vals, maxes);
                let m = maxes[*slot];
                if self.mode.gt(v, 0.0) && self.mode.eq(v, m) {
                    v
                } else {
                    0.0
                }
            }
        }
    }

    fn bounds(&self, e: &Expr, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        let f = &self.family;
        match e {
            Expr::Top => (1.0, 1.0),
            Expr::Bot => (0.0, 0.0),
            Expr::Var(i) => (lo[*i], hi[*i]),
            Expr::Not(a) => {
                let (l, h) = self.bounds(a, lo, hi);
                (f.negate(h), f.negate(l))
            }
            Expr::And(a, b) => {
                let ((al, ah), (bl, bh)) = (self.bounds(a, lo, hi), self.bounds(b, lo, hi));
                (f.tnorm(al, bl), f.tnorm(ah, bh))
            }
            Expr::Or(a, b) => {
                let ((al, ah), (bl, bh)) = (self.bounds(a, lo, hi), self.bounds(b, lo, hi));
                (f.snorm(al, bl), f.snorm(ah, bh))
            }
            Expr::Typ(_, a) => {
                let (_, h) = self.bounds(a, lo, hi);
                (0.0, h)
            }
        }
    }

    /// Interval of every concept given the first `depth` enumerated digits.
    fn node_bounds(&self, digits: &[u32], depth: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; self.names.len()];
        let mut hi = vec![1.0; self.names.len()];
        for (k, &v) in self.vars.iter().enumerate().take(depth) {
            let x = self.scale.value(digits[k]);
            lo[v] = x;
            hi[v] = x;
        }
        for r in &self.rules {
            let (mut sl, mut sh) = (0.0, 0.0);
            for (e, w) in &r.terms {
                let (l, h) = self.bounds(e, &lo, &hi);
                if *w >= 0.0 {
                    sl += w * l;
                    sh += w * h;
                } else {
                    sl += w * h;
                    sh += w * l;
                }
            }
            // Widen by a hair so that reassociated sums stay inside.
            let slack = 1e-9 * (1.0 + sl.abs().max(sh.abs()));
            lo[r.target] = r.act.apply_quantized(sl - slack, self.scale);
            hi[r.target] = r.act.apply_quantized(sh + slack, self.scale);
        }
        (lo, hi)
    }

    fn weighted_sum(&self, r: &Rule, vals: &[f64]) -> f64 {
        let mut s = 0.0;
        for (e, w) in &r.terms {
            s += w * self.eval(e, vals, &[]);
        }
        s
    }

    /// Fill the valuation for the given digits; `false` if it is not
    /// coherent or breaks a universal strict axiom.
    fn complete(&self, digits: &[u32], vals: &mut [f64]) -> bool {
        for (k, &v) in self.vars.iter().enumerate() {
            vals[v] = self.scale.value(digits[k]);
        }
        match self.search {
            SearchMode::AcyclicGrid => {
                for r in &self.rules {
                    vals[r.target] = r.act.apply_quantized(self.weighted_sum(r, vals), self.scale);
                }
            }
            SearchMode::GeneralSearch => {
                for r in &self.rules {
                    let want = self.scale.quantize_index(r.act.apply(self.weighted_sum(r, vals)));
                    if self.scale.index_of(vals[r.target]) != Some(want) {
                        return false;
                    }
                }
            }
        }
        self.universal.iter().all(|c| self.cond_holds(c, vals, &[]))
    }

    fn cond_value(&self, c: &Cond, vals: &[f64], maxes: &[f64]) -> (f64, f64) {
        match c {
            Cond::Incl { lhs, rhs, .. } => {
                let l = self.eval(lhs, vals, maxes);
                let r = self.eval(rhs, vals, maxes);
                (l, self.norm(self.family.implies(l, r)))
            }
            Cond::Point { expr, .. } => {
                let v = self.eval(expr, vals, maxes);
                (v, v)
            }
        }
    }

    fn cond_holds(&self, c: &Cond, vals: &[f64], maxes: &[f64]) -> bool {
        let (cmp, thr) = match c {
            Cond::Incl { cmp, thr, .. } | Cond::Point { cmp, thr, .. } => (*cmp, *thr),
        };
        cmp.holds(self.mode.cmp(self.cond_value(c, vals, maxes).1, thr))
    }

    fn numerators(&self, vals: &[f64]) -> Vec<u32> {
        vals.iter()
            .map(|&v| self.scale.index_of(v).expect("stored degrees lie on the scale"))
            .collect()
    }

    fn valuation(&self, nums: &[u32]) -> Valuation {
        Valuation {
            n: self.scale.n(),
            numerators: self.names.iter().cloned().zip(nums.iter().copied()).collect(),
        }
    }

    fn prefix_len(&self) -> usize {
        let base = self.base() as usize;
        let mut p = 0;
        let mut blocks = 1usize;
        while p < self.vars.len() && blocks < 64 {
            blocks *= base;
            p += 1;
        }
        p
    }

    /// Run `make()` visitors over disjoint blocks of the grid and return
    /// them in block order.
    fn search<V: Visitor + Send>(&self, make: impl Fn() -> V + Sync + Send) -> (Vec<V>, Stats) {
        let p = self.prefix_len();
        let nblocks = (self.base() as usize).pow(p as u32);
        let run = |b: usize| {
            let mut v = make();
            let mut digits = vec![0u32; self.vars.len()];
            let mut rest = b;
            for k in (0..p).rev() {
                digits[k] = (rest % self.base() as usize) as u32;
                rest /= self.base() as usize;
            }
            let mut vals = vec![0.0; self.names.len()];
            let mut stats = Stats::default();
            self.walk(&mut digits, p, &mut vals, &mut v, &mut stats);
            (v, stats)
        };
        let results: Vec<(V, Stats)> = par_blocks(nblocks, run);
        let mut stats = Stats::default();
        let visitors = results
            .into_iter()
            .map(|(v, s)| {
                stats.explored += s.explored;
                stats.pruned += s.pruned;
                v
            })
            .collect();
        (visitors, stats)
    }

    fn walk<V: Visitor>(&self, digits: &mut [u32], depth: usize, vals: &mut [f64], v: &mut V, stats: &mut Stats) {
        let nv = self.vars.len();
        if depth == nv {
            stats.explored += 1;
            if self.complete(digits, vals) {
                v.leaf(self, vals);
            }
            return;
        }
        if self.bounded && v.wants_bounds() {
            let (lo, hi) = self.node_bounds(digits, depth);
            if v.prune(self, &lo, &hi) {
                stats.pruned += (self.base() as u64).pow((nv - depth) as u32);
                return;
            }
        }
        for d in 0..self.base() {
            digits[depth] = d;
            self.walk(digits, depth + 1, vals, v, stats);
        }
        digits[depth] = 0;
    }
}

fn compile_cond(index: &HashMap<&str, usize>, ax: &Axiom, slots: &mut Option<&mut Vec<Expr>>) -> Result<Cond> {
    let (cmp, thr) = (ax.comparator, ax.threshold.value);
    Ok(match &ax.kind {
        AxiomKind::Inclusion { lhs, rhs } => Cond::Incl {
            lhs: compile(index, lhs, slots)?,
            rhs: compile(index, rhs, slots)?,
            cmp,
            thr,
        },
        AxiomKind::ConceptAssertion { concept, .. } => Cond::Point {
            expr: compile(index, concept, slots)?,
            cmp,
            thr,
        },
        AxiomKind::RoleAssertion { role, .. } => return Err(Error::NotRoleFree(role.clone())),
    })
}

/// Distinguished concepts ordered so that each follows those it depends on.
fn dependency_order(kb: &WeightedKb) -> Result<Vec<&str>> {
    let dist = kb.distinguished();
    let deps: HashMap<&str, BTreeSet<String>> = dist
        .iter()
        .map(|&d| {
            let names = kb
                .block(d)
                .expect("block of a distinguished concept")
                .iter()
                .flat_map(|w| w.rhs.concept_names())
                .filter(|n| kb.is_distinguished(n))
                .collect();
            (d, names)
        })
        .collect();
    let mut state: HashMap<&str, u8> = HashMap::new();
    let mut out = Vec::new();
    fn visit<'a>(
        d: &'a str,
        dist: &[&'a str],
        deps: &HashMap<&'a str, BTreeSet<String>>,
        state: &mut HashMap<&'a str, u8>,
        out: &mut Vec<&'a str>,
    ) -> Result<()> {
        match state.get(d) {
            Some(2) => return Ok(()),
            Some(1) => return Err(Error::CyclicKb(d.to_string())),
            _ => {}
        }
        state.insert(d, 1);
        for n in &deps[d] {
            let dep = *dist.iter().find(|x| **x == n.as_str()).expect("distinguished");
            visit(dep, dist, deps, state, out)?;
        }
        state.insert(d, 2);
        out.push(d);
        Ok(())
    }
    for &d in &dist {
        visit(d, &dist, &deps, &mut state, &mut out)?;
    }
    Ok(out)
}

#[derive(Debug, Default, Clone, Copy)]
struct Stats {
    explored: u64,
    pruned: u64,
}

trait Visitor {
    fn leaf(&mut self, space: &Space, vals: &[f64]);
    fn wants_bounds(&self) -> bool {
        false
    }
    fn prune(&self, _space: &Space, _lo: &[f64], _hi: &[f64]) -> bool {
        false
    }
}

#[cfg(feature = "parallel")]
fn par_blocks<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_blocks<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

struct Collect(Vec<Vec<u32>>);

impl Visitor for Collect {
    fn leaf(&mut self, space: &Space, vals: &[f64]) {
        self.0.push(space.numerators(vals));
    }
}

struct MaxVisitor<'a> {
    slots: &'a [Expr],
    best: Vec<f64>,
    any: bool,
    prune: bool,
}

impl Visitor for MaxVisitor<'_> {
    fn leaf(&mut self, space: &Space, vals: &[f64]) {
        self.any = true;
        for (b, e) in self.best.iter_mut().zip(self.slots) {
            let v = space.eval(e, vals, &[]);
            if space.mode.gt(v, *b) {
                *b = v;
            }
        }
    }

    fn wants_bounds(&self) -> bool {
        self.prune && self.any
    }

    fn prune(&self, space: &Space, lo: &[f64], hi: &[f64]) -> bool {
        self.slots
            .iter()
            .zip(&self.best)
            .all(|(e, &b)| space.mode.cmp(space.bounds(e, lo, hi).1, b) == Ordering::Less)
    }
}

struct WitnessVisitor {
    found: Vec<bool>,
}

impl Visitor for WitnessVisitor {
    fn leaf(&mut self, space: &Space, vals: &[f64]) {
        for (g, conds) in space.existential.iter().enumerate() {
            if !self.found[g] && conds.iter().all(|c| space.cond_holds(c, vals, &[])) {
                self.found[g] = true;
            }
        }
    }
}

struct QueryVisitor<'a> {
    cond: &'a Cond,
    maxes: &'a [f64],
    filter: Option<&'a [Cond]>,
    prune_slot: Option<(usize, &'a Expr)>,
    limit: usize,
    value: f64,
    lhs_max: f64,
    count: u64,
    violations: Vec<Vec<u32>>,
    witness: Option<Vec<u32>>,
}

impl Visitor for QueryVisitor<'_> {
    fn leaf(&mut self, space: &Space, vals: &[f64]) {
        if let Some(f) = self.filter {
            if !f.iter().all(|c| space.cond_holds(c, vals, &[])) {
                return;
            }
        }
        let (cmp, thr) = match self.cond {
            Cond::Incl { cmp, thr, .. } | Cond::Point { cmp, thr, .. } => (*cmp, *thr),
        };
        let (l, p) = space.cond_value(self.cond, vals, self.maxes);
        self.value = self.value.min(p);
        self.lhs_max = self.lhs_max.max(l);
        let ok = cmp.holds(space.mode.cmp(p, thr));
        if cmp.is_lower_bound() {
            if !ok {
                self.count += 1;
                self.violations.push(space.numerators(vals));
                if self.violations.len() > self.limit.max(1).saturating_mul(2) {
                    self.violations.sort_unstable();
                    self.violations.truncate(self.limit);
                }
            }
        } else if ok {
            let nums = space.numerators(vals);
            if self.witness.as_ref().is_none_or(|w| nums < *w) {
                self.witness = Some(nums);
            }
        }
    }

    fn wants_bounds(&self) -> bool {
        self.prune_slot.is_some()
    }

    fn prune(&self, space: &Space, lo: &[f64], hi: &[f64]) -> bool {
        let Some((s, e)) = self.prune_slot else {
            return false;
        };
        let m = self.maxes[s];
        !space.mode.gt(m, 0.0) || space.mode.cmp(space.bounds(e, lo, hi).1, m) == Ordering::Less
    }
}

/// All φₙ-coherent valuations satisfying the strict TBox, in grid order.
pub fn enumerate_coherent(
    kb: &WeightedKb,
    phi: &ActivationSpec,
    scale: GradedScale,
    mode: SearchMode,
    opts: &EntailOptions,
) -> Result<Vec<Valuation>> {
    let space = Space::new(kb, phi, scale, mode, opts, None)?;
    space.check_budget(opts.budget)?;
    let (blocks, _) = space.search(|| Collect(Vec::new()));
    Ok(blocks
        .into_iter()
        .flat_map(|c| c.0)
        .map(|nums| space.valuation(&nums))
        .collect())
}

/// Decide whether every canonical φₙ-coherent model of `kb` satisfies the query.
pub fn entails(
    kb: &WeightedKb,
    phi: &ActivationSpec,
    query: &EntailmentQuery,
    opts: &EntailOptions,
) -> Result<EntailmentResult> {
    let start = Stopwatch::start();
    let ax = &query.axiom;
    let space = Space::new(kb, phi, query.scale, query.mode, opts, Some(ax))?;
    space.check_budget(opts.budget)?;

    let index: HashMap<&str, usize> = space.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut slots = Vec::new();
    let cond = compile_cond(&index, ax, &mut Some(&mut slots))?;
    let filter: Option<Vec<Cond>> = match &ax.kind {
        AxiomKind::ConceptAssertion { individual, .. } => space
            .individual_groups
            .get(individual)
            .map(|&g| space.existential[g].clone()),
        _ => None,
    };
    let space = &space;
    let mut stats = Stats::default();

    // Existence requirements: ABox individuals and upper-bound axioms.
    let mut realizable = true;
    if !space.existential.is_empty() {
        let (ws, s) = space.search(|| WitnessVisitor {
            found: vec![false; space.existential.len()],
        });
        stats.explored += s.explored;
        realizable = (0..space.existential.len()).all(|g| ws.iter().any(|w| w.found[g]));
    }

    // Pass 1: maximum of every typicality argument.
    let (maxes, any) = {
        let (vs, s) = space.search(|| MaxVisitor {
            slots: &slots,
            best: vec![0.0; slots.len()],
            any: false,
            prune: opts.prune,
        });
        stats.explored += s.explored;
        stats.pruned += s.pruned;
        let any = vs.iter().any(|v| v.any);
        let maxes: Vec<f64> = (0..slots.len())
            .map(|k| vs.iter().map(|v| v.best[k]).fold(0.0, f64::max))
            .collect();
        (maxes, any)
    };

    let lhs_slot = match (&cond, &ax.kind) {
        (
            Cond::Incl {
                lhs: Expr::Typ(s, e), ..
            },
            _,
        ) => Some((*s, &**e)),
        _ => None,
    };
    let prune_slot = if opts.prune && ax.comparator.is_lower_bound() {
        lhs_slot
    } else {
        None
    };

    // Pass 2: the query itself.
    let (qs, s) = space.search(|| QueryVisitor {
        cond: &cond,
        maxes: &maxes,
        filter: filter.as_deref(),
        prune_slot,
        limit: opts.max_counterexamples,
        value: 1.0,
        lhs_max: 0.0,
        count: 0,
        violations: Vec::new(),
        witness: None,
    });
    stats.explored += s.explored;
    stats.pruned += s.pruned;

    let value = qs.iter().map(|q| q.value).fold(1.0, f64::min);
    let count: u64 = qs.iter().map(|q| q.count).sum();
    let mut violations: Vec<Vec<u32>> = qs.iter().flat_map(|q| q.violations.iter().cloned()).collect();
    violations.sort_unstable();
    violations.truncate(opts.max_counterexamples);
    let witness = qs.iter().filter_map(|q| q.witness.clone()).min();
    let lhs_max = qs.iter().map(|q| q.lhs_max).fold(0.0, f64::max);

    let inconsistent = !any || !realizable;
    let vacuous = inconsistent
        || match (lhs_slot, &cond) {
            (Some((s, _)), _) => !space.mode.gt(maxes[s], 0.0),
            (None, Cond::Incl { .. }) => !space.mode.gt(lhs_max, 0.0),
            (None, Cond::Point { .. }) => false,
        };
    let entailed = inconsistent
        || if ax.comparator.is_lower_bound() {
            count == 0
        } else {
            witness.is_some()
        };
    let counterexamples: Vec<Valuation> = if inconsistent {
        Vec::new()
    } else {
        violations.iter().map(|v| space.valuation(v)).collect()
    };
    Ok(EntailmentResult {
        query: ax.to_string(),
        entailed,
        vacuous,
        inconsistent,
        max_value: lhs_slot
            .map(|(s, _)| s)
            .or((!slots.is_empty()).then_some(0))
            .map(|s| maxes[s]),
        value: if inconsistent { 1.0 } else { value },
        counterexample: counterexamples.first().cloned(),
        counterexample_count: if inconsistent { 0 } else { count },
        counterexamples,
        witness: witness.filter(|_| !inconsistent).map(|w| space.valuation(&w)),
        explored: stats.explored,
        pruned: stats.pruned,
        elapsed_ms: start.elapsed_ms(),
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossCheck {
    pub entailment: EntailmentResult,
    pub model_holds: bool,
    pub model_value: f64,
    pub model_counterexamples: Vec<Valuation>,
    pub verdicts_agree: bool,
    pub counterexamples_agree: bool,
    pub full_grid: bool,
    pub note: Option<String>,
}

/// Compare entailment over `extract_kb(net)` with model checking over
/// `build_model(net, Δ)`, where `Δ` defaults to the full input grid.
pub fn cross_check(
    net: &Network,
    stimuli: Option<&Stimuli>,
    query: &EntailmentQuery,
    opts: &EntailOptions,
) -> Result<CrossCheck> {
    let ex = extract_kb(net, true)?;
    let all = EntailOptions {
        max_counterexamples: usize::MAX,
        ..opts.clone()
    };
    let entailment = entails(&ex.kb, &ex.activations, query, &all)?;
    let grid = full_grid(net, query.scale)?;
    let delta = stimuli.unwrap_or(&grid);
    let full = {
        let mut have: Vec<&Vec<f64>> = delta.rows.iter().collect();
        have.sort_by(|a, b| a.partial_cmp(b).expect("finite inputs"));
        have.dedup();
        have.len() == grid.rows.len()
    };
    let model = build_model(
        net,
        delta,
        Some(query.scale),
        &BuildOptions {
            family: opts.family,
            force_names: true,
            concepts: None,
        },
    )?;
    let check = model.check_axiom(&query.axiom)?;
    let names: Vec<String> = entailment_names(&ex.kb, &query.axiom, opts);
    let mut model_cex: Vec<Valuation> = check
        .counterexamples
        .iter()
        .map(|c| model_valuation(&model, c.index, &names, query.scale))
        .collect::<Result<_>>()?;
    model_cex.sort();
    model_cex.dedup();
    let verdicts_agree = check.holds == entailment.entailed;
    let counterexamples_agree = model_cex == entailment.counterexamples;
    Ok(CrossCheck {
        model_holds: check.holds,
        model_value: check.value,
        model_counterexamples: model_cex,
        verdicts_agree,
        counterexamples_agree,
        full_grid: full,
        note: (!full).then(|| {
            "the stimulus set is a strict subset of the input grid; model checking may miss counterexamples".to_string()
        }),
        entailment,
    })
}

fn entailment_names(kb: &WeightedKb, q: &Axiom, opts: &EntailOptions) -> Vec<String> {
    let mut names = kb.document().concept_names();
    names.extend(q.concept_names());
    names.extend(opts.extra_concepts.iter().cloned());
    names.into_iter().collect()
}

fn model_valuation(i: &Interpretation, x: usize, names: &[String], scale: GradedScale) -> Result<Valuation> {
    let mut numerators = BTreeMap::new();
    for n in names {
        let v = i.concept(n)?[x];
        let k = scale
            .index_of(v)
            .ok_or_else(|| Error::Invalid(format!("degree {v} of {n} is not on {scale}")))?;
        numerators.insert(n.clone(), k);
    }
    Ok(Valuation {
        n: scale.n(),
        numerators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::network::{Edge, Unit};
    use crate::syntax::parse_axiom;

    fn demo() -> Network {
        Network::new(
            vec![
                Unit::source("a", Some("A")),
                Unit::source("b", Some("B")),
                Unit::hidden("c", Activation::logistic(), 0.0, Some("C")),
            ],
            vec![Edge::new("a", "c", 1.0), Edge::new("b", "c", -1.0)],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    fn c5() -> GradedScale {
        GradedScale::new(5).unwrap()
    }

    fn query(s: &str) -> EntailmentQuery {
        EntailmentQuery {
            axiom: parse_axiom(s).unwrap(),
            scale: c5(),
            mode: SearchMode::AcyclicGrid,
        }
    }

    #[test]
    fn demo_valuations() {
        let net = demo();
        let ex = extract_kb(&net, false).unwrap();
        let vs = enumerate_coherent(
            &ex.kb,
            &ex.activations,
            c5(),
            SearchMode::AcyclicGrid,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(vs.len(), 36);
        for v in &vs {
            let y = net
                .forward_quantized(&[v.get("A").unwrap(), v.get("B").unwrap()], c5())
                .unwrap();
            assert_eq!(v.get("C").unwrap(), y[2]);
        }
        let general = enumerate_coherent(
            &ex.kb,
            &ex.activations,
            c5(),
            SearchMode::GeneralSearch,
            &Default::default(),
        )
        .unwrap();
        let (mut a, mut b) = (vs, general);
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn demo_queries() {
        let ex = extract_kb(&demo(), false).unwrap();
        let r = entails(&ex.kb, &ex.activations, &query("T(C) <: A >= 1"), &Default::default()).unwrap();
        assert!(r.entailed);
        assert!(!r.vacuous);
        let r = entails(&ex.kb, &ex.activations, &query("T(C) <: B >= 1/5"), &Default::default()).unwrap();
        assert!(!r.entailed);
        let cex = r.counterexample.unwrap();
        assert_eq!((cex.get("A"), cex.get("B")), (Some(1.0), Some(0.0)));
        let r = entails(&ex.kb, &ex.activations, &query("T(C) <: C >= 1"), &Default::default()).unwrap();
        assert!(r.entailed);
    }

    #[test]
    fn strict_axiom_forces_zero() {
        let kb = WeightedKb::parse("A <: bot >= 1\nC { T(C) <: A @ 1  T(C) <: B @ 1 }").unwrap();
        let phi = ActivationSpec::uniform(["C"], Activation::logistic());
        let vs = enumerate_coherent(&kb, &phi, c5(), SearchMode::AcyclicGrid, &Default::default()).unwrap();
        assert_eq!(vs.len(), 6);
        assert!(vs.iter().all(|v| v.get("A") == Some(0.0)));
    }

    #[test]
    fn empty_kb_crisp() {
        let kb = WeightedKb::parse("").unwrap();
        let opts = EntailOptions {
            extra_concepts: vec!["A".into()],
            ..Default::default()
        };
        let vs = enumerate_coherent(
            &kb,
            &ActivationSpec::new(),
            GradedScale::new(1).unwrap(),
            SearchMode::AcyclicGrid,
            &opts,
        )
        .unwrap();
        assert_eq!(
            vs.iter().map(|v| v.get("A").unwrap()).collect::<Vec<_>>(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn vacuous_and_inconsistent_flags() {
        let kb = WeightedKb::parse("A <: bot >= 1\nC { T(C) <: A @ 1 }").unwrap();
        let phi = ActivationSpec::uniform(["C"], Activation::BinaryStep { t: 0.0 });
        let r = entails(&kb, &phi, &query("T(C) <: bot >= 1"), &Default::default()).unwrap();
        assert!(r.entailed && r.vacuous && !r.inconsistent);
        let kb = WeightedKb::parse("A(a) >= 1\nA <: bot >= 1\nC { T(C) <: A @ 1 }").unwrap();
        let r = entails(&kb, &phi, &query("T(C) <: bot >= 1"), &Default::default()).unwrap();
        assert!(r.inconsistent && r.entailed);
    }

    #[test]
    fn rejects_roles_and_cycles() {
        let kb = WeightedKb::parse("C { T(C) <: some r . A @ 1 }").unwrap();
        let phi = ActivationSpec::uniform(["C"], Activation::logistic());
        assert!(matches!(
            enumerate_coherent(&kb, &phi, c5(), SearchMode::AcyclicGrid, &Default::default()),
            Err(Error::NotRoleFree(_))
        ));
        let kb = WeightedKb::parse("C { T(C) <: D @ 1 }\nD { T(D) <: C @ 1 }").unwrap();
        let phi = ActivationSpec::uniform(["C", "D"], Activation::logistic());
        assert!(matches!(
            enumerate_coherent(&kb, &phi, c5(), SearchMode::AcyclicGrid, &Default::default()),
            Err(Error::CyclicKb(_))
        ));
        // The general search handles the cycle.
        let vs = enumerate_coherent(&kb, &phi, c5(), SearchMode::GeneralSearch, &Default::default()).unwrap();
        assert!(!vs.is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let ex = extract_kb(&demo(), false).unwrap();
        let opts = EntailOptions {
            budget: 10,
            ..Default::default()
        };
        assert!(matches!(
            entails(&ex.kb, &ex.activations, &query("T(C) <: A >= 1"), &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn pruning_preserves_results() {
        let ex = extract_kb(&demo(), false).unwrap();
        for q in [
            "T(C) <: A >= 1",
            "T(C) <: B >= 1/5",
            "T(C) <: not B >= 4/5",
            "A <: C >= 1/5",
        ] {
            let a = entails(&ex.kb, &ex.activations, &query(q), &Default::default()).unwrap();
            let b = entails(
                &ex.kb,
                &ex.activations,
                &query(q),
                &EntailOptions {
                    prune: false,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(a.entailed, b.entailed, "{q}");
            assert_eq!(a.counterexamples, b.counterexamples, "{q}");
            assert_eq!(a.value, b.value, "{q}");
            assert_eq!(a.max_value, b.max_value, "{q}");
        }
    }

    #[test]
    fn agrees_with_model_checking() {
        let net = demo();
        for k in 1..=5 {
            let q = query(&format!("T(C) <: not B >= {k}/5"));
            let r = cross_check(&net, None, &q, &Default::default()).unwrap();
            assert!(r.full_grid);
            assert!(r.verdicts_agree && r.counterexamples_agree, "k={k}: {r:?}");
        }
        let part = Stimuli {
            ids: vec!["x".into()],
            rows: vec![vec![0.0, 0.0]],
        };
        let r = cross_check(&net, Some(&part), &query("T(C) <: A >= 1"), &Default::default()).unwrap();
        assert!(!r.full_grid && r.note.is_some());
    }
}
