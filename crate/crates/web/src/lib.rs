//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes and returns plain strings (JSON or text)
//! so the page needs no generated TypeScript types. The same functions are
//! available natively with `String` errors.

use serde::Serialize;
use typnet_core::activation::Activation;
use typnet_core::bridge::extract_kb;
use typnet_core::entailment::{entails, EntailOptions, EntailmentQuery, SearchMode};
use typnet_core::harness::{rm_fixture, run_klm, GeneratorConfig, ThresholdChoice};
use typnet_core::{
    parse_axiom, parse_kb, ActivationSpec, CombinationFamily, Edge, GradedScale, Interpretation, Network, Unit,
    WeightedKb,
};
use wasm_bindgen::prelude::*;

/// Largest grid an in-browser entailment query may enumerate.
pub const WEB_BUDGET: u64 = 2_000_000;

/// Iteration cap for the in-browser property suite.
pub const WEB_MAX_ITERATIONS: u64 = 50_000;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct CheckRow {
    axiom: String,
    holds: bool,
    value: f64,
    counterexamples: Vec<String>,
    typical: Option<Vec<String>>,
}

/// Check every line of `axioms` (strict inclusions or assertions) on the
/// interpretation in `model_json`.
pub fn check_axioms_json(model_json: &str, axioms: &str) -> Result<String, String> {
    let model = Interpretation::from_json(model_json).map_err(err)?;
    let doc = parse_kb(axioms).map_err(err)?;
    if !doc.weighted_blocks.is_empty() {
        return Err("weighted blocks cannot be checked here".into());
    }
    let mut rows = Vec::new();
    for ax in doc.strict_axioms.iter().chain(&doc.assertions) {
        let r = model.check_axiom(ax).map_err(err)?;
        let typical = match &ax.kind {
            typnet_core::AxiomKind::Inclusion {
                lhs: typnet_core::ConceptExpr::Typ(inner),
                ..
            } => Some(
                model
                    .typical_set(inner)
                    .map_err(err)?
                    .into_iter()
                    .map(|x| model.domain()[x].clone())
                    .collect(),
            ),
            _ => None,
        };
        rows.push(CheckRow {
            axiom: r.axiom,
            holds: r.holds,
            value: r.value,
            counterexamples: r.counterexamples.into_iter().map(|c| c.element).collect(),
            typical,
        });
    }
    if rows.is_empty() {
        return Err("no axioms given".into());
    }
    serde_json::to_string_pretty(&rows).map_err(err)
}

/// Decide `axiom` from the weighted knowledge base `kb` on `C_grade`.
pub fn entail_json(kb: &str, activations: &str, axiom: &str, grade: u32) -> Result<String, String> {
    let kb = WeightedKb::parse(kb).map_err(err)?;
    let phi = ActivationSpec::from_json(activations).map_err(err)?;
    let query = EntailmentQuery {
        axiom: parse_axiom(axiom).map_err(err)?,
        scale: GradedScale::new(grade).map_err(err)?,
        mode: SearchMode::AcyclicGrid,
    };
    let opts = EntailOptions {
        budget: WEB_BUDGET,
        max_counterexamples: 20,
        ..Default::default()
    };
    let r = entails(&kb, &phi, &query, &opts).map_err(err)?;
    serde_json::to_string_pretty(&r).map_err(err)
}

/// Run the KLM suite and return its table.
pub fn klm_suite_text(seed: u64, iterations: u64, family: &str, sampled: bool) -> Result<String, String> {
    if iterations == 0 || iterations > WEB_MAX_ITERATIONS {
        return Err(format!("iterations must be between 1 and {WEB_MAX_ITERATIONS}"));
    }
    let cfg = GeneratorConfig {
        seed,
        iterations,
        family: family.parse::<CombinationFamily>().map_err(err)?,
        ..Default::default()
    };
    let choice = if sampled {
        ThresholdChoice::Sampled
    } else {
        ThresholdChoice::One
    };
    let r = run_klm(&cfg, choice).map_err(err)?;
    let mut out = r.to_table();
    out.push_str(if r.holds() {
        "no violations\n"
    } else {
        "violations found\n"
    });
    Ok(out)
}

/// A two-element interpretation on which rational monotonicity fails.
pub fn sample_model_json() -> String {
    rm_fixture()
        .and_then(|f| f.interpretation.to_json())
        .expect("the bundled interpretation serializes")
}

fn sample_network() -> Network {
    let units = vec![
        Unit::source("x0", Some("Wings")),
        Unit::source("x1", Some("Beak")),
        Unit::source("x2", Some("Heavy")),
        Unit::hidden("h", Activation::logistic(), -2.5, Some("Bird")),
        Unit::hidden("o", Activation::logistic(), -0.5, Some("Fly")),
    ];
    let edges = vec![
        Edge::new("x0", "h", 3.0),
        Edge::new("x1", "h", 2.0),
        Edge::new("h", "o", 2.5),
        Edge::new("x2", "o", -3.0),
    ];
    Network::new(units, edges, vec!["x0".into(), "x1".into(), "x2".into()]).expect("the sample network is valid")
}

/// The weighted knowledge base and activations of a small sample network,
/// as `{"kb": ..., "activations": ...}`.
pub fn sample_kb_json() -> String {
    let ex = extract_kb(&sample_network(), false).expect("the sample network has names");
    serde_json::json!({
        "kb": ex.kb.document().to_kb_string(),
        "activations": serde_json::to_string_pretty(&ex.activations).expect("activations serialize"),
    })
    .to_string()
}

#[wasm_bindgen]
pub fn check_axioms(model_json: &str, axioms: &str) -> Result<String, JsValue> {
    check_axioms_json(model_json, axioms).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn entail(kb: &str, activations: &str, axiom: &str, grade: u32) -> Result<String, JsValue> {
    entail_json(kb, activations, axiom, grade).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn klm_suite(seed: u32, iterations: u32, family: &str, sampled: bool) -> Result<String, JsValue> {
    klm_suite_text(seed as u64, iterations as u64, family, sampled).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sample_model() -> String {
    sample_model_json()
}

#[wasm_bindgen]
pub fn sample_kb() -> String {
    sample_kb_json()
}
