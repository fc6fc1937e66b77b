//! Reading a network as an interpretation over stimuli and as a weighted
//! knowledge base.

use indexmap::IndexMap;

use crate::activation::ActivationSpec;
use crate::concept::ConceptExpr;
use crate::degree::{GradedScale, Mode};
use crate::error::{Error, Result};
use crate::family::CombinationFamily;
use crate::interpretation::Interpretation;
use crate::network::{Network, Stimuli};
use crate::syntax::{KbDocument, WeightedInclusion};
use crate::weighted::WeightedKb;

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub family: CombinationFamily,
    /// Keep only these concept columns.
    pub concepts: Option<Vec<String>>,
    /// Name anonymous units `u<id>` instead of leaving them out.
    pub force_names: bool,
}

/// The interpretation whose domain is the stimuli and whose concept `C_k`
/// holds the activation of unit `k`. With a scale, inputs are snapped to
/// `Cₙ` and every activation is quantized.
pub fn build_model(
    net: &Network,
    stimuli: &Stimuli,
    scale: Option<GradedScale>,
    opts: &BuildOptions,
) -> Result<Interpretation> {
    if stimuli.rows.is_empty() {
        return Err(Error::Stimulus("the stimulus set is empty".into()));
    }
    let rows: Vec<Vec<f64>> = match scale {
        Some(n) => stimuli
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| n.quantize(v)).collect())
            .collect(),
        None => stimuli.rows.clone(),
    };
    let outputs = net.forward_batch(&rows, scale)?;
    let mode = scale.map(Mode::graded).unwrap_or_default();
    let mut model = Interpretation::new(stimuli.ids.clone(), opts.family, mode)?;
    for k in 0..net.units().len() {
        let name = match net.concept_name(k, opts.force_names) {
            Ok(n) => n,
            Err(Error::UnnamedUnit(_)) => continue,
            Err(e) => return Err(e),
        };
        model.set_concept(name, outputs.iter().map(|y| y[k]).collect())?;
    }
    match &opts.concepts {
        Some(keep) => model.restrict_concepts(keep),
        None => Ok(model),
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub kb: WeightedKb,
    pub activations: ActivationSpec,
    pub warnings: Vec<String>,
}

/// `K^N`: for each unit `k` with incoming edges, the block
/// `T(C_k) <: C_j @ w_kj` for every edge, followed by `T(C_k) <: top @ b_k`.
pub fn extract_kb(net: &Network, force_names: bool) -> Result<Extraction> {
    let mut blocks = IndexMap::new();
    let mut activations = ActivationSpec::new();
    for (k, unit) in net.units().iter().enumerate() {
        let Some(act) = unit.activation else {
            continue;
        };
        let name = net.concept_name(k, force_names)?;
        let mut block: Vec<WeightedInclusion> = net
            .incoming(k)
            .iter()
            .map(|&(j, w)| {
                Ok(WeightedInclusion::new(
                    ConceptExpr::name(net.concept_name(j, force_names)?),
                    w,
                ))
            })
            .collect::<Result<_>>()?;
        block.push(WeightedInclusion::new(ConceptExpr::Top, unit.bias));
        blocks.insert(name.clone(), block);
        activations.insert(name, act);
    }
    let mut warnings = Vec::new();
    if blocks.is_empty() {
        warnings.push("no unit has incoming edges; the extracted knowledge base is empty".into());
    }
    let kb = WeightedKb::new(KbDocument {
        weighted_blocks: blocks,
        ..KbDocument::default()
    })?;
    Ok(Extraction {
        kb,
        activations,
        warnings,
    })
}

/// Every stored degree mapped to its nearest value on `Cₙ`.
pub fn quantize_model(i: &Interpretation, scale: GradedScale) -> Interpretation {
    i.quantized(scale)
}

/// All of `Cₙ^inputs`, first input most significant, ids `g0, g1, ...`.
pub fn full_grid(net: &Network, scale: GradedScale) -> Result<Stimuli> {
    let m = net.inputs().len();
    let base = scale.len();
    let total = (base as f64).powi(m as i32);
    if total > 1e8 {
        return Err(Error::BudgetExceeded {
            explored: 0,
            budget: 100_000_000,
            space: total,
        });
    }
    let total = total as usize;
    let mut rows = Vec::with_capacity(total);
    let mut digits = vec![0u32; m];
    for _ in 0..total {
        rows.push(digits.iter().map(|&d| scale.value(d)).collect());
        for d in digits.iter_mut().rev() {
            *d += 1;
            if (*d as usize) < base {
                break;
            }
            *d = 0;
        }
    }
    Ok(Stimuli {
        ids: (0..total).map(|i| format!("g{i}")).collect(),
        rows,
    })
}
