//! Random feedforward networks and the φ-coherent / coherent / faithful
//! chain on the models they induce.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{map_trials, trial_rng, Digest};
use crate::activation::{Activation, Monotonicity};
use crate::bridge::{build_model, extract_kb, BuildOptions};
use crate::error::Result;
use crate::interpretation::Interpretation;
use crate::network::{Edge, Network, Stimuli, Unit};

#[derive(Debug, Clone, Serialize)]
pub struct HierarchyConfig {
    pub seed: u64,
    pub networks: u64,
    /// Layers after the input layer.
    pub max_layers: usize,
    pub max_units: usize,
    pub max_stimuli: usize,
    pub activation: Activation,
    /// φ-coherence residual tolerance.
    pub tolerance: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            seed: 0,
            networks: 100,
            max_layers: 3,
            max_units: 6,
            max_stimuli: 50,
            activation: Activation::logistic(),
            tolerance: 1e-9,
        }
    }
}

/// A layered network: `1..=max_units` inputs `X0, X1, ...`, then
/// `1..=max_layers` layers of `1..=max_units` units `H<l>_<j>`. Each unit
/// reads every unit of the previous layer with probability 0.8 (at least
/// one) and earlier layers with probability 0.15; weights in `[-2, 2]`,
/// biases in `[-1, 1]`.
pub fn random_network(rng: &mut ChaCha8Rng, max_layers: usize, max_units: usize, act: Activation) -> Result<Network> {
    let mut units = Vec::new();
    let mut edges = Vec::new();
    let m = rng.gen_range(1..=max_units);
    let mut layers: Vec<Vec<String>> = vec![(0..m).map(|j| format!("x{j}")).collect()];
    for (j, id) in layers[0].iter().enumerate() {
        units.push(Unit::source(id.clone(), Some(&format!("X{j}"))));
    }
    let depth = rng.gen_range(1..=max_layers);
    for l in 1..=depth {
        let width = rng.gen_range(1..=max_units);
        let mut ids = Vec::with_capacity(width);
        for j in 0..width {
            let id = format!("h{l}_{j}");
            let bias = rng.gen_range(-1.0..=1.0);
            units.push(Unit::hidden(id.clone(), act, bias, Some(&format!("H{l}_{j}"))));
            let prev = &layers[l - 1];
            let mut any = false;
            for src in prev {
                if rng.gen_bool(0.8) {
                    edges.push(Edge::new(src.clone(), id.clone(), rng.gen_range(-2.0..=2.0)));
                    any = true;
                }
            }
            if !any {
                let src = &prev[rng.gen_range(0..prev.len())];
                edges.push(Edge::new(src.clone(), id.clone(), rng.gen_range(-2.0..=2.0)));
            }
            for earlier in &layers[..l - 1] {
                for src in earlier {
                    if rng.gen_bool(0.15) {
                        edges.push(Edge::new(src.clone(), id.clone(), rng.gen_range(-2.0..=2.0)));
                    }
                }
            }
            ids.push(id);
        }
        layers.push(ids);
    }
    Network::new(units, edges, layers[0].clone())
}

/// `count` stimuli with inputs uniform in `[0, 1]`, ids `s0, s1, ...`.
pub fn random_stimuli(rng: &mut ChaCha8Rng, net: &Network, count: usize) -> Stimuli {
    let m = net.inputs().len();
    Stimuli {
        ids: (0..count).map(|i| format!("s{i}")).collect(),
        rows: (0..count).map(|_| (0..m).map(|_| rng.gen()).collect()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyTrial {
    pub index: u64,
    pub units: usize,
    pub edges: usize,
    pub stimuli: usize,
    pub phi_coherent: bool,
    pub coherent: bool,
    pub faithful: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HierarchyReport {
    pub seed: u64,
    pub activation: Activation,
    pub monotonicity: Monotonicity,
    pub trials: Vec<HierarchyTrial>,
    pub phi_coherent: u64,
    pub coherent: u64,
    pub faithful: u64,
    /// Broken implications among those that the activation class licenses.
    pub implication_failures: Vec<String>,
    pub digest: String,
}

impl HierarchyReport {
    pub fn holds(&self) -> bool {
        self.implication_failures.is_empty()
    }

    pub fn to_table(&self) -> String {
        let n = self.trials.len();
        let mut s = format!(
            "suite hierarchy seed {} activation {} networks {n}\n",
            self.seed, self.activation
        );
        s.push_str(&format!("phi-coherent {}/{n}\n", self.phi_coherent));
        s.push_str(&format!("coherent     {}/{n}\n", self.coherent));
        s.push_str(&format!("faithful     {}/{n}\n", self.faithful));
        for f in &self.implication_failures {
            s.push_str(&format!("FAIL {f}\n"));
        }
        s.push_str(&format!("digest {}\n", self.digest));
        s
    }
}

pub(crate) struct Generated {
    pub net: Network,
    pub stimuli: Stimuli,
    pub model: Interpretation,
    pub trial: HierarchyTrial,
}

fn generate(cfg: &HierarchyConfig, index: u64) -> Result<Generated> {
    let mut rng = trial_rng(cfg.seed, index);
    let net = random_network(&mut rng, cfg.max_layers, cfg.max_units, cfg.activation)?;
    let count = rng.gen_range(1..=cfg.max_stimuli);
    let stimuli = random_stimuli(&mut rng, &net, count);
    let ex = extract_kb(&net, false)?;
    let model = build_model(&net, &stimuli, None, &BuildOptions::default())?;
    let phi = ex.kb.check_phi_coherent(&model, &ex.activations, cfg.tolerance)?;
    let coherent = ex.kb.check_coherent(&model)?.holds;
    let faithful = ex.kb.check_faithful(&model)?.holds;
    let trial = HierarchyTrial {
        index,
        units: net.units().len(),
        edges: net.edges().len(),
        stimuli: count,
        phi_coherent: phi.holds,
        coherent,
        faithful,
        max_residual: phi.max_residual,
    };
    Ok(Generated {
        net,
        stimuli,
        model,
        trial,
    })
}

/// Build and check `cfg.networks` random networks. The implications
/// checked are: coherent ⇒ faithful always, φ-coherent ⇒ faithful for
/// non-decreasing activations and φ-coherent ⇒ coherent for increasing
/// ones; with an increasing activation every model must also be
/// φ-coherent.
pub fn hierarchy_trials(cfg: &HierarchyConfig) -> Result<HierarchyReport> {
    let trials = map_trials(0..cfg.networks, |idx| generate(cfg, idx).map(|g| g.trial))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let class = cfg.activation.monotonicity();
    let mut failures = Vec::new();
    let mut digest = Digest::default();
    for t in &trials {
        digest.u64(t.index);
        digest.bytes(&[t.phi_coherent as u8, t.coherent as u8, t.faithful as u8]);
        digest.f64(t.max_residual);
        if !t.phi_coherent {
            failures.push(format!(
                "network {}: model is not phi-coherent (residual {:e})",
                t.index, t.max_residual
            ));
        }
        if t.coherent && !t.faithful {
            failures.push(format!("network {}: coherent but not faithful", t.index));
        }
        if t.phi_coherent && class.implies(Monotonicity::NonDecreasing) && !t.faithful {
            failures.push(format!("network {}: phi-coherent but not faithful", t.index));
        }
        if t.phi_coherent && class == Monotonicity::Increasing && !t.coherent {
            failures.push(format!("network {}: phi-coherent but not coherent", t.index));
        }
    }
    let count = |f: fn(&HierarchyTrial) -> bool| trials.iter().filter(|t| f(t)).count() as u64;
    Ok(HierarchyReport {
        seed: cfg.seed,
        activation: cfg.activation,
        monotonicity: class,
        phi_coherent: count(|t| t.phi_coherent),
        coherent: count(|t| t.coherent),
        faithful: count(|t| t.faithful),
        trials,
        implication_failures: failures,
        digest: digest.hex(),
    })
}

/// A network whose model is φ-coherent and faithful but not coherent.
#[derive(Debug, Clone)]
pub struct CoherenceGap {
    pub index: u64,
    pub network: Network,
    pub stimuli: Stimuli,
    pub model: Interpretation,
}

/// The first network of `cfg` exhibiting a [`CoherenceGap`], if any.
/// Only activations that are not strictly increasing can produce one.
pub fn find_coherence_gap(cfg: &HierarchyConfig) -> Result<Option<CoherenceGap>> {
    for idx in 0..cfg.networks {
        let g = generate(cfg, idx)?;
        if g.trial.phi_coherent && g.trial.faithful && !g.trial.coherent {
            return Ok(Some(CoherenceGap {
                index: idx,
                network: g.net,
                stimuli: g.stimuli,
                model: g.model,
            }));
        }
    }
    Ok(None)
}
