//! Seeded generators and executable property suites.
//!
//! Every trial draws from its own ChaCha stream (`seed`, trial index), so a
//! suite gives the same verdicts and digest whatever the thread count.

mod emotion;
mod fixture;
mod hierarchy;
mod postulates;

use std::hash::Hasher;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concept::ConceptExpr;
use crate::degree::{GradedScale, Mode};
use crate::error::{Error, Result};
use crate::family::CombinationFamily;
use crate::interpretation::Interpretation;

pub use emotion::{emotion_network, emotion_stimuli, EMOTIONS, EMOTION_AUS, EMOTION_FORMULAS};
pub use fixture::{replay_fixture, write_fixture, ExpectedVerdict, FailureRecord, ReplayReport, VerdictManifest};
pub use hierarchy::{
    find_coherence_gap, hierarchy_trials, random_network, random_stimuli, CoherenceGap, HierarchyConfig,
    HierarchyReport, HierarchyTrial,
};
pub use postulates::{
    check_ft, check_klm, evaluate, ft_instances, hunt, klm_instances, rm_fixture, run_ft, run_klm, HuntOutcome,
    Instance, Outcome, Property, PropertyCheck, RmFixture, RmVerdicts, SuiteReport, Tally, ThresholdChoice, Trial,
};

/// Base concept names drawn by the generators, in order.
pub const BASE_NAMES: [&str; 4] = ["P", "Q", "R", "S"];
/// The role used by the role suite.
pub const ROLE: &str = "r";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub min_domain: usize,
    pub max_domain: usize,
    /// How many of [`BASE_NAMES`] to use (1 to 4).
    pub names: usize,
    /// `Some(n)` draws degrees on `Cₙ`; `None` draws reals. Families not
    /// closed on `Cₙ` (Łukasiewicz is, Product is not) still draw on the
    /// grid but evaluate with real degrees.
    pub grade: Option<u32>,
    pub family: CombinationFamily,
    pub iterations: u64,
    /// Add a role and role restrictions (depth at most 2).
    pub roles: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            min_domain: 1,
            max_domain: 8,
            names: 4,
            grade: Some(10),
            family: CombinationFamily::Goedel,
            iterations: 10_000,
            roles: false,
        }
    }
}

impl GeneratorConfig {
    /// The smaller suite exercising `exists`/`forall`.
    pub fn role_suite(seed: u64, iterations: u64) -> Self {
        GeneratorConfig {
            seed,
            max_domain: 6,
            iterations,
            roles: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_domain == 0 || self.min_domain > self.max_domain {
            return Err(Error::Invalid(format!(
                "domain size range {}..={} is empty or starts at 0",
                self.min_domain, self.max_domain
            )));
        }
        if !(1..=BASE_NAMES.len()).contains(&self.names) {
            return Err(Error::Invalid(format!(
                "name count {} must be between 1 and {}",
                self.names,
                BASE_NAMES.len()
            )));
        }
        if let Some(n) = self.grade {
            GradedScale::new(n)?;
        }
        Ok(())
    }

    pub fn mode(&self) -> Result<Mode> {
        Ok(match self.grade {
            Some(n) if self.family != CombinationFamily::Product => Mode::graded(GradedScale::new(n)?),
            _ => Mode::default(),
        })
    }

    fn depth(&self) -> u32 {
        if self.roles {
            2
        } else {
            3
        }
    }

    fn names(&self) -> &'static [&'static str] {
        &BASE_NAMES[..self.names]
    }
}

/// The generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_degree(rng: &mut ChaCha8Rng, grade: Option<u32>) -> f64 {
    let r: f64 = rng.gen();
    match grade {
        Some(n) => {
            let i = if r < 0.15 {
                0
            } else if r < 0.3 {
                n
            } else {
                rng.gen_range(0..=n)
            };
            i as f64 / n as f64
        }
        None => {
            if r < 0.15 {
                0.0
            } else if r < 0.3 {
                1.0
            } else {
                rng.gen()
            }
        }
    }
}

/// A random interpretation over `e0, e1, ...` with every base name and,
/// for the role suite, the role [`ROLE`].
pub fn random_interpretation(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Interpretation> {
    let size = rng.gen_range(cfg.min_domain..=cfg.max_domain);
    let mut i = Interpretation::anonymous(size, cfg.family, cfg.mode()?)?;
    for name in cfg.names() {
        let col = (0..size).map(|_| random_degree(rng, cfg.grade)).collect();
        i.set_concept(*name, col)?;
    }
    if cfg.roles {
        let m = (0..size)
            .map(|_| {
                (0..size)
                    .map(|_| {
                        if rng.gen_bool(0.4) {
                            0.0
                        } else {
                            random_degree(rng, cfg.grade)
                        }
                    })
                    .collect()
            })
            .collect();
        i.set_role(ROLE, m)?;
    }
    Ok(i)
}

/// A random typicality-free concept of depth at most `depth`.
pub fn random_concept(rng: &mut ChaCha8Rng, names: &[&str], roles: &[&str], depth: u32) -> ConceptExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        let r: f64 = rng.gen();
        return if r < 0.05 {
            ConceptExpr::Top
        } else if r < 0.1 {
            ConceptExpr::Bot
        } else {
            ConceptExpr::name(names[rng.gen_range(0..names.len())])
        };
    }
    let ops = if roles.is_empty() { 3 } else { 5 };
    let sub = |rng: &mut ChaCha8Rng| random_concept(rng, names, roles, depth - 1);
    match rng.gen_range(0..ops) {
        0 => ConceptExpr::not(sub(rng)),
        1 => ConceptExpr::and(sub(rng), sub(rng)),
        2 => ConceptExpr::or(sub(rng), sub(rng)),
        3 => ConceptExpr::exists(roles[rng.gen_range(0..roles.len())], sub(rng)),
        _ => ConceptExpr::forall(roles[rng.gen_range(0..roles.len())], sub(rng)),
    }
}

/// Map `f` over a range of trial indices, in parallel when enabled. The
/// output is in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_trials<T: Send>(range: Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_trials<T: Send>(range: Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    range.map(f).collect()
}

/// Order-sensitive 64-bit digest of a byte stream, as 16 hex digits.
#[derive(Default)]
pub(crate) struct Digest(fnv::FnvHasher);

impl Digest {
    pub fn bytes(&mut self, b: &[u8]) {
        self.0.write(b);
    }

    pub fn u64(&mut self, v: u64) {
        self.0.write_u64(v);
    }

    pub fn f64(&mut self, v: f64) {
        self.0.write_u64(v.to_bits());
    }

    pub fn hex(&self) -> String {
        format!("{:016x}", self.0.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_are_reproducible() {
        let cfg = GeneratorConfig::default();
        let a = random_interpretation(&cfg, &mut trial_rng(3, 17)).unwrap();
        let b = random_interpretation(&cfg, &mut trial_rng(3, 17)).unwrap();
        let c = random_interpretation(&cfg, &mut trial_rng(3, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_degrees_on_grid() {
        let cfg = GeneratorConfig::default();
        let n = GradedScale::new(10).unwrap();
        for t in 0..50 {
            let i = random_interpretation(&cfg, &mut trial_rng(1, t)).unwrap();
            assert!((1..=8).contains(&i.len()));
            for name in BASE_NAMES {
                assert!(i.concept(name).unwrap().iter().all(|&v| n.contains(v)));
            }
        }
    }

    #[test]
    fn concept_depth_bound() {
        fn depth(c: &ConceptExpr) -> u32 {
            match c {
                ConceptExpr::Not(a) | ConceptExpr::Exists(_, a) | ConceptExpr::Forall(_, a) | ConceptExpr::Typ(a) => {
                    1 + depth(a)
                }
                ConceptExpr::And(a, b) | ConceptExpr::Or(a, b) => 1 + depth(a).max(depth(b)),
                _ => 0,
            }
        }
        let mut rng = trial_rng(9, 0);
        for _ in 0..500 {
            let c = random_concept(&mut rng, &BASE_NAMES, &[], 3);
            assert!(depth(&c) <= 3);
            assert!(!c.has_roles());
            let r = random_concept(&mut rng, &BASE_NAMES, &[ROLE], 2);
            assert!(depth(&r) <= 2);
        }
    }

    #[test]
    fn config_validation() {
        let bad = GeneratorConfig {
            names: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GeneratorConfig {
            min_domain: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        GeneratorConfig::role_suite(1, 10).validate().unwrap();
    }
}
