//! Typicality reasoning over many-valued description-logic interpretations
//! built from multilayer perceptrons.
//!
//! A trained feedforward network is read two ways:
//!
//! * as an interpretation over a set of input stimuli, where every unit is a
//!   concept whose membership degree is the unit's activation, so that
//!   typicality properties can be model checked ([`bridge::build_model`],
//!   [`interpretation`]);
//! * as a weighted conditional knowledge base ([`bridge::extract_kb`]) whose
//!   finitely-valued coherent models are enumerated exhaustively to decide
//!   entailment ([`entailment`]).

pub mod activation;
pub mod bridge;
pub mod concept;
pub mod degree;
pub mod entailment;
pub mod error;
pub mod family;
pub mod harness;
pub mod interpretation;
pub mod network;
pub mod report;
pub mod syntax;
pub mod weighted;

pub use activation::{Activation, ActivationSpec, Monotonicity};
pub use concept::{Axiom, AxiomKind, Comparator, ConceptExpr, Threshold};
pub use degree::{Degree, GradedScale, Mode};
pub use error::{Error, Result};
pub use family::{Combination, CombinationFamily, Connective};
pub use interpretation::{AxiomCheck, Counterexample, Interpretation, Preference};
pub use network::{Edge, Network, Stimuli, Unit};
pub use report::{threshold_sweep, SweepReport};
pub use syntax::{parse_axiom, parse_concept, parse_kb, KbDocument, WeightedInclusion};
pub use weighted::{CheckKind, ModelReport, PhiReport, WeightedKb};
