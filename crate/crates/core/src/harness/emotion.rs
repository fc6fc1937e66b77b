//! A seeded synthetic facial-expression network: 17 action-unit inputs,
//! one hidden layer and four emotion outputs.

use rand::Rng;

use super::trial_rng;
use crate::activation::Activation;
use crate::degree::GradedScale;
use crate::error::Result;
use crate::network::{Edge, Network, Stimuli, Unit};

pub const EMOTION_AUS: [&str; 17] = [
    "au1", "au2", "au4", "au5", "au6", "au7", "au9", "au10", "au12", "au14", "au15", "au17", "au20", "au23", "au25",
    "au26", "au45",
];

pub const EMOTIONS: [&str; 4] = ["surprise", "fear", "happiness", "anger"];

/// Emotion and property pairs for a `T(E) <: F` sweep.
pub const EMOTION_FORMULAS: [(&str, &str); 9] = [
    ("surprise", "au1 or au2 or au5"),
    ("surprise", "au1 or au5 or au15 or au20 or au26"),
    ("fear", "au1 or au2 or au4 or au5"),
    ("fear", "au1 or au2 or au4 or au5 or au20 or au26"),
    ("happiness", "au1 or au6 or au12 or au14"),
    ("happiness", "au6 or au12"),
    ("happiness", "au6 and au12"),
    ("happiness", "au12"),
    ("anger", "au4 or au5 or au7 or au23"),
];

fn prototype(emotion: usize) -> &'static [&'static str] {
    match emotion {
        0 => &["au1", "au2", "au5", "au26"],
        1 => &["au1", "au2", "au4", "au5", "au20", "au26"],
        2 => &["au6", "au12", "au25"],
        _ => &["au4", "au5", "au7", "au23"],
    }
}

const EXTRA_HIDDEN: usize = 2;

/// Hidden unit `h<e>` detects the prototype of emotion `e` (weights near
/// 1.6 on its action units, small elsewhere); two further hidden units are
/// random. Output `e` excites from `h<e>` and inhibits from the other
/// detectors. All units are logistic.
pub fn emotion_network(seed: u64) -> Result<Network> {
    let mut rng = trial_rng(seed, 0);
    let mut units: Vec<Unit> = EMOTION_AUS.iter().map(|a| Unit::source(*a, Some(a))).collect();
    let mut edges = Vec::new();
    let hidden = EMOTIONS.len() + EXTRA_HIDDEN;
    for h in 0..hidden {
        let id = format!("h{h}");
        let bias = if h < EMOTIONS.len() {
            -1.5 - rng.gen_range(0.0..0.5)
        } else {
            rng.gen_range(-1.0..1.0)
        };
        units.push(Unit::hidden(id.clone(), Activation::logistic(), bias, Some(&id)));
        for au in EMOTION_AUS {
            let w = if h < EMOTIONS.len() && prototype(h).contains(&au) {
                1.6 + rng.gen_range(-0.3..0.3)
            } else if h < EMOTIONS.len() {
                rng.gen_range(-0.6..0.2)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            edges.push(Edge::new(au, id.clone(), w));
        }
    }
    for (e, name) in EMOTIONS.iter().enumerate() {
        units.push(Unit::hidden(
            *name,
            Activation::logistic(),
            -1.0 + rng.gen_range(-0.3..0.3),
            Some(name),
        ));
        for h in 0..hidden {
            let w = if h == e {
                4.0 + rng.gen_range(-0.5..0.5)
            } else if h < EMOTIONS.len() {
                -1.5 + rng.gen_range(-0.3..0.3)
            } else {
                rng.gen_range(-0.5..0.5)
            };
            edges.push(Edge::new(format!("h{h}"), *name, w));
        }
    }
    Network::new(units, edges, EMOTION_AUS.iter().map(|a| a.to_string()).collect())
}

/// `rows` stimuli on `C5`, ids `s0, s1, ...`. Each row picks an emotion;
/// its action units are mostly active at intensity 2/5 to 1 and the
/// others mostly absent.
pub fn emotion_stimuli(seed: u64, rows: usize) -> Stimuli {
    let mut rng = trial_rng(seed, 1);
    let scale = GradedScale::new(5).expect("n = 5 is valid");
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let e = rng.gen_range(0..EMOTIONS.len());
        let row = EMOTION_AUS
            .iter()
            .map(|au| {
                let i = if prototype(e).contains(au) && rng.gen_bool(0.85) {
                    rng.gen_range(2..=5)
                } else if rng.gen_bool(0.75) {
                    0
                } else {
                    rng.gen_range(1..=2)
                };
                scale.value(i)
            })
            .collect();
        out.push(row);
    }
    Stimuli {
        ids: (0..rows).map(|i| format!("s{i}")).collect(),
        rows: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{build_model, BuildOptions};
    use crate::concept::ConceptExpr;

    #[test]
    fn shape_and_determinism() {
        let net = emotion_network(7).unwrap();
        assert_eq!(net.inputs().len(), 17);
        assert_eq!(net.to_json().unwrap(), emotion_network(7).unwrap().to_json().unwrap());
        assert_ne!(net.to_json().unwrap(), emotion_network(8).unwrap().to_json().unwrap());
        let s = emotion_stimuli(7, 100);
        assert_eq!(s.rows.len(), 100);
        assert_eq!(s.rows, emotion_stimuli(7, 100).rows);
    }

    #[test]
    fn every_emotion_has_typical_instances() {
        let net = emotion_network(7).unwrap();
        let m = build_model(
            &net,
            &emotion_stimuli(7, 400),
            GradedScale::new(5).ok(),
            &BuildOptions::default(),
        )
        .unwrap();
        for e in EMOTIONS {
            assert!(!m.typical_set(&ConceptExpr::name(e)).unwrap().is_empty(), "{e}");
        }
    }
}
