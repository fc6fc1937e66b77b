use std::path::PathBuf;

use serde::Deserialize;
use typnet_core::bridge::{build_model, extract_kb, BuildOptions};
use typnet_core::{Interpretation, Network, WeightedKb};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[derive(Deserialize)]
struct Expected {
    phi_coherent: bool,
    coherent: bool,
    faithful: bool,
}

#[test]
fn coherence_gap_replays() {
    let net = Network::from_json(&fixture("coherence_gap.network.json")).unwrap();
    let stimuli = net
        .read_stimuli(fixture("coherence_gap.stimuli.csv").as_bytes())
        .unwrap();
    let model = Interpretation::from_json(&fixture("coherence_gap.json")).unwrap();
    let expected: Expected = serde_json::from_str(&fixture("coherence_gap.expected.json")).unwrap();

    let rebuilt = build_model(&net, &stimuli, None, &BuildOptions::default()).unwrap();
    assert_eq!(rebuilt, model);

    let ex = extract_kb(&net, false).unwrap();
    let kb = WeightedKb::parse(&fixture("coherence_gap.kb")).unwrap();
    assert_eq!(kb.document(), ex.kb.document());

    let phi = kb.check_phi_coherent(&model, &ex.activations, 1e-9).unwrap();
    let coherent = kb.check_coherent(&model).unwrap();
    let faithful = kb.check_faithful(&model).unwrap();
    assert_eq!(phi.holds, expected.phi_coherent);
    assert_eq!(coherent.holds, expected.coherent);
    assert_eq!(faithful.holds, expected.faithful);
    assert!(!coherent.violations.is_empty());
}

#[test]
fn emotion_bundle_is_complete() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let net = Network::from_json(&std::fs::read_to_string(dir.join("emotion_net.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(dir.join("emotion_stimuli.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 18);
    assert_eq!(header[0], "id");
    let s = net.read_stimuli(csv.as_bytes()).unwrap();
    assert_eq!(s.rows.len(), 1000);
    assert!(s
        .rows
        .iter()
        .flatten()
        .all(|&v| (v * 5.0).fract() == 0.0 && (0.0..=1.0).contains(&v)));
    assert_eq!(net.write_stimuli(&s).unwrap(), csv);
}
