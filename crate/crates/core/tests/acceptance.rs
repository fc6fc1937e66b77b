//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use typnet_core::activation::Activation;
use typnet_core::bridge::{build_model, extract_kb, full_grid, BuildOptions};
use typnet_core::entailment::{cross_check, enumerate_coherent, EntailOptions, EntailmentQuery, SearchMode};
use typnet_core::family::{grid, validate_family, Combination};
use typnet_core::harness::{
    emotion_network, emotion_stimuli, hierarchy_trials, hunt, random_network, random_stimuli, rm_fixture, run_ft,
    run_klm, trial_rng, GeneratorConfig, HierarchyConfig, Property, ThresholdChoice, EMOTION_FORMULAS,
};
use typnet_core::{
    parse_axiom, parse_concept, threshold_sweep, CombinationFamily, GradedScale, Interpretation, Mode, Network,
    Threshold, WeightedKb,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

// ---- oracles -------------------------------------------------------------

/// Closed forms of the four families, written out independently.
fn oracle_tnorm(f: CombinationFamily, a: f64, b: f64) -> f64 {
    match f {
        CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => a.min(b),
        CombinationFamily::Lukasiewicz => (a + b - 1.0).max(0.0),
        CombinationFamily::Product => a * b,
    }
}

fn oracle_snorm(f: CombinationFamily, a: f64, b: f64) -> f64 {
    match f {
        CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => a.max(b),
        CombinationFamily::Lukasiewicz => (a + b).min(1.0),
        CombinationFamily::Product => a + b - a * b,
    }
}

fn oracle_implies(f: CombinationFamily, a: f64, b: f64) -> f64 {
    match f {
        CombinationFamily::Goedel | CombinationFamily::GoedelInvolutive => {
            if a <= b {
                1.0
            } else {
                b
            }
        }
        CombinationFamily::Lukasiewicz => (1.0 - a + b).min(1.0),
        CombinationFamily::Product => {
            if a == 0.0 {
                1.0
            } else {
                (b / a).min(1.0)
            }
        }
    }
}

fn oracle_negate(f: CombinationFamily, a: f64) -> f64 {
    match f {
        CombinationFamily::Goedel | CombinationFamily::Product => {
            if a == 0.0 {
                1.0
            } else {
                0.0
            }
        }
        _ => 1.0 - a,
    }
}

/// Nearest-value quantization with intervals closed on the right.
fn oracle_quantize_index(v: f64, n: u32) -> u32 {
    let two_n = 2.0 * n as f64;
    if v <= 1.0 / two_n {
        return 0;
    }
    for i in 1..n {
        if (2 * i - 1) as f64 / two_n < v && v <= (2 * i + 1) as f64 / two_n {
            return i;
        }
    }
    n
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Incoming `(source position, weight)` lists and biases read straight
/// from the unit and edge lists.
fn wiring(net: &Network) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let ids: Vec<&str> = net.units().iter().map(|u| u.id.as_str()).collect();
    let mut inc = vec![Vec::new(); ids.len()];
    for edge in net.edges() {
        let from = ids.iter().position(|&i| i == edge.from).unwrap();
        let to = ids.iter().position(|&i| i == edge.to).unwrap();
        inc[to].push((from, edge.weight));
    }
    (inc, net.units().iter().map(|u| u.bias).collect())
}

// ---- criteria ------------------------------------------------------------

fn combination_axioms() -> Outcome {
    let start = Instant::now();
    let g = grid(0.05);
    ensure(g.len() == 21, || format!("grid has {} points", g.len()))?;
    let mut checked = 0;
    for f in CombinationFamily::ALL {
        let tol = if matches!(f, CombinationFamily::Product | CombinationFamily::Lukasiewicz) {
            1e-12
        } else {
            0.0
        };
        let close = |x: f64, y: f64| (x - y).abs() <= tol;
        let le = |x: f64, y: f64| x <= y + tol;
        let report = validate_family(&f, &g);
        ensure(report.is_clean(), || {
            format!("{}: {:?}", f.name(), report.violations.first())
        })?;
        for &a in &g {
            ensure(close(f.negate(a), oracle_negate(f, a)), || {
                format!("{} negation at {a}", f.name())
            })?;
            ensure(close(f.tnorm(a, 1.0), a), || {
                format!("{} t-norm identity at {a}", f.name())
            })?;
            ensure(close(f.snorm(a, 0.0), a), || {
                format!("{} s-norm identity at {a}", f.name())
            })?;
            ensure(close(f.implies(0.0, a), 1.0), || format!("{} 0 > b at {a}", f.name()))?;
            ensure(close(f.implies(a, 1.0), 1.0), || format!("{} a > 1 at {a}", f.name()))?;
            for &b in &g {
                let pair = |what: &str| format!("{} {what} at ({a}, {b})", f.name());
                ensure(close(f.tnorm(a, b), oracle_tnorm(f, a, b)), || pair("t-norm"))?;
                ensure(close(f.snorm(a, b), oracle_snorm(f, a, b)), || pair("s-norm"))?;
                ensure(close(f.implies(a, b), oracle_implies(f, a, b)), || pair("implication"))?;
                ensure(close(f.tnorm(a, b), f.tnorm(b, a)), || pair("t-norm commutativity"))?;
                ensure(close(f.snorm(a, b), f.snorm(b, a)), || pair("s-norm commutativity"))?;
                if a <= b {
                    ensure(le(f.negate(b), f.negate(a)), || pair("negation antitonicity"))?;
                }
                for &c in &g {
                    let triple = |what: &str| format!("{} {what} at ({a}, {b}, {c})", f.name());
                    ensure(close(f.tnorm(f.tnorm(a, b), c), f.tnorm(a, f.tnorm(b, c))), || {
                        triple("t-norm associativity")
                    })?;
                    ensure(close(f.snorm(f.snorm(a, b), c), f.snorm(a, f.snorm(b, c))), || {
                        triple("s-norm associativity")
                    })?;
                    if b <= c {
                        ensure(le(f.tnorm(a, b), f.tnorm(a, c)), || triple("t-norm monotonicity"))?;
                        ensure(le(f.snorm(a, b), f.snorm(a, c)), || triple("s-norm monotonicity"))?;
                        ensure(le(f.implies(a, b), f.implies(a, c)), || {
                            triple("implication monotonicity")
                        })?;
                    }
                    if a <= b {
                        ensure(le(f.implies(b, c), f.implies(a, c)), || {
                            triple("implication antitonicity")
                        })?;
                    }
                    checked += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!(
        "4 families, {checked} triples, Goedel exact, Lukasiewicz and Product within 1e-12, {t:.2?}"
    ))
}

fn tall_parent_example() -> Outcome {
    let mut i = Interpretation::new(
        ["bob", "mary", "tom", "z"].map(String::from).to_vec(),
        CombinationFamily::Goedel,
        Mode::default(),
    )
    .map_err(e)?
    .with_concept("Tall", vec![0.8, 0.5, 0.9, 0.5])
    .map_err(e)?
    .with_individual("bob", 0)
    .map_err(e)?;
    i.set_role_edge("hasParent", 0, 1, 1.0).map_err(e)?;
    i.set_role_edge("hasParent", 0, 2, 1.0).map_err(e)?;

    // By hand: sup_y min(hasParent(x, y), Tall(y)), then inf_x of the implication.
    let tall = [0.8, 0.5, 0.9, 0.5];
    let parent = |x: usize, y: usize| if x == 0 && (y == 1 || y == 2) { 1.0 } else { 0.0 };
    let ex: Vec<f64> = (0..4)
        .map(|x| (0..4).map(|y| f64::min(parent(x, y), tall[y])).fold(0.0, f64::max))
        .collect();
    let incl = (0..4)
        .map(|x| if ex[x] <= tall[x] { 1.0 } else { tall[x] })
        .fold(1.0, f64::min);
    ensure(ex[0] == 0.9 && incl == 0.8, || {
        format!("oracle gives {} and {incl}", ex[0])
    })?;

    let c = parse_concept("some hasParent . Tall").map_err(e)?;
    let bob = i.eval_concept(&c, 0).map_err(e)?.value();
    ensure(bob == 0.9, || format!("(some hasParent.Tall)(bob) = {bob}"))?;
    let r = i
        .check_axiom(&parse_axiom("some hasParent . Tall <: Tall >= 0.7").map_err(e)?)
        .map_err(e)?;
    ensure(r.value == 0.8 && r.holds, || {
        format!("inclusion value {} holds {}", r.value, r.holds)
    })?;
    let strict = i
        .check_axiom(&parse_axiom("some hasParent . Tall <: Tall >= 0.9").map_err(e)?)
        .map_err(e)?;
    ensure(!strict.holds, || "the inclusion should fail at 0.9".into())?;
    Ok("(some hasParent.Tall)(bob) = 0.9, inclusion value 0.8, holds at >= 0.7".into())
}

const BIRDS: &str = "
Yellow and Black <: bot >= 1
Yellow and Red <: bot >= 1
Black and Red <: bot >= 1
Red(reddy) >= 1
(some hasWings . Small)(reddy) >= 1
Fly(reddy) >= 1
(some hasWings . Long)(opus) >= 1
Fly(opus) <= 0
Bird {
  T(Bird) <: Fly @ 20
  T(Bird) <: some hasWings . top @ 50
  T(Bird) <: some hasFeathering . top @ 50
}
Penguin {
  T(Penguin) <: Bird @ 100
  T(Penguin) <: Fly @ -70
  T(Penguin) <: Black @ 50
}
Canary {
  T(Canary) <: Bird @ 100
  T(Canary) <: Yellow @ 30
  T(Canary) <: Red @ 20
}
";

fn birds(penguin_reddy: f64) -> Result<Interpretation, String> {
    let dom = ["reddy", "opus", "w1", "w2", "f1", "f2"];
    let mut i = Interpretation::new(
        dom.map(String::from).to_vec(),
        CombinationFamily::Goedel,
        Mode::default(),
    )
    .map_err(e)?;
    let col = |a: f64, b: f64| vec![a, b, 0.0, 0.0, 0.0, 0.0];
    for (name, v) in [
        ("Bird", col(1.0, 0.8)),
        ("Penguin", col(penguin_reddy, 0.8)),
        ("Canary", col(0.0, 0.0)),
        ("Fly", col(1.0, 0.0)),
        ("Black", col(0.0, 0.8)),
        ("Red", col(1.0, 0.0)),
        ("Yellow", col(0.0, 0.0)),
        ("Small", vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        ("Long", vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
    ] {
        i.set_concept(name, v).map_err(e)?;
    }
    for (role, x, y) in [
        ("hasWings", 0, 2),
        ("hasWings", 1, 3),
        ("hasFeathering", 0, 4),
        ("hasFeathering", 1, 5),
    ] {
        i.set_role_edge(role, x, y, 1.0).map_err(e)?;
    }
    i.set_individual("reddy", 0).map_err(e)?;
    i.set_individual("opus", 1).map_err(e)?;
    Ok(i)
}

fn penguin_weights() -> Outcome {
    let kb = WeightedKb::parse(BIRDS).map_err(e)?;
    let i = birds(0.2)?;
    // By hand from the degrees above.
    let (fly, wings, feathers, bird, black) = ([1.0, 0.0], [1.0, 1.0], [1.0, 1.0], [1.0, 0.8], [0.0, 0.8]);
    let w_bird = |x: usize| 20.0 * fly[x] + 50.0 * wings[x] + 50.0 * feathers[x];
    let w_penguin = |x: usize| 100.0 * bird[x] - 70.0 * fly[x] + 50.0 * black[x];
    let expected = [
        ("Bird", 0, w_bird(0), 120.0),
        ("Bird", 1, w_bird(1), 100.0),
        ("Penguin", 0, w_penguin(0), 30.0),
        ("Penguin", 1, w_penguin(1), 120.0),
    ];
    for (c, x, oracle, stated) in expected {
        let got = kb.element_weight(&i, c, x).map_err(e)?;
        ensure(got == oracle && got == stated, || {
            format!("W_{c}({x}) = {got}, oracle {oracle}, stated {stated}")
        })?;
    }
    let ok = kb.check_faithful(&i).map_err(e)?;
    ensure(ok.holds, || {
        format!("faithfulness fails: {:?} {:?}", ok.failed_axioms, ok.violations)
    })?;
    let bad = kb.check_faithful(&birds(0.9)?).map_err(e)?;
    ensure(!bad.holds && bad.violations.len() == 1, || {
        format!("with Penguin(reddy) = 0.9: {:?}", bad.violations)
    })?;
    let v = &bad.violations[0];
    ensure(v.concept == "Penguin" && v.x == "reddy" && v.y == "opus", || {
        format!("{v:?}")
    })?;
    // The companion ABox also states Black(opus) >= 1, which this
    // interpretation (Black(opus) = 0.8) does not satisfy.
    let full = WeightedKb::parse(&format!("{BIRDS}\nBlack(opus) >= 1")).map_err(e)?;
    let r = full.check_faithful(&i).map_err(e)?;
    ensure(!r.holds && r.failed_axioms.len() == 1, || {
        "Black(opus) >= 1 should be the only failure".into()
    })?;
    Ok("W = 120/100/30/120 exact; faithful at 0.2, one violation at 0.9".into())
}

fn klm_suite() -> Outcome {
    let start = Instant::now();
    let cfg = GeneratorConfig {
        seed: 7,
        iterations: 10_000,
        ..Default::default()
    };
    let r = run_klm(&cfg, ThresholdChoice::One).map_err(e)?;
    let t = start.elapsed();
    ensure(r.holds(), || r.to_table())?;
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    ensure(r.tallies.iter().all(|t| t.pass > 1000), || {
        format!("weakly exercised:\n{}", r.to_table())
    })?;
    let k = run_klm(&cfg, ThresholdChoice::Sampled).map_err(e)?;
    for p in Property::KLM {
        if p != Property::Cm {
            ensure(k.violations(p) == 0, || format!("{p} fails below 1:\n{}", k.to_table()))?;
        }
    }
    let h = hunt(
        &GeneratorConfig {
            iterations: 100_000,
            ..cfg.clone()
        },
        &[Property::Cm],
        ThresholdChoice::Sampled,
    )
    .map_err(e)?;
    let cm = match h.found() {
        Some(rec) => format!(
            "CM fails at trial {} ({})",
            rec.manifest.trial.unwrap_or_default(),
            rec.manifest.verdicts.last().map(|v| v.axiom.as_str()).unwrap_or("")
        ),
        None => return Err("CM hunt inconclusive within 100000 trials".into()),
    };
    Ok(format!(
        "10000 trials, 0 violations in {t:.2?}; k < 1: only CM fails; {cm}"
    ))
}

fn rm_counterexample() -> Outcome {
    let f = rm_fixture().map_err(e)?;
    // By hand: T(A) picks x (0.8); T(A and B) picks z (min(0.5, 0.6) = 0.5).
    let goedel_not = |v: f64| if v == 0.0 { 1.0 } else { 0.0 };
    let impl_ = |a: f64, b: f64| if a <= b { 1.0 } else { b };
    let expected = [
        (CombinationFamily::Goedel, goedel_not(0.3)),
        (CombinationFamily::GoedelInvolutive, 1.0 - 0.3),
    ];
    for (v, (family, not_b)) in f.verdicts.iter().zip(expected) {
        ensure(v.family == family, || "family order".into())?;
        ensure(v.premise.holds && v.premise.value == impl_(0.8, 0.9), || {
            format!("{family:?}: premise")
        })?;
        ensure(
            !v.negated.holds && v.not_b_at_x == not_b && v.negated.value == impl_(0.8, not_b),
            || format!("{family:?}: negated premise, not B at x = {}", v.not_b_at_x),
        )?;
        ensure(v.typ_a_and_b_at_z == 0.5, || {
            format!("{family:?}: T(A and B)(z) = {}", v.typ_a_and_b_at_z)
        })?;
        ensure(
            !v.conclusion.holds && v.conclusion.value == impl_(0.5, 0.4) && v.conclusion.value == 0.4,
            || format!("{family:?}: conclusion value {}", v.conclusion.value),
        )?;
    }
    Ok("premise holds, T(A) <: not B fails (not B(x) = 0 and 0.7), conclusion 0.4 under both negations".into())
}

fn ft_suite() -> Outcome {
    let cfg = GeneratorConfig {
        seed: 11,
        iterations: 10_000,
        ..Default::default()
    };
    let r = run_ft(&cfg).map_err(e)?;
    ensure(r.holds(), || r.to_table())?;
    ensure(r.tallies.iter().all(|t| t.pass > 0), || {
        format!("unexercised property:\n{}", r.to_table())
    })?;
    Ok(format!("10000 trials, 0 violations, digest {}", r.digest))
}

fn hierarchy() -> Outcome {
    let cfg = HierarchyConfig {
        seed: 3,
        networks: 100,
        ..Default::default()
    };
    let r = hierarchy_trials(&cfg).map_err(e)?;
    ensure(r.holds(), || r.to_table())?;
    ensure(r.phi_coherent == 100 && r.coherent == 100 && r.faithful == 100, || {
        r.to_table()
    })?;
    ensure(r.trials.iter().all(|t| t.max_residual <= 1e-9), || {
        "residual above 1e-9".into()
    })?;
    // Independent residual: recompute every unit from the edge list.
    let mut worst = 0.0f64;
    for idx in 0..20 {
        let mut rng = trial_rng(cfg.seed, idx);
        let net = random_network(&mut rng, 3, 6, Activation::logistic()).map_err(e)?;
        let count = rng.gen_range(1..=50);
        let s = random_stimuli(&mut rng, &net, count);
        let m = build_model(&net, &s, None, &BuildOptions::default()).map_err(e)?;
        let (inc, bias) = wiring(&net);
        for (k, unit) in net.units().iter().enumerate() {
            if unit.activation.is_none() {
                continue;
            }
            let name = net.concept_name(k, false).map_err(e)?;
            let col = m.concept(&name).map_err(e)?;
            for (x, &d) in col.iter().enumerate() {
                let mut u = 0.0;
                for &(j, w) in &inc[k] {
                    let src = net.concept_name(j, false).map_err(e)?;
                    u += w * m.concept(&src).map_err(e)?[x];
                }
                worst = worst.max((d - logistic(u + bias[k])).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("independent residual {worst:e}"))?;
    Ok(format!(
        "100/100 phi-coherent, coherent, faithful; independent residual {worst:e}"
    ))
}

fn entailment_networks(count: u64) -> Result<Vec<(Network, u32)>, String> {
    (0..count)
        .map(|idx| {
            let mut rng = trial_rng(101, idx);
            let net = random_network(&mut rng, 2, 3, Activation::logistic()).map_err(e)?;
            Ok((net, 1 + (idx % 5) as u32))
        })
        .collect()
}

fn coherent_round_trip() -> Outcome {
    let scale = GradedScale::new(5).map_err(e)?;
    let mut valuations = 0;
    let mut mismatches = 0;
    for (net, _) in entailment_networks(20)? {
        let ex = extract_kb(&net, false).map_err(e)?;
        let vals = enumerate_coherent(
            &ex.kb,
            &ex.activations,
            scale,
            SearchMode::AcyclicGrid,
            &EntailOptions::default(),
        )
        .map_err(e)?;
        let inputs: Vec<String> = net
            .inputs()
            .iter()
            .map(|&k| net.concept_name(k, false).unwrap())
            .collect();
        let used: Vec<&String> = inputs
            .iter()
            .filter(|n| vals.first().is_some_and(|v| v.get(n).is_some()))
            .collect();
        ensure(vals.len() == 6usize.pow(used.len() as u32), || {
            format!("{} valuations for {} inputs", vals.len(), used.len())
        })?;
        for v in &vals {
            valuations += 1;
            let x: Vec<f64> = inputs.iter().map(|n| v.get(n).unwrap_or(0.0)).collect();
            let y = net.forward_quantized(&x, scale).map_err(e)?;
            for (k, _) in net.units().iter().enumerate() {
                let name = net.concept_name(k, false).map_err(e)?;
                if let Some(d) = v.get(&name) {
                    if d != y[k] {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    ensure(mismatches == 0, || {
        format!("{mismatches} mismatches over {valuations} valuations")
    })?;
    Ok(format!("20 networks, {valuations} valuations, 0 mismatches"))
}

fn quantization_bound() -> Outcome {
    let act = Activation::logistic();
    let mut rng = trial_rng(5, 0);
    let zs: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-12.0..12.0)).collect();
    let mut detail = Vec::new();
    for n in [5u32, 10, 100] {
        let s = GradedScale::new(n).map_err(e)?;
        let worst = zs
            .iter()
            .map(|&z| (act.apply_quantized(z, s) - act.apply(z)).abs())
            .fold(0.0, f64::max);
        ensure(worst <= 1.0 / (2.0 * n as f64), || format!("n = {n}: {worst}"))?;
        let oracle = zs
            .iter()
            .all(|&z| oracle_quantize_index(logistic(z), n) as f64 / n as f64 == act.apply_quantized(z, s));
        ensure(oracle, || format!("n = {n}: quantization differs from the oracle"))?;
        detail.push(format!("n={n}: {worst:.4}"));
    }
    let mut fixtures = 0;
    for idx in 0..20 {
        let mut rng = trial_rng(3, idx);
        let net = random_network(&mut rng, 3, 6, act).map_err(e)?;
        let count = rng.gen_range(1..=50);
        let s = random_stimuli(&mut rng, &net, count);
        let m = build_model(&net, &s, None, &BuildOptions::default()).map_err(e)?;
        let ex = extract_kb(&net, false).map_err(e)?;
        if !ex.kb.check_phi_coherent(&m, &ex.activations, 1e-9).map_err(e)?.holds {
            continue;
        }
        let p = ex
            .kb
            .coherence_residual_profile(&m, &ex.activations, &[5, 500])
            .map_err(e)?;
        ensure(p[1].max_residual < p[0].max_residual, || {
            format!(
                "network {idx}: residual {} at n=500, {} at n=5",
                p[1].max_residual, p[0].max_residual
            )
        })?;
        fixtures += 1;
    }
    Ok(format!(
        "max error {} (bounds 0.1, 0.05, 0.005); profile n=500 < n=5 on {fixtures} fixtures",
        detail.join(", ")
    ))
}

struct Instance {
    net: usize,
    n: u32,
    k: u32,
    entailed: bool,
}

fn name_of(net: &Network, k: usize) -> String {
    net.concept_name(k, false).unwrap()
}

/// All coherent assignments of every unit, as numerators in unit order.
fn naive_coherent(net: &Network, n: u32) -> Vec<Vec<u32>> {
    let units = net.units().len();
    let (inc, bias) = wiring(net);
    let total = (n as usize + 1).pow(units as u32);
    let mut out = Vec::new();
    let mut v = vec![0u32; units];
    for _ in 0..total {
        let ok = net.units().iter().enumerate().all(|(k, u)| match u.activation {
            None => true,
            Some(_) => {
                let mut s = 0.0;
                for &(j, w) in &inc[k] {
                    s += w * (v[j] as f64 / n as f64);
                }
                v[k] == oracle_quantize_index(logistic(s + bias[k]), n)
            }
        });
        if ok {
            out.push(v.clone());
        }
        for d in v.iter_mut().rev() {
            *d += 1;
            if *d <= n {
                break;
            }
            *d = 0;
        }
    }
    out
}

fn query_for(net: &Network, idx: usize) -> (usize, usize) {
    let hidden: Vec<usize> = (0..net.units().len())
        .filter(|&k| net.units()[k].activation.is_some())
        .collect();
    let c = hidden[idx % hidden.len()];
    let others: Vec<usize> = (0..net.units().len()).filter(|&k| k != c).collect();
    (c, others[(idx * 7 + 3) % others.len()])
}

fn entailment_agreement() -> Result<(String, Vec<Instance>), String> {
    let mut instances = Vec::new();
    let mut oracle_checked = 0;
    for (idx, (net, n)) in entailment_networks(20)?.into_iter().enumerate() {
        let scale = GradedScale::new(n).map_err(e)?;
        let (c, d) = query_for(&net, idx);
        let (cn, dn) = (name_of(&net, c), name_of(&net, d));
        let units = net.units().len();
        let naive = ((n as f64 + 1.0).powi(units as i32) <= 1e6).then(|| naive_coherent(&net, n));
        if naive.is_some() {
            oracle_checked += 1;
        }
        for k in 1..=n {
            let axiom = parse_axiom(&format!("T({cn}) <: {dn} >= {k}/{n}")).map_err(e)?;
            let q = EntailmentQuery {
                axiom,
                scale,
                mode: SearchMode::AcyclicGrid,
            };
            let opts = EntailOptions {
                max_counterexamples: usize::MAX,
                ..Default::default()
            };
            let cc = cross_check(&net, None, &q, &opts).map_err(e)?;
            ensure(cc.full_grid, || "cross check did not use the full grid".into())?;
            ensure(cc.verdicts_agree && cc.counterexamples_agree, || {
                format!(
                    "network {idx}, k = {k}: entailed {} vs model {}, {} vs {} counterexamples",
                    cc.entailment.entailed,
                    cc.model_holds,
                    cc.entailment.counterexample_count,
                    cc.model_counterexamples.len()
                )
            })?;
            // Model checking over the full grid, done directly.
            let grid = full_grid(&net, scale).map_err(e)?;
            let m = build_model(&net, &grid, Some(scale), &BuildOptions::default()).map_err(e)?;
            let direct = m.check_axiom(&q.axiom).map_err(e)?;
            ensure(direct.holds == cc.entailment.entailed, || {
                format!("network {idx}, k = {k}: direct model check")
            })?;

            if let Some(all) = &naive {
                let kb_names: BTreeSet<&str> = cc
                    .entailment
                    .counterexamples
                    .first()
                    .map_or_else(BTreeSet::new, |v| v.numerators.keys().map(String::as_str).collect());
                let max = all.iter().map(|v| v[c]).max().unwrap_or(0);
                let mut bad: Vec<Vec<(String, u32)>> = all
                    .iter()
                    .filter(|v| {
                        let t = if max > 0 && v[c] == max { v[c] } else { 0 };
                        let value = if t <= v[d] { n } else { v[d] };
                        value < k
                    })
                    .map(|v| {
                        let mut p: Vec<(String, u32)> = (0..units)
                            .map(|u| (name_of(&net, u), v[u]))
                            .filter(|(nm, _)| kb_names.is_empty() || kb_names.contains(nm.as_str()))
                            .collect();
                        p.sort();
                        p
                    })
                    .collect();
                bad.sort();
                bad.dedup();
                let got: Vec<Vec<(String, u32)>> = cc
                    .entailment
                    .counterexamples
                    .iter()
                    .map(|v| v.numerators.iter().map(|(a, &b)| (a.clone(), b)).collect())
                    .collect();
                ensure(bad.is_empty() == cc.entailment.entailed, || {
                    format!("network {idx}, k = {k}: oracle verdict differs")
                })?;
                ensure(bad == got, || {
                    format!(
                        "network {idx}, k = {k}: oracle has {} counterexamples, search {}",
                        bad.len(),
                        got.len()
                    )
                })?;
            }
            instances.push(Instance {
                net: idx,
                n,
                k,
                entailed: cc.entailment.entailed,
            });
        }
    }
    let entailed = instances.iter().filter(|i| i.entailed).count();
    Ok((
        format!(
            "{} instances over 20 networks ({entailed} entailed), oracle on {oracle_checked} networks",
            instances.len()
        ),
        instances,
    ))
}

fn threshold_monotonicity(instances: &[Instance]) -> Outcome {
    ensure(!instances.is_empty(), || "no instances".into())?;
    for a in instances {
        for b in instances {
            if a.net == b.net && b.k <= a.k && a.entailed {
                ensure(b.entailed, || {
                    format!(
                        "network {}: entailed at {}/{} but not at {}/{}",
                        a.net, a.k, a.n, b.k, b.n
                    )
                })?;
            }
        }
    }
    Ok(format!(
        "{} instances, entailment downward closed in k",
        instances.len()
    ))
}

fn synthetic_model(rows: usize) -> Result<Interpretation, String> {
    let mut rng = trial_rng(12, rows as u64);
    let mut col = |_: ()| {
        (0..rows)
            .map(|_| (rng.gen_range(0..=5) as f64) / 5.0)
            .collect::<Vec<_>>()
    };
    let (e_col, f_col, g_col) = (col(()), col(()), col(()));
    Interpretation::anonymous(
        rows,
        CombinationFamily::GoedelInvolutive,
        Mode::graded(GradedScale::new(5).map_err(e)?),
    )
    .and_then(|i| i.with_concept("E", e_col))
    .and_then(|i| i.with_concept("F", f_col))
    .and_then(|i| i.with_concept("G", g_col))
    .map_err(e)
}

fn scalability() -> Outcome {
    let ax = parse_axiom("T(E) <: F or not G >= 3/5").map_err(e)?;
    let time = |i: &Interpretation| -> Result<Duration, String> {
        let mut best = Duration::MAX;
        for _ in 0..15 {
            let t = Instant::now();
            let r = i.check_axiom(&ax).map_err(e)?;
            std::hint::black_box(r);
            best = best.min(t.elapsed());
        }
        Ok(best)
    };
    let small = synthetic_model(10_000)?;
    let large = synthetic_model(20_000)?;
    let (t1, t2) = (time(&small)?, time(&large)?);
    let ratio = t2.as_secs_f64() / t1.as_secs_f64().max(1e-9);
    ensure(ratio <= 2.5, || format!("ratio {ratio:.2} ({t1:?} vs {t2:?})"))?;
    ensure(t2 < Duration::from_secs(5), || format!("{t2:?} at 20000 rows"))?;
    Ok(format!("{t1:.2?} at 10^4, {t2:.2?} at 2*10^4, ratio {ratio:.2}"))
}

fn emotion_report() -> Outcome {
    let dir = data_dir();
    let net_text = std::fs::read_to_string(dir.join("emotion_net.json")).map_err(e)?;
    let net = Network::from_json(&net_text).map_err(e)?;
    let csv = std::fs::read(dir.join("emotion_stimuli.csv")).map_err(e)?;
    let stimuli = net.read_stimuli(csv.as_slice()).map_err(e)?;
    ensure(net.inputs().len() == 17 && stimuli.rows.len() == 1000, || {
        "bundle shape".into()
    })?;
    ensure(
        net_text.trim_end() == emotion_network(17).map_err(e)?.to_json().map_err(e)?.trim_end(),
        || "bundled network differs from its generator".into(),
    )?;
    ensure(stimuli.rows == emotion_stimuli(17, 1000).rows, || {
        "bundled stimuli differ from their generator".into()
    })?;
    let scale = GradedScale::new(5).map_err(e)?;
    let axioms: Vec<_> = EMOTION_FORMULAS
        .iter()
        .map(|(em, f)| parse_axiom(&format!("T({em}) <: {f} >= 1")))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let ts: Vec<Threshold> = (1..=4)
        .map(|k| Threshold::fraction(k, 5))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let run = || -> Result<String, String> {
        let m = build_model(&net, &stimuli, Some(scale), &BuildOptions::default()).map_err(e)?;
        let r = threshold_sweep(&m, &axioms, &ts).map_err(e)?;
        for row in &r.rows {
            let counts: Vec<usize> = row.cells.iter().map(|c| c.counterexamples).collect();
            ensure(counts.windows(2).all(|w| w[0] <= w[1]), || {
                format!("{}: counts {counts:?} not monotone", row.e)
            })?;
            let t = row.typical.ok_or("missing #T(E)")?;
            ensure(counts.iter().all(|&c| c <= t), || {
                format!("{}: more counterexamples than typical", row.e)
            })?;
        }
        Ok(r.to_table())
    };
    let a = run()?;
    let b = run()?;
    ensure(a == b, || "report is not deterministic".into())?;
    let lines: Vec<&str> = a.lines().collect();
    let header: Vec<&str> = lines[0].split('|').map(str::trim).collect();
    ensure(header == ["E", "F", "k=1", "k=2", "k=3", "k=4", "#T(E)"], || {
        format!("header {header:?}")
    })?;
    ensure(lines.len() == 2 + EMOTION_FORMULAS.len(), || {
        format!("{} lines", lines.len())
    })?;
    for l in &lines[2..] {
        ensure(l.split('|').count() == 7, || format!("row `{l}`"))?;
    }
    println!("{a}");
    Ok(format!("{} rows x 7 columns, deterministic", EMOTION_FORMULAS.len()))
}

fn main() {
    let mut failed = 0;
    let mut instances = Vec::new();
    let mut run = |num: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let t = start.elapsed();
        match r {
            Ok(msg) => println!("[{num:02}] PASS {name}: {msg} ({t:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("[{num:02}] FAIL {name}: {msg} ({t:.2?})");
            }
        }
    };
    run(1, "combination-function axioms", &mut combination_axioms);
    run(2, "tall-parent interpretation", &mut tall_parent_example);
    run(3, "bird and penguin weights", &mut penguin_weights);
    run(4, "KLM postulates", &mut klm_suite);
    run(5, "rational monotonicity counterexample", &mut rm_counterexample);
    run(6, "typicality properties", &mut ft_suite);
    run(7, "coherence hierarchy", &mut hierarchy);
    run(8, "coherent valuations match the network", &mut coherent_round_trip);
    run(9, "quantization bound and residual profile", &mut quantization_bound);
    run(10, "entailment vs model checking", &mut || {
        entailment_agreement().map(|(msg, inst)| {
            instances = inst;
            msg
        })
    });
    let inst = std::mem::take(&mut instances);
    run(11, "threshold monotonicity", &mut || threshold_monotonicity(&inst));
    run(12, "model-checking scalability", &mut scalability);
    run(13, "threshold report workflow", &mut emotion_report);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 13 criteria passed");
}
