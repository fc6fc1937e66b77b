use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use typnet_core::activation::Activation;
use typnet_core::bridge::{build_model as build, extract_kb, BuildOptions};
use typnet_core::entailment::{entails, EntailOptions, EntailmentQuery};
use typnet_core::harness::{
    hierarchy_trials, hunt, run_ft, run_klm, FailureRecord, GeneratorConfig, HierarchyConfig, HuntOutcome, Property,
    ThresholdChoice,
};
use typnet_core::{
    parse_axiom, parse_kb, threshold_sweep, ActivationSpec, Axiom, GradedScale, Interpretation, Network, Threshold,
    WeightedKb,
};

use crate::{
    BuildModelArgs, CheckArgs, CoherenceArgs, EntailArgs, ExtractArgs, FuzzArgs, Kind, Suite, ThresholdArg, Verdict,
};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn load_network(path: &Path) -> Result<Network> {
    Network::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_model(path: &Path) -> Result<Interpretation> {
    Interpretation::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_kb(path: &Path) -> Result<WeightedKb> {
    WeightedKb::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_activations(path: Option<&Path>, kb: &WeightedKb) -> Result<ActivationSpec> {
    match path {
        Some(p) => ActivationSpec::from_json(&read(p)?).with_context(|| format!("in {}", p.display())),
        None if kb.distinguished().is_empty() => Ok(ActivationSpec::new()),
        None => bail!("the knowledge base has weighted blocks; pass --activations"),
    }
}

pub fn build_model(a: &BuildModelArgs, json: bool) -> Result<Verdict> {
    let net = load_network(&a.network)?;
    let stimuli = {
        let text = read(&a.stimuli)?;
        net.read_stimuli(text.as_bytes())
            .with_context(|| format!("in {}", a.stimuli.display()))?
    };
    let scale = a.grade.map(GradedScale::new).transpose()?;
    let opts = BuildOptions {
        family: a.family,
        concepts: a.concepts.clone(),
        force_names: a.force_names,
    };
    let model = build(&net, &stimuli, scale, &opts)?;
    let text = model.to_json()?;
    write_or_print(a.out.as_deref(), &format!("{text}\n"))?;
    if let Some(out) = &a.out {
        let summary = serde_json::json!({
            "elements": model.len(),
            "concepts": model.concept_names().collect::<Vec<_>>(),
            "grade": a.grade,
        });
        if json {
            print_json(&summary)?;
        } else {
            eprintln!(
                "{} elements, {} concepts written to {}",
                model.len(),
                model.concept_names().count(),
                out.display()
            );
        }
    }
    Ok(Verdict::Pass)
}

/// `k1..k2` or `k` over `C_n`.
fn parse_thresholds(s: &str, n: u32) -> Result<Vec<Threshold>> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<u32>()?, b.trim().parse::<u32>()?),
        None => {
            let k = s.trim().parse::<u32>()?;
            (k, k)
        }
    };
    if lo > hi || hi > n {
        bail!("threshold range {lo}..{hi} is not within 0..{n}");
    }
    Ok((lo..=hi)
        .map(|k| Threshold::fraction(k, n))
        .collect::<typnet_core::Result<_>>()?)
}

pub fn check(a: &CheckArgs, json: bool) -> Result<Verdict> {
    let mut model = load_model(&a.model)?;
    if let Some(f) = a.family {
        model = model.with_family(f);
    }
    if let Some(n) = a.grade {
        model = model.quantized(GradedScale::new(n)?);
    }
    let mut axioms: Vec<Axiom> = a
        .axiom
        .iter()
        .map(|s| parse_axiom(s).with_context(|| format!("in axiom `{s}`")))
        .collect::<Result<_>>()?;
    if let Some(p) = &a.axioms {
        let doc = parse_kb(&read(p)?).with_context(|| format!("in {}", p.display()))?;
        if !doc.weighted_blocks.is_empty() {
            bail!(
                "{} has weighted blocks; check them with `typnet coherence`",
                p.display()
            );
        }
        axioms.extend(doc.strict_axioms);
        axioms.extend(doc.assertions);
    }
    if axioms.is_empty() {
        bail!("no axioms given; use --axiom or --axioms");
    }
    let thresholds = match &a.thresholds {
        Some(s) => {
            let Some(scale) = model.mode().scale() else {
                bail!("--thresholds needs a graded model; pass --grade");
            };
            parse_thresholds(s, scale.n())?
        }
        None => Vec::new(),
    };
    let report = threshold_sweep(&model, &axioms, &thresholds)?;
    let holds = report.holds();
    if json {
        print_json(&serde_json::json!({ "holds": holds, "rows": report.rows }))?;
    } else {
        print!("{}", report.to_table());
        let failing = report.rows.iter().filter(|r| r.cells.iter().any(|c| !c.holds)).count();
        if failing == 0 {
            println!("all {} axioms hold", axioms.len());
        } else {
            println!("{failing} of {} axioms fail", axioms.len());
        }
    }
    Ok(verdict(holds))
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("activations.json")
}

pub fn extract(a: &ExtractArgs, json: bool) -> Result<Verdict> {
    let net = load_network(&a.network)?;
    let ex = extract_kb(&net, a.force_names)?;
    for w in &ex.warnings {
        eprintln!("warning: {w}");
    }
    let kb_text = ex.kb.document().to_kb_string();
    let acts_path = a.activations.clone().or_else(|| a.out.as_deref().map(sidecar));
    let acts_text = serde_json::to_string_pretty(&ex.activations)?;
    if json {
        if let Some(p) = &a.out {
            fs::write(p, &kb_text).with_context(|| format!("cannot write {}", p.display()))?;
        }
        if let Some(p) = &acts_path {
            fs::write(p, format!("{acts_text}\n")).with_context(|| format!("cannot write {}", p.display()))?;
        }
        print_json(&serde_json::json!({
            "kb": kb_text,
            "activations": ex.activations,
            "warnings": ex.warnings,
        }))?;
    } else {
        write_or_print(a.out.as_deref(), &kb_text)?;
        match &acts_path {
            Some(p) => {
                fs::write(p, format!("{acts_text}\n")).with_context(|| format!("cannot write {}", p.display()))?
            }
            None => eprintln!("note: activations not written; pass --out or --activations"),
        }
    }
    Ok(Verdict::Pass)
}

pub fn entail(a: &EntailArgs, json: bool) -> Result<Verdict> {
    let kb = load_kb(&a.kb)?;
    let phi = load_activations(a.activations.as_deref(), &kb)?;
    let axiom = parse_axiom(&a.axiom).with_context(|| format!("in axiom `{}`", a.axiom))?;
    let query = EntailmentQuery {
        axiom,
        scale: GradedScale::new(a.grade)?,
        mode: a.mode,
    };
    let opts = EntailOptions {
        family: a.family,
        budget: a.budget,
        prune: !a.no_prune,
        max_counterexamples: a.max_counterexamples,
        extra_concepts: a.concepts.clone(),
    };
    let r = entails(&kb, &phi, &query, &opts)?;
    if json {
        print_json(&r)?;
    } else {
        println!("query:           {}", r.query);
        println!("entailed:        {}", if r.entailed { "yes" } else { "no" });
        println!("value:           {}", r.value);
        if let Some(m) = r.max_value {
            println!("typical maximum: {m}");
        }
        if r.vacuous {
            println!("note:            the typicality argument is 0 on every coherent valuation");
        }
        if r.inconsistent {
            println!("note:            the knowledge base has no coherent model on this scale");
        }
        println!("counterexamples: {}", r.counterexample_count);
        for v in &r.counterexamples {
            println!("  {v}");
        }
        if let Some(w) = &r.witness {
            println!("witness:         {w}");
        }
        println!("explored:        {}", r.explored);
        println!("pruned:          {}", r.pruned);
        println!("elapsed:         {} ms", r.elapsed_ms);
    }
    Ok(verdict(r.entailed))
}

pub fn coherence(a: &CoherenceArgs, json: bool) -> Result<Verdict> {
    let kb = load_kb(&a.kb)?;
    let mut model = load_model(&a.model)?;
    if let Some(f) = a.family {
        model = model.with_family(f);
    }
    let holds = match a.kind {
        Kind::Faithful | Kind::Coherent => {
            let r = match a.kind {
                Kind::Faithful => kb.check_faithful(&model)?,
                _ => kb.check_coherent(&model)?,
            };
            if json {
                print_json(&r)?;
            } else {
                println!("{:?}: {}", r.kind, if r.holds { "holds" } else { "fails" });
                for ax in &r.failed_axioms {
                    println!("  axiom fails: {} (value {})", ax.axiom, ax.value);
                }
                if !r.violations.is_empty() {
                    println!("  {} preference violations", r.violations.len());
                }
                for v in r.violations.iter().take(a.show) {
                    let w = |x: Option<f64>| x.map_or("-inf".to_string(), |w| w.to_string());
                    println!(
                        "  {}: {}={} {}={}, weights {} {}",
                        v.concept,
                        v.x,
                        v.degree_x,
                        v.y,
                        v.degree_y,
                        w(v.weight_x),
                        w(v.weight_y)
                    );
                }
            }
            r.holds
        }
        Kind::Phi => {
            let phi = load_activations(a.activations.as_deref(), &kb)?;
            let r = kb.check_phi_coherent(&model, &phi, a.tol)?;
            if json {
                print_json(&r)?;
            } else {
                println!("phi-coherent: {}", if r.holds { "holds" } else { "fails" });
                println!("  max residual {:e} (tolerance {:e})", r.max_residual, r.tolerance);
                for ax in &r.failed_axioms {
                    println!("  axiom fails: {} (value {})", ax.axiom, ax.value);
                }
                let mut worst: Vec<_> = r.residuals.iter().filter(|x| x.residual > r.tolerance).collect();
                worst.sort_by(|x, y| y.residual.total_cmp(&x.residual));
                for x in worst.iter().take(a.show) {
                    println!(
                        "  {}({}) = {} but the activation gives {}",
                        x.concept, x.element, x.degree, x.expected
                    );
                }
            }
            r.holds
        }
    };
    Ok(verdict(holds))
}

fn write_fixtures(dir: &Path, suite: &str, records: &[&FailureRecord]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for r in records {
        let stem = format!(
            "{suite}-{}-{}",
            r.manifest.seed.unwrap_or(0),
            r.manifest.trial.unwrap_or(0)
        );
        r.write(dir, &stem)?;
    }
    if !records.is_empty() {
        eprintln!("{} fixtures written to {}", records.len(), dir.display());
    }
    Ok(())
}

fn parse_activation(s: &str) -> Result<Activation> {
    let v: serde_json::Value = if s.trim_start().starts_with('{') {
        serde_json::from_str(s)?
    } else {
        serde_json::json!({ "kind": s })
    };
    serde_json::from_value(v).with_context(|| format!("unknown activation `{s}`"))
}

pub fn fuzz(a: &FuzzArgs, json: bool) -> Result<Verdict> {
    if let Suite::Hierarchy = a.suite {
        let cfg = HierarchyConfig {
            seed: a.seed,
            networks: a.iterations,
            activation: parse_activation(&a.activation)?,
            ..Default::default()
        };
        let r = hierarchy_trials(&cfg)?;
        if json {
            print_json(&r)?;
        } else {
            print!("{}", r.to_table());
        }
        return Ok(verdict(r.holds()));
    }
    let suite = match a.suite {
        Suite::Klm => "klm",
        _ => "ft",
    };
    let cfg = GeneratorConfig {
        seed: a.seed,
        iterations: a.iterations,
        family: a.family,
        grade: (a.grade > 0).then_some(a.grade),
        roles: a.roles,
        max_domain: if a.roles { 6 } else { 8 },
        ..Default::default()
    };
    cfg.validate()?;
    let choice = match a.threshold {
        ThresholdArg::One => ThresholdChoice::One,
        ThresholdArg::Sampled => ThresholdChoice::Sampled,
    };
    if !a.hunt.is_empty() {
        let targets: Vec<Property> = a.hunt.iter().map(|s| s.parse()).collect::<typnet_core::Result<_>>()?;
        let out = hunt(&cfg, &targets, choice)?;
        match &out {
            HuntOutcome::Found(rec) => {
                if let Some(dir) = &a.fixtures {
                    write_fixtures(dir, suite, &[rec])?;
                }
                if json {
                    print_json(&serde_json::json!({ "found": true, "record": rec }))?;
                } else {
                    println!(
                        "{} fails at trial {}",
                        rec.manifest.property.as_deref().unwrap_or("property"),
                        rec.manifest.trial.unwrap_or(0)
                    );
                    for v in &rec.manifest.verdicts {
                        println!("  {}: {} (value {})", v.role, v.axiom, v.value);
                    }
                }
            }
            HuntOutcome::Inconclusive { trials } => {
                if json {
                    print_json(&serde_json::json!({ "found": false, "trials": trials }))?;
                } else {
                    println!("inconclusive: no failure in {trials} trials");
                }
            }
        }
        return Ok(verdict(out.found().is_none()));
    }
    let r = match a.suite {
        Suite::Klm => run_klm(&cfg, choice)?,
        _ => run_ft(&cfg)?,
    };
    if let Some(dir) = &a.fixtures {
        write_fixtures(dir, suite, &r.failures.iter().collect::<Vec<_>>())?;
    }
    if json {
        print_json(&r)?;
    } else {
        print!("{}", r.to_table());
    }
    Ok(verdict(r.holds()))
}
