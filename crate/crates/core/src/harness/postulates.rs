//! Preferential postulates, typicality properties and the rational
//! monotonicity counterexample, checked on single interpretations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fixture::FailureRecord;
use super::{map_trials, random_concept, random_interpretation, trial_rng, Digest, GeneratorConfig, ROLE};
use crate::concept::{Axiom, Comparator, ConceptExpr, Threshold};
use crate::degree::{GradedScale, Mode};
use crate::error::{Error, Result};
use crate::family::CombinationFamily;
use crate::interpretation::{AxiomCheck, Interpretation};

/// Fresh name whose extension copies that of `A`.
pub const LLE_NAME: &str = "Eq";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "REFL")]
    Refl,
    #[serde(rename = "LLE")]
    Lle,
    #[serde(rename = "RW")]
    Rw,
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
    #[serde(rename = "CM")]
    Cm,
    #[serde(rename = "fT-1")]
    Ft1,
    #[serde(rename = "fT-2")]
    Ft2,
    #[serde(rename = "fT-3")]
    Ft3,
    #[serde(rename = "fT-4")]
    Ft4,
    #[serde(rename = "fT-5")]
    Ft5,
}

impl Property {
    pub const KLM: [Property; 6] = [
        Property::Refl,
        Property::Lle,
        Property::Rw,
        Property::And,
        Property::Or,
        Property::Cm,
    ];
    pub const FT: [Property; 5] = [
        Property::Ft1,
        Property::Ft2,
        Property::Ft3,
        Property::Ft4,
        Property::Ft5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Refl => "REFL",
            Property::Lle => "LLE",
            Property::Rw => "RW",
            Property::And => "AND",
            Property::Or => "OR",
            Property::Cm => "CM",
            Property::Ft1 => "fT-1",
            Property::Ft2 => "fT-2",
            Property::Ft3 => "fT-3",
            Property::Ft4 => "fT-4",
            Property::Ft5 => "fT-5",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::KLM
            .into_iter()
            .chain(Property::FT)
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown property `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// Premises and conclusions hold.
    Pass,
    /// Premises hold, some conclusion does not.
    Fail,
    /// Some premise does not hold.
    Vacuous,
}

impl Outcome {
    fn byte(self) -> u8 {
        match self {
            Outcome::Pass => b'p',
            Outcome::Fail => b'f',
            Outcome::Vacuous => b'v',
        }
    }
}

/// The concepts of one trial. `D` and `C` are biased towards supersets of
/// `A` (and of `A ⊔ B`) so that premises of the form `T(A) ⊑ C` are not
/// almost always false.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: u64,
    pub a: ConceptExpr,
    pub b: ConceptExpr,
    pub c: ConceptExpr,
    pub d: ConceptExpr,
    pub e: ConceptExpr,
    pub threshold: Threshold,
}

impl Trial {
    pub fn new(a: ConceptExpr, b: ConceptExpr, c: ConceptExpr, d: ConceptExpr, e: ConceptExpr, k: f64) -> Result<Self> {
        Ok(Trial {
            index: 0,
            a,
            b,
            c,
            d,
            e,
            threshold: Threshold::new(k)?,
        })
    }

    pub fn concepts(&self) -> [(&'static str, &ConceptExpr); 5] {
        [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
            ("E", &self.e),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThresholdChoice {
    /// Entailment with threshold 1.
    #[default]
    One,
    Fixed(Threshold),
    /// A fresh `k/n` with `0 < k < n` per trial; `n` is the generator grade
    /// or 10 for real degrees.
    Sampled,
}

impl fmt::Display for ThresholdChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdChoice::One => f.write_str("1"),
            ThresholdChoice::Fixed(t) => write!(f, "{t}"),
            ThresholdChoice::Sampled => f.write_str("sampled k/n < 1"),
        }
    }
}

fn random_trial(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng, index: u64, choice: ThresholdChoice) -> Result<Trial> {
    let names = cfg.names();
    let roles: &[&str] = if cfg.roles { &[ROLE] } else { &[] };
    let depth = cfg.depth();
    let gen = |rng: &mut ChaCha8Rng| random_concept(rng, names, roles, depth);
    let a = gen(rng);
    let b = gen(rng);
    let e = gen(rng);
    let c = match rng.gen_range(0..3) {
        0 => gen(rng),
        1 => ConceptExpr::or(a.clone(), gen(rng)),
        _ => ConceptExpr::or(ConceptExpr::or(a.clone(), b.clone()), gen(rng)),
    };
    let d = if rng.gen_bool(0.5) {
        gen(rng)
    } else {
        ConceptExpr::or(a.clone(), gen(rng))
    };
    let threshold = match choice {
        ThresholdChoice::One => Threshold::new(1.0)?,
        ThresholdChoice::Fixed(t) => t,
        ThresholdChoice::Sampled => {
            let n = cfg.grade.unwrap_or(10).max(2);
            Threshold::fraction(rng.gen_range(1..n), n)?
        }
    };
    Ok(Trial {
        index,
        a,
        b,
        c,
        d,
        e,
        threshold,
    })
}

/// The interpretation and concepts of trial `index` of `cfg`.
pub(crate) fn sample(cfg: &GeneratorConfig, index: u64, choice: ThresholdChoice) -> Result<(Interpretation, Trial)> {
    let mut rng = trial_rng(cfg.seed, index);
    let i = random_interpretation(cfg, &mut rng)?;
    let t = random_trial(cfg, &mut rng, index, choice)?;
    Ok((i, t))
}

/// A property instance: if every premise holds, every conclusion must.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub property: Property,
    pub premises: Vec<Axiom>,
    pub conclusions: Vec<Axiom>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub property: Property,
    pub outcome: Outcome,
    pub premises: Vec<AxiomCheck>,
    pub conclusions: Vec<AxiomCheck>,
    /// Extra pointwise conditions that failed (fᴛ-2, fᴛ-3).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn typ(c: &ConceptExpr) -> ConceptExpr {
    ConceptExpr::typ(c.clone()).expect("generated concepts are typicality-free")
}

fn ge(lhs: ConceptExpr, rhs: ConceptExpr, k: Threshold) -> Result<Axiom> {
    Ok(Axiom::inclusion(lhs, rhs, Comparator::Ge, 1.0)?.with_threshold(k))
}

/// Instances of the six postulates at the trial threshold. `LLE` uses
/// two equivalents of `A`: the fresh name [`LLE_NAME`] (see
/// [`klm_interpretation`]) and, for Gödel connectives, `A ⊓ (A ⊔ E)`.
/// `RW` weakens `C` to `C ⊔ E`.
pub fn klm_instances(t: &Trial, family: CombinationFamily) -> Result<Vec<Instance>> {
    let k = t.threshold;
    let (a, b, c, d, e) = (&t.a, &t.b, &t.c, &t.d, &t.e);
    let ta = typ(a);
    let mut lle = vec![ge(
        ConceptExpr::Typ(Box::new(ConceptExpr::name(LLE_NAME))),
        c.clone(),
        k,
    )?];
    if family.is_goedel() {
        let absorbed = ConceptExpr::and(a.clone(), ConceptExpr::or(a.clone(), e.clone()));
        lle.push(ge(typ(&absorbed), c.clone(), k)?);
    }
    Ok(vec![
        Instance {
            property: Property::Refl,
            premises: vec![],
            conclusions: vec![ge(ta.clone(), a.clone(), k)?],
        },
        Instance {
            property: Property::Lle,
            premises: vec![ge(ta.clone(), c.clone(), k)?],
            conclusions: lle,
        },
        Instance {
            property: Property::Rw,
            premises: vec![ge(ta.clone(), c.clone(), k)?],
            conclusions: vec![ge(ta.clone(), ConceptExpr::or(c.clone(), e.clone()), k)?],
        },
        Instance {
            property: Property::And,
            premises: vec![ge(ta.clone(), c.clone(), k)?, ge(ta.clone(), d.clone(), k)?],
            conclusions: vec![ge(ta.clone(), ConceptExpr::and(c.clone(), d.clone()), k)?],
        },
        Instance {
            property: Property::Or,
            premises: vec![ge(ta.clone(), c.clone(), k)?, ge(typ(b), c.clone(), k)?],
            conclusions: vec![ge(typ(&ConceptExpr::or(a.clone(), b.clone())), c.clone(), k)?],
        },
        Instance {
            property: Property::Cm,
            premises: vec![ge(ta.clone(), d.clone(), k)?, ge(ta, c.clone(), k)?],
            conclusions: vec![ge(typ(&ConceptExpr::and(a.clone(), d.clone())), c.clone(), k)?],
        },
    ])
}

/// Instances of fᴛ-1 to fᴛ-5, always at threshold 1.
pub fn ft_instances(t: &Trial) -> Result<Vec<Instance>> {
    let one = Threshold::new(1.0)?;
    let (a, b, d) = (&t.a, &t.b, &t.d);
    let ta = typ(a);
    let tad = typ(&ConceptExpr::and(a.clone(), d.clone()));
    let tab = typ(&ConceptExpr::or(a.clone(), b.clone()));
    Ok(vec![
        Instance {
            property: Property::Ft1,
            premises: vec![],
            conclusions: vec![ge(ta.clone(), a.clone(), one)?],
        },
        Instance {
            property: Property::Ft2,
            premises: vec![ge(ta.clone(), ConceptExpr::Bot, one)?],
            conclusions: vec![ge(a.clone(), ConceptExpr::Bot, one)?],
        },
        Instance {
            property: Property::Ft3,
            premises: vec![ge(ta.clone(), d.clone(), one)?],
            conclusions: vec![ge(ta.clone(), tad.clone(), one)?, ge(tad, ta.clone(), one)?],
        },
        Instance {
            property: Property::Ft4,
            premises: vec![],
            conclusions: vec![ge(tab.clone(), ConceptExpr::or(ta.clone(), typ(b)), one)?],
        },
        Instance {
            property: Property::Ft5,
            premises: vec![],
            conclusions: vec![ge(ConceptExpr::and(ta, typ(b)), tab, one)?],
        },
    ])
}

pub fn evaluate(i: &Interpretation, inst: &Instance) -> Result<PropertyCheck> {
    let premises = inst
        .premises
        .iter()
        .map(|a| i.check_axiom(a))
        .collect::<Result<Vec<_>>>()?;
    let conclusions = inst
        .conclusions
        .iter()
        .map(|a| i.check_axiom(a))
        .collect::<Result<Vec<_>>>()?;
    let outcome = if !premises.iter().all(|c| c.holds) {
        Outcome::Vacuous
    } else if conclusions.iter().all(|c| c.holds) {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok(PropertyCheck {
        property: inst.property,
        outcome,
        premises,
        conclusions,
        notes: vec![],
    })
}

/// `i` extended with [`LLE_NAME`] holding the extension of `A`.
pub fn klm_interpretation(i: &Interpretation, t: &Trial) -> Result<Interpretation> {
    let col = i.eval_all(&t.a)?;
    i.clone().with_concept(LLE_NAME, col)
}

/// Each postulate as an implication between model-checking results on `i`.
pub fn check_klm(i: &Interpretation, t: &Trial) -> Result<Vec<PropertyCheck>> {
    let j = klm_interpretation(i, t)?;
    klm_instances(t, i.family())?
        .iter()
        .map(|inst| evaluate(&j, inst))
        .collect()
}

/// fᴛ-1 to fᴛ-5 on `i`. Besides the inclusions, fᴛ-2 compares the premise
/// with emptiness of the typical set and fᴛ-3 compares the extensions of
/// `T(A)` and `T(A ⊓ D)` pointwise.
pub fn check_ft(i: &Interpretation, t: &Trial) -> Result<Vec<PropertyCheck>> {
    let mode = i.mode();
    let mut out = Vec::with_capacity(5);
    for inst in ft_instances(t)? {
        let mut r = evaluate(i, &inst)?;
        match inst.property {
            Property::Ft2 => {
                let empty = i.typical_set(&t.a)?.is_empty();
                if empty != r.premises[0].holds {
                    r.notes.push(format!(
                        "typical set of {} is {}empty but T(A) <: bot is {}",
                        t.a,
                        if empty { "" } else { "not " },
                        r.premises[0].holds
                    ));
                }
            }
            Property::Ft3 if r.premises[0].holds => {
                let lhs = i.eval_all(&typ(&t.a))?;
                let rhs = i.eval_all(&typ(&ConceptExpr::and(t.a.clone(), t.d.clone())))?;
                if let Some(x) = (0..lhs.len()).find(|&x| !mode.eq(lhs[x], rhs[x])) {
                    r.notes.push(format!(
                        "T(A) and T(A and D) differ at {}: {} vs {}",
                        i.domain()[x],
                        lhs[x],
                        rhs[x]
                    ));
                }
            }
            _ => {}
        }
        if !r.notes.is_empty() {
            r.outcome = Outcome::Fail;
        }
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub property: Property,
    pub pass: u64,
    pub fail: u64,
    pub vacuous: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub family: CombinationFamily,
    pub seed: u64,
    pub iterations: u64,
    pub threshold: String,
    pub tallies: Vec<Tally>,
    /// Trials with at least one failing property.
    pub failing_trials: u64,
    /// The first few failing trials, replayable.
    pub failures: Vec<FailureRecord>,
    pub digest: String,
}

impl SuiteReport {
    pub fn violations(&self, p: Property) -> u64 {
        self.tallies.iter().find(|t| t.property == p).map_or(0, |t| t.fail)
    }

    pub fn total_violations(&self) -> u64 {
        self.tallies.iter().map(|t| t.fail).sum()
    }

    pub fn holds(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "suite {} family {} seed {} iterations {} threshold {}\n",
            self.suite,
            self.family.name(),
            self.seed,
            self.iterations,
            self.threshold
        );
        s.push_str(&format!("{:<6} {:>8} {:>8} {:>8}\n", "prop", "pass", "fail", "vacuous"));
        for t in &self.tallies {
            s.push_str(&format!(
                "{:<6} {:>8} {:>8} {:>8}\n",
                t.property.name(),
                t.pass,
                t.fail,
                t.vacuous
            ));
        }
        s.push_str(&format!("digest {}\n", self.digest));
        s
    }
}

const KEPT_FAILURES: usize = 10;

#[derive(Clone, Copy)]
enum Suite {
    Klm(ThresholdChoice),
    Ft,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Klm(_) => "klm",
            Suite::Ft => "ft",
        }
    }

    fn choice(self) -> ThresholdChoice {
        match self {
            Suite::Klm(c) => c,
            Suite::Ft => ThresholdChoice::One,
        }
    }

    fn properties(self) -> &'static [Property] {
        match self {
            Suite::Klm(_) => &Property::KLM,
            Suite::Ft => &Property::FT,
        }
    }

    /// The checks of trial `index` and the interpretation they ran on.
    fn run(self, cfg: &GeneratorConfig, index: u64) -> Result<(Interpretation, Trial, Vec<PropertyCheck>)> {
        let (i, t) = sample(cfg, index, self.choice())?;
        match self {
            Suite::Klm(_) => {
                let j = klm_interpretation(&i, &t)?;
                let checks = klm_instances(&t, i.family())?
                    .iter()
                    .map(|inst| evaluate(&j, inst))
                    .collect::<Result<Vec<_>>>()?;
                Ok((j, t, checks))
            }
            Suite::Ft => {
                let checks = check_ft(&i, &t)?;
                Ok((i, t, checks))
            }
        }
    }
}

fn run_suite(cfg: &GeneratorConfig, suite: Suite) -> Result<SuiteReport> {
    cfg.validate()?;
    let outcomes = map_trials(0..cfg.iterations, |idx| {
        suite
            .run(cfg, idx)
            .map(|(_, _, checks)| checks.into_iter().map(|c| c.outcome).collect::<Vec<_>>())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let props = suite.properties();
    let mut tallies: Vec<Tally> = props
        .iter()
        .map(|&property| Tally {
            property,
            pass: 0,
            fail: 0,
            vacuous: 0,
        })
        .collect();
    let mut digest = Digest::default();
    let mut failing = Vec::new();
    for (idx, row) in outcomes.iter().enumerate() {
        digest.u64(idx as u64);
        for (t, o) in tallies.iter_mut().zip(row) {
            digest.bytes(&[o.byte()]);
            match o {
                Outcome::Pass => t.pass += 1,
                Outcome::Fail => t.fail += 1,
                Outcome::Vacuous => t.vacuous += 1,
            }
        }
        if row.contains(&Outcome::Fail) {
            failing.push(idx as u64);
        }
    }
    let failures = failing
        .iter()
        .take(KEPT_FAILURES)
        .map(|&idx| {
            let (i, t, checks) = suite.run(cfg, idx)?;
            let bad = checks
                .into_iter()
                .find(|c| c.outcome == Outcome::Fail)
                .expect("trial failed");
            Ok(FailureRecord::new(suite.name(), cfg, &i, &t, &bad))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: suite.name().into(),
        family: cfg.family,
        seed: cfg.seed,
        iterations: cfg.iterations,
        threshold: suite.choice().to_string(),
        tallies,
        failing_trials: failing.len() as u64,
        failures,
        digest: digest.hex(),
    })
}

/// The KLM suite: `cfg.iterations` random interpretations and trials.
pub fn run_klm(cfg: &GeneratorConfig, threshold: ThresholdChoice) -> Result<SuiteReport> {
    run_suite(cfg, Suite::Klm(threshold))
}

/// The fᴛ suite.
pub fn run_ft(cfg: &GeneratorConfig) -> Result<SuiteReport> {
    run_suite(cfg, Suite::Ft)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum HuntOutcome {
    Found(Box<FailureRecord>),
    /// Nothing found within the budget; this is not evidence of absence.
    Inconclusive {
        trials: u64,
    },
}

impl HuntOutcome {
    pub fn found(&self) -> Option<&FailureRecord> {
        match self {
            HuntOutcome::Found(r) => Some(r),
            HuntOutcome::Inconclusive { .. } => None,
        }
    }
}

const HUNT_CHUNK: u64 = 4096;

/// Search trials `0..cfg.iterations` in order for the first failure of
/// any postulate in `targets`.
pub fn hunt(cfg: &GeneratorConfig, targets: &[Property], threshold: ThresholdChoice) -> Result<HuntOutcome> {
    cfg.validate()?;
    let suite = Suite::Klm(threshold);
    let pos: Vec<usize> = targets
        .iter()
        .map(|p| {
            Property::KLM
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| Error::Invalid(format!("{p} is not a KLM postulate")))
        })
        .collect::<Result<_>>()?;
    let mut start = 0;
    while start < cfg.iterations {
        let end = (start + HUNT_CHUNK).min(cfg.iterations);
        let hits = map_trials(start..end, |idx| -> Result<Option<usize>> {
            let (i, t) = sample(cfg, idx, threshold)?;
            let j = klm_interpretation(&i, &t)?;
            let inst = klm_instances(&t, i.family())?;
            for &p in &pos {
                if evaluate(&j, &inst[p])?.outcome == Outcome::Fail {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        });
        for (off, hit) in hits.into_iter().enumerate() {
            if let Some(p) = hit? {
                let idx = start + off as u64;
                let (i, t, checks) = suite.run(cfg, idx)?;
                return Ok(HuntOutcome::Found(Box::new(FailureRecord::new(
                    "hunt", cfg, &i, &t, &checks[p],
                ))));
            }
        }
        start = end;
    }
    Ok(HuntOutcome::Inconclusive { trials: cfg.iterations })
}

#[derive(Debug, Clone, Serialize)]
pub struct RmVerdicts {
    pub family: CombinationFamily,
    /// `T(A) ⊑ C ≥ 1`; holds.
    pub premise: AxiomCheck,
    /// `T(A) ⊑ ¬B ≥ 1`; must fail for the rule to apply.
    pub negated: AxiomCheck,
    /// `T(A ⊓ B) ⊑ C ≥ 1`; fails.
    pub conclusion: AxiomCheck,
    pub not_b_at_x: f64,
    pub typ_a_and_b_at_z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmFixture {
    #[serde(skip)]
    pub interpretation: Interpretation,
    pub verdicts: Vec<RmVerdicts>,
}

/// Two elements `x`, `z` on which rational monotonicity fails, checked
/// under Gödel and involutive negation.
pub fn rm_fixture() -> Result<RmFixture> {
    let mode = Mode::graded(GradedScale::new(10)?);
    let base = Interpretation::new(vec!["x".into(), "z".into()], CombinationFamily::Goedel, mode)?
        .with_concept("A", vec![0.8, 0.5])?
        .with_concept("B", vec![0.3, 0.6])?
        .with_concept("C", vec![0.9, 0.4])?;
    let (a, b, c) = (ConceptExpr::name("A"), ConceptExpr::name("B"), ConceptExpr::name("C"));
    let one = Threshold::new(1.0)?;
    let premise = ge(typ(&a), c.clone(), one)?;
    let negated = ge(typ(&a), ConceptExpr::not(b.clone()), one)?;
    let ab = ConceptExpr::and(a, b.clone());
    let conclusion = ge(typ(&ab), c, one)?;
    let mut verdicts = Vec::new();
    for family in [CombinationFamily::Goedel, CombinationFamily::GoedelInvolutive] {
        let i = base.clone().with_family(family);
        verdicts.push(RmVerdicts {
            family,
            premise: i.check_axiom(&premise)?,
            negated: i.check_axiom(&negated)?,
            conclusion: i.check_axiom(&conclusion)?,
            not_b_at_x: i.eval_concept(&ConceptExpr::not(b.clone()), 0)?.value(),
            typ_a_and_b_at_z: i.eval_concept(&typ(&ab), 1)?.value(),
        });
    }
    Ok(RmFixture {
        interpretation: base,
        verdicts,
    })
}
