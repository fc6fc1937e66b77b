//! Replayable fixtures: an interpretation JSON file plus a manifest of
//! expected verdicts.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::postulates::{PropertyCheck, Trial};
use super::GeneratorConfig;
use crate::error::Result;
use crate::family::CombinationFamily;
use crate::interpretation::{AxiomCheck, Interpretation, InterpretationFile};
use crate::syntax::parse_axiom_graded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedVerdict {
    pub axiom: String,
    /// `premise`, `conclusion` or `check`.
    pub role: String,
    pub holds: bool,
    pub value: f64,
}

impl ExpectedVerdict {
    pub fn from_check(role: &str, c: &AxiomCheck) -> Self {
        ExpectedVerdict {
            axiom: c.axiom.clone(),
            role: role.into(),
            holds: c.holds,
            value: c.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictManifest {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    pub family: CombinationFamily,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub concepts: IndexMap<String, String>,
    pub verdicts: Vec<ExpectedVerdict>,
}

/// A failing trial with everything needed to replay it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub manifest: VerdictManifest,
    pub interpretation: InterpretationFile,
}

impl FailureRecord {
    pub fn new(suite: &str, cfg: &GeneratorConfig, i: &Interpretation, t: &Trial, check: &PropertyCheck) -> Self {
        let verdicts = check
            .premises
            .iter()
            .map(|c| ExpectedVerdict::from_check("premise", c))
            .chain(
                check
                    .conclusions
                    .iter()
                    .map(|c| ExpectedVerdict::from_check("conclusion", c)),
            )
            .collect();
        let mut description = format!("{} fails on trial {} of seed {}", check.property, t.index, cfg.seed);
        for n in &check.notes {
            description.push_str("; ");
            description.push_str(n);
        }
        FailureRecord {
            manifest: VerdictManifest {
                description,
                suite: Some(suite.into()),
                seed: Some(cfg.seed),
                trial: Some(t.index),
                property: Some(check.property.name().into()),
                family: i.family(),
                concepts: t
                    .concepts()
                    .iter()
                    .map(|(k, c)| (k.to_string(), c.to_string()))
                    .collect(),
                verdicts,
            },
            interpretation: i.to_file(),
        }
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let i = self.interpretation.clone().into_interpretation()?;
        write_fixture(dir, stem, &i, &self.manifest)
    }
}

/// Write `<stem>.json` (the interpretation) and `<stem>.verdicts.json`.
pub fn write_fixture(
    dir: &Path,
    stem: &str,
    i: &Interpretation,
    manifest: &VerdictManifest,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let model = dir.join(format!("{stem}.json"));
    let verdicts = dir.join(format!("{stem}.verdicts.json"));
    fs::write(&model, i.to_json()? + "\n")?;
    fs::write(&verdicts, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok((model, verdicts))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-run every verdict of a fixture written by [`write_fixture`].
pub fn replay_fixture(dir: &Path, stem: &str) -> Result<ReplayReport> {
    let i = Interpretation::from_json(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let manifest: VerdictManifest =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.verdicts.json")))?)?;
    let i = i.with_family(manifest.family);
    let mut mismatches = Vec::new();
    for v in &manifest.verdicts {
        let ax = parse_axiom_graded(&v.axiom, i.mode().scale())?;
        let got = i.check_axiom(&ax)?;
        if got.holds != v.holds || got.value != v.value {
            mismatches.push(format!(
                "{}: expected holds={} value={}, got holds={} value={}",
                v.axiom, v.holds, v.value, got.holds, got.value
            ));
        }
    }
    Ok(ReplayReport {
        checked: manifest.verdicts.len(),
        mismatches,
    })
}
