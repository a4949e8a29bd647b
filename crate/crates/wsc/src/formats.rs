//! JSON documents for scenarios, models and schemas.
//!
//! Joint outcomes in a model file are keyed by outcome labels joined with
//! `|`, listed in the order the entry names its context, so
//! `{"context": ["b1", "a1"], "probs": {"0|1": 0.5}}` gives `b1 = 0, a1 = 1`.
//! Missing keys read as 0.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wsc_core::empirical::{tuple_of, Distribution, EmpiricalModel};
use wsc_core::schema::{GeneralisedWinogradSchema, WinogradSchema, WordPair};
use wsc_core::{MeasurementScenario, NORMALISATION_TOL};

use crate::Error;

pub const TUPLE_SEPARATOR: &str = "|";
/// Largest row deficit repaired when loading a model.
pub const ROUNDING_REPAIR_MAX: f64 = 5e-3;

/// A value together with messages the user should see.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub value: T,
    pub notices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub observables: Vec<String>,
    pub contexts: Vec<Vec<String>>,
    pub outcomes: Vec<String>,
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> MeasurementScenario {
        MeasurementScenario::new(
            self.observables.iter().map(String::as_str),
            self.contexts.iter().map(|c| c.iter().map(String::as_str).collect::<Vec<_>>()),
            self.outcomes.iter().cloned(),
        )
    }

    /// Lists the maximal contexts of a valid scenario.
    pub fn from_scenario(scenario: &MeasurementScenario) -> Result<Self, Error> {
        let contexts = scenario.maximal_contexts().map_err(Error::invalid)?;
        Ok(ScenarioFile {
            observables: scenario.observables().iter().map(|o| o.as_str().to_owned()).collect(),
            contexts: contexts.iter().map(context_names).collect(),
            outcomes: scenario.outcomes().to_vec(),
        })
    }
}

pub fn context_names(c: &wsc_core::Context) -> Vec<String> {
    c.members().iter().map(|o| o.as_str().to_owned()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Inline(ScenarioFile),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionEntry {
    pub context: Vec<String>,
    pub probs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub scenario: ScenarioSource,
    pub distributions: Vec<DistributionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordsEntry {
    pub special: String,
    pub alternate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotWords {
    pub slot1: WordsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot2: Option<WordsEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaFile {
    pub noun_phrases: Vec<String>,
    pub pronouns: Vec<String>,
    pub words: SlotWords,
    pub template: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnySchema {
    Original(WinogradSchema),
    Generalised(GeneralisedWinogradSchema),
}

fn pair(w: &WordsEntry) -> WordPair {
    WordPair::new(w.special.clone(), w.alternate.clone())
}

impl SchemaFile {
    /// One pronoun with one word pair is an original schema; two pronouns
    /// with two word pairs a generalised one. Anything else is rejected.
    pub fn compile(&self) -> Result<AnySchema, Error> {
        let [a, b] = self.noun_phrases.as_slice() else {
            return Err(Error::invalid(format!(
                "expected exactly 2 noun phrases, found {}",
                self.noun_phrases.len()
            )));
        };
        let noun_phrases = (a.clone(), b.clone());
        let schema = match (self.pronouns.as_slice(), &self.words.slot2) {
            ([p], None) => AnySchema::Original(WinogradSchema {
                noun_phrases,
                pronoun: p.clone(),
                words: pair(&self.words.slot1),
                template: self.template.clone(),
            }),
            ([p1, p2], Some(slot2)) => AnySchema::Generalised(GeneralisedWinogradSchema {
                noun_phrases,
                pronouns: (p1.clone(), p2.clone()),
                slot1: pair(&self.words.slot1),
                slot2: pair(slot2),
                template: self.template.clone(),
            }),
            ([_, _], None) => {
                return Err(Error::invalid(
                    "not a generalised schema: two pronouns but a single special/alternate word pair \
                     (each pronoun needs its own word slot)",
                ))
            }
            (ps, s2) => {
                return Err(Error::invalid(format!(
                    "unsupported shape: {} pronoun(s) with {} word slot(s)",
                    ps.len(),
                    if s2.is_some() { 2 } else { 1 }
                )))
            }
        };
        match &schema {
            AnySchema::Original(s) => s.validate(),
            AnySchema::Generalised(s) => s.validate(),
        }
        .map_err(Error::invalid)?;
        Ok(schema)
    }
}

impl AnySchema {
    pub fn scenario(&self) -> Result<MeasurementScenario, Error> {
        match self {
            AnySchema::Original(s) => s.scenario(),
            AnySchema::Generalised(s) => s.scenario(),
        }
        .map_err(Error::invalid)
    }

    /// Fills the template; `words` holds one entry per slot, each a literal
    /// word or `special` / `alternate`.
    pub fn instantiate(&self, words: &[String]) -> Result<String, Error> {
        match (self, words) {
            (AnySchema::Original(s), [w]) => {
                let c = s.words.choice(1, w).map_err(Error::invalid)?;
                s.instantiate(c).map_err(Error::invalid)
            }
            (AnySchema::Generalised(s), [w1, w2]) => {
                let (c1, c2) = s.choices(w1, w2).map_err(Error::invalid)?;
                s.instantiate(c1, c2).map_err(Error::invalid)
            }
            (AnySchema::Original(_), _) => Err(Error::invalid("this schema has one word slot; give one word")),
            (AnySchema::Generalised(_), _) => Err(Error::invalid("this schema has two word slots; give two words")),
        }
    }

    pub fn generalised(self) -> Result<GeneralisedWinogradSchema, Error> {
        match self {
            AnySchema::Generalised(g) => Ok(g),
            AnySchema::Original(_) => Err(Error::invalid("response data needs a generalised schema with two word slots")),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

fn checked_scenario(file: &ScenarioFile) -> Result<MeasurementScenario, Error> {
    let scenario = file.to_scenario();
    let report = scenario.validate();
    if !report.is_valid() {
        let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Invalid(lines.join("\n")));
    }
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<MeasurementScenario, Error> {
    let file: ScenarioFile = parse_json(&read_text(path)?, path)?;
    checked_scenario(&file)
}

pub fn load_schema(path: &Path) -> Result<AnySchema, Error> {
    let file: SchemaFile = parse_json(&read_text(path)?, path)?;
    file.compile()
}

pub fn load_model(path: &Path) -> Result<Loaded<EmpiricalModel>, Error> {
    let file: ModelFile = parse_json(&read_text(path)?, path)?;
    model_from_file(&file, path.parent().unwrap_or(Path::new(".")))
}

/// Builds a model; relative scenario paths resolve against `base`.
pub fn model_from_file(file: &ModelFile, base: &Path) -> Result<Loaded<EmpiricalModel>, Error> {
    let scenario = match &file.scenario {
        ScenarioSource::Inline(s) => checked_scenario(s)?,
        ScenarioSource::Path(p) => load_scenario(&base.join(p))?,
    };
    let contexts = scenario.maximal_contexts().map_err(Error::invalid)?;
    let n_out = scenario.outcomes().len();
    let mut notices = Vec::new();
    let mut rows: Vec<Option<Distribution>> = vec![None; contexts.len()];
    for entry in &file.distributions {
        let names: Vec<&str> = entry.context.iter().map(String::as_str).collect();
        let Some(ci) = contexts.iter().position(|c| c.same_members(&names) && c.len() == names.len()) else {
            return Err(Error::invalid(format!("{{{}}} is not a context of the scenario", names.join(", "))));
        };
        if rows[ci].is_some() {
            return Err(Error::invalid(format!("context {} is listed twice", contexts[ci])));
        }
        let ctx = &contexts[ci];
        // position in the canonical context of each name, in entry order
        let order: Vec<usize> = names
            .iter()
            .map(|n| ctx.members().iter().position(|o| o.as_str() == *n).unwrap())
            .collect();
        let mut probs = vec![0.0; n_out.pow(ctx.len() as u32)];
        for (key, &p) in &entry.probs {
            let labels: Vec<&str> = key.split(TUPLE_SEPARATOR).collect();
            if labels.len() != ctx.len() {
                return Err(Error::invalid(format!("context {ctx}: key `{key}` needs {} outcome(s)", ctx.len())));
            }
            let mut tuple = vec![0; ctx.len()];
            for (label, &pos) in labels.iter().zip(&order) {
                tuple[pos] = scenario
                    .outcome_index(label)
                    .ok_or_else(|| Error::invalid(format!("context {ctx}: `{label}` is not an outcome")))?;
            }
            probs[tuple.iter().fold(0, |acc, &o| acc * n_out + o)] = p;
        }
        let sum: f64 = probs.iter().sum();
        let dist = if (sum - 1.0).abs() <= NORMALISATION_TOL {
            Distribution::new(ctx.clone(), n_out, probs).map_err(Error::invalid)?
        } else {
            let (d, deficit) = Distribution::with_rounding_repair(ctx.clone(), n_out, probs, ROUNDING_REPAIR_MAX)
                .map_err(Error::invalid)?;
            notices.push(format!(
                "context {ctx}: probabilities sum to {sum:.6}; spread {deficit:+.6} evenly over its {} cells",
                d.probs().len()
            ));
            d
        };
        rows[ci] = Some(dist);
    }
    let mut dists = Vec::with_capacity(rows.len());
    for (ci, d) in rows.into_iter().enumerate() {
        dists.push(d.ok_or_else(|| Error::invalid(format!("no distribution given for context {}", contexts[ci])))?);
    }
    let model = EmpiricalModel::new(scenario, dists).map_err(Error::invalid)?;
    Ok(Loaded { value: model, notices })
}

/// Key for a joint outcome in canonical member order.
pub fn tuple_key(scenario: &MeasurementScenario, tuple: &[usize]) -> String {
    tuple
        .iter()
        .map(|&o| scenario.outcomes()[o].as_str())
        .collect::<Vec<_>>()
        .join(TUPLE_SEPARATOR)
}

pub fn distribution_entry(scenario: &MeasurementScenario, d: &Distribution) -> DistributionEntry {
    let arity = d.context().len();
    DistributionEntry {
        context: context_names(d.context()),
        probs: d
            .probs()
            .iter()
            .enumerate()
            .map(|(i, &p)| (tuple_key(scenario, &tuple_of(i, d.n_outcomes(), arity)), p))
            .collect(),
    }
}

/// Self-contained model file with the scenario inlined.
pub fn model_to_file(model: &EmpiricalModel) -> Result<ModelFile, Error> {
    let scenario = model.scenario();
    Ok(ModelFile {
        scenario: ScenarioSource::Inline(ScenarioFile::from_scenario(scenario)?),
        distributions: model.distributions().iter().map(|d| distribution_entry(scenario, d)).collect(),
    })
}
