//! Turning questionnaire responses into an empirical model.
//!
//! Each respondent sees one context (a choice of word for each slot) and
//! resolves both pronouns. A response is valid when the two picks differ;
//! it is "same" when both pronouns are resolved to the same noun phrase.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::empirical::{Distribution, EmpiricalModel, ModelError};
use crate::scenario::{MeasurementScenario, ScenarioError};
use crate::schema::{GeneralisedWinogradSchema, SchemaError, WordChoice};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum IngestError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("context {0} has no valid responses")]
    EmptyContext(String),
    #[error("expected {expected} tallies, got {found}")]
    TallyCount { expected: usize, found: usize },
    #[error("scenario is not a two-outcome, two-observable-per-context scenario")]
    Shape,
    #[error("inconsistent tally for context {context}: {reason}")]
    BadTally { context: String, reason: &'static str },
}

/// One pair of resolutions offered to a respondent: first letter is the
/// first pronoun's referent, second letter the second's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pick {
    AA,
    AB,
    BA,
    BB,
}

impl Pick {
    pub const ALL: [Pick; 4] = [Pick::AA, Pick::AB, Pick::BA, Pick::BB];

    pub fn is_same(self) -> bool {
        matches!(self, Pick::AA | Pick::BB)
    }

    /// Outcome indices (0 = first noun phrase).
    pub fn outcomes(self) -> [usize; 2] {
        match self {
            Pick::AA => [0, 0],
            Pick::AB => [0, 1],
            Pick::BA => [1, 0],
            Pick::BB => [1, 1],
        }
    }
}

impl fmt::Display for Pick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pick::AA => "AA",
            Pick::AB => "AB",
            Pick::BA => "BA",
            Pick::BB => "BB",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`{0}` is not one of AA, AB, BA, BB")]
pub struct ParsePickError(pub String);

impl FromStr for Pick {
    type Err = ParsePickError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AA" => Ok(Pick::AA),
            "AB" => Ok(Pick::AB),
            "BA" => Ok(Pick::BA),
            "BB" => Ok(Pick::BB),
            _ => Err(ParsePickError(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseRecord {
    pub respondent_id: String,
    pub context: (WordChoice, WordChoice),
    pub picks: [Pick; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResponseKind {
    Same,
    Different,
    Invalid,
}

pub fn validate_response(record: &ResponseRecord) -> ResponseKind {
    let [p, q] = record.picks;
    if p == q {
        ResponseKind::Invalid
    } else if p.is_same() && q.is_same() {
        ResponseKind::Same
    } else if !p.is_same() && !q.is_same() {
        ResponseKind::Different
    } else {
        ResponseKind::Invalid
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContextTally {
    pub n_total: usize,
    pub n_valid: usize,
    pub n_same: usize,
    pub n_diff: usize,
}

impl ContextTally {
    pub fn from_counts(n_same: usize, n_diff: usize) -> Self {
        ContextTally { n_total: n_same + n_diff, n_valid: n_same + n_diff, n_same, n_diff }
    }

    pub fn n_invalid(&self) -> usize {
        self.n_total - self.n_valid
    }

    fn record(&mut self, kind: ResponseKind) {
        self.n_total += 1;
        match kind {
            ResponseKind::Same => {
                self.n_valid += 1;
                self.n_same += 1;
            }
            ResponseKind::Different => {
                self.n_valid += 1;
                self.n_diff += 1;
            }
            ResponseKind::Invalid => {}
        }
    }
}

#[derive(Clone, Debug)]
pub struct Aggregation {
    pub model: EmpiricalModel,
    /// Aligned with `model.contexts()`.
    pub tallies: Vec<ContextTally>,
    /// Respondent ids seen more than once, in first-repeat order.
    pub duplicate_ids: Vec<String>,
}

/// Index of the scenario context measured by a respondent.
fn context_slot(
    scenario: &MeasurementScenario,
    schema: &GeneralisedWinogradSchema,
    choice: (WordChoice, WordChoice),
) -> Result<usize, IngestError> {
    let [o1, o2] = schema.context_for(choice.0, choice.1);
    let contexts = scenario.maximal_contexts()?;
    contexts
        .iter()
        .position(|c| c.same_members(&[o1.as_str(), o2.as_str()]))
        .ok_or(IngestError::Shape)
}

pub fn aggregate(records: &[ResponseRecord], schema: &GeneralisedWinogradSchema) -> Result<Aggregation, IngestError> {
    let scenario = schema.scenario()?;
    let contexts = scenario.maximal_contexts()?;
    let mut slots = [0usize; 4];
    for (k, (c1, c2)) in [
        (WordChoice::Special, WordChoice::Special),
        (WordChoice::Special, WordChoice::Alternate),
        (WordChoice::Alternate, WordChoice::Special),
        (WordChoice::Alternate, WordChoice::Alternate),
    ]
    .into_iter()
    .enumerate()
    {
        slots[k] = context_slot(&scenario, schema, (c1, c2))?;
    }
    let key = |c: (WordChoice, WordChoice)| (c.0 == WordChoice::Alternate) as usize * 2 + (c.1 == WordChoice::Alternate) as usize;

    let mut tallies = vec![ContextTally::default(); contexts.len()];
    let mut seen = BTreeSet::new();
    let mut dup_set = BTreeSet::new();
    let mut duplicate_ids = Vec::new();
    for r in records {
        if !seen.insert(r.respondent_id.as_str()) && dup_set.insert(r.respondent_id.as_str()) {
            duplicate_ids.push(r.respondent_id.clone());
        }
        tallies[slots[key(r.context)]].record(validate_response(r));
    }
    let model = model_from_tallies(scenario, &tallies)?;
    Ok(Aggregation { model, tallies, duplicate_ids })
}

/// Builds the outcome-symmetric model `p(AA) = p(BB) = n_same / 2n`,
/// `p(AB) = p(BA) = 1/2 - p(AA)` over the scenario's canonical contexts.
pub fn model_from_tallies(scenario: MeasurementScenario, tallies: &[ContextTally]) -> Result<EmpiricalModel, IngestError> {
    let contexts = scenario.maximal_contexts()?;
    if tallies.len() != contexts.len() {
        return Err(IngestError::TallyCount { expected: contexts.len(), found: tallies.len() });
    }
    if scenario.outcomes().len() != 2 || contexts.iter().any(|c| c.len() != 2) {
        return Err(IngestError::Shape);
    }
    let mut dists = Vec::with_capacity(contexts.len());
    for (ctx, t) in contexts.into_iter().zip(tallies) {
        if t.n_valid == 0 {
            return Err(IngestError::EmptyContext(ctx.to_string()));
        }
        if t.n_same + t.n_diff != t.n_valid || t.n_valid > t.n_total {
            return Err(IngestError::BadTally { context: ctx.to_string(), reason: "counts do not add up" });
        }
        let same = t.n_same as f64 / (2 * t.n_valid) as f64;
        let diff = 0.5 - same;
        dists.push(Distribution::new(ctx, 2, vec![same, diff, diff, same])?);
    }
    Ok(EmpiricalModel::new(scenario, dists)?)
}
