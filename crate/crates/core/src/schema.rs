//! Winograd schemas and their measurement scenarios.
//!
//! An original schema has one pronoun and one special/alternate word pair;
//! its scenario has one singleton context per sentence. A generalised schema
//! has two pronouns and two word pairs, giving four two-member contexts
//! arranged like the Bell-CHSH square.
//!
//! Templates mark word slots with `${word1}`/`${word2}` and pronouns with
//! `${pron1}`/`${pron2}`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::scenario::{MeasurementScenario, Observable};

pub const WORD1: &str = "${word1}";
pub const WORD2: &str = "${word2}";
pub const PRON1: &str = "${pron1}";
pub const PRON2: &str = "${pron2}";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("slot {0}: special and alternate words are identical")]
    SameWords(u8),
    #[error("the two noun phrases are identical")]
    SameNounPhrases,
    #[error("template must contain `{marker}` exactly {expected} time(s), found {found}")]
    MarkerCount { marker: &'static str, expected: usize, found: usize },
    #[error("observable {0} would appear twice")]
    DuplicateObservable(String),
    #[error("`{word}` is neither the special nor the alternate word of slot {slot}")]
    UnknownWord { slot: u8, word: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordChoice {
    Special,
    Alternate,
}

impl WordChoice {
    pub const BOTH: [WordChoice; 2] = [WordChoice::Special, WordChoice::Alternate];
}

impl fmt::Display for WordChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordChoice::Special => "special",
            WordChoice::Alternate => "alternate",
        })
    }
}

/// Special/alternate pair for one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordPair {
    pub special: String,
    pub alternate: String,
}

impl WordPair {
    pub fn new(special: impl Into<String>, alternate: impl Into<String>) -> Self {
        WordPair { special: special.into(), alternate: alternate.into() }
    }

    pub fn word(&self, choice: WordChoice) -> &str {
        match choice {
            WordChoice::Special => &self.special,
            WordChoice::Alternate => &self.alternate,
        }
    }

    /// Resolves a literal word, or the tokens `special` / `alternate`.
    pub fn choice(&self, slot: u8, word: &str) -> Result<WordChoice, SchemaError> {
        if word == self.special || word == "special" {
            Ok(WordChoice::Special)
        } else if word == self.alternate || word == "alternate" {
            Ok(WordChoice::Alternate)
        } else {
            Err(SchemaError::UnknownWord { slot, word: word.to_string() })
        }
    }

    fn check(&self, slot: u8) -> Result<(), SchemaError> {
        if self.special.is_empty() || self.alternate.is_empty() {
            return Err(SchemaError::EmptyField("words"));
        }
        if self.special == self.alternate {
            return Err(SchemaError::SameWords(slot));
        }
        Ok(())
    }
}

fn observable_id(pronoun: &str, word: &str) -> String {
    format!("({pronoun},{word})")
}

fn check_markers(template: &str, expected: [(&'static str, usize); 4]) -> Result<(), SchemaError> {
    for (marker, expected) in expected {
        let found = template.matches(marker).count();
        if found != expected {
            return Err(SchemaError::MarkerCount { marker, expected, found });
        }
    }
    Ok(())
}

fn check_noun_phrases(np: &(String, String)) -> Result<(), SchemaError> {
    if np.0.is_empty() || np.1.is_empty() {
        return Err(SchemaError::EmptyField("noun_phrases"));
    }
    if np.0 == np.1 {
        return Err(SchemaError::SameNounPhrases);
    }
    Ok(())
}

/// A sentence pair differing in one word, with one ambiguous pronoun.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinogradSchema {
    pub noun_phrases: (String, String),
    pub pronoun: String,
    pub words: WordPair,
    pub template: String,
}

impl WinogradSchema {
    pub fn validate(&self) -> Result<(), SchemaError> {
        check_noun_phrases(&self.noun_phrases)?;
        if self.pronoun.is_empty() {
            return Err(SchemaError::EmptyField("pronouns"));
        }
        self.words.check(1)?;
        check_markers(&self.template, [(WORD1, 1), (PRON1, 1), (WORD2, 0), (PRON2, 0)])
    }

    pub fn observable(&self, choice: WordChoice) -> Observable {
        Observable::new(observable_id(&self.pronoun, self.words.word(choice)))
    }

    /// Two observables `(p, s)` and `(p, a)`, each its own context, with the
    /// noun phrases as outcomes.
    pub fn scenario(&self) -> Result<MeasurementScenario, SchemaError> {
        self.validate()?;
        let s = self.observable(WordChoice::Special);
        let a = self.observable(WordChoice::Alternate);
        Ok(MeasurementScenario::new(
            [s.clone(), a.clone()],
            [[s], [a]],
            [self.noun_phrases.0.clone(), self.noun_phrases.1.clone()],
        ))
    }

    pub fn instantiate(&self, choice: WordChoice) -> Result<String, SchemaError> {
        self.validate()?;
        Ok(self.template.replace(WORD1, self.words.word(choice)).replace(PRON1, &self.pronoun))
    }
}

/// Two Winograd schemas sharing one discourse: two pronouns, two word pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralisedWinogradSchema {
    pub noun_phrases: (String, String),
    pub pronouns: (String, String),
    pub slot1: WordPair,
    pub slot2: WordPair,
    pub template: String,
}

impl GeneralisedWinogradSchema {
    pub fn validate(&self) -> Result<(), SchemaError> {
        check_noun_phrases(&self.noun_phrases)?;
        if self.pronouns.0.is_empty() || self.pronouns.1.is_empty() {
            return Err(SchemaError::EmptyField("pronouns"));
        }
        self.slot1.check(1)?;
        self.slot2.check(2)?;
        check_markers(&self.template, [(WORD1, 1), (WORD2, 1), (PRON1, 1), (PRON2, 1)])?;
        let ids = self.observables();
        for (i, a) in ids.iter().enumerate() {
            if ids[..i].contains(a) {
                return Err(SchemaError::DuplicateObservable(a.as_str().to_string()));
            }
        }
        Ok(())
    }

    /// `(p1, s1), (p1, a1), (p2, s2), (p2, a2)`.
    pub fn observables(&self) -> [Observable; 4] {
        [
            self.observable(1, WordChoice::Special),
            self.observable(1, WordChoice::Alternate),
            self.observable(2, WordChoice::Special),
            self.observable(2, WordChoice::Alternate),
        ]
    }

    /// Observable for pronoun `slot` (1 or 2) read with the chosen word.
    pub fn observable(&self, slot: u8, choice: WordChoice) -> Observable {
        if slot == 1 {
            Observable::new(observable_id(&self.pronouns.0, self.slot1.word(choice)))
        } else {
            Observable::new(observable_id(&self.pronouns.1, self.slot2.word(choice)))
        }
    }

    /// Observables measured together when the questionnaire uses the given
    /// word choices.
    pub fn context_for(&self, choice1: WordChoice, choice2: WordChoice) -> [Observable; 2] {
        [self.observable(1, choice1), self.observable(2, choice2)]
    }

    /// The rank-4 cyclic scenario: every first-pronoun observable is paired
    /// with every second-pronoun observable.
    pub fn scenario(&self) -> Result<MeasurementScenario, SchemaError> {
        self.validate()?;
        let obs = self.observables();
        let contexts: Vec<[Observable; 2]> = WordChoice::BOTH
            .iter()
            .flat_map(|&c1| WordChoice::BOTH.iter().map(move |&c2| (c1, c2)))
            .map(|(c1, c2)| self.context_for(c1, c2))
            .collect();
        Ok(MeasurementScenario::new(
            obs,
            contexts,
            [self.noun_phrases.0.clone(), self.noun_phrases.1.clone()],
        ))
    }

    pub fn choices(&self, word1: &str, word2: &str) -> Result<(WordChoice, WordChoice), SchemaError> {
        Ok((self.slot1.choice(1, word1)?, self.slot2.choice(2, word2)?))
    }

    /// Questionnaire text for one context.
    pub fn instantiate(&self, choice1: WordChoice, choice2: WordChoice) -> Result<String, SchemaError> {
        self.validate()?;
        Ok(self
            .template
            .replace(WORD1, self.slot1.word(choice1))
            .replace(WORD2, self.slot2.word(choice2))
            .replace(PRON1, &self.pronouns.0)
            .replace(PRON2, &self.pronouns.1))
    }
}

/// Builds the scenario of an original schema.
pub fn ws_scenario(schema: &WinogradSchema) -> Result<MeasurementScenario, SchemaError> {
    schema.scenario()
}

/// Builds the scenario of a generalised schema.
pub fn gws_scenario(schema: &GeneralisedWinogradSchema) -> Result<MeasurementScenario, SchemaError> {
    schema.scenario()
}
