//! Contextuality-by-Default measures for cyclic systems.
//!
//! A cyclic system of rank `n` has `n` contents arranged in a cycle, each
//! context pairing two neighbouring contents. `CNT1 = s_odd(corr) − Δ − n + 2`
//! is positive iff the system is contextual. For rank 4 with Δ = 0 this is the
//! maximal Bell-CHSH violation.

use alloc::vec::Vec;

use thiserror::Error;

use crate::empirical::{EmpiricalModel, ModelError};
use crate::scenario::{Context, Observable};

/// Longest vector `s_odd` will enumerate.
pub const S_ODD_MAX_LEN: usize = 32;

const RANGE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CbdError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scenario is not a cyclic system")]
    NotCyclic,
    #[error("Bell-CHSH needs a rank-4 cyclic scenario, got rank {0}")]
    NotRank4(usize),
    #[error("s_odd of an empty vector")]
    Empty,
    #[error("s_odd enumeration capped at {S_ODD_MAX_LEN} entries, got {0}")]
    TooLong(usize),
    #[error("cyclic system needs rank >= 3 and consistent lengths")]
    BadShape,
    #[error("value {0} outside [-1, 1]")]
    OutOfRange(f64),
}

/// Correlations along the cycle plus each content's two expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicSystem {
    correlations: Vec<f64>,
    expectations: Vec<(f64, f64)>,
    contents: Vec<Observable>,
    contexts: Vec<Context>,
}

impl CyclicSystem {
    /// `correlations[j]` belongs to the context joining contents `j` and
    /// `j + 1 (mod n)`; `expectations[i]` holds content `i`'s expectation in
    /// the contexts `i − 1` and `i`.
    pub fn new(correlations: Vec<f64>, expectations: Vec<(f64, f64)>) -> Result<Self, CbdError> {
        let n = correlations.len();
        if n < 3 || expectations.len() != n {
            return Err(CbdError::BadShape);
        }
        for &v in correlations.iter().chain(expectations.iter().flat_map(|(a, b)| [a, b])) {
            if !(v.abs() <= 1.0 + RANGE_SLACK) {
                return Err(CbdError::OutOfRange(v));
            }
        }
        Ok(CyclicSystem { correlations, expectations, contents: Vec::new(), contexts: Vec::new() })
    }

    /// Reads the system off a model on a cyclic scenario, walking the
    /// canonical cyclic ordering.
    pub fn from_model(model: &EmpiricalModel) -> Result<Self, CbdError> {
        let scenario = model.scenario();
        let cycle = scenario
            .cyclic_structure()
            .map_err(ModelError::from)?
            .ok_or(CbdError::NotCyclic)?;
        let order = cycle.ordering();
        let n = order.len();
        let contexts = (0..n)
            .map(|j| {
                let (a, b) = (&order[j], &order[(j + 1) % n]);
                model
                    .contexts()
                    .iter()
                    .find(|c| c.position(a).is_some() && c.position(b).is_some())
                    .cloned()
                    .ok_or(CbdError::NotCyclic)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let correlations = contexts
            .iter()
            .map(|c| model.correlation(c))
            .collect::<Result<Vec<_>, _>>()?;
        let expectations = (0..n)
            .map(|i| {
                let before = &contexts[(i + n - 1) % n];
                let after = &contexts[i];
                Ok((model.expectation(before, &order[i])?, model.expectation(after, &order[i])?))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let mut sys = Self::new(correlations, expectations)?;
        sys.contents = order.to_vec();
        sys.contexts = contexts;
        Ok(sys)
    }

    pub fn rank(&self) -> usize {
        self.correlations.len()
    }

    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    pub fn expectations(&self) -> &[(f64, f64)] {
        &self.expectations
    }

    /// Contents in cycle order; empty for systems built from raw numbers.
    pub fn contents(&self) -> &[Observable] {
        &self.contents
    }

    /// Contexts in cycle order; empty for systems built from raw numbers.
    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }
}

/// Maximum of `σ·x` over sign vectors with an odd number of −1 entries,
/// together with the first maximising sign vector in enumeration order.
pub fn s_odd_with_signs(x: &[f64]) -> Result<(f64, Vec<i8>), CbdError> {
    let k = x.len();
    if k == 0 {
        return Err(CbdError::Empty);
    }
    if k > S_ODD_MAX_LEN {
        return Err(CbdError::TooLong(k));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_mask = 0u64;
    for mask in 0u64..(1u64 << k) {
        if mask.count_ones() % 2 == 0 {
            continue;
        }
        let v: f64 = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| if mask & (1 << i) != 0 { -xi } else { xi })
            .sum();
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    let signs = (0..k).map(|i| if best_mask & (1 << i) != 0 { -1 } else { 1 }).collect();
    Ok((best, signs))
}

/// `s_odd` by direct enumeration of all odd-parity sign vectors.
pub fn s_odd(x: &[f64]) -> Result<f64, CbdError> {
    s_odd_with_signs(x).map(|(v, _)| v)
}

/// Closed form of `s_odd`: `Σ|x|` when an odd number of entries is negative,
/// otherwise `Σ|x| − 2·min|x|`.
pub fn s_odd_closed_form(x: &[f64]) -> Result<f64, CbdError> {
    if x.is_empty() {
        return Err(CbdError::Empty);
    }
    let total: f64 = x.iter().map(|v| v.abs()).sum();
    let negatives = x.iter().filter(|v| **v < 0.0).count();
    if negatives % 2 == 1 {
        Ok(total)
    } else {
        let min = x.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        Ok(total - 2.0 * min)
    }
}

/// Degree of signalling: total disagreement of each content's expectations.
pub fn delta(sys: &CyclicSystem) -> f64 {
    sys.expectations.iter().map(|(a, b)| (a - b).abs()).sum()
}

pub fn cnt1(sys: &CyclicSystem) -> f64 {
    let s = s_odd(&sys.correlations).expect("rank checked at construction");
    s - delta(sys) - sys.rank() as f64 + 2.0
}

/// Maximal Bell-CHSH violation of a rank-4 model with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshViolation {
    /// Best signed correlation sum minus the classical bound 2.
    pub value: f64,
    /// Maximising signs, aligned with `contexts`.
    pub signs: [i8; 4],
    pub correlations: [f64; 4],
    pub contexts: Vec<Context>,
}

pub fn chsh_violation(model: &EmpiricalModel) -> Result<ChshViolation, CbdError> {
    let sys = CyclicSystem::from_model(model)?;
    if sys.rank() != 4 {
        return Err(CbdError::NotRank4(sys.rank()));
    }
    let (best, signs) = s_odd_with_signs(&sys.correlations)?;
    let c = &sys.correlations;
    Ok(ChshViolation {
        value: best - 2.0,
        signs: [signs[0], signs[1], signs[2], signs[3]],
        correlations: [c[0], c[1], c[2], c[3]],
        contexts: sys.contexts,
    })
}
