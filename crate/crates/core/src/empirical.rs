//! Empirical models: one joint distribution per maximal context.
//!
//! Joint outcomes are tuples of outcome indices aligned with the context's
//! member order. Distributions are stored densely; the first member is the
//! most significant digit of the flat index.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::scenario::{Context, MeasurementScenario, Observable, ScenarioError};
use crate::NORMALISATION_TOL;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("context {context} expects {expected} probabilities, got {got}")]
    WrongLength { context: Context, expected: usize, got: usize },
    #[error("context {context}: probability {value} is negative or not finite")]
    BadProbability { context: Context, value: f64 },
    #[error("context {context}: probabilities sum to {sum}, not 1")]
    NotNormalised { context: Context, sum: f64 },
    #[error("outcome tuple has {got} entries, context {context} has {expected}")]
    TupleArity { context: Context, expected: usize, got: usize },
    #[error("outcome index {0} out of range")]
    OutcomeOutOfRange(usize),
    #[error("no distribution given for context {0}")]
    MissingContext(Context),
    #[error("context {0} given more than once")]
    DuplicateContext(Context),
    #[error("{0} is not a maximal context of the scenario")]
    UnknownContext(Context),
    #[error("subset is not contained in context {0}")]
    NotSubset(Context),
    #[error("observable {observable} is not in context {context}")]
    NotMember { context: Context, observable: Observable },
    #[error("context {0} does not have exactly two members")]
    ArityNotTwo(Context),
    #[error("operation needs exactly two outcomes, scenario has {0}")]
    NonBinary(usize),
}

/// Joint distribution over the members of one context.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    context: Context,
    n_outcomes: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Builds a distribution from a dense probability vector.
    pub fn new(context: Context, n_outcomes: usize, probs: Vec<f64>) -> Result<Self, ModelError> {
        let d = Self::unchecked(context, n_outcomes, probs)?;
        let sum: f64 = d.probs.iter().sum();
        if (sum - 1.0).abs() > NORMALISATION_TOL {
            return Err(ModelError::NotNormalised { context: d.context, sum });
        }
        Ok(d)
    }

    /// Builds a distribution from sparse `(outcome tuple, probability)` pairs;
    /// tuples that are not listed have probability 0.
    pub fn from_entries<I>(context: Context, n_outcomes: usize, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut probs = vec![0.0; table_len(n_outcomes, context.len())];
        for (tuple, p) in entries {
            let idx = flat_index(&context, n_outcomes, &tuple)?;
            probs[idx] += p;
        }
        Self::new(context, n_outcomes, probs)
    }

    /// Like [`new`](Self::new), but a row whose total is off by at most
    /// `max_deficit` (e.g. a table rounded to three decimals) has
    /// the missing mass spread evenly over all of its cells. Even spreading
    /// leaves every signed correlation of the row unchanged.
    ///
    /// Returns the distribution and the deficit that was added.
    pub fn with_rounding_repair(
        context: Context,
        n_outcomes: usize,
        probs: Vec<f64>,
        max_deficit: f64,
    ) -> Result<(Self, f64), ModelError> {
        let d = Self::unchecked(context, n_outcomes, probs)?;
        let sum: f64 = d.probs.iter().sum();
        let deficit = 1.0 - sum;
        if deficit.abs() <= NORMALISATION_TOL {
            return Ok((d, 0.0));
        }
        if deficit.abs() > max_deficit {
            return Err(ModelError::NotNormalised { context: d.context, sum });
        }
        let share = deficit / d.probs.len() as f64;
        let Distribution { context, n_outcomes, probs } = d;
        let repaired: Vec<f64> = probs.iter().map(|p| p + share).collect();
        if repaired.iter().any(|&p| p < 0.0) {
            return Err(ModelError::NotNormalised { context, sum });
        }
        Ok((Self::new(context, n_outcomes, repaired)?, deficit))
    }

    fn unchecked(context: Context, n_outcomes: usize, probs: Vec<f64>) -> Result<Self, ModelError> {
        let expected = table_len(n_outcomes, context.len());
        if probs.len() != expected {
            return Err(ModelError::WrongLength { context, expected, got: probs.len() });
        }
        if let Some(&value) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(ModelError::BadProbability { context, value });
        }
        Ok(Distribution { context, n_outcomes, probs })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// Dense probabilities in lexicographic tuple order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, tuple: &[usize]) -> Result<f64, ModelError> {
        Ok(self.probs[flat_index(&self.context, self.n_outcomes, tuple)?])
    }

    /// Iterates `(tuple, probability)` in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (tuple_of(i, self.n_outcomes, self.context.len()), p))
    }

    /// Marginal on the members of `subset`, which must lie in this context.
    pub fn marginal(&self, subset: &Context) -> Result<Distribution, ModelError> {
        let positions = subset
            .indices()
            .iter()
            .map(|&i| self.context.position_of_index(i))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ModelError::NotSubset(self.context.clone()))?;
        let mut probs = vec![0.0; table_len(self.n_outcomes, subset.len())];
        for (i, &p) in self.probs.iter().enumerate() {
            let tuple = tuple_of(i, self.n_outcomes, self.context.len());
            let mut j = 0;
            for &pos in &positions {
                j = j * self.n_outcomes + tuple[pos];
            }
            probs[j] += p;
        }
        Ok(Distribution { context: subset.clone(), n_outcomes: self.n_outcomes, probs })
    }
}

fn table_len(n_outcomes: usize, arity: usize) -> usize {
    n_outcomes.pow(arity as u32)
}

fn flat_index(context: &Context, n_outcomes: usize, tuple: &[usize]) -> Result<usize, ModelError> {
    if tuple.len() != context.len() {
        return Err(ModelError::TupleArity { context: context.clone(), expected: context.len(), got: tuple.len() });
    }
    let mut idx = 0;
    for &o in tuple {
        if o >= n_outcomes {
            return Err(ModelError::OutcomeOutOfRange(o));
        }
        idx = idx * n_outcomes + o;
    }
    Ok(idx)
}

/// Inverse of the flat index: the outcome tuple at lexicographic position `i`.
pub fn tuple_of(mut i: usize, n_outcomes: usize, arity: usize) -> Vec<usize> {
    let mut t = vec![0; arity];
    for slot in t.iter_mut().rev() {
        *slot = i % n_outcomes;
        i /= n_outcomes;
    }
    t
}

/// Outcome of the signalling check.
#[derive(Clone, Debug, PartialEq)]
pub struct SignallingReport {
    /// Largest L1 distance between two contexts' marginals on a shared face.
    pub max_discrepancy: f64,
    /// Context indices and shared face where the maximum was found.
    pub worst: Option<(usize, usize, Vec<Observable>)>,
    pub tol: f64,
    pub non_signalling: bool,
}

/// One distribution per maximal context of a valid scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    contexts: Vec<Context>,
    distributions: Vec<Distribution>,
}

impl EmpiricalModel {
    /// Matches the given distributions to the scenario's maximal contexts.
    pub fn new(scenario: MeasurementScenario, distributions: Vec<Distribution>) -> Result<Self, ModelError> {
        let contexts = scenario.maximal_contexts()?;
        let n_outcomes = scenario.outcomes().len();
        let mut slots: Vec<Option<Distribution>> = vec![None; contexts.len()];
        for d in distributions {
            let pos = contexts
                .iter()
                .position(|c| c == d.context())
                .ok_or_else(|| ModelError::UnknownContext(d.context().clone()))?;
            if d.n_outcomes != n_outcomes {
                return Err(ModelError::WrongLength {
                    context: d.context.clone(),
                    expected: table_len(n_outcomes, d.context.len()),
                    got: d.probs.len(),
                });
            }
            if slots[pos].is_some() {
                return Err(ModelError::DuplicateContext(d.context().clone()));
            }
            slots[pos] = Some(d);
        }
        let distributions = slots
            .into_iter()
            .zip(&contexts)
            .map(|(d, c)| d.ok_or_else(|| ModelError::MissingContext(c.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EmpiricalModel { scenario, contexts, distributions })
    }

    /// Builds a model from dense rows given in canonical context order.
    pub fn from_rows(scenario: MeasurementScenario, rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let contexts = scenario.maximal_contexts()?;
        let n = scenario.outcomes().len();
        if rows.len() != contexts.len() {
            let c = contexts.get(rows.len()).or(contexts.last()).cloned();
            return match c {
                Some(c) if rows.len() < contexts.len() => Err(ModelError::MissingContext(c)),
                Some(c) => Err(ModelError::UnknownContext(c)),
                None => Err(ModelError::NonBinary(n)),
            };
        }
        let distributions = contexts
            .into_iter()
            .zip(rows)
            .map(|(c, r)| Distribution::new(c, n, r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(scenario, distributions)
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.distributions
    }

    pub fn distribution(&self, context: &Context) -> Result<&Distribution, ModelError> {
        self.contexts
            .iter()
            .position(|c| c == context)
            .map(|i| &self.distributions[i])
            .ok_or_else(|| ModelError::UnknownContext(context.clone()))
    }

    /// Marginal of `context`'s distribution on `subset`.
    pub fn marginalize(&self, context: &Context, subset: &[Observable]) -> Result<Distribution, ModelError> {
        let mut idx = Vec::with_capacity(subset.len());
        for o in subset {
            let i = context
                .position(o)
                .map(|p| context.indices()[p])
                .ok_or_else(|| ModelError::NotSubset(context.clone()))?;
            idx.push(i);
        }
        idx.sort_unstable();
        idx.dedup();
        let sub = self.face(&idx);
        self.distribution(context)?.marginal(&sub)
    }

    /// Compares marginals of every pair of overlapping contexts on their
    /// shared face. Faces inside the intersection are implied: an L1 distance
    /// can only shrink under further marginalisation.
    pub fn signalling(&self, tol: f64) -> SignallingReport {
        let mut max_discrepancy = 0.0;
        let mut worst = None;
        for i in 0..self.contexts.len() {
            for j in (i + 1)..self.contexts.len() {
                let shared: Vec<usize> = self.contexts[i]
                    .indices()
                    .iter()
                    .copied()
                    .filter(|x| self.contexts[j].indices().contains(x))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let face = self.face(&shared);
                let (Ok(a), Ok(b)) = (self.distributions[i].marginal(&face), self.distributions[j].marginal(&face))
                else {
                    continue;
                };
                let d: f64 = a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum();
                if d > max_discrepancy || worst.is_none() {
                    if d > max_discrepancy {
                        max_discrepancy = d;
                    }
                    worst = Some((i, j, face.members().to_vec()));
                }
            }
        }
        SignallingReport { max_discrepancy, worst, tol, non_signalling: max_discrepancy <= tol }
    }

    pub fn is_non_signalling(&self, tol: f64) -> bool {
        self.signalling(tol).non_signalling
    }

    /// True iff every distribution is invariant under swapping the two
    /// outcome labels in all coordinates at once.
    pub fn is_outcome_symmetric(&self, tol: f64) -> Result<bool, ModelError> {
        self.binary()?;
        Ok(self.distributions.iter().all(|d| {
            let len = d.probs.len();
            // flipping every binary digit maps index i to len-1-i
            (0..len).all(|i| (d.probs[i] - d.probs[len - 1 - i]).abs() <= tol)
        }))
    }

    /// Expected ±1 value of `observable` measured in `context`.
    pub fn expectation(&self, context: &Context, observable: &Observable) -> Result<f64, ModelError> {
        self.binary()?;
        let pos = context.position(observable).ok_or_else(|| ModelError::NotMember {
            context: context.clone(),
            observable: observable.clone(),
        })?;
        let d = self.distribution(context)?;
        Ok(d.entries().map(|(t, p)| self.scenario.sign(t[pos]) * p).sum())
    }

    /// Expected product of the two ±1 values of a two-member context.
    pub fn correlation(&self, context: &Context) -> Result<f64, ModelError> {
        self.binary()?;
        if context.len() != 2 {
            return Err(ModelError::ArityNotTwo(context.clone()));
        }
        let d = self.distribution(context)?;
        Ok(d.entries()
            .map(|(t, p)| self.scenario.sign(t[0]) * self.scenario.sign(t[1]) * p)
            .sum())
    }

    fn binary(&self) -> Result<usize, ModelError> {
        match self.scenario.outcomes().len() {
            2 => Ok(2),
            n => Err(ModelError::NonBinary(n)),
        }
    }

    fn face(&self, idx: &[usize]) -> Context {
        Context::from_parts(
            idx.to_vec(),
            idx.iter().map(|&i| self.scenario.observables()[i].clone()).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;

    #[test]
    fn quarter_box_marginal_on_a1() {
        let m = quarter_box();
        let ctx = m.contexts()[0].clone();
        let marg = m.marginalize(&ctx, &["a1".into()]).unwrap();
        assert_eq!(marg.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_on_full_context_is_identity() {
        let m = quarter_box();
        for ctx in m.contexts() {
            let full = m.marginalize(ctx, ctx.members()).unwrap();
            assert_eq!(&full, m.distribution(ctx).unwrap());
        }
    }

    #[test]
    fn point_mass_marginal() {
        let m = deterministic_aa();
        let ctx = m.contexts()[0].clone();
        let first = ctx.members()[0].clone();
        assert_eq!(m.marginalize(&ctx, &[first]).unwrap().probs(), &[1.0, 0.0]);
    }

    #[test]
    fn marginal_outside_context_fails() {
        let m = quarter_box();
        let ctx = m.contexts()[0].clone();
        assert!(matches!(m.marginalize(&ctx, &["a2".into()]), Err(ModelError::NotSubset(_))));
    }

    #[test]
    fn signalling_checks() {
        assert_eq!(quarter_box().signalling(1e-9).max_discrepancy, 0.0);
        let t = survey();
        let r = t.signalling(1e-9);
        assert!(r.non_signalling, "{r:?}");

        // a1 marginal {0.9, 0.1} in (a1,b1) but {0.5, 0.5} in (a1,b2)
        let m = EmpiricalModel::from_rows(
            chsh(),
            vec![
                vec![0.45, 0.45, 0.05, 0.05],
                vec![0.25, 0.25, 0.25, 0.25],
                vec![0.25, 0.25, 0.25, 0.25],
                vec![0.25, 0.25, 0.25, 0.25],
            ],
        )
        .unwrap();
        let r = m.signalling(1e-9);
        assert!(!r.non_signalling);
        assert!((r.max_discrepancy - 0.8).abs() < 1e-12);
    }

    #[test]
    fn symmetry_checks() {
        assert!(survey().is_outcome_symmetric(1e-12).unwrap());
        assert!(pr_box().is_outcome_symmetric(0.0).unwrap());
        assert!(!deterministic_aa().is_outcome_symmetric(1e-9).unwrap());
    }

    #[test]
    fn non_binary_symmetry_is_an_error() {
        let s = MeasurementScenario::new(["x"], [["x"]], ["a", "b", "c"]);
        let m = EmpiricalModel::from_rows(s, vec![vec![0.2, 0.3, 0.5]]).unwrap();
        assert_eq!(m.is_outcome_symmetric(1e-9), Err(ModelError::NonBinary(3)));
    }

    #[test]
    fn expectations() {
        let t = survey();
        let ctx = t.contexts()[0].clone();
        let first = ctx.members()[0].clone();
        assert!(t.expectation(&ctx, &first).unwrap().abs() < 1e-15);

        let d = deterministic_aa();
        let ctx = d.contexts()[0].clone();
        assert_eq!(d.expectation(&ctx, &ctx.members()[1]).unwrap(), 1.0);

        let u = uniform_product();
        let ctx = u.contexts()[2].clone();
        assert_eq!(u.expectation(&ctx, &ctx.members()[0]).unwrap(), 0.0);

        assert!(matches!(u.expectation(&ctx, &"nope".into()), Err(ModelError::NotMember { .. })));
    }

    #[test]
    fn correlations() {
        let t = survey();
        let c: Vec<f64> = t.contexts().iter().map(|c| t.correlation(c).unwrap()).collect();
        let expected = [0.610, -0.822, 0.382, 0.378];
        for (got, want) in c.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let f = quarter_box();
        assert_eq!(f.correlation(&f.contexts()[0]).unwrap(), 1.0);
    }

    #[test]
    fn correlation_needs_pairs() {
        let s = MeasurementScenario::new(["x", "y", "z"], [["x", "y", "z"]], ["0", "1"]);
        let m = EmpiricalModel::from_rows(s, vec![vec![0.125; 8]]).unwrap();
        assert!(matches!(m.correlation(&m.contexts()[0]), Err(ModelError::ArityNotTwo(_))));
    }

    #[test]
    fn rounding_repair_spreads_deficit() {
        let ctx = chsh().maximal_contexts().unwrap().remove(0);
        let (d, deficit) =
            Distribution::with_rounding_repair(ctx.clone(), 2, vec![0.402, 0.097, 0.097, 0.402], 5e-3).unwrap();
        assert!((deficit - 0.002).abs() < 1e-12);
        assert!((d.probs()[0] - 0.4025).abs() < 1e-12);
        assert!(Distribution::with_rounding_repair(ctx.clone(), 2, vec![0.4, 0.1, 0.1, 0.3], 5e-3).is_err());
        assert!(Distribution::new(ctx, 2, vec![0.402, 0.097, 0.097, 0.402]).is_err());
    }

    #[test]
    fn sparse_entries_default_to_zero() {
        let ctx = chsh().maximal_contexts().unwrap().remove(0);
        let d = Distribution::from_entries(ctx, 2, [(vec![0, 0], 0.5), (vec![1, 1], 0.5)]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(d.prob(&[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn model_construction_errors() {
        let s = chsh();
        let ctx = s.maximal_contexts().unwrap();
        let d = Distribution::new(ctx[0].clone(), 2, vec![0.25; 4]).unwrap();
        assert!(matches!(
            EmpiricalModel::new(s.clone(), vec![d.clone(), d.clone()]),
            Err(ModelError::DuplicateContext(_))
        ));
        assert!(matches!(EmpiricalModel::new(s, vec![d]), Err(ModelError::MissingContext(_))));
        assert!(matches!(
            Distribution::new(ctx[0].clone(), 2, vec![-0.25, 0.5, 0.5, 0.25]),
            Err(ModelError::BadProbability { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn marginalisation_is_associative(raw in proptest::collection::vec(0.0f64..1.0, 8)) {
                let s = MeasurementScenario::new(["x", "y", "z"], [["x", "y", "z"]], ["0", "1"]);
                let total: f64 = raw.iter().sum::<f64>() + 1e-3;
                let row: Vec<f64> = raw.iter().map(|p| (p + 1e-3 / 8.0) / total).collect();
                let m = EmpiricalModel::from_rows(s.clone(), vec![row]).unwrap();
                let ctx = m.contexts()[0].clone();
                let xz = m.marginalize(&ctx, &["x".into(), "z".into()]).unwrap();
                let x_via = xz.marginal(&m.face(&[0])).unwrap();
                let x_direct = m.marginalize(&ctx, &["x".into()]).unwrap();
                for (a, b) in x_via.probs().iter().zip(x_direct.probs()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }

            #[test]
            fn symmetric_rank4_models_are_non_signalling(model in arb_symmetric_chsh()) {
                prop_assert!(model.is_outcome_symmetric(0.0).unwrap());
                let r = model.signalling(1e-12);
                prop_assert!(r.max_discrepancy <= 1e-15, "{:?}", r);
                for ctx in model.contexts() {
                    for o in ctx.members() {
                        let m = model.marginalize(ctx, core::slice::from_ref(o)).unwrap();
                        prop_assert!((m.probs()[0] - 0.5).abs() <= 1e-15);
                        prop_assert!(model.expectation(ctx, o).unwrap().abs() <= 1e-15);
                    }
                }
            }
        }
    }
}
