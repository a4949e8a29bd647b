//! Measurement scenarios: observables, a simplicial complex of jointly
//! measurable subsets, and an outcome set.
//!
//! Scenarios are usually declared by their maximal faces only. A declaration
//! whose faces form an antichain is completed downward before validation; a
//! declaration that lists some non-maximal faces is taken as an explicit
//! complex and must already be downward closed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Identifier of a single observable, e.g. `(it1,small)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observable(String);

impl Observable {
    pub fn new(id: impl Into<String>) -> Self {
        Observable(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Observable {
    fn from(s: &str) -> Self {
        Observable::new(s)
    }
}

impl From<String> for Observable {
    fn from(s: String) -> Self {
        Observable(s)
    }
}

/// A maximal face of the complex. Members follow the scenario's declaration
/// order, and joint outcomes over the context are tuples in that order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    indices: Vec<usize>,
    members: Vec<Observable>,
}

impl Context {
    pub(crate) fn from_parts(indices: Vec<usize>, members: Vec<Observable>) -> Self {
        Context { indices, members }
    }

    pub fn members(&self) -> &[Observable] {
        &self.members
    }

    /// Positions of the members in the scenario's observable list.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Position of `observable` inside this context, if it is a member.
    pub fn position(&self, observable: &Observable) -> Option<usize> {
        self.members.iter().position(|m| m == observable)
    }

    pub fn position_of_index(&self, index: usize) -> Option<usize> {
        self.indices.iter().position(|&i| i == index)
    }

    /// True when both contexts contain the same observables, in any order.
    pub fn same_members(&self, names: &[&str]) -> bool {
        names.len() == self.members.len()
            && names.iter().all(|n| self.members.iter().any(|m| m.as_str() == *n))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

/// One invariant violation found by [`MeasurementScenario::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyObservableId,
    DuplicateObservable(Observable),
    UnknownObservable { face: usize, observable: Observable },
    RepeatedInFace { face: usize, observable: Observable },
    EmptyFace { face: usize },
    Uncovered(Observable),
    MissingSubface { face: Vec<Observable>, missing: Vec<Observable> },
    TooFewOutcomes(usize),
    DuplicateOutcome(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn set(f: &mut fmt::Formatter<'_>, obs: &[Observable]) -> fmt::Result {
            f.write_str("{")?;
            for (i, o) in obs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{o}")?;
            }
            f.write_str("}")
        }
        match self {
            Violation::EmptyObservableId => f.write_str("observable with empty identifier"),
            Violation::DuplicateObservable(o) => write!(f, "observable {o} declared twice"),
            Violation::UnknownObservable { face, observable } => {
                write!(f, "face #{face} references undeclared observable {observable}")
            }
            Violation::RepeatedInFace { face, observable } => {
                write!(f, "face #{face} lists {observable} more than once")
            }
            Violation::EmptyFace { face } => write!(f, "face #{face} is empty"),
            Violation::Uncovered(o) => write!(f, "observable {o} is not covered by any face"),
            Violation::MissingSubface { face, missing } => {
                f.write_str("closure violation: face ")?;
                set(f, face)?;
                f.write_str(" is declared but its subset ")?;
                set(f, missing)?;
                f.write_str(" is not")
            }
            Violation::TooFewOutcomes(n) => write!(f, "need at least 2 outcomes, got {n}"),
            Violation::DuplicateOutcome(o) => write!(f, "outcome {o:?} declared twice"),
        }
    }
}

/// Result of validating a scenario. Empty iff the scenario is well formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),
}

/// Cyclic arrangement of a scenario: consecutive observables of `ordering`
/// (wrapping around) are exactly the contexts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicStructure {
    ordering: Vec<usize>,
    observables: Vec<Observable>,
}

impl CyclicStructure {
    pub fn rank(&self) -> usize {
        self.ordering.len()
    }

    pub fn ordering(&self) -> &[Observable] {
        &self.observables
    }

    pub fn indices(&self) -> &[usize] {
        &self.ordering
    }
}

/// The triplet of observables, faces and outcomes.
///
/// Construction never fails; call [`validate`](Self::validate) for a report.
/// Operations that need a well-formed scenario return [`ScenarioError`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementScenario {
    observables: Vec<Observable>,
    faces: Vec<Vec<Observable>>,
    outcomes: Vec<String>,
}

impl MeasurementScenario {
    pub fn new<O, F, S>(observables: O, faces: F, outcomes: S) -> Self
    where
        O: IntoIterator,
        O::Item: Into<Observable>,
        F: IntoIterator,
        F::Item: IntoIterator,
        <F::Item as IntoIterator>::Item: Into<Observable>,
        S: IntoIterator,
        S::Item: Into<String>,
    {
        MeasurementScenario {
            observables: observables.into_iter().map(Into::into).collect(),
            faces: faces
                .into_iter()
                .map(|f| f.into_iter().map(Into::into).collect())
                .collect(),
            outcomes: outcomes.into_iter().map(Into::into).collect(),
        }
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    /// Faces exactly as declared.
    pub fn faces(&self) -> &[Vec<Observable>] {
        &self.faces
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn observable_index(&self, id: &str) -> Option<usize> {
        self.observables.iter().position(|o| o.as_str() == id)
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    /// Sign of an outcome under the ±1 encoding: the first declared outcome
    /// is +1, every other outcome −1.
    pub fn sign(&self, outcome: usize) -> f64 {
        if outcome == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Returns the downward closure of the declared faces (every non-empty
    /// subset of every face), in canonical order.
    pub fn complete(&self) -> Self {
        let mut closure: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut unresolved: Vec<Vec<Observable>> = Vec::new();
        for face in &self.faces {
            match self.resolve(face) {
                Some(idx) => {
                    for sub in nonempty_subsets(&idx) {
                        closure.insert(sub);
                    }
                }
                None => unresolved.push(face.clone()),
            }
        }
        let mut faces: Vec<Vec<Observable>> = closure
            .into_iter()
            .map(|f| f.into_iter().map(|i| self.observables[i].clone()).collect())
            .collect();
        // faces we cannot index are kept so validation still reports them
        faces.extend(unresolved);
        MeasurementScenario {
            observables: self.observables.clone(),
            faces,
            outcomes: self.outcomes.clone(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut seen = BTreeSet::new();
        for o in &self.observables {
            if o.as_str().is_empty() {
                violations.push(Violation::EmptyObservableId);
            } else if !seen.insert(o.as_str()) {
                violations.push(Violation::DuplicateObservable(o.clone()));
            }
        }

        let mut resolved: Vec<Vec<usize>> = Vec::new();
        for (fi, face) in self.faces.iter().enumerate() {
            if face.is_empty() {
                violations.push(Violation::EmptyFace { face: fi });
                continue;
            }
            let mut idx = Vec::with_capacity(face.len());
            let mut ok = true;
            for o in face {
                match self.observable_index(o.as_str()) {
                    Some(i) if idx.contains(&i) => {
                        violations.push(Violation::RepeatedInFace { face: fi, observable: o.clone() });
                        ok = false;
                    }
                    Some(i) => idx.push(i),
                    None => {
                        violations.push(Violation::UnknownObservable { face: fi, observable: o.clone() });
                        ok = false;
                    }
                }
            }
            if ok {
                idx.sort_unstable();
                resolved.push(idx);
            }
        }

        for (i, o) in self.observables.iter().enumerate() {
            if !resolved.iter().any(|f| f.contains(&i)) {
                violations.push(Violation::Uncovered(o.clone()));
            }
        }

        // explicit complexes (non-antichain declarations) must be closed
        let declared: BTreeSet<Vec<usize>> = resolved.iter().cloned().collect();
        if !is_antichain(&declared) {
            for face in &declared {
                for sub in nonempty_subsets(face) {
                    if sub.len() < face.len() && !declared.contains(&sub) {
                        violations.push(Violation::MissingSubface {
                            face: self.names(face),
                            missing: self.names(&sub),
                        });
                    }
                }
            }
        }

        let mut distinct = BTreeSet::new();
        for o in &self.outcomes {
            if !distinct.insert(o.as_str()) {
                violations.push(Violation::DuplicateOutcome(o.clone()));
            }
        }
        if distinct.len() < 2 {
            violations.push(Violation::TooFewOutcomes(distinct.len()));
        }

        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), ScenarioError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(report))
        }
    }

    /// All maximal faces, lexicographic by observable declaration order.
    pub fn maximal_contexts(&self) -> Result<Vec<Context>, ScenarioError> {
        self.ensure_valid()?;
        let faces: BTreeSet<Vec<usize>> = self
            .faces
            .iter()
            .filter_map(|f| self.resolve(f))
            .collect();
        let maximal = faces
            .iter()
            .filter(|f| !faces.iter().any(|g| g.len() > f.len() && is_subset(f, g)))
            .map(|f| Context {
                indices: f.clone(),
                members: self.names(f),
            })
            .collect();
        Ok(maximal)
    }

    /// Detects a single-cycle arrangement where every context has two members
    /// and every observable sits in exactly two contexts.
    ///
    /// The ordering starts at the first declared observable and steps toward
    /// its lower-indexed neighbour.
    pub fn cyclic_structure(&self) -> Result<Option<CyclicStructure>, ScenarioError> {
        let contexts = self.maximal_contexts()?;
        let n = self.observables.len();
        if contexts.len() != n || n < 3 || contexts.iter().any(|c| c.len() != 2) {
            return Ok(None);
        }
        let mut neighbours: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for c in &contexts {
            let (a, b) = (c.indices[0], c.indices[1]);
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        if neighbours.iter().any(|nb| nb.len() != 2) {
            return Ok(None);
        }
        let mut ordering = Vec::with_capacity(n);
        let mut prev = 0;
        let mut current = *neighbours[0].iter().min().expect("two neighbours");
        ordering.push(0);
        while current != 0 {
            if ordering.len() == n {
                return Ok(None);
            }
            ordering.push(current);
            let next = if neighbours[current][0] == prev {
                neighbours[current][1]
            } else {
                neighbours[current][0]
            };
            prev = current;
            current = next;
        }
        if ordering.len() != n {
            // more than one cycle
            return Ok(None);
        }
        Ok(Some(CyclicStructure {
            observables: self.names(&ordering),
            ordering,
        }))
    }

    /// Finds the maximal context whose members are exactly `names`.
    pub fn context_by_names(&self, names: &[&str]) -> Result<Option<Context>, ScenarioError> {
        Ok(self.maximal_contexts()?.into_iter().find(|c| c.same_members(names)))
    }

    fn resolve(&self, face: &[Observable]) -> Option<Vec<usize>> {
        let mut idx = face
            .iter()
            .map(|o| self.observable_index(o.as_str()))
            .collect::<Option<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            None
        } else {
            Some(idx)
        }
    }

    fn names(&self, idx: &[usize]) -> Vec<Observable> {
        idx.iter().map(|&i| self.observables[i].clone()).collect()
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.contains(x))
}

fn is_antichain(faces: &BTreeSet<Vec<usize>>) -> bool {
    faces
        .iter()
        .all(|f| !faces.iter().any(|g| g.len() > f.len() && is_subset(f, g)))
}

/// Every non-empty subset of a sorted index set, each kept sorted.
fn nonempty_subsets(face: &[usize]) -> Vec<Vec<usize>> {
    let k = face.len();
    (1u64..(1u64 << k))
        .map(|mask| {
            face.iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect()
        })
        .collect()
}
