//! Sheaf-theoretic contextuality.
//!
//! A global assignment fixes one outcome for every observable. Its restriction
//! to a context is a joint outcome, so a distribution over assignments pushes
//! forward to one distribution per context. The model is noncontextual iff
//! some distribution over assignments reproduces every context exactly.
//!
//! The contextual fraction is `1 − w*`, where `w*` is the largest total mass
//! of a sub-distribution on assignments whose pushforwards stay below the
//! empirical rows. Both questions are linear programs over the 0/1 incidence
//! matrix between (context, joint outcome) rows and assignments.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::empirical::{tuple_of, EmpiricalModel, SignallingReport};
use crate::linprog::{self, LpError, LpProblem, Relation, Status};
use crate::scenario::{MeasurementScenario, ScenarioError};
use crate::DEFAULT_SIGNALLING_TOL;

/// Largest number of global assignments we enumerate.
pub const ASSIGNMENT_CAP: usize = 65_536;
/// Tolerance on the reported duality gap and on dual feasibility.
pub const CERTIFICATE_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SheafError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{outcomes}^{observables} global assignments exceed the cap of {ASSIGNMENT_CAP}")]
    CapExceeded { outcomes: usize, observables: usize },
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("linear program ended {0:?}, expected an optimum")]
    UnexpectedStatus(Status),
    #[error("model signals (discrepancy {discrepancy:e} > {tol:e}); exact global sections cannot exist")]
    Signalling { discrepancy: f64, tol: f64 },
    #[error("dual certificate rejected: {0}")]
    Certificate(&'static str),
}

/// One outcome index per observable, in scenario order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalAssignment {
    values: Vec<usize>,
}

impl GlobalAssignment {
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Restriction to the observables at `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.values[i]).collect()
    }
}

/// All `|O|^|X|` assignments in lexicographic order (first observable most
/// significant).
pub fn global_assignments(scenario: &MeasurementScenario) -> Result<Vec<GlobalAssignment>, SheafError> {
    scenario.ensure_valid()?;
    let outcomes = scenario.outcomes().len();
    let observables = scenario.observables().len();
    let count = (outcomes as u128)
        .checked_pow(observables as u32)
        .filter(|&c| c <= ASSIGNMENT_CAP as u128)
        .ok_or(SheafError::CapExceeded { outcomes, observables })? as usize;
    Ok((0..count)
        .map(|i| GlobalAssignment { values: tuple_of(i, outcomes, observables) })
        .collect())
}

/// Rows are (context index, joint outcome index) pairs in canonical order;
/// columns are global assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceSystem {
    pub rows: Vec<(usize, usize)>,
    pub columns: Vec<GlobalAssignment>,
    /// `matrix[r][c] == 1` iff assignment `c` restricts to row `r`'s outcome.
    pub matrix: Vec<Vec<u8>>,
    pub rhs: Vec<f64>,
}

impl IncidenceSystem {
    pub fn build(model: &EmpiricalModel) -> Result<Self, SheafError> {
        let scenario = model.scenario();
        let columns = global_assignments(scenario)?;
        let n_out = scenario.outcomes().len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut matrix = Vec::new();
        for (ci, (ctx, dist)) in model.contexts().iter().zip(model.distributions()).enumerate() {
            let row_base = matrix.len();
            for (oi, &p) in dist.probs().iter().enumerate() {
                rows.push((ci, oi));
                rhs.push(p);
                matrix.push(vec![0u8; columns.len()]);
            }
            for (col, g) in columns.iter().enumerate() {
                let oi = g.restrict(ctx.indices()).iter().fold(0, |acc, &o| acc * n_out + o);
                matrix[row_base + oi][col] = 1;
            }
        }
        Ok(IncidenceSystem { rows, columns, matrix, rhs })
    }

    fn lp_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.matrix.iter().map(|r| r.iter().map(|&v| v as f64).collect())
    }

    /// Pushforward of a weight vector on assignments to the rows.
    pub fn pushforward(&self, weights: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|r| r.iter().zip(weights).filter(|(a, _)| **a == 1).map(|(_, w)| w).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfResult {
    pub cf: f64,
    /// Largest noncontextual mass `w*`.
    pub ncf_weight: f64,
    /// Optimal sub-distribution on assignments, aligned with `system.columns`.
    pub witness: Vec<f64>,
    /// Row multipliers `y ≥ 0` with `Σ_{rows hit by g} y ≥ 1` for every
    /// assignment `g`; their value `rhsᵀy` bounds `w*` from above.
    pub dual_certificate: Vec<f64>,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub signalling: SignallingReport,
    /// False when the model signals beyond tolerance; the number is still
    /// well defined but no longer measures contextuality alone.
    pub reliable: bool,
    pub system: IncidenceSystem,
}

pub fn contextual_fraction(model: &EmpiricalModel) -> Result<CfResult, SheafError> {
    contextual_fraction_with_tol(model, DEFAULT_SIGNALLING_TOL)
}

pub fn contextual_fraction_with_tol(model: &EmpiricalModel, signalling_tol: f64) -> Result<CfResult, SheafError> {
    let system = IncidenceSystem::build(model)?;
    if contexts_disjoint(model) {
        return Ok(product_result(model, system, signalling_tol));
    }
    let mut lp = LpProblem::maximize(vec![1.0; system.columns.len()]);
    for (row, &b) in system.lp_rows().zip(&system.rhs) {
        lp.push(row, Relation::Le, b);
    }
    let sol = linprog::solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(SheafError::UnexpectedStatus(sol.status));
    }
    verify_certificate(&system, &sol.dual)?;
    let duality_gap = sol.duality_gap();
    if duality_gap > CERTIFICATE_TOL {
        return Err(SheafError::Certificate("duality gap above tolerance"));
    }
    let signalling = model.signalling(signalling_tol);
    let ncf_weight = sol.objective_value;
    Ok(CfResult {
        cf: (1.0 - ncf_weight).clamp(0.0, 1.0),
        ncf_weight,
        witness: sol.primal,
        dual_certificate: sol.dual,
        dual_objective: sol.dual_objective,
        duality_gap,
        reliable: signalling.non_signalling,
        signalling,
        system,
    })
}

fn contexts_disjoint(model: &EmpiricalModel) -> bool {
    let ctx = model.contexts();
    ctx.iter().enumerate().all(|(i, a)| ctx[..i].iter().all(|b| a.indices().iter().all(|x| !b.indices().contains(x))))
}

/// Contexts sharing no observable: the product of the context distributions
/// is a global distribution reproducing every row, so `cf = 0` exactly.
fn product_result(model: &EmpiricalModel, system: IncidenceSystem, signalling_tol: f64) -> CfResult {
    let n_out = model.scenario().outcomes().len();
    let witness: Vec<f64> = system
        .columns
        .iter()
        .map(|g| {
            model
                .contexts()
                .iter()
                .zip(model.distributions())
                .map(|(ctx, d)| d.probs()[g.restrict(ctx.indices()).iter().fold(0, |acc, &o| acc * n_out + o)])
                .product()
        })
        .collect();
    // every assignment hits exactly one row of the first block
    let first = model.distributions()[0].probs().len();
    let dual_certificate: Vec<f64> = (0..system.rows.len()).map(|r| if r < first { 1.0 } else { 0.0 }).collect();
    let dual_objective: f64 = system.rhs[..first].iter().sum();
    let signalling = model.signalling(signalling_tol);
    CfResult {
        cf: 0.0,
        ncf_weight: 1.0,
        witness,
        dual_certificate,
        dual_objective,
        duality_gap: (1.0 - dual_objective).abs(),
        reliable: signalling.non_signalling,
        signalling,
        system,
    }
}

fn verify_certificate(system: &IncidenceSystem, y: &[f64]) -> Result<(), SheafError> {
    if y.iter().any(|&v| v < -CERTIFICATE_TOL) {
        return Err(SheafError::Certificate("negative multiplier on an inequality row"));
    }
    for col in 0..system.columns.len() {
        let cover: f64 = system.matrix.iter().zip(y).filter(|(r, _)| r[col] == 1).map(|(_, v)| v).sum();
        if cover < 1.0 - CERTIFICATE_TOL {
            return Err(SheafError::Certificate("an assignment is not covered"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoncontextualityVerdict {
    pub noncontextual: bool,
    /// Distribution on assignments reproducing the model, when one exists.
    pub witness: Option<Vec<f64>>,
    /// Farkas multipliers on the equality rows when none exists.
    pub infeasibility_certificate: Option<Vec<f64>>,
}

/// Feasibility test for an exact global distribution. Refuses models that
/// signal beyond `tol`, since no global distribution can reproduce them.
pub fn is_noncontextual(model: &EmpiricalModel, tol: f64) -> Result<NoncontextualityVerdict, SheafError> {
    let report = model.signalling(tol);
    if !report.non_signalling {
        return Err(SheafError::Signalling { discrepancy: report.max_discrepancy, tol });
    }
    let system = IncidenceSystem::build(model)?;
    let mut lp = LpProblem::maximize(vec![0.0; system.columns.len()]);
    for (row, &b) in system.lp_rows().zip(&system.rhs) {
        lp.push(row, Relation::Eq, b);
    }
    let sol = linprog::solve(&lp)?;
    match sol.status {
        Status::Optimal => Ok(NoncontextualityVerdict {
            noncontextual: true,
            witness: Some(sol.primal),
            infeasibility_certificate: None,
        }),
        Status::Infeasible => Ok(NoncontextualityVerdict {
            noncontextual: false,
            witness: None,
            infeasibility_certificate: Some(sol.dual),
        }),
        s => Err(SheafError::UnexpectedStatus(s)),
    }
}
