//! Dense two-phase simplex.
//!
//! Solves `max cᵀx` subject to rows `aᵢ·x {≤,=,≥} bᵢ` and `x ≥ 0`. Pivoting
//! uses Bland's rule (lowest eligible index enters, ties on the ratio test go
//! to the lowest basic index), so the pivot sequence is fully determined by
//! the input. Sized for small problems: at most [`MAX_DIM`] rows and columns.
//!
//! Every optimal solution carries dual values `y` (`y ≥ 0` on `≤` rows,
//! `y ≤ 0` on `≥` rows, free on `=` rows, `Aᵀy ≥ c`) and is checked for primal
//! feasibility and a zero duality gap before it is returned.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

pub const MAX_DIM: usize = 1024;
pub const PIVOT_TOL: f64 = 1e-10;
/// Phase one declares infeasibility above this artificial mass.
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const DUALITY_GAP_TOL: f64 = 1e-7;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LpError {
    #[error("problem too large: {rows} rows x {cols} columns (cap {MAX_DIM})")]
    TooLarge { rows: usize, cols: usize },
    #[error("row {row} has {got} coefficients, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, got: usize },
    #[error("non-finite coefficient in the problem data")]
    NotFinite,
    #[error("no convergence after {0} pivots")]
    IterationLimit(usize),
    #[error("numerical breakdown: {0}")]
    Breakdown(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LpProblem { objective, rows: Vec::new(), relations: Vec::new(), rhs: Vec::new() }
    }

    pub fn constraint(mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.push(coeffs, relation, rhs);
        self
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn check(&self) -> Result<(), LpError> {
        let (rows, cols) = (self.rows.len(), self.objective.len());
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(LpError::TooLarge { rows, cols });
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LpError::DimensionMismatch { row: i, expected: cols, got: r.len() });
            }
        }
        let all = self.objective.iter().chain(self.rhs.iter()).chain(self.rows.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(LpError::NotFinite);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    /// Optimal point; empty unless optimal.
    pub primal: Vec<f64>,
    /// Row multipliers. For an optimal solution these solve the dual; for an
    /// infeasible one they are a Farkas certificate: `yᵀA` is sign-compatible
    /// with every row relation and `x ≥ 0` while `yᵀb < 0`.
    pub dual: Vec<f64>,
    pub objective_value: f64,
    /// `bᵀy` for the reported dual (optimal solutions only).
    pub dual_objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.objective_value - self.dual_objective).abs()
    }
}

struct Tableau {
    m: usize,
    cols: usize,
    /// `m` rows of `cols + 1` entries, rhs last.
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        self.t[row * w + col] = 1.0;
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * self.t[row * w + j];
                }
                self.t[i * w + col] = 0.0;
            }
        }
        let f = reduced[col];
        if f != 0.0 {
            for j in 0..w {
                reduced[j] -= f * self.t[row * w + j];
            }
            reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// `reduced[j] = c_j − Σ c_{B_i} T_ij`, with `reduced[cols]` holding
    /// minus the current objective.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.cols + 1];
        r[..self.cols].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, rj) in r.iter_mut().enumerate() {
                    *rj -= cb * self.at(i, j);
                }
            }
        }
        r
    }

    /// Runs Bland-rule pivots until optimal. Returns false if unbounded.
    fn optimise(&mut self, reduced: &mut [f64], allowed: &[bool]) -> Result<bool, LpError> {
        loop {
            if self.pivots > MAX_ITERATIONS {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let Some(col) = (0..self.cols).find(|&j| allowed[j] && reduced[j] > PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(false),
                Some((row, _)) => self.pivot(row, col, reduced),
            }
        }
    }
}

/// Solves the problem with the two-phase simplex method.
pub fn solve(p: &LpProblem) -> Result<LpSolution, LpError> {
    p.check()?;
    let n = p.n_vars();
    let m = p.n_rows();

    // normalise to b >= 0
    let mut sign = vec![1.0; m];
    let mut rel = p.relations.clone();
    for i in 0..m {
        if p.rhs[i] < 0.0 {
            sign[i] = -1.0;
            rel[i] = match rel[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // columns: structural | slack-or-surplus per inequality | artificial per ≥/= row
    let mut aux_col = vec![usize::MAX; m];
    let mut cols = n;
    for i in 0..m {
        if rel[i] != Relation::Eq {
            aux_col[i] = cols;
            cols += 1;
        }
    }
    let mut art_col = vec![usize::MAX; m];
    let first_art = cols;
    for i in 0..m {
        if rel[i] != Relation::Le {
            art_col[i] = cols;
            cols += 1;
        }
    }

    let w = cols + 1;
    let mut t = vec![0.0; m * w];
    let mut basis = vec![0; m];
    for i in 0..m {
        for j in 0..n {
            t[i * w + j] = sign[i] * p.rows[i][j];
        }
        t[i * w + cols] = sign[i] * p.rhs[i];
        match rel[i] {
            Relation::Le => {
                t[i * w + aux_col[i]] = 1.0;
                basis[i] = aux_col[i];
            }
            Relation::Ge => {
                t[i * w + aux_col[i]] = -1.0;
                t[i * w + art_col[i]] = 1.0;
                basis[i] = art_col[i];
            }
            Relation::Eq => {
                t[i * w + art_col[i]] = 1.0;
                basis[i] = art_col[i];
            }
        }
    }
    let mut tab = Tableau { m, cols, t, basis, pivots: 0 };
    // column whose reduced cost reads off row i's multiplier
    let unit_col: Vec<usize> = (0..m)
        .map(|i| if rel[i] == Relation::Le { aux_col[i] } else { art_col[i] })
        .collect();
    let dual_from = |cost: &[f64], reduced: &[f64]| -> Vec<f64> {
        (0..m).map(|i| (cost[unit_col[i]] - reduced[unit_col[i]]) * sign[i]).collect()
    };

    // phase one
    if first_art < cols {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        let mut reduced = tab.reduced_costs(&cost);
        let allowed = vec![true; cols];
        if !tab.optimise(&mut reduced, &allowed)? {
            return Err(LpError::Breakdown("phase one reported unbounded"));
        }
        let residual: f64 = (0..m).filter(|&i| tab.basis[i] >= first_art).map(|i| tab.rhs(i)).sum();
        if residual > FEASIBILITY_TOL {
            let dual = dual_from(&cost, &reduced);
            return Ok(LpSolution {
                status: Status::Infeasible,
                primal: Vec::new(),
                dual,
                objective_value: f64::NAN,
                dual_objective: f64::NAN,
                pivots: tab.pivots,
            });
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if tab.basis[i] < first_art {
                continue;
            }
            if let Some(j) = (0..first_art).find(|&j| tab.at(i, j).abs() > PIVOT_TOL) {
                tab.pivot(i, j, &mut reduced);
            }
            // otherwise the row is redundant and its artificial stays at zero
        }
    }

    // phase two
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&p.objective);
    let mut reduced = tab.reduced_costs(&cost);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
    if !tab.optimise(&mut reduced, &allowed)? {
        return Ok(LpSolution {
            status: Status::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            objective_value: f64::INFINITY,
            dual_objective: f64::NAN,
            pivots: tab.pivots,
        });
    }

    let mut primal = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            primal[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let dual = dual_from(&cost, &reduced);
    let objective_value: f64 = p.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    let dual_objective: f64 = p.rhs.iter().zip(&dual).map(|(b, y)| b * y).sum();

    let b_norm = p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = FEASIBILITY_TOL * (1.0 + b_norm);
    for i in 0..m {
        let lhs: f64 = p.rows[i].iter().zip(&primal).map(|(a, x)| a * x).sum();
        let ok = match p.relations[i] {
            Relation::Le => lhs <= p.rhs[i] + tol,
            Relation::Ge => lhs >= p.rhs[i] - tol,
            Relation::Eq => (lhs - p.rhs[i]).abs() <= tol,
        };
        if !ok {
            return Err(LpError::Breakdown("primal residual above tolerance"));
        }
    }
    if (objective_value - dual_objective).abs() > DUALITY_GAP_TOL {
        return Err(LpError::Breakdown("duality gap above tolerance"));
    }

    Ok(LpSolution { status: Status::Optimal, primal, dual, objective_value, dual_objective, pivots: tab.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let p = LpProblem::maximize(vec![1.0]).constraint(vec![1.0], Relation::Le, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.primal, vec![1.0]);
        assert_eq!(s.dual, vec![1.0]);
    }

    #[test]
    fn equality_row() {
        let p = LpProblem::maximize(vec![1.0, 1.0]).constraint(vec![1.0, 1.0], Relation::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
        assert!(s.duality_gap() < 1e-12);
    }

    #[test]
    fn contradictory_equalities() {
        let p = LpProblem::maximize(vec![1.0])
            .constraint(vec![1.0], Relation::Eq, 1.0)
            .constraint(vec![1.0], Relation::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Infeasible);
        // Farkas: y·A = 0 with x free-signed rows, y·b < 0
        let ya = s.dual[0] + s.dual[1];
        let yb = s.dual[0] + 2.0 * s.dual[1];
        assert!(ya.abs() < 1e-12 || ya > 0.0);
        assert!(yb < 0.0);
    }

    #[test]
    fn unbounded() {
        let p = LpProblem::maximize(vec![1.0, 0.0]).constraint(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(solve(&p).unwrap().status, Status::Unbounded);
        assert_eq!(solve(&LpProblem::maximize(vec![1.0])).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn no_constraints_non_positive_objective() {
        let s = solve(&LpProblem::maximize(vec![-1.0, 0.0])).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.primal, vec![0.0, 0.0]);
    }

    #[test]
    fn negative_rhs_and_ge_rows() {
        // max -x - y  s.t.  x + y >= 1,  -x <= -0.25  (x >= 0.25)
        let p = LpProblem::maximize(vec![-1.0, -1.0])
            .constraint(vec![1.0, 1.0], Relation::Ge, 1.0)
            .constraint(vec![-1.0, 0.0], Relation::Le, -0.25);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value + 1.0).abs() < 1e-12);
        assert!(s.dual[0] <= 1e-12);
        assert!(s.dual[1] >= -1e-12);
        assert!(s.duality_gap() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let p = LpProblem::maximize(vec![1.0, 2.0])
            .constraint(vec![1.0, 1.0], Relation::Eq, 1.0)
            .constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule
        let p = LpProblem::maximize(vec![0.75, -150.0, 0.02, -6.0])
            .constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn input_checks() {
        let p = LpProblem::maximize(vec![1.0]).constraint(vec![1.0, 2.0], Relation::Le, 1.0);
        assert_eq!(solve(&p), Err(LpError::DimensionMismatch { row: 0, expected: 1, got: 2 }));
        let p = LpProblem::maximize(vec![f64::NAN]);
        assert_eq!(solve(&p), Err(LpError::NotFinite));
        let p = LpProblem::maximize(vec![0.0; MAX_DIM + 1]);
        assert!(matches!(solve(&p), Err(LpError::TooLarge { .. })));
    }

    #[test]
    fn deterministic_bits() {
        let p = LpProblem::maximize(vec![3.0, 2.0, 4.0])
            .constraint(vec![1.0, 1.0, 2.0], Relation::Le, 4.0)
            .constraint(vec![2.0, 0.0, 3.0], Relation::Le, 5.0)
            .constraint(vec![2.0, 1.0, 3.0], Relation::Le, 7.0);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.pivots, b.pivots);
        let bits = |s: &LpSolution| s.primal.iter().chain(&s.dual).map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
