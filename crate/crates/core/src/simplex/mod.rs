//! Bounded-variable revised simplex (primal and dual) over a dense LU basis.
//!
//! Every row `a_i x {<=,>=,=} b_i` gets a slack column `s_i` with
//! `a_i x + s_i = b_i`; the slack bounds encode the sense (`<=`: `s >= 0`,
//! `>=`: `s <= 0`, `=`: `s = 0`). Columns `0..n` are structural, `n..n+m`
//! are slacks, so the all-slack basis is always a valid starting point.
//!
//! A basis that was optimal stays primal feasible when only the cost vector
//! changes and stays dual feasible when only right-hand sides or bounds
//! change. [`classify_warm_basis`] turns that into a choice of algorithm.

mod engine;
mod lu;

use crate::error::{Error, Result};
use crate::model::{LinearConstraint, Problem, Sense};

pub(crate) use engine::LpData;

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const PIVOT_TOL: f64 = 1e-10;
pub const ZERO_SNAP: f64 = 1e-11;

/// One scalar objective over a constraint set and (possibly branched) bounds.
#[derive(Debug, Clone, Copy)]
pub struct LpView<'a> {
    pub objective: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub rows: &'a [LinearConstraint],
}

impl<'a> LpView<'a> {
    /// Continuous relaxation of `problem` under `objective`.
    pub fn relaxation(problem: &'a Problem, objective: &'a [f64]) -> Self {
        Self {
            objective,
            lower: problem.lower(),
            upper: problem.upper(),
            rows: problem.constraints(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        crate::error::check_len(n, self.lower.len())?;
        crate::error::check_len(n, self.upper.len())?;
        for row in self.rows {
            if let Some(&(j, _)) = row.coefficients.iter().find(|&&(j, _)| j >= n) {
                return Err(Error::Validation(format!("row references x{j} beyond {n} columns")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Simplex basis over the `n + m` structural and slack columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    /// Column in each basis position; length equals the row count.
    pub basic: Vec<usize>,
    /// Status of every column; exactly the `basic` entries are `Basic`.
    pub status: Vec<ColumnStatus>,
}

impl Basis {
    /// All slacks basic, structural columns at their lower bound.
    pub fn slack(num_vars: usize, num_rows: usize) -> Self {
        let mut status = vec![ColumnStatus::AtLower; num_vars + num_rows];
        status[num_vars..].iter_mut().for_each(|s| *s = ColumnStatus::Basic);
        Self {
            basic: (num_vars..num_vars + num_rows).collect(),
            status,
        }
    }

    pub fn num_columns(&self) -> usize {
        self.status.len()
    }

    pub(crate) fn check(&self, num_vars: usize, num_rows: usize) -> Result<()> {
        crate::error::check_len(num_rows, self.basic.len())?;
        crate::error::check_len(num_vars + num_rows, self.status.len())?;
        let mut seen = vec![false; self.status.len()];
        for &j in &self.basic {
            if j >= self.status.len() || seen[j] || self.status[j] != ColumnStatus::Basic {
                return Err(Error::Validation(format!("basis lists column {j} inconsistently")));
            }
            seen[j] = true;
        }
        let basic_count = self.status.iter().filter(|s| **s == ColumnStatus::Basic).count();
        if basic_count != num_rows {
            return Err(Error::Validation(format!(
                "basis marks {basic_count} columns basic for {num_rows} rows"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural values; meaningful when `status` is `Optimal`.
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub basis: Basis,
    pub iterations_primal: usize,
    pub iterations_dual: usize,
    /// Algorithm actually used for the first phase of this solve.
    pub started_with: Algorithm,
    pub bland_engaged: bool,
}

impl LpOutcome {
    pub fn iterations(&self) -> usize {
        self.iterations_primal + self.iterations_dual
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Primal,
    Dual,
    Auto,
}

/// What differs between two consecutive LPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeKind {
    ObjectiveOnly,
    RhsOnly,
    Other,
}

impl ChangeKind {
    /// Tags the change from `prev` to `next`. Bound changes count as
    /// right-hand-side changes; identical LPs count as `ObjectiveOnly`.
    pub fn between(prev: &LpView<'_>, next: &LpView<'_>) -> Self {
        if prev.num_vars() != next.num_vars() || prev.num_rows() != next.num_rows() {
            return ChangeKind::Other;
        }
        let same_structure = prev
            .rows
            .iter()
            .zip(next.rows)
            .all(|(a, b)| a.sense == b.sense && a.coefficients == b.coefficients);
        if !same_structure {
            return ChangeKind::Other;
        }
        let objective_changed = prev.objective != next.objective;
        let rhs_changed = prev.lower != next.lower
            || prev.upper != next.upper
            || prev.rows.iter().zip(next.rows).any(|(a, b)| a.rhs != b.rhs);
        match (objective_changed, rhs_changed) {
            (_, false) => ChangeKind::ObjectiveOnly,
            (false, true) => ChangeKind::RhsOnly,
            (true, true) => ChangeKind::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WarmClass {
    StartPrimal,
    StartDual,
    ColdStart,
}

/// Which algorithm a previously optimal basis legitimately warm-starts.
pub fn classify_warm_basis(_old_basis: &Basis, change: ChangeKind) -> WarmClass {
    match change {
        ChangeKind::ObjectiveOnly => WarmClass::StartPrimal,
        ChangeKind::RhsOnly => WarmClass::StartDual,
        ChangeKind::Other => WarmClass::ColdStart,
    }
}

/// A start basis together with how the LP changed since it was optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmBasis {
    pub basis: Basis,
    pub change: ChangeKind,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_pivot_limit: usize,
    pub refactor_interval: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            degenerate_pivot_limit: 1000,
            refactor_interval: 50,
        }
    }
}

/// Solves `lp`. With `Algorithm::Auto` and a start basis the algorithm comes
/// from [`classify_warm_basis`]; without one the solve is a cold primal
/// phase 1 / phase 2 from the slack basis.
pub fn solve_lp(lp: &LpView<'_>, start: Option<&WarmBasis>, algorithm: Algorithm) -> Result<LpOutcome> {
    solve_lp_with(lp, start, algorithm, &LpOptions::default())
}

pub fn solve_lp_with(
    lp: &LpView<'_>,
    start: Option<&WarmBasis>,
    algorithm: Algorithm,
    options: &LpOptions,
) -> Result<LpOutcome> {
    lp.validate()?;
    let data = LpData::new(lp.rows, lp.num_vars());
    data.solve(lp.objective, lp.lower, lp.upper, start, algorithm, options)
}

/// True when every basic value of `basis` lies within its bounds (1e-7).
pub fn basis_is_primal_feasible(lp: &LpView<'_>, basis: &Basis) -> Result<bool> {
    lp.validate()?;
    let data = LpData::new(lp.rows, lp.num_vars());
    data.primal_feasible(lp.objective, lp.lower, lp.upper, basis)
}

/// True when the reduced costs of `basis` have the optimal sign for each
/// nonbasic column's bound status (1e-9).
pub fn basis_is_dual_feasible(lp: &LpView<'_>, basis: &Basis) -> Result<bool> {
    lp.validate()?;
    let data = LpData::new(lp.rows, lp.num_vars());
    data.dual_feasible(lp.objective, lp.lower, lp.upper, basis)
}

pub(crate) fn slack_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Le => (0.0, f64::INFINITY),
        Sense::Ge => (f64::NEG_INFINITY, 0.0),
        Sense::Eq => (0.0, 0.0),
    }
}

#[cfg(test)]
mod tests;
