//! Dominance, nondominated archives, supportedness and the brute-force oracle.
//!
//! All objectives are minimized: `a` dominates `b` when `a <= b`
//! componentwise with at least one strict inequality.

use std::cmp::Ordering;

use crate::error::{check_len, Error, Result};
use crate::model::{evaluate_objectives, LinearConstraint, ObjectiveVector, Problem, Sense, Solution};
use crate::simplex::{solve_lp, Algorithm, LpStatus, LpView};

/// Objective vectors closer than this in every component are duplicates.
pub const DEDUP_TOL: f64 = 1e-9;
/// Lower bound on every weight in the supportedness LP.
pub const SUPPORT_DELTA: f64 = 1e-6;
/// Largest number of integer assignments the oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 1 << 20;

pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_within(a, b, 0.0))
}

pub(crate) fn dominates_within(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if *x > y + tol {
            return false;
        }
        if *x < y - tol {
            strict = true;
        }
    }
    strict
}

fn near(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Flags the entries of `points` that no other entry dominates.
pub fn nondominated_flags(points: &[Vec<f64>]) -> Vec<bool> {
    points
        .iter()
        .map(|p| !points.iter().any(|q| dominates_within(q, p, 0.0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub objectives: ObjectiveVector,
    pub solution: Solution,
}

/// Mutually nondominated, deduplicated points, sorted lexicographically by
/// objective vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.objectives.0.clone()).collect()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.entries.iter().any(|e| near(&e.objectives, y, DEDUP_TOL))
    }

    /// Set equality of the objective vectors.
    pub fn same_front(&self, other: &Archive) -> bool {
        self.len() == other.len() && self.entries.iter().all(|e| other.contains(&e.objectives))
    }

    /// CSV with columns `f1..fp` then `x1..xn`, one row per entry.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(first) = self.entries.first() {
            let header: Vec<String> = (1..=first.objectives.len())
                .map(|k| format!("f{k}"))
                .chain((1..=first.solution.point.len()).map(|j| format!("x{j}")))
                .collect();
            w.write_record(&header)?;
        }
        for e in &self.entries {
            let row: Vec<String> = e
                .objectives
                .iter()
                .chain(&e.solution.point)
                .map(|v| format!("{v}"))
                .collect();
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Keeps exactly the points not dominated by any other input point.
///
/// The result does not depend on input order: points are sorted
/// lexicographically (objectives, then decision values) before duplicates
/// collapse onto their first representative.
pub fn filter_nondominated(points: Vec<(ObjectiveVector, Solution)>) -> Archive {
    let mut points = points;
    points.sort_by(|a, b| lex_cmp(&a.0, &b.0).then_with(|| lex_cmp(&a.1.point, &b.1.point)));
    let mut unique: Vec<(ObjectiveVector, Solution)> = Vec::with_capacity(points.len());
    for p in points {
        if !unique.iter().any(|u| near(&u.0, &p.0, DEDUP_TOL)) {
            unique.push(p);
        }
    }
    let keep: Vec<bool> = unique
        .iter()
        .map(|p| !unique.iter().any(|q| dominates_within(&q.0, &p.0, DEDUP_TOL)))
        .collect();
    Archive {
        entries: unique
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|((objectives, solution), _)| ArchiveEntry { objectives, solution })
            .collect(),
    }
}

/// Whether some strictly positive weight vector makes `y` a weighted-sum
/// minimizer over `front`. Decided by an LP over the weights with
/// `w_k >= SUPPORT_DELTA` and `sum w = 1`.
pub fn is_supported(y: &[f64], front: &[Vec<f64>]) -> Result<bool> {
    let p = y.len();
    if p == 0 {
        return Err(Error::Validation("empty objective vector".into()));
    }
    let mut rows = Vec::with_capacity(front.len() + 1);
    rows.push(LinearConstraint::new(
        (0..p).map(|k| (k, 1.0)).collect(),
        Sense::Eq,
        1.0,
    ));
    for z in front {
        check_len(p, z.len())?;
        if near(z, y, DEDUP_TOL) {
            continue;
        }
        // w . (y - z) <= 0
        let coefs: Vec<(usize, f64)> = (0..p).map(|k| (k, y[k] - z[k])).collect();
        let scale = coefs.iter().map(|c| c.1.abs()).fold(1.0, f64::max);
        rows.push(LinearConstraint::new(coefs, Sense::Le, 1e-12 * scale));
    }
    let objective = vec![0.0; p];
    let lower = vec![SUPPORT_DELTA; p];
    let upper = vec![1.0; p];
    let lp = LpView {
        objective: &objective,
        lower: &lower,
        upper: &upper,
        rows: &rows,
    };
    Ok(solve_lp(&lp, None, Algorithm::Auto)?.status == LpStatus::Optimal)
}

/// Exact nondominated set by enumerating every integer assignment.
///
/// Continuous variables are allowed only when no objective depends on them;
/// for each integer assignment their feasibility is decided by
/// Fourier-Motzkin elimination, which also yields a witness.
pub fn brute_force_oracle(problem: &Problem) -> Result<Archive> {
    let n = problem.num_vars();
    let int_vars: Vec<usize> = problem.integer_vars().collect();
    let cont_vars: Vec<usize> = (0..n).filter(|j| !problem.var_types()[*j].is_integer()).collect();
    for &j in &cont_vars {
        if problem.objectives().iter().any(|row| row[j] != 0.0) {
            return Err(Error::Validation(format!(
                "continuous x{j} carries objective weight; not enumerable"
            )));
        }
    }
    let mut ranges = Vec::with_capacity(int_vars.len());
    let mut size: u64 = 1;
    for &j in &int_vars {
        let (lo, hi) = (problem.lower()[j].ceil(), problem.upper()[j].floor());
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::TooLarge(format!("integer x{j} is unbounded")));
        }
        if lo > hi {
            return Ok(Archive::default());
        }
        let span = (hi - lo) as u64 + 1;
        size = size.saturating_mul(span);
        if size > ORACLE_LIMIT {
            return Err(Error::TooLarge(format!("more than {ORACLE_LIMIT} integer assignments")));
        }
        ranges.push((lo, hi));
    }

    let mut cont_index = vec![usize::MAX; n];
    for (i, &j) in cont_vars.iter().enumerate() {
        cont_index[j] = i;
    }
    let (int_rows, mixed_rows): (Vec<&LinearConstraint>, Vec<&LinearConstraint>) = problem
        .constraints()
        .iter()
        .partition(|c| c.coefficients.iter().all(|&(j, _)| cont_index[j] == usize::MAX));

    let mut point: Vec<f64> = vec![0.0; n];
    for (&j, &(lo, _)) in int_vars.iter().zip(&ranges) {
        point[j] = lo;
    }
    let mut found = Vec::new();
    loop {
        if int_rows.iter().all(|c| c.violation(&point) <= 1e-9) {
            let feasible = if cont_vars.is_empty() {
                true
            } else {
                let system = continuous_system(problem, &mixed_rows, &cont_vars, &cont_index, &point);
                match fourier_motzkin_witness(system, cont_vars.len()) {
                    Some(values) => {
                        for (&j, v) in cont_vars.iter().zip(values) {
                            point[j] = v;
                        }
                        true
                    }
                    None => false,
                }
            };
            if feasible {
                let objectives = evaluate_objectives(problem, &point)?;
                let solution = Solution {
                    point: point.clone(),
                    objectives: objectives.clone(),
                    integral: true,
                };
                found.push((objectives, solution));
            }
        }
        // odometer, last integer variable fastest
        let mut k = int_vars.len();
        loop {
            if k == 0 {
                return Ok(filter_nondominated(found));
            }
            k -= 1;
            let j = int_vars[k];
            if point[j] < ranges[k].1 {
                point[j] += 1.0;
                break;
            }
            point[j] = ranges[k].0;
        }
    }
}

/// `a . u <= b` rows over the continuous variables with integers fixed.
fn continuous_system(
    problem: &Problem,
    rows: &[&LinearConstraint],
    cont_vars: &[usize],
    cont_index: &[usize],
    point: &[f64],
) -> Vec<(Vec<f64>, f64)> {
    let c = cont_vars.len();
    let mut system = Vec::new();
    for row in rows {
        let mut a = vec![0.0; c];
        let mut fixed = 0.0;
        for &(j, v) in &row.coefficients {
            if cont_index[j] == usize::MAX {
                fixed += v * point[j];
            } else {
                a[cont_index[j]] += v;
            }
        }
        let b = row.rhs - fixed;
        match row.sense {
            Sense::Le => system.push((a, b)),
            Sense::Ge => system.push((a.iter().map(|v| -v).collect(), -b)),
            Sense::Eq => {
                system.push((a.iter().map(|v| -v).collect(), -b));
                system.push((a, b));
            }
        }
    }
    for (i, &j) in cont_vars.iter().enumerate() {
        let (lo, hi) = (problem.lower()[j], problem.upper()[j]);
        if hi.is_finite() {
            let mut a = vec![0.0; c];
            a[i] = 1.0;
            system.push((a, hi));
        }
        if lo.is_finite() {
            let mut a = vec![0.0; c];
            a[i] = -1.0;
            system.push((a, -lo));
        }
    }
    system
}

const FM_TOL: f64 = 1e-9;

/// Eliminates variables `0..c` in order; returns a point satisfying every
/// row, or `None` when the system is infeasible.
fn fourier_motzkin_witness(system: Vec<(Vec<f64>, f64)>, c: usize) -> Option<Vec<f64>> {
    let mut stages = Vec::with_capacity(c + 1);
    stages.push(system);
    for v in 0..c {
        let current = stages.last().expect("stage");
        let mut next: Vec<(Vec<f64>, f64)> = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for row in current {
            if row.0[v] > FM_TOL {
                pos.push(row);
            } else if row.0[v] < -FM_TOL {
                neg.push(row);
            } else {
                next.push(row.clone());
            }
        }
        for p in &pos {
            for q in &neg {
                let (sp, sq) = (p.0[v], -q.0[v]);
                let mut a: Vec<f64> = p.0.iter().zip(&q.0).map(|(x, y)| x / sp + y / sq).collect();
                a[v] = 0.0;
                next.push((a, p.1 / sp + q.1 / sq));
            }
        }
        let mut pruned: Vec<(Vec<f64>, f64)> = Vec::with_capacity(next.len());
        for row in next {
            if row.0.iter().all(|x| x.abs() <= FM_TOL) {
                if row.1 < -FM_TOL {
                    return None;
                }
                continue;
            }
            if !pruned
                .iter()
                .any(|r| near(&r.0, &row.0, FM_TOL) && r.1 <= row.1 + FM_TOL)
            {
                pruned.retain(|r| !(near(&r.0, &row.0, FM_TOL) && r.1 >= row.1));
                pruned.push(row);
            }
        }
        stages.push(pruned);
    }
    // back-substitute in reverse elimination order
    let mut values = vec![0.0; c];
    for v in (0..c).rev() {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, b) in &stages[v] {
            if a[v].abs() <= FM_TOL {
                continue;
            }
            let rest: f64 = (v + 1..c).map(|k| a[k] * values[k]).sum();
            let bound = (b - rest) / a[v];
            if a[v] > 0.0 {
                hi = hi.min(bound);
            } else {
                lo = lo.max(bound);
            }
        }
        if lo > hi + 1e-7 {
            return None;
        }
        values[v] = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi.max(lo)),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        };
    }
    Some(values)
}
