use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::model::{dot, Solution};

/// Slack used when comparing epsilon vectors.
pub const EPS_TOL: f64 = 1e-9;

fn leq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= y + EPS_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WarmPolicy {
    None,
    /// Candidate from the immediately preceding subproblem.
    Weak,
    /// Best candidate from every earlier subproblem.
    Strong,
}

impl fmt::Display for WarmPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarmPolicy::None => "none",
            WarmPolicy::Weak => "weak",
            WarmPolicy::Strong => "strong",
        })
    }
}

impl FromStr for WarmPolicy {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "none" => Ok(WarmPolicy::None),
            "weak" => Ok(WarmPolicy::Weak),
            "strong" => Ok(WarmPolicy::Strong),
            _ => Err(Error::Validation(format!("unknown warm policy {s:?}"))),
        }
    }
}

/// Epsilon vectors known to give infeasible subproblems, kept as an
/// antichain of maximal elements.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InfeasibilityStore {
    maximal: Vec<Vec<f64>>,
}

impl InfeasibilityStore {
    pub fn maximal(&self) -> &[Vec<f64>] {
        &self.maximal
    }

    /// True when `eps` is componentwise at most a stored infeasible vector.
    pub fn covers(&self, eps: &[f64]) -> bool {
        self.maximal.iter().any(|s| leq(eps, s))
    }

    pub fn record(&mut self, eps: &[f64]) {
        if self.covers(eps) {
            return;
        }
        self.maximal.retain(|s| !leq(s, eps));
        self.maximal.push(eps.to_vec());
    }
}

/// Whether the subproblem at `eps` is implied infeasible by `store`.
pub fn propagate_infeasibility(store: &InfeasibilityStore, eps: &[f64]) -> bool {
    store.covers(eps)
}

pub fn record_infeasible(store: &mut InfeasibilityStore, eps: &[f64]) {
    store.record(eps)
}

/// A distinct optimum and the minimal epsilon vectors of the subproblems
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub solution: Solution,
    pub sources: Vec<Vec<f64>>,
}

impl PoolEntry {
    /// Feasible for `eps` by the ordering argument: some source subproblem
    /// was at least as tight.
    fn qualifies(&self, eps: &[f64]) -> bool {
        self.sources.iter().any(|s| leq(s, eps))
    }
}

/// Optima of earlier subproblems in discovery order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionPool {
    entries: Vec<PoolEntry>,
    /// Entry and epsilon of the immediately preceding subproblem, if it was
    /// solved to optimality.
    last: Option<(usize, Vec<f64>)>,
}

impl SolutionPool {
    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    /// Adds the optimum of the subproblem at `eps`.
    pub fn record(&mut self, solution: &Solution, eps: &[f64]) {
        let idx = match self.entries.iter().position(|e| e.solution.point == solution.point) {
            Some(i) => i,
            None => {
                self.entries.push(PoolEntry {
                    solution: solution.clone(),
                    sources: Vec::new(),
                });
                self.entries.len() - 1
            }
        };
        let sources = &mut self.entries[idx].sources;
        if !sources.iter().any(|s| leq(s, eps)) {
            sources.retain(|s| !leq(eps, s));
            sources.push(eps.to_vec());
        }
        self.last = Some((idx, eps.to_vec()));
    }

    /// The preceding subproblem produced no optimum (infeasible, skipped or
    /// failed).
    pub fn record_gap(&mut self) {
        self.last = None;
    }
}

/// Picks a warm-start point for the subproblem at `eps`.
///
/// A pool entry qualifies when one of its source subproblems had an
/// epsilon vector componentwise at most `eps`: its optimum satisfies the
/// source's bounds and hence the looser current ones. Weak looks only at
/// the immediately preceding subproblem; strong takes the qualifying entry
/// with the smallest `current_objective . x`, earliest on ties.
pub fn select_warm_start<'a>(
    pool: &'a SolutionPool,
    eps: &[f64],
    policy: WarmPolicy,
    current_objective: &[f64],
) -> Option<&'a Solution> {
    match policy {
        WarmPolicy::None => None,
        WarmPolicy::Weak => {
            let (idx, source) = pool.last.as_ref()?;
            leq(source, eps).then(|| &pool.entries[*idx].solution)
        }
        WarmPolicy::Strong => {
            let mut best: Option<(&Solution, f64)> = None;
            for e in pool.entries.iter().filter(|e| e.qualifies(eps)) {
                let v = dot(current_objective, &e.solution.point);
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((&e.solution, v));
                }
            }
            best.map(|(s, _)| s)
        }
    }
}
