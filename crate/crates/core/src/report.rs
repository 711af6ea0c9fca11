//! Per-run records, totals and CSV emission.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::ObjectiveVector;
use crate::pareto::Archive;

/// Header of the per-subproblem CSV.
pub const REPORT_COLUMNS: [&str; 12] = [
    "instance",
    "method",
    "ordering_or_signature",
    "warm",
    "propagate",
    "subproblem",
    "status",
    "warm_kind",
    "injected",
    "lp_iters",
    "nodes",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Wsm,
    Ecm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Wsm => "wsm",
            Method::Ecm => "ecm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubproblemStatus {
    Optimal,
    Infeasible,
    SkippedByPropagation,
    Limit,
    /// The solver returned an error; the message is in `SubproblemRecord::error`.
    Failed,
}

impl fmt::Display for SubproblemStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubproblemStatus::Optimal => "Optimal",
            SubproblemStatus::Infeasible => "Infeasible",
            SubproblemStatus::SkippedByPropagation => "SkippedByPropagation",
            SubproblemStatus::Limit => "Limit",
            SubproblemStatus::Failed => "Failed",
        })
    }
}

/// Which warm-start channels a subproblem received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WarmKind {
    None,
    Solution,
    Basis,
    Both,
}

impl WarmKind {
    pub fn from_parts(solution: bool, basis: bool) -> Self {
        match (solution, basis) {
            (false, false) => WarmKind::None,
            (true, false) => WarmKind::Solution,
            (false, true) => WarmKind::Basis,
            (true, true) => WarmKind::Both,
        }
    }
}

impl fmt::Display for WarmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarmKind::None => "none",
            WarmKind::Solution => "solution",
            WarmKind::Basis => "basis",
            WarmKind::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemRecord {
    /// Position in the traversal order.
    pub index: usize,
    /// Weight vector (WSM) or epsilon vector for objectives `2..p` (ECM).
    pub parameters: Vec<f64>,
    /// Grid level indices (ECM only).
    pub cell: Option<Vec<usize>>,
    pub status: SubproblemStatus,
    pub warm_kind: WarmKind,
    pub injected: bool,
    pub lp_iterations: usize,
    pub nodes: usize,
    pub wall_ms: f64,
    /// Scalarized optimum.
    pub objective_value: Option<f64>,
    pub objectives: Option<ObjectiveVector>,
    pub point: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl SubproblemRecord {
    pub(crate) fn new(index: usize, parameters: Vec<f64>, cell: Option<Vec<usize>>) -> Self {
        Self {
            index,
            parameters,
            cell,
            status: SubproblemStatus::Failed,
            warm_kind: WarmKind::None,
            injected: false,
            lp_iterations: 0,
            nodes: 0,
            wall_ms: 0.0,
            objective_value: None,
            objectives: None,
            point: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    /// Subproblems handed to the solver.
    pub solves: usize,
    pub skips: usize,
    pub injections: usize,
    pub lp_iterations: usize,
    pub nodes: usize,
    pub wall_ms: f64,
}

impl Totals {
    pub fn from_records(records: &[SubproblemRecord]) -> Self {
        let mut t = Totals::default();
        for r in records {
            if r.status == SubproblemStatus::SkippedByPropagation {
                t.skips += 1;
            } else {
                t.solves += 1;
            }
            t.injections += usize::from(r.injected);
            t.lp_iterations += r.lp_iterations;
            t.nodes += r.nodes;
            t.wall_ms += r.wall_ms;
        }
        t
    }
}

/// Warm-start candidates offered and infeasible cells skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub warm_starts: usize,
    pub detections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub method: Method,
    /// Ordering label (WSM) or order signature label (ECM).
    pub variant: String,
    pub warm: String,
    /// `None` for methods without propagation.
    pub propagate: Option<bool>,
    pub rho: Option<f64>,
    /// Level counts per constrained objective (ECM only).
    pub grid_dims: Option<Vec<usize>>,
    /// Whether the ECM grid covers every integer level of its box.
    pub full_grid: bool,
    /// Largest epsilon level per constrained objective (ECM only).
    pub grid_top: Option<Vec<f64>>,
    pub records: Vec<SubproblemRecord>,
    pub archive: Archive,
    pub totals: Totals,
    pub stats: RunStats,
}

impl RunReport {
    /// Totals equal the sums over records.
    pub fn check_totals(&self) -> Result<()> {
        let expected = Totals::from_records(&self.records);
        let t = &self.totals;
        let same = t.solves == expected.solves
            && t.skips == expected.skips
            && t.injections == expected.injections
            && t.lp_iterations == expected.lp_iterations
            && t.nodes == expected.nodes
            && (t.wall_ms - expected.wall_ms).abs() <= 1e-6 * (1.0 + expected.wall_ms);
        if !same {
            return Err(Error::Validation(format!(
                "report totals {t:?} disagree with records {expected:?}"
            )));
        }
        if let Some(dims) = &self.grid_dims {
            let cells: usize = dims.iter().product();
            if cells != self.records.len() {
                return Err(Error::Validation(format!(
                    "{} records for a grid of {cells} cells",
                    self.records.len()
                )));
            }
        }
        Ok(())
    }

    pub fn propagate_label(&self) -> &'static str {
        match self.propagate {
            Some(true) => "on",
            Some(false) => "off",
            None => "n/a",
        }
    }

    /// Count of records with the given status.
    pub fn count(&self, status: SubproblemStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }
}

/// Writes the per-subproblem CSV for all `reports`, header included.
/// Totals are checked before anything is written.
pub fn write_report_csv<W: Write>(out: W, reports: &[RunReport]) -> Result<()> {
    for r in reports {
        r.check_totals()?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        for rec in &r.records {
            w.write_record([
                r.instance.clone(),
                r.method.to_string(),
                r.variant.clone(),
                r.warm.clone(),
                r.propagate_label().to_string(),
                rec.index.to_string(),
                rec.status.to_string(),
                rec.warm_kind.to_string(),
                rec.injected.to_string(),
                rec.lp_iterations.to_string(),
                rec.nodes.to_string(),
                format!("{:.3}", rec.wall_ms),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
