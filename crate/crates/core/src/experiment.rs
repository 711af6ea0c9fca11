//! Experiment matrices, summary tables and oracle verification.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::branch_bound::{solve_mip, MipOptions, MipStatus};
use crate::ecm::{harvest_mask, run_ecm, EcmConfig, GridSpec, OrderSignature, SubproblemModel, WarmPolicy};
use crate::error::{Error, Result};
use crate::model::{dot, Problem};
use crate::ordergrid::{enumerate_signatures, tradeoff_frontier, write_tradeoff_csv, TradeoffRow, WsMode};
use crate::pareto::{brute_force_oracle, is_supported};
use crate::report::{write_report_csv, Method, RunReport, SubproblemStatus, Totals};
use crate::wsm::{run_wsm, WeightOrdering, WsmConfig, WsmWarm};

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "instance",
    "method",
    "variant",
    "rel_runtime",
    "rel_iters",
    "warm_starts",
    "detections",
];

/// Absolute tolerance for warm/cold objective agreement.
pub const VALUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MatrixInstance {
    /// Identifies the instance in reports (file stem by convention).
    pub label: String,
    pub problem: Problem,
}

impl MatrixInstance {
    pub fn load(path: &Path) -> Result<Self> {
        let problem = crate::load_instance(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| problem.name().to_string());
        Ok(Self { label, problem })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsmAxis {
    pub samples: usize,
    pub orderings: Vec<WeightOrdering>,
    pub warm: Vec<WsmWarm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcmAxis {
    pub grid: GridSpec,
    /// Empty means every signature for the instance's objective count.
    pub signatures: Vec<OrderSignature>,
    pub warm: Vec<WarmPolicy>,
    pub propagate: Vec<bool>,
    pub rho: Option<f64>,
}

/// Every combination of instance and option values is one cell. The
/// warm-start-disabled baseline (and propagation off for ECM) is always
/// run, since the summary is relative to it.
#[derive(Debug, Clone)]
pub struct ExperimentMatrix {
    pub instances: Vec<MatrixInstance>,
    pub wsm: Option<WsmAxis>,
    pub ecm: Option<EcmAxis>,
    pub repetitions: usize,
    pub master_seed: u64,
}

/// Stable per-cell seed: SHA-256 over the master seed and the key parts.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 8 bytes"))
}

/// Seed of the WSM weights for an instance; shared by every ordering and
/// warm option so that they solve the same subproblems.
pub fn wsm_seed(master: u64, label: &str) -> u64 {
    derive_seed(master, &[label, "wsm", "weights"])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub instance: String,
    pub method: Method,
    pub variant: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    pub method: Method,
    pub variant: String,
    pub rel_runtime: f64,
    pub rel_iters: f64,
    pub warm_starts: usize,
    pub detections: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub reports: Vec<RunReport>,
    pub failures: Vec<CellFailure>,
    pub summary: Vec<SummaryRow>,
    /// Order trade-offs per instance, from the feasibility mask of its
    /// baseline ECM run.
    pub tradeoffs: Vec<(String, Vec<TradeoffRow>)>,
}

fn with_first<T: PartialEq + Clone>(values: &[T], first: T) -> Vec<T> {
    let mut out = vec![first.clone()];
    out.extend(values.iter().filter(|v| **v != first).cloned());
    out
}

/// Runs one cell `repetitions` times; counts come from the first run, each
/// record's wall time is the minimum over runs.
fn repeat(repetitions: usize, mut run: impl FnMut() -> Result<RunReport>) -> Result<RunReport> {
    let mut report = run()?;
    for _ in 1..repetitions {
        let again = run()?;
        for (r, a) in report.records.iter_mut().zip(&again.records) {
            r.wall_ms = r.wall_ms.min(a.wall_ms);
        }
    }
    report.totals = Totals::from_records(&report.records);
    Ok(report)
}

pub fn run_experiment(matrix: &ExperimentMatrix) -> Result<ExperimentResult> {
    if matrix.repetitions == 0 {
        return Err(Error::Validation("repetitions must be at least 1".into()));
    }
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut tradeoffs = Vec::new();
    let fail = |instance: &str, method, variant: String, e: Error| CellFailure {
        instance: instance.to_string(),
        method,
        variant,
        message: e.to_string(),
    };

    for inst in &matrix.instances {
        if let Some(axis) = &matrix.wsm {
            let seed = wsm_seed(matrix.master_seed, &inst.label);
            for &ordering in &axis.orderings {
                for warm_start in with_first(&axis.warm, WsmWarm::None) {
                    let config = WsmConfig {
                        num_samples: axis.samples,
                        ordering,
                        warm_start,
                        seed,
                    };
                    match repeat(matrix.repetitions, || run_wsm(&inst.problem, &config)) {
                        Ok(mut r) => {
                            r.instance = inst.label.clone();
                            reports.push(r);
                        }
                        Err(e) => failures.push(fail(&inst.label, Method::Wsm, ordering.to_string(), e)),
                    }
                }
            }
        }
        if let Some(axis) = &matrix.ecm {
            let signatures = if axis.signatures.is_empty() {
                enumerate_signatures(inst.problem.objective_count())?
            } else {
                axis.signatures.clone()
            };
            let mut mask_done = false;
            for signature in &signatures {
                for warm in with_first(&axis.warm, WarmPolicy::None) {
                    let propagate_values = if warm == WarmPolicy::None {
                        with_first(&axis.propagate, false)
                    } else {
                        axis.propagate.clone()
                    };
                    for propagate in propagate_values {
                        let config = EcmConfig {
                            grid: axis.grid.clone(),
                            signature: signature.clone(),
                            warm,
                            propagate,
                            rho: axis.rho,
                        };
                        match repeat(matrix.repetitions, || run_ecm(&inst.problem, &config)) {
                            Ok(mut r) => {
                                r.instance = inst.label.clone();
                                if !mask_done && !propagate {
                                    if let Some(Ok(mask)) = harvest_mask(&r) {
                                        let mut rows = tradeoff_frontier(&mask, WsMode::Weak)?;
                                        rows.extend(tradeoff_frontier(&mask, WsMode::Strong)?);
                                        tradeoffs.push((inst.label.clone(), rows));
                                        mask_done = true;
                                    }
                                }
                                reports.push(r);
                            }
                            Err(e) => failures.push(fail(&inst.label, Method::Ecm, signature.label(), e)),
                        }
                    }
                }
            }
        }
    }
    let summary = summarize(&reports);
    Ok(ExperimentResult {
        reports,
        failures,
        summary,
        tradeoffs,
    })
}

fn is_baseline(r: &RunReport) -> bool {
    r.warm == "none" && r.propagate != Some(true)
}

/// `instance, method, ordering or signature` identifies the baseline group.
fn group_key(r: &RunReport) -> (String, Method, String) {
    (r.instance.clone(), r.method, r.variant.clone())
}

pub fn variant_label(r: &RunReport) -> String {
    match r.propagate {
        Some(_) => format!("{}:{}:{}", r.variant, r.warm, r.propagate_label()),
        None => format!("{}:{}", r.variant, r.warm),
    }
}

/// One row per report, ratios against the baseline of its group. Reports
/// without a baseline get NaN ratios.
pub fn summarize(reports: &[RunReport]) -> Vec<SummaryRow> {
    let baselines: HashMap<_, &RunReport> = reports
        .iter()
        .filter(|r| is_baseline(r))
        .map(|r| (group_key(r), r))
        .collect();
    let ratio = |x: f64, base: f64| {
        if base > 0.0 {
            x / base
        } else if x == 0.0 {
            1.0
        } else {
            f64::NAN
        }
    };
    reports
        .iter()
        .map(|r| {
            let (rel_runtime, rel_iters) = if is_baseline(r) {
                (1.0, 1.0)
            } else {
                match baselines.get(&group_key(r)) {
                    Some(b) => (
                        ratio(r.totals.wall_ms, b.totals.wall_ms),
                        ratio(r.totals.lp_iterations as f64, b.totals.lp_iterations as f64),
                    ),
                    None => (f64::NAN, f64::NAN),
                }
            };
            SummaryRow {
                instance: r.instance.clone(),
                method: r.method,
                variant: variant_label(r),
                rel_runtime,
                rel_iters,
                warm_starts: r.stats.warm_starts,
                detections: r.stats.detections,
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.method.to_string(),
            r.variant.clone(),
            format!("{:.6}", r.rel_runtime),
            format!("{:.6}", r.rel_iters),
            r.warm_starts.to_string(),
            r.detections.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `report.csv`, `summary.csv`, one `tradeoff_<instance>.csv` per
/// instance with an ECM baseline, and one `archive_<instance>_<method>.csv`
/// per instance and method (from the baseline run). Returns the paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("report.csv");
    write_report_csv(fs::File::create(&path)?, &result.reports)?;
    written.push(path);
    let path = dir.join("summary.csv");
    write_summary_csv(fs::File::create(&path)?, &result.summary)?;
    written.push(path);
    for (label, rows) in &result.tradeoffs {
        let path = dir.join(format!("tradeoff_{}.csv", sanitize(label)));
        write_tradeoff_csv(fs::File::create(&path)?, rows)?;
        written.push(path);
    }
    let mut seen = std::collections::HashSet::new();
    for r in result.reports.iter().filter(|r| is_baseline(r)) {
        if seen.insert((r.instance.clone(), r.method)) {
            let path = dir.join(format!("archive_{}_{}.csv", sanitize(&r.instance), r.method));
            fs::write(&path, r.archive.to_csv()?)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Verdict {
    pub violations: Vec<String>,
    /// Skipped subproblems re-solved cold.
    pub skips_checked: usize,
    /// Solved subproblems re-solved cold.
    pub values_checked: usize,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a report against the brute-force oracle of `problem`: archive
/// points are efficient (and supported for WSM; the whole front for a full
/// ECM grid), skipped cells are infeasible when re-solved cold, and every
/// optimum matches a cold re-solve.
pub fn verify(problem: &Problem, report: &RunReport) -> Result<Verdict> {
    let mut v = Verdict::default();
    if let Err(e) = report.check_totals() {
        v.violations.push(e.to_string());
    }
    let oracle = brute_force_oracle(problem)?;
    let front = oracle.objective_vectors();
    for e in report.archive.entries() {
        if !oracle.contains(&e.objectives) {
            v.violations
                .push(format!("archive point {} is not efficient", e.objectives));
        }
    }

    match report.method {
        Method::Wsm => {
            for e in report.archive.entries() {
                if !is_supported(&e.objectives, &front)? {
                    v.violations
                        .push(format!("archive point {} is not supported", e.objectives));
                }
            }
            for rec in report.records.iter().filter(|r| r.status == SubproblemStatus::Optimal) {
                let y = rec.objectives.as_ref().expect("optimal record carries objectives");
                let best = front
                    .iter()
                    .map(|z| dot(&rec.parameters, z))
                    .fold(f64::INFINITY, f64::min);
                if dot(&rec.parameters, y) > best + 1e-9 {
                    v.violations
                        .push(format!("subproblem {} is not a weighted-sum minimizer", rec.index));
                }
                let objective = weighted(problem, &rec.parameters);
                check_value(&mut v, problem, &objective, rec.index, rec.objective_value)?;
            }
        }
        Method::Ecm => {
            if report.full_grid {
                // every efficient image inside the grid box must be found
                let top = report.grid_top.clone().unwrap_or_default();
                let inside: Vec<&Vec<f64>> = front
                    .iter()
                    .filter(|y| y[1..].iter().zip(&top).all(|(a, b)| *a <= b + 1e-9))
                    .collect();
                let missing = inside.iter().filter(|y| !report.archive.contains(y)).count();
                if missing > 0 || inside.len() != report.archive.len() {
                    v.violations.push(format!(
                        "full grid archive has {} points, oracle front inside the grid box {} ({missing} missing)",
                        report.archive.len(),
                        inside.len()
                    ));
                }
            }
            let rho = report
                .rho
                .ok_or_else(|| Error::Validation("ECM report without rho".into()))?;
            let mut sub = SubproblemModel::new(problem, rho)?;
            for rec in &report.records {
                match rec.status {
                    SubproblemStatus::SkippedByPropagation => {
                        sub.set_eps(&rec.parameters);
                        let out = solve_mip(&sub.model, &sub.objective, &MipOptions::default())?;
                        v.skips_checked += 1;
                        if out.status != MipStatus::Infeasible {
                            v.violations.push(format!(
                                "false skip at subproblem {} (cell {:?})",
                                rec.index,
                                rec.cell.as_deref().unwrap_or(&[])
                            ));
                        }
                    }
                    SubproblemStatus::Optimal | SubproblemStatus::Infeasible => {
                        sub.set_eps(&rec.parameters);
                        let objective = sub.objective.clone();
                        check_value(&mut v, &sub.model, &objective, rec.index, rec.objective_value)?;
                    }
                    SubproblemStatus::Limit | SubproblemStatus::Failed => {}
                }
            }
        }
    }
    Ok(v)
}

fn weighted(problem: &Problem, w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; problem.num_vars()];
    for (row, wi) in problem.objectives().iter().zip(w) {
        for (o, c) in out.iter_mut().zip(row) {
            *o += wi * c;
        }
    }
    out
}

fn check_value(v: &mut Verdict, model: &Problem, objective: &[f64], index: usize, value: Option<f64>) -> Result<()> {
    let cold = solve_mip(model, objective, &MipOptions::default())?;
    v.values_checked += 1;
    let agree = match (cold.status, value) {
        (MipStatus::Optimal, Some(x)) => (cold.objective_value - x).abs() <= VALUE_TOL,
        (MipStatus::Infeasible, None) => true,
        _ => false,
    };
    if !agree {
        v.violations.push(format!(
            "subproblem {index}: recorded value {value:?}, cold re-solve {:?} {}",
            cold.status, cold.objective_value
        ));
    }
    Ok(())
}
