//! Augmented epsilon-constraint method.
//!
//! Subproblem at `eps`: minimize `f_1 + rho * (f_2 + ... + f_p)` subject to
//! `f_k <= eps_k` for `k >= 2`. The augmentation makes every optimum
//! efficient rather than only weakly efficient.
//!
//! The grid is walked in the nested order of an [`OrderSignature`]. An
//! infeasible subproblem stays infeasible for every tighter `eps`, which
//! lets propagation skip cells; an optimum found at `eps` is feasible for
//! every looser `eps`, which supplies warm starts.

mod grid;
mod pool;

use std::time::Instant;

pub use grid::{
    build_epsilon_grid, payoff_table, traversal_order, traverse_dims, EpsilonGrid, IdealNadirEstimate, OrderSignature,
};
pub use pool::{
    propagate_infeasibility, record_infeasible, select_warm_start, InfeasibilityStore, PoolEntry, SolutionPool,
    WarmPolicy, EPS_TOL,
};

use crate::branch_bound::{solve_mip, MipOptions, MipStatus};
use crate::error::{check_len, Error, Result};
use crate::model::{LinearConstraint, Problem, RowTag, Sense};
use crate::ordergrid::FeasibilityMask;
use crate::pareto::filter_nondominated;
use crate::report::{Method, RunReport, RunStats, SubproblemRecord, SubproblemStatus, Totals, WarmKind};
use crate::simplex::{Basis, ChangeKind, WarmBasis};

/// Augmentation weight for objectives that are not integer valued.
pub const CONTINUOUS_RHO: f64 = 1e-4;

/// How the epsilon levels are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `m` equidistant levels per objective between ideal and nadir estimate.
    Equidistant(usize),
    /// Every integer level from the ideal up to `upper` (the payoff-table
    /// nadir estimate when absent).
    IntegerRange { upper: Option<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcmConfig {
    pub grid: GridSpec,
    pub signature: OrderSignature,
    pub warm: WarmPolicy,
    pub propagate: bool,
    /// Overrides the automatic augmentation weight.
    pub rho: Option<f64>,
}

impl EcmConfig {
    pub fn new(m: usize, signature: OrderSignature) -> Self {
        Self {
            grid: GridSpec::Equidistant(m),
            signature,
            warm: WarmPolicy::None,
            propagate: false,
            rho: None,
        }
    }
}

/// For integer-valued objectives `1 / (2 (1 + sum_k range_k))`, where
/// `range_k` spans the grid from the ideal to the top level: the
/// augmentation can then never outweigh one unit of `f_1`, so a grid point
/// at an efficient image reproduces exactly that image. Otherwise
/// [`CONTINUOUS_RHO`].
pub fn default_rho(problem: &Problem, ideal: &[f64], grid: &EpsilonGrid) -> f64 {
    if !problem.has_integer_objectives() {
        return CONTINUOUS_RHO;
    }
    let span: f64 = grid
        .top()
        .iter()
        .zip(&ideal[1..])
        .map(|(top, lo)| (top - lo).max(0.0))
        .sum();
    1.0 / (2.0 * (1.0 + span))
}

/// Scalar objective `c_1 + rho (c_2 + ... + c_p)` and one `f_k <= eps_k`
/// row per constrained objective.
pub fn build_subproblem(problem: &Problem, eps: &[f64], rho: f64) -> Result<(Vec<f64>, Vec<LinearConstraint>)> {
    check_len(problem.objective_count() - 1, eps.len())?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Validation(format!("rho must be positive, got {rho}")));
    }
    let mut objective = problem.objective(0).to_vec();
    let mut rows = Vec::with_capacity(eps.len());
    for (d, &e) in eps.iter().enumerate() {
        let row = problem.objective(d + 1);
        for (o, c) in objective.iter_mut().zip(row) {
            *o += rho * c;
        }
        let coefs = row.iter().copied().enumerate().filter(|c| c.1 != 0.0).collect();
        let mut constraint = LinearConstraint::new(coefs, Sense::Le, e);
        constraint.tag = RowTag::Epsilon(d + 1);
        rows.push(constraint);
    }
    Ok((objective, rows))
}

/// A problem with epsilon rows appended whose right-hand sides are reset
/// per subproblem, keeping the row layout (and so warm bases) stable.
pub struct SubproblemModel {
    pub model: Problem,
    pub objective: Vec<f64>,
    eps_rows: Vec<usize>,
}

impl SubproblemModel {
    pub fn new(problem: &Problem, rho: f64) -> Result<Self> {
        let top = vec![f64::MAX; problem.objective_count() - 1];
        let (objective, rows) = build_subproblem(problem, &top, rho)?;
        let mut model = problem.clone();
        let eps_rows = rows
            .into_iter()
            .map(|r| model.push_constraint(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            objective,
            eps_rows,
        })
    }

    pub fn set_eps(&mut self, eps: &[f64]) {
        for (&row, &e) in self.eps_rows.iter().zip(eps) {
            self.model.set_rhs(row, e);
        }
    }
}

/// The grid a configuration resolves to, with the payoff table it used.
pub fn resolve_grid(problem: &Problem, spec: &GridSpec) -> Result<(IdealNadirEstimate, EpsilonGrid)> {
    if problem.objective_count() < 2 {
        return Err(Error::Validation("need at least two objectives".into()));
    }
    let est = payoff_table(problem)?;
    let grid = match spec {
        GridSpec::Equidistant(m) => build_epsilon_grid(&est, *m)?,
        GridSpec::IntegerRange { upper } => {
            let upper = upper.as_ref().unwrap_or(&est.nadir_estimate);
            check_len(problem.objective_count(), upper.len())?;
            EpsilonGrid::integer_range(&est.ideal, upper)?
        }
    };
    Ok((est, grid))
}

pub fn run_ecm(problem: &Problem, config: &EcmConfig) -> Result<RunReport> {
    let (est, grid) = resolve_grid(problem, &config.grid)?;
    let sig_len = problem.objective_count() - 1;
    check_len(sig_len, config.signature.len())?;
    let rho = match config.rho {
        Some(r) if !(r > 0.0) || !r.is_finite() => {
            return Err(Error::Validation(format!("rho must be positive, got {r}")));
        }
        Some(r) => r,
        None => default_rho(problem, &est.ideal, &grid),
    };
    let mut sub = SubproblemModel::new(problem, rho)?;
    let order = traversal_order(&grid, &config.signature)?;

    let mut records = Vec::with_capacity(order.len());
    let mut store = InfeasibilityStore::default();
    let mut pool = SolutionPool::default();
    let mut stats = RunStats::default();
    let mut last_basis: Option<Basis> = None;
    let mut found = Vec::new();

    for (index, cell) in order.into_iter().enumerate() {
        // cell time includes the propagation check and the pool scan
        let started = Instant::now();
        let eps = grid.eps(&cell);
        let mut rec = SubproblemRecord::new(index, eps.clone(), Some(cell));
        if config.propagate && store.covers(&eps) {
            rec.status = SubproblemStatus::SkippedByPropagation;
            stats.detections += 1;
            pool.record_gap();
            rec.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            records.push(rec);
            continue;
        }
        let mut options = MipOptions::default();
        if config.warm != WarmPolicy::None {
            if let Some(candidate) = select_warm_start(&pool, &eps, config.warm, &sub.objective) {
                options.warm_solution = Some(candidate.point.clone());
                stats.warm_starts += 1;
            }
            options.warm_basis = last_basis.clone().map(|basis| WarmBasis {
                basis,
                change: ChangeKind::RhsOnly,
            });
        }
        rec.warm_kind = WarmKind::from_parts(options.warm_solution.is_some(), options.warm_basis.is_some());
        sub.set_eps(&eps);

        let result = solve_mip(&sub.model, &sub.objective, &options);
        rec.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        match result {
            Err(e) => {
                rec.error = Some(e.to_string());
                pool.record_gap();
            }
            Ok(out) => {
                rec.injected = out.incumbent_injected;
                rec.lp_iterations = out.total_lp_iterations;
                rec.nodes = out.nodes;
                match out.status {
                    MipStatus::Optimal => {
                        rec.status = SubproblemStatus::Optimal;
                        let sol = out.solution.expect("optimal outcome carries a solution");
                        pool.record(&sol, &eps);
                        rec.objective_value = Some(out.objective_value);
                        rec.objectives = Some(sol.objectives.clone());
                        rec.point = Some(sol.point.clone());
                        found.push((sol.objectives.clone(), sol));
                        if out.root_basis.is_some() {
                            last_basis = out.root_basis;
                        }
                    }
                    MipStatus::Infeasible => {
                        rec.status = SubproblemStatus::Infeasible;
                        store.record(&eps);
                        pool.record_gap();
                    }
                    MipStatus::LimitReached => {
                        rec.status = SubproblemStatus::Limit;
                        pool.record_gap();
                    }
                }
            }
        }
        records.push(rec);
    }

    Ok(RunReport {
        instance: problem.name().to_string(),
        method: Method::Ecm,
        variant: config.signature.label(),
        warm: config.warm.to_string(),
        propagate: Some(config.propagate),
        rho: Some(rho),
        grid_dims: Some(grid.dims()),
        full_grid: matches!(config.grid, GridSpec::IntegerRange { .. }),
        grid_top: Some(grid.top()),
        totals: Totals::from_records(&records),
        records,
        archive: filter_nondominated(found),
        stats,
    })
}

/// Cell feasibility observed by an ECM run; `None` when some cell ended
/// without a verdict (limit or solver failure) or the report is not ECM.
pub fn harvest_mask(report: &RunReport) -> Option<Result<FeasibilityMask>> {
    let dims = report.grid_dims.clone()?;
    let probe = FeasibilityMask::uniform(dims.clone(), true).ok()?;
    let mut feasible = vec![true; probe.flags().len()];
    for r in &report.records {
        let idx = probe.index(r.cell.as_ref()?);
        feasible[idx] = match r.status {
            SubproblemStatus::Optimal => true,
            SubproblemStatus::Infeasible | SubproblemStatus::SkippedByPropagation => false,
            SubproblemStatus::Limit | SubproblemStatus::Failed => return None,
        };
    }
    Some(FeasibilityMask::new(dims, feasible))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_knapsack, Family, GenSpec};
    use crate::model::VarType;
    use crate::ordergrid::{analyze_order, enumerate_signatures, WsMode};
    use crate::pareto::{brute_force_oracle, dominates};

    #[test]
    fn subproblem_examples() {
        let p = Problem::new(
            "s",
            vec![VarType::Binary; 2],
            vec![0.0; 2],
            vec![1.0; 2],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![],
        )
        .unwrap();
        let (obj, rows) = build_subproblem(&p, &[0.5], 0.01).unwrap();
        assert_eq!(obj, vec![1.0, 0.01]);
        assert_eq!(rows.len(), 1);
        assert_eq!(
            (rows[0].sense, rows[0].rhs, rows[0].tag),
            (Sense::Le, 0.5, RowTag::Epsilon(1))
        );
        assert!(build_subproblem(&p, &[0.5, 1.0], 0.01).is_err());
        assert!(build_subproblem(&p, &[0.5], 0.0).is_err());
    }

    #[test]
    fn single_cell_grid() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 8, 3, 4)).unwrap();
        let r = run_ecm(&p, &EcmConfig::new(1, "o++".parse().unwrap())).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.archive.len(), 1);
        let front = brute_force_oracle(&p).unwrap();
        assert!(front.contains(&r.archive.entries()[0].objectives));
    }

    #[test]
    fn optima_are_efficient_and_runs_agree() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 8, 3, 9)).unwrap();
        let front = brute_force_oracle(&p).unwrap().objective_vectors();
        let mut base: Option<RunReport> = None;
        for sig in enumerate_signatures(3).unwrap() {
            for warm in [WarmPolicy::None, WarmPolicy::Weak, WarmPolicy::Strong] {
                for propagate in [false, true] {
                    let config = EcmConfig {
                        warm,
                        propagate,
                        ..EcmConfig::new(6, sig.clone())
                    };
                    let r = run_ecm(&p, &config).unwrap();
                    r.check_totals().unwrap();
                    for rec in r.records.iter().filter(|x| x.status == SubproblemStatus::Optimal) {
                        let y = rec.objectives.as_ref().unwrap();
                        assert!(front.iter().all(|z| !dominates(z, y).unwrap()));
                    }
                    let mask = harvest_mask(&r).unwrap().unwrap();
                    if warm != WarmPolicy::None && propagate {
                        let mode = if warm == WarmPolicy::Weak {
                            WsMode::Weak
                        } else {
                            WsMode::Strong
                        };
                        let c = analyze_order(&mask, &sig, mode).unwrap();
                        assert_eq!((c.warm_starts, c.detections), (r.stats.warm_starts, r.stats.detections));
                    }
                    if warm != WarmPolicy::None {
                        assert_eq!(r.totals.injections, r.stats.warm_starts);
                    }
                    match &base {
                        None => base = Some(r),
                        Some(b) => assert!(b.archive.same_front(&r.archive), "{sig} {warm} {propagate}"),
                    }
                }
            }
        }
    }

    #[test]
    fn full_integer_grid_recovers_front() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 6, 2, 3)).unwrap();
        let oracle = brute_force_oracle(&p).unwrap();
        let nadir: Vec<f64> = (0..2)
            .map(|k| {
                oracle
                    .objective_vectors()
                    .iter()
                    .map(|y| y[k])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let config = EcmConfig {
            grid: GridSpec::IntegerRange { upper: Some(nadir) },
            warm: WarmPolicy::Weak,
            propagate: true,
            ..EcmConfig::new(1, "o-".parse().unwrap())
        };
        let r = run_ecm(&p, &config).unwrap();
        assert!(r.full_grid);
        assert!(r.archive.same_front(&oracle));
    }

    #[test]
    fn rho_rule() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 4, 3, 1)).unwrap();
        let grid = EpsilonGrid::from_levels(vec![vec![-5.0, 0.0], vec![-2.0]]).unwrap();
        let rho = default_rho(&p, &[0.0, -10.0, -4.0], &grid);
        assert_eq!(rho, 1.0 / (2.0 * (1.0 + 10.0 + 2.0)));
        let bad = EcmConfig {
            rho: Some(-1.0),
            ..EcmConfig::new(2, "o++".parse().unwrap())
        };
        assert!(run_ecm(&p, &bad).is_err());
        assert!(run_ecm(&p, &EcmConfig::new(2, "o+".parse().unwrap())).is_err());
    }
}
