//! Best-bound branch-and-bound over the simplex core.
//!
//! Warm-start hooks: a start basis for the root relaxation and a candidate
//! point injected as the initial incumbent. Child nodes reoptimize from the
//! parent's final basis with the dual simplex (a bound change is a
//! right-hand-side change).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{check_len, Error, Result};
use crate::model::{dot, Problem, Solution, FEASIBILITY_TOL, INTEGRALITY_TOL};
use crate::simplex::{Algorithm, Basis, ChangeKind, LpData, LpOptions, LpStatus, WarmBasis};

/// Nodes whose bound is within this of the incumbent are pruned.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MipOptions {
    pub warm_solution: Option<Vec<f64>>,
    pub warm_basis: Option<WarmBasis>,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    pub collect_pool: bool,
    /// Record `(global lower bound, incumbent)` after every node.
    pub record_trace: bool,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            warm_solution: None,
            warm_basis: None,
            node_limit: 1_000_000,
            time_limit: None,
            collect_pool: false,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub lower_bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone)]
pub struct MipOutcome {
    pub status: MipStatus,
    pub solution: Option<Solution>,
    /// Scalar objective of `solution`; `+inf` when there is none.
    pub objective_value: f64,
    pub nodes: usize,
    pub root_iterations: usize,
    pub total_lp_iterations: usize,
    pub incumbent_injected: bool,
    pub injected_value: Option<f64>,
    /// Every improving incumbent in discovery order (when `collect_pool`).
    pub pool: Vec<Solution>,
    /// Final basis of the root relaxation, the warm-start payload for the
    /// next related solve.
    pub root_basis: Option<Basis>,
    pub root_algorithm: Option<Algorithm>,
    pub trace: Vec<BoundSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Injection {
    Accepted(f64),
    RejectedInfeasible,
    RejectedNonIntegral,
}

/// Checks whether `candidate` can serve as an initial incumbent.
pub fn try_inject_incumbent(problem: &Problem, objective: &[f64], candidate: &[f64]) -> Result<Injection> {
    check_len(problem.num_vars(), objective.len())?;
    check_len(problem.num_vars(), candidate.len())?;
    let in_bounds = candidate
        .iter()
        .zip(problem.lower().iter().zip(problem.upper()))
        .all(|(&x, (&lo, &hi))| x.is_finite() && x >= lo - FEASIBILITY_TOL && x <= hi + FEASIBILITY_TOL);
    let rows_ok = problem
        .constraints()
        .iter()
        .all(|c| c.violation(candidate) <= FEASIBILITY_TOL);
    if !(in_bounds && rows_ok) {
        return Ok(Injection::RejectedInfeasible);
    }
    if !problem.is_integral(candidate, INTEGRALITY_TOL) {
        return Ok(Injection::RejectedNonIntegral);
    }
    Ok(Injection::Accepted(dot(objective, candidate)))
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    start: Option<WarmBasis>,
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the maximum: invert so the lowest bound, then the
    // oldest node, comes first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Most fractional integer variable, lowest index on ties.
fn branching_variable(problem: &Problem, point: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in problem.integer_vars() {
        let frac = point[j] - point[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist > INTEGRALITY_TOL && best.is_none_or(|(_, d)| dist > d) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

fn snap_integral(problem: &Problem, point: &mut [f64]) {
    for j in problem.integer_vars() {
        point[j] = point[j].round();
    }
}

/// Minimizes `objective . x` over the integer feasible set of `problem`.
pub fn solve_mip(problem: &Problem, objective: &[f64], options: &MipOptions) -> Result<MipOutcome> {
    check_len(problem.num_vars(), objective.len())?;
    if options.node_limit == 0 {
        return Err(Error::Validation("node limit must be positive".into()));
    }
    if options.time_limit.is_some_and(|t| t.is_zero()) {
        return Err(Error::Validation("time limit must be positive".into()));
    }
    let started = Instant::now();
    let data = LpData::new(problem.constraints(), problem.num_vars());
    let lp_options = LpOptions::default();

    let mut out = MipOutcome {
        status: MipStatus::Infeasible,
        solution: None,
        objective_value: f64::INFINITY,
        nodes: 0,
        root_iterations: 0,
        total_lp_iterations: 0,
        incumbent_injected: false,
        injected_value: None,
        pool: Vec::new(),
        root_basis: None,
        root_algorithm: None,
        trace: Vec::new(),
    };

    if let Some(candidate) = &options.warm_solution {
        if let Injection::Accepted(value) = try_inject_incumbent(problem, objective, candidate)? {
            out.solution = Some(Solution::from_point(problem, candidate.clone())?);
            out.objective_value = value;
            out.incumbent_injected = true;
            out.injected_value = Some(value);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        lower: problem.lower().to_vec(),
        upper: problem.upper().to_vec(),
        start: options.warm_basis.clone(),
        bound: f64::NEG_INFINITY,
        seq,
    });
    let mut hit_limit = false;

    while let Some(node) = heap.pop() {
        if node.bound >= out.objective_value - PRUNE_TOL {
            // Best-bound order: every remaining node is at least as bad.
            heap.clear();
            break;
        }
        let time_up = options.time_limit.is_some_and(|t| started.elapsed() >= t);
        if out.nodes >= options.node_limit || time_up {
            hit_limit = true;
            heap.push(node);
            break;
        }
        out.nodes += 1;
        let is_root = out.nodes == 1;
        let lp = data.solve(
            objective,
            &node.lower,
            &node.upper,
            node.start.as_ref(),
            Algorithm::Auto,
            &lp_options,
        )?;
        out.total_lp_iterations += lp.iterations();
        if is_root {
            out.root_iterations = lp.iterations();
            out.root_basis = Some(lp.basis.clone());
            out.root_algorithm = Some(lp.started_with);
        }
        match lp.status {
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::IterationLimit => hit_limit = true,
            LpStatus::Optimal => {
                let value = lp.objective_value;
                if value < out.objective_value - PRUNE_TOL {
                    match branching_variable(problem, &lp.point) {
                        None => {
                            let mut point = lp.point;
                            snap_integral(problem, &mut point);
                            let value = dot(objective, &point);
                            if value < out.objective_value - PRUNE_TOL {
                                let solution = Solution::from_point(problem, point)?;
                                if options.collect_pool {
                                    out.pool.push(solution.clone());
                                }
                                out.solution = Some(solution);
                                out.objective_value = value;
                            }
                        }
                        Some(j) => {
                            let v = lp.point[j];
                            let parent = WarmBasis {
                                basis: lp.basis,
                                change: ChangeKind::RhsOnly,
                            };
                            let mut down_upper = node.upper.clone();
                            down_upper[j] = v.floor();
                            let mut up_lower = node.lower.clone();
                            up_lower[j] = v.ceil();
                            seq += 1;
                            heap.push(Node {
                                lower: node.lower,
                                upper: down_upper,
                                start: Some(parent.clone()),
                                bound: value,
                                seq,
                            });
                            seq += 1;
                            heap.push(Node {
                                lower: up_lower,
                                upper: node.upper,
                                start: Some(parent),
                                bound: value,
                                seq,
                            });
                        }
                    }
                }
            }
        }
        if options.record_trace {
            let open = heap.peek().map_or(f64::INFINITY, |n| n.bound);
            out.trace.push(BoundSample {
                lower_bound: open.min(out.objective_value),
                incumbent: out.objective_value,
            });
        }
    }

    out.status = if hit_limit {
        MipStatus::LimitReached
    } else if out.solution.is_some() {
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearConstraint, Sense, VarType};
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn binaries(n: usize, objective: Vec<f64>, rows: Vec<LinearConstraint>) -> Problem {
        let mut second = objective.clone();
        second.iter_mut().for_each(|c| *c = -*c);
        Problem::new(
            "t",
            vec![VarType::Binary; n],
            vec![0.0; n],
            vec![1.0; n],
            vec![objective, second],
            rows,
        )
        .unwrap()
    }

    fn knapsack(seed: u64, n: usize) -> (Problem, Vec<f64>) {
        let mut rng = SplitMix64::new(seed);
        let w: Vec<f64> = (0..n).map(|_| rng.int_in(1, 30) as f64).collect();
        let c: Vec<f64> = (0..n).map(|_| -(rng.int_in(1, 30) as f64)).collect();
        let cap = (w.iter().sum::<f64>() / 2.0).ceil();
        let row = LinearConstraint::new(w.iter().copied().enumerate().collect(), Sense::Le, cap);
        (binaries(n, c.clone(), vec![row]), c)
    }

    /// Independent exhaustive minimum over all binary points.
    fn enumerate_min(problem: &Problem, objective: &[f64]) -> Option<f64> {
        let n = problem.num_vars();
        (0u32..1 << n)
            .map(|mask| (0..n).map(|j| f64::from((mask >> j) & 1)).collect::<Vec<_>>())
            .filter(|x| problem.constraints().iter().all(|c| c.violation(x) <= 1e-9))
            .map(|x| dot(objective, &x))
            .min_by(f64::total_cmp)
    }

    #[test]
    fn single_binary() {
        let p = binaries(1, vec![-1.0], vec![]);
        let out = solve_mip(&p, &[-1.0], &MipOptions::default()).unwrap();
        assert_eq!(out.status, MipStatus::Optimal);
        assert_eq!(out.solution.unwrap().point, vec![1.0]);
        assert_eq!(out.objective_value, -1.0);
    }

    #[test]
    fn infeasible_integer_program() {
        let row = LinearConstraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 3.0);
        let p = binaries(2, vec![1.0, 1.0], vec![row]);
        let out = solve_mip(&p, &[1.0, 1.0], &MipOptions::default()).unwrap();
        assert_eq!(out.status, MipStatus::Infeasible);
        assert!(out.solution.is_none());
    }

    #[test]
    fn injection_examples() {
        let row = LinearConstraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0);
        let p = binaries(2, vec![-1.0, -2.0], vec![row]);
        let obj = [-1.0, -2.0];
        assert_eq!(
            try_inject_incumbent(&p, &obj, &[1.0, 0.0]).unwrap(),
            Injection::Accepted(-1.0)
        );
        assert_eq!(
            try_inject_incumbent(&p, &obj, &[1.0, 1.0]).unwrap(),
            Injection::RejectedInfeasible
        );
        assert_eq!(
            try_inject_incumbent(&p, &obj, &[0.5, 0.5]).unwrap(),
            Injection::RejectedNonIntegral
        );
        assert!(try_inject_incumbent(&p, &obj, &[1.0]).is_err());

        let options = MipOptions {
            warm_solution: Some(vec![1.0, 0.0]),
            ..MipOptions::default()
        };
        let out = solve_mip(&p, &obj, &options).unwrap();
        assert!(out.incumbent_injected);
        assert_eq!(out.injected_value, Some(-1.0));
        assert_eq!(out.objective_value, -2.0);
    }

    #[test]
    fn invalid_limits_rejected() {
        let p = binaries(1, vec![-1.0], vec![]);
        let zero_nodes = MipOptions {
            node_limit: 0,
            ..MipOptions::default()
        };
        assert!(matches!(solve_mip(&p, &[-1.0], &zero_nodes), Err(Error::Validation(_))));
        let zero_time = MipOptions {
            time_limit: Some(Duration::ZERO),
            ..MipOptions::default()
        };
        assert!(matches!(solve_mip(&p, &[-1.0], &zero_time), Err(Error::Validation(_))));
    }

    #[test]
    fn node_limit_reports_limit() {
        let (p, c) = knapsack(3, 12);
        let options = MipOptions {
            node_limit: 1,
            ..MipOptions::default()
        };
        let out = solve_mip(&p, &c, &options).unwrap();
        assert_eq!(out.nodes, 1);
        assert_eq!(out.status, MipStatus::LimitReached);
    }

    #[test]
    fn knapsack_matches_enumeration() {
        for seed in 0..20 {
            let (p, c) = knapsack(seed, 8);
            let out = solve_mip(&p, &c, &MipOptions::default()).unwrap();
            assert_eq!(out.status, MipStatus::Optimal);
            assert!(
                (out.objective_value - enumerate_min(&p, &c).unwrap()).abs() < 1e-9,
                "seed {seed}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn warm_and_cold_agree(seed in any::<u64>(), n in 3usize..10, pick in any::<u64>()) {
            let (p, c) = knapsack(seed, n);
            let cold = solve_mip(&p, &c, &MipOptions::default()).unwrap();
            // warm: a feasible incumbent plus the root basis of a related objective
            let other: Vec<f64> = c.iter().rev().copied().collect();
            let related = solve_mip(&p, &other, &MipOptions::default()).unwrap();
            let options = MipOptions {
                warm_solution: related.solution.map(|s| s.point),
                warm_basis: related.root_basis.map(|basis| WarmBasis { basis, change: ChangeKind::ObjectiveOnly }),
                ..MipOptions::default()
            };
            let warm = solve_mip(&p, &c, &options).unwrap();
            prop_assert_eq!(cold.status, warm.status);
            prop_assert!((cold.objective_value - warm.objective_value).abs() < 1e-9);
            prop_assert_eq!(warm.root_algorithm, Some(Algorithm::Primal));

            // an arbitrary feasible injected point never worsens the optimum
            let n = p.num_vars();
            let mut x: Vec<f64> = (0..n).map(|j| f64::from(((pick >> j) & 1) as u8)).collect();
            while p.constraints().iter().any(|r| r.violation(&x) > 1e-9) {
                let j = x.iter().position(|v| *v == 1.0).unwrap();
                x[j] = 0.0;
            }
            let injected = solve_mip(&p, &c, &MipOptions { warm_solution: Some(x.clone()), ..MipOptions::default() }).unwrap();
            prop_assert!(injected.objective_value <= dot(&c, &x) + 1e-9);
            prop_assert!((injected.objective_value - cold.objective_value).abs() < 1e-9);
        }

        #[test]
        fn bound_trace_is_monotone(seed in any::<u64>(), n in 3usize..12) {
            let (p, c) = knapsack(seed, n);
            let out = solve_mip(&p, &c, &MipOptions { record_trace: true, ..MipOptions::default() }).unwrap();
            for pair in out.trace.windows(2) {
                prop_assert!(pair[1].lower_bound >= pair[0].lower_bound - 1e-9);
                prop_assert!(pair[1].incumbent <= pair[0].incumbent);
            }
            for s in &out.trace {
                prop_assert!(s.lower_bound <= s.incumbent + 1e-9);
            }
        }
    }
}
