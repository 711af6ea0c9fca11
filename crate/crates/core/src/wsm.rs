//! Weighted-sum scalarization: weight sampling, orderings and the
//! warm-started solve loop.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::branch_bound::{solve_mip, MipOptions, MipStatus};
use crate::error::{check_len, Error, Result};
use crate::model::Problem;
use crate::pareto::filter_nondominated;
use crate::report::{Method, RunReport, RunStats, SubproblemRecord, SubproblemStatus, Totals, WarmKind};
use crate::rng::SplitMix64;
use crate::simplex::{ChangeKind, WarmBasis};

/// Sampled weights with a component below this are drawn again.
pub const MIN_WEIGHT: f64 = 1e-9;

/// Strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight(Vec<f64>);

impl Weight {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Validation(format!(
                "weights must be positive, got {components:?}"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Angle to the all-ones direction.
    pub fn angle(&self) -> f64 {
        let p = self.0.len() as f64;
        let norm = self.0.iter().map(|w| w * w).sum::<f64>().sqrt();
        let cos = self.0.iter().sum::<f64>() / (norm * p.sqrt());
        cos.clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightOrdering {
    Random,
    Lexicographic,
    Angle,
}

impl fmt::Display for WeightOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightOrdering::Random => "random",
            WeightOrdering::Lexicographic => "lex",
            WeightOrdering::Angle => "angle",
        })
    }
}

impl FromStr for WeightOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(WeightOrdering::Random),
            "lex" | "lexicographic" => Ok(WeightOrdering::Lexicographic),
            "angle" => Ok(WeightOrdering::Angle),
            _ => Err(Error::Validation(format!("unknown ordering {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WsmWarm {
    None,
    /// Offer the predecessor's optimum and root basis.
    Previous,
}

impl fmt::Display for WsmWarm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WsmWarm::None => "none",
            WsmWarm::Previous => "previous",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsmConfig {
    pub num_samples: usize,
    pub ordering: WeightOrdering,
    pub warm_start: WsmWarm,
    /// Seeds the weights; the random ordering uses a stream derived from it,
    /// so every ordering sees the same weights.
    pub seed: u64,
}

/// `n` weights uniform on the open simplex: `p` standard exponentials,
/// normalized.
pub fn sample_weights(p: usize, n: usize, seed: u64) -> Result<Vec<Weight>> {
    if p < 2 || n < 1 {
        return Err(Error::Validation(format!("need p >= 2 and n >= 1, got p={p}, n={n}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let draws: Vec<f64> = (0..p).map(|_| rng.exponential()).collect();
        let sum: f64 = draws.iter().sum();
        let w: Vec<f64> = draws.iter().map(|e| e / sum).collect();
        if w.iter().all(|c| *c >= MIN_WEIGHT) {
            out.push(Weight::new(w)?);
        }
    }
    Ok(out)
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// A permutation of `0..weights.len()` in the order the subproblems run.
pub fn order_weights(weights: &[Weight], strategy: WeightOrdering, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    match strategy {
        WeightOrdering::Random => SplitMix64::new(seed).shuffle(&mut idx),
        WeightOrdering::Lexicographic => idx.sort_by(|&a, &b| lex(&weights[a].0, &weights[b].0).then(a.cmp(&b))),
        WeightOrdering::Angle => {
            let angles: Vec<f64> = weights.iter().map(Weight::angle).collect();
            idx.sort_by(|&a, &b| {
                angles[a]
                    .total_cmp(&angles[b])
                    .then_with(|| lex(&weights[a].0, &weights[b].0))
                    .then(a.cmp(&b))
            })
        }
    }
    idx
}

/// `sum_i w_i c_i`, componentwise.
pub fn scalarized_objective(problem: &Problem, w: &Weight) -> Result<Vec<f64>> {
    check_len(problem.objective_count(), w.0.len())?;
    let mut out = vec![0.0; problem.num_vars()];
    for (row, wi) in problem.objectives().iter().zip(&w.0) {
        for (o, c) in out.iter_mut().zip(row) {
            *o += wi * c;
        }
    }
    Ok(out)
}

/// Seed of the random ordering, derived from the weight seed.
fn ordering_seed(seed: u64) -> u64 {
    SplitMix64::new(seed ^ 0x6f72_6465_7269_6e67).next_u64()
}

pub fn run_wsm(problem: &Problem, config: &WsmConfig) -> Result<RunReport> {
    if config.num_samples == 0 {
        return Err(Error::Validation("num_samples must be at least 1".into()));
    }
    let weights = sample_weights(problem.objective_count(), config.num_samples, config.seed)?;
    let order = order_weights(&weights, config.ordering, ordering_seed(config.seed));

    let mut records = Vec::with_capacity(order.len());
    let mut found = Vec::new();
    let mut stats = RunStats::default();
    let mut previous: Option<(Vec<f64>, WarmBasis)> = None;

    for (index, &wi) in order.iter().enumerate() {
        let w = &weights[wi];
        let objective = scalarized_objective(problem, w)?;
        let mut rec = SubproblemRecord::new(index, w.0.clone(), None);
        let mut options = MipOptions::default();
        if config.warm_start == WsmWarm::Previous {
            if let Some((point, basis)) = &previous {
                options.warm_solution = Some(point.clone());
                options.warm_basis = Some(basis.clone());
                stats.warm_starts += 1;
            }
        }
        rec.warm_kind = WarmKind::from_parts(options.warm_solution.is_some(), options.warm_basis.is_some());
        let started = Instant::now();
        let result = solve_mip(problem, &objective, &options);
        rec.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        match result {
            Err(e) => rec.error = Some(e.to_string()),
            Ok(out) => {
                rec.injected = out.incumbent_injected;
                rec.lp_iterations = out.total_lp_iterations;
                rec.nodes = out.nodes;
                rec.status = match out.status {
                    MipStatus::Optimal => SubproblemStatus::Optimal,
                    MipStatus::Infeasible => SubproblemStatus::Infeasible,
                    MipStatus::LimitReached => SubproblemStatus::Limit,
                };
                if out.status == MipStatus::Optimal {
                    let sol = out.solution.expect("optimal outcome carries a solution");
                    rec.objective_value = Some(out.objective_value);
                    rec.objectives = Some(sol.objectives.clone());
                    rec.point = Some(sol.point.clone());
                    if let Some(basis) = out.root_basis {
                        previous = Some((
                            sol.point.clone(),
                            WarmBasis {
                                basis,
                                change: ChangeKind::ObjectiveOnly,
                            },
                        ));
                    }
                    found.push((sol.objectives.clone(), sol));
                }
            }
        }
        records.push(rec);
    }

    Ok(RunReport {
        instance: problem.name().to_string(),
        method: Method::Wsm,
        variant: config.ordering.to_string(),
        warm: config.warm_start.to_string(),
        propagate: None,
        rho: None,
        grid_dims: None,
        full_grid: false,
        grid_top: None,
        totals: Totals::from_records(&records),
        records,
        archive: filter_nondominated(found),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_knapsack, Family, GenSpec};
    use crate::model::{dot, VarType};
    use proptest::prelude::*;

    #[test]
    fn single_weight_is_valid() {
        let w = sample_weights(3, 1, 9).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].components().iter().all(|c| *c > 0.0));
        assert!((w[0].components().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(sample_weights(1, 5, 0).is_err());
        assert!(sample_weights(3, 0, 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_centered() {
        assert_eq!(sample_weights(3, 100, 42).unwrap(), sample_weights(3, 100, 42).unwrap());
        let n = 100_000;
        let ws = sample_weights(3, n, 5).unwrap();
        for k in 0..3 {
            let mean = ws.iter().map(|w| w.components()[k]).sum::<f64>() / n as f64;
            assert!((mean - 1.0 / 3.0).abs() < 0.01, "component {k}: {mean}");
        }
    }

    #[test]
    fn ordering_examples() {
        let third = 1.0 / 3.0;
        let ws = vec![
            Weight::new(vec![0.6, 0.2, 0.2]).unwrap(),
            Weight::new(vec![third, third, 1.0 - 2.0 * third]).unwrap(),
        ];
        assert_eq!(order_weights(&ws, WeightOrdering::Angle, 0), vec![1, 0]);
        let sorted = vec![
            Weight::new(vec![0.1, 0.9]).unwrap(),
            Weight::new(vec![0.5, 0.5]).unwrap(),
            Weight::new(vec![0.7, 0.3]).unwrap(),
        ];
        assert_eq!(order_weights(&sorted, WeightOrdering::Lexicographic, 0), vec![0, 1, 2]);
    }

    #[test]
    fn angle_order_matches_recomputed_angles() {
        let ws = sample_weights(3, 100, 17).unwrap();
        let order = order_weights(&ws, WeightOrdering::Angle, 0);
        // second path: angle from the distance to the projection on the diagonal
        let angle = |w: &[f64]| {
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let along = mean * (w.len() as f64).sqrt();
            let off = w.iter().map(|c| (c - mean).powi(2)).sum::<f64>().sqrt();
            off.atan2(along)
        };
        for pair in order.windows(2) {
            assert!(angle(ws[pair[0]].components()) <= angle(ws[pair[1]].components()) + 1e-12);
        }
    }

    #[test]
    fn scalarization_examples() {
        let p = Problem::new(
            "s",
            vec![VarType::Binary; 2],
            vec![0.0; 2],
            vec![1.0; 2],
            vec![vec![2.0, 0.0], vec![0.0, 2.0]],
            vec![],
        )
        .unwrap();
        let half = Weight::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(scalarized_objective(&p, &half).unwrap(), vec![1.0, 1.0]);
        let three = Weight::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(scalarized_objective(&p, &three), Err(Error::Dimension { .. })));

        let same = Problem::new(
            "s",
            vec![VarType::Binary; 2],
            vec![0.0; 2],
            vec![1.0; 2],
            vec![vec![3.0, -1.0], vec![3.0, -1.0]],
            vec![],
        )
        .unwrap();
        let w = Weight::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(scalarized_objective(&same, &w).unwrap(), vec![3.0, -1.0]);
    }

    fn config(ordering: WeightOrdering, warm_start: WsmWarm) -> WsmConfig {
        WsmConfig {
            num_samples: 20,
            ordering,
            warm_start,
            seed: 3,
        }
    }

    #[test]
    fn archive_is_neutral_to_warm_start_and_ordering() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 8, 3, 2)).unwrap();
        let base = run_wsm(&p, &config(WeightOrdering::Random, WsmWarm::None)).unwrap();
        base.check_totals().unwrap();
        for ordering in [
            WeightOrdering::Random,
            WeightOrdering::Lexicographic,
            WeightOrdering::Angle,
        ] {
            for warm in [WsmWarm::None, WsmWarm::Previous] {
                let r = run_wsm(&p, &config(ordering, warm)).unwrap();
                assert!(r.archive.same_front(&base.archive), "{ordering} {warm}");
                if warm == WsmWarm::Previous {
                    assert_eq!(r.totals.injections, 19);
                    assert_eq!(r.stats.warm_starts, 19);
                }
            }
        }
        let again = run_wsm(&p, &config(WeightOrdering::Random, WsmWarm::Previous)).unwrap();
        let once = run_wsm(&p, &config(WeightOrdering::Random, WsmWarm::Previous)).unwrap();
        assert_eq!(again.archive, once.archive);
        let counts = |r: &RunReport| r.records.iter().map(|x| (x.lp_iterations, x.nodes)).collect::<Vec<_>>();
        assert_eq!(counts(&again), counts(&once));
    }

    #[test]
    fn single_sample_gives_one_point() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 6, 2, 1)).unwrap();
        let r = run_wsm(
            &p,
            &WsmConfig {
                num_samples: 1,
                ..config(WeightOrdering::Angle, WsmWarm::None)
            },
        )
        .unwrap();
        assert_eq!(r.archive.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn scalarization_matches_recomputation(seed in any::<u64>()) {
            let p = gen_knapsack(&GenSpec::new(Family::Kp, 6, 3, seed)).unwrap();
            let w = &sample_weights(3, 1, seed).unwrap()[0];
            let c = scalarized_objective(&p, w).unwrap();
            let x: Vec<f64> = (0..6).map(|j| f64::from((seed >> j) as u8 & 1)).collect();
            let direct: f64 = (0..3).map(|k| w.components()[k] * dot(p.objective(k), &x)).sum();
            prop_assert!((dot(&c, &x) - direct).abs() < 1e-9);
        }

        #[test]
        fn orderings_are_permutations(seed in any::<u64>(), n in 1usize..30) {
            let ws = sample_weights(3, n, seed).unwrap();
            for s in [WeightOrdering::Random, WeightOrdering::Lexicographic, WeightOrdering::Angle] {
                let mut o = order_weights(&ws, s, seed);
                o.sort_unstable();
                prop_assert_eq!(o, (0..n).collect::<Vec<_>>());
            }
        }
    }
}
