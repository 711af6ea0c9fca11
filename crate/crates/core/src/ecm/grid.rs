use std::fmt;
use std::str::FromStr;

use crate::branch_bound::{solve_mip, MipOptions, MipStatus};
use crate::error::{check_len, Error, Result};
use crate::model::{LinearConstraint, Problem, RowTag, Sense};

/// Per-objective minima over the feasible set and payoff-table maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealNadirEstimate {
    pub ideal: Vec<f64>,
    pub nadir_estimate: Vec<f64>,
    /// Row `k` is the objective vector of the point optimal for `f_k`.
    pub table: Vec<Vec<f64>>,
}

fn solved(problem: &Problem, objective: &[f64]) -> Result<crate::model::Solution> {
    let out = solve_mip(problem, objective, &MipOptions::default())?;
    match out.status {
        MipStatus::Optimal => Ok(out.solution.expect("optimal outcome carries a solution")),
        MipStatus::Infeasible => Err(Error::InfeasibleModel),
        MipStatus::LimitReached => Err(Error::LimitExceeded("payoff table solve hit a limit".into())),
    }
}

/// Solves `p` lexicographic problems: `min f_k`, then the sum of the other
/// objectives with `f_k` held at its minimum. Each row of the table is
/// therefore efficient.
pub fn payoff_table(problem: &Problem) -> Result<IdealNadirEstimate> {
    let p = problem.objective_count();
    let n = problem.num_vars();
    let mut table = Vec::with_capacity(p);
    for k in 0..p {
        let first = solved(problem, problem.objective(k))?;
        let v = first.objectives[k];
        let mut fixed = problem.clone();
        let coefs = problem
            .objective(k)
            .iter()
            .copied()
            .enumerate()
            .filter(|c| c.1 != 0.0)
            .collect();
        let mut row = LinearConstraint::new(coefs, Sense::Le, v + 1e-9 * v.abs().max(1.0));
        row.tag = RowTag::Epsilon(k);
        fixed.push_constraint(row)?;
        let mut rest = vec![0.0; n];
        for j in (0..p).filter(|&j| j != k) {
            for (r, c) in rest.iter_mut().zip(problem.objective(j)) {
                *r += c;
            }
        }
        let second = solved(&fixed, &rest)?;
        table.push(second.objectives.0);
    }
    let ideal = (0..p).map(|k| table[k][k]).collect();
    let nadir_estimate = (0..p)
        .map(|k| table.iter().map(|row| row[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(IdealNadirEstimate {
        ideal,
        nadir_estimate,
        table,
    })
}

/// Ascending epsilon levels for each constrained objective `f_2..f_p`
/// (dimension `d` bounds objective `d + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    levels: Vec<Vec<f64>>,
}

impl EpsilonGrid {
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation(
                "grid needs at least one constrained objective".into(),
            ));
        }
        for l in &levels {
            if l.is_empty() || l.windows(2).any(|w| !(w[0] < w[1])) || l.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "levels must be finite and strictly ascending: {l:?}"
                )));
            }
        }
        Ok(Self { levels })
    }

    /// Every integer from `ceil(ideal_k)` to `floor(upper_k)`, ideal included.
    pub fn integer_range(ideal: &[f64], upper: &[f64]) -> Result<Self> {
        check_len(ideal.len(), upper.len())?;
        let levels = (1..ideal.len())
            .map(|k| {
                let (lo, hi) = (ideal[k].ceil() as i64, upper[k].floor() as i64);
                (lo..=hi).map(|v| v as f64).collect()
            })
            .collect();
        Self::from_levels(levels)
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Level count per constrained objective.
    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn num_cells(&self) -> usize {
        self.levels.iter().map(Vec::len).product()
    }

    pub fn eps(&self, cell: &[usize]) -> Vec<f64> {
        cell.iter().zip(&self.levels).map(|(&i, l)| l[i]).collect()
    }

    /// Largest level per dimension.
    pub fn top(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l[l.len() - 1]).collect()
    }
}

/// Equidistant levels `ideal_k + j (nadir_k - ideal_k) / m`, `j = 1..m`.
/// `m = 1`, or an objective whose range is empty, yields the single level
/// `nadir_k`.
pub fn build_epsilon_grid(est: &IdealNadirEstimate, m: usize) -> Result<EpsilonGrid> {
    if m == 0 {
        return Err(Error::Validation("grid needs m >= 1".into()));
    }
    check_len(est.ideal.len(), est.nadir_estimate.len())?;
    let levels = (1..est.ideal.len())
        .map(|k| {
            let (lo, hi) = (est.ideal[k], est.nadir_estimate[k]);
            let range = hi - lo;
            if m == 1 || range <= 1e-9 * hi.abs().max(1.0) {
                return vec![hi];
            }
            let step = range / m as f64;
            let mut l: Vec<f64> = (1..=m).map(|j| lo + j as f64 * step).collect();
            l[m - 1] = hi;
            l
        })
        .collect();
    EpsilonGrid::from_levels(levels)
}

/// Traversal direction per constrained objective: `+` ascending, `-`
/// descending. Labels look like `o+-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderSignature {
    ascending: Vec<bool>,
}

impl OrderSignature {
    pub fn new(ascending: Vec<bool>) -> Result<Self> {
        if ascending.is_empty() {
            return Err(Error::Validation("signature needs at least one sign".into()));
        }
        Ok(Self { ascending })
    }

    pub fn all_ascending(len: usize) -> Self {
        Self {
            ascending: vec![true; len.max(1)],
        }
    }

    pub fn ascending(&self) -> &[bool] {
        &self.ascending
    }

    pub fn len(&self) -> usize {
        self.ascending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ascending.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            ascending: self.ascending.iter().map(|a| !a).collect(),
        }
    }

    pub fn label(&self) -> String {
        std::iter::once('o')
            .chain(self.ascending.iter().map(|&a| if a { '+' } else { '-' }))
            .collect()
    }
}

impl fmt::Display for OrderSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for OrderSignature {
    type Err = Error;

    /// Accepts `o` followed by `+`, `-` or `\u{2212}` signs.
    fn from_str(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix('o')
            .ok_or_else(|| Error::Validation(format!("signature {s:?} must start with 'o'")))?;
        let ascending = rest
            .chars()
            .map(|c| match c {
                '+' => Ok(true),
                '-' | '\u{2212}' => Ok(false),
                _ => Err(Error::Validation(format!("bad sign {c:?} in signature {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ascending)
    }
}

/// Cells of a grid with `dims` levels per dimension, dimension 0 varying
/// fastest, each dimension ascending or descending per `sig`.
pub fn traverse_dims(dims: &[usize], sig: &OrderSignature) -> Result<Vec<Vec<usize>>> {
    check_len(dims.len(), sig.len())?;
    if dims.contains(&0) {
        return Err(Error::Validation("grid dimension with no levels".into()));
    }
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; dims.len()];
    for _ in 0..total {
        out.push(
            counter
                .iter()
                .zip(dims)
                .zip(&sig.ascending)
                .map(|((&c, &d), &up)| if up { c } else { d - 1 - c })
                .collect(),
        );
        for (c, &d) in counter.iter_mut().zip(dims) {
            *c += 1;
            if *c < d {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}

pub fn traversal_order(grid: &EpsilonGrid, sig: &OrderSignature) -> Result<Vec<Vec<usize>>> {
    traverse_dims(&grid.dims(), sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_knapsack, Family, GenSpec};
    use crate::model::VarType;
    use crate::pareto::brute_force_oracle;
    use std::collections::HashSet;

    fn est(ideal: Vec<f64>, nadir: Vec<f64>) -> IdealNadirEstimate {
        IdealNadirEstimate {
            ideal,
            nadir_estimate: nadir,
            table: vec![],
        }
    }

    #[test]
    fn grid_examples() {
        let g = build_epsilon_grid(&est(vec![0.0, 0.0], vec![5.0, 10.0]), 10).unwrap();
        assert_eq!(g.levels()[0], (1..=10).map(f64::from).collect::<Vec<_>>());
        let g = build_epsilon_grid(&est(vec![0.0, 0.0, 2.0], vec![5.0, 10.0, 7.0]), 1).unwrap();
        assert_eq!(g.levels(), &[vec![10.0], vec![7.0]]);
        let collapsed = build_epsilon_grid(&est(vec![0.0, 3.0, 0.0], vec![1.0, 3.0, 4.0]), 4).unwrap();
        assert_eq!(collapsed.dims(), vec![1, 4]);
        assert!(build_epsilon_grid(&est(vec![0.0, 0.0], vec![1.0, 1.0]), 0).is_err());
        let full = EpsilonGrid::integer_range(&[0.0, -3.0], &[9.0, 0.0]).unwrap();
        assert_eq!(full.levels()[0], vec![-3.0, -2.0, -1.0, 0.0]);
    }

    #[test]
    fn generated_grid_is_equidistant() {
        let p = gen_knapsack(&GenSpec::new(Family::Kp, 10, 3, 1)).unwrap();
        let e = payoff_table(&p).unwrap();
        let g = build_epsilon_grid(&e, 10).unwrap();
        for (k, l) in g.levels().iter().enumerate() {
            let step = (e.nadir_estimate[k + 1] - e.ideal[k + 1]) / 10.0;
            assert!((l[0] - e.ideal[k + 1] - step).abs() < 1e-9);
            for w in l.windows(2) {
                assert!((w[1] - w[0] - step).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn payoff_matches_oracle_minima() {
        for seed in 1..=3 {
            let p = gen_knapsack(&GenSpec::new(Family::Kp, 10, 3, seed)).unwrap();
            let e = payoff_table(&p).unwrap();
            let front = brute_force_oracle(&p).unwrap().objective_vectors();
            for k in 0..3 {
                let min = front.iter().map(|y| y[k]).fold(f64::INFINITY, f64::min);
                let max = front.iter().map(|y| y[k]).fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(e.ideal[k], min);
                assert!(e.nadir_estimate[k] <= max);
                assert!(e.ideal[k] <= e.nadir_estimate[k]);
            }
            // every table row is efficient
            for row in &e.table {
                assert!(front.contains(row));
            }
        }
    }

    #[test]
    fn payoff_special_cases() {
        let sep = Problem::new(
            "sep",
            vec![VarType::Binary; 2],
            vec![0.0; 2],
            vec![1.0; 2],
            vec![vec![-3.0, 0.0], vec![0.0, 2.0]],
            vec![],
        )
        .unwrap();
        assert_eq!(payoff_table(&sep).unwrap().ideal, vec![-3.0, 0.0]);

        let single = Problem::new(
            "one",
            vec![VarType::Binary; 2],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![],
        )
        .unwrap();
        let e = payoff_table(&single).unwrap();
        assert_eq!(e.ideal, vec![1.0, 3.0]);
        assert_eq!(e.nadir_estimate, e.ideal);

        let empty = Problem::new(
            "none",
            vec![VarType::Binary],
            vec![0.0],
            vec![1.0],
            vec![vec![1.0], vec![2.0]],
            vec![LinearConstraint::new(vec![(0, 1.0)], Sense::Ge, 2.0)],
        )
        .unwrap();
        assert!(matches!(payoff_table(&empty), Err(Error::InfeasibleModel)));
    }

    #[test]
    fn traversal_examples() {
        let g = EpsilonGrid::from_levels(vec![vec![1.0, 2.0, 3.0, 4.0]; 2]).unwrap();
        let up = traversal_order(&g, &"o++".parse().unwrap()).unwrap();
        assert_eq!(up[0], vec![0, 0]);
        assert_eq!(up[1], vec![1, 0]);
        assert_eq!(up[4], vec![0, 1]);
        assert_eq!(up[15], vec![3, 3]);
        let mut down = traversal_order(&g, &"o\u{2212}\u{2212}".parse().unwrap()).unwrap();
        down.reverse();
        assert_eq!(down, up);
        let mixed = traversal_order(&g, &"o-+".parse().unwrap()).unwrap();
        assert_eq!(&mixed[..2], &[vec![3, 0], vec![2, 0]]);

        let g4 = EpsilonGrid::from_levels(vec![(0..10).map(f64::from).collect(); 3]).unwrap();
        let cells = traversal_order(&g4, &"o+-+".parse().unwrap()).unwrap();
        assert_eq!(cells.iter().collect::<HashSet<_>>().len(), 1000);
        assert!(traversal_order(&g4, &"o++".parse().unwrap()).is_err());
    }

    #[test]
    fn signature_parsing() {
        let s: OrderSignature = "o+-".parse().unwrap();
        assert_eq!(s.ascending(), &[true, false]);
        assert_eq!(s.label(), "o+-");
        assert_eq!(s.reversed().label(), "o-+");
        assert!("+-".parse::<OrderSignature>().is_err());
        assert!("o".parse::<OrderSignature>().is_err());
        assert!("o+x".parse::<OrderSignature>().is_err());
    }
}
