//! Seeded generators for knapsack (KP), assignment (AP) and travelling
//! salesman (TSP) instances.
//!
//! Every coefficient is drawn from [`SplitMix64`] seeded with `spec.seed`
//! in a fixed order, so an instance depends only on its [`GenSpec`]. All
//! objectives are stored in minimization sense.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{LinearConstraint, Problem, Sense, VarType};
use crate::rng::SplitMix64;

/// Coefficients are uniform integers in `[COEF_MIN, COEF_MAX]`.
pub const COEF_MIN: i64 = 1;
pub const COEF_MAX: i64 = 100;
/// Largest TSP size accepted.
pub const TSP_MAX_SIZE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Kp,
    Ap,
    Tsp,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Kp => "KP",
            Family::Ap => "AP",
            Family::Tsp => "TSP",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "KP" => Ok(Family::Kp),
            "AP" => Ok(Family::Ap),
            "TSP" => Ok(Family::Tsp),
            _ => Err(Error::Validation(format!(
                "unknown family {s:?} (expected KP, AP or TSP)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenSpec {
    pub family: Family,
    /// Items, agents or cities.
    pub size: usize,
    /// Number of objectives.
    pub p: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, size: usize, p: usize, seed: u64) -> Self {
        Self { family, size, p, seed }
    }

    /// `{family}_{size:03}_{p}obj_{seed}.json`
    pub fn file_name(&self) -> String {
        format!("{}_{:03}_{}obj_{}.json", self.family, self.size, self.p, self.seed)
    }

    fn check(&self, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::Validation(format!(
                "expected a {family} spec, got {}",
                self.family
            )));
        }
        if self.size < 2 {
            return Err(Error::Validation(format!("size must be at least 2, got {}", self.size)));
        }
        if self.p < 2 {
            return Err(Error::Validation(format!("need at least 2 objectives, got {}", self.p)));
        }
        Ok(())
    }

    fn name(&self) -> String {
        format!("{} {:03}", self.family, self.size)
    }
}

/// Dispatches on `spec.family`.
pub fn generate(spec: &GenSpec) -> Result<Problem> {
    match spec.family {
        Family::Kp => gen_knapsack(spec),
        Family::Ap => gen_assignment(spec),
        Family::Tsp => gen_tsp(spec),
    }
}

fn coef(rng: &mut SplitMix64) -> f64 {
    rng.int_in(COEF_MIN, COEF_MAX) as f64
}

/// Weights first, then `p` profit rows; capacity `ceil(sum w / 2)`.
pub fn gen_knapsack(spec: &GenSpec) -> Result<Problem> {
    gen_knapsack_with_capacity(spec, None)
}

/// As [`gen_knapsack`] with an optional capacity override.
pub fn gen_knapsack_with_capacity(spec: &GenSpec, capacity: Option<f64>) -> Result<Problem> {
    spec.check(Family::Kp)?;
    let n = spec.size;
    let mut rng = SplitMix64::new(spec.seed);
    let weights: Vec<f64> = (0..n).map(|_| coef(&mut rng)).collect();
    let objectives: Vec<Vec<f64>> = (0..spec.p).map(|_| (0..n).map(|_| -coef(&mut rng)).collect()).collect();
    let capacity = capacity.unwrap_or_else(|| (weights.iter().sum::<f64>() / 2.0).ceil());
    let row = LinearConstraint::new(weights.into_iter().enumerate().collect(), Sense::Le, capacity);
    Problem::new(
        spec.name(),
        vec![VarType::Binary; n],
        vec![0.0; n],
        vec![1.0; n],
        objectives,
        vec![row],
    )
}

/// `x_ij` (agent `i` does job `j`) at index `i * size + j`; one equality
/// per agent, then one per job.
pub fn gen_assignment(spec: &GenSpec) -> Result<Problem> {
    spec.check(Family::Ap)?;
    let n = spec.size;
    let mut rng = SplitMix64::new(spec.seed);
    let objectives: Vec<Vec<f64>> = (0..spec.p)
        .map(|_| (0..n * n).map(|_| coef(&mut rng)).collect())
        .collect();
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        rows.push(LinearConstraint::new(
            (0..n).map(|j| (i * n + j, 1.0)).collect(),
            Sense::Eq,
            1.0,
        ));
    }
    for j in 0..n {
        rows.push(LinearConstraint::new(
            (0..n).map(|i| (i * n + j, 1.0)).collect(),
            Sense::Eq,
            1.0,
        ));
    }
    Problem::new(
        spec.name(),
        vec![VarType::Binary; n * n],
        vec![0.0; n * n],
        vec![1.0; n * n],
        objectives,
        rows,
    )
}

/// Index of arc `i -> j` (`i != j`) in row-major order skipping the diagonal.
pub fn tsp_arc_index(size: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < size && j < size);
    i * (size - 1) + if j > i { j - 1 } else { j }
}

/// Directed arcs (see [`tsp_arc_index`]) followed by continuous order
/// variables `u_1..u_{n-1}` in `[1, n-1]`. Rows: out-degree per city,
/// in-degree per city, then `u_i - u_j + (n-1) x_ij <= n-2` for every arc
/// between non-depot cities. Distances are symmetric, drawn for `i < j`.
pub fn gen_tsp(spec: &GenSpec) -> Result<Problem> {
    spec.check(Family::Tsp)?;
    let n = spec.size;
    if n > TSP_MAX_SIZE {
        return Err(Error::TooLarge(format!("TSP size {n} exceeds {TSP_MAX_SIZE}")));
    }
    let arcs = n * (n - 1);
    let num_vars = arcs + n - 1;
    let u = |i: usize| arcs + i - 1;
    let mut rng = SplitMix64::new(spec.seed);
    let mut objectives = Vec::with_capacity(spec.p);
    for _ in 0..spec.p {
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = coef(&mut rng);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        let mut row = vec![0.0; num_vars];
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                row[tsp_arc_index(n, i, j)] = d[i][j];
            }
        }
        objectives.push(row);
    }

    let mut rows = Vec::new();
    for i in 0..n {
        let out = (0..n)
            .filter(|&j| j != i)
            .map(|j| (tsp_arc_index(n, i, j), 1.0))
            .collect();
        rows.push(LinearConstraint::new(out, Sense::Eq, 1.0));
    }
    for j in 0..n {
        let inn = (0..n)
            .filter(|&i| i != j)
            .map(|i| (tsp_arc_index(n, i, j), 1.0))
            .collect();
        rows.push(LinearConstraint::new(inn, Sense::Eq, 1.0));
    }
    let big = (n - 1) as f64;
    for i in 1..n {
        for j in (1..n).filter(|&j| j != i) {
            rows.push(LinearConstraint::new(
                vec![(u(i), 1.0), (u(j), -1.0), (tsp_arc_index(n, i, j), big)],
                Sense::Le,
                big - 1.0,
            ));
        }
    }

    let mut var_types = vec![VarType::Binary; arcs];
    var_types.extend(std::iter::repeat_n(VarType::Continuous, n - 1));
    let mut lower = vec![0.0; arcs];
    lower.extend(std::iter::repeat_n(1.0, n - 1));
    let mut upper = vec![1.0; arcs];
    upper.extend(std::iter::repeat_n(big, n - 1));
    Problem::new(spec.name(), var_types, lower, upper, objectives, rows)
}
