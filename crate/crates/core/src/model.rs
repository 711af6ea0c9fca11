//! Multi-objective MILP representation, instance file I/O and point evaluation.
//!
//! Every objective is stored in minimization sense. Instance files are single
//! JSON documents; infinite bounds are written as the strings `"-inf"` and
//! `"inf"`.

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};

/// Absolute feasibility tolerance for constraints and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Absolute integrality tolerance.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Continuous,
    Integer,
    Binary,
}

impl VarType {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarType::Continuous)
    }

    fn code(self) -> &'static str {
        match self {
            VarType::Continuous => "C",
            VarType::Integer => "I",
            VarType::Binary => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn code(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Marks rows appended by the epsilon-constraint method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowTag {
    Structural,
    /// Bound row `f_k(x) <= eps_k` for objective index `k` (0-based).
    Epsilon(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

impl LinearConstraint {
    pub fn new(coefficients: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self {
            coefficients,
            sense,
            rhs,
            tag: RowTag::Structural,
        }
    }

    pub fn activity(&self, point: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(j, a)| a * point[j]).sum()
    }

    /// Amount by which `point` violates the row (zero when satisfied).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs = self.activity(point);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Image `f(x)` of a point in objective space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ObjectiveVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Vec<f64>,
    pub objectives: ObjectiveVector,
    pub integral: bool,
}

impl Solution {
    /// Evaluates `point` against `problem` and records integrality.
    pub fn from_point(problem: &Problem, point: Vec<f64>) -> Result<Self> {
        let objectives = evaluate_objectives(problem, &point)?;
        let integral = problem.is_integral(&point, INTEGRALITY_TOL);
        Ok(Self {
            point,
            objectives,
            integral,
        })
    }
}

/// A p-objective mixed-integer linear program in minimization sense.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    name: String,
    var_types: Vec<VarType>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    constraints: Vec<LinearConstraint>,
    objectives: Vec<Vec<f64>>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        var_types: Vec<VarType>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objectives: Vec<Vec<f64>>,
        constraints: Vec<LinearConstraint>,
    ) -> Result<Self> {
        let problem = Self {
            name: name.into(),
            var_types,
            lower,
            upper,
            constraints,
            objectives,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        let n = self.var_types.len();
        if n == 0 {
            return Err(Error::Validation("problem has no variables".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Validation(format!(
                "bound arrays have lengths {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.objectives.len() < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 objectives, got {}",
                self.objectives.len()
            )));
        }
        for (k, row) in self.objectives.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "objective {} has {} coefficients, expected {n}",
                    k + 1,
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!("objective {} is not finite", k + 1)));
            }
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Validation(format!("invalid bounds [{lo}, {hi}] on x{j}")));
            }
            if self.var_types[j] == VarType::Binary && (lo < 0.0 || hi > 1.0) {
                return Err(Error::Validation(format!("binary x{j} has bounds [{lo}, {hi}]")));
            }
        }
        let mut eps_rows = std::collections::HashSet::new();
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Validation(format!("row {i} has non-finite rhs")));
            }
            let mut seen = std::collections::HashSet::new();
            for &(j, a) in &row.coefficients {
                if j >= n {
                    return Err(Error::Validation(format!(
                        "row {i} references x{j}, problem has {n} variables"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::Validation(format!("row {i} has a non-finite coefficient")));
                }
                if !seen.insert(j) {
                    return Err(Error::Validation(format!("row {i} repeats x{j}")));
                }
            }
            if let RowTag::Epsilon(k) = row.tag {
                if k >= self.objectives.len() || !eps_rows.insert(k) {
                    return Err(Error::Validation(format!("invalid epsilon row for objective {k}")));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_vars(&self) -> usize {
        self.var_types.len()
    }

    pub fn objective_count(&self) -> usize {
        self.objectives.len()
    }

    pub fn var_types(&self) -> &[VarType] {
        &self.var_types
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objectives(&self) -> &[Vec<f64>] {
        &self.objectives
    }

    pub fn objective(&self, k: usize) -> &[f64] {
        &self.objectives[k]
    }

    pub fn integer_vars(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_vars()).filter(|&j| self.var_types[j].is_integer())
    }

    /// True when every objective takes integer values on every integral point:
    /// integer coefficients, and continuous variables never carry a
    /// nonzero coefficient.
    pub fn has_integer_objectives(&self) -> bool {
        self.objectives.iter().all(|row| {
            row.iter()
                .enumerate()
                .all(|(j, &c)| c == 0.0 || (self.var_types[j].is_integer() && c.fract() == 0.0))
        })
    }

    pub fn is_integral(&self, point: &[f64], tol: f64) -> bool {
        self.integer_vars().all(|j| (point[j] - point[j].round()).abs() <= tol)
    }

    /// Appends a row; used to build subproblem models that are then reused.
    pub(crate) fn push_constraint(&mut self, row: LinearConstraint) -> Result<usize> {
        self.constraints.push(row);
        if let Err(e) = self.validate() {
            self.constraints.pop();
            return Err(e);
        }
        Ok(self.constraints.len() - 1)
    }

    pub(crate) fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.constraints[row].rhs = rhs;
    }

    /// Canonical JSON text; `load` followed by `to_json` is byte-stable.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            name: self.name.clone(),
            num_vars: self.num_vars(),
            var_types: self.var_types.iter().map(|t| t.code().to_string()).collect(),
            lb: self.lower.iter().map(|&v| Bound(v)).collect(),
            ub: self.upper.iter().map(|&v| Bound(v)).collect(),
            objectives: self.objectives.clone(),
            constraints: self
                .constraints
                .iter()
                .filter(|c| c.tag == RowTag::Structural)
                .map(|c| ConstraintFile {
                    idx: c.coefficients.iter().map(|&(j, _)| j).collect(),
                    val: c.coefficients.iter().map(|&(_, a)| a).collect(),
                    sense: c.sense.code().to_string(),
                    rhs: c.rhs,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_problem()
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    Problem::from_json(&text)
}

/// `(c_1 . x, ..., c_p . x)` without any augmentation term.
pub fn evaluate_objectives(problem: &Problem, point: &[f64]) -> Result<ObjectiveVector> {
    check_len(problem.num_vars(), point.len())?;
    Ok(ObjectiveVector(
        problem.objectives.iter().map(|row| dot(row, point)).collect(),
    ))
}

/// Bounds, constraints and integrality, each within `tol`.
pub fn check_feasible(problem: &Problem, point: &[f64], tol: f64) -> Result<bool> {
    check_len(problem.num_vars(), point.len())?;
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let in_bounds = point
        .iter()
        .zip(problem.lower.iter().zip(&problem.upper))
        .all(|(&x, (&lo, &hi))| x.is_finite() && x >= lo - tol && x <= hi + tol);
    Ok(in_bounds && problem.constraints.iter().all(|c| c.violation(point) <= tol) && problem.is_integral(point, tol))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Marker(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Marker(m) => match m.as_str() {
                "inf" | "+inf" => Ok(Bound(f64::INFINITY)),
                "-inf" => Ok(Bound(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("unknown bound marker {other:?}"))),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    idx: Vec<usize>,
    val: Vec<f64>,
    sense: String,
    rhs: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    name: String,
    num_vars: usize,
    var_types: Vec<String>,
    lb: Vec<Bound>,
    ub: Vec<Bound>,
    objectives: Vec<Vec<f64>>,
    constraints: Vec<ConstraintFile>,
}

impl InstanceFile {
    fn into_problem(self) -> Result<Problem> {
        if self.var_types.len() != self.num_vars {
            return Err(Error::Validation(format!(
                "num_vars is {} but {} var_types given",
                self.num_vars,
                self.var_types.len()
            )));
        }
        let var_types = self
            .var_types
            .iter()
            .map(|t| match t.as_str() {
                "C" => Ok(VarType::Continuous),
                "I" => Ok(VarType::Integer),
                "B" => Ok(VarType::Binary),
                other => Err(Error::Parse(format!("unknown variable type {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let constraints = self
            .constraints
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                if c.idx.len() != c.val.len() {
                    return Err(Error::Validation(format!(
                        "row {i}: {} indices but {} values",
                        c.idx.len(),
                        c.val.len()
                    )));
                }
                let sense = match c.sense.as_str() {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    "=" | "==" => Sense::Eq,
                    other => return Err(Error::Parse(format!("unknown sense {other:?}"))),
                };
                Ok(LinearConstraint::new(
                    c.idx.into_iter().zip(c.val).collect(),
                    sense,
                    c.rhs,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Problem::new(
            self.name,
            var_types,
            self.lb.into_iter().map(|b| b.0).collect(),
            self.ub.into_iter().map(|b| b.0).collect(),
            self.objectives,
            constraints,
        )
    }
}
