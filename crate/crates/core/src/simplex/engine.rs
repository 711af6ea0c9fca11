use super::lu::BasisFactor;
use super::{
    classify_warm_basis, slack_bounds, Algorithm, Basis, ColumnStatus, LpOptions, LpOutcome, LpStatus, WarmBasis,
    WarmClass, FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL, ZERO_SNAP,
};
use crate::error::{Error, Result};
use crate::model::LinearConstraint;

const RESIDUAL_TOL: f64 = 1e-8;
const STEP_TIE: f64 = 1e-12;
const MAX_CLEANUP_ROUNDS: usize = 4;

/// Constraint matrix in column-major dense form, shared by every solve over
/// the same rows (branch-and-bound nodes differ only in bounds).
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    n: usize,
    m: usize,
    cols: Vec<f64>,
    rhs: Vec<f64>,
    slack_lower: Vec<f64>,
    slack_upper: Vec<f64>,
}

impl LpData {
    pub(crate) fn new(rows: &[LinearConstraint], n: usize) -> Self {
        let m = rows.len();
        let mut cols = vec![0.0; n * m];
        let mut slack_lower = Vec::with_capacity(m);
        let mut slack_upper = Vec::with_capacity(m);
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in &row.coefficients {
                cols[j * m + i] += a;
            }
            let (lo, hi) = slack_bounds(row.sense);
            slack_lower.push(lo);
            slack_upper.push(hi);
        }
        Self {
            n,
            m,
            cols,
            rhs: rows.iter().map(|r| r.rhs).collect(),
            slack_lower,
            slack_upper,
        }
    }

    pub(crate) fn solve(
        &self,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        start: Option<&WarmBasis>,
        algorithm: Algorithm,
        options: &LpOptions,
    ) -> Result<LpOutcome> {
        let slack = || Basis::slack(self.n, self.m);
        let (basis, mode) = match (start, algorithm) {
            (None, Algorithm::Dual) => (slack(), Algorithm::Dual),
            (None, _) => (slack(), Algorithm::Primal),
            (Some(w), Algorithm::Auto) => match classify_warm_basis(&w.basis, w.change) {
                WarmClass::StartPrimal => (w.basis.clone(), Algorithm::Primal),
                WarmClass::StartDual => (w.basis.clone(), Algorithm::Dual),
                WarmClass::ColdStart => (slack(), Algorithm::Primal),
            },
            (Some(w), alg) => (w.basis.clone(), alg),
        };
        basis.check(self.n, self.m)?;
        let mut engine = Engine::new(self, objective, lower, upper, basis, *options, true)?;
        let mut status = match mode {
            Algorithm::Dual => match engine.run_dual()? {
                Some(s) => s,
                None => engine.run_primal()?,
            },
            _ => engine.run_primal()?,
        };
        let mut rounds = 0;
        while status == LpStatus::Optimal && !engine.verify_optimal()? {
            rounds += 1;
            if rounds > MAX_CLEANUP_ROUNDS {
                return Err(Error::NumericalFailure(
                    "optimality could not be verified after refactorization".into(),
                ));
            }
            status = engine.run_primal()?;
        }
        Ok(engine.finish(status, mode))
    }

    pub(crate) fn primal_feasible(
        &self,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        basis: &Basis,
    ) -> Result<bool> {
        basis.check(self.n, self.m)?;
        match Engine::new(
            self,
            objective,
            lower,
            upper,
            basis.clone(),
            LpOptions::default(),
            false,
        ) {
            Ok(engine) => Ok(engine.max_primal_infeasibility() <= FEASIBILITY_TOL),
            Err(Error::NumericalFailure(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub(crate) fn dual_feasible(&self, objective: &[f64], lower: &[f64], upper: &[f64], basis: &Basis) -> Result<bool> {
        basis.check(self.n, self.m)?;
        match Engine::new(
            self,
            objective,
            lower,
            upper,
            basis.clone(),
            LpOptions::default(),
            false,
        ) {
            Ok(engine) => {
                let d = engine.reduced_costs(&engine.cost);
                Ok(engine.max_dual_infeasibility(&d) <= OPTIMALITY_TOL)
            }
            Err(Error::NumericalFailure(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

enum PrimalStep {
    Unbounded,
    Flip { t: f64 },
    Pivot { row: usize, t: f64, leave: ColumnStatus },
}

struct Engine<'d> {
    data: &'d LpData,
    n: usize,
    m: usize,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    basic: Vec<usize>,
    status: Vec<ColumnStatus>,
    x: Vec<f64>,
    factor: BasisFactor,
    opts: LpOptions,
    iters_primal: usize,
    iters_dual: usize,
    degenerate_run: usize,
    bland: bool,
    bland_engaged: bool,
}

impl<'d> Engine<'d> {
    fn new(
        data: &'d LpData,
        objective: &[f64],
        lower: &[f64],
        upper: &[f64],
        basis: Basis,
        opts: LpOptions,
        repair: bool,
    ) -> Result<Self> {
        let (n, m) = (data.n, data.m);
        let mut cost = objective.to_vec();
        cost.resize(n + m, 0.0);
        let lb: Vec<f64> = lower.iter().chain(&data.slack_lower).copied().collect();
        let ub: Vec<f64> = upper.iter().chain(&data.slack_upper).copied().collect();
        let factor = BasisFactor::factor(0, PIVOT_TOL, |_, _| {}).expect("empty factor");
        let bland = opts.degenerate_pivot_limit == 0;
        let mut engine = Self {
            data,
            n,
            m,
            cost,
            lb,
            ub,
            basic: basis.basic,
            status: basis.status,
            x: vec![0.0; n + m],
            factor,
            opts,
            iters_primal: 0,
            iters_dual: 0,
            degenerate_run: 0,
            bland,
            bland_engaged: bland,
        };
        engine.normalize_status();
        engine.refactor(repair)?;
        Ok(engine)
    }

    fn iterations(&self) -> usize {
        self.iters_primal + self.iters_dual
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            out.copy_from_slice(&self.data.cols[j * self.m..(j + 1) * self.m]);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.n] = 1.0;
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.data.cols[j * self.m..(j + 1) * self.m]
                .iter()
                .zip(y)
                .map(|(a, b)| a * b)
                .sum()
        } else {
            y[j - self.n]
        }
    }

    fn ftran_column(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.m];
        self.column(j, &mut col);
        self.factor.ftran(&mut col);
        col
    }

    /// Points nonbasic columns at a finite bound whenever one exists.
    fn normalize_status(&mut self) {
        for j in 0..self.n + self.m {
            match self.status[j] {
                ColumnStatus::AtLower if self.lb[j] == f64::NEG_INFINITY && self.ub[j].is_finite() => {
                    self.status[j] = ColumnStatus::AtUpper
                }
                ColumnStatus::AtUpper if self.ub[j] == f64::INFINITY && self.lb[j].is_finite() => {
                    self.status[j] = ColumnStatus::AtLower
                }
                _ => {}
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        let (lo, hi) = (self.lb[j], self.ub[j]);
        match self.status[j] {
            ColumnStatus::AtUpper if hi.is_finite() => hi,
            _ if lo.is_finite() => lo,
            _ if hi.is_finite() => hi,
            _ => 0.0,
        }
    }

    /// Refactors the basis, swapping dependent columns for slacks when
    /// `repair` is set, then recomputes all primal values.
    fn refactor(&mut self, repair: bool) -> Result<()> {
        for _ in 0..=self.m {
            let result = BasisFactor::factor(self.m, PIVOT_TOL, |k, out| {
                let j = self.basic[k];
                if j < self.n {
                    out.copy_from_slice(&self.data.cols[j * self.m..(j + 1) * self.m]);
                } else {
                    out[j - self.n] = 1.0;
                }
            });
            match result {
                Ok(factor) => {
                    self.factor = factor;
                    self.compute_primal();
                    return Ok(());
                }
                Err(singular) if repair => {
                    let row = singular
                        .free_rows
                        .iter()
                        .copied()
                        .find(|&r| self.status[self.n + r] != ColumnStatus::Basic)
                        .ok_or_else(|| Error::NumericalFailure("basis repair found no slack".into()))?;
                    let out = self.basic[singular.step];
                    self.status[out] = if self.lb[out].is_finite() || !self.ub[out].is_finite() {
                        ColumnStatus::AtLower
                    } else {
                        ColumnStatus::AtUpper
                    };
                    self.basic[singular.step] = self.n + row;
                    self.status[self.n + row] = ColumnStatus::Basic;
                }
                Err(_) => return Err(Error::NumericalFailure("singular basis".into())),
            }
        }
        Err(Error::NumericalFailure("basis repair did not converge".into()))
    }

    fn compute_primal(&mut self) {
        let mut r = self.data.rhs.clone();
        for j in 0..self.n + self.m {
            if self.status[j] == ColumnStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                if j < self.n {
                    let col = &self.data.cols[j * self.m..(j + 1) * self.m];
                    for (ri, a) in r.iter_mut().zip(col) {
                        *ri -= a * v;
                    }
                } else {
                    r[j - self.n] -= v;
                }
            }
        }
        self.factor.ftran(&mut r);
        for (i, &j) in self.basic.iter().enumerate() {
            self.x[j] = if r[i].abs() < ZERO_SNAP { 0.0 } else { r[i] };
        }
    }

    fn residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            let mut s = self.x[self.n + i] - self.data.rhs[i];
            for j in 0..self.n {
                s += self.data.cols[j * self.m + i] * self.x[j];
            }
            worst = worst.max(s.abs());
        }
        worst
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] {
            self.lb[j] - v
        } else if v > self.ub[j] {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basic.iter().map(|&j| self.infeasibility(j)).fold(0.0, f64::max)
    }

    /// `d_j = c_j - y . a_j` with `B^T y = c_B`; zero for basic columns.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.basic.iter().map(|&j| cost[j]).collect();
        self.factor.btran(&mut y);
        (0..self.n + self.m)
            .map(|j| {
                if self.status[j] == ColumnStatus::Basic {
                    0.0
                } else {
                    cost[j] - self.dot_column(j, &y)
                }
            })
            .collect()
    }

    fn can_increase(&self, j: usize) -> bool {
        self.x[j] < self.ub[j] - STEP_TIE
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.x[j] > self.lb[j] + STEP_TIE
    }

    fn max_dual_infeasibility(&self, d: &[f64]) -> f64 {
        (0..self.n + self.m)
            .filter(|&j| self.status[j] != ColumnStatus::Basic)
            .map(|j| {
                let mut v = 0.0f64;
                if self.can_increase(j) {
                    v = v.max(-d[j]);
                }
                if self.can_decrease(j) {
                    v = v.max(d[j]);
                }
                v
            })
            .fold(0.0, f64::max)
    }

    /// Dantzig pricing (largest violation, lowest index on ties), or the
    /// lowest eligible index under Bland's rule. Returns column and direction.
    fn price(&self, d: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            if self.status[j] == ColumnStatus::Basic {
                continue;
            }
            let dir = if d[j] < -OPTIMALITY_TOL && self.can_increase(j) {
                1.0
            } else if d[j] > OPTIMALITY_TOL && self.can_decrease(j) {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d[j].abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn primal_ratio(&self, q: usize, dir: f64, alpha: &[f64], phase1: bool) -> PrimalStep {
        let mut best: Option<(usize, f64, ColumnStatus, f64)> = None;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basic[i];
            let delta = -dir * a;
            let (v, lo, hi) = (self.x[j], self.lb[j], self.ub[j]);
            let candidate = if phase1 && v < lo - FEASIBILITY_TOL {
                (delta > 0.0).then(|| ((lo - v) / delta, ColumnStatus::AtLower))
            } else if phase1 && v > hi + FEASIBILITY_TOL {
                (delta < 0.0).then(|| ((v - hi) / -delta, ColumnStatus::AtUpper))
            } else if delta < 0.0 && lo.is_finite() {
                Some(((v - lo).max(0.0) / -delta, ColumnStatus::AtLower))
            } else if delta > 0.0 && hi.is_finite() {
                Some(((hi - v).max(0.0) / delta, ColumnStatus::AtUpper))
            } else {
                None
            };
            let Some((t, leave)) = candidate else { continue };
            let better = match best {
                None => true,
                Some((bi, bt, _, ba)) => {
                    if t < bt - STEP_TIE {
                        true
                    } else if t <= bt + STEP_TIE {
                        if self.bland {
                            j < self.basic[bi]
                        } else {
                            a.abs() > ba
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((i, t, leave, a.abs()));
            }
        }
        let flip = if self.lb[q].is_finite() && self.ub[q].is_finite() {
            Some(self.ub[q] - self.lb[q])
        } else {
            None
        };
        match (best, flip) {
            (Some((_, t, _, _)), Some(f)) if f <= t => PrimalStep::Flip { t: f },
            (None, Some(f)) => PrimalStep::Flip { t: f },
            (Some((row, t, leave, _)), _) => PrimalStep::Pivot { row, t, leave },
            (None, None) => PrimalStep::Unbounded,
        }
    }

    fn track_degeneracy(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
            if self.degenerate_run >= self.opts.degenerate_pivot_limit {
                self.bland = true;
                self.bland_engaged = true;
            }
        } else if self.opts.degenerate_pivot_limit > 0 {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn move_entering(&mut self, q: usize, step: f64, alpha: &[f64]) {
        self.x[q] += step;
        for (i, &a) in alpha.iter().enumerate() {
            let j = self.basic[i];
            self.x[j] -= a * step;
            if self.x[j].abs() < ZERO_SNAP {
                self.x[j] = 0.0;
            }
        }
    }

    fn pivot(&mut self, row: usize, q: usize, alpha: Vec<f64>, leave: ColumnStatus) -> Result<()> {
        let out = self.basic[row];
        self.status[out] = leave;
        self.x[out] = match leave {
            ColumnStatus::AtUpper => self.ub[out],
            _ => self.lb[out],
        };
        self.basic[row] = q;
        self.status[q] = ColumnStatus::Basic;
        self.factor.push_eta(row, alpha);
        if self.factor.eta_count() >= self.opts.refactor_interval || self.residual() > RESIDUAL_TOL {
            self.refactor(true)?;
        }
        Ok(())
    }

    /// Composite primal simplex: while some basic value is out of bounds the
    /// sum of infeasibilities is minimized, then the true cost.
    fn run_primal(&mut self) -> Result<LpStatus> {
        loop {
            if self.iterations() >= self.opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            let phase1 = self.max_primal_infeasibility() > FEASIBILITY_TOL;
            let d = if phase1 {
                let mut c1 = vec![0.0; self.n + self.m];
                for &j in &self.basic {
                    if self.x[j] < self.lb[j] - FEASIBILITY_TOL {
                        c1[j] = -1.0;
                    } else if self.x[j] > self.ub[j] + FEASIBILITY_TOL {
                        c1[j] = 1.0;
                    }
                }
                self.reduced_costs(&c1)
            } else {
                self.reduced_costs(&self.cost)
            };
            let Some((q, dir)) = self.price(&d) else {
                return Ok(if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                });
            };
            let alpha = self.ftran_column(q);
            match self.primal_ratio(q, dir, &alpha, phase1) {
                PrimalStep::Unbounded if phase1 => return Err(Error::NumericalFailure("unbounded phase-1 ray".into())),
                PrimalStep::Unbounded => return Ok(LpStatus::Unbounded),
                PrimalStep::Flip { t } => {
                    self.move_entering(q, dir * t, &alpha);
                    self.status[q] = if dir > 0.0 {
                        ColumnStatus::AtUpper
                    } else {
                        ColumnStatus::AtLower
                    };
                    self.x[q] = self.nonbasic_value(q);
                    self.track_degeneracy(false);
                }
                PrimalStep::Pivot { row, t, leave } => {
                    self.move_entering(q, dir * t, &alpha);
                    self.pivot(row, q, alpha, leave)?;
                    self.track_degeneracy(t <= STEP_TIE);
                }
            }
            self.iters_primal += 1;
        }
    }

    /// Flips nonbasic bound statuses so reduced costs carry the optimal sign.
    /// Returns false when some column has no finite bound to flip to.
    fn make_dual_feasible(&mut self) -> bool {
        let d = self.reduced_costs(&self.cost);
        let mut flipped = false;
        for j in 0..self.n + self.m {
            if self.status[j] == ColumnStatus::Basic || self.lb[j] == self.ub[j] {
                continue;
            }
            let at_upper = self.status[j] == ColumnStatus::AtUpper && self.ub[j].is_finite();
            let at_lower = !at_upper && self.lb[j].is_finite();
            if at_lower && d[j] < -OPTIMALITY_TOL {
                if !self.ub[j].is_finite() {
                    return false;
                }
                self.status[j] = ColumnStatus::AtUpper;
                flipped = true;
            } else if at_upper && d[j] > OPTIMALITY_TOL {
                if !self.lb[j].is_finite() {
                    return false;
                }
                self.status[j] = ColumnStatus::AtLower;
                flipped = true;
            } else if !at_lower && !at_upper && d[j].abs() > OPTIMALITY_TOL {
                return false;
            }
        }
        if flipped {
            self.compute_primal();
        }
        true
    }

    /// Dual simplex from a dual feasible basis. `None` means the basis was not
    /// (or stopped being) dual feasible and the caller should go primal.
    fn run_dual(&mut self) -> Result<Option<LpStatus>> {
        if !self.make_dual_feasible() {
            return Ok(None);
        }
        loop {
            if self.iterations() >= self.opts.max_iterations {
                return Ok(Some(LpStatus::IterationLimit));
            }
            let mut leaving: Option<(usize, f64)> = None;
            for (i, &j) in self.basic.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf <= FEASIBILITY_TOL {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some((bi, bv)) => {
                        if self.bland {
                            j < self.basic[bi]
                        } else {
                            inf > bv
                        }
                    }
                };
                if better {
                    leaving = Some((i, inf));
                }
            }
            let d = self.reduced_costs(&self.cost);
            let Some((r, _)) = leaving else {
                if self.max_dual_infeasibility(&d) > OPTIMALITY_TOL {
                    return Ok(None);
                }
                return Ok(Some(LpStatus::Optimal));
            };
            let out = self.basic[r];
            let below = self.x[out] < self.lb[out];
            let target = if below { self.lb[out] } else { self.ub[out] };

            let mut rho = vec![0.0; self.m];
            rho[r] = 1.0;
            self.factor.btran(&mut rho);

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.n + self.m {
                if self.status[j] == ColumnStatus::Basic {
                    continue;
                }
                let a = self.dot_column(j, &rho);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_out moves by -a per unit increase of x_j.
                let eligible = if below {
                    (self.can_increase(j) && a < 0.0) || (self.can_decrease(j) && a > 0.0)
                } else {
                    (self.can_increase(j) && a > 0.0) || (self.can_decrease(j) && a < 0.0)
                };
                if !eligible {
                    continue;
                }
                let ratio = d[j].abs() / a.abs();
                let better = match entering {
                    None => true,
                    Some((_, br, ba)) => {
                        if ratio < br - STEP_TIE {
                            true
                        } else if ratio <= br + STEP_TIE {
                            !self.bland && a.abs() > ba
                        } else {
                            false
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, a.abs()));
                }
            }
            let Some((q, ratio, _)) = entering else {
                return Ok(Some(LpStatus::Infeasible));
            };
            let alpha = self.ftran_column(q);
            if alpha[r].abs() <= PIVOT_TOL {
                self.refactor(true)?;
                if !self.make_dual_feasible() {
                    return Ok(None);
                }
                continue;
            }
            let step = (self.x[out] - target) / alpha[r];
            let leave = if below {
                ColumnStatus::AtLower
            } else {
                ColumnStatus::AtUpper
            };
            self.move_entering(q, step, &alpha);
            self.pivot(r, q, alpha, leave)?;
            self.iters_dual += 1;
            self.track_degeneracy(ratio <= STEP_TIE);
        }
    }

    /// Refactors and re-checks primal and dual feasibility from scratch.
    fn verify_optimal(&mut self) -> Result<bool> {
        self.refactor(true)?;
        let d = self.reduced_costs(&self.cost);
        Ok(self.max_primal_infeasibility() <= FEASIBILITY_TOL && self.max_dual_infeasibility(&d) <= OPTIMALITY_TOL)
    }

    fn finish(self, status: LpStatus, started_with: Algorithm) -> LpOutcome {
        let point: Vec<f64> = self.x[..self.n]
            .iter()
            .map(|&v| if v.abs() < ZERO_SNAP { 0.0 } else { v })
            .collect();
        let objective_value = point.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        LpOutcome {
            status,
            point,
            objective_value,
            basis: Basis {
                basic: self.basic,
                status: self.status,
            },
            iterations_primal: self.iters_primal,
            iterations_dual: self.iters_dual,
            started_with,
            bland_engaged: self.bland_engaged,
        }
    }
}
