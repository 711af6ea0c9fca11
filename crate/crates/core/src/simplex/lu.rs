//! Dense LU factorization of the basis matrix with product-form updates.

/// Partial-pivoting `PB = LU` plus a file of eta columns appended by pivots.
#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    m: usize,
    /// Unit lower L below the diagonal, U on and above it. Row-major.
    lu: Vec<f64>,
    /// Row `i` of `PB` is row `perm[i]` of `B`.
    perm: Vec<usize>,
    etas: Vec<Eta>,
}

#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    col: Vec<f64>,
}

/// Factorization broke down at elimination step `step`; the basic column in
/// that position depends on the columns before it. `free_rows` lists the
/// original rows not yet used as pivots.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub step: usize,
    pub free_rows: Vec<usize>,
}

impl BasisFactor {
    /// Factors the `m x m` matrix whose column `k` is written by `column(k, out)`.
    pub(crate) fn factor(
        m: usize,
        pivot_tol: f64,
        mut column: impl FnMut(usize, &mut [f64]),
    ) -> Result<Self, Singular> {
        let mut lu = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for k in 0..m {
            col.iter_mut().for_each(|v| *v = 0.0);
            column(k, &mut col);
            for (i, &v) in col.iter().enumerate() {
                lu[i * m + k] = v;
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (mut best, mut best_abs) = (k, lu[k * m + k].abs());
            for i in k + 1..m {
                let v = lu[i * m + k].abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= pivot_tol {
                return Err(Singular {
                    step: k,
                    free_rows: perm[k..].to_vec(),
                });
            }
            if best != k {
                for j in 0..m {
                    lu.swap(k * m + j, best * m + j);
                }
                perm.swap(k, best);
            }
            let pivot = lu[k * m + k];
            for i in k + 1..m {
                let factor = lu[i * m + k] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu[i * m + k] = factor;
                for j in k + 1..m {
                    lu[i * m + j] -= factor * lu[k * m + j];
                }
            }
        }
        Ok(Self {
            m,
            lu,
            perm,
            etas: Vec::new(),
        })
    }

    pub(crate) fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Records that basis position `row` was replaced by a column whose
    /// FTRAN image is `col`.
    pub(crate) fn push_eta(&mut self, row: usize, col: Vec<f64>) {
        self.etas.push(Eta { row, col });
    }

    /// Solves `B x = rhs` in place.
    pub(crate) fn ftran(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..m {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = x[i];
            for j in i + 1..m {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s / self.lu[i * m + i];
        }
        for eta in &self.etas {
            let xr = x[eta.row] / eta.col[eta.row];
            if xr != 0.0 {
                for (i, &a) in eta.col.iter().enumerate() {
                    if i != eta.row {
                        x[i] -= a * xr;
                    }
                }
            }
            x[eta.row] = xr;
        }
        rhs.copy_from_slice(&x);
    }

    /// Solves `B^T y = rhs` in place.
    pub(crate) fn btran(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut v = rhs.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.row];
            for (i, &a) in eta.col.iter().enumerate() {
                if i != eta.row {
                    s -= a * v[i];
                }
            }
            v[eta.row] = s / eta.col[eta.row];
        }
        // U^T z = v
        for i in 0..m {
            let mut s = v[i];
            for j in 0..i {
                s -= self.lu[j * m + i] * v[j];
            }
            v[i] = s / self.lu[i * m + i];
        }
        // L^T w = z
        for i in (0..m).rev() {
            let mut s = v[i];
            for j in i + 1..m {
                s -= self.lu[j * m + i] * v[j];
            }
            v[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            rhs[p] = v[i];
        }
    }
}
