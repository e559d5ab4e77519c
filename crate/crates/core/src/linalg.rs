//! Dense symmetric positive-definite solves for the small information
//! matrices that appear throughout (order v - 1, rarely above a few dozen).

use nalgebra::{DMatrix, DVector};

use crate::error::{DesignError, Result};

/// Pivots below this fraction of the largest diagonal entry are treated as zero.
pub const RELATIVE_PIVOT_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
        if n > 0 && scale == 0.0 {
            return Err(DesignError::SingularInformation { column: 0, pivot: 0.0 });
        }
        let tol = RELATIVE_PIVOT_TOL * scale;

        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d.is_nan() || d <= tol {
                return Err(DesignError::SingularInformation { column: j, pivot: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let l = &self.l;
        // forward: L y = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l[(i, k)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
    }

    /// `tr(A⁻¹ diag(w))` via `A Z = diag(w)`.
    pub fn trace_inv_diag(&self, w: &[f64]) -> f64 {
        let n = self.dim();
        let mut e = vec![0.0; n];
        let mut total = 0.0;
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = w[j];
            self.solve_in_place(&mut e);
            total += e[j];
        }
        total
    }

    /// `A⁻¹ diag(w) A⁻¹`, the kernel of the variance function.
    pub fn sandwich_diag(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
        debug_assert_eq!(w.len(), n);
        // Y = A⁻¹ W, then A⁻¹ Yᵀ = A⁻¹ W A⁻¹ (A symmetric)
        let y = self.solve(&wm);
        let mut g = self.solve(&y.transpose());
        symmetrize(&mut g);
        g
    }
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `xᵀ G x` for symmetric `G`.
pub fn quad_form(g: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += g[(i, j)] * x[j];
        }
        total += x[i] * row;
    }
    total
}
