//! Approximate designs: information matrices of design measures, the
//! weighted trace criterion tr(M⁻¹W), and the multiplicative algorithm with
//! its optimality-gap stopping rule.
//!
//! σ² is fixed to 1; every reported quantity is a ratio in which it cancels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::factorial::{ContrastVector, WeightMatrix};
use crate::linalg::{quad_form, Cholesky};

/// Default stopping tolerance on the optimality gap.
pub const DEFAULT_EPSILON: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Masses below this are displayed as 0.
pub const ZERO_MASS: f64 = 1e-12;
const MASS_SUM_TOL: f64 = 1e-12;

/// Candidate regression vectors x₁…x_p as rows of a p × (v - 1) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressors {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl Regressors {
    pub fn from_contrasts<'a>(contrasts: impl IntoIterator<Item = &'a ContrastVector>) -> Self {
        let rows: Vec<Vec<f64>> = contrasts.into_iter().map(|c| c.to_f64()).collect();
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == dim), "ragged regressor rows");
        Self { rows, dim }
    }

    /// Rows multiplied by `factors[k]`.
    pub fn scaled(&self, factors: &[f64]) -> Self {
        assert_eq!(factors.len(), self.rows.len());
        Self {
            rows: self
                .rows
                .iter()
                .zip(factors)
                .map(|(r, &s)| r.iter().map(|x| x * s).collect())
                .collect(),
            dim: self.dim,
        }
    }

    pub fn count(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Σ_k c_k x_k x_kᵀ for arbitrary nonnegative coefficients.
    pub fn weighted_gram(&self, coeffs: &[f64]) -> Result<DMatrix<f64>> {
        if coeffs.len() != self.count() {
            return Err(DesignError::LengthMismatch {
                what: "coefficients per candidate pair",
                expected: self.count(),
                actual: coeffs.len(),
            });
        }
        let d = self.dim;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (x, &c) in self.rows.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for i in 0..d {
                if x[i] == 0.0 {
                    continue;
                }
                let ci = c * x[i];
                for j in i..d {
                    m[(i, j)] += ci * x[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        Ok(m)
    }
}

/// Probability vector π over the p candidate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMeasure {
    masses: Vec<f64>,
}

impl DesignMeasure {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(DesignError::InvalidMeasure("no masses".into()));
        }
        if masses.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(DesignError::InvalidMeasure("masses must be nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(DesignError::InvalidMeasure(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { masses })
    }

    /// Rescales nonnegative weights to a probability vector.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(DesignError::InvalidMeasure("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(p: usize) -> Self {
        Self {
            masses: vec![1.0 / p as f64; p],
        }
    }

    pub fn point_mass(p: usize, k: usize) -> Self {
        let mut masses = vec![0.0; p];
        masses[k] = 1.0;
        Self { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Masses with values below [`ZERO_MASS`] shown as exactly 0.
    pub fn display_masses(&self) -> Vec<f64> {
        self.masses
            .iter()
            .map(|&m| if m < ZERO_MASS { 0.0 } else { m })
            .collect()
    }
}

/// Symmetric PSD information matrix of order v - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix(pub DMatrix<f64>);

impl InfoMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(&self.0)
    }
}

pub fn info_matrix(measure: &DesignMeasure, regressors: &Regressors) -> Result<InfoMatrix> {
    regressors.weighted_gram(measure.masses()).map(InfoMatrix)
}

/// tr(M⁻¹W) by solving M Z = W; no explicit inverse.
pub fn criterion_trace(m: &InfoMatrix, w: &WeightMatrix) -> Result<f64> {
    if m.order() != w.len() {
        return Err(DesignError::LengthMismatch {
            what: "weight matrix order",
            expected: m.order(),
            actual: w.len(),
        });
    }
    Ok(m.cholesky()?.trace_inv_diag(w.diag()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolverOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub measure: DesignMeasure,
    /// tr(M(π̃)⁻¹W)
    pub criterion: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Variance-function values d_k = x_kᵀM⁻¹WM⁻¹x_k and the criterion at one measure.
#[derive(Debug, Clone)]
pub struct Directional {
    pub criterion: f64,
    pub values: Vec<f64>,
}

impl Directional {
    /// max_k d_k - tr(M⁻¹W)
    pub fn gap(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - self.criterion
    }
}

pub fn directional(masses: &[f64], regressors: &Regressors, w: &WeightMatrix) -> Result<Directional> {
    let m = regressors.weighted_gram(masses)?;
    if m.nrows() != w.len() {
        return Err(DesignError::LengthMismatch {
            what: "weight matrix order",
            expected: m.nrows(),
            actual: w.len(),
        });
    }
    let chol = Cholesky::new(&m)?;
    let g = chol.sandwich_diag(w.diag());
    let criterion = chol.trace_inv_diag(w.diag());
    let values = regressors.rows().iter().map(|x| quad_form(&g, x)).collect();
    Ok(Directional { criterion, values })
}

pub fn optimality_gap(measure: &DesignMeasure, regressors: &Regressors, w: &WeightMatrix) -> Result<f64> {
    check_len(measure, regressors)?;
    Ok(directional(measure.masses(), regressors, w)?.gap())
}

fn check_len(measure: &DesignMeasure, regressors: &Regressors) -> Result<()> {
    if measure.len() != regressors.count() {
        return Err(DesignError::LengthMismatch {
            what: "masses per candidate pair",
            expected: regressors.count(),
            actual: measure.len(),
        });
    }
    Ok(())
}

/// Multiplicative iteration π_k ← π_k d_k / tr(M⁻¹W), started from the
/// uniform measure. Exposed as a stepper so callers can observe iterates.
#[derive(Debug, Clone)]
pub struct MultiplicativeSolver<'a> {
    regressors: &'a Regressors,
    weights: &'a WeightMatrix,
    masses: Vec<f64>,
    state: Directional,
    iterations: usize,
}

impl<'a> MultiplicativeSolver<'a> {
    pub fn new(regressors: &'a Regressors, weights: &'a WeightMatrix) -> Result<Self> {
        let p = regressors.count();
        if p == 0 {
            return Err(DesignError::InvalidMeasure("no candidate pairs".into()));
        }
        let masses = vec![1.0 / p as f64; p];
        let state = directional(&masses, regressors, weights)?;
        Ok(Self {
            regressors,
            weights,
            masses,
            state,
            iterations: 0,
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn criterion(&self) -> f64 {
        self.state.criterion
    }

    pub fn gap(&self) -> f64 {
        self.state.gap()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// One multiplicative update.
    pub fn step(&mut self) -> Result<()> {
        let t = self.state.criterion;
        for (m, d) in self.masses.iter_mut().zip(&self.state.values) {
            *m *= d / t;
        }
        self.state = directional(&self.masses, self.regressors, self.weights)?;
        self.iterations += 1;
        Ok(())
    }

    pub fn run(mut self, opts: SolverOptions) -> Result<OptimalityReport> {
        while self.gap() > opts.epsilon {
            if self.iterations >= opts.max_iter {
                return Err(DesignError::NonConvergence {
                    iterations: self.iterations,
                    gap: self.gap(),
                });
            }
            self.step()?;
        }
        Ok(self.into_report())
    }

    pub fn into_report(self) -> OptimalityReport {
        OptimalityReport {
            gap: self.state.gap(),
            criterion: self.state.criterion,
            measure: DesignMeasure { masses: self.masses },
            iterations: self.iterations,
        }
    }
}

pub fn solve_optimal_measure(
    regressors: &Regressors,
    w: &WeightMatrix,
    opts: SolverOptions,
) -> Result<OptimalityReport> {
    MultiplicativeSolver::new(regressors, w)?.run(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorial::{theta_layout, weight_matrix, FactorialSpec, PairSpace, Parametrization};

    fn setup(levels: Vec<usize>, w: &[f64]) -> (PairSpace, Regressors, WeightMatrix) {
        let spec = FactorialSpec::uniform(levels, Parametrization::Baseline).unwrap();
        let space = PairSpace::new(&spec);
        let wm = weight_matrix(&theta_layout(&spec), w).unwrap();
        let r = space.regressors();
        (space, r, wm)
    }

    #[test]
    fn point_mass_gives_rank_one() {
        let (_, r, w) = setup(vec![3, 3], &[1.0, 1.0]);
        let m = info_matrix(&DesignMeasure::point_mass(r.count(), 4), &r).unwrap();
        let x = nalgebra::DVector::from_column_slice(r.row(4));
        assert_eq!(m.0, &x * x.transpose());
        assert!(matches!(
            criterion_trace(&m, &w),
            Err(DesignError::SingularInformation { .. })
        ));
    }

    #[test]
    fn uniform_measure_is_mean_outer_product() {
        let (_, r, _) = setup(vec![2, 3], &[1.0, 1.0]);
        let m = info_matrix(&DesignMeasure::uniform(r.count()), &r).unwrap();
        let mut expect = DMatrix::<f64>::zeros(r.dim(), r.dim());
        for x in r.rows() {
            let x = nalgebra::DVector::from_column_slice(x);
            expect += &x * x.transpose() / r.count() as f64;
        }
        assert!((m.0 - expect).abs().max() < 1e-15);
    }

    #[test]
    fn criterion_on_scaled_identity() {
        let w = WeightMatrix::from_diag(vec![1.0, 1.0, 2.0]).unwrap();
        let m = InfoMatrix(DMatrix::identity(3, 3));
        assert_eq!(criterion_trace(&m, &w).unwrap(), 4.0);
        let m = InfoMatrix(DMatrix::identity(3, 3) * 2.5);
        assert!((criterion_trace(&m, &w).unwrap() - 4.0 / 2.5).abs() < 1e-15);
    }

    #[test]
    fn measure_validation() {
        assert!(DesignMeasure::new(vec![0.5, 0.5]).is_ok());
        assert!(DesignMeasure::new(vec![0.5, 0.6]).is_err());
        assert!(DesignMeasure::new(vec![1.5, -0.5]).is_err());
        let shown = DesignMeasure::new(vec![1.0 - 1e-13, 1e-13]).unwrap().display_masses();
        assert_eq!(shown[1], 0.0);
    }

    #[test]
    fn uniform_measure_is_not_optimal() {
        let (_, r, w) = setup(vec![3, 3], &[1.0, 1.0]);
        let gap = optimality_gap(&DesignMeasure::uniform(r.count()), &r, &w).unwrap();
        assert!(gap > 1e-3);
    }

    #[test]
    fn solver_stops_within_epsilon() {
        let (_, r, w) = setup(vec![3, 3], &[1.0, 1.0]);
        let rep = solve_optimal_measure(&r, &w, SolverOptions::default()).unwrap();
        assert!(rep.gap <= DEFAULT_EPSILON);
        let recomputed = optimality_gap(&rep.measure, &r, &w).unwrap();
        assert!(recomputed <= DEFAULT_EPSILON);
    }

    #[test]
    fn iteration_cap_reports_last_gap() {
        let (_, r, w) = setup(vec![3, 3], &[1.0, 1.0]);
        let err = solve_optimal_measure(
            &r,
            &w,
            SolverOptions {
                epsilon: 1e-11,
                max_iter: 3,
            },
        )
        .unwrap_err();
        match err {
            DesignError::NonConvergence { iterations, gap } => {
                assert_eq!(iterations, 3);
                assert!(gap > 1e-11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_start_is_reported() {
        // two regressors in three dimensions cannot span
        let r = Regressors::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let w = WeightMatrix::from_diag(vec![1.0; 3]).unwrap();
        assert!(matches!(
            solve_optimal_measure(&r, &w, SolverOptions::default()),
            Err(DesignError::SingularInformation { .. })
        ));
    }
}
