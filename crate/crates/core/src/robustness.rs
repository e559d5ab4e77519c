//! Heteroscedastic scoring. A slide comparing t and t′ has variance
//! proportional to a² = γ̃²(t) + γ̃²(t′) + 1, where γ̃² is the biological
//! variance of a treatment relative to measurement error.

use std::collections::HashMap;

use crate::error::{DesignError, Result};
use crate::exact::ExactDesign;
use crate::factorial::{PairSpace, Treatment, WeightMatrix};
use crate::linalg::Cholesky;
use crate::measure::{solve_optimal_measure, OptimalityReport, Regressors, SolverOptions};

/// γ̃² per treatment, indexed in lexicographic treatment order.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    ratios: Vec<f64>,
}

impl VarianceProfile {
    /// Values listed in lexicographic treatment order.
    pub fn positional(space: &PairSpace, ratios: Vec<f64>) -> Result<Self> {
        let v = space.treatments().len();
        if ratios.len() != v {
            return Err(DesignError::IncompleteProfile(format!(
                "expected {v} values, got {}",
                ratios.len()
            )));
        }
        Self::checked(ratios)
    }

    pub fn from_map(space: &PairSpace, map: &HashMap<Treatment, f64>) -> Result<Self> {
        let ratios = space
            .treatments()
            .iter()
            .map(|t| {
                map.get(t).copied().ok_or_else(|| {
                    DesignError::IncompleteProfile(format!("no value for treatment {}", space.spec().label(t)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if map.len() != ratios.len() {
            return Err(DesignError::IncompleteProfile(
                "profile names unknown treatments".into(),
            ));
        }
        Self::checked(ratios)
    }

    pub fn constant(space: &PairSpace, value: f64) -> Result<Self> {
        Self::checked(vec![value; space.treatments().len()])
    }

    fn checked(ratios: Vec<f64>) -> Result<Self> {
        if ratios.iter().any(|&r| !r.is_finite() || r < 0.0) {
            return Err(DesignError::IncompleteProfile(
                "ratios must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { ratios })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// a₁²…a_p² in pair-label order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairVariances {
    pub a_sq: Vec<f64>,
}

pub fn pair_variances(profile: &VarianceProfile, space: &PairSpace) -> Result<PairVariances> {
    if profile.ratios.len() != space.treatments().len() {
        return Err(DesignError::IncompleteProfile(format!(
            "profile covers {} of {} treatments",
            profile.ratios.len(),
            space.treatments().len()
        )));
    }
    Ok(PairVariances {
        a_sq: space
            .pairs()
            .iter()
            .map(|p| profile.ratios[p.first_idx] + profile.ratios[p.second_idx] + 1.0)
            .collect(),
    })
}

/// Multiplicative algorithm on the scaled regressors a_k⁻¹x_k, giving the
/// GLS-optimal measure π♯ and tr(M♯(π♯)⁻¹W).
pub fn solve_gls_measure(
    regressors: &Regressors,
    w: &WeightMatrix,
    pv: &PairVariances,
    opts: SolverOptions,
) -> Result<OptimalityReport> {
    if pv.a_sq.len() != regressors.count() {
        return Err(DesignError::LengthMismatch {
            what: "pair variances",
            expected: regressors.count(),
            actual: pv.a_sq.len(),
        });
    }
    let scale: Vec<f64> = pv.a_sq.iter().map(|a| 1.0 / a.sqrt()).collect();
    solve_optimal_measure(&regressors.scaled(&scale), w, opts)
}

/// (XᵀX)⁻¹XᵀVX(XᵀX)⁻¹, the dispersion of the OLS estimator under V.
pub fn ols_dispersion(
    design: &ExactDesign,
    pv: &PairVariances,
    regressors: &Regressors,
) -> Result<nalgebra::DMatrix<f64>> {
    let xtx = design.information(regressors)?;
    let weighted: Vec<f64> = design
        .freqs()
        .iter()
        .zip(&pv.a_sq)
        .map(|(&f, a)| f64::from(f) * a)
        .collect();
    let xtvx = regressors.weighted_gram(&weighted)?;
    let chol = Cholesky::new(&xtx)?;
    let left = chol.solve(&xtvx);
    let mut s = chol.solve(&left.transpose());
    crate::linalg::symmetrize(&mut s);
    Ok(s)
}

/// Eff♯ = N⁻¹ tr(M♯(π♯)⁻¹W) / tr((XᵀX)⁻¹XᵀVX(XᵀX)⁻¹W).
pub fn eff_sharp(
    design: &ExactDesign,
    pv: &PairVariances,
    gls: &OptimalityReport,
    regressors: &Regressors,
    w: &WeightMatrix,
) -> Result<f64> {
    if pv.a_sq.len() != regressors.count() || design.n_pairs() != regressors.count() {
        return Err(DesignError::LengthMismatch {
            what: "pair variances",
            expected: regressors.count(),
            actual: pv.a_sq.len(),
        });
    }
    let s = ols_dispersion(design, pv, regressors)?;
    let denom: f64 = s.diagonal().iter().zip(w.diag()).map(|(d, wi)| d * wi).sum();
    Ok(gls.criterion / design.n_slides() as f64 / denom)
}
