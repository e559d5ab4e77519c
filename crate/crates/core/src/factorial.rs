//! Treatment combinations, effect-parameter layouts and pairwise contrast
//! vectors for baseline, all-to-next and hybrid parametrizations.
//!
//! The parameter vector θ has length v - 1 (the baseline effect θ(0…0)
//! cancels from every pairwise difference), so the design matrix of an
//! N-slide design is N × (v - 1).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::measure::Regressors;

/// Coding of a single factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrization {
    /// Each parameter compares against level 0 of the factor.
    Baseline,
    /// Each parameter compares consecutive levels of an ordered factor.
    AllToNext,
}

impl Parametrization {
    /// Indicator that θ at index `u` enters τ at level `j`.
    fn includes(self, j: usize, u: usize) -> bool {
        match self {
            Parametrization::Baseline => u == 0 || u == j,
            Parametrization::AllToNext => u <= j,
        }
    }
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parametrization::Baseline => f.write_str("baseline"),
            Parametrization::AllToNext => f.write_str("all-to-next"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorialSpec {
    levels: Vec<usize>,
    params: Vec<Parametrization>,
}

impl FactorialSpec {
    pub fn new(levels: Vec<usize>, params: Vec<Parametrization>) -> Result<Self> {
        if levels.is_empty() {
            return Err(DesignError::InvalidSpec("at least one factor is required".into()));
        }
        if levels.len() != params.len() {
            return Err(DesignError::InvalidSpec(format!(
                "{} factors but {} parametrization tags",
                levels.len(),
                params.len()
            )));
        }
        if let Some(m) = levels.iter().find(|&&m| m < 2) {
            return Err(DesignError::InvalidSpec(format!(
                "every factor needs at least 2 levels, got {m}"
            )));
        }
        levels
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .filter(|&v| v <= 4096)
            .ok_or_else(|| DesignError::InvalidSpec("too many treatment combinations".into()))?;
        Ok(Self { levels, params })
    }

    /// All factors share one parametrization.
    pub fn uniform(levels: Vec<usize>, param: Parametrization) -> Result<Self> {
        let params = vec![param; levels.len()];
        Self::new(levels, params)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn params(&self) -> &[Parametrization] {
        &self.params
    }

    pub fn n_factors(&self) -> usize {
        self.levels.len()
    }

    /// v, the number of treatment combinations.
    pub fn n_treatments(&self) -> usize {
        self.levels.iter().product()
    }

    /// p = v(v - 1)/2 candidate pairs.
    pub fn n_pairs(&self) -> usize {
        let v = self.n_treatments();
        v * (v - 1) / 2
    }

    /// v - 1 effect parameters.
    pub fn n_params(&self) -> usize {
        self.n_treatments() - 1
    }

    pub fn check_treatment(&self, t: &Treatment) -> Result<()> {
        if t.0.len() != self.n_factors() {
            return Err(DesignError::InvalidTreatment {
                treatment: t.0.clone(),
                reason: format!("expected {} digits", self.n_factors()),
            });
        }
        for (i, (&j, &m)) in t.0.iter().zip(&self.levels).enumerate() {
            if j >= m {
                return Err(DesignError::InvalidTreatment {
                    treatment: t.0.clone(),
                    reason: format!("factor {} has levels 0..{}", i + 1, m - 1),
                });
            }
        }
        Ok(())
    }

    /// Position of `t` in lexicographic enumeration.
    pub fn treatment_index(&self, t: &Treatment) -> Result<usize> {
        self.check_treatment(t)?;
        Ok(t.0.iter().zip(&self.levels).fold(0, |acc, (&j, &m)| acc * m + j))
    }

    pub fn treatment_at(&self, mut index: usize) -> Treatment {
        let mut digits = vec![0; self.n_factors()];
        for (d, &m) in digits.iter_mut().zip(&self.levels).rev() {
            *d = index % m;
            index /= m;
        }
        Treatment(digits)
    }

    /// Digit strings ("12") require every factor to have at most 10 levels.
    pub fn parse_treatment(&self, s: &str) -> Result<Treatment> {
        let s = s.trim();
        if self.levels.iter().any(|&m| m > 10) {
            return Err(DesignError::InvalidTreatment {
                treatment: vec![],
                reason: format!("digit shorthand {s:?} is ambiguous when a factor has more than 10 levels"),
            });
        }
        let digits = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| DesignError::InvalidTreatment {
                treatment: vec![],
                reason: format!("{s:?} is not a digit string"),
            })?;
        let t = Treatment(digits);
        self.check_treatment(&t)?;
        Ok(t)
    }

    /// Labels use digit strings when unambiguous.
    pub fn digit_labels(&self) -> bool {
        self.levels.iter().all(|&m| m <= 10)
    }

    pub fn label(&self, t: &Treatment) -> String {
        if self.digit_labels() {
            t.0.iter().map(|d| char::from_digit(*d as u32, 10).unwrap()).collect()
        } else {
            let parts: Vec<String> = t.0.iter().map(|d| d.to_string()).collect();
            format!("[{}]", parts.join(","))
        }
    }
}

/// A treatment combination j₁…jₙ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Treatment(pub Vec<usize>);

impl Treatment {
    pub fn digits(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&d| d < 10) {
            for d in &self.0 {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

/// All v combinations in lexicographic order.
pub fn enumerate_treatments(spec: &FactorialSpec) -> Vec<Treatment> {
    (0..spec.n_treatments()).map(|i| spec.treatment_at(i)).collect()
}

/// Canonical order of the v - 1 effect parameters: ascending effect order,
/// then lexicographic on the index tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaLayout {
    entries: Vec<Vec<usize>>,
    orders: Vec<usize>,
    n_factors: usize,
}

impl ThetaLayout {
    pub fn new(spec: &FactorialSpec) -> Self {
        let mut entries: Vec<(usize, Vec<usize>)> = enumerate_treatments(spec)
            .into_iter()
            .map(|t| t.0)
            .filter(|u| u.iter().any(|&x| x != 0))
            .map(|u| (u.iter().filter(|&&x| x != 0).count(), u))
            .collect();
        entries.sort();
        let (orders, entries) = entries.into_iter().unzip();
        Self {
            entries,
            orders,
            n_factors: spec.n_factors(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<usize>] {
        &self.entries
    }

    /// Effect order (1 = main effect) of entry `j`.
    pub fn order(&self, j: usize) -> usize {
        self.orders[j]
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn n_orders(&self) -> usize {
        self.n_factors
    }

    /// |Q_i| for i = 1..=n.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_factors];
        for &o in &self.orders {
            sizes[o - 1] += 1;
        }
        sizes
    }

    pub fn entry_label(&self, j: usize) -> String {
        Treatment(self.entries[j].clone()).to_string()
    }
}

pub fn theta_layout(spec: &FactorialSpec) -> ThetaLayout {
    ThetaLayout::new(spec)
}

/// Coefficients of τ(t) over every index tuple u (including 0…0), in
/// lexicographic tuple order. Each is 0 or 1.
pub fn tau_coefficients(spec: &FactorialSpec, t: &Treatment) -> Result<Vec<u8>> {
    spec.check_treatment(t)?;
    Ok(enumerate_treatments(spec)
        .iter()
        .map(|u| tau_coefficient(spec, t, u.digits()) as u8)
        .collect())
}

fn tau_coefficient(spec: &FactorialSpec, t: &Treatment, u: &[usize]) -> bool {
    spec.params
        .iter()
        .zip(t.digits())
        .zip(u)
        .all(|((p, &j), &ui)| p.includes(j, ui))
}

/// x(t; t′) aligned to a [`ThetaLayout`]; entries in {-1, 0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContrastVector(pub Vec<i8>);

impl ContrastVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn negated(&self) -> Self {
        ContrastVector(self.0.iter().map(|c| -c).collect())
    }
}

pub fn pair_contrast(
    spec: &FactorialSpec,
    layout: &ThetaLayout,
    t: &Treatment,
    t_prime: &Treatment,
) -> Result<ContrastVector> {
    spec.check_treatment(t)?;
    spec.check_treatment(t_prime)?;
    if t == t_prime {
        return Err(DesignError::DegeneratePair(t.0.clone()));
    }
    Ok(ContrastVector(
        layout
            .entries()
            .iter()
            .map(|u| tau_coefficient(spec, t, u) as i8 - tau_coefficient(spec, t_prime, u) as i8)
            .collect(),
    ))
}

/// A candidate slide pair; `first` is the lexicographically larger member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndex {
    /// 1-based label k.
    pub label: usize,
    pub first: Treatment,
    pub second: Treatment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub index: PairIndex,
    /// Treatment indices (lexicographic positions) of `first` and `second`.
    pub first_idx: usize,
    pub second_idx: usize,
    pub contrast: ContrastVector,
}

/// Everything derived from a spec: treatments, layout and all p pairs with
/// their contrasts. Pairs are stored 0-based; `label = position + 1`.
#[derive(Debug, Clone)]
pub struct PairSpace {
    spec: FactorialSpec,
    layout: ThetaLayout,
    treatments: Vec<Treatment>,
    pairs: Vec<Pair>,
}

impl PairSpace {
    pub fn new(spec: &FactorialSpec) -> Self {
        let layout = ThetaLayout::new(spec);
        let treatments = enumerate_treatments(spec);
        let v = treatments.len();
        let mut pairs = Vec::with_capacity(spec.n_pairs());
        for second in 0..v {
            for first in (second + 1)..v {
                let contrast = pair_contrast(spec, &layout, &treatments[first], &treatments[second])
                    .expect("distinct valid treatments");
                pairs.push(Pair {
                    index: PairIndex {
                        label: pairs.len() + 1,
                        first: treatments[first].clone(),
                        second: treatments[second].clone(),
                    },
                    first_idx: first,
                    second_idx: second,
                    contrast,
                });
            }
        }
        Self {
            spec: spec.clone(),
            layout,
            treatments,
            pairs,
        }
    }

    pub fn spec(&self) -> &FactorialSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ThetaLayout {
        &self.layout
    }

    pub fn treatments(&self) -> &[Treatment] {
        &self.treatments
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn contrasts(&self) -> Vec<ContrastVector> {
        self.pairs.iter().map(|p| p.contrast.clone()).collect()
    }

    pub fn regressors(&self) -> Regressors {
        Regressors::from_contrasts(self.pairs.iter().map(|p| &p.contrast))
    }

    /// 0-based position of the unordered pair {a, b} (treatment indices).
    pub fn pair_position(&self, a: usize, b: usize) -> Option<usize> {
        let v = self.treatments.len();
        if a == b || a >= v || b >= v {
            return None;
        }
        let (first, second) = if a > b { (a, b) } else { (b, a) };
        // pairs with smaller `second` come first: Σ_{s<second} (v - 1 - s)
        let before = second * (v - 1) - second * (second.saturating_sub(1)) / 2;
        Some(before + (first - second - 1))
    }

    /// Position of the unordered pair {t, t′}.
    pub fn position_of(&self, t: &Treatment, t_prime: &Treatment) -> Result<usize> {
        let a = self.spec.treatment_index(t)?;
        let b = self.spec.treatment_index(t_prime)?;
        self.pair_position(a, b)
            .ok_or_else(|| DesignError::DegeneratePair(t.0.clone()))
    }

    /// "(11, 01)"
    pub fn pair_label(&self, k: usize) -> String {
        let p = &self.pairs[k];
        format!(
            "({}, {})",
            self.spec.label(&p.index.first),
            self.spec.label(&p.index.second)
        )
    }
}

pub fn enumerate_pairs(spec: &FactorialSpec) -> Vec<Pair> {
    PairSpace::new(spec).pairs
}

/// Diagonal weight matrix W of order v - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    diag: Vec<f64>,
}

impl WeightMatrix {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn from_diag(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(DesignError::InvalidWeights(
                "weights must be positive and finite".into(),
            ));
        }
        Ok(Self { diag })
    }
}

pub fn weight_matrix(layout: &ThetaLayout, w: &[f64]) -> Result<WeightMatrix> {
    if w.len() != layout.n_orders() {
        return Err(DesignError::InvalidWeights(format!(
            "expected {} weights (one per effect order), got {}",
            layout.n_orders(),
            w.len()
        )));
    }
    if w.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(DesignError::InvalidWeights(format!(
            "weights must be positive, got {w:?}"
        )));
    }
    Ok(WeightMatrix {
        diag: layout.orders().iter().map(|&o| w[o - 1]).collect(),
    })
}
