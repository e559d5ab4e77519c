//! Exact designs: integer slide allocations, their criterion and efficiency,
//! discretization of the optimal measure by rounding, and the greedy
//! step-up/step-down refinement that turns catalog designs into N-slide ones.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::factorial::{theta_layout, weight_matrix, FactorialSpec, PairSpace, ThetaLayout, Treatment, WeightMatrix};
use crate::linalg::Cholesky;
use crate::measure::{solve_optimal_measure, OptimalityReport, Regressors, SolverOptions, ZERO_MASS};

/// Breakpoints closer than this (relative) are one rounding event; masses
/// of symmetric pairs agree only to rounding error.
pub const BREAKPOINT_TIE_TOL: f64 = 1e-9;
/// Relative tolerance under which two criterion values count as tied.
pub const CRITERION_TIE_TOL: f64 = 1e-12;
/// Upper bound on catalog sizes explored by [`construct_design`].
pub const MAX_SCAN_SLIDES: u64 = 100_000;

/// Slide counts f₁…f_p over the candidate pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactDesign {
    freqs: Vec<u32>,
}

impl ExactDesign {
    pub fn new(freqs: Vec<u32>) -> Result<Self> {
        if freqs.iter().all(|&f| f == 0) {
            return Err(DesignError::InvalidDesign("a design needs at least one slide".into()));
        }
        Ok(Self { freqs })
    }

    /// Builds a design from a list of compared pairs (order within a pair is irrelevant).
    pub fn from_pairs(space: &PairSpace, slides: &[(Treatment, Treatment)]) -> Result<Self> {
        let mut freqs = vec![0u32; space.n_pairs()];
        for (a, b) in slides {
            freqs[space.position_of(a, b)?] += 1;
        }
        Self::new(freqs)
    }

    pub fn from_positions(p: usize, positions: &[usize]) -> Result<Self> {
        let mut freqs = vec![0u32; p];
        for &k in positions {
            if k >= p {
                return Err(DesignError::InvalidDesign(format!("pair position {k} out of range")));
            }
            freqs[k] += 1;
        }
        Self::new(freqs)
    }

    pub fn freqs(&self) -> &[u32] {
        &self.freqs
    }

    pub fn n_slides(&self) -> usize {
        self.freqs.iter().map(|&f| f as usize).sum()
    }

    pub fn n_pairs(&self) -> usize {
        self.freqs.len()
    }

    /// Slide list in canonical order: pair label order, repeats consecutive.
    pub fn slides(&self) -> Vec<usize> {
        self.freqs
            .iter()
            .enumerate()
            .flat_map(|(k, &f)| std::iter::repeat_n(k, f as usize))
            .collect()
    }

    /// Times each treatment appears on a slide.
    pub fn replication(&self, space: &PairSpace) -> Vec<u32> {
        let mut reps = vec![0; space.treatments().len()];
        for (pair, &f) in space.pairs().iter().zip(&self.freqs) {
            reps[pair.first_idx] += f;
            reps[pair.second_idx] += f;
        }
        reps
    }

    fn coeffs(&self) -> Vec<f64> {
        self.freqs.iter().map(|&f| f64::from(f)).collect()
    }

    /// XᵀX = Σ f_k x_k x_kᵀ
    pub fn information(&self, regressors: &Regressors) -> Result<DMatrix<f64>> {
        regressors.weighted_gram(&self.coeffs())
    }

    /// Design matrix X with one row per slide (canonical slide order).
    pub fn design_matrix(&self, regressors: &Regressors) -> DMatrix<f64> {
        let slides = self.slides();
        DMatrix::from_fn(slides.len(), regressors.dim(), |i, j| regressors.row(slides[i])[j])
    }

    fn check(&self, regressors: &Regressors) -> Result<()> {
        if self.freqs.len() != regressors.count() {
            return Err(DesignError::LengthMismatch {
                what: "frequencies per candidate pair",
                expected: regressors.count(),
                actual: self.freqs.len(),
            });
        }
        Ok(())
    }

    pub fn is_nonsingular(&self, regressors: &Regressors) -> bool {
        self.information(regressors).and_then(|m| Cholesky::new(&m)).is_ok()
    }
}

/// ψ = tr((XᵀX)⁻¹W) with σ² = 1.
pub fn psi_exact(design: &ExactDesign, regressors: &Regressors, w: &WeightMatrix) -> Result<f64> {
    design.check(regressors)?;
    let m = design.information(regressors)?;
    Ok(Cholesky::new(&m)?.trace_inv_diag(w.diag()))
}

/// Per-order sums of BLUE variances S₁…Sₙ and ψ = Σ w_i S_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceBreakdown {
    pub by_order: Vec<f64>,
    pub psi: f64,
}

pub fn variance_breakdown(
    design: &ExactDesign,
    regressors: &Regressors,
    layout: &ThetaLayout,
    w: &[f64],
) -> Result<VarianceBreakdown> {
    design.check(regressors)?;
    if w.len() != layout.n_orders() {
        return Err(DesignError::InvalidWeights(format!(
            "expected {} weights, got {}",
            layout.n_orders(),
            w.len()
        )));
    }
    let chol = Cholesky::new(&design.information(regressors)?)?;
    let d = layout.len();
    let mut by_order = vec![0.0; layout.n_orders()];
    let mut e = DVector::<f64>::zeros(d);
    for j in 0..d {
        e.fill(0.0);
        e[j] = 1.0;
        let col = chol.solve_vec(&e);
        by_order[layout.order(j) - 1] += col[j];
    }
    let psi = by_order.iter().zip(w).map(|(s, wi)| s * wi).sum();
    Ok(VarianceBreakdown { by_order, psi })
}

/// Eff = tr(M(π̃)⁻¹W) / tr(M(f/N)⁻¹W).
pub fn efficiency(
    design: &ExactDesign,
    optimal: &OptimalityReport,
    regressors: &Regressors,
    w: &WeightMatrix,
) -> Result<f64> {
    let psi = psi_exact(design, regressors, w)?;
    Ok(optimal.criterion / (design.n_slides() as f64 * psi))
}

/// Rounds c·π_k to the nearest integer, halves rounding up.
pub fn round_at(masses: &[f64], c: f64) -> Vec<u32> {
    masses.iter().map(|&m| (c * m + 0.5).floor() as u32).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub g: usize,
    pub design: ExactDesign,
    /// Open interval of multipliers c that round to `design`.
    pub c_interval: (f64, f64),
}

/// The set G with its rounded designs d(g), g increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundingCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl RoundingCatalog {
    pub fn sizes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.g).collect()
    }

    pub fn get(&self, g: usize) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.g == g)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One distinct rounding of c·π̃ as c increases.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanStep {
    pub entry: CatalogEntry,
    pub nonsingular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Breakpoint(f64, usize);

impl Eq for Breakpoint {}

impl PartialOrd for Breakpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Breakpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Walks the breakpoints c = (m + ½)/π̃_k in increasing order, yielding every
/// distinct rounded design together with its c-interval.
pub struct RoundingScanner<'a> {
    masses: Vec<f64>,
    regressors: &'a Regressors,
    freqs: Vec<u32>,
    heap: BinaryHeap<Reverse<Breakpoint>>,
}

impl<'a> RoundingScanner<'a> {
    pub fn new(optimal: &OptimalityReport, regressors: &'a Regressors) -> Self {
        let masses = optimal.measure.masses().to_vec();
        let heap = masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > ZERO_MASS)
            .map(|(k, &m)| Reverse(Breakpoint(0.5 / m, k)))
            .collect();
        Self {
            freqs: vec![0; masses.len()],
            masses,
            regressors,
            heap,
        }
    }
}

impl Iterator for RoundingScanner<'_> {
    type Item = ScanStep;

    fn next(&mut self) -> Option<ScanStep> {
        let Reverse(Breakpoint(start, _)) = *self.heap.peek()?;
        let mut lo = start;
        while let Some(&Reverse(Breakpoint(c, k))) = self.heap.peek() {
            if c > start * (1.0 + BREAKPOINT_TIE_TOL) {
                break;
            }
            self.heap.pop();
            lo = lo.max(c);
            self.freqs[k] += 1;
            let next = (f64::from(self.freqs[k]) + 0.5) / self.masses[k];
            self.heap.push(Reverse(Breakpoint(next, k)));
        }
        let hi = self.heap.peek().map_or(f64::INFINITY, |r| r.0 .0);
        let design = ExactDesign {
            freqs: self.freqs.clone(),
        };
        let nonsingular = design.is_nonsingular(self.regressors);
        Some(ScanStep {
            entry: CatalogEntry {
                g: design.n_slides(),
                design,
                c_interval: (lo, hi),
            },
            nonsingular,
        })
    }
}

/// All nonsingular rounded designs with at most `g_max` slides.
pub fn rounding_scan(optimal: &OptimalityReport, regressors: &Regressors, g_max: usize) -> RoundingCatalog {
    let entries = RoundingScanner::new(optimal, regressors)
        .take_while(|s| s.entry.g <= g_max)
        .filter(|s| s.nonsingular)
        .map(|s| s.entry)
        .collect();
    RoundingCatalog { entries }
}

/// Incrementally maintained XᵀX for single-slide moves.
struct Gram {
    m: DMatrix<f64>,
}

impl Gram {
    fn update(&mut self, x: &[f64], sign: f64) {
        let d = x.len();
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                self.m[(i, j)] += sign * x[i] * x[j];
            }
        }
    }

    fn trial(&mut self, x: &[f64], sign: f64, w: &WeightMatrix) -> Result<f64> {
        self.update(x, sign);
        let out = Cholesky::new(&self.m).map(|c| c.trace_inv_diag(w.diag()));
        self.update(x, -sign);
        out
    }
}

fn improves(candidate: f64, best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((b, _)) => candidate < b - CRITERION_TIE_TOL * b.abs(),
    }
}

/// Adds slides one at a time, each time the pair giving the smallest
/// tr((XᵀX)⁻¹W); ties go to the lowest pair label.
pub fn step_up(design: &ExactDesign, target: usize, regressors: &Regressors, w: &WeightMatrix) -> Result<ExactDesign> {
    design.check(regressors)?;
    let n0 = design.n_slides();
    if target < n0 {
        return Err(DesignError::InvalidDesign(format!(
            "step-up target {target} is below the current {n0} slides"
        )));
    }
    let mut gram = Gram {
        m: design.information(regressors)?,
    };
    Cholesky::new(&gram.m)?;
    let mut freqs = design.freqs.clone();
    for _ in n0..target {
        let mut best: Option<(f64, usize)> = None;
        for k in 0..regressors.count() {
            let value = gram.trial(regressors.row(k), 1.0, w)?;
            if improves(value, best) {
                best = Some((value, k));
            }
        }
        let (_, k) = best.expect("at least one candidate pair");
        freqs[k] += 1;
        gram.update(regressors.row(k), 1.0);
    }
    Ok(ExactDesign { freqs })
}

/// Removes slides one at a time, each time the one whose deletion gives the
/// smallest tr((XᵀX)⁻¹W). Deletions that make XᵀX singular are skipped.
pub fn step_down(
    design: &ExactDesign,
    target: usize,
    regressors: &Regressors,
    w: &WeightMatrix,
) -> Result<ExactDesign> {
    design.check(regressors)?;
    let n1 = design.n_slides();
    if target > n1 {
        return Err(DesignError::InvalidDesign(format!(
            "step-down target {target} is above the current {n1} slides"
        )));
    }
    let mut gram = Gram {
        m: design.information(regressors)?,
    };
    Cholesky::new(&gram.m)?;
    let mut freqs = design.freqs.clone();
    for slides in ((target + 1)..=n1).rev() {
        let mut best: Option<(f64, usize)> = None;
        for (k, &f) in freqs.iter().enumerate() {
            if f == 0 {
                continue;
            }
            match gram.trial(regressors.row(k), -1.0, w) {
                Ok(value) => {
                    if improves(value, best) {
                        best = Some((value, k));
                    }
                }
                Err(DesignError::SingularInformation { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let (_, k) = best.ok_or(DesignError::CannotStepDown { slides })?;
        freqs[k] -= 1;
        gram.update(regressors.row(k), -1.0);
    }
    Ok(ExactDesign { freqs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepDirection {
    Up,
    Down,
    None,
}

/// Outcome of refining one catalog design d(g_j) to N slides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub start_g: usize,
    pub direction: StepDirection,
    /// `None` when step-down could not avoid singular intermediates.
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub start_g: usize,
    pub direction: StepDirection,
    pub steps: usize,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionResult {
    pub design: ExactDesign,
    pub efficiency: f64,
    pub provenance: Provenance,
    pub optimal: OptimalityReport,
}

/// Steps I–III: optimal measure, rounding catalog, and the step-up/down
/// sweep over catalog entries up to the first one exceeding 2N.
pub fn construct_design(
    spec: &FactorialSpec,
    w: &[f64],
    slides: usize,
    opts: SolverOptions,
) -> Result<ConstructionResult> {
    let space = PairSpace::new(spec);
    let weights = weight_matrix(&theta_layout(spec), w)?;
    let regressors = space.regressors();
    let optimal = solve_optimal_measure(&regressors, &weights, opts)?;
    construct_from_measure(&regressors, &weights, optimal, slides)
}

pub fn construct_from_measure(
    regressors: &Regressors,
    w: &WeightMatrix,
    optimal: OptimalityReport,
    slides: usize,
) -> Result<ConstructionResult> {
    if slides < regressors.dim() {
        return Err(DesignError::ConstructionFailure(format!(
            "{slides} slides cannot estimate {} effect parameters",
            regressors.dim()
        )));
    }
    let bound = 2 * slides;
    let mut catalog = Vec::new();
    for step in RoundingScanner::new(&optimal, regressors) {
        if step.entry.g as u64 > MAX_SCAN_SLIDES {
            break;
        }
        if !step.nonsingular {
            continue;
        }
        let g = step.entry.g;
        catalog.push(step.entry);
        if g > bound {
            break;
        }
    }
    if catalog.is_empty() {
        return Err(DesignError::ConstructionFailure(
            "rounding the optimal measure never produced a nonsingular design".into(),
        ));
    }

    let mut branches = Vec::with_capacity(catalog.len());
    let mut best: Option<(f64, ExactDesign, usize, StepDirection)> = None;
    for entry in &catalog {
        let (direction, refined) = match entry.g.cmp(&slides) {
            Ordering::Less => (StepDirection::Up, step_up(&entry.design, slides, regressors, w)),
            Ordering::Greater => (StepDirection::Down, step_down(&entry.design, slides, regressors, w)),
            Ordering::Equal => (StepDirection::None, Ok(entry.design.clone())),
        };
        let refined = match refined {
            Ok(d) => d,
            Err(DesignError::CannotStepDown { .. }) => {
                branches.push(Branch {
                    start_g: entry.g,
                    direction,
                    efficiency: None,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let eff = efficiency(&refined, &optimal, regressors, w)?;
        branches.push(Branch {
            start_g: entry.g,
            direction,
            efficiency: Some(eff),
        });
        let better = best.as_ref().is_none_or(|(b, ..)| eff > b + CRITERION_TIE_TOL * b);
        if better {
            best = Some((eff, refined, entry.g, direction));
        }
    }

    let (efficiency, design, start_g, direction) = best.ok_or_else(|| {
        DesignError::ConstructionFailure(format!("no catalog design could be refined to {slides} slides"))
    })?;
    Ok(ConstructionResult {
        design,
        efficiency,
        provenance: Provenance {
            start_g,
            direction,
            steps: start_g.abs_diff(slides),
            branches,
        },
        optimal,
    })
}
