//! Dye-color effects: orientation vectors, the dye-adjusted information
//! matrix A = XᵀX − N⁻¹(Xᵀq)(Xᵀq)ᵀ, and nearly symmetric assignments built
//! by orienting an even augmentation of the design along Eulerian circuits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};
use crate::exact::ExactDesign;
use crate::factorial::{PairSpace, WeightMatrix};
use crate::linalg::Cholesky;
use crate::measure::{InfoMatrix, OptimalityReport, Regressors};

/// q₁…q_N aligned to [`ExactDesign::slides`]. `+1` colors the pair's first
/// (lexicographically larger) member red.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyeAssignment {
    signs: Vec<i8>,
}

impl DyeAssignment {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(DesignError::InvalidDesign("dye signs must be +1 or -1".into()));
        }
        Ok(Self { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn reversed_colors(&self) -> Self {
        Self {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    fn check(&self, design: &ExactDesign) -> Result<()> {
        if self.len() != design.n_slides() {
            return Err(DesignError::LengthMismatch {
                what: "dye signs per slide",
                expected: design.n_slides(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// Xᵀq; zero exactly when every treatment is red as often as green.
pub fn dye_imbalance(design: &ExactDesign, q: &DyeAssignment, regressors: &Regressors) -> Result<DVector<f64>> {
    q.check(design)?;
    let mut b = DVector::<f64>::zeros(regressors.dim());
    for (&k, &s) in design.slides().iter().zip(q.signs()) {
        for (bi, &x) in b.iter_mut().zip(regressors.row(k)) {
            *bi += f64::from(s) * x;
        }
    }
    Ok(b)
}

pub fn dye_info_matrix(design: &ExactDesign, q: &DyeAssignment, regressors: &Regressors) -> Result<InfoMatrix> {
    let b = dye_imbalance(design, q, regressors)?;
    let xtx = design.information(regressors)?;
    let n = design.n_slides() as f64;
    let a: DMatrix<f64> = xtx - (&b * b.transpose()) / n;
    Ok(InfoMatrix(a))
}

/// Eff(dye) = N⁻¹ tr(M(π̃)⁻¹W) / tr(A⁻¹W).
pub fn eff_dye(
    design: &ExactDesign,
    q: &DyeAssignment,
    optimal: &OptimalityReport,
    regressors: &Regressors,
    w: &WeightMatrix,
) -> Result<f64> {
    let a = dye_info_matrix(design, q, regressors)?;
    let chol = Cholesky::new(a.matrix()).map_err(|_| DesignError::DyeConfounded)?;
    let trace = chol.trace_inv_diag(w.diag());
    Ok(optimal.criterion / design.n_slides() as f64 / trace)
}

/// Red and green appearances per treatment (lexicographic treatment order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorBalance {
    pub red: Vec<u32>,
    pub green: Vec<u32>,
}

impl ColorBalance {
    pub fn difference(&self, t: usize) -> i64 {
        i64::from(self.red[t]) - i64::from(self.green[t])
    }

    pub fn max_imbalance(&self) -> u64 {
        (0..self.red.len())
            .map(|t| self.difference(t).unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

pub fn color_balance(design: &ExactDesign, q: &DyeAssignment, space: &PairSpace) -> Result<ColorBalance> {
    q.check(design)?;
    let v = space.treatments().len();
    let mut red = vec![0; v];
    let mut green = vec![0; v];
    for (&k, &s) in design.slides().iter().zip(q.signs()) {
        let pair = &space.pairs()[k];
        let (r, g) = if s > 0 {
            (pair.first_idx, pair.second_idx)
        } else {
            (pair.second_idx, pair.first_idx)
        };
        red[r] += 1;
        green[g] += 1;
    }
    Ok(ColorBalance { red, green })
}

/// Orientation of an even multigraph along Eulerian circuits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerOrientation {
    /// Tail (red end) of each edge.
    pub tails: Vec<usize>,
    /// One closed circuit of edge ids per connected component with edges.
    pub circuits: Vec<Vec<usize>>,
}

/// Hierholzer on each component: start at the lowest vertex, always take the
/// unused edge to the lowest-numbered neighbour (lowest edge id on ties).
/// Every vertex must have even degree.
pub fn euler_orientation(n_vertices: usize, edges: &[(usize, usize)]) -> EulerOrientation {
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adjacency[a].push((b, e));
        adjacency[b].push((a, e));
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    debug_assert!(adjacency.iter().all(|l| l.len() % 2 == 0), "odd vertex degree");

    let mut used = vec![false; edges.len()];
    let mut cursor = vec![0usize; n_vertices];
    let mut tails = vec![usize::MAX; edges.len()];
    let mut circuits = Vec::new();

    for start in 0..n_vertices {
        if adjacency[start].iter().all(|&(_, e)| used[e]) {
            continue;
        }
        let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
        let mut circuit = Vec::new();
        while let Some(&(u, via)) = stack.last() {
            while cursor[u] < adjacency[u].len() && used[adjacency[u][cursor[u]].1] {
                cursor[u] += 1;
            }
            if let Some(&(next, e)) = adjacency[u].get(cursor[u]) {
                used[e] = true;
                tails[e] = u;
                stack.push((next, Some(e)));
            } else {
                stack.pop();
                if let Some(e) = via {
                    circuit.push(e);
                }
            }
        }
        circuit.reverse();
        circuits.push(circuit);
    }
    EulerOrientation { tails, circuits }
}

/// A dye assignment in which every treatment is red and green equally
/// often, up to one for odd replication.
///
/// Odd-replicated treatments are paired in ascending order into phantom
/// slides; the resulting even design is oriented along Eulerian circuits
/// and the phantom slides are dropped again.
pub fn nearly_symmetric_assignment(design: &ExactDesign, space: &PairSpace) -> DyeAssignment {
    let slides = design.slides();
    let mut edges: Vec<(usize, usize)> = slides
        .iter()
        .map(|&k| (space.pairs()[k].first_idx, space.pairs()[k].second_idx))
        .collect();
    let odd: Vec<usize> = design
        .replication(space)
        .iter()
        .enumerate()
        .filter(|(_, &r)| r % 2 == 1)
        .map(|(t, _)| t)
        .collect();
    debug_assert!(odd.len().is_multiple_of(2));
    edges.extend(odd.chunks_exact(2).map(|c| (c[0], c[1])));

    let orientation = euler_orientation(space.treatments().len(), &edges);
    let signs = slides
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if orientation.tails[i] == space.pairs()[k].first_idx {
                1
            } else {
                -1
            }
        })
        .collect();
    DyeAssignment { signs }
}
