//! End-to-end runs: construct, evaluate, and the reference reproductions.

use std::fmt;

use crate::config::{ConfigError, RunConfig};
use crate::document::{
    ConstructionRecord, DesignDocument, DocProvenance, DyeSource, Metrics, ProfileEfficiency, Slide, SolverRecord,
    SpecEcho,
};
use crate::dye::{color_balance, eff_dye, nearly_symmetric_assignment, DyeAssignment};
use crate::error::DesignError;
use crate::exact::{
    construct_from_measure, efficiency, psi_exact, round_at, step_down, step_up, variance_breakdown, ExactDesign,
    RoundingScanner,
};
use crate::factorial::{theta_layout, weight_matrix, FactorialSpec, PairSpace, Parametrization, WeightMatrix};
use crate::measure::{solve_optimal_measure, OptimalityReport, Regressors, SolverOptions};
use crate::notation::{colors, format_colored_design, parse_colored_list, parse_pair_list};
use crate::reference::{
    self, MassCategory, ReferenceExample, GAP_3X5, MEASURE_3X3_ALL_TO_NEXT, MEASURE_3X3_BASELINE, PROFILE_STUDIES,
    REFINE_3X3, SINGULAR_2X4,
};
use crate::robustness::{eff_sharp, pair_variances, solve_gls_measure, VarianceProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    Config(ConfigError),
    Design(DesignError),
    UnknownExample(String),
}

impl PipelineError {
    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Design(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Config(e) => e.fmt(f),
            PipelineError::Design(e) => e.fmt(f),
            PipelineError::UnknownExample(id) => {
                write!(f, "unknown example {id:?}; run list-examples for the available ids")
            }
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e)
    }
}

impl From<DesignError> for PipelineError {
    fn from(e: DesignError) -> Self {
        PipelineError::Design(e)
    }
}

pub type PipelineResult<T> = std::result::Result<T, PipelineError>;

/// Everything fixed by the factorial spec and weights.
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: PairSpace,
    pub regressors: Regressors,
    pub weights: WeightMatrix,
    pub order_weights: Vec<f64>,
}

impl Problem {
    pub fn new(spec: &FactorialSpec, w: &[f64]) -> crate::Result<Self> {
        let space = PairSpace::new(spec);
        let weights = weight_matrix(&theta_layout(spec), w)?;
        Ok(Self {
            regressors: space.regressors(),
            space,
            weights,
            order_weights: w.to_vec(),
        })
    }

    pub fn uniform(levels: &[usize], param: Parametrization, w: &[f64]) -> crate::Result<Self> {
        Self::new(&FactorialSpec::uniform(levels.to_vec(), param)?, w)
    }

    pub fn solve(&self, opts: SolverOptions) -> crate::Result<OptimalityReport> {
        solve_optimal_measure(&self.regressors, &self.weights, opts)
    }

    pub fn efficiency(&self, design: &ExactDesign, optimal: &OptimalityReport) -> crate::Result<f64> {
        efficiency(design, optimal, &self.regressors, &self.weights)
    }

    pub fn eff_dye(&self, design: &ExactDesign, q: &DyeAssignment, optimal: &OptimalityReport) -> crate::Result<f64> {
        eff_dye(design, q, optimal, &self.regressors, &self.weights)
    }

    pub fn eff_sharp(
        &self,
        design: &ExactDesign,
        profile: &VarianceProfile,
        opts: SolverOptions,
    ) -> crate::Result<f64> {
        let pv = pair_variances(profile, &self.space)?;
        let gls = solve_gls_measure(&self.regressors, &self.weights, &pv, opts)?;
        eff_sharp(design, &pv, &gls, &self.regressors, &self.weights)
    }
}

fn metrics(
    problem: &Problem,
    optimal: &OptimalityReport,
    design: &ExactDesign,
    q: &DyeAssignment,
    profiles: &[(String, VarianceProfile)],
    opts: SolverOptions,
) -> crate::Result<Metrics> {
    let breakdown = variance_breakdown(
        design,
        &problem.regressors,
        problem.space.layout(),
        &problem.order_weights,
    )?;
    let eff = problem.efficiency(design, optimal)?;
    let eff_dye = match problem.eff_dye(design, q, optimal) {
        Ok(v) => Some(v),
        Err(DesignError::DyeConfounded) => None,
        Err(e) => return Err(e),
    };
    let balance = color_balance(design, q, &problem.space)?;
    let eff_sharp = profiles
        .iter()
        .map(|(name, p)| {
            Ok(ProfileEfficiency {
                name: name.clone(),
                eff_sharp: problem.eff_sharp(design, p, opts)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Metrics {
        psi: breakdown.psi,
        eff,
        eff_dye,
        variance_by_order: breakdown.by_order,
        max_color_imbalance: balance.max_imbalance(),
        eff_sharp,
    })
}

#[allow(clippy::too_many_arguments)]
fn document(
    cfg: &RunConfig,
    problem: &Problem,
    command: &str,
    optimal: &OptimalityReport,
    design: &ExactDesign,
    q: &DyeAssignment,
    dye_source: DyeSource,
    construction: Option<ConstructionRecord>,
) -> crate::Result<DesignDocument> {
    let opts = cfg.solver_options();
    let slides = design
        .slides()
        .iter()
        .zip(q.signs())
        .map(|(&k, &s)| {
            let c = colors(&problem.space, k, s);
            Slide {
                red: c.red,
                green: c.green,
            }
        })
        .collect();
    Ok(DesignDocument {
        spec: SpecEcho {
            levels: cfg.spec.levels().to_vec(),
            params: cfg.spec.params().to_vec(),
            weights: cfg.weights.clone(),
            slides: design.n_slides(),
            epsilon: cfg.epsilon,
        },
        slides,
        freqs: design.freqs().to_vec(),
        metrics: metrics(problem, optimal, design, q, &cfg.profiles, opts)?,
        provenance: DocProvenance {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            solver: SolverRecord {
                epsilon: opts.epsilon,
                max_iter: opts.max_iter,
                iterations: optimal.iterations,
                gap: optimal.gap,
                criterion: optimal.criterion,
            },
            construction,
            dye: dye_source,
        },
        timestamp: String::new(),
    })
}

/// Builds a design for the config's slide budget and colors it nearly
/// symmetrically. The timestamp is left empty for the caller to fill.
pub fn run_construct(cfg: &RunConfig) -> PipelineResult<DesignDocument> {
    if cfg.design.is_some() {
        return Err(ConfigError::Validation("construct takes no design; use evaluate".into()).into());
    }
    let n = cfg
        .slides
        .ok_or_else(|| ConfigError::Validation("construct needs a slide budget".into()))?;
    let problem = Problem::new(&cfg.spec, &cfg.weights)?;
    let optimal = problem.solve(cfg.solver_options())?;
    let built = construct_from_measure(&problem.regressors, &problem.weights, optimal, n)?;
    let q = nearly_symmetric_assignment(&built.design, &problem.space);
    let record = ConstructionRecord {
        start_g: built.provenance.start_g,
        direction: built.provenance.direction,
        steps: built.provenance.steps,
        catalog: built.provenance.branches.iter().map(|b| b.start_g).collect(),
    };
    Ok(document(
        cfg,
        &problem,
        "construct",
        &built.optimal,
        &built.design,
        &q,
        DyeSource::NearlySymmetric,
        Some(record),
    )?)
}

/// Scores the config's design. Without a supplied dye assignment the
/// nearly symmetric one is used.
pub fn run_evaluate(cfg: &RunConfig) -> PipelineResult<DesignDocument> {
    let supplied = cfg
        .design
        .as_ref()
        .ok_or_else(|| ConfigError::Validation("evaluate needs a design".into()))?;
    let problem = Problem::new(&cfg.spec, &cfg.weights)?;
    let design = &supplied.design;
    if !design.is_nonsingular(&problem.regressors) {
        // Surface the pivot that failed rather than a bare flag.
        psi_exact(design, &problem.regressors, &problem.weights)?;
    }
    let optimal = problem.solve(cfg.solver_options())?;
    let (q, source) = match &supplied.dye {
        Some(q) => (q.clone(), DyeSource::Supplied),
        None => (
            nearly_symmetric_assignment(design, &problem.space),
            DyeSource::NearlySymmetric,
        ),
    };
    Ok(document(cfg, &problem, "evaluate", &optimal, design, &q, source, None)?)
}

/// Plain-text summary of a document in "(R11, G01)" notation.
pub fn summary(doc: &DesignDocument) -> String {
    let mut out = String::new();
    let spec = FactorialSpec::new(doc.spec.levels.clone(), doc.spec.params.clone());
    let params: Vec<String> = doc.spec.params.iter().map(|p| p.to_string()).collect();
    out.push_str(&format!(
        "levels {:?}  params [{}]  weights {:?}  slides {}\n",
        doc.spec.levels,
        params.join(", "),
        doc.spec.weights,
        doc.slides.len()
    ));
    if let Ok(spec) = spec {
        let text: Vec<String> = doc
            .slides
            .iter()
            .map(|s| format!("(R{}, G{})", spec.label(&s.red), spec.label(&s.green)))
            .collect();
        for chunk in text.chunks(8) {
            out.push_str("  ");
            out.push_str(&chunk.join(", "));
            out.push('\n');
        }
    }
    let m = &doc.metrics;
    out.push_str(&format!("psi        {:.6}\n", m.psi));
    out.push_str(&format!("Eff        {:.4}\n", m.eff));
    match m.eff_dye {
        Some(v) => out.push_str(&format!("Eff(dye)   {v:.4}\n")),
        None => out.push_str("Eff(dye)   confounded\n"),
    }
    for (i, s) in m.variance_by_order.iter().enumerate() {
        out.push_str(&format!("S{}         {:.6}\n", i + 1, s));
    }
    out.push_str(&format!("max |red - green|  {}\n", m.max_color_imbalance));
    for p in &m.eff_sharp {
        out.push_str(&format!("Eff#[{}]  {:.4}\n", p.name, p.eff_sharp));
    }
    if let Some(c) = &doc.provenance.construction {
        out.push_str(&format!(
            "built from d({}) by {} step(s) {:?}\n",
            c.start_g, c.steps, c.direction
        ));
    }
    out
}

/// One published-versus-computed comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub published: String,
    pub computed: String,
    /// `None` for informational lines.
    pub pass: Option<bool>,
}

impl Check {
    pub fn within(label: impl Into<String>, published: f64, computed: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            published: format!("{published:.4}"),
            computed: format!(
                "{computed:.6}  (|diff| {:.1e}, tol {tol:.0e})",
                (computed - published).abs()
            ),
            pass: Some((computed - published).abs() <= tol),
        }
    }

    pub fn at_least(label: impl Into<String>, published: f64, computed: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            published: format!(">= {published:.4} - {tol:.0e}"),
            computed: format!("{computed:.6}"),
            pass: Some(computed >= published - tol),
        }
    }

    pub fn exact(label: impl Into<String>, published: impl fmt::Debug, computed: impl fmt::Debug, pass: bool) -> Self {
        Self {
            label: label.into(),
            published: format!("{published:?}"),
            computed: format!("{computed:?}"),
            pass: Some(pass),
        }
    }

    pub fn info(label: impl Into<String>, computed: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            published: "-".into(),
            computed: computed.into(),
            pass: None,
        }
    }

    fn failed(label: impl Into<String>, err: &DesignError) -> Self {
        Self {
            label: label.into(),
            published: "-".into(),
            computed: format!("error: {err}"),
            pass: Some(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: String,
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass == Some(true)).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass == Some(false)).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.id, self.title)?;
        let width = self.checks.iter().map(|c| c.label.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = match c.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "info",
            };
            writeln!(
                f,
                "  [{tag}] {:width$}  published {}  computed {}",
                c.label, c.published, c.computed
            )?;
        }
        write!(f, "  {} passed, {} failed", self.passed(), self.failed())
    }
}

const EFF_TOL: f64 = 1e-4;
const MASS_TOL: f64 = 5e-5;
const SPREAD_TOL: f64 = 1e-8;

/// Ids accepted by [`run_reproduce`], with a one-line description.
pub fn list_examples() -> Vec<(String, String)> {
    let mut out = vec![
        (
            "table1".to_string(),
            "optimal measure, 3x3 baseline, w = (1, 1)".to_string(),
        ),
        (
            "table2".to_string(),
            "optimal measure, 3x3 all-to-next, w = (1, 1)".to_string(),
        ),
        (
            "table3".to_string(),
            "Eff(dye) of every colored reference design".to_string(),
        ),
    ];
    for ex in reference::EXAMPLES {
        out.push((ex.id.to_string(), ex.title.to_string()));
    }
    out.push((
        "ex3-effsharp".into(),
        "Eff# of the 3x4 designs under three variance patterns".into(),
    ));
    out.push((
        "ex5-effsharp".into(),
        "Eff# of the 2x2x4 designs under three variance patterns".into(),
    ));
    out.push(("scan-3x5".into(), "catalog gap for 3x5 baseline, w = (1, 2)".into()));
    out.push((
        "scan-2x4".into(),
        "singular catalog entry for 2^4, w = (1, 2, 2, 1)".into(),
    ));
    out.push(("scan-3x3".into(), "d(22) versus stepped designs, 3x3 baseline".into()));
    out
}

pub fn run_reproduce(id: &str) -> PipelineResult<Report> {
    let opts = SolverOptions::default();
    let (title, checks) = match id {
        "table1" => (
            "optimal measure, 3x3 baseline".to_string(),
            table_checks(Parametrization::Baseline, MEASURE_3X3_BASELINE, true, opts)?,
        ),
        "table2" => (
            "optimal measure, 3x3 all-to-next".to_string(),
            table_checks(Parametrization::AllToNext, MEASURE_3X3_ALL_TO_NEXT, false, opts)?,
        ),
        "table3" => ("Eff(dye) of the colored designs".to_string(), table3_checks(opts)?),
        "ex3-effsharp" => ("Eff# for 3x4".to_string(), effsharp_checks("ex3", opts)?),
        "ex5-effsharp" => ("Eff# for 2x2x4".to_string(), effsharp_checks("ex5", opts)?),
        "scan-3x5" => ("catalog gap, 3x5 baseline".to_string(), scan_3x5(opts)?),
        "scan-2x4" => ("singular catalog entry, 2^4".to_string(), scan_2x4(opts)?),
        "scan-3x3" => ("refining d(22), 3x3 baseline".to_string(), scan_3x3(opts)?),
        other => {
            let ex = reference::example(other).ok_or_else(|| PipelineError::UnknownExample(other.to_string()))?;
            let mut checks = example_checks(ex, opts)?;
            match other {
                "ex2-baseline" => checks.extend(table_checks(
                    Parametrization::Baseline,
                    MEASURE_3X3_BASELINE,
                    true,
                    opts,
                )?),
                "ex2-allnext" => checks.extend(table_checks(
                    Parametrization::AllToNext,
                    MEASURE_3X3_ALL_TO_NEXT,
                    false,
                    opts,
                )?),
                _ => {}
            }
            (ex.title.to_string(), checks)
        }
    };
    Ok(Report {
        id: id.to_string(),
        title,
        checks,
    })
}

/// The listed design of a reference example.
pub fn listed_design(ex: &ReferenceExample, space: &PairSpace) -> crate::Result<ExactDesign> {
    ExactDesign::from_pairs(space, &parse_pair_list(space.spec(), ex.listed)?)
}

/// The colored design of a reference example.
pub fn colored_reference(ex: &ReferenceExample, space: &PairSpace) -> crate::Result<(ExactDesign, DyeAssignment)> {
    crate::notation::colored_design(space, &parse_colored_list(space.spec(), ex.colored)?)
}

/// First `count` nonsingular catalog sizes.
pub fn catalog_prefix(problem: &Problem, optimal: &OptimalityReport, count: usize) -> Vec<usize> {
    RoundingScanner::new(optimal, &problem.regressors)
        .filter(|s| s.nonsingular)
        .map(|s| s.entry.g)
        .take(count)
        .collect()
}

fn example_checks(ex: &ReferenceExample, opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let problem = Problem::new(&ex.spec(), ex.weights)?;
    let optimal = problem.solve(opts)?;
    let mut checks = Vec::new();

    let listed = listed_design(ex, &problem.space)?;
    checks.push(Check::exact(
        "listed slides",
        ex.slides,
        listed.n_slides(),
        listed.n_slides() == ex.slides,
    ));
    checks.push(match problem.efficiency(&listed, &optimal) {
        Ok(v) => Check::within("Eff of listed design", ex.eff, v, EFF_TOL),
        Err(e) => Check::failed("Eff of listed design", &e),
    });

    let (colored, q) = colored_reference(ex, &problem.space)?;
    checks.push(Check::exact(
        "colored = listed",
        "same slides",
        colored == listed,
        colored == listed,
    ));
    checks.push(match problem.eff_dye(&colored, &q, &optimal) {
        Ok(v) => Check::within("Eff(dye) of colored design", ex.eff_dye, v, EFF_TOL),
        Err(e) => Check::failed("Eff(dye) of colored design", &e),
    });

    let prefix = catalog_prefix(&problem, &optimal, ex.g_prefix.len());
    checks.push(Check::exact(
        "catalog prefix G",
        ex.g_prefix,
        &prefix,
        prefix == ex.g_prefix,
    ));

    match construct_from_measure(&problem.regressors, &problem.weights, optimal.clone(), ex.slides) {
        Ok(built) => {
            checks.push(Check::at_least(
                "Eff of constructed design",
                ex.eff,
                built.efficiency,
                EFF_TOL,
            ));
            let q = nearly_symmetric_assignment(&built.design, &problem.space);
            let balance = color_balance(&built.design, &q, &problem.space)?;
            checks.push(Check::exact(
                "constructed max |red - green|",
                "<= 1",
                balance.max_imbalance(),
                balance.max_imbalance() <= 1,
            ));
            if let Ok(v) = problem.eff_dye(&built.design, &q, &optimal) {
                checks.push(Check::info("Eff(dye) of constructed design", format!("{v:.6}")));
            }
            checks.push(Check::info(
                "constructed from",
                format!(
                    "d({}) {:?} {} step(s): {}",
                    built.provenance.start_g,
                    built.provenance.direction,
                    built.provenance.steps,
                    format_colored_design(&problem.space, &built.design, &q)
                ),
            ));
        }
        Err(e) => checks.push(Check::failed("Eff of constructed design", &e)),
    }
    Ok(checks)
}

fn table_checks(
    param: Parametrization,
    table: &[MassCategory],
    strict: bool,
    opts: SolverOptions,
) -> PipelineResult<Vec<Check>> {
    let problem = Problem::uniform(&[3, 3], param, &[1.0, 1.0])?;
    let optimal = problem.solve(opts)?;
    let masses = optimal.measure.masses();
    let mut listed = vec![false; masses.len()];
    let mut checks = Vec::new();
    for cat in table {
        let pairs = parse_pair_list(problem.space.spec(), cat.pairs)?;
        let values = pairs
            .iter()
            .map(|(a, b)| {
                let k = problem.space.position_of(a, b)?;
                listed[k] = true;
                Ok(masses[k])
            })
            .collect::<crate::Result<Vec<f64>>>()?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut check = Check::within(format!("category {}", cat.name), cat.mass, mean, MASS_TOL);
        check.computed.push_str(&format!("  spread {:.1e}", hi - lo));
        if strict {
            check.pass = check.pass.map(|p| p && hi - lo <= SPREAD_TOL);
        }
        checks.push(check);
    }
    let rest = masses
        .iter()
        .zip(&listed)
        .filter(|(_, &l)| !l)
        .map(|(&m, _)| m)
        .fold(0.0, f64::max);
    let label = format!("category {} (all other pairs)", roman(table.len() + 1));
    if strict {
        checks.push(Check::within(label, 0.0, rest, MASS_TOL));
    } else {
        checks.push(Check::info(label, format!("largest mass {rest:.6}")));
    }
    checks.push(Check::info(
        "solver",
        format!(
            "{} iterations, gap {:.1e}, criterion {:.10}",
            optimal.iterations, optimal.gap, optimal.criterion
        ),
    ));
    Ok(checks)
}

fn roman(n: usize) -> &'static str {
    ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi"]
        .get(n.wrapping_sub(1))
        .copied()
        .unwrap_or("?")
}

fn table3_checks(opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let mut checks = Vec::new();
    for ex in reference::EXAMPLES {
        let problem = Problem::new(&ex.spec(), ex.weights)?;
        let optimal = problem.solve(opts)?;
        let (design, q) = colored_reference(ex, &problem.space)?;
        let label = format!("{} Eff(dye)", ex.id);
        checks.push(match problem.eff_dye(&design, &q, &optimal) {
            Ok(v) => Check::within(label, ex.eff_dye, v, EFF_TOL),
            Err(e) => Check::failed(label, &e),
        });
    }
    Ok(checks)
}

fn effsharp_checks(prefix: &str, opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let mut checks = Vec::new();
    for study in PROFILE_STUDIES.iter().filter(|s| s.example_id.starts_with(prefix)) {
        let ex = reference::example(study.example_id).expect("studies name known examples");
        let problem = Problem::new(&ex.spec(), ex.weights)?;
        let design = listed_design(ex, &problem.space)?;
        for (i, (pattern, &published)) in study.patterns.iter().zip(&study.eff_sharp).enumerate() {
            let profile = VarianceProfile::positional(&problem.space, pattern.to_vec())?;
            let label = format!("{} pattern {}", ex.id, roman(i + 1));
            checks.push(match problem.eff_sharp(&design, &profile, opts) {
                Ok(v) => Check::within(label, published, v, EFF_TOL),
                Err(e) => Check::failed(label, &e),
            });
        }
    }
    Ok(checks)
}

fn scan_3x5(opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let case = GAP_3X5;
    let problem = Problem::uniform(case.levels, Parametrization::Baseline, case.weights)?;
    let optimal = problem.solve(opts)?;
    let masses = optimal.measure.masses();
    let mut checks = Vec::new();
    for (c, g) in case.multipliers {
        let got: u32 = round_at(masses, c).iter().sum();
        checks.push(Check::exact(format!("slides at c = {c}"), g, got, got as usize == g));
    }
    let (lo, hi) = (case.multipliers[0].1, case.multipliers[1].1);
    let sizes: Vec<usize> = RoundingScanner::new(&optimal, &problem.regressors)
        .map(|s| s.entry.g)
        .take_while(|&g| g <= hi)
        .collect();
    let gap: Vec<usize> = sizes.iter().copied().filter(|&g| g > lo && g < hi).collect();
    checks.push(Check::exact(
        format!("rounded sizes strictly between {lo} and {hi}"),
        Vec::<usize>::new(),
        &gap,
        gap.is_empty(),
    ));
    let start = |g: usize| {
        RoundingScanner::new(&optimal, &problem.regressors)
            .find(|s| s.entry.g == g)
            .map(|s| s.entry.design)
            .ok_or_else(|| DesignError::ConstructionFailure(format!("no rounded design with {g} slides")))
    };
    let up = start(lo).and_then(|d| step_up(&d, case.target, &problem.regressors, &problem.weights));
    checks.push(refined_check(
        &problem,
        &optimal,
        format!("step up d({lo}) to {}", case.target),
        case.step_up_eff,
        up,
    ));
    let down = start(hi).and_then(|d| step_down(&d, case.target, &problem.regressors, &problem.weights));
    checks.push(refined_check(
        &problem,
        &optimal,
        format!("step down d({hi}) to {}", case.target),
        case.step_down_eff,
        down,
    ));
    Ok(checks)
}

fn refined_check(
    problem: &Problem,
    optimal: &OptimalityReport,
    label: String,
    published: f64,
    design: crate::Result<ExactDesign>,
) -> Check {
    match design.and_then(|d| problem.efficiency(&d, optimal)) {
        Ok(v) => Check::within(label, published, v, EFF_TOL),
        Err(e) => Check::failed(label, &e),
    }
}

fn scan_2x4(opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let case = SINGULAR_2X4;
    let problem = Problem::uniform(&[2, 2, 2, 2], Parametrization::Baseline, case.weights)?;
    let optimal = problem.solve(opts)?;
    let steps: Vec<_> = RoundingScanner::new(&optimal, &problem.regressors)
        .take_while(|s| s.entry.g <= case.first_nonsingular_g)
        .collect();
    let mut checks = Vec::new();
    let at = steps.iter().find(|s| s.entry.g == case.singular_g);
    checks.push(Check::exact(
        format!("d({}) singular", case.singular_g),
        true,
        at.map(|s| !s.nonsingular),
        at.is_some_and(|s| !s.nonsingular),
    ));
    let first = steps.iter().find(|s| s.nonsingular).map(|s| s.entry.g);
    checks.push(Check::exact(
        "smallest nonsingular catalog size",
        case.first_nonsingular_g,
        first,
        first == Some(case.first_nonsingular_g),
    ));
    let down = steps
        .iter()
        .find(|s| s.entry.g == case.first_nonsingular_g)
        .map(|s| s.entry.design.clone())
        .ok_or_else(|| DesignError::ConstructionFailure("no rounded design of that size".into()))
        .and_then(|d| step_down(&d, case.singular_g, &problem.regressors, &problem.weights));
    checks.push(refined_check(
        &problem,
        &optimal,
        format!("step down d({}) to {}", case.first_nonsingular_g, case.singular_g),
        case.step_down_eff,
        down,
    ));
    Ok(checks)
}

fn scan_3x3(opts: SolverOptions) -> PipelineResult<Vec<Check>> {
    let case = REFINE_3X3;
    let problem = Problem::uniform(&[3, 3], Parametrization::Baseline, &[1.0, 1.0])?;
    let optimal = problem.solve(opts)?;
    let entry = |g: usize| {
        RoundingScanner::new(&optimal, &problem.regressors)
            .find(|s| s.entry.g == g && s.nonsingular)
            .map(|s| s.entry.design)
            .ok_or_else(|| DesignError::ConstructionFailure(format!("{g} is not a catalog size")))
    };
    let n = case.target;
    let (below, eff_below) = case.from_below;
    let (above, eff_above) = case.from_above;
    Ok(vec![
        refined_check(&problem, &optimal, format!("d({n})"), case.direct_eff, entry(n)),
        refined_check(
            &problem,
            &optimal,
            format!("step up d({below}) to {n}"),
            eff_below,
            entry(below).and_then(|d| step_up(&d, n, &problem.regressors, &problem.weights)),
        ),
        refined_check(
            &problem,
            &optimal,
            format!("step down d({above}) to {n}"),
            eff_above,
            entry(above).and_then(|d| step_down(&d, n, &problem.regressors, &problem.weights)),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn construct_small_design() {
        let cfg = parse_config(r#"{"levels": [2, 2], "weights": [1, 1], "slides": 6}"#).unwrap();
        let doc = run_construct(&cfg).unwrap();
        assert_eq!(doc.slides.len(), 6);
        assert_eq!(doc.freqs.iter().sum::<u32>(), 6);
        assert!(doc.metrics.eff > 0.0 && doc.metrics.eff <= 1.0);
        assert!(doc.metrics.max_color_imbalance <= 1);
        assert!(doc.provenance.construction.is_some());
        assert!(summary(&doc).contains("Eff"));
    }

    #[test]
    fn construct_rejects_missing_budget_and_supplied_design() {
        let cfg = parse_config(r#"{"levels": [2, 2], "weights": [1, 1]}"#).unwrap();
        assert_eq!(run_construct(&cfg).unwrap_err().exit_code(), 2);
        let cfg = parse_config(r#"{"levels": [2, 2], "weights": [1, 1], "design": [["01", "00"]]}"#).unwrap();
        assert_eq!(run_construct(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn singular_design_is_a_numerical_failure() {
        let cfg =
            parse_config(r#"{"levels": [2, 2], "weights": [1, 1], "design": [["01", "00"], ["10", "00"]]}"#).unwrap();
        let err = run_evaluate(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }

    #[test]
    fn unknown_example() {
        assert!(matches!(run_reproduce("nope"), Err(PipelineError::UnknownExample(_))));
        assert!(list_examples().iter().any(|(id, _)| id == "table1"));
    }
}
