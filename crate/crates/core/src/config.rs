//! JSON run configuration.
//!
//! ```json
//! {
//!   "levels": [3, 4],
//!   "params": ["baseline", "all-to-next"],
//!   "weights": [1, 2],
//!   "slides": 18,
//!   "epsilon": 1e-11,
//!   "profile": [2, 2.5, 2.5, 3, 2.5, 3, 3, 4, 3, 3.5, 4, 4.5],
//!   "design": [["10", "00"], [[2, 0], [0, 0]], "(R01, G00)"],
//!   "dye": ["R", -1, "G"]
//! }
//! ```
//!
//! Treatments are integer arrays or, when every factor has at most ten
//! levels, digit strings. A design entry `[a, b]` is an unordered pair; its
//! dye flag says whether `a` is red ("R", +1) or green ("G", -1). Entries
//! written as colored strings carry their own colors.

use std::collections::HashMap;
use std::fmt;

use serde::Deserialize;

use crate::dye::DyeAssignment;
use crate::error::DesignError;
use crate::exact::ExactDesign;
use crate::factorial::{theta_layout, weight_matrix, FactorialSpec, PairSpace, Parametrization, Treatment};
use crate::measure::{SolverOptions, DEFAULT_EPSILON};
use crate::notation::{colored_design, parse_colored_slide, ColoredSlide};
use crate::robustness::VarianceProfile;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Validation(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<DesignError> for ConfigError {
    fn from(e: DesignError) -> Self {
        ConfigError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TreatmentField {
    Digits(String),
    Levels(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ParamsField {
    One(Parametrization),
    PerFactor(Vec<Parametrization>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ProfileField {
    Positional(Vec<f64>),
    ByTreatment(HashMap<String, f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SlideField {
    Pair([TreatmentField; 2]),
    Colored(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum DyeField {
    Letter(String),
    Sign(i64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    levels: Vec<usize>,
    #[serde(default)]
    params: Option<ParamsField>,
    weights: Vec<f64>,
    #[serde(default)]
    slides: Option<usize>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    profile: Option<ProfileField>,
    #[serde(default)]
    design: Option<Vec<SlideField>>,
    #[serde(default)]
    dye: Option<Vec<DyeField>>,
}

/// A design given in the config, already in canonical slide order.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppliedDesign {
    pub design: ExactDesign,
    pub dye: Option<DyeAssignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: FactorialSpec,
    /// One weight per effect order.
    pub weights: Vec<f64>,
    pub slides: Option<usize>,
    pub epsilon: f64,
    /// Named variance profiles for Eff♯; the config's own is named "profile".
    pub profiles: Vec<(String, VarianceProfile)>,
    pub design: Option<SuppliedDesign>,
}

impl RunConfig {
    pub fn new(spec: FactorialSpec, weights: Vec<f64>, slides: usize) -> Result<Self, ConfigError> {
        weight_matrix(&theta_layout(&spec), &weights)?;
        if slides == 0 {
            return Err(ConfigError::Validation("slides must be at least 1".into()));
        }
        Ok(Self {
            spec,
            weights,
            slides: Some(slides),
            epsilon: DEFAULT_EPSILON,
            profiles: Vec::new(),
            design: None,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions::with_epsilon(self.epsilon)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, ConfigError> {
        check_epsilon(epsilon)?;
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Adds a profile read from a standalone JSON document, either an array
    /// in lexicographic treatment order or a map keyed by treatment.
    pub fn add_profile(&mut self, name: impl Into<String>, text: &str) -> Result<(), ConfigError> {
        let field: ProfileField = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let profile = profile_from(&PairSpace::new(&self.spec), field)?;
        self.profiles.push((name.into(), profile));
        Ok(())
    }

    /// Slide budget: the explicit value, else the supplied design's size.
    pub fn slide_budget(&self) -> Option<usize> {
        self.slides
            .or_else(|| self.design.as_ref().map(|d| d.design.n_slides()))
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), ConfigError> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(ConfigError::Validation(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn treatment(spec: &FactorialSpec, field: &TreatmentField) -> Result<Treatment, ConfigError> {
    let t = match field {
        TreatmentField::Digits(s) => spec.parse_treatment(s)?,
        TreatmentField::Levels(v) => Treatment(v.clone()),
    };
    spec.check_treatment(&t)?;
    Ok(t)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let n = raw.levels.len();
    let params = match raw.params {
        None => vec![Parametrization::Baseline; n],
        Some(ParamsField::One(p)) => vec![p; n],
        Some(ParamsField::PerFactor(v)) => v,
    };
    if params.len() != n {
        return Err(ConfigError::Validation(format!(
            "params has {} entries for {n} factors",
            params.len()
        )));
    }
    let spec = FactorialSpec::new(raw.levels, params)?;
    if raw.weights.len() != n {
        return Err(ConfigError::Validation(format!(
            "weights has {} entries for {n} factors",
            raw.weights.len()
        )));
    }
    weight_matrix(&theta_layout(&spec), &raw.weights)?;
    if raw.slides == Some(0) {
        return Err(ConfigError::Validation("slides must be at least 1".into()));
    }
    let epsilon = raw.epsilon.unwrap_or(DEFAULT_EPSILON);
    check_epsilon(epsilon)?;

    let space = PairSpace::new(&spec);
    let profiles = match raw.profile {
        None => Vec::new(),
        Some(field) => vec![("profile".to_string(), profile_from(&space, field)?)],
    };

    let design = match raw.design {
        None => {
            if raw.dye.is_some() {
                return Err(ConfigError::Validation("dye given without a design".into()));
            }
            None
        }
        Some(entries) => Some(supplied_design(&space, &entries, raw.dye.as_deref())?),
    };
    if let (Some(n_slides), Some(d)) = (raw.slides, &design) {
        if d.design.n_slides() != n_slides {
            return Err(ConfigError::Validation(format!(
                "slides is {n_slides} but the design lists {}",
                d.design.n_slides()
            )));
        }
    }

    Ok(RunConfig {
        spec,
        weights: raw.weights,
        slides: raw.slides,
        epsilon,
        profiles,
        design,
    })
}

fn profile_from(space: &PairSpace, field: ProfileField) -> Result<VarianceProfile, ConfigError> {
    match field {
        ProfileField::Positional(v) => Ok(VarianceProfile::positional(space, v)?),
        ProfileField::ByTreatment(m) => {
            let spec = space.spec();
            let mut map = HashMap::with_capacity(m.len());
            for (key, value) in m {
                let t = spec.parse_treatment(&key)?;
                spec.check_treatment(&t)?;
                if map.insert(t, value).is_some() {
                    return Err(ConfigError::Validation(format!("profile lists {key} twice")));
                }
            }
            Ok(VarianceProfile::from_map(space, &map)?)
        }
    }
}

fn dye_sign(field: &DyeField) -> Result<i8, ConfigError> {
    match field {
        DyeField::Letter(s) if s.eq_ignore_ascii_case("r") => Ok(1),
        DyeField::Letter(s) if s.eq_ignore_ascii_case("g") => Ok(-1),
        DyeField::Sign(1) => Ok(1),
        DyeField::Sign(-1) => Ok(-1),
        other => Err(ConfigError::Validation(format!(
            "dye flags are \"R\", \"G\", 1 or -1, got {other:?}"
        ))),
    }
}

fn supplied_design(
    space: &PairSpace,
    entries: &[SlideField],
    dye: Option<&[DyeField]>,
) -> Result<SuppliedDesign, ConfigError> {
    let spec = space.spec();
    if entries.is_empty() {
        return Err(ConfigError::Validation("design has no slides".into()));
    }
    let n_colored = entries.iter().filter(|e| matches!(e, SlideField::Colored(_))).count();
    if n_colored > 0 && n_colored < entries.len() {
        return Err(ConfigError::Validation(
            "design mixes colored strings and plain pairs".into(),
        ));
    }
    if n_colored > 0 {
        if dye.is_some() {
            return Err(ConfigError::Validation(
                "colored slides already carry their dye; drop the dye key".into(),
            ));
        }
        let slides = entries
            .iter()
            .map(|e| match e {
                SlideField::Colored(s) => parse_colored_slide(spec, s).map_err(ConfigError::from),
                SlideField::Pair(_) => unreachable!(),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (design, q) = colored_design(space, &slides)?;
        return Ok(SuppliedDesign { design, dye: Some(q) });
    }

    let pairs = entries
        .iter()
        .map(|e| match e {
            SlideField::Pair([a, b]) => Ok((treatment(spec, a)?, treatment(spec, b)?)),
            SlideField::Colored(_) => unreachable!(),
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    match dye {
        None => Ok(SuppliedDesign {
            design: ExactDesign::from_pairs(space, &pairs)?,
            dye: None,
        }),
        Some(flags) => {
            if flags.len() != pairs.len() {
                return Err(ConfigError::Validation(format!(
                    "dye has {} flags for {} slides",
                    flags.len(),
                    pairs.len()
                )));
            }
            let slides = pairs
                .into_iter()
                .zip(flags)
                .map(|((a, b), f)| {
                    Ok(if dye_sign(f)? > 0 {
                        ColoredSlide { red: a, green: b }
                    } else {
                        ColoredSlide { red: b, green: a }
                    })
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            let (design, q) = colored_design(space, &slides)?;
            Ok(SuppliedDesign { design, dye: Some(q) })
        }
    }
}
