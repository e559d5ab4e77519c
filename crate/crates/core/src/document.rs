//! The JSON design document written by `construct` and `evaluate`.

use serde::{Deserialize, Serialize};

use crate::exact::StepDirection;
use crate::factorial::{Parametrization, Treatment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEcho {
    pub levels: Vec<usize>,
    pub params: Vec<Parametrization>,
    pub weights: Vec<f64>,
    pub slides: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slide {
    pub red: Treatment,
    pub green: Treatment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEfficiency {
    pub name: String,
    pub eff_sharp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metrics {
    /// tr((XᵀX)⁻¹W)
    pub psi: f64,
    pub eff: f64,
    pub eff_dye: Option<f64>,
    /// Sum of BLUE variances per effect order.
    pub variance_by_order: Vec<f64>,
    pub max_color_imbalance: u64,
    #[serde(default)]
    pub eff_sharp: Vec<ProfileEfficiency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverRecord {
    pub epsilon: f64,
    pub max_iter: usize,
    pub iterations: usize,
    pub gap: f64,
    /// tr(M(π̃)⁻¹W) at the optimal measure.
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionRecord {
    pub start_g: usize,
    pub direction: StepDirection,
    pub steps: usize,
    /// Catalog sizes tried, in increasing order.
    pub catalog: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DyeSource {
    NearlySymmetric,
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocProvenance {
    pub command: String,
    pub tool_version: String,
    pub solver: SolverRecord,
    pub construction: Option<ConstructionRecord>,
    pub dye: DyeSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDocument {
    pub spec: SpecEcho,
    /// Slides in canonical pair order.
    pub slides: Vec<Slide>,
    /// Replication of each pair, in pair-label order.
    pub freqs: Vec<u32>,
    pub metrics: Metrics,
    pub provenance: DocProvenance,
    #[serde(default)]
    pub timestamp: String,
}

impl DesignDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn with_timestamp(mut self, timestamp: impl Into<String>) -> Self {
        self.timestamp = timestamp.into();
        self
    }

    /// Equality ignoring the timestamp.
    pub fn same_content(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.timestamp = other.timestamp.clone();
        a == *other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DesignDocument {
        DesignDocument {
            spec: SpecEcho {
                levels: vec![2, 2],
                params: vec![Parametrization::Baseline, Parametrization::AllToNext],
                weights: vec![1.0, 0.1],
                slides: 2,
                epsilon: 1e-11,
            },
            slides: vec![
                Slide {
                    red: Treatment(vec![0, 1]),
                    green: Treatment(vec![0, 0]),
                },
                Slide {
                    red: Treatment(vec![0, 0]),
                    green: Treatment(vec![1, 0]),
                },
            ],
            freqs: vec![1, 1, 0, 0, 0, 0],
            metrics: Metrics {
                psi: 1.0 / 3.0,
                eff: 0.958_713_123_456_789,
                eff_dye: None,
                variance_by_order: vec![std::f64::consts::PI, 1e-300],
                max_color_imbalance: 1,
                eff_sharp: vec![ProfileEfficiency {
                    name: "flat".into(),
                    eff_sharp: 0.1 + 0.2,
                }],
            },
            provenance: DocProvenance {
                command: "construct".into(),
                tool_version: "0".into(),
                solver: SolverRecord {
                    epsilon: 1e-11,
                    max_iter: 1_000_000,
                    iterations: 12,
                    gap: 3.3e-12,
                    criterion: 6.0 + 2.0 * 3f64.sqrt(),
                },
                construction: Some(ConstructionRecord {
                    start_g: 4,
                    direction: StepDirection::Down,
                    steps: 2,
                    catalog: vec![4],
                }),
                dye: DyeSource::NearlySymmetric,
            },
            timestamp: "2026-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let doc = sample();
        let back = DesignDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), doc.to_json());
    }

    #[test]
    fn timestamp_is_ignored_by_same_content() {
        let a = sample();
        let b = sample().with_timestamp("later");
        assert_ne!(a, b);
        assert!(a.same_content(&b));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(DesignDocument::from_json(&v.to_string()).is_err());
    }
}
