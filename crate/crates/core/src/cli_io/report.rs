use serde::{Deserialize, Serialize};

use crate::boris::NondegeneracyWarning;
use crate::harness::{Components, ConvergenceReport, ErrorSeries, Theorem1Report};

/// One run inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Absent when the run came from a CSV file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub steps: u64,
    pub max: Components<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_min: Option<f64>,
    #[serde(default)]
    pub warnings: usize,
}

/// JSON summary written by `compare`, `converge` and `theorem1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub command: String,
    pub runs: Vec<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Components<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<Components<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected_ratios: Vec<f64>,
    /// Accepted band `[lo, hi]` for slopes, or the ratio band factor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub band: Vec<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<NondegeneracyWarning>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ErrorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn from_compare(series: &ErrorSeries, epsilon: Option<f64>, h: Option<f64>, steps: u64) -> Self {
        Self {
            command: "compare".into(),
            runs: vec![RunSummary {
                epsilon,
                h,
                steps,
                max: series.max,
                sigma_min: None,
                warnings: 0,
            }],
            slopes: None,
            ratios: Vec::new(),
            expected_ratios: Vec::new(),
            band: Vec::new(),
            pass: series.max.to_array().iter().all(|e| e.is_finite()),
            warnings: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

impl From<&ConvergenceReport> for ErrorReport {
    fn from(r: &ConvergenceReport) -> Self {
        Self {
            command: format!("converge/{}", r.mode),
            runs: r
                .points
                .iter()
                .map(|p| RunSummary {
                    epsilon: Some(p.epsilon),
                    h: Some(p.h),
                    steps: p.steps,
                    max: p.max,
                    sigma_min: p.sigma_min,
                    warnings: p.warnings,
                })
                .collect(),
            slopes: r.slopes,
            ratios: Vec::new(),
            expected_ratios: Vec::new(),
            band: vec![r.gate.lo, r.gate.hi],
            pass: r.pass,
            warnings: Vec::new(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

impl From<&Theorem1Report> for ErrorReport {
    fn from(r: &Theorem1Report) -> Self {
        Self {
            command: "theorem1".into(),
            runs: r
                .entries
                .iter()
                .map(|e| RunSummary {
                    epsilon: Some(e.epsilon),
                    h: Some(e.h_ref),
                    steps: e.steps,
                    max: e.max,
                    sigma_min: None,
                    warnings: 0,
                })
                .collect(),
            slopes: None,
            ratios: r.ratios.clone(),
            expected_ratios: r.expected.clone(),
            band: vec![r.band],
            pass: r.pass,
            warnings: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_bit_exactly() {
        let r = ErrorReport {
            command: "converge/scaled_pairs".into(),
            runs: vec![RunSummary {
                epsilon: Some(2.5e-4),
                h: Some(0.02),
                steps: 100_001,
                max: Components {
                    r: 6.016694513794052e-4,
                    z: 1.0 / 3.0,
                    vpar: 2.2284611484940653e-4,
                },
                sigma_min: Some(0.9999999999999998),
                warnings: 1,
            }],
            slopes: Some(Components {
                r: 2.0006423746965534,
                z: 2.0027437042437213,
                vpar: 2.0033058578391634,
            }),
            ratios: vec![],
            expected_ratios: vec![],
            band: vec![1.7, 2.3],
            pass: true,
            warnings: vec![NondegeneracyWarning {
                step: 5,
                t: 0.1,
                sigma: 0.05,
            }],
            diagnostics: vec!["note".into()],
        };
        let back = ErrorReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }
}
