use crate::dynamics::LineOptions;
use crate::grid::{Extremum, SampleGrid};
use crate::manifolds::ModelSpec;
use serde::Serialize;

/// Outcome of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A dynamics estimate failed to converge and nothing else failed.
    Inconclusive,
}

/// A quantity that must stay below `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub worst_point: Option<[f64; 3]>,
    pub passed: bool,
}

/// A quantity that must exceed `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub worst_point: Option<[f64; 3]>,
    pub passed: bool,
}

/// An informational number carried verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// How the reported numbers were produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    /// `exact_splitting`, `estimated_splitting` or `closed_form`.
    pub route: String,
    /// Frame normalization, or `none`.
    pub frame: String,
    /// Norm on the normal bundle the growth rates refer to.
    pub norm: String,
    /// The complement of `X` that fixes `α_X`.
    pub eta: String,
    pub samples: usize,
    pub grid: SampleGrid,
    pub step: f64,
    pub fd_step: f64,
    /// Power-iteration settings, when lines were estimated.
    pub line: Option<LineOptions>,
    pub seed: u64,
}

/// Description of the `η` choice recorded in every report.
pub const ETA_CHOICE: &str = "chart-metric orthogonal complement of X";

/// One verifier's findings. The verdict passes exactly when every residual
/// is below its tolerance and every margin exceeds its threshold; it is
/// inconclusive when that holds on the evaluated points but some points were
/// skipped because an estimate did not converge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: String,
    /// What exactly was checked (form, volume, orbit, ...).
    pub subject: String,
    pub model: ModelSpec,
    pub provenance: Provenance,
    pub residuals: Vec<Residual>,
    pub margins: Vec<Margin>,
    pub values: Vec<NamedValue>,
    pub unconverged_points: usize,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

fn point_of(e: &Extremum) -> Option<[f64; 3]> {
    Some(e.point)
}

impl VerificationReport {
    pub fn new(theorem_id: &str, subject: impl Into<String>, model: ModelSpec, provenance: Provenance) -> Self {
        Self {
            theorem_id: theorem_id.into(),
            subject: subject.into(),
            model,
            provenance,
            residuals: Vec::new(),
            margins: Vec::new(),
            values: Vec::new(),
            unconverged_points: 0,
            notes: Vec::new(),
            verdict: Verdict::Inconclusive,
            runtime_seconds: None,
        }
    }

    pub fn residual(&mut self, name: impl Into<String>, value: f64, tolerance: f64, worst_point: Option<[f64; 3]>) {
        self.residuals.push(Residual {
            name: name.into(),
            value,
            tolerance,
            worst_point,
            passed: value < tolerance,
        });
    }

    pub fn residual_at(&mut self, name: impl Into<String>, e: &Extremum, tolerance: f64) {
        self.residual(name, e.value, tolerance, point_of(e));
    }

    pub fn margin(&mut self, name: impl Into<String>, value: f64, threshold: f64, worst_point: Option<[f64; 3]>) {
        self.margins.push(Margin {
            name: name.into(),
            value,
            threshold,
            worst_point,
            passed: value > threshold,
        });
    }

    pub fn margin_at(&mut self, name: impl Into<String>, e: &Extremum, threshold: f64) {
        self.margin(name, e.value, threshold, point_of(e));
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(NamedValue {
            name: name.into(),
            value,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Fixes the verdict from the recorded residuals and margins.
    pub fn finish(mut self) -> Self {
        let failed = self.residuals.iter().any(|r| !r.passed) || self.margins.iter().any(|m| !m.passed);
        self.verdict = if failed {
            Verdict::Fail
        } else if self.unconverged_points > 0 || (self.residuals.is_empty() && self.margins.is_empty()) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get_residual(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }

    pub fn get_margin(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }

    pub fn get_value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }
}
