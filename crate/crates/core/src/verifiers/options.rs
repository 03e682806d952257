use super::report::{Provenance, ETA_CHOICE};
use crate::dynamics::LineOptions;
use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which volume form the divergence identity is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VolumeChoice {
    /// The model's invariant volume (the chart volume `dx∧dy∧dz` when the
    /// model has none).
    #[default]
    Invariant,
    /// `e^{sin 2πx}` times the invariant volume.
    ExpSinX,
    /// `e^{0.3 sin 2πz}` times the invariant volume (`z` is the flow time
    /// coordinate of a mapping torus, so the divergence is nonzero there).
    ExpSinZ,
}

/// Settings shared by all verifiers. Every field has a default; run
/// configurations override them per verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierOptions {
    /// Sample set; each verifier has its own default size.
    pub grid: Option<SampleGrid>,
    /// Drives the random sample points and the power-iteration seed vector.
    pub seed: u64,
    /// Integrator step.
    pub step: f64,
    /// Step of central differences along the flow.
    pub fd_step: f64,
    /// Power iteration for splittings without a closed form.
    pub line: LineOptions,
    /// Threshold every margin has to exceed.
    pub margin_tol: f64,
    /// Per-residual tolerance overrides, by residual name.
    pub tolerances: BTreeMap<String, f64>,
    /// Averaging horizons (flow averaging of forms).
    pub horizons: Vec<f64>,
    /// Reeb push times (Legendrian push).
    pub s_values: Vec<f64>,
    /// Named periodic orbit (Legendrian push); the model's first by default.
    pub orbit: Option<String>,
    /// Volume for the divergence identity.
    pub volume: VolumeChoice,
}

impl Default for VerifierOptions {
    fn default() -> Self {
        Self {
            grid: None,
            seed: 0,
            step: 1e-3,
            fd_step: 1e-3,
            line: LineOptions::default(),
            margin_tol: 1e-6,
            tolerances: BTreeMap::new(),
            horizons: vec![1.0, 2.0, 3.0],
            s_values: vec![0.01, 0.02, 0.05],
            orbit: None,
            volume: VolumeChoice::Invariant,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl VerifierOptions {
    /// Range checks on every numeric setting.
    pub fn validate(&self) -> Result<()> {
        positive("step", self.step)?;
        positive("fd_step", self.fd_step)?;
        positive("line.horizon", self.line.horizon)?;
        positive("line.step", self.line.step)?;
        positive("line.angle_tol", self.line.angle_tol)?;
        if !(self.margin_tol >= 0.0 && self.margin_tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "margin_tol must be non-negative, got {}",
                self.margin_tol
            )));
        }
        for (k, v) in &self.tolerances {
            positive(&format!("tolerance `{k}`"), *v)?;
        }
        if self.horizons.is_empty() {
            return Err(Error::InvalidInput("horizons must not be empty".into()));
        }
        let mut prev = 0.0;
        for &t in &self.horizons {
            positive("horizon", t)?;
            if t <= prev {
                return Err(Error::InvalidInput("horizons must be strictly increasing".into()));
            }
            prev = t;
        }
        if self.s_values.is_empty() {
            return Err(Error::InvalidInput("s_values must not be empty".into()));
        }
        for &s in &self.s_values {
            if s == 0.0 {
                return Err(Error::InvalidInput(
                    "push time s = 0 leaves the orbit tangent to both contact planes (it is Legendrian for both); use s > 0".into(),
                ));
            }
            positive("push time s", s)?;
        }
        if let Some(g) = &self.grid {
            if g.is_empty() {
                return Err(Error::InvalidInput("the sample grid is empty".into()));
            }
        }
        Ok(())
    }

    /// Tolerance for residual `name`, overridable by configuration.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// The sample grid, falling back to `default`; the grid seed follows
    /// `seed`.
    pub fn grid_or(&self, default: SampleGrid) -> SampleGrid {
        let mut g = self.grid.unwrap_or(default);
        g.seed = self.seed;
        g
    }

    /// Line options with the seed applied.
    pub fn line_options(&self) -> LineOptions {
        LineOptions {
            seed: self.seed,
            ..self.line
        }
    }

    pub(crate) fn provenance(
        &self,
        route: &str,
        frame: &str,
        norm: &str,
        grid: SampleGrid,
        estimated: bool,
    ) -> Provenance {
        Provenance {
            route: route.into(),
            frame: frame.into(),
            norm: norm.into(),
            eta: ETA_CHOICE.into(),
            samples: grid.len(),
            grid,
            step: self.step,
            fd_step: self.fd_step,
            line: estimated.then(|| self.line_options()),
            seed: self.seed,
        }
    }
}

/// Default sample grid when every point is cheap (closed-form fields).
pub const EXACT_GRID: SampleGrid = SampleGrid {
    per_axis: 6,
    random: 64,
    seed: 0,
};

/// Default sample grid when every point needs estimated lines.
pub const ESTIMATED_GRID: SampleGrid = SampleGrid {
    per_axis: 2,
    random: 8,
    seed: 0,
};

/// Default sample grid for verifiers integrating over long times.
pub const TRAJECTORY_GRID: SampleGrid = SampleGrid {
    per_axis: 2,
    random: 16,
    seed: 0,
};
