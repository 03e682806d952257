//! Run configuration: a single TOML document naming the model, the
//! verifiers with their option overrides, the field exports and the output.
//!
//! ```toml
//! [model]
//! name = "t3_pA"
//! eps = 0.3
//!
//! [defaults]               # options applied to every verifier
//! seed = 7
//!
//! [[verifiers]]
//! id = "metric1"
//! [verifiers.options]      # merged over [defaults]
//! volume = "exp_sin_x"
//!
//! [[exports]]
//! field = "r_u"
//! path = "r_u.csv"
//! grid = { per_axis = 8, random = 0, seed = 0 }
//!
//! [output]
//! report = "report.json"
//! verbosity = "normal"
//! ```

use anyhow::{bail, Context, Result};
use bicontact_core::manifolds::{build_model, ModelSpec};
use bicontact_core::verifiers::{is_verifier, VerifierOptions};
use bicontact_core::SampleGrid;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// How much progress is written to stderr.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Report path; stdout when absent.
    pub report: Option<PathBuf>,
    pub verbosity: Verbosity,
}

/// One verifier to run, with option overrides merged over the defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierEntry {
    pub id: String,
    #[serde(default)]
    pub options: toml::Table,
}

/// Named fields that can be exported to CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportField {
    /// Stable growth rate in the chart norm.
    RS,
    /// Unstable growth rate in the chart norm.
    RU,
    /// Divergence of the model's volume (its invariant volume, or the
    /// chart volume).
    Div,
    /// Coefficient of `α⁺∧dα⁺` for the positive form of the model's
    /// bi-contact pair.
    Contact,
    /// Coefficient of `α⁻∧dα⁻` for the negative form.
    ContactMinus,
    /// Domination margin `r_u − r_s` in the chart norm.
    Domination,
}

impl ExportField {
    pub const ALL: [ExportField; 6] = [
        ExportField::RS,
        ExportField::RU,
        ExportField::Div,
        ExportField::Contact,
        ExportField::ContactMinus,
        ExportField::Domination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExportField::RS => "r_s",
            ExportField::RU => "r_u",
            ExportField::Div => "div",
            ExportField::Contact => "contact",
            ExportField::ContactMinus => "contact_minus",
            ExportField::Domination => "domination",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name).with_context(|| {
            let names: Vec<_> = Self::ALL.iter().map(|f| f.name()).collect();
            format!("unknown export field `{name}` (expected one of {})", names.join(", "))
        })
    }
}

/// Default export sample: the 8³ lattice.
pub const EXPORT_GRID: SampleGrid = SampleGrid {
    per_axis: 8,
    random: 0,
    seed: 0,
};

fn default_export_grid() -> SampleGrid {
    EXPORT_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportEntry {
    pub field: ExportField,
    pub path: PathBuf,
    #[serde(default = "default_export_grid")]
    pub grid: SampleGrid,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: toml::Table,
    #[serde(default)]
    defaults: toml::Table,
    #[serde(default)]
    verifiers: Vec<VerifierEntry>,
    #[serde(default)]
    exports: Vec<ExportEntry>,
    #[serde(default)]
    output: OutputConfig,
}

/// A parsed and validated configuration with per-verifier options resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Options shared by all verifiers; field exports use them directly.
    pub defaults: VerifierOptions,
    pub verifiers: Vec<(String, VerifierOptions)>,
    pub exports: Vec<ExportEntry>,
    pub output: OutputConfig,
}

fn merge(base: &toml::Table, over: &toml::Table) -> toml::Table {
    let mut out = base.clone();
    for (k, v) in over {
        match (out.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                *b = merge(b, o);
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

/// Parses the model table, rejecting keys that the named model does not
/// take (also for models without parameters).
fn parse_model(table: &toml::Table) -> Result<ModelSpec> {
    let spec: ModelSpec = table.clone().try_into()?;
    let known = toml::Table::try_from(spec)?;
    if let Some(key) = table.keys().find(|k| !known.contains_key(*k)) {
        bail!("unknown parameter `{key}` for model `{}`", spec.name());
    }
    Ok(spec)
}

impl RunConfig {
    /// Parses and validates a configuration document. Errors name the
    /// offending line, field or value.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).context("malformed configuration")?;
        let model = parse_model(&raw.model).context("invalid [model]")?;
        build_model(&model).context("invalid [model]")?;
        let defaults: VerifierOptions = raw.defaults.clone().try_into().context("invalid [defaults]")?;
        defaults.validate().context("invalid [defaults]")?;
        let mut verifiers = Vec::new();
        for (i, entry) in raw.verifiers.iter().enumerate() {
            if !is_verifier(&entry.id) {
                bail!(
                    "verifiers[{i}]: unknown verifier id `{}` (see `list-verifiers`)",
                    entry.id
                );
            }
            let opts: VerifierOptions = merge(&raw.defaults, &entry.options)
                .try_into()
                .with_context(|| format!("verifiers[{i}] ({}): invalid options", entry.id))?;
            opts.validate()
                .with_context(|| format!("verifiers[{i}] ({}): invalid options", entry.id))?;
            verifiers.push((entry.id.clone(), opts));
        }
        for (i, e) in raw.exports.iter().enumerate() {
            if e.grid.is_empty() {
                bail!("exports[{i}]: the sample grid is empty");
            }
        }
        Ok(Self {
            model,
            defaults,
            verifiers,
            exports: raw.exports,
            output: raw.output,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Replaces every verifier's seed (and the export grid seeds).
    pub fn override_seed(&mut self, seed: u64) {
        self.defaults.seed = seed;
        for (_, o) in &mut self.verifiers {
            o.seed = seed;
        }
        for e in &mut self.exports {
            e.grid.seed = seed;
        }
    }
}
