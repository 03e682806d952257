//! Sampling named fields of a model on a grid and writing them as CSV.

use crate::config::ExportField;
use anyhow::{Context, Result};
use bicontact_core::dynamics::{rates_at, RateNorm, SplittingSource};
use bicontact_core::fields::{contact_volume, divergence};
use bicontact_core::grid::par_map;
use bicontact_core::verifiers::volume_for;
use bicontact_core::{ChartModel, Error, KForm, ModelFlow, Point, SampleGrid, VerifierOptions};
use std::fmt::Write as _;

/// Samples of one field: grid points in row-major order and their values.
/// Points whose splitting estimate did not converge carry `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub field: ExportField,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub unconverged: usize,
}

impl FieldSamples {
    /// `x,y,z,value` with every number in its shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,value\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            writeln!(out, "{},{},{},{}", p.x, p.y, p.z, v).expect("writing to a string");
        }
        out
    }
}

fn contact_coefficient(model: &ChartModel, alpha: &KForm, p: &Point) -> bicontact_core::Result<f64> {
    Ok(contact_volume(alpha)?.scalar_coeff(p)? * model.orientation)
}

/// Evaluates `field` at every point of `grid` (in parallel, collected in
/// grid order).
pub fn sample_field(
    model: &ChartModel,
    flow: &ModelFlow,
    field: ExportField,
    grid: &SampleGrid,
    opts: &VerifierOptions,
) -> Result<FieldSamples> {
    opts.validate()?;
    let points = grid.points();
    let source = SplittingSource::for_flow(flow, opts.line_options());
    let rates = |p: &Point| rates_at(model, &flow.x, p, &source, &RateNorm::Chart, opts.fd_step, opts.step);
    let pair = || {
        flow.bicontact
            .as_ref()
            .ok_or_else(|| Error::Hypothesis("the model has no bi-contact pair".into()))
    };
    let div = divergence(&flow.x, &volume_for(flow, opts.volume).0)?;
    let raw = par_map(&points, |p| {
        let v = match field {
            ExportField::RS => rates(p).map(|r| r.r_s),
            ExportField::RU => rates(p).map(|r| r.r_u),
            ExportField::Domination => rates(p).map(|r| r.r_u - r.r_s),
            ExportField::Div => div.eval(p),
            ExportField::Contact => contact_coefficient(model, &pair()?.plus, p),
            ExportField::ContactMinus => contact_coefficient(model, &pair()?.minus, p),
        };
        match v {
            Ok(v) => Ok(Some(v)),
            Err(Error::NotConverged { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })
    .with_context(|| format!("evaluating `{}`", field.name()))?;
    let unconverged = raw.iter().filter(|v| v.is_none()).count();
    Ok(FieldSamples {
        field,
        points,
        values: raw.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
        unconverged,
    })
}
