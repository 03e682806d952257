//! End-to-end verification harnesses. Each verifier assembles fields,
//! dynamics and contact operations into a [`VerificationReport`] with named
//! residuals (must stay below a tolerance), margins (must exceed a
//! threshold) and a verdict.
//!
//! Sample points are evaluated in parallel; report assembly is sequential and
//! in sample order, so reports are identical for any worker count.

mod averaging;
mod cartan;
mod characterization;
mod divergence;
mod legendrian;
mod options;
mod report;

pub use averaging::{flow_average_form, perturbed_unstable_form, verify_prop_claims};
pub use cartan::verify_cartan_equations;
pub use characterization::{verify_contchar, verify_contcomp_volcomp, verify_domination};
pub use divergence::{divergence_along_flow, verify_divergence_identity, volume_for};
pub use legendrian::{verify_legendrian_push, verify_reeb_inclusion};
pub use options::{VerifierOptions, VolumeChoice, ESTIMATED_GRID, EXACT_GRID, TRAJECTORY_GRID};
pub use report::{Margin, NamedValue, Provenance, Residual, Verdict, VerificationReport, ETA_CHOICE};

use crate::contact::{volume_preserving_pair, FormSign};
use crate::error::{Error, Result};
use crate::grid::{par_map, Extremum};
use crate::manifolds::{ChartModel, ModelFlow};
use crate::Point;
use std::time::Instant;

/// Per-point results with the points that produced them; points whose line
/// estimate did not converge are counted and skipped.
pub(crate) struct Evaluated<const N: usize> {
    pub points: Vec<Point>,
    pub rows: Vec<[f64; N]>,
    pub unconverged: usize,
}

impl<const N: usize> Evaluated<N> {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn max(&self, i: usize) -> Extremum {
        Extremum::max_over(&self.points, &self.column(i))
    }

    pub fn min(&self, i: usize) -> Extremum {
        Extremum::min_over(&self.points, &self.column(i))
    }
}

pub(crate) fn evaluate<const N: usize>(
    points: &[Point],
    f: impl Fn(&Point) -> Result<[f64; N]> + Sync + Send,
) -> Result<Evaluated<N>> {
    let raw = par_map(points, |p| match f(p) {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotConverged { .. }) => Ok(None),
        Err(e) => Err(e),
    })?;
    let mut out = Evaluated {
        points: Vec::new(),
        rows: Vec::new(),
        unconverged: 0,
    };
    for (p, r) in points.iter().zip(raw) {
        match r {
            Some(v) => {
                out.points.push(*p);
                out.rows.push(v);
            }
            None => out.unconverged += 1,
        }
    }
    Ok(out)
}

pub(crate) fn route_is_exact(flow: &ModelFlow) -> bool {
    flow.exact_splitting.is_some()
}

/// Registered verifier ids with the statement each one checks, sorted by id.
pub fn list_verifiers() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "cartan",
            "structure equations of a bi-contact pair with mutual Reeb inclusions: Reeb fields in the adapted frame, g = -f r_s/r_u, X.f + X.g + g r_s + f r_u = 0, the logarithmic rate equation, zero periodic-orbit integrals of r_u + r_s, and the (-1)-Cartan identities",
        ),
        (
            "claims",
            "flow averaging of the unstable form: alpha^T(e_u) is invariant, alpha^T(e_s) and X.alpha^T(e_s) decay",
        ),
        (
            "contchar",
            "a contact form supporting the flow gives an Anosov flow iff -a^da < (div_X Omega^a) Omega^a < a^da; cross-checked against r_s < 0 < r_u in the induced norm",
        ),
        (
            "contcomp",
            "contact and volume comparison: a^da = +-(r_u - r_s) Omega^a and div_X Omega^a = r_u + r_s for both forms of the bi-contact pair",
        ),
        (
            "domination",
            "dominated splitting: r_u - r_s > 0 at every sample in the chart norm",
        ),
        (
            "metric1",
            "div_X Omega = r_s + r_u for the frame whose volume is Omega",
        ),
        (
            "push",
            "pushing a periodic orbit along the Reeb flow of alpha_+ gives a Legendrian-transverse knot",
        ),
        (
            "reeb",
            "volume-preserving flows: alpha_s := Omega(., e_u, X) makes the Reeb field of alpha_+ = alpha_u - alpha_s tangent to ker alpha_-",
        ),
    ]
}

pub fn is_verifier(id: &str) -> bool {
    list_verifiers().iter().any(|(v, _)| *v == id)
}

fn require_pair(flow: &ModelFlow) -> Result<&crate::manifolds::BiContactForms> {
    flow.bicontact
        .as_ref()
        .ok_or_else(|| Error::Hypothesis("the model has no bi-contact pair".into()))
}

/// Runs verifier `id` with its standard inputs on the model. Some verifiers
/// produce several reports (one per form of the bi-contact pair). Each
/// report's runtime is recorded.
pub fn run_verifier(
    id: &str,
    model: &ChartModel,
    flow: &ModelFlow,
    opts: &VerifierOptions,
) -> Result<Vec<VerificationReport>> {
    opts.validate()?;
    let start = Instant::now();
    let mut reports = match id {
        "metric1" => {
            let (omega, name) = volume_for(flow, opts.volume);
            vec![verify_divergence_identity(model, flow, &omega, &name, opts)?]
        }
        "contcomp" => {
            let pair = require_pair(flow)?;
            vec![
                verify_contcomp_volcomp(model, flow, &pair.plus, FormSign::Plus, "alpha_plus", opts)?,
                verify_contcomp_volcomp(model, flow, &pair.minus, FormSign::Minus, "alpha_minus", opts)?,
            ]
        }
        "contchar" => vec![verify_contchar(
            model,
            flow,
            &require_pair(flow)?.plus,
            "alpha_plus",
            opts,
        )?],
        "claims" => {
            let split = flow.exact_splitting.as_ref().ok_or_else(|| {
                Error::Hypothesis("flow averaging needs a closed-form splitting and its growth rates".into())
            })?;
            let alpha0 = perturbed_unstable_form(split);
            let r_u = crate::dynamics::growth_rate_bracket(&flow.x, &split.e_u, &split.alpha_u)?;
            let mut family = vec![(0.0, alpha0.clone())];
            for &t in &opts.horizons {
                family.push((
                    t,
                    flow_average_form(
                        model,
                        flow,
                        &alpha0,
                        &r_u,
                        t,
                        crate::dynamics::Direction::Unstable,
                        opts,
                    )?,
                ));
            }
            vec![verify_prop_claims(
                model,
                flow,
                &family,
                split,
                "alpha_u + 0.1 (1 + 0.5 sin 2 pi z) alpha_s",
                opts,
            )?]
        }
        "reeb" => {
            let omega = flow
                .invariant_volume
                .as_ref()
                .ok_or_else(|| Error::Hypothesis("the model has no invariant volume".into()))?;
            vec![verify_reeb_inclusion(model, flow, omega, "invariant volume", opts)?]
        }
        "push" => {
            let omega = flow
                .invariant_volume
                .as_ref()
                .ok_or_else(|| Error::Hypothesis("the model has no invariant volume".into()))?;
            let pair = volume_preserving_pair(model, flow, omega, &opts.grid_or(EXACT_GRID).points())?;
            let label = match &opts.orbit {
                Some(l) => l.clone(),
                None => flow
                    .named_orbits
                    .first()
                    .map(|o| o.label.clone())
                    .ok_or_else(|| Error::Hypothesis("the model has no named periodic orbit".into()))?,
            };
            vec![verify_legendrian_push(
                model,
                flow,
                &label,
                &pair.plus,
                &pair.minus,
                &pair.reeb_plus,
                &opts.s_values,
                opts,
            )?]
        }
        "cartan" => {
            let pair = require_pair(flow)?;
            vec![verify_cartan_equations(model, flow, &pair.minus, &pair.plus, opts)?]
        }
        "domination" => vec![verify_domination(model, flow, opts)?],
        other => return Err(Error::InvalidInput(format!("unknown verifier `{other}`"))),
    };
    let elapsed = start.elapsed().as_secs_f64();
    for r in &mut reports {
        r.runtime_seconds = Some(elapsed);
    }
    for key in opts.tolerances.keys() {
        if !reports.iter().any(|r| r.get_residual(key).is_some()) {
            return Err(Error::InvalidInput(format!(
                "verifier `{id}` has no residual named `{key}`"
            )));
        }
    }
    Ok(reports)
}
