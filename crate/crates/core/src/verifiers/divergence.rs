//! The divergence of a volume form equals the sum of the growth rates of the
//! frame whose volume it is.

use super::options::{VerifierOptions, VolumeChoice, ESTIMATED_GRID, EXACT_GRID};
use super::report::VerificationReport;
use super::{evaluate, route_is_exact};
use crate::contact::{FrameNormalization, SplittingFrame};
use crate::dynamics::linearize_flow_lifted;
use crate::error::{Error, Result};
use crate::fields::{divergence, KForm, ScalarField};
use crate::manifolds::{ChartModel, ModelFlow};
use crate::Point;
use std::f64::consts::PI;

/// `d/dt|₀ ln g(t)` by the fourth-order central stencil with step `h`.
pub(crate) fn log_derivative(h: f64, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let lg = |t: f64| -> Result<f64> {
        let v = g(t)?;
        if !(v > 0.0) {
            return Err(Error::Evaluation(format!(
                "log-derivative of a non-positive quantity ({v})"
            )));
        }
        Ok(v.ln())
    };
    Ok((8.0 * (lg(h)? - lg(-h)?) - (lg(2.0 * h)? - lg(-2.0 * h)?)) / (12.0 * h))
}

/// `div_X Ω` at `p` from the flow alone: `d/dt ln(Ω(φ^t p)·det Dφ^t)` at
/// `t = 0`, with the coefficient taken against the chart volume. The
/// trajectory is followed on the universal cover, so the coefficient of
/// `omega` is read from its chart formula without crossing a gluing.
pub fn divergence_along_flow(flow: &ModelFlow, omega: &KForm, p: &Point, h: f64, step: f64) -> Result<f64> {
    let sign = omega.scalar_coeff(p)?.signum();
    log_derivative(h, |t| {
        let j = linearize_flow_lifted(&flow.x, p, t, step.min(h))?;
        Ok(sign * omega.scalar_coeff(&j.end)? * j.m.determinant())
    })
}

/// The volume selected by `choice`, with a description.
pub fn volume_for(flow: &ModelFlow, choice: VolumeChoice) -> (KForm, String) {
    let (base, base_name) = match &flow.invariant_volume {
        Some(v) => (v.clone(), "invariant volume"),
        None => (KForm::reference_volume(), "chart volume dx^dy^dz"),
    };
    match choice {
        VolumeChoice::Invariant => (base, base_name.to_string()),
        VolumeChoice::ExpSinX => (
            base.scaled(&ScalarField::new(|x| (x[0] * (2.0 * PI)).sin().exp())),
            format!("exp(sin 2 pi x) times the {base_name}"),
        ),
        VolumeChoice::ExpSinZ => (
            base.scaled(&ScalarField::new(|x| ((x[2] * (2.0 * PI)).sin() * 0.3).exp())),
            format!("exp(0.3 sin 2 pi z) times the {base_name}"),
        ),
    }
}

/// Builds the frame adapted to `omega` (the splitting frame rescaled by the
/// positive function `f` with `Ω = (f α_s)∧(f α_u)∧α_X`) and compares
/// `div_X Ω` with `r_s + r_u` of that frame. The divergence is computed
/// twice: with exact derivatives and from the flow's Jacobian determinant.
pub fn verify_divergence_identity(
    model: &ChartModel,
    flow: &ModelFlow,
    omega: &KForm,
    subject: &str,
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    opts.validate()?;
    if omega.degree() != 3 {
        return Err(Error::BadDegree(omega.degree()));
    }
    let exact = route_is_exact(flow);
    let grid = opts.grid_or(if exact { EXACT_GRID } else { ESTIMATED_GRID });
    let points = grid.points();
    let frame = SplittingFrame::new(
        model,
        flow,
        FrameNormalization::Volume { omega: omega.clone() },
        opts.line_options(),
        opts.fd_step,
        opts.step,
    )?;
    let div = divergence(&flow.x, omega)?;
    let ev = evaluate(&points, |p| {
        let s = frame.sample(p)?;
        let d = div.eval(p)?;
        let d_flow = divergence_along_flow(flow, omega, p, opts.fd_step, opts.step)?;
        let w = omega.scalar_coeff(p)?;
        Ok([
            (d - (s.r_s + s.r_u)).abs(),
            (d - d_flow).abs(),
            ((s.volume - w) / w).abs(),
            d.abs(),
        ])
    })?;

    let mut rep = VerificationReport::new(
        "metric1",
        subject,
        flow.spec,
        opts.provenance(
            frame.route_name(),
            frame.normalization_name(),
            "frame_adapted_to_volume",
            grid,
            !exact,
        ),
    );
    rep.unconverged_points = ev.unconverged;
    let id_tol = if exact { 1e-8 } else { 1e-4 };
    rep.residual_at(
        "divergence_minus_rate_sum",
        &ev.max(0),
        opts.tol("divergence_minus_rate_sum", id_tol),
    );
    rep.residual_at("divergence_two_ways", &ev.max(1), opts.tol("divergence_two_ways", 1e-6));
    rep.residual_at(
        "frame_volume_mismatch",
        &ev.max(2),
        opts.tol("frame_volume_mismatch", 1e-10),
    );
    rep.value("max_abs_divergence", ev.max(3).value);
    rep.value("evaluated_points", ev.points.len() as f64);
    Ok(rep.finish())
}
