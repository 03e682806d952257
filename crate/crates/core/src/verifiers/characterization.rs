//! Contact forms compared with the growth rates of the norm they induce,
//! the contact characterization of Anosovity, and domination.

use super::options::{VerifierOptions, ESTIMATED_GRID, EXACT_GRID};
use super::report::VerificationReport;
use super::{evaluate, route_is_exact};
use crate::contact::{FormSign, FrameNormalization, SplittingFrame};
use crate::dynamics::{domination_report, RateNorm, SplittingSource};
use crate::error::{Error, Result};
use crate::fields::{contact_volume, KForm};
use crate::manifolds::{ChartModel, ModelFlow};

fn contact_frame(
    model: &ChartModel,
    flow: &ModelFlow,
    alpha: &KForm,
    sign: FormSign,
    opts: &VerifierOptions,
) -> Result<SplittingFrame> {
    if alpha.degree() != 1 {
        return Err(Error::BadDegree(alpha.degree()));
    }
    SplittingFrame::new(
        model,
        flow,
        FrameNormalization::Contact {
            alpha: alpha.clone(),
            sign,
        },
        opts.line_options(),
        opts.fd_step,
        opts.step,
    )
}

/// Compares `α∧dα` with `±(r_u − r_s) Ω^α` and `div_X Ω^α` with
/// `r_u + r_s`, where `Ω^α = α_s∧α_u∧α_X` is the volume of the frame
/// normalized by `α` (`α = α_u ∓ α_s`) and the rates are those of the norm
/// `α` induces. `sign` is `Plus` for the positive form of a bi-contact pair.
pub fn verify_contcomp_volcomp(
    model: &ChartModel,
    flow: &ModelFlow,
    alpha: &KForm,
    sign: FormSign,
    subject: &str,
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    opts.validate()?;
    let exact = route_is_exact(flow);
    let grid = opts.grid_or(if exact { EXACT_GRID } else { ESTIMATED_GRID });
    let points = grid.points();
    let frame = contact_frame(model, flow, alpha, sign, opts)?;
    let cv = contact_volume(alpha)?;
    let o = sign.orientation();
    let ev = evaluate(&points, |p| {
        let s = frame.sample(p)?;
        let c = cv.scalar_coeff(p)?;
        let gap = s.r_u - s.r_s;
        Ok([
            (c - o * gap * s.volume).abs(),
            (s.div_volume - (s.r_u + s.r_s)).abs(),
            gap,
            alpha.coeffs(p)?.dot(&flow.x.eval(p)?).abs(),
            s.r_u,
            s.r_s,
        ])
    })?;
    let mut rep = VerificationReport::new(
        "contcomp",
        subject,
        flow.spec,
        opts.provenance(
            frame.route_name(),
            frame.normalization_name(),
            "induced_by_contact_form",
            grid,
            !exact,
        ),
    );
    rep.unconverged_points = ev.unconverged;
    let tol = if exact { 1e-9 } else { 1e-4 };
    rep.residual_at(
        "contact_volume_comparison",
        &ev.max(0),
        opts.tol("contact_volume_comparison", tol),
    );
    rep.residual_at(
        "volume_divergence_comparison",
        &ev.max(1),
        opts.tol("volume_divergence_comparison", tol),
    );
    rep.residual_at("form_on_flow", &ev.max(3), opts.tol("form_on_flow", 1e-9));
    rep.value("min_rate_gap", ev.min(2).value);
    rep.value("max_rate_gap", ev.max(2).value);
    rep.value("min_r_u", ev.min(4).value);
    rep.value("max_r_u", ev.max(4).value);
    rep.value("min_r_s", ev.min(5).value);
    rep.value("max_r_s", ev.max(5).value);
    Ok(rep.finish())
}

/// The contact characterization: with `κ = α∧dα / Ω^α` and
/// `δ = div_X Ω^α`, both `κ + δ > 0` and `κ − δ > 0` must hold (margins are
/// scale-free ratios against `Ω^α`). Since `κ = r_u − r_s` and `δ = r_u +
/// r_s`, this is `r_s < 0 < r_u` in the induced norm; both formulations are
/// computed and must agree.
pub fn verify_contchar(
    model: &ChartModel,
    flow: &ModelFlow,
    alpha_plus: &KForm,
    subject: &str,
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    opts.validate()?;
    let exact = route_is_exact(flow);
    let grid = opts.grid_or(if exact { EXACT_GRID } else { ESTIMATED_GRID });
    let points = grid.points();
    let frame = contact_frame(model, flow, alpha_plus, FormSign::Plus, opts)?;
    let cv = contact_volume(alpha_plus)?;
    let ev = evaluate(&points, |p| {
        let s = frame.sample(p)?;
        let kappa = cv.scalar_coeff(p)? / s.volume;
        let (lower, upper) = (kappa + s.div_volume, kappa - s.div_volume);
        Ok([
            lower,
            upper,
            s.r_u,
            s.r_s,
            (lower - 2.0 * s.r_u).abs().max((upper + 2.0 * s.r_s).abs()),
            alpha_plus.coeffs(p)?.dot(&flow.x.eval(p)?).abs(),
            kappa,
        ])
    })?;
    let mut rep = VerificationReport::new(
        "contchar",
        subject,
        flow.spec,
        opts.provenance(
            frame.route_name(),
            frame.normalization_name(),
            "induced_by_contact_form",
            grid,
            !exact,
        ),
    );
    rep.unconverged_points = ev.unconverged;
    let (lower, upper) = (ev.min(0), ev.min(1));
    let (min_ru, max_rs) = (ev.min(2), ev.max(3));
    let inequalities_hold = lower.value > opts.margin_tol && upper.value > opts.margin_tol;
    let rates_hold = 2.0 * min_ru.value > opts.margin_tol && -2.0 * max_rs.value > opts.margin_tol;
    rep.margin_at("lower_inequality", &lower, opts.margin_tol);
    rep.margin_at("upper_inequality", &upper, opts.margin_tol);
    let tol = if exact { 1e-8 } else { 1e-4 };
    rep.residual_at(
        "formulation_mismatch",
        &ev.max(4),
        opts.tol("formulation_mismatch", tol),
    );
    rep.residual(
        "formulation_verdict_disagreement",
        if inequalities_hold == rates_hold { 0.0 } else { 1.0 },
        opts.tol("formulation_verdict_disagreement", 0.5),
        None,
    );
    rep.residual_at("form_on_flow", &ev.max(5), opts.tol("form_on_flow", 1e-9));
    rep.value("min_unstable_rate", min_ru.value);
    rep.value("max_stable_rate", max_rs.value);
    rep.value("min_contact_ratio", ev.min(6).value);
    rep.value("inequalities_hold", f64::from(u8::from(inequalities_hold)));
    rep.value("rates_hold", f64::from(u8::from(rates_hold)));
    Ok(rep.finish())
}

/// Dominated splitting in the chart norm: `r_u − r_s > 0` at every sample,
/// rates by central differences along the flow.
pub fn verify_domination(model: &ChartModel, flow: &ModelFlow, opts: &VerifierOptions) -> Result<VerificationReport> {
    opts.validate()?;
    let exact = route_is_exact(flow);
    let grid = opts.grid_or(if exact { EXACT_GRID } else { ESTIMATED_GRID });
    let points = grid.points();
    let source = SplittingSource::for_flow(flow, opts.line_options());
    let d = domination_report(
        model,
        &flow.x,
        &points,
        &source,
        &RateNorm::Chart,
        opts.fd_step,
        opts.step,
    )?;
    let mut rep = VerificationReport::new(
        "domination",
        "chart-metric growth rates",
        flow.spec,
        opts.provenance(
            if exact {
                "exact_splitting"
            } else {
                "estimated_splitting"
            },
            "none",
            RateNorm::Chart.name(),
            grid,
            !exact,
        ),
    );
    rep.unconverged_points = d.unconverged;
    let gap = if d.evaluated > 0 { d.min_gap } else { f64::NAN };
    rep.margin("min_rate_gap", gap, opts.margin_tol, Some(d.min_gap_point));
    rep.value("min_r_u", d.min_r_u);
    rep.value("max_r_s", d.max_r_s);
    rep.value(
        "anosov_witnessed_by_chart_norm",
        f64::from(u8::from(d.anosov_witnessed_by_this_norm)),
    );
    rep.value("evaluated_points", d.evaluated as f64);
    if d.unconverged > 0 {
        rep.value("max_unconverged_angle", d.max_unconverged_angle);
    }
    if !d.anosov_witnessed_by_this_norm {
        rep.note("r_s < 0 < r_u is not witnessed by the chart norm; another norm may still witness it");
    }
    Ok(rep.finish())
}
