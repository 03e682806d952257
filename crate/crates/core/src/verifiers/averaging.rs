//! Averaging a 1-form along the flow: `α^T := e^{−∫_0^T r(φ^t)dt} φ^{T*}α⁰`,
//! which fixes `α^T(e_u)` and drives `α^T(e_s)` to zero.

use super::options::{VerifierOptions, TRAJECTORY_GRID};
use super::report::VerificationReport;
use crate::dynamics::{flow_point, growth_rate_bracket, integrate_flow_even, linearize_flow, Direction};
use crate::error::{Error, Result};
use crate::fields::{DerivSpec, KForm, ScalarField};
use crate::grid::{par_map, Extremum};
use crate::manifolds::{ChartModel, ExactSplitting, ModelFlow};
use std::f64::consts::PI;

/// `α^T(p) = e^{−∫_0^{±T} r(φ^t p) dt} (Dφ^{±T}_p)^T α⁰(φ^{±T} p)`: forward
/// time for `Unstable` (with `r = r_u`), backward for `Stable` (with
/// `r = r_s`, giving the factor `e^{+∫_{−T}^0 r_s}`). The integral is
/// composite Simpson on the trajectory. The result is a value-only form
/// whose derivatives use a fourth-order stencil with step `fd_step`.
pub fn flow_average_form(
    model: &ChartModel,
    flow: &ModelFlow,
    alpha0: &KForm,
    r: &ScalarField,
    horizon: f64,
    direction: Direction,
    opts: &VerifierOptions,
) -> Result<KForm> {
    if alpha0.degree() != 1 {
        return Err(Error::BadDegree(alpha0.degree()));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "averaging horizon must be non-negative, got {horizon}"
        )));
    }
    if horizon == 0.0 {
        return Ok(alpha0.clone());
    }
    let t = match direction {
        Direction::Unstable => horizon,
        Direction::Stable => -horizon,
    };
    let (model, x, a0, r, step) = (model.clone(), flow.x.clone(), alpha0.clone(), r.clone(), opts.step);
    KForm::sampled(
        1,
        move |p| {
            let traj = integrate_flow_even(&model, &x, p, t, step)?;
            let vals = traj
                .samples
                .iter()
                .map(|(_, q)| r.eval(q))
                .collect::<Result<Vec<_>>>()?;
            let integral = traj.simpson(&vals)?;
            let j = linearize_flow(&model, &x, p, t, step)?;
            Ok(j.m.transpose() * a0.coeffs(&j.end)? * (-integral).exp())
        },
        DerivSpec::central4(opts.fd_step),
    )
}

/// `α_u + ε α_s` with `ε = 0.1 (1 + 0.5 sin 2πz)`: a perturbation of the
/// unstable covector whose stable component varies along the flow of the
/// suspension, so that its flow derivative is nonzero.
pub fn perturbed_unstable_form(split: &ExactSplitting) -> KForm {
    let eps = ScalarField::new(|x| ((x[2] * (2.0 * PI)).sin() * 0.5 + 1.0) * 0.1);
    split
        .alpha_u
        .add(&split.alpha_s.scaled(&eps))
        .expect("both are 1-forms")
}

/// Checks a family `(T_k, α^{T_k})` (first entry `T = 0`, horizons
/// increasing) produced by [`flow_average_form`] in forward time:
///
/// 1. `α^T(e_u) = α⁰(e_u)` (residual);
/// 2. `sup|α^T(e_s)|` decays, with factor per unit time within 10% of
///    `e^{−⟨r_u − r_s⟩}` (sample mean of the rate gap);
/// 3. `sup|X·α^T(e_s)|` decreases strictly with `T` (flow derivative by
///    central differences).
pub fn verify_prop_claims(
    model: &ChartModel,
    flow: &ModelFlow,
    family: &[(f64, KForm)],
    split: &ExactSplitting,
    subject: &str,
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    opts.validate()?;
    if family.len() < 2 || family[0].0 != 0.0 {
        return Err(Error::InvalidInput(
            "the averaged family must start at T = 0 and have at least two members".into(),
        ));
    }
    if family.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidInput(
            "averaging horizons must be strictly increasing".into(),
        ));
    }
    let grid = opts.grid_or(TRAJECTORY_GRID);
    let points = grid.points();
    let r_u = growth_rate_bracket(&flow.x, &split.e_u, &split.alpha_u)?;
    let r_s = growth_rate_bracket(&flow.x, &split.e_s, &split.alpha_s)?;
    let h = opts.fd_step;
    let x = &flow.x;

    // Per point: rate gap, then for each member (α(e_u), α(e_s), X·α(e_s)).
    let rows = par_map(&points, |p| {
        let fwd = flow_point(model, x, p, h, opts.step.min(h))?;
        let bwd = flow_point(model, x, p, -h, opts.step.min(h))?;
        let mut row = vec![r_u.eval(p)? - r_s.eval(p)?];
        for (_, a) in family {
            let on_s = |q: &crate::Point| -> Result<f64> { Ok(a.coeffs(q)?.dot(&split.e_s.eval(q)?)) };
            row.push(a.coeffs(p)?.dot(&split.e_u.eval(p)?));
            row.push(on_s(p)?);
            row.push((on_s(&fwd)? - on_s(&bwd)?) / (2.0 * h));
        }
        Ok(row)
    })?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    let mut invariance = Extremum::max_start();
    let base_u = col(1);
    let mut sup_s = Vec::new();
    let mut sup_d = Vec::new();
    for k in 0..family.len() {
        let (u, s, d) = (col(1 + 3 * k), col(2 + 3 * k), col(3 + 3 * k));
        for (i, p) in points.iter().enumerate() {
            invariance.keep_max((u[i] - base_u[i]).abs(), p);
        }
        sup_s.push(s.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        sup_d.push(d.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let gap = col(0);
    let mean_gap = gap.iter().sum::<f64>() / gap.len() as f64;
    let expected = (-mean_gap).exp();

    let mut rep = VerificationReport::new(
        "claims",
        subject,
        flow.spec,
        opts.provenance(
            "exact_splitting",
            "closed_form_dual",
            "rates_of_the_closed_form_frame",
            grid,
            false,
        ),
    );
    rep.residual_at(
        "unstable_invariance",
        &invariance,
        opts.tol("unstable_invariance", 1e-8),
    );
    let mut worst_dev = 0.0_f64;
    let mut max_factor = f64::NEG_INFINITY;
    let mut min_drop = f64::INFINITY;
    for k in 1..family.len() {
        let dt = family[k].0 - family[k - 1].0;
        let factor = (sup_s[k] / sup_s[k - 1]).powf(1.0 / dt);
        rep.value(format!("decay_factor_T{}", family[k].0), factor);
        let dev = (factor / expected - 1.0).abs();
        if !(dev <= worst_dev) && !worst_dev.is_nan() {
            worst_dev = dev;
        }
        max_factor = max_factor.max(factor);
        min_drop = min_drop.min(1.0 - sup_d[k] / sup_d[k - 1]);
    }
    rep.residual(
        "decay_factor_deviation",
        worst_dev,
        opts.tol("decay_factor_deviation", 0.1),
        None,
    );
    rep.margin("stable_decay", 1.0 - max_factor, opts.margin_tol, None);
    rep.margin("derivative_decay_monotonicity", min_drop, opts.margin_tol, None);
    rep.value("expected_decay_factor", expected);
    for (k, (t, _)) in family.iter().enumerate() {
        rep.value(format!("sup_stable_component_T{t}"), sup_s[k]);
        rep.value(format!("sup_stable_derivative_T{t}"), sup_d[k]);
    }
    Ok(rep.finish())
}
