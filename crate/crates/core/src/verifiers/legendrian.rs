//! The bi-contact pair of a volume-preserving flow and Legendrian-transverse
//! knots obtained by pushing periodic orbits along a Reeb flow.

use super::options::{VerifierOptions, EXACT_GRID};
use super::report::VerificationReport;
use crate::contact::{volume_preserving_pair, TANGENCY_TOL};
use crate::dynamics::{close_orbit, flow_point_lifted};
use crate::error::{Error, Result};
use crate::fields::{KForm, VectorField};
use crate::grid::{par_map, Extremum};
use crate::manifolds::{ChartModel, ModelFlow};

/// Builds the pair from `omega` (`α_s := Ω(·, e_u, X)`, `α⁺ = α_u − α_s`,
/// `α⁻ = α_u + α_s`) and checks that `Ω` is invariant, `r_s = −r_u`,
/// `dα⁻(e_u − e_s, X) = r_s − r_u < 0`, that the Reeb field of `α⁺` lies in
/// `ker α⁻`, and that the result is a bi-contact pair for the flow.
pub fn verify_reeb_inclusion(
    model: &ChartModel,
    flow: &ModelFlow,
    omega: &KForm,
    subject: &str,
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    opts.validate()?;
    let grid = opts.grid_or(EXACT_GRID);
    let points = grid.points();
    let vp = volume_preserving_pair(model, flow, omega, &points)?;
    let d = &vp.diagnostics;
    let mut rep = VerificationReport::new(
        "reeb",
        subject,
        flow.spec,
        opts.provenance(
            "exact_splitting",
            "chart_unit_then_volume_dual",
            "chart_metric",
            grid,
            false,
        ),
    );
    rep.residual_at("volume_divergence", &d.divergence, opts.tol("volume_divergence", 1e-8));
    rep.residual_at("rate_sum", &d.rate_sum, opts.tol("rate_sum", 1e-8));
    rep.residual_at(
        "included_identity",
        &d.included_residual,
        opts.tol("included_identity", 1e-8),
    );
    rep.residual_at("reeb_inclusion", &d.reeb_inclusion, opts.tol("reeb_inclusion", 1e-8));
    rep.residual_at(
        "flow_tangency",
        &vp.pair.tangency_residual,
        opts.tol("flow_tangency", TANGENCY_TOL),
    );
    let neg = Extremum {
        value: -d.included_value.value,
        point: d.included_value.point,
    };
    rep.margin_at("minus_contact_from_included_identity", &neg, opts.margin_tol);
    rep.margin_at("min_r_u", &d.min_r_u, opts.margin_tol);
    rep.margin(
        "alpha_minus_negative_contact",
        vp.pair.minus.margin * -vp.pair.minus.sign.as_f64(),
        opts.margin_tol,
        Some(vp.pair.minus.max_coefficient.point),
    );
    rep.margin(
        "alpha_plus_positive_contact",
        vp.pair.plus.margin * vp.pair.plus.sign.as_f64(),
        opts.margin_tol,
        Some(vp.pair.plus.min_coefficient.point),
    );
    rep.margin_at("kernel_transversality", &vp.pair.transversality_margin, opts.margin_tol);
    rep.note("alpha_minus is normalized by alpha_minus(e_s) = alpha_minus(e_u) = 1");
    Ok(rep.finish())
}

/// Samples per unit time along the orbit.
const SAMPLES_PER_UNIT: f64 = 256.0;

/// Pushes the named periodic orbit along the flow of `reeb` (the Reeb field
/// of `plus`) for each time `s > 0` and checks that the pushed loop is
/// Legendrian for `plus` (`max|α⁺(γ̇)|`) and transverse to `minus`
/// (`min|α⁻(γ̇)|/‖γ̇‖ > 0`, growing with `s`). The loop is sampled on the
/// universal cover and differentiated with the five-point stencil.
#[allow(clippy::too_many_arguments)]
pub fn verify_legendrian_push(
    model: &ChartModel,
    flow: &ModelFlow,
    orbit_label: &str,
    plus: &KForm,
    minus: &KForm,
    reeb: &VectorField,
    s_values: &[f64],
    opts: &VerifierOptions,
) -> Result<VerificationReport> {
    for &s in s_values {
        if s == 0.0 {
            return Err(Error::InvalidInput(
                "push time s = 0 leaves the orbit tangent to both contact planes (it is Legendrian for both); use s > 0".into(),
            ));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("push times must be positive, got {s}")));
        }
    }
    if s_values.is_empty() {
        return Err(Error::InvalidInput("no push times given".into()));
    }
    opts.validate()?;
    let seed = flow.orbit(orbit_label)?;
    let closed = close_orbit(model, &flow.x, seed, opts.step)?;
    let n = (seed.period * SAMPLES_PER_UNIT).ceil() as usize;
    let dt = seed.period / n as f64;

    // Lifted orbit at times i·dt, i = −2..=n+1.
    let mut fwd = vec![seed.start];
    for _ in 0..n + 1 {
        let last = *fwd.last().expect("nonempty");
        fwd.push(flow_point_lifted(&flow.x, &last, dt, opts.step)?);
    }
    let b1 = flow_point_lifted(&flow.x, &seed.start, -dt, opts.step)?;
    let b2 = flow_point_lifted(&flow.x, &b1, -dt, opts.step)?;
    let mut orbit = vec![b2, b1];
    orbit.extend(fwd);

    let mut sorted: Vec<f64> = s_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rep = VerificationReport::new(
        "push",
        format!("orbit `{orbit_label}` pushed by the Reeb flow of alpha_plus"),
        flow.spec,
        opts.provenance(
            "exact_splitting",
            "none",
            "chart_metric",
            crate::grid::SampleGrid::lattice(0),
            false,
        ),
    );
    rep.provenance.samples = n;
    rep.residual(
        "orbit_closure",
        closed.closure_gap,
        opts.tol("orbit_closure", 1e-9),
        None,
    );
    let mut margins = Vec::new();
    for &s in &sorted {
        let pushed = par_map(&orbit, |q| flow_point_lifted(reeb, q, s, opts.step))?;
        let mut leg = Extremum::max_start();
        let mut trans = Extremum::min_start();
        for i in 2..n + 2 {
            let tangent = (pushed[i - 2] - pushed[i - 1] * 8.0 + pushed[i + 1] * 8.0 - pushed[i + 2]) / (12.0 * dt);
            let g = pushed[i];
            let at = model.canonicalize(&g);
            let a_plus = plus.coeffs(&g)?.dot(&tangent);
            let a_minus = minus.coeffs(&g)?.dot(&tangent);
            leg.keep_max(a_plus.abs(), &at);
            trans.keep_min(a_minus.abs() / model.norm(&g, &tangent), &at);
        }
        let gap = model.distance(&model.canonicalize(&pushed[2]), &model.canonicalize(&pushed[n + 2]));
        rep.residual_at(
            format!("legendrian_s{s}"),
            &leg,
            opts.tol(&format!("legendrian_s{s}"), 1e-6),
        );
        rep.residual(
            format!("pushed_loop_closure_s{s}"),
            gap,
            opts.tol(&format!("pushed_loop_closure_s{s}"), 1e-8),
            None,
        );
        rep.margin_at(format!("transversality_s{s}"), &trans, opts.margin_tol);
        margins.push(trans.value);
    }
    if margins.len() > 1 {
        let growth = margins.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        rep.margin("transversality_growth_in_s", growth, 0.0, None);
    }
    rep.value("orbit_period", seed.period);
    Ok(rep.finish())
}
