//! Chart identifications, integrator accuracy, periodic-orbit spectra and
//! invariant-line estimation on the shipped models.

mod common;

use bicontact_core::dynamics::{
    close_orbit, estimate_line, flow_point, flow_point_lifted, growth_rate_bracket, invariance_drift, line_angle,
    linearize_flow, linearize_flow_lifted, orbit_integral, Direction, LineOptions,
};
use bicontact_core::fields::contact_volume;
use bicontact_core::{cat_suspension, t3_pa, ChartModel, ModelFlow};
use common::*;
use proptest::prelude::*;

const LAMBDA: f64 = 2.618_033_988_749_895;

fn models() -> Vec<(ChartModel, ModelFlow)> {
    vec![cat_suspension(), t3_pa(-1, 1, 0.3, 0.6).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent_and_lands_in_the_box(p in lifted_point()) {
        for (m, _) in models() {
            let c = m.canonicalize(&p);
            prop_assert!(c.iter().all(|v| (0.0..1.0).contains(v)), "{c:?}");
            prop_assert_eq!(m.canonicalize(&c), c);
            prop_assert!(m.distance(&c, &p) < 1e-12);
        }
    }

    /// Integrating on the cover and then identifying agrees with
    /// identifying at every step.
    #[test]
    fn flow_commutes_with_the_identifications(p in unit_point(), t in -2.5..2.5f64) {
        for (m, f) in models() {
            let canon = flow_point(&m, &f.x, &p, t, 1e-3).unwrap();
            let lifted = m.canonicalize(&flow_point_lifted(&f.x, &p, t, 1e-3).unwrap());
            prop_assert!(m.distance(&canon, &lifted) < 1e-9);
        }
    }

    /// The canonical-chart linearization equals the lifted one followed by
    /// the transport of the end crossing.
    #[test]
    fn linearization_commutes_with_transport(p in unit_point(), t in -2.5..2.5f64) {
        for (m, f) in models() {
            let canon = linearize_flow(&m, &f.x, &p, t, 1e-3).unwrap();
            let lifted = linearize_flow_lifted(&f.x, &p, t, 1e-3).unwrap();
            let (_, c) = m.canonicalize_with_crossing(&lifted.end);
            let moved = m.transport_matrix(c) * lifted.m;
            prop_assert!((moved - canon.m).norm() < 1e-8 * (1.0 + canon.m.norm()));
        }
    }

    #[test]
    fn forward_then_backward_returns(p in unit_point(), t in 0.1..2.0f64) {
        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let step = 1e-2;
        let q = flow_point(&m, &f.x, &p, t, step).unwrap();
        let back = flow_point(&m, &f.x, &q, -t, step).unwrap();
        prop_assert!(m.distance(&back, &p) < 10.0 * step.powi(4));
    }

    #[test]
    fn t3_pa_field_is_unit_and_lies_in_both_planes(p in unit_point()) {
        let (_, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let pair = f.bicontact.as_ref().unwrap();
        let x = f.x.eval(&p).unwrap();
        prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        prop_assert!(pair.minus.coeffs(&p).unwrap().dot(&x).abs() < 1e-12);
        prop_assert!(pair.plus.coeffs(&p).unwrap().dot(&x).abs() < 1e-12);
        prop_assert!(contact_volume(&pair.minus).unwrap().scalar_coeff(&p).unwrap() < 0.0);
        prop_assert!(contact_volume(&pair.plus).unwrap().scalar_coeff(&p).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Power iteration over a horizon of 20 recovers the eigendirections of
    /// the cat map, and the estimated line field is invariant.
    #[test]
    fn power_iteration_recovers_cat_eigendirections(p in unit_point()) {
        let (m, f) = cat_suspension();
        let s = f.exact_splitting.as_ref().unwrap();
        let opts = LineOptions { horizon: 20.0, ..Default::default() };
        for (dir, exact) in [(Direction::Unstable, &s.e_u), (Direction::Stable, &s.e_s)] {
            let line = estimate_line(&m, &f.x, &p, dir, &opts).unwrap();
            prop_assert!(line_angle(&m, &p, &line.dir, &exact.eval(&p).unwrap()) < 1e-6);
            prop_assert!(invariance_drift(&m, &f.x, &p, dir, &opts, 0.1).unwrap() < 1e-7);
        }
    }
}

/// Halving the step divides the RK4 end-point error by about 16.
#[test]
fn integrator_converges_at_fourth_order() {
    let (_, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
    let p = bicontact_core::Point::new(0.1, 0.6, 0.35);
    let reference = flow_point_lifted(&f.x, &p, 3.0, 1e-4).unwrap();
    let err = |h: f64| (flow_point_lifted(&f.x, &p, 3.0, h).unwrap() - reference).norm();
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 >= 12.0, "{e1} {e2}");
}

/// On a volume-preserving model the two forms of the volume condition agree
/// on every named orbit: `ln λ_u + ln λ_s = 0` and `∫(r_u + r_s) = 0`.
#[test]
fn cat_orbits_satisfy_the_volume_condition() {
    let (m, f) = cat_suspension();
    let s = f.exact_splitting.as_ref().unwrap();
    let ru = growth_rate_bracket(&f.x, &s.e_u, &s.alpha_u).unwrap();
    let rs = growth_rate_bracket(&f.x, &s.e_s, &s.alpha_s).unwrap();
    for orbit in &f.named_orbits {
        let o = close_orbit(&m, &f.x, orbit, 1e-3).unwrap();
        assert!((o.lambda_u.ln() + o.lambda_s.ln()).abs() < 1e-6, "{}", orbit.label);
        assert!(orbit_integral(&o, &(ru.clone() + rs.clone())).unwrap().abs() < 1e-6);
        let iu = orbit_integral(&o, &ru).unwrap();
        assert!((iu.exp() - o.lambda_u).abs() < 1e-6 * o.lambda_u);
        assert!((o.lambda_u - LAMBDA.powf(orbit.period)).abs() < 1e-6 * o.lambda_u);
    }
}
