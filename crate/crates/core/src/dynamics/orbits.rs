use super::integrate::{integrate_flow_even, linearize_flow, FlowJacobian, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::manifolds::{ChartModel, NamedOrbit};
use nalgebra::{Matrix2, Vector3};
use serde::Serialize;

/// Largest accepted gap between the start and the end of a named orbit.
pub const CLOSURE_TOL: f64 = 1e-9;

/// A closed orbit with its return map.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitData {
    pub label: String,
    pub period: f64,
    pub orbit: Trajectory,
    pub closure_gap: f64,
    pub monodromy: FlowJacobian,
    /// Return map on `η` in a chart-metric orthonormal basis.
    pub normal_monodromy: Matrix2<f64>,
    pub lambda_u: f64,
    pub lambda_s: f64,
    /// Eigenvalue of the monodromy along `X`.
    pub lambda_x: f64,
}

/// Integrates one period of a named orbit, checks closure and computes the
/// normal return-map eigenvalues.
pub fn close_orbit(model: &ChartModel, x: &VectorField, seed: &NamedOrbit, step: f64) -> Result<OrbitData> {
    let orbit = integrate_flow_even(model, x, &seed.start, seed.period, step)?;
    let n = orbit.samples.len() - 1;
    let monodromy = linearize_flow(model, x, &seed.start, seed.period, seed.period / n.max(1) as f64)?;
    let start = orbit.start();
    let gap = model.distance(&start, &orbit.end());
    if !(gap <= CLOSURE_TOL) {
        return Err(Error::OrbitNotClosed {
            label: seed.label.clone(),
            gap,
        });
    }

    let g = model.metric(&start);
    let xv = x.eval(&start)?;
    let xx = xv.dot(&(g * xv));
    let project = |v: Vector3<f64>| v - xv * (v.dot(&(g * xv)) / xx);
    // Orthonormal basis of η by Gram-Schmidt on the coordinate axes.
    let mut basis: Vec<Vector3<f64>> = Vec::new();
    for axis in 0..3 {
        let mut v = project(Vector3::ith(axis, 1.0));
        for b in &basis {
            v -= b * v.dot(&(g * b));
        }
        let nv = v.dot(&(g * v)).sqrt();
        if nv > 1e-6 && basis.len() < 2 {
            basis.push(v / nv);
        }
    }
    let m = monodromy.m;
    let normal = Matrix2::from_fn(|i, j| basis[i].dot(&(g * project(m * basis[j]))));
    let (tr, det) = (normal.trace(), normal.determinant());
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return Err(Error::Evaluation(format!(
            "normal return map of `{}` has complex eigenvalues (trace {tr}, det {det})",
            seed.label
        )));
    }
    let (e1, e2) = ((tr + disc.sqrt()) / 2.0, (tr - disc.sqrt()) / 2.0);
    let (lambda_u, lambda_s) = if e1.abs() >= e2.abs() { (e1, e2) } else { (e2, e1) };
    let lambda_x = (m * xv).dot(&(g * xv)) / xx;
    Ok(OrbitData {
        label: seed.label.clone(),
        period: seed.period,
        orbit,
        closure_gap: gap,
        monodromy,
        normal_monodromy: normal,
        lambda_u,
        lambda_s,
        lambda_x,
    })
}

/// `∫_0^P g(γ(t)) dt` by composite Simpson on the orbit samples; equal to
/// `∫_γ g β_X` for any 1-form with `β_X(X) = 1`.
pub fn orbit_integral(orbit: &OrbitData, g: &ScalarField) -> Result<f64> {
    let values = orbit
        .orbit
        .samples
        .iter()
        .map(|(_, p)| g.eval(p))
        .collect::<Result<Vec<_>>>()?;
    orbit.orbit.simpson(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::growth_rate_bracket;
    use crate::manifolds::cat_suspension;
    use crate::Point;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_fixed_point_spectrum() {
        let (m, f) = cat_suspension();
        let o = close_orbit(&m, &f.x, f.orbit("fixed_point").unwrap(), 1e-3).unwrap();
        let l = (3.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(o.lambda_u, l, epsilon = 1e-6);
        assert_abs_diff_eq!(o.lambda_s, 1.0 / l, epsilon = 1e-6);
        assert_abs_diff_eq!(o.lambda_u * o.lambda_s, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(o.lambda_x, 1.0, epsilon = 1e-8);

        let s = f.exact_splitting.as_ref().unwrap();
        let ru = growth_rate_bracket(&f.x, &s.e_u, &s.alpha_u).unwrap();
        let rs = growth_rate_bracket(&f.x, &s.e_s, &s.alpha_s).unwrap();
        let iu = orbit_integral(&o, &ru).unwrap();
        assert_abs_diff_eq!(iu, l.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(iu.exp(), o.lambda_u, epsilon = 1e-6);
        assert!(orbit_integral(&o, &(ru + rs)).unwrap().abs() < 1e-8);
        assert_abs_diff_eq!(
            orbit_integral(&o, &ScalarField::constant(1.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn period_two_orbit_closes() {
        let (m, f) = cat_suspension();
        let o = close_orbit(&m, &f.x, f.orbit("period_two").unwrap(), 1e-3).unwrap();
        let l = (3.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(o.lambda_u, l * l, epsilon = 1e-6);
    }

    #[test]
    fn open_orbit_is_rejected() {
        let (m, f) = cat_suspension();
        let bogus = NamedOrbit {
            label: "bogus".into(),
            start: Point::new(0.1, 0.1, 0.0),
            period: 1.0,
        };
        assert!(matches!(
            close_orbit(&m, &f.x, &bogus, 1e-3),
            Err(Error::OrbitNotClosed { .. })
        ));
    }
}
