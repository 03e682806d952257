//! Flow pullback of differential forms, and the Lie derivative recovered
//! from it by a central difference in time.

use super::integrate::linearize_flow_lifted;
use crate::error::{Error, Result};
use crate::fields::{KForm, VectorField};
use crate::Point;
use nalgebra::Vector3;

/// Coefficients of `(φ^t)* w` at `p`, with `φ^t` followed on the universal
/// cover of the chart. With `M = Dφ^t_p`: a function pulls back to
/// `w(φ^t p)`, a 1-form to `Mᵀ a`, a 2-form to `cof(M)ᵀ w = det(M) M⁻¹ w`
/// and a 3-form to `det(M) c`.
pub fn pullback_coeffs(x: &VectorField, w: &KForm, p: &Point, t: f64, step: f64) -> Result<Vector3<f64>> {
    let j = linearize_flow_lifted(x, p, t, step)?;
    let c = w.coeffs(&j.end)?;
    Ok(match w.degree() {
        0 => c,
        1 => j.m.transpose() * c,
        2 => {
            let det = j.m.determinant();
            let inv =
                j.m.try_inverse()
                    .ok_or_else(|| Error::Evaluation(format!("singular flow derivative at {p:?}")))?;
            inv * c * det
        }
        3 => c * j.m.determinant(),
        d => return Err(Error::BadDegree(d)),
    })
}

/// `L_X w` at `p` as `((φ^h)* w − (φ^{−h})* w) / 2h`. The truncation error
/// is `O(h²)`; the integrator runs with `step` (at most `h`), whose own
/// error is `O(step⁴)`.
pub fn lie_derivative_by_pullback(x: &VectorField, w: &KForm, p: &Point, h: f64, step: f64) -> Result<Vector3<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let s = step.min(h);
    let fwd = pullback_coeffs(x, w, p, h, s)?;
    let bwd = pullback_coeffs(x, w, p, -h, s)?;
    Ok((fwd - bwd) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::jvec::JVec;
    use crate::fields::lie_derivative;
    use approx::assert_abs_diff_eq;

    fn rotation() -> VectorField {
        // X = -y ∂x + x ∂y: a linear field, so Dφ^t is a rotation.
        VectorField::new(|x| [-x[1], x[0], x[2] * 0.0])
    }

    #[test]
    fn pullback_of_one_form_by_rotation() {
        let x = rotation();
        let dx = KForm::one_form(|p| -> JVec { [p[0] * 0.0 + 1.0, p[0] * 0.0, p[0] * 0.0] });
        let p = Point::new(0.3, -0.2, 0.5);
        let t: f64 = 0.7;
        // φ^t* dx = cos t dx − sin t dy.
        let c = pullback_coeffs(&x, &dx, &p, t, 1e-3).unwrap();
        assert_abs_diff_eq!(c, Vector3::new(t.cos(), -t.sin(), 0.0), epsilon = 1e-11);
    }

    #[test]
    fn agrees_with_cartan_formula() {
        let x = VectorField::new(|p| [(p[1] * 2.0).sin(), p[2] * p[0], (p[0] + p[2]).cos()]);
        let w = KForm::two_form(|p| [p[1] * p[2], (p[0] * 3.0).cos(), p[0] * p[0] + p[1]]);
        let p = Point::new(0.2, 0.4, -0.3);
        let exact = lie_derivative(&x, &w).unwrap().coeffs(&p).unwrap();
        let fd = lie_derivative_by_pullback(&x, &w, &p, 1e-3, 1e-4).unwrap();
        assert_abs_diff_eq!(exact, fd, epsilon = 1e-5);
    }
}
