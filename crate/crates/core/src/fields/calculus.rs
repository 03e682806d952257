use super::jet::Jet;
use super::jvec::{self, JVec};
use super::{derived, KForm, ScalarField, VectorField};
use crate::error::{Error, Result};

fn zero_tail(v: Jet) -> JVec {
    let z = Jet::constant(0.0, v.order());
    [v, z, z]
}

fn partial(j: &Jet, axis: usize) -> Jet {
    j.partial(axis).expect("derived source supplies one extra order")
}

/// Exterior product. Graded commutativity `a∧b = (-1)^{pq} b∧a` holds in the
/// chosen coefficient basis.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    let (p, q) = (a.degree(), b.degree());
    if p + q > 3 {
        return Err(Error::DegreeOverflow(p, q));
    }
    let src = derived(vec![a.src.clone(), b.src.clone()], 0, move |_, v, _| {
        let (x, y) = (&v[0], &v[1]);
        Ok(match (p, q) {
            (0, _) => jvec::scale(y, x[0]),
            (_, 0) => jvec::scale(x, y[0]),
            (1, 1) => jvec::cross(x, y),
            (1, 2) | (2, 1) => zero_tail(jvec::dot(x, y)),
            _ => unreachable!("degree sum checked"),
        })
    });
    Ok(KForm::from_source(p + q, src))
}

/// Exterior derivative: gradient, curl or divergence of the coefficients.
pub fn ext_d(w: &KForm) -> Result<KForm> {
    let deg = w.degree();
    if deg > 2 {
        return Err(Error::BadDegree(deg));
    }
    let src = derived(vec![w.src.clone()], 1, move |_, v, _| {
        let c = &v[0];
        Ok(match deg {
            0 => [partial(&c[0], 0), partial(&c[0], 1), partial(&c[0], 2)],
            1 => [
                partial(&c[2], 1) - partial(&c[1], 2),
                partial(&c[0], 2) - partial(&c[2], 0),
                partial(&c[1], 0) - partial(&c[0], 1),
            ],
            2 => zero_tail(partial(&c[0], 0) + partial(&c[1], 1) + partial(&c[2], 2)),
            _ => unreachable!(),
        })
    });
    Ok(KForm::from_source(deg + 1, src))
}

/// Contraction `i_X w` in the first argument slot, `(i_X w)(v, ...) = w(X, v, ...)`.
///
/// In coefficients: a 1-form gives `a·X`; a 2-form `w` gives the 1-form
/// `w × X`; a 3-form `c dx∧dy∧dz` gives the 2-form `c X`, so for example
/// `i_{∂z}(dx∧dy∧dz) = +dx∧dy`.
pub fn interior(x: &VectorField, w: &KForm) -> Result<KForm> {
    let deg = w.degree();
    if deg == 0 {
        return Err(Error::BadDegree(0));
    }
    let src = derived(vec![x.src.clone(), w.src.clone()], 0, move |_, v, _| {
        let (xv, c) = (&v[0], &v[1]);
        Ok(match deg {
            1 => zero_tail(jvec::dot(c, xv)),
            2 => jvec::cross(c, xv),
            3 => jvec::scale(xv, c[0]),
            _ => unreachable!(),
        })
    });
    Ok(KForm::from_source(deg - 1, src))
}

/// Cartan's formula `L_X w = i_X dw + d(i_X w)`.
pub fn lie_derivative(x: &VectorField, w: &KForm) -> Result<KForm> {
    match w.degree() {
        0 => interior(x, &ext_d(w)?),
        3 => ext_d(&interior(x, w)?),
        _ => interior(x, &ext_d(w)?)?.add(&ext_d(&interior(x, w)?)?),
    }
}

/// `div_X Ω` defined by `L_X Ω = (div_X Ω) Ω`. Evaluation fails with a
/// degenerate-volume error where `Ω` vanishes.
pub fn divergence(x: &VectorField, omega: &KForm) -> Result<ScalarField> {
    if omega.degree() != 3 {
        return Err(Error::BadDegree(omega.degree()));
    }
    // L_X(c vol) = div(c X) vol.
    let src = derived(vec![x.src.clone(), omega.src.clone()], 1, |p, v, order| {
        let (xv, c) = (&v[0], v[1][0]);
        if c.value().abs() < 1e-300 || !c.value().is_finite() {
            return Err(Error::degenerate("volume form", p));
        }
        let mut lie = Jet::constant(0.0, order);
        for (axis, xa) in xv.iter().enumerate() {
            lie += partial(&(c * *xa), axis);
        }
        Ok(zero_tail(lie / c.truncate(order)))
    });
    Ok(ScalarField::from_source(src))
}

/// Lie bracket `[X, Y] = (DY) X - (DX) Y`.
pub fn bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let src = derived(vec![x.src.clone(), y.src.clone()], 1, |_, v, order| {
        let (xv, yv) = (&v[0], &v[1]);
        Ok(std::array::from_fn(|i| {
            let mut acc = Jet::constant(0.0, order);
            for j in 0..3 {
                acc += xv[j].truncate(order) * partial(&yv[i], j) - yv[j].truncate(order) * partial(&xv[i], j);
            }
            acc
        }))
    });
    VectorField::from_source(src)
}

/// `α∧dα`; the caller reads the sign against the chart orientation.
pub fn contact_volume(alpha: &KForm) -> Result<KForm> {
    if alpha.degree() != 1 {
        return Err(Error::BadDegree(alpha.degree()));
    }
    wedge(alpha, &ext_d(alpha)?)
}

/// `w(V, W)` for a 2-form, i.e. `w · (V × W)` in coefficients.
pub fn pair_two_form(w: &KForm, v: &VectorField, u: &VectorField) -> Result<ScalarField> {
    if w.degree() != 2 {
        return Err(Error::BadDegree(w.degree()));
    }
    let src = derived(vec![w.src.clone(), v.src.clone(), u.src.clone()], 0, |_, c, _| {
        Ok(zero_tail(jvec::dot(&c[0], &jvec::cross(&c[1], &c[2]))))
    });
    Ok(ScalarField::from_source(src))
}
