//! Random smooth fields for property tests: finite Fourier sums on the unit
//! torus and quadratic polynomials, written against jets so that every
//! derivative is exact.
#![allow(dead_code)]

use bicontact_core::fields::jvec::JVec;
use bicontact_core::{Jet, KForm, Point, ScalarField, VectorField};
use proptest::prelude::*;
use std::f64::consts::PI;

/// One Fourier mode `amp · sin(2π k·x + phase)`.
#[derive(Debug, Clone)]
pub struct Mode {
    pub amp: f64,
    pub k: [i32; 3],
    pub phase: f64,
}

/// A finite sum of modes.
pub type Trig = Vec<Mode>;

pub fn eval_trig(t: &[Mode], x: &[Jet; 3]) -> Jet {
    let mut acc = Jet::constant(0.0, x[0].order());
    for m in t {
        let arg = (x[0] * m.k[0] as f64 + x[1] * m.k[1] as f64 + x[2] * m.k[2] as f64) * (2.0 * PI) + m.phase;
        acc += arg.sin() * m.amp;
    }
    acc
}

pub fn mode() -> impl Strategy<Value = Mode> {
    (-1.0..1.0f64, [-2i32..=2, -2i32..=2, -2i32..=2], 0.0..(2.0 * PI)).prop_map(|(amp, k, phase)| Mode {
        amp,
        k,
        phase,
    })
}

pub fn trig() -> impl Strategy<Value = Trig> {
    prop::collection::vec(mode(), 1..4)
}

pub fn trig3() -> impl Strategy<Value = [Trig; 3]> {
    [trig(), trig(), trig()]
}

/// A `deg`-form whose coefficients are the given sums (only the first is
/// used for degrees 0 and 3).
pub fn trig_form(deg: usize, c: [Trig; 3]) -> KForm {
    KForm::new(deg, move |x| -> JVec {
        let z = Jet::constant(0.0, x[0].order());
        match deg {
            0 | 3 => [eval_trig(&c[0], x), z, z],
            _ => [eval_trig(&c[0], x), eval_trig(&c[1], x), eval_trig(&c[2], x)],
        }
    })
    .expect("degree in range")
}

pub fn trig_scalar(c: Trig) -> ScalarField {
    ScalarField::new(move |x| eval_trig(&c, x))
}

pub fn trig_field(c: [Trig; 3]) -> VectorField {
    VectorField::new(move |x| [eval_trig(&c[0], x), eval_trig(&c[1], x), eval_trig(&c[2], x)])
}

/// Coefficients of `c + Σ b_i x_i + Σ_{i≤j} a_ij x_i x_j`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub c: f64,
    pub b: [f64; 3],
    pub a: [f64; 6],
}

pub fn eval_quadratic(q: &Quadratic, x: &[Jet; 3]) -> Jet {
    let mut acc = Jet::constant(q.c, x[0].order());
    for (xi, bi) in x.iter().zip(q.b) {
        acc += *xi * bi;
    }
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    for (k, (i, j)) in pairs.iter().enumerate() {
        acc += x[*i] * x[*j] * q.a[k];
    }
    acc
}

pub fn quadratic() -> impl Strategy<Value = Quadratic> {
    (
        -1.0..1.0f64,
        [-1.0..1.0f64, -1.0..1.0, -1.0..1.0],
        prop::array::uniform6(-1.0..1.0f64),
    )
        .prop_map(|(c, b, a)| Quadratic { c, b, a })
}

pub fn quadratic_field(q: [Quadratic; 3]) -> VectorField {
    VectorField::new(move |x| {
        [
            eval_quadratic(&q[0], x),
            eval_quadratic(&q[1], x),
            eval_quadratic(&q[2], x),
        ]
    })
}

pub fn quadratic3() -> impl Strategy<Value = [Quadratic; 3]> {
    [quadratic(), quadratic(), quadratic()]
}

pub fn unit_point() -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y, z)| Point::new(x, y, z))
}

pub fn lifted_point() -> impl Strategy<Value = Point> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Point::new(x, y, z))
}
