//! Small helpers for triples of jets (vectors, covectors and 2-form
//! coefficients evaluated with derivatives attached).

use super::jet::Jet;
use crate::Point;
use nalgebra::{Matrix3, Vector3};

pub type JVec = [Jet; 3];
pub type JMat = [[Jet; 3]; 3];

pub fn zero(order: usize) -> JVec {
    [Jet::constant(0.0, order); 3]
}

pub fn constant(v: &Vector3<f64>, order: usize) -> JVec {
    [
        Jet::constant(v.x, order),
        Jet::constant(v.y, order),
        Jet::constant(v.z, order),
    ]
}

pub fn values(v: &JVec) -> Vector3<f64> {
    Vector3::new(v[0].value(), v[1].value(), v[2].value())
}

pub fn point(v: &JVec) -> Point {
    values(v)
}

pub fn dot(a: &JVec, b: &JVec) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &JVec, b: &JVec) -> JVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add(a: &JVec, b: &JVec) -> JVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &JVec, b: &JVec) -> JVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &JVec, s: Jet) -> JVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn scale_f(a: &JVec, s: f64) -> JVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn mat_vec(m: &JMat, v: &JVec) -> JVec {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// `g(a, b)` for a symmetric bilinear form given by its matrix.
pub fn inner(g: &JMat, a: &JVec, b: &JVec) -> Jet {
    dot(a, &mat_vec(g, b))
}

/// Determinant of the matrix with columns `a, b, c`.
pub fn det3(a: &JVec, b: &JVec, c: &JVec) -> Jet {
    dot(a, &cross(b, c))
}

pub fn identity(order: usize) -> JMat {
    std::array::from_fn(|i| std::array::from_fn(|j| Jet::constant(if i == j { 1.0 } else { 0.0 }, order)))
}

pub fn constant_mat(m: &Matrix3<f64>, order: usize) -> JMat {
    std::array::from_fn(|i| std::array::from_fn(|j| Jet::constant(m[(i, j)], order)))
}

pub fn mat_values(m: &JMat) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j].value())
}
