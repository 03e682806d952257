//! Chart models of closed 3-manifolds presented as the unit box with
//! identifications: the 3-torus and mapping tori of hyperbolic toral
//! automorphisms.
//!
//! For a mapping torus with monodromy `A` the chart is `(x, y, t)` and the
//! gluing is `(p, t + 1) ~ (A p, t)`; crossing `t = 1` upward applies `A` to
//! points and tangent vectors and `A^{-T}` to covectors.

mod models;

pub use models::{
    build_model, cat_suspension, list_models, t3_pa, BiContactForms, ExactSplitting, ModelFlow, ModelSpec, NamedOrbit,
};

use crate::error::{Error, Result};
use crate::fields::jvec::{self, JMat};
use crate::fields::{Jet, KForm, ScalarField, VectorField};
use crate::grid::random_points;
use crate::Point;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

/// Record of the deck transformation applied while canonicalizing a point:
/// the number of upward crossings of the `t = 1` face (negative for
/// downward). Integer translations in `x`, `y` do not act on tangent vectors
/// and are not recorded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub t_shift: i32,
}

impl Crossing {
    pub fn is_identity(&self) -> bool {
        self.t_shift == 0
    }

    pub fn compose(self, other: Crossing) -> Crossing {
        Crossing {
            t_shift: self.t_shift + other.t_shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Torus3,
    MappingTorus(MappingTorusData),
}

/// Monodromy data of a hyperbolic mapping torus.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingTorusData {
    pub monodromy: Matrix2<i64>,
    pub a: Matrix2<f64>,
    pub a_inv: Matrix2<f64>,
    /// Eigenvalue of modulus greater than one.
    pub lambda: f64,
    /// Unit covectors with `Aᵀ a_u = λ a_u` and `Aᵀ a_s = λ⁻¹ a_s`.
    pub cov_u: Vector2<f64>,
    pub cov_s: Vector2<f64>,
}

/// A closed 3-manifold as the unit box with its identification rules, plus a
/// Riemannian metric compatible with those rules.
///
/// The metric is Euclidean on the 3-torus. On a mapping torus the Euclidean
/// metric in `(x, y, t)` does not survive the gluing, so the chart metric is
/// `|λ|^{2t}(a_u·v)² + |λ|^{-2t}(a_s·v)² + dt²`, which is carried to itself
/// by the monodromy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartModel {
    pub kind: ModelKind,
    /// Sign of the reference volume `dx∧dy∧dz` (always `+1` for the shipped
    /// models).
    pub orientation: f64,
}

fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn wrap_centered(v: f64) -> f64 {
    v - v.round()
}

/// Any field that can be compared across identifications.
#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
    Form(&'a KForm),
}

/// Result of [`ChartModel::compatibility_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub samples: usize,
    pub max_mismatch: f64,
    pub worst_point: [f64; 3],
}

impl ChartModel {
    pub fn torus3() -> Self {
        Self {
            kind: ModelKind::Torus3,
            orientation: 1.0,
        }
    }

    /// Mapping torus of an integer matrix with `det = 1` and `|trace| > 2`.
    pub fn mapping_torus(monodromy: Matrix2<i64>) -> Result<Self> {
        let det = monodromy[(0, 0)] * monodromy[(1, 1)] - monodromy[(0, 1)] * monodromy[(1, 0)];
        let tr = monodromy[(0, 0)] + monodromy[(1, 1)];
        if det != 1 {
            return Err(Error::Model(format!("monodromy determinant is {det}, expected 1")));
        }
        if tr.abs() <= 2 {
            return Err(Error::Model(format!(
                "monodromy trace {tr} is not hyperbolic (|trace| must exceed 2)"
            )));
        }
        let a = monodromy.map(|v| v as f64);
        let a_inv = Matrix2::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]);
        let trf = tr as f64;
        let disc = (trf * trf - 4.0).sqrt();
        let lambda = if trf > 0.0 {
            (trf + disc) / 2.0
        } else {
            (trf - disc) / 2.0
        };
        let mu = 1.0 / lambda;
        let at = a.transpose();
        let eigvec = |ev: f64| -> Vector2<f64> {
            // Null vector of (Aᵀ - ev I) from its better-conditioned row.
            let m = at - Matrix2::identity() * ev;
            let r0 = Vector2::new(m[(0, 0)], m[(0, 1)]);
            let r1 = Vector2::new(m[(1, 0)], m[(1, 1)]);
            let r = if r0.norm() >= r1.norm() { r0 } else { r1 };
            let v = Vector2::new(-r.y, r.x);
            let v = v / v.norm();
            if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
                -v
            } else {
                v
            }
        };
        let cov_u = eigvec(lambda);
        let mut cov_s = eigvec(mu);
        // Orient so that det[a_s; a_u] > 0: then a_s∧a_u∧dt is positive.
        if cov_s.x * cov_u.y - cov_s.y * cov_u.x < 0.0 {
            cov_s = -cov_s;
        }
        Ok(Self {
            kind: ModelKind::MappingTorus(MappingTorusData {
                monodromy,
                a,
                a_inv,
                lambda,
                cov_u,
                cov_s,
            }),
            orientation: 1.0,
        })
    }

    pub fn mapping_data(&self) -> Option<&MappingTorusData> {
        match &self.kind {
            ModelKind::MappingTorus(d) => Some(d),
            ModelKind::Torus3 => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Torus3 => "torus3",
            ModelKind::MappingTorus(_) => "mapping_torus",
        }
    }

    /// Canonical representative in `[0,1)³`.
    pub fn canonicalize(&self, p: &Point) -> Point {
        self.canonicalize_with_crossing(p).0
    }

    /// Canonical representative together with the deck transformation used.
    pub fn canonicalize_with_crossing(&self, p: &Point) -> (Point, Crossing) {
        match &self.kind {
            ModelKind::Torus3 => (
                Point::new(wrap_unit(p.x), wrap_unit(p.y), wrap_unit(p.z)),
                Crossing::default(),
            ),
            ModelKind::MappingTorus(d) => {
                let mut xy = Vector2::new(wrap_unit(p.x), wrap_unit(p.y));
                let mut t = p.z;
                let mut shift = 0;
                while t >= 1.0 {
                    t -= 1.0;
                    xy = d.a * xy;
                    xy = Vector2::new(wrap_unit(xy.x), wrap_unit(xy.y));
                    shift += 1;
                }
                while t < 0.0 {
                    t += 1.0;
                    xy = d.a_inv * xy;
                    xy = Vector2::new(wrap_unit(xy.x), wrap_unit(xy.y));
                    shift -= 1;
                }
                let t = if t >= 1.0 { 0.0 } else { t };
                (Point::new(xy.x, xy.y, t), Crossing { t_shift: shift })
            }
        }
    }

    /// Differential of the deck transformation for a crossing.
    pub fn transport_matrix(&self, crossing: Crossing) -> Matrix3<f64> {
        match &self.kind {
            ModelKind::Torus3 => Matrix3::identity(),
            ModelKind::MappingTorus(d) => {
                let k = crossing.t_shift;
                let base = if k >= 0 { d.a } else { d.a_inv };
                let mut m2 = Matrix2::identity();
                for _ in 0..k.unsigned_abs() {
                    m2 = base * m2;
                }
                let mut m = Matrix3::identity();
                m.fixed_view_mut::<2, 2>(0, 0).copy_from(&m2);
                m
            }
        }
    }

    pub fn transport_vector(&self, crossing: Crossing, v: &Vector3<f64>) -> Vector3<f64> {
        self.transport_matrix(crossing) * v
    }

    /// Covectors move by the inverse transpose, preserving pairings.
    pub fn transport_covector(&self, crossing: Crossing, a: &Vector3<f64>) -> Vector3<f64> {
        let m = self.transport_matrix(crossing);
        m.try_inverse().expect("unimodular").transpose() * a
    }

    /// Transport of form coefficients of the given degree.
    pub fn transport_form(&self, crossing: Crossing, degree: usize, c: &Vector3<f64>) -> Vector3<f64> {
        let m = self.transport_matrix(crossing);
        match degree {
            0 => *c,
            1 => self.transport_covector(crossing, c),
            2 => m * c / m.determinant(),
            _ => c / m.determinant(),
        }
    }

    /// The chart metric at `p`.
    pub fn metric(&self, p: &Point) -> Matrix3<f64> {
        jvec::mat_values(&self.metric_jets(&Jet::seed([p.x, p.y, p.z], 0)))
    }

    /// The chart metric with derivatives attached.
    pub fn metric_jets(&self, x: &[Jet; 3]) -> JMat {
        let order = x[0].order();
        match &self.kind {
            ModelKind::Torus3 => jvec::identity(order),
            ModelKind::MappingTorus(d) => {
                let l = d.lambda.abs().ln();
                let gu = (x[2] * (2.0 * l)).exp();
                let gs = (x[2] * (-2.0 * l)).exp();
                let (u, s) = (d.cov_u, d.cov_s);
                let mut g = jvec::identity(order);
                for i in 0..2 {
                    for j in 0..2 {
                        g[i][j] = gu * (u[i] * u[j]) + gs * (s[i] * s[j]);
                    }
                }
                g
            }
        }
    }

    pub fn norm(&self, p: &Point, v: &Vector3<f64>) -> f64 {
        (v.dot(&(self.metric(p) * v))).max(0.0).sqrt()
    }

    /// Distance between two chart points modulo the identifications, for
    /// points that are close on the manifold.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let cp = self.canonicalize(p);
        let cq = self.canonicalize(q);
        let wrapped = |a: &Point, b: &Point| -> f64 {
            let d = a - b;
            Vector3::new(wrap_centered(d.x), wrap_centered(d.y), wrap_centered(d.z)).norm()
        };
        match &self.kind {
            ModelKind::Torus3 => wrapped(&cp, &cq),
            ModelKind::MappingTorus(_) => {
                let mut best = f64::INFINITY;
                for shift in [-1.0, 0.0, 1.0] {
                    let (shifted, _) = self.canonicalize_with_crossing(&(cq + Vector3::new(0.0, 0.0, shift)));
                    let mut d = cp - shifted;
                    d.x = wrap_centered(d.x);
                    d.y = wrap_centered(d.y);
                    d.z += shift;
                    let d = d.norm().min(wrapped(&cp, &cq));
                    best = best.min(d);
                }
                best
            }
        }
    }

    /// Identified pairs `(lift, crossing)` of a canonical sample: the lift
    /// canonicalizes back to the sample through `crossing`.
    fn identified_lifts(&self, p: &Point) -> Vec<Point> {
        let mut lifts = vec![
            p + Vector3::new(1.0, 0.0, 0.0),
            p + Vector3::new(0.0, 1.0, 0.0),
            p + Vector3::new(0.0, 0.0, 1.0),
        ];
        if let ModelKind::MappingTorus(_) = self.kind {
            lifts.push(p + Vector3::new(0.0, 0.0, -1.0));
        }
        lifts
    }

    /// Samples random identified point pairs and reports the largest mismatch
    /// of the field after transport.
    pub fn compatibility_check(&self, field: FieldRef<'_>, samples: usize, seed: u64) -> Result<CompatibilityReport> {
        let mut report = CompatibilityReport {
            samples: 0,
            max_mismatch: 0.0,
            worst_point: [0.0; 3],
        };
        for p in random_points(samples, seed) {
            for lift in self.identified_lifts(&p) {
                let (canon, crossing) = self.canonicalize_with_crossing(&lift);
                let mismatch = match field {
                    FieldRef::Scalar(f) => (f.eval(&lift)? - f.eval(&canon)?).abs(),
                    FieldRef::Vector(v) => (self.transport_vector(crossing, &v.eval(&lift)?) - v.eval(&canon)?).norm(),
                    FieldRef::Form(w) => {
                        let moved = self.transport_form(crossing, w.degree(), &w.coeffs(&lift)?);
                        (moved - w.coeffs(&canon)?).norm()
                    }
                };
                report.samples += 1;
                if mismatch > report.max_mismatch || !mismatch.is_finite() {
                    report.max_mismatch = mismatch;
                    report.worst_point = [lift.x, lift.y, lift.z];
                }
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cat() -> ChartModel {
        ChartModel::mapping_torus(Matrix2::new(2, 1, 1, 1)).unwrap()
    }

    #[test]
    fn torus_canonicalize_wraps_each_axis() {
        let m = ChartModel::torus3();
        let q = m.canonicalize(&Point::new(1.25, -0.5, 3.0));
        assert_abs_diff_eq!(q, Point::new(0.25, 0.5, 0.0), epsilon = 1e-15);
        let inside = Point::new(0.1, 0.7, 0.99);
        assert_eq!(m.canonicalize(&inside), inside);
    }

    #[test]
    fn mapping_torus_canonicalize_applies_monodromy() {
        let m = cat();
        let (q, c) = m.canonicalize_with_crossing(&Point::new(0.2, 0.3, 1.0));
        assert_abs_diff_eq!(q, Point::new(0.7, 0.5, 0.0), epsilon = 1e-12);
        assert_eq!(c.t_shift, 1);
        let (back, c2) = m.canonicalize_with_crossing(&Point::new(0.7, 0.5, -1.0 + 1e-9));
        assert_eq!(c2.t_shift, -1);
        // A⁻¹(0.7, 0.5) = (0.2, 0.3)
        assert_abs_diff_eq!(back, Point::new(0.2, 0.3, 1e-9), epsilon = 1e-9);
    }

    #[test]
    fn canonicalize_is_idempotent_near_boundaries() {
        let m = cat();
        for p in [
            Point::new(-1e-17, 0.999_999_999_999_999_9, 1.0 - 1e-17),
            Point::new(3.3, -2.1, -4.5),
        ] {
            let q = m.canonicalize(&p);
            assert!(q.iter().all(|c| (0.0..1.0).contains(c)), "{q:?}");
            assert_eq!(m.canonicalize(&q), q);
        }
    }

    #[test]
    fn transport_rules_match_monodromy() {
        let m = cat();
        let up = Crossing { t_shift: 1 };
        assert_abs_diff_eq!(
            m.transport_vector(up, &Vector3::new(1.0, 0.0, 0.0)),
            Vector3::new(2.0, 1.0, 0.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            m.transport_covector(up, &Vector3::new(1.0, 0.0, 0.0)),
            Vector3::new(1.0, -1.0, 0.0),
            epsilon = 1e-15
        );
        let t3 = ChartModel::torus3();
        let v = Vector3::new(0.3, -2.0, 5.0);
        assert_eq!(t3.transport_vector(up, &v), v);
    }

    #[test]
    fn rejects_non_hyperbolic_monodromy() {
        assert!(ChartModel::mapping_torus(Matrix2::new(1, 1, 0, 1)).is_err());
        assert!(ChartModel::mapping_torus(Matrix2::new(2, 1, 1, 2)).is_err());
        let neg = ChartModel::mapping_torus(Matrix2::new(-2, -1, -1, -1)).unwrap();
        assert!(neg.mapping_data().unwrap().lambda < -1.0);
    }

    #[test]
    fn mapping_torus_metric_is_glued_consistently() {
        let m = cat();
        let d = m.mapping_data().unwrap();
        let v = Vector3::new(0.4, -1.3, 0.7);
        let top = Point::new(0.2, 0.3, 1.0);
        let (bottom, c) = m.canonicalize_with_crossing(&top);
        let lhs = m.norm(&top, &v);
        let rhs = m.norm(&bottom, &m.transport_vector(c, &v));
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        assert!(d.lambda > 2.6 && d.lambda < 2.7);
    }

    #[test]
    fn compatibility_detects_non_periodic_scalar() {
        let t3 = ChartModel::torus3();
        let c = ScalarField::constant(2.0);
        let r = t3.compatibility_check(FieldRef::Scalar(&c), 20, 1).unwrap();
        assert_eq!(r.max_mismatch, 0.0);
        let x = ScalarField::new(|p| p[0]);
        let r = t3.compatibility_check(FieldRef::Scalar(&x), 20, 1).unwrap();
        assert_abs_diff_eq!(r.max_mismatch, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_sees_through_the_gluing() {
        let m = cat();
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(0.0, 0.0, 1.0 - 1e-12);
        assert!(m.distance(&a, &b) < 1e-11);
        let c = Point::new(1.0 - 1e-13, 1e-13, 0.5);
        assert!(m.distance(&Point::new(0.0, 0.0, 0.5), &c) < 1e-12);
    }
}
