//! The shipped flow models: the suspension of the cat map and the
//! projectively Anosov flows on the 3-torus cut out by two contact families.

use super::ChartModel;
use crate::error::{Error, Result};
use crate::fields::jvec;
use crate::fields::{Jet, KForm, VectorField};
use crate::Point;
use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Model name plus parameters, as written in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum ModelSpec {
    #[serde(rename = "cat_suspension")]
    CatSuspension,
    #[serde(rename = "t3_pA")]
    T3Pa {
        #[serde(default = "default_m")]
        m: i32,
        #[serde(default = "default_n")]
        n: i32,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_eps2")]
        eps2: f64,
    },
}

fn default_m() -> i32 {
    -1
}
fn default_n() -> i32 {
    1
}
fn default_eps() -> f64 {
    0.3
}
fn default_eps2() -> f64 {
    0.6
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::CatSuspension => "cat_suspension",
            ModelSpec::T3Pa { .. } => "t3_pA",
        }
    }

    /// The default `t3_pA(-1, 1, 0.3, 0.6)` instance.
    pub fn t3_pa_default() -> Self {
        ModelSpec::T3Pa {
            m: default_m(),
            n: default_n(),
            eps: default_eps(),
            eps2: default_eps2(),
        }
    }
}

/// A periodic orbit known in closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedOrbit {
    pub label: String,
    pub start: Point,
    pub period: f64,
}

/// Invariant line fields with their dual covectors: `alpha_s(e_s) =
/// alpha_u(e_u) = 1`, and each covector annihilates the other line and `X`.
#[derive(Debug, Clone)]
pub struct ExactSplitting {
    pub e_s: VectorField,
    pub e_u: VectorField,
    pub alpha_s: KForm,
    pub alpha_u: KForm,
}

/// A negative and a positive contact form whose kernels contain `X`.
#[derive(Debug, Clone)]
pub struct BiContactForms {
    pub minus: KForm,
    pub plus: KForm,
}

/// A flow on a chart model together with whatever structure is known for it
/// in closed form.
#[derive(Debug, Clone)]
pub struct ModelFlow {
    pub spec: ModelSpec,
    pub x: VectorField,
    pub exact_splitting: Option<ExactSplitting>,
    pub invariant_volume: Option<KForm>,
    pub named_orbits: Vec<NamedOrbit>,
    pub bicontact: Option<BiContactForms>,
}

impl ModelFlow {
    pub fn orbit(&self, label: &str) -> Result<&NamedOrbit> {
        self.named_orbits
            .iter()
            .find(|o| o.label == label)
            .ok_or_else(|| Error::Model(format!("no named orbit `{label}`")))
    }
}

/// Registered model names with a one-line description, sorted by name.
pub fn list_models() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "cat_suspension",
            "suspension flow of the cat map [[2,1],[1,1]] on its mapping torus (Anosov, volume preserving); no parameters",
        ),
        (
            "t3_pA",
            "flow along the intersection of two contact structures on the 3-torus (projectively Anosov, not Anosov); parameters m<0<n, eps != eps2 in (0,1)",
        ),
    ]
}

pub fn build_model(spec: &ModelSpec) -> Result<(ChartModel, ModelFlow)> {
    match *spec {
        ModelSpec::CatSuspension => Ok(cat_suspension()),
        ModelSpec::T3Pa { m, n, eps, eps2 } => t3_pa(m, n, eps, eps2),
    }
}

/// Suspension of the cat map `A = [[2,1],[1,1]]`: `X = ∂t` on the mapping
/// torus, with the eigen-covector frame `α_u = λ^t a_u`, `α_s = λ^{-t} a_s`,
/// the dual line fields `e_u = λ^{-t} v_u`, `e_s = λ^t v_s`, the invariant
/// volume `α_s∧α_u∧dt`, and the bi-contact pair `(α_u + α_s, α_u − α_s)`.
pub fn cat_suspension() -> (ChartModel, ModelFlow) {
    suspension(Matrix2::new(2, 1, 1, 1)).expect("the cat map is hyperbolic with positive eigenvalues")
}

fn suspension(monodromy: Matrix2<i64>) -> Result<(ChartModel, ModelFlow)> {
    let model = ChartModel::mapping_torus(monodromy)?;
    let d = model.mapping_data().expect("mapping torus").clone();
    if d.lambda < 0.0 {
        return Err(Error::Model(
            "suspension frame needs positive eigenvalues (the eigen-covectors flip sign across the gluing)".into(),
        ));
    }
    let ln_l = d.lambda.ln();
    let (a_u, a_s) = (d.cov_u, d.cov_s);
    // Dual basis: v_s, v_u with a_s(v_s) = a_u(v_u) = 1, a_s(v_u) = a_u(v_s) = 0.
    let basis = Matrix2::new(a_s.x, a_s.y, a_u.x, a_u.y);
    let det = basis.determinant();
    let inv = basis.try_inverse().expect("eigen-covectors are independent");
    let (v_s, v_u) = (inv.column(0).into_owned(), inv.column(1).into_owned());

    let stretch = move |x: &[Jet; 3], rate: f64| (x[2] * rate).exp();
    let alpha_u = KForm::one_form(move |x| {
        let e = stretch(x, ln_l);
        [e * a_u.x, e * a_u.y, Jet::constant(0.0, x[0].order())]
    });
    let alpha_s = KForm::one_form(move |x| {
        let e = stretch(x, -ln_l);
        [e * a_s.x, e * a_s.y, Jet::constant(0.0, x[0].order())]
    });
    let e_u = VectorField::new(move |x| {
        let e = stretch(x, -ln_l);
        [e * v_u.x, e * v_u.y, Jet::constant(0.0, x[0].order())]
    });
    let e_s = VectorField::new(move |x| {
        let e = stretch(x, ln_l);
        [e * v_s.x, e * v_s.y, Jet::constant(0.0, x[0].order())]
    });
    let minus = alpha_u.add(&alpha_s)?;
    let plus = alpha_u.sub(&alpha_s)?;
    let flow = ModelFlow {
        spec: ModelSpec::CatSuspension,
        x: VectorField::constant(Vector3::new(0.0, 0.0, 1.0)),
        exact_splitting: Some(ExactSplitting {
            e_s,
            e_u,
            alpha_s,
            alpha_u,
        }),
        invariant_volume: Some(KForm::three_form(move |x| Jet::constant(det, x[0].order()))),
        named_orbits: vec![
            NamedOrbit {
                label: "fixed_point".into(),
                start: Point::new(0.0, 0.0, 0.0),
                period: 1.0,
            },
            // (0.2, 0.4) is fixed by A² but not by A.
            NamedOrbit {
                label: "period_two".into(),
                start: Point::new(0.2, 0.4, 0.0),
                period: 2.0,
            },
        ],
        bicontact: Some(BiContactForms { minus, plus }),
    };
    Ok((model, flow))
}

/// The 1-form `dz + ε (cos 2πkz dx − sin 2πkz dy)`, coefficients as jets.
fn tilted_dz(x: &[Jet; 3], k: i32, eps: f64) -> jvec::JVec {
    let phase = x[2] * (2.0 * PI * k as f64);
    [phase.cos() * eps, phase.sin() * -eps, Jet::constant(1.0, x[0].order())]
}

/// Projectively Anosov flow on the 3-torus: `X` spans `ker α⁻ ∩ ker α⁺` for
/// `α⁻ = dz + ε(cos 2πmz dx − sin 2πmz dy)` (negative contact for `m < 0`)
/// and `α⁺ = dz + ε'(cos 2πnz dx − sin 2πnz dy)` (positive for `n > 0`),
/// normalized to unit Euclidean length. Its direction is `α⁻ × α⁺`, which is
/// continuous wherever the kernels are transverse.
pub fn t3_pa(m: i32, n: i32, eps: f64, eps2: f64) -> Result<(ChartModel, ModelFlow)> {
    if !(m < 0 && n > 0) {
        return Err(Error::Model(format!("t3_pA needs m < 0 < n, got m = {m}, n = {n}")));
    }
    for (name, v) in [("eps", eps), ("eps2", eps2)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Model(format!("t3_pA needs {name} in (0, 1), got {v}")));
        }
    }
    if eps == eps2 {
        return Err(Error::Model("t3_pA needs eps != eps2".into()));
    }
    let minus = KForm::one_form(move |x| tilted_dz(x, m, eps));
    let plus = KForm::one_form(move |x| tilted_dz(x, n, eps2));
    let x = VectorField::try_new(move |x| {
        let c = jvec::cross(&tilted_dz(x, m, eps), &tilted_dz(x, n, eps2));
        let norm = jvec::dot(&c, &c).sqrt();
        if norm.value() < 1e-12 {
            return Err(Error::degenerate("contact planes are parallel", &jvec::point(x)));
        }
        Ok(jvec::scale(&c, norm.recip()))
    });

    // The kernels depend on z only; a dense z-sample detects degeneracy.
    let samples = 4096;
    let mut min_norm = f64::INFINITY;
    for i in 0..samples {
        let z = i as f64 / samples as f64;
        let seed = Jet::seed([0.0, 0.0, z], 0);
        let c = jvec::values(&jvec::cross(&tilted_dz(&seed, m, eps), &tilted_dz(&seed, n, eps2)));
        min_norm = min_norm.min(c.norm());
    }
    if min_norm < 1e-9 {
        return Err(Error::Model(format!(
            "degenerate intersection: the two contact planes are parallel somewhere (min |α⁻×α⁺| = {min_norm:e})"
        )));
    }

    let flow = ModelFlow {
        spec: ModelSpec::T3Pa { m, n, eps, eps2 },
        x,
        exact_splitting: None,
        invariant_volume: None,
        named_orbits: Vec::new(),
        bicontact: Some(BiContactForms { minus, plus }),
    };
    Ok((ChartModel::torus3(), flow))
}
