//! Coordinate exterior calculus on a chart.
//!
//! Every field is a pure function of the chart point. Derivatives come from
//! one of two providers:
//!
//! * **exact**: the field is written against [`Jet`] inputs and carries its
//!   own Taylor expansion up to [`MAX_ORDER`];
//! * **central differences** of order 2 or 4 with step `h`, applied to a
//!   value-only evaluation.
//!
//! Derived fields (wedge, `d`, contractions, brackets, ...) request their
//! inputs at whatever order they need, so exactness propagates through any
//! chain of operations until the derivative budget runs out.
//!
//! Coefficient conventions: a 1-form is `(a_x, a_y, a_z)` in `dx, dy, dz`;
//! a 2-form is `(w_1, w_2, w_3)` in `dy∧dz, dz∧dx, dx∧dy`; a 3-form is the
//! single coefficient of `dx∧dy∧dz`. With this basis the wedge of two
//! 1-forms is the cross product and `d` acts as gradient, curl and
//! divergence.

mod calculus;
pub mod jet;
pub mod jvec;

pub use calculus::{bracket, contact_volume, divergence, ext_d, interior, lie_derivative, pair_two_form, wedge};
pub use jet::{Jet, MAX_ORDER};

use crate::error::{Error, Result};
use crate::Point;
use jvec::JVec;
use nalgebra::{Matrix3, Vector3};
use std::fmt;
use std::sync::Arc;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Accuracy order of a central-difference stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// Where a field's derivatives come from.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum DerivSpec {
    Exact,
    Central { step: f64, order: StencilOrder },
}

impl DerivSpec {
    pub fn central2(step: f64) -> Self {
        DerivSpec::Central {
            step,
            order: StencilOrder::Second,
        }
    }

    pub fn central4(step: f64) -> Self {
        DerivSpec::Central {
            step,
            order: StencilOrder::Fourth,
        }
    }
}

/// Anything that can produce coefficient jets at a point.
pub(crate) trait Source: Send + Sync {
    fn jets(&self, p: &Point, order: usize) -> Result<JVec>;
}

type JetFn = dyn Fn(&[Jet; 3]) -> Result<JVec> + Send + Sync;
type ValueFn = dyn Fn(&Point) -> Result<[f64; 3]> + Send + Sync;
type DerivedFn = dyn Fn(&Point, &[JVec], usize) -> Result<JVec> + Send + Sync;

struct ExactSource {
    f: Box<JetFn>,
}

impl Source for ExactSource {
    fn jets(&self, p: &Point, order: usize) -> Result<JVec> {
        if order > MAX_ORDER {
            return Err(Error::DerivativeOrder {
                requested: order,
                max: MAX_ORDER,
            });
        }
        (self.f)(&Jet::seed([p.x, p.y, p.z], order))
    }
}

struct SampledSource {
    f: Arc<ValueFn>,
    step: f64,
    stencil: StencilOrder,
}

impl SampledSource {
    fn stencil(&self) -> &'static [(f64, f64)] {
        match self.stencil {
            StencilOrder::Second => &[(1.0, 0.5), (-1.0, -0.5)],
            StencilOrder::Fourth => &[
                (2.0, -1.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (-2.0, 1.0 / 12.0),
            ],
        }
    }
}

impl Source for SampledSource {
    // Coefficient of multi-index m is (1/m_i) times the central difference in
    // axis i of the coefficient of m - e_i, taken from jets one order lower.
    fn jets(&self, p: &Point, order: usize) -> Result<JVec> {
        if order > MAX_ORDER {
            return Err(Error::DerivativeOrder {
                requested: order,
                max: MAX_ORDER,
            });
        }
        let v = (self.f)(p)?;
        let mut out: JVec = std::array::from_fn(|c| Jet::constant(v[c], order));
        if order == 0 {
            return Ok(out);
        }
        let mut d_axis: [JVec; 3] = [jvec::zero(order - 1); 3];
        for (axis, d) in d_axis.iter_mut().enumerate() {
            for &(offset, weight) in self.stencil() {
                let mut q = *p;
                q[axis] += offset * self.step;
                let shifted = self.jets(&q, order - 1)?;
                for c in 0..3 {
                    d[c] += shifted[c] * (weight / self.step);
                }
            }
        }
        for m in Jet::multi_indices(order).skip(1) {
            let axis = (0..3).find(|&i| m[i] > 0).expect("nonzero multi-index");
            let mut lower = m;
            lower[axis] -= 1;
            for c in 0..3 {
                let val = d_axis[axis][c].coeff(lower) / m[axis] as f64;
                out[c].set_coeff(m, val);
            }
        }
        Ok(out)
    }
}

struct DerivedSource {
    inputs: Vec<Arc<dyn Source>>,
    extra: usize,
    op: Box<DerivedFn>,
}

impl Source for DerivedSource {
    fn jets(&self, p: &Point, order: usize) -> Result<JVec> {
        let need = order + self.extra;
        if need > MAX_ORDER {
            return Err(Error::DerivativeOrder {
                requested: need,
                max: MAX_ORDER,
            });
        }
        let vals = self
            .inputs
            .iter()
            .map(|s| s.jets(p, need))
            .collect::<Result<Vec<_>>>()?;
        (self.op)(p, &vals, order)
    }
}

pub(crate) fn exact_source(f: impl Fn(&[Jet; 3]) -> Result<JVec> + Send + Sync + 'static) -> Arc<dyn Source> {
    Arc::new(ExactSource { f: Box::new(f) })
}

pub(crate) fn sampled_source(
    f: impl Fn(&Point) -> Result<[f64; 3]> + Send + Sync + 'static,
    step: f64,
    stencil: StencilOrder,
) -> Arc<dyn Source> {
    Arc::new(SampledSource {
        f: Arc::new(f),
        step,
        stencil,
    })
}

/// A field computed from other fields. `extra` is the number of derivative
/// orders the operation consumes from its inputs.
pub(crate) fn derived(
    inputs: Vec<Arc<dyn Source>>,
    extra: usize,
    op: impl Fn(&Point, &[JVec], usize) -> Result<JVec> + Send + Sync + 'static,
) -> Arc<dyn Source> {
    Arc::new(DerivedSource {
        inputs,
        extra,
        op: Box::new(op),
    })
}

fn resample(src: &Arc<dyn Source>, spec: DerivSpec) -> Arc<dyn Source> {
    match spec {
        DerivSpec::Exact => src.clone(),
        DerivSpec::Central { step, order } => {
            let inner = src.clone();
            sampled_source(
                move |p| {
                    let j = inner.jets(p, 0)?;
                    Ok([j[0].value(), j[1].value(), j[2].value()])
                },
                step,
                order,
            )
        }
    }
}

fn check_fd(spec: DerivSpec) -> Result<(f64, StencilOrder)> {
    match spec {
        DerivSpec::Central { step, order } if step > 0.0 && step.is_finite() => Ok((step, order)),
        DerivSpec::Central { step, .. } => Err(Error::InvalidInput(format!(
            "finite-difference step must be positive, got {step}"
        ))),
        DerivSpec::Exact => Err(Error::InvalidInput(
            "a value-only field needs a finite-difference derivative spec".into(),
        )),
    }
}

// ---------------------------------------------------------------------------

/// A smooth function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    pub(crate) src: Arc<dyn Source>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

impl ScalarField {
    /// Exact field written against jet inputs.
    pub fn new(f: impl Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static) -> Self {
        Self {
            src: exact_source(move |x| {
                let v = f(x);
                Ok([v, Jet::constant(0.0, v.order()), Jet::constant(0.0, v.order())])
            }),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |x| Jet::constant(c, x[0].order()))
    }

    /// Value-only field differentiated by central differences.
    pub fn sampled(f: impl Fn(&Point) -> Result<f64> + Send + Sync + 'static, spec: DerivSpec) -> Result<Self> {
        let (step, order) = check_fd(spec)?;
        Ok(Self {
            src: sampled_source(move |p| Ok([f(p)?, 0.0, 0.0]), step, order),
        })
    }

    /// The same values with derivatives taken from `spec` instead.
    pub fn with_deriv_spec(&self, spec: DerivSpec) -> Self {
        Self {
            src: resample(&self.src, spec),
        }
    }

    pub(crate) fn from_source(src: Arc<dyn Source>) -> Self {
        Self { src }
    }

    pub fn jet(&self, p: &Point, order: usize) -> Result<Jet> {
        Ok(self.src.jets(p, order)?[0])
    }

    pub fn eval(&self, p: &Point) -> Result<f64> {
        Ok(self.jet(p, 0)?.value())
    }

    pub fn gradient(&self, p: &Point) -> Result<Vector3<f64>> {
        let j = self.jet(p, 1)?;
        Ok(Vector3::from(j.gradient()))
    }

    /// Pointwise map of the jet.
    pub fn map(&self, f: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> Self {
        Self::from_source(derived(vec![self.src.clone()], 0, move |_, v, o| {
            let r = f(v[0][0]);
            Ok([r, Jet::constant(0.0, o), Jet::constant(0.0, o)])
        }))
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static) -> Self {
        Self::from_source(derived(vec![self.src.clone(), other.src.clone()], 0, move |_, v, o| {
            let r = f(v[0][0], v[1][0]);
            Ok([r, Jet::constant(0.0, o), Jet::constant(0.0, o)])
        }))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(move |j| j * c)
    }

    /// Derivative along a vector field, `V·f`.
    pub fn along(&self, v: &VectorField) -> Self {
        interior(v, &ext_d(&KForm::from_scalar(self)).expect("degree 0"))
            .expect("degree 1")
            .to_scalar()
            .expect("degree 0")
    }
}

impl std::ops::Add for ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: ScalarField) -> ScalarField {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: ScalarField) -> ScalarField {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl std::ops::Mul for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        self.zip(&rhs, |a, b| a * b)
    }
}

impl std::ops::Div for ScalarField {
    type Output = ScalarField;
    fn div(self, rhs: ScalarField) -> ScalarField {
        self.zip(&rhs, |a, b| a / b)
    }
}

impl std::ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|a| -a)
    }
}

// ---------------------------------------------------------------------------

/// A vector field in chart components.
#[derive(Clone)]
pub struct VectorField {
    pub(crate) src: Arc<dyn Source>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

impl VectorField {
    pub fn new(f: impl Fn(&[Jet; 3]) -> JVec + Send + Sync + 'static) -> Self {
        Self {
            src: exact_source(move |x| Ok(f(x))),
        }
    }

    pub fn try_new(f: impl Fn(&[Jet; 3]) -> Result<JVec> + Send + Sync + 'static) -> Self {
        Self { src: exact_source(f) }
    }

    pub fn constant(v: Vector3<f64>) -> Self {
        Self::new(move |x| jvec::constant(&v, x[0].order()))
    }

    pub fn sampled(
        f: impl Fn(&Point) -> Result<Vector3<f64>> + Send + Sync + 'static,
        spec: DerivSpec,
    ) -> Result<Self> {
        let (step, order) = check_fd(spec)?;
        Ok(Self {
            src: sampled_source(
                move |p| {
                    let v = f(p)?;
                    Ok([v.x, v.y, v.z])
                },
                step,
                order,
            ),
        })
    }

    pub fn with_deriv_spec(&self, spec: DerivSpec) -> Self {
        Self {
            src: resample(&self.src, spec),
        }
    }

    pub(crate) fn from_source(src: Arc<dyn Source>) -> Self {
        Self { src }
    }

    pub fn jets(&self, p: &Point, order: usize) -> Result<JVec> {
        self.src.jets(p, order)
    }

    pub fn eval(&self, p: &Point) -> Result<Vector3<f64>> {
        Ok(jvec::values(&self.jets(p, 0)?))
    }

    /// `J[(i, j)] = ∂V_i / ∂x_j`.
    pub fn jacobian(&self, p: &Point) -> Result<Matrix3<f64>> {
        let j = self.jets(p, 1)?;
        Ok(Matrix3::from_fn(|i, k| j[i].d(k)))
    }

    pub fn value_and_jacobian(&self, p: &Point) -> Result<(Vector3<f64>, Matrix3<f64>)> {
        let j = self.jets(p, 1)?;
        Ok((jvec::values(&j), Matrix3::from_fn(|i, k| j[i].d(k))))
    }

    pub fn map(&self, f: impl Fn(&JVec) -> JVec + Send + Sync + 'static) -> Self {
        Self::from_source(derived(vec![self.src.clone()], 0, move |_, v, _| Ok(f(&v[0]))))
    }

    pub fn scaled(&self, s: &ScalarField) -> Self {
        Self::from_source(derived(vec![self.src.clone(), s.src.clone()], 0, |_, v, _| {
            Ok(jvec::scale(&v[0], v[1][0]))
        }))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(move |v| jvec::scale_f(v, c))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        Self::from_source(derived(vec![self.src.clone(), other.src.clone()], 0, |_, v, _| {
            Ok(jvec::add(&v[0], &v[1]))
        }))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        Self::from_source(derived(vec![self.src.clone(), other.src.clone()], 0, |_, v, _| {
            Ok(jvec::sub(&v[0], &v[1]))
        }))
    }
}

// ---------------------------------------------------------------------------

/// A differential form of degree 0 to 3.
#[derive(Clone)]
pub struct KForm {
    degree: usize,
    pub(crate) src: Arc<dyn Source>,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(degree {})", self.degree)
    }
}

/// Number of independent coefficients of a form of the given degree.
pub fn component_count(degree: usize) -> usize {
    match degree {
        0 | 3 => 1,
        _ => 3,
    }
}

impl KForm {
    pub(crate) fn from_source(degree: usize, src: Arc<dyn Source>) -> Self {
        debug_assert!(degree <= 3);
        Self { degree, src }
    }

    /// Exact form; unused coefficient slots are ignored.
    pub fn new(degree: usize, f: impl Fn(&[Jet; 3]) -> JVec + Send + Sync + 'static) -> Result<Self> {
        if degree > 3 {
            return Err(Error::BadDegree(degree));
        }
        Ok(Self::from_source(degree, exact_source(move |x| Ok(f(x)))))
    }

    pub fn one_form(f: impl Fn(&[Jet; 3]) -> JVec + Send + Sync + 'static) -> Self {
        Self::from_source(1, exact_source(move |x| Ok(f(x))))
    }

    pub fn two_form(f: impl Fn(&[Jet; 3]) -> JVec + Send + Sync + 'static) -> Self {
        Self::from_source(2, exact_source(move |x| Ok(f(x))))
    }

    pub fn three_form(f: impl Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static) -> Self {
        Self::from_source(
            3,
            exact_source(move |x| {
                let v = f(x);
                let z = Jet::constant(0.0, v.order());
                Ok([v, z, z])
            }),
        )
    }

    /// Constant coefficients in the chart basis.
    pub fn constant(degree: usize, coeffs: Vector3<f64>) -> Result<Self> {
        Self::new(degree, move |x| jvec::constant(&coeffs, x[0].order()))
    }

    /// The chart volume `dx∧dy∧dz`.
    pub fn reference_volume() -> Self {
        Self::three_form(|x| Jet::constant(1.0, x[0].order()))
    }

    pub fn from_scalar(s: &ScalarField) -> Self {
        Self::from_source(0, s.src.clone())
    }

    pub fn sampled(
        degree: usize,
        f: impl Fn(&Point) -> Result<Vector3<f64>> + Send + Sync + 'static,
        spec: DerivSpec,
    ) -> Result<Self> {
        if degree > 3 {
            return Err(Error::BadDegree(degree));
        }
        let (step, order) = check_fd(spec)?;
        Ok(Self::from_source(
            degree,
            sampled_source(
                move |p| {
                    let v = f(p)?;
                    Ok([v.x, v.y, v.z])
                },
                step,
                order,
            ),
        ))
    }

    pub fn with_deriv_spec(&self, spec: DerivSpec) -> Self {
        Self::from_source(self.degree, resample(&self.src, spec))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn jets(&self, p: &Point, order: usize) -> Result<JVec> {
        self.src.jets(p, order)
    }

    /// Coefficients at `p`; slots beyond [`component_count`] are zero.
    pub fn coeffs(&self, p: &Point) -> Result<Vector3<f64>> {
        let j = self.jets(p, 0)?;
        let mut v = jvec::values(&j);
        for c in component_count(self.degree)..3 {
            v[c] = 0.0;
        }
        Ok(v)
    }

    /// The single coefficient of a 0-form or 3-form.
    pub fn scalar_coeff(&self, p: &Point) -> Result<f64> {
        if component_count(self.degree) != 1 {
            return Err(Error::BadDegree(self.degree));
        }
        Ok(self.jets(p, 0)?[0].value())
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        if self.degree != 0 {
            return Err(Error::BadDegree(self.degree));
        }
        Ok(ScalarField::from_source(self.src.clone()))
    }

    /// `α(V)` for a 1-form.
    pub fn apply(&self, v: &VectorField) -> Result<ScalarField> {
        if self.degree != 1 {
            return Err(Error::BadDegree(self.degree));
        }
        interior(v, self)?.to_scalar()
    }

    pub fn scaled(&self, s: &ScalarField) -> Self {
        Self::from_source(
            self.degree,
            derived(vec![self.src.clone(), s.src.clone()], 0, |_, v, _| {
                Ok(jvec::scale(&v[0], v[1][0]))
            }),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_source(
            self.degree,
            derived(vec![self.src.clone()], 0, move |_, v, _| Ok(jvec::scale_f(&v[0], c))),
        )
    }

    pub fn add(&self, other: &KForm) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(Self::from_source(
            self.degree,
            derived(vec![self.src.clone(), other.src.clone()], 0, |_, v, _| {
                Ok(jvec::add(&v[0], &v[1]))
            }),
        ))
    }

    pub fn sub(&self, other: &KForm) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }
}
