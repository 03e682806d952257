//! Frames `(e_s, e_u, X)` adapted to an invariant splitting, their dual
//! covectors `(α_s, α_u, α_X)`, and the growth rates they induce.
//!
//! Line representatives are first projected to `η` (the chart-metric
//! complement of `X`); `α_X` is then the covector with `α_X(X) = 1` that
//! annihilates `η`. The frame volume `α_s∧α_u∧α_X` is positive.

use crate::dynamics::{growth_rate_bracket, linearize_flow, LineOptions, SplittingSource};
use crate::error::{Error, Result};
use crate::fields::jvec::{self, JVec};
use crate::fields::{derived, divergence, Jet, KForm, ScalarField, VectorField};
use crate::manifolds::{ChartModel, ModelFlow};
use crate::Point;
use nalgebra::Vector3;
use serde::Serialize;
use std::sync::Arc;

/// Which combination of the frame covectors a contact form is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormSign {
    /// `α = α_u − α_s` (the positive form of a bi-contact pair).
    Plus,
    /// `α = α_u + α_s` (the negative form).
    Minus,
}

impl FormSign {
    /// `+1` for `Plus`, `-1` for `Minus`: the sign of `α∧dα` against the
    /// frame volume.
    pub fn orientation(self) -> f64 {
        match self {
            FormSign::Plus => 1.0,
            FormSign::Minus => -1.0,
        }
    }
}

/// How the frame vectors are scaled.
#[derive(Debug, Clone)]
pub enum FrameNormalization {
    /// `α(e_u) = 1` and `α(e_s) = ∓1`, so that `α = α_u ∓ α_s`: the frame of
    /// the norm induced by a contact form.
    Contact { alpha: KForm, sign: FormSign },
    /// Unit vectors in the chart metric, `e_s` oriented so the frame volume
    /// is positive.
    ChartUnit,
    /// Chart-unit frame rescaled by a positive function `f` (vectors divided
    /// by `f`, covectors multiplied) so the frame volume equals `omega`.
    Volume { omega: KForm },
}

impl FrameNormalization {
    pub fn name(&self) -> &'static str {
        match self {
            FrameNormalization::Contact { .. } => "contact_form",
            FrameNormalization::ChartUnit => "chart_unit",
            FrameNormalization::Volume { .. } => "volume_adapted",
        }
    }

    fn source(&self) -> Option<KForm> {
        match self {
            FrameNormalization::Contact { alpha, .. } => Some(alpha.clone()),
            FrameNormalization::ChartUnit => None,
            FrameNormalization::Volume { omega } => Some(omega.clone()),
        }
    }
}

/// The frame at one point, with derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrameJets {
    pub e_s: JVec,
    pub e_u: JVec,
    pub alpha_s: JVec,
    pub alpha_u: JVec,
    pub alpha_x: JVec,
    /// Coefficient of `α_s∧α_u∧α_X`.
    pub volume: Jet,
}

/// Relative size below which a quantity counts as degenerate.
const CONDITIONING: f64 = 1e-10;

/// Builds the frame from raw line representatives and the flow direction.
/// `norm_input` holds the jets of the contact form or volume form required
/// by `normalization`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn frame_jets(
    model: &ChartModel,
    p: &Point,
    order: usize,
    x: &JVec,
    raw_s: &JVec,
    raw_u: &JVec,
    normalization: &FrameNormalization,
    norm_input: Option<&JVec>,
) -> Result<FrameJets> {
    let g = model.metric_jets(&Jet::seed([p.x, p.y, p.z], order));
    let gx = jvec::mat_vec(&g, x);
    let xx = jvec::dot(x, &gx);
    if !(xx.value() > 0.0) {
        return Err(Error::ZeroField([p.x, p.y, p.z]));
    }
    let proj = |v: &JVec| -> JVec { jvec::sub(v, &jvec::scale(x, jvec::dot(v, &gx) / xx)) };
    let (vs, vu) = (proj(raw_s), proj(raw_u));
    let gnorm = |v: &JVec| jvec::inner(&g, v, v).sqrt();
    let (ns, nu) = (gnorm(&vs).value(), gnorm(&vu).value());
    if !(ns > CONDITIONING * gnorm(raw_s).value()) || !(nu > CONDITIONING * gnorm(raw_u).value()) {
        return Err(Error::Frame {
            point: [p.x, p.y, p.z],
            detail: "a splitting line is tangent to the flow".into(),
        });
    }

    let (mut e_s, mut e_u) = match normalization {
        FrameNormalization::Contact { sign, .. } => {
            let a = norm_input.expect("contact normalization has a form");
            let (au, as_) = (jvec::dot(a, &vu), jvec::dot(a, &vs));
            let scale_a = jvec::values(a).norm();
            if !(au.value().abs() > CONDITIONING * scale_a * nu) || !(as_.value().abs() > CONDITIONING * scale_a * ns) {
                return Err(Error::Frame {
                    point: [p.x, p.y, p.z],
                    detail: "a splitting line lies in the contact plane".into(),
                });
            }
            let e_u = jvec::scale(&vu, au.recip());
            let e_s = jvec::scale(&vs, as_.recip() * -sign.orientation());
            (e_s, e_u)
        }
        FrameNormalization::ChartUnit | FrameNormalization::Volume { .. } => (
            jvec::scale(&vs, gnorm(&vs).recip()),
            jvec::scale(&vu, gnorm(&vu).recip()),
        ),
    };
    let mut det = jvec::det3(&e_s, &e_u, x);
    let scale = (jvec::inner(&g, &e_s, &e_s) * jvec::inner(&g, &e_u, &e_u) * xx)
        .sqrt()
        .value();
    if !(det.value().abs() > CONDITIONING * scale) {
        return Err(Error::Frame {
            point: [p.x, p.y, p.z],
            detail: format!(
                "splitting lines are nearly parallel (frame determinant {:e})",
                det.value()
            ),
        });
    }
    if det.value() < 0.0 {
        match normalization {
            FrameNormalization::Contact { .. } => {
                return Err(Error::Frame {
                    point: [p.x, p.y, p.z],
                    detail: "frame (e_s, e_u, X) normalized by the contact form is negatively oriented".into(),
                })
            }
            _ => {
                e_s = jvec::scale_f(&e_s, -1.0);
                det = -det;
            }
        }
    }
    let inv = det.recip();
    let mut alpha_s = jvec::scale(&jvec::cross(&e_u, x), inv);
    let mut alpha_u = jvec::scale(&jvec::cross(x, &e_s), inv);
    let alpha_x = jvec::scale(&jvec::cross(&e_s, &e_u), inv);
    let mut volume = inv;
    if let FrameNormalization::Volume { .. } = normalization {
        let omega = norm_input.expect("volume normalization has a form")[0];
        let ratio = omega * det;
        if !(ratio.value() > 0.0) {
            return Err(Error::Frame {
                point: [p.x, p.y, p.z],
                detail: "volume form and frame have opposite orientation".into(),
            });
        }
        let f = ratio.sqrt();
        let fi = f.recip();
        e_s = jvec::scale(&e_s, fi);
        e_u = jvec::scale(&e_u, fi);
        alpha_s = jvec::scale(&alpha_s, f);
        alpha_u = jvec::scale(&alpha_u, f);
        volume = omega;
    }
    Ok(FrameJets {
        e_s,
        e_u,
        alpha_s,
        alpha_u,
        alpha_x,
        volume,
    })
}

/// Exact frame fields built from line fields: `α_s(e_s) = α_u(e_u) =
/// α_X(X) = 1`, `ker α_u = E^s ⊕ ⟨X⟩`, `ker α_s = E^u ⊕ ⟨X⟩`, `α_X|η = 0`.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    pub normalization: &'static str,
    pub x: VectorField,
    pub e_s: VectorField,
    pub e_u: VectorField,
    pub alpha_s: KForm,
    pub alpha_u: KForm,
    pub alpha_x: KForm,
    /// `α_s∧α_u∧α_X`.
    pub volume: KForm,
}

impl FrameDecomposition {
    /// Frame from line fields `E^s`, `E^u` (any nonzero representatives).
    pub fn from_line_fields(
        model: &ChartModel,
        x: &VectorField,
        e_s: &VectorField,
        e_u: &VectorField,
        normalization: FrameNormalization,
    ) -> Self {
        let model = Arc::new(model.clone());
        let norm_src = normalization.source();
        let mut inputs = vec![x.src.clone(), e_s.src.clone(), e_u.src.clone()];
        if let Some(f) = &norm_src {
            inputs.push(f.src.clone());
        }
        let name = normalization.name();
        let normalization = Arc::new(normalization);
        let part = |pick: fn(&FrameJets) -> JVec| {
            let (model, normalization) = (model.clone(), normalization.clone());
            derived(inputs.clone(), 0, move |p, v, order| {
                let fr = frame_jets(&model, p, order, &v[0], &v[1], &v[2], &normalization, v.get(3))?;
                Ok(pick(&fr))
            })
        };
        Self {
            normalization: name,
            x: x.clone(),
            e_s: VectorField::from_source(part(|f| f.e_s)),
            e_u: VectorField::from_source(part(|f| f.e_u)),
            alpha_s: KForm::from_source(1, part(|f| f.alpha_s)),
            alpha_u: KForm::from_source(1, part(|f| f.alpha_u)),
            alpha_x: KForm::from_source(1, part(|f| f.alpha_x)),
            volume: KForm::from_source(
                3,
                part(|f| {
                    [
                        f.volume,
                        Jet::constant(0.0, f.volume.order()),
                        Jet::constant(0.0, f.volume.order()),
                    ]
                }),
            ),
        }
    }

    /// `α_u − α_s` (`Plus`) or `α_u + α_s` (`Minus`).
    pub fn reconstruct(&self, sign: FormSign) -> Result<KForm> {
        match sign {
            FormSign::Plus => self.alpha_u.sub(&self.alpha_s),
            FormSign::Minus => self.alpha_u.add(&self.alpha_s),
        }
    }

    /// The same splitting with `e_s ↦ c e_s`, `α_s ↦ α_s / c`.
    pub fn rescale_stable(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.e_s = self.e_s.scale(c);
        out.alpha_s = self.alpha_s.scale(1.0 / c);
        out.volume = self.volume.scale(1.0 / c);
        out
    }
}

/// Frame along the flow's splitting normalized by a contact form.
pub fn decompose_along_splitting(
    model: &ChartModel,
    x: &VectorField,
    alpha: &KForm,
    e_s: &VectorField,
    e_u: &VectorField,
    sign: FormSign,
) -> Result<FrameDecomposition> {
    if alpha.degree() != 1 {
        return Err(Error::BadDegree(alpha.degree()));
    }
    Ok(FrameDecomposition::from_line_fields(
        model,
        x,
        e_s,
        e_u,
        FrameNormalization::Contact {
            alpha: alpha.clone(),
            sign,
        },
    ))
}

/// `(r_s, r_u)` with `r = −α([X, e])`: the growth rates in the norm where
/// the frame vectors have unit length.
pub fn induced_growth_rates(frame: &FrameDecomposition) -> Result<(ScalarField, ScalarField)> {
    Ok((
        growth_rate_bracket(&frame.x, &frame.e_s, &frame.alpha_s)?,
        growth_rate_bracket(&frame.x, &frame.e_u, &frame.alpha_u)?,
    ))
}

/// Frame quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameSample {
    pub point: [f64; 3],
    /// Coefficient of the frame volume `α_s∧α_u∧α_X`.
    pub volume: f64,
    pub r_s: f64,
    pub r_u: f64,
    /// `div_X` of the frame volume.
    pub div_volume: f64,
}

#[derive(Debug, Clone)]
enum Route {
    Exact {
        frame: Box<FrameDecomposition>,
        r_s: ScalarField,
        r_u: ScalarField,
        div: ScalarField,
    },
    Estimated {
        opts: LineOptions,
        h: f64,
        step: f64,
    },
}

/// A frame adapted to the flow's splitting, evaluated either from exact line
/// fields (brackets and exact derivatives) or pointwise from estimated lines
/// (growth rates and divergence by central differences along the flow).
#[derive(Debug, Clone)]
pub struct SplittingFrame {
    model: ChartModel,
    x: VectorField,
    normalization: FrameNormalization,
    route: Route,
}

impl SplittingFrame {
    /// Uses the flow's exact splitting when it has one; otherwise lines are
    /// estimated with `opts`, and rates and divergence come from central
    /// differences of step `h` along the flow.
    pub fn new(
        model: &ChartModel,
        flow: &ModelFlow,
        normalization: FrameNormalization,
        opts: LineOptions,
        h: f64,
        step: f64,
    ) -> Result<Self> {
        let route = match &flow.exact_splitting {
            Some(s) => {
                let frame = FrameDecomposition::from_line_fields(model, &flow.x, &s.e_s, &s.e_u, normalization.clone());
                let (r_s, r_u) = induced_growth_rates(&frame)?;
                let div = divergence(&flow.x, &frame.volume)?;
                Route::Exact {
                    frame: Box::new(frame),
                    r_s,
                    r_u,
                    div,
                }
            }
            None => {
                if !(h > 0.0 && step > 0.0) {
                    return Err(Error::InvalidInput(
                        "difference and integrator steps must be positive".into(),
                    ));
                }
                Route::Estimated { opts, h, step }
            }
        };
        Ok(Self {
            model: model.clone(),
            x: flow.x.clone(),
            normalization,
            route,
        })
    }

    /// `"exact_splitting"` or `"estimated_splitting"`.
    pub fn route_name(&self) -> &'static str {
        match self.route {
            Route::Exact { .. } => "exact_splitting",
            Route::Estimated { .. } => "estimated_splitting",
        }
    }

    pub fn normalization_name(&self) -> &'static str {
        self.normalization.name()
    }

    /// The exact frame fields, when available.
    pub fn exact(&self) -> Option<&FrameDecomposition> {
        match &self.route {
            Route::Exact { frame, .. } => Some(frame),
            Route::Estimated { .. } => None,
        }
    }

    /// Pointwise frame from estimated lines.
    fn frame_at(&self, p: &Point, opts: &LineOptions) -> Result<FrameJets> {
        let (ls, lu) = SplittingSource::Estimated(*opts).lines_at(&self.model, &self.x, p)?;
        let c = |v: &Vector3<f64>| jvec::constant(v, 0);
        let norm_input = match self.normalization.source() {
            Some(f) => Some(f.jets(p, 0)?),
            None => None,
        };
        frame_jets(
            &self.model,
            p,
            0,
            &self.x.jets(p, 0)?,
            &c(&ls.dir),
            &c(&lu.dir),
            &self.normalization,
            norm_input.as_ref(),
        )
    }

    pub fn sample(&self, p: &Point) -> Result<FrameSample> {
        let point = [p.x, p.y, p.z];
        match &self.route {
            Route::Exact { frame, r_s, r_u, div } => Ok(FrameSample {
                point,
                volume: frame.volume.scalar_coeff(p)?,
                r_s: r_s.eval(p)?,
                r_u: r_u.eval(p)?,
                div_volume: div.eval(p)?,
            }),
            Route::Estimated { opts, h, step } => {
                let here = self.frame_at(p, opts)?;
                let step = step.min(*h);
                // Push the frame vectors to φ^{±h} p and measure them with the
                // frame covectors there; the frame volume transforms by det Dφ.
                let mut logs = [[0.0; 3]; 2];
                for (k, t) in [*h, -*h].into_iter().enumerate() {
                    let j = linearize_flow(&self.model, &self.x, p, t, step)?;
                    let there = self.frame_at(&j.end, opts)?;
                    let es = j.m * jvec::values(&here.e_s);
                    let eu = j.m * jvec::values(&here.e_u);
                    let a_s = jvec::values(&there.alpha_s).dot(&es).abs();
                    let a_u = jvec::values(&there.alpha_u).dot(&eu).abs();
                    let vol = there.volume.value() * j.m.determinant();
                    if !(a_s > 0.0 && a_u > 0.0 && vol > 0.0) {
                        return Err(Error::degenerate("frame collapsed along the flow", &j.end));
                    }
                    logs[k] = [a_s.ln(), a_u.ln(), vol.ln()];
                }
                let d = |i: usize| (logs[0][i] - logs[1][i]) / (2.0 * h);
                Ok(FrameSample {
                    point,
                    volume: here.volume.value(),
                    r_s: d(0),
                    r_u: d(1),
                    div_volume: d(2),
                })
            }
        }
    }
}
