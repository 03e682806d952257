use super::integrate::{linearize_flow, linearize_flow_lifted};
use crate::error::{Error, Result};
use crate::fields::{bracket, derived, jvec, Jet, KForm, ScalarField, VectorField};
use crate::manifolds::{ChartModel, Crossing, ModelFlow};
use crate::Point;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Orthogonal projection of `v` onto the chart-metric complement of `x` at
/// `p`; this complement is the transverse plane `η` used everywhere.
pub fn project_normal(model: &ChartModel, p: &Point, v: &Vector3<f64>, x: &Vector3<f64>) -> Result<Vector3<f64>> {
    let g = model.metric(p);
    let xx = x.dot(&(g * x));
    if xx <= 0.0 || !xx.is_finite() {
        return Err(Error::ZeroField([p.x, p.y, p.z]));
    }
    Ok(v - x * (v.dot(&(g * x)) / xx))
}

/// A line in `TM/⟨X⟩`, stored as its chart-metric unit representative in `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalLine {
    pub base: Point,
    pub dir: Vector3<f64>,
}

impl NormalLine {
    /// Projects `v` to `η` and normalizes; fails if `v` is parallel to `X`.
    pub fn from_vector(model: &ChartModel, x: &VectorField, p: &Point, v: &Vector3<f64>) -> Result<Self> {
        let w = project_normal(model, p, v, &x.eval(p)?)?;
        let n = model.norm(p, &w);
        if !(n > 1e-12 * model.norm(p, v).max(f64::MIN_POSITIVE)) {
            return Err(Error::degenerate("line is tangent to the flow", p));
        }
        Ok(Self { base: *p, dir: w / n })
    }
}

/// Angle between two lines (sign of the representatives ignored), in the
/// chart metric at `p`.
pub fn line_angle(model: &ChartModel, p: &Point, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    let (u, v) = (u / model.norm(p, u), v / model.norm(p, v));
    let d = model.norm(p, &(u - v)).min(model.norm(p, &(u + v)));
    2.0 * (d / 2.0).min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Stable,
    Unstable,
}

/// Settings of the power iteration for invariant lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineOptions {
    /// Longest horizon `T`.
    pub horizon: f64,
    pub step: f64,
    pub angle_tol: f64,
    pub seed: u64,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self {
            horizon: 24.0,
            step: 1e-2,
            angle_tol: 1e-8,
            seed: 0,
        }
    }
}

/// Outcome of [`estimate_line_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineEstimate {
    pub line: NormalLine,
    pub horizon: f64,
    pub last_angle: f64,
    pub converged: bool,
}

/// Integrates the lifted flow from `p` for time `t`, returning the end point
/// and the per-step variational matrices (RK4) in order.
fn step_jacobians(x: &VectorField, p: &Point, t: f64, step: f64) -> Result<(Point, Vec<Matrix3<f64>>)> {
    let n = (t.abs() / step).ceil() as usize;
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    let mut q = *p;
    let mut out = Vec::with_capacity(n);
    let id = Matrix3::identity();
    for _ in 0..n {
        let (k1, j1) = x.value_and_jacobian(&q)?;
        let l1 = j1;
        let (k2, j2) = x.value_and_jacobian(&(q + k1 * (h / 2.0)))?;
        let l2 = j2 * (id + l1 * (h / 2.0));
        let (k3, j3) = x.value_and_jacobian(&(q + k2 * (h / 2.0)))?;
        let l3 = j3 * (id + l2 * (h / 2.0));
        let (k4, j4) = x.value_and_jacobian(&(q + k3 * h))?;
        let l4 = j4 * (id + l3 * h);
        q += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        out.push(id + (l1 + 2.0 * l2 + 2.0 * l3 + l4) * (h / 6.0));
    }
    Ok((q, out))
}

fn seed_vector(seed: u64) -> Vector3<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

/// Pushes `w0` (a vector at `φ^{∓τ} p`) to `p` along the flow.
///
/// The orbit is integrated from `p` towards `φ^{∓τ} p` and the vector is
/// carried back along that same pseudo-orbit by inverting each step's
/// linearization, so it always arrives at `p` itself; re-integrating from
/// the far end would drift away from `p` at the expansion rate.
fn push_to(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    dir: Direction,
    tau: f64,
    w0: &Vector3<f64>,
    step: f64,
) -> Result<Vector3<f64>> {
    let sign = match dir {
        Direction::Unstable => 1.0,
        Direction::Stable => -1.0,
    };
    let (q, steps) = step_jacobians(x, p, -sign * tau, step)?;
    // The seed is a vector in the canonical chart at q; carry it into the
    // chart of the lift.
    let (_, c) = model.canonicalize_with_crossing(&q);
    let w_lift = model.transport_vector(Crossing { t_shift: -c.t_shift }, w0);
    let mut w = project_normal(model, &q, &w_lift, &x.eval(&q)?)?;
    for b in steps.iter().rev() {
        w = b
            .lu()
            .solve(&w)
            .ok_or_else(|| Error::Evaluation("singular flow linearization".into()))?;
        let nw = w.norm();
        if nw > 0.0 {
            w /= nw;
        }
    }
    let w = project_normal(model, p, &w, &x.eval(p)?)?;
    Ok(w / model.norm(p, &w))
}

/// Power iteration over horizons `1, 2, 4, …` capped at `horizon`: pushes a
/// fixed pseudo-random normal vector forward (unstable) or backward (stable)
/// onto `p` and stops once successive estimates agree within `angle_tol`.
pub fn estimate_line_report(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    dir: Direction,
    opts: &LineOptions,
) -> Result<LineEstimate> {
    estimate_from_seed(model, x, p, dir, opts, &seed_vector(opts.seed))
}

/// As [`estimate_line_report`] with an explicit seed vector.
pub fn estimate_from_seed(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    dir: Direction,
    opts: &LineOptions,
    seed: &Vector3<f64>,
) -> Result<LineEstimate> {
    if !(opts.horizon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "line horizon must be positive, got {}",
            opts.horizon
        )));
    }
    let mut horizons = Vec::new();
    let mut tau = 1.0_f64.min(opts.horizon);
    while tau < opts.horizon {
        horizons.push(tau);
        tau *= 2.0;
    }
    horizons.push(opts.horizon);

    let mut prev: Option<Vector3<f64>> = None;
    let mut last_angle = f64::INFINITY;
    let mut used = 0.0;
    for &tau in &horizons {
        let mut w = push_to(model, x, p, dir, tau, seed, opts.step)?;
        // A seed on the complementary line stalls; perturb it deterministically.
        if !w.iter().all(|c| c.is_finite()) {
            w = push_to(
                model,
                x,
                p,
                dir,
                tau,
                &(seed + seed_vector(opts.seed ^ 0x9e37)),
                opts.step,
            )?;
        }
        used = tau;
        if let Some(v) = prev {
            last_angle = line_angle(model, p, &v, &w);
            if last_angle < opts.angle_tol {
                prev = Some(w);
                break;
            }
        }
        prev = Some(w);
    }
    let dir_v = prev.expect("at least one horizon");
    Ok(LineEstimate {
        line: NormalLine { base: *p, dir: dir_v },
        horizon: used,
        last_angle,
        converged: last_angle < opts.angle_tol,
    })
}

/// Invariant line at `p`; non-convergence is an error carrying the last
/// angle change.
pub fn estimate_line(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    dir: Direction,
    opts: &LineOptions,
) -> Result<NormalLine> {
    let est = estimate_line_report(model, x, p, dir, opts)?;
    if est.converged {
        Ok(est.line)
    } else {
        Err(Error::NotConverged {
            horizon: est.horizon,
            last_angle: est.last_angle,
        })
    }
}

/// Angle per unit time between the pushed line `Dφ^h ℓ(p)` and the
/// estimate `ℓ(φ^h p)`: zero for an exactly invariant line field.
pub fn invariance_drift(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    dir: Direction,
    opts: &LineOptions,
    h: f64,
) -> Result<f64> {
    let line = estimate_line(model, x, p, dir, opts)?;
    let j = linearize_flow_lifted(x, p, h, opts.step.min(h))?;
    let there = estimate_line(model, x, &j.end, dir, opts)?;
    let pushed = project_normal(model, &j.end, &(j.m * line.dir), &x.eval(&j.end)?)?;
    Ok(line_angle(model, &j.end, &pushed, &there.dir) / h)
}

/// Which norm measures normal vectors in a growth rate.
#[derive(Debug, Clone)]
pub enum RateNorm {
    /// The model's chart metric on the `η` representative.
    Chart,
    /// `‖w‖ = |α(w)|` for a 1-form `α` annihilating `X` whose restriction
    /// to each invariant line is nonzero (the norm induced by a contact
    /// form that supports the splitting).
    Induced(KForm),
}

impl RateNorm {
    pub fn name(&self) -> &'static str {
        match self {
            RateNorm::Chart => "chart_metric",
            RateNorm::Induced(_) => "induced_by_contact_form",
        }
    }

    fn measure(&self, model: &ChartModel, p: &Point, w: &Vector3<f64>) -> Result<f64> {
        match self {
            RateNorm::Chart => Ok(model.norm(p, w)),
            RateNorm::Induced(a) => Ok(a.coeffs(p)?.dot(w).abs()),
        }
    }
}

/// `d/dt ln‖π(Dφ^t v)‖` at `t = 0` by a central difference with step `h`.
pub fn growth_rate_fd(
    model: &ChartModel,
    x: &VectorField,
    line: &NormalLine,
    h: f64,
    step: f64,
    norm: &RateNorm,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let p = line.base;
    let xp = x.eval(&p)?;
    if model.norm(&p, &project_normal(model, &p, &line.dir, &xp)?) < 1e-12 * model.norm(&p, &line.dir) {
        return Err(Error::degenerate("line is tangent to the flow", &p));
    }
    let step = step.min(h);
    let log_norm = |t: f64| -> Result<f64> {
        let j = linearize_flow(model, x, &p, t, step)?;
        let w = project_normal(model, &j.end, &(j.m * line.dir), &x.eval(&j.end)?)?;
        let n = norm.measure(model, &j.end, &w)?;
        if !(n > 0.0) {
            return Err(Error::degenerate("pushed line has zero norm", &j.end));
        }
        Ok(n.ln())
    };
    Ok((log_norm(h)? - log_norm(-h)?) / (2.0 * h))
}

/// `r = −α([X, e])` where `α` is the dual covector of `e` in a frame
/// `(e_s, e_u, X)`, read off from `L_X e = −r e + q X`. Evaluation fails with
/// a frame error where `α(e) ≠ 1`.
pub fn growth_rate_bracket(x: &VectorField, e: &VectorField, alpha_dual: &KForm) -> Result<ScalarField> {
    if alpha_dual.degree() != 1 {
        return Err(Error::BadDegree(alpha_dual.degree()));
    }
    let br = bracket(x, e);
    let src = derived(
        vec![alpha_dual.src.clone(), e.src.clone(), br.src.clone()],
        0,
        |p, v, order| {
            let norm = jvec::dot(&v[0], &v[1]).value();
            if (norm - 1.0).abs() > 1e-8 {
                return Err(Error::Frame {
                    point: [p.x, p.y, p.z],
                    detail: format!("dual covector gives α(e) = {norm}, expected 1"),
                });
            }
            let r = -jvec::dot(&v[0], &v[2]);
            Ok([r, Jet::constant(0.0, order), Jet::constant(0.0, order)])
        },
    );
    Ok(ScalarField::from_source(src))
}

/// Where the invariant lines come from.
#[derive(Debug, Clone)]
pub enum SplittingSource {
    /// Closed-form line fields.
    Exact { e_s: VectorField, e_u: VectorField },
    /// Power iteration at every point.
    Estimated(LineOptions),
}

impl SplittingSource {
    /// The flow's exact splitting when it has one, otherwise estimation.
    pub fn for_flow(flow: &ModelFlow, opts: LineOptions) -> Self {
        match &flow.exact_splitting {
            Some(s) => SplittingSource::Exact {
                e_s: s.e_s.clone(),
                e_u: s.e_u.clone(),
            },
            None => SplittingSource::Estimated(opts),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SplittingSource::Exact { .. } => "exact",
            SplittingSource::Estimated(_) => "power_iteration",
        }
    }

    /// `(stable, unstable)` lines at `p`.
    pub fn lines_at(&self, model: &ChartModel, x: &VectorField, p: &Point) -> Result<(NormalLine, NormalLine)> {
        match self {
            SplittingSource::Exact { e_s, e_u } => Ok((
                NormalLine::from_vector(model, x, p, &e_s.eval(p)?)?,
                NormalLine::from_vector(model, x, p, &e_u.eval(p)?)?,
            )),
            SplittingSource::Estimated(opts) => Ok((
                estimate_line(model, x, p, Direction::Stable, opts)?,
                estimate_line(model, x, p, Direction::Unstable, opts)?,
            )),
        }
    }
}

/// Growth rates at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRates {
    pub r_s: f64,
    pub r_u: f64,
}

/// Growth rates at `p` from finite differences along the flow.
pub fn rates_at(
    model: &ChartModel,
    x: &VectorField,
    p: &Point,
    source: &SplittingSource,
    norm: &RateNorm,
    h: f64,
    step: f64,
) -> Result<GrowthRates> {
    let (ls, lu) = source.lines_at(model, x, p)?;
    Ok(GrowthRates {
        r_s: growth_rate_fd(model, x, &ls, h, step, norm)?,
        r_u: growth_rate_fd(model, x, &lu, h, step, norm)?,
    })
}

/// Domination and Anosov margins over a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub norm: String,
    pub splitting: String,
    pub samples: usize,
    pub evaluated: usize,
    pub unconverged: usize,
    pub max_unconverged_angle: f64,
    pub min_gap: f64,
    pub min_gap_point: [f64; 3],
    pub min_r_u: f64,
    pub max_r_s: f64,
    /// `min(r_u − r_s) > 0`: a dominated splitting is witnessed.
    pub dominated: bool,
    /// `min r_u > 0 > max r_s` under this norm. A `false` here only means
    /// the chosen norm does not witness Anosovity.
    pub anosov_witnessed_by_this_norm: bool,
}

/// Estimates lines and growth rates at every sample point (in parallel,
/// aggregated in input order).
pub fn domination_report(
    model: &ChartModel,
    x: &VectorField,
    points: &[Point],
    source: &SplittingSource,
    norm: &RateNorm,
    h: f64,
    step: f64,
) -> Result<DominationReport> {
    let per_point: Vec<Result<GrowthRates>> = points
        .par_iter()
        .map(|p| rates_at(model, x, p, source, norm, h, step))
        .collect();
    let mut rep = DominationReport {
        norm: norm.name().into(),
        splitting: source.name().into(),
        samples: points.len(),
        evaluated: 0,
        unconverged: 0,
        max_unconverged_angle: 0.0,
        min_gap: f64::INFINITY,
        min_gap_point: [0.0; 3],
        min_r_u: f64::INFINITY,
        max_r_s: f64::NEG_INFINITY,
        dominated: false,
        anosov_witnessed_by_this_norm: false,
    };
    for (p, r) in points.iter().zip(per_point) {
        match r {
            Ok(r) => {
                rep.evaluated += 1;
                let gap = r.r_u - r.r_s;
                if gap < rep.min_gap {
                    rep.min_gap = gap;
                    rep.min_gap_point = [p.x, p.y, p.z];
                }
                rep.min_r_u = rep.min_r_u.min(r.r_u);
                rep.max_r_s = rep.max_r_s.max(r.r_s);
            }
            Err(Error::NotConverged { last_angle, .. }) => {
                rep.unconverged += 1;
                rep.max_unconverged_angle = rep.max_unconverged_angle.max(last_angle);
            }
            Err(e) => return Err(e),
        }
    }
    rep.dominated = rep.evaluated > 0 && rep.min_gap > 0.0;
    rep.anosov_witnessed_by_this_norm = rep.evaluated > 0 && rep.min_r_u > 0.0 && rep.max_r_s < 0.0;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_points;
    use crate::manifolds::{cat_suspension, t3_pa};
    use approx::assert_abs_diff_eq;

    const LN_LAMBDA: f64 = 0.962_423_650_119_206_9;

    #[test]
    fn projection_examples() {
        let m = ChartModel::torus3();
        let p = Point::zeros();
        let x = Vector3::new(0.0, 0.0, 1.0);
        assert_eq!(
            project_normal(&m, &p, &Vector3::new(1.0, 2.0, 3.0), &x).unwrap(),
            Vector3::new(1.0, 2.0, 0.0)
        );
        assert_eq!(project_normal(&m, &p, &(x * 2.0), &x).unwrap(), Vector3::zeros());
        let v = Vector3::new(0.5, -1.0, 0.0);
        assert_eq!(project_normal(&m, &p, &v, &x).unwrap(), v);
        assert!(project_normal(&m, &p, &v, &Vector3::zeros()).is_err());
    }

    #[test]
    fn cat_power_iteration_finds_eigendirections() {
        let (m, f) = cat_suspension();
        let s = f.exact_splitting.as_ref().unwrap();
        let opts = LineOptions::default();
        let p = Point::new(0.31, 0.77, 0.42);
        for (dir, exact) in [(Direction::Unstable, &s.e_u), (Direction::Stable, &s.e_s)] {
            let est = estimate_line(&m, &f.x, &p, dir, &opts).unwrap();
            let angle = line_angle(&m, &p, &est.dir, &exact.eval(&p).unwrap());
            assert!(angle < 1e-6, "{dir:?}: {angle}");
        }
    }

    #[test]
    fn exact_seed_is_a_fixed_point() {
        let (m, f) = cat_suspension();
        let s = f.exact_splitting.as_ref().unwrap();
        let p = Point::new(0.5, 0.5, 0.0);
        let seed = s.e_u.eval(&p).unwrap();
        let est = estimate_from_seed(&m, &f.x, &p, Direction::Unstable, &LineOptions::default(), &seed).unwrap();
        assert!(line_angle(&m, &p, &est.line.dir, &seed) < 1e-12);
    }

    #[test]
    fn cat_rates_fd_and_bracket() {
        let (m, f) = cat_suspension();
        let s = f.exact_splitting.as_ref().unwrap();
        let ru = growth_rate_bracket(&f.x, &s.e_u, &s.alpha_u).unwrap();
        let rs = growth_rate_bracket(&f.x, &s.e_s, &s.alpha_s).unwrap();
        let src = SplittingSource::for_flow(&f, LineOptions::default());
        for p in random_points(10, 4) {
            assert_abs_diff_eq!(ru.eval(&p).unwrap(), LN_LAMBDA, epsilon = 1e-12);
            assert_abs_diff_eq!(rs.eval(&p).unwrap(), -LN_LAMBDA, epsilon = 1e-12);
            let r = rates_at(&m, &f.x, &p, &src, &RateNorm::Chart, 1e-3, 1e-3).unwrap();
            assert_abs_diff_eq!(r.r_u, LN_LAMBDA, epsilon = 1e-6);
            assert_abs_diff_eq!(r.r_s, -LN_LAMBDA, epsilon = 1e-6);
        }
        // Flow direction with its dual covector: no normal growth.
        let dt = KForm::constant(1, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let r0 = growth_rate_bracket(&f.x, &f.x, &dt).unwrap();
        assert_eq!(r0.eval(&Point::new(0.1, 0.2, 0.3)).unwrap(), 0.0);
        // Broken normalization is a frame error.
        let bad = growth_rate_bracket(&f.x, &s.e_u, &s.alpha_u.scale(2.0)).unwrap();
        assert!(matches!(bad.eval(&Point::zeros()), Err(Error::Frame { .. })));
    }

    #[test]
    fn tangent_line_is_rejected() {
        let (m, f) = cat_suspension();
        let line = NormalLine {
            base: Point::zeros(),
            dir: Vector3::new(0.0, 0.0, 1.0),
        };
        assert!(growth_rate_fd(&m, &f.x, &line, 1e-3, 1e-3, &RateNorm::Chart).is_err());
        assert!(NormalLine::from_vector(&m, &f.x, &Point::zeros(), &Vector3::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn cat_domination_under_chart_norm() {
        let (m, f) = cat_suspension();
        let src = SplittingSource::for_flow(&f, LineOptions::default());
        let pts = random_points(16, 9);
        let rep = domination_report(&m, &f.x, &pts, &src, &RateNorm::Chart, 1e-3, 1e-3).unwrap();
        assert_abs_diff_eq!(rep.min_gap, 2.0 * LN_LAMBDA, epsilon = 1e-4);
        assert!(rep.dominated && rep.anosov_witnessed_by_this_norm);
    }

    #[test]
    fn t3_pa_is_dominated_under_euclidean_norm() {
        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let src = SplittingSource::for_flow(&f, LineOptions::default());
        let pts = random_points(6, 1);
        let rep = domination_report(&m, &f.x, &pts, &src, &RateNorm::Chart, 1e-3, 1e-3).unwrap();
        assert_eq!(rep.unconverged, 0, "{rep:?}");
        assert!(rep.dominated, "{rep:?}");
    }
}
