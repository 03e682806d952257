use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::manifolds::{ChartModel, Crossing};
use crate::Point;
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Sampled solution curve in canonical coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// `(time, canonical point)` pairs, equally spaced in time.
    pub samples: Vec<(f64, Point)>,
    /// Signed time step actually used (`T / n`).
    pub step: f64,
    /// `(sample index, crossing)` for every step that left the box.
    pub crossings: Vec<(usize, Crossing)>,
}

impl Trajectory {
    pub fn start(&self) -> Point {
        self.samples[0].1
    }

    pub fn end(&self) -> Point {
        self.samples[self.samples.len() - 1].1
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    /// Composite Simpson rule for values sampled at the trajectory times.
    /// Needs an even number of intervals.
    pub fn simpson(&self, values: &[f64]) -> Result<f64> {
        simpson(values, self.step)
    }
}

pub(crate) fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len().saturating_sub(1);
    if n == 0 {
        return Ok(0.0);
    }
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "Simpson quadrature needs an even number of intervals, got {n}"
        )));
    }
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

/// Chart derivative of the time-`t` flow map, transport across gluings
/// included, so that `m` maps `T_start M` to `T_end M` in canonical charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowJacobian {
    pub t: f64,
    pub m: Matrix3<f64>,
    pub start: Point,
    pub end: Point,
}

fn check_step(t: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integrator step must be positive, got {step}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("integration time must be finite, got {t}")));
    }
    Ok((t.abs() / step).ceil() as usize)
}

/// Number of RK4 steps used for time `t` at nominal `step`, rounded up to an
/// even count (so trajectories are Simpson-ready).
pub fn even_steps(t: f64, step: f64) -> Result<usize> {
    let n = check_step(t, step)?;
    Ok(n + n % 2)
}

fn field_at(x: &VectorField, p: &Point) -> Result<Vector3<f64>> {
    let v = x.eval(p)?;
    if v.norm_squared() == 0.0 || !v.iter().all(|c| c.is_finite()) {
        return Err(Error::ZeroField([p.x, p.y, p.z]));
    }
    Ok(v)
}

fn rk4(x: &VectorField, p: &Point, h: f64) -> Result<Point> {
    let k1 = field_at(x, p)?;
    let k2 = field_at(x, &(p + k1 * (h / 2.0)))?;
    let k3 = field_at(x, &(p + k2 * (h / 2.0)))?;
    let k4 = field_at(x, &(p + k3 * h))?;
    Ok(p + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0))
}

fn rk4_variational(x: &VectorField, p: &Point, m: &Matrix3<f64>, h: f64) -> Result<(Point, Matrix3<f64>)> {
    let eval = |q: &Point| -> Result<(Vector3<f64>, Matrix3<f64>)> {
        let (v, j) = x.value_and_jacobian(q)?;
        if v.norm_squared() == 0.0 {
            return Err(Error::ZeroField([q.x, q.y, q.z]));
        }
        Ok((v, j))
    };
    let (k1, j1) = eval(p)?;
    let l1 = j1 * m;
    let (k2, j2) = eval(&(p + k1 * (h / 2.0)))?;
    let l2 = j2 * (m + l1 * (h / 2.0));
    let (k3, j3) = eval(&(p + k2 * (h / 2.0)))?;
    let l3 = j3 * (m + l2 * (h / 2.0));
    let (k4, j4) = eval(&(p + k3 * h))?;
    let l4 = j4 * (m + l3 * h);
    Ok((
        p + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0),
        m + (l1 + 2.0 * l2 + 2.0 * l3 + l4) * (h / 6.0),
    ))
}

fn integrate_n(model: &ChartModel, x: &VectorField, p: &Point, t: f64, n: usize) -> Result<Trajectory> {
    let (mut q, _) = model.canonicalize_with_crossing(p);
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    let mut samples = Vec::with_capacity(n + 1);
    let mut crossings = Vec::new();
    samples.push((0.0, q));
    for i in 1..=n {
        let lifted = rk4(x, &q, h)?;
        let (canon, c) = model.canonicalize_with_crossing(&lifted);
        if !c.is_identity() {
            crossings.push((i, c));
        }
        q = canon;
        samples.push((i as f64 * h, q));
    }
    Ok(Trajectory {
        samples,
        step: h,
        crossings,
    })
}

/// Classical RK4 for time `t` (negative integrates backward) with a step no
/// larger than `step`, canonicalizing after each step.
pub fn integrate_flow(model: &ChartModel, x: &VectorField, p: &Point, t: f64, step: f64) -> Result<Trajectory> {
    let n = check_step(t, step)?;
    integrate_n(model, x, p, t, n)
}

/// As [`integrate_flow`] with an even number of steps.
pub fn integrate_flow_even(model: &ChartModel, x: &VectorField, p: &Point, t: f64, step: f64) -> Result<Trajectory> {
    let n = even_steps(t, step)?;
    integrate_n(model, x, p, t, n)
}

/// Endpoint of the flow in canonical coordinates.
pub fn flow_point(model: &ChartModel, x: &VectorField, p: &Point, t: f64, step: f64) -> Result<Point> {
    let n = check_step(t, step)?;
    let (mut q, _) = model.canonicalize_with_crossing(p);
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    for _ in 0..n {
        q = model.canonicalize(&rk4(x, &q, h)?);
    }
    Ok(q)
}

/// Endpoint of the flow on the universal cover of the chart: no
/// canonicalization, so the result moves continuously with `p` and `t`.
/// Valid for fields written equivariantly in chart coordinates (all shipped
/// models).
pub fn flow_point_lifted(x: &VectorField, p: &Point, t: f64, step: f64) -> Result<Point> {
    let n = check_step(t, step)?;
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    let mut q = *p;
    for _ in 0..n {
        q = rk4(x, &q, h)?;
    }
    Ok(q)
}

/// Integrates the variational equation `Ṁ = DX(φ^t p) M`, `M(0) = I`,
/// applying the transport matrix at every crossing.
pub fn linearize_flow(model: &ChartModel, x: &VectorField, p: &Point, t: f64, step: f64) -> Result<FlowJacobian> {
    let n = check_step(t, step)?;
    let (start, _) = model.canonicalize_with_crossing(p);
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    let (mut q, mut m) = (start, Matrix3::identity());
    for _ in 0..n {
        let (lifted, m_next) = rk4_variational(x, &q, &m, h)?;
        let (canon, c) = model.canonicalize_with_crossing(&lifted);
        m = if c.is_identity() {
            m_next
        } else {
            model.transport_matrix(c) * m_next
        };
        q = canon;
    }
    Ok(FlowJacobian { t, m, start, end: q })
}

/// As [`linearize_flow`] on the universal cover of the chart: no
/// canonicalization and no transport, so `end` and `m` vary continuously
/// with `p` and `t`.
pub fn linearize_flow_lifted(x: &VectorField, p: &Point, t: f64, step: f64) -> Result<FlowJacobian> {
    let n = check_step(t, step)?;
    let h = if n == 0 { 0.0 } else { t / n as f64 };
    let (mut q, mut m) = (*p, Matrix3::identity());
    for _ in 0..n {
        (q, m) = rk4_variational(x, &q, &m, h)?;
    }
    Ok(FlowJacobian {
        t,
        m,
        start: *p,
        end: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{cat_suspension, t3_pa};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_flow_crosses_the_gluing() {
        let (m, f) = cat_suspension();
        let tr = integrate_flow(&m, &f.x, &Point::new(0.1, 0.2, 0.0), 1.0, 1e-2).unwrap();
        assert_abs_diff_eq!(tr.end(), Point::new(0.4, 0.3, 0.0), epsilon = 1e-12);
        assert_eq!(tr.crossings.len(), 1);
        assert_eq!(tr.crossings[0].1.t_shift, 1);
    }

    #[test]
    fn zero_time_is_a_single_sample() {
        let (m, f) = cat_suspension();
        let p = Point::new(0.3, 0.1, 0.7);
        let tr = integrate_flow(&m, &f.x, &p, 0.0, 1e-2).unwrap();
        assert_eq!(tr.samples, vec![(0.0, p)]);
        let j = linearize_flow(&m, &f.x, &p, 0.0, 1e-2).unwrap();
        assert_eq!(j.m, Matrix3::identity());
    }

    #[test]
    fn cat_linearization_is_the_monodromy() {
        let (m, f) = cat_suspension();
        let j = linearize_flow(&m, &f.x, &Point::new(0.3, 0.6, 0.25), 1.0, 1e-2).unwrap();
        let expected = Matrix3::new(2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(j.m, expected, epsilon = 1e-12);
        for t in [0.5, 2.0, 3.7, 5.0] {
            let j = linearize_flow(&m, &f.x, &Point::new(0.3, 0.6, 0.25), t, 1e-2).unwrap();
            assert_abs_diff_eq!(j.m.determinant(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn forward_then_backward_returns() {
        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let step = 1e-2;
        let p = Point::new(0.2, 0.7, 0.4);
        let q = flow_point(&m, &f.x, &p, 1.5, step).unwrap();
        let back = flow_point(&m, &f.x, &q, -1.5, step).unwrap();
        assert!(m.distance(&back, &p) < 10.0 * step.powi(4), "{}", m.distance(&back, &p));
    }

    #[test]
    fn rejects_bad_steps() {
        let (m, f) = cat_suspension();
        assert!(integrate_flow(&m, &f.x, &Point::zeros(), 1.0, 0.0).is_err());
        assert!(integrate_flow(&m, &f.x, &Point::zeros(), f64::NAN, 0.1).is_err());
        let zero = VectorField::constant(Vector3::zeros());
        assert!(matches!(
            integrate_flow(&m, &zero, &Point::zeros(), 1.0, 0.1),
            Err(Error::ZeroField(_))
        ));
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let h = 0.25;
        let v: Vec<f64> = (0..=4).map(|i| (i as f64 * h).powi(3)).collect();
        assert_abs_diff_eq!(simpson(&v, h).unwrap(), 0.25, epsilon = 1e-15);
        assert!(simpson(&v[..4], h).is_err());
    }
}
