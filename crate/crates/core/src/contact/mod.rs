//! Contact forms, Reeb fields, bi-contact pairs, splitting frames, and the
//! taut-hyperbola / Cartan-structure checks.
//!
//! All 3-form residuals are coefficients against the chart volume
//! `dx∧dy∧dz` (times the model orientation), so tolerances are scale-free.

mod frame;
mod volume_pair;

pub use frame::{
    decompose_along_splitting, induced_growth_rates, FormSign, FrameDecomposition, FrameNormalization, FrameSample,
    SplittingFrame,
};
pub use volume_pair::{volume_preserving_pair, VolumePreservingPair};

use crate::error::{Error, Result};
use crate::fields::{contact_volume, derived, ext_d, jvec, wedge, Jet, KForm, VectorField};
use crate::grid::{par_map, Extremum};
use crate::manifolds::ChartModel;
use crate::Point;
use nalgebra::Vector3;
use serde::Serialize;

/// Sign of a contact form over a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactSign {
    Positive,
    Negative,
    Indefinite,
}

impl ContactSign {
    pub fn as_f64(self) -> f64 {
        match self {
            ContactSign::Positive => 1.0,
            ContactSign::Negative => -1.0,
            ContactSign::Indefinite => 0.0,
        }
    }
}

/// Result of [`check_contact`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactReport {
    pub sign: ContactSign,
    /// `min |α∧dα|` over the sample, relative to the reference volume; zero
    /// when the sign is indefinite.
    pub margin: f64,
    pub min_coefficient: Extremum,
    pub max_coefficient: Extremum,
    pub samples: usize,
}

/// Evaluates `α∧dα` over the sample against the oriented reference volume.
pub fn check_contact(model: &ChartModel, alpha: &KForm, points: &[Point]) -> Result<ContactReport> {
    let vol = contact_volume(alpha)?;
    let values = par_map(points, |p| Ok(vol.scalar_coeff(p)? * model.orientation))?;
    let min = Extremum::min_over(points, &values);
    let max = Extremum::max_over(points, &values);
    let (sign, margin) = if min.value > 0.0 {
        (ContactSign::Positive, min.value)
    } else if max.value < 0.0 {
        (ContactSign::Negative, -max.value)
    } else {
        (ContactSign::Indefinite, 0.0)
    };
    Ok(ContactReport {
        sign,
        margin,
        min_coefficient: min,
        max_coefficient: max,
        samples: points.len(),
    })
}

/// The Reeb field: `i_R dα = 0`, `α(R) = 1`.
///
/// With `dα` written as the vector `w = curl a`, `i_R dα = w × R`, so `R` is
/// the multiple of `w` with `a·R = 1`, i.e. `R = w / (a·w)` — the unique
/// solution of the 3×3 system wherever `α∧dα = a·w ≠ 0`. Evaluation fails
/// with a degenerate-contact error elsewhere.
pub fn reeb_field(alpha: &KForm) -> Result<VectorField> {
    if alpha.degree() != 1 {
        return Err(Error::BadDegree(alpha.degree()));
    }
    let da = ext_d(alpha)?;
    let src = derived(vec![alpha.src.clone(), da.src.clone()], 0, |p, v, _| {
        let (a, w) = (&v[0], &v[1]);
        let aw = jvec::dot(a, w);
        let scale = jvec::values(a).norm() * jvec::values(w).norm();
        if !(aw.value().abs() > 1e-12 * scale) {
            return Err(Error::degenerate("contact form (α∧dα = 0)", p));
        }
        Ok(jvec::scale(w, aw.recip()))
    });
    Ok(VectorField::from_source(src))
}

/// Angle between the kernels of two 1-forms at `p`, measured between the
/// covectors in the dual chart metric.
pub fn kernel_angle(model: &ChartModel, p: &Point, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let gi = model.metric(p).try_inverse().expect("metric is positive definite");
    let n = |v: &Vector3<f64>| v.dot(&(gi * v)).max(0.0).sqrt();
    let (na, nb) = (n(a), n(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (a, b) = (a / na, b / nb);
    let d = n(&(a - b)).min(n(&(a + b)));
    2.0 * (d / 2.0).min(1.0).asin()
}

/// Checked bi-contact pair supporting a flow.
#[derive(Debug, Clone, Serialize)]
pub struct BiContactPair {
    pub minus: ContactReport,
    pub plus: ContactReport,
    /// `max(|α⁻(X)|, |α⁺(X)|)` over the sample.
    pub tangency_residual: Extremum,
    /// Smallest angle between `ker α⁻` and `ker α⁺`.
    pub transversality_margin: Extremum,
    pub valid: bool,
    /// Names of the failed conditions, empty when valid.
    pub failures: Vec<String>,
}

/// Tolerance on `|α(X)|` for tangency.
pub const TANGENCY_TOL: f64 = 1e-9;

/// Checks contact signs (−, +), tangency of `X` to both kernels, and their
/// transversality.
pub fn verify_bicontact(
    model: &ChartModel,
    minus: &KForm,
    plus: &KForm,
    x: &VectorField,
    points: &[Point],
) -> Result<BiContactPair> {
    let cm = check_contact(model, minus, points)?;
    let cp = check_contact(model, plus, points)?;
    let per = par_map(points, |p| {
        let (am, ap, xv) = (minus.coeffs(p)?, plus.coeffs(p)?, x.eval(p)?);
        Ok((
            am.dot(&xv).abs().max(ap.dot(&xv).abs()),
            kernel_angle(model, p, &am, &ap),
        ))
    })?;
    let tangency = Extremum::max_over(points, &per.iter().map(|v| v.0).collect::<Vec<_>>());
    let transversality = Extremum::min_over(points, &per.iter().map(|v| v.1).collect::<Vec<_>>());
    let mut failures = Vec::new();
    if cm.sign != ContactSign::Negative {
        failures.push("alpha_minus is not a negative contact form".to_string());
    }
    if cp.sign != ContactSign::Positive {
        failures.push("alpha_plus is not a positive contact form".to_string());
    }
    if !(tangency.value < TANGENCY_TOL) {
        failures.push(format!(
            "flow is not tangent to both kernels (residual {:e})",
            tangency.value
        ));
    }
    if !(transversality.value > 0.0) {
        failures.push("contact planes are not transverse".to_string());
    }
    Ok(BiContactPair {
        minus: cm,
        plus: cp,
        tangency_residual: tangency,
        transversality_margin: transversality,
        valid: failures.is_empty(),
        failures,
    })
}

/// Residuals of `α₁∧dα₁ = −α₂∧dα₂` and `α₁∧dα₂ = −α₂∧dα₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TautHyperbolaReport {
    pub volume_residual: Extremum,
    pub cross_residual: Extremum,
    /// Smallest angle between the two kernels; zero flags a degenerate pair
    /// even when both identities hold.
    pub transversality_margin: Extremum,
}

impl TautHyperbolaReport {
    pub fn max_residual(&self) -> f64 {
        self.volume_residual.value.max(self.cross_residual.value)
    }
}

fn three_coeff_residuals(model: &ChartModel, forms: &[KForm], points: &[Point]) -> Result<Vec<Vec<f64>>> {
    par_map(points, |p| {
        forms
            .iter()
            .map(|f| Ok(f.scalar_coeff(p)? * model.orientation))
            .collect::<Result<Vec<_>>>()
    })
}

pub fn taut_hyperbola_check(
    model: &ChartModel,
    alpha1: &KForm,
    alpha2: &KForm,
    points: &[Point],
) -> Result<TautHyperbolaReport> {
    let d1 = ext_d(alpha1)?;
    let d2 = ext_d(alpha2)?;
    let forms = [
        wedge(alpha1, &d1)?,
        wedge(alpha2, &d2)?,
        wedge(alpha1, &d2)?,
        wedge(alpha2, &d1)?,
    ];
    let vals = three_coeff_residuals(model, &forms, points)?;
    let angles = par_map(points, |p| {
        Ok(kernel_angle(model, p, &alpha1.coeffs(p)?, &alpha2.coeffs(p)?))
    })?;
    let vol: Vec<f64> = vals.iter().map(|v| (v[0] + v[1]).abs()).collect();
    let cross: Vec<f64> = vals.iter().map(|v| (v[2] + v[3]).abs()).collect();
    Ok(TautHyperbolaReport {
        volume_residual: Extremum::max_over(points, &vol),
        cross_residual: Extremum::max_over(points, &cross),
        transversality_margin: Extremum::min_over(points, &angles),
    })
}

/// Taut-hyperbola residuals plus the mixed terms `α⁺∧dα⁻`, `α⁻∧dα⁺` and
/// the mutual Reeb inclusions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CartanReport {
    pub taut: TautHyperbolaReport,
    /// `max(|α⁺∧dα⁻|, |α⁻∧dα⁺|)`.
    pub mixed_residual: Extremum,
    /// `|α⁻(R_{α⁺})|`.
    pub reeb_plus_in_minus: Extremum,
    /// `|α⁺(R_{α⁻})|`.
    pub reeb_minus_in_plus: Extremum,
}

impl CartanReport {
    /// Largest structure residual; never smaller than the taut residuals, so
    /// a Cartan structure is always a taut contact hyperbola.
    pub fn max_residual(&self) -> f64 {
        self.taut.max_residual().max(self.mixed_residual.value)
    }

    pub fn max_reeb_residual(&self) -> f64 {
        self.reeb_plus_in_minus.value.max(self.reeb_minus_in_plus.value)
    }
}

pub fn cartan_check(model: &ChartModel, minus: &KForm, plus: &KForm, points: &[Point]) -> Result<CartanReport> {
    let taut = taut_hyperbola_check(model, minus, plus, points)?;
    let forms = [wedge(plus, &ext_d(minus)?)?, wedge(minus, &ext_d(plus)?)?];
    let vals = three_coeff_residuals(model, &forms, points)?;
    let mixed: Vec<f64> = vals.iter().map(|v| v[0].abs().max(v[1].abs())).collect();
    let (rp, rm) = (reeb_field(plus)?, reeb_field(minus)?);
    let incl = par_map(points, |p| {
        Ok((
            minus.coeffs(p)?.dot(&rp.eval(p)?).abs(),
            plus.coeffs(p)?.dot(&rm.eval(p)?).abs(),
        ))
    })?;
    Ok(CartanReport {
        taut,
        mixed_residual: Extremum::max_over(points, &mixed),
        reeb_plus_in_minus: Extremum::max_over(points, &incl.iter().map(|v| v.0).collect::<Vec<_>>()),
        reeb_minus_in_plus: Extremum::max_over(points, &incl.iter().map(|v| v.1).collect::<Vec<_>>()),
    })
}

/// Residual of the Reeb equations `max(|α(R) − 1|, ‖i_R dα‖)` at `p`.
pub fn reeb_residual(alpha: &KForm, reeb: &VectorField, p: &Point) -> Result<f64> {
    let a = alpha.coeffs(p)?;
    let w = ext_d(alpha)?.coeffs(p)?;
    let r = reeb.eval(p)?;
    Ok((a.dot(&r) - 1.0).abs().max(w.cross(&r).norm()))
}

/// The 1-form `cos 2πnz dx − sin 2πnz dy`, positive contact for `n > 0`.
pub fn twisted_form(n: i32) -> KForm {
    let k = 2.0 * std::f64::consts::PI * n as f64;
    KForm::one_form(move |x| {
        let ph = x[2] * k;
        [ph.cos(), -ph.sin(), Jet::constant(0.0, x[0].order())]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::lie_derivative;
    use crate::grid::{random_points, SampleGrid};
    use crate::manifolds::{cat_suspension, t3_pa};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn standard() -> KForm {
        KForm::one_form(|x| {
            [
                -x[1],
                Jet::constant(0.0, x[0].order()),
                Jet::constant(1.0, x[0].order()),
            ]
        })
    }

    #[test]
    fn twisted_form_contact_margin() {
        let m = ChartModel::torus3();
        let r = check_contact(&m, &twisted_form(1), &SampleGrid::new(32, 1000, 0).points()).unwrap();
        assert_eq!(r.sign, ContactSign::Positive);
        assert_abs_diff_eq!(r.margin, 2.0 * PI, epsilon = 1e-9);
        let dz = KForm::constant(1, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let r = check_contact(&m, &dz, &SampleGrid::new(4, 10, 0).points()).unwrap();
        assert_eq!(r.sign, ContactSign::Indefinite);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn cat_plus_contact_margin() {
        let (m, f) = cat_suspension();
        let r = check_contact(&m, &f.bicontact.unwrap().plus, &SampleGrid::new(8, 50, 0).points()).unwrap();
        assert_eq!(r.sign, ContactSign::Positive);
        assert_abs_diff_eq!(r.margin, 2.0 * ((3.0 + 5f64.sqrt()) / 2.0).ln(), epsilon = 1e-9);
    }

    #[test]
    fn reeb_fields_of_standard_forms() {
        let r = reeb_field(&twisted_form(1)).unwrap();
        for p in random_points(200, 6) {
            let z = 2.0 * PI * p.z;
            let expect = Vector3::new(z.cos(), -z.sin(), 0.0);
            assert!((r.eval(&p).unwrap() - expect).norm() < 1e-12);
            assert!(reeb_residual(&twisted_form(1), &r, &p).unwrap() < 1e-12);
        }
        let rs = reeb_field(&standard()).unwrap();
        assert!((rs.eval(&Point::new(0.3, 0.7, 0.1)).unwrap() - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        // The Reeb flow preserves its form.
        let l = lie_derivative(&rs, &standard()).unwrap();
        assert!(l.coeffs(&Point::new(0.3, 0.7, 0.1)).unwrap().norm() < 1e-12);
        let dz = KForm::constant(1, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(matches!(
            reeb_field(&dz).unwrap().eval(&Point::zeros()),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn bicontact_pairs() {
        let pts = SampleGrid::new(6, 30, 1).points();
        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let bc = f.bicontact.as_ref().unwrap();
        let pair = verify_bicontact(&m, &bc.minus, &bc.plus, &f.x, &pts).unwrap();
        assert!(pair.valid, "{:?}", pair.failures);
        assert!(pair.transversality_margin.value > 0.0);
        let same = verify_bicontact(&m, &bc.plus, &bc.plus, &f.x, &pts).unwrap();
        assert!(!same.valid);
        assert_eq!(same.transversality_margin.value, 0.0);

        let (m, f) = cat_suspension();
        let bc = f.bicontact.as_ref().unwrap();
        let pair = verify_bicontact(&m, &bc.minus, &bc.plus, &f.x, &pts).unwrap();
        assert!(pair.valid, "{:?}", pair.failures);
    }

    #[test]
    fn cat_pair_is_cartan_and_t3_pa_is_not() {
        let pts = SampleGrid::new(6, 30, 2).points();
        let (m, f) = cat_suspension();
        let bc = f.bicontact.as_ref().unwrap();
        let rep = cartan_check(&m, &bc.minus, &bc.plus, &pts).unwrap();
        assert!(rep.max_residual() < 1e-9, "{rep:?}");
        assert!(rep.max_reeb_residual() < 1e-9);

        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let bc = f.bicontact.as_ref().unwrap();
        let rep = cartan_check(&m, &bc.minus, &bc.plus, &pts).unwrap();
        // α⁺∧dα⁻ = −2π εε' cos 4πz
        assert_abs_diff_eq!(rep.mixed_residual.value, 2.0 * PI * 0.18, epsilon = 1e-3);
        assert!(rep.max_reeb_residual() > 1e-3);
    }

    #[test]
    fn taut_hyperbola_controls() {
        let pts = SampleGrid::new(4, 20, 3).points();
        let m = ChartModel::torus3();
        let rep = taut_hyperbola_check(&m, &twisted_form(1), &twisted_form(-1), &pts).unwrap();
        assert!(rep.max_residual() < 1e-12, "{rep:?}");
        let same = taut_hyperbola_check(&m, &twisted_form(1), &twisted_form(1).scale(-1.0), &pts).unwrap();
        assert_eq!(same.transversality_margin.value, 0.0);
        let (m, f) = cat_suspension();
        let bc = f.bicontact.as_ref().unwrap();
        let bump = KForm::one_form(|x| {
            let z = Jet::constant(0.0, x[0].order());
            [(x[0] * (2.0 * PI)).sin() * 0.05, z, z]
        });
        let rep = taut_hyperbola_check(&m, &bc.minus, &bc.plus.add(&bump).unwrap(), &pts).unwrap();
        assert!(rep.max_residual() > 1e-3);
    }
}
