//! Bi-contact pair of a volume-preserving flow built from the invariant
//! volume: `α_s := Ω(·, e_u, X)`, `α⁺ := α_u − α_s`, and `α⁻` defining
//! `span(X, e_u − e_s)`, whose Reeb field of `α⁺` lies in `ker α⁻`.

use super::{reeb_field, verify_bicontact, BiContactPair, FrameDecomposition, FrameNormalization};
use crate::dynamics::growth_rate_bracket;
use crate::error::{Error, Result};
use crate::fields::{divergence, ext_d, interior, pair_two_form, KForm, ScalarField, VectorField};
use crate::grid::{par_map, Extremum};
use crate::manifolds::{ChartModel, ModelFlow};
use crate::Point;
use serde::Serialize;

/// Output of [`volume_preserving_pair`].
#[derive(Debug, Clone)]
pub struct VolumePreservingPair {
    pub e_s: VectorField,
    pub e_u: VectorField,
    pub alpha_s: KForm,
    pub alpha_u: KForm,
    pub alpha_x: KForm,
    pub minus: KForm,
    pub plus: KForm,
    pub r_s: ScalarField,
    pub r_u: ScalarField,
    pub reeb_plus: VectorField,
    pub pair: BiContactPair,
    pub diagnostics: VolumePairDiagnostics,
}

/// Sample maxima of the construction's defining relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumePairDiagnostics {
    /// `|div_X Ω|`: the volume must be invariant.
    pub divergence: Extremum,
    /// `min r_u`, which must be positive.
    pub min_r_u: Extremum,
    /// `|r_s + r_u|`.
    pub rate_sum: Extremum,
    /// `|dα⁻(e_u − e_s, X) − (r_s − r_u)|`.
    pub included_residual: Extremum,
    /// `max dα⁻(e_u − e_s, X)`, which must be negative.
    pub included_value: Extremum,
    /// `|α⁻(R_{α⁺})|`.
    pub reeb_inclusion: Extremum,
}

/// Builds the pair from the flow's invariant volume `omega` and exact
/// splitting. `α_u` comes from the chart-unit frame of the splitting,
/// `α_s(v) = Ω(v, e_u, X)` with `e_s` rescaled so `α_s(e_s) = 1`, and
/// `α⁻ = α_u + α_s` (so `α⁻(e_s) = α⁻(e_u) = 1`).
pub fn volume_preserving_pair(
    model: &ChartModel,
    flow: &ModelFlow,
    omega: &KForm,
    points: &[Point],
) -> Result<VolumePreservingPair> {
    let split = flow
        .exact_splitting
        .as_ref()
        .ok_or_else(|| Error::Hypothesis("the volume-preserving pair needs an invariant splitting".into()))?;
    if omega.degree() != 3 {
        return Err(Error::BadDegree(omega.degree()));
    }
    let x = &flow.x;
    let frame = FrameDecomposition::from_line_fields(model, x, &split.e_s, &split.e_u, FrameNormalization::ChartUnit);
    let e_u = frame.e_u.clone();
    let alpha_u = frame.alpha_u.clone();
    // α_s(v) = Ω(v, e_u, X): contract the last two slots.
    let alpha_s = interior(&e_u, &interior(x, omega)?)?.scale(-1.0);
    let norm_s = alpha_s.apply(&frame.e_s)?;
    let e_s = frame.e_s.scaled(&norm_s.map(|j| j.recip()));
    let plus = alpha_u.sub(&alpha_s)?;
    let minus = alpha_u.add(&alpha_s)?;
    let r_u = growth_rate_bracket(x, &e_u, &alpha_u)?;
    let r_s = growth_rate_bracket(x, &e_s, &alpha_s)?;
    let reeb_plus = reeb_field(&plus)?;
    let div = divergence(x, omega)?;
    let included = pair_two_form(&ext_d(&minus)?, &e_u.sub(&e_s), x)?;

    let rows = par_map(points, |p| {
        let (ru, rs) = (r_u.eval(p)?, r_s.eval(p)?);
        let inc = included.eval(p)?;
        Ok([
            div.eval(p)?.abs(),
            ru,
            (rs + ru).abs(),
            (inc - (rs - ru)).abs(),
            inc,
            minus.coeffs(p)?.dot(&reeb_plus.eval(p)?).abs(),
        ])
    })?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    let diagnostics = VolumePairDiagnostics {
        divergence: Extremum::max_over(points, &col(0)),
        min_r_u: Extremum::min_over(points, &col(1)),
        rate_sum: Extremum::max_over(points, &col(2)),
        included_residual: Extremum::max_over(points, &col(3)),
        included_value: Extremum::max_over(points, &col(4)),
        reeb_inclusion: Extremum::max_over(points, &col(5)),
    };
    if !(diagnostics.min_r_u.value > 0.0) {
        return Err(Error::Hypothesis(format!(
            "unstable growth rate is not positive at {:?}",
            diagnostics.min_r_u.point
        )));
    }
    let pair = verify_bicontact(model, &minus, &plus, x, points)?;
    Ok(VolumePreservingPair {
        e_s,
        e_u,
        alpha_s,
        alpha_u,
        alpha_x: frame.alpha_x,
        minus,
        plus,
        r_s,
        r_u,
        reeb_plus,
        pair,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampleGrid;
    use crate::manifolds::{cat_suspension, t3_pa};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_pair_from_invariant_volume() {
        let (m, f) = cat_suspension();
        let pts = SampleGrid::new(5, 30, 4).points();
        let omega = f.invariant_volume.clone().unwrap();
        let vp = volume_preserving_pair(&m, &f, &omega, &pts).unwrap();
        let d = vp.diagnostics;
        assert!(d.reeb_inclusion.value < 1e-8, "{d:?}");
        assert!(d.rate_sum.value < 1e-10, "{d:?}");
        let l = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_abs_diff_eq!(d.included_value.value, -2.0 * l, epsilon = 1e-8);
        assert!(vp.pair.valid, "{:?}", vp.pair.failures);
        // The construction reproduces the model's own pair.
        let bc = f.bicontact.as_ref().unwrap();
        for p in &pts[..10] {
            assert!((vp.plus.coeffs(p).unwrap() - bc.plus.coeffs(p).unwrap()).norm() < 1e-12);
        }

        // Doubling Ω doubles α_s; the Reeb inclusion survives.
        let vp2 = volume_preserving_pair(&m, &f, &omega.scale(2.0), &pts).unwrap();
        assert!(vp2.diagnostics.reeb_inclusion.value < 1e-8);
        let p = pts[7];
        assert!((vp2.alpha_s.coeffs(&p).unwrap() - vp.alpha_s.coeffs(&p).unwrap() * 2.0).norm() < 1e-12);
    }

    #[test]
    fn needs_a_splitting() {
        let (m, f) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
        let omega = KForm::reference_volume();
        assert!(matches!(
            volume_preserving_pair(&m, &f, &omega, &[Point::zeros()]),
            Err(Error::Hypothesis(_))
        ));
    }
}
