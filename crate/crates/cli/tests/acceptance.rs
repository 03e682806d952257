//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! when any criterion fails. Every expected value is computed here from a
//! closed form or by an independent route, never read back from the code
//! under test.

use bicontact_core::contact::{reeb_field, twisted_form};
use bicontact_core::dynamics::{
    close_orbit, estimate_line, growth_rate_bracket, invariance_drift, lie_derivative_by_pullback, line_angle,
    orbit_integral, Direction, LineOptions,
};
use bicontact_core::fields::jvec::JVec;
use bicontact_core::fields::{ext_d, lie_derivative};
use bicontact_core::grid::random_points;
use bicontact_core::verifiers::{run_verifier, VolumeChoice};
use bicontact_core::{
    cat_suspension, t3_pa, DerivSpec, Jet, KForm, Point, VectorField, VerificationReport, VerifierOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

type Outcome = Result<String, String>;

/// `(3 + √5)/2`, the expanding eigenvalue of `[[2,1],[1,1]]`.
fn lambda() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn one(
    id: &str,
    model: (bicontact_core::ChartModel, bicontact_core::ModelFlow),
    opts: &VerifierOptions,
) -> Result<Vec<VerificationReport>, String> {
    run_verifier(id, &model.0, &model.1, opts).map_err(|e| format!("{id}: {e}"))
}

fn residual(r: &VerificationReport, name: &str) -> Result<f64, String> {
    r.get_residual(name)
        .map(|x| x.value)
        .ok_or_else(|| format!("no residual `{name}`"))
}

fn margin(r: &VerificationReport, name: &str) -> Result<f64, String> {
    r.get_margin(name)
        .map(|x| x.value)
        .ok_or_else(|| format!("no margin `{name}`"))
}

fn value(r: &VerificationReport, name: &str) -> Result<f64, String> {
    r.get_value(name).ok_or_else(|| format!("no value `{name}`"))
}

/// `Σ a_i sin(2π k_i·x + φ_i)` with random amplitudes, frequencies, phases.
fn random_trig(rng: &mut ChaCha8Rng) -> impl Fn(&[Jet; 3]) -> Jet + Send + Sync + Clone + 'static {
    let modes: Vec<(f64, [f64; 3], f64)> = (0..3)
        .map(|_| {
            let k = [0; 3].map(|_: i32| rng.random_range(-2..=2) as f64);
            (rng.random_range(-1.0..1.0), k, rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    move |x: &[Jet; 3]| {
        let mut acc = Jet::constant(0.0, x[0].order());
        for (a, k, ph) in &modes {
            acc += ((x[0] * k[0] + x[1] * k[1] + x[2] * k[2]) * (2.0 * PI) + *ph).sin() * *a;
        }
        acc
    }
}

fn random_form(rng: &mut ChaCha8Rng, deg: usize) -> KForm {
    let (a, b, c) = (random_trig(rng), random_trig(rng), random_trig(rng));
    KForm::new(deg, move |x| -> JVec {
        let z = Jet::constant(0.0, x[0].order());
        match deg {
            0 | 3 => [a(x), z, z],
            _ => [a(x), b(x), c(x)],
        }
    })
    .expect("degree in range")
}

fn calculus_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (fx, fy, fz) = (random_trig(&mut rng), random_trig(&mut rng), random_trig(&mut rng));
    let x = VectorField::new(move |p| [fx(p), fy(p), fz(p)]);
    let mut worst_ratio = f64::INFINITY;
    let mut worst_dd = 0.0_f64;
    for i in 0..5 {
        let w = random_form(&mut rng, i % 4);
        let p = Point::new(rng.random(), rng.random(), rng.random());
        let exact = lie_derivative(&x, &w)
            .map_err(|e| e.to_string())?
            .coeffs(&p)
            .map_err(|e| e.to_string())?;
        let err = |h: f64| -> Result<f64, String> {
            Ok((lie_derivative_by_pullback(&x, &w, &p, h, h / 8.0).map_err(|e| e.to_string())? - exact).norm())
        };
        let ratio = err(0.02)? / err(0.01)?;
        worst_ratio = worst_ratio.min(ratio);
        if w.degree() < 2 {
            let dd = ext_d(&ext_d(&w).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            for q in random_points(20, i as u64) {
                worst_dd = worst_dd.max(dd.coeffs(&q).map_err(|e| e.to_string())?.norm());
            }
        }
    }
    ensure(worst_ratio >= 3.5, format!("halving ratio {worst_ratio:.3} < 3.5"))?;
    ensure(worst_dd < 1e-8, format!("|d d w| = {worst_dd:e}"))?;
    Ok(format!("min halving ratio {worst_ratio:.3}, max |ddw| {worst_dd:.1e}"))
}

fn reeb_oracle() -> Outcome {
    let exact = reeb_field(&twisted_form(1)).map_err(|e| e.to_string())?;
    let fd = reeb_field(&twisted_form(1).with_deriv_spec(DerivSpec::central4(1e-4))).map_err(|e| e.to_string())?;
    let (mut e_exact, mut e_fd) = (0.0_f64, 0.0_f64);
    for p in random_points(500, 3) {
        let z = 2.0 * PI * p.z;
        let want = Point::new(z.cos(), -z.sin(), 0.0);
        e_exact = e_exact.max((exact.eval(&p).map_err(|e| e.to_string())? - want).norm());
        e_fd = e_fd.max((fd.eval(&p).map_err(|e| e.to_string())? - want).norm());
    }
    ensure(e_exact < 1e-8 && e_fd < 1e-5, format!("errors {e_exact:e} / {e_fd:e}"))?;
    Ok(format!("max error exact {e_exact:.1e}, order-4 differences {e_fd:.1e}"))
}

fn cat_spectra() -> Outcome {
    let (m, f) = cat_suspension();
    let seed = f.orbit("fixed_point").map_err(|e| e.to_string())?;
    let o = close_orbit(&m, &f.x, seed, 1e-3).map_err(|e| e.to_string())?;
    let s = f.exact_splitting.as_ref().ok_or("no splitting")?;
    let r_u = growth_rate_bracket(&f.x, &s.e_u, &s.alpha_u).map_err(|e| e.to_string())?;
    let integral = orbit_integral(&o, &r_u).map_err(|e| e.to_string())?;
    let (du, di) = ((o.lambda_u - lambda()).abs(), (integral.exp() - o.lambda_u).abs());
    ensure(
        du < 1e-6 && di < 1e-6,
        format!("lambda_u {} (off by {du:e}), exp integral off by {di:e}", o.lambda_u),
    )?;
    Ok(format!(
        "lambda_u = {:.9}, |exp(int r_u) - lambda_u| = {di:.1e}",
        o.lambda_u
    ))
}

fn divergence_identity() -> Outcome {
    let worst = |r: &VerificationReport| r.residuals.iter().map(|x| x.value).fold(0.0_f64, f64::max);
    let inv = one("metric1", cat_suspension(), &VerifierOptions::default())?;
    let modulated = one(
        "metric1",
        cat_suspension(),
        &VerifierOptions {
            volume: VolumeChoice::ExpSinX,
            ..Default::default()
        },
    )?;
    let (a, b) = (worst(&inv[0]), worst(&modulated[0]));
    ensure(inv[0].passed() && a < 1e-8, format!("invariant volume residual {a:e}"))?;
    ensure(
        modulated[0].passed() && b < 1e-5,
        format!("exp(sin 2 pi x) volume residual {b:e}"),
    )?;
    Ok(format!("max residual {a:.1e} (invariant), {b:.1e} (exp(sin 2 pi x))"))
}

fn contact_volume_comparison() -> Outcome {
    let reps = one("contcomp", cat_suspension(), &VerifierOptions::default())?;
    ensure(reps.len() == 2, "expected reports for both forms")?;
    let gap = 2.0 * lambda().ln();
    let mut worst = 0.0_f64;
    for r in &reps {
        for name in ["contact_volume_comparison", "volume_divergence_comparison"] {
            worst = worst.max(residual(r, name)?);
        }
        for name in ["min_rate_gap", "max_rate_gap"] {
            let g = value(r, name)?;
            ensure((g - gap).abs() < 1e-6, format!("{}: {name} = {g}", r.subject))?;
        }
        ensure(r.passed(), format!("{} did not pass", r.subject))?;
    }
    ensure(worst < 1e-9, format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e} for both forms, rate gap 2 ln lambda"))
}

fn contact_characterization() -> Outcome {
    let gap = 2.0 * lambda().ln();
    let cat = &one("contchar", cat_suspension(), &VerifierOptions::default())?[0];
    let (lo, hi) = (margin(cat, "lower_inequality")?, margin(cat, "upper_inequality")?);
    ensure(cat.passed(), "cat suspension did not pass")?;
    ensure(
        (lo - gap).abs() < 1e-4 && (hi - gap).abs() < 1e-4,
        format!("margins {lo} {hi}, expected {gap}"),
    )?;
    let t3 = &one(
        "contchar",
        t3_pa(-1, 1, 0.3, 0.6).map_err(|e| e.to_string())?,
        &VerifierOptions::default(),
    )?[0];
    ensure(!t3.passed(), "t3_pA unexpectedly passed")?;
    Ok(format!(
        "cat margins {lo:.6} / {hi:.6}; t3_pA fails (lower margin {:.1e})",
        margin(t3, "lower_inequality")?
    ))
}

fn flow_averaging() -> Outcome {
    let r = &one("claims", cat_suspension(), &VerifierOptions::default())?[0];
    let inv = residual(r, "unstable_invariance")?;
    ensure(inv < 1e-8, format!("invariance residual {inv:e}"))?;
    let expected = lambda().powi(-2);
    let mut factors = Vec::new();
    for t in [1, 2, 3] {
        let k = value(r, &format!("decay_factor_T{t}"))?;
        ensure(
            (k / expected - 1.0).abs() < 0.1,
            format!("decay factor at T = {t}: {k}"),
        )?;
        factors.push(format!("{k:.4}"));
    }
    ensure(r.passed(), "claims did not pass")?;
    Ok(format!(
        "invariance {inv:.1e}, decay factors {} vs {expected:.4}",
        factors.join(", ")
    ))
}

fn reeb_and_push() -> Outcome {
    let reeb = &one("reeb", cat_suspension(), &VerifierOptions::default())?[0];
    let inc = residual(reeb, "reeb_inclusion")?;
    ensure(reeb.passed() && inc < 1e-8, format!("Reeb inclusion {inc:e}"))?;
    let push = &one(
        "push",
        cat_suspension(),
        &VerifierOptions {
            s_values: vec![0.05],
            ..Default::default()
        },
    )?[0];
    let (leg, tr) = (
        residual(push, "legendrian_s0.05")?,
        margin(push, "transversality_s0.05")?,
    );
    ensure(
        push.passed() && leg < 1e-6 && tr > 0.0,
        format!("Legendrian {leg:e}, transversality {tr:e}"),
    )?;
    let zero = run_verifier(
        "push",
        &cat_suspension().0,
        &cat_suspension().1,
        &VerifierOptions {
            s_values: vec![0.0],
            ..Default::default()
        },
    );
    ensure(zero.is_err(), "s = 0 was accepted")?;
    Ok(format!(
        "inclusion {inc:.1e}; at s = 0.05 Legendrian {leg:.1e}, transversality {tr:.3e}; s = 0 rejected"
    ))
}

fn cartan_equations() -> Outcome {
    let r = &one("cartan", cat_suspension(), &VerifierOptions::default())?[0];
    let mut worst_id = 0.0_f64;
    for n in ["taut_volume", "taut_cross", "mixed_terms"] {
        worst_id = worst_id.max(residual(r, n)?);
    }
    let mut worst_eq = 0.0_f64;
    for n in [
        "reeb_plus_in_frame",
        "minus_coefficient_relation",
        "reeb_minus_in_frame",
        "coefficient_transport",
    ] {
        worst_eq = worst_eq.max(residual(r, n)?);
    }
    let integral = residual(r, "periodic_integral_fixed_point")?;
    ensure(worst_id < 1e-9, format!("Cartan identities {worst_id:e}"))?;
    ensure(worst_eq < 1e-8, format!("frame equations {worst_eq:e}"))?;
    ensure(integral < 1e-8, format!("periodic integral {integral:e}"))?;
    let t3 = &one(
        "cartan",
        t3_pa(-1, 1, 0.3, 0.6).map_err(|e| e.to_string())?,
        &VerifierOptions::default(),
    )?[0];
    let mixed = residual(t3, "mixed_terms")?;
    ensure(mixed > 1e-3, format!("t3_pA mixed terms {mixed:e}"))?;
    Ok(format!(
        "identities {worst_id:.1e}, equations {worst_eq:.1e}, integral {integral:.1e}; t3_pA mixed terms {mixed:.4}"
    ))
}

fn splitting_estimation() -> Outcome {
    let (m, f) = cat_suspension();
    let s = f.exact_splitting.as_ref().ok_or("no splitting")?;
    let opts = LineOptions {
        horizon: 20.0,
        ..Default::default()
    };
    let (mut angle, mut drift) = (0.0_f64, 0.0_f64);
    for p in random_points(16, 5) {
        for (dir, exact) in [(Direction::Unstable, &s.e_u), (Direction::Stable, &s.e_s)] {
            let line = estimate_line(&m, &f.x, &p, dir, &opts).map_err(|e| e.to_string())?;
            angle = angle.max(line_angle(
                &m,
                &p,
                &line.dir,
                &exact.eval(&p).map_err(|e| e.to_string())?,
            ));
            drift = drift.max(invariance_drift(&m, &f.x, &p, dir, &opts, 0.1).map_err(|e| e.to_string())?);
        }
    }
    ensure(
        angle < 1e-6 && drift < 1e-7,
        format!("angle {angle:e}, drift {drift:e}"),
    )?;
    Ok(format!(
        "max angle {angle:.1e}, drift {drift:.1e} per unit time at horizon 20"
    ))
}

const FULL_SUITE: &str = r#"
[model]
name = "cat_suspension"

[defaults]
seed = 11

[[verifiers]]
id = "metric1"
[[verifiers]]
id = "contcomp"
[[verifiers]]
id = "contchar"
[[verifiers]]
id = "domination"
[[verifiers]]
id = "claims"
[[verifiers]]
id = "reeb"
[[verifiers]]
id = "push"
[[verifiers]]
id = "cartan"
"#;

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, FULL_SUITE).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "4"].into_iter().enumerate() {
        let out = dir.path().join(format!("report{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_bicontact"))
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--seed", "5", "--workers", workers, "--out"])
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), format!("run exited with {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], "reports differ")?;
    Ok(format!(
        "two full-suite runs (1 and 4 workers) gave identical {}-byte reports",
        outputs[0].len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("exterior calculus convergence", calculus_convergence),
        ("Reeb field oracle", reeb_oracle),
        ("cat suspension spectra", cat_spectra),
        ("divergence identity", divergence_identity),
        ("contact and volume comparison", contact_volume_comparison),
        ("contact characterization of Anosov flows", contact_characterization),
        ("flow averaging", flow_averaging),
        ("Reeb inclusion and Legendrian push", reeb_and_push),
        ("Cartan structure equations", cartan_equations),
        ("splitting estimation", splitting_estimation),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
