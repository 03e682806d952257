//! Throughput of the numerical kernels the verifiers are built from.

use bicontact_core::contact::{reeb_field, twisted_form};
use bicontact_core::dynamics::{estimate_line, linearize_flow, Direction, LineOptions};
use bicontact_core::fields::{contact_volume, ext_d, lie_derivative};
use bicontact_core::verifiers::run_verifier;
use bicontact_core::{cat_suspension, t3_pa, DerivSpec, Point, SampleGrid, VerifierOptions};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn calculus(c: &mut Criterion) {
    let p = Point::new(0.3, 0.7, 0.45);
    let (_, flow) = t3_pa(-1, 1, 0.3, 0.6).unwrap();
    let alpha = twisted_form(1);
    let d_exact = ext_d(&alpha).unwrap();
    let d_fd = ext_d(&alpha.with_deriv_spec(DerivSpec::central4(1e-4))).unwrap();
    let lie = lie_derivative(&flow.x, &alpha).unwrap();
    let vol = contact_volume(&alpha).unwrap();
    let reeb = reeb_field(&alpha).unwrap();
    c.bench_function("d alpha (jets)", |b| b.iter(|| d_exact.coeffs(black_box(&p)).unwrap()));
    c.bench_function("d alpha (order-4 differences)", |b| {
        b.iter(|| d_fd.coeffs(black_box(&p)).unwrap())
    });
    c.bench_function("lie derivative", |b| b.iter(|| lie.coeffs(black_box(&p)).unwrap()));
    c.bench_function("contact volume", |b| {
        b.iter(|| vol.scalar_coeff(black_box(&p)).unwrap())
    });
    c.bench_function("reeb field", |b| b.iter(|| reeb.eval(black_box(&p)).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let (m, f) = cat_suspension();
    let p = Point::new(0.2, 0.6, 0.3);
    c.bench_function("linearize flow, T = 1", |b| {
        b.iter(|| linearize_flow(&m, &f.x, black_box(&p), 1.0, 1e-3).unwrap())
    });
    let opts = LineOptions {
        horizon: 20.0,
        ..Default::default()
    };
    c.bench_function("power iteration, T = 20", |b| {
        b.iter(|| estimate_line(&m, &f.x, black_box(&p), Direction::Unstable, &opts).unwrap())
    });
}

fn verifiers(c: &mut Criterion) {
    let (m, f) = cat_suspension();
    let opts = VerifierOptions {
        grid: Some(SampleGrid::lattice(4)),
        ..Default::default()
    };
    let mut group = c.benchmark_group("verifiers on 4^3 points");
    group.sample_size(10);
    for id in ["metric1", "contcomp", "cartan"] {
        group.bench_function(id, |b| b.iter(|| run_verifier(id, &m, &f, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, calculus, dynamics, verifiers);
criterion_main!(benches);
