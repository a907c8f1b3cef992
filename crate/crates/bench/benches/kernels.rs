use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ktbill_core::dynamics::{closed_orbit_search, iterate_t_billiard, SearchPlan};
use ktbill_core::osculation::{fifth_order_gap, osculating_conic, CurveJet};
use ktbill_core::projectivity::{projectivity_residual, SamplePlan, SphereInvolutionSampler};
use ktbill_core::reflection::t_billiard_reflect;
use ktbill_core::{ConvexBody, OrientedLine, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn reflection(c: &mut Criterion) {
    let k = ConvexBody::superellipsoid(&[1.0, 0.8], 4.0).unwrap();
    let t = ConvexBody::ellipsoid_axes(&[1.0, 0.6]).unwrap();
    let line = OrientedLine::new(v(&[0.1, -0.2]), v(&[0.6, 0.8])).unwrap();
    c.bench_function("t_billiard_reflect/superellipse", |b| {
        b.iter(|| t_billiard_reflect(black_box(&k), &t, &line).unwrap())
    });
    c.bench_function("iterate_t_billiard/100", |b| {
        b.iter(|| iterate_t_billiard(black_box(&k), &t, &line, 100).unwrap())
    });
}

fn projectivity(c: &mut Criterion) {
    let t = ConvexBody::superellipsoid(&[1.0, 1.0], 4.0).unwrap();
    let f = SphereInvolutionSampler::from_chords(&t, &v(&[0.6, 0.8]), &v(&[-0.8, 0.6])).unwrap();
    let plan = SamplePlan::default();
    c.bench_function("projectivity_residual/2d", |b| {
        b.iter(|| projectivity_residual(black_box(&f), &plan).unwrap())
    });
    let t3 = ConvexBody::ellipsoid_axes(&[1.0, 0.8, 0.6]).unwrap();
    let f3 = SphereInvolutionSampler::from_chords(&t3, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.6, 0.8])).unwrap();
    c.bench_function("projectivity_residual/3d", |b| {
        b.iter(|| projectivity_residual(black_box(&f3), &plan).unwrap())
    });
}

fn osculation(c: &mut Criterion) {
    let k = ConvexBody::superellipsoid(&[1.0, 0.8], 4.0).unwrap();
    let p = k.gauss_inverse(&v(&[0.6, 0.8])).unwrap();
    c.bench_function("osculating_conic/boundary", |b| {
        b.iter(|| {
            let curve = CurveJet::boundary(black_box(&k), &p).unwrap();
            let conic = osculating_conic(&curve).unwrap();
            fifth_order_gap(&curve, &conic).unwrap()
        })
    });
}

fn search(c: &mut Criterion) {
    let k = ConvexBody::ellipsoid_axes(&[1.4, 1.0]).unwrap();
    let t = ConvexBody::superellipsoid(&[1.0, 0.8], 3.0).unwrap();
    let plan = SearchPlan {
        multistarts: 8,
        ..SearchPlan::default()
    };
    let mut group = c.benchmark_group("closed_orbit_search");
    group.sample_size(10);
    group.bench_function("m3", |b| b.iter(|| closed_orbit_search(black_box(&k), &t, 3, &plan).unwrap()));
    group.finish();
}

criterion_group!(benches, reflection, projectivity, osculation, search);
criterion_main!(benches);
