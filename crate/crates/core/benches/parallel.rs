//! Throughput of the data-parallel fan-outs versus a single thread.
//!
//! The two hot spots that fan out through `par::map_indexed` — building one
//! degree layer of the integral tables and rasterizing the characteristic
//! polynomial — are each measured twice: on the default rayon pool and
//! inside a one-thread pool. With the `parallel` feature disabled
//! (`cargo bench --no-default-features`) both variants run the plain
//! sequential fallback, which is how the fallback itself is benchmarked.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use spps_core::grid::{Grid, Quadrature, SampledFunction};
use spps_core::problem::{BoundaryConditions, Coefficients};
use spps_core::series::{build_basis_endpoint, BuildOptions};
use spps_core::spectral::{
    characteristic_polynomial, eigencurve_raster, AxisPart, AxisSpec, CharPolynomial,
    RasterOptions,
};
use std::f64::consts::PI;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(feature = "parallel")]
fn one_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
    })
    .install(f)
}

#[cfg(not(feature = "parallel"))]
fn one_thread<T>(f: impl FnOnce() -> T) -> T {
    f()
}

fn table_problem() -> Coefficients {
    let grid = Grid::new(0.0, PI, 1000).unwrap();
    let one = SampledFunction::constant(grid, cx(1.0, 0.0));
    let q = SampledFunction::from_real_fn(grid, |x| x.cos());
    let r1 = SampledFunction::from_real_fn(grid, |x| (x * x).cos());
    let r2 = SampledFunction::from_real_fn(grid, |x| x.cos());
    Coefficients::new(one, q, vec![r1, r2], None).unwrap()
}

fn bench_table_build(c: &mut Criterion) {
    let coeffs = table_problem();
    let opts = BuildOptions {
        quadrature: Quadrature::Stencil { points: 6 },
        ..BuildOptions::new(12)
    };
    let mut group = c.benchmark_group("table_build");
    group.sample_size(20);
    group.bench_function("default_pool", |b| {
        b.iter(|| build_basis_endpoint(&coeffs, &opts).unwrap())
    });
    group.bench_function("one_thread", |b| {
        b.iter(|| one_thread(|| build_basis_endpoint(&coeffs, &opts).unwrap()))
    });
    group.finish();
}

fn raster_poly() -> CharPolynomial {
    let grid = Grid::new(0.0, PI, 200).unwrap();
    let one = SampledFunction::constant(grid, cx(1.0, 0.0));
    let zero = SampledFunction::constant(grid, cx(0.0, 0.0));
    let minus = SampledFunction::constant(grid, cx(-1.0, 0.0));
    let coeffs = Coefficients::new(one, zero, vec![minus.clone(), minus], None).unwrap();
    let opts = BuildOptions {
        quadrature: Quadrature::Stencil { points: 6 },
        ..BuildOptions::new(12)
    };
    let basis = build_basis_endpoint(&coeffs, &opts).unwrap();
    characteristic_polynomial(&basis, &BoundaryConditions::dirichlet()).unwrap()
}

fn bench_raster(c: &mut Criterion) {
    let poly = raster_poly();
    let axis = AxisSpec {
        part: AxisPart::Re,
        lo: -10.0,
        hi: 10.0,
    };
    let opts = RasterOptions {
        n1: 96,
        n2: 96,
        contour: true,
    };
    let mut group = c.benchmark_group("raster");
    group.sample_size(20);
    group.bench_function("default_pool", |b| {
        b.iter(|| eigencurve_raster(&poly, (0, 1), &axis, &axis, &[], &opts).unwrap())
    });
    group.bench_function("one_thread", |b| {
        b.iter(|| one_thread(|| eigencurve_raster(&poly, (0, 1), &axis, &axis, &[], &opts).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_table_build, bench_raster);
criterion_main!(benches);
