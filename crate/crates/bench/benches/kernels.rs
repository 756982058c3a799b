use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use capsym::dirac_plane::{solve_radial, BoundaryCondition};
use capsym::geometric_measure::{coarea_integral, heat_flow_trace, total_variation_graph, total_variation_pl};
use capsym::pde_sphere::{solve_sphere, SolverConfig, SphereProblem};
use capsym::rearrange::{distribution_function, symmetrize};
use capsym::{build_icosphere, SphereFunction, SphereMesh};

fn wavy(mesh: &SphereMesh) -> SphereFunction<'_> {
    SphereFunction::from_fn(mesh, |p| (3.0 * p.x).sin() + p.y * p.z + 0.5 * (5.0 * p.z).cos()).unwrap()
}

fn mesh_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_icosphere");
    for s in [3, 5] {
        g.bench_with_input(BenchmarkId::from_parameter(s), &s, |b, &s| {
            b.iter(|| build_icosphere(black_box(s)).unwrap())
        });
    }
    g.finish();
}

fn rearrangement(c: &mut Criterion) {
    let mesh = build_icosphere(5).unwrap();
    let u = wavy(&mesh);
    c.bench_function("distribution_function/5", |b| b.iter(|| distribution_function(black_box(&u))));
    c.bench_function("symmetrize/5", |b| b.iter(|| symmetrize(black_box(&u))));
}

fn variation(c: &mut Criterion) {
    let mesh = build_icosphere(5).unwrap();
    let u = wavy(&mesh);
    c.bench_function("tv_graph/5", |b| b.iter(|| total_variation_graph(black_box(&u))));
    c.bench_function("tv_pl/5", |b| b.iter(|| total_variation_pl(black_box(&u))));
    c.bench_function("coarea/5", |b| b.iter(|| coarea_integral(black_box(&u))));
    let small = build_icosphere(3).unwrap();
    let v = wavy(&small);
    c.bench_function("heat_flow/3x10", |b| b.iter(|| heat_flow_trace(black_box(&v), 1e-3, 10).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let mesh = build_icosphere(4).unwrap();
    let f = SphereFunction::from_fn(&mesh, |p| 2.0 * p.z).unwrap();
    let config = SolverConfig::default();
    let mut g = c.benchmark_group("solve_sphere/4");
    g.sample_size(10);
    for p in [2.0, 3.0] {
        let problem = SphereProblem::new(f.clone(), p, capsym::pde_sphere::Normalization::ZeroMean).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(p), &problem, |b, problem| {
            b.iter(|| solve_sphere(black_box(problem), &config).unwrap())
        });
    }
    g.finish();
    c.bench_function("solve_radial/p3n3", |b| {
        b.iter(|| solve_radial(3.0, 3, 1.0, 0.1, 10.0, BoundaryCondition::Dirichlet).unwrap())
    });
}

criterion_group!(benches, mesh_build, rearrangement, variation, solvers);
criterion_main!(benches);
