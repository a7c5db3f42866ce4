use ader_bc_core::ader::FaceTreatment;
use ader_bc_core::inversion::{euler_inverse_flux, invert_flux};
use ader_bc_core::models::LinearAdvection;
use ader_bc_core::weno::WenoReconstructor;
use ader_bc_core::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn field(case: &TestCase, cells: usize, ghosts: usize) -> CellField {
    let mut f = CellField::new(0.0, 1.0, case.initial_averages(cells));
    let n = f.cells();
    let left = (0..ghosts).map(|j| f.averages[n - 1 - j]).collect();
    let right = (0..ghosts).map(|j| f.averages[j]).collect();
    f.set_ghosts(Side::Left, left);
    f.set_ghosts(Side::Right, right);
    f
}

fn weno(c: &mut Criterion) {
    let case = TestCase::new(CaseId::EulerSmooth, CaseParams::default());
    let mut g = c.benchmark_group("weno_reconstruct_256");
    for order in [2, 3, 5] {
        let w = WenoReconstructor::new(order).unwrap();
        let padded = field(&case, 256, order).padded(order);
        g.bench_with_input(BenchmarkId::from_parameter(order), &padded, |b, p| {
            b.iter(|| w.reconstruct_field(black_box(p)))
        });
    }
    g.finish();
}

fn ader_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("ader_step_euler_256");
    let case = TestCase::new(CaseId::EulerSmooth, CaseParams::default());
    for order in [2, 3, 4] {
        let scheme = AderScheme::new(order).unwrap();
        let f = field(&case, 256, scheme.weno.ghosts());
        g.bench_with_input(BenchmarkId::from_parameter(order), &f, |b, f| {
            b.iter(|| scheme.step(case.model(), black_box(f), FaceTreatment::Ghost, FaceTreatment::Ghost, 1e-3))
        });
    }
    g.finish();
}

fn reverse_march(c: &mut Criterion) {
    let m = LinearAdvection::new(1.0);
    let g = BoundaryFunction::prescribed(Side::Left, 1, |t| StateVec::scalar((2.0 * std::f64::consts::PI * t).sin()));
    let solver = ReverseSolver::new(&m, ReverseConfig::new(20, 10, 0.7));
    let dx = 1.0 / 128.0;
    c.bench_function("reverse_ghosts_advection_m3", |b| {
        b.iter(|| solver.ghost_cell_averages(Side::Left, 3, 0.3, 0.0, dx, &g, 0.9 * dx, &StateVec::scalar(0.0)))
    });
}

fn inversion(c: &mut Criterion) {
    let e = Euler::new(1.4);
    let q = e.conserved(&StateVec::from_slice(&[1.2, 0.4, 2.0]));
    let u = e.flux(&q);
    let guess = q.map(|v| v * 1.03);
    c.bench_function("euler_inverse_closed_form", |b| b.iter(|| euler_inverse_flux(black_box(&u), 1.4)));
    c.bench_function("euler_inverse_gauss_newton", |b| b.iter(|| invert_flux(&e, black_box(&u), &guess)));
}

criterion_group!(benches, weno, ader_step, reverse_march, inversion);
criterion_main!(benches);
