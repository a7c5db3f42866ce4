//! Invariant checks shared by the acceptance run and the invariant suite.
//! Each returns the worst deviation found so callers can report it.

#![allow(dead_code)]

use ader_bc_core::ader::rusanov;
use ader_bc_core::models::{LinearAdvection, LinearSystem, SpaceDependentFlux};
use ader_bc_core::reverse::minmod_slope;
use ader_bc_core::weno::{weno_weights, WenoReconstructor};
use ader_bc_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Conserved Euler state with `ρ, p ∈ [0.1, 10]` and `|u| < c`.
pub fn subsonic_state(rng: &mut StdRng) -> StateVec {
    let e = Euler::new(1.4);
    let rho: f64 = rng.random_range(0.1..=10.0);
    let p: f64 = rng.random_range(0.1..=10.0);
    let c = (1.4 * p / rho).sqrt();
    let u = rng.random_range(-0.999..0.999) * c;
    e.conserved(&StateVec::from_slice(&[rho, u, p]))
}

/// Random admissible state for each bundled model.
pub fn models_with_states(rng: &mut StdRng, count: usize) -> Vec<(Box<dyn SystemModel>, StateVec)> {
    let mut out: Vec<(Box<dyn SystemModel>, StateVec)> = Vec::new();
    for _ in 0..count {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        out.push((Box::new(LinearAdvection::new(a)), StateVec::scalar(b)));
        out.push((Box::new(LinearSystem), StateVec::from_slice(&[a, b])));
        out.push((Box::new(SpaceDependentFlux::new(1.0)), StateVec::from_slice(&[a, b])));
        out.push((Box::new(Euler::new(1.4)), subsonic_state(rng)));
    }
    out
}

fn fd_jacobian(model: &dyn SystemModel, q: &StateVec, h: f64) -> Mat {
    let m = model.dim();
    let mut a = Mat::zeros(m);
    for j in 0..m {
        let (mut qp, mut qm) = (*q, *q);
        qp[j] += h;
        qm[j] -= h;
        let col = (model.flux(&qp) - model.flux(&qm)) * (0.5 / h);
        for i in 0..m {
            a.set(i, j, col[i]);
        }
    }
    a
}

/// Relative gap between analytic and central-difference Jacobians.
pub fn jacobian_gap(samples: usize) -> f64 {
    let mut r = rng(11);
    models_with_states(&mut r, samples)
        .iter()
        .map(|(m, q)| {
            let a = m.jacobian(q);
            a.max_abs_diff(&fd_jacobian(m.as_ref(), q, 1e-6)) / (1.0 + a.norm_max())
        })
        .fold(0.0, f64::max)
}

/// `‖L⁻¹ Λ L − A‖` and `‖L L⁻¹ − I‖`, relative to the Jacobian size.
pub fn eigensystem_gap(samples: usize) -> f64 {
    let mut r = rng(12);
    models_with_states(&mut r, samples)
        .iter()
        .map(|(m, q)| {
            let a = m.jacobian(q);
            let e = m.eigensystem(q).expect("eigensystem of an admissible state");
            let id = e.left.mul_mat(&e.right);
            let round = id.max_abs_diff(&Mat::identity(m.dim()));
            (e.recompose().max_abs_diff(&a) / (1.0 + a.norm_max())).max(round)
        })
        .fold(0.0, f64::max)
}

/// `∂_t Q + ∂_x F(Q) − S` of every exact solution, by central differences.
pub fn pde_residual(points: usize) -> f64 {
    let mut r = rng(13);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for id in [CaseId::LinearAdvection, CaseId::LinearSystem, CaseId::SpaceDependent, CaseId::EulerSmooth] {
        let case = TestCase::new(id, CaseParams::default());
        let model = case.model();
        let (xl, xr) = case.domain();
        for _ in 0..points {
            let x = r.random_range(xl + 0.01..xr - 0.01);
            let t = r.random_range(0.01..1.0);
            let q = |x, t| case.exact(x, t).unwrap();
            let qt = (q(x, t + h) - q(x, t - h)) * (0.5 / h);
            let fx = (model.flux(&q(x + h, t)) - model.flux(&q(x - h, t))) * (0.5 / h);
            let s = model.source(x, t).unwrap_or_else(|| StateVec::zeros(model.dim()));
            let res = (qt + fx - s).norm_inf() / (1.0 + q(x, t).norm_inf());
            worst = worst.max(res);
        }
    }
    worst
}

/// Largest drift of the total mass under periodic wrap, orders 2 to 5.
pub fn periodic_mass_drift() -> f64 {
    let case = TestCase::new(CaseId::LinearAdvection, CaseParams::default());
    let mut worst = 0.0f64;
    for order in 2..=5 {
        let mut cfg = SolverConfig::for_case(&case, order);
        cfg.left = BoundaryMode::Periodic;
        cfg.right = BoundaryMode::Periodic;
        cfg.t_out = 1.0;
        let initial: f64 = case.initial_averages(40).iter().map(|q| q[0]).sum();
        solver::solve_with(&case, 40, &cfg, |f| {
            let s: f64 = f.averages.iter().map(|q| q[0]).sum();
            worst = worst.max((s - initial).abs());
        })
        .expect("periodic run");
    }
    worst
}

/// WENO reproduces polynomials of degree below the order and its weights
/// sum to one. Returns the worst deviation of either.
pub fn weno_exactness() -> f64 {
    let mut r = rng(14);
    let mut worst = 0.0f64;
    for order in 2..=5 {
        let w = WenoReconstructor::new(order).unwrap();
        let coeffs: Vec<f64> = (0..order).map(|_| r.random_range(-1.0..1.0)).collect();
        let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        // Cell averages of p on unit cells [j, j+1] from exact primitives.
        let prim = |x: f64| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * x.powi(k as i32 + 1) / (k + 1) as f64)
                .sum::<f64>()
        };
        let scale = 0.1;
        let cells = 2 * order + 1;
        let padded: Vec<StateVec> = (0..cells)
            .map(|j| {
                let (a, b) = (j as f64 * scale, (j + 1) as f64 * scale);
                StateVec::scalar((prim(b) - prim(a)) / scale)
            })
            .collect();
        let poly = w.reconstruct_cell(&padded, order);
        for xi in [0.0, 0.3, 0.7, 1.0] {
            let exact = p((order as f64 + xi) * scale);
            worst = worst.max((poly.eval(xi)[0] - exact).abs());
        }
    }
    for _ in 0..100 {
        let sigma: [f64; 3] = std::array::from_fn(|_| 10f64.powf(r.random_range(-12.0..2.0)));
        let omega = weno_weights(sigma);
        worst = worst.max((omega.iter().sum::<f64>() - 1.0).abs());
        if omega.iter().any(|&w| w < 0.0) {
            return f64::INFINITY;
        }
    }
    worst
}

/// `F̂(q, q) = F(q)` for every model.
pub fn rusanov_consistency(samples: usize) -> f64 {
    let mut r = rng(15);
    models_with_states(&mut r, samples)
        .iter()
        .map(|(m, q)| {
            let f = rusanov(m.as_ref(), q, q).unwrap();
            (f - m.flux(q)).norm_inf()
        })
        .fold(0.0, f64::max)
}

/// The MINMOD cases: opposite signs give zero, otherwise the smaller slope.
pub fn minmod_cases() -> bool {
    let s = |a: f64, b: f64| minmod_slope(&StateVec::scalar(a), &StateVec::scalar(b))[0];
    s(1.0, 2.0) == 1.0
        && s(-3.0, -0.5) == -0.5
        && s(1.0, -1.0) == 0.0
        && s(0.0, 5.0) == 0.0
        && s(2.0, 2.0) == 2.0
}
