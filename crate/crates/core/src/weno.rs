//! Componentwise WENO reconstruction of degree `M − 1` from cell averages.
//!
//! Polynomials are expanded in shifted Legendre polynomials `θ_k` on the
//! reference cell `ξ ∈ [0, 1]`. Three candidates (left-biased, central,
//! right-biased) are blended with smoothness-based nonlinear weights.

use crate::error::{Error, Result};
use crate::quadrature::Poly;
use crate::state::StateVec;
use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Highest supported reconstruction order.
pub const MAX_ORDER: usize = 5;

/// Linear weights `(λ_−1, λ_0, λ_+1)`.
pub const LINEAR_WEIGHTS: [f64; 3] = [1.0, 1e5, 1.0];
const WENO_EPS: f64 = 1e-14;
const WENO_POWER: i32 = 4;

/// Monomial coefficients of `θ_k`, `BASIS[k][j]` multiplies `ξ^j`.
fn basis() -> &'static [[f64; MAX_ORDER]; MAX_ORDER] {
    static TABLE: OnceLock<[[f64; MAX_ORDER]; MAX_ORDER]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0.0; MAX_ORDER]; MAX_ORDER];
        for (k, row) in t.iter_mut().enumerate() {
            for (j, c) in Poly::shifted_legendre(k).coeffs.into_iter().enumerate() {
                row[j] = c;
            }
        }
        t
    })
}

/// Degree-`(order − 1)` polynomial on the reference cell, one coefficient
/// vector per basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconPoly {
    order: usize,
    coeffs: [StateVec; MAX_ORDER],
}

impl ReconPoly {
    pub fn from_coeffs(coeffs: &[StateVec]) -> Self {
        assert!((1..=MAX_ORDER).contains(&coeffs.len()));
        let mut c = [StateVec::zeros(coeffs[0].len()); MAX_ORDER];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Self {
            order: coeffs.len(),
            coeffs: c,
        }
    }

    pub fn constant(q: StateVec, order: usize) -> Self {
        let mut c = [StateVec::zeros(q.len()); MAX_ORDER];
        c[0] = q;
        Self { order, coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Legendre coefficients `γ_k`.
    pub fn coeffs(&self) -> &[StateVec] {
        &self.coeffs[..self.order]
    }

    /// Mean over the reference cell; only `θ_0` has non-zero mean.
    pub fn average(&self) -> StateVec {
        self.coeffs[0]
    }

    /// Coefficients in the monomial basis `ξ^j`.
    pub fn monomial(&self) -> [StateVec; MAX_ORDER] {
        let b = basis();
        let mut out = [StateVec::zeros(self.dim()); MAX_ORDER];
        for k in 0..self.order {
            for j in 0..=k {
                out[j] = out[j].axpy(b[k][j], &self.coeffs[k]);
            }
        }
        out
    }

    pub fn eval(&self, xi: f64) -> StateVec {
        self.derivative(0, xi)
    }

    /// `d^r P / dξ^r` at `ξ`.
    pub fn derivative(&self, r: usize, xi: f64) -> StateVec {
        let mono = self.monomial();
        let mut acc = StateVec::zeros(self.dim());
        for j in (r..self.order).rev() {
            let falling: f64 = (0..r).map(|i| (j - i) as f64).product();
            acc = (acc * xi).axpy(falling, &mono[j]);
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c = *c * s);
        out
    }
}

/// Offsets of the three candidate stencils relative to the home cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilSet {
    pub left: Vec<i32>,
    pub central: Vec<i32>,
    pub right: Vec<i32>,
}

impl StencilSet {
    pub fn new(order: usize) -> Self {
        let m = order as i32;
        Self {
            left: (-(m - 1)..=0).collect(),
            central: (-(m - 1)..=(m - 1)).collect(),
            right: (0..m).collect(),
        }
    }
}

/// Linear map from stencil averages to Legendre coefficients,
/// `map[k][s]` weighting the average at `offsets[s]`.
#[derive(Debug, Clone, PartialEq)]
struct CandidateMap {
    offsets: Vec<i32>,
    map: Vec<Vec<f64>>,
}

impl CandidateMap {
    fn new(offsets: &[i32], order: usize) -> Result<Self> {
        if offsets.len() < order {
            return Err(Error::Config(format!(
                "stencil with {} cells cannot determine {order} coefficients",
                offsets.len()
            )));
        }
        let home = offsets.iter().position(|&d| d == 0);
        // Row s: averages of θ_k over the shifted cell [d, d + 1].
        let averages = |d: i32, k: usize| Poly::shifted_legendre(k).integrate(d as f64, d as f64 + 1.0);
        let map = if offsets.len() == order {
            let a = DMatrix::from_fn(order, order, |s, k| averages(offsets[s], k));
            let inv = a
                .try_inverse()
                .ok_or_else(|| Error::Config(format!("singular reconstruction matrix for {offsets:?}")))?;
            (0..order).map(|k| (0..order).map(|s| inv[(k, s)]).collect()).collect()
        } else {
            // Constrained least squares: conserving the home cell pins γ_0 to
            // its average, the rest fit the remaining differences Q_d − Q_0.
            let home = home.ok_or_else(|| Error::Config("over-determined stencil must contain the home cell".into()))?;
            let others: Vec<usize> = (0..offsets.len()).filter(|&s| s != home).collect();
            let mut map = vec![vec![0.0; offsets.len()]; order];
            map[0][home] = 1.0;
            if order > 1 {
                let a = DMatrix::from_fn(others.len(), order - 1, |r, k| averages(offsets[others[r]], k + 1));
                let pinv = a
                    .pseudo_inverse(1e-13)
                    .map_err(|e| Error::Config(format!("reconstruction least squares failed: {e}")))?;
                for k in 1..order {
                    for (r, &s) in others.iter().enumerate() {
                        let w = pinv[(k - 1, r)];
                        map[k][s] += w;
                        map[k][home] -= w;
                    }
                }
            }
            map
        };
        Ok(Self {
            offsets: offsets.to_vec(),
            map,
        })
    }

    /// `stencil(s)` yields the average at `offsets[s]`.
    fn apply(&self, stencil: impl Fn(i32) -> StateVec) -> ReconPoly {
        let vals: Vec<StateVec> = self.offsets.iter().map(|&d| stencil(d)).collect();
        let dim = vals[0].len();
        let order = self.map.len();
        let mut coeffs = [StateVec::zeros(dim); MAX_ORDER];
        for k in 0..order {
            let mut acc = StateVec::zeros(dim);
            for (w, v) in self.map[k].iter().zip(&vals) {
                acc = acc.axpy(*w, v);
            }
            coeffs[k] = acc;
        }
        ReconPoly { order, coeffs }
    }
}

/// Candidate polynomial on an arbitrary stencil. Exactly determined stencils
/// interpolate every average; larger ones conserve the home cell exactly and
/// fit the rest in the least-squares sense.
pub fn build_candidate(averages: &[StateVec], offsets: &[i32], order: usize) -> Result<ReconPoly> {
    if averages.len() != offsets.len() {
        return Err(Error::Config("one average per stencil offset is required".into()));
    }
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!("reconstruction order {order} outside 1..={MAX_ORDER}")));
    }
    let map = CandidateMap::new(offsets, order)?;
    Ok(map.apply(|d| averages[offsets.iter().position(|&o| o == d).unwrap()]))
}

fn smoothness_matrix(order: usize) -> Vec<Vec<f64>> {
    let theta: Vec<Poly> = (0..order).map(Poly::shifted_legendre).collect();
    (0..order)
        .map(|k| {
            (0..order)
                .map(|l| {
                    (1..order)
                        .map(|r| theta[k].nth_derivative(r).mul(&theta[l].nth_derivative(r)).integrate(0.0, 1.0))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `σ = Σ_r ∫_0^1 (d^r P/dξ^r)² dξ`, summed over components.
pub fn smoothness(poly: &ReconPoly) -> f64 {
    smoothness_with(&smoothness_matrix(poly.order()), poly)
}

fn smoothness_with(b: &[Vec<f64>], poly: &ReconPoly) -> f64 {
    let c = poly.coeffs();
    let mut sigma = 0.0;
    for k in 1..c.len() {
        for l in 1..c.len() {
            if b[k][l] != 0.0 {
                sigma += b[k][l] * c[k].dot(&c[l]);
            }
        }
    }
    sigma.max(0.0)
}

/// Normalised nonlinear weights for the left, central and right candidates.
pub fn weno_weights(sigma: [f64; 3]) -> [f64; 3] {
    let raw: [f64; 3] = std::array::from_fn(|l| LINEAR_WEIGHTS[l] / (WENO_EPS + sigma[l]).powi(WENO_POWER));
    let total: f64 = raw.iter().sum();
    raw.map(|w| w / total)
}

/// Reconstruction operator for one order with precomputed stencil maps.
#[derive(Debug, Clone)]
pub struct WenoReconstructor {
    order: usize,
    stencils: StencilSet,
    candidates: [CandidateMap; 3],
    smooth: Vec<Vec<f64>>,
}

impl WenoReconstructor {
    pub fn new(order: usize) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::Config(format!("order {order} outside 2..={MAX_ORDER}")));
        }
        let stencils = StencilSet::new(order);
        let candidates = [
            CandidateMap::new(&stencils.left, order)?,
            CandidateMap::new(&stencils.central, order)?,
            CandidateMap::new(&stencils.right, order)?,
        ];
        Ok(Self {
            order,
            stencils,
            candidates,
            smooth: smoothness_matrix(order),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stencils(&self) -> &StencilSet {
        &self.stencils
    }

    /// Ghost cells needed on each side.
    pub fn ghosts(&self) -> usize {
        self.order
    }

    /// Reconstruction in the cell at `padded[index]`.
    pub fn reconstruct_cell(&self, padded: &[StateVec], index: usize) -> ReconPoly {
        let at = |d: i32| padded[(index as i64 + d as i64) as usize];
        let cands: [ReconPoly; 3] = std::array::from_fn(|l| self.candidates[l].apply(at));
        let sigma: [f64; 3] = std::array::from_fn(|l| smoothness_with(&self.smooth, &cands[l]));
        let omega = weno_weights(sigma);
        let dim = padded[index].len();
        let mut coeffs = [StateVec::zeros(dim); MAX_ORDER];
        for k in 0..self.order {
            let mut acc = StateVec::zeros(dim);
            for l in 0..3 {
                acc = acc.axpy(omega[l], &cands[l].coeffs[k]);
            }
            coeffs[k] = acc;
        }
        // Every candidate conserves the home cell; pin it against rounding.
        coeffs[0] = padded[index];
        ReconPoly {
            order: self.order,
            coeffs,
        }
    }

    /// Reconstructs every interior cell of `padded`, which carries
    /// [`ghosts`](Self::ghosts) extra averages on each side.
    pub fn reconstruct_field(&self, padded: &[StateVec]) -> Vec<ReconPoly> {
        let g = self.ghosts();
        assert!(padded.len() > 2 * g, "field must carry {g} ghost cells per side");
        (g..padded.len() - g).map(|i| self.reconstruct_cell(padded, i)).collect()
    }
}
