//! Gauss-Legendre rules on the reference interval `[0, 1]`, Lagrange
//! interpolation helpers and a small monomial polynomial type.

/// Gauss-Legendre nodes (ascending) and weights on `[0, 1]`. Weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Newton on P_n over [-1, 1], starting from the Chebyshev-like guess.
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = 0.5 * (x + 1.0);
            // Weight on [-1,1] is 2/((1-x^2) P_n'(x)^2); halve it for [0,1].
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Average of `f` over `[a, b]`.
    pub fn average<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        F: Fn(f64) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let h = b - a;
        let mut iter = self.nodes.iter().zip(&self.weights);
        let (x0, w0) = iter.next().unwrap();
        let mut acc = f(a + x0 * h) * *w0;
        for (x, w) in iter {
            acc = acc + f(a + x * h) * *w;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values of the Lagrange basis on `nodes` at `x`.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

/// `D[j][i] = l_i'(x_j)`: differentiation matrix of the Lagrange basis at its own nodes.
pub fn lagrange_derivative_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    (0..n)
        .map(|j| (0..n).map(|i| Poly::lagrange(nodes, i).derivative().eval(nodes[j])).collect())
        .collect()
}

/// `I[l][m] = ∫_0^{x_l} l_m(s) ds`, used to integrate nodal data in time.
pub fn lagrange_integration_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    (0..n)
        .map(|l| (0..n).map(|m| Poly::lagrange(nodes, m).integrate(0.0, nodes[l])).collect())
        .collect()
}

/// Polynomial in monomial form, `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Shifted Legendre polynomial of degree `n`, orthogonal on `[0, 1]`.
    pub fn shifted_legendre(n: usize) -> Self {
        let coeffs = (0..=n)
            .map(|k| {
                let sign = if (n + k).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binomial(n, k) * binomial(n + k, k)
            })
            .collect();
        Self { coeffs }
    }

    /// Lagrange basis polynomial `l_i` on `nodes`.
    pub fn lagrange(nodes: &[f64], i: usize) -> Self {
        let mut p = Poly::new(vec![1.0]);
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i {
                let d = nodes[i] - xj;
                p = p.mul(&Poly::new(vec![-xj / d, 1.0 / d]));
            }
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, r: usize) -> Self {
        (0..r).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn mul(&self, other: &Poly) -> Self {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// Exact integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = |x: f64| {
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
                * x
        };
        anti(b) - anti(a)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in 1..=8 {
            let rule = GaussLegendre::new(n);
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let approx: f64 = rule.average(0.0, 1.0, |x| x.powi(deg as i32));
                assert!((approx - 1.0 / (deg + 1) as f64).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        let rule = GaussLegendre::new(3);
        let s = (0.6f64).sqrt();
        assert!((rule.nodes[0] - 0.5 * (1.0 - s)).abs() < 1e-15);
        assert!((rule.weights[1] - 4.0 / 9.0).abs() < 1e-15);
        assert!((rule.weights[0] - 5.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_legendre_orthogonality() {
        for i in 0..5 {
            for j in 0..5 {
                let v = Poly::shifted_legendre(i).mul(&Poly::shifted_legendre(j)).integrate(0.0, 1.0);
                let expect = if i == j { 1.0 / (2 * i + 1) as f64 } else { 0.0 };
                assert!((v - expect).abs() < 1e-11, "({i},{j}) -> {v}");
            }
        }
    }

    #[test]
    fn integration_matrix_integrates_nodal_polynomials() {
        let nodes = GaussLegendre::new(4).nodes;
        let im = lagrange_integration_matrix(&nodes);
        // f(s) = s^3 sampled at the nodes; ∫_0^x s^3 = x^4/4
        for (l, &x) in nodes.iter().enumerate() {
            let v: f64 = (0..4).map(|m| im[l][m] * nodes[m].powi(3)).sum();
            assert!((v - x.powi(4) / 4.0).abs() < 1e-14);
        }
    }
}
