//! Deterministic fixed-node Gauss-Legendre quadrature.

use crate::error::{Error, Result};
use crate::stats::gamma::GammaParams;

/// Nodes and weights for integration over a finite interval.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: (f64, f64),
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Apply the rule to an integrand.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre rule with `n` nodes on [a, b]; exact for polynomials of
/// degree <= 2n - 1.
pub fn build_grid(n: usize, a: f64, b: f64) -> Result<QuadratureGrid> {
    if n < 2 {
        return Err(Error::domain(format!("quadrature needs n >= 2, got {n}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("quadrature domain must satisfy a < b: [{a}, {b}]")));
    }
    let (z, w) = legendre_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = z.iter().map(|&t| mid + half * t).collect();
    let weights = w.iter().map(|&v| half * v).collect();
    Ok(QuadratureGrid {
        nodes,
        weights,
        domain: (a, b),
    })
}

/// Legendre nodes/weights on [-1, 1] by Newton iteration on P_n, seeded with
/// the Chebyshev-like asymptotic roots. Standard construction; see e.g.
/// Golub & Welsch (1969) for the eigenvalue alternative.
pub(crate) fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and combined weights for integrating a smooth function against a
/// gamma density: sum_j w_j h(x_j) ~ integral of h dF over [0, F^-1(1 - trunc)].
///
/// The gamma density has an algebraic singularity x^(shape-1) at the origin
/// that stalls plain Gauss-Legendre, so the rule is built in a substituted
/// variable x = y^m with m = ceil(4 / shape), which restores fast polynomial
/// convergence. The weights already include the density and the Jacobian.
pub fn gamma_measure_nodes(
    params: &GammaParams,
    n: usize,
    trunc: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::domain(format!("gamma measure nodes: n >= 2 required, got {n}")));
    }
    let upper = params.quantile(1.0 - trunc)?;
    let m = power_substitution_exponent(params.shape());
    let y_max = upper.powf(1.0 / m as f64);
    let grid = build_grid(n, 0.0, y_max)?;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&y, &wy) in grid.nodes().iter().zip(grid.weights()) {
        let x = y.powi(m);
        let jac = m as f64 * y.powi(m - 1);
        nodes.push(x);
        weights.push(params.pdf(x) * jac * wy);
    }
    Ok((nodes, weights))
}

pub(crate) fn power_substitution_exponent(shape: f64) -> i32 {
    ((4.0 / shape).ceil() as i32).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_function_integrates_to_zero() {
        let g = build_grid(2, -1.0, 1.0).unwrap();
        let v = g.integrate(|x| x * x * x + x);
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn exponential_closed_form() {
        let g = build_grid(64, 0.0, 1.0).unwrap();
        let v = g.integrate(f64::exp);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn polynomial_exactness() {
        // n nodes are exact for degree 2n-1.
        for n in [2usize, 5, 16, 33] {
            let g = build_grid(n, -2.0, 3.0).unwrap();
            let d = 2 * n - 1;
            let got = g.integrate(|x| x.powi(d as i32));
            let a: f64 = -2.0;
            let b: f64 = 3.0;
            let exact = (b.powi(d as i32 + 1) - a.powi(d as i32 + 1)) / (d as f64 + 1.0);
            assert!(
                (got - exact).abs() < 1e-10 * exact.abs().max(1.0),
                "n={n}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let g = build_grid(128, 0.25, 4.5).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.25).abs() < 1e-12);
        assert!(g.nodes().len() == 128);
    }

    #[test]
    fn rejects_degenerate_domain() {
        assert!(build_grid(8, 1.0, 1.0).is_err());
        assert!(build_grid(8, 2.0, 1.0).is_err());
        assert!(build_grid(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_density_normalizes() {
        // 128 nodes against the gamma measure reproduce total mass 1 - trunc.
        let p = GammaParams::new(1.426, 0.148).unwrap();
        let (_, w) = gamma_measure_nodes(&p, 128, 1e-10).unwrap();
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-8, "mass {s}");
    }

    #[test]
    fn gamma_measure_matches_trapezoid_oracle() {
        // Independent check at 10x resolution: trapezoid on the raw integrand.
        let p = GammaParams::new(2.735, 0.103).unwrap();
        let h = |x: f64| (x * 1.3).sin() + x * x;
        let (nodes, w) = gamma_measure_nodes(&p, 128, 1e-10).unwrap();
        let got: f64 = nodes.iter().zip(&w).map(|(&x, &wi)| wi * h(x)).sum();
        let upper = p.quantile(1.0 - 1e-10).unwrap();
        let n = 1280 * 10;
        let step = upper / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * step;
            let b = a + step;
            acc += 0.5 * (p.pdf(a) * h(a) + p.pdf(b) * h(b)) * step;
        }
        assert!((got - acc).abs() < 1e-6, "gl {got} vs trap {acc}");
    }

    #[test]
    fn gamma_measure_low_shape() {
        let p = GammaParams::new(0.5, 1.0).unwrap();
        let (_, w) = gamma_measure_nodes(&p, 128, 1e-10).unwrap();
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-6, "mass {s}");
    }
}
