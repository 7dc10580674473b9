//! Gauss-Hermite and Gauss-Legendre quadrature via the Golub-Welsch algorithm.
//!
//! The Hermite rule is in probabilists' normalization: Σ wᵢ f(xᵢ) ≈ E f(Z)
//! for Z a standard Gaussian, weights summing to one. It carries every
//! Gaussian average in the crate (initial conditions, heat-kernel slabs).

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Eigen-decompose the symmetric tridiagonal Jacobi matrix with the given
/// off-diagonal, returning (nodes, first-row eigenvector components squared).
fn golub_welsch(off_diag: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = off_diag.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in off_diag.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let node = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            (node, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Hermite rule with n nodes, probabilists' weight: Σ wᵢ f(xᵢ) ≈ E f(Z).
/// Exact for polynomials of degree ≤ 2n−1.
pub fn gauss_hermite(n: usize) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::invalid("gauss_hermite requires n ≥ 1"));
    }
    if n == 1 {
        return Ok(QuadRule {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    // Jacobi matrix for monic probabilists' Hermite: zero diagonal, √k off.
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let (nodes, w0) = golub_welsch(&off);
    // total mass of the standard Gaussian is 1
    Ok(QuadRule { nodes, weights: w0 })
}

/// Gauss-Legendre rule with n nodes on [0, 1]: Σ wᵢ f(xᵢ) ≈ ∫₀¹ f.
pub fn gauss_legendre_01(n: usize) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::invalid("gauss_legendre requires n ≥ 1"));
    }
    if n == 1 {
        return Ok(QuadRule {
            nodes: vec![0.5],
            weights: vec![1.0],
        });
    }
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, w0) = golub_welsch(&off);
    // map [-1, 1] to [0, 1]; weights on [-1,1] are 2·v0², halved by the map
    Ok(QuadRule {
        nodes: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: w0.iter().map(|w| w * 2.0 * 0.5).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_zero_nodes() {
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_legendre_01(0).is_err());
    }

    #[test]
    fn single_node_is_the_mean() {
        let q = gauss_hermite(1).unwrap();
        assert_eq!(q.nodes, vec![0.0]);
        assert_eq!(q.weights, vec![1.0]);
        assert_abs_diff_eq!(q.integrate(|x| x), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_one_and_second_moment() {
        let q = gauss_hermite(20).unwrap();
        assert_abs_diff_eq!(q.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.integrate(|x| x * x), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_mgf_of_cosh() {
        // E cosh(Z) = e^{1/2}, closed-form Gaussian MGF as oracle
        let q = gauss_hermite(40).unwrap();
        assert_abs_diff_eq!(q.integrate(f64::cosh), (0.5f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn hermite_exact_on_low_degree_polynomials() {
        // degree ≤ 2n−1 exactness; Gaussian moments E Z^{2m} = (2m−1)!!
        for n in [2usize, 5, 8, 13] {
            let q = gauss_hermite(n).unwrap();
            let mut double_fact = 1.0;
            for m in 0..n {
                let deg = 2 * m;
                if m > 0 {
                    double_fact *= (deg - 1) as f64;
                }
                assert_abs_diff_eq!(
                    q.integrate(|x| x.powi(deg as i32)),
                    double_fact,
                    epsilon = 1e-10 * double_fact.max(1.0)
                );
                // odd moments vanish
                assert_abs_diff_eq!(
                    q.integrate(|x| x.powi(deg as i32 + 1)),
                    0.0,
                    epsilon = 1e-9 * double_fact.max(1.0)
                );
            }
        }
    }

    #[test]
    fn legendre_integrates_exp() {
        let q = gauss_legendre_01(32).unwrap();
        assert_abs_diff_eq!(
            q.integrate(f64::exp),
            std::f64::consts::E - 1.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(q.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
    }
}
