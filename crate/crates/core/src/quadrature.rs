//! Gauss quadrature rules and the sphere-averaging grid.
//!
//! Node generation is delegated to `gauss-quad` (Golub–Welsch, in `f64`);
//! this module rescales the rules to the conventions used here and casts them
//! to the working scalar.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;

use crate::error::{invalid, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::BlochAngles;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Expectations over a standard normal variable: `E[f(Z)] ≈ Σ w_i f(x_i)`.
    GaussHermite,
    /// Integrals over a finite interval.
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    kind: QuadratureKind,
}

fn nonzero(n: usize) -> Result<NonZeroUsize> {
    NonZeroUsize::new(n).ok_or_else(|| invalid("nodes", "quadrature needs at least one node"))
}

impl<T: Real> QuadratureRule<T> {
    /// Rule for the standard normal density; weights sum to one.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        let rule = GaussHermite::new(nonzero(n)?);
        let scale_x = std::f64::consts::SQRT_2;
        let scale_w = std::f64::consts::PI.sqrt();
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (T::lit(x * scale_x), T::lit(w / scale_w)))
            .unzip();
        Ok(Self {
            nodes,
            weights,
            kind: QuadratureKind::GaussHermite,
        })
    }

    /// Gauss–Legendre rule on `[-1, 1]`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let rule = GaussLegendre::new(nonzero(n)?);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().map(|(x, w)| (T::lit(x), T::lit(w))).unzip();
        Ok(Self {
            nodes,
            weights,
            kind: QuadratureKind::GaussLegendre,
        })
    }

    /// Affinely maps a Legendre rule from `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> Self {
        debug_assert_eq!(self.kind, QuadratureKind::GaussLegendre);
        let half = T::lit(0.5);
        let mid = (a + b) * half;
        let rad = (b - a) * half;
        Self {
            nodes: self.nodes.iter().map(|&x| mid + rad * x).collect(),
            weights: self.weights.iter().map(|&w| w * rad).collect(),
            kind: self.kind,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ w_i f(x_i)` with compensated accumulation.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        let acc: CompensatedSum<T> = self.iter().map(|(x, w)| w * f(x)).collect();
        acc.value()
    }
}

/// Product grid over the unit sphere: Gauss–Legendre in `cos θ` and an
/// equispaced (periodic trapezoid) rule in `φ`. Weights sum to one, so a
/// weighted sum is the uniform sphere average.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid<T> {
    cos_theta: QuadratureRule<T>,
    n_phi: usize,
    phi_offset: T,
}

impl<T: Real> SphereGrid<T> {
    pub const DEFAULT_THETA: usize = 32;
    pub const DEFAULT_PHI: usize = 64;

    /// `phi_offset` is the fraction of a `φ` step by which the first node is
    /// shifted from `-π`; `0.5` gives a midpoint rule.
    pub fn new(n_theta: usize, n_phi: usize, phi_offset: T) -> Result<Self> {
        if n_phi == 0 {
            return Err(invalid("n_phi", "must be positive"));
        }
        if !(phi_offset >= T::zero() && phi_offset < T::one()) {
            return Err(invalid("phi_offset", "must lie in [0, 1)"));
        }
        Ok(Self {
            cos_theta: QuadratureRule::gauss_legendre(n_theta)?,
            n_phi,
            phi_offset,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi_nodes(&self) -> Vec<T> {
        let step = T::TAU() / T::from_usize_lossy(self.n_phi);
        (0..self.n_phi)
            .map(|j| -T::PI() + step * (T::from_usize_lossy(j) + self.phi_offset))
            .collect()
    }

    /// Grid points with normalized weights, `θ`-major.
    pub fn points(&self) -> Vec<(BlochAngles<T>, T)> {
        let phis = self.phi_nodes();
        let inv = T::one() / (T::lit(2.0) * T::from_usize_lossy(self.n_phi));
        let mut out = Vec::with_capacity(self.len());
        for (u, w) in self.cos_theta.iter() {
            let theta = u.max(-T::one()).min(T::one()).acos();
            for &phi in &phis {
                let angles = BlochAngles::from_unnormalized(theta, phi);
                out.push((angles, w * inv));
            }
        }
        out
    }
}

impl Default for SphereGrid<f64> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_THETA, Self::DEFAULT_PHI, 0.5).expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_weights_integrate_gaussian_to_one() {
        for n in [1, 5, 20, 40, 60] {
            let rule = QuadratureRule::<f64>::gauss_hermite(n).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn hermite_moments() {
        let rule = QuadratureRule::<f64>::gauss_hermite(40).unwrap();
        assert_abs_diff_eq!(rule.integrate(|x| x * x), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(4)), 3.0, epsilon = 1e-11);
        // E[cos(aZ)] = exp(-a²/2)
        assert_abs_diff_eq!(rule.integrate(|x| (1.3 * x).cos()), (-0.845f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn legendre_mapped_integrates_polynomials() {
        let rule = QuadratureRule::<f64>::gauss_legendre(8).unwrap().mapped(0.0, 2.0);
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(7)), 32.0, epsilon = 1e-11);
        assert!(QuadratureRule::<f64>::gauss_legendre(0).is_err());
    }

    #[test]
    fn sphere_grid_weights_and_moments() {
        let grid = SphereGrid::<f64>::default();
        let pts = grid.points();
        assert_eq!(pts.len(), 32 * 64);
        let total: f64 = pts.iter().map(|p| p.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
        // ⟨z²⟩ = 1/3 and ⟨x²⟩ = 1/3 over the uniform sphere.
        let z2: f64 = pts.iter().map(|(a, w)| w * a.bloch_vector().z.powi(2)).sum();
        let x2: f64 = pts.iter().map(|(a, w)| w * a.bloch_vector().x.powi(2)).sum();
        assert_abs_diff_eq!(z2, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x2, 1.0 / 3.0, epsilon = 1e-12);
    }
}
