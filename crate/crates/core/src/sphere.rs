use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Vec3;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereSpec {
    fn default() -> Self {
        Self {
            n_theta: 16,
            n_phi: 32,
        }
    }
}

/// Product quadrature on |x| = a: Gauss–Legendre in cos θ, uniform in φ.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    radius: f64,
    spec: SphereSpec,
    directions: Vec<Vec3>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(radius: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if n_theta < 1 || n_phi < 1 {
            return Err(Error::param("n_theta/n_phi", "need at least one node"));
        }
        let (t, w) = gauss_legendre(n_theta);
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (ct, wt) in t.iter().zip(&w) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for j in 0..n_phi {
                let ph = 2.0 * PI * j as f64 / n_phi as f64;
                directions.push([st * ph.cos(), st * ph.sin(), *ct]);
                weights.push(radius * radius * wt * 2.0 * PI / n_phi as f64);
            }
        }
        Ok(Self {
            radius,
            spec: SphereSpec { n_theta, n_phi },
            directions,
            weights,
        })
    }

    pub fn from_spec(radius: f64, spec: SphereSpec) -> Result<Self> {
        Self::new(radius, spec.n_theta, spec.n_phi)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn spec(&self) -> SphereSpec {
        self.spec
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }
    pub fn node(&self, i: usize) -> Vec3 {
        let d = self.directions[i];
        [d[0] * self.radius, d[1] * self.radius, d[2] * self.radius]
    }
    pub fn nodes(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
    /// Surface weights, summing to 4πa².
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Weights for the unit sphere (summing to 4π).
    pub fn unit_weights(&self) -> Vec<f64> {
        let s = 1.0 / (self.radius * self.radius);
        self.weights.iter().map(|w| w * s).collect()
    }
    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.spec.n_theta - 1).min(self.spec.n_phi.saturating_sub(1))
    }
    /// Same nodes on a sphere of another radius.
    pub fn rescaled(&self, radius: f64) -> Result<Self> {
        Self::new(radius, self.spec.n_theta, self.spec.n_phi)
    }
}

/// Complex density on the nodes of a sphere grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDensity {
    values: Vec<Complex64>,
}

impl BoundaryDensity {
    pub fn new(sphere: &SphereGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != sphere.len() {
            return Err(Error::SizeMismatch {
                expected: sphere.len(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }
    pub fn zeros(sphere: &SphereGrid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); sphere.len()],
        }
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    /// Quadrature L²(∂B) norm.
    pub fn l2_norm(&self, sphere: &SphereGrid) -> f64 {
        self.values
            .iter()
            .zip(sphere.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
    pub(crate) fn check(&self, sphere: &SphereGrid) -> Result<()> {
        if self.values.len() == sphere.len() {
            Ok(())
        } else {
            Err(Error::SphereMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for p in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn weights_sum_to_area() {
        let s = SphereGrid::new(0.7, 16, 32).unwrap();
        let total: f64 = s.weights().iter().sum();
        assert!((total - 4.0 * PI * 0.49).abs() < 1e-12);
        assert_eq!(s.exact_degree(), 31);
    }
}
