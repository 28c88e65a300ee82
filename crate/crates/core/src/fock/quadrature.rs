use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization of the displacement integral: Gauss–Legendre in the
/// radius on `[0, cutoff·√N]`, uniform in the angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial: usize,
    pub angular: usize,
    pub cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { radial: 24, angular: 32, cutoff: 6.0 }
    }
}

/// A displacement amplitude and its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub alpha: Complex64,
    pub weight: f64,
}

impl QuadratureSpec {
    pub fn new(radial: usize, angular: usize, cutoff: f64) -> Result<Self> {
        let q = Self { radial, angular, cutoff };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial < 4 || self.angular < 4 {
            return Err(Error::InvalidInput(format!(
                "quadrature needs at least 4 radial and 4 angular nodes, got {}x{}",
                self.radial, self.angular
            )));
        }
        if !(self.cutoff >= 5.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidInput(format!("radial cutoff must be at least 5, got {}", self.cutoff)));
        }
        Ok(())
    }

    /// Nodes for the weight `exp(−|α|²/N)/(πN) d²α`. The Gaussian and the
    /// polar Jacobian are folded into the weights, which sum to
    /// `1 − exp(−cutoff²)` up to the radial rule's error.
    pub fn nodes(&self, noise: f64) -> Vec<Node> {
        let (x, w) = gauss_legendre(self.radial);
        let half = 0.5 * self.cutoff * noise.sqrt();
        let mut nodes = Vec::with_capacity(self.radial * self.angular);
        for (xi, wi) in x.iter().zip(&w) {
            let r = half * (xi + 1.0);
            let radial_weight = half * wi * 2.0 * r * (-r * r / noise).exp() / noise;
            for j in 0..self.angular {
                let theta = 2.0 * PI * j as f64 / self.angular as f64;
                nodes.push(Node { alpha: Complex64::from_polar(r, theta), weight: radial_weight / self.angular as f64 });
            }
        }
        nodes
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n′(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
