//! Truncated Ginibre process on a disk, sampled by the sequential
//! determinantal scheme: independent Bernoulli selection of eigenfunctions,
//! then one point per selected function by rejection from the projection
//! density, with Gram-Schmidt updates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::stream::StreamRng;

/// `sum_{k<rank} P(k+1, radius^2)`: expected number of points in the disk.
pub fn ginibre_expected_count(rank: usize, radius: f64) -> f64 {
    (0..rank).map(|k| gamma_lr(k as f64 + 1.0, radius * radius)).sum()
}

#[derive(Debug, Clone)]
pub(crate) struct GinibrePrep {
    radius: f64,
    center: [f64; 2],
    eigen: Vec<f64>,
    /// `ln` of the normalising constant of eigenfunction `k` on the disk.
    ln_norm: Vec<f64>,
    /// Supremum of `|phi_k|^2` over the disk.
    peak: Vec<f64>,
}

impl GinibrePrep {
    pub(crate) fn new(rank: usize, radius: f64, w: &Window) -> Result<Self> {
        let c = w.center();
        for axis in 0..2 {
            if c[axis] - radius < w.lower()[axis] || c[axis] + radius > w.upper()[axis] {
                return Err(Error::InvalidWindow(format!(
                    "disk of radius {radius} centred in {w} does not fit in the window"
                )));
            }
        }
        let r2 = radius * radius;
        let eigen: Vec<f64> = (0..rank).map(|k| gamma_lr(k as f64 + 1.0, r2)).collect();
        let ln_norm: Vec<f64> = eigen
            .iter()
            .enumerate()
            .map(|(k, l)| -0.5 * (PI.ln() + ln_gamma(k as f64 + 1.0) + l.ln()))
            .collect();
        let peak = (0..rank)
            .map(|k| {
                let s = (k as f64).min(r2);
                let ln_r_k = if k == 0 { 0.0 } else { 0.5 * k as f64 * s.ln() };
                (2.0 * (ln_norm[k] + ln_r_k - s / 2.0)).exp()
            })
            .collect();
        Ok(Self {
            radius,
            center: [c[0], c[1]],
            eigen,
            ln_norm,
            peak,
        })
    }

    fn phi(&self, k: usize, r: f64, theta: f64) -> Complex64 {
        let ln_r_k = if k == 0 { 0.0 } else { k as f64 * r.ln() };
        let modulus = (self.ln_norm[k] + ln_r_k - r * r / 2.0).exp();
        Complex64::from_polar(modulus, k as f64 * theta)
    }

    pub(crate) fn draw(&self, rng: &mut StreamRng, out: &mut Vec<f64>) {
        let selected: Vec<usize> = self
            .eigen
            .iter()
            .enumerate()
            .filter_map(|(k, l)| (rng.random::<f64>() < *l).then_some(k))
            .collect();
        let n = selected.len();
        if n == 0 {
            return;
        }
        let bound: f64 = selected.iter().map(|&k| self.peak[k]).sum();
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..n {
            loop {
                let r = self.radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                for (slot, &k) in v.iter_mut().zip(&selected) {
                    *slot = self.phi(k, r, theta);
                }
                for u in &basis {
                    let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (slot, a) in v.iter_mut().zip(u) {
                        *slot -= dot * a;
                    }
                }
                let q: f64 = v.iter().map(|c| c.norm_sqr()).sum();
                if rng.random::<f64>() * bound < q {
                    let s = q.sqrt();
                    basis.push(v.iter().map(|c| c / s).collect());
                    out.push(self.center[0] + r * theta.cos());
                    out.push(self.center[1] + r * theta.sin());
                    break;
                }
            }
        }
    }
}
