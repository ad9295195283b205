use serde::Serialize;
use std::f64::consts::TAU;

use super::bessel_ratio_i1_i0;
use crate::error::{invalid, Result};
use crate::spectral::{from_grid_samples, ModeLattice, SpectralField};

/// The synchronised stationary density of the Kuramoto flow,
/// `p(x) = exp(2κr cos 2πx)/Z`, with order parameter `r = p¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct KuramotoProfile {
    pub kappa: f64,
    pub r: f64,
    pub z: f64,
    /// `|r − I₁(2κr)/I₀(2κr)|`.
    pub residual: f64,
    pub p: SpectralField,
}

#[derive(Serialize)]
struct Summary {
    kappa: f64,
    r: f64,
    #[serde(rename = "Z")]
    z: f64,
    residual: f64,
}

impl KuramotoProfile {
    pub fn summary_json(&self) -> String {
        serde_json::to_string(&Summary { kappa: self.kappa, r: self.r, z: self.z, residual: self.residual })
            .expect("summary serialises")
    }
}

/// Solves `r = I₁(2κr)/I₀(2κr)` and returns the profile centred at 0. For
/// `κ ≤ 1` the only solution is `r = 0` and the profile is uniform.
pub fn stationary_kuramoto_profile(kappa: f64, lattice: ModeLattice) -> Result<KuramotoProfile> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return invalid(format!("coupling must be positive, got {kappa}"));
    }
    if lattice.dim() != 1 {
        return Err(crate::Error::UnsupportedDimension(lattice.dim()));
    }
    if kappa <= 1.0 {
        return Ok(KuramotoProfile { kappa, r: 0.0, z: 1.0, residual: 0.0, p: SpectralField::uniform(lattice) });
    }
    let r = solve_order_parameter(kappa);
    let residual = (r - bessel_ratio_i1_i0(2.0 * kappa * r)).abs();
    let g = (4 * lattice.cutoff() + 1).max(513);
    let raw: Vec<f64> = (0..g)
        .map(|k| (2.0 * kappa * r * (TAU * k as f64 / g as f64).cos()).exp())
        .collect();
    let z = raw.iter().sum::<f64>() / g as f64;
    let samples: Vec<f64> = raw.iter().map(|v| v / z).collect();
    let coeffs = from_grid_samples(&samples, g, lattice)?;
    let p = SpectralField::density(lattice, coeffs)?;
    Ok(KuramotoProfile { kappa, r, z, residual, p })
}

fn solve_order_parameter(kappa: f64) -> f64 {
    let f = |r: f64| r - bessel_ratio_i1_i0(2.0 * kappa * r);
    let (mut lo, mut hi) = (1e-8, 1.0);
    let mut r = (2.0 * (kappa - 1.0) / kappa).sqrt().min(0.9);
    for _ in 0..200 {
        let fr = f(r);
        if fr.abs() < 1e-16 {
            break;
        }
        if fr < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let x = 2.0 * kappa * r;
        let ratio = bessel_ratio_i1_i0(x);
        let dratio = 1.0 - ratio / x - ratio * ratio;
        let next = r - fr / (1.0 - 2.0 * kappa * dratio);
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-17 {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcritical_is_uniform() {
        let lat = ModeLattice::new(1, 16).unwrap();
        let p = stationary_kuramoto_profile(0.5, lat).unwrap();
        assert_eq!(p.r, 0.0);
        assert_eq!(p.p, SpectralField::uniform(lat));
        assert!(stationary_kuramoto_profile(0.0, lat).is_err());
    }

    #[test]
    fn fixed_point_and_first_mode() {
        let lat = ModeLattice::new(1, 32).unwrap();
        for kappa in [1.5, 2.0, 4.0] {
            let p = stationary_kuramoto_profile(kappa, lat).unwrap();
            assert!(p.residual < 1e-12);
            assert!((p.p.first_mode().re - p.r).abs() < 1e-13);
            assert!(p.p.first_mode().im.abs() < 1e-15);
        }
    }
}
