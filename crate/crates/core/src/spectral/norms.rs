use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use super::{evaluate_on_grid, field::SpectralField, lattice::ModeLattice, TOL_POS};
use crate::error::{invalid, Error, Result};

/// A truncated Sobolev dual norm with a bound on what the truncation dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobolevNorm {
    /// `Σ_{n ∈ lattice} (1+|n|²)^{-s} |a^n − b^n|²`.
    pub value: f64,
    /// `4 Σ_{n ∉ lattice} (1+|n|²)^{-s}`, which bounds the missing part for
    /// probability measures (`|a^n − b^n| ≤ 2`). Infinite when `2s ≤ d`.
    pub tail_bound: f64,
}

fn weight(lattice: &ModeLattice, idx: usize, s: f64) -> f64 {
    (1.0 + lattice.norm_sq(idx) as f64).powf(-s)
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return invalid(format!("Sobolev exponent must be positive, got {s}"));
    }
    Ok(())
}

pub fn sobolev_dual_norm_sq(a: &SpectralField, b: &SpectralField, s: f64) -> Result<SobolevNorm> {
    check_s(s)?;
    a.check_same_lattice(b)?;
    let lat = a.lattice();
    let value = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .enumerate()
        .map(|(i, (x, y))| weight(&lat, i, s) * (x - y).norm_sqr())
        .sum();
    Ok(SobolevNorm { value, tail_bound: sobolev_tail_bound(lat, s) })
}

/// `‖a − b‖_{-s,2}`, computed with rescaling so it does not underflow.
pub fn sobolev_dual_norm(a: &SpectralField, b: &SpectralField, s: f64) -> Result<f64> {
    check_s(s)?;
    a.check_same_lattice(b)?;
    let lat = a.lattice();
    let terms: Vec<f64> = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .enumerate()
        .map(|(i, (x, y))| weight(&lat, i, s).sqrt() * (x - y).norm())
        .collect();
    let big = terms.iter().cloned().fold(0.0, f64::max);
    if big == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = terms.iter().map(|t| (t / big).powi(2)).sum();
    Ok(big * sum.sqrt())
}

/// `Σ_n (1+|n|²)^{-s} a^n conj(b^n)`, real for real fields.
pub fn sobolev_dual_inner(a: &SpectralField, b: &SpectralField, s: f64) -> Result<f64> {
    check_s(s)?;
    a.check_same_lattice(b)?;
    let lat = a.lattice();
    Ok(a.coeffs()
        .iter()
        .zip(b.coeffs())
        .enumerate()
        .map(|(i, (x, y))| weight(&lat, i, s) * (x * y.conj()).re)
        .sum())
}

/// `4 Σ_{max|n_j| > M} (1+|n|²)^{-s}`, exact in `d = 1` and an upper bound
/// otherwise.
pub fn sobolev_tail_bound(lattice: ModeLattice, s: f64) -> f64 {
    let d = lattice.dim() as i32;
    if 2.0 * s <= d as f64 {
        return f64::INFINITY;
    }
    let m = lattice.cutoff() as u64;
    let k_max = m + 200_000;
    let mut sum = 0.0;
    // shells summed smallest-last to limit rounding
    for k in ((m + 1)..=k_max).rev() {
        let kf = k as f64;
        let count = (2.0 * kf + 1.0).powi(d) - (2.0 * kf - 1.0).powi(d);
        sum += count * (1.0 + kf * kf).powf(-s);
    }
    let kf = k_max as f64;
    let remainder = 2.0 * d as f64 * 3f64.powi(d - 1) * kf.powf(d as f64 - 2.0 * s) / (2.0 * s - d as f64);
    4.0 * (sum + remainder)
}

/// `∫ Ū V̄ / p` where `Ū`, `V̄` are primitives of the zero-mass `u`, `v`
/// shifted so that `∫ Ū/p = ∫ V̄/p = 0`.
pub fn weighted_dual_inner(u: &SpectralField, v: &SpectralField, p: &SpectralField) -> Result<f64> {
    for f in [u, v, p] {
        if f.dim() != 1 {
            return Err(Error::UnsupportedDimension(f.dim()));
        }
    }
    for f in [u, v] {
        if f.coeff(&[0]).norm() > 1e-12 {
            return invalid("weighted dual inner product needs zero-mass arguments");
        }
    }
    let m = u.lattice().cutoff().max(v.lattice().cutoff()).max(p.lattice().cutoff());
    let lat = ModeLattice::new(1, m)?;
    let g = super::default_grid(m);
    let dens = evaluate_on_grid(&p.resample(lat)?, g)?;
    let min = dens.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < TOL_POS {
        return Err(Error::NonPositiveDensity { min });
    }
    let inv_p: Vec<f64> = dens.iter().map(|x| 1.0 / x).collect();
    let mean_inv_p = inv_p.iter().sum::<f64>() / g as f64;
    let primitive = |f: &SpectralField| -> Result<Vec<f64>> {
        let f = f.resample(lat)?;
        let c = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let n = lat.component(i, 0);
                if n == 0 {
                    Complex64::default()
                } else {
                    c / Complex64::new(0.0, TAU * n as f64)
                }
            })
            .collect();
        let vals = evaluate_on_grid(&SpectralField::signed(lat, c)?, g)?;
        let shift = vals.iter().zip(&inv_p).map(|(a, b)| a * b).sum::<f64>() / g as f64 / mean_inv_p;
        Ok(vals.into_iter().map(|x| x - shift).collect())
    };
    let uu = primitive(u)?;
    let vv = primitive(v)?;
    Ok(uu
        .iter()
        .zip(&vv)
        .zip(&inv_p)
        .map(|((a, b), w)| a * b * w)
        .sum::<f64>()
        / g as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tail_bound_in_one_dimension_is_exact() {
        let lat = ModeLattice::new(1, 10).unwrap();
        let head: f64 = (1..=10).map(|n| 2.0 / (1.0 + (n * n) as f64)).sum();
        let full = PI / PI.tanh() - 1.0;
        let tail = sobolev_tail_bound(lat, 1.0);
        assert!((tail / 4.0 - (full - head)).abs() < 1e-9);
        let lat2 = ModeLattice::new(2, 4).unwrap();
        assert!(sobolev_tail_bound(lat2, 1.0).is_infinite());
        assert!(sobolev_tail_bound(lat2, 1.5).is_finite());
    }

    #[test]
    fn norm_matches_its_square() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let a = SpectralField::from_fn(lat, |x| 1.0 + 0.3 * (TAU * x[0]).sin()).unwrap();
        let b = SpectralField::uniform(lat);
        let sq = sobolev_dual_norm_sq(&a, &b, 1.0).unwrap().value;
        assert!((sobolev_dual_norm(&a, &b, 1.0).unwrap() - sq.sqrt()).abs() < 1e-16);
        let tiny = b.combine(1.0, &a.sub(&b).unwrap(), 1e-200).unwrap();
        let n = sobolev_dual_norm(&tiny, &b, 1.0).unwrap();
        assert!((n / 1e-200 - sq.sqrt()).abs() < 1e-12);
        assert!(sobolev_dual_norm_sq(&a, &b, 0.0).is_err());
    }
}
