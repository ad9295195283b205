use num_complex::Complex64;
use std::f64::consts::TAU;

use super::{field::Measure, lattice::ModeLattice, SpectralField};
use crate::error::{invalid, Error, Result};

/// Cells per unit length used to resolve smooth cumulative distributions.
const FIELD_CELLS: usize = 8192;

enum Cdf {
    Atoms(Vec<f64>),
    Field(SpectralField),
}

impl Cdf {
    fn of<M: Measure + ?Sized>(mu: &M) -> Result<Self> {
        if mu.dim() != 1 {
            return Err(Error::UnsupportedDimension(mu.dim()));
        }
        if let Some(atoms) = mu.atoms() {
            let mut v = atoms.to_vec();
            v.sort_by(f64::total_cmp);
            return Ok(Cdf::Atoms(v));
        }
        let cutoff = mu.known_cutoff().unwrap_or(1);
        Ok(Cdf::Field(mu.modes_on(ModeLattice::new(1, cutoff)?)?))
    }

    /// Mass of `[0, x]` for atoms, of `[0, x)` for fields (continuous anyway).
    fn at(&self, x: f64) -> f64 {
        match self {
            Cdf::Atoms(v) => v.partition_point(|&a| a <= x) as f64 / v.len() as f64,
            Cdf::Field(f) => {
                let lat = f.lattice();
                let mut s = f.mass() * x;
                for n in 1..=lat.cutoff() as i64 {
                    let c = f.coeff(&[n]);
                    let e = Complex64::from_polar(1.0, TAU * n as f64 * x) - 1.0;
                    // n and −n together give twice the real part
                    s += 2.0 * (c * e / Complex64::new(0.0, TAU * n as f64)).re;
                }
                s
            }
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Cdf::Atoms(v) => out.extend_from_slice(v),
            Cdf::Field(_) => out.extend((0..FIELD_CELLS).map(|k| k as f64 / FIELD_CELLS as f64)),
        }
    }
}

/// `∫_0^1 |α + (β−α)t|` for a linear piece.
fn abs_linear(a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * (a.abs() + b.abs())
    } else {
        0.5 * (a * a + b * b) / (a.abs() + b.abs())
    }
}

/// Wasserstein-1 distance on the circle.
///
/// Uses `W₁ = min_c ∫_0^1 |F_a − F_b − c|`, whose minimiser is a median of
/// `F_a − F_b`. Exact for pairs of empirical measures; smooth fields are
/// resolved on a fine grid.
pub fn wasserstein1_1d<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: Measure + ?Sized,
    B: Measure + ?Sized,
{
    let (fa, fb) = (Cdf::of(a)?, Cdf::of(b)?);
    let mut pts = vec![0.0, 1.0];
    fa.breakpoints(&mut pts);
    fb.breakpoints(&mut pts);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pieces: Vec<(f64, f64, f64)> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (l, r) = (w[0], w[1]);
            let left = |c: &Cdf| match c {
                Cdf::Atoms(_) => c.at(l),
                Cdf::Field(_) => c.at(l),
            };
            let right = |c: &Cdf| match c {
                Cdf::Atoms(_) => c.at(l),
                Cdf::Field(_) => c.at(r),
            };
            (r - l, left(&fa) - left(&fb), right(&fa) - right(&fb))
        })
        .collect();
    let c = weighted_median(&pieces);
    Ok(pieces
        .iter()
        .map(|&(len, hl, hr)| len * abs_linear(hl - c, hr - c))
        .sum())
}

fn weighted_median(pieces: &[(f64, f64, f64)]) -> f64 {
    let mut v: Vec<(f64, f64)> = pieces
        .iter()
        .map(|&(len, hl, hr)| (0.5 * (hl + hr), len))
        .collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = v.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(val, len) in &v {
        acc += len;
        if acc >= 0.5 * total {
            return val;
        }
    }
    v.last().map_or(0.0, |p| p.0)
}

/// Circle `W₁` between two equally weighted sample sets.
pub fn wasserstein1_samples(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return invalid("empty sample set");
    }
    let lat = ModeLattice::new(1, 1)?;
    let a = super::EmpiricalMeasure::new(x.to_vec(), lat)?;
    let b = super::EmpiricalMeasure::new(y.to_vec(), lat)?;
    wasserstein1_1d(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::EmpiricalMeasure;

    #[test]
    fn point_masses() {
        assert!((wasserstein1_samples(&[0.0], &[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!((wasserstein1_samples(&[0.05], &[0.95]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(wasserstein1_samples(&[0.2, 0.3], &[0.3, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn dirac_against_uniform() {
        let lat = ModeLattice::new(1, 4).unwrap();
        let u = SpectralField::uniform(lat);
        let d = EmpiricalMeasure::new(vec![0.3], lat).unwrap();
        assert!((wasserstein1_1d(&d, &u).unwrap() - 0.25).abs() < 1e-9);
        assert!(wasserstein1_1d(&u, &u).unwrap() < 1e-15);
        let l2 = ModeLattice::new(2, 1).unwrap();
        assert!(matches!(
            wasserstein1_1d(&SpectralField::uniform(l2), &u),
            Err(Error::UnsupportedDimension(2))
        ));
    }
}
