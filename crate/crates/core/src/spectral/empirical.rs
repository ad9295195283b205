use num_complex::Complex64;
use std::f64::consts::TAU;

use super::{field::Measure, lattice::ModeLattice, torus::wrap_coord, SpectralField, TorusPoint};
use crate::error::{invalid, Result};

const FIXED_SCALE: f64 = (1u64 << 60) as f64;

/// Rounds `v ∈ [-1,1]` to a 60-bit fixed-point integer.
///
/// Sums of these integers are exact, so empirical Fourier modes do not depend
/// on particle order.
#[inline]
pub(crate) fn quantize(v: f64) -> i128 {
    // |v| ≤ 1 keeps the product inside i64
    (v * FIXED_SCALE).round_ties_even() as i64 as i128
}

#[inline]
pub(crate) fn dequantize(s: i128, count: usize) -> f64 {
    s as f64 / FIXED_SCALE / count as f64
}

/// Writes `e^{-i2πk x_j}` for `k = 0..=m` into row `j` of `out`.
pub(crate) fn fill_powers(x: &[f64], m: usize, out: &mut [Complex64]) {
    for (j, &xj) in x.iter().enumerate() {
        let base = Complex64::from_polar(1.0, -TAU * xj);
        let row = &mut out[j * (m + 1)..(j + 1) * (m + 1)];
        row[0] = Complex64::new(1.0, 0.0);
        for k in 1..=m {
            // direct evaluation keeps every power within an ulp
            row[k] = if k % 8 == 0 {
                Complex64::from_polar(1.0, -TAU * k as f64 * xj)
            } else {
                row[k - 1] * base
            };
        }
    }
}

/// For each mode of the upper half lattice, the row offset into a
/// [`fill_powers`] table and whether the power is conjugated (negative
/// component), flattened `half × d`.
pub(crate) fn half_table(lattice: ModeLattice) -> Vec<(usize, bool)> {
    let (z, d, m) = (lattice.zero_index(), lattice.dim(), lattice.cutoff());
    (z..lattice.len())
        .flat_map(|idx| {
            (0..d).map(move |j| {
                let n = lattice.component(idx, j);
                (j * (m + 1) + n.unsigned_abs() as usize, n < 0)
            })
        })
        .collect()
}

/// Order-independent accumulator of `(1/N) Σ_i e^{-i2π n·x_i}` over a lattice.
#[derive(Clone, Debug)]
pub struct ModeAccumulator {
    lattice: ModeLattice,
    re: Vec<i128>,
    im: Vec<i128>,
    powers: Vec<Complex64>,
    table: Vec<(usize, bool)>,
    count: usize,
}

impl ModeAccumulator {
    pub fn new(lattice: ModeLattice) -> Self {
        let half = lattice.len() - lattice.zero_index();
        Self {
            lattice,
            re: vec![0; half],
            im: vec![0; half],
            powers: vec![Complex64::default(); lattice.dim() * (lattice.cutoff() + 1)],
            table: half_table(lattice),
            count: 0,
        }
    }

    pub fn reset(&mut self) {
        self.re.iter_mut().for_each(|v| *v = 0);
        self.im.iter_mut().for_each(|v| *v = 0);
        self.count = 0;
    }

    pub fn add(&mut self, x: &[f64]) {
        let mut powers = std::mem::take(&mut self.powers);
        fill_powers(x, self.lattice.cutoff(), &mut powers);
        self.add_powers(&powers);
        self.powers = powers;
    }

    /// Adds a particle given its [`fill_powers`] table for this lattice's cutoff.
    pub(crate) fn add_powers(&mut self, powers: &[Complex64]) {
        let d = self.lattice.dim();
        for (h, row) in self.table.chunks_exact(d).enumerate().skip(1) {
            let mut v = Complex64::new(1.0, 0.0);
            for &(k, neg) in row {
                let p = powers[k];
                v *= if neg { p.conj() } else { p };
            }
            self.re[h] += quantize(v.re);
            self.im[h] += quantize(v.im);
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Normalised coefficients over the full lattice.
    pub fn coeffs(&self) -> Vec<Complex64> {
        let z = self.lattice.zero_index();
        let mut out = vec![Complex64::default(); self.lattice.len()];
        for h in 0..self.re.len() {
            let c = Complex64::new(
                dequantize(self.re[h], self.count),
                dequantize(self.im[h], self.count),
            );
            out[z + h] = c;
            out[z - h] = c.conj();
        }
        out[z] = Complex64::new(1.0, 0.0);
        out
    }
}

/// `c^n = (1/N) Σ_i e^{-i2π n·x_i}` for a list of particles.
pub fn fourier_modes_of_empirical(particles: &[TorusPoint], lattice: ModeLattice) -> Result<SpectralField> {
    if particles.is_empty() {
        return invalid("empty particle list");
    }
    let mut acc = ModeAccumulator::new(lattice);
    for p in particles {
        if p.dim() != lattice.dim() {
            return invalid("particle dimension does not match lattice");
        }
        acc.add(p.coords());
    }
    Ok(SpectralField::density_unchecked(lattice, acc.coeffs()))
}

/// `N` particles on the torus with their low-order Fourier modes.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    coords: Vec<f64>,
    modes: SpectralField,
}

impl EmpiricalMeasure {
    /// Particles as a flat row-major `N × d` array; coordinates are wrapped.
    pub fn new(mut coords: Vec<f64>, lattice: ModeLattice) -> Result<Self> {
        let dim = lattice.dim();
        if coords.is_empty() || coords.len() % dim != 0 {
            return invalid(format!("{} coordinates do not form d={dim} particles", coords.len()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite particle coordinate");
        }
        coords.iter_mut().for_each(|x| *x = wrap_coord(*x));
        let mut acc = ModeAccumulator::new(lattice);
        for p in coords.chunks_exact(dim) {
            acc.add(p);
        }
        let modes = SpectralField::density_unchecked(lattice, acc.coeffs());
        Ok(Self { dim, coords, modes })
    }

    pub fn from_points(points: &[TorusPoint], lattice: ModeLattice) -> Result<Self> {
        Self::new(points.iter().flat_map(|p| p.coords().iter().copied()).collect(), lattice)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn modes(&self) -> &SpectralField {
        &self.modes
    }

    pub fn lattice(&self) -> ModeLattice {
        self.modes.lattice()
    }
}

impl Measure for EmpiricalMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn modes_on(&self, lattice: ModeLattice) -> Result<SpectralField> {
        if lattice == self.modes.lattice() {
            return Ok(self.modes.clone());
        }
        let mut acc = ModeAccumulator::new(lattice);
        for p in self.coords.chunks_exact(self.dim) {
            acc.add(p);
        }
        Ok(SpectralField::density_unchecked(lattice, acc.coeffs()))
    }

    fn known_cutoff(&self) -> Option<usize> {
        None
    }

    fn atoms(&self) -> Option<&[f64]> {
        Some(&self.coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::wrap;

    #[test]
    fn point_masses() {
        let l = ModeLattice::new(1, 5).unwrap();
        let f = fourier_modes_of_empirical(&[wrap(&[0.0]).unwrap()], l).unwrap();
        assert!(f.coeffs().iter().all(|c| (c - 1.0).norm() < 1e-15));
        let pts = [wrap(&[0.0]).unwrap(), wrap(&[0.5]).unwrap()];
        let f = fourier_modes_of_empirical(&pts, l).unwrap();
        assert!(f.coeff(&[1]).norm() < 1e-15);
        assert!((f.coeff(&[2]) - 1.0).norm() < 1e-15);
        assert!(fourier_modes_of_empirical(&[], l).is_err());
    }

    #[test]
    fn high_powers_stay_accurate() {
        let l = ModeLattice::new(1, 40).unwrap();
        let x = 0.123_456_789_f64;
        let f = EmpiricalMeasure::new(vec![x], l).unwrap();
        for n in -40i64..=40 {
            let want = Complex64::from_polar(1.0, -TAU * n as f64 * x);
            assert!((f.modes().coeff(&[n]) - want).norm() < 1e-13);
        }
    }
}
