use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{evaluate_on_grid, lattice::ModeLattice, TOL_POS};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// A probability density: unit mass, nonnegative on the evaluation grid.
    Density,
    /// A real distribution or function of arbitrary sign and mass.
    SignedDistribution,
}

/// Fourier coefficients `c^n = ∫ e^{-i2π n·x} f(x) dx` on a [`ModeLattice`].
///
/// The field is real, so `c^{-n} = conj(c^n)`; constructors symmetrise their
/// input. The pairing `∫ f dμ` of a field with a measure is
/// `Σ_n f^n conj(μ^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: ModeLattice,
    coeffs: Vec<Complex64>,
    kind: FieldKind,
}

impl SpectralField {
    fn build(lattice: ModeLattice, mut coeffs: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return invalid(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            ));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("non-finite Fourier coefficient");
        }
        symmetrise(&lattice, &mut coeffs);
        Ok(Self { lattice, coeffs, kind })
    }

    /// A signed distribution from raw coefficients.
    pub fn signed(lattice: ModeLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::build(lattice, coeffs, FieldKind::SignedDistribution)
    }

    /// A density from raw coefficients, checking unit mass and positivity on
    /// the default grid.
    pub fn density(lattice: ModeLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut f = Self::build(lattice, coeffs, FieldKind::Density)?;
        let z = lattice.zero_index();
        if (f.coeffs[z] - 1.0).norm() > 1e-12 {
            return invalid(format!("density has mass {}", f.coeffs[z]));
        }
        f.coeffs[z] = Complex64::new(1.0, 0.0);
        let min = f.grid_min()?;
        if min < -TOL_POS {
            return Err(Error::NonPositiveDensity { min });
        }
        Ok(f)
    }

    /// Density tag without the grid positivity check; mass is still pinned.
    pub(crate) fn density_unchecked(lattice: ModeLattice, mut coeffs: Vec<Complex64>) -> Self {
        symmetrise(&lattice, &mut coeffs);
        coeffs[lattice.zero_index()] = Complex64::new(1.0, 0.0);
        Self { lattice, coeffs, kind: FieldKind::Density }
    }

    pub(crate) fn signed_unchecked(lattice: ModeLattice, coeffs: Vec<Complex64>) -> Self {
        Self { lattice, coeffs, kind: FieldKind::SignedDistribution }
    }

    pub fn uniform(lattice: ModeLattice) -> Self {
        let mut coeffs = vec![Complex64::default(); lattice.len()];
        coeffs[lattice.zero_index()] = Complex64::new(1.0, 0.0);
        Self { lattice, coeffs, kind: FieldKind::Density }
    }

    pub fn zero(lattice: ModeLattice) -> Self {
        Self::signed_unchecked(lattice, vec![Complex64::default(); lattice.len()])
    }

    /// Coefficients of `x ↦ f(x)` sampled on a `(4M+1)^d` grid.
    pub fn from_fn(lattice: ModeLattice, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let g = super::default_grid(lattice.cutoff());
        let d = lattice.dim();
        let total = g.pow(d as u32);
        let mut x = vec![0.0; d];
        let samples: Vec<f64> = (0..total)
            .map(|flat| {
                let mut r = flat;
                for j in (0..d).rev() {
                    x[j] = (r % g) as f64 / g as f64;
                    r /= g;
                }
                f(&x)
            })
            .collect();
        let coeffs = super::from_grid_samples(&samples, g, lattice)?;
        Self::signed(lattice, coeffs)
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `mode`, zero outside the lattice.
    pub fn coeff(&self, mode: &[i64]) -> Complex64 {
        self.lattice
            .index(mode)
            .map_or(Complex64::default(), |i| self.coeffs[i])
    }

    pub fn mass(&self) -> f64 {
        self.coeffs[self.lattice.zero_index()].re
    }

    /// The `d = 1` coefficient `c^1`, the Kuramoto order parameter.
    pub fn first_mode(&self) -> Complex64 {
        self.coeffs[self.lattice.zero_index() + 1]
    }

    /// Maximum of `|c^n − conj(c^{-n})|`.
    pub fn conj_symmetry_defect(&self) -> f64 {
        (0..self.lattice.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.lattice.neg_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Re-tags a field as a density after checking mass and positivity.
    pub fn into_density(self) -> Result<Self> {
        Self::density(self.lattice, self.coeffs)
    }

    pub fn into_signed(mut self) -> Self {
        self.kind = FieldKind::SignedDistribution;
        self
    }

    pub(crate) fn grid_min(&self) -> Result<f64> {
        let g = super::default_grid(self.lattice.cutoff());
        Ok(evaluate_on_grid(self, g)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// Linear combination `a·self + b·other` as a signed distribution.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        self.check_same_lattice(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(Self::signed_unchecked(self.lattice, coeffs))
    }

    /// `self − other` as a signed distribution.
    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        Self::signed_unchecked(self.lattice, self.coeffs.iter().map(|c| c * a).collect())
    }

    /// Applies `f(index, coefficient)` to every mode, keeping the kind tag.
    ///
    /// `f` must map conjugate-symmetric input to conjugate-symmetric output.
    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> SpectralField {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        Self { lattice: self.lattice, coeffs, kind: self.kind }
    }

    /// Copies the coefficients onto another lattice of the same dimension,
    /// dropping modes outside it and padding with zeros.
    pub fn resample(&self, lattice: ModeLattice) -> Result<SpectralField> {
        if lattice.dim() != self.dim() {
            return Err(Error::LatticeMismatch(format!(
                "cannot resample d={} onto d={}",
                self.dim(),
                lattice.dim()
            )));
        }
        let coeffs = (0..lattice.len())
            .map(|i| {
                self.lattice
                    .translate(&lattice, i)
                    .map_or(Complex64::default(), |j| self.coeffs[j])
            })
            .collect();
        Ok(Self { lattice, coeffs, kind: self.kind })
    }

    /// `∫ self dμ = Σ_n self^n conj(μ^n)` over the modes both lattices share.
    pub fn pairing(&self, other: &SpectralField) -> Result<f64> {
        if self.lattice == other.lattice {
            return Ok(self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum());
        }
        let small = if self.lattice.cutoff() <= other.lattice.cutoff() { self } else { other };
        let big = if std::ptr::eq(small, self) { other } else { self };
        let r = small.resample(big.lattice)?;
        r.pairing(big)
    }

    /// Pointwise value `Σ_n c^n e^{i2π n·x}`.
    pub fn eval_at(&self, x: &[f64]) -> f64 {
        let lat = self.lattice;
        (0..lat.len())
            .map(|i| {
                let phase: f64 = (0..lat.dim())
                    .map(|j| lat.component(i, j) as f64 * x[j])
                    .sum();
                (self.coeffs[i] * Complex64::from_polar(1.0, TAU * phase)).re
            })
            .sum()
    }

    pub fn check_same_lattice(&self, other: &SpectralField) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch(format!(
                "{:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }
}

fn symmetrise(lattice: &ModeLattice, coeffs: &mut [Complex64]) {
    let n = lattice.len();
    for i in 0..=n / 2 {
        let j = lattice.neg_index(i);
        let avg = (coeffs[i] + coeffs[j].conj()) * 0.5;
        coeffs[i] = avg;
        coeffs[j] = avg.conj();
    }
}

/// Anything that has Fourier modes: empirical measures and spectral fields.
pub trait Measure {
    fn dim(&self) -> usize;

    /// Fourier coefficients on `lattice`.
    fn modes_on(&self, lattice: ModeLattice) -> Result<SpectralField>;

    /// Highest cutoff at which modes are known; `None` when unlimited.
    fn known_cutoff(&self) -> Option<usize>;

    /// Atoms, when the measure is a finite sum of point masses.
    fn atoms(&self) -> Option<&[f64]> {
        None
    }
}

impl Measure for SpectralField {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }

    fn modes_on(&self, lattice: ModeLattice) -> Result<SpectralField> {
        if lattice == self.lattice {
            Ok(self.clone())
        } else {
            self.resample(lattice)
        }
    }

    fn known_cutoff(&self) -> Option<usize> {
        Some(self.lattice.cutoff())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(m: usize) -> ModeLattice {
        ModeLattice::new(1, m).unwrap()
    }

    #[test]
    fn construction_enforces_symmetry() {
        let l = lat(1);
        let c = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        let f = SpectralField::signed(l, c).unwrap();
        assert_eq!(f.coeff(&[1]), Complex64::new(2.0, -1.0));
        assert_eq!(f.coeff(&[-1]), Complex64::new(2.0, 1.0));
        assert_eq!(f.conj_symmetry_defect(), 0.0);
    }

    #[test]
    fn density_rejects_negative_values() {
        let l = lat(1);
        let c = vec![Complex64::new(0.8, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.0)];
        assert!(matches!(
            SpectralField::density(l, c),
            Err(Error::NonPositiveDensity { .. })
        ));
        let bad_mass = vec![Complex64::default(), Complex64::new(2.0, 0.0), Complex64::default()];
        assert!(SpectralField::density(l, bad_mass).is_err());
    }

    #[test]
    fn pairing_integrates_against_measure() {
        let l = lat(3);
        let cos = SpectralField::from_fn(l, |x| (TAU * x[0]).cos()).unwrap();
        let dens = SpectralField::from_fn(l, |x| 1.0 + 0.5 * (TAU * x[0]).cos())
            .unwrap()
            .into_density()
            .unwrap();
        assert!((cos.pairing(&dens).unwrap() - 0.25).abs() < 1e-14);
        let wide = dens.resample(lat(7)).unwrap();
        assert!((cos.pairing(&wide).unwrap() - 0.25).abs() < 1e-14);
        assert!((dens.eval_at(&[0.0]) - 1.5).abs() < 1e-14);
    }
}
