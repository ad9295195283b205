use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

use super::{field::SpectralField, lattice::ModeLattice};
use crate::error::{Error, Result};

/// `d`-dimensional complex FFT on a `G^d` grid, axis by axis.
#[derive(Clone)]
pub struct GridTransform {
    g: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform")
            .field("g", &self.g)
            .field("dim", &self.dim)
            .finish()
    }
}

impl GridTransform {
    pub fn new(dim: usize, g: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft(g, FftDirection::Forward);
        let inverse = planner.plan_fft(g, FftDirection::Inverse);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            g,
            dim,
            forward,
            inverse,
            line: vec![Complex64::default(); g],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.g
    }

    pub fn total(&self) -> usize {
        self.g.pow(self.dim as u32)
    }

    /// Unnormalised transform along every axis; `inverse` uses `e^{+i}`.
    pub fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let g = self.g;
        let fft = if inverse { &self.inverse } else { &self.forward };
        debug_assert_eq!(data.len(), g.pow(self.dim as u32));
        for axis in 0..self.dim {
            let stride = g.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(g) {
                    fft.process_with_scratch(chunk, &mut self.scratch);
                }
                continue;
            }
            let block = stride * g;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for k in 0..g {
                        self.line[k] = data[start + k * stride];
                    }
                    fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for k in 0..g {
                        data[start + k * stride] = self.line[k];
                    }
                }
            }
        }
    }

    /// Flat grid position holding lattice mode `idx` (mode components taken mod G).
    pub fn slot(&self, lattice: &ModeLattice, idx: usize) -> usize {
        let g = self.g as i64;
        (0..lattice.dim()).fold(0usize, |acc, j| {
            acc * self.g + lattice.component(idx, j).rem_euclid(g) as usize
        })
    }

    /// Scatters coefficients onto the grid and inverse-transforms to values.
    pub fn to_grid(&mut self, lattice: &ModeLattice, coeffs: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::default());
        for (i, &c) in coeffs.iter().enumerate() {
            out[self.slot(lattice, i)] = c;
        }
        self.transform(out, true);
    }

    /// Forward-transforms grid values (destroying them) and gathers the lattice modes.
    pub fn to_modes(&mut self, lattice: &ModeLattice, values: &mut [Complex64], out: &mut [Complex64]) {
        self.transform(values, false);
        let norm = 1.0 / self.total() as f64;
        for (i, c) in out.iter_mut().enumerate() {
            *c = values[self.slot(lattice, i)] * norm;
        }
    }
}

fn check_alias(lattice: &ModeLattice, g: usize) -> Result<()> {
    if g < lattice.side() {
        return Err(Error::Alias { grid: g, cutoff: lattice.cutoff() });
    }
    Ok(())
}

/// Values of a field on the uniform grid `{k/G}^d`, flattened row-major with
/// the last coordinate fastest.
pub fn evaluate_on_grid(field: &SpectralField, g: usize) -> Result<Vec<f64>> {
    let lattice = field.lattice();
    check_alias(&lattice, g)?;
    let mut t = GridTransform::new(lattice.dim(), g);
    let mut buf = vec![Complex64::default(); t.total()];
    t.to_grid(&lattice, field.coeffs(), &mut buf);
    let scale: f64 = field.coeffs().iter().map(|c| c.norm()).sum::<f64>().max(1.0);
    let residue = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(
        residue <= 1e-10 * scale,
        "imaginary residue {residue:e} on a conjugate-symmetric field"
    );
    Ok(buf.into_iter().map(|v| v.re).collect())
}

/// Lattice coefficients interpolating real samples on a `G^d` grid.
pub fn from_grid_samples(samples: &[f64], g: usize, lattice: ModeLattice) -> Result<Vec<Complex64>> {
    check_alias(&lattice, g)?;
    let mut t = GridTransform::new(lattice.dim(), g);
    if samples.len() != t.total() {
        return Err(Error::InvalidInput(format!(
            "expected {} grid samples, got {}",
            t.total(),
            samples.len()
        )));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut out = vec![Complex64::default(); lattice.len()];
    t.to_modes(&lattice, &mut buf, &mut out);
    Ok(out)
}

/// Smallest `2^a 3^b 5^c` not below `n`.
fn fast_size(n: usize) -> usize {
    (n..)
        .find(|&k| {
            let mut r = k;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .unwrap()
}

/// Dealiased pseudo-spectral products of fields on one lattice.
///
/// The padded grid has at least `3M+1` points per axis, so the lattice modes
/// of a product of two lattice fields are exact.
#[derive(Debug, Clone)]
pub struct Product {
    lattice: ModeLattice,
    transform: GridTransform,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl Product {
    pub fn new(lattice: ModeLattice) -> Self {
        Self::with_grid(lattice, fast_size(3 * lattice.cutoff() + 1))
    }

    /// Products on the smallest unaliased evaluation grid, `2M+1` points per
    /// axis; quadratic terms then alias onto the lattice.
    pub fn aliased(lattice: ModeLattice) -> Self {
        Self::with_grid(lattice, lattice.side())
    }

    fn with_grid(lattice: ModeLattice, g: usize) -> Self {
        let transform = GridTransform::new(lattice.dim(), g);
        let total = transform.total();
        Self {
            lattice,
            transform,
            a: vec![Complex64::default(); total],
            b: vec![Complex64::default(); total],
        }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn grid_size(&self) -> usize {
        self.transform.grid_size()
    }

    /// Grid values of `coeffs` on the padded grid.
    pub fn values(&mut self, coeffs: &[Complex64], out: &mut Vec<Complex64>) {
        out.resize(self.transform.total(), Complex64::default());
        self.transform.to_grid(&self.lattice, coeffs, out);
    }

    /// Lattice modes of padded-grid values (consumes `values`).
    pub fn modes(&mut self, values: &mut [Complex64], out: &mut [Complex64]) {
        self.transform.to_modes(&self.lattice, values, out);
    }

    /// Lattice modes of the product of two lattice fields.
    pub fn multiply(&mut self, x: &[Complex64], y: &[Complex64], out: &mut [Complex64]) {
        self.transform.to_grid(&self.lattice, x, &mut self.a);
        self.transform.to_grid(&self.lattice, y, &mut self.b);
        for (u, v) in self.a.iter_mut().zip(&self.b) {
            *u *= v;
        }
        self.transform.to_modes(&self.lattice, &mut self.a, out);
    }
}
