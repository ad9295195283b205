use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use super::PotentialSpec;
use crate::error::{invalid, Result};
use crate::spectral::{ModeLattice, SpectralField};

/// Linear mean-field drift `b(x, μ) = b₀(x) + ε ∫ B(x, y) μ(dy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallMeanField {
    b0: Vec<SpectralField>,
    kernel_lattice: ModeLattice,
    /// Per component, `B̂(n, m)` row-major over `(n, m)` on `kernel_lattice`.
    kernel: Vec<Vec<Complex64>>,
    epsilon: f64,
}

impl SmallMeanField {
    /// `B_j(x, y) = Σ_{n,m} B̂_j(n, m) e^{i2π(n·x + m·y)}`.
    pub fn new(
        b0: Vec<SpectralField>,
        kernel_lattice: ModeLattice,
        kernel: Vec<Vec<Complex64>>,
        epsilon: f64,
    ) -> Result<Self> {
        let d = kernel_lattice.dim();
        if b0.len() != d || kernel.len() != d {
            return invalid(format!("need {d} drift components"));
        }
        if b0.iter().any(|f| f.dim() != d) {
            return invalid("b0 component has the wrong dimension");
        }
        if !epsilon.is_finite() {
            return invalid("epsilon must be finite");
        }
        let l = kernel_lattice.len();
        for k in &kernel {
            if k.len() != l * l {
                return invalid(format!("kernel needs {} entries per component", l * l));
            }
            for n in 0..l {
                for m in 0..l {
                    let mirror = k[kernel_lattice.neg_index(n) * l + kernel_lattice.neg_index(m)];
                    if (k[n * l + m] - mirror.conj()).norm() > 1e-14 {
                        return invalid("kernel is not real-valued");
                    }
                }
            }
        }
        Ok(Self { b0, kernel_lattice, kernel, epsilon })
    }

    /// `d = 1`: confinement `b₀ = −V₀'` with `V₀ = a cos(4πx)` and
    /// interaction kernel `B(x, y) = sin(2π(x − y))`.
    pub fn double_well(a: f64, epsilon: f64) -> Result<Self> {
        let lat = ModeLattice::new(1, 2)?;
        let mut b0 = vec![Complex64::default(); lat.len()];
        b0[lat.index(&[2]).unwrap()] = Complex64::new(0.0, -2.0 * PI * a);
        b0[lat.index(&[-2]).unwrap()] = Complex64::new(0.0, 2.0 * PI * a);
        let kl = ModeLattice::new(1, 1)?;
        let l = kl.len();
        let mut k = vec![Complex64::default(); l * l];
        k[kl.index(&[1]).unwrap() * l + kl.index(&[-1]).unwrap()] = Complex64::new(0.0, -0.5);
        k[kl.index(&[-1]).unwrap() * l + kl.index(&[1]).unwrap()] = Complex64::new(0.0, 0.5);
        Self::new(vec![SpectralField::signed(lat, b0)?], kl, vec![k], epsilon)
    }

    pub fn b0(&self) -> &[SpectralField] {
        &self.b0
    }

    pub fn kernel_lattice(&self) -> ModeLattice {
        self.kernel_lattice
    }

    pub fn kernel(&self, component: usize) -> &[Complex64] {
        &self.kernel[component]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Copy with a different interaction strength.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    /// `B_j(x, y)` evaluated pointwise.
    pub fn kernel_at(&self, component: usize, x: &[f64], y: &[f64]) -> f64 {
        let kl = self.kernel_lattice;
        let l = kl.len();
        let phase = |idx: usize, p: &[f64]| -> f64 {
            (0..kl.dim()).map(|j| kl.component(idx, j) as f64 * p[j]).sum()
        };
        let mut s = 0.0;
        for n in 0..l {
            for m in 0..l {
                let c = self.kernel[component][n * l + m];
                if c != Complex64::default() {
                    s += (c * Complex64::from_polar(1.0, TAU * (phase(n, x) + phase(m, y)))).re;
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DriftSpec {
    /// `b(x, μ) = −κ ∇W ⋆ μ (x)`.
    ConvolutionGradient { potential: PotentialSpec, kappa: f64 },
    /// `b(x, μ) = −2πκ ∫ sin(2π(x − y)) μ(dy)` on the circle.
    Kuramoto { kappa: f64 },
    SmallMeanField(SmallMeanField),
}

impl DriftSpec {
    pub fn dim(&self) -> usize {
        match self {
            DriftSpec::ConvolutionGradient { potential, .. } => potential.dim(),
            DriftSpec::Kuramoto { .. } => 1,
            DriftSpec::SmallMeanField(s) => s.kernel_lattice.dim(),
        }
    }

    /// Highest mode of `μ` the drift depends on.
    pub fn support(&self) -> usize {
        match self {
            DriftSpec::ConvolutionGradient { potential, .. } => potential.support(),
            DriftSpec::Kuramoto { .. } => 1,
            DriftSpec::SmallMeanField(s) => s.kernel_lattice.cutoff(),
        }
    }

    /// The potential and coupling of a convolution drift.
    pub fn as_convolution(&self) -> Option<(PotentialSpec, f64)> {
        match self {
            DriftSpec::ConvolutionGradient { potential, kappa } => Some((potential.clone(), *kappa)),
            DriftSpec::Kuramoto { kappa } => Some((PotentialSpec::kuramoto(), *kappa)),
            DriftSpec::SmallMeanField(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DriftSpec::ConvolutionGradient { kappa, .. } | DriftSpec::Kuramoto { kappa } if !kappa.is_finite() => {
                invalid("coupling must be finite")
            }
            _ => Ok(()),
        }
    }
}
