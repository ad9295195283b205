use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::flow::{check_initial, integrate, Block, Series};
use super::galerkin::Galerkin;
use super::integrator::{Nonlinear, SolverConfig};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::spectral::{fejer_weight, Measure, ModeLattice, SpectralField, TorusPoint};

/// How a Dirac mass and its derivatives are represented on a finite lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiracSmoothing {
    /// Fejér weights of the given order; nonnegative for the mass itself.
    Fejer(usize),
    /// Raw truncation of the Fourier series.
    Truncate,
}

impl DiracSmoothing {
    /// Fejér smoothing of order `M + 1`, which keeps every lattice mode.
    pub fn default_for(lattice: ModeLattice) -> Self {
        DiracSmoothing::Fejer(lattice.cutoff() + 1)
    }

    fn weight(&self, mode: &[i64]) -> f64 {
        match self {
            DiracSmoothing::Fejer(n) => fejer_weight(mode, *n),
            DiracSmoothing::Truncate => 1.0,
        }
    }
}

fn check_point(lattice: ModeLattice, z: &TorusPoint) -> Result<()> {
    if z.dim() != lattice.dim() {
        return invalid(format!("point has d={}, lattice has d={}", z.dim(), lattice.dim()));
    }
    Ok(())
}

/// Modes `w(n) e^{-i2πn·z}` of a smoothed Dirac mass at `z`.
pub fn dirac_modes(lattice: ModeLattice, z: &TorusPoint, smoothing: DiracSmoothing) -> Result<SpectralField> {
    check_point(lattice, z)?;
    let coeffs = (0..lattice.len())
        .map(|i| {
            let mode = lattice.mode(i);
            let phase: f64 = mode.iter().zip(z.coords()).map(|(n, x)| *n as f64 * x).sum();
            C::from_polar(smoothing.weight(&mode), -TAU * phase)
        })
        .collect();
    Ok(SpectralField::density_unchecked(lattice, coeffs))
}

/// Modes `−i2πn_i w(n) e^{-i2πn·z}` of the distribution `ξ ↦ ∂_iξ(z)`, smoothed.
pub fn dirac_derivative_modes(
    lattice: ModeLattice,
    z: &TorusPoint,
    component: usize,
    smoothing: DiracSmoothing,
) -> Result<SpectralField> {
    check_point(lattice, z)?;
    if component >= lattice.dim() {
        return invalid(format!("component {component} out of range for d={}", lattice.dim()));
    }
    let delta = dirac_modes(lattice, z, smoothing)?;
    Ok(delta.map_modes(|i, c| C::new(0.0, -TAU * lattice.component(i, component) as f64) * c).into_signed())
}

/// Flow, first-order tangents and second-order tangents integrated together.
#[derive(Clone, Debug)]
pub struct LinearisedRun {
    pub flow: Series,
    pub first: Vec<Series>,
    pub second: Vec<Series>,
}

struct Joint<'a> {
    g: &'a mut Galerkin,
    firsts: usize,
    pairs: &'a [(usize, usize)],
}

impl Nonlinear for Joint<'_> {
    fn eval(&mut self, _t: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
        let (m, rest) = y.split_first().expect("flow block");
        let (o0, orest) = out.split_first_mut().expect("flow block");
        self.g.fp_nonlinear(m, o0);
        for (q, o) in rest.iter().zip(orest.iter_mut()) {
            self.g.tangent_nonlinear(m, q, o);
        }
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            // the second variation of the drift vanishes: b is affine in the measure
            self.g.add_second_source(&rest[a], &rest[b], &mut orest[self.firsts + k]);
        }
    }
}

/// Solves the flow from `μ` together with the tangent equations
/// `∂_t q = L_{m(t)} q` from each entry of `first`, and the second-order
/// equations driven by each pair of first-order tangents, from zero.
pub fn solve_linearised(
    drift: &DriftSpec,
    mu: &SpectralField,
    first: &[SpectralField],
    pairs: &[(usize, usize)],
    cfg: &SolverConfig,
) -> Result<LinearisedRun> {
    let m0 = check_initial(drift, mu, cfg)?;
    let lat = cfg.lattice;
    let mut y = vec![m0];
    for q in first {
        if q.dim() != lat.dim() {
            return invalid("tangent datum has the wrong dimension");
        }
        y.push(q.resample(lat)?.into_coeffs());
    }
    if pairs.iter().any(|&(a, b)| a >= first.len() || b >= first.len()) {
        return invalid("second-order pair refers to a missing tangent");
    }
    y.extend(pairs.iter().map(|_| vec![C::default(); lat.len()]));
    let mut kinds = vec![Block::Density];
    kinds.resize(y.len(), Block::Tangent);
    let mut g = Galerkin::new(drift, lat, cfg.dealias);
    let diffusion = g.diffusion.clone();
    let mut sys = Joint { g: &mut g, firsts: first.len(), pairs };
    let mut all = integrate(&mut sys, &diffusion, cfg, y, &kinds)?.into_iter();
    let flow = all.next().expect("flow series");
    let first: Vec<Series> = all.by_ref().take(first.len()).collect();
    Ok(LinearisedRun { flow, first, second: all.collect() })
}

/// `m⁽¹⁾(t; μ, ν)`: the tangent started from `ν − μ`.
pub fn solve_m1<M: Measure + ?Sized>(drift: &DriftSpec, mu: &SpectralField, nu: &M, cfg: &SolverConfig) -> Result<Series> {
    let q0 = nu.modes_on(cfg.lattice)?.sub(&mu.resample(cfg.lattice)?)?;
    Ok(solve_linearised(drift, mu, &[q0], &[], cfg)?.first.remove(0))
}

/// `d⁽¹⁾_i(t; μ, z)`: the tangent started from the smoothed `∂_i δ_z`.
pub fn solve_d1(
    drift: &DriftSpec,
    mu: &SpectralField,
    z: &TorusPoint,
    component: usize,
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<Series> {
    let q0 = dirac_derivative_modes(cfg.lattice, z, component, smoothing)?;
    Ok(solve_linearised(drift, mu, &[q0], &[], cfg)?.first.remove(0))
}

/// `m⁽²⁾(t; μ, ν_a, ν_b)` with zero initial datum.
pub fn solve_m2<M: Measure + ?Sized>(
    drift: &DriftSpec,
    mu: &SpectralField,
    nu_a: &M,
    nu_b: &M,
    cfg: &SolverConfig,
) -> Result<Series> {
    let base = mu.resample(cfg.lattice)?;
    let qa = nu_a.modes_on(cfg.lattice)?.sub(&base)?;
    let qb = nu_b.modes_on(cfg.lattice)?.sub(&base)?;
    Ok(solve_linearised(drift, mu, &[qa, qb], &[(0, 1)], cfg)?.second.remove(0))
}

/// `d⁽²⁾_{i,j}(t; μ, z₁, z₂)` with zero initial datum.
pub fn solve_d2(
    drift: &DriftSpec,
    mu: &SpectralField,
    (z1, i): (&TorusPoint, usize),
    (z2, j): (&TorusPoint, usize),
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<Series> {
    let qa = dirac_derivative_modes(cfg.lattice, z1, i, smoothing)?;
    let qb = dirac_derivative_modes(cfg.lattice, z2, j, smoothing)?;
    Ok(solve_linearised(drift, mu, &[qa, qb], &[(0, 1)], cfg)?.second.remove(0))
}
