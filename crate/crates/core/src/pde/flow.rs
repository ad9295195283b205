use num_complex::Complex64 as C;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

use super::galerkin::Galerkin;
use super::integrator::{symmetrise, Nonlinear, SolverConfig, Stepper};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::spectral::{io::fmt17, FieldKind, SpectralField, TOL_POS};

/// First recorded time at which the density dipped below `-tol_pos`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityBreach {
    pub t: f64,
    pub min: f64,
}

/// Recorded states of one mode system.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    times: Vec<f64>,
    states: Vec<SpectralField>,
    breach: Option<PositivityBreach>,
}

impl Series {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &SpectralField {
        self.states.last().expect("series holds the initial state")
    }

    pub fn breach(&self) -> Option<PositivityBreach> {
        self.breach
    }

    /// State recorded at `t`, within a relative tolerance of `1e-9`.
    pub fn at(&self, t: f64) -> Option<&SpectralField> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol).map(|i| &self.states[i])
    }

    pub(crate) fn from_parts(times: Vec<f64>, states: Vec<SpectralField>) -> Self {
        Self { times, states, breach: None }
    }

    /// `t` then interleaved real and imaginary parts, one row per record.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let Some(first) = self.states.first() else { return Ok(()) };
        let lat = first.lattice();
        let mut header = vec!["t".to_string()];
        for mode in lat.modes() {
            let tag = mode.iter().map(i64::to_string).collect::<Vec<_>>().join("_");
            header.push(format!("re[{tag}]"));
            header.push(format!("im[{tag}]"));
        }
        writeln!(out, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt17(*t)];
            for c in s.coeffs() {
                row.push(fmt17(c.re));
                row.push(fmt17(c.im));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Role of a block in a joint system, which fixes its zero mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Block {
    /// Mass pinned to 1, positivity monitored.
    Density,
    /// Mass pinned to 0.
    Tangent,
    /// Zero mode evolves freely.
    Free,
}

impl Block {
    fn pin(self, b: &mut [C], z: usize) {
        match self {
            Block::Density => b[z] = C::new(1.0, 0.0),
            Block::Tangent => b[z] = C::default(),
            Block::Free => {}
        }
    }
}

/// Integrates a stack of blocks and records each one.
pub(crate) fn integrate(
    sys: &mut impl Nonlinear,
    diffusion: &[f64],
    cfg: &SolverConfig,
    mut y: Vec<Vec<C>>,
    kinds: &[Block],
) -> Result<Vec<Series>> {
    cfg.validate()?;
    let lat = cfg.lattice;
    let z = lat.zero_index();
    let (n, dt) = cfg.steps();
    let mut stepper = Stepper::new(cfg.integrator, dt, diffusion, y.len());
    let mut out: Vec<Series> = kinds
        .iter()
        .map(|_| Series { times: Vec::new(), states: Vec::new(), breach: None })
        .collect();
    let record = |t: f64, y: &[Vec<C>], out: &mut Vec<Series>| -> Result<()> {
        for ((s, b), kind) in out.iter_mut().zip(y).zip(kinds) {
            let field = match kind {
                Block::Density => SpectralField::density_unchecked(lat, b.clone()),
                _ => SpectralField::signed_unchecked(lat, b.clone()),
            };
            if *kind == Block::Density && s.breach.is_none() {
                let min = field.grid_min()?;
                if min < -TOL_POS {
                    s.breach = Some(PositivityBreach { t, min });
                }
            }
            s.times.push(t);
            s.states.push(field);
        }
        Ok(())
    };
    for (b, kind) in y.iter_mut().zip(kinds) {
        symmetrise(&lat, b);
        kind.pin(b, z);
    }
    record(0.0, &y, &mut out)?;
    for k in 0..n {
        stepper.step(sys, k as f64 * dt, &mut y);
        for (b, kind) in y.iter_mut().zip(kinds) {
            symmetrise(&lat, b);
            kind.pin(b, z);
        }
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            record((k + 1) as f64 * dt, &y, &mut out)?;
        }
    }
    Ok(out)
}

struct Flow<'a>(&'a mut Galerkin);

impl Nonlinear for Flow<'_> {
    fn eval(&mut self, _t: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
        self.0.fp_nonlinear(&y[0], &mut out[0]);
    }
}

pub(crate) fn check_initial(drift: &DriftSpec, mu: &SpectralField, cfg: &SolverConfig) -> Result<Vec<C>> {
    drift.validate()?;
    if mu.dim() != drift.dim() || cfg.lattice.dim() != drift.dim() {
        return invalid("drift, initial measure and lattice must share the dimension");
    }
    if mu.kind() != FieldKind::Density {
        return invalid("initial condition must be a density");
    }
    Ok(mu.resample(cfg.lattice)?.into_coeffs())
}

/// Fourier-Galerkin solution `t ↦ m(t; μ)` of the nonlinear Fokker-Planck
/// equation `∂_t m = ½Δm − div(m b(·, m))`.
///
/// A dip below the positivity tolerance is reported through
/// [`Series::breach`]; the run itself continues.
pub fn solve_nonlinear_fp(drift: &DriftSpec, mu: &SpectralField, cfg: &SolverConfig) -> Result<Series> {
    let m0 = check_initial(drift, mu, cfg)?;
    let mut g = Galerkin::new(drift, cfg.lattice, cfg.dealias);
    let diffusion = g.diffusion.clone();
    let mut series = integrate(&mut Flow(&mut g), &diffusion, cfg, vec![m0], &[Block::Density])?;
    Ok(series.remove(0))
}

/// `∂_t m` at `m`, as a signed field on `m`'s lattice.
pub fn fp_rhs(drift: &DriftSpec, m: &SpectralField) -> Result<SpectralField> {
    drift.validate()?;
    if m.dim() != drift.dim() {
        return invalid("field and drift dimensions differ");
    }
    let mut g = Galerkin::new(drift, m.lattice(), true);
    let mut out = vec![C::default(); m.lattice().len()];
    g.fp_nonlinear(m.coeffs(), &mut out);
    for (o, (d, c)) in out.iter_mut().zip(g.diffusion.iter().zip(m.coeffs())) {
        *o -= c * d;
    }
    SpectralField::signed(m.lattice(), out)
}

struct KuramotoModes {
    kappa: f64,
    cutoff: usize,
}

impl Nonlinear for KuramotoModes {
    fn eval(&mut self, _t: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
        // modes ℓ = 0..=M of a real field; m^{-1} = conj(m^1)
        let m = &y[0];
        let m1 = m[1];
        let c = 2.0 * PI * PI * self.kappa;
        for l in 0..=self.cutoff {
            let below = if l == 0 { m1.conj() } else { m[l - 1] };
            let above = if l == self.cutoff { C::default() } else { m[l + 1] };
            out[0][l] = (below * m1 - above * m1.conj()) * (c * l as f64);
        }
    }
}

/// The Kuramoto flow in `d = 1` through the closed mode recursion
/// `dm^ℓ/dt = 2π²κℓ(m^{ℓ-1}m¹ − m^{ℓ+1}m^{-1}) − 2π²ℓ²m^ℓ`,
/// truncated at `M`. Independent of the pseudo-spectral products.
pub fn kuramoto_mode_flow(kappa: f64, mu: &SpectralField, cfg: &SolverConfig) -> Result<Series> {
    cfg.validate()?;
    if mu.dim() != 1 || cfg.lattice.dim() != 1 {
        return invalid("the mode recursion is one-dimensional");
    }
    let lat = cfg.lattice;
    let m = lat.cutoff();
    if m < 1 {
        return invalid("cutoff must be at least 1");
    }
    let full = mu.resample(lat)?;
    let z = lat.zero_index();
    let y0: Vec<C> = full.coeffs()[z..].to_vec();
    let diffusion: Vec<f64> = (0..=m).map(|l| 2.0 * PI * PI * (l * l) as f64).collect();
    let (n, dt) = cfg.steps();
    let mut sys = KuramotoModes { kappa, cutoff: m };
    let mut stepper = Stepper::new(cfg.integrator, dt, &diffusion, 1);
    let mut y = vec![y0];
    let expand = |half: &[C]| {
        let mut c = vec![C::default(); lat.len()];
        for (l, v) in half.iter().enumerate() {
            c[z + l] = *v;
            c[z - l] = v.conj();
        }
        SpectralField::density_unchecked(lat, c)
    };
    let mut times = vec![0.0];
    let mut states = vec![expand(&y[0])];
    for k in 0..n {
        stepper.step(&mut sys, k as f64 * dt, &mut y);
        y[0][0] = C::new(1.0, 0.0);
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            times.push((k + 1) as f64 * dt);
            states.push(expand(&y[0]));
        }
    }
    Ok(Series::from_parts(times, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::PotentialSpec;
    use crate::spectral::ModeLattice;

    fn bump(lat: ModeLattice) -> SpectralField {
        SpectralField::from_fn(lat, |x| {
            let s = x.iter().map(|v| (std::f64::consts::TAU * v).cos()).sum::<f64>();
            (0.9 * s).exp()
        })
        .map(|f| f.scale(1.0 / f.mass()))
        .unwrap()
        .into_density()
        .unwrap()
    }

    #[test]
    fn heat_flow_is_exact() {
        let lat = ModeLattice::new(2, 6).unwrap();
        let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(2), kappa: 0.0 };
        let mu = bump(lat);
        let cfg = SolverConfig::new(lat, 0.05, 1.0).unwrap();
        let s = solve_nonlinear_fp(&drift, &mu, &cfg).unwrap();
        for (i, c) in s.last().coeffs().iter().enumerate() {
            let want = mu.coeffs()[i] * (-2.0 * PI * PI * lat.norm_sq(i) as f64).exp();
            assert!((c - want).norm() < 1e-10);
        }
        assert_eq!(s.len(), 21);
    }

    #[test]
    fn uniform_is_fixed() {
        let lat = ModeLattice::new(1, 8).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 3.0 };
        let cfg = SolverConfig::new(lat, 0.05, 2.0).unwrap();
        let s = solve_nonlinear_fp(&drift, &SpectralField::uniform(lat), &cfg).unwrap();
        let z = lat.zero_index();
        for st in s.states() {
            for (i, c) in st.coeffs().iter().enumerate() {
                if i != z {
                    assert!(c.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mode_recursion_matches_products() {
        let lat = ModeLattice::new(1, 12).unwrap();
        let mu = bump(lat);
        let cfg = SolverConfig::new(lat, 0.01, 1.0).unwrap().with_stride(10);
        let a = solve_nonlinear_fp(&DriftSpec::Kuramoto { kappa: 2.0 }, &mu, &cfg).unwrap();
        let b = kuramoto_mode_flow(2.0, &mu, &cfg).unwrap();
        assert_eq!(a.times(), b.times());
        for (x, y) in a.states().iter().zip(b.states()) {
            for (p, q) in x.coeffs().iter().zip(y.coeffs()) {
                assert!((p - q).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn self_convergence_is_fourth_order() {
        use super::super::Integrator;
        let lat = ModeLattice::new(1, 10).unwrap();
        let mu = bump(lat);
        let drift = DriftSpec::Kuramoto { kappa: 2.5 };
        for (kind, dt) in [(Integrator::IfRk4, 0.0025), (Integrator::Etdrk4, 0.005)] {
            let run = |dt: f64| {
                let cfg = SolverConfig::new(lat, dt, 0.1).unwrap().with_integrator(kind);
                solve_nonlinear_fp(&drift, &mu, &cfg).unwrap().last().clone()
            };
            let r = run(dt / 4.0);
            let err = |s: SpectralField| s.sub(&r).unwrap().coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            let order = (err(run(dt)) / err(run(dt / 2.0))).log2();
            assert!(order >= 3.5, "{kind:?} order {order}");
        }
    }

    #[test]
    fn stationary_profile_has_small_residual() {
        let lat = ModeLattice::new(1, 24).unwrap();
        let p = super::super::stationary_kuramoto_profile(2.0, lat).unwrap();
        let r = fp_rhs(&DriftSpec::Kuramoto { kappa: 2.0 }, &p.p).unwrap();
        let norm = crate::spectral::sobolev_dual_norm(&r, &SpectralField::zero(lat), 1.0).unwrap();
        assert!(norm < 1e-8, "{norm}");
    }
}
