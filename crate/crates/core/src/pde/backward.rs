use num_complex::Complex64 as C;

use super::flow::{integrate, Block, Series};
use super::galerkin::Galerkin;
use super::integrator::{Integrator, Nonlinear, SolverConfig};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::spectral::SpectralField;

/// Which drift the backward equation transports along.
#[derive(Clone, Debug, PartialEq)]
pub enum Freeze {
    /// `V(s) = b(·, m(s))` read from the recorded flow.
    AlongFlow,
    /// `V = b(·, uniform)`.
    AtUniform,
    /// The adjoint of the generator linearised at a fixed density, including
    /// the nonlocal mean-field term.
    AtProfile(SpectralField),
}

struct Backward<'a> {
    g: Galerkin,
    velocity: Velocity<'a>,
    horizon: f64,
    spacing: f64,
    scratch: Vec<C>,
}

enum Velocity<'a> {
    Flow(&'a Series),
    Fixed(Vec<Vec<C>>, Option<Vec<C>>),
}

impl Nonlinear for Backward<'_> {
    fn eval(&mut self, tau: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
        match &self.velocity {
            Velocity::Flow(flow) => {
                let k = ((self.horizon - tau) / self.spacing).round() as usize;
                let v = self.g.drift_components(flow.states()[k].coeffs());
                self.g.transport(&v, &y[0], &mut out[0]);
            }
            Velocity::Fixed(v, profile) => {
                let v = v.clone();
                self.g.transport(&v, &y[0], &mut out[0]);
                if let Some(p) = profile {
                    self.scratch.clone_from(&out[0]);
                    self.g.add_adjoint_nonlocal(p, &y[0], &mut self.scratch);
                    out[0].clone_from(&self.scratch);
                }
            }
        }
    }
}

/// Solves `∂_s w + ½Δw + V(s)·∇w = 0` on `[0, t]` from `w(t) = ξ`.
///
/// `flow` must be recorded at every step of a uniform grid starting at 0 and
/// reaching `t`; the backward step is twice that spacing, so `t` must be an
/// even multiple of it. The result is ordered by increasing `s`.
pub fn solve_backward_kolmogorov(
    drift: &DriftSpec,
    flow: &Series,
    xi: &SpectralField,
    t: f64,
    freeze: &Freeze,
) -> Result<Series> {
    drift.validate()?;
    let times = flow.times();
    if times.len() < 3 || times[0] != 0.0 {
        return invalid("flow must start at 0 and hold at least three records");
    }
    let h = times[1];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return invalid("flow records must be evenly spaced");
    }
    let last = *times.last().expect("nonempty");
    if t > last + 1e-9 || t < 0.0 {
        return invalid(format!("flow covers [0, {last}], backward horizon is {t}"));
    }
    let n = (t / (2.0 * h)).round();
    if (n * 2.0 * h - t).abs() > 1e-9 * t.max(1.0) {
        return invalid(format!("horizon {t} is not an even multiple of the flow spacing {h}"));
    }
    let lat = flow.last().lattice();
    if xi.dim() != lat.dim() {
        return invalid("terminal datum has the wrong dimension");
    }
    let g = Galerkin::new(drift, lat, true);
    let velocity = match freeze {
        Freeze::AlongFlow => Velocity::Flow(flow),
        Freeze::AtUniform => Velocity::Fixed(g.drift_components(SpectralField::uniform(lat).coeffs()), None),
        Freeze::AtProfile(p) => {
            let p = p.resample(lat)?.into_coeffs();
            Velocity::Fixed(g.drift_components(&p), Some(p))
        }
    };
    let cfg = SolverConfig {
        lattice: lat,
        dt: 2.0 * h,
        t_end: t,
        integrator: Integrator::Etdrk4,
        dealias: true,
        record_stride: 1,
    };
    let diffusion = g.diffusion.clone();
    let mut sys = Backward { g, velocity, horizon: t, spacing: h, scratch: vec![C::default(); lat.len()] };
    let w0 = xi.resample(lat)?.into_coeffs();
    let s = integrate(&mut sys, &diffusion, &cfg, vec![w0], &[Block::Free])?.remove(0);
    let mut times: Vec<f64> = s.times().iter().map(|tau| t - tau).collect();
    let mut states = s.states().to_vec();
    times.reverse();
    states.reverse();
    Ok(Series::from_parts(times, states))
}

#[cfg(test)]
mod tests {
    use super::super::{solve_nonlinear_fp, SolverConfig};
    use super::*;
    use crate::drift::PotentialSpec;
    use crate::spectral::ModeLattice;
    use std::f64::consts::{PI, TAU};

    fn xi(lat: ModeLattice) -> SpectralField {
        SpectralField::from_fn(lat, |x| (TAU * x[0]).cos() + 0.3 * (2.0 * TAU * x[0]).sin() + 2.0).unwrap()
    }

    #[test]
    fn constants_are_invariant() {
        let lat = ModeLattice::new(1, 8).unwrap();
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.5 * (TAU * x[0]).cos()).unwrap().into_density().unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let flow = solve_nonlinear_fp(&drift, &mu, &SolverConfig::new(lat, 0.01, 1.0).unwrap()).unwrap();
        let c = SpectralField::uniform(lat).scale(3.0);
        let w = solve_backward_kolmogorov(&drift, &flow, &c, 1.0, &Freeze::AlongFlow).unwrap();
        for s in w.states() {
            assert!(s.sub(&c).unwrap().coeffs().iter().all(|v| v.norm() < 1e-14));
        }
    }

    #[test]
    fn free_drift_gives_heat_evolution() {
        let lat = ModeLattice::new(1, 8).unwrap();
        let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(1), kappa: 0.0 };
        let flow = solve_nonlinear_fp(&drift, &SpectralField::uniform(lat), &SolverConfig::new(lat, 0.01, 1.0).unwrap())
            .unwrap();
        let x = xi(lat);
        let w = solve_backward_kolmogorov(&drift, &flow, &x, 1.0, &Freeze::AlongFlow).unwrap();
        assert_eq!(w.times()[0], 0.0);
        for (s, st) in w.times().iter().zip(w.states()) {
            for (i, c) in st.coeffs().iter().enumerate() {
                let want = x.coeffs()[i] * (-2.0 * PI * PI * lat.norm_sq(i) as f64 * (1.0 - s)).exp();
                assert!((c - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_short_flow() {
        let lat = ModeLattice::new(1, 4).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 1.0 };
        let flow = solve_nonlinear_fp(&drift, &SpectralField::uniform(lat), &SolverConfig::new(lat, 0.01, 0.5).unwrap())
            .unwrap();
        assert!(solve_backward_kolmogorov(&drift, &flow, &xi(lat), 1.0, &Freeze::AlongFlow).is_err());
    }

    #[test]
    fn duality_with_forward_flow() {
        // d/ds ⟨w(s), m(s)⟩ = 0 when w solves the adjoint of the generator linearised
        // along the flow; with the flow frozen at the profile both are stationary objects
        let lat = ModeLattice::new(1, 16).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let p = super::super::stationary_kuramoto_profile(2.0, lat).unwrap().p;
        let h = 0.0025;
        let flow = solve_nonlinear_fp(&drift, &p, &SolverConfig::new(lat, h, 0.4).unwrap()).unwrap();
        let q0 = SpectralField::from_fn(lat, |x| 0.2 * (TAU * x[0]).sin() - 0.1 * (2.0 * TAU * x[0]).cos())
            .unwrap();
        let q = super::super::solve_m1(&drift, &p, &p.combine(1.0, &q0, 1.0).unwrap(), &SolverConfig::new(lat, 2.0 * h, 0.4).unwrap())
            .unwrap();
        let x = xi(lat);
        let w = solve_backward_kolmogorov(&drift, &flow, &x, 0.4, &Freeze::AtProfile(p.clone())).unwrap();
        let lhs = x.pairing(q.last()).unwrap();
        let rhs = w.states()[0].pairing(&q.states()[0]).unwrap();
        assert!((lhs - rhs).abs() < 1e-5, "{lhs} {rhs}");
    }
}
