use super::flow::solve_nonlinear_fp;
use super::integrator::SolverConfig;
use super::tangent::{dirac_derivative_modes, dirac_modes, solve_linearised, DiracSmoothing};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::functionals::FunctionalSpec;
use crate::spectral::{SpectralField, TorusPoint};

fn horizon(cfg: &SolverConfig, t: f64) -> Result<SolverConfig> {
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("time {t} must be finite and nonnegative"));
    }
    Ok(cfg.with_t_end(t))
}

/// `δ𝒰/δm(t, μ)(z) = ⟨δΦ/δm(m(t; μ)), m⁽¹⁾(t; μ, δ_z)⟩`, where
/// `𝒰(t, μ) = Φ(m(t; μ))` and the Dirac mass is smoothed.
pub fn u_first_derivative(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    t: f64,
    z: &TorusPoint,
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<f64> {
    let cfg = horizon(cfg, t)?;
    let q0 = dirac_modes(cfg.lattice, z, smoothing)?.sub(&mu.resample(cfg.lattice)?)?;
    let run = solve_linearised(drift, mu, &[q0], &[], &cfg)?;
    Ok(phi.directional(run.flow.last(), run.first[0].last())?.1)
}

/// `∂_{z₁,i}∂_{z₂,j} δ²𝒰/δm²(t, μ)(z₁, z₂)`, assembled from the tangents
/// `d⁽¹⁾` and `d⁽²⁾` as
/// `δ²Φ/δm²(m_t)(d⁽¹⁾_i(z₁), d⁽¹⁾_j(z₂)) + δΦ/δm(m_t)(d⁽²⁾_{i,j})`.
#[allow(clippy::too_many_arguments)]
pub fn u_second_mixed_derivative(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    t: f64,
    (z1, i): (&TorusPoint, usize),
    (z2, j): (&TorusPoint, usize),
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<f64> {
    let cfg = horizon(cfg, t)?;
    let qa = dirac_derivative_modes(cfg.lattice, z1, i, smoothing)?;
    let qb = dirac_derivative_modes(cfg.lattice, z2, j, smoothing)?;
    let run = solve_linearised(drift, mu, &[qa, qb], &[(0, 1)], &cfg)?;
    let m = run.flow.last();
    let quad = phi.bilinear(m, run.first[0].last(), run.first[1].last())?;
    let lin = phi.directional(m, run.second[0].last())?.1;
    Ok(quad + lin)
}

/// Time-`t` value `𝒰(t, μ + h q)` for a perturbation of zero mass.
fn u_at(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    dirs: &[(&SpectralField, f64)],
    cfg: &SolverConfig,
) -> Result<f64> {
    let mut start = mu.resample(cfg.lattice)?;
    for (q, h) in dirs {
        start = start.combine(1.0, q, *h)?;
    }
    let start = SpectralField::density_unchecked(cfg.lattice, start.into_coeffs());
    phi.eval(solve_nonlinear_fp(drift, &start, cfg)?.last())
}

/// Central difference of `h ↦ 𝒰(t, μ + h(δ_z − μ))`.
#[allow(clippy::too_many_arguments)]
pub fn u_first_derivative_fd(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    t: f64,
    z: &TorusPoint,
    h: f64,
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<f64> {
    let cfg = horizon(cfg, t)?;
    let q = dirac_modes(cfg.lattice, z, smoothing)?.sub(&mu.resample(cfg.lattice)?)?;
    let up = u_at(drift, phi, mu, &[(&q, h)], &cfg)?;
    let down = u_at(drift, phi, mu, &[(&q, -h)], &cfg)?;
    Ok((up - down) / (2.0 * h))
}

/// Central mixed difference of `(h₁, h₂) ↦ 𝒰(t, μ + h₁∂_iδ_{z₁} + h₂∂_jδ_{z₂})`.
#[allow(clippy::too_many_arguments)]
pub fn u_second_mixed_derivative_fd(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    t: f64,
    (z1, i): (&TorusPoint, usize),
    (z2, j): (&TorusPoint, usize),
    h: f64,
    smoothing: DiracSmoothing,
    cfg: &SolverConfig,
) -> Result<f64> {
    let cfg = horizon(cfg, t)?;
    let qa = dirac_derivative_modes(cfg.lattice, z1, i, smoothing)?;
    let qb = dirac_derivative_modes(cfg.lattice, z2, j, smoothing)?;
    let mut acc = 0.0;
    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        acc += sa * sb * u_at(drift, phi, mu, &[(&qa, sa * h), (&qb, sb * h)], &cfg)?;
    }
    Ok(acc / (4.0 * h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{wrap, ModeLattice};
    use std::f64::consts::TAU;

    fn setup() -> (ModeLattice, SpectralField, SolverConfig) {
        let lat = ModeLattice::new(1, 10).unwrap();
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.4 * (TAU * (x[0] - 0.2)).cos())
            .unwrap()
            .into_density()
            .unwrap();
        (lat, mu, SolverConfig::new(lat, 0.02, 1.0).unwrap())
    }

    #[test]
    fn linear_at_time_zero() {
        let (lat, mu, cfg) = setup();
        let g = SpectralField::from_fn(lat, |x| (TAU * x[0]).sin() + 0.2 * (3.0 * TAU * x[0]).cos()).unwrap();
        let phi = FunctionalSpec::linear(g.clone());
        let z = wrap(&[0.37]).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let d = u_first_derivative(&drift, &phi, &mu, 0.0, &z, DiracSmoothing::Truncate, &cfg).unwrap();
        let want = g.eval_at(z.coords()) - g.pairing(&mu).unwrap();
        assert!((d - want).abs() < 1e-12, "{d} {want}");
    }

    #[test]
    fn first_derivative_matches_difference() {
        let (lat, mu, cfg) = setup();
        let nu0 = SpectralField::uniform(lat);
        let phi = FunctionalSpec::sobolev(nu0, 1.0).unwrap();
        let z = wrap(&[0.61]).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 1.5 };
        let sm = DiracSmoothing::default_for(lat);
        let d = u_first_derivative(&drift, &phi, &mu, 0.5, &z, sm, &cfg).unwrap();
        let err = |h: f64| (u_first_derivative_fd(&drift, &phi, &mu, 0.5, &z, h, sm, &cfg).unwrap() - d).abs();
        let (e1, e2) = (err(1e-2), err(1e-3));
        assert!(e2 < 1e-4 * d.abs(), "{d} {e2}");
        assert!((e1 / e2).log10() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn mixed_derivative_is_symmetric_and_matches_difference() {
        let (lat, mu, cfg) = setup();
        let phi = FunctionalSpec::sobolev(SpectralField::uniform(lat), 1.0).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 1.5 };
        let sm = DiracSmoothing::default_for(lat);
        let (a, b) = (wrap(&[0.13]).unwrap(), wrap(&[0.72]).unwrap());
        let x = u_second_mixed_derivative(&drift, &phi, &mu, 0.4, (&a, 0), (&b, 0), sm, &cfg).unwrap();
        let y = u_second_mixed_derivative(&drift, &phi, &mu, 0.4, (&b, 0), (&a, 0), sm, &cfg).unwrap();
        assert!((x - y).abs() < 1e-8 * x.abs().max(1.0));
        let err = |h: f64| {
            (u_second_mixed_derivative_fd(&drift, &phi, &mu, 0.4, (&a, 0), (&b, 0), h, sm, &cfg).unwrap() - x).abs()
        };
        let (e1, e2) = (err(1e-3), err(1e-4));
        assert!(e2 < 1e-4 * x.abs(), "{x} {e2}");
        assert!((e1 / e2).log10() > 1.8, "{e1} {e2}");
    }
}
