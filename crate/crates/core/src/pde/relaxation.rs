use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use super::flow::{check_initial, solve_nonlinear_fp};
use super::galerkin::Galerkin;
use super::integrator::{symmetrise, Nonlinear, SolverConfig, Stepper};
use super::linearized::galerkin_matrix;
use crate::drift::DriftSpec;
use crate::error::{invalid, Error, Result};
use crate::spectral::{align_to_family, rotate, sobolev_dual_inner, sobolev_dual_norm, SpectralField};

/// Newton refinement of a stationary state of the Galerkin system on the
/// guess's lattice.
///
/// Steps are minimum-norm least-squares solves, so a neutral direction (the
/// rotations of a Kuramoto profile) is left alone.
pub fn refine_stationary(drift: &DriftSpec, guess: &SpectralField) -> Result<SpectralField> {
    drift.validate()?;
    let lat = guess.lattice();
    let (l, z) = (lat.len(), lat.zero_index());
    let mut g = Galerkin::new(drift, lat, true);
    let mut p = guess.coeffs().to_vec();
    let mut f = vec![C::default(); l];
    let residual = |g: &mut Galerkin, p: &[C], f: &mut Vec<C>| -> f64 {
        g.fp_nonlinear(p, f);
        for ((f, d), c) in f.iter_mut().zip(&g.diffusion).zip(p) {
            *f -= c * d;
        }
        f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    };
    let mut best = residual(&mut g, &p, &mut f);
    for _ in 0..12 {
        let field = SpectralField::density_unchecked(lat, p.clone());
        let jac = galerkin_matrix(drift, &field)?;
        let rhs = DVector::from_iterator(l - 1, (0..l).filter(|&i| i != z).map(|i| -f[i]));
        let svd = jac.svd(true, true);
        let tol = svd.singular_values.max() * 1e-10;
        let step = svd.solve(&rhs, tol).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut trial = p.clone();
        for (k, i) in (0..l).filter(|&i| i != z).enumerate() {
            trial[i] += step[k];
        }
        symmetrise(&lat, &mut trial);
        let r = residual(&mut g, &trial, &mut f);
        if !(r < best) {
            break;
        }
        best = r;
        p = trial;
    }
    SpectralField::density(lat, p)
}

/// What the flow relaxes to.
#[derive(Clone, Debug)]
pub enum RelaxTarget {
    /// A single stationary state.
    Fixed(SpectralField),
    /// The rotations of a stationary profile (`d = 1`).
    Family(SpectralField),
}

/// `log ‖m(t) − target‖_{−1,2}` along a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub times: Vec<f64>,
    pub log_dist: Vec<f64>,
    /// Time after which the perturbation was tracked in rescaled form.
    pub switched_at: Option<f64>,
}

struct Perturbation<'a> {
    g: &'a mut Galerkin,
    base: Vec<C>,
    scale: f64,
    tmp: Vec<C>,
}

impl Nonlinear for Perturbation<'_> {
    // m = base + s v with base stationary: ∂v = L v − s div(v δb(v))
    fn eval(&mut self, _t: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
        self.g.tangent_nonlinear(&self.base, &y[0], &mut out[0]);
        if self.scale > 0.0 {
            self.tmp.iter_mut().for_each(|c| *c = C::default());
            self.g.add_second_source(&y[0], &y[0], &mut self.tmp);
            for (o, t) in out[0].iter_mut().zip(&self.tmp) {
                *o += t * (0.5 * self.scale);
            }
        }
    }
}

fn dual_norm(v: &SpectralField) -> Result<f64> {
    sobolev_dual_norm(v, &SpectralField::zero(v.lattice()), 1.0)
}

/// Distance from the target along the flow of `μ`, resolved far below the
/// rounding floor of `m(t)` itself.
///
/// Once the plain distance drops under `switch`, the flow is written as
/// `m = p + e^{ℓ} v` around an exact stationary state `p` of the Galerkin
/// system (refined by [`refine_stationary`]) and `v` is integrated with
/// renormalisation after every step. For a family target the neutral
/// rotation direction is projected out along the left null vector of `L_p`.
pub fn relaxation_distance(
    drift: &DriftSpec,
    mu: &SpectralField,
    target: &RelaxTarget,
    cfg: &SolverConfig,
    switch: f64,
) -> Result<Relaxation> {
    cfg.validate()?;
    check_initial(drift, mu, cfg)?;
    if !(switch > 0.0 && switch < 1.0) {
        return invalid(format!("switch threshold {switch} must lie in (0, 1)"));
    }
    let lat = cfg.lattice;
    let profile = match target {
        RelaxTarget::Fixed(p) | RelaxTarget::Family(p) => refine_stationary(drift, &p.resample(lat)?)?,
    };
    let family = matches!(target, RelaxTarget::Family(_));
    if family && lat.dim() != 1 {
        return Err(Error::UnsupportedDimension(lat.dim()));
    }
    let distance = |m: &SpectralField| -> Result<f64> {
        if family {
            Ok(align_to_family(m, &profile, 1.0)?.dist)
        } else {
            sobolev_dual_norm(m, &profile, 1.0)
        }
    };
    let flow = solve_nonlinear_fp(drift, mu, cfg)?;
    let mut times = Vec::new();
    let mut log_dist = Vec::new();
    let mut start = None;
    for (k, (t, m)) in flow.times().iter().zip(flow.states()).enumerate() {
        let d = distance(m)?;
        times.push(*t);
        log_dist.push(d.ln());
        if d < switch {
            start = Some(k);
            break;
        }
    }
    let Some(k0) = start else {
        return Ok(Relaxation { times, log_dist, switched_at: None });
    };
    let m0 = &flow.states()[k0];
    let base = if family { rotate(&profile, align_to_family(m0, &profile, 1.0)?.psi)? } else { profile.clone() };
    let z = lat.zero_index();
    let mut v = m0.sub(&base)?.into_coeffs();
    v[z] = C::default();

    let (n, dt) = cfg.steps();
    let stride = cfg.record_stride;
    let mut g = Galerkin::new(drift, lat, cfg.dealias);
    let diffusion = g.diffusion.clone();
    let neutral = if family { Some(neutral_pair(drift, &base)?) } else { None };
    let mut log_scale = 0.0;
    let renormalise = |v: &mut Vec<C>, log_scale: &mut f64| -> Result<()> {
        let r = dual_norm(&SpectralField::signed_unchecked(lat, v.clone()))?;
        if r > 0.0 {
            v.iter_mut().for_each(|c| *c /= r);
            *log_scale += r.ln();
        }
        Ok(())
    };
    let project = |v: &mut Vec<C>| {
        if let Some((dir, left)) = &neutral {
            let num: C = left.iter().zip(v.iter()).map(|(l, x)| l.conj() * x).sum();
            let den: C = left.iter().zip(dir.iter()).map(|(l, x)| l.conj() * x).sum();
            let theta = (num / den).re;
            v.iter_mut().zip(dir).for_each(|(x, d)| *x -= d * theta);
        }
    };
    let transverse = |v: &[C]| -> Result<f64> {
        let f = SpectralField::signed_unchecked(lat, v.to_vec());
        match &neutral {
            None => dual_norm(&f),
            Some((dir, _)) => {
                let d = SpectralField::signed_unchecked(lat, dir.clone());
                let theta = sobolev_dual_inner(&f, &d, 1.0)? / sobolev_dual_inner(&d, &d, 1.0)?;
                dual_norm(&f.combine(1.0, &d, -theta)?)
            }
        }
    };
    project(&mut v);
    renormalise(&mut v, &mut log_scale)?;
    let t0 = flow.times()[k0];
    let k_start = (t0 / dt).round() as usize;
    let mut stepper = Stepper::new(cfg.integrator, dt, &diffusion, 1);
    let mut sys = Perturbation { g: &mut g, base: base.coeffs().to_vec(), scale: 0.0, tmp: vec![C::default(); lat.len()] };
    let mut y = vec![v];
    for k in k_start..n {
        sys.scale = log_scale.exp();
        stepper.step(&mut sys, k as f64 * dt, &mut y);
        symmetrise(&lat, &mut y[0]);
        y[0][z] = C::default();
        project(&mut y[0]);
        renormalise(&mut y[0], &mut log_scale)?;
        if (k + 1) % stride == 0 || k + 1 == n {
            times.push((k + 1) as f64 * dt);
            log_dist.push(log_scale + transverse(&y[0])?.ln());
        }
    }
    Ok(Relaxation { times, log_dist, switched_at: Some(t0) })
}

/// The rotation direction `p'` of `p` and the left null vector of `L_p`
/// that annihilates every other eigendirection.
fn neutral_pair(drift: &DriftSpec, p: &SpectralField) -> Result<(Vec<C>, Vec<C>)> {
    let lat = p.lattice();
    let (l, z) = (lat.len(), lat.zero_index());
    let dir: Vec<C> = (0..l)
        .map(|i| C::new(0.0, std::f64::consts::TAU * lat.component(i, 0) as f64) * p.coeffs()[i])
        .collect();
    let jac: DMatrix<C> = galerkin_matrix(drift, p)?.adjoint();
    let svd = jac.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::InvalidInput("singular value decomposition failed".into()))?;
    let k = svd.singular_values.imin();
    let mut left = vec![C::default(); l];
    for (c, i) in (0..l).filter(|&i| i != z).enumerate() {
        left[i] = v_t[(k, c)].conj();
    }
    Ok((dir, left))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{PotentialSpec, SmallMeanField};
    use crate::pde::stationary_kuramoto_profile;
    use crate::spectral::ModeLattice;
    use std::f64::consts::{PI, TAU};

    fn slope(r: &Relaxation, t_min: f64) -> f64 {
        let pts: Vec<(f64, f64)> = r.times.iter().zip(&r.log_dist).filter(|(t, _)| **t >= t_min).map(|(t, d)| (*t, *d)).collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn heat_flow_rate_is_exact() {
        let lat = ModeLattice::new(1, 8).unwrap();
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.5 * (TAU * x[0]).cos()).unwrap().into_density().unwrap();
        let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(1), kappa: 0.0 };
        let cfg = SolverConfig::new(lat, 0.01, 10.0).unwrap().with_stride(50);
        let r = relaxation_distance(&drift, &mu, &RelaxTarget::Fixed(SpectralField::uniform(lat)), &cfg, 1e-6).unwrap();
        assert!(r.switched_at.is_some());
        // two modes of size 0.25 e^{−2π² t} with weight 1/2
        for (t, d) in r.times.iter().zip(&r.log_dist) {
            let want = (0.25f64).ln() - 2.0 * PI * PI * t;
            assert!((d - want).abs() < 1e-6 * want.abs().max(1.0), "{t} {d} {want}");
        }
    }

    #[test]
    fn refined_profile_is_stationary() {
        let lat = ModeLattice::new(1, 24).unwrap();
        let p = stationary_kuramoto_profile(2.0, lat).unwrap().p;
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let q = refine_stationary(&drift, &p).unwrap();
        let r = crate::pde::fp_rhs(&drift, &q).unwrap();
        assert!(dual_norm(&r).unwrap() < 1e-14);
        assert!(sobolev_dual_norm(&p, &q, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn kuramoto_family_rate_matches_gap() {
        let lat = ModeLattice::new(1, 24).unwrap();
        let kappa = 2.0;
        let p = stationary_kuramoto_profile(kappa, lat).unwrap().p;
        let drift = DriftSpec::Kuramoto { kappa };
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.6 * (TAU * x[0]).cos()).unwrap().into_density().unwrap();
        let cfg = SolverConfig::new(lat, 0.005, 4.0).unwrap().with_stride(20);
        let r = relaxation_distance(&drift, &mu, &RelaxTarget::Family(p.clone()), &cfg, 1e-6).unwrap();
        let gap = -crate::pde::dense_spectrum(&drift, &p).unwrap()[1].re;
        let rate = -slope(&r, 1.0);
        assert!((rate / gap - 1.0).abs() < 1e-3, "{rate} {gap}");
    }

    #[test]
    fn small_mean_field_rate_matches_gap() {
        let lat = ModeLattice::new(1, 16).unwrap();
        let drift = DriftSpec::SmallMeanField(SmallMeanField::double_well(0.1, 0.05).unwrap());
        let cfg = SolverConfig::new(lat, 0.005, 20.0).unwrap().with_stride(400);
        let nu = solve_nonlinear_fp(&drift, &SpectralField::uniform(lat), &cfg).unwrap().last().clone();
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.8 * (TAU * x[0]).sin()).unwrap().into_density().unwrap();
        let cfg = cfg.with_t_end(5.0).with_stride(20);
        let r = relaxation_distance(&drift, &mu, &RelaxTarget::Fixed(nu.clone()), &cfg, 1e-6).unwrap();
        let nu = refine_stationary(&drift, &nu).unwrap();
        let gap = -crate::pde::dense_spectrum(&drift, &nu).unwrap()[0].re;
        let rate = -slope(&r, 2.0);
        assert!((rate / gap - 1.0).abs() < 1e-3, "{rate} {gap}");
    }
}
