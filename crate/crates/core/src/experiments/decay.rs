use super::table::{line_fit, FitResult};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::pde::{
    refine_stationary, relaxation_distance, solve_nonlinear_fp, stationary_kuramoto_profile, RelaxTarget, Relaxation,
    SolverConfig,
};
use crate::spectral::{ModeLattice, SpectralField};

/// Stationary state reached from the uniform measure: the profile at phase
/// zero for Kuramoto, otherwise the long-time flow refined by Newton steps.
pub fn invariant_measure(drift: &DriftSpec, lattice: ModeLattice) -> Result<SpectralField> {
    if let DriftSpec::Kuramoto { kappa } = drift {
        return Ok(stationary_kuramoto_profile(*kappa, lattice)?.p);
    }
    let cfg = SolverConfig::new(lattice, 0.005, 40.0)?.with_stride(8000);
    let m = solve_nonlinear_fp(drift, &SpectralField::uniform(lattice), &cfg)?;
    refine_stationary(drift, m.last())
}

#[derive(Clone, Debug)]
pub enum DecayTarget {
    /// [`invariant_measure`] of the drift.
    Invariant,
    Given(SpectralField),
    /// Rotations of the Kuramoto profile.
    KuramotoFamily,
}

#[derive(Clone, Debug)]
pub struct DecayConfig {
    pub pde: SolverConfig,
    /// Fit window.
    pub t_min: f64,
    pub t_max: f64,
    /// Distance below which the perturbation is tracked in rescaled form.
    pub switch: f64,
    pub min_r2: f64,
}

#[derive(Clone, Debug)]
pub struct DecayResult {
    /// Fit of `log ‖m(t) − target‖_{−1,2}` against `t`; the rate is `−slope`.
    pub fit: FitResult,
    pub lambda: f64,
    pub relaxation: Relaxation,
    pub passed: bool,
}

/// Exponential decay fits of the mean-field flow towards its target, one per
/// initial measure.
pub fn ergodic_decay_experiment(
    drift: &DriftSpec,
    mu0_list: &[SpectralField],
    target: &DecayTarget,
    cfg: &DecayConfig,
) -> Result<Vec<DecayResult>> {
    if !(cfg.t_min >= 0.0 && cfg.t_max > cfg.t_min) {
        return invalid(format!("fit window [{}, {}] is empty", cfg.t_min, cfg.t_max));
    }
    let lat = cfg.pde.lattice;
    let target = match target {
        DecayTarget::Invariant => RelaxTarget::Fixed(invariant_measure(drift, lat)?),
        DecayTarget::Given(p) => RelaxTarget::Fixed(p.clone()),
        DecayTarget::KuramotoFamily => match drift {
            DriftSpec::Kuramoto { kappa } if *kappa > 1.0 => {
                RelaxTarget::Family(stationary_kuramoto_profile(*kappa, lat)?.p)
            }
            _ => return invalid("the profile family needs a supercritical Kuramoto drift"),
        },
    };
    let pde = cfg.pde.with_t_end(cfg.t_max);
    mu0_list
        .iter()
        .map(|mu| {
            let relaxation = relaxation_distance(drift, mu, &target, &pde, cfg.switch)?;
            let (x, y): (Vec<f64>, Vec<f64>) = relaxation
                .times
                .iter()
                .zip(&relaxation.log_dist)
                .filter(|(t, d)| **t >= cfg.t_min - 1e-12 && **t <= cfg.t_max + 1e-12 && d.is_finite())
                .map(|(t, d)| (*t, *d))
                .unzip();
            let fit = line_fit(&x, &y)?;
            let lambda = -fit.slope;
            Ok(DecayResult { fit, lambda, passed: lambda > 0.0 && fit.r2 >= cfg.min_r2, relaxation })
        })
        .collect()
}
