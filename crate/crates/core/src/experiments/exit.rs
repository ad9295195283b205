use serde::Serialize;

use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::particles::{simulate, ObservableSpec, SimConfig};
use crate::spectral::{ModeLattice, SpectralField};

#[derive(Clone, Debug)]
pub struct ExitConfig {
    pub kappa: f64,
    pub eta: f64,
    pub n_list: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub dt: f64,
    /// Horizon as a multiple of `N^{1/4}`; exits later count as `+∞`.
    pub horizon_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitRow {
    pub n: usize,
    /// `N^{1/4}`.
    pub threshold: f64,
    /// `P̂(τ_N ≥ N^{1/4})` and its binomial standard error.
    pub exceed: f64,
    pub exceed_se: f64,
    pub median: f64,
    /// Fraction of replicas that exited within the horizon.
    pub exited: f64,
    /// Exit times in replica order, `+∞` when not reached.
    pub times: Vec<f64>,
}

/// Distribution of `τ_N = inf{t : |μᴺ¹_t| ≥ η}` for the Kuramoto system
/// started from i.i.d. uniform particles.
pub fn exit_time_experiment(cfg: &ExitConfig) -> Result<Vec<ExitRow>> {
    if !(cfg.kappa > 1.0) {
        return invalid(format!("exit experiment needs κ > 1, got {}", cfg.kappa));
    }
    if !(cfg.horizon_factor >= 1.0) {
        return invalid("horizon must reach N^{1/4}");
    }
    let drift = DriftSpec::Kuramoto { kappa: cfg.kappa };
    let mu0 = SpectralField::uniform(ModeLattice::new(1, 1)?);
    cfg.n_list
        .iter()
        .map(|&n| {
            let threshold = (n as f64).powf(0.25);
            let sim = SimConfig {
                n,
                dt: cfg.dt,
                t_end: cfg.horizon_factor * threshold,
                seed: cfg.seed,
                replicas: cfg.replicas,
                record_stride: usize::MAX,
                observables: vec![ObservableSpec::ExitTime { eta: cfg.eta }],
            };
            let times: Vec<f64> = simulate(&sim, &drift, &mu0)?
                .iter()
                .map(|s| s.exit_time().expect("recorded"))
                .collect();
            let r = times.len() as f64;
            let exceed = times.iter().filter(|t| **t >= threshold).count() as f64 / r;
            let exited = times.iter().filter(|t| t.is_finite()).count() as f64 / r;
            let mut sorted = times.clone();
            sorted.sort_by(f64::total_cmp);
            let k = sorted.len();
            let median = if k % 2 == 1 { sorted[k / 2] } else { 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]) };
            Ok(ExitRow {
                n,
                threshold,
                exceed,
                exceed_se: (exceed * (1.0 - exceed) / r).sqrt(),
                median,
                exited,
                times,
            })
        })
        .collect()
}

/// Whether `P̂` is non-increasing along the rows within `k` combined
/// standard errors.
pub fn exceedance_non_increasing(rows: &[ExitRow], k: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].exceed <= w[0].exceed + k * (w[0].exceed_se.powi(2) + w[1].exceed_se.powi(2)).sqrt())
}
