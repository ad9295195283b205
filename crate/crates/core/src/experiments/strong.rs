use super::decay::invariant_measure;
use super::table::{line_fit, ErrorRow, ErrorTable, FitResult};
use super::weak::{common_stride, level_seed, mean_and_se};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::functionals::FunctionalSpec;
use crate::particles::{simulate, ObservableSpec, SimConfig};
use crate::pde::{solve_nonlinear_fp, SolverConfig};
use crate::spectral::{sobolev_dual_norm_sq, ModeLattice, SpectralField};

#[derive(Clone, Debug)]
pub struct StrongErrorConfig {
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub replicas: usize,
    pub dt: f64,
    pub seed: u64,
    pub crn: bool,
    /// Sobolev exponent of the norm.
    pub s: f64,
    /// Lattice cutoff of the norm.
    pub cutoff: usize,
    /// Reference solver for `m(t)` and, when `nu_inf` is absent, for `ν∞`.
    pub pde: SolverConfig,
    pub nu_inf: Option<SpectralField>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongErrorReport {
    /// `estimate` is `E‖μᴺ_t − ν∞‖²_{−s,2}`, `pde_reference` is `‖m(t) − ν∞‖²_{−s,2}`.
    pub table: ErrorTable,
    pub nu_inf: SpectralField,
    /// Exact `E‖μᴺ₀ − ν∞‖²_{−s,2}` for i.i.d. initial particles, per `N`.
    pub iid_exact: Vec<(usize, f64)>,
    /// Log-log fit of the estimate against `N` at each time (three or more levels).
    pub n_fits: Vec<(f64, FitResult)>,
}

/// `E‖μᴺ − ν‖²_{−s,2}` for `N` i.i.d. samples of `μ` on `lattice`:
/// `Σ_n w_n (|μ^n − ν^n|² + (1 − |μ^n|²)/N)`.
pub fn iid_sobolev_expectation(mu: &SpectralField, nu: &SpectralField, s: f64, n: usize, lattice: ModeLattice) -> Result<f64> {
    if n == 0 {
        return invalid("N must be positive");
    }
    let (mu, nu) = (mu.resample(lattice)?, nu.resample(lattice)?);
    let bias = sobolev_dual_norm_sq(&mu, &nu, s)?.value;
    let z = lattice.zero_index();
    let var: f64 = (0..lattice.len())
        .filter(|&i| i != z)
        .map(|i| (1.0 + lattice.norm_sq(i) as f64).powf(-s) * (1.0 - mu.coeffs()[i].norm_sqr()))
        .sum();
    Ok(bias + var / n as f64)
}

/// Monte-Carlo `E‖μᴺ_t − ν∞‖²_{−s,2}` over a grid of `N` and `t`.
pub fn strong_error_experiment(drift: &DriftSpec, mu0: &SpectralField, cfg: &StrongErrorConfig) -> Result<StrongErrorReport> {
    drift.validate()?;
    if cfg.n_list.is_empty() || cfg.t_list.is_empty() {
        return invalid("need at least one N and one t");
    }
    if matches!(drift, DriftSpec::Kuramoto { kappa } if *kappa > 1.0) {
        return invalid("supercritical Kuramoto has no unique invariant measure");
    }
    let lattice = ModeLattice::new(drift.dim(), cfg.cutoff)?;
    let nu_inf = match &cfg.nu_inf {
        Some(nu) => nu.clone(),
        None => invariant_measure(drift, cfg.pde.lattice)?,
    };
    let nu_l = nu_inf.resample(lattice)?;
    let phi = FunctionalSpec::sobolev(nu_l.clone(), cfg.s)?;
    let t_max = cfg.t_list.iter().cloned().fold(0.0, f64::max);
    let pde = cfg.pde.with_t_end(t_max);
    let pde = pde.with_stride(common_stride(&cfg.t_list, pde.steps().1)?);
    let flow = solve_nonlinear_fp(drift, mu0, &pde)?;
    let mut table = ErrorTable::new();
    for &n in &cfg.n_list {
        let mut sim = SimConfig {
            n,
            dt: cfg.dt,
            t_end: t_max,
            seed: level_seed(cfg.seed, n, cfg.crn),
            replicas: cfg.replicas,
            record_stride: 1,
            observables: vec![ObservableSpec::Functional { label: "dist".into(), spec: phi.clone() }],
        };
        sim.record_stride = common_stride(&cfg.t_list, sim.steps().1)?;
        let runs = simulate(&sim, drift, mu0)?;
        for &t in &cfg.t_list {
            let k = runs[0]
                .times
                .iter()
                .position(|s| (s - t).abs() <= 1e-9 * t.max(1.0))
                .ok_or_else(|| crate::Error::InvalidInput(format!("no particle record at t = {t}")))?;
            let vals: Vec<f64> = runs.iter().map(|r| r.real("dist").expect("recorded")[k]).collect();
            let (mean, se) = mean_and_se(&vals);
            let m = flow.at(t).ok_or_else(|| crate::Error::InvalidInput(format!("no reference record at t = {t}")))?;
            let reference = sobolev_dual_norm_sq(&m.resample(lattice)?, &nu_l, cfg.s)?.value;
            table.push(ErrorRow::new(n, t, mean, se, reference)?);
        }
    }
    let iid_exact = cfg
        .n_list
        .iter()
        .map(|&n| Ok((n, iid_sobolev_expectation(mu0, &nu_l, cfg.s, n, lattice)?)))
        .collect::<Result<_>>()?;
    let mut n_fits = Vec::new();
    if cfg.n_list.len() >= 3 {
        for &t in &cfg.t_list {
            let rows = table.at_time(t);
            let x: Vec<f64> = rows.rows().iter().map(|r| (r.n as f64).ln()).collect();
            let y: Vec<f64> = rows.rows().iter().map(|r| r.estimate.ln()).collect();
            n_fits.push((t, line_fit(&x, &y)?));
        }
    }
    Ok(StrongErrorReport { table, nu_inf, iid_exact, n_fits })
}
