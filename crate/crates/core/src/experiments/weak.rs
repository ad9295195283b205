use super::table::{rate_fit, ErrorRow, ErrorTable, FitAxis, FitResult};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::functionals::FunctionalSpec;
use crate::particles::{simulate, ObservableSpec, SimConfig};
use crate::pde::{solve_nonlinear_fp, SolverConfig};
use crate::spectral::SpectralField;

#[derive(Clone, Debug)]
pub struct WeakErrorConfig {
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    /// Replicas at the smallest `N`.
    pub replicas: usize,
    /// Scale replicas `∝ 1/N` from the smallest `N`.
    pub scale_replicas: bool,
    pub dt: f64,
    pub seed: u64,
    /// Common random numbers: every level reuses the same seed, so particle
    /// `i` of replica `r` sees the same noise at every `N`.
    pub crn: bool,
    /// Reference solver; its lattice must carry the functional's modes.
    pub pde: SolverConfig,
    /// Lower bound on `|μ₀¹|` for supercritical Kuramoto drifts.
    pub kuramoto_eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakErrorReport {
    pub table: ErrorTable,
    /// Log-log fit of `abs_error` against `N` at each time.
    pub fits: Vec<(f64, FitResult)>,
    /// Rows whose error is not resolved above the Monte-Carlo noise.
    pub flags: Vec<String>,
}

/// Replica count at level `n`.
pub fn replicas_at(cfg: &WeakErrorConfig, n: usize) -> usize {
    let n_min = cfg.n_list.iter().copied().min().unwrap_or(n);
    if cfg.scale_replicas {
        ((cfg.replicas * n_min) as f64 / n as f64).ceil().max(2.0) as usize
    } else {
        cfg.replicas
    }
}

/// Seed of level `n`.
pub fn level_seed(seed: u64, n: usize, crn: bool) -> u64 {
    if crn {
        seed
    } else {
        seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Record stride that puts every time of `t_list` on a record.
pub(crate) fn common_stride(t_list: &[f64], dt: f64) -> Result<usize> {
    let mut g = 0usize;
    for &t in t_list {
        let k = (t / dt).round();
        if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
            return invalid(format!("time {t} is not a multiple of dt = {dt}"));
        }
        g = gcd(g, k as usize);
    }
    Ok(g.max(1))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn rotation_invariant(phi: &FunctionalSpec) -> bool {
    match phi {
        FunctionalSpec::KuramotoRotInv { .. } => true,
        FunctionalSpec::Mollified(m) => rotation_invariant(m.inner()),
        _ => false,
    }
}

fn check(drift: &DriftSpec, phi: &FunctionalSpec, mu0: &SpectralField, cfg: &WeakErrorConfig) -> Result<()> {
    drift.validate()?;
    if cfg.n_list.is_empty() || cfg.t_list.is_empty() {
        return invalid("need at least one N and one t");
    }
    if phi.dim() != drift.dim() || mu0.dim() != drift.dim() {
        return invalid("drift, functional and initial measure must share the dimension");
    }
    if cfg.pde.lattice.cutoff() < phi.lattice().cutoff() {
        return invalid("reference lattice is coarser than the functional's");
    }
    if let DriftSpec::Kuramoto { kappa } = drift {
        if *kappa > 1.0 {
            if !rotation_invariant(phi) {
                return invalid("supercritical Kuramoto needs a rotation-invariant functional");
            }
            if mu0.first_mode().norm() < cfg.kuramoto_eta {
                return invalid(format!("|μ₀¹| is below η = {}", cfg.kuramoto_eta));
            }
        }
    }
    Ok(())
}

/// Monte-Carlo `E Φ(μᴺ_t)` against `Φ(m(t; μ₀))` over a grid of `N` and `t`,
/// with a log-log rate fit at each time.
pub fn weak_error_experiment(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu0: &SpectralField,
    cfg: &WeakErrorConfig,
) -> Result<WeakErrorReport> {
    check(drift, phi, mu0, cfg)?;
    let t_max = cfg.t_list.iter().cloned().fold(0.0, f64::max);
    let pde = cfg.pde.with_t_end(t_max);
    let pde = pde.with_stride(common_stride(&cfg.t_list, pde.steps().1)?);
    let flow = solve_nonlinear_fp(drift, mu0, &pde)?;
    let mut refs = Vec::new();
    for &t in &cfg.t_list {
        let m = flow.at(t).ok_or_else(|| crate::Error::InvalidInput(format!("no reference record at t = {t}")))?;
        refs.push(phi.eval(m)?);
    }
    let mut table = ErrorTable::new();
    let mut flags = Vec::new();
    for &n in &cfg.n_list {
        let mut sim = SimConfig {
            n,
            dt: cfg.dt,
            t_end: t_max,
            seed: level_seed(cfg.seed, n, cfg.crn),
            replicas: replicas_at(cfg, n),
            record_stride: 1,
            observables: vec![ObservableSpec::Functional { label: "phi".into(), spec: phi.clone() }],
        };
        sim.record_stride = common_stride(&cfg.t_list, sim.steps().1)?;
        let runs = simulate(&sim, drift, mu0)?;
        for (&t, &reference) in cfg.t_list.iter().zip(&refs) {
            let k = runs[0]
                .times
                .iter()
                .position(|s| (s - t).abs() <= 1e-9 * t.max(1.0))
                .ok_or_else(|| crate::Error::InvalidInput(format!("no particle record at t = {t}")))?;
            let vals: Vec<f64> = runs.iter().map(|r| r.real("phi").expect("recorded")[k]).collect();
            let (mean, se) = mean_and_se(&vals);
            let row = ErrorRow::new(n, t, mean, se, reference)?;
            if row.std_error > 0.5 * row.abs_error {
                flags.push(format!(
                    "N = {n}, t = {t}: std_error {:.3e} exceeds half the error {:.3e}",
                    row.std_error, row.abs_error
                ));
            }
            table.push(row);
        }
    }
    let mut fits = Vec::new();
    if cfg.n_list.len() >= 4 {
        for &t in &cfg.t_list {
            fits.push((t, rate_fit(&table.at_time(t), FitAxis::N)?));
        }
    }
    Ok(WeakErrorReport { table, fits, flags })
}
