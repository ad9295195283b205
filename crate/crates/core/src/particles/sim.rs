use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::io::Write;

use super::engine::ParticleSystem;
use super::rng::NoiseStream;
use super::sample_initial;
use crate::drift::{drift_lattice, DriftSpec};
use crate::error::{invalid, Error, Result};
use crate::functionals::FunctionalSpec;
use crate::spectral::{io::fmt17, Measure, ModeLattice, SpectralField};

/// Quantities recorded along a particle run.
#[derive(Clone, Debug)]
pub enum ObservableSpec {
    /// Empirical Fourier modes on the lattice of the given cutoff.
    FourierModes { cutoff: usize },
    /// `Φ(μᴺ_t)` under a label.
    Functional { label: String, spec: FunctionalSpec },
    /// First time `|μ^{e₁}| ≥ η`, checked at every step.
    ExitTime { eta: f64 },
}

impl ObservableSpec {
    pub fn name(&self) -> String {
        match self {
            ObservableSpec::FourierModes { .. } => "modes".into(),
            ObservableSpec::Functional { label, .. } => label.clone(),
            ObservableSpec::ExitTime { eta } => format!("exit_time[{eta}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub replicas: usize,
    pub record_stride: usize,
    pub observables: Vec<ObservableSpec>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > u32::MAX as usize {
            return invalid(format!("particle count {} out of range", self.n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return invalid(format!("t_end = {} must be finite and nonnegative", self.t_end));
        }
        if self.replicas == 0 || self.replicas > u32::MAX as usize {
            return invalid("replicas must be at least 1");
        }
        if self.record_stride == 0 {
            return invalid("record_stride must be at least 1");
        }
        for o in &self.observables {
            if let ObservableSpec::ExitTime { eta } = o {
                if !(*eta > 0.0 && *eta <= 1.0) {
                    return invalid(format!("exit threshold {eta} must lie in (0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Steps and the step size that divides `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Recorded values of one observable.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservableValues {
    /// Modes per record, on the stored lattice.
    Modes { lattice: ModeLattice, values: Vec<Vec<C>> },
    Real(Vec<f64>),
    /// Crossing time, `+∞` if the threshold was never reached.
    ExitTime(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub replica: u32,
    pub times: Vec<f64>,
    pub observables: Vec<(String, ObservableValues)>,
}

impl ObservableSeries {
    /// Real series of the observable called `name`.
    pub fn real(&self, name: &str) -> Option<&[f64]> {
        self.observables.iter().find_map(|(n, v)| match v {
            ObservableValues::Real(x) if n == name => Some(x.as_slice()),
            _ => None,
        })
    }

    pub fn exit_time(&self) -> Option<f64> {
        self.observables.iter().find_map(|(_, v)| match v {
            ObservableValues::ExitTime(t) => Some(*t),
            _ => None,
        })
    }

    pub fn modes(&self) -> Option<(ModeLattice, &[Vec<C>])> {
        self.observables.iter().find_map(|(_, v)| match v {
            ObservableValues::Modes { lattice, values } => Some((*lattice, values.as_slice())),
            _ => None,
        })
    }
}

/// Worker count from `CHAOSBENCH_THREADS`, if set.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var("CHAOSBENCH_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => invalid(format!("CHAOSBENCH_THREADS = {v:?} is not a positive integer")),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` in a pool capped by `CHAOSBENCH_THREADS`.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = configured_threads()? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

enum Recorder {
    Modes(ModeLattice, Vec<Vec<C>>),
    Real(FunctionalSpec, Vec<f64>),
    Exit { eta: f64, prev: f64, hit: Option<f64> },
}

impl Recorder {
    fn record(&mut self, view: &impl Measure) -> Result<()> {
        match self {
            Recorder::Modes(lat, v) => v.push(view.modes_on(*lat)?.into_coeffs()),
            Recorder::Real(spec, v) => v.push(spec.eval(view)?),
            Recorder::Exit { .. } => {}
        }
        Ok(())
    }

    /// Feeds `|μ^{e₁}|` at time `t`; crossings are interpolated linearly.
    fn watch(&mut self, t: f64, dt: f64, a: f64) {
        if let Recorder::Exit { eta, prev, hit } = self {
            if hit.is_none() && a >= *eta {
                *hit = Some(if t == 0.0 || a == *prev { t } else { t - dt + dt * (*eta - *prev) / (a - *prev) });
            }
            *prev = a;
        }
    }

    fn pending(&self) -> bool {
        !matches!(self, Recorder::Exit { hit: Some(_), .. })
    }
}

/// One replica of the particle system from `μ₀`.
pub fn run_replica(cfg: &SimConfig, drift: &DriftSpec, mu0: &SpectralField, replica: u32) -> Result<ObservableSeries> {
    cfg.validate()?;
    let noise = NoiseStream::new(cfg.seed, replica);
    let initial = sample_initial(mu0, cfg.n, &noise, drift_lattice(drift)?)?;
    let mut sys = ParticleSystem::new(drift, &initial, noise)?;
    let d = drift.dim();
    let mut recs: Vec<Recorder> = cfg
        .observables
        .iter()
        .map(|o| {
            Ok(match o {
                ObservableSpec::FourierModes { cutoff } => Recorder::Modes(ModeLattice::new(d, *cutoff)?, Vec::new()),
                ObservableSpec::Functional { spec, .. } => Recorder::Real(spec.clone(), Vec::new()),
                ObservableSpec::ExitTime { eta } => Recorder::Exit { eta: *eta, prev: 0.0, hit: None },
            })
        })
        .collect::<Result<_>>()?;
    let only_exit = recs.iter().all(|r| matches!(r, Recorder::Exit { .. }));
    let (n, dt) = cfg.steps();
    let mut times = vec![0.0];
    for r in recs.iter_mut() {
        r.record(&sys.view())?;
    }
    for k in 0..n {
        let a = sys.advance(dt)?;
        recs.iter_mut().for_each(|r| r.watch(k as f64 * dt, dt, a));
        if only_exit && !recs.iter().any(Recorder::pending) {
            break;
        }
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            times.push((k + 1) as f64 * dt);
            for r in recs.iter_mut() {
                r.record(&sys.view())?;
            }
        }
    }
    if recs.iter().any(Recorder::pending) {
        let a = sys.first_mode_abs();
        let t = sys.steps_taken() as f64 * dt;
        recs.iter_mut().for_each(|r| r.watch(t, dt, a));
    }
    let observables = cfg
        .observables
        .iter()
        .zip(recs)
        .map(|(o, r)| {
            let v = match r {
                Recorder::Modes(lattice, values) => ObservableValues::Modes { lattice, values },
                Recorder::Real(_, v) => ObservableValues::Real(v),
                Recorder::Exit { hit, .. } => ObservableValues::ExitTime(hit.unwrap_or(f64::INFINITY)),
            };
            (o.name(), v)
        })
        .collect();
    Ok(ObservableSeries { replica, times, observables })
}

/// All replicas `0..replicas`, in parallel, returned in replica order.
pub fn simulate(cfg: &SimConfig, drift: &DriftSpec, mu0: &SpectralField) -> Result<Vec<ObservableSeries>> {
    cfg.validate()?;
    with_pool(|| {
        (0..cfg.replicas as u32)
            .into_par_iter()
            .map(|r| run_replica(cfg, drift, mu0, r))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Long-format CSV: `replica,t,observable,re,im`.
pub fn write_series_csv(series: &[ObservableSeries], mut out: impl Write) -> Result<()> {
    writeln!(out, "replica,t,observable,re,im")?;
    for s in series {
        for (name, values) in &s.observables {
            match values {
                ObservableValues::Modes { lattice, values } => {
                    for (t, row) in s.times.iter().zip(values) {
                        for (i, c) in row.iter().enumerate() {
                            let tag = lattice.mode(i).iter().map(i64::to_string).collect::<Vec<_>>().join("_");
                            writeln!(out, "{},{},{name}[{tag}],{},{}", s.replica, fmt17(*t), fmt17(c.re), fmt17(c.im))?;
                        }
                    }
                }
                ObservableValues::Real(v) => {
                    for (t, x) in s.times.iter().zip(v) {
                        writeln!(out, "{},{},{name},{},{}", s.replica, fmt17(*t), fmt17(*x), fmt17(0.0))?;
                    }
                }
                ObservableValues::ExitTime(tau) => {
                    writeln!(out, "{},{},{name},{},{}", s.replica, fmt17(*tau), fmt17(*tau), fmt17(0.0))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::PotentialSpec;
    use std::f64::consts::{PI, TAU};

    fn mu0(lat: ModeLattice) -> SpectralField {
        SpectralField::from_fn(lat, |x| 1.0 + 0.5 * (TAU * x[0]).cos()).unwrap().into_density().unwrap()
    }

    fn cfg(n: usize, replicas: usize, obs: Vec<ObservableSpec>) -> SimConfig {
        SimConfig { n, dt: 0.01, t_end: 0.2, seed: 17, replicas, record_stride: 5, observables: obs }
    }

    #[test]
    fn replay_is_exact_and_replicas_differ() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let c = cfg(32, 2, vec![ObservableSpec::FourierModes { cutoff: 2 }]);
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let a = simulate(&c, &drift, &mu0(lat)).unwrap();
        let b = simulate(&c, &drift, &mu0(lat)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].observables, a[1].observables);
        assert_eq!(a[0].times, vec![0.0, 0.05, 0.1, 0.15, 0.2]);
    }

    #[test]
    fn free_particles_follow_heat_flow() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let g = SpectralField::from_fn(lat, |x| (TAU * x[0]).cos()).unwrap();
        let phi = FunctionalSpec::linear(g);
        let c = cfg(16, 400, vec![ObservableSpec::Functional { label: "phi".into(), spec: phi }]);
        let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(1), kappa: 0.0 };
        let runs = simulate(&c, &drift, &mu0(lat)).unwrap();
        let vals: Vec<f64> = runs.iter().map(|s| *s.real("phi").unwrap().last().unwrap()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        // ⟨cos 2πx, m_t⟩ = 2 Re m¹(t) = 0.5 e^{-2π² t}
        let want = 0.5 * (-2.0 * PI * PI * 0.2f64).exp();
        assert!((mean - want).abs() < 3.0 * sd / n.sqrt(), "{mean} {want}");
    }

    #[test]
    fn exit_time_interpolates() {
        let mut r = Recorder::Exit { eta: 0.5, prev: 0.0, hit: None };
        r.watch(0.0, 0.1, 0.2);
        r.watch(0.1, 0.1, 0.4);
        r.watch(0.2, 0.1, 0.8);
        let Recorder::Exit { hit, .. } = r else { unreachable!() };
        assert!((hit.unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn csv_has_long_format() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let c = cfg(8, 1, vec![ObservableSpec::ExitTime { eta: 0.99 }]);
        let runs = simulate(&c, &DriftSpec::Kuramoto { kappa: 0.5 }, &mu0(lat)).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&runs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("replica,t,observable,re,im\n0,"));
    }
}
