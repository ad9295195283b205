use std::f64::consts::TAU;

use chaosbench::drift::{DriftSpec, PotentialSpec};
use chaosbench::experiments::{replicas_at, weak_error_experiment, WeakErrorConfig};
use chaosbench::functionals::FunctionalSpec;
use chaosbench::pde::SolverConfig;
use chaosbench::spectral::{ModeLattice, SpectralField};

fn lattice() -> ModeLattice {
    ModeLattice::new(1, 8).unwrap()
}

fn mu0() -> SpectralField {
    SpectralField::from_fn(lattice(), |x| 1.0 + 0.5 * (TAU * x[0]).cos()).unwrap().into_density().unwrap()
}

fn config(seed: u64, crn: bool) -> WeakErrorConfig {
    WeakErrorConfig {
        n_list: vec![16, 64],
        t_list: vec![0.5],
        replicas: 400,
        scale_replicas: false,
        dt: 0.01,
        seed,
        crn,
        pde: SolverConfig::new(lattice(), 0.005, 0.5).unwrap(),
        kuramoto_eta: 0.2,
    }
}

#[test]
fn linear_functional_is_unbiased_without_interaction() {
    let free = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(1), kappa: 0.0 };
    let g = SpectralField::from_fn(lattice(), |x| (TAU * x[0]).cos()).unwrap();
    let report = weak_error_experiment(&free, &FunctionalSpec::linear(g), &mu0(), &config(3, true)).unwrap();
    for row in report.table.rows() {
        assert!(row.abs_error <= 4.0 * row.std_error, "{row:?}");
    }
}

#[test]
fn common_and_independent_noise_agree() {
    let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::cosine(0.5), kappa: 1.0 };
    let phi = FunctionalSpec::sobolev(SpectralField::uniform(lattice()), 1.0).unwrap();
    let a = weak_error_experiment(&drift, &phi, &mu0(), &config(5, true)).unwrap();
    let b = weak_error_experiment(&drift, &phi, &mu0(), &config(5, false)).unwrap();
    for (x, y) in a.table.rows().iter().zip(b.table.rows()) {
        let se = x.std_error.hypot(y.std_error);
        assert!((x.estimate - y.estimate).abs() <= 3.0 * se, "{x:?} vs {y:?}");
    }
}

#[test]
fn runs_do_not_depend_on_thread_count() {
    let drift = DriftSpec::Kuramoto { kappa: 0.5 };
    let phi = FunctionalSpec::sobolev(SpectralField::uniform(lattice()), 1.0).unwrap();
    let cfg = WeakErrorConfig { replicas: 40, ..config(8, true) };
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| weak_error_experiment(&drift, &phi, &mu0(), &cfg)).unwrap();
        let mut out = Vec::new();
        report.table.write_csv(&mut out).unwrap();
        String::from_utf8(out).unwrap()
    };
    let one = csv(1);
    assert_eq!(one, csv(3));
    let mut lines = one.lines();
    assert_eq!(lines.next(), Some("N,t,estimate,std_error,pde_reference,abs_error"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn replica_scaling_keeps_the_particle_budget() {
    let cfg = WeakErrorConfig { n_list: vec![64, 2048], replicas: 20_000, scale_replicas: true, ..config(0, true) };
    assert_eq!(replicas_at(&cfg, 64), 20_000);
    assert_eq!(replicas_at(&cfg, 2048), 625);
}
