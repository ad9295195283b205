use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use chaosbench::drift::{DriftSpec, PotentialSpec, SmallMeanField};
use chaosbench::functionals::{FunctionalSpec, Mollified};
use chaosbench::pde::{stationary_kuramoto_profile, Integrator, SolverConfig};
use chaosbench::{ModeLattice, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::tagged::{kind_tagged, split_path};

/// One run: a single JSON document naming the experiment and everything it
/// needs. Sections that the experiment does not use may be omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<DensityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_error: Option<WeakErrorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_error: Option<StrongErrorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergodic_decay: Option<DecaySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_time: Option<ExitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollify_test: Option<MollifySection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    FpSolve,
    Stationary,
    Spectrum,
    WeakError,
    StrongError,
    ErgodicDecay,
    ExitTime,
    Check,
    MollifyTest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::FpSolve => "fp-solve",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::WeakError => "weak-error",
            ExperimentKind::StrongError => "strong-error",
            ExperimentKind::ErgodicDecay => "ergodic-decay",
            ExperimentKind::ExitTime => "exit-time",
            ExperimentKind::Check => "check",
            ExperimentKind::MollifyTest => "mollify-test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    pub cutoff: usize,
}

/// A Fourier mode with its coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWeight {
    pub mode: Vec<i64>,
    pub value: f64,
}

kind_tagged! {
    #[derive(Clone, Debug, PartialEq)]
    pub enum DriftConfig {
        /// `−κ∇W ⋆ μ` with the listed `Ŵ^n` (the conjugate modes are implied).
        ConvolutionGradient { kappa: f64, potential: Vec<ModeWeight> },
        Kuramoto { kappa: f64 },
        /// Double-well confinement `a cos(4πx)` plus `ε sin(2π(x − y))`.
        SmallMeanField { a: f64, epsilon: f64 },
    }
}

/// `1 + Σ a cos(2π(n·x − φ))` over the listed terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineTerm {
    pub mode: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

kind_tagged! {
    #[derive(Clone, Debug, PartialEq)]
    pub enum DensityConfig {
        Uniform {},
        Cosine { terms: Vec<CosineTerm> },
    }
}

kind_tagged! {
    #[derive(Clone, Debug, PartialEq)]
    pub enum FunctionalConfig {
        /// `∫ G dμ` with `G = Σ a cos(2π(n·x − φ))`.
        Linear { terms: Vec<CosineTerm> },
        SobolevDualSq {
            s: f64,
            #[serde(default)]
            reference: Option<DensityConfig>,
        },
        KuramotoRotInv { kappa: f64, eps_s: f64, delta_cut: f64 },
        Mollified { inner: Box<FunctionalConfig>, order: usize, eps: f64, nodes: usize },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(default)]
    pub t_end: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_one")]
    pub record_stride: usize,
}

fn default_integrator() -> Integrator {
    Integrator::Etdrk4
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub replicas: usize,
    #[serde(default = "default_one")]
    pub record_stride: usize,
    /// Cutoff of the recorded empirical modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes_cutoff: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakErrorSection {
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub replicas: usize,
    #[serde(default = "default_true")]
    pub scale_replicas: bool,
    pub dt: f64,
    #[serde(default = "default_true")]
    pub crn: bool,
    #[serde(default = "default_eta")]
    pub kuramoto_eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assert: Option<SlopeAssertion>,
}

fn default_eta() -> f64 {
    0.2
}

/// Fails the run unless every fitted slope lies in `target ± tol` with
/// `r² ≥ min_r2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeAssertion {
    pub target: f64,
    pub tol: f64,
    pub min_r2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrongErrorSection {
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub replicas: usize,
    pub dt: f64,
    #[serde(default = "default_true")]
    pub crn: bool,
    pub s: f64,
    /// Lattice cutoff of the norm; defaults to the run lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_inf: Option<DensityConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub initial: Vec<DensityConfig>,
    #[serde(default)]
    pub target: DecayTargetConfig,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_switch")]
    pub switch: f64,
    #[serde(default = "default_r2")]
    pub min_r2: f64,
}

fn default_switch() -> f64 {
    1e-6
}

fn default_r2() -> f64 {
    0.98
}

kind_tagged! {
    #[derive(Clone, Debug, PartialEq)]
    pub enum DecayTargetConfig {
        Invariant {},
        Given { density: DensityConfig },
        KuramotoFamily {},
    }
}

impl Default for DecayTargetConfig {
    fn default() -> Self {
        DecayTargetConfig::Invariant {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitSection {
    pub kappa: f64,
    pub eta: f64,
    pub n_list: Vec<usize>,
    pub replicas: usize,
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon_factor: f64,
    /// Width, in standard errors, of the monotonicity check.
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

fn default_horizon() -> f64 {
    4.0
}

fn default_sigmas() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub t_list: Vec<f64>,
    pub z_list: Vec<Vec<f64>>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_order")]
    pub min_order: f64,
    #[serde(default = "default_h")]
    pub rel_tol: f64,
    #[serde(default = "default_identity")]
    pub identity_tol: f64,
}

fn default_h() -> f64 {
    1e-3
}

fn default_order() -> f64 {
    0.9
}

fn default_identity() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifySection {
    pub measures: usize,
    /// `(order, ε)` pairs, coarse first.
    pub levels: Vec<(usize, f64)>,
    pub fejer_orders: Vec<usize>,
    /// Required error ratio finest/coarsest for both sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<(f64, f64)>,
}

/// Reads and validates a configuration file. Errors carry the line, column
/// and key path of the offending value.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_config_str(&text, &path.display().to_string())
}

pub fn parse_config_str(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let msg = bare_message(e.inner());
        let (nested, message) = split_path(&msg);
        let (mut line, mut column) = (e.inner().line(), e.inner().column());
        let path = match nested {
            Some(p) => {
                if let Some(at) = key_before(text_of(text, line, column), p) {
                    (line, column) = at;
                }
                format!("{}.{p}", e.path())
            }
            None => e.path().to_string(),
        };
        CliError::Config {
            origin: origin.to_string(),
            line,
            column,
            path,
            message: message.to_string(),
        }
    })?;
    de.end().map_err(|e| CliError::Config {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        path: ".".into(),
        message: bare_message(&e),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// The document up to a 1-based line and column.
fn text_of(text: &str, line: usize, column: usize) -> &str {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    &text[..(start + column).min(text.len())]
}

/// Line and column of the last `"key"` in `prefix`, for the final key of a
/// dotted path.
fn key_before(prefix: &str, path: &str) -> Option<(usize, usize)> {
    let key = path.rsplit('.').find(|k| !k.starts_with('['))?;
    let key = key.split('[').next()?;
    let at = prefix.rfind(&format!("\"{key}\""))?;
    let line = prefix[..at].matches('\n').count() + 1;
    let column = at - prefix[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

/// The error text without the trailing position, which is reported separately.
fn bare_message(e: &serde_json::Error) -> String {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    text.strip_suffix(&suffix).unwrap_or(&text).to_string()
}

fn semantic(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{key}: {e}"))
}

impl RunConfig {
    pub fn lattice(&self) -> Result<ModeLattice, CliError> {
        ModeLattice::new(self.lattice.dim, self.lattice.cutoff).map_err(|e| semantic("lattice", e))
    }

    pub fn drift(&self) -> Result<DriftSpec, CliError> {
        let d = self.drift.as_ref().ok_or_else(|| missing("drift", self.experiment))?;
        d.build(self.lattice.dim).map_err(|e| semantic("drift", e))
    }

    pub fn functional(&self) -> Result<FunctionalSpec, CliError> {
        let f = self.functional.as_ref().ok_or_else(|| missing("functional", self.experiment))?;
        f.build(self.lattice()?).map_err(|e| semantic("functional", e))
    }

    pub fn initial(&self) -> Result<SpectralField, CliError> {
        let d = self.initial.as_ref().ok_or_else(|| missing("initial", self.experiment))?;
        d.build(self.lattice()?).map_err(|e| semantic("initial", e))
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let s = self.solver.as_ref().ok_or_else(|| missing("solver", self.experiment))?;
        let cfg = SolverConfig {
            lattice: self.lattice()?,
            dt: s.dt,
            t_end: s.t_end,
            integrator: s.integrator,
            dealias: s.dealias,
            record_stride: s.record_stride,
        };
        cfg.validate().map_err(|e| semantic("solver", e))?;
        Ok(cfg)
    }

    /// Builds every object the experiment needs, so that a config that passes
    /// here fails only for numerical reasons.
    pub fn validate(&self) -> Result<(), CliError> {
        self.lattice()?;
        use ExperimentKind::*;
        let e = self.experiment;
        let needs = |section: bool, name: &str| if section { Ok(()) } else { Err(missing(name, e)) };
        match e {
            Simulate => {
                self.drift()?;
                self.initial()?;
                needs(self.sim.is_some(), "sim")?;
                if self.functional.is_some() {
                    self.functional()?;
                }
            }
            FpSolve => {
                self.drift()?;
                self.initial()?;
                self.solver()?;
            }
            Stationary => match self.drift {
                Some(DriftConfig::Kuramoto { kappa }) => {
                    stationary_kuramoto_profile(kappa, self.lattice()?).map_err(|e| semantic("drift", e))?;
                }
                _ => return Err(CliError::Invalid("stationary needs a kuramoto drift".into())),
            },
            Spectrum => {
                if self.drift()?.as_convolution().is_none() {
                    return Err(CliError::Invalid("spectrum needs a convolution or kuramoto drift".into()));
                }
            }
            WeakError => {
                self.drift()?;
                self.functional()?;
                self.initial()?;
                self.solver()?;
                needs(self.weak_error.is_some(), "weak_error")?;
            }
            StrongError => {
                self.drift()?;
                self.initial()?;
                self.solver()?;
                let s = self.strong_error.as_ref().ok_or_else(|| missing("strong_error", e))?;
                if let Some(nu) = &s.nu_inf {
                    nu.build(self.lattice()?).map_err(|e| semantic("strong_error.nu_inf", e))?;
                }
            }
            ErgodicDecay => {
                self.drift()?;
                self.solver()?;
                let s = self.ergodic_decay.as_ref().ok_or_else(|| missing("ergodic_decay", e))?;
                for (k, d) in s.initial.iter().enumerate() {
                    d.build(self.lattice()?).map_err(|e| semantic(&format!("ergodic_decay.initial[{k}]"), e))?;
                }
            }
            ExitTime => needs(self.exit_time.is_some(), "exit_time")?,
            Check => {
                self.drift()?;
                self.functional()?;
                self.initial()?;
                self.solver()?;
                needs(self.check.is_some(), "check")?;
            }
            MollifyTest => {
                self.functional()?;
                needs(self.mollify_test.is_some(), "mollify_test")?;
            }
        }
        Ok(())
    }
}

fn missing(section: &str, kind: ExperimentKind) -> CliError {
    CliError::Invalid(format!("{} needs a `{section}` section", kind.name()))
}

impl DriftConfig {
    pub fn build(&self, dim: usize) -> chaosbench::Result<DriftSpec> {
        let spec = match self {
            DriftConfig::ConvolutionGradient { kappa, potential } => {
                let modes: Vec<(Vec<i64>, f64)> = potential.iter().map(|m| (m.mode.clone(), m.value)).collect();
                DriftSpec::ConvolutionGradient { potential: PotentialSpec::from_modes(dim, &modes)?, kappa: *kappa }
            }
            DriftConfig::Kuramoto { kappa } => DriftSpec::Kuramoto { kappa: *kappa },
            DriftConfig::SmallMeanField { a, epsilon } => {
                DriftSpec::SmallMeanField(SmallMeanField::double_well(*a, *epsilon)?)
            }
        };
        spec.validate()?;
        if spec.dim() != dim {
            return Err(chaosbench::Error::InvalidInput(format!("drift lives in d = {}, lattice in d = {dim}", spec.dim())));
        }
        Ok(spec)
    }
}

fn cosine_sum(terms: &[CosineTerm], lattice: ModeLattice, constant: f64) -> chaosbench::Result<SpectralField> {
    for t in terms {
        if t.mode.len() != lattice.dim() {
            return Err(chaosbench::Error::InvalidInput(format!(
                "mode {:?} does not have {} components",
                t.mode,
                lattice.dim()
            )));
        }
        if lattice.index(&t.mode).is_none() {
            return Err(chaosbench::Error::InvalidInput(format!("mode {:?} is outside the lattice", t.mode)));
        }
    }
    SpectralField::from_fn(lattice, |x| {
        constant
            + terms
                .iter()
                .map(|t| {
                    let nx: f64 = t.mode.iter().zip(x).map(|(n, x)| *n as f64 * x).sum();
                    t.amplitude * (TAU * (nx - t.phase)).cos()
                })
                .sum::<f64>()
    })
}

impl DensityConfig {
    pub fn build(&self, lattice: ModeLattice) -> chaosbench::Result<SpectralField> {
        match self {
            DensityConfig::Uniform {} => Ok(SpectralField::uniform(lattice)),
            DensityConfig::Cosine { terms } => cosine_sum(terms, lattice, 1.0)?.into_density(),
        }
    }
}

impl FunctionalConfig {
    pub fn build(&self, lattice: ModeLattice) -> chaosbench::Result<FunctionalSpec> {
        match self {
            FunctionalConfig::Linear { terms } => Ok(FunctionalSpec::linear(cosine_sum(terms, lattice, 0.0)?)),
            FunctionalConfig::SobolevDualSq { s, reference } => {
                let nu0 = match reference {
                    Some(d) => d.build(lattice)?,
                    None => SpectralField::uniform(lattice),
                };
                FunctionalSpec::sobolev(nu0, *s)
            }
            FunctionalConfig::KuramotoRotInv { kappa, eps_s, delta_cut } => {
                FunctionalSpec::kuramoto_rot_inv(*kappa, *eps_s, *delta_cut, lattice)
            }
            FunctionalConfig::Mollified { inner, order, eps, nodes } => {
                let m = Mollified::new(inner.build(lattice)?, *order, *eps, *nodes)?;
                Ok(FunctionalSpec::Mollified(Box::new(m)))
            }
        }
    }
}
