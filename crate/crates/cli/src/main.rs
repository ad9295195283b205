use std::path::PathBuf;
use std::process::ExitCode;

use chaosbench_cli::config::{DriftConfig, LatticeConfig, ModeWeight};
use chaosbench_cli::{execute, parse_config, plan, CliError, ExperimentKind, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chaosbench", version, about = "Propagation-of-chaos experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Validates the configuration and prints the plan without computing.
    #[arg(long)]
    dry_run: bool,
    /// Overrides the output directory of the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Coupling {
    /// Coupling strength, used when no configuration file is given.
    #[arg(long)]
    kappa: Option<f64>,
    /// Lattice cutoff, used when no configuration file is given.
    #[arg(long, default_value_t = 16)]
    cutoff: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the particle system and record empirical modes.
    Simulate(Common),
    /// Solve the nonlinear Fokker-Planck equation.
    FpSolve(Common),
    /// Kuramoto stationary profile.
    Stationary {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        coupling: Coupling,
    },
    /// Spectrum of the flow linearised at the uniform measure.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        coupling: Coupling,
        /// Fourier coefficient `Ŵ¹` of the potential, used without a configuration file.
        #[arg(long)]
        w1: Option<f64>,
    },
    /// Weak error `|E Φ(μᴺ_t) − Φ(m_t)|` across particle counts.
    WeakError(Common),
    /// Strong error `E‖μᴺ_t − ν‖²` across particle counts.
    StrongError(Common),
    /// Exponential relaxation of the mean-field flow.
    ErgodicDecay(Common),
    /// Exit times of the Kuramoto order parameter.
    ExitTime(Common),
    /// Finite-difference checks of the representation formulas.
    Check(Common),
    /// Mollification and Fejér smoothing errors on a stress set.
    MollifyTest(Common),
}

fn flag_config(kind: ExperimentKind, cutoff: usize, drift: DriftConfig) -> RunConfig {
    RunConfig {
        experiment: kind,
        seed: 0,
        output_dir: PathBuf::from("results"),
        lattice: LatticeConfig { dim: 1, cutoff },
        drift: Some(drift),
        functional: None,
        initial: None,
        solver: None,
        sim: None,
        weak_error: None,
        strong_error: None,
        ergodic_decay: None,
        exit_time: None,
        check: None,
        mollify_test: None,
    }
}

fn resolve(command: Command) -> Result<(RunConfig, bool), CliError> {
    let (kind, common, from_flags) = match command {
        Command::Simulate(c) => (ExperimentKind::Simulate, c, None),
        Command::FpSolve(c) => (ExperimentKind::FpSolve, c, None),
        Command::Stationary { common, coupling } => {
            let flags = coupling.kappa.map(|kappa| {
                flag_config(ExperimentKind::Stationary, coupling.cutoff, DriftConfig::Kuramoto { kappa })
            });
            (ExperimentKind::Stationary, common, flags)
        }
        Command::Spectrum { common, coupling, w1 } => {
            let flags = coupling.kappa.map(|kappa| {
                let potential = vec![ModeWeight { mode: vec![1], value: w1.unwrap_or(0.0) }];
                flag_config(ExperimentKind::Spectrum, coupling.cutoff, DriftConfig::ConvolutionGradient { kappa, potential })
            });
            (ExperimentKind::Spectrum, common, flags)
        }
        Command::WeakError(c) => (ExperimentKind::WeakError, c, None),
        Command::StrongError(c) => (ExperimentKind::StrongError, c, None),
        Command::ErgodicDecay(c) => (ExperimentKind::ErgodicDecay, c, None),
        Command::ExitTime(c) => (ExperimentKind::ExitTime, c, None),
        Command::Check(c) => (ExperimentKind::Check, c, None),
        Command::MollifyTest(c) => (ExperimentKind::MollifyTest, c, None),
    };
    let mut cfg = match (&common.config, from_flags) {
        (Some(path), None) => parse_config(path)?,
        (None, Some(cfg)) => {
            cfg.validate()?;
            cfg
        }
        (Some(_), Some(_)) => return Err(CliError::Invalid("give either a configuration file or flags, not both".into())),
        (None, None) => return Err(CliError::Invalid(format!("{} needs a configuration file", kind.name()))),
    };
    if cfg.experiment != kind {
        return Err(CliError::Invalid(format!(
            "configuration is for `{}`, not `{}`",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = common.output {
        cfg.output_dir = out;
    }
    Ok((cfg, common.dry_run))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli.command).and_then(|(cfg, dry_run)| {
        if dry_run {
            for line in plan(&cfg)? {
                println!("{line}");
            }
            return Ok(None);
        }
        execute(&cfg).map(Some)
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(outcome)) => {
            println!("{}", outcome.summary);
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("results in {}", outcome.run_dir.display());
            if outcome.passed == Some(false) {
                eprintln!("acceptance assertion failed");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
