use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lindblad", version, about = "Contraction certificates, spectra and simulations for Lindblad dynamics")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hamiltonian-independent contraction certificate of the model's jumps.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spectrum of the generator at a given time.
    Spectrum {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
    /// Stationary states of the generator at a given time.
    FixedPoints {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
    /// Expectation value of an observable along a trajectory (CSV).
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        initial: String,
        #[arg(long)]
        observable: String,
        #[command(flatten)]
        integ: Integration,
    },
    /// Trace distance between two evolving states (CSV).
    Envelope {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        t_end: f64,
        #[command(flatten)]
        integ: Integration,
    },
    /// Ladder dissipators.
    Ladder {
        #[command(subcommand)]
        command: LadderCommand,
    },
    /// Rates that survive drives and perturbations.
    Perturb {
        #[command(subcommand)]
        command: PerturbCommand,
    },
    /// Built-in reference models and their default experiments.
    Scenario {
        #[command(subcommand)]
        scenario: Scenario,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Exp,
    Rk4,
}

#[derive(Debug, Clone, Args)]
pub struct Integration {
    /// Base step size.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of output samples on [0, t_end].
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Integrator (default: exp, or rk4 for rotating drives).
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Skip the half-step error control.
    #[arg(long)]
    pub no_richardson: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ho,
    Am,
    Ul,
}

#[derive(Debug, Subcommand)]
pub enum LadderCommand {
    /// Second eigenvalue against dimension for a named family (CSV).
    Scan {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        dmax: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Three-level rate constant over a range of the second coefficient (CSV).
    CAlpha {
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BaseArgs {
    /// Prefactor of the unperturbed contraction.
    #[arg(long)]
    pub k: f64,
    /// Rate of the unperturbed contraction.
    #[arg(long)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AverageKindArg {
    Drive,
    Perturbation,
}

#[derive(Debug, Subcommand)]
pub enum PerturbCommand {
    /// Small Hamiltonian drive of operator norm at most VMAX.
    Small {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        vmax: f64,
    },
    /// Hamiltonian whose time derivative has operator norm at most HDOT.
    Slow {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        hdot: f64,
    },
    /// Generator perturbation of induced trace norm at most DELTA_L.
    Lemma {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        delta_l: f64,
    },
    /// Perturbation that is only small on average over windows of length PERIOD.
    Average {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        avg: f64,
        #[arg(long)]
        period: f64,
        #[arg(long, value_enum, default_value_t = AverageKindArg::Drive)]
        kind: AverageKindArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum Scenario {
    /// Two-qubit dissipator with and without the constant drive (CSV of ⟨I⊗σz⟩).
    Ce1 {
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        #[arg(long, default_value_t = 501)]
        samples: usize,
        /// Print the model file instead of running.
        #[arg(long)]
        emit_model: bool,
        /// With --emit-model: include the constant drive.
        #[arg(long)]
        with_hamiltonian: bool,
    },
    /// Two-qubit dissipator under the accelerating rotating drive (CSV).
    Ce2 {
        #[arg(long, default_value_t = 3.0)]
        r: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// Step size before scaling by the drive frequency.
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        #[arg(long)]
        emit_model: bool,
    },
    /// Depolarizing qubit: certificate report.
    Depolarizing {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        emit_model: bool,
    },
    /// Three-level ladder |0⟩⟨1| + α|1⟩⟨2|: certificate report.
    Ladder3 {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        emit_model: bool,
    },
}
