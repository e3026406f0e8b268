//! Command-line interface. Flags are turned into a [`ConfigLayer`] and
//! merged over the config file, so every flag has a config-file key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unemp::datafit::FOURIER3_START_W;

use crate::commands::{self, Outcome};
use crate::config::{resolve, ConfigLayer, ModelKind};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "unemp",
    version,
    about = "Unemployment models: simulate, fit, analyze, optimize"
)]
pub struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory [default: out].
    #[arg(long, global = true, env = "UNEMP_OUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a model and write its trajectory.
    Simulate(SimulateArgs),
    /// Fit the Fourier vacancy series to a data file.
    Fit(FitArgs),
    /// Equilibrium, attracting region and stability at a vacancy level.
    Analyze(AnalyzeArgs),
    /// Solve the constrained optimal-control problem.
    Ocp(OcpArgs),
    /// Write a synthetic monthly data set.
    Synth(SynthArgs),
    /// Overlay observed and simulated unemployment rates.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Inflow of employed (new model).
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Hiring driven by wage devaluation (new model).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Vacancy creation per unemployed (munoli-gani model).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Initial unemployed.
    #[arg(long)]
    pub u0: Option<f64>,
    /// Initial employed.
    #[arg(long)]
    pub e0: Option<f64>,
    /// Initial vacancies (munoli-gani model).
    #[arg(long)]
    pub v0: Option<f64>,
    /// constant:X | fourier | fourier:a0,a1,b1,a2,b2,a3,b3,w | fit:data.csv
    #[arg(long, value_name = "SOURCE")]
    pub vacancy: Option<String>,
}

impl ParamArgs {
    fn apply(&self, l: &mut ConfigLayer) {
        let p = &mut l.params;
        set(&mut p.lambda, self.lambda);
        set(&mut p.kappa, self.kappa);
        set(&mut p.alpha1, self.alpha1);
        set(&mut p.alpha2, self.alpha2);
        set(&mut p.gamma, self.gamma);
        set(&mut p.omega, self.omega);
        set(&mut p.delta, self.delta);
        set(&mut p.rho, self.rho);
        set(&mut p.phi, self.phi);
        set(&mut l.initial.u0, self.u0);
        set(&mut l.initial.e0, self.e0);
        set(&mut l.initial.v0, self.v0);
        set(&mut l.vacancy.source, self.vacancy.clone());
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Built-in parameter preset: portugal-2004-2016 | munoli-gani-2016.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

impl ModelArgs {
    fn apply(&self, l: &mut ConfigLayer) {
        set(&mut l.model, self.model);
        set(&mut l.preset, self.preset.clone());
        self.params.apply(l);
    }
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// End of the horizon, months.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Spacing of written samples, months.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

impl RunArgs {
    fn apply(&self, l: &mut ConfigLayer) {
        set(&mut l.run.t_end, self.t_end);
        set(&mut l.run.step, self.step);
        set(&mut l.run.rel_tol, self.rel_tol);
        set(&mut l.run.abs_tol, self.abs_tol);
    }
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Data file (t,U,UR,D) to overlay in the plot script.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    /// Data file with header t,U,UR,D.
    pub data: Option<PathBuf>,
    /// Start value of the frequency w.
    #[arg(long, default_value_t = FOURIER3_START_W)]
    pub w0: f64,
}

#[derive(Debug, Args, Default)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Vacancy level [default: mean level a0 of the vacancy source].
    #[arg(long)]
    pub v: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OcpPresetArg {
    PaperText,
    AppendixAcado,
}

impl OcpPresetArg {
    fn name(self) -> &'static str {
        match self {
            OcpPresetArg::PaperText => "paper-text",
            OcpPresetArg::AppendixAcado => "appendix-acado",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// Collocation intervals.
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Stationarity tolerance.
    #[arg(long)]
    pub kkt_tol: Option<f64>,
    /// Constraint violation tolerance (scaled).
    #[arg(long)]
    pub feas_tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub weight_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub weight_b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub weight_c: Option<f64>,
    /// Clock-state formulation and loose tolerance, as in the ACADO setup.
    #[arg(long)]
    pub acado_compat: bool,
}

impl SolverArgs {
    fn apply(&self, l: &mut ConfigLayer) {
        let o = &mut l.ocp;
        set(&mut o.intervals, self.intervals);
        set(&mut o.kkt_tol, self.kkt_tol);
        set(&mut o.feas_tol, self.feas_tol);
        set(&mut o.weight_a, self.weight_a);
        set(&mut o.weight_b, self.weight_b);
        set(&mut o.weight_c, self.weight_c);
        if self.acado_compat {
            o.acado_compat = Some(true);
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct OcpArgs {
    /// Parameterization of the controlled dynamics.
    #[arg(long, value_enum)]
    pub preset: Option<OcpPresetArg>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// End of the horizon, months.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Pin both controls to zero.
    #[arg(long)]
    pub freeze_controls: bool,
}

#[derive(Debug, Args, Default)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of months.
    #[arg(long)]
    pub months: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct CompareArgs {
    /// Data file with header t,U,UR,D.
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Resampling of model output to the data length: time | index.
    #[arg(long)]
    pub resample: Option<String>,
    /// Skip the optimal-control run.
    #[arg(long)]
    pub no_ocp: bool,
    /// Parameterization for the optimal-control run.
    #[arg(long, value_enum)]
    pub ocp_preset: Option<OcpPresetArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn data_path(flag: &Option<PathBuf>, file: Option<&ConfigLayer>) -> CliResult<PathBuf> {
    flag.clone()
        .or_else(|| file.and_then(|f| f.run.data.clone()))
        .ok_or_else(|| CliError::config("no data file given (argument or [run] data)"))
}

impl Cli {
    pub fn run(&self) -> CliResult<Outcome> {
        let mut layer = ConfigLayer::default();
        let file = self.config.as_deref().map(ConfigLayer::load).transpose()?;
        let settings = |layer: &ConfigLayer| resolve(self.config.as_deref(), layer, self.out.clone());
        match &self.command {
            Command::Simulate(a) => {
                a.model.apply(&mut layer);
                a.run.apply(&mut layer);
                set(&mut layer.run.data, a.data.clone());
                commands::simulate(&settings(&layer)?)
            }
            Command::Fit(a) => {
                let path = data_path(&a.data, file.as_ref())?;
                commands::fit(&settings(&layer)?, &path, a.w0)
            }
            Command::Analyze(a) => {
                a.model.apply(&mut layer);
                commands::analyze(&settings(&layer)?, a.v)
            }
            Command::Ocp(a) => {
                set(&mut layer.ocp.preset, a.preset.map(|p| p.name().to_string()));
                a.params.apply(&mut layer);
                set(&mut layer.run.t_end, a.t_end);
                a.solver.apply(&mut layer);
                if a.freeze_controls {
                    layer.ocp.freeze_controls = Some(true);
                }
                commands::ocp(&settings(&layer)?)
            }
            Command::Synth(a) => {
                set(&mut layer.run.seed, a.seed);
                set(&mut layer.synth.months, a.months);
                commands::synth(&settings(&layer)?)
            }
            Command::Compare(a) => {
                a.model.apply(&mut layer);
                a.run.apply(&mut layer);
                set(&mut layer.run.resample, a.resample.clone());
                set(&mut layer.ocp.preset, a.ocp_preset.map(|p| p.name().to_string()));
                a.solver.apply(&mut layer);
                let path = data_path(&a.data, file.as_ref())?;
                commands::compare(&settings(&layer)?, &path, !a.no_ocp)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_reach_the_layer() {
        let cli = Cli::try_parse_from([
            "unemp",
            "ocp",
            "--preset",
            "appendix-acado",
            "--lambda",
            "1",
            "--acado-compat",
            "--weight-b",
            "-2",
        ])
        .unwrap();
        let Command::Ocp(a) = &cli.command else { panic!() };
        let mut l = ConfigLayer::default();
        a.params.apply(&mut l);
        a.solver.apply(&mut l);
        assert_eq!(l.params.lambda, Some(1.0));
        assert_eq!(l.ocp.weight_b, Some(-2.0));
        assert_eq!(l.ocp.acado_compat, Some(true));
        assert_eq!(a.preset.unwrap().name(), "appendix-acado");
    }
}
