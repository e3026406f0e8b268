//! Run configuration: built-in parameter presets, TOML config files and
//! command-line overrides, merged in that order of increasing priority.
//!
//! File schema (`format_version = 1`), every key optional:
//!
//! ```toml
//! format_version = 1
//! model = "new"                 # or "munoli-gani"
//! preset = "portugal-2004-2016" # built-in parameter preset
//!
//! [params]    # lambda kappa alpha1 alpha2 gamma omega delta rho phi
//! [initial]   # u0 e0 v0
//! [vacancy]   # source = "fourier" | "constant:X" | "fourier:a0,a1,b1,a2,b2,a3,b3,w" | "fit:path.csv"
//! [run]       # t_end step rel_tol abs_tol out_dir seed resample data
//! [ocp]       # preset intervals kkt_tol feas_tol weight_a weight_b weight_c acado_compat freeze_controls
//! [synth]     # months
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use unemp::datafit::{fit_fourier3, FOURIER3_START_W};
use unemp::integrator::ResampleMode;
use unemp::ocp::{Preset, Weights};
use unemp::{BaselineParams, BaselineState, LaborState, ModelParams, VacancyFunction};

use crate::data::read_series;
use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_OUT_DIR: &str = "out";
pub const DEFAULT_SEED: u64 = 42;

const PORTUGAL_PRESET: &str = include_str!("../presets/portugal-2004-2016.toml");
const MUNOLI_GANI_PRESET: &str = include_str!("../presets/munoli-gani-2016.toml");

/// Built-in presets by name.
pub const BUILTIN_PRESETS: [(&str, &str); 2] = [
    ("portugal-2004-2016", PORTUGAL_PRESET),
    ("munoli-gani-2016", MUNOLI_GANI_PRESET),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Two compartments, exogenous vacancies.
    New,
    /// Three compartments with endogenous vacancies.
    MunoliGani,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::New => "new",
            ModelKind::MunoliGani => "munoli-gani",
        }
    }

    fn default_preset(self) -> &'static str {
        match self {
            ModelKind::New => "portugal-2004-2016",
            ModelKind::MunoliGani => "munoli-gani-2016",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub gamma: Option<f64>,
    pub omega: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialOverrides {
    pub u0: Option<f64>,
    pub e0: Option<f64>,
    pub v0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacancySection {
    pub source: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resample: Option<String>,
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcpSection {
    pub preset: Option<String>,
    pub intervals: Option<usize>,
    pub kkt_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub weight_a: Option<f64>,
    pub weight_b: Option<f64>,
    pub weight_c: Option<f64>,
    pub acado_compat: Option<bool>,
    pub freeze_controls: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub months: Option<usize>,
}

/// One layer of configuration. Presets, config files and flags all share
/// this shape; later layers win key by key.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub format_version: Option<u32>,
    /// Name of a built-in preset file; informational inside presets.
    pub name: Option<String>,
    pub model: Option<ModelKind>,
    pub preset: Option<String>,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default)]
    pub initial: InitialOverrides,
    #[serde(default)]
    pub vacancy: VacancySection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub ocp: OcpSection,
    #[serde(default)]
    pub synth: SynthSection,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl ConfigLayer {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let layer: ConfigLayer = toml::from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))?;
        match layer.format_version {
            Some(FORMAT_VERSION) | None => Ok(layer),
            Some(v) => Err(CliError::config(format!(
                "{origin}: unsupported format_version {v} (this build reads {FORMAT_VERSION})"
            ))),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn builtin(name: &str) -> CliResult<Self> {
        let (_, text) = BUILTIN_PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let known: Vec<&str> = BUILTIN_PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::config(format!("unknown preset '{name}' (known: {})", known.join(", ")))
        })?;
        Self::parse(text, name)
    }

    /// `self` with every key set in `top` replaced.
    pub fn merged(mut self, top: &ConfigLayer) -> ConfigLayer {
        overlay!(self, top; format_version, name, model, preset);
        overlay!(self.params, top.params; lambda, kappa, alpha1, alpha2, gamma, omega, delta, rho, phi);
        overlay!(self.initial, top.initial; u0, e0, v0);
        overlay!(self.vacancy, top.vacancy; source);
        overlay!(self.run, top.run; t_end, step, rel_tol, abs_tol, out_dir, seed, resample, data);
        overlay!(self.ocp, top.ocp; preset, intervals, kkt_tol, feas_tol, weight_a, weight_b, weight_c,
            acado_compat, freeze_controls);
        overlay!(self.synth, top.synth; months);
        self
    }
}

/// Where vacancies come from in the two-compartment model.
#[derive(Debug, Clone, PartialEq)]
pub enum VacancySource {
    Constant(f64),
    Fourier(VacancyFunction),
    /// Fourier series fitted to the `D` column of a data file.
    Fit(PathBuf),
}

impl FromStr for VacancySource {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s == "fourier" {
            return Ok(VacancySource::Fourier(VacancyFunction::PORTUGAL));
        }
        let bad = |why: &str| CliError::config(format!("vacancy source '{s}': {why}"));
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| bad("expected constant:X, fourier, fourier:<8 coefficients> or fit:<csv>"))?;
        match kind {
            "constant" => {
                let v: f64 = arg.trim().parse().map_err(|_| bad("constant is not a number"))?;
                if !v.is_finite() || v < 0.0 {
                    return Err(bad("constant must be finite and non-negative"));
                }
                Ok(VacancySource::Constant(v))
            }
            "fourier" => {
                let c: Vec<f64> = arg
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("coefficients must be numbers"))?;
                let c: [f64; 8] = c
                    .try_into()
                    .map_err(|_| bad("need 8 coefficients a0,a1,b1,a2,b2,a3,b3,w"))?;
                VacancyFunction::from_coefficients(c)
                    .map(VacancySource::Fourier)
                    .map_err(|e| bad(&e.to_string()))
            }
            "fit" if !arg.trim().is_empty() => Ok(VacancySource::Fit(PathBuf::from(arg.trim()))),
            _ => Err(bad("unknown kind")),
        }
    }
}

impl fmt::Display for VacancySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VacancySource::Constant(v) => write!(f, "constant:{v}"),
            VacancySource::Fourier(v) => {
                let c: Vec<String> = v.coefficients().iter().map(|x| x.to_string()).collect();
                write!(f, "fourier:{}", c.join(","))
            }
            VacancySource::Fit(p) => write!(f, "fit:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSetup {
    New {
        params: ModelParams,
        initial: LaborState,
        /// Source as configured, for the metadata header.
        source: VacancySource,
        vacancy: VacancyFunction,
    },
    Baseline {
        params: BaselineParams,
        initial: BaselineState,
    },
}

impl ModelSetup {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSetup::New { .. } => ModelKind::New,
            ModelSetup::Baseline { .. } => ModelKind::MunoliGani,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSettings {
    pub preset: Preset,
    pub intervals: usize,
    pub kkt_tol: f64,
    pub feas_tol: f64,
    pub weights: Weights,
    pub acado_compat: bool,
    pub freeze_controls: bool,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub preset: String,
    pub model: ModelSetup,
    pub t_end: f64,
    /// Spacing of written samples.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub resample: ResampleMode,
    pub data: Option<PathBuf>,
    pub months: usize,
    pub ocp: OcpSettings,
    /// Keys set explicitly by the config file or flags (not by the preset);
    /// the optimal-control problem starts from its own preset and applies
    /// only these.
    pub explicit: ConfigLayer,
}

/// Merges preset, config file and flags, then validates everything.
///
/// The output directory is taken from `out_override` (flag or environment)
/// when present, else from the config file, else [`DEFAULT_OUT_DIR`].
pub fn resolve(config_file: Option<&Path>, flags: &ConfigLayer, out_override: Option<PathBuf>) -> CliResult<Settings> {
    let file = match config_file {
        Some(p) => ConfigLayer::load(p)?,
        None => ConfigLayer::default(),
    };
    let explicit = file.merged(flags);

    let preset_name = match (&explicit.preset, explicit.model) {
        (Some(p), _) => p.clone(),
        (None, Some(m)) => m.default_preset().to_string(),
        (None, None) => ModelKind::New.default_preset().to_string(),
    };
    let preset = ConfigLayer::builtin(&preset_name)?;
    let preset_model = preset.model.unwrap_or(ModelKind::New);
    if let Some(m) = explicit.model {
        if m != preset_model {
            return Err(CliError::config(format!(
                "preset '{preset_name}' is for model '{}', not '{}'",
                preset_model.name(),
                m.name()
            )));
        }
    }
    let all = preset.merged(&explicit);

    let model = match preset_model {
        ModelKind::New => resolve_new(&all)?,
        ModelKind::MunoliGani => resolve_baseline(&all)?,
    };

    let run = &all.run;
    let t_end = run.t_end.unwrap_or(150.0);
    let step = run.step.unwrap_or(1.0);
    let rel_tol = run.rel_tol.unwrap_or(1e-6);
    let abs_tol = run.abs_tol.unwrap_or(1e-8);
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(CliError::config(format!("t_end = {t_end} must be positive")));
    }
    if !(step.is_finite() && step > 0.0 && step <= t_end) {
        return Err(CliError::config(format!("step = {step} must be in (0, t_end]")));
    }
    if !(rel_tol > 0.0 && abs_tol > 0.0) {
        return Err(CliError::config("integrator tolerances must be positive"));
    }
    let resample = match run.resample.as_deref() {
        None | Some("time") => ResampleMode::Time,
        Some("index") => ResampleMode::Index,
        Some(other) => {
            return Err(CliError::config(format!(
                "resample mode '{other}' (expected time or index)"
            )))
        }
    };

    let out_dir = out_override
        .or_else(|| all.run.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let months = all.synth.months.unwrap_or(150);
    if months < 2 {
        return Err(CliError::config("months must be at least 2"));
    }

    Ok(Settings {
        preset: preset_name,
        model,
        t_end,
        step,
        rel_tol,
        abs_tol,
        out_dir,
        seed: run.seed.unwrap_or(DEFAULT_SEED),
        resample,
        data: run.data.clone(),
        months,
        ocp: resolve_ocp(&all.ocp)?,
        explicit,
    })
}

fn resolve_new(all: &ConfigLayer) -> CliResult<ModelSetup> {
    let p = &all.params;
    if p.phi.is_some() {
        return Err(CliError::config("parameter 'phi' belongs to the munoli-gani model"));
    }
    if all.initial.v0.is_some() {
        return Err(CliError::config(
            "'v0' belongs to the munoli-gani model; use a vacancy source instead",
        ));
    }
    let base = ModelParams::PORTUGAL;
    let params = ModelParams {
        lambda: p.lambda.unwrap_or(base.lambda),
        kappa: p.kappa.unwrap_or(base.kappa),
        alpha1: p.alpha1.unwrap_or(base.alpha1),
        alpha2: p.alpha2.unwrap_or(base.alpha2),
        gamma: p.gamma.unwrap_or(base.gamma),
        omega: p.omega.unwrap_or(base.omega),
        delta: p.delta.unwrap_or(base.delta),
        rho: p.rho.unwrap_or(base.rho),
    };
    params.validate()?;
    let initial = LaborState::new(
        all.initial.u0.unwrap_or(LaborState::PORTUGAL_2004.unemployed),
        all.initial.e0.unwrap_or(LaborState::PORTUGAL_2004.employed),
    );
    check_initial(&[initial.unemployed, initial.employed])?;
    let source: VacancySource = all.vacancy.source.as_deref().unwrap_or("fourier").parse()?;
    let vacancy = vacancy_function(&source)?;
    Ok(ModelSetup::New {
        params,
        initial,
        source,
        vacancy,
    })
}

fn resolve_baseline(all: &ConfigLayer) -> CliResult<ModelSetup> {
    let p = &all.params;
    for (name, set) in [("omega", p.omega.is_some()), ("rho", p.rho.is_some())] {
        if set {
            return Err(CliError::config(format!("parameter '{name}' belongs to the new model")));
        }
    }
    if all.vacancy.source.is_some() {
        return Err(CliError::config(
            "vacancies are a state of the munoli-gani model; use --v0",
        ));
    }
    let base = BaselineParams::MUNOLI_GANI;
    let params = BaselineParams {
        lambda: p.lambda.unwrap_or(base.lambda),
        kappa: p.kappa.unwrap_or(base.kappa),
        alpha1: p.alpha1.unwrap_or(base.alpha1),
        alpha2: p.alpha2.unwrap_or(base.alpha2),
        gamma: p.gamma.unwrap_or(base.gamma),
        phi: p.phi.unwrap_or(base.phi),
        delta: p.delta.unwrap_or(base.delta),
    };
    params.validate()?;
    let initial = BaselineState::new(
        all.initial.u0.unwrap_or(LaborState::PORTUGAL_2004.unemployed),
        all.initial.e0.unwrap_or(LaborState::PORTUGAL_2004.employed),
        all.initial.v0.unwrap_or(unemp::model::V0_CODE),
    );
    check_initial(&initial.to_array())?;
    Ok(ModelSetup::Baseline { params, initial })
}

fn check_initial(values: &[f64]) -> CliResult<()> {
    if values.iter().all(|v| v.is_finite() && *v >= 0.0) {
        Ok(())
    } else {
        Err(CliError::config("initial state must be finite and non-negative"))
    }
}

pub fn vacancy_function(source: &VacancySource) -> CliResult<VacancyFunction> {
    match source {
        VacancySource::Constant(v) => Ok(VacancyFunction::constant(*v)),
        VacancySource::Fourier(f) => Ok(*f),
        VacancySource::Fit(path) => {
            let series = read_series(path)?;
            Ok(fit_fourier3(&series.t, &series.vacancies, FOURIER3_START_W)?.coefficients)
        }
    }
}

fn resolve_ocp(o: &OcpSection) -> CliResult<OcpSettings> {
    let preset: Preset = o.preset.as_deref().unwrap_or("paper-text").parse()?;
    let defaults = Weights::default();
    let weights = Weights {
        a: o.weight_a.unwrap_or(defaults.a),
        b: o.weight_b.unwrap_or(defaults.b),
        c: o.weight_c.unwrap_or(defaults.c),
    };
    if ![weights.a, weights.b, weights.c].iter().all(|w| w.is_finite()) {
        return Err(CliError::config("cost weights must be finite"));
    }
    let acado_compat = o.acado_compat.unwrap_or(false);
    let settings = OcpSettings {
        preset,
        intervals: o.intervals.unwrap_or(150),
        kkt_tol: o.kkt_tol.unwrap_or(if acado_compat { 1e-2 } else { 1e-4 }),
        feas_tol: o.feas_tol.unwrap_or(1e-6),
        weights,
        acado_compat,
        freeze_controls: o.freeze_controls.unwrap_or(false),
    };
    if settings.intervals < 2 {
        return Err(CliError::config("need at least 2 grid intervals"));
    }
    if !(settings.kkt_tol > 0.0 && settings.feas_tol > 0.0) {
        return Err(CliError::config("solver tolerances must be positive"));
    }
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_presets_match_the_core_constants() {
        let s = resolve(None, &ConfigLayer::default(), None).unwrap();
        match s.model {
            ModelSetup::New {
                params,
                initial,
                vacancy,
                ..
            } => {
                assert_eq!(params, ModelParams::PORTUGAL);
                assert_eq!(initial, LaborState::PORTUGAL_2004);
                assert_eq!(vacancy, VacancyFunction::PORTUGAL);
            }
            other => panic!("{other:?}"),
        }
        let flags = ConfigLayer {
            model: Some(ModelKind::MunoliGani),
            ..Default::default()
        };
        let s = resolve(None, &flags, None).unwrap();
        assert_eq!(s.preset, "munoli-gani-2016");
        match s.model {
            ModelSetup::Baseline { params, initial } => {
                assert_eq!(params, BaselineParams::MUNOLI_GANI);
                assert_eq!(initial.vacancies, 9625.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_beat_file_beat_preset() {
        let file: ConfigLayer = ConfigLayer::parse("[params]\nlambda = 1.0\ngamma = 2.0\n", "test").unwrap();
        let mut flags = ConfigLayer::default();
        flags.params.lambda = Some(3.0);
        let merged = ConfigLayer::builtin("portugal-2004-2016")
            .unwrap()
            .merged(&file)
            .merged(&flags);
        assert_eq!(merged.params.lambda, Some(3.0));
        assert_eq!(merged.params.gamma, Some(2.0));
        assert_eq!(merged.params.kappa, Some(0.000009));
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(ConfigLayer::parse("[params]\nlamda = 1.0\n", "t").is_err());
        assert!(ConfigLayer::parse("format_version = 2\n", "t").is_err());
        assert!(ConfigLayer::builtin("nowhere").is_err());
    }

    #[test]
    fn model_specific_keys_are_checked() {
        let mut flags = ConfigLayer::default();
        flags.params.phi = Some(0.1);
        assert_eq!(resolve(None, &flags, None).unwrap_err().exit_code(), 2);
        let flags = ConfigLayer {
            model: Some(ModelKind::MunoliGani),
            preset: Some("portugal-2004-2016".into()),
            ..Default::default()
        };
        assert!(resolve(None, &flags, None).is_err());
    }

    #[test]
    fn vacancy_sources_parse() {
        assert_eq!(
            "constant:0".parse::<VacancySource>().unwrap(),
            VacancySource::Constant(0.0)
        );
        let f: VacancySource = "fourier:1,2,3,4,5,6,7,0.5".parse().unwrap();
        assert_eq!(
            f,
            VacancySource::Fourier(
                VacancyFunction::from_coefficients([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 0.5]).unwrap()
            )
        );
        assert!("fourier:1,2".parse::<VacancySource>().is_err());
        assert!("constant:-1".parse::<VacancySource>().is_err());
        assert!("table:x".parse::<VacancySource>().is_err());
        let round: VacancySource = f.to_string().parse().unwrap();
        assert_eq!(round, f);
    }

    #[test]
    fn out_dir_precedence() {
        let file = std::env::temp_dir().join(format!("unemp-cfg-{}.toml", std::process::id()));
        std::fs::write(&file, "[run]\nout_dir = \"from-file\"\n").unwrap();
        let s = resolve(Some(&file), &ConfigLayer::default(), None).unwrap();
        assert_eq!(s.out_dir, PathBuf::from("from-file"));
        let s = resolve(Some(&file), &ConfigLayer::default(), Some("flag".into())).unwrap();
        assert_eq!(s.out_dir, PathBuf::from("flag"));
        let s = resolve(None, &ConfigLayer::default(), None).unwrap();
        assert_eq!(s.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        std::fs::remove_file(file).unwrap();
    }
}
