use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{LaborState, ModelParams};
use crate::vacancy::VacancyFunction;

/// Weights of the running cost `A (U - U_ref) + B u1 + C u2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            a: 20.0,
            b: 1.0,
            c: 40000.0,
        }
    }
}

/// Named parameterizations of the controlled dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// Rates as tabulated for Portugal 2004–2016.
    #[default]
    PaperText,
    /// Rates as coded in the ACADO listing (`omega = 50000`, `delta = 0.06`).
    AppendixAcado,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::PaperText, Preset::AppendixAcado];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperText => "paper-text",
            Preset::AppendixAcado => "appendix-acado",
        }
    }

    pub fn params(self) -> ModelParams {
        match self {
            Preset::PaperText => ModelParams::PORTUGAL,
            Preset::AppendixAcado => ModelParams::APPENDIX_ACADO,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown OCP preset '{s}'")))
    }
}

/// Constrained optimal-control problem on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpProblem {
    pub params: ModelParams,
    pub vacancy: VacancyFunction,
    /// End of the horizon in months; the start is 0.
    pub horizon: f64,
    pub grid_intervals: usize,
    pub weights: Weights,
    pub u1_bounds: (f64, f64),
    pub u2_bounds: (f64, f64),
    pub initial: LaborState,
    /// Admissible range of `U(T) + E(T)`.
    pub terminal_labor_force: (f64, f64),
    /// Upper bound on `U / (U + E)` at every grid node.
    pub max_unemployment_rate: f64,
    /// `U_ref` in the running cost. Shifts the objective by a constant and
    /// never changes the minimizer.
    pub reference_level: f64,
}

impl OcpProblem {
    pub fn preset(preset: Preset) -> Self {
        let initial = LaborState::PORTUGAL_2004;
        OcpProblem {
            params: preset.params(),
            vacancy: VacancyFunction::PORTUGAL,
            horizon: 150.0,
            grid_intervals: 150,
            weights: Weights::default(),
            u1_bounds: (-40000.0, 40000.0),
            u2_bounds: (0.0, 1.0),
            initial,
            terminal_labor_force: (5e6, 8e6),
            max_unemployment_rate: 0.12,
            reference_level: initial.unemployed,
        }
    }

    /// Same problem with both controls pinned to zero.
    pub fn frozen(&self) -> Self {
        OcpProblem {
            u1_bounds: (0.0, 0.0),
            u2_bounds: (0.0, 0.0),
            ..self.clone()
        }
    }

    pub fn with_intervals(&self, n: usize) -> Self {
        OcpProblem {
            grid_intervals: n,
            ..self.clone()
        }
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.grid_intervals as f64
    }

    /// Node times `0, h, ..., T`.
    pub fn grid(&self) -> alloc::vec::Vec<f64> {
        let n = self.grid_intervals;
        (0..=n).map(|k| self.horizon * k as f64 / n as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.vacancy.validate()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive and finite"));
        }
        if self.grid_intervals < 2 {
            return Err(Error::invalid("need at least 2 grid intervals"));
        }
        let w = self.weights;
        if !(w.a.is_finite() && w.b.is_finite() && w.c.is_finite()) {
            return Err(Error::invalid("cost weights must be finite"));
        }
        for (name, (lo, hi)) in [
            ("u1", self.u1_bounds),
            ("u2", self.u2_bounds),
            ("terminal labor force", self.terminal_labor_force),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(alloc::format!(
                    "{name} bounds must be finite and ordered"
                )));
            }
        }
        let s = self.initial;
        if !(s.unemployed.is_finite() && s.employed.is_finite() && s.unemployed >= 0.0 && s.employed >= 0.0) {
            return Err(Error::invalid("initial state must be finite and non-negative"));
        }
        if !(self.max_unemployment_rate > 0.0 && self.max_unemployment_rate <= 1.0) {
            return Err(Error::invalid("maximum unemployment rate must lie in (0, 1]"));
        }
        if !self.reference_level.is_finite() {
            return Err(Error::invalid("reference level must be finite"));
        }
        Ok(())
    }
}

impl Default for OcpProblem {
    fn default() -> Self {
        OcpProblem::preset(Preset::PaperText)
    }
}
