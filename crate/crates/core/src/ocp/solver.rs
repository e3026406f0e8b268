use alloc::vec;
use alloc::vec::Vec;

use super::nlp::{solve_auglag, AugLagOptions, AugLagStatus, Nlp, OuterRecord};
use super::policy::{self, evaluate_policy, Propagation};
use super::problem::OcpProblem;
use super::transcription::{transcribe, ConstraintLocation, Formulation, Transcription};
use crate::error::Result;
use crate::integrator::{integrate_on_grid, IntegratorConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub formulation: Formulation,
    pub nlp: AugLagOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            formulation: Formulation::Analytic,
            nlp: AugLagOptions::default(),
        }
    }
}

impl SolverOptions {
    /// Loose stationarity tolerance and the clock-state model, matching the
    /// ACADO configuration.
    pub fn acado_compat() -> Self {
        SolverOptions {
            formulation: Formulation::ClockState,
            nlp: AugLagOptions {
                kkt_tol: 1e-2,
                ..AugLagOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    /// Constraints could not be satisfied; reports the worst one.
    Infeasible {
        max_violation: f64,
        location: ConstraintLocation,
    },
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterationLimit => "iteration-limit",
            SolveStatus::Infeasible { .. } => "infeasible",
        }
    }
}

/// Scaled constraint residuals. Defects are relative to the initial state
/// magnitude, path and terminal violations likewise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub defect: f64,
    pub path: f64,
    pub terminal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// One per defect row, interval-major: `[U_0, E_0, U_1, E_1, ...]`.
    pub defect: Vec<f64>,
    pub path: Vec<f64>,
    /// Lower and upper terminal labor-force bounds.
    pub terminal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub times: Vec<f64>,
    pub unemployed: Vec<f64>,
    pub employed: Vec<f64>,
    /// Control on interval `[t_j, t_{j+1}]`.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub objective: f64,
    pub residuals: Residuals,
    /// Projected gradient of the scaled Lagrangian, infinity norm.
    pub kkt_residual: f64,
    pub complementarity: f64,
    pub multipliers: Multipliers,
    pub log: Vec<OuterRecord>,
    pub inner_iterations: usize,
    pub status: SolveStatus,
    pub formulation: Formulation,
}

impl OcpSolution {
    pub fn unemployment_rate(&self) -> Vec<f64> {
        policy::unemployment_rate(&self.unemployed, &self.employed)
    }

    pub fn labor_force(&self) -> Vec<f64> {
        self.unemployed.iter().zip(&self.employed).map(|(u, e)| u + e).collect()
    }

    pub fn mean_rate(&self) -> f64 {
        let r = self.unemployment_rate();
        r.iter().sum::<f64>() / r.len() as f64
    }

    pub fn max_rate(&self) -> f64 {
        self.unemployment_rate().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn control_cost(&self, b: f64, c: f64) -> Vec<f64> {
        policy::control_cost_series(&self.u1, &self.u2, b, c)
    }
}

/// Deterministic starting point: the zero-control trajectory, with `u1` at
/// its upper bound on intervals ending in a rate-violating node.
pub fn initial_guess(problem: &OcpProblem, tr: &Transcription) -> Vec<f64> {
    let n = problem.grid_intervals;
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
    let mut u1 = vec![clamp(0.0, problem.u1_bounds); n];
    let u2 = vec![clamp(0.0, problem.u2_bounds); n];

    let (mut unemployed, mut employed) = zero_control_states(problem, &u1, &u2);
    let rmax = problem.max_unemployment_rate;
    let violating: Vec<usize> = (1..=n)
        .filter(|&k| unemployed[k] > rmax * (unemployed[k] + employed[k]))
        .collect();
    if !violating.is_empty() {
        for k in violating {
            u1[k - 1] = problem.u1_bounds.1;
        }
        if let Ok(ev) = evaluate_policy(problem, &u1, &u2, Propagation::Adaptive) {
            unemployed = ev.unemployed;
            employed = ev.employed;
        }
    }
    tr.pack(&unemployed, &employed, &u1, &u2)
}

fn zero_control_states(problem: &OcpProblem, u1: &[f64], u2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = problem.grid_intervals;
    let y0 = problem.initial.to_array();
    if u1.iter().chain(u2).all(|&c| c == 0.0) {
        let p = problem.params;
        let vac = problem.vacancy;
        let cfg = IntegratorConfig::over(0.0, problem.horizon).with_tolerances(1e-10, 1e-6);
        if let Ok(tr) = integrate_on_grid(
            move |t, y: &[f64; 2]| p.derivative(y[0], y[1], vac.eval(t), 0.0, 0.0),
            y0,
            &cfg,
            &problem.grid(),
        ) {
            if tr.len() == n + 1 {
                return (tr.component(0), tr.component(1));
            }
        }
    } else if let Ok(ev) = evaluate_policy(problem, u1, u2, Propagation::Adaptive) {
        return (ev.unemployed, ev.employed);
    }
    // Propagation failed: hold the initial state.
    (vec![y0[0]; n + 1], vec![y0[1]; n + 1])
}

/// Solves the transcribed problem from the default initial guess.
pub fn solve(problem: &OcpProblem, opts: &SolverOptions) -> Result<OcpSolution> {
    let tr = transcribe(problem, opts.formulation)?;
    let x0 = initial_guess(problem, &tr);
    Ok(solve_from(&tr, &x0, opts))
}

/// Solves from a caller-supplied decision vector.
pub fn solve_from(tr: &Transcription, x0: &[f64], opts: &SolverOptions) -> OcpSolution {
    let r = solve_auglag(tr, x0, &opts.nlp);
    let n = tr.intervals();
    let (u, e, u1, u2) = tr.unpack(&r.x);

    let mut c = vec![0.0; tr.num_eq()];
    let mut g = vec![0.0; tr.num_ineq()];
    tr.eq_constraints(&r.x, &mut c);
    tr.ineq_constraints(&r.x, &mut g);
    let defect = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let path = g[..=n].iter().fold(0.0f64, |m, &v| m.max(v));
    let terminal = g[n + 1].max(g[n + 2]).max(0.0);

    let status = match r.status {
        AugLagStatus::Converged => SolveStatus::Converged,
        AugLagStatus::IterationLimit => SolveStatus::IterationLimit,
        AugLagStatus::Infeasible => {
            let (eq_row, eq_v) =
                c.iter().enumerate().fold(
                    (0, 0.0f64),
                    |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best },
                );
            let (in_row, in_v) = g
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
            if eq_v >= in_v {
                SolveStatus::Infeasible {
                    max_violation: eq_v,
                    location: tr.eq_location(eq_row),
                }
            } else {
                SolveStatus::Infeasible {
                    max_violation: in_v,
                    location: tr.ineq_location(in_row),
                }
            }
        }
    };

    let mut defect_mult = r.eq_multipliers.clone();
    defect_mult.truncate(2 * n);
    OcpSolution {
        times: tr.times().to_vec(),
        unemployed: u.to_vec(),
        employed: e.to_vec(),
        u1: u1.to_vec(),
        u2: u2.to_vec(),
        objective: r.objective + tr.objective_offset(),
        residuals: Residuals { defect, path, terminal },
        kkt_residual: r.kkt_residual,
        complementarity: r.complementarity,
        multipliers: Multipliers {
            defect: defect_mult,
            path: r.ineq_multipliers[..=n].to_vec(),
            terminal: [r.ineq_multipliers[n + 1], r.ineq_multipliers[n + 2]],
        },
        log: r.log,
        inner_iterations: r.total_inner_iterations,
        status,
        formulation: tr.formulation(),
    }
}
