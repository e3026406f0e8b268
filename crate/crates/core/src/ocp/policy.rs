use alloc::vec::Vec;

use super::problem::OcpProblem;
use super::transcription::trapezoid_objective;
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};

/// How controlled dynamics are propagated between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagation {
    /// Implicit trapezoid steps, i.e. exactly the discrete dynamics the
    /// collocation solver enforces.
    #[default]
    Collocation,
    /// Adaptive Dormand–Prince on every interval with the control held.
    Adaptive,
}

/// Constraint measurements of a trajectory, in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violations {
    pub max_rate: f64,
    /// `max(0, max_rate - bound)`.
    pub rate_excess: f64,
    pub terminal_labor_force: f64,
    /// Distance of the terminal labor force outside its box, 0 if inside.
    pub terminal_excess: f64,
    pub min_state: f64,
}

impl Violations {
    pub fn is_feasible(&self, rate_tol: f64, force_tol: f64) -> bool {
        self.rate_excess <= rate_tol && self.terminal_excess <= force_tol && self.min_state >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    pub times: Vec<f64>,
    pub unemployed: Vec<f64>,
    pub employed: Vec<f64>,
    pub objective: f64,
    pub violations: Violations,
}

impl PolicyEvaluation {
    pub fn unemployment_rate(&self) -> Vec<f64> {
        unemployment_rate(&self.unemployed, &self.employed)
    }
}

pub(crate) fn unemployment_rate(u: &[f64], e: &[f64]) -> Vec<f64> {
    u.iter().zip(e).map(|(u, e)| u / (u + e)).collect()
}

pub(crate) fn measure(problem: &OcpProblem, u: &[f64], e: &[f64]) -> Violations {
    let rate = unemployment_rate(u, e);
    let max_rate = rate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = u.len() - 1;
    let force = u[n] + e[n];
    let (lo, hi) = problem.terminal_labor_force;
    let min_state = u.iter().chain(e).copied().fold(f64::INFINITY, f64::min);
    Violations {
        max_rate,
        rate_excess: (max_rate - problem.max_unemployment_rate).max(0.0),
        terminal_labor_force: force,
        terminal_excess: (lo - force).max(force - hi).max(0.0),
        min_state,
    }
}

/// One implicit trapezoid step from `y0` at `t0` to `t1`.
fn trapezoid_step(problem: &OcpProblem, t0: f64, y0: [f64; 2], t1: f64, u1: f64, u2: f64) -> Option<[f64; 2]> {
    let p = &problem.params;
    let v0 = problem.vacancy.eval(t0);
    let v1 = problem.vacancy.eval(t1);
    let h = t1 - t0;
    let f0 = p.derivative(y0[0], y0[1], v0, u1, u2);
    let mut y = [y0[0] + h * f0[0], y0[1] + h * f0[1]];
    for _ in 0..50 {
        let f1 = p.derivative(y[0], y[1], v1, u1, u2);
        let r = [
            y[0] - y0[0] - 0.5 * h * (f0[0] + f1[0]),
            y[1] - y0[1] - 0.5 * h * (f0[1] + f1[1]),
        ];
        let j = p.derivative_jacobian(y[0], v1, u2);
        let m = [
            [1.0 - 0.5 * h * j[0][0], -0.5 * h * j[0][1]],
            [-0.5 * h * j[1][0], 1.0 - 0.5 * h * j[1][1]],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dy = [
            (m[1][1] * r[0] - m[0][1] * r[1]) / det,
            (m[0][0] * r[1] - m[1][0] * r[0]) / det,
        ];
        y[0] -= dy[0];
        y[1] -= dy[1];
        if !(y[0].is_finite() && y[1].is_finite()) {
            return None;
        }
        if dy[0].abs() <= 1e-14 * y[0].abs().max(1.0) && dy[1].abs() <= 1e-14 * y[1].abs().max(1.0) {
            return Some(y);
        }
    }
    Some(y)
}

fn adaptive_step(problem: &OcpProblem, t0: f64, y0: [f64; 2], t1: f64, u1: f64, u2: f64) -> Option<[f64; 2]> {
    let p = problem.params;
    let vac = problem.vacancy;
    let cfg = IntegratorConfig::over(t0, t1).with_tolerances(1e-10, 1e-6);
    let traj = integrate(
        move |t, y: &[f64; 2]| p.derivative(y[0], y[1], vac.eval(t), u1, u2),
        y0,
        &cfg,
    )
    .ok()?;
    Some(traj.last().1)
}

/// Propagates the dynamics under piecewise-constant controls and scores the
/// result with the transcription's quadrature.
pub fn evaluate_policy(problem: &OcpProblem, u1: &[f64], u2: &[f64], mode: Propagation) -> Result<PolicyEvaluation> {
    problem.validate()?;
    let n = problem.grid_intervals;
    if u1.len() != n || u2.len() != n {
        return Err(Error::InvalidArgument(alloc::format!(
            "control series must have {n} entries, got {} and {}",
            u1.len(),
            u2.len()
        )));
    }
    if u1.iter().chain(u2).any(|c| !c.is_finite()) {
        return Err(Error::invalid("control values must be finite"));
    }
    let times = problem.grid();
    let mut unemployed = Vec::with_capacity(n + 1);
    let mut employed = Vec::with_capacity(n + 1);
    let mut y = problem.initial.to_array();
    unemployed.push(y[0]);
    employed.push(y[1]);
    for j in 0..n {
        let next = match mode {
            Propagation::Collocation => trapezoid_step(problem, times[j], y, times[j + 1], u1[j], u2[j]),
            Propagation::Adaptive => adaptive_step(problem, times[j], y, times[j + 1], u1[j], u2[j]),
        };
        y = next.ok_or(Error::BlowUp { last_good_t: times[j] })?;
        unemployed.push(y[0]);
        employed.push(y[1]);
    }
    let objective = trapezoid_objective(problem, &unemployed, u1, u2);
    let violations = measure(problem, &unemployed, &employed);
    Ok(PolicyEvaluation {
        times,
        unemployed,
        employed,
        objective,
        violations,
    })
}

/// Per-interval spend `B u1 + C u2` in internship units.
pub fn control_cost_series(u1: &[f64], u2: &[f64], b: f64, c: f64) -> Vec<f64> {
    u1.iter().zip(u2).map(|(a, s)| b * a + c * s).collect()
}
