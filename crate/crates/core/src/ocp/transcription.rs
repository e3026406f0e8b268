//! Trapezoidal direct collocation.
//!
//! Decision vector, in order: `U_0..U_N`, `E_0..E_N`, `u1_0..u1_{N-1}`,
//! `u2_0..u2_{N-1}`, and in clock-state mode additionally `x3_0..x3_N`.
//! Controls are held constant on each interval and enter both endpoint
//! evaluations of that interval's defect.
//!
//! Every constraint is divided by the magnitude of the quantity it bounds so
//! that tolerances read as relative errors.

use alloc::vec;
use alloc::vec::Vec;

use super::nlp::{Nlp, Triplet};
use super::problem::OcpProblem;
use crate::error::Result;

/// How the time-dependent vacancy series enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// `V(t_k)` evaluated directly at node times.
    #[default]
    Analytic,
    /// Adds a clock state `x3` with `dx3/dt = 1`, `x3(0) = 0`, and evaluates
    /// `V(x3_k)`, as in the ACADO model.
    ClockState,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Analytic => "analytic",
            Formulation::ClockState => "clock-state",
        }
    }
}

/// Where a constraint lives in the transcribed program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintLocation {
    /// Dynamics defect on interval `interval`; component 0 = U, 1 = E, 2 = clock.
    Defect {
        interval: usize,
        component: usize,
    },
    /// Rate bound at node `node`.
    Path {
        node: usize,
    },
    TerminalLower,
    TerminalUpper,
}

#[derive(Debug, Clone)]
pub struct Transcription {
    problem: OcpProblem,
    formulation: Formulation,
    n: usize,
    h: f64,
    times: Vec<f64>,
    /// `V(t_k)` for the analytic formulation.
    vacancies: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale_u: f64,
    scale_e: f64,
    scale_clock: f64,
}

fn positive_scale(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        x.abs()
    } else {
        1.0
    }
}

pub fn transcribe(problem: &OcpProblem, formulation: Formulation) -> Result<Transcription> {
    problem.validate()?;
    let n = problem.grid_intervals;
    let times = problem.grid();
    let vacancies = times.iter().map(|&t| problem.vacancy.eval(t)).collect();
    let mut t = Transcription {
        problem: problem.clone(),
        formulation,
        n,
        h: problem.step(),
        times,
        vacancies,
        lower: Vec::new(),
        upper: Vec::new(),
        scale_u: positive_scale(problem.initial.unemployed),
        scale_e: positive_scale(problem.initial.employed),
        scale_clock: positive_scale(problem.horizon),
    };
    let nv = t.num_vars();
    let mut lo = vec![0.0; nv];
    let mut hi = vec![f64::INFINITY; nv];
    lo[t.u(0)] = problem.initial.unemployed;
    hi[t.u(0)] = problem.initial.unemployed;
    lo[t.e(0)] = problem.initial.employed;
    hi[t.e(0)] = problem.initial.employed;
    for j in 0..n {
        lo[t.u1(j)] = problem.u1_bounds.0;
        hi[t.u1(j)] = problem.u1_bounds.1;
        lo[t.u2(j)] = problem.u2_bounds.0;
        hi[t.u2(j)] = problem.u2_bounds.1;
    }
    if formulation == Formulation::ClockState {
        hi[t.clock(0)] = 0.0;
        for k in 1..=n {
            lo[t.clock(k)] = f64::NEG_INFINITY;
        }
    }
    t.lower = lo;
    t.upper = hi;
    Ok(t)
}

impl Transcription {
    pub fn problem(&self) -> &OcpProblem {
        &self.problem
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Constant separating [`Nlp::objective`] from the reported objective.
    pub fn objective_offset(&self) -> f64 {
        objective_offset(&self.problem)
    }

    #[inline]
    pub fn u(&self, k: usize) -> usize {
        k
    }

    #[inline]
    pub fn e(&self, k: usize) -> usize {
        self.n + 1 + k
    }

    #[inline]
    pub fn u1(&self, j: usize) -> usize {
        2 * (self.n + 1) + j
    }

    #[inline]
    pub fn u2(&self, j: usize) -> usize {
        2 * (self.n + 1) + self.n + j
    }

    /// Index of the clock node `k`; only meaningful in clock-state mode.
    #[inline]
    pub fn clock(&self, k: usize) -> usize {
        2 * (self.n + 1) + 2 * self.n + k
    }

    /// Assembles a decision vector. The clock state, if present, is set to
    /// the node times.
    pub fn pack(&self, unemployed: &[f64], employed: &[f64], u1: &[f64], u2: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.num_vars());
        x.extend_from_slice(unemployed);
        x.extend_from_slice(employed);
        x.extend_from_slice(u1);
        x.extend_from_slice(u2);
        if self.formulation == Formulation::ClockState {
            x.extend_from_slice(&self.times);
        }
        assert_eq!(x.len(), self.num_vars(), "component lengths do not match the grid");
        x
    }

    /// Splits a decision vector into `(U, E, u1, u2)`.
    pub fn unpack<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let n = self.n;
        (
            &x[..n + 1],
            &x[n + 1..2 * (n + 1)],
            &x[2 * (n + 1)..2 * (n + 1) + n],
            &x[2 * (n + 1) + n..2 * (n + 1) + 2 * n],
        )
    }

    /// Maps an equality-constraint row to its location.
    pub fn eq_location(&self, row: usize) -> ConstraintLocation {
        if row < 2 * self.n {
            ConstraintLocation::Defect {
                interval: row / 2,
                component: row % 2,
            }
        } else {
            ConstraintLocation::Defect {
                interval: row - 2 * self.n,
                component: 2,
            }
        }
    }

    /// Maps an inequality-constraint row to its location.
    pub fn ineq_location(&self, row: usize) -> ConstraintLocation {
        match row.checked_sub(self.n + 1) {
            None => ConstraintLocation::Path { node: row },
            Some(0) => ConstraintLocation::TerminalLower,
            Some(_) => ConstraintLocation::TerminalUpper,
        }
    }

    #[inline]
    fn vacancy_at(&self, x: &[f64], k: usize) -> (f64, f64) {
        match self.formulation {
            Formulation::Analytic => (self.vacancies[k], 0.0),
            Formulation::ClockState => {
                let tk = x[self.clock(k)];
                (self.problem.vacancy.eval(tk), self.problem.vacancy.derivative(tk))
            }
        }
    }

    #[inline]
    fn node_rhs(&self, x: &[f64], k: usize, j: usize) -> [f64; 2] {
        let (v, _) = self.vacancy_at(x, k);
        self.problem
            .params
            .derivative(x[self.u(k)], x[self.e(k)], v, x[self.u1(j)], x[self.u2(j)])
    }
}

impl Nlp for Transcription {
    fn num_vars(&self) -> usize {
        let base = 2 * (self.n + 1) + 2 * self.n;
        match self.formulation {
            Formulation::Analytic => base,
            Formulation::ClockState => base + self.n + 1,
        }
    }

    fn num_eq(&self) -> usize {
        match self.formulation {
            Formulation::Analytic => 2 * self.n,
            Formulation::ClockState => 3 * self.n,
        }
    }

    fn num_ineq(&self) -> usize {
        self.n + 1 + 2
    }

    fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    fn var_scale(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.num_vars()];
        let c1 = positive_scale(self.problem.u1_bounds.0.abs().max(self.problem.u1_bounds.1.abs()));
        let c2 = positive_scale(self.problem.u2_bounds.0.abs().max(self.problem.u2_bounds.1.abs()));
        for k in 0..=self.n {
            s[self.u(k)] = self.scale_u;
            s[self.e(k)] = self.scale_e;
        }
        for j in 0..self.n {
            s[self.u1(j)] = c1;
            s[self.u2(j)] = c2;
        }
        if self.formulation == Formulation::ClockState {
            for k in 0..=self.n {
                s[self.clock(k)] = self.scale_clock;
            }
        }
        s
    }

    /// Running cost without the constant `-A U_ref T`; see
    /// [`Transcription::objective_offset`].
    fn objective(&self, x: &[f64]) -> f64 {
        let (u, _, u1, u2) = self.unpack(x);
        variable_cost(&self.problem, u, u1, u2)
    }

    fn objective_gradient(&self, _x: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        let w = self.problem.weights;
        let h = self.h;
        for j in 0..self.n {
            grad[self.u(j)] += 0.5 * h * w.a;
            grad[self.u(j + 1)] += 0.5 * h * w.a;
            grad[self.u1(j)] = h * w.b;
            grad[self.u2(j)] = h * w.c;
        }
    }

    fn eq_constraints(&self, x: &[f64], c: &mut [f64]) {
        let half = 0.5 * self.h;
        let mut fa = self.node_rhs(x, 0, 0);
        for j in 0..self.n {
            let fb = self.node_rhs(x, j + 1, j);
            c[2 * j] = (x[self.u(j + 1)] - x[self.u(j)] - half * (fa[0] + fb[0])) / self.scale_u;
            c[2 * j + 1] = (x[self.e(j + 1)] - x[self.e(j)] - half * (fa[1] + fb[1])) / self.scale_e;
            if j + 1 < self.n {
                fa = self.node_rhs(x, j + 1, j + 1);
            }
        }
        if self.formulation == Formulation::ClockState {
            for j in 0..self.n {
                c[2 * self.n + j] = (x[self.clock(j + 1)] - x[self.clock(j)] - self.h) / self.scale_clock;
            }
        }
    }

    fn ineq_constraints(&self, x: &[f64], g: &mut [f64]) {
        let r = self.problem.max_unemployment_rate;
        for k in 0..=self.n {
            let (u, e) = (x[self.u(k)], x[self.e(k)]);
            g[k] = ((1.0 - r) * u - r * e) / self.scale_u;
        }
        let force = x[self.u(self.n)] + x[self.e(self.n)];
        let (lo, hi) = self.problem.terminal_labor_force;
        g[self.n + 1] = (lo - force) / self.scale_e;
        g[self.n + 2] = (force - hi) / self.scale_e;
    }

    fn eq_jacobian(&self, x: &[f64], out: &mut Vec<Triplet>) {
        let half = 0.5 * self.h;
        let p = &self.problem.params;
        let clock = self.formulation == Formulation::ClockState;
        for j in 0..self.n {
            let (ru, re) = (2 * j, 2 * j + 1);
            let u2 = x[self.u2(j)];
            let mut du1 = [0.0; 2];
            let mut du2 = [0.0; 2];
            for (node, sign) in [(j, -1.0), (j + 1, 1.0)] {
                let uk = x[self.u(node)];
                let (v, dv) = self.vacancy_at(x, node);
                let jac = p.derivative_jacobian(uk, v, u2);
                out.push((ru, self.u(node), (sign - half * jac[0][0]) / self.scale_u));
                out.push((ru, self.e(node), -half * jac[0][1] / self.scale_u));
                out.push((re, self.u(node), -half * jac[1][0] / self.scale_e));
                out.push((re, self.e(node), (sign - half * jac[1][1]) / self.scale_e));
                for r in 0..2 {
                    du1[r] += jac[r][2];
                    du2[r] += jac[r][3];
                }
                if clock {
                    // dm/dV = kappa U (1 + u2); enters dU with -1, dE with +1.
                    let dm = p.kappa * uk * (1.0 + u2) * dv;
                    out.push((ru, self.clock(node), half * dm / self.scale_u));
                    out.push((re, self.clock(node), -half * dm / self.scale_e));
                }
            }
            out.push((ru, self.u1(j), -half * du1[0] / self.scale_u));
            out.push((re, self.u1(j), -half * du1[1] / self.scale_e));
            out.push((ru, self.u2(j), -half * du2[0] / self.scale_u));
            out.push((re, self.u2(j), -half * du2[1] / self.scale_e));
            if clock {
                let row = 2 * self.n + j;
                out.push((row, self.clock(j), -1.0 / self.scale_clock));
                out.push((row, self.clock(j + 1), 1.0 / self.scale_clock));
            }
        }
    }

    fn ineq_jacobian(&self, _x: &[f64], out: &mut Vec<Triplet>) {
        let r = self.problem.max_unemployment_rate;
        for k in 0..=self.n {
            out.push((k, self.u(k), (1.0 - r) / self.scale_u));
            out.push((k, self.e(k), -r / self.scale_u));
        }
        let n = self.n;
        out.push((n + 1, self.u(n), -1.0 / self.scale_e));
        out.push((n + 1, self.e(n), -1.0 / self.scale_e));
        out.push((n + 2, self.u(n), 1.0 / self.scale_e));
        out.push((n + 2, self.e(n), 1.0 / self.scale_e));
    }
}

fn variable_cost(problem: &OcpProblem, unemployed: &[f64], u1: &[f64], u2: &[f64]) -> f64 {
    let w = problem.weights;
    let h = problem.step();
    let mut total = 0.0;
    for j in 0..problem.grid_intervals {
        total += 0.5 * h * w.a * (unemployed[j] + unemployed[j + 1]);
        total += h * (w.b * u1[j] + w.c * u2[j]);
    }
    total
}

/// The `-A U_ref` part of the running cost integrated over the horizon.
pub fn objective_offset(problem: &OcpProblem) -> f64 {
    -problem.weights.a * problem.reference_level * problem.horizon
}

/// Trapezoidal quadrature of the running cost with piecewise-constant controls.
pub fn trapezoid_objective(problem: &OcpProblem, unemployed: &[f64], u1: &[f64], u2: &[f64]) -> f64 {
    variable_cost(problem, unemployed, u1, u2) + objective_offset(problem)
}
