//! Bound-constrained nonlinear programs with equality and inequality
//! constraints, solved by an augmented Lagrangian method whose subproblems are
//! handled by projected limited-memory BFGS.
//!
//! Problem form:
//!
//! ```text
//! minimize f(x)  subject to  c(x) = 0,  g(x) <= 0,  lower <= x <= upper
//! ```

use alloc::vec;
use alloc::vec::Vec;

/// Sparse Jacobian entry `(row, column, value)`.
pub type Triplet = (usize, usize, f64);

pub trait Nlp {
    fn num_vars(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn num_ineq(&self) -> usize;
    fn lower_bounds(&self) -> &[f64];
    fn upper_bounds(&self) -> &[f64];

    /// Typical magnitude of each variable. The solver works on `x / scale`.
    fn var_scale(&self) -> Vec<f64> {
        vec![1.0; self.num_vars()]
    }

    fn objective(&self, x: &[f64]) -> f64;
    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]);
    fn eq_constraints(&self, x: &[f64], c: &mut [f64]);
    fn ineq_constraints(&self, x: &[f64], g: &mut [f64]);
    /// Appends the nonzeros of the equality Jacobian to `out`.
    fn eq_jacobian(&self, x: &[f64], out: &mut Vec<Triplet>);
    /// Appends the nonzeros of the inequality Jacobian to `out`.
    fn ineq_jacobian(&self, x: &[f64], out: &mut Vec<Triplet>);
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugLagOptions {
    /// Projected-gradient tolerance on the scaled Lagrangian.
    pub kkt_tol: f64,
    /// Feasibility tolerance on constraint values.
    pub feas_tol: f64,
    pub max_outer: usize,
    /// Iteration cap for each bound-constrained subproblem.
    pub max_inner: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
    /// The penalty grows when infeasibility fails to shrink by this factor
    /// between outer iterations.
    pub progress_ratio: f64,
    /// Subproblem tolerance of the first outer iteration.
    pub initial_inner_tol: f64,
    /// Factor applied to the subproblem tolerance after each outer iteration.
    pub inner_tol_decay: f64,
    pub lbfgs_memory: usize,
}

impl Default for AugLagOptions {
    fn default() -> Self {
        AugLagOptions {
            kkt_tol: 1e-4,
            feas_tol: 1e-6,
            max_outer: 60,
            max_inner: 20_000,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            max_penalty: 1e12,
            progress_ratio: 0.5,
            initial_inner_tol: 1e-1,
            inner_tol_decay: 0.1,
            lbfgs_memory: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterRecord {
    pub outer: usize,
    pub inner_iterations: usize,
    pub penalty: f64,
    pub eq_violation: f64,
    pub ineq_violation: f64,
    pub kkt_residual: f64,
    /// Value of [`Nlp::objective`] at the subproblem solution.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugLagStatus {
    Converged,
    /// Outer or inner budget exhausted before meeting the tolerances.
    IterationLimit,
    /// Penalty hit its cap while constraints stayed violated.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugLagResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub eq_multipliers: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
    /// `max |c_i|`.
    pub eq_violation: f64,
    /// `max(0, g_j)` over all `j`.
    pub ineq_violation: f64,
    /// Projected gradient of the scaled Lagrangian, infinity norm.
    pub kkt_residual: f64,
    /// `max |nu_j g_j|`.
    pub complementarity: f64,
    pub status: AugLagStatus,
    pub log: Vec<OuterRecord>,
    pub total_inner_iterations: usize,
}

const MULTIPLIER_CAP: f64 = 1e20;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn positive_part_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Augmented Lagrangian evaluated in scaled variables `z = x / scale`.
struct Merit<'a, P: Nlp + ?Sized> {
    nlp: &'a P,
    scale: Vec<f64>,
    obj_scale: f64,
    lambda: Vec<f64>,
    nu: Vec<f64>,
    penalty: f64,
    x: Vec<f64>,
    c: Vec<f64>,
    g: Vec<f64>,
    grad_x: Vec<f64>,
    triplets: Vec<Triplet>,
    evaluations: usize,
}

impl<'a, P: Nlp + ?Sized> Merit<'a, P> {
    fn new(nlp: &'a P, scale: Vec<f64>, obj_scale: f64) -> Self {
        let n = nlp.num_vars();
        Merit {
            nlp,
            scale,
            obj_scale,
            lambda: vec![0.0; nlp.num_eq()],
            nu: vec![0.0; nlp.num_ineq()],
            penalty: 1.0,
            x: vec![0.0; n],
            c: vec![0.0; nlp.num_eq()],
            g: vec![0.0; nlp.num_ineq()],
            grad_x: vec![0.0; n],
            triplets: Vec::new(),
            evaluations: 0,
        }
    }

    fn unscale(&mut self, z: &[f64]) {
        for ((x, zi), s) in self.x.iter_mut().zip(z).zip(&self.scale) {
            *x = zi * s;
        }
    }

    /// Constraint values at `z`; leaves them in `self.c` / `self.g`.
    fn constraints(&mut self, z: &[f64]) {
        self.unscale(z);
        self.nlp.eq_constraints(&self.x, &mut self.c);
        self.nlp.ineq_constraints(&self.x, &mut self.g);
    }

    /// Value and gradient (in `z`) of the augmented Lagrangian.
    fn eval(&mut self, z: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluations += 1;
        self.constraints(z);
        let mu = self.penalty;
        let mut value = self.nlp.objective(&self.x) / self.obj_scale;
        self.nlp.objective_gradient(&self.x, &mut self.grad_x);
        for gx in self.grad_x.iter_mut() {
            *gx /= self.obj_scale;
        }

        self.triplets.clear();
        self.nlp.eq_jacobian(&self.x, &mut self.triplets);
        for (i, &ci) in self.c.iter().enumerate() {
            value += self.lambda[i] * ci + 0.5 * mu * ci * ci;
        }
        for &(row, col, v) in &self.triplets {
            self.grad_x[col] += v * (self.lambda[row] + mu * self.c[row]);
        }

        self.triplets.clear();
        self.nlp.ineq_jacobian(&self.x, &mut self.triplets);
        for (j, &gj) in self.g.iter().enumerate() {
            let shifted = (self.nu[j] + mu * gj).max(0.0);
            value += (shifted * shifted - self.nu[j] * self.nu[j]) / (2.0 * mu);
        }
        for &(row, col, v) in &self.triplets {
            let shifted = (self.nu[row] + mu * self.g[row]).max(0.0);
            self.grad_x[col] += v * shifted;
        }

        for ((gz, gx), s) in grad.iter_mut().zip(&self.grad_x).zip(&self.scale) {
            *gz = gx * s;
        }
        value
    }
}

/// Infinity norm of `P(z - grad) - z`.
fn projected_gradient_norm(z: &[f64], grad: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..z.len() {
        let p = (z[i] - grad[i]).clamp(lo[i], hi[i]);
        m = m.max((p - z[i]).abs());
    }
    m
}

#[derive(Debug, Clone, Copy)]
struct InnerOutcome {
    iterations: usize,
    pg_norm: f64,
}

/// Limited-memory quasi-Newton pairs with inner products restricted to the
/// free variables of the current iteration.
struct Memory {
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    cap: usize,
}

impl Memory {
    fn new(cap: usize) -> Self {
        Memory {
            s: Vec::new(),
            y: Vec::new(),
            cap,
        }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if self.s.len() == self.cap {
            self.s.remove(0);
            self.y.remove(0);
        }
        self.s.push(s);
        self.y.push(y);
    }

    /// `s'y / y'y` of the newest pair over the free variables, or 1.
    fn initial_scaling(&self, free: &[bool]) -> f64 {
        let Some(last) = self.s.len().checked_sub(1) else {
            return 1.0;
        };
        let (mut sy, mut yy) = (0.0, 0.0);
        for i in 0..free.len() {
            if free[i] {
                sy += self.s[last][i] * self.y[last][i];
                yy += self.y[last][i] * self.y[last][i];
            }
        }
        if sy > 0.0 && yy > 0.0 {
            sy / yy
        } else {
            1.0
        }
    }

    /// Two-loop recursion on `q` (already zero outside `free`).
    fn apply(&self, q: &mut [f64], free: &[bool]) {
        let m = self.s.len();
        if m == 0 {
            return;
        }
        let masked_dot = |a: &[f64], b: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..a.len() {
                if free[i] {
                    acc += a[i] * b[i];
                }
            }
            acc
        };
        let mut alpha = vec![0.0; m];
        let mut rho = vec![0.0; m];
        for k in (0..m).rev() {
            let sy = masked_dot(&self.s[k], &self.y[k]);
            if sy <= 0.0 {
                continue;
            }
            rho[k] = 1.0 / sy;
            alpha[k] = rho[k] * masked_dot(&self.s[k], q);
            for i in 0..q.len() {
                if free[i] {
                    q[i] -= alpha[k] * self.y[k][i];
                }
            }
        }
        let gamma = self.initial_scaling(free);
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for k in 0..m {
            if rho[k] == 0.0 {
                continue;
            }
            let beta = rho[k] * masked_dot(&self.y[k], q);
            for i in 0..q.len() {
                if free[i] {
                    q[i] += (alpha[k] - beta) * self.s[k][i];
                }
            }
        }
    }
}

/// Projected quasi-Newton minimization of `fun` over the box `[lo, hi]`.
///
/// Variables at a bound whose gradient pushes outward are held fixed for the
/// iteration; the quasi-Newton direction acts on the rest, and the step is
/// projected back onto the box with an Armijo backtracking search along the
/// projected path.
fn minimize_box<F>(
    fun: &mut F,
    z: &mut [f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    max_iter: usize,
    memory: usize,
) -> InnerOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = z.len();
    for i in 0..n {
        z[i] = z[i].clamp(lo[i], hi[i]);
    }
    let mut grad = vec![0.0; n];
    let mut f = fun(z, &mut grad);
    let mut mem = Memory::new(memory);
    let mut free = vec![true; n];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut pg = projected_gradient_norm(z, &grad, lo, hi);
    let mut iterations = 0;

    while iterations < max_iter && pg > tol {
        iterations += 1;
        let eps = pg.min(1e-3);
        for i in 0..n {
            let at_lo = z[i] <= lo[i] + eps * (1.0 + lo[i].abs()) && grad[i] > 0.0;
            let at_hi = z[i] >= hi[i] - eps * (1.0 + hi[i].abs()) && grad[i] < 0.0;
            free[i] = !(at_lo || at_hi || lo[i] == hi[i]);
            dir[i] = if free[i] { grad[i] } else { 0.0 };
        }
        mem.apply(&mut dir, &free);
        // Nearly active variables take a diagonally scaled gradient step so
        // that the projection carries them onto their bound.
        let gamma = mem.initial_scaling(&free);
        for i in 0..n {
            dir[i] = if free[i] {
                -dir[i]
            } else if lo[i] == hi[i] {
                0.0
            } else {
                -gamma * grad[i]
            };
        }
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            mem.clear();
            for i in 0..n {
                dir[i] = if lo[i] == hi[i] { 0.0 } else { -grad[i] };
            }
            slope = dot(&dir, &grad);
            if !(slope < 0.0) {
                break;
            }
        }

        let mut step = if mem.s.is_empty() {
            (1.0 / inf_norm(&dir).max(1e-300)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = (z[i] + step * dir[i]).clamp(lo[i], hi[i]);
            }
            let mut decrease = 0.0;
            for i in 0..n {
                decrease += grad[i] * (trial[i] - z[i]);
            }
            if decrease >= 0.0 {
                step *= 0.5;
                continue;
            }
            let ft = fun(&trial, &mut trial_grad);
            if ft.is_finite() && ft <= f + 1e-4 * decrease {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if mem.s.is_empty() {
                break;
            }
            mem.clear();
            continue;
        }

        let s: Vec<f64> = trial.iter().zip(z.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            mem.push(s, y);
        }
        z.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        f = fun(z, &mut grad);
        pg = projected_gradient_norm(z, &grad, lo, hi);
    }

    InnerOutcome {
        iterations,
        pg_norm: pg,
    }
}

/// Solves `nlp` from `x0`.
pub fn solve_auglag<P: Nlp + ?Sized>(nlp: &P, x0: &[f64], opts: &AugLagOptions) -> AugLagResult {
    let n = nlp.num_vars();
    assert_eq!(x0.len(), n, "start point has wrong length");
    let scale: Vec<f64> = nlp
        .var_scale()
        .into_iter()
        .map(|s| if s.is_finite() && s > 0.0 { s } else { 1.0 })
        .collect();
    let lo: Vec<f64> = nlp.lower_bounds().iter().zip(&scale).map(|(l, s)| l / s).collect();
    let hi: Vec<f64> = nlp.upper_bounds().iter().zip(&scale).map(|(u, s)| u / s).collect();
    let mut z: Vec<f64> = x0
        .iter()
        .zip(&scale)
        .enumerate()
        .map(|(i, (x, s))| (x / s).clamp(lo[i], hi[i]))
        .collect();

    // Objective scaling: largest scaled gradient entry at the start point.
    let obj_scale = {
        let x: Vec<f64> = z.iter().zip(&scale).map(|(a, b)| a * b).collect();
        let mut g = vec![0.0; n];
        nlp.objective_gradient(&x, &mut g);
        let m = g.iter().zip(&scale).fold(0.0f64, |m, (gi, s)| m.max((gi * s).abs()));
        if m.is_finite() && m > 0.0 {
            m
        } else {
            1.0
        }
    };

    let mut merit = Merit::new(nlp, scale, obj_scale);
    merit.penalty = opts.initial_penalty;
    let mut omega = opts.initial_inner_tol.max(opts.kkt_tol);
    let mut log = Vec::new();
    let mut total_inner = 0;
    let mut status = AugLagStatus::IterationLimit;
    let mut last_pg = f64::INFINITY;
    let mut prev_measure = f64::INFINITY;

    for outer in 0..opts.max_outer {
        let inner = minimize_box(
            &mut |zz: &[f64], gg: &mut [f64]| merit.eval(zz, gg),
            &mut z,
            &lo,
            &hi,
            omega,
            opts.max_inner,
            opts.lbfgs_memory,
        );
        total_inner += inner.iterations;
        last_pg = inner.pg_norm;
        merit.constraints(&z);
        let eq_v = inf_norm(&merit.c);
        let in_v = positive_part_max(&merit.g);
        let viol = eq_v.max(in_v);
        log.push(OuterRecord {
            outer,
            inner_iterations: inner.iterations,
            penalty: merit.penalty,
            eq_violation: eq_v,
            ineq_violation: in_v,
            kkt_residual: inner.pg_norm,
            objective: nlp.objective(&merit.x),
        });
        if viol <= opts.feas_tol && inner.pg_norm <= opts.kkt_tol {
            status = AugLagStatus::Converged;
            break;
        }

        // Joint feasibility/complementarity measure, evaluated before the
        // multiplier update.
        let mu = merit.penalty;
        let measure = merit
            .g
            .iter()
            .zip(&merit.nu)
            .fold(eq_v, |m, (&g, &nu)| m.max(g.max(-nu / mu).abs()));

        for (l, c) in merit.lambda.iter_mut().zip(&merit.c) {
            *l = (*l + mu * c).clamp(-MULTIPLIER_CAP, MULTIPLIER_CAP);
        }
        for (v, g) in merit.nu.iter_mut().zip(&merit.g) {
            *v = (*v + mu * g).clamp(0.0, MULTIPLIER_CAP);
        }

        if measure > opts.feas_tol && measure > opts.progress_ratio * prev_measure {
            if merit.penalty >= opts.max_penalty {
                status = AugLagStatus::Infeasible;
                break;
            }
            merit.penalty = (merit.penalty * opts.penalty_growth).min(opts.max_penalty);
        }
        prev_measure = measure;
        omega = (omega * opts.inner_tol_decay).max(opts.kkt_tol);
    }

    merit.constraints(&z);
    let x = merit.x.clone();
    let eq_violation = inf_norm(&merit.c);
    let ineq_violation = positive_part_max(&merit.g);
    let complementarity = merit
        .nu
        .iter()
        .zip(&merit.g)
        .fold(0.0f64, |m, (v, g)| m.max((v * g).abs()));
    // Multipliers in the unscaled objective's units.
    let eq_multipliers = merit.lambda.iter().map(|l| l * obj_scale).collect();
    let ineq_multipliers = merit.nu.iter().map(|v| v * obj_scale).collect();
    AugLagResult {
        objective: nlp.objective(&x),
        x,
        eq_multipliers,
        ineq_multipliers,
        eq_violation,
        ineq_violation,
        kkt_residual: last_pg,
        complementarity,
        status,
        log,
        total_inner_iterations: total_inner,
    }
}

/// Largest relative disagreement between analytic first derivatives and
/// central differences, per function group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub objective: f64,
    pub eq: f64,
    pub ineq: f64,
}

impl DerivativeCheck {
    pub fn max(&self) -> f64 {
        self.objective.max(self.eq).max(self.ineq)
    }
}

fn dense_rows(rows: usize, cols: usize, trip: &[Triplet]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; cols]; rows];
    for &(r, c, v) in trip {
        m[r][c] += v;
    }
    m
}

/// Compares every analytic derivative of `nlp` at `x` with a central
/// difference of step `rel_step * scale_j` in variable `j`.
///
/// Derivatives are compared in scaled variables. The relative error of an
/// entry is `|fd - exact| / max(|exact|, 1e-3 * row_max)`, where `row_max` is
/// the largest analytic entry of the same function, so that structural zeros
/// are judged against the magnitude of their row.
pub fn derivative_check<P: Nlp + ?Sized>(nlp: &P, x: &[f64], rel_step: f64) -> DerivativeCheck {
    let n = nlp.num_vars();
    let (me, mi) = (nlp.num_eq(), nlp.num_ineq());
    let scale = nlp.var_scale();

    let mut grad = vec![0.0; n];
    nlp.objective_gradient(x, &mut grad);
    let mut trip = Vec::new();
    nlp.eq_jacobian(x, &mut trip);
    let jeq = dense_rows(me, n, &trip);
    trip.clear();
    nlp.ineq_jacobian(x, &mut trip);
    let jin = dense_rows(mi, n, &trip);

    let row_floor = |row: &[f64]| -> f64 {
        let m = row.iter().zip(&scale).fold(0.0f64, |m, (v, s)| m.max((v * s).abs()));
        (1e-3 * m).max(f64::MIN_POSITIVE)
    };
    let obj_floor = row_floor(&grad);
    let eq_floor: Vec<f64> = jeq.iter().map(|r| row_floor(r)).collect();
    let in_floor: Vec<f64> = jin.iter().map(|r| row_floor(r)).collect();

    let mut check = DerivativeCheck {
        objective: 0.0,
        eq: 0.0,
        ineq: 0.0,
    };
    let (mut cp, mut cm) = (vec![0.0; me], vec![0.0; me]);
    let (mut gp, mut gm) = (vec![0.0; mi], vec![0.0; mi]);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    let rel = |fd: f64, exact: f64, floor: f64| (fd - exact).abs() / exact.abs().max(floor);
    for j in 0..n {
        let step = rel_step * scale[j];
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        let width = xp[j] - xm[j];
        let fd = (nlp.objective(&xp) - nlp.objective(&xm)) / width * scale[j];
        check.objective = check.objective.max(rel(fd, grad[j] * scale[j], obj_floor));
        nlp.eq_constraints(&xp, &mut cp);
        nlp.eq_constraints(&xm, &mut cm);
        for r in 0..me {
            let fd = (cp[r] - cm[r]) / width * scale[j];
            check.eq = check.eq.max(rel(fd, jeq[r][j] * scale[j], eq_floor[r]));
        }
        nlp.ineq_constraints(&xp, &mut gp);
        nlp.ineq_constraints(&xm, &mut gm);
        for r in 0..mi {
            let fd = (gp[r] - gm[r]) / width * scale[j];
            check.ineq = check.ineq.max(rel(fd, jin[r][j] * scale[j], in_floor[r]));
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    check
}
