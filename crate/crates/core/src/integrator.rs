//! Dormand–Prince 5(4) integration with PI step-size control, plus the two
//! resampling schemes used to line simulations up with monthly data.

// A failure carries the partial trajectory by value; it is returned at most
// once per integration, so its size does not matter.
#![allow(clippy::result_large_err)]

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            initial_step: 0.1,
            max_steps: 1_000_000,
            t_start: 0.0,
            t_end: 150.0,
        }
    }
}

impl IntegratorConfig {
    pub fn over(t_start: f64, t_end: f64) -> Self {
        IntegratorConfig {
            t_start,
            t_end,
            ..Default::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::invalid("need finite t_start < t_end"));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::invalid("initial step must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// First sample time at which each component went negative, if ever.
    pub first_negative: Vec<Option<f64>>,
}

impl Diagnostics {
    pub fn any_negative(&self) -> bool {
        self.first_negative.iter().any(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; D]>,
    pub diagnostics: Diagnostics,
}

impl<const D: usize> Trajectory<D> {
    fn start(t0: f64, y0: [f64; D]) -> Self {
        let mut t = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Diagnostics {
                first_negative: alloc::vec![None; D],
                ..Default::default()
            },
        };
        t.push(t0, y0);
        t
    }

    fn push(&mut self, t: f64, y: [f64; D]) {
        for (slot, &yi) in self.diagnostics.first_negative.iter_mut().zip(y.iter()) {
            if slot.is_none() && yi < 0.0 {
                *slot = Some(t);
            }
        }
        self.times.push(t);
        self.states.push(y);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, [f64; D]) {
        let n = self.len() - 1;
        (self.times[n], self.states[n])
    }

    /// Component `i` of every sample.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

/// Integration stopped early. Carries the samples produced so far.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure<const D: usize> {
    pub error: Error,
    pub partial: Trajectory<D>,
}

impl<const D: usize> From<IntegrationFailure<D>> for Error {
    fn from(f: IntegrationFailure<D>) -> Self {
        f.error
    }
}

impl<const D: usize> core::fmt::Display for IntegrationFailure<D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.error.fmt(f)
    }
}

pub type IntegrationResult<const D: usize> = core::result::Result<Trajectory<D>, IntegrationFailure<D>>;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

struct Stepper<'a, F, const D: usize> {
    rhs: &'a F,
    evaluations: usize,
}

struct Step<const D: usize> {
    y: [f64; D],
    k_last: [f64; D],
    err: [f64; D],
}

impl<F, const D: usize> Stepper<'_, F, D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn eval(&mut self, t: f64, y: &[f64; D]) -> [f64; D] {
        self.evaluations += 1;
        (self.rhs)(t, y)
    }

    /// One DP5 step from `(t, y)` with first stage `k1` (FSAL).
    fn step(&mut self, t: f64, y: &[f64; D], k1: &[f64; D], h: f64) -> Step<D> {
        let k2 = self.eval(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = self.eval(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = self.eval(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = self.eval(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = self.eval(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = self.eval(t + h, &y_new);
        let mut err = [0.0; D];
        for i in 0..D {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        Step {
            y: y_new,
            k_last: k7,
            err,
        }
    }
}

fn all_finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Adaptive integration recording every accepted step.
pub fn integrate<F, const D: usize>(rhs: F, y0: [f64; D], cfg: &IntegratorConfig) -> IntegrationResult<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    integrate_impl(rhs, y0, cfg, None)
}

/// Adaptive integration that lands exactly on every time in `grid` and
/// records only those samples. Grid times outside `[t_start, t_end]` are
/// rejected; `t_start` and `t_end` are always included.
pub fn integrate_on_grid<F, const D: usize>(
    rhs: F,
    y0: [f64; D],
    cfg: &IntegratorConfig,
    grid: &[f64],
) -> IntegrationResult<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    integrate_impl(rhs, y0, cfg, Some(grid))
}

fn fail<const D: usize>(error: Error, partial: Trajectory<D>) -> IntegrationResult<D> {
    Err(IntegrationFailure { error, partial })
}

fn integrate_impl<F, const D: usize>(
    rhs: F,
    y0: [f64; D],
    cfg: &IntegratorConfig,
    grid: Option<&[f64]>,
) -> IntegrationResult<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let empty = Trajectory::start(cfg.t_start, y0);
    if let Err(e) = cfg.validate() {
        return fail(e, empty);
    }
    if !all_finite(&y0) {
        return fail(Error::invalid("initial state is not finite"), empty);
    }

    let mut stops: Vec<f64> = Vec::new();
    if let Some(g) = grid {
        let mut prev = cfg.t_start;
        for &t in g {
            if !(t >= cfg.t_start && t <= cfg.t_end) {
                return fail(
                    Error::InvalidArgument(alloc::format!("grid time {t} outside horizon")),
                    empty,
                );
            }
            if t < prev {
                return fail(Error::InvalidArgument("grid must be non-decreasing".into()), empty);
            }
            if t > prev {
                stops.push(t);
            }
            prev = t;
        }
        if stops.last() != Some(&cfg.t_end) {
            stops.push(cfg.t_end);
        }
    } else {
        stops.push(cfg.t_end);
    }

    let mut stepper = Stepper {
        rhs: &rhs,
        evaluations: 0,
    };
    let mut traj = empty;
    let mut t = cfg.t_start;
    let mut y = y0;
    let mut k1 = stepper.eval(t, &y);
    if !all_finite(&k1) {
        return fail(Error::BlowUp { last_good_t: t }, traj);
    }

    let span = cfg.t_end - cfg.t_start;
    let mut h = cfg.initial_step.min(span);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    let mut next_stop = 0;
    let record_all = grid.is_none();

    // PI controller constants (Hairer & Wanner, DOPRI5).
    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;

    while next_stop < stops.len() {
        if traj.diagnostics.accepted_steps + traj.diagnostics.rejected_steps >= cfg.max_steps {
            traj.diagnostics.rhs_evaluations = stepper.evaluations;
            return fail(
                Error::StepLimit {
                    max_steps: cfg.max_steps,
                    t,
                },
                traj,
            );
        }
        let target = stops[next_stop];
        let remaining = target - t;
        let mut h_try = h;
        let mut hits_stop = false;
        if h_try >= remaining * (1.0 - 1e-12) {
            h_try = remaining;
            hits_stop = true;
        }
        let step = stepper.step(t, &y, &k1, h_try);

        let mut err_sq = 0.0;
        for i in 0..D {
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(step.y[i].abs());
            let r = step.err[i] / scale;
            err_sq += r * r;
        }
        let err = libm::sqrt(err_sq / D as f64);

        if !err.is_finite() || !all_finite(&step.y) || !all_finite(&step.k_last) {
            // Non-finite trial: shrink and retry unless the step is already tiny.
            traj.diagnostics.rejected_steps += 1;
            if h_try <= 1e-12 * span.max(1.0) {
                traj.diagnostics.rhs_evaluations = stepper.evaluations;
                return fail(Error::BlowUp { last_good_t: t }, traj);
            }
            h = h_try * FAC_MIN;
            rejected_last = true;
            continue;
        }

        if err <= 1.0 {
            let fac = libm::pow(err.max(1e-10), EXPO) / libm::pow(err_prev, BETA) / SAFETY;
            let fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_try / fac;
            if rejected_last {
                h_new = h_new.min(h_try);
            }
            err_prev = err.max(1e-4);
            rejected_last = false;

            t = if hits_stop { target } else { t + h_try };
            y = step.y;
            k1 = step.k_last;
            traj.diagnostics.accepted_steps += 1;
            if hits_stop {
                next_stop += 1;
                traj.push(t, y);
                // A step clipped by a stop says nothing about the natural size.
                h = h_new.max(h);
            } else {
                if record_all {
                    traj.push(t, y);
                }
                h = h_new;
            }
        } else {
            let fac = (libm::pow(err, EXPO) / SAFETY).min(1.0 / FAC_MIN);
            h = h_try / fac;
            traj.diagnostics.rejected_steps += 1;
            rejected_last = true;
        }
    }

    traj.diagnostics.rhs_evaluations = stepper.evaluations;
    Ok(traj)
}

/// Dormand–Prince 5th order solution with a fixed step count; no error
/// control. Intended for convergence-order verification.
pub fn integrate_fixed_step<F, const D: usize>(
    rhs: F,
    y0: [f64; D],
    t_start: f64,
    t_end: f64,
    steps: usize,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    if steps == 0 || !(t_end > t_start) {
        return Err(Error::invalid("need steps > 0 and t_end > t_start"));
    }
    let mut stepper = Stepper {
        rhs: &rhs,
        evaluations: 0,
    };
    let h = (t_end - t_start) / steps as f64;
    let mut y = y0;
    let mut k1 = stepper.eval(t_start, &y);
    for n in 0..steps {
        let t = t_start + n as f64 * h;
        let s = stepper.step(t, &y, &k1, h);
        if !all_finite(&s.y) {
            return Err(Error::BlowUp { last_good_t: t });
        }
        y = s.y;
        k1 = s.k_last;
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResampleMode {
    /// Picks samples at `round(linspace(1, len, n))` (1-based), the index
    /// compression of an adaptive solver's raw output.
    Index,
    /// Linear interpolation at `n` equispaced times.
    #[default]
    Time,
}

/// 0-based indices chosen by index-mode resampling.
pub fn index_selection(len: usize, n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if n > len {
        return Err(Error::InvalidArgument(alloc::format!(
            "cannot pick {n} samples from {len}"
        )));
    }
    let step = (len - 1) as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            let x = if k == n - 1 { len as f64 } else { 1.0 + k as f64 * step };
            libm::round(x) as usize - 1
        })
        .collect())
}

pub fn resample<const D: usize>(traj: &Trajectory<D>, n: usize, mode: ResampleMode) -> Result<Trajectory<D>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidArgument("trajectory has fewer than 2 samples".into()));
    }
    let mut out = Trajectory {
        times: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        diagnostics: traj.diagnostics.clone(),
    };
    match mode {
        ResampleMode::Index => {
            for i in index_selection(traj.len(), n)? {
                out.times.push(traj.times[i]);
                out.states.push(traj.states[i]);
            }
        }
        ResampleMode::Time => {
            let t0 = traj.times[0];
            let t1 = traj.times[traj.len() - 1];
            let mut seg = 0;
            for k in 0..n {
                let t = if k == n - 1 {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                };
                while seg + 2 < traj.len() && traj.times[seg + 1] < t {
                    seg += 1;
                }
                let (ta, tb) = (traj.times[seg], traj.times[seg + 1]);
                let (ya, yb) = (&traj.states[seg], &traj.states[seg + 1]);
                let mut y = [0.0; D];
                if t == ta {
                    y = *ya;
                } else if t == tb {
                    y = *yb;
                } else {
                    let s = (t - ta) / (tb - ta);
                    for i in 0..D {
                        y[i] = ya[i] + s * (yb[i] - ya[i]);
                    }
                }
                out.times.push(t);
                out.states.push(y);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_rhs_keeps_state() {
        let tr = integrate(|_, _| [0.0, 0.0], [1.0, 2.0], &IntegratorConfig::default()).unwrap();
        assert!(tr.states.iter().all(|s| *s == [1.0, 2.0]));
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 150.0);
    }

    #[test]
    fn exponential_decay() {
        let cfg = IntegratorConfig::over(0.0, 1.0);
        let tr = integrate(|_, y: &[f64; 1]| [-y[0]], [1.0], &cfg).unwrap();
        let (t, y) = tr.last();
        assert_eq!(t, 1.0);
        assert!((y[0] - libm::exp(-1.0)).abs() < 1e-6);
        assert!((y[0] - 0.367879441).abs() < 1e-6);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_mode_hits_grid() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let cfg = IntegratorConfig::over(0.0, 5.0).with_tolerances(1e-10, 1e-12);
        let tr = integrate_on_grid(|_, y: &[f64; 1]| [-0.3 * y[0]], [2.0], &cfg, &grid).unwrap();
        assert_eq!(tr.times, grid);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(s[0], 2.0 * libm::exp(-0.3 * t), max_relative = 1e-9);
        }
    }

    #[test]
    fn step_limit() {
        let cfg = IntegratorConfig {
            max_steps: 5,
            ..IntegratorConfig::over(0.0, 100.0)
        };
        let res = integrate(|t, _: &[f64; 1]| [libm::sin(10.0 * t)], [0.0], &cfg);
        let f = res.unwrap_err();
        assert!(matches!(f.error, Error::StepLimit { max_steps: 5, .. }));
        assert!(!f.partial.is_empty());
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        // y' = y^2 from 1 explodes at t = 1.
        let cfg = IntegratorConfig::over(0.0, 2.0);
        let f = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], &cfg).unwrap_err();
        match f.error {
            Error::BlowUp { last_good_t } => assert!((last_good_t - 1.0).abs() < 1e-3, "{last_good_t}"),
            Error::StepLimit { t, .. } => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_components_are_flagged() {
        let cfg = IntegratorConfig::over(0.0, 2.0);
        let tr = integrate(|_, _: &[f64; 2]| [-1.0, 0.0], [1.0, 1.0], &cfg).unwrap();
        assert!(tr.diagnostics.any_negative());
        let t = tr.diagnostics.first_negative[0].unwrap();
        assert!(t > 1.0);
        assert_eq!(tr.diagnostics.first_negative[1], None);
        // not clamped
        assert!((tr.last().1[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig::over(1.0, 1.0);
        assert!(integrate(|_, _: &[f64; 1]| [0.0], [0.0], &cfg).is_err());
        let cfg = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate(|_, _: &[f64; 1]| [0.0], [0.0], &cfg).is_err());
    }

    #[test]
    fn index_selection_matches_rounded_linspace() {
        let idx = index_selection(1737, 150).unwrap();
        assert_eq!(idx.len(), 150);
        assert_eq!(idx[0], 0);
        assert_eq!(idx[149], 1736);
        // 1 + 1736/149 = 12.651 -> 13 (1-based)
        assert_eq!(idx[1], 12);
        // 1 + 2*1736/149 = 24.302 -> 24
        assert_eq!(idx[2], 23);
        assert!(idx.windows(2).all(|w| w[1] > w[0]));
        assert!(index_selection(10, 11).is_err());
        assert!(index_selection(10, 1).is_err());
    }

    fn uniform(n: usize, f: impl Fn(f64) -> f64) -> Trajectory<1> {
        let mut tr = Trajectory::start(0.0, [f(0.0)]);
        for k in 1..n {
            let t = k as f64 * 0.25;
            tr.push(t, [f(t)]);
        }
        tr
    }

    #[test]
    fn time_mode_identity_on_uniform_grid() {
        let tr = uniform(17, libm::sin);
        let r = resample(&tr, 17, ResampleMode::Time).unwrap();
        assert_eq!(r.times, tr.times);
        assert_eq!(r.states, tr.states);
    }

    #[test]
    fn time_mode_exact_on_linear() {
        let tr = uniform(9, |t| 3.0 * t - 1.0);
        for n in [2, 5, 13, 40] {
            let r = resample(&tr, n, ResampleMode::Time).unwrap();
            for (t, s) in r.times.iter().zip(&r.states) {
                assert!((s[0] - (3.0 * t - 1.0)).abs() < 1e-12);
            }
        }
    }
}
