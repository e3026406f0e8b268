//! Least-squares fit of a third-degree Fourier series.
//!
//! The series is linear in its seven amplitudes and nonlinear only in the
//! frequency `w`. For a fixed `w` the amplitudes come from a QR solve of the
//! design matrix; `w` itself is driven by Levenberg–Marquardt on the
//! projected residual (variable projection, Kaufman's Jacobian).

use alloc::boxed::Box;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::student_t_quantile;
use crate::vacancy::VacancyFunction;

/// Default start value for the frequency `w`.
pub const FOURIER3_START_W: f64 = 0.0421690289072455;

pub const COEFFICIENT_NAMES: [&str; 8] = ["a0", "a1", "b1", "a2", "b2", "a3", "b3", "w"];

const PARAMS: usize = 8;
const LINEAR: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative step size in `w` below which the iteration stops.
    pub step_tolerance: f64,
    pub confidence_level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            step_tolerance: 1e-13,
            confidence_level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: VacancyFunction,
    pub sse: f64,
    /// Total sum of squares about the mean.
    pub sst: f64,
    /// `None` when the data have zero variance.
    pub r_square: Option<f64>,
    pub adj_r_square: Option<f64>,
    pub rmse: f64,
    /// Bounds per coefficient in `[a0, a1, b1, a2, b2, a3, b3, w]` order;
    /// `None` when the parameter covariance is singular.
    pub confidence_intervals: Option<[(f64, f64); PARAMS]>,
    pub n: usize,
    pub iterations: usize,
}

impl FitResult {
    /// Zero total variance or singular covariance.
    pub fn is_degenerate(&self) -> bool {
        self.r_square.is_none() || self.confidence_intervals.is_none()
    }
}

struct Projection {
    amplitudes: [f64; LINEAR],
    residual: DVector<f64>,
    q: DMatrix<f64>,
    sse: f64,
}

fn design(t: &[f64], w: f64) -> DMatrix<f64> {
    DMatrix::from_fn(t.len(), LINEAR, |i, j| {
        if j == 0 {
            return 1.0;
        }
        let k = j.div_ceil(2) as f64;
        let x = k * w * t[i];
        if j % 2 == 1 {
            libm::cos(x)
        } else {
            libm::sin(x)
        }
    })
}

/// `d(Phi alpha)/dw`.
fn design_derivative_times(t: &[f64], w: f64, a: &[f64; LINEAR]) -> DVector<f64> {
    DVector::from_fn(t.len(), |i, _| {
        let mut acc = 0.0;
        for k in 1..=3 {
            let kf = k as f64;
            let x = kf * w * t[i];
            let (ca, sa) = (a[2 * k - 1], a[2 * k]);
            acc += -ca * kf * t[i] * libm::sin(x) + sa * kf * t[i] * libm::cos(x);
        }
        acc
    })
}

fn project(t: &[f64], v: &DVector<f64>, w: f64) -> Result<Projection> {
    let phi = design(t, w);
    let qr = phi.clone().qr();
    let r = qr.r();
    let diag_max = (0..LINEAR).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let diag_min = (0..LINEAR).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(diag_max > 0.0) || diag_min <= 1e-10 * diag_max {
        return Err(Error::DegenerateFit(alloc::format!(
            "design matrix is rank deficient at w = {w}"
        )));
    }
    let q = qr.q();
    let qtv = q.transpose() * v;
    let alpha = r
        .solve_upper_triangular(&qtv)
        .ok_or_else(|| Error::DegenerateFit("triangular solve failed".into()))?;
    let residual = v - &phi * &alpha;
    let sse = residual.norm_squared();
    let mut amplitudes = [0.0; LINEAR];
    amplitudes.copy_from_slice(alpha.as_slice());
    Ok(Projection {
        amplitudes,
        residual,
        q,
        sse,
    })
}

/// Kaufman Jacobian of the projected residual with respect to `w`, and the
/// exact gradient of `sse / 2`.
fn projected_jacobian(t: &[f64], w: f64, p: &Projection) -> (DVector<f64>, f64) {
    let g = design_derivative_times(t, w, &p.amplitudes);
    let qtg = p.q.transpose() * &g;
    let jac = -(&g - &p.q * qtg);
    let grad = p.residual.dot(&jac);
    (jac, grad)
}

pub fn fit_fourier3(t: &[f64], v: &[f64], w0: f64) -> Result<FitResult> {
    fit_fourier3_with(t, v, w0, &FitOptions::default())
}

pub fn fit_fourier3_with(t: &[f64], v: &[f64], w0: f64, opts: &FitOptions) -> Result<FitResult> {
    if t.len() != v.len() {
        return Err(Error::invalid("t and v differ in length"));
    }
    let n = t.len();
    if n <= PARAMS {
        return Err(Error::invalid(alloc::format!(
            "need more than {PARAMS} observations, got {n}"
        )));
    }
    if t.iter().chain(v).any(|x| !x.is_finite()) || !w0.is_finite() || w0 <= 0.0 {
        return Err(Error::invalid("non-finite data or non-positive start frequency"));
    }
    let vv = DVector::from_column_slice(v);

    let mut w = w0;
    let mut cur = project(t, &vv, w)?;
    let mut damping = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        let (jac, grad) = projected_jacobian(t, w, &cur);
        let jtj = jac.norm_squared();
        if grad == 0.0 || jtj == 0.0 || grad.abs() <= 1e-15 * jtj.sqrt() * cur.sse.sqrt() {
            converged = true;
            break;
        }
        let mut accepted = false;
        let mut step = 0.0;
        while damping < 1e20 {
            step = -grad / (jtj * (1.0 + damping));
            let trial_w = w + step;
            if trial_w > 0.0 {
                if let Ok(trial) = project(t, &vv, trial_w) {
                    if trial.sse < cur.sse {
                        w = trial_w;
                        cur = trial;
                        damping = (damping * 0.1).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
            }
            damping *= 10.0;
        }
        if !accepted || step.abs() <= opts.step_tolerance * w.abs() {
            // No decrease possible at any damping, or the step has stalled.
            converged = true;
            break;
        }
    }

    let result = summarize(t, &vv, w, &cur, iterations, opts)?;
    if !converged {
        return Err(Error::FitNotConverged {
            iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

fn summarize(
    t: &[f64],
    v: &DVector<f64>,
    w: f64,
    p: &Projection,
    iterations: usize,
    opts: &FitOptions,
) -> Result<FitResult> {
    let n = t.len();
    let a = &p.amplitudes;
    let coefficients = VacancyFunction {
        a0: a[0],
        cos: [a[1], a[3], a[5]],
        sin: [a[2], a[4], a[6]],
        w,
    };
    let mean = v.mean();
    let sst = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let dfe = (n - PARAMS) as f64;
    let r_square = (sst > 0.0).then(|| 1.0 - p.sse / sst);
    let adj_r_square = r_square.map(|r2| 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dfe);
    let rmse = libm::sqrt(p.sse / dfe);

    // Full Jacobian of the model in all eight parameters.
    let phi = design(t, w);
    let dw = design_derivative_times(t, w, a);
    let mut jac = DMatrix::zeros(n, PARAMS);
    jac.view_mut((0, 0), (n, LINEAR)).copy_from(&phi);
    jac.set_column(LINEAR, &dw);
    let jtj = jac.transpose() * &jac;
    let confidence_intervals = jtj.cholesky().and_then(|ch| {
        let cov = ch.inverse() * (p.sse / dfe);
        let q = student_t_quantile(0.5 + 0.5 * opts.confidence_level, dfe).ok()?;
        let c = coefficients.coefficients();
        let mut out = [(0.0, 0.0); PARAMS];
        for i in 0..PARAMS {
            let var = cov[(i, i)];
            if !(var >= 0.0) || !var.is_finite() {
                return None;
            }
            let half = q * libm::sqrt(var);
            out[i] = (c[i] - half, c[i] + half);
        }
        Some(out)
    });

    Ok(FitResult {
        coefficients,
        sse: p.sse,
        sst,
        r_square,
        adj_r_square,
        rmse,
        confidence_intervals,
        n,
        iterations,
    })
}

/// Sum of squared residuals of the best amplitudes at a fixed `w`.
pub fn projected_sse(t: &[f64], v: &[f64], w: f64) -> Result<f64> {
    Ok(project(t, &DVector::from_column_slice(v), w)?.sse)
}
