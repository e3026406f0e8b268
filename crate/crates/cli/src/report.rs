//! Plain-text reports.

use std::fmt::Write as _;

use unemp::analysis::{FeasibleRegion, RegionBound, StabilityReport};
use unemp::datafit::{CorrelationResult, FitResult, COEFFICIENT_NAMES};
use unemp::LaborState;

use crate::data::Metadata;
use crate::format::general;

/// Fit summary laid out like the curve-fitting tool's console output.
pub fn fit(meta: &Metadata, fit: &FitResult, converged: bool, correlation: Option<&CorrelationResult>) -> String {
    let mut out = meta.comment_line();
    let g = |x: f64| general(x, 4);
    out.push_str("General model Fourier3:\n");
    out.push_str("     f(x) =  a0 + a1*cos(x*w) + b1*sin(x*w) + \n");
    out.push_str("               a2*cos(2*x*w) + b2*sin(2*x*w) + a3*cos(3*x*w) + \n");
    out.push_str("               b3*sin(3*x*w)\n");
    out.push_str("Coefficients (with 95% confidence bounds):\n");
    let c = fit.coefficients.coefficients();
    for (i, name) in COEFFICIENT_NAMES.iter().enumerate() {
        let bounds = match &fit.confidence_intervals {
            Some(ci) => format!("({}, {})", g(ci[i].0), g(ci[i].1)),
            None => "(undefined: singular covariance)".into(),
        };
        let _ = writeln!(out, "       {name} = {:>11}  {bounds}", g(c[i]));
    }
    out.push('\n');
    out.push_str("Goodness of fit:\n");
    let _ = writeln!(out, "  SSE: {}", g(fit.sse));
    match (fit.r_square, fit.adj_r_square) {
        (Some(r2), Some(adj)) => {
            let _ = writeln!(out, "  R-square: {}", g(r2));
            let _ = writeln!(out, "  Adjusted R-square: {}", g(adj));
        }
        _ => {
            out.push_str("  R-square: undefined (zero total variance)\n");
            out.push_str("  Adjusted R-square: undefined (zero total variance)\n");
        }
    }
    let _ = writeln!(out, "  RMSE: {}", g(fit.rmse));
    let _ = writeln!(out, "\nObservations: {}  Iterations: {}", fit.n, fit.iterations);
    if !converged {
        out.push_str("WARNING: not converged; coefficients are the best iterate.\n");
    }
    if fit.is_degenerate() {
        out.push_str("WARNING: degenerate fit.\n");
    }

    out.push_str("\nCorrelation of unemployment and employment change rates:\n");
    match correlation {
        Some(r) => {
            let _ = writeln!(out, "  r: {}", general(r.r, 6));
            let _ = writeln!(out, "  t-statistic: {}", general(r.t_stat, 6));
            let _ = writeln!(out, "  p-value (two-tailed): {}", general(r.p_value, 6));
            let _ = writeln!(out, "  pairs: {}", r.n);
        }
        None => out.push_str("  undefined\n"),
    }
    out
}

pub struct Analysis<'a> {
    pub v: f64,
    pub equilibrium: LaborState,
    pub region: &'a FeasibleRegion,
    pub stability: &'a StabilityReport,
}

pub fn analysis(meta: &Metadata, a: &Analysis<'_>) -> String {
    let g = |x: f64| general(x, 8);
    let mut out = meta.comment_line();
    let _ = writeln!(out, "Vacancy level V = {}", g(a.v));
    out.push_str("\nEquilibrium:\n");
    let _ = writeln!(out, "  U* = {}", g(a.equilibrium.unemployed));
    let _ = writeln!(out, "  E* = {}", g(a.equilibrium.employed));
    let _ = writeln!(out, "  rate = {}", g(a.equilibrium.unemployment_rate()));

    out.push_str("\nAttracting region U + E <= (Lambda + omega) / alpha_m:\n");
    let _ = writeln!(out, "  alpha_m = {}", g(a.region.alpha_m));
    match a.region.bound {
        RegionBound::Bounded(b) => {
            let _ = writeln!(out, "  bound = {} [informative]", g(b));
        }
        RegionBound::NonInformative(b) => {
            let _ = writeln!(out, "  bound = {} [non-informative: alpha_m < 0]", g(b));
        }
        RegionBound::Degenerate => out.push_str("  bound = none [degenerate: alpha_m = 0]\n"),
    }

    let s = a.stability;
    out.push_str("\nCharacteristic polynomial x^2 + a1 x + a2:\n");
    let _ = writeln!(out, "  a1 = {}", g(s.a1_coeff));
    let _ = writeln!(out, "  a2 = {}", g(s.a2_coeff));
    out.push_str("\nEigenvalues:\n");
    for l in &s.eigenvalues {
        if l.im == 0.0 {
            let _ = writeln!(out, "  {}", g(l.re));
        } else {
            let sign = if l.im < 0.0 { '-' } else { '+' };
            let _ = writeln!(out, "  {} {sign} {}i", g(l.re), g(l.im.abs()));
        }
    }
    let verdict = if s.is_stable { "stable" } else { "unstable" };
    let _ = writeln!(out, "\nVerdict: {verdict} (Routh-Hurwitz criterion: a1 > 0 and a2 > 0)");
    if s.is_stable != s.eigen_stable() {
        out.push_str("Note: eigenvalue signs disagree with the coefficient test (borderline case).\n");
    }
    out
}
