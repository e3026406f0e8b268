//! The subcommands. Each writes its files into the configured output
//! directory and returns a short human-readable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use unemp::analysis::{equilibrium, feasible_region_bound, stability_analysis};
use unemp::datafit::{
    fit_fourier3, generate_synthetic_dataset, pearson_correlation, FitResult, MonthlySeries, SYNTHETIC_NOISE_SD,
};
use unemp::integrator::{
    integrate, integrate_on_grid, resample, IntegrationFailure, IntegratorConfig, ResampleMode, Trajectory,
};
use unemp::ocp::nlp::AugLagOptions;
use unemp::ocp::{self, evaluate_policy, OcpProblem, OcpSolution, Propagation, SolveStatus, SolverOptions};
use unemp::Error as CoreError;

use crate::config::{vacancy_function, ModelKind, ModelSetup, Settings, VacancySource};
use crate::data::{read_series, table, write_file, Metadata, SERIES_HEADER};
use crate::error::{CliError, CliResult};
use crate::format::{general, num};
use crate::{plot, report};

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> CliResult<()> {
        let path = dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn prepare(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("output directory {} is not writable: {e}", dir.display())))
}

fn model_metadata(command: &str, s: &Settings) -> Metadata {
    let mut m = Metadata::new(command);
    m.push("preset", &s.preset);
    m.push("model", s.model.kind().name());
    match &s.model {
        ModelSetup::New {
            params,
            initial,
            source,
            ..
        } => {
            for (k, v) in [
                ("lambda", params.lambda),
                ("kappa", params.kappa),
                ("alpha1", params.alpha1),
                ("alpha2", params.alpha2),
                ("gamma", params.gamma),
                ("omega", params.omega),
                ("delta", params.delta),
                ("rho", params.rho),
                ("u0", initial.unemployed),
                ("e0", initial.employed),
            ] {
                m.push_num(k, v);
            }
            m.push("vacancy", source);
        }
        ModelSetup::Baseline { params, initial } => {
            for (k, v) in [
                ("lambda", params.lambda),
                ("kappa", params.kappa),
                ("alpha1", params.alpha1),
                ("alpha2", params.alpha2),
                ("gamma", params.gamma),
                ("phi", params.phi),
                ("delta", params.delta),
                ("u0", initial.unemployed),
                ("e0", initial.employed),
                ("v0", initial.vacancies),
            ] {
                m.push_num(k, v);
            }
        }
    }
    m
}

fn integrator_metadata(m: &mut Metadata, s: &Settings) {
    m.push("integrator", "dopri5");
    m.push_num("rel_tol", s.rel_tol);
    m.push_num("abs_tol", s.abs_tol);
    m.push_num("t_end", s.t_end);
}

fn sample_grid(t_end: f64, step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * step;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid.push(t_end);
    grid
}

fn rates(u: &[f64], e: &[f64]) -> Vec<f64> {
    u.iter().zip(e).map(|(u, e)| u / (u + e)).collect()
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

pub fn simulate(s: &Settings) -> CliResult<Outcome> {
    // The plot script runs from the output directory, so it needs an
    // absolute path to the data file.
    let data = s
        .data
        .as_deref()
        .map(|p| read_series(p).map(|_| absolute(p)))
        .transpose()?;
    prepare(&s.out_dir)?;
    let mut meta = model_metadata("simulate", s);
    integrator_metadata(&mut meta, s);
    meta.push_num("step", s.step);
    let cfg = IntegratorConfig::over(0.0, s.t_end).with_tolerances(s.rel_tol, s.abs_tol);
    let grid = sample_grid(s.t_end, s.step);
    let mut out = Outcome::default();

    let (header, columns, failure, diagnostics): (Vec<&str>, Vec<Vec<f64>>, _, _) = match &s.model {
        ModelSetup::New {
            params,
            initial,
            vacancy,
            ..
        } => {
            let (p, v) = (*params, *vacancy);
            let rhs = move |t: f64, y: &[f64; 2]| p.derivative(y[0], y[1], v.eval(t), 0.0, 0.0);
            let (traj, failure) = split(integrate_on_grid(rhs, initial.to_array(), &cfg, &grid));
            let (u, e) = (traj.component(0), traj.component(1));
            let vac: Vec<f64> = traj.times.iter().map(|&t| v.eval(t)).collect();
            let cols = vec![traj.times.clone(), u.clone(), e.clone(), rates(&u, &e), vac];
            (vec!["t", "U", "E", "UR", "V"], cols, failure, traj.diagnostics)
        }
        ModelSetup::Baseline { params, initial } => {
            let p = *params;
            let rhs = move |_t: f64, y: &[f64; 3]| p.derivative(y[0], y[1], y[2]);
            let (traj, failure) = split(integrate_on_grid(rhs, initial.to_array(), &cfg, &grid));
            let (u, e) = (traj.component(0), traj.component(1));
            let cols = vec![
                traj.times.clone(),
                u.clone(),
                e.clone(),
                traj.component(2),
                rates(&u, &e),
            ];
            (vec!["t", "U", "E", "V", "UR"], cols, failure, traj.diagnostics)
        }
    };

    if let Some(d) = &s.data {
        meta.push("data", d.display());
    }
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    out.write(&s.out_dir, "simulation.csv", &table(&meta, &header, &refs))?;
    let baseline = s.model.kind() == ModelKind::MunoliGani;
    out.write(
        &s.out_dir,
        "simulation.gp",
        &plot::simulation(&meta, baseline, data.as_deref()),
    )?;

    let t = &columns[0];
    let last = t.len() - 1;
    let _ = writeln!(out.summary, "{} samples on [0, {}]", t.len(), num(t[last]));
    let _ = writeln!(
        out.summary,
        "U({}) = {}  E({}) = {}",
        num(t[last]),
        general(columns[1][last], 8),
        num(t[last]),
        general(columns[2][last], 8)
    );
    let _ = writeln!(
        out.summary,
        "steps accepted {} rejected {}",
        diagnostics.accepted_steps, diagnostics.rejected_steps
    );
    for (i, first) in diagnostics.first_negative.iter().enumerate() {
        if let Some(tn) = first {
            let _ = writeln!(
                out.summary,
                "warning: {} became negative at t = {}",
                header[i + 1],
                num(*tn)
            );
        }
    }
    match failure.map(CliError::from) {
        Some(CliError::Numerical(m)) => {
            let partial = out.files[0].display();
            Err(CliError::Numerical(format!(
                "{m}; partial trajectory kept in {partial}"
            )))
        }
        Some(other) => Err(other),
        None => Ok(out),
    }
}

fn split<const D: usize>(r: Result<Trajectory<D>, IntegrationFailure<D>>) -> (Trajectory<D>, Option<CoreError>) {
    match r {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    }
}

pub fn fit(s: &Settings, data_path: &Path, w0: f64) -> CliResult<Outcome> {
    let series = read_series(data_path)?;
    prepare(&s.out_dir)?;
    let mut meta = Metadata::new("fit");
    meta.push("data", data_path.display());
    meta.push("model", "fourier3");
    meta.push_num("w0", w0);
    meta.push("max_iterations", 200);
    meta.push("confidence", "0.95");

    let (fit, converged, hard_error): (FitResult, bool, Option<CliError>) =
        match fit_fourier3(&series.t, &series.vacancies, w0) {
            Ok(f) => (f, true, None),
            Err(CoreError::FitNotConverged { iterations, best }) => {
                let msg = format!("Fourier fit stopped after {iterations} iterations");
                (*best, false, Some(CliError::NonConvergence(msg)))
            }
            Err(e) => return Err(e.into()),
        };
    let correlation = change_rate_correlation(&series);

    let mut out = Outcome::default();
    let text = report::fit(&meta, &fit, converged, correlation.as_ref());
    out.write(&s.out_dir, "fit_report.txt", &text)?;
    out.write(&s.out_dir, "fit_coefficients.csv", &coefficient_table(&meta, &fit))?;
    let fitted: Vec<f64> = series.t.iter().map(|&t| fit.coefficients.eval(t)).collect();
    let resid: Vec<f64> = series.vacancies.iter().zip(&fitted).map(|(d, f)| d - f).collect();
    out.write(
        &s.out_dir,
        "fit_values.csv",
        &table(
            &meta,
            &["t", "D", "fit", "residual"],
            &[&series.t, &series.vacancies, &fitted, &resid],
        ),
    )?;
    out.write(&s.out_dir, "fit.gp", &plot::fit(&meta))?;
    out.summary = text.lines().skip(1).collect::<Vec<_>>().join("\n") + "\n";

    if let Some(e) = hard_error {
        return Err(e);
    }
    if fit.is_degenerate() {
        return Err(CliError::Numerical(
            "degenerate fit: R-square or confidence bounds undefined (report written)".into(),
        ));
    }
    Ok(out)
}

fn change_rate_correlation(series: &MonthlySeries) -> Option<unemp::datafit::CorrelationResult> {
    let rcu = series.unemployment_change().ok()?;
    let rce = series.employment_change().ok()?;
    pearson_correlation(&rcu, &rce).ok()
}

fn coefficient_table(meta: &Metadata, fit: &FitResult) -> String {
    let mut out = meta.comment_line();
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |w: &mut csv::Writer<Vec<u8>>, fields: &[String]| w.write_record(fields).expect("in-memory write");
    row(
        &mut w,
        &["name".into(), "value".into(), "lower95".into(), "upper95".into()],
    );
    let c = fit.coefficients.coefficients();
    for (i, name) in unemp::datafit::COEFFICIENT_NAMES.iter().enumerate() {
        let (lo, hi) = match &fit.confidence_intervals {
            Some(ci) => (num(ci[i].0), num(ci[i].1)),
            None => (String::new(), String::new()),
        };
        row(&mut w, &[name.to_string(), num(c[i]), lo, hi]);
    }
    let stat = |x: Option<f64>| x.map(num).unwrap_or_default();
    for (name, value) in [
        ("sse", Some(fit.sse)),
        ("r_square", fit.r_square),
        ("adj_r_square", fit.adj_r_square),
        ("rmse", Some(fit.rmse)),
    ] {
        row(&mut w, &[name.into(), stat(value), String::new(), String::new()]);
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii"));
    out
}

pub fn analyze(s: &Settings, v: Option<f64>) -> CliResult<Outcome> {
    let ModelSetup::New { params, vacancy, .. } = &s.model else {
        return Err(CliError::config("analyze applies to the new model only"));
    };
    let v = v.unwrap_or(vacancy.a0);
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::config(format!(
            "vacancy level {v} must be finite and non-negative"
        )));
    }
    let region = feasible_region_bound(params)?;
    let stability = stability_analysis(params, v);
    let eq = equilibrium(params, v)?;
    prepare(&s.out_dir)?;
    let mut meta = model_metadata("analyze", s);
    meta.push_num("v", v);
    let text = report::analysis(
        &meta,
        &report::Analysis {
            v,
            equilibrium: eq,
            region: &region,
            stability: &stability,
        },
    );
    let mut out = Outcome::default();
    out.write(&s.out_dir, "analysis.txt", &text)?;
    out.summary = text.lines().skip(1).collect::<Vec<_>>().join("\n") + "\n";
    Ok(out)
}

pub fn synth(s: &Settings) -> CliResult<Outcome> {
    let series = generate_synthetic_dataset(s.seed, s.months)?;
    prepare(&s.out_dir)?;
    let mut meta = Metadata::new("synth");
    meta.push("source", "synthetic");
    meta.push("seed", s.seed);
    meta.push("months", s.months);
    meta.push_num("vacancy_noise_sd", SYNTHETIC_NOISE_SD);
    let mut text = meta.comment_line();
    text.push_str("# Synthetic stand-in for the monthly unemployment series; not observed data.\n");
    let body = table(
        &Metadata::default(),
        &SERIES_HEADER,
        &[&series.t, &series.unemployed, &series.rate, &series.vacancies],
    );
    // Drop the empty metadata line of the inner table.
    text.push_str(body.split_once('\n').map_or("", |(_, rest)| rest));
    let mut out = Outcome::default();
    out.write(&s.out_dir, "synthetic.csv", &text)?;
    let _ = writeln!(out.summary, "{} synthetic months, seed {}", series.len(), s.seed);
    Ok(out)
}

/// The optimal-control problem: the selected preset, then any parameter,
/// initial-state, vacancy and horizon keys set explicitly by config file
/// or flags.
pub fn ocp_problem(s: &Settings) -> CliResult<OcpProblem> {
    let e = &s.explicit;
    if e.model == Some(ModelKind::MunoliGani) {
        return Err(CliError::config("optimal control applies to the new model only"));
    }
    if e.params.phi.is_some() || e.initial.v0.is_some() {
        return Err(CliError::config("'phi' and 'v0' belong to the munoli-gani model"));
    }
    let mut p = OcpProblem::preset(s.ocp.preset).with_intervals(s.ocp.intervals);
    let q = &e.params;
    let m = &mut p.params;
    for (slot, value) in [
        (&mut m.lambda, q.lambda),
        (&mut m.kappa, q.kappa),
        (&mut m.alpha1, q.alpha1),
        (&mut m.alpha2, q.alpha2),
        (&mut m.gamma, q.gamma),
        (&mut m.omega, q.omega),
        (&mut m.delta, q.delta),
        (&mut m.rho, q.rho),
    ] {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(u0) = e.initial.u0 {
        p.initial.unemployed = u0;
        p.reference_level = u0;
    }
    if let Some(e0) = e.initial.e0 {
        p.initial.employed = e0;
    }
    if let Some(src) = &e.vacancy.source {
        p.vacancy = vacancy_function(&src.parse()?)?;
    }
    if let Some(t) = e.run.t_end {
        p.horizon = t;
    }
    p.weights = s.ocp.weights;
    if s.ocp.freeze_controls {
        p = p.frozen();
    }
    p.validate()?;
    Ok(p)
}

pub fn solver_options(s: &Settings) -> SolverOptions {
    let base = if s.ocp.acado_compat {
        SolverOptions::acado_compat()
    } else {
        SolverOptions::default()
    };
    SolverOptions {
        nlp: AugLagOptions {
            kkt_tol: s.ocp.kkt_tol,
            feas_tol: s.ocp.feas_tol,
            ..base.nlp
        },
        ..base
    }
}

fn ocp_metadata(s: &Settings, p: &OcpProblem, opts: &SolverOptions) -> Metadata {
    let mut m = Metadata::new("ocp");
    m.push("preset", s.ocp.preset);
    m.push("formulation", opts.formulation.name());
    let q = &p.params;
    for (k, v) in [
        ("lambda", q.lambda),
        ("kappa", q.kappa),
        ("alpha1", q.alpha1),
        ("alpha2", q.alpha2),
        ("gamma", q.gamma),
        ("omega", q.omega),
        ("delta", q.delta),
        ("rho", q.rho),
        ("u0", p.initial.unemployed),
        ("e0", p.initial.employed),
        ("horizon", p.horizon),
        ("weight_a", p.weights.a),
        ("weight_b", p.weights.b),
        ("weight_c", p.weights.c),
        ("kkt_tol", opts.nlp.kkt_tol),
        ("feas_tol", opts.nlp.feas_tol),
    ] {
        m.push_num(k, v);
    }
    m.push("intervals", p.grid_intervals);
    m.push("frozen", s.ocp.freeze_controls);
    m.push("vacancy", VacancySource::Fourier(p.vacancy));
    m
}

/// Runs the solver and writes states, controls, diagnostics and the plot
/// script. Outputs are written even when the solver did not converge.
pub fn ocp(s: &Settings) -> CliResult<Outcome> {
    let problem = ocp_problem(s)?;
    let opts = solver_options(s);
    prepare(&s.out_dir)?;
    let meta = ocp_metadata(s, &problem, &opts);
    let sol = ocp::solve(&problem, &opts)?;
    let replay = evaluate_policy(&problem, &sol.u1, &sol.u2, Propagation::Collocation)?;

    let mut out = Outcome::default();
    let n = problem.grid_intervals;
    out.write(
        &s.out_dir,
        "states.csv",
        &table(&meta, &["t", "U", "E"], &[&sol.times, &sol.unemployed, &sol.employed]),
    )?;
    out.write(
        &s.out_dir,
        "ctrl.csv",
        &table(&meta, &["t", "u1", "u2"], &[&sol.times[..n], &sol.u1, &sol.u2]),
    )?;
    let diag = diagnostics_json(&meta, s.ocp.preset.name(), &problem, &opts, &sol, replay.objective);
    let mut json_text = serde_json::to_string_pretty(&diag).expect("serializable");
    json_text.push('\n');
    out.write(&s.out_dir, "ocp_diagnostics.json", &json_text)?;
    out.write(
        &s.out_dir,
        "ocp.gp",
        &plot::ocp(&meta, problem.weights, problem.max_unemployment_rate),
    )?;

    let force = sol.labor_force()[n];
    let _ = writeln!(out.summary, "status: {}", sol.status.label());
    let _ = writeln!(out.summary, "objective: {}", general(sol.objective, 10));
    let _ = writeln!(out.summary, "mean unemployment rate: {}", general(sol.mean_rate(), 6));
    let _ = writeln!(out.summary, "max unemployment rate: {}", general(sol.max_rate(), 10));
    let _ = writeln!(out.summary, "terminal labor force: {}", general(force, 8));
    let _ = writeln!(
        out.summary,
        "residuals: defect {:e} path {:e} terminal {:e}; kkt {:e}",
        sol.residuals.defect, sol.residuals.path, sol.residuals.terminal, sol.kkt_residual
    );

    match sol.status {
        SolveStatus::Converged => Ok(out),
        SolveStatus::IterationLimit => Err(CliError::NonConvergence(format!(
            "iteration limit reached (kkt residual {:e}); outputs flagged and written",
            sol.kkt_residual
        ))),
        SolveStatus::Infeasible {
            max_violation,
            location,
        } => Err(CliError::NonConvergence(format!(
            "infeasible: worst violation {max_violation:e} at {location:?}; outputs flagged and written"
        ))),
    }
}

fn diagnostics_json(
    meta: &Metadata,
    preset: &str,
    p: &OcpProblem,
    opts: &SolverOptions,
    sol: &OcpSolution,
    replay_objective: f64,
) -> serde_json::Value {
    let n = p.grid_intervals;
    let infeasibility = match sol.status {
        SolveStatus::Infeasible {
            max_violation,
            location,
        } => json!({ "max_violation": max_violation, "location": format!("{location:?}") }),
        _ => serde_json::Value::Null,
    };
    let log: Vec<serde_json::Value> = sol
        .log
        .iter()
        .map(|r| {
            json!({
                "outer": r.outer,
                "inner_iterations": r.inner_iterations,
                "penalty": r.penalty,
                "eq_violation": r.eq_violation,
                "ineq_violation": r.ineq_violation,
                "kkt_residual": r.kkt_residual,
                "objective": r.objective,
            })
        })
        .collect();
    json!({
        "metadata": meta.to_json(),
        "preset": preset,
        "formulation": opts.formulation.name(),
        "status": sol.status.label(),
        "converged": sol.status.is_converged(),
        "infeasibility": infeasibility,
        "objective": sol.objective,
        "objective_offset": ocp::objective_offset(p),
        "replay_objective": replay_objective,
        "mean_rate": sol.mean_rate(),
        "max_rate": sol.max_rate(),
        "terminal_labor_force": sol.unemployed[n] + sol.employed[n],
        "u2_mass": sol.u2.iter().sum::<f64>(),
        "residuals": {
            "defect": sol.residuals.defect,
            "path": sol.residuals.path,
            "terminal": sol.residuals.terminal,
        },
        "kkt_residual": sol.kkt_residual,
        "complementarity": sol.complementarity,
        "multipliers": {
            "terminal_lower": sol.multipliers.terminal[0],
            "terminal_upper": sol.multipliers.terminal[1],
            "path_max": sol.multipliers.path.iter().fold(0.0f64, |m, v| m.max(*v)),
        },
        "iterations": {
            "outer": sol.log.len(),
            "inner": sol.inner_iterations,
        },
        "tolerances": {
            "kkt_tol": opts.nlp.kkt_tol,
            "feas_tol": opts.nlp.feas_tol,
            "max_outer": opts.nlp.max_outer,
            "max_inner": opts.nlp.max_inner,
            "initial_penalty": opts.nlp.initial_penalty,
            "penalty_growth": opts.nlp.penalty_growth,
            "max_penalty": opts.nlp.max_penalty,
            "lbfgs_memory": opts.nlp.lbfgs_memory,
        },
        "problem": {
            "intervals": n,
            "horizon": p.horizon,
            "u1_bounds": [p.u1_bounds.0, p.u1_bounds.1],
            "u2_bounds": [p.u2_bounds.0, p.u2_bounds.1],
            "terminal_labor_force": [p.terminal_labor_force.0, p.terminal_labor_force.1],
            "max_unemployment_rate": p.max_unemployment_rate,
            "reference_level": p.reference_level,
        },
        "log": log,
    })
}

/// Observed unemployment rate against the uncontrolled and optimally
/// controlled model, both resampled to the length of the data.
pub fn compare(s: &Settings, data_path: &Path, with_ocp: bool) -> CliResult<Outcome> {
    let series = read_series(data_path)?;
    let ModelSetup::New {
        params,
        initial,
        vacancy,
        ..
    } = &s.model
    else {
        return Err(CliError::config("compare applies to the new model only"));
    };
    let n = series.len();
    if n < 2 {
        return Err(CliError::config("need at least two data rows to compare"));
    }
    prepare(&s.out_dir)?;

    let (p, v) = (*params, *vacancy);
    let cfg = IntegratorConfig::over(0.0, s.t_end).with_tolerances(s.rel_tol, s.abs_tol);
    let free = integrate(
        move |t, y: &[f64; 2]| p.derivative(y[0], y[1], v.eval(t), 0.0, 0.0),
        initial.to_array(),
        &cfg,
    )
    .map_err(CoreError::from)?;
    let free = resample(&free, n, s.resample).map_err(|e| CliError::config(e.to_string()))?;
    let model_rate = rates(&free.component(0), &free.component(1));

    let mut meta = model_metadata("compare", s);
    integrator_metadata(&mut meta, s);
    meta.push(
        "resample",
        if s.resample == ResampleMode::Index {
            "index"
        } else {
            "time"
        },
    );
    meta.push("data", data_path.display());

    let mut status = None;
    let optimal_rate = if with_ocp {
        let problem = ocp_problem(s)?;
        let opts = solver_options(s);
        meta.push("ocp_preset", s.ocp.preset);
        meta.push("formulation", opts.formulation.name());
        meta.push_num("kkt_tol", opts.nlp.kkt_tol);
        meta.push_num("feas_tol", opts.nlp.feas_tol);
        let sol = ocp::solve(&problem, &opts)?;
        status = Some(sol.status);
        let nodes = Trajectory {
            times: sol.times.clone(),
            states: sol
                .unemployed
                .iter()
                .zip(&sol.employed)
                .map(|(&u, &e)| [u, e])
                .collect(),
            diagnostics: Default::default(),
        };
        let r = resample(&nodes, n, s.resample).map_err(|e| CliError::config(e.to_string()))?;
        Some(rates(&r.component(0), &r.component(1)))
    } else {
        None
    };

    let mut header = vec!["t", "UR_data", "UR_model"];
    let mut cols: Vec<&[f64]> = vec![&free.times, &series.rate, &model_rate];
    if let Some(r) = &optimal_rate {
        header.push("UR_optimal");
        cols.push(r);
    }
    let mut out = Outcome::default();
    out.write(&s.out_dir, "compare.csv", &table(&meta, &header, &cols))?;
    out.write(&s.out_dir, "compare.gp", &plot::compare(&meta, optimal_rate.is_some()))?;

    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let _ = writeln!(
        out.summary,
        "mean rate, data:        {}",
        general(mean(&series.rate), 6)
    );
    let _ = writeln!(out.summary, "mean rate, no control:  {}", general(mean(&model_rate), 6));
    if let Some(r) = &optimal_rate {
        let _ = writeln!(out.summary, "mean rate, optimal:     {}", general(mean(r), 6));
    }
    match status {
        Some(st) if !st.is_converged() => Err(CliError::NonConvergence(format!(
            "optimal-control solve ended with status {}; outputs written",
            st.label()
        ))),
        _ => Ok(out),
    }
}
