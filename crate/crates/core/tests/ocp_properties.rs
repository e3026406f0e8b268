use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unemp::integrator::{integrate_on_grid, IntegratorConfig};
use unemp::ocp::nlp::Nlp;
use unemp::ocp::{
    derivative_check, evaluate_policy, solve, transcribe, Formulation, OcpProblem, Propagation, SolverOptions,
};

/// States near the uncontrolled path and controls drawn inside their bounds.
fn random_point(problem: &OcpProblem, formulation: Formulation, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let tr = transcribe(problem, formulation).unwrap();
    let n = problem.grid_intervals;
    let zeros = vec![0.0; n];
    let base = evaluate_policy(problem, &zeros, &zeros, Propagation::Collocation).unwrap();
    let mut u = base.unemployed.clone();
    let mut e = base.employed.clone();
    for k in 1..=n {
        u[k] *= 1.0 + rng.random_range(-0.05..0.05);
        e[k] *= 1.0 + rng.random_range(-0.05..0.05);
    }
    let (l1, h1) = problem.u1_bounds;
    let (l2, h2) = problem.u2_bounds;
    let u1: Vec<f64> = (0..n).map(|_| rng.random_range(l1..=h1)).collect();
    let u2: Vec<f64> = (0..n).map(|_| rng.random_range(l2..=h2)).collect();
    let mut x = tr.pack(&u, &e, &u1, &u2);
    if formulation == Formulation::ClockState {
        for k in 1..=n {
            x[tr.clock(k)] += rng.random_range(-0.1..0.1);
        }
    }
    x
}

#[test]
fn transcription_derivatives_match_central_differences() {
    let problem = OcpProblem::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for formulation in [Formulation::Analytic, Formulation::ClockState] {
        let tr = transcribe(&problem, formulation).unwrap();
        for _ in 0..10 {
            let x = random_point(&problem, formulation, &mut rng);
            let check = derivative_check(&tr, &x, 1e-6);
            assert!(check.max() <= 1e-5, "{formulation:?}: {check:?}");
        }
    }
}

#[test]
fn frozen_transcription_converges_at_second_order() {
    let problem = OcpProblem::default();
    let p = problem.params;
    let vac = problem.vacancy;
    let cfg = IntegratorConfig::over(0.0, problem.horizon).with_tolerances(1e-12, 1e-6);
    let reference = integrate_on_grid(
        move |t, y: &[f64; 2]| p.derivative(y[0], y[1], vac.eval(t), 0.0, 0.0),
        problem.initial.to_array(),
        &cfg,
        &[problem.horizon],
    )
    .unwrap()
    .last()
    .1;

    let mut errors = Vec::new();
    for n in [75, 150, 300] {
        let prob = problem.with_intervals(n).frozen();
        let zeros = vec![0.0; n];
        let ev = evaluate_policy(&prob, &zeros, &zeros, Propagation::Collocation).unwrap();
        // These nodes satisfy the transcription's defect equations.
        let tr = transcribe(&prob, Formulation::Analytic).unwrap();
        let x = tr.pack(&ev.unemployed, &ev.employed, &zeros, &zeros);
        let mut c = vec![0.0; tr.num_eq()];
        tr.eq_constraints(&x, &mut c);
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        errors.push(
            (ev.unemployed[n] - reference[0])
                .abs()
                .max((ev.employed[n] - reference[1]).abs()),
        );
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 2.0 - 0.05, "observed order {order} from {errors:?}");
    }
}

#[test]
fn frozen_solve_tracks_the_adaptive_integrator() {
    let problem = OcpProblem::default().frozen();
    let sol = solve(&problem, &SolverOptions::default()).unwrap();
    assert!(sol.status.is_converged());
    let zeros = vec![0.0; problem.grid_intervals];
    let exact = evaluate_policy(&problem, &zeros, &zeros, Propagation::Adaptive).unwrap();
    for k in 0..=problem.grid_intervals {
        assert!(((sol.unemployed[k] - exact.unemployed[k]) / exact.unemployed[k]).abs() <= 1e-3);
        assert!(((sol.employed[k] - exact.employed[k]) / exact.employed[k]).abs() <= 1e-3);
    }
    let colloc = evaluate_policy(&problem, &zeros, &zeros, Propagation::Collocation).unwrap();
    assert!(((sol.objective - colloc.objective) / colloc.objective).abs() <= 1e-6);
}

#[test]
fn default_solve_is_feasible_self_consistent_and_beats_zero_control() {
    let problem = OcpProblem::default();
    let opts = SolverOptions::default();
    let sol = solve(&problem, &opts).unwrap();
    assert!(sol.status.is_converged(), "{:?}", sol.status);
    assert!(sol.residuals.defect <= opts.nlp.feas_tol);
    assert!(sol.residuals.path <= opts.nlp.feas_tol);
    assert!(sol.residuals.terminal <= opts.nlp.feas_tol);
    assert!(sol.kkt_residual <= opts.nlp.kkt_tol);
    for (&a, &b) in sol.u1.iter().zip(&sol.u2) {
        assert!((-40000.0..=40000.0).contains(&a));
        assert!((0.0..=1.0).contains(&b));
    }

    let replay = evaluate_policy(&problem, &sol.u1, &sol.u2, Propagation::Collocation).unwrap();
    assert!(((replay.objective - sol.objective) / sol.objective).abs() <= 1e-6);

    let zeros = vec![0.0; problem.grid_intervals];
    let idle = evaluate_policy(&problem, &zeros, &zeros, Propagation::Collocation).unwrap();
    assert!(idle.violations.is_feasible(0.0, 0.0));
    assert!(sol.objective <= idle.objective);
}

#[test]
fn raising_indirect_cost_never_raises_incentive_use() {
    let mut masses = Vec::new();
    for c in [20000.0, 40000.0, 80000.0] {
        let mut problem = OcpProblem::default();
        problem.weights.c = c;
        let sol = solve(&problem, &SolverOptions::default()).unwrap();
        assert!(sol.status.is_converged(), "C = {c}: {:?}", sol.status);
        masses.push(sol.u2.iter().sum::<f64>());
    }
    assert!(masses[0] >= masses[1] && masses[1] >= masses[2], "{masses:?}");
}

#[test]
fn reference_level_only_shifts_the_objective() {
    let base = OcpProblem::default().with_intervals(40);
    let base = OcpProblem { horizon: 40.0, ..base };
    let shifted = OcpProblem {
        reference_level: base.reference_level + 12345.0,
        ..base.clone()
    };
    let opts = SolverOptions::default();
    let a = solve(&base, &opts).unwrap();
    let b = solve(&shifted, &opts).unwrap();
    assert_eq!(a.unemployed, b.unemployed);
    assert_eq!(a.employed, b.employed);
    assert_eq!(a.u1, b.u1);
    assert_eq!(a.u2, b.u2);
    let expected = -base.weights.a * 12345.0 * base.horizon;
    assert!(((b.objective - a.objective) - expected).abs() <= 1e-9 * a.objective.abs());
}
