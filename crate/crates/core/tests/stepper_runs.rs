use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use fractherm::spectral::assemble_by_quadrature;
use fractherm::stepper::{FnSource, HistoryForm, PicardOptions, Solver};
use fractherm::verify::{backward_euler_reference, fit_order, FitMode, StudySetup, TimeProfile};
use fractherm::{
    nonlocal_load, run, CoefficientVector, Conductivity, Error, FractionalOrder, InitialState,
    ProblemConfig, SpatialFunction, TimeGrid,
};

fn config(
    alpha: f64,
    lambda: f64,
    t_end: f64,
    steps: usize,
    n: usize,
    u0: SpatialFunction,
) -> ProblemConfig {
    ProblemConfig::new(
        FractionalOrder::new(alpha).unwrap(),
        lambda,
        TimeGrid::new(t_end, steps).unwrap(),
        n,
        Conductivity::by_name("shifted_sine").unwrap(),
        InitialState::Function(u0),
    )
}

/// Dense `M + α₀ S` and `M` from the brute-force assembly.
fn dense_system(n: usize, alpha0: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, s) = assemble_by_quadrature(n).unwrap();
    let dim = n - 1;
    let m = DMatrix::from_fn(dim, dim, |i, j| m[i][j]);
    let s = DMatrix::from_fn(dim, dim, |i, j| s[i][j]);
    (&m + &s * alpha0, m)
}

#[test]
fn one_linear_step_matches_dense_solve() {
    let cfg = config(0.5, 0.0, 0.1, 1, 12, SpatialFunction::basis(0));
    let rec = run(cfg).unwrap();
    let c0 = DVector::from_column_slice(rec.trajectory[0].as_slice());
    assert!((c0[0] - 1.0).abs() < 1e-12 && c0.iter().skip(1).all(|v| v.abs() < 1e-12));

    let (a, m) = dense_system(12, rec.alpha0);
    let want = a.lu().solve(&(m * c0)).unwrap();
    for (got, want) in rec.trajectory[1].as_slice().iter().zip(want.iter()) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert_eq!(rec.picard_iters[1], 1);
}

#[test]
fn nonlinear_step_solves_the_implicit_equation() {
    // A c¹ - M c⁰ - g(c¹) = 0 with A, M from the brute-force assembly
    let n = 16;
    let cfg = config(0.4, 0.8, 0.2, 1, n, SpatialFunction::sin_pi());
    let space = cfg.build_space().unwrap();
    let cond = cfg.conductivity.clone();
    let rec = run(cfg).unwrap();
    let (a, m) = dense_system(n, rec.alpha0);
    let c0 = DVector::from_column_slice(rec.trajectory[0].as_slice());
    let c1 = DVector::from_column_slice(rec.trajectory[1].as_slice());
    let g = nonlocal_load(&rec.trajectory[1], &cond, 0.8, rec.alpha0, &space).unwrap();
    let residual = &a * &c1 - &m * &c0 - DVector::from_vec(g);
    assert!(residual.amax() < 1e-11, "{:e}", residual.amax());
    assert!(rec.picard_iters[1] > 1 && rec.picard_residuals[1] <= 1e-12);
}

#[test]
fn single_step_run_equals_solver_step() {
    let cfg = config(0.6, 0.5, 0.05, 1, 14, SpatialFunction::bump());
    let rec = run(cfg.clone()).unwrap();
    let mut solver = Solver::new(cfg).unwrap();
    let stepped = solver.step().unwrap().clone();
    assert!(solver.is_finished());
    assert_eq!(&stepped, rec.final_state());
}

#[test]
fn runs_are_bit_identical() {
    let cfg = config(0.3, 0.5, 1.0, 50, 16, SpatialFunction::sin_pi());
    let a = run(cfg.clone()).unwrap();
    let b = run(cfg).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.picard_residuals, b.picard_residuals);
}

#[test]
fn alpha0_of_the_factorized_system() {
    let cfg = config(0.5, 0.0, 1.0, 10, 8, SpatialFunction::sin_pi());
    let solver = Solver::new(cfg).unwrap();
    assert!((solver.alpha0() - 0.2802495608).abs() < 1e-10);
}

#[test]
fn near_classical_step_damps_the_solution() {
    let rec = run(config(0.999, 0.0, 0.01, 1, 16, SpatialFunction::sin_pi())).unwrap();
    assert!(rec.l2_norms[1] < rec.l2_norms[0]);
}

#[test]
fn linear_runs_do_not_expand() {
    for alpha in [0.1, 0.5, 0.9] {
        let rec = run(config(alpha, 0.0, 2.0, 150, 20, SpatialFunction::bump())).unwrap();
        let mut running_max = rec.l2_norms[0];
        for &n in &rec.l2_norms[1..] {
            assert!(n <= running_max + 1e-12);
            running_max = running_max.max(n);
        }
        assert!(rec.picard_iters[1..].iter().all(|&i| i == 1));
    }
}

#[test]
fn history_forms_give_the_same_trajectory() {
    let cfg = config(0.7, 0.5, 1.0, 80, 16, SpatialFunction::sin_pi());
    let mut diff_cfg = cfg.clone();
    diff_cfg.history_form = HistoryForm::Difference;
    let a = run(cfg).unwrap();
    let b = run(diff_cfg).unwrap();
    assert!(a.final_state().max_abs_diff(b.final_state()) < 1e-12);
}

#[test]
fn backward_euler_reference_is_first_order() {
    // λ = 0 decay of sin(πx): exact value e^{-π² T} sin(πx) up to the
    // (spectrally small) projection error
    let t_end = 0.2;
    let mut deltas = Vec::new();
    let mut errors = Vec::new();
    for steps in [10, 20, 40, 80] {
        let cfg = config(0.5, 0.0, t_end, steps, 20, SpatialFunction::sin_pi());
        let space = cfg.build_space().unwrap();
        let rec = backward_euler_reference(&cfg).unwrap();
        let decay = (-PI * PI * t_end).exp();
        let exact = SpatialFunction::new(move |x| decay * (PI * x).sin())
            .with_derivative(move |x| decay * PI * (PI * x).cos());
        errors.push(
            space
                .error_norms(rec.final_state(), &exact, 1.0)
                .unwrap()
                .l2,
        );
        deltas.push(t_end / steps as f64);
    }
    let order = fit_order(&deltas, &errors, FitMode::LogLog).unwrap();
    assert!((order - 1.0).abs() < 0.1, "{order}");
}

#[test]
fn time_linear_manufactured_solution_is_reproduced() {
    // With w(t) = 1 + t the L1 operator is exact in time, so the only error
    // left is spatial and the run reproduces the exact solution.
    let mut setup = StudySetup::new(
        FractionalOrder::new(0.5).unwrap(),
        0.5,
        Conductivity::by_name("sat_quadratic").unwrap(),
        TimeProfile::one_plus_t(),
        SpatialFunction::sin_pi(),
    );
    setup.final_time = 1.0;
    let (cfg, mms) = setup.problem(20, 24).unwrap();
    let space = cfg.build_space().unwrap();
    let rec = run(cfg).unwrap();
    for k in [1, 10, 20] {
        let exact = mms.exact(rec.times[k]);
        let e = space.error_norms(&rec.trajectory[k], &exact, 1.0).unwrap();
        assert!(e.h1 < 1e-9, "k = {k}: {:e}", e.h1);
    }
}

#[test]
fn source_is_applied() {
    let cfg = config(
        0.5,
        0.0,
        0.5,
        5,
        10,
        SpatialFunction::new(|_| 0.0).with_derivative(|_| 0.0),
    )
    .with_source(Arc::new(FnSource(|x: f64, _t: f64| 1.0 - x * x)));
    let rec = run(cfg).unwrap();
    assert_eq!(rec.l2_norms[0], 0.0);
    assert!(rec.l2_norms.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn picard_failure_carries_the_partial_trajectory() {
    let mut cfg = config(0.5, 1.0, 1.0, 10, 12, SpatialFunction::sin_pi());
    cfg.picard = PicardOptions {
        tol: 1e-12,
        max_iter: 2,
    };
    let err = run(cfg).unwrap_err();
    match &err.error {
        Error::NonConvergence {
            step,
            iterations,
            residuals,
        } => {
            assert_eq!(*step, 1);
            assert_eq!(*iterations, 2);
            assert_eq!(residuals.len(), 2);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(err.partial.trajectory.len(), 1);
}

#[test]
fn boundary_violations_are_rejected() {
    let cfg = config(0.5, 0.0, 1.0, 4, 8, SpatialFunction::new(|x| x + 2.0));
    assert!(matches!(
        run(cfg).unwrap_err().error,
        Error::Boundary { .. }
    ));

    let mut bad = config(0.5, 0.0, 1.0, 4, 8, SpatialFunction::sin_pi());
    bad.initial = InitialState::Coefficients(CoefficientVector::zeros(3));
    assert!(run(bad).is_err());
}
