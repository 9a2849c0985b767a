use std::ffi::{CStr, CString};
use std::ptr;

use fractherm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ft_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn new_config(alpha: f64, lambda: f64, steps: usize, u0: &[f64]) -> *mut FtConfig {
    let id = CString::new("shifted_sine").unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe {
        ft_config_new(
            alpha,
            lambda,
            1.0,
            steps,
            u0.len() + 1,
            id.as_ptr(),
            u0.as_ptr(),
            u0.len(),
            &mut cfg,
        )
    };
    assert_eq!(status, FtStatus::Ok, "{}", last_error());
    cfg
}

#[test]
fn weights_match_the_library() {
    let mut needed = 0;
    let mut alpha0 = 0.0;
    let status =
        unsafe { ft_l1_weights(0.5, 1.0, 10, ptr::null_mut(), 0, &mut needed, &mut alpha0) };
    assert_eq!(status, FtStatus::BufferTooSmall);
    assert_eq!(needed, 11);

    let mut b = vec![0.0; needed];
    let status = unsafe {
        ft_l1_weights(
            0.5,
            1.0,
            10,
            b.as_mut_ptr(),
            b.len(),
            &mut needed,
            &mut alpha0,
        )
    };
    assert_eq!(status, FtStatus::Ok);
    assert_eq!(b[0], 1.0);
    assert!((b[1] - 0.41421356237309515).abs() < 1e-15);
    assert!((alpha0 - 0.28024956081989644).abs() < 1e-15);
}

#[test]
fn invalid_order_reports_a_config_error() {
    let status = unsafe {
        ft_l1_weights(
            1.5,
            1.0,
            10,
            ptr::null_mut(),
            0,
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, FtStatus::Config);
    assert!(last_error().contains("1.5"), "{}", last_error());
}

#[test]
fn run_through_handles_matches_the_library() {
    let u0 = [1.0, 0.0, -0.25, 0.0, 0.1, 0.0, 0.0];
    let cfg = new_config(0.5, 0.5, 20, &u0);

    let mut rec = ptr::null_mut();
    assert_eq!(unsafe { ft_run(cfg, &mut rec) }, FtStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { ft_record_len(rec, &mut len) }, FtStatus::Ok);
    assert_eq!(len, 21);
    let mut norms = vec![0.0; len];
    let mut needed = 0;
    assert_eq!(
        unsafe { ft_record_l2_norms(rec, norms.as_mut_ptr(), len, &mut needed) },
        FtStatus::Ok
    );
    let mut last = vec![0.0; u0.len()];
    assert_eq!(
        unsafe { ft_record_state(rec, 20, last.as_mut_ptr(), last.len(), &mut needed) },
        FtStatus::Ok
    );
    assert_eq!(
        unsafe { ft_record_state(rec, 21, last.as_mut_ptr(), last.len(), &mut needed) },
        FtStatus::Config
    );

    let problem = fractherm::ProblemConfig::new(
        fractherm::FractionalOrder::new(0.5).unwrap(),
        0.5,
        fractherm::TimeGrid::new(1.0, 20).unwrap(),
        8,
        fractherm::Conductivity::by_name("shifted_sine").unwrap(),
        fractherm::InitialState::Coefficients(fractherm::CoefficientVector(u0.to_vec())),
    );
    let lib = fractherm::run(problem).unwrap();
    assert_eq!(norms, lib.l2_norms);
    assert_eq!(last.as_slice(), lib.final_state().as_slice());

    // step by step through a solver handle reaches the same state
    let mut solver = ptr::null_mut();
    assert_eq!(unsafe { ft_solver_new(cfg, &mut solver) }, FtStatus::Ok);
    for _ in 0..20 {
        assert_eq!(unsafe { ft_solver_step(solver) }, FtStatus::Ok);
    }
    assert_eq!(unsafe { ft_solver_step(solver) }, FtStatus::Config);
    let mut step = 0;
    assert_eq!(
        unsafe { ft_solver_current_step(solver, &mut step) },
        FtStatus::Ok
    );
    assert_eq!(step, 20);
    let mut state = vec![0.0; u0.len()];
    assert_eq!(
        unsafe { ft_solver_state(solver, state.as_mut_ptr(), state.len(), &mut needed) },
        FtStatus::Ok
    );
    assert_eq!(state, last);

    unsafe {
        ft_solver_free(solver);
        ft_record_free(rec);
        ft_config_free(cfg);
    }
}

#[test]
fn config_text_and_picard_failure() {
    let text = CString::new(
        "alpha = 0.5\nlambda = 1\nT = 1\nK = 10\nN = 12\nconductivity = shifted_sine\nu0 = sinpi\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { ft_config_from_text(text.as_ptr(), &mut cfg) },
        FtStatus::Ok
    );
    let mut degree = 0;
    assert_eq!(unsafe { ft_config_degree(cfg, &mut degree) }, FtStatus::Ok);
    assert_eq!(degree, 12);

    assert_eq!(
        unsafe { ft_config_set_picard(cfg, -1.0, 5) },
        FtStatus::Config
    );
    assert_eq!(unsafe { ft_config_set_picard(cfg, 1e-12, 2) }, FtStatus::Ok);
    let mut rec = ptr::null_mut();
    assert_eq!(unsafe { ft_run(cfg, &mut rec) }, FtStatus::Solver);
    assert!(rec.is_null());
    assert!(!last_error().is_empty());
    unsafe { ft_config_free(cfg) };

    let bad = CString::new("lambda = 1\n").unwrap();
    assert_eq!(
        unsafe { ft_config_from_text(bad.as_ptr(), &mut cfg) },
        FtStatus::Config
    );
    assert!(cfg.is_null());
}

#[test]
fn null_handles_are_rejected() {
    let mut len = 0;
    assert_eq!(
        unsafe { ft_record_len(ptr::null(), &mut len) },
        FtStatus::NullPointer
    );
    assert_eq!(
        unsafe { ft_solver_step(ptr::null_mut()) },
        FtStatus::NullPointer
    );
    assert_eq!(
        unsafe { ft_config_from_text(ptr::null(), &mut ptr::null_mut()) },
        FtStatus::NullPointer
    );
    unsafe {
        ft_config_free(ptr::null_mut());
        ft_solver_free(ptr::null_mut());
        ft_record_free(ptr::null_mut());
    }
}

#[test]
fn solver_handle_lifecycle_and_version() {
    let text = CString::new(
        "alpha = 0.5\nlambda = 0\nT = 1\nK = 4\nN = 8\nconductivity = const_one\nu0 = sinpi\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { ft_config_from_text(text.as_ptr(), &mut cfg) },
        FtStatus::Ok
    );
    let mut solver = ptr::null_mut();
    assert_eq!(unsafe { ft_solver_new(cfg, &mut solver) }, FtStatus::Ok);
    unsafe {
        ft_solver_free(solver);
        ft_config_free(cfg);
    }
    let version = unsafe { CStr::from_ptr(ft_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
