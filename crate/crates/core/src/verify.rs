//! Independent oracles and convergence studies.
//!
//! Nothing here reuses the L1 stepping code: the Caputo oracle integrates the
//! defining integral directly and the backward-Euler reference has its own
//! time loop.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::banded::BandCholesky;
use crate::error::{Error, Result};
use crate::nonlocal::{nonlocal_load, Conductivity};
use crate::quadrature::{gauss_legendre, lgl_rule, QuadratureRule};
use crate::spectral::{CoefficientVector, SpatialFunction, SpectralSpace};
use crate::stepper::{
    run, InitialState, PicardOptions, ProblemConfig, RunError, RunRecord, SourceTerm,
};
use crate::time_fractional::{
    gamma, history_combination, history_difference_form, l1_caputo_apply, FractionalOrder,
    L1Weights, TimeGrid,
};

/// Caputo derivative `1/Γ(1-α) ∫₀ᵗ u'(s) (t-s)^{-α} ds` by quadrature.
///
/// The substitution `s = t (1 - τ^{1/(1-α)})` removes the kernel singularity:
/// the integral becomes `t^{1-α}/Γ(2-α) ∫₀¹ u'(t(1 - τ^{1/(1-α)})) dτ`. The
/// remaining integrand is evaluated with composite Gauss-Legendre on panels
/// graded geometrically toward `τ = 0`, refined until two successive levels
/// agree to `rtol`.
pub fn caputo_oracle<D>(du: D, alpha: f64, t: f64, rtol: f64) -> Result<f64>
where
    D: Fn(f64) -> f64,
{
    FractionalOrder::new(alpha)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Caputo oracle needs t > 0, got {t}"
        )));
    }
    let gamma_exp = 1.0 / (1.0 - alpha);
    let integrand = |tau: f64| du(t * (1.0 - tau.powf(gamma_exp)));
    let scale = t.powf(1.0 - alpha) / gamma(2.0 - alpha);

    let mut previous: Option<f64> = None;
    for level in 0..10 {
        let panels = 6 + 4 * level;
        let points = 8 + 4 * level;
        let rule = gauss_legendre(points)?;
        let mut total = 0.0;
        // [0, 2^-panels] then [2^-(j+1), 2^-j]
        let mut hi = 1.0;
        for _ in 0..panels {
            let lo = hi * 0.5;
            total += rule.mapped(lo, hi).integrate(integrand);
            hi = lo;
        }
        total += rule.mapped(0.0, hi).integrate(integrand);
        let value = scale * total;
        if let Some(prev) = previous {
            if (value - prev).abs() <= rtol * value.abs().max(f64::MIN_POSITIVE) {
                return Ok(value);
            }
        }
        previous = Some(value);
    }
    Err(Error::Internal(format!(
        "Caputo oracle stagnated at t = {t}, alpha = {alpha}"
    )))
}

/// A polynomial time profile `w(t) = Σ a_p t^p` with closed-form Caputo
/// derivative `Σ_{p>=1} a_p Γ(p+1)/Γ(p+1-α) t^{p-α}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeProfile {
    coeffs: Vec<f64>,
}

impl TimeProfile {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn t_squared() -> Self {
        Self::polynomial(vec![0.0, 0.0, 1.0])
    }

    pub fn t_cubed() -> Self {
        Self::polynomial(vec![0.0, 0.0, 0.0, 1.0])
    }

    pub fn one_plus_t() -> Self {
        Self::polynomial(vec![1.0, 1.0])
    }

    pub fn one_plus_t_squared() -> Self {
        Self::polynomial(vec![1.0, 0.0, 1.0])
    }

    pub fn value(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (p, a)| acc * t + p as f64 * a)
    }

    pub fn caputo(&self, alpha: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, &a)| {
                let pf = p as f64;
                a * gamma(pf + 1.0) / gamma(pf + 1.0 - alpha) * t.powf(pf - alpha)
            })
            .sum()
    }
}

/// Separable exact solution `u(x, t) = w(t) φ(x)` and the forcing that makes
/// it solve the nonlocal problem:
///
/// `g = ∂^α w · φ - w φ'' - λ f(u) / (∫ f(u) dx)²`.
#[derive(Clone)]
pub struct ManufacturedSolution {
    alpha: f64,
    lambda: f64,
    conductivity: Conductivity,
    time: TimeProfile,
    space: SpatialFunction,
    second: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    fine: QuadratureRule,
}

impl std::fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("alpha", &self.alpha)
            .field("lambda", &self.lambda)
            .field("conductivity", &self.conductivity.id())
            .field("time", &self.time)
            .finish()
    }
}

/// Points of the rule used for `∫ f(u_exact) dx`.
const FINE_POINTS: usize = 128;

impl ManufacturedSolution {
    pub fn new(
        alpha: FractionalOrder,
        lambda: f64,
        conductivity: Conductivity,
        time: TimeProfile,
        space: SpatialFunction,
    ) -> Result<Self> {
        space.check_dirichlet()?;
        let second = space.second_derivative().cloned().ok_or_else(|| {
            Error::InvalidParameter("manufactured profile needs an analytic φ''".into())
        })?;
        if !space.has_derivative() {
            return Err(Error::InvalidParameter(
                "manufactured profile needs an analytic φ'".into(),
            ));
        }
        Ok(Self {
            alpha: alpha.value(),
            lambda,
            conductivity,
            time,
            space,
            second,
            fine: gauss_legendre(FINE_POINTS)?,
        })
    }

    pub fn time_profile(&self) -> &TimeProfile {
        &self.time
    }

    /// `u(·, t)` with its exact derivative.
    pub fn exact(&self, t: f64) -> SpatialFunction {
        let w = self.time.value(t);
        let (p1, p2) = (self.space.clone(), self.space.clone());
        SpatialFunction::new(move |x| w * p1.value(x))
            .with_derivative(move |x| w * p2.derivative(x))
    }

    /// `∫ f(u(x, t)) dx` on a fine Gauss rule.
    pub fn nonlocal_denominator(&self, t: f64) -> f64 {
        let w = self.time.value(t);
        self.fine
            .integrate(|x| self.conductivity.eval(w * self.space.value(x)))
    }

    pub fn source_at(&self, x: f64, t: f64) -> f64 {
        self.sample(t, &[x])[0]
    }
}

impl SourceTerm for ManufacturedSolution {
    fn sample(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        let w = self.time.value(t);
        let dw = self.time.caputo(self.alpha, t);
        let nonlocal = if self.lambda != 0.0 {
            let d = self.nonlocal_denominator(t);
            self.lambda / (d * d)
        } else {
            0.0
        };
        xs.iter()
            .map(|&x| {
                let phi = self.space.value(x);
                let g = dw * phi - w * (self.second)(x);
                if nonlocal != 0.0 {
                    g - nonlocal * self.conductivity.eval(w * phi)
                } else {
                    g
                }
            })
            .collect()
    }
}

/// Build the forcing for `u = w(t) φ(x)`.
pub fn manufactured_source(
    alpha: FractionalOrder,
    lambda: f64,
    conductivity: Conductivity,
    time: TimeProfile,
    space: SpatialFunction,
) -> Result<ManufacturedSolution> {
    ManufacturedSolution::new(alpha, lambda, conductivity, time, space)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitMode {
    /// slope of `ln e` against `ln x`
    LogLog,
    /// slope of `ln e` against `x`
    SemiLog,
}

/// Least-squares slope of `ln(errors)` against `xs` or `ln(xs)`.
pub fn fit_order(xs: &[f64], errors: &[f64], mode: FitMode) -> Result<f64> {
    if xs.len() != errors.len() {
        return Err(Error::Contract("axis and error lengths differ".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Contract(format!(
            "order fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Contract("order fit needs positive errors".into()));
    }
    let xs: Vec<f64> = match mode {
        FitMode::LogLog => {
            if xs.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Contract(
                    "log-log fit needs positive abscissae".into(),
                ));
            }
            xs.iter().map(|x| x.ln()).collect()
        }
        FitMode::SemiLog => xs.to_vec(),
    };
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::Contract("order fit axis has zero variance".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Errors of the L1 operator at `t_end` against the quadrature oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub alpha: f64,
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_order: f64,
}

pub fn l1_truncation_study<U, D>(
    u: U,
    du: D,
    alpha: f64,
    t_end: f64,
    steps: &[usize],
) -> Result<TruncationStudy>
where
    U: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let order = FractionalOrder::new(alpha)?;
    let exact = caputo_oracle(&du, alpha, t_end, 1e-14)?;
    let mut deltas = Vec::with_capacity(steps.len());
    let mut errors = Vec::with_capacity(steps.len());
    for &k in steps {
        let grid = TimeGrid::new(t_end, k)?;
        let weights = L1Weights::compute(order, grid);
        let samples: Vec<f64> = (0..=k).map(|i| u(grid.time(i))).collect();
        let approx = l1_caputo_apply(&samples, &weights)?;
        deltas.push(grid.delta());
        errors.push((approx - exact).abs());
    }
    let fitted_order = fit_order(&deltas, &errors, FitMode::LogLog)?;
    Ok(TruncationStudy {
        alpha,
        deltas,
        errors,
        fitted_order,
    })
}

/// Everything a convergence study needs besides the axis values.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub alpha: FractionalOrder,
    pub lambda: f64,
    pub conductivity: Conductivity,
    pub final_time: f64,
    pub steps: usize,
    pub degree: usize,
    pub time: TimeProfile,
    pub space: SpatialFunction,
    pub picard: PicardOptions,
    pub nonlocal_alpha0_factor: bool,
    pub linearization: crate::stepper::Linearization,
    pub history_form: crate::stepper::HistoryForm,
}

impl StudySetup {
    pub fn new(
        alpha: FractionalOrder,
        lambda: f64,
        conductivity: Conductivity,
        time: TimeProfile,
        space: SpatialFunction,
    ) -> Self {
        Self {
            alpha,
            lambda,
            conductivity,
            final_time: 1.0,
            steps: 8,
            degree: 32,
            time,
            space,
            picard: PicardOptions::default(),
            nonlocal_alpha0_factor: true,
            linearization: Default::default(),
            history_form: Default::default(),
        }
    }

    pub fn manufactured(&self) -> Result<ManufacturedSolution> {
        manufactured_source(
            self.alpha,
            self.lambda,
            self.conductivity.clone(),
            self.time.clone(),
            self.space.clone(),
        )
    }

    /// Solver configuration with `u₀ = w(0) φ` and the manufactured forcing.
    pub fn problem(
        &self,
        steps: usize,
        degree: usize,
    ) -> Result<(ProblemConfig, ManufacturedSolution)> {
        let mms = self.manufactured()?;
        let grid = TimeGrid::new(self.final_time, steps)?;
        let mut cfg = ProblemConfig::new(
            self.alpha,
            self.lambda,
            grid,
            degree,
            self.conductivity.clone(),
            InitialState::Function(mms.exact(0.0)),
        )
        .with_source(Arc::new(mms.clone()));
        cfg.picard = self.picard;
        cfg.nonlocal_alpha0_factor = self.nonlocal_alpha0_factor;
        cfg.linearization = self.linearization;
        cfg.history_form = self.history_form;
        Ok((cfg, mms))
    }

    /// Run with the given resolution and measure the error at `T`.
    pub fn measure(&self, steps: usize, degree: usize) -> Result<StudyPoint> {
        let (cfg, mms) = self.problem(steps, degree)?;
        let space = cfg.build_space()?;
        let record = run(cfg).map_err(|e| e.error)?;
        let exact = mms.exact(self.final_time);
        let norms = space.error_norms(record.final_state(), &exact, record.alpha0)?;
        let error_grad = (norms.h1_standard.powi(2) - norms.l2.powi(2))
            .max(0.0)
            .sqrt();
        Ok(StudyPoint {
            steps,
            degree,
            delta: self.final_time / steps as f64,
            alpha0: record.alpha0,
            error_h1: norms.h1,
            error_l2: norms.l2,
            error_grad,
            error_h1_standard: norms.h1_standard,
            error_h1_ref: norms.h1,
            max_picard_iters: record.max_picard_iters(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyPoint {
    pub steps: usize,
    pub degree: usize,
    pub delta: f64,
    /// `α₀` of this run.
    pub alpha0: f64,
    /// `‖e‖₁` with this run's own `α₀`.
    pub error_h1: f64,
    pub error_l2: f64,
    /// `‖e'‖₀`.
    pub error_grad: f64,
    pub error_h1_standard: f64,
    /// `‖e‖₁` with the study's reference `α₀`, shared by all points.
    pub error_h1_ref: f64,
    pub max_picard_iters: usize,
}

impl StudyPoint {
    /// `(‖e‖₀² + α₀ ‖e'‖₀²)^{1/2}` for any weight.
    pub fn error_weighted(&self, alpha0: f64) -> f64 {
        (self.error_l2.powi(2) + alpha0 * self.error_grad.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyAxis {
    Time,
    Space,
}

/// Errors at `T` along one refinement axis and the fitted rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub axis: StudyAxis,
    /// `δ` for time studies, `N` for space studies, strictly monotone.
    pub values: Vec<f64>,
    pub points: Vec<StudyPoint>,
    /// Weight of the `‖·‖₁` norm the order is fitted in: `α₀` of the finest
    /// step. Each run's own `α₀` shrinks with `δ`, so per-run norms would mix
    /// norm change into the measured rate.
    pub reference_alpha0: f64,
    /// Log-log slope against `δ` (time) or semilog slope against `N` (space),
    /// fitted on `error_h1_ref`.
    pub fitted_order: f64,
}

impl ConvergenceStudy {
    /// Errors in the fixed reference norm.
    pub fn errors_h1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.error_h1_ref).collect()
    }

    /// Errors each measured with its own run's `α₀`.
    pub fn errors_h1_own(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.error_h1).collect()
    }

    pub fn errors_l2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.error_l2).collect()
    }

    pub fn max_picard_iters(&self) -> usize {
        self.points
            .iter()
            .map(|p| p.max_picard_iters)
            .max()
            .unwrap_or(0)
    }
}

fn strictly_monotone(values: &[f64]) -> bool {
    values.windows(2).all(|p| p[0] < p[1]) || values.windows(2).all(|p| p[0] > p[1])
}

fn measure_all<F>(count: usize, jobs: usize, f: F) -> Result<Vec<StudyPoint>>
where
    F: Fn(usize) -> Result<StudyPoint> + Send + Sync,
{
    if jobs <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    // collect keeps index order, so output does not depend on scheduling
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Refine `δ` at fixed `N`; `deltas` must divide `T` into whole steps.
pub fn temporal_order_study(
    setup: &StudySetup,
    deltas: &[f64],
    jobs: usize,
) -> Result<ConvergenceStudy> {
    if deltas.len() < 3 || !strictly_monotone(deltas) {
        return Err(Error::Contract(
            "temporal study needs >= 3 strictly monotone step sizes".into(),
        ));
    }
    let steps = deltas
        .iter()
        .map(|&d| steps_for(setup.final_time, d))
        .collect::<Result<Vec<_>>>()?;
    let mut points = measure_all(steps.len(), jobs, |i| setup.measure(steps[i], setup.degree))?;
    let reference_alpha0 = points
        .iter()
        .min_by(|a, b| a.delta.total_cmp(&b.delta))
        .map(|p| p.alpha0)
        .expect("at least three points");
    for p in &mut points {
        p.error_h1_ref = p.error_weighted(reference_alpha0);
    }
    let errors: Vec<f64> = points.iter().map(|p| p.error_h1_ref).collect();
    let fitted_order = fit_order(deltas, &errors, FitMode::LogLog)?;
    Ok(ConvergenceStudy {
        axis: StudyAxis::Time,
        values: deltas.to_vec(),
        points,
        reference_alpha0,
        fitted_order,
    })
}

/// Refine `N` at fixed `δ = T / steps`.
pub fn spatial_study(
    setup: &StudySetup,
    degrees: &[usize],
    jobs: usize,
) -> Result<ConvergenceStudy> {
    let values: Vec<f64> = degrees.iter().map(|&n| n as f64).collect();
    if degrees.len() < 3 || !strictly_monotone(&values) {
        return Err(Error::Contract(
            "spatial study needs >= 3 strictly monotone degrees".into(),
        ));
    }
    let points = measure_all(degrees.len(), jobs, |i| {
        setup.measure(setup.steps, degrees[i])
    })?;
    let reference_alpha0 = points[0].alpha0;
    let errors: Vec<f64> = points.iter().map(|p| p.error_h1_ref).collect();
    let fitted_order = fit_order(&values, &errors, FitMode::SemiLog)?;
    Ok(ConvergenceStudy {
        axis: StudyAxis::Space,
        values,
        points,
        reference_alpha0,
        fitted_order,
    })
}

/// `T / δ` when it is an integer to 1e-9 relative.
pub fn steps_for(final_time: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step size {delta} must be positive"
        )));
    }
    let ratio = final_time / delta;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
        return Err(Error::InvalidParameter(format!(
            "step size {delta} does not divide T = {final_time}"
        )));
    }
    Ok(k as usize)
}

/// Semilog slopes `(ln e_{i+1} - ln e_i) / (N_{i+1} - N_i)` between
/// consecutive points above `floor`.
pub fn semilog_slopes(degrees: &[f64], errors: &[f64], floor: f64) -> Vec<f64> {
    degrees
        .windows(2)
        .zip(errors.windows(2))
        .take_while(|(_, e)| e[1] > floor)
        .map(|(n, e)| (e[1].ln() - e[0].ln()) / (n[1] - n[0]))
        .collect()
}

/// Largest `‖convex form - difference form‖∞` of the history right-hand side
/// over a recorded trajectory.
pub fn scheme_form_defect(record: &RunRecord, weights: &L1Weights) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 0..record.trajectory.len() - 1 {
        let history = &record.trajectory[..=k];
        let a = history_combination(history, weights, k)?;
        let b = history_difference_form(history, weights, k)?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok(worst)
}

/// Classical implicit Euler for `u_t - u_xx = λ f(u)/(∫f)² + g` on the same
/// spectral space, with its own Picard loop. `config.alpha` is ignored.
pub fn backward_euler_reference(
    config: &ProblemConfig,
) -> std::result::Result<RunRecord, RunError> {
    let fail = |error: Error, partial: RunRecord| RunError {
        error,
        partial: Box::new(partial),
    };
    let empty = |alpha0: f64| RunRecord {
        times: Vec::new(),
        trajectory: Vec::new(),
        picard_iters: Vec::new(),
        picard_residuals: Vec::new(),
        l2_norms: Vec::new(),
        h1_norms: Vec::new(),
        alpha0,
    };
    let dt = config.grid.delta();
    let space = config.build_space().map_err(|e| fail(e, empty(dt)))?;
    let u0 = match &config.initial {
        InitialState::Function(f) => space.project_h1(f, dt).map_err(|e| fail(e, empty(dt)))?,
        InitialState::Coefficients(c) => c.clone(),
    };
    let factor: BandCholesky = space
        .system_matrix(dt)
        .cholesky()
        .map_err(|e| fail(e, empty(dt)))?;
    let scale = if config.nonlocal_alpha0_factor {
        dt
    } else {
        1.0
    };

    let mut rec = empty(dt);
    rec.times.push(0.0);
    rec.l2_norms.push(space.l2_norm(&u0));
    rec.h1_norms.push(space.h1_norm(&u0, dt));
    rec.picard_iters.push(0);
    rec.picard_residuals.push(0.0);
    rec.trajectory.push(u0);

    for k in 0..config.grid.steps() {
        let t = config.grid.time(k + 1);
        let prev = rec.trajectory[k].clone();
        let mut base = space.apply_mass(&prev);
        if let Some(src) = &config.source {
            let nodal: Vec<f64> = src
                .sample(t, &space.quadrature().nodes)
                .into_iter()
                .map(|g| dt * g)
                .collect();
            for (b, s) in base.iter_mut().zip(space.load_from_nodal(&nodal)) {
                *b += s;
            }
        }
        let mut current = prev;
        let mut iters = 0;
        let mut residual = 0.0;
        let mut history = Vec::new();
        loop {
            iters += 1;
            let mut rhs = base.clone();
            if config.lambda != 0.0 {
                let g = match nonlocal_load(
                    &current,
                    &config.conductivity,
                    config.lambda,
                    scale,
                    &space,
                ) {
                    Ok(g) => g,
                    Err(e) => return Err(fail(e, rec)),
                };
                for (r, v) in rhs.iter_mut().zip(g) {
                    *r += v;
                }
            }
            let next = CoefficientVector(factor.solve(&rhs));
            if config.lambda == 0.0 {
                current = next;
                break;
            }
            residual = next.max_abs_diff(&current);
            history.push(residual);
            current = next;
            if residual <= config.picard.tol {
                break;
            }
            if iters >= config.picard.max_iter || !residual.is_finite() {
                return Err(fail(
                    Error::NonConvergence {
                        step: k + 1,
                        iterations: iters,
                        residuals: history,
                    },
                    rec,
                ));
            }
        }
        rec.times.push(t);
        rec.l2_norms.push(space.l2_norm(&current));
        rec.h1_norms.push(space.h1_norm(&current, dt));
        rec.picard_iters.push(iters);
        rec.picard_residuals.push(residual);
        rec.trajectory.push(current);
    }
    Ok(rec)
}

/// L² error `‖u_exact(T) - u_N‖₀` of a final state on the reference rule.
pub fn final_l2_error(
    space: &SpectralSpace,
    state: &CoefficientVector,
    exact: &SpatialFunction,
) -> Result<f64> {
    let rule = lgl_rule(4 * space.degree())?;
    Ok(space.error_norms_with_rule(state, exact, 1.0, &rule).l2)
}
