//! Time marching of the fully discrete scheme.
//!
//! Each step solves
//!
//! ```text
//! (M + α₀S) c^{k+1} = M f^k + G(c^{k+1}) + α₀ (g(t_{k+1}), φ)
//! ```
//!
//! where `f^k` is the L1 history combination, `G` the nonlocal load and `g`
//! an optional forcing. The implicit nonlocal term is resolved by Picard
//! iteration seeded with `c^k`. The system matrix is factorized once per run.

use std::fmt;
use std::sync::Arc;

use crate::banded::BandCholesky;
use crate::error::{Error, Result};
use crate::nonlocal::{nonlocal_load, Conductivity};
use crate::spectral::{CoefficientVector, SpatialFunction, SpectralSpace};
use crate::time_fractional::{
    history_combination, history_difference_form, FractionalOrder, L1Weights, TimeGrid,
};

/// A forcing `g(x, t)` sampled on a set of points at one time.
pub trait SourceTerm: Send + Sync {
    fn sample(&self, t: f64, xs: &[f64]) -> Vec<f64>;
}

/// Wraps a pointwise closure as a [`SourceTerm`].
pub struct FnSource<F>(pub F);

impl<F> SourceTerm for FnSource<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn sample(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| (self.0)(x, t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// How the implicit nonlocal term is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linearization {
    /// Fixed-point iteration to tolerance.
    #[default]
    Picard,
    /// Nonlocal term frozen at `u^k`: one linear solve per step.
    Lagged,
}

/// Which algebraic form of the history term assembles the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistoryForm {
    /// `(1-b_1) u^k + Σ (b_j - b_{j+1}) u^{k-j} + b_k u^0`.
    #[default]
    Convex,
    /// `b_0 u^k - Σ b_j (u^{k+1-j} - u^{k-j})`.
    Difference,
}

#[derive(Clone)]
pub enum InitialState {
    /// Projected onto the space with `π¹_N`.
    Function(SpatialFunction),
    /// Taken as-is; length must equal the space dimension.
    Coefficients(CoefficientVector),
}

impl fmt::Debug for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Function(_) => f.write_str("InitialState::Function"),
            Self::Coefficients(c) => write!(f, "InitialState::Coefficients({c:?})"),
        }
    }
}

#[derive(Clone)]
pub struct ProblemConfig {
    pub alpha: FractionalOrder,
    pub lambda: f64,
    pub grid: TimeGrid,
    pub degree: usize,
    pub conductivity: Conductivity,
    pub initial: InitialState,
    pub source: Option<Arc<dyn SourceTerm>>,
    pub picard: PicardOptions,
    pub nonlocal_alpha0_factor: bool,
    pub linearization: Linearization,
    pub history_form: HistoryForm,
    /// LGL points used for the nonlinear inner products; defaults to `3N + 16`.
    pub quadrature_points: Option<usize>,
}

impl fmt::Debug for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemConfig")
            .field("alpha", &self.alpha)
            .field("lambda", &self.lambda)
            .field("grid", &self.grid)
            .field("degree", &self.degree)
            .field("conductivity", &self.conductivity.id())
            .field("initial", &self.initial)
            .field("source", &self.source.is_some())
            .field("picard", &self.picard)
            .field("nonlocal_alpha0_factor", &self.nonlocal_alpha0_factor)
            .field("linearization", &self.linearization)
            .field("history_form", &self.history_form)
            .finish()
    }
}

impl ProblemConfig {
    /// Defaults for everything but the physical data.
    pub fn new(
        alpha: FractionalOrder,
        lambda: f64,
        grid: TimeGrid,
        degree: usize,
        conductivity: Conductivity,
        initial: InitialState,
    ) -> Self {
        Self {
            alpha,
            lambda,
            grid,
            degree,
            conductivity,
            initial,
            source: None,
            picard: PicardOptions::default(),
            nonlocal_alpha0_factor: true,
            linearization: Linearization::Picard,
            history_form: HistoryForm::Convex,
            quadrature_points: None,
        }
    }

    pub fn with_source(mut self, source: Arc<dyn SourceTerm>) -> Self {
        self.source = Some(source);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.picard.tol > 0.0) || !self.picard.tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "picard tolerance must be positive, got {}",
                self.picard.tol
            )));
        }
        if self.picard.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "picard max_iter must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<SpectralSpace> {
        let q = self
            .quadrature_points
            .unwrap_or(crate::spectral::default_quadrature_points(self.degree));
        SpectralSpace::with_quadrature_points(self.degree, q)
    }
}

/// Output of a run: states `u^0..=u^K` plus per-step diagnostics.
///
/// Per-step vectors are indexed by state, entry 0 describing the initial
/// state (0 iterations, residual 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub trajectory: Vec<CoefficientVector>,
    pub picard_iters: Vec<usize>,
    pub picard_residuals: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub h1_norms: Vec<f64>,
    pub alpha0: f64,
}

impl RunRecord {
    fn new(alpha0: f64) -> Self {
        Self {
            times: Vec::new(),
            trajectory: Vec::new(),
            picard_iters: Vec::new(),
            picard_residuals: Vec::new(),
            l2_norms: Vec::new(),
            h1_norms: Vec::new(),
            alpha0,
        }
    }

    pub fn final_state(&self) -> &CoefficientVector {
        self.trajectory
            .last()
            .expect("record holds the initial state")
    }

    pub fn max_picard_iters(&self) -> usize {
        self.picard_iters.iter().copied().max().unwrap_or(0)
    }
}

/// A failed run together with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct RunError {
    pub error: Error,
    pub partial: Box<RunRecord>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} completed steps)",
            self.error,
            self.partial.trajectory.len().saturating_sub(1)
        )
    }
}

impl std::error::Error for RunError {}

/// Solver state for one run.
pub struct Solver {
    config: ProblemConfig,
    space: SpectralSpace,
    weights: L1Weights,
    factor: BandCholesky,
    nonlocal_scale: f64,
    record: RunRecord,
}

impl Solver {
    /// Projects the initial datum and factorizes `M + α₀S`.
    pub fn new(config: ProblemConfig) -> Result<Self> {
        config.validate()?;
        let space = config.build_space()?;
        let weights = L1Weights::compute(config.alpha, config.grid);
        let alpha0 = weights.alpha0();
        let u0 = match &config.initial {
            InitialState::Function(f) => space.project_h1(f, alpha0)?,
            InitialState::Coefficients(c) => {
                if c.len() != space.dim() {
                    return Err(Error::Contract(format!(
                        "initial coefficients have length {}, space dimension is {}",
                        c.len(),
                        space.dim()
                    )));
                }
                c.clone()
            }
        };
        let factor = space.system_matrix(alpha0).cholesky()?;
        let nonlocal_scale = if config.nonlocal_alpha0_factor {
            alpha0
        } else {
            1.0
        };
        let mut record = RunRecord::new(alpha0);
        record.times.push(0.0);
        record.l2_norms.push(space.l2_norm(&u0));
        record.h1_norms.push(space.h1_norm(&u0, alpha0));
        record.trajectory.push(u0);
        record.picard_iters.push(0);
        record.picard_residuals.push(0.0);
        Ok(Self {
            config,
            space,
            weights,
            factor,
            nonlocal_scale,
            record,
        })
    }

    pub fn space(&self) -> &SpectralSpace {
        &self.space
    }

    pub fn weights(&self) -> &L1Weights {
        &self.weights
    }

    pub fn alpha0(&self) -> f64 {
        self.weights.alpha0()
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }

    /// Index `k` of the latest computed state `u^k`.
    pub fn current_step(&self) -> usize {
        self.record.trajectory.len() - 1
    }

    pub fn is_finished(&self) -> bool {
        self.current_step() >= self.config.grid.steps()
    }

    /// History right-hand side `f^k` for the next step, in the configured form.
    pub fn history_rhs(&self) -> Result<CoefficientVector> {
        let k = self.current_step();
        match self.config.history_form {
            HistoryForm::Convex => history_combination(&self.record.trajectory, &self.weights, k),
            HistoryForm::Difference => {
                history_difference_form(&self.record.trajectory, &self.weights, k)
            }
        }
    }

    fn source_load(&self, t: f64) -> Option<Vec<f64>> {
        self.config.source.as_ref().map(|src| {
            let nodal: Vec<f64> = src
                .sample(t, &self.space.quadrature().nodes)
                .into_iter()
                .map(|g| self.alpha0() * g)
                .collect();
            self.space.load_from_nodal(&nodal)
        })
    }

    fn nonlocal(&self, u: &CoefficientVector) -> Result<Vec<f64>> {
        nonlocal_load(
            u,
            &self.config.conductivity,
            self.config.lambda,
            self.nonlocal_scale,
            &self.space,
        )
    }

    /// Advance from `u^k` to `u^{k+1}` and return the new state.
    pub fn step(&mut self) -> Result<&CoefficientVector> {
        let k = self.current_step();
        if k >= self.config.grid.steps() {
            return Err(Error::Contract(format!(
                "run already reached the final step K = {}",
                self.config.grid.steps()
            )));
        }
        let t_next = self.config.grid.time(k + 1);
        let fk = self.history_rhs()?;
        let mut base = self.space.apply_mass(&fk);
        if let Some(src) = self.source_load(t_next) {
            for (b, s) in base.iter_mut().zip(src) {
                *b += s;
            }
        }

        let previous = &self.record.trajectory[k];
        let (next, iters, residual) = if self.config.lambda == 0.0 {
            (CoefficientVector(self.factor.solve(&base)), 1, 0.0)
        } else {
            match self.config.linearization {
                Linearization::Lagged => {
                    let g = self.nonlocal(previous)?;
                    let rhs: Vec<f64> = base.iter().zip(&g).map(|(b, g)| b + g).collect();
                    (CoefficientVector(self.factor.solve(&rhs)), 1, 0.0)
                }
                Linearization::Picard => self.picard(&base, previous.clone(), k + 1)?,
            }
        };

        let alpha0 = self.alpha0();
        self.record.times.push(t_next);
        self.record.l2_norms.push(self.space.l2_norm(&next));
        self.record.h1_norms.push(self.space.h1_norm(&next, alpha0));
        self.record.picard_iters.push(iters);
        self.record.picard_residuals.push(residual);
        self.record.trajectory.push(next);
        Ok(self.record.trajectory.last().expect("just pushed"))
    }

    fn picard(
        &self,
        base: &[f64],
        mut current: CoefficientVector,
        step: usize,
    ) -> Result<(CoefficientVector, usize, f64)> {
        let opts = self.config.picard;
        let mut residuals = Vec::new();
        for iter in 1..=opts.max_iter {
            let g = self.nonlocal(&current)?;
            let rhs: Vec<f64> = base.iter().zip(&g).map(|(b, g)| b + g).collect();
            let next = CoefficientVector(self.factor.solve(&rhs));
            let residual = next.max_abs_diff(&current);
            residuals.push(residual);
            current = next;
            if residual <= opts.tol {
                return Ok((current, iter, residual));
            }
            if !residual.is_finite() {
                break;
            }
        }
        Err(Error::NonConvergence {
            step,
            iterations: residuals.len(),
            residuals,
        })
    }

    /// Run to the final time.
    pub fn run_to_end(mut self) -> std::result::Result<RunRecord, RunError> {
        while !self.is_finished() {
            if let Err(error) = self.step() {
                return Err(RunError {
                    error,
                    partial: Box::new(self.record),
                });
            }
        }
        Ok(self.record)
    }
}

/// Discrete `W^{1,∞}` check of an initial datum on a space's quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InitialDatumReport {
    pub max_abs: f64,
    /// Largest `|u₀(x_{i+1}) - u₀(x_i)| / (x_{i+1} - x_i)` over adjacent nodes.
    pub max_difference_quotient: f64,
}

/// Boundary values within tolerance, finite values and finite difference
/// quotients on the quadrature grid.
pub fn check_initial_datum(
    u0: &SpatialFunction,
    space: &SpectralSpace,
) -> Result<InitialDatumReport> {
    u0.check_dirichlet()?;
    let nodes = &space.quadrature().nodes;
    let values: Vec<f64> = nodes.iter().map(|&x| u0.value(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Hypothesis(
            "initial datum is not finite on the grid".into(),
        ));
    }
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let max_difference_quotient = nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
        .fold(0.0_f64, f64::max);
    if !max_difference_quotient.is_finite() {
        return Err(Error::Hypothesis(
            "initial datum has unbounded difference quotients".into(),
        ));
    }
    Ok(InitialDatumReport {
        max_abs,
        max_difference_quotient,
    })
}

/// Initialize and march the whole run.
pub fn run(config: ProblemConfig) -> std::result::Result<RunRecord, RunError> {
    let solver = Solver::new(config).map_err(|error| RunError {
        error,
        partial: Box::new(RunRecord::new(f64::NAN)),
    })?;
    solver.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(alpha: f64, lambda: f64, t: f64, k: usize, n: usize) -> ProblemConfig {
        ProblemConfig::new(
            FractionalOrder::new(alpha).unwrap(),
            lambda,
            TimeGrid::new(t, k).unwrap(),
            n,
            Conductivity::by_name("shifted_sine").unwrap(),
            InitialState::Function(SpatialFunction::sin_pi()),
        )
    }

    #[test]
    fn projected_initial_state() {
        let mut cfg = base_config(0.5, 0.0, 1.0, 10, 12);
        cfg.initial = InitialState::Function(SpatialFunction::basis(2));
        let solver = Solver::new(cfg).unwrap();
        let u0 = &solver.record().trajectory[0];
        assert!(u0.max_abs_diff(&CoefficientVector::unit(11, 2)) < 1e-12);
        assert!((solver.alpha0() - 0.28024956081989644).abs() < 1e-14);
    }

    #[test]
    fn boundary_violation_rejected() {
        let mut cfg = base_config(0.5, 0.0, 1.0, 4, 8);
        cfg.initial = InitialState::Function(SpatialFunction::new(|x| 1.0 + x));
        assert!(matches!(Solver::new(cfg), Err(Error::Boundary { .. })));
    }

    #[test]
    fn linear_problem_takes_one_iteration() {
        let mut solver = Solver::new(base_config(0.5, 0.0, 1.0, 4, 8)).unwrap();
        solver.step().unwrap();
        assert_eq!(solver.record().picard_iters[1], 1);
    }

    #[test]
    fn step_past_end_is_error() {
        let mut solver = Solver::new(base_config(0.5, 0.0, 1.0, 1, 6)).unwrap();
        solver.step().unwrap();
        assert!(solver.is_finished());
        assert!(solver.step().is_err());
    }

    #[test]
    fn nonlinear_step_converges() {
        let rec = run(base_config(0.5, 0.5, 1.0, 8, 12)).unwrap();
        assert_eq!(rec.trajectory.len(), 9);
        assert!(rec.picard_residuals.iter().all(|&r| r <= 1e-12));
        assert!(rec.max_picard_iters() <= 25);
    }

    #[test]
    fn nonconvergence_carries_partial_record() {
        let mut cfg = base_config(0.5, 0.5, 1.0, 8, 12);
        cfg.picard.max_iter = 1;
        let err = run(cfg).unwrap_err();
        assert!(matches!(err.error, Error::NonConvergence { step: 1, .. }));
        assert_eq!(err.partial.trajectory.len(), 1);
    }

    #[test]
    fn initial_datum_check() {
        let space = SpectralSpace::new(12).unwrap();
        let rep = check_initial_datum(&SpatialFunction::sin_pi(), &space).unwrap();
        assert!(rep.max_abs <= 1.0);
        assert!(rep.max_difference_quotient <= std::f64::consts::PI + 1e-9);
        let bad = SpatialFunction::new(|x| 0.5 * (1.0 - x));
        assert!(check_initial_datum(&bad, &space).is_err());
    }

    #[test]
    fn invalid_options() {
        let mut cfg = base_config(0.5, 0.5, 1.0, 8, 12);
        cfg.picard.tol = 0.0;
        assert!(Solver::new(cfg).is_err());
        let cfg = base_config(0.5, -1.0, 1.0, 8, 12);
        assert!(Solver::new(cfg).is_err());
    }
}
