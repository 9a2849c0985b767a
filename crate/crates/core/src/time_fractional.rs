//! L1 discretization of the Caputo derivative on a uniform grid.
//!
//! With `b_j = (j+1)^{1-α} - j^{1-α}` the discrete operator is
//!
//! ```text
//! L^α u(t_{k+1}) = 1/Γ(2-α) Σ_{j=0}^{k} b_j (u(t_{k+1-j}) - u(t_{k-j})) / δ^α
//! ```
//!
//! and multiplying the time-discrete equation by `α₀ = Γ(2-α) δ^α` turns the
//! history into the convex combination returned by [`history_combination`].

use crate::error::{Error, Result};
use crate::spectral::CoefficientVector;

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Caputo order `α`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "fractional order must lie in (0, 1), got {alpha}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Uniform grid `t_k = k δ`, `k = 0..=K`, with `δ = T / K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    steps: usize,
    delta: f64,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("time grid needs K >= 1".into()));
        }
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive and finite, got {final_time}"
            )));
        }
        Ok(Self {
            final_time,
            steps,
            delta: final_time / steps as f64,
        })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Number of steps `K`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `t_k`; returns `T` exactly for `k = K`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.final_time
        } else {
            k as f64 * self.delta
        }
    }
}

/// The L1 weights `b_j` and the scale `α₀ = Γ(2-α) δ^α`.
///
/// `b` holds `b_0..=b_K`: one entry past the last weight a `K`-step run uses,
/// so the telescoping identity can be checked at every `k < K`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    alpha: FractionalOrder,
    grid: TimeGrid,
    b: Vec<f64>,
    alpha0: f64,
}

/// `(j+1)^{1-α} - j^{1-α}`.
///
/// Evaluated directly. The absolute cancellation error is bounded by about
/// `ε (j+1)^{1-α}`, below 1e-12 for `j <= 10⁴`.
pub fn l1_weight(alpha: f64, j: usize) -> f64 {
    let e = 1.0 - alpha;
    let jf = j as f64;
    (jf + 1.0).powf(e) - jf.powf(e)
}

impl L1Weights {
    pub fn compute(alpha: FractionalOrder, grid: TimeGrid) -> Self {
        let a = alpha.value();
        let b = (0..=grid.steps()).map(|j| l1_weight(a, j)).collect();
        let alpha0 = gamma(2.0 - a) * grid.delta().powf(a);
        Self {
            alpha,
            grid,
            b,
            alpha0,
        }
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `b_0..=b_K`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Largest deviation from 1 of `Σ_{j=0}^{k}(b_j - b_{j+1}) + b_{k+1}`
    /// over `k < K`, together with whether positivity and strict decrease
    /// hold.
    pub fn identity_defect(&self) -> (f64, bool) {
        let b = &self.b;
        let ordered = b.iter().all(|&v| v > 0.0) && b.windows(2).all(|p| p[0] > p[1]);
        let mut worst = (b[0] - 1.0).abs();
        let mut partial = 0.0;
        for k in 0..self.grid.steps() {
            partial += b[k] - b[k + 1];
            worst = worst.max((partial + b[k + 1] - 1.0).abs());
        }
        (worst, ordered)
    }
}

/// Convex combination of past states
/// `f^k = (1-b_1) u^k + Σ_{j=1}^{k-1} (b_j - b_{j+1}) u^{k-j} + b_k u^0`,
/// with `f^0 = u^0`. `history` holds `u^0..=u^k`.
pub fn history_combination(
    history: &[CoefficientVector],
    weights: &L1Weights,
    k: usize,
) -> Result<CoefficientVector> {
    check_history(history, weights, k)?;
    if k == 0 {
        return Ok(history[0].clone());
    }
    let b = weights.b();
    let mut out = CoefficientVector::zeros(history[0].len());
    out.axpy(1.0 - b[1], &history[k]);
    for j in 1..k {
        out.axpy(b[j] - b[j + 1], &history[k - j]);
    }
    out.axpy(b[k], &history[0]);
    Ok(out)
}

/// The same right-hand side in difference form,
/// `b_0 u^k - Σ_{j=1}^{k} b_j (u^{k+1-j} - u^{k-j})`.
pub fn history_difference_form(
    history: &[CoefficientVector],
    weights: &L1Weights,
    k: usize,
) -> Result<CoefficientVector> {
    check_history(history, weights, k)?;
    let b = weights.b();
    let mut out = history[k].clone();
    for c in out.0.iter_mut() {
        *c *= b[0];
    }
    for j in 1..=k {
        let newer = &history[k + 1 - j];
        let older = &history[k - j];
        for ((o, n), p) in out.0.iter_mut().zip(&newer.0).zip(&older.0) {
            *o -= b[j] * (n - p);
        }
    }
    Ok(out)
}

fn check_history(history: &[CoefficientVector], weights: &L1Weights, k: usize) -> Result<()> {
    if k >= weights.grid().steps() {
        return Err(Error::Contract(format!(
            "history index k = {k} must be below K = {}",
            weights.grid().steps()
        )));
    }
    if history.len() != k + 1 {
        return Err(Error::Contract(format!(
            "history holds {} states, expected k + 1 = {}",
            history.len(),
            k + 1
        )));
    }
    let len = history[0].len();
    if history.iter().any(|h| h.len() != len) {
        return Err(Error::Contract("history states differ in length".into()));
    }
    Ok(())
}

/// `L^α u(t_{k+1})` from scalar samples `u(t_0)..=u(t_{k+1})`.
pub fn l1_caputo_apply(samples: &[f64], weights: &L1Weights) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Contract(format!(
            "L1 operator needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let k = samples.len() - 2;
    if k >= weights.grid().steps() {
        return Err(Error::Contract(format!(
            "{} samples exceed the {}-step grid",
            samples.len(),
            weights.grid().steps()
        )));
    }
    let b = weights.b();
    let sum: f64 = (0..=k)
        .map(|j| b[j] * (samples[k + 1 - j] - samples[k - j]))
        .sum();
    let a = weights.alpha().value();
    Ok(sum / (gamma(2.0 - a) * weights.grid().delta().powf(a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(alpha: f64, t: f64, k: usize) -> L1Weights {
        L1Weights::compute(
            FractionalOrder::new(alpha).unwrap(),
            TimeGrid::new(t, k).unwrap(),
        )
    }

    #[test]
    fn gamma_reference_values() {
        // mpmath, 40 digits
        let table = [
            (1.5, 0.886226925452758),
            (1.7, 0.9086387328532904),
            (1.1, 0.9513507698668732),
            (1.999, 0.9995776274237292),
            (1.001, 0.9994237724845955),
            (2.5, 1.329340388179137),
        ];
        for (x, g) in table {
            assert!(((gamma(x) - g) / g).abs() < 1e-14, "Γ({x})");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn grid_endpoint_is_exact() {
        let g = TimeGrid::new(0.7, 3).unwrap();
        assert_eq!(g.time(3), 0.7);
        assert_eq!(g.time(0), 0.0);
    }

    #[test]
    fn first_weights() {
        let w = weights(0.5, 1.0, 10);
        assert_eq!(w.b()[0], 1.0);
        assert!((w.b()[1] - 0.41421356237309515).abs() < 1e-15);
        let w = weights(0.5, 1.0, 10);
        assert!((w.alpha0() - 0.28024956081989644).abs() < 1e-14);
        let near_one = weights(0.999, 1.0, 10);
        assert!((near_one.alpha0() - 0.1).abs() < 0.001);
    }

    #[test]
    fn weight_cancellation_spot_check() {
        // b_9999 from 40-digit arithmetic
        for (alpha, exact) in [
            (0.1, 0.35829824504610613),
            (0.5, 0.005000125006250391),
            (0.9, 2.5119994735583934e-05),
        ] {
            assert!((l1_weight(alpha, 9999) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn history_small_k() {
        let w = weights(0.5, 1.0, 4);
        let u0 = CoefficientVector(vec![0.0, 1.0]);
        let u1 = CoefficientVector(vec![1.0, 0.0]);
        let f0 = history_combination(std::slice::from_ref(&u0), &w, 0).unwrap();
        assert_eq!(f0, u0);
        let f1 = history_combination(&[u0, u1], &w, 1).unwrap();
        assert!((f1[0] - 0.5857864376269049).abs() < 1e-15);
        assert!((f1[1] - 0.41421356237309515).abs() < 1e-15);
    }

    #[test]
    fn history_contract() {
        let w = weights(0.5, 1.0, 4);
        let u = CoefficientVector(vec![1.0, 2.0]);
        assert!(history_combination(std::slice::from_ref(&u), &w, 1).is_err());
        assert!(history_combination(&[u.clone(), CoefficientVector(vec![1.0])], &w, 1).is_err());
        assert!(history_combination(&vec![u; 5], &w, 4).is_err());
        assert!(l1_caputo_apply(&[1.0], &w).is_err());
    }

    #[test]
    fn constant_history_is_fixed() {
        let w = weights(0.3, 2.0, 50);
        let v = CoefficientVector(vec![0.25, -3.0, 7.5]);
        for k in [0, 1, 2, 17, 49] {
            let f = history_combination(&vec![v.clone(); k + 1], &w, k).unwrap();
            assert!(f.max_abs_diff(&v) < 1e-13);
        }
    }

    #[test]
    fn caputo_of_constant_and_linear() {
        let w = weights(0.4, 1.0, 20);
        assert_eq!(l1_caputo_apply(&[3.0; 8], &w).unwrap(), 0.0);
        let dt = w.grid().delta();
        let samples: Vec<f64> = (0..=20).map(|i| 2.0 + 5.0 * i as f64 * dt).collect();
        let got = l1_caputo_apply(&samples, &w).unwrap();
        let exact = 5.0 * 1.0_f64.powf(0.6) / gamma(1.6);
        assert!(((got - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn identities_hold() {
        let (defect, ordered) = weights(0.7, 1.0, 1000).identity_defect();
        assert!(ordered);
        assert!(defect < 1e-13);
    }
}
