//! The nonlocal source `λ f(u) / (∫_Ω f(u) dx)²` and the conductivity registry.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{CoefficientVector, ScalarFn, SpectralSpace};

/// Below this the denominator `∫ f(u)` is treated as collapsed.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Names accepted by [`Conductivity::by_name`].
pub const REGISTERED: [&str; 3] = ["const_one", "shifted_sine", "sat_quadratic"];

/// A conductivity `f` together with the constants of its growth envelope
/// `c_lower <= f(ξ) <= c_upper (|ξ|^{β+1} + 1)`.
#[derive(Clone)]
pub struct Conductivity {
    id: String,
    f: ScalarFn,
    f_prime: ScalarFn,
    lower_bound: f64,
    upper_constant: f64,
    beta: f64,
    lipschitz: f64,
    checked: bool,
}

impl fmt::Debug for Conductivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Conductivity")
            .field("id", &self.id)
            .field("lower_bound", &self.lower_bound)
            .field("upper_constant", &self.upper_constant)
            .field("beta", &self.beta)
            .field("lipschitz", &self.lipschitz)
            .field("checked", &self.checked)
            .finish()
    }
}

impl Conductivity {
    pub fn by_name(id: &str) -> Result<Self> {
        let c = match id {
            "const_one" => Self::registered(id, |_| 1.0, |_| 0.0, 1.0, 1.0, 0.0),
            "shifted_sine" => Self::registered(id, |x| 2.0 + x.sin(), f64::cos, 1.0, 3.0, 1.0),
            "sat_quadratic" => Self::registered(
                id,
                |x| 1.0 + x * x / (1.0 + x * x),
                |x| 2.0 * x / ((1.0 + x * x) * (1.0 + x * x)),
                1.0,
                2.0,
                // max of 2ξ/(1+ξ²)² at ξ = 1/√3
                3.0 * 3.0_f64.sqrt() / 8.0,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown conductivity '{other}' (known: {})",
                    REGISTERED.join(", ")
                )))
            }
        };
        Ok(c)
    }

    fn registered<F, D>(id: &str, f: F, f_prime: D, lower: f64, upper: f64, lipschitz: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            lower_bound: lower,
            upper_constant: upper,
            beta: 0.0,
            lipschitz,
            checked: true,
        }
    }

    /// A user-supplied conductivity. Its metadata is taken on trust and the
    /// hypothesis report marks it unchecked.
    #[allow(clippy::too_many_arguments)]
    pub fn custom<F, D>(
        id: &str,
        f: F,
        f_prime: D,
        lower_bound: f64,
        upper_constant: f64,
        beta: f64,
        lipschitz: f64,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            lower_bound,
            upper_constant,
            beta,
            lipschitz,
            checked: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, xi: f64) -> f64 {
        (self.f)(xi)
    }

    pub fn eval_prime(&self, xi: f64) -> f64 {
        (self.f_prime)(xi)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_registered(&self) -> bool {
        self.checked
    }
}

/// `∫_{-1}^{1} f(u_N(x)) dx` on the space's quadrature rule.
pub fn integral_f(
    u: &CoefficientVector,
    cond: &Conductivity,
    space: &SpectralSpace,
) -> Result<f64> {
    let values = space.values_at_nodes(u);
    integral_from_nodal(&values, cond, space)
}

fn integral_from_nodal(values: &[f64], cond: &Conductivity, space: &SpectralSpace) -> Result<f64> {
    let weights = &space.quadrature().weights;
    let integral: f64 = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * cond.eval(v))
        .sum();
    if !(integral > DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateDenominator(integral));
    }
    Ok(integral)
}

/// Load vector `g_i = scale · λ (f(u_N), φ_i) / (∫ f(u_N))²`.
///
/// The time stepper passes `scale = α₀`.
pub fn nonlocal_load(
    u: &CoefficientVector,
    cond: &Conductivity,
    lambda: f64,
    scale: f64,
    space: &SpectralSpace,
) -> Result<Vec<f64>> {
    let values = space.values_at_nodes(u);
    let denom = integral_from_nodal(&values, cond, space)?;
    let factor = scale * lambda / (denom * denom);
    let nodal: Vec<f64> = values.iter().map(|&v| factor * cond.eval(v)).collect();
    Ok(space.load_from_nodal(&nodal))
}

/// Result of sampling a conductivity against its hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub id: String,
    pub range: (f64, f64),
    pub samples: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// Largest `|f(ξ_{i+1}) - f(ξ_i)| / |ξ_{i+1} - ξ_i|` over adjacent samples.
    pub lipschitz_estimate: f64,
    /// Largest sampled `|f'(ξ)|`.
    pub max_abs_derivative: f64,
    pub positive: bool,
    pub envelope_holds: bool,
    /// Empirical Lipschitz constant stays within the registered one.
    pub lipschitz_consistent: bool,
    /// False for user-supplied conductivities whose metadata is unverified.
    pub checked: bool,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.positive && self.envelope_holds && self.lipschitz_consistent
    }
}

/// Sample `f` at `samples` uniformly spaced points of `range`.
pub fn hypothesis_check(
    cond: &Conductivity,
    range: (f64, f64),
    samples: usize,
) -> Result<HypothesisReport> {
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "hypothesis check needs at least 2 samples".into(),
        ));
    }
    let (a, b) = range;
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "empty sampling range [{a}, {b}]"
        )));
    }
    let h = (b - a) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|i| a + i as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| cond.eval(x)).collect();

    let min_value = fs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_value = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lipschitz_estimate = xs
        .windows(2)
        .zip(fs.windows(2))
        .map(|(x, f)| ((f[1] - f[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max);
    let max_abs_derivative = xs
        .iter()
        .map(|&x| cond.eval_prime(x).abs())
        .fold(0.0, f64::max);

    let tol = 1e-12;
    let envelope_holds = xs.iter().zip(&fs).all(|(&x, &f)| {
        let upper = cond.upper_constant * (x.abs().powf(cond.beta + 1.0) + 1.0);
        f >= cond.lower_bound - tol && f <= upper + tol
    });
    let positive = min_value > 0.0 && fs.iter().all(|f| f.is_finite());
    let bound = cond.lipschitz * (1.0 + 1e-9) + 1e-12;
    let lipschitz_consistent = lipschitz_estimate <= bound && max_abs_derivative <= bound;

    Ok(HypothesisReport {
        id: cond.id.clone(),
        range,
        samples,
        min_value,
        max_value,
        lipschitz_estimate,
        max_abs_derivative,
        positive,
        envelope_holds,
        lipschitz_consistent,
        checked: cond.checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpatialFunction;

    #[test]
    fn unknown_name_is_config_error() {
        assert!(matches!(
            Conductivity::by_name("copper"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn integral_of_constant_conductivity() {
        let space = SpectralSpace::new(8).unwrap();
        let u = CoefficientVector((0..7).map(|i| (i as f64).cos()).collect());
        let one = Conductivity::by_name("const_one").unwrap();
        assert!((integral_f(&u, &one, &space).unwrap() - 2.0).abs() < 1e-13);
        let sine = Conductivity::by_name("shifted_sine").unwrap();
        let zero = CoefficientVector::zeros(7);
        assert!((integral_f(&zero, &sine, &space).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn load_closed_form_for_constant_f() {
        let space = SpectralSpace::new(6).unwrap();
        let one = Conductivity::by_name("const_one").unwrap();
        let u = CoefficientVector::zeros(5);
        let g = nonlocal_load(&u, &one, 4.0, 1.0, &space).unwrap();
        // ∫φ_0 = 2, ∫φ_k = 0 for k >= 1
        assert!((g[0] - 2.0).abs() < 1e-13);
        for gi in &g[1..] {
            assert!(gi.abs() < 1e-13);
        }
        let zero = nonlocal_load(&u, &one, 0.0, 1.0, &space).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn load_is_linear_in_lambda() {
        let space = SpectralSpace::new(10).unwrap();
        let sine = Conductivity::by_name("shifted_sine").unwrap();
        let u = space.project_h1(&SpatialFunction::sin_pi(), 1.0).unwrap();
        let g1 = nonlocal_load(&u, &sine, 0.3, 0.5, &space).unwrap();
        let g2 = nonlocal_load(&u, &sine, 0.6, 0.5, &space).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn degenerate_denominator() {
        let space = SpectralSpace::new(4).unwrap();
        let zero = Conductivity::custom("zero", |_| 0.0, |_| 0.0, 0.0, 1.0, 0.0, 0.0);
        let u = CoefficientVector::zeros(3);
        assert!(matches!(
            integral_f(&u, &zero, &space),
            Err(Error::DegenerateDenominator(_))
        ));
        assert!(nonlocal_load(&u, &zero, 1.0, 1.0, &space).is_err());
    }

    #[test]
    fn registered_conductivities_pass() {
        for id in REGISTERED {
            let c = Conductivity::by_name(id).unwrap();
            let r = hypothesis_check(&c, (-10.0, 10.0), 2001).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.checked);
        }
        let one = hypothesis_check(
            &Conductivity::by_name("const_one").unwrap(),
            (-10.0, 10.0),
            101,
        )
        .unwrap();
        assert_eq!(one.min_value, 1.0);
        assert_eq!(one.lipschitz_estimate, 0.0);
        let sine = hypothesis_check(
            &Conductivity::by_name("shifted_sine").unwrap(),
            (-10.0, 10.0),
            4001,
        )
        .unwrap();
        assert!(sine.min_value >= 1.0);
        assert!(sine.lipschitz_estimate <= 1.0 + 1e-9);
    }

    #[test]
    fn identity_fails_positivity() {
        let id = Conductivity::custom("identity", |x| x, |_| 1.0, 1e-3, 1.0, 0.0, 1.0);
        let r = hypothesis_check(&id, (-10.0, 10.0), 101).unwrap();
        assert!(!r.positive);
        assert!(!r.passed());
        assert!(!r.checked);
    }

    #[test]
    fn too_few_samples() {
        let c = Conductivity::by_name("const_one").unwrap();
        assert!(hypothesis_check(&c, (0.0, 1.0), 1).is_err());
    }
}
