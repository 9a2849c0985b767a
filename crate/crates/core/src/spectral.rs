//! Legendre-Galerkin discretization of `H¹₀(-1, 1) ∩ P_N`.
//!
//! The basis is `φ_k = L_k - L_{k+2}` for `k = 0..=N-2`. Each `φ_k` vanishes
//! at `±1`; the stiffness matrix is diagonal and the mass matrix couples only
//! indices of equal parity two apart.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use twofloat::TwoFloat;

use crate::banded::SymBandMatrix;
use crate::error::{Error, Result};
use crate::quadrature::{legendre_table_with_derivative, lgl_rule, QuadratureRule};

/// Extra quadrature points beyond `3N`. Nonlinear integrands `f(u_N) φ_i`
/// are far from degree-`2N` polynomials: with `N + 16` points the load
/// carries aliasing errors near 1e-8 at `N = 32`, and rational `f` with
/// poles near the real axis need more still.
pub const DEFAULT_OVERSAMPLING: usize = 16;

/// Default LGL point count for degree `n`: `3n + 16`.
pub fn default_quadrature_points(n: usize) -> usize {
    3 * n + DEFAULT_OVERSAMPLING
}

/// Tolerance on `|ψ(±1)|` for functions entering the Dirichlet space.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Step of the central difference used when no analytic derivative is given.
pub const FD_STEP: f64 = 1e-6;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function on `[-1, 1]`, optionally with analytic derivatives.
#[derive(Clone)]
pub struct SpatialFunction {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    second_derivative: Option<ScalarFn>,
}

impl fmt::Debug for SpatialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialFunction")
            .field("analytic_derivative", &self.derivative.is_some())
            .field(
                "analytic_second_derivative",
                &self.second_derivative.is_some(),
            )
            .finish()
    }
}

impl SpatialFunction {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: None,
            second_derivative: None,
        }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_second_derivative<F>(mut self, second: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.second_derivative = Some(Arc::new(second));
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Analytic derivative when available, otherwise a second-order finite
    /// difference with step [`FD_STEP`] (one-sided at the endpoints). The
    /// fallback costs roughly eight digits of accuracy.
    pub fn derivative(&self, x: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(x);
        }
        let h = FD_STEP;
        let f = &self.value;
        if x - h < -1.0 {
            (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
        } else if x + h > 1.0 {
            (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
        } else {
            (f(x + h) - f(x - h)) / (2.0 * h)
        }
    }

    pub fn second_derivative(&self) -> Option<&ScalarFn> {
        self.second_derivative.as_ref()
    }

    /// Error unless `|ψ(±1)| <= BOUNDARY_TOL`.
    pub fn check_dirichlet(&self) -> Result<()> {
        for point in [-1.0, 1.0] {
            let value = self.value(point);
            if !(value.abs() <= BOUNDARY_TOL) {
                return Err(Error::Boundary {
                    point,
                    value: value.abs(),
                    tol: BOUNDARY_TOL,
                });
            }
        }
        Ok(())
    }

    /// `sin(πx)` with exact first and second derivatives.
    pub fn sin_pi() -> Self {
        use std::f64::consts::PI;
        Self::new(|x| (PI * x).sin())
            .with_derivative(|x| PI * (PI * x).cos())
            .with_second_derivative(|x| -PI * PI * (PI * x).sin())
    }

    /// The basis function `φ_k = L_k - L_{k+2}` with exact derivatives.
    pub fn basis(k: usize) -> Self {
        Self::new(move |x| {
            let (v, _) = legendre_table_with_derivative(k + 2, x);
            v[k] - v[k + 2]
        })
        .with_derivative(move |x| {
            let (_, d) = legendre_table_with_derivative(k + 2, x);
            d[k] - d[k + 2]
        })
        .with_second_derivative(move |x| {
            // φ_k'' = -(2k+3) L_{k+1}' from L'_{k+2} - L'_k = (2k+3) L_{k+1}
            let (_, d) = legendre_table_with_derivative(k + 1, x);
            -(2.0 * k as f64 + 3.0) * d[k + 1]
        })
    }

    /// `(1 - x²)²`, a smooth bump vanishing with its derivative at `±1`.
    pub fn bump() -> Self {
        Self::new(|x| (1.0 - x * x).powi(2))
            .with_derivative(|x| -4.0 * x * (1.0 - x * x))
            .with_second_derivative(|x| 12.0 * x * x - 4.0)
    }
}

/// Coefficients of `u_N = Σ_k c_k φ_k` in the compact Legendre basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖self - other‖∞`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += scale * b;
        }
    }
}

impl From<Vec<f64>> for CoefficientVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Index<usize> for CoefficientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CoefficientVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Row-major dense matrix.
pub type DenseMatrix = Vec<Vec<f64>>;

/// Closed-form mass matrix `M_{ij} = (φ_j, φ_i)`.
pub fn assemble_mass(n: usize) -> Result<SymBandMatrix> {
    let dim = basis_dim(n)?;
    let mut m = SymBandMatrix::zeros(dim, 2);
    for k in 0..dim {
        let kf = k as f64;
        m.set(k, k, 2.0 / (2.0 * kf + 1.0) + 2.0 / (2.0 * kf + 5.0));
        if k + 2 < dim {
            m.set(k, k + 2, -2.0 / (2.0 * kf + 5.0));
        }
    }
    Ok(m)
}

/// Closed-form stiffness matrix `S_{ij} = (φ_j', φ_i') = (4k + 6) δ_{ij}`.
pub fn assemble_stiffness(n: usize) -> Result<SymBandMatrix> {
    let dim = basis_dim(n)?;
    let mut s = SymBandMatrix::zeros(dim, 0);
    for k in 0..dim {
        s.set(k, k, 4.0 * k as f64 + 6.0);
    }
    Ok(s)
}

/// Mass and stiffness matrices assembled entry by entry with an `(N+1)`-point
/// Gauss rule, exact for the products involved. Independent of the closed
/// forms above.
///
/// Nodes, weights, basis values and sums are all carried in double-double
/// arithmetic: in plain `f64` the rounding of nodes near `±1` alone perturbs
/// stiffness entries by ~1e-12 at `N = 64`.
pub fn assemble_by_quadrature(n: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let dim = basis_dim(n)?;
    let rule = crate::quadrature::gauss_legendre(n + 1)?;
    let mut values = Vec::with_capacity(rule.len());
    let mut derivatives = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    for &x0 in &rule.nodes {
        let x = refine_gauss_node(n + 1, x0);
        let l_prev = legendre_table_dd(n, x)[n];
        let nf = TwoFloat::from((n + 1) as f64);
        // at a root of L_{n+1}: w = 2 (1 - x²) / ((n+1) L_n)²
        weights.push((TwoFloat::from(1.0) - x * x) * 2.0 / ((nf * l_prev) * (nf * l_prev)));
        let l = legendre_table_dd(dim + 1, x);
        values.push((0..dim).map(|k| l[k] - l[k + 2]).collect::<Vec<_>>());
        // φ_k' = -(2k+3) L_{k+1}
        derivatives.push(
            (0..dim)
                .map(|k| l[k + 1] * -(2.0 * k as f64 + 3.0))
                .collect::<Vec<_>>(),
        );
    }
    let mut mass = vec![vec![0.0; dim]; dim];
    let mut stiff = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut m = TwoFloat::from(0.0);
            let mut s = TwoFloat::from(0.0);
            for q in 0..weights.len() {
                m += weights[q] * values[q][i] * values[q][j];
                s += weights[q] * derivatives[q][i] * derivatives[q][j];
            }
            mass[i][j] = m.hi() + m.lo();
            stiff[i][j] = s.hi() + s.lo();
        }
    }
    Ok((mass, stiff))
}

/// `L_0(x), ..., L_kmax(x)` in double-double.
fn legendre_table_dd(kmax: usize, x: TwoFloat) -> Vec<TwoFloat> {
    let mut out = vec![TwoFloat::from(1.0), x];
    for k in 1..kmax {
        let kf = k as f64;
        let next = (x * out[k] * (2.0 * kf + 1.0) - out[k - 1] * kf) / (kf + 1.0);
        out.push(next);
    }
    out.truncate(kmax + 1);
    out
}

/// Newton steps on `L_m` in double-double, starting from an `f64` root.
fn refine_gauss_node(m: usize, x0: f64) -> TwoFloat {
    let mut x = TwoFloat::from(x0);
    for _ in 0..3 {
        let l = legendre_table_dd(m, x);
        // L_m' = m (x L_m - L_{m-1}) / (x² - 1)
        let dl = (x * l[m] - l[m - 1]) * m as f64 / (x * x - 1.0);
        x -= l[m] / dl;
    }
    x
}

fn basis_dim(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree N = {n} leaves an empty space (need N >= 2)"
        )));
    }
    Ok(n - 1)
}

/// `φ_k` tabulated at the nodes of a rule: `values[q][k]`.
#[derive(Debug, Clone)]
struct BasisTables {
    values: Vec<Vec<f64>>,
}

impl BasisTables {
    fn new(n: usize, rule: &QuadratureRule) -> Self {
        let dim = n - 1;
        let values = rule.nodes.iter().map(|&x| basis_at(dim, x).0).collect();
        Self { values }
    }
}

/// `(φ_k(x), φ_k'(x))` for `k = 0..dim`.
fn basis_at(dim: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let l = crate::quadrature::legendre_table(dim + 1, x);
    let v = (0..dim).map(|k| l[k] - l[k + 2]).collect();
    // φ_k' = -(2k+3) L_{k+1}; avoids cancelling two O(k²) derivatives
    let d = (0..dim)
        .map(|k| -(2.0 * k as f64 + 3.0) * l[k + 1])
        .collect();
    (v, d)
}

/// The Galerkin space `P⁰_N` with its quadrature and assembled matrices.
#[derive(Debug, Clone)]
pub struct SpectralSpace {
    n: usize,
    quad: QuadratureRule,
    mass: SymBandMatrix,
    stiffness: SymBandMatrix,
    tables: BasisTables,
}

/// Discrete-vs-continuous error norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `‖e‖₀`.
    pub l2: f64,
    /// `(‖e‖₀² + α₀‖e'‖₀²)^{1/2}`.
    pub h1: f64,
    /// `(‖e‖₀² + ‖e'‖₀²)^{1/2}`.
    pub h1_standard: f64,
}

impl SpectralSpace {
    /// Space of degree `n` with the default `3n + 16` point LGL rule.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_quadrature_points(n, default_quadrature_points(n))
    }

    pub fn with_quadrature_points(n: usize, q: usize) -> Result<Self> {
        basis_dim(n)?;
        if q < n + 2 {
            return Err(Error::InvalidParameter(format!(
                "quadrature with {q} points cannot integrate degree-{n} products"
            )));
        }
        let quad = lgl_rule(q)?;
        let tables = BasisTables::new(n, &quad);
        Ok(Self {
            n,
            mass: assemble_mass(n)?,
            stiffness: assemble_stiffness(n)?,
            quad,
            tables,
        })
    }

    /// Polynomial degree `N`.
    pub fn degree(&self) -> usize {
        self.n
    }

    /// Number of basis functions, `N - 1`.
    pub fn dim(&self) -> usize {
        self.n - 1
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn mass(&self) -> &SymBandMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymBandMatrix {
        &self.stiffness
    }

    /// `M + α₀ S`.
    pub fn system_matrix(&self, alpha0: f64) -> SymBandMatrix {
        self.mass.add_scaled(alpha0, &self.stiffness)
    }

    /// `u_N` at the space's own quadrature nodes.
    pub fn values_at_nodes(&self, u: &CoefficientVector) -> Vec<f64> {
        self.tables
            .values
            .iter()
            .map(|row| row.iter().zip(&u.0).map(|(p, c)| p * c).sum())
            .collect()
    }

    /// Galerkin load `(g, φ_i)` from samples of `g` at the quadrature nodes.
    pub fn load_from_nodal(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.quad.len());
        let mut out = vec![0.0; self.dim()];
        for (q, &g) in samples.iter().enumerate() {
            let wg = self.quad.weights[q] * g;
            for (o, p) in out.iter_mut().zip(&self.tables.values[q]) {
                *o += wg * p;
            }
        }
        out
    }

    /// `M c`.
    pub fn apply_mass(&self, u: &CoefficientVector) -> Vec<f64> {
        self.mass.matvec(&u.0)
    }

    pub fn l2_norm(&self, u: &CoefficientVector) -> f64 {
        self.mass.quadratic_form(&u.0).max(0.0).sqrt()
    }

    /// `(cᵀMc + α₀ cᵀSc)^{1/2}`.
    pub fn h1_norm(&self, u: &CoefficientVector, alpha0: f64) -> f64 {
        (self.mass.quadratic_form(&u.0) + alpha0 * self.stiffness.quadratic_form(&u.0))
            .max(0.0)
            .sqrt()
    }

    /// H¹ projection with the space's own quadrature rule.
    pub fn project_h1(&self, psi: &SpatialFunction, alpha0: f64) -> Result<CoefficientVector> {
        self.project_h1_with_rule(psi, alpha0, &self.quad)
    }

    /// Solves `(M + α₀S) c = r`, `r_i = (ψ, φ_i) + α₀(ψ', φ_i')`, with inner
    /// products taken by `rule`.
    pub fn project_h1_with_rule(
        &self,
        psi: &SpatialFunction,
        alpha0: f64,
        rule: &QuadratureRule,
    ) -> Result<CoefficientVector> {
        if !(alpha0 > 0.0) || !alpha0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        psi.check_dirichlet()?;
        let dim = self.dim();
        let mut rhs = vec![0.0; dim];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (phi, dphi) = basis_at(dim, x);
            let v = w * psi.value(x);
            let d = w * alpha0 * psi.derivative(x);
            for i in 0..dim {
                rhs[i] += v * phi[i] + d * dphi[i];
            }
        }
        let chol = self.system_matrix(alpha0).cholesky()?;
        Ok(CoefficientVector(chol.solve(&rhs)))
    }

    /// `u_N(x)` at each point.
    pub fn synthesize(&self, u: &CoefficientVector, points: &[f64]) -> Vec<f64> {
        points
            .iter()
            .map(|&x| {
                if x == 1.0 || x == -1.0 {
                    return 0.0;
                }
                let (phi, _) = basis_at(self.dim(), x);
                phi.iter().zip(&u.0).map(|(p, c)| p * c).sum()
            })
            .collect()
    }

    /// `u_N'(x)` at each point.
    pub fn synthesize_derivative(&self, u: &CoefficientVector, points: &[f64]) -> Vec<f64> {
        points
            .iter()
            .map(|&x| {
                let (_, dphi) = basis_at(self.dim(), x);
                dphi.iter().zip(&u.0).map(|(p, c)| p * c).sum()
            })
            .collect()
    }

    /// Reference rule for continuous-vs-discrete errors: LGL with `4N` points.
    pub fn reference_rule(&self) -> Result<QuadratureRule> {
        lgl_rule(4 * self.n)
    }

    /// Error norms of `exact - u_N` on the reference rule.
    pub fn error_norms(
        &self,
        u: &CoefficientVector,
        exact: &SpatialFunction,
        alpha0: f64,
    ) -> Result<ErrorNorms> {
        let rule = self.reference_rule()?;
        Ok(self.error_norms_with_rule(u, exact, alpha0, &rule))
    }

    pub fn error_norms_with_rule(
        &self,
        u: &CoefficientVector,
        exact: &SpatialFunction,
        alpha0: f64,
        rule: &QuadratureRule,
    ) -> ErrorNorms {
        let mut e0 = 0.0;
        let mut e1 = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (phi, dphi) = basis_at(self.dim(), x);
            let uh: f64 = phi.iter().zip(&u.0).map(|(p, c)| p * c).sum();
            let duh: f64 = dphi.iter().zip(&u.0).map(|(p, c)| p * c).sum();
            let e = exact.value(x) - uh;
            let de = exact.derivative(x) - duh;
            e0 += w * e * e;
            e1 += w * de * de;
        }
        ErrorNorms {
            l2: e0.sqrt(),
            h1: (e0 + alpha0 * e1).sqrt(),
            h1_standard: (e0 + e1).sqrt(),
        }
    }
}
