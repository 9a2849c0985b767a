//! Legendre polynomials and the Gauss / Gauss-Lobatto rules built from them.

use crate::error::{Error, Result};

/// Value of the Legendre polynomial `L_k(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}`.
pub fn legendre_eval(k: usize, x: f64) -> f64 {
    legendre_with_derivative(k, x).0
}

/// `(L_k(x), L_k'(x))`, both by recurrence. The derivative uses
/// `L'_{k+1} = L'_{k-1} + (2k+1) L_k`, which stays valid at `x = ±1`.
pub fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for n in 1..k {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Values `L_0(x), ..., L_kmax(x)` in one sweep.
pub fn legendre_table(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    out.push(x);
    for n in 1..kmax {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// Values and derivatives `L_k(x), L_k'(x)` for `k = 0..=kmax`.
pub fn legendre_table_with_derivative(kmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let vals = legendre_table(kmax, x);
    let mut ders = vec![0.0; kmax + 1];
    if kmax >= 1 {
        ders[1] = 1.0;
    }
    for n in 1..kmax {
        ders[n + 1] = ders[n - 1] + (2.0 * n as f64 + 1.0) * vals[n];
    }
    (vals, ders)
}

/// A one-dimensional quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{-1}^{1} g(x) dx` approximated by the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// Map the rule affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

const ROOT_TOL: f64 = 1e-14;
const MAX_ROOT_ITERS: usize = 200;

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with a sign change.
/// Falls back to bisection whenever the Newton step leaves the bracket.
fn bracketed_root<F>(mut lo: f64, mut hi: f64, g: F) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut g_lo, _) = g(lo);
    let (g_hi, _) = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Internal(format!(
            "root bracket [{lo}, {hi}] has no sign change"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERS {
        let (gx, dgx) = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx.signum() == g_lo.signum() {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
        }
        let newton = x - gx / dgx;
        let next = if dgx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= ROOT_TOL * x.abs().max(1.0) || (hi - lo) <= ROOT_TOL {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Internal(format!(
        "root solver did not converge on [{lo}, {hi}]"
    )))
}

/// Gauss-Legendre rule with `n` points (exact for degree `2n - 1`).
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs n >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, descending from +1.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..MAX_ROOT_ITERS {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= ROOT_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Internal(format!(
                "Gauss-Legendre root {i} of L_{n} did not converge"
            )));
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Legendre-Gauss-Lobatto rule with `q` points: the endpoints plus the roots
/// of `L'_{q-1}`, weights `2 / (q (q-1) L_{q-1}(x_i)^2)`. Exact for degree
/// `2q - 3`.
///
/// Interior nodes are bracketed by consecutive Gauss points of `L_{q-1}`
/// (the zeros of `L'_n` interlace those of `L_n`).
pub fn lgl_rule(q: usize) -> Result<QuadratureRule> {
    if q < 2 {
        return Err(Error::InvalidParameter(
            "Gauss-Lobatto rule needs at least 2 points".into(),
        ));
    }
    let n = q - 1;
    let mut nodes = Vec::with_capacity(q);
    nodes.push(-1.0);
    if n >= 2 {
        let gauss = gauss_legendre(n)?;
        let n_f = n as f64;
        for pair in gauss.nodes.windows(2) {
            let root = bracketed_root(pair[0], pair[1], |x| {
                let (p, dp) = legendre_with_derivative(n, x);
                // L'' from the Legendre ODE, valid in the open interval.
                let d2p = (2.0 * x * dp - n_f * (n_f + 1.0) * p) / (1.0 - x * x);
                (dp, d2p)
            })?;
            nodes.push(root);
        }
        // Exact symmetry.
        let len = nodes.len();
        for i in 1..len {
            let j = len - i;
            if i >= j {
                break;
            }
            let avg = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -avg;
            nodes[j] = avg;
        }
        if n.is_multiple_of(2) {
            nodes[n / 2] = 0.0;
        }
    }
    nodes.push(1.0);
    let scale = 2.0 / (q as f64 * n as f64);
    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre_eval(n, x);
            scale / (p * p)
        })
        .collect();
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_small_cases() {
        assert_eq!(legendre_eval(0, 0.3), 1.0);
        assert!((legendre_eval(2, 0.5) + 0.125).abs() < 1e-15);
        for k in 0..=50 {
            assert!((legendre_eval(k, 1.0) - 1.0).abs() < 1e-13, "k = {k}");
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((legendre_eval(k, -1.0) - sign).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_derivative_at_endpoint() {
        // L_k'(1) = k(k+1)/2
        for k in 0..30 {
            let (_, d) = legendre_with_derivative(k, 1.0);
            let expected = (k * (k + 1)) as f64 / 2.0;
            assert!((d - expected).abs() < 1e-10 * expected.max(1.0));
        }
    }

    #[test]
    fn tables_match_pointwise() {
        let (v, d) = legendre_table_with_derivative(12, 0.37);
        for k in 0..=12 {
            let (p, dp) = legendre_with_derivative(k, 0.37);
            assert!((v[k] - p).abs() < 1e-15);
            assert!((d[k] - dp).abs() < 1e-13);
        }
    }

    #[test]
    fn lgl_two_and_three_points() {
        let r2 = lgl_rule(2).unwrap();
        assert_eq!(r2.nodes, vec![-1.0, 1.0]);
        assert!(r2.weights.iter().all(|w| (w - 1.0).abs() < 1e-15));

        let r3 = lgl_rule(3).unwrap();
        assert_eq!(r3.nodes, vec![-1.0, 0.0, 1.0]);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in r3.weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!((r3.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lgl_weights_sum_to_two_and_nodes_sorted() {
        for q in 2..=200 {
            let r = lgl_rule(q).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "q = {q}: sum = {s}");
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]), "q = {q}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn lgl_exact_on_monomials() {
        for q in 2..=40 {
            let r = lgl_rule(q).unwrap();
            for deg in 0..=(2 * q - 3) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-12, "q = {q}, deg = {deg}: {got}");
            }
        }
    }

    #[test]
    fn gauss_exact_on_monomials() {
        for n in 1..=30 {
            let r = gauss_legendre(n).unwrap();
            for deg in 0..=(2 * n - 1) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-12, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn lgl_rejects_single_point() {
        assert!(lgl_rule(1).is_err());
    }
}
