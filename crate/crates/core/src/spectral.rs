//! Eigenbasis of the spatial operator and quadrature on [0, 1].
//!
//! The default basis diagonalizes A = -d^2/dx^2 with Dirichlet conditions:
//! lambda_p = (p pi)^2 and phi_p(x) = sqrt(2) sin(p pi x), orthonormal in
//! L^2(0, 1). Mode indices are 1-based everywhere on the public surface.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type BasisFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Eigenpairs (lambda_p, phi_p) of a positive diagonalizable operator.
///
/// The eigenvalue and basis functions are supplied as closures so that
/// shifted variants (for instance the modified Helmholtz operator
/// -d^2/dx^2 + k^2, which only shifts every eigenvalue by k^2) cost one
/// configuration instead of new code.
#[derive(Clone)]
pub struct EigenBasis {
    mode_count: usize,
    eigenvalue_fn: ScalarFn,
    basis_fn: BasisFn,
}

impl EigenBasis {
    /// Basis with caller-supplied eigenvalues and eigenfunctions.
    ///
    /// Eigenvalues must be positive and strictly increasing in p; the first
    /// few are checked eagerly.
    pub fn with_functions(
        mode_count: usize,
        eigenvalue_fn: impl Fn(usize) -> f64 + Send + Sync + 'static,
        basis_fn: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::invalid("mode_count must be at least 1"));
        }
        let basis = Self {
            mode_count,
            eigenvalue_fn: Arc::new(eigenvalue_fn),
            basis_fn: Arc::new(basis_fn),
        };
        let mut prev = 0.0;
        for p in 1..=mode_count {
            let lam = (basis.eigenvalue_fn)(p);
            if !(lam > prev) {
                return Err(Error::invalid(format!(
                    "eigenvalues must be positive and strictly increasing; lambda_{p} = {lam}"
                )));
            }
            prev = lam;
        }
        Ok(basis)
    }

    /// Default basis: lambda_p = (p pi)^2, phi_p(x) = sqrt(2) sin(p pi x).
    pub fn dirichlet_sine(mode_count: usize) -> Result<Self> {
        Self::with_functions(
            mode_count,
            |p| (p as f64 * PI).powi(2),
            |p, x| std::f64::consts::SQRT_2 * (p as f64 * PI * x).sin(),
        )
    }

    /// Same eigenfunctions with eigenvalues shifted by k^2
    /// (-d^2/dx^2 + k^2 on (0,1) with Dirichlet conditions).
    pub fn modified_helmholtz(mode_count: usize, k_squared: f64) -> Result<Self> {
        if k_squared < 0.0 {
            return Err(Error::invalid("k_squared must be nonnegative"));
        }
        Self::with_functions(
            mode_count,
            move |p| (p as f64 * PI).powi(2) + k_squared,
            |p, x| std::f64::consts::SQRT_2 * (p as f64 * PI * x).sin(),
        )
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// lambda_p. Rejects p = 0: indices are 1-based as in the series
    /// u = sum_{p>=1} <u, phi_p> phi_p.
    pub fn eigenvalue(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroModeIndex);
        }
        Ok((self.eigenvalue_fn)(p))
    }

    /// phi_p(x).
    pub fn basis_value(&self, p: usize, x: f64) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroModeIndex);
        }
        Ok((self.basis_fn)(p, x))
    }

    /// <f, phi_p> approximated by the given rule.
    pub fn forward_coeff(
        &self,
        rule: &QuadratureRule,
        p: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroModeIndex);
        }
        let mut acc = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * f(x) * (self.basis_fn)(p, x);
        }
        Ok(acc)
    }

    /// <f, phi_p> from samples of f taken exactly at the rule's nodes.
    ///
    /// This is the projection path for measured (nodal) data, where f is
    /// only known at grid points.
    pub fn forward_coeff_samples(
        &self,
        rule: &QuadratureRule,
        p: usize,
        samples: &[f64],
    ) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroModeIndex);
        }
        if samples.len() != rule.nodes.len() {
            return Err(Error::invalid(format!(
                "sample count {} does not match rule node count {}",
                samples.len(),
                rule.nodes.len()
            )));
        }
        let mut acc = 0.0;
        for ((&x, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(samples) {
            acc += w * v * (self.basis_fn)(p, x);
        }
        Ok(acc)
    }

    /// Projections <f, phi_p> for p = 1..=mode_count.
    pub fn project_fn(&self, rule: &QuadratureRule, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let values: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
        self.project_samples(rule, &values)
    }

    /// Projections of nodal samples for p = 1..=mode_count.
    pub fn project_samples(&self, rule: &QuadratureRule, samples: &[f64]) -> Result<Vec<f64>> {
        (1..=self.mode_count)
            .map(|p| self.forward_coeff_samples(rule, p, samples))
            .collect()
    }

    /// sum_p coeffs[p-1] phi_p(x). Rejects x outside [0, 1].
    pub fn synthesize(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutsideDomain(x));
        }
        let mut acc = 0.0;
        for (idx, &c) in coeffs.iter().enumerate() {
            acc += c * (self.basis_fn)(idx + 1, x);
        }
        Ok(acc)
    }
}

impl std::fmt::Debug for EigenBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EigenBasis")
            .field("mode_count", &self.mode_count)
            .finish()
    }
}

/// Nodes and weights for integration over [0, 1].
///
/// `degree` is the largest polynomial degree integrated exactly.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Composite Gauss-Legendre rule: `panels` equal subintervals of [0, 1],
    /// `points` Gauss nodes on each.
    pub fn gauss_legendre_composite(points: usize, panels: usize) -> Result<Self> {
        if points == 0 || panels == 0 {
            return Err(Error::invalid("points and panels must be at least 1"));
        }
        let (ref_nodes, ref_weights) = legendre_nodes_weights(points);
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(points * panels);
        let mut weights = Vec::with_capacity(points * panels);
        for panel in 0..panels {
            let mid = (panel as f64 + 0.5) * h;
            for (&xi, &wi) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Ok(Self {
            nodes,
            weights,
            degree: 2 * points - 1,
        })
    }

    /// Default rule for integrands carrying up to `modes` sine half-waves:
    /// 5-point Gauss-Legendre panels, three panels per half-wave, which
    /// comfortably exceeds four nodes per half-wave of the highest mode.
    pub fn for_modes(modes: usize) -> Result<Self> {
        Self::gauss_legendre_composite(5, (3 * modes).max(4))
    }

    /// Trapezoidal rule on the uniform grid x_j = j/k, j = 0..=k.
    ///
    /// On this grid the functions sqrt(2) sin(p pi x) for p < k are exactly
    /// orthonormal in the induced discrete inner product, so projecting
    /// nodal data with this rule is a discrete sine transform.
    pub fn trapezoid(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("trapezoid panel count must be at least 1"));
        }
        let h = 1.0 / k as f64;
        let nodes = (0..=k).map(|j| j as f64 * h).collect();
        let weights = (0..=k)
            .map(|j| if j == 0 || j == k { 0.5 * h } else { h })
            .collect();
        Ok(Self {
            nodes,
            weights,
            degree: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of f over [0, 1] under the rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
fn legendre_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_value_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_value_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_value_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn default_rule(modes: usize) -> QuadratureRule {
        QuadratureRule::for_modes(modes).unwrap()
    }

    #[test]
    fn eigenvalues_match_dirichlet_laplacian() {
        let basis = EigenBasis::dirichlet_sine(12).unwrap();
        assert_relative_eq!(basis.eigenvalue(1).unwrap(), PI * PI, max_relative = 1e-15);
        assert_relative_eq!(
            basis.eigenvalue(2).unwrap(),
            4.0 * PI * PI,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            basis.eigenvalue(10).unwrap(),
            100.0 * PI * PI,
            max_relative = 1e-15
        );
        assert!(matches!(basis.eigenvalue(0), Err(Error::ZeroModeIndex)));
    }

    #[test]
    fn eigenvalues_strictly_increase() {
        let basis = EigenBasis::dirichlet_sine(40).unwrap();
        let mut prev = 0.0;
        for p in 1..=40 {
            let lam = basis.eigenvalue(p).unwrap();
            assert!(lam > prev);
            prev = lam;
        }
        assert!(EigenBasis::with_functions(3, |_| 1.0, |_, _| 0.0).is_err());
    }

    #[test]
    fn modified_helmholtz_shifts_eigenvalues_only() {
        let plain = EigenBasis::dirichlet_sine(5).unwrap();
        let shifted = EigenBasis::modified_helmholtz(5, 7.5).unwrap();
        for p in 1..=5 {
            assert_relative_eq!(
                shifted.eigenvalue(p).unwrap(),
                plain.eigenvalue(p).unwrap() + 7.5,
                max_relative = 1e-15
            );
            assert_eq!(
                shifted.basis_value(p, 0.37).unwrap(),
                plain.basis_value(p, 0.37).unwrap()
            );
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for rule in [
            default_rule(4),
            default_rule(16),
            QuadratureRule::trapezoid(20).unwrap(),
            QuadratureRule::gauss_legendre_composite(2, 7).unwrap(),
        ] {
            let total: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_panels_are_exact_on_stated_degree() {
        // Monomial antiderivative oracle: int_0^1 x^d dx = 1/(d+1).
        for points in 1..=6 {
            let rule = QuadratureRule::gauss_legendre_composite(points, 3).unwrap();
            for d in 0..=rule.degree {
                let val = rule.integrate(|x| x.powi(d as i32));
                assert_abs_diff_eq!(val, 1.0 / (d as f64 + 1.0), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn orthonormality_under_default_rule() {
        let basis = EigenBasis::dirichlet_sine(8).unwrap();
        let rule = default_rule(8);
        let phi3 = |x: f64| basis.basis_value(3, x).unwrap();
        assert_abs_diff_eq!(
            basis.forward_coeff(&rule, 3, phi3).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            basis.forward_coeff(&rule, 2, phi3).unwrap(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trapezoid_is_discrete_sine_transform() {
        // sqrt(2) sin(p pi x) are exactly orthonormal under the trapezoid
        // inner product on x_j = j/K for p, q < K.
        let k = 20;
        let basis = EigenBasis::dirichlet_sine(6).unwrap();
        let rule = QuadratureRule::trapezoid(k).unwrap();
        for p in 1..=6 {
            for q in 1..=6 {
                let phi_q = |x: f64| basis.basis_value(q, x).unwrap();
                let ip = basis.forward_coeff(&rule, p, phi_q).unwrap();
                let expected = if p == q { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn forward_coeff_of_cubic_matches_closed_form() {
        // Integration by parts gives, for k = p pi,
        //   int_0^1 x^2 (1-x) sin(kx) dx = (-2 - 4 (-1)^p) / k^3,
        // so <x^2(1-x), phi_p> = sqrt(2) (-2 - 4 (-1)^p) / (p pi)^3.
        let basis = EigenBasis::dirichlet_sine(6).unwrap();
        let f = |x: f64| x * x * (1.0 - x);
        let rule = default_rule(6);
        // Cross-check the rule against itself at 10x the node count.
        let fine = QuadratureRule::gauss_legendre_composite(5, 180).unwrap();
        for p in 1..=6 {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let k = p as f64 * PI;
            let exact = std::f64::consts::SQRT_2 * (-2.0 - 4.0 * sign) / (k * k * k);
            let coarse = basis.forward_coeff(&rule, p, f).unwrap();
            let refined = basis.forward_coeff(&fine, p, f).unwrap();
            assert_abs_diff_eq!(coarse, exact, epsilon = 1e-12);
            assert_abs_diff_eq!(coarse, refined, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthesize_single_mode_and_zero() {
        let basis = EigenBasis::dirichlet_sine(4).unwrap();
        let mut coeffs = vec![0.0; 4];
        coeffs[0] = 1.0;
        assert_relative_eq!(
            basis.synthesize(&coeffs, 0.5).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
        assert_eq!(basis.synthesize(&[0.0; 4], 0.77).unwrap(), 0.0);
        assert!(matches!(
            basis.synthesize(&coeffs, 1.5),
            Err(Error::PointOutsideDomain(_))
        ));
        assert!(basis.synthesize(&coeffs, -0.01).is_err());
    }

    #[test]
    fn round_trip_recovers_coefficients() {
        let basis = EigenBasis::dirichlet_sine(10).unwrap();
        let rule = default_rule(2 * 10);
        let coeffs: Vec<f64> = (1..=10).map(|p| 1.0 / p as f64 - 0.3).collect();
        for p in 1..=10 {
            let recovered = basis
                .forward_coeff(&rule, p, |x| basis.synthesize(&coeffs, x).unwrap())
                .unwrap();
            assert_abs_diff_eq!(recovered, coeffs[p - 1], epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn prop_round_trip_and_parseval(
            raw in proptest::collection::vec(-1.0f64..1.0, 1..=16)
        ) {
            let n = raw.len();
            let basis = EigenBasis::dirichlet_sine(n).unwrap();
            let rule = QuadratureRule::for_modes(2 * n).unwrap();
            for p in 1..=n {
                let recovered = basis
                    .forward_coeff(&rule, p, |x| basis.synthesize(&raw, x).unwrap())
                    .unwrap();
                prop_assert!((recovered - raw[p - 1]).abs() < 1e-8);
            }
            let quad_energy = rule.integrate(|x| {
                let v = basis.synthesize(&raw, x).unwrap();
                v * v
            });
            let coeff_energy: f64 = raw.iter().map(|c| c * c).sum();
            prop_assert!((quad_energy - coeff_energy).abs() < 1e-8);
        }
    }
}
