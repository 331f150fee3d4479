//! Problem definitions: Cauchy data, source-term variants, and the
//! Lane-Emden style benchmark with its known exact solution.
//!
//! Sources act pointwise on nodal fields: a closure (t, x, u) -> value is
//! evaluated at every space node of the current field, and the result is
//! projected onto the eigenbasis afterwards. This keeps nonlinearities
//! like the benchmark cube trivially correct.

use std::sync::Arc;

use crate::error::{Error, Result};

type DataFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PointSourceFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Initial value u(0) = phi and initial derivative u_t(0) = g.
#[derive(Clone)]
pub struct CauchyData {
    phi: DataFn,
    g: DataFn,
}

impl CauchyData {
    pub fn new(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            phi: Arc::new(phi),
            g: Arc::new(g),
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }
}

impl std::fmt::Debug for CauchyData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CauchyData")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Zero,
    TimeOnly,
    GlobalLipschitz,
    Composite,
}

/// The nonlinearity f(t, u), optionally multiplied by a bounded Lipschitz
/// factor a(t, u) (the composite kind evaluates a * f pointwise).
///
/// `lipschitz_k` is the Lipschitz constant of f in u valid on the field
/// range of the experiment; `a_bound_m` and `a_lip_n` bound the composite
/// multiplier; `source_at_zero_q` bounds ||f(t, 0)||.
#[derive(Clone)]
pub struct SourceSpec {
    pub kind: SourceKind,
    f_eval: PointSourceFn,
    a_eval: Option<PointSourceFn>,
    pub lipschitz_k: f64,
    pub a_bound_m: f64,
    pub a_lip_n: f64,
    pub source_at_zero_q: f64,
}

impl SourceSpec {
    pub fn zero() -> Self {
        Self {
            kind: SourceKind::Zero,
            f_eval: Arc::new(|_, _, _| 0.0),
            a_eval: None,
            lipschitz_k: 0.0,
            a_bound_m: 0.0,
            a_lip_n: 0.0,
            source_at_zero_q: 0.0,
        }
    }

    /// Source independent of u.
    pub fn time_only(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        source_at_zero_q: f64,
    ) -> Self {
        Self {
            kind: SourceKind::TimeOnly,
            f_eval: Arc::new(move |t, x, _| f(t, x)),
            a_eval: None,
            lipschitz_k: 0.0,
            a_bound_m: 0.0,
            a_lip_n: 0.0,
            source_at_zero_q,
        }
    }

    pub fn global_lipschitz(
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz_k: f64,
        source_at_zero_q: f64,
    ) -> Result<Self> {
        if lipschitz_k < 0.0 || source_at_zero_q < 0.0 {
            return Err(Error::invalid("source constants must be nonnegative"));
        }
        Ok(Self {
            kind: SourceKind::GlobalLipschitz,
            f_eval: Arc::new(f),
            a_eval: None,
            lipschitz_k,
            a_bound_m: 0.0,
            a_lip_n: 0.0,
            source_at_zero_q,
        })
    }

    /// Composite source a(t, u) f(t, u); all three multiplier constants are
    /// required.
    pub fn composite(
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        a: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz_k: f64,
        a_bound_m: f64,
        a_lip_n: f64,
        source_at_zero_q: f64,
    ) -> Result<Self> {
        if lipschitz_k < 0.0 || a_bound_m < 0.0 || a_lip_n < 0.0 || source_at_zero_q < 0.0 {
            return Err(Error::invalid("source constants must be nonnegative"));
        }
        Ok(Self {
            kind: SourceKind::Composite,
            f_eval: Arc::new(f),
            a_eval: Some(Arc::new(a)),
            lipschitz_k,
            a_bound_m,
            a_lip_n,
            source_at_zero_q,
        })
    }

    /// Pointwise value of the source (a * f for the composite kind) at one
    /// space point.
    pub fn value_at(&self, t: f64, x: f64, u: f64) -> f64 {
        let f = (self.f_eval)(t, x, u);
        match &self.a_eval {
            Some(a) => a(t, x, u) * f,
            None => f,
        }
    }

    /// Multiplier value (1 for non-composite kinds).
    pub fn multiplier_at(&self, t: f64, x: f64, u: f64) -> f64 {
        match &self.a_eval {
            Some(a) => a(t, x, u),
            None => 1.0,
        }
    }

    /// Pointwise evaluation on a nodal field; rejects non-finite field
    /// values.
    pub fn eval(&self, t: f64, nodes: &[f64], u_field: &[f64]) -> Result<Vec<f64>> {
        if nodes.len() != u_field.len() {
            return Err(Error::invalid(format!(
                "field length {} does not match node count {}",
                u_field.len(),
                nodes.len()
            )));
        }
        if let Some(index) = u_field.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(nodes
            .iter()
            .zip(u_field)
            .map(|(&x, &u)| self.value_at(t, x, u))
            .collect())
    }
}

impl std::fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceSpec")
            .field("kind", &self.kind)
            .field("lipschitz_k", &self.lipschitz_k)
            .field("a_bound_m", &self.a_bound_m)
            .field("a_lip_n", &self.a_lip_n)
            .field("source_at_zero_q", &self.source_at_zero_q)
            .finish()
    }
}

/// Benchmark on (0,1) x (0,1):
///
///   u_tt + u_xx = F(u) + G(x, t),   F(u) = u^3 / a^3,
///   G(x, t) = 2 a t (1 - 3x) - t^3 x^6 (1 - x)^3,
///   u(x, 0) = 0,  u_t(x, 0) = a x^2 (1 - x),
///
/// with exact solution u(x, t) = a t x^2 (1 - x). The cubic forcing makes
/// it a Lane-Emden type nonlinearity; it is only locally Lipschitz, so the
/// effective constant is taken on the field range of the experiment.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    a_param: f64,
}

/// Margin added to max |u_exact| when bounding the field range, covering
/// noise and transient overshoot of the marching solution.
const FIELD_MARGIN: f64 = 0.05;

impl BenchmarkProblem {
    pub fn new(a_param: f64) -> Result<Self> {
        if a_param == 0.0 || !a_param.is_finite() {
            return Err(Error::invalid("benchmark parameter a must be finite and nonzero"));
        }
        Ok(Self { a_param })
    }

    pub fn a_param(&self) -> f64 {
        self.a_param
    }

    /// u_exact(x, t) = a t x^2 (1 - x).
    pub fn exact_eval(&self, x: f64, t: f64) -> f64 {
        self.a_param * t * x * x * (1.0 - x)
    }

    /// d/dt u_exact = a x^2 (1 - x).
    pub fn exact_time_derivative(&self, x: f64, _t: f64) -> f64 {
        self.a_param * x * x * (1.0 - x)
    }

    /// Initial derivative datum g(x) = a x^2 (1 - x).
    pub fn g_data(&self, x: f64) -> f64 {
        self.a_param * x * x * (1.0 - x)
    }

    /// ||g||_{L2(0,1)} = |a| / sqrt(105), from the exact antiderivative
    /// int x^4 (1-x)^2 dx = 1/5 - 1/3 + 1/7 = 1/105. This is where the
    /// sqrt(105) factor of the relative noise model comes from.
    pub fn g_l2_norm(&self) -> f64 {
        self.a_param.abs() / 105f64.sqrt()
    }

    /// F(u) = u^3 / a^3.
    pub fn cubic(&self, u: f64) -> f64 {
        u * u * u / (self.a_param * self.a_param * self.a_param)
    }

    /// G(x, t) = 2 a t (1 - 3x) - t^3 x^6 (1 - x)^3.
    pub fn forcing(&self, x: f64, t: f64) -> f64 {
        let w = x * x * (1.0 - x);
        2.0 * self.a_param * t * (1.0 - 3.0 * x) - t * t * t * w * w * w
    }

    /// u_tt + u_xx - F(u_exact) - G at (x, t), from analytic derivatives:
    /// u_tt = 0 and u_xx = 2 a t (1 - 3x). Vanishes identically.
    pub fn forward_residual(&self, x: f64, t: f64) -> f64 {
        let u_tt = 0.0;
        let u_xx = 2.0 * self.a_param * t * (1.0 - 3.0 * x);
        u_tt + u_xx - self.cubic(self.exact_eval(x, t)) - self.forcing(x, t)
    }

    pub fn cauchy_data(&self) -> CauchyData {
        let a = self.a_param;
        CauchyData::new(|_| 0.0, move |x| a * x * x * (1.0 - x))
    }

    /// Bound on |u| over the experiment: max |u_exact| = 4|a|/27 on the
    /// unit time horizon, plus a noise margin.
    pub fn field_bound(&self) -> f64 {
        self.a_param.abs() * (4.0 / 27.0 + FIELD_MARGIN)
    }

    /// Effective Lipschitz constant of the cubic on the field range:
    /// sup |F'(u)| = 3 R^2 / |a|^3 for |u| <= R.
    pub fn effective_lipschitz(&self) -> f64 {
        let r = self.field_bound();
        3.0 * r * r / self.a_param.abs().powi(3)
    }

    /// sup_t ||f(t, 0)||: with u = 0 the source reduces to G, bounded by
    /// sup |G| <= 4|a| + max x^6(1-x)^3.
    pub fn source_at_zero_bound(&self) -> f64 {
        let w = (2.0f64 / 3.0).powi(6) * (1.0f64 / 3.0).powi(3);
        4.0 * self.a_param.abs() + w
    }

    /// The full right-hand side f(t, u) = F(u) + G(x, t) as a globally
    /// Lipschitz source with the effective constant.
    pub fn source_spec(&self) -> SourceSpec {
        let this = self.clone();
        SourceSpec::global_lipschitz(
            move |t, x, u| this.cubic(u) + this.forcing(x, t),
            self.effective_lipschitz(),
            self.source_at_zero_bound(),
        )
        .expect("benchmark constants are nonnegative")
    }

    /// The same right-hand side split as a composite product
    /// a(t, u) f(t, u) with a(t, u) = 1/(1 + u^2) and
    /// f = (1 + u^2)(F(u) + G): the product equals the benchmark source, so
    /// the exact solution is unchanged while the composite evaluation path
    /// (bounded multiplier times Lipschitz factor) is exercised.
    ///
    /// Multiplier constants: sup |a| = 1 and sup |da/du| = 3 sqrt(3) / 8.
    pub fn composite_source_spec(&self) -> SourceSpec {
        let this = self.clone();
        let r = self.field_bound();
        let g_max = self.source_at_zero_bound();
        // sup over |u| <= R of |d/du [(1+u^2)(F(u)+G)]|.
        let k_f = 2.0 * r * (this.cubic(r).abs() + g_max)
            + (1.0 + r * r) * 3.0 * r * r / self.a_param.abs().powi(3);
        let a_lip_n = 3.0 * 3f64.sqrt() / 8.0;
        SourceSpec::composite(
            move |t, x, u| (1.0 + u * u) * (this.cubic(u) + this.forcing(x, t)),
            |_t, _x, u| 1.0 / (1.0 + u * u),
            k_f,
            1.0,
            a_lip_n,
            g_max,
        )
        .expect("benchmark constants are nonnegative")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SplitMix64;
    use crate::spectral::QuadratureRule;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn exact_solution_values() {
        let problem = BenchmarkProblem::new(1.0).unwrap();
        assert_relative_eq!(problem.exact_eval(0.5, 0.5), 0.0625, max_relative = 1e-15);
        for a in [1.0, 2.0, -3.5] {
            let problem = BenchmarkProblem::new(a).unwrap();
            assert_eq!(problem.exact_eval(0.0, 0.7), 0.0);
            assert_eq!(problem.exact_eval(1.0, 0.7), 0.0);
            assert_eq!(problem.exact_eval(0.3, 0.0), 0.0);
        }
        assert!(BenchmarkProblem::new(0.0).is_err());
    }

    #[test]
    fn forward_residual_vanishes() {
        // u_tt = 0 and u_xx = 2 a t (1 - 3x) cancel F + G analytically.
        for a in [1.0, 2.0, -1.0] {
            let problem = BenchmarkProblem::new(a).unwrap();
            assert_abs_diff_eq!(problem.forward_residual(0.3, 0.7), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(problem.forward_residual(0.5, 0.25), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(problem.forward_residual(1e-9, 0.5), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn dirichlet_compatibility_of_data() {
        let problem = BenchmarkProblem::new(2.0).unwrap();
        let data = problem.cauchy_data();
        assert_eq!(data.phi(0.0), 0.0);
        assert_eq!(data.phi(1.0), 0.0);
        assert_eq!(data.g(0.0), 0.0);
        assert_eq!(data.g(1.0), 0.0);
    }

    #[test]
    fn g_norm_exact_value() {
        // Quadrature oracle against the exact antiderivative value 1/105.
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let rule = QuadratureRule::gauss_legendre_composite(5, 20).unwrap();
        let quad = rule.integrate(|x| {
            let g = problem.g_data(x);
            g * g
        });
        assert_relative_eq!(quad, 1.0 / 105.0, max_relative = 1e-12);
        assert_relative_eq!(
            problem.g_l2_norm(),
            (1.0f64 / 105.0).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn source_eval_zero_and_benchmark_identity() {
        let nodes: Vec<f64> = (0..=20).map(|j| j as f64 / 20.0).collect();
        let zero = SourceSpec::zero();
        let out = zero.eval(0.5, &nodes, &vec![1.0; nodes.len()]).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));

        // With u = u_exact the cubic cancels the t^3 part of G and the
        // source equals u_xx = 2 a t (1 - 3x).
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let source = problem.source_spec();
        let t = 0.6;
        let field: Vec<f64> = nodes.iter().map(|&x| problem.exact_eval(x, t)).collect();
        let out = source.eval(t, &nodes, &field).unwrap();
        for (&x, &v) in nodes.iter().zip(&out) {
            assert_abs_diff_eq!(v, 2.0 * t * (1.0 - 3.0 * x), epsilon = 1e-12);
        }
    }

    #[test]
    fn source_eval_rejects_non_finite_fields() {
        let source = BenchmarkProblem::new(1.0).unwrap().source_spec();
        let nodes = [0.0, 0.5, 1.0];
        let field = [0.0, f64::NAN, 0.0];
        assert!(matches!(
            source.eval(0.1, &nodes, &field),
            Err(Error::NonFiniteField { index: 1 })
        ));
    }

    #[test]
    fn degenerate_composite_equals_global() {
        let problem = BenchmarkProblem::new(1.5).unwrap();
        let p = problem.clone();
        let global = problem.source_spec();
        let unit_composite = SourceSpec::composite(
            move |t, x, u| p.cubic(u) + p.forcing(x, t),
            |_, _, _| 1.0,
            problem.effective_lipschitz(),
            1.0,
            0.0,
            problem.source_at_zero_bound(),
        )
        .unwrap();
        let nodes: Vec<f64> = (0..=10).map(|j| j as f64 / 10.0).collect();
        let field: Vec<f64> = nodes.iter().map(|&x| 0.1 * (x - 0.4)).collect();
        assert_eq!(
            global.eval(0.3, &nodes, &field).unwrap(),
            unit_composite.eval(0.3, &nodes, &field).unwrap()
        );
    }

    #[test]
    fn composite_product_reproduces_benchmark_source() {
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let global = problem.source_spec();
        let composite = problem.composite_source_spec();
        let nodes: Vec<f64> = (0..=15).map(|j| j as f64 / 15.0).collect();
        let field: Vec<f64> = nodes.iter().map(|&x| problem.exact_eval(x, 0.8)).collect();
        let a = global.eval(0.8, &nodes, &field).unwrap();
        let b = composite.eval(0.8, &nodes, &field).unwrap();
        for (&va, &vb) in a.iter().zip(&b) {
            assert_relative_eq!(va, vb, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn declared_lipschitz_constant_holds_on_sampled_pairs() {
        // || f(t, w) - f(t, v) || <= K || w - v || + 1e-9 in the weighted
        // discrete L2 norm, for fields within the declared range.
        let problem = BenchmarkProblem::new(1.0).unwrap();
        for source in [problem.source_spec(), problem.composite_source_spec()] {
            let k = source.lipschitz_k;
            let rule = QuadratureRule::trapezoid(20).unwrap();
            let r = problem.field_bound();
            let mut rng = SplitMix64::new(2024);
            for _ in 0..1000 {
                let t = rng.next_f64();
                let w_field: Vec<f64> =
                    (0..rule.len()).map(|_| r * rng.next_symmetric()).collect();
                let v_field: Vec<f64> =
                    (0..rule.len()).map(|_| r * rng.next_symmetric()).collect();
                let fw = source.eval(t, &rule.nodes, &w_field).unwrap();
                let fv = source.eval(t, &rule.nodes, &v_field).unwrap();
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..rule.len() {
                    num += rule.weights[i] * (fw[i] - fv[i]).powi(2);
                    den += rule.weights[i] * (w_field[i] - v_field[i]).powi(2);
                }
                assert!(
                    num.sqrt() <= k * den.sqrt() + 1e-9,
                    "Lipschitz violation: {} > {}",
                    num.sqrt(),
                    k * den.sqrt()
                );
            }
        }
    }

    #[test]
    fn composite_multiplier_bounded_by_m() {
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let composite = problem.composite_source_spec();
        let mut rng = SplitMix64::new(7);
        for _ in 0..1000 {
            let t = rng.next_f64();
            let x = rng.next_f64();
            let u = 10.0 * rng.next_symmetric();
            let a = composite.multiplier_at(t, x, u);
            assert!(a.abs() <= composite.a_bound_m + 1e-15);
        }
    }
}
