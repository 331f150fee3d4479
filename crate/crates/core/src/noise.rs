//! Seeded, reproducible measurement-noise models for the Cauchy data.
//!
//! Noise is drawn per space node, i.i.d. uniform on [-1, 1), from an
//! explicit generator written into this file so that identical
//! (kind, epsilon, seed, node set) inputs give bit-identical perturbed
//! samples on every platform. Draws happen after the grid is fixed, so
//! changing the node count changes the stream consumption.

use crate::error::{Error, Result};
use crate::model::BenchmarkProblem;

/// SplitMix64: a 64-bit counter-based generator. One addition and three
/// xor-shift-multiply rounds per output; passes BigCrush and is trivially
/// seedable, which is all the noise model needs.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on [-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NoiseKind {
    Additive,
    Relative,
}

/// Perturbation model for one datum.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, epsilon: f64, seed: u64) -> Result<Self> {
        if epsilon < 0.0 || !epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "noise epsilon must be a nonnegative finite real, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon, seed })
    }
}

fn additive_with(
    f: impl Fn(f64) -> f64,
    nodes: &[f64],
    epsilon: f64,
    rng: &mut SplitMix64,
) -> Vec<f64> {
    nodes
        .iter()
        .map(|&x| f(x) + epsilon * rng.next_symmetric())
        .collect()
}

fn relative_with(
    f: impl Fn(f64) -> f64,
    nodes: &[f64],
    epsilon: f64,
    norm_f: f64,
    rng: &mut SplitMix64,
) -> Vec<f64> {
    nodes
        .iter()
        .map(|&x| f(x) * (1.0 + epsilon * rng.next_symmetric() / norm_f))
        .collect()
}

/// f(x_j) + eps r_j with r_j drawn per node from the model's seed.
pub fn perturb_additive(
    f: impl Fn(f64) -> f64,
    nodes: &[f64],
    model: &NoiseModel,
) -> Result<Vec<f64>> {
    if model.kind != NoiseKind::Additive {
        return Err(Error::invalid("perturb_additive requires an additive model"));
    }
    let mut rng = SplitMix64::new(model.seed);
    Ok(additive_with(f, nodes, model.epsilon, &mut rng))
}

/// f(x_j) (1 + eps r_j / ||f||); `norm_f` must be positive.
pub fn perturb_relative(
    f: impl Fn(f64) -> f64,
    nodes: &[f64],
    model: &NoiseModel,
    norm_f: f64,
) -> Result<Vec<f64>> {
    if model.kind != NoiseKind::Relative {
        return Err(Error::invalid("perturb_relative requires a relative model"));
    }
    if !(norm_f > 0.0) {
        return Err(Error::invalid(format!(
            "relative perturbation divides by ||f||, which must be positive, got {norm_f}"
        )));
    }
    let mut rng = SplitMix64::new(model.seed);
    Ok(relative_with(f, nodes, model.epsilon, norm_f, &mut rng))
}

/// Measured data for the benchmark problem: purely additive noise around
/// the zero initial value, relative noise on the initial derivative
/// (for a = 1 that is g (1 + sqrt(105) eps rand), since ||g|| = 1/sqrt(105)).
///
/// One stream serves both data: the first nodes.len() draws perturb phi,
/// the rest perturb g.
pub fn benchmark_noisy_data(
    problem: &BenchmarkProblem,
    epsilon: f64,
    seed: u64,
    nodes: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "noise epsilon must be a nonnegative finite real, got {epsilon}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let phi_eps = additive_with(|_| 0.0, nodes, epsilon, &mut rng);
    let g_norm = problem.g_l2_norm();
    let g_eps = relative_with(|x| problem.g_data(x), nodes, epsilon, g_norm, &mut rng);
    Ok((phi_eps, g_eps))
}

/// Both benchmark data perturbed additively; the variant behind the
/// `additive` noise setting.
pub fn benchmark_noisy_data_additive(
    problem: &BenchmarkProblem,
    epsilon: f64,
    seed: u64,
    nodes: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "noise epsilon must be a nonnegative finite real, got {epsilon}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let phi_eps = additive_with(|_| 0.0, nodes, epsilon, &mut rng);
    let g_eps = additive_with(|x| problem.g_data(x), nodes, epsilon, &mut rng);
    Ok((phi_eps, g_eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::QuadratureRule;
    use approx::assert_abs_diff_eq;

    fn grid_nodes(k: usize) -> Vec<f64> {
        (0..=k).map(|j| j as f64 / k as f64).collect()
    }

    #[test]
    fn draws_lie_in_symmetric_unit_interval() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..10_000 {
            let r = rng.next_symmetric();
            assert!((-1.0..1.0).contains(&r));
        }
    }

    #[test]
    fn same_seed_same_stream_across_threads() {
        let main_thread: Vec<u64> = {
            let mut rng = SplitMix64::new(42);
            (0..64).map(|_| rng.next_u64()).collect()
        };
        let spawned = std::thread::spawn(|| {
            let mut rng = SplitMix64::new(42);
            (0..64).map(|_| rng.next_u64()).collect::<Vec<u64>>()
        })
        .join()
        .unwrap();
        assert_eq!(main_thread, spawned);
    }

    #[test]
    fn additive_zero_epsilon_is_exact() {
        let model = NoiseModel::new(NoiseKind::Additive, 0.0, 9).unwrap();
        let nodes = grid_nodes(10);
        let out = perturb_additive(|x| x * x, &nodes, &model).unwrap();
        for (&x, &v) in nodes.iter().zip(&out) {
            assert_eq!(v, x * x);
        }
    }

    #[test]
    fn additive_range_bound_on_zero_function() {
        let model = NoiseModel::new(NoiseKind::Additive, 0.1, 3).unwrap();
        let nodes = grid_nodes(50);
        let out = perturb_additive(|_| 0.0, &nodes, &model).unwrap();
        assert!(out.iter().all(|v| v.abs() <= 0.1));
    }

    #[test]
    fn fixed_seed_reproduces_bitwise() {
        let model = NoiseModel::new(NoiseKind::Additive, 0.3, 42).unwrap();
        let nodes = grid_nodes(20);
        let a = perturb_additive(|x| x.sin(), &nodes, &model).unwrap();
        let b = perturb_additive(|x| x.sin(), &nodes, &model).unwrap();
        assert_eq!(a, b);
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let (p1, g1) = benchmark_noisy_data(&problem, 0.01, 42, &nodes).unwrap();
        let (p2, g2) = benchmark_noisy_data(&problem, 0.01, 42, &nodes).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn relative_matches_manual_sqrt105_form() {
        // For a = 1, ||g|| = 1/sqrt(105), so the relative model must equal
        // g (1 + sqrt(105) eps r) with the same draws.
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let nodes = grid_nodes(20);
        let model = NoiseModel::new(NoiseKind::Relative, 0.05, 11).unwrap();
        let out = perturb_relative(
            |x| problem.g_data(x),
            &nodes,
            &model,
            problem.g_l2_norm(),
        )
        .unwrap();
        let mut rng = SplitMix64::new(11);
        for (&x, &v) in nodes.iter().zip(&out) {
            let expected =
                problem.g_data(x) * (1.0 + 105f64.sqrt() * 0.05 * rng.next_symmetric());
            assert_abs_diff_eq!(v, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn relative_rejects_zero_norm() {
        let model = NoiseModel::new(NoiseKind::Relative, 0.05, 1).unwrap();
        let nodes = grid_nodes(4);
        assert!(perturb_relative(|_| 0.0, &nodes, &model, 0.0).is_err());
    }

    #[test]
    fn perturbation_stays_within_epsilon_in_discrete_norm() {
        // || perturbed - exact || <= eps (1 + delta) with delta < 0.05 in the
        // trapezoid-weighted discrete L2 norm.
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let k = 20;
        let rule = QuadratureRule::trapezoid(k).unwrap();
        for seed in 0..50u64 {
            let eps = 0.05;
            let (phi_eps, g_eps) = benchmark_noisy_data(&problem, eps, seed, &rule.nodes).unwrap();
            let phi_err: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&phi_eps)
                .map(|((_, &w), &v)| w * v * v)
                .sum::<f64>()
                .sqrt();
            let g_err: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&g_eps)
                .map(|((&x, &w), &v)| {
                    let d = v - problem.g_data(x);
                    w * d * d
                })
                .sum::<f64>()
                .sqrt();
            assert!(phi_err <= eps * 1.05, "phi noise {phi_err} exceeds bound");
            assert!(g_err <= eps * 1.05, "g noise {g_err} exceeds bound");
        }
    }

    #[test]
    fn benchmark_data_zero_epsilon_and_sup_bound() {
        let problem = BenchmarkProblem::new(1.0).unwrap();
        let nodes = grid_nodes(20);
        let (phi0, g0) = benchmark_noisy_data(&problem, 0.0, 5, &nodes).unwrap();
        assert!(phi0.iter().all(|&v| v == 0.0));
        for (&x, &v) in nodes.iter().zip(&g0) {
            assert_eq!(v, problem.g_data(x));
        }
        let (phi, _) = benchmark_noisy_data(&problem, 0.1, 5, &nodes).unwrap();
        assert!(phi.iter().all(|v| v.abs() <= 0.1));
    }
}
