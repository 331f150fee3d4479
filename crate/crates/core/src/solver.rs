//! Mild-solution evaluation, the damped-kernel time march, the Picard
//! fixed-point reference solver, and the terminal-time construction.
//!
//! The marching scheme advances the sine-series coefficients c_{p,i} of
//! the regularized solution by
//!
//!   c_{p,i} = cosh^eps(k_p t_i) phi_p + sinh^eps(k_p t_i) / k_p g_p
//!           + sum_{j<=i} int_{t_{j-1}}^{t_j} sinh^eps(k_p (t_i - s)) / k_p
//!                        <f(s, ., v(., t_{j-1})), phi_p> ds,
//!
//! with the field argument of f frozen at the left substep node and the
//! kernel integrated exactly against a linear-in-s collocation of the
//! projection through two Gauss points per substep. Coefficients are
//! stored against the orthonormal basis sqrt(2) sin(p pi x); the plain
//! sine-series weights w_{p,i} = sqrt(2) c_{p,i} are exposed separately.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{self, RegParams};
use crate::model::SourceSpec;
use crate::spectral::{EigenBasis, QuadratureRule};

/// Largest sqrt(lambda) * t admitted by the unregularized mild-solution
/// kernels before exp overflows.
pub const EXP_GUARD: f64 = 700.0;

/// Default stopping tolerance of the Picard solver (sup over time of the
/// discrete-L2 increment between successive iterates).
pub const PICARD_TOL: f64 = 1e-10;

/// Default iteration cap of the Picard solver.
pub const PICARD_MAX_ITER: usize = 200;

/// Truncation and grid sizes: N sine modes, M time steps (t_i = i T / M),
/// K space panels (x_j = j / K).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub modes_n: usize,
    pub time_steps_m: usize,
    pub space_points_k: usize,
}

impl Grid {
    pub fn new(modes_n: usize, time_steps_m: usize, space_points_k: usize) -> Result<Self> {
        if modes_n == 0 || time_steps_m == 0 || space_points_k == 0 {
            return Err(Error::invalid("grid extents must all be at least 1"));
        }
        Ok(Self {
            modes_n,
            time_steps_m,
            space_points_k,
        })
    }

    /// t_i = i T / M for i = 0..=M; the endpoints are exact.
    pub fn time_nodes(&self, t_horizon: f64) -> Vec<f64> {
        let m = self.time_steps_m;
        (0..=m)
            .map(|i| i as f64 / m as f64 * t_horizon)
            .collect()
    }

    /// x_j = j / K for j = 0..=K.
    pub fn space_nodes(&self) -> Vec<f64> {
        let k = self.space_points_k;
        (0..=k).map(|j| j as f64 / k as f64).collect()
    }
}

/// Mode-by-time coefficient matrix of a regularized solve.
///
/// `coeffs[p-1][i]` is the coefficient of the orthonormal mode phi_p at
/// t_i. For the default sine basis the paper-style plain sine weights are
/// `sine_weight(p, i) = sqrt(2) * coefficient(p, i)`, so that
/// v(x, t_i) = sum_p sine_weight(p, i) sin(p pi x); both conventions
/// evaluate to the same field.
#[derive(Debug, Clone)]
pub struct RegularizedSolution {
    basis: EigenBasis,
    coeffs: Vec<Vec<f64>>,
    grid: Grid,
    params: RegParams,
    iterations: Option<usize>,
}

impl RegularizedSolution {
    fn new(
        basis: EigenBasis,
        coeffs: Vec<Vec<f64>>,
        grid: Grid,
        params: RegParams,
        iterations: Option<usize>,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), grid.modes_n);
        debug_assert!(coeffs.iter().all(|row| row.len() == grid.time_steps_m + 1));
        Self {
            basis,
            coeffs,
            grid,
            params,
            iterations,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &RegParams {
        &self.params
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    /// Fixed-point sweeps used to produce this solution (marching
    /// solutions report none).
    pub fn iterations(&self) -> Option<usize> {
        self.iterations
    }

    /// Orthonormal coefficient c_{p,i}; p is 1-based, i indexes t_i.
    pub fn coefficient(&self, p: usize, i: usize) -> Result<f64> {
        if p == 0 {
            return Err(Error::ZeroModeIndex);
        }
        if p > self.grid.modes_n || i > self.grid.time_steps_m {
            return Err(Error::invalid(format!(
                "coefficient index (p = {p}, i = {i}) outside grid"
            )));
        }
        Ok(self.coeffs[p - 1][i])
    }

    /// Plain sine-series weight w_{p,i} = sqrt(2) c_{p,i}.
    pub fn sine_weight(&self, p: usize, i: usize) -> Result<f64> {
        Ok(std::f64::consts::SQRT_2 * self.coefficient(p, i)?)
    }

    /// Coefficients of all modes at time index i.
    pub fn column(&self, i: usize) -> Result<Vec<f64>> {
        if i > self.grid.time_steps_m {
            return Err(Error::invalid(format!("time index {i} outside grid")));
        }
        Ok(self.coeffs.iter().map(|row| row[i]).collect())
    }

    /// Field value at (x, t_i).
    pub fn eval_at_index(&self, x: f64, i: usize) -> Result<f64> {
        let col = self.column(i)?;
        self.basis.synthesize(&col, x)
    }

    /// Field value at (x, t) with linear interpolation of the coefficient
    /// matrix between bracketing time nodes.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let col = self.interpolated_column(t)?;
        self.basis.synthesize(&col, x)
    }

    /// Linear-in-time interpolation of the coefficient matrix.
    pub fn interpolated_column(&self, t: f64) -> Result<Vec<f64>> {
        let t_horizon = self.params.horizon_t;
        if !(0.0..=t_horizon).contains(&t) {
            return Err(Error::invalid(format!(
                "time {t} lies outside [0, {t_horizon}]"
            )));
        }
        let m = self.grid.time_steps_m;
        let pos = t / t_horizon * m as f64;
        let lo = (pos.floor() as usize).min(m - 1);
        let theta = pos - lo as f64;
        Ok(self
            .coeffs
            .iter()
            .map(|row| (1.0 - theta) * row[lo] + theta * row[lo + 1])
            .collect())
    }
}

/// Mild solution of the source-free problem at time t, mode by mode:
/// cosh(k_p t) phi_p + sinh(k_p t) / k_p g_p.
///
/// This is the unregularized forward map; it rejects arguments for which
/// exp(k_N t) leaves the double range.
pub fn mild_homogeneous(
    basis: &EigenBasis,
    phi_modes: &[f64],
    g_modes: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let n = check_mode_inputs(basis, phi_modes, g_modes)?;
    if t < 0.0 {
        return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
    }
    let max_arg = basis.eigenvalue(n)?.sqrt() * t;
    if max_arg > EXP_GUARD {
        return Err(Error::ExpRangeExceeded(max_arg));
    }
    (1..=n)
        .map(|p| {
            let k = basis.eigenvalue(p)?.sqrt();
            Ok((k * t).cosh() * phi_modes[p - 1] + (k * t).sinh() / k * g_modes[p - 1])
        })
        .collect()
}

/// Mild solution with a source independent of u: adds
/// int_0^t sinh(k_p (t - s)) / k_p f_p(s) ds by composite Gauss quadrature
/// with `substeps` panels. `f_mode(p, s)` is the projection of f(s) on
/// phi_p (p is 1-based).
pub fn mild_inhomogeneous(
    basis: &EigenBasis,
    phi_modes: &[f64],
    g_modes: &[f64],
    f_mode: impl Fn(usize, f64) -> f64,
    t: f64,
    substeps: usize,
) -> Result<Vec<f64>> {
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let mut coeffs = mild_homogeneous(basis, phi_modes, g_modes, t)?;
    if t == 0.0 {
        return Ok(coeffs);
    }
    let rule = QuadratureRule::gauss_legendre_composite(5, substeps)?;
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let p = idx + 1;
        let k = basis.eigenvalue(p)?.sqrt();
        let mut integral = 0.0;
        for (&xi, &wi) in rule.nodes.iter().zip(&rule.weights) {
            let s = xi * t;
            integral += wi * t * ((k * (t - s)).sinh() / k) * f_mode(p, s);
        }
        *c += integral;
    }
    Ok(coeffs)
}

fn check_mode_inputs(basis: &EigenBasis, phi_modes: &[f64], g_modes: &[f64]) -> Result<usize> {
    let n = basis.mode_count();
    if phi_modes.len() != n || g_modes.len() != n {
        return Err(Error::invalid(format!(
            "mode vectors must have length {n}, got {} and {}",
            phi_modes.len(),
            g_modes.len()
        )));
    }
    Ok(n)
}

/// Two-point Gauss nodes of [a, b].
fn gauss2(a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let off = half / 3f64.sqrt();
    (mid - off, mid + off)
}

/// Data part of the regularized map: cosh^eps(k t_i) phi_p
/// + sinh^eps(k t_i) / k g_p for every (p, i).
fn damped_data_terms(
    basis: &EigenBasis,
    phi_modes: &[f64],
    g_modes: &[f64],
    params: &RegParams,
    t_nodes: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = basis.mode_count();
    let eps = params.epsilon;
    let t_horizon = params.horizon_t;
    let mut out = vec![vec![0.0; t_nodes.len()]; n];
    for (idx, row) in out.iter_mut().enumerate() {
        let p = idx + 1;
        let lambda = basis.eigenvalue(p)?;
        let k = lambda.sqrt();
        for (i, &t_i) in t_nodes.iter().enumerate() {
            let c = kernels::cosh_reg(eps, lambda, t_i, t_horizon)?;
            let s = kernels::sinh_reg(eps, lambda, t_i, t_horizon)?;
            row[i] = c * phi_modes[idx] + s / k * g_modes[idx];
        }
    }
    Ok(out)
}

/// Projections of the source at the two Gauss points of one substep.
struct SubstepSource {
    s1: f64,
    s2: f64,
    proj1: Vec<f64>,
    proj2: Vec<f64>,
}

/// Integral sum_{j<=i} int sinh^eps(k (t_i - s)) / k * proj(s) ds with the
/// projection collocated linearly through the substep's Gauss points.
fn source_integral(
    lambda: f64,
    idx: usize,
    i: usize,
    t_nodes: &[f64],
    substeps: &[SubstepSource],
    params: &RegParams,
) -> Result<f64> {
    let k = lambda.sqrt();
    let t_i = t_nodes[i];
    let mut acc = 0.0;
    for (j, sub) in substeps.iter().take(i).enumerate() {
        let p1 = sub.proj1[idx];
        let p2 = sub.proj2[idx];
        let beta = (p2 - p1) / (sub.s2 - sub.s1);
        let alpha = p1 - beta * sub.s1;
        let (m0, m1) = kernels::sinh_reg_diff_moments(
            params.epsilon,
            lambda,
            t_i,
            t_nodes[j],
            t_nodes[j + 1],
            params.horizon_t,
        )?;
        acc += (alpha * m0 + beta * m1) / k;
    }
    Ok(acc)
}

fn check_march_inputs(
    basis: &EigenBasis,
    rule: &QuadratureRule,
    phi_modes: &[f64],
    g_modes: &[f64],
    grid: &Grid,
) -> Result<()> {
    if basis.mode_count() != grid.modes_n {
        return Err(Error::invalid(format!(
            "basis carries {} modes but the grid asks for {}",
            basis.mode_count(),
            grid.modes_n
        )));
    }
    check_mode_inputs(basis, phi_modes, g_modes)?;
    if rule.is_empty() {
        return Err(Error::invalid("projection rule has no nodes"));
    }
    Ok(())
}

/// Explicit time march of the regularized integral equation.
///
/// `phi_modes` and `g_modes` are the data projections on the basis;
/// `v0_at_rule_nodes` samples the initial field v(., t_0) at the
/// projection rule's nodes (for measured data this is the raw noisy
/// initial value, per the scheme's starting guess). Column i = 0 of the
/// result holds the projections of that initial field, i.e. `phi_modes`.
#[allow(clippy::too_many_arguments)]
pub fn regularized_march(
    basis: &EigenBasis,
    rule: &QuadratureRule,
    source: &SourceSpec,
    phi_modes: &[f64],
    g_modes: &[f64],
    v0_at_rule_nodes: &[f64],
    params: &RegParams,
    grid: &Grid,
) -> Result<RegularizedSolution> {
    check_march_inputs(basis, rule, phi_modes, g_modes, grid)?;
    if v0_at_rule_nodes.len() != rule.len() {
        return Err(Error::invalid(format!(
            "initial field has {} samples but the rule has {} nodes",
            v0_at_rule_nodes.len(),
            rule.len()
        )));
    }
    let n = grid.modes_n;
    let m = grid.time_steps_m;
    let t_nodes = grid.time_nodes(params.horizon_t);
    let data_terms = damped_data_terms(basis, phi_modes, g_modes, params, &t_nodes)?;

    let mut coeffs = vec![vec![0.0; m + 1]; n];
    for (idx, row) in coeffs.iter_mut().enumerate() {
        row[0] = phi_modes[idx];
    }

    let mut substeps: Vec<SubstepSource> = Vec::with_capacity(m);
    for i in 1..=m {
        // Substep j = i freezes the field at t_{i-1}.
        let field: Vec<f64> = if i == 1 {
            v0_at_rule_nodes.to_vec()
        } else {
            let col: Vec<f64> = (0..n).map(|p| coeffs[p][i - 1]).collect();
            rule.nodes
                .iter()
                .map(|&x| basis.synthesize(&col, x))
                .collect::<Result<_>>()?
        };
        let (s1, s2) = gauss2(t_nodes[i - 1], t_nodes[i]);
        let f1 = source.eval(s1, &rule.nodes, &field)?;
        let f2 = source.eval(s2, &rule.nodes, &field)?;
        substeps.push(SubstepSource {
            s1,
            s2,
            proj1: basis.project_samples(rule, &f1)?,
            proj2: basis.project_samples(rule, &f2)?,
        });

        for idx in 0..n {
            let lambda = basis.eigenvalue(idx + 1)?;
            let value = data_terms[idx][i]
                + source_integral(lambda, idx, i, &t_nodes, &substeps, params)?;
            if !value.is_finite() {
                return Err(Error::CoefficientBlowUp {
                    mode: idx + 1,
                    step: i,
                });
            }
            coeffs[idx][i] = value;
        }
    }
    Ok(RegularizedSolution::new(
        basis.clone(),
        coeffs,
        *grid,
        params.clone(),
        None,
    ))
}

/// One application of the regularized solution map to a coefficient
/// matrix: data terms plus the source integral with the field interpolated
/// in time at the quadrature points (no freezing). This is the map whose
/// fixed point [`picard_solve`] finds; it is exposed so the fixed point
/// can be verified by re-application.
#[allow(clippy::too_many_arguments)]
pub fn apply_solution_map(
    basis: &EigenBasis,
    rule: &QuadratureRule,
    source: &SourceSpec,
    phi_modes: &[f64],
    g_modes: &[f64],
    params: &RegParams,
    grid: &Grid,
    coeffs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    check_march_inputs(basis, rule, phi_modes, g_modes, grid)?;
    let n = grid.modes_n;
    let m = grid.time_steps_m;
    if coeffs.len() != n || coeffs.iter().any(|row| row.len() != m + 1) {
        return Err(Error::invalid("coefficient matrix extents do not match grid"));
    }
    let t_nodes = grid.time_nodes(params.horizon_t);
    let data_terms = damped_data_terms(basis, phi_modes, g_modes, params, &t_nodes)?;
    let dt = params.horizon_t / m as f64;

    let mut substeps: Vec<SubstepSource> = Vec::with_capacity(m);
    for j in 1..=m {
        let (s1, s2) = gauss2(t_nodes[j - 1], t_nodes[j]);
        let project_at = |s: f64| -> Result<Vec<f64>> {
            let theta = (s - t_nodes[j - 1]) / dt;
            let col: Vec<f64> = (0..n)
                .map(|p| (1.0 - theta) * coeffs[p][j - 1] + theta * coeffs[p][j])
                .collect();
            let field: Vec<f64> = rule
                .nodes
                .iter()
                .map(|&x| basis.synthesize(&col, x))
                .collect::<Result<_>>()?;
            basis.project_samples(rule, &source.eval(s, &rule.nodes, &field)?)
        };
        let proj1 = project_at(s1)?;
        let proj2 = project_at(s2)?;
        substeps.push(SubstepSource { s1, s2, proj1, proj2 });
    }

    let mut next = vec![vec![0.0; m + 1]; n];
    for idx in 0..n {
        let lambda = basis.eigenvalue(idx + 1)?;
        for i in 0..=m {
            let value =
                data_terms[idx][i] + source_integral(lambda, idx, i, &t_nodes, &substeps, params)?;
            if !value.is_finite() {
                return Err(Error::CoefficientBlowUp {
                    mode: idx + 1,
                    step: i,
                });
            }
            next[idx][i] = value;
        }
    }
    Ok(next)
}

/// Sup over time of the discrete-L2 distance between coefficient columns.
fn sup_column_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let m = a[0].len();
    (0..m)
        .map(|i| {
            a.iter()
                .zip(b)
                .map(|(ra, rb)| (ra[i] - rb[i]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Fixed point of the regularized solution map by Picard iteration,
/// started from the source-free solution (so a zero source converges in
/// one sweep).
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    basis: &EigenBasis,
    rule: &QuadratureRule,
    source: &SourceSpec,
    phi_modes: &[f64],
    g_modes: &[f64],
    params: &RegParams,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<RegularizedSolution> {
    check_march_inputs(basis, rule, phi_modes, g_modes, grid)?;
    let t_nodes = grid.time_nodes(params.horizon_t);
    let initial = damped_data_terms(basis, phi_modes, g_modes, params, &t_nodes)?;
    picard_solve_from(
        initial, basis, rule, source, phi_modes, g_modes, params, grid, tol, max_iter,
    )
}

/// Picard iteration from a caller-supplied initial coefficient matrix.
/// The fixed point is unique, so any bounded initial iterate converges to
/// the same solution.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve_from(
    initial: Vec<Vec<f64>>,
    basis: &EigenBasis,
    rule: &QuadratureRule,
    source: &SourceSpec,
    phi_modes: &[f64],
    g_modes: &[f64],
    params: &RegParams,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<RegularizedSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let mut current = initial;
    let mut history = Vec::with_capacity(max_iter.min(64));
    for iter in 1..=max_iter {
        let next = apply_solution_map(
            basis, rule, source, phi_modes, g_modes, params, grid, &current,
        )?;
        let increment = sup_column_distance(&next, &current);
        history.push(increment);
        current = next;
        if increment < tol {
            return Ok(RegularizedSolution::new(
                basis.clone(),
                current,
                *grid,
                params.clone(),
                Some(iter),
            ));
        }
    }
    let last = *history.last().unwrap();
    Err(Error::FixedPointDiverged {
        tol,
        max_iter,
        last,
        history,
    })
}

/// Interior time t_eps solving (T - t)^2 = eps^(2 - 2t/T), used to read
/// off the solution at the final time with logarithmic accuracy. The
/// residual at the returned root is below 1e-12, and the root satisfies
/// T - t_eps < sqrt(T / ln(1/eps)).
///
/// Requires 0 < eps < 1; for horizons T <= eps no interior root exists
/// (as eps -> 1 the root location T - t_eps -> 1 collides with the
/// origin when T <= 1), which is reported as an error.
pub fn terminal_time(eps: f64, t_horizon: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(t_horizon > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    let h = |t: f64| (t_horizon - t).powi(2) - eps.powf(2.0 - 2.0 * t / t_horizon);
    // h(T) = -1; a sign change requires h(0) = T^2 - eps^2 > 0.
    if h(0.0) <= 0.0 {
        return Err(Error::NoTerminalRoot { epsilon: eps });
    }
    let mut lo = 0.0;
    let mut hi = t_horizon;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * t_horizon {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    debug_assert!(h(root).abs() < 1e-12);
    Ok(root)
}

/// Terminal-time evaluation rule: the regularized solution everywhere
/// except at t = T, where the interior value at t_eps is used instead.
#[derive(Debug, Clone)]
pub struct TerminalSolution {
    solution: RegularizedSolution,
    t_eps: f64,
}

impl TerminalSolution {
    pub fn new(solution: RegularizedSolution, t_eps: f64) -> Result<Self> {
        let t_horizon = solution.params().horizon_t;
        if !(t_eps > 0.0 && t_eps < t_horizon) {
            return Err(Error::invalid(format!(
                "t_eps must lie in (0, T), got {t_eps}"
            )));
        }
        Ok(Self { solution, t_eps })
    }

    pub fn t_eps(&self) -> f64 {
        self.t_eps
    }

    pub fn solution(&self) -> &RegularizedSolution {
        &self.solution
    }

    /// U(x, t): the solution itself for t < T, the value at t_eps at t = T.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let t_horizon = self.solution.params().horizon_t;
        if t > t_horizon {
            return Err(Error::invalid(format!(
                "time {t} lies outside [0, {t_horizon}]"
            )));
        }
        if t == t_horizon {
            self.solution.eval(x, self.t_eps)
        } else {
            self.solution.eval(x, t)
        }
    }
}
