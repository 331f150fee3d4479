//! Damped hyperbolic kernels and the scalar bounds they satisfy.
//!
//! The mild solution of the elliptic Cauchy problem carries the kernels
//! cosh(sqrt(lambda) t) and sinh(sqrt(lambda) t), which grow like
//! exp(sqrt(lambda) t) and make the problem ill-posed. Regularization
//! replaces the growing exponential by Q(eps, lambda) exp(sqrt(lambda) t)
//! with
//!
//!   Q(eps, lambda) = exp(-sqrt(lambda) T) / (eps + exp(-sqrt(lambda) T)),
//!
//! so that every damped kernel is bounded by eps^(-t/T). All formulas here
//! are evaluated in the factored form
//!
//!   Q exp(sqrt(lambda) t) = exp(-sqrt(lambda)(T - t)) / (eps + exp(-sqrt(lambda) T)),
//!
//! which never forms a raw exp(sqrt(lambda) t) and therefore cannot
//! overflow for any mode (the raw form already overflows doubles near
//! p = 40 on T = 1).

use crate::error::{Error, Result};

/// Depth search cap for [`picard_contraction_depth`].
pub const CONTRACTION_DEPTH_CAP: u64 = 1_000_000;

/// Regularization and problem constants.
///
/// `epsilon` is both the data-noise bound and the damping strength,
/// `horizon_t` the time horizon T, `lipschitz_k` the Lipschitz constant of
/// the source, `source_sup_m` / `source_lip_n` the bound and Lipschitz
/// constant of a composite multiplier, and `apriori_p` the assumed
/// exponential-weighted bound on the exact solution.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegParams {
    pub epsilon: f64,
    pub horizon_t: f64,
    pub lipschitz_k: f64,
    pub source_sup_m: f64,
    pub source_lip_n: f64,
    pub apriori_p: f64,
}

impl RegParams {
    pub fn new(epsilon: f64, horizon_t: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be a positive finite real, got {epsilon}"
            )));
        }
        if !(horizon_t > 0.0) || !horizon_t.is_finite() {
            return Err(Error::invalid(format!(
                "horizon_t must be a positive finite real, got {horizon_t}"
            )));
        }
        Ok(Self {
            epsilon,
            horizon_t,
            lipschitz_k: 0.0,
            source_sup_m: 0.0,
            source_lip_n: 0.0,
            apriori_p: 0.0,
        })
    }

    pub fn with_lipschitz(mut self, k: f64) -> Result<Self> {
        if k < 0.0 {
            return Err(Error::invalid("lipschitz_k must be nonnegative"));
        }
        self.lipschitz_k = k;
        Ok(self)
    }

    pub fn with_composite_bounds(mut self, sup_m: f64, lip_n: f64) -> Result<Self> {
        if sup_m < 0.0 || lip_n < 0.0 {
            return Err(Error::invalid("composite bounds must be nonnegative"));
        }
        self.source_sup_m = sup_m;
        self.source_lip_n = lip_n;
        Ok(self)
    }

    pub fn with_apriori_bound(mut self, p: f64) -> Result<Self> {
        if p < 0.0 {
            return Err(Error::invalid("apriori_p must be nonnegative"));
        }
        self.apriori_p = p;
        Ok(self)
    }
}

fn check_kernel_args(eps: f64, lambda: f64, t_horizon: f64) -> Result<()> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "eps must be a nonnegative finite real, got {eps}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(t_horizon > 0.0) {
        return Err(Error::invalid(format!("T must be positive, got {t_horizon}")));
    }
    Ok(())
}

/// Q(eps, lambda) = exp(-sqrt(lambda) T) / (eps + exp(-sqrt(lambda) T)).
///
/// Lies in (0, 1]; equals 1 at eps = 0 and decreases in both eps and
/// lambda.
pub fn stability_factor(eps: f64, lambda: f64, t_horizon: f64) -> Result<f64> {
    check_kernel_args(eps, lambda, t_horizon)?;
    if eps == 0.0 {
        return Ok(1.0);
    }
    let e = (-lambda.sqrt() * t_horizon).exp();
    Ok(e / (eps + e))
}

/// Q(eps, lambda) * exp(sqrt(lambda) tau) in factored form; tau in [0, T].
fn damped_growth(eps: f64, lambda: f64, tau: f64, t_horizon: f64) -> f64 {
    let root = lambda.sqrt();
    if eps == 0.0 {
        // Unregularized limit; may overflow for very large sqrt(lambda) tau,
        // which the solver guards against separately.
        return (root * tau).exp();
    }
    (-root * (t_horizon - tau)).exp() / (eps + (-root * t_horizon).exp())
}

/// cosh^eps(sqrt(lambda) t) = (Q e^{sqrt(lambda) t} + e^{-sqrt(lambda) t}) / 2.
pub fn cosh_reg(eps: f64, lambda: f64, t: f64, t_horizon: f64) -> Result<f64> {
    check_kernel_args(eps, lambda, t_horizon)?;
    if !(0.0..=t_horizon).contains(&t) {
        return Err(Error::invalid(format!("t must lie in [0, T], got {t}")));
    }
    let root = lambda.sqrt();
    Ok(0.5 * (damped_growth(eps, lambda, t, t_horizon) + (-root * t).exp()))
}

/// sinh^eps(sqrt(lambda) t) = (Q e^{sqrt(lambda) t} - e^{-sqrt(lambda) t}) / 2.
pub fn sinh_reg(eps: f64, lambda: f64, t: f64, t_horizon: f64) -> Result<f64> {
    check_kernel_args(eps, lambda, t_horizon)?;
    if !(0.0..=t_horizon).contains(&t) {
        return Err(Error::invalid(format!("t must lie in [0, T], got {t}")));
    }
    let root = lambda.sqrt();
    Ok(0.5 * (damped_growth(eps, lambda, t, t_horizon) - (-root * t).exp()))
}

/// sinh^eps(sqrt(lambda) (t - s)); rejects s > t.
pub fn sinh_reg_diff(eps: f64, lambda: f64, t: f64, s: f64, t_horizon: f64) -> Result<f64> {
    if s > t {
        return Err(Error::invalid(format!(
            "difference kernel requires s <= t, got s = {s}, t = {t}"
        )));
    }
    if s < 0.0 {
        return Err(Error::invalid(format!("s must be nonnegative, got {s}")));
    }
    sinh_reg(eps, lambda, t - s, t_horizon)
}

/// Exact integrals of the difference kernel over a marching substep:
///
///   m0 = int_a^b sinh^eps(sqrt(lambda)(t - s)) ds,
///   m1 = int_a^b s sinh^eps(sqrt(lambda)(t - s)) ds,
///
/// for 0 <= a <= b <= t <= T. The kernel is a sum of two exponentials in
/// s, so both moments have closed forms; combined with a linear-in-s
/// collocation of the source this integrates the frozen nonlinear term
/// exactly and leaves no first-order error from the kernel itself.
pub fn sinh_reg_diff_moments(
    eps: f64,
    lambda: f64,
    t: f64,
    a: f64,
    b: f64,
    t_horizon: f64,
) -> Result<(f64, f64)> {
    check_kernel_args(eps, lambda, t_horizon)?;
    if !(0.0 <= a && a <= b && b <= t && t <= t_horizon) {
        return Err(Error::invalid(format!(
            "moment bounds must satisfy 0 <= a <= b <= t <= T, got a = {a}, b = {b}, t = {t}"
        )));
    }
    let k = lambda.sqrt();
    // Growing part: Q e^{k (t - s)} = e0 * e^{-k s} with e0 bounded by 1/eps.
    let e0 = if eps == 0.0 {
        (k * t).exp()
    } else {
        (-k * (t_horizon - t)).exp() / (eps + (-k * t_horizon).exp())
    };
    let ea = (-k * a).exp();
    let eb = (-k * b).exp();
    // int e^{-k s} ds and int s e^{-k s} ds over [a, b].
    let i0_grow = (ea - eb) / k;
    let i1_grow = (a / k + 1.0 / (k * k)) * ea - (b / k + 1.0 / (k * k)) * eb;
    // Decaying part: e^{-k (t - s)}; exponents stay in [-k t, 0].
    let da = (-k * (t - a)).exp();
    let db = (-k * (t - b)).exp();
    let i0_decay = (db - da) / k;
    let i1_decay = (b / k - 1.0 / (k * k)) * db - (a / k - 1.0 / (k * k)) * da;
    let m0 = 0.5 * (e0 * i0_grow - i0_decay);
    let m1 = 0.5 * (e0 * i1_grow - i1_decay);
    Ok((m0, m1))
}

/// Both sides of the logarithmic-rate bound
///
///   eps / ((1 + X)^s (eps + e^{-T X})) <= C(s) (T / ln(1/eps))^s,
///   C(s) = s^s e^{1-s} (1 + T^{-s}),
///
/// for s > 0, X >= 0, 0 < eps < 1. Returns (lhs, rhs).
pub fn sobolev_bound(s: f64, x_big: f64, eps: f64, t_horizon: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("s must be positive, got {s}")));
    }
    if x_big < 0.0 {
        return Err(Error::invalid(format!("X must be nonnegative, got {x_big}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(t_horizon > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    let lhs = eps / ((1.0 + x_big).powf(s) * (eps + (-t_horizon * x_big).exp()));
    let c = s.powf(s) * (1.0 - s).exp() * (1.0 + t_horizon.powf(-s));
    let rhs = c * (t_horizon / (1.0 / eps).ln()).powf(s);
    Ok((lhs, rhs))
}

/// Smallest m >= 1 with (K^2 / (lambda_1 eps^2))^m T^m C^m / m! < 1,
/// C = max(T, 1): the power of the solution map that is guaranteed to
/// contract, hence an upper bound on how many sweeps the fixed-point
/// iteration needs before errors start shrinking.
pub fn picard_contraction_depth(params: &RegParams, lambda_1: f64) -> Result<u64> {
    if !(lambda_1 > 0.0) {
        return Err(Error::invalid("lambda_1 must be positive"));
    }
    let k = params.lipschitz_k;
    if k == 0.0 {
        return Ok(1);
    }
    let t = params.horizon_t;
    let c = t.max(1.0);
    // a = ln of the per-power factor; the condition m*a - ln(m!) < 0 is
    // monotone in m once a is fixed.
    let a = (k * k * t * c / (lambda_1 * params.epsilon * params.epsilon)).ln();
    let mut log_factorial = 0.0;
    for m in 1..=CONTRACTION_DEPTH_CAP {
        log_factorial += (m as f64).ln();
        if (m as f64) * a - log_factorial < 0.0 {
            return Ok(m);
        }
    }
    Err(Error::ContractionDepthExceeded {
        cap: CONTRACTION_DEPTH_CAP,
    })
}
