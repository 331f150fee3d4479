//! Experiment configs, error metrics, table and rate reports, stability
//! checks, and file emission. The only module that touches the
//! filesystem.
//!
//! Everything emitted is a pure function of (config, seed): runs are
//! reproducible byte for byte. Timing and other nondeterministic
//! diagnostics go to stderr, never into the output files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::RegParams;
use crate::model::{BenchmarkProblem, SourceSpec};
use crate::noise;
use crate::solver::{
    self, Grid, RegularizedSolution, PICARD_MAX_ITER, PICARD_TOL,
};
use crate::spectral::{EigenBasis, QuadratureRule};

/// Time horizon of the benchmark experiments.
pub const HORIZON: f64 = 1.0;

/// Default seed for the noise stream; chosen so the default table
/// configuration draws a representative noise realization.
pub const DEFAULT_SEED: u64 = 318;

/// Successive-error ratio above which the smallest-epsilon points of a
/// sweep count as saturated and are dropped before rate fitting.
pub const SATURATION_RATIO: f64 = 0.9;

/// Minimum number of unsaturated points a rate fit needs.
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseSetting {
    /// Measurement noise per the benchmark recipe: additive on the initial
    /// value (which is identically zero, so a relative model would divide
    /// by zero norm), relative on the initial derivative.
    Relative,
    /// Additive noise on both data.
    Additive,
    /// Exact data.
    Off,
}

impl FromStr for NoiseSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative" => Ok(Self::Relative),
            "additive" => Ok(Self::Additive),
            "off" => Ok(Self::Off),
            other => Err(Error::Config(format!(
                "unknown noise setting '{other}' (expected additive, relative or off)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    March,
    Picard,
}

impl FromStr for SolverChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "march" => Ok(Self::March),
            "picard" => Ok(Self::Picard),
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected march or picard)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// One experiment: problem, grid, noise, solver, outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub a_param: f64,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub modes_n: usize,
    pub time_steps_m: usize,
    pub space_points_k: usize,
    pub noise: NoiseSetting,
    pub solver: SolverChoice,
    /// Output plumbing; not part of the experiment identity, so excluded
    /// from the emitted config echo.
    #[serde(skip)]
    pub format: OutputFormat,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    fn base() -> Self {
        Self {
            problem: "benchmark-lane-emden".into(),
            a_param: 1.0,
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            seed: DEFAULT_SEED,
            modes_n: 2,
            time_steps_m: 12,
            space_points_k: 20,
            noise: NoiseSetting::Relative,
            solver: SolverChoice::March,
            format: OutputFormat::Csv,
            out_dir: PathBuf::from("out"),
        }
    }

    /// Error-table sweep over epsilon at the coarse grid.
    pub fn table1_defaults() -> Self {
        Self::base()
    }

    /// Mode-count sweep at fixed epsilon = 1e-4.
    pub fn table2_defaults() -> Self {
        Self {
            epsilons: vec![1e-4],
            ..Self::base()
        }
    }

    /// Noise-free convergence-rate sweep on the fine grid.
    pub fn rate_defaults() -> Self {
        Self {
            epsilons: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            modes_n: 20,
            time_steps_m: 60,
            space_points_k: 80,
            noise: NoiseSetting::Off,
            ..Self::base()
        }
    }

    /// Two-seed continuity check at a few noise levels.
    pub fn stability_defaults() -> Self {
        Self {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            ..Self::base()
        }
    }

    /// Single solve for grid emission.
    pub fn solve_defaults() -> Self {
        Self {
            epsilons: vec![1e-3],
            ..Self::base()
        }
    }

    /// Apply one `key=value` setting (the config-file and CLI vocabulary).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("invalid number '{v}' for key '{key}'")))
        };
        match key {
            "problem" => self.problem = value.to_string(),
            "a" => self.a_param = parse_f64(value)?,
            "epsilon" => {
                let eps: Result<Vec<f64>> = value.split(',').map(|v| parse_f64(v.trim())).collect();
                self.epsilons = eps?;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid seed '{value}'")))?;
            }
            "modes" => self.modes_n = parse_usize(key, value)?,
            "time_steps" => self.time_steps_m = parse_usize(key, value)?,
            "space_points" => self.space_points_k = parse_usize(key, value)?,
            "noise" => self.noise = value.parse()?,
            "solver" => self.solver = value.parse()?,
            "format" => self.format = value.parse()?,
            "out" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Merge a flat key=value config file; later lines override earlier
    /// ones, blank lines and '#' comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key=value, got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem != "benchmark-lane-emden" {
            return Err(Error::Config(format!(
                "unknown problem '{}' (available: benchmark-lane-emden)",
                self.problem
            )));
        }
        if self.a_param == 0.0 || !self.a_param.is_finite() {
            return Err(Error::Config("parameter a must be finite and nonzero".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Config("at least one epsilon is required".into()));
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Config(format!(
                    "epsilon values must lie in (0, 1), got {eps}"
                )));
            }
        }
        if self.modes_n == 0 || self.time_steps_m == 0 || self.space_points_k == 0 {
            return Err(Error::Config("grid extents must be positive".into()));
        }
        Ok(())
    }

    fn problem_instance(&self) -> Result<BenchmarkProblem> {
        BenchmarkProblem::new(self.a_param)
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid integer '{value}' for key '{key}'")))
}

/// One (epsilon, grid, time) error measurement.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub modes_n: usize,
    pub time_steps_m: usize,
    pub space_points_k: usize,
    pub seed: u64,
    pub t: f64,
    pub error: f64,
}

/// Least-squares fit of log error against log epsilon at one time slice.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub t: f64,
    pub slope: f64,
    pub intercept: f64,
    pub slope_theory: f64,
    pub points_used: usize,
}

/// Deterministic run diagnostics (no wall-clock data, so emitted files
/// stay byte-stable).
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunMetadata {
    pub solver_iterations: Vec<usize>,
}

/// Errors per (epsilon, t) plus fitted rates and the config echo.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<RateFit>,
    pub metadata: RunMetadata,
}

impl ErrorReport {
    /// Error at (epsilon, modes, t), if present.
    pub fn lookup(&self, epsilon: f64, modes_n: usize, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| {
                row.modes_n == modes_n
                    && close(row.epsilon, epsilon)
                    && close(row.t, t)
            })
            .map(|row| row.error)
    }

    fn fit_for(&self, t: f64) -> Option<&RateFit> {
        self.fits.iter().find(|fit| close(fit.t, t))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Unnormalized nodal error at time index i:
/// sqrt(sum_{j=0}^{K} |v(x_j, t_i) - u(x_j, t_i)|^2).
pub fn error_norm(
    sol: &RegularizedSolution,
    exact: impl Fn(f64, f64) -> f64,
    time_index: usize,
) -> Result<f64> {
    let t = sol.grid().time_nodes(sol.params().horizon_t)[time_index];
    let mut acc = 0.0;
    for x in sol.grid().space_nodes() {
        let d = sol.eval_at_index(x, time_index)? - exact(x, t);
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Trapezoid-weighted discrete L2 error at time index i (the
/// scale-correct companion of [`error_norm`]).
pub fn error_norm_weighted(
    sol: &RegularizedSolution,
    exact: impl Fn(f64, f64) -> f64,
    time_index: usize,
) -> Result<f64> {
    let t = sol.grid().time_nodes(sol.params().horizon_t)[time_index];
    let k = sol.grid().space_points_k;
    let h = 1.0 / k as f64;
    let mut acc = 0.0;
    for (j, x) in sol.grid().space_nodes().into_iter().enumerate() {
        let w = if j == 0 || j == k { 0.5 * h } else { h };
        let d = sol.eval_at_index(x, time_index)? - exact(x, t);
        acc += w * d * d;
    }
    Ok(acc.sqrt())
}

/// Data, projections and solver invocation for one (epsilon, modes) cell.
fn solve_cell(
    config: &ExperimentConfig,
    problem: &BenchmarkProblem,
    source: &SourceSpec,
    epsilon: f64,
    modes_n: usize,
) -> Result<RegularizedSolution> {
    let grid = Grid::new(modes_n, config.time_steps_m, config.space_points_k)?;
    let basis = EigenBasis::dirichlet_sine(modes_n)?;
    let params = RegParams::new(epsilon, HORIZON)?
        .with_lipschitz(problem.effective_lipschitz())?
        .with_composite_bounds(source.a_bound_m, source.a_lip_n)?;

    // Measured data live on the K-grid and are projected with the
    // trapezoid rule there (a discrete sine transform); exact data are
    // projected with the high-order Gauss rule. The same rule carries the
    // source projections of the solver.
    let (rule, phi_modes, g_modes, v0) = match config.noise {
        NoiseSetting::Off => {
            let rule = QuadratureRule::for_modes(4 * modes_n)?;
            let data = problem.cauchy_data();
            let phi_modes = basis.project_fn(&rule, |x| data.phi(x))?;
            let g_modes = basis.project_fn(&rule, |x| data.g(x))?;
            let v0 = rule.nodes.iter().map(|&x| data.phi(x)).collect();
            (rule, phi_modes, g_modes, v0)
        }
        NoiseSetting::Relative => {
            let rule = QuadratureRule::trapezoid(config.space_points_k)?;
            let (phi_eps, g_eps) =
                noise::benchmark_noisy_data(problem, epsilon, config.seed, &rule.nodes)?;
            let phi_modes = basis.project_samples(&rule, &phi_eps)?;
            let g_modes = basis.project_samples(&rule, &g_eps)?;
            (rule, phi_modes, g_modes, phi_eps)
        }
        NoiseSetting::Additive => {
            let rule = QuadratureRule::trapezoid(config.space_points_k)?;
            let (phi_eps, g_eps) =
                noise::benchmark_noisy_data_additive(problem, epsilon, config.seed, &rule.nodes)?;
            let phi_modes = basis.project_samples(&rule, &phi_eps)?;
            let g_modes = basis.project_samples(&rule, &g_eps)?;
            (rule, phi_modes, g_modes, phi_eps)
        }
    };

    match config.solver {
        SolverChoice::March => solver::regularized_march(
            &basis, &rule, source, &phi_modes, &g_modes, &v0, &params, &grid,
        ),
        SolverChoice::Picard => solver::picard_solve(
            &basis,
            &rule,
            source,
            &phi_modes,
            &g_modes,
            &params,
            &grid,
            PICARD_TOL,
            PICARD_MAX_ITER,
        ),
    }
}

/// Public single-solve entry (first epsilon of the config).
pub fn solve_single(config: &ExperimentConfig) -> Result<RegularizedSolution> {
    config.validate()?;
    let problem = config.problem_instance()?;
    let source = problem.source_spec();
    solve_cell(config, &problem, &source, config.epsilons[0], config.modes_n)
}

/// Time indices of the reported slices T/4, T/2, 3T/4.
fn report_time_indices(time_steps_m: usize) -> Result<[usize; 3]> {
    if !time_steps_m.is_multiple_of(4) {
        return Err(Error::Config(format!(
            "time_steps must be divisible by 4 so that T/4, T/2, 3T/4 are grid times; got {time_steps_m}"
        )));
    }
    let q = time_steps_m / 4;
    Ok([q, 2 * q, 3 * q])
}

/// Run the epsilon sweep (optionally over several truncation levels) and
/// collect errors at t = T/4, T/2, 3T/4.
pub fn run_table_modes(config: &ExperimentConfig, modes: &[usize]) -> Result<ErrorReport> {
    run_sweep_with_source(config, modes, None)
}

/// Epsilon sweep at the config's truncation level.
pub fn run_table(config: &ExperimentConfig) -> Result<ErrorReport> {
    run_table_modes(config, &[config.modes_n])
}

/// Sweep core; `source_override` substitutes the composite (or any other)
/// source variant while keeping the benchmark's exact solution as the
/// reference.
pub fn run_sweep_with_source(
    config: &ExperimentConfig,
    modes: &[usize],
    source_override: Option<&SourceSpec>,
) -> Result<ErrorReport> {
    config.validate()?;
    if modes.is_empty() {
        return Err(Error::Config("at least one truncation level is required".into()));
    }
    let problem = config.problem_instance()?;
    let default_source = problem.source_spec();
    let source = source_override.unwrap_or(&default_source);
    let indices = report_time_indices(config.time_steps_m)?;

    let mut rows = Vec::new();
    let mut metadata = RunMetadata::default();
    for &epsilon in &config.epsilons {
        for &modes_n in modes {
            let sol = solve_cell(config, &problem, source, epsilon, modes_n)?;
            if let Some(iters) = sol.iterations() {
                metadata.solver_iterations.push(iters);
            }
            let t_nodes = sol.grid().time_nodes(HORIZON);
            for &i in &indices {
                rows.push(ReportRow {
                    epsilon,
                    modes_n,
                    time_steps_m: config.time_steps_m,
                    space_points_k: config.space_points_k,
                    seed: config.seed,
                    t: t_nodes[i],
                    error: error_norm(&sol, |x, t| problem.exact_eval(x, t), i)?,
                });
            }
        }
    }

    let mut report = ErrorReport {
        config: config.clone(),
        rows,
        fits: Vec::new(),
        metadata,
    };
    // Best-effort fits at each reported slice; sweeps without enough
    // unsaturated points simply carry no fit.
    let times: [f64; 3] = [0.25 * HORIZON, 0.5 * HORIZON, 0.75 * HORIZON];
    for t in times {
        if let Ok(fit) = rate_fit(&report, t) {
            report.fits.push(fit);
        }
    }
    Ok(report)
}

/// Least-squares slope of log error against log epsilon at time slice t,
/// after dropping saturated smallest-epsilon points (successive ratio
/// above [`SATURATION_RATIO`]). Reported next to the theoretical slope
/// 1 - t/T.
pub fn rate_fit(report: &ErrorReport, t: f64) -> Result<RateFit> {
    let mut points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|row| row.modes_n == report.config.modes_n && close(row.t, t) && row.error > 0.0)
        .map(|row| (row.epsilon, row.error))
        .collect();
    points.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    points.dedup_by(|a, b| close(a.0, b.0));
    // Walk in from the smallest epsilon while the error has stopped
    // decreasing.
    while points.len() > 1 {
        let last = points[points.len() - 1].1;
        let prev = points[points.len() - 2].1;
        if last / prev > SATURATION_RATIO {
            points.pop();
        } else {
            break;
        }
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::RateUnfittable {
            needed: MIN_FIT_POINTS,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, err) in &points {
        let x = eps.ln();
        let y = err.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok(RateFit {
        t,
        slope,
        intercept,
        slope_theory: 1.0 - t / HORIZON,
        points_used: points.len(),
    })
}

/// One time slice of the two-seed continuity check.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub epsilon: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl StabilityRow {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Continuity-in-data report: for two noise seeds at the same epsilon,
/// the squared solution distance against its theoretical envelope.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub config: ExperimentConfig,
    pub seed1: u64,
    pub seed2: u64,
    pub rows: Vec<StabilityRow>,
}

impl StabilityReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(StabilityRow::holds)
    }
}

/// Solve with two noise seeds and compare
///
///   ||v1(t_i) - v2(t_i)||^2  <=  3 exp(3 T^2 K^2 / lambda_1) eps^(-2 t_i / T)
///                                (||phi1 - phi2||^2 + ||g1 - g2||^2 / lambda_1)
///
/// at every grid time, with the effective Lipschitz constant and
/// trapezoid-weighted data norms.
pub fn stability_check(
    config: &ExperimentConfig,
    seed1: u64,
    seed2: u64,
) -> Result<StabilityReport> {
    config.validate()?;
    if config.noise == NoiseSetting::Off {
        return Err(Error::Config(
            "stability check compares noisy data; use noise=additive or relative".into(),
        ));
    }
    let problem = config.problem_instance()?;
    let source = problem.source_spec();
    let lambda_1 = (std::f64::consts::PI).powi(2);
    let k_eff = problem.effective_lipschitz();
    let envelope = 3.0 * (3.0 * HORIZON * HORIZON * k_eff * k_eff / lambda_1).exp();
    let rule = QuadratureRule::trapezoid(config.space_points_k)?;

    let mut rows = Vec::new();
    for &epsilon in &config.epsilons {
        let mut cfg1 = config.clone();
        cfg1.seed = seed1;
        let mut cfg2 = config.clone();
        cfg2.seed = seed2;
        let sol1 = solve_cell(&cfg1, &problem, &source, epsilon, config.modes_n)?;
        let sol2 = solve_cell(&cfg2, &problem, &source, epsilon, config.modes_n)?;

        let draw = |seed: u64| -> Result<(Vec<f64>, Vec<f64>)> {
            match config.noise {
                NoiseSetting::Relative => {
                    noise::benchmark_noisy_data(&problem, epsilon, seed, &rule.nodes)
                }
                NoiseSetting::Additive => {
                    noise::benchmark_noisy_data_additive(&problem, epsilon, seed, &rule.nodes)
                }
                NoiseSetting::Off => unreachable!(),
            }
        };
        let (phi1, g1) = draw(seed1)?;
        let (phi2, g2) = draw(seed2)?;
        let mut phi_gap = 0.0;
        let mut g_gap = 0.0;
        for j in 0..rule.len() {
            phi_gap += rule.weights[j] * (phi1[j] - phi2[j]).powi(2);
            g_gap += rule.weights[j] * (g1[j] - g2[j]).powi(2);
        }
        let data_term = phi_gap + g_gap / lambda_1;

        for (i, t) in sol1.grid().time_nodes(HORIZON).into_iter().enumerate() {
            let mut lhs = 0.0;
            for p in 1..=config.modes_n {
                lhs += (sol1.coefficient(p, i)? - sol2.coefficient(p, i)?).powi(2);
            }
            let rhs = envelope * epsilon.powf(-2.0 * t / HORIZON) * data_term;
            rows.push(StabilityRow {
                epsilon,
                t,
                lhs,
                rhs,
            });
        }
    }
    Ok(StabilityReport {
        config: config.clone(),
        seed1,
        seed2,
        rows,
    })
}

fn fmt_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// CSV form of an error report. Columns:
/// epsilon,N,M,K,seed,t,error,slope_fit,slope_theory.
pub fn csv_string(report: &ErrorReport) -> String {
    let mut out = String::from("epsilon,N,M,K,seed,t,error,slope_fit,slope_theory\n");
    for row in &report.rows {
        let (fit, theory) = match report.fit_for(row.t) {
            Some(fit) => (fmt_float(fit.slope), fmt_float(fit.slope_theory)),
            None => (String::new(), fmt_float(1.0 - row.t / HORIZON)),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_float(row.epsilon),
            row.modes_n,
            row.time_steps_m,
            row.space_points_k,
            row.seed,
            fmt_float(row.t),
            fmt_float(row.error),
            fit,
            theory,
        ));
    }
    out
}

/// JSON form: the same rows plus the config block.
pub fn json_string(report: &ErrorReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

/// CSV form of a stability report. Columns:
/// epsilon,N,M,K,seed1,seed2,t,lhs,rhs.
pub fn stability_csv_string(report: &StabilityReport) -> String {
    let mut out = String::from("epsilon,N,M,K,seed1,seed2,t,lhs,rhs\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_float(row.epsilon),
            report.config.modes_n,
            report.config.time_steps_m,
            report.config.space_points_k,
            report.seed1,
            report.seed2,
            fmt_float(row.t),
            fmt_float(row.lhs),
            fmt_float(row.rhs),
        ));
    }
    out
}

pub fn stability_json_string(report: &StabilityReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

/// Full (t, x, v, u_exact) grid of one solve, for plotting elsewhere.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionGrid {
    pub config: ExperimentConfig,
    pub rows: Vec<SolutionGridRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionGridRow {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub u_exact: f64,
}

pub fn solution_grid(config: &ExperimentConfig, sol: &RegularizedSolution) -> Result<SolutionGrid> {
    let problem = config.problem_instance()?;
    let t_nodes = sol.grid().time_nodes(HORIZON);
    let mut rows = Vec::new();
    for (i, &t) in t_nodes.iter().enumerate() {
        for x in sol.grid().space_nodes() {
            rows.push(SolutionGridRow {
                t,
                x,
                v: sol.eval_at_index(x, i)?,
                u_exact: problem.exact_eval(x, t),
            });
        }
    }
    Ok(SolutionGrid {
        config: config.clone(),
        rows,
    })
}

pub fn solution_csv_string(grid: &SolutionGrid) -> String {
    let mut out = String::from("t,x,v,u_exact\n");
    for row in &grid.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(row.t),
            fmt_float(row.x),
            fmt_float(row.v),
            fmt_float(row.u_exact),
        ));
    }
    out
}

pub fn solution_json_string(grid: &SolutionGrid) -> Result<String> {
    serde_json::to_string_pretty(grid)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a report under `out_dir/stem.{csv,json}` in the requested
/// format; returns the written paths. Files are byte-stable for fixed
/// (config, seed).
pub fn emit(
    report: &ErrorReport,
    out_dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let contents = match format {
        OutputFormat::Csv => csv_string(report),
        OutputFormat::Json => json_string(report)?,
    };
    let path = out_dir.join(format!("{stem}.{}", extension(format)));
    write_file(&path, &contents)?;
    Ok(vec![path])
}

pub fn emit_stability(
    report: &StabilityReport,
    out_dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let contents = match format {
        OutputFormat::Csv => stability_csv_string(report),
        OutputFormat::Json => stability_json_string(report)?,
    };
    let path = out_dir.join(format!("{stem}.{}", extension(format)));
    write_file(&path, &contents)?;
    Ok(vec![path])
}

pub fn emit_solution(
    grid: &SolutionGrid,
    out_dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let contents = match format {
        OutputFormat::Csv => solution_csv_string(grid),
        OutputFormat::Json => solution_json_string(grid)?,
    };
    let path = out_dir.join(format!("{stem}.{}", extension(format)));
    write_file(&path, &contents)?;
    Ok(vec![path])
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

impl fmt::Display for RateFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t = {:.3}: fitted slope {:.4} (theory {:.4}, {} points)",
            self.t, self.slope, self.slope_theory, self.points_used
        )
    }
}
