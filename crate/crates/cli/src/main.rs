//! Command-line front end: error tables, rate sweeps, stability checks,
//! and single solves with grid emission.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cauchy_reg::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "cauchy-reg",
    version,
    about = "Regularized spectral solver for the ill-posed elliptic Cauchy problem",
    after_help = "Outputs are deterministic: a fixed (config, seed) pair reproduces every \
                  emitted byte. Noise is drawn per space node after the grid is fixed, so \
                  changing --space-points changes the draw stream."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error table over a noise-level sweep (defaults: eps 1e-1..1e-5, N=2, M=12, K=20).
    Table1(CommonOpts),
    /// Error table over truncation levels N = 2..4 at eps = 1e-4.
    Table2(CommonOpts),
    /// Noise-free convergence-rate sweep with log-log slope fits
    /// (defaults: eps {1e-2,3e-3,1e-3,3e-4,1e-4}, N=20, M=60, K=80).
    Rate(CommonOpts),
    /// Continuity-in-data check for two noise seeds (seed and seed + 1).
    Stability(CommonOpts),
    /// Single solve; emits the full (t, x, v, u_exact) grid.
    Solve(CommonOpts),
}

#[derive(Args)]
struct CommonOpts {
    /// Comma-separated noise/regularization levels, each in (0, 1).
    #[arg(long, value_name = "LIST")]
    epsilon: Option<String>,
    /// Number of retained sine modes N.
    #[arg(long, value_name = "N")]
    modes: Option<usize>,
    /// Number of time steps M (t_i = i/M); reports need M divisible by 4.
    #[arg(long = "time-steps", value_name = "M")]
    time_steps: Option<usize>,
    /// Number of space panels K (x_j = j/K).
    #[arg(long = "space-points", value_name = "K")]
    space_points: Option<usize>,
    /// Noise stream seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Noise model: additive, relative (benchmark recipe) or off.
    #[arg(long, value_name = "KIND")]
    noise: Option<String>,
    /// Solver: march (explicit time march) or picard (fixed-point reference).
    #[arg(long, value_name = "NAME")]
    solver: Option<String>,
    /// Benchmark amplitude a (nonzero).
    #[arg(long, value_name = "REAL")]
    a: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Flat key=value config file; CLI flags override file values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl CommonOpts {
    /// Defaults, then config file, then explicit flags.
    fn build(&self, mut config: ExperimentConfig) -> cauchy_reg::Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        if let Some(eps) = &self.epsilon {
            config.apply_kv("epsilon", eps)?;
        }
        if let Some(modes) = self.modes {
            config.apply_kv("modes", &modes.to_string())?;
        }
        if let Some(m) = self.time_steps {
            config.apply_kv("time_steps", &m.to_string())?;
        }
        if let Some(k) = self.space_points {
            config.apply_kv("space_points", &k.to_string())?;
        }
        if let Some(seed) = self.seed {
            config.apply_kv("seed", &seed.to_string())?;
        }
        if let Some(noise) = &self.noise {
            config.apply_kv("noise", noise)?;
        }
        if let Some(solver) = &self.solver {
            config.apply_kv("solver", solver)?;
        }
        if let Some(a) = self.a {
            config.apply_kv("a", &a.to_string())?;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if let Some(format) = &self.format {
            config.apply_kv("format", format)?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> cauchy_reg::Result<()> {
    match cli.command {
        Command::Table1(opts) => {
            let config = opts.build(ExperimentConfig::table1_defaults())?;
            let report = harness::run_table(&config)?;
            print_report(&report);
            let paths = harness::emit(&report, &config.out_dir, "table1", config.format)?;
            print_paths(&paths);
        }
        Command::Table2(opts) => {
            let config = opts.build(ExperimentConfig::table2_defaults())?;
            // Sweep truncation levels 2..=N (default N = 4).
            let top = opts.modes.unwrap_or(4).max(2);
            let modes: Vec<usize> = (2..=top).collect();
            let report = harness::run_table_modes(&config, &modes)?;
            print_report(&report);
            let paths = harness::emit(&report, &config.out_dir, "table2", config.format)?;
            print_paths(&paths);
        }
        Command::Rate(opts) => {
            let config = opts.build(ExperimentConfig::rate_defaults())?;
            let report = harness::run_table(&config)?;
            print_report(&report);
            if report.fits.is_empty() {
                eprintln!("note: every point sits on the saturation floor; no slope fitted");
            }
            let paths = harness::emit(&report, &config.out_dir, "rate", config.format)?;
            print_paths(&paths);
        }
        Command::Stability(opts) => {
            let config = opts.build(ExperimentConfig::stability_defaults())?;
            let report = harness::stability_check(&config, config.seed, config.seed + 1)?;
            let worst = report
                .rows
                .iter()
                .map(|row| row.lhs / row.rhs)
                .fold(0.0f64, f64::max);
            println!(
                "stability: {} rows, inequality {} (worst lhs/rhs = {:.3e})",
                report.rows.len(),
                if report.all_hold() { "holds" } else { "VIOLATED" },
                worst
            );
            let paths =
                harness::emit_stability(&report, &config.out_dir, "stability", config.format)?;
            print_paths(&paths);
            if !report.all_hold() {
                return Err(cauchy_reg::Error::Config(
                    "stability envelope violated".into(),
                ));
            }
        }
        Command::Solve(opts) => {
            let config = opts.build(ExperimentConfig::solve_defaults())?;
            let sol = harness::solve_single(&config)?;
            let grid = harness::solution_grid(&config, &sol)?;
            println!(
                "solved eps = {:.3e} on N = {}, M = {}, K = {} ({} grid values)",
                config.epsilons[0],
                config.modes_n,
                config.time_steps_m,
                config.space_points_k,
                grid.rows.len()
            );
            let paths = harness::emit_solution(&grid, &config.out_dir, "solution", config.format)?;
            print_paths(&paths);
        }
    }
    Ok(())
}

fn print_report(report: &harness::ErrorReport) {
    println!("epsilon        N   t       error");
    for row in &report.rows {
        println!(
            "{:<12.4e} {:>3}   {:<5.3} {:.6e}",
            row.epsilon, row.modes_n, row.t, row.error
        );
    }
    for fit in &report.fits {
        println!("{fit}");
    }
}

fn print_paths(paths: &[PathBuf]) {
    for path in paths {
        println!("wrote {}", path.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_all_subcommands() {
        for cmd in ["table1", "table2", "rate", "stability", "solve"] {
            let parsed = Cli::try_parse_from(["cauchy-reg", cmd, "--seed", "7"]);
            assert!(parsed.is_ok(), "failed to parse subcommand {cmd}");
        }
        assert!(Cli::try_parse_from(["cauchy-reg", "bogus"]).is_err());
    }
}
