//! CLI front end: experiment configuration, execution and CSV emission.
//!
//! Five subcommands reproduce the benchmark experiment families at desk
//! scale: `drift` (long-time relative energy error), `convergence` (global
//! error grids with fitted slopes), `efficiency` (wall clock vs error),
//! `resonance` (error spikes near stepsize resonances) and `verify` (the
//! full certification battery, exiting non-zero on any failed check).
//!
//! Exit statuses: 0 ok, 1 check failure, 2 configuration error, 3 runtime
//! error. CSVs are UTF-8, LF, comma-separated, '.' decimal, one header row,
//! floats printed with 17 significant digits so parsing them recovers every
//! value bitwise.

use std::fs;
use std::io::{BufWriter, Write as IoWrite};
use std::path::PathBuf;
use std::time::Instant;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrators::{integrate, make_method_with, reference_solve, Em1Settings, MethodId};
use crate::model::builtin_problem;
use crate::verify::certify::{certify_all, default_resonance_grid, CheckRow};
use crate::verify::{convergence_study, energy_drift, resonance_scan, REFERENCE_TOL};

/// Which experiment family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Drift,
    Convergence,
    Efficiency,
    Resonance,
    Verify,
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub methods: Vec<MethodId>,
    pub epsilons: Vec<f64>,
    /// Drift/efficiency stepsize; defaults to ε per run.
    pub h: Option<f64>,
    /// Convergence grid h = 2^-i for i in i_min..=i_max.
    pub i_min: u32,
    pub i_max: u32,
    /// Resonance grid: `ratio_count` ratios uniformly in (0, ratio_max].
    pub ratio_count: usize,
    pub ratio_max: f64,
    pub t_end: f64,
    pub stride: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub em1: Em1Settings,
}

#[derive(Parser, Debug)]
#[command(
    name = "larmor",
    version,
    about = "Structure-preserving exponential integrators for x'' = (1/eps) B x' + F(x)",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Comma-separated methods (M1, M2, SM1, SM2, SM3, EM1, SE)
    #[arg(long, value_delimiter = ',', value_parser = method_parser())]
    methods: Option<Vec<MethodId>>,
    /// Comma-separated oscillation parameters in (0, 1]
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Final time
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Record every STRIDE-th step
    #[arg(long)]
    stride: Option<usize>,
    /// Output directory for CSV files
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Seed for randomized verification states
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Gauss-Legendre nodes for the EM1 chord average
    #[arg(long, default_value_t = 5)]
    quad_order: usize,
    /// EM1 fixed-point stopping tolerance
    #[arg(long, default_value_t = 1e-14)]
    fp_tol: f64,
    /// EM1 fixed-point iteration cap
    #[arg(long, default_value_t = 10)]
    fp_max: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relative energy error against time over a long horizon
    Drift {
        #[command(flatten)]
        common: Common,
        /// Stepsize (defaults to eps)
        #[arg(long)]
        h: Option<f64>,
        /// Run the full 1e5 horizon instead of the desk-scale default
        #[arg(long)]
        long: bool,
    },
    /// Global errors at T over h = 2^-i with fitted slopes
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        i_min: u32,
        #[arg(long, default_value_t = 10)]
        i_max: u32,
    },
    /// Wall-clock cost against global error
    Efficiency {
        #[command(flatten)]
        common: Common,
        /// Stepsize grid start (defaults to eps; halved three times)
        #[arg(long)]
        h: Option<f64>,
    },
    /// Global x error against the stepsize ratio h/eps
    Resonance {
        #[command(flatten)]
        common: Common,
        /// Number of ratios in the grid
        #[arg(long, default_value_t = 200)]
        ratio_count: usize,
        /// Upper end of the ratio grid (default 4.5*pi)
        #[arg(long)]
        ratio_max: Option<f64>,
    },
    /// Run the certification battery; non-zero exit on any failed check
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn method_parser() -> impl TypedValueParser<Value = MethodId> {
    clap::builder::StringValueParser::new()
        .try_map(|s| s.parse::<MethodId>().map_err(|e| e.to_string()))
}

/// Parses and validates a command line (first element is the binary name).
pub fn parse_cli<I, T>(args: I) -> std::result::Result<ExperimentConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(match cli.command {
        Command::Drift { common, h, long } => {
            let t_end = common.t_end.unwrap_or(if long { 1e5 } else { 1000.0 });
            let mut cfg = config_from_common(
                Experiment::Drift,
                common,
                MethodId::all().to_vec(),
                vec![0.05],
            );
            cfg.h = h;
            cfg.t_end = t_end;
            cfg
        }
        Command::Convergence {
            common,
            i_min,
            i_max,
        } => {
            let t_end = common.t_end.unwrap_or(1.0);
            let mut cfg = config_from_common(
                Experiment::Convergence,
                common,
                MethodId::aei_methods().to_vec(),
                vec![2f64.powi(-4), 2f64.powi(-6)],
            );
            cfg.i_min = i_min;
            cfg.i_max = i_max;
            cfg.t_end = t_end;
            cfg
        }
        Command::Efficiency { common, h } => {
            let t_end = common.t_end.unwrap_or(10.0);
            let mut cfg = config_from_common(
                Experiment::Efficiency,
                common,
                MethodId::all().to_vec(),
                vec![0.05],
            );
            cfg.h = h;
            cfg.t_end = t_end;
            cfg
        }
        Command::Resonance {
            common,
            ratio_count,
            ratio_max,
        } => {
            let t_end = common.t_end.unwrap_or(1.0);
            let mut cfg = config_from_common(
                Experiment::Resonance,
                common,
                MethodId::aei_methods().to_vec(),
                vec![2f64.powi(-10)],
            );
            cfg.ratio_count = ratio_count;
            cfg.ratio_max = ratio_max.unwrap_or(4.5 * std::f64::consts::PI);
            cfg.t_end = t_end;
            cfg
        }
        Command::Verify { common } => config_from_common(
            Experiment::Verify,
            common,
            MethodId::aei_methods().to_vec(),
            vec![0.05],
        ),
    })
}

fn config_from_common(
    experiment: Experiment,
    common: Common,
    default_methods: Vec<MethodId>,
    default_eps: Vec<f64>,
) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        methods: common.methods.unwrap_or(default_methods),
        epsilons: common.eps.unwrap_or(default_eps),
        h: None,
        i_min: 6,
        i_max: 10,
        ratio_count: 200,
        ratio_max: 4.5 * std::f64::consts::PI,
        t_end: common.t_end.unwrap_or(0.0),
        stride: common.stride.unwrap_or(100),
        out_dir: common.out,
        seed: common.seed,
        em1: Em1Settings {
            quad_order: common.quad_order,
            fp_tol: common.fp_tol,
            fp_max: common.fp_max,
        },
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidConfig("method list must be non-empty".into()));
    }
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::InvalidConfig(
            "every eps must lie in (0, 1] and the list must be non-empty".into(),
        ));
    }
    if cfg.experiment != Experiment::Verify && (cfg.t_end.is_nan() || cfg.t_end <= 0.0) {
        return Err(Error::InvalidConfig("T must be positive".into()));
    }
    if cfg.experiment == Experiment::Convergence && cfg.i_min > cfg.i_max {
        return Err(Error::InvalidConfig("need i_min <= i_max".into()));
    }
    if cfg.experiment == Experiment::Resonance && cfg.ratio_count == 0 {
        return Err(Error::InvalidConfig("ratio grid must be non-empty".into()));
    }
    Ok(())
}

/// Entry point used by the binary: parse, run, map errors to exit codes
/// (0 ok, 1 check failure, 2 config error, 3 runtime error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_cli(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match run_experiment(&cfg) {
        Ok(all_checks_passed) => {
            if all_checks_passed {
                0
            } else {
                1
            }
        }
        Err(Error::InvalidConfig(msg)) => {
            eprintln!("configuration error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            3
        }
    }
}

/// Runs the configured experiment, writing one CSV per experiment into the
/// output directory. Returns false when a verification check failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<bool> {
    validate(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    match cfg.experiment {
        Experiment::Drift => run_drift(cfg).map(|()| true),
        Experiment::Convergence => run_convergence(cfg).map(|()| true),
        Experiment::Efficiency => run_efficiency(cfg).map(|()| true),
        Experiment::Resonance => run_resonance(cfg).map(|()| true),
        Experiment::Verify => run_verify(cfg),
    }
}

/// 17 significant digits; parsing the text recovers the exact f64.
fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn writer(cfg: &ExperimentConfig, name: &str) -> Result<BufWriter<fs::File>> {
    let path = cfg.out_dir.join(name);
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn run_drift(cfg: &ExperimentConfig) -> Result<()> {
    let mut out = writer(cfg, "drift.csv")?;
    writeln!(out, "method,eps,h,t,err_rel")?;
    let grid: Vec<(MethodId, f64)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cfg.epsilons.iter().map(move |&e| (m, e)))
        .collect();
    type DriftOutcome =
        Result<(MethodId, f64, f64, crate::verify::DriftSeries), (Error, Vec<String>)>;
    let results: Vec<DriftOutcome> = grid
        .par_iter()
        .map(|&(id, eps)| {
            let h = cfg.h.unwrap_or(eps);
            let prob = builtin_problem(eps).map_err(|e| (e, Vec::new()))?;
            let m = make_method_with(id, &prob, h, cfg.em1).map_err(|e| (e, Vec::new()))?;
            match integrate(&m, &prob, cfg.t_end, cfg.stride) {
                Ok(traj) => Ok((id, eps, h, energy_drift(&traj))),
                Err(aborted) => {
                    // flush whatever was recorded before the failure
                    let drift = energy_drift(&aborted.partial);
                    let rows = drift_rows(id, eps, h, &drift);
                    Err((aborted.cause, rows))
                }
            }
        })
        .collect();
    // Flush everything that completed (and the partial prefixes of aborted
    // runs) before reporting the first failure.
    let mut first_error = None;
    for r in results {
        match r {
            Ok((id, eps, h, drift)) => {
                for line in drift_rows(id, eps, h, &drift) {
                    writeln!(out, "{line}")?;
                }
                println!(
                    "drift {id} eps={eps} h={h}: max |ERR| = {:.3e}, secular ratio {:.2}",
                    drift.max_abs, drift.secular_ratio
                );
            }
            Err((cause, partial_rows)) => {
                for line in partial_rows {
                    writeln!(out, "{line}")?;
                }
                eprintln!("drift aborted: {cause}");
                first_error.get_or_insert(cause);
            }
        }
    }
    out.flush()?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn drift_rows(id: MethodId, eps: f64, h: f64, drift: &crate::verify::DriftSeries) -> Vec<String> {
    drift
        .times
        .iter()
        .zip(&drift.err)
        .map(|(&t, &e)| format!("{},{},{},{},{}", id, fmt(eps), fmt(h), fmt(t), fmt(e)))
        .collect()
}

fn run_convergence(cfg: &ExperimentConfig) -> Result<()> {
    let mut out = writer(cfg, "convergence.csv")?;
    writeln!(out, "method,eps,h,err_x,err_v,skipped")?;
    for &id in &cfg.methods {
        let table = convergence_study(id, &cfg.epsilons, cfg.i_min..=cfg.i_max, cfg.t_end)?;
        for r in &table.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                id,
                fmt(r.epsilon),
                fmt(r.h),
                fmt(r.err_x),
                fmt(r.err_v),
                r.skipped
            )?;
        }
        for s in &table.slopes {
            println!(
                "convergence {id} eps={}: slope_x = {:.3}, slope_v = {:.3}",
                s.epsilon, s.slope_x, s.slope_v
            );
        }
    }
    out.flush()?;
    Ok(())
}

fn run_efficiency(cfg: &ExperimentConfig) -> Result<()> {
    let mut out = writer(cfg, "efficiency.csv")?;
    writeln!(out, "method,eps,h,cpu_seconds,err_x")?;
    for &eps in &cfg.epsilons {
        let prob = builtin_problem(eps)?;
        let reference = reference_solve(&prob, &[cfg.t_end], REFERENCE_TOL)?
            .pop()
            .unwrap();
        for &id in &cfg.methods {
            for k in 0..4 {
                let h = cfg.h.unwrap_or(eps) / 2f64.powi(k);
                let m = make_method_with(id, &prob, h, cfg.em1)?;
                let start = Instant::now();
                let traj = match integrate(&m, &prob, cfg.t_end, usize::MAX) {
                    Ok(t) => t,
                    Err(aborted) => {
                        out.flush()?;
                        return Err(aborted.cause);
                    }
                };
                let secs = start.elapsed().as_secs_f64();
                let fin = traj.final_state();
                let err_x = (&fin.x - &reference.x).norm() / reference.x.norm();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    id,
                    fmt(eps),
                    fmt(h),
                    fmt(secs),
                    fmt(err_x)
                )?;
            }
            println!("efficiency {id} eps={eps}: done");
        }
    }
    out.flush()?;
    Ok(())
}

fn run_resonance(cfg: &ExperimentConfig) -> Result<()> {
    let mut out = writer(cfg, "resonance.csv")?;
    writeln!(out, "method,eps,ratio,ratio_times_normB,err_x")?;
    let ratios: Vec<f64> =
        if cfg.ratio_count == 200 && (cfg.ratio_max - 4.5 * std::f64::consts::PI).abs() < 1e-12 {
            default_resonance_grid()
        } else {
            (1..=cfg.ratio_count)
                .map(|j| j as f64 * cfg.ratio_max / cfg.ratio_count as f64)
                .collect()
        };
    for &eps in &cfg.epsilons {
        for &id in &cfg.methods {
            let points = resonance_scan(id, eps, &ratios, cfg.t_end)?;
            let spikes = points.iter().filter(|p| !p.err_x.is_finite()).count();
            for p in &points {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    id,
                    fmt(eps),
                    fmt(p.ratio),
                    fmt(p.ratio_times_norm_b),
                    fmt(p.err_x)
                )?;
            }
            println!(
                "resonance {id} eps={eps}: {} ratios, {spikes} singular",
                points.len()
            );
        }
    }
    out.flush()?;
    Ok(())
}

fn run_verify(cfg: &ExperimentConfig) -> Result<bool> {
    let start = Instant::now();
    let rows = certify_all(cfg.seed)?;
    let mut out = writer(cfg, "verify.csv")?;
    writeln!(out, "check,method,value,threshold,pass")?;
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(10);
    let mut failures = 0usize;
    for CheckRow {
        check,
        method,
        value,
        threshold,
        pass,
    } in &rows
    {
        writeln!(
            out,
            "{},{},{},{},{}",
            check,
            method,
            fmt(*value),
            fmt(*threshold),
            pass
        )?;
        println!(
            "{:width$}  {:14}  value = {:>12.5e}  threshold = {:>9.3e}  {}",
            check,
            method,
            value,
            threshold,
            if *pass { "PASS" } else { "FAIL" },
        );
        if !pass {
            failures += 1;
        }
    }
    out.flush()?;
    println!(
        "verify: {} checks, {failures} failed, {:.1?} elapsed",
        rows.len(),
        start.elapsed()
    );
    Ok(failures == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> ExperimentConfig {
        let args = std::iter::once("larmor").chain(line.split_whitespace());
        parse_cli(args).unwrap()
    }

    #[test]
    fn convergence_defaults_fill_in() {
        let cfg = parse("convergence --methods M2 --T 1");
        assert_eq!(cfg.experiment, Experiment::Convergence);
        assert_eq!(cfg.methods, vec![MethodId::M2]);
        assert_eq!(cfg.epsilons, vec![2f64.powi(-4), 2f64.powi(-6)]);
        assert_eq!((cfg.i_min, cfg.i_max), (6, 10));
        assert_eq!(cfg.t_end, 1.0);
    }

    #[test]
    fn drift_defaults() {
        let cfg = parse("drift --methods EM1 --eps 0.05 --T 1000");
        assert_eq!(cfg.experiment, Experiment::Drift);
        assert_eq!(cfg.methods, vec![MethodId::Em1]);
        assert_eq!(cfg.epsilons, vec![0.05]);
        assert_eq!(cfg.t_end, 1000.0);
        assert_eq!(cfg.stride, 100);
        let cfg = parse("drift");
        assert_eq!(cfg.t_end, 1000.0);
        assert_eq!(cfg.methods.len(), 7);
    }

    #[test]
    fn drift_long_flag_sets_paper_horizon() {
        let cfg = parse("drift --long");
        assert_eq!(cfg.t_end, 1e5);
    }

    #[test]
    fn resonance_defaults() {
        let cfg = parse("resonance");
        assert_eq!(cfg.epsilons, vec![2f64.powi(-10)]);
        assert_eq!(cfg.ratio_count, 200);
        assert!((cfg.ratio_max - 4.5 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn unknown_method_is_a_usage_error() {
        let args = ["larmor", "drift", "--methods", "XYZ"];
        assert!(parse_cli(args).is_err());
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let args = ["larmor", "drift", "--bogus", "1"];
        assert!(parse_cli(args).is_err());
    }

    #[test]
    fn csv_float_format_round_trips() {
        for &x in &[
            0.05,
            1.0 / 3.0,
            2.0469199999999,
            1e-300,
            -7.25e17,
            f64::INFINITY,
        ] {
            let s = fmt(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
