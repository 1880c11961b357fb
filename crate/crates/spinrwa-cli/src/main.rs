//! Command-line harness: fidelity time traces, parameter sweeps, and the
//! built-in diagnostic suite, with deterministic CSV output and a JSON
//! manifest beside every file.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use spinrwa::chrw::assemble_chrw;
use spinrwa::exact::{basis_state, omega_max, ExactSolverConfig};
use spinrwa::fidelity::{trace_grid, trace_methods_with, Metric, MethodTrace};
use spinrwa::methods::{propagator, Method};
use spinrwa::rwa_full::full_rwa_half_integer;
use spinrwa::rwa_reduced::{assemble_reduced, pinned_block, select_block, ReducedBlockSpec};
use spinrwa::selftest::run_selftest;
use spinrwa::spin::SpinParams;
use spinrwa::sweep::{run_sweep, samples_for_window, SweepAxis, SweepSpec};

use output::{GridEcho, ParamEcho, RunManifest, SolverEcho};

#[derive(Parser)]
#[command(
    name = "spinrwa",
    version,
    about = "Benchmark rotating-wave propagators for a driven quadrupole spin system"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Trace state and operator fidelity of each method against exact
    /// integration over a time window
    Timeseries(TimeseriesArgs),
    /// Average a fidelity metric over a fixed window while scanning omega
    /// or B1 across a linear grid
    Sweep(SweepArgs),
    /// Run the built-in diagnostic checks and print a pass/fail table
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct PhysicsArgs {
    /// Spin I: a positive integer or half-integer multiple of 1/2
    #[arg(long)]
    spin: Option<f64>,
    /// Quadrupole coupling Q; the default unit all other rates are quoted in
    #[arg(long = "Q")]
    q: Option<f64>,
    /// Static longitudinal field B0
    #[arg(long = "B0")]
    b0: Option<f64>,
    /// Transverse drive amplitude B1
    #[arg(long = "B1")]
    b1: Option<f64>,
    /// Drive angular frequency
    #[arg(long)]
    omega: Option<f64>,
    /// Comma-separated methods: exact, rwa-zeeman, rwa-reduced, rwa-full, chrw
    #[arg(long)]
    methods: Option<String>,
    /// JSON file supplying any omitted flag (flags win over the file)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output stem: writes <out>.csv plus <out>.manifest.json
    /// (default: CSV to stdout, no manifest)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimeseriesArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Trace length in units of the inversion time T_pi
    #[arg(long = "t-max-pi")]
    t_max_pi: Option<f64>,
    /// Number of evenly spaced samples over the trace
    #[arg(long)]
    samples: Option<usize>,
    /// Initial level, written M=<value> (e.g. M=0, M=1, M=1/2)
    #[arg(long)]
    initial: Option<String>,
    /// Pin the reduced/hybridized block's upper level M instead of
    /// auto-selecting the resonance nearest to omega
    #[arg(long = "m-target")]
    m_target: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Swept axis: omega or B1
    #[arg(long)]
    vary: Option<String>,
    /// First grid value
    #[arg(long)]
    from: Option<f64>,
    /// Last grid value (inclusive)
    #[arg(long)]
    to: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Averaging window per grid point, in units of T_pi
    #[arg(long)]
    window: Option<f64>,
    /// Averaged quantity: operator or state
    #[arg(long)]
    metric: Option<String>,
    /// Worker thread count (SPINRWA_THREADS caps it; default: all cores)
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Run only the sub-second subset
    #[arg(long)]
    quick: bool,
}

/// Failures split by exit code: usage errors (2) versus run failures (1).
#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

type CliResult<T> = Result<T, Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn run_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Run(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Commands::Timeseries(a) => cmd_timeseries(a),
        Commands::Sweep(a) => cmd_sweep(a),
        Commands::Selftest(a) => Ok(cmd_selftest(a)),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Resolve the physical parameters from flags, config file, and defaults
/// (Fig.-style reference values in units of Q).
fn resolve_params(args: &PhysicsArgs, file: &config::FileConfig) -> CliResult<SpinParams> {
    let spin = args
        .spin
        .or(file.spin)
        .ok_or_else(|| Failure::Usage("--spin is required (flag or config file)".into()))?;
    let params = SpinParams::new(
        spin,
        args.q.or(file.q).unwrap_or(1.0),
        args.b0.or(file.b0).unwrap_or(0.05),
        args.b1.or(file.b1).unwrap_or(0.5),
        args.omega.or(file.omega).unwrap_or(1.0),
    );
    params.validate().map_err(usage)?;
    Ok(params)
}

fn parse_methods(spec: Option<&str>) -> CliResult<Vec<Method>> {
    let spec = spec.unwrap_or("rwa-zeeman,rwa-reduced,rwa-full,chrw");
    let mut methods = Vec::new();
    for name in spec.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        methods.push(name.parse::<Method>().map_err(usage)?);
    }
    if methods.is_empty() {
        return Err(Failure::Usage("no methods requested".into()));
    }
    Ok(methods)
}

/// Parse an `M=<value>` level label; the value may be a decimal or a
/// fraction like 1/2.
fn parse_initial(spec: &str) -> CliResult<f64> {
    let rest = spec.trim().strip_prefix("M=").ok_or_else(|| {
        Failure::Usage(format!("initial state must be written M=<value>, got '{spec}'"))
    })?;
    let bad = || Failure::Usage(format!("cannot parse level '{rest}'"));
    if let Some((num, den)) = rest.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        Ok(n / d)
    } else {
        rest.trim().parse().map_err(|_| bad())
    }
}

fn format_level(m: f64) -> String {
    if m.fract() == 0.0 {
        format!("M={}", m as i64)
    } else {
        format!("M={m}")
    }
}

fn solver_echo(params: &SpinParams, with_dt: bool) -> SolverEcho {
    let cfg = ExactSolverConfig::for_params(params);
    SolverEcho {
        rk4_dt: with_dt.then_some(cfg.dt),
        rk4_steps_per_cycle: (2.0 * std::f64::consts::PI / (omega_max(params) * cfg.dt)).round(),
        rk4_renorm_interval: cfg.renorm_interval,
        eig_offdiag_rel: 1e-13,
        xi_residual_rel: 1e-12,
    }
}

fn write_outputs(stem: &PathBuf, csv: &str, manifest: &RunManifest) -> CliResult<()> {
    let csv_path = PathBuf::from(format!("{}.csv", stem.display()));
    std::fs::write(&csv_path, csv)
        .map_err(|e| Failure::Run(format!("cannot write {}: {e}", csv_path.display())))?;
    let manifest_path = PathBuf::from(format!("{}.manifest.json", stem.display()));
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Failure::Run(format!("manifest serialization: {e}")))?;
    std::fs::write(&manifest_path, json + "\n")
        .map_err(|e| Failure::Run(format!("cannot write {}: {e}", manifest_path.display())))?;
    Ok(())
}

fn cmd_timeseries(args: TimeseriesArgs) -> CliResult<ExitCode> {
    let file = config::load(args.physics.config.as_deref()).map_err(Failure::Usage)?;
    let params = resolve_params(&args.physics, &file)?;
    let methods = parse_methods(args.physics.methods.as_deref().or(file.methods.as_deref()))?;
    let t_max_pi = args.t_max_pi.or(file.t_max_pi).unwrap_or(20.0);
    let samples = args.samples.or(file.samples).unwrap_or(1000);
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    if !(t_max_pi.is_finite() && t_max_pi > 0.0) {
        return Err(Failure::Usage("--t-max-pi must be positive".into()));
    }

    let m0 = match args.initial.as_deref().or(file.initial.as_deref()) {
        Some(spec) => parse_initial(spec)?,
        None => {
            if params.is_integer_spin() {
                0.0
            } else {
                0.5
            }
        }
    };
    let initial = basis_state(params.spin, m0).map_err(usage)?;

    let m_target = args.m_target.or(file.m_target);
    let pinned: Option<ReducedBlockSpec> = match m_target {
        Some(m) => Some(pinned_block(&params, m).map_err(usage)?),
        None => None,
    };

    let started = Instant::now();
    let prop = move |method: Method, p: &SpinParams, t: f64| match (method, &pinned) {
        (Method::RwaReduced, Some(spec)) => assemble_reduced(p, spec, t).map(|pr| pr.matrix),
        (Method::Chrw, Some(spec)) => assemble_chrw(p, spec, t).map(|pr| pr.matrix),
        _ => propagator(method, p, t),
    };
    let traces = trace_methods_with(&params, &methods, t_max_pi, samples, &initial, &prop)
        .map_err(run_err)?;
    let (times, times_pi) = trace_grid(&params, t_max_pi, samples).map_err(run_err)?;
    let csv = output::timeseries_csv(&traces, &times, &times_pi);

    let warnings = timeseries_warnings(&params, &methods, m_target, &times, &traces)?;
    if let Some(stem) = &args.physics.out {
        let manifest = RunManifest {
            tool: "spinrwa".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "timeseries".into(),
            params: ParamEcho {
                spin: params.spin,
                q: params.q,
                b0: params.b0,
                b1: params.b1,
                omega: params.omega,
            },
            grid: GridEcho {
                axis: "time".into(),
                start: times[0],
                stop: *times.last().unwrap(),
                points: samples,
                window_pi: Some(t_max_pi),
                samples_per_point: None,
            },
            methods: methods.iter().map(|m| m.to_string()).collect(),
            metric: None,
            m_target,
            initial: Some(format_level(m0)),
            threads: None,
            solver: solver_echo(&params, true),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            warnings,
        };
        write_outputs(stem, &csv, &manifest)?;
    } else {
        print!("{csv}");
        for w in &warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn timeseries_warnings(
    params: &SpinParams,
    methods: &[Method],
    m_target: Option<f64>,
    times: &[f64],
    traces: &[MethodTrace],
) -> CliResult<Vec<String>> {
    let mut warnings = Vec::new();
    let uses_block_methods = methods
        .iter()
        .any(|m| matches!(m, Method::RwaReduced | Method::Chrw));
    if uses_block_methods {
        let spec = match m_target {
            Some(m) => pinned_block(params, m).map_err(usage)?,
            None => select_block(params).map_err(usage)?,
        };
        if spec.far_detuned {
            warnings.push(format!(
                "drive detuned from the selected M = {} resonance by more than Q; \
                 block-local methods are extrapolating",
                spec.m_target
            ));
        }
    }
    if !params.is_integer_spin() && methods.contains(&Method::RwaFull) {
        if let Ok(outcome) = full_rwa_half_integer(params, *times.last().unwrap()) {
            if outcome.leakage_warning {
                warnings.push(format!(
                    "composition leakage {:.3e} at the final sample; rwa-full was \
                     polar-projected back to a unitary",
                    outcome.leakage
                ));
            }
        }
    }
    for mt in traces {
        if let Err(e) = &mt.result {
            warnings.push(format!("method {} failed: {e}", mt.method));
        }
    }
    Ok(warnings)
}

/// Thread count resolution: explicit flag, capped by SPINRWA_THREADS; the
/// env var alone sets the count; neither means the library default.
fn resolve_threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag == Some(0) {
        return Err(Failure::Usage("--parallel must be at least 1".into()));
    }
    let cap = match std::env::var("SPINRWA_THREADS") {
        Ok(s) => {
            let n: usize = s.trim().parse().map_err(|_| {
                Failure::Usage(format!("SPINRWA_THREADS must be a positive integer, got '{s}'"))
            })?;
            if n == 0 {
                return Err(Failure::Usage("SPINRWA_THREADS must be at least 1".into()));
            }
            Some(n)
        }
        Err(_) => None,
    };
    Ok(match (flag, cap) {
        (Some(n), Some(c)) => Some(n.min(c)),
        (Some(n), None) => Some(n),
        (None, Some(c)) => Some(c),
        (None, None) => None,
    })
}

fn cmd_sweep(args: SweepArgs) -> CliResult<ExitCode> {
    let file = config::load(args.physics.config.as_deref()).map_err(Failure::Usage)?;
    let params = resolve_params(&args.physics, &file)?;
    let methods = parse_methods(args.physics.methods.as_deref().or(file.methods.as_deref()))?;
    let vary: SweepAxis = args
        .vary
        .as_deref()
        .or(file.vary.as_deref())
        .ok_or_else(|| Failure::Usage("--vary is required (omega or B1)".into()))?
        .parse()
        .map_err(usage)?;
    let from = args
        .from
        .or(file.from)
        .ok_or_else(|| Failure::Usage("--from is required".into()))?;
    let to = args
        .to
        .or(file.to)
        .ok_or_else(|| Failure::Usage("--to is required".into()))?;
    let points = args.points.or(file.points).unwrap_or(101);
    let window = args.window.or(file.window).unwrap_or(20.0);
    let metric: Metric = match args.metric.as_deref().or(file.metric.as_deref()) {
        Some(s) => s.parse().map_err(usage)?,
        None => Metric::Operator,
    };

    let spec = SweepSpec {
        vary,
        start: from,
        stop: to,
        points,
        fixed: params,
        methods: methods.clone(),
        average_window: window,
        metric,
    };
    spec.validate().map_err(usage)?;

    let threads = resolve_threads(args.parallel.or(file.parallel))?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(run_err)?;
    }

    let started = Instant::now();
    let rows = run_sweep(&spec).map_err(run_err)?;
    let csv = output::sweep_csv(&rows, metric);

    let warnings: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.error.as_ref().map(|e| {
                format!(
                    "{} = {}: {} failed: {e}",
                    vary.name(),
                    output::format_sig(r.sweep_value),
                    r.method
                )
            })
        })
        .collect();

    if let Some(stem) = &args.physics.out {
        let manifest = RunManifest {
            tool: "spinrwa".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "sweep".into(),
            params: ParamEcho {
                spin: params.spin,
                q: params.q,
                b0: params.b0,
                b1: params.b1,
                omega: params.omega,
            },
            grid: GridEcho {
                axis: vary.name().into(),
                start: from,
                stop: to,
                points,
                window_pi: Some(window),
                samples_per_point: Some(samples_for_window(window)),
            },
            methods: methods.iter().map(|m| m.to_string()).collect(),
            metric: Some(
                match metric {
                    Metric::Operator => "operator",
                    Metric::State => "state",
                }
                .into(),
            ),
            m_target: None,
            initial: None,
            threads,
            solver: solver_echo(&params, false),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            warnings,
        };
        write_outputs(stem, &csv, &manifest)?;
    } else {
        print!("{csv}");
        for w in &warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: SelftestArgs) -> ExitCode {
    let results = run_selftest(args.seed, args.quick);
    let mut failed = 0usize;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<28} {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!(
        "{}/{} checks passed (seed {}{})",
        results.len() - failed,
        results.len(),
        args.seed,
        if args.quick { ", quick subset" } else { "" }
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_level_parsing() {
        assert_eq!(parse_initial("M=0").unwrap(), 0.0);
        assert_eq!(parse_initial("M=-2").unwrap(), -2.0);
        assert_eq!(parse_initial("M=0.5").unwrap(), 0.5);
        assert_eq!(parse_initial("M=1/2").unwrap(), 0.5);
        assert_eq!(parse_initial("M=-3/2").unwrap(), -1.5);
        assert!(parse_initial("0").is_err());
        assert!(parse_initial("M=x").is_err());
        assert!(parse_initial("M=1/0").is_err());
    }

    #[test]
    fn method_list_parsing() {
        let methods = parse_methods(Some("rwa-full, chrw")).unwrap();
        assert_eq!(methods, vec![Method::RwaFull, Method::Chrw]);
        let defaults = parse_methods(None).unwrap();
        assert_eq!(defaults.len(), 4);
        assert!(!defaults.contains(&Method::Exact));
        assert!(parse_methods(Some("nonsense")).is_err());
        assert!(parse_methods(Some(",")).is_err());
    }

    #[test]
    fn level_labels_round_trip() {
        assert_eq!(format_level(0.0), "M=0");
        assert_eq!(format_level(3.0), "M=3");
        assert_eq!(format_level(0.5), "M=0.5");
        assert_eq!(format_level(-1.5), "M=-1.5");
    }

    #[test]
    fn thread_resolution_without_env() {
        // The env var is process-global, so only exercise the flag paths.
        if std::env::var("SPINRWA_THREADS").is_err() {
            assert_eq!(resolve_threads(None).unwrap(), None);
            assert_eq!(resolve_threads(Some(3)).unwrap(), Some(3));
            assert!(resolve_threads(Some(0)).is_err());
        }
    }
}
