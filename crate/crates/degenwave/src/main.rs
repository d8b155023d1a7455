//! Command-line front end: profile sampling, solver runs, rate fits,
//! verification suites and parameter sweeps. Exit codes: 0 success,
//! 2 usage or configuration error, 3 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use degenwave::analysis::fit_rate;
use degenwave::config::{
    norms_csv_string, parse_norms_csv, snapshot_csv_string, RunConfigFile,
};
use degenwave::profiles::{
    barenblatt, barenblatt_dx, exact_rarefaction, exact_rarefaction_dx, selfsimilar_constants,
    ContactWave, Multiwave, SmoothRarefaction, TildeU,
};
use degenwave::solver::run;
use degenwave::verify::{canonical_decay_configs, quick_suite, run_decay_suite, CheckReport};
use degenwave::{fmt_g17, make_flux, Error, FluxKind, Params};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "degenwave", version, about = "degenerate-viscosity conservation-law laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a closed-form wave profile to CSV
    Profile(ProfileArgs),
    /// Integrate a configured experiment and write norm series + snapshots
    Solve(SolveArgs),
    /// Fit a power-law decay rate to a norms.csv column
    Rates(RatesArgs),
    /// Run the oracle suite and write a machine-readable report
    Verify(VerifyArgs),
    /// Cartesian (p, q) sweep of decay experiments
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileKind {
    Barenblatt,
    Contact,
    Rarefaction,
    SmoothRarefaction,
    Multiwave,
    TildeU,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_enum)]
    kind: ProfileKind,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = -0.5)]
    u_minus: f64,
    #[arg(long, default_value_t = 0.5)]
    u_plus: f64,
    /// evaluation time (profile-dependent positivity rules apply)
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = -10.0)]
    x_min: f64,
    #[arg(long, default_value_t = 10.0)]
    x_max: f64,
    /// number of sample rows
    #[arg(long, default_value_t = 601)]
    n: usize,
    /// self-similar time shift: 1 evaluates at 1 + t (default depends on kind)
    #[arg(long)]
    time_offset: Option<u8>,
    #[arg(long, value_enum, default_value_t = FluxArg::ReducedQuadratic)]
    flux: FluxArg,
    #[arg(long, default_value_t = -1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long, default_value_t = 0.0)]
    tilt: f64,
    /// output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FluxArg {
    Zero,
    ReducedQuadratic,
    IntervalDegenerate,
}

impl FluxArg {
    fn kind(self) -> FluxKind {
        match self {
            FluxArg::Zero => FluxKind::Zero,
            FluxArg::ReducedQuadratic => FluxKind::ReducedQuadratic,
            FluxArg::IntervalDegenerate => FluxKind::IntervalDegenerate,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    /// norms.csv produced by `solve`
    #[arg(long)]
    norms: PathBuf,
    #[arg(long)]
    column: String,
    #[arg(long)]
    t_min: f64,
    #[arg(long)]
    t_max: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick suite only (default)
    #[arg(long, conflicts_with = "full")]
    quick: bool,
    /// quick suite plus the canonical decay runs (minutes)
    #[arg(long)]
    full: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// template TOML run configuration; p is overridden per combination
    #[arg(long)]
    template: PathBuf,
    /// comma-separated p values
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    /// comma-separated norm orders to fit (1, 2 or 4)
    #[arg(long, value_delimiter = ',', required = true)]
    q_list: Vec<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Profile(args) => cmd_profile(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Rates(args) => cmd_rates(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Instability { .. } | Error::NoConvergence { .. } => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

/// Write atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidConfig(format!("io error: {e}"))
}

fn cmd_profile(args: ProfileArgs) -> Result<ExitCode, Error> {
    if args.n < 2 {
        return Err(Error::InvalidConfig("need at least 2 sample rows".into()));
    }
    let xs: Vec<f64> = (0..args.n)
        .map(|i| args.x_min + (args.x_max - args.x_min) * i as f64 / (args.n - 1) as f64)
        .collect();
    let flux = make_flux(args.flux.kind(), args.a, args.b, args.tilt)?;

    // (value, optional derivative) per sample point
    let rows: Vec<(f64, Option<f64>)> = match args.kind {
        ProfileKind::Barenblatt => {
            let offset = args.time_offset.unwrap_or(1) as f64;
            let tau = args.t + offset;
            if tau <= 0.0 {
                return Err(Error::InvalidParams("effective time must be positive".into()));
            }
            let c = selfsimilar_constants(args.p, args.mu, args.u_plus - args.u_minus)?;
            xs.iter().map(|&x| (barenblatt(&c, tau, x), Some(barenblatt_dx(&c, tau, x)))).collect()
        }
        ProfileKind::Contact => {
            let offset = args.time_offset.unwrap_or(0);
            let w = ContactWave::new(args.p, args.mu, args.u_minus, args.u_plus, offset)?;
            if args.t + offset as f64 <= 0.0 {
                return Err(Error::InvalidParams("effective time must be positive".into()));
            }
            let values = w.sample_values(args.t, &xs);
            xs.iter()
                .zip(values)
                .map(|(&x, v)| (v, Some(w.dx(args.t, x))))
                .collect()
        }
        ProfileKind::Rarefaction => {
            if args.t <= 0.0 {
                return Err(Error::InvalidParams("rarefaction needs t > 0".into()));
            }
            xs.iter()
                .map(|&x| {
                    Ok((
                        exact_rarefaction(&flux, args.u_minus, args.u_plus, args.t, x)?,
                        Some(exact_rarefaction_dx(&flux, args.u_minus, args.u_plus, args.t, x)?),
                    ))
                })
                .collect::<Result<_, Error>>()?
        }
        ProfileKind::SmoothRarefaction => {
            let r = SmoothRarefaction::new(flux, args.u_minus, args.u_plus)?;
            xs.iter()
                .map(|&x| {
                    let (v, d) = r.value_and_dx(args.t, x);
                    (v, Some(d))
                })
                .collect()
        }
        ProfileKind::Multiwave => {
            let params = Params::new(args.p, args.mu, args.u_minus, args.u_plus, flux)?;
            let mw = Multiwave::new(&params)?;
            xs.iter()
                .map(|&x| Ok((mw.value(args.t, x)?, Some(mw.dx(args.t, x)?))))
                .collect::<Result<_, Error>>()?
        }
        ProfileKind::TildeU => {
            let params = Params::new(args.p, args.mu, args.u_minus, args.u_plus, flux)?;
            let tu = TildeU::new(&params)?;
            let (values, derivs) = tu.sample_value_and_dx(args.t, &xs);
            values.into_iter().zip(derivs).map(|(v, d)| (v, Some(d))).collect()
        }
    };

    let with_dvalue = rows.iter().all(|(_, d)| d.is_some());
    let mut out = String::new();
    out.push_str(if with_dvalue { "x,value,dvalue\n" } else { "x,value\n" });
    for (x, (v, d)) in xs.iter().zip(&rows) {
        match d {
            Some(d) if with_dvalue => {
                let _ = writeln!(out, "{},{},{}", fmt_g17(*x), fmt_g17(*v), fmt_g17(*d));
            }
            _ => {
                let _ = writeln!(out, "{},{}", fmt_g17(*x), fmt_g17(*v));
            }
        }
    }
    write_atomic(&args.out, &out).map_err(io_err)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(io_err)?;
    let config = RunConfigFile::parse(&text)?.build()?;
    let out = run(&config)?;

    let norms_path = args.out_dir.join("norms.csv");
    write_atomic(&norms_path, &norms_csv_string(&out.series)).map_err(io_err)?;
    for snap in &out.snapshots {
        let name = format!("snapshot_{}.csv", snap.t);
        write_atomic(&args.out_dir.join(name), &snapshot_csv_string(snap)).map_err(io_err)?;
    }
    if out.range_warning {
        eprintln!("warning: solution left the expected range (perturbation overshoot)");
    }
    if out.series.failed {
        eprintln!("numerical instability: partial series written to {}", norms_path.display());
        return Ok(ExitCode::from(3));
    }
    println!(
        "wrote {} records and {} snapshots to {}",
        out.series.records.len(),
        out.snapshots.len(),
        args.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_rates(args: RatesArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.norms).map_err(io_err)?;
    let (names, columns) = parse_norms_csv(&text)?;
    let t_idx = names
        .iter()
        .position(|n| n == "t")
        .ok_or_else(|| Error::InvalidConfig("norms file lacks a t column".into()))?;
    let c_idx = names
        .iter()
        .position(|n| n == &args.column)
        .ok_or_else(|| Error::InvalidConfig(format!("no column named {}", args.column)))?;
    let fit = fit_rate(&columns[t_idx], &columns[c_idx], (args.t_min, args.t_max))?;
    println!(
        "{}: slope {:.6}, intercept {:.6}, r2 {:.6} over t in [{}, {}]",
        args.column, fit.exponent, fit.intercept, fit.r2, args.t_min, args.t_max
    );
    println!(
        "column,slope,intercept,r2,t_min,t_max\n{},{},{},{},{},{}",
        args.column,
        fmt_g17(fit.exponent),
        fmt_g17(fit.intercept),
        fmt_g17(fit.r2),
        fmt_g17(args.t_min),
        fmt_g17(args.t_max)
    );
    Ok(ExitCode::SUCCESS)
}

fn report_lines(reports: &[CheckReport]) -> String {
    let mut s = String::from("name,status,measured,expected,tolerance,notes\n");
    for r in reports {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let mut reports = quick_suite();
    if args.full {
        reports.extend(run_decay_suite(&canonical_decay_configs())?);
    }
    write_atomic(&args.out_dir.join("report.csv"), &report_lines(&reports)).map_err(io_err)?;
    let mut failed = 0;
    for r in &reports {
        println!("[{}] {} (measured {:.6e}, expected {:.6e})", r.status, r.name, r.measured, r.expected);
        if !r.passed() {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", reports.len(), failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    if args.p_list.is_empty() || args.q_list.is_empty() {
        return Err(Error::InvalidConfig("p-list and q-list must be non-empty".into()));
    }
    for &q in &args.q_list {
        if ![1.0, 2.0, 4.0].contains(&q) {
            return Err(Error::InvalidConfig(format!(
                "q = {q} has no recorded norm column (available: 1, 2, 4)"
            )));
        }
    }
    let text = std::fs::read_to_string(&args.template).map_err(io_err)?;
    let template = RunConfigFile::parse(&text)?;

    let mut combos: Vec<(f64, f64)> = Vec::new();
    for &p in &args.p_list {
        for &q in &args.q_list {
            combos.push((p, q));
        }
    }
    // validate all combos before any compute
    let mut jobs = Vec::new();
    for &(p, q) in &combos {
        let mut file = template.clone();
        file.params.p = p;
        let config = file.build()?;
        jobs.push((p, q, config));
    }

    let threads = std::env::var("DEGENWAVE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(num_cpus);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    use rayon::prelude::*;
    let results: Vec<(f64, f64, degenwave::solver::RunOutput)> = pool.install(|| {
        jobs.par_iter()
            .map(|(p, q, config)| run(config).map(|out| (*p, *q, out)))
            .collect::<Result<Vec<_>, Error>>()
    })?;

    let mut summary = String::from("p,q,fitted_slope,theorem_slope,margin,status\n");
    let mut any_failed = false;
    for (p, q, out) in &results {
        let dir = args.out_dir.join(format!("p{p}_q{q}"));
        write_atomic(&dir.join("norms.csv"), &norms_csv_string(&out.series)).map_err(io_err)?;
        let column = if *q == 1.0 { "l1" } else if *q == 2.0 { "l2" } else { "l4" };
        let times = out.series.times();
        let values = out.series.column(column).unwrap();
        let t_end = *times.last().unwrap();
        let theorem_slope = -(1.0 - 1.0 / q) / (2.0 * p);
        let (fitted, status) = if out.series.failed {
            any_failed = true;
            (f64::NAN, "failed")
        } else {
            match fit_rate(&times, &values, (t_end / 10.0, t_end)) {
                Ok(fit) => {
                    let pass = fit.exponent <= theorem_slope + 0.1;
                    (fit.exponent, if pass { "pass" } else { "fail" })
                }
                Err(_) => (f64::NAN, "fail"),
            }
        };
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            p,
            q,
            fmt_g17(fitted),
            fmt_g17(theorem_slope),
            fmt_g17(theorem_slope - fitted),
            status
        );
    }
    write_atomic(&args.out_dir.join("summary.csv"), &summary).map_err(io_err)?;
    println!("{} runs -> {}", results.len(), args.out_dir.join("summary.csv").display());
    Ok(if any_failed { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn num_cpus() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
