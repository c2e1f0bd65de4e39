//! `liens` command line: `simulate`, `verify`, `burgers-check`, `spectrum`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or input
//! error, 3 propagation failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{InitialCondition, Integrator, RunConfig};
use crate::diagnostics::{
    fill_balance_residuals, fmt_f64, shell_spectrum, write_series_csv, write_spectrum_csv,
    TimeSeriesRecord,
};
use crate::error::{Error, Result};
use crate::grid::SpectralVectorField;
use crate::leray::{inject_pressure_sign_fault, leray_project};
use crate::lie::{propagate, Observer, PropagateOptions, StepStats};
use crate::oracles::{analytic_field, random_divfree, rk4_propagate_with, rk4_stability_limit};
use crate::snapshot::{self, Snapshot};
use crate::verify::{self, BurgersReport, Level};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PROPAGATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "liens", version, about = "Series-propagated spectral Navier-Stokes solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Simulate { config: PathBuf },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        /// Flip the pressure sign in the right-hand side (negative control).
        #[arg(long, hide = true)]
        inject_pressure_sign_fault: bool,
    },
    /// Compare symbolic generator powers with numeric 1-D Burgers coefficients.
    BurgersCheck {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(0..=8))]
        order: u32,
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Print the shell spectrum of a snapshot as CSV.
    Spectrum { snapshot: PathBuf },
}

/// Caps the worker pool from `LIENS_THREADS`, if set.
pub fn configure_threads(err: &mut dyn Write) {
    let Ok(raw) = std::env::var("LIENS_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // a pool built earlier in the process wins; nothing else to do
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => {
            let _ = writeln!(err, "warning: ignoring LIENS_THREADS={raw:?}, expected a positive integer");
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    configure_threads(err);
    match cli.command {
        Command::Simulate { config } => cmd_simulate(&config, out, err),
        Command::Verify {
            level,
            inject_pressure_sign_fault: fault,
        } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            cmd_verify(level, fault, out)
        }
        Command::BurgersCheck { order, n } => cmd_burgers_check(order as usize, n, out, err),
        Command::Spectrum { snapshot } => cmd_spectrum(&snapshot, out, err),
    }
}

pub fn cmd_verify(level: Level, fault: bool, out: &mut dyn Write) -> u8 {
    inject_pressure_sign_fault(fault);
    let _ = writeln!(out, "liens verify ({level:?})");
    if fault {
        let _ = writeln!(out, "pressure sign fault injected");
    }
    let checks = verify::run(level, |c| {
        let _ = writeln!(out, "{c}");
    });
    inject_pressure_sign_fault(false);
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(out, "{} checks, {failed} failed", checks.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

pub fn cmd_burgers_check(order: usize, n: usize, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    if n < 8 || !n.is_power_of_two() {
        let _ = writeln!(err, "error: --n must be a power of two and at least 8, got {n}");
        return EXIT_CONFIG;
    }
    let report = match verify::burgers_check(order, n) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    print_burgers(&report, out);
    if report.passed() {
        return EXIT_OK;
    }
    if report.worst_row() > BurgersReport::ROW_TOLERANCE {
        if let Some(k) = report.first_underresolved_row() {
            let _ = writeln!(
                out,
                "FAIL: spectral under-resolution. c_k carries modes up to {}·(k+1), and the \
                 recursion keeps |j| <= n/3 = {}, so rows k >= {k} are truncated. Rerun with a larger --n.",
                report.initial_bandwidth,
                n / 3
            );
        } else {
            let _ = writeln!(out, "FAIL: symbolic and numeric coefficients disagree beyond {:.0e}", BurgersReport::ROW_TOLERANCE);
        }
    } else {
        let _ = writeln!(out, "FAIL: the truncated series does not converge to the RK4 reference");
    }
    EXIT_VERIFY_FAILED
}

fn print_burgers(r: &BurgersReport, out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "Burgers u_t = u_xx/10 - u u_x, u0 = sin x + 0.3 cos 2x, n = {}, 2/3 truncation",
        r.n
    );
    let _ = writeln!(out, "{:>3}  {:>24}  ok", "k", "|A^k u/k! - c_k|/|c_k|");
    for &(k, d) in &r.rows {
        let ok = if d <= BurgersReport::ROW_TOLERANCE { "yes" } else { "NO" };
        let _ = writeln!(out, "{k:>3}  {:>24}  {ok}", fmt_f64(d));
    }
    let _ = writeln!(out, "series at t = {} against RK4 (dt = 1e-4)", verify::BURGERS_T);
    let _ = writeln!(out, "{:>3}  {:>24}", "N", "relative error");
    for &(m, e) in &r.series {
        let _ = writeln!(out, "{m:>3}  {:>24}", fmt_f64(e));
    }
    let _ = writeln!(
        out,
        "monotone: {}, final error {} (bound {:.0e})",
        r.series_monotone(),
        fmt_f64(r.final_series_error()),
        BurgersReport::SERIES_TOLERANCE
    );
}

pub fn cmd_spectrum(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let field = match snapshot::load(path) {
        Ok(s) => s.into_spectral(),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    match write_spectrum_csv(&mut *out, &shell_spectrum(&field)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Loads or generates the initial field described by `config`.
pub fn initial_field(config: &RunConfig) -> Result<SpectralVectorField> {
    match &config.initial {
        InitialCondition::Analytic(flow) => analytic_field(flow, 0.0, config.nu, &config.grid),
        InitialCondition::Random {
            seed,
            peak_k,
            amplitude,
        } => random_divfree(*seed, &config.grid, *peak_k, *amplitude),
        InitialCondition::Snapshot(path) => {
            let snap = snapshot::load(path)?;
            if *snap.grid() != config.grid {
                return Err(Error::Config {
                    key: "initial.path".into(),
                    message: format!("snapshot grid {:?} differs from [grid] {:?}", snap.grid(), config.grid),
                });
            }
            Ok(snap.into_spectral())
        }
    }
}

/// Collects series rows and writes periodic snapshots during a run.
struct Recorder<'a> {
    dir: &'a Path,
    every: usize,
    records: Vec<TimeSeriesRecord>,
    last: SpectralVectorField,
    step: usize,
    last_written: Option<usize>,
    io_error: Option<Error>,
}

impl<'a> Recorder<'a> {
    fn new(dir: &'a Path, every: usize, u: &SpectralVectorField) -> Self {
        Self {
            dir,
            every,
            records: vec![TimeSeriesRecord::measure(0.0, u, 0, 0.0)],
            last: u.clone(),
            step: 0,
            last_written: None,
            io_error: None,
        }
    }

    fn write_snapshot(&mut self) -> Result<PathBuf> {
        let path = self.dir.join(format!("snapshot_{:05}.bin", self.step));
        let phys = self.last.to_physical()?;
        snapshot::save(&path, &Snapshot::Physical(phys))?;
        self.last_written = Some(self.step);
        Ok(path)
    }

    fn record(&mut self, t: f64, field: &SpectralVectorField, order: usize, dt: f64) {
        self.records.push(TimeSeriesRecord::measure(t, field, order, dt));
        self.last = field.clone();
        self.step += 1;
        if self.io_error.is_none() && self.every > 0 && self.step.is_multiple_of(self.every) {
            if let Err(e) = self.write_snapshot() {
                self.io_error = Some(e);
            }
        }
    }

    /// Writes the final snapshot (unless already on disk) and the series.
    fn flush(&mut self, nu: crate::leray::Viscosity) -> Result<()> {
        if let Some(e) = self.io_error.take() {
            return Err(e);
        }
        if self.last_written != Some(self.step) {
            self.write_snapshot()?;
        }
        fill_balance_residuals(&mut self.records, nu)?;
        let mut w = BufWriter::new(File::create(self.dir.join("series.csv"))?);
        write_series_csv(&mut w, &self.records)?;
        w.flush()?;
        Ok(())
    }
}

impl Observer for Recorder<'_> {
    fn on_step(&mut self, t: f64, field: &SpectralVectorField, stats: &StepStats) {
        self.record(t, field, stats.order_used, stats.dt);
    }
}

fn config_error(err: &mut dyn Write, e: &Error) -> u8 {
    let _ = writeln!(err, "config error: {e}");
    EXIT_CONFIG
}

pub fn cmd_simulate(config_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return config_error(err, &e),
    };
    let raw = match initial_field(&config) {
        Ok(u) => u,
        Err(e) => return config_error(err, &e),
    };
    if let Integrator::Rk4 { dt } = config.integrator {
        let limit = rk4_stability_limit(&config.grid, config.nu);
        if dt > limit {
            let e = Error::Config {
                key: "run.rk4_dt".into(),
                message: format!("{dt:e} exceeds the explicit stability bound {limit:e}"),
            };
            return config_error(err, &e);
        }
    }
    let u = leray_project(&raw.dealias());
    let delta = u.sub(&raw).l2_norm();
    let scale = raw.l2_norm();
    let rel = if scale > 0.0 { delta / scale } else { delta };
    let _ = writeln!(err, "initial projection delta: {} (relative L2)", fmt_f64(rel));

    if let Err(e) = fs::create_dir_all(&config.output) {
        let _ = writeln!(err, "error: cannot create {}: {e}", config.output.display());
        return EXIT_CONFIG;
    }
    let mut rec = Recorder::new(&config.output, config.snapshot_every, &u);
    if let Err(e) = rec.write_snapshot() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CONFIG;
    }

    let result = match config.integrator {
        Integrator::Lie { tol, max_order } => {
            let opts = PropagateOptions { tol, max_order };
            propagate(&u, config.nu, config.t_end, opts, &mut rec)
        }
        Integrator::Rk4 { dt } => {
            let mut prev = 0.0;
            rk4_propagate_with(&u, config.nu, config.t_end, dt, |t, f| {
                rec.record(t, f, 4, t - prev);
                prev = t;
            })
        }
    };

    let final_field = match result {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "propagation failed at t = {}: {e}", fmt_f64(rec.records.last().map_or(0.0, |r| r.t)));
            match rec.flush(config.nu) {
                Ok(()) => {
                    let _ = writeln!(err, "last valid state written as snapshot_{:05}.bin", rec.step);
                }
                Err(e) => {
                    let _ = writeln!(err, "error while flushing output: {e}");
                }
            }
            return EXIT_PROPAGATION;
        }
    };

    let written = rec.flush(config.nu).and_then(|()| {
        let mut w = BufWriter::new(File::create(config.output.join("spectrum_final.csv"))?);
        write_spectrum_csv(&mut w, &shell_spectrum(&final_field))?;
        w.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CONFIG;
    }
    let last = rec.records.last().expect("initial record");
    let _ = writeln!(
        out,
        "t = {}  energy = {}  steps = {}  output = {}",
        fmt_f64(last.t),
        fmt_f64(last.energy),
        rec.step,
        config.output.display()
    );
    EXIT_OK
}
