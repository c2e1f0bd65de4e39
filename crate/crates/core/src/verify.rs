//! End-to-end acceptance checks shared by `liens verify` and the test suite.
//!
//! Each check returns a [`Check`] carrying the measured value, the bound it
//! is held to and a pass/fail verdict. Errors raised inside a case turn into
//! failures with the error text as the note, never into panics.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::burgers::{
    burgers_rhs, relative_l2, rk4_burgers, series_sum, taylor_coefficients_1d_dealiased,
};
use crate::calculus::eval::{bandwidth, eval_diffpoly_dealiased};
use crate::calculus::{a_powers_u, apply_a, derivation_check, rational, DiffPoly, Monomial};
use crate::diagnostics::{dissipativity_residual, energy, enstrophy_norm};
use crate::error::Result;
use crate::grid::{Grid, SpectralVectorField};
use crate::leray::{ns_rhs, ns_rhs_with_pressure, Viscosity};
use crate::lie::{
    estimate_radius, evaluate, propagate, step, taylor_coefficients, Observer, PropagateOptions,
    StepStats, TaylorExpansion,
};
use crate::oracles::{analytic_field, random_divfree, rk4_propagate_with, AnalyticFlow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// 2-D cases only.
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u32,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn new(criterion: u32, name: &'static str, measured: f64, threshold: f64, ok: bool, note: String) -> Self {
        let status = if ok && measured.is_finite() { Status::Pass } else { Status::Fail };
        Self {
            criterion,
            name,
            measured,
            threshold,
            status,
            note,
        }
    }

    fn failed(criterion: u32, name: &'static str, threshold: f64, note: String) -> Self {
        Self {
            criterion,
            name,
            measured: f64::NAN,
            threshold,
            status: Status::Fail,
            note,
        }
    }

    fn skipped(criterion: u32, name: &'static str, threshold: f64, note: &str) -> Self {
        Self {
            criterion,
            name,
            measured: f64::NAN,
            threshold,
            status: Status::Skipped,
            note: note.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(
            f,
            "[{tag}] criterion {:>2} {:<34} measured {:>11.4e}  threshold {:>9.2e}",
            self.criterion, self.name, self.measured, self.threshold
        )?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

/// Records what criteria 4 and 10 need from a series run.
#[derive(Debug, Default)]
struct Recorder {
    energies: Vec<f64>,
    max_step_div: f64,
    max_coeff_div: f64,
    steps: usize,
    max_order: usize,
}

impl Observer for Recorder {
    fn on_step(&mut self, _t: f64, field: &SpectralVectorField, stats: &StepStats) {
        self.energies.push(energy(field));
        self.max_step_div = self.max_step_div.max(field.relative_divergence());
        self.steps += 1;
        self.max_order = self.max_order.max(stats.order_used);
    }

    fn on_expansion(&mut self, e: &TaylorExpansion) {
        for c in e.coefficients() {
            self.max_coeff_div = self.max_coeff_div.max(c.relative_divergence());
        }
    }
}

/// Largest relative energy rise between consecutive records.
fn max_energy_rise(energies: &[f64]) -> f64 {
    energies
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

#[derive(Debug)]
pub struct AnalyticRun {
    pub rel_error: f64,
    pub seconds: f64,
    pub max_step_div: f64,
    pub max_coeff_div: f64,
    pub max_energy_rise: f64,
    pub steps: usize,
    pub max_order: usize,
}

/// Series propagation of a closed-form flow compared with its exact value.
pub fn analytic_run(flow: AnalyticFlow, dim: usize, n: usize, nu: f64, t_end: f64, tol: f64) -> Result<AnalyticRun> {
    let grid = Grid::periodic(dim, n)?;
    let nu = Viscosity::new(nu)?;
    let u = analytic_field(&flow, 0.0, nu, &grid)?;
    let exact = analytic_field(&flow, t_end, nu, &grid)?;
    let mut rec = Recorder {
        energies: vec![energy(&u)],
        ..Recorder::default()
    };
    let opts = PropagateOptions {
        tol,
        ..PropagateOptions::default()
    };
    let start = Instant::now();
    let v = propagate(&u, nu, t_end, opts, &mut rec)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(AnalyticRun {
        rel_error: v.sub(&exact).l2_norm() / exact.l2_norm(),
        seconds,
        max_step_div: rec.max_step_div,
        max_coeff_div: rec.max_coeff_div,
        max_energy_rise: max_energy_rise(&rec.energies),
        steps: rec.steps,
        max_order: rec.max_order,
    })
}

#[derive(Debug)]
pub struct RandomRun {
    pub grid: Grid,
    pub initial: SpectralVectorField,
    pub lie: SpectralVectorField,
    pub rk4: SpectralVectorField,
    pub distance: f64,
    pub lie_energy_rise: f64,
    pub rk4_energy_rise: f64,
    pub lie_seconds: f64,
    pub rk4_seconds: f64,
}

pub const RANDOM_SEED: u64 = 2024;
pub const RANDOM_PEAK_K: usize = 3;
pub const RANDOM_AMPLITUDE: f64 = 10.0;
pub const RANDOM_NU: f64 = 0.02;
pub const RANDOM_T_END: f64 = 0.5;
pub const RK4_DT: f64 = 1e-3;

/// Series propagator against RK4 on a seeded random field.
pub fn random_run(dim: usize, n: usize) -> Result<RandomRun> {
    let grid = Grid::periodic(dim, n)?;
    let nu = Viscosity::new(RANDOM_NU)?;
    let u = random_divfree(RANDOM_SEED, &grid, RANDOM_PEAK_K, RANDOM_AMPLITUDE)?;
    let mut rec = Recorder {
        energies: vec![energy(&u)],
        ..Recorder::default()
    };
    let start = Instant::now();
    let lie = propagate(&u, nu, RANDOM_T_END, PropagateOptions::default(), &mut rec)?;
    let lie_seconds = start.elapsed().as_secs_f64();
    let mut rk_energies = vec![energy(&u)];
    let start = Instant::now();
    let rk4 = rk4_propagate_with(&u, nu, RANDOM_T_END, RK4_DT, |_, f| rk_energies.push(energy(f)))?;
    let rk4_seconds = start.elapsed().as_secs_f64();
    Ok(RandomRun {
        grid,
        distance: lie.sub(&rk4).l2_norm() / rk4.l2_norm(),
        initial: u,
        lie,
        rk4,
        lie_energy_rise: max_energy_rise(&rec.energies),
        rk4_energy_rise: max_energy_rise(&rk_energies),
        lie_seconds,
        rk4_seconds,
    })
}

pub const DISSIPATIVITY_NU: f64 = 0.05;

/// Worst relative residuals of the dissipativity identity, of `div F(v)`
/// and of the pressure-path cross-check over `count` random fields.
pub fn dissipativity_sweep(grid: &Grid, count: u64) -> Result<[f64; 3]> {
    let nu = Viscosity::new(DISSIPATIVITY_NU)?;
    let mut worst = [0.0_f64; 3];
    for seed in 0..count {
        let peak = (grid.dealias_cutoff() / 2).max(1);
        let amplitude = 0.5 + seed as f64;
        let v = random_divfree(1000 + seed, grid, peak, amplitude)?;
        let sink = nu.value() * enstrophy_norm(&v);
        let res = dissipativity_residual(&v, nu)?.abs() / sink;
        let f = ns_rhs(&v, nu)?;
        let div = f.relative_divergence();
        let g = ns_rhs_with_pressure(&v, nu)?;
        let paths = f.sub(&g).l2_norm() / g.l2_norm();
        worst = [worst[0].max(res), worst[1].max(div), worst[2].max(paths)];
    }
    Ok(worst)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

pub const CONVERGENCE_NU: f64 = 0.5;

/// One order of the convergence study: `(N, slope, [(dt, error)])`.
pub type ConvergenceLadder = (usize, f64, Vec<(f64, f64)>);

/// Fixed-order single steps of the 2-D
/// vortex. With `ν = 1/2` the exact factor is `e^{-dt}`, and each ladder
/// spans `dt ∈ [x/8, x]` with `x = 0.2·N` so the error stays between
/// round-off and the pre-asymptotic regime. Errors are relative to `‖u‖`.
pub fn convergence_slopes() -> Result<Vec<ConvergenceLadder>> {
    let grid = Grid::periodic(2, 16)?;
    let nu = Viscosity::new(CONVERGENCE_NU)?;
    let flow = AnalyticFlow::taylor_green_2d();
    let u = analytic_field(&flow, 0.0, nu, &grid)?;
    let norm = u.l2_norm();
    let mut out = Vec::new();
    for order in [2usize, 4, 8] {
        let e = taylor_coefficients(&u, nu, order)?;
        let top = 0.2 * order as f64;
        let mut points = Vec::new();
        for k in 0..4 {
            let dt = top / f64::powi(2.0, k);
            let exact = analytic_field(&flow, dt, nu, &grid)?;
            points.push((dt, evaluate(&e, dt).sub(&exact).l2_norm() / norm));
        }
        out.push((order, log_log_slope(&points), points));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersReport {
    pub n: usize,
    /// `(k, ‖Aᵏu/k! − cₖ‖/‖cₖ‖)` for the symbolic and recursive routes.
    pub rows: Vec<(usize, f64)>,
    /// `(N, relative error of the order-N series against RK4)`.
    pub series: Vec<(usize, f64)>,
    /// Largest Fourier index of `u₀` above round-off.
    pub initial_bandwidth: usize,
}

pub const BURGERS_NU: (i64, i64) = (1, 10);
pub const BURGERS_T: f64 = 0.1;
pub const BURGERS_SERIES_ORDERS: std::ops::RangeInclusive<usize> = 2..=10;

/// `sin x + 0.3 cos 2x` on `n` points.
pub fn burgers_initial(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / n as f64;
            x.sin() + 0.3 * (2.0 * x).cos()
        })
        .collect()
}

/// Symbolic `Aᵏu/k!` against the numeric recursion for `k <= order`, and
/// the symbolic series against RK4 at `t = 0.1`.
pub fn burgers_check(order: usize, n: usize) -> Result<BurgersReport> {
    let u0 = burgers_initial(n);
    let nu_q = rational(BURGERS_NU.0, BURGERS_NU.1);
    let nu = BURGERS_NU.0 as f64 / BURGERS_NU.1 as f64;
    let f = burgers_rhs(&nu_q);
    let top = order.max(*BURGERS_SERIES_ORDERS.end());
    let powers = a_powers_u(&f, top);
    let mut symbolic = Vec::with_capacity(top + 1);
    let mut factorial = 1.0;
    for (k, p) in powers.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        let vals = eval_diffpoly_dealiased(p, &u0)?;
        symbolic.push(vals.into_iter().map(|x| x / factorial).collect::<Vec<_>>());
    }
    let numeric = taylor_coefficients_1d_dealiased(&u0, nu, order)?;
    let rows = (0..=order)
        .map(|k| (k, relative_l2(&symbolic[k], &numeric[k])))
        .collect();
    let reference = rk4_burgers(&u0, nu, BURGERS_T, 1e-4)?;
    let series = BURGERS_SERIES_ORDERS
        .map(|m| (m, relative_l2(&series_sum(&symbolic[..=m], BURGERS_T), &reference)))
        .collect();
    Ok(BurgersReport {
        n,
        rows,
        series,
        initial_bandwidth: bandwidth(&u0)?,
    })
}

impl BurgersReport {
    pub const ROW_TOLERANCE: f64 = 1e-8;
    pub const SERIES_TOLERANCE: f64 = 1e-8;

    pub fn worst_row(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn series_monotone(&self) -> bool {
        self.series.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn final_series_error(&self) -> f64 {
        self.series.last().map_or(f64::NAN, |s| s.1)
    }

    /// First row whose coefficient carries modes beyond the `n/3` cutoff.
    pub fn first_underresolved_row(&self) -> Option<usize> {
        let cutoff = self.n / 3;
        self.rows
            .iter()
            .map(|r| r.0)
            .find(|&k| self.initial_bandwidth * (k + 1) > cutoff)
    }

    pub fn passed(&self) -> bool {
        self.worst_row() <= Self::ROW_TOLERANCE
            && self.series_monotone()
            && self.final_series_error() <= Self::SERIES_TOLERANCE
    }
}

/// Random differential polynomial with small rational coefficients.
pub fn random_diffpoly(rng: &mut impl Rng, max_terms: usize, max_degree: usize, max_order: u32) -> DiffPoly {
    let terms = rng.gen_range(1..=max_terms);
    let mut p = DiffPoly::zero();
    for _ in 0..terms {
        let degree = rng.gen_range(0..=max_degree);
        let mut powers = std::collections::BTreeMap::new();
        for _ in 0..degree {
            *powers.entry(rng.gen_range(0..=max_order)).or_insert(0) += 1;
        }
        let num = loop {
            let x: i64 = rng.gen_range(-9..=9);
            if x != 0 {
                break x;
            }
        };
        let den: i64 = rng.gen_range(1..=6);
        p = &p + &DiffPoly::term(rational(num, den), Monomial::from_powers(&powers));
    }
    p
}

fn random_rational(rng: &mut impl Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-20..=20)), BigInt::from(rng.gen_range(1..=7)))
}

/// Number of the `count` random instances where a law fails.
pub fn operator_law_failures(count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..count {
        let f = random_diffpoly(&mut rng, 3, 3, 3);
        let f2 = random_diffpoly(&mut rng, 3, 2, 2);
        let g = random_diffpoly(&mut rng, 3, 3, 3);
        let h = random_diffpoly(&mut rng, 3, 3, 3);
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        let leibniz = derivation_check(&f, &g, &h);
        let combo = &g.scale(&a) + &h.scale(&b);
        let linear = apply_a(&f, &combo) == &apply_a(&f, &g).scale(&a) + &apply_a(&f, &h).scale(&b);
        let additive = apply_a(&(&f + &f2), &g) == &apply_a(&f, &g) + &apply_a(&f2, &g);
        let generator = apply_a(&f, &DiffPoly::u()) == f;
        if !(leibniz && linear && additive && generator) {
            failures += 1;
        }
    }
    failures
}

fn or_fail(criterion: u32, name: &'static str, threshold: f64, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| Check::failed(criterion, name, threshold, e.to_string()))
}

const C1: &str = "taylor-green 2-D exactness";
const C2: &str = "beltrami ABC 3-D exactness";
const C3: &str = "dissipativity identity";
const C4: &str = "divergence preservation";
const C5: &str = "series vs RK4 agreement";
const C6: &str = "semigroup law";
const C7: &str = "convergence order";
const C8: &str = "burgers linear representation";
const C9: &str = "operator derivation/linearity laws";
const C10: &str = "energy monotonicity";

pub fn criterion_3(level: Level) -> Check {
    let threshold = 1e-10;
    or_fail(3, C3, threshold, (|| {
        let mut worst = dissipativity_sweep(&Grid::periodic(2, 32)?, 20)?;
        let mut cases = "20 fields on 32^2".to_string();
        if level == Level::Full {
            let w3 = dissipativity_sweep(&Grid::periodic(3, 16)?, 20)?;
            for (a, b) in worst.iter_mut().zip(w3) {
                *a = a.max(b);
            }
            cases.push_str(" + 20 on 16^3");
        }
        let [res, div, paths] = worst;
        let ok = res <= threshold && div <= threshold && paths <= threshold;
        Ok(Check::new(
            3,
            C3,
            res,
            threshold,
            ok,
            format!("{cases}; div F {div:.1e}, pressure-path gap {paths:.1e}"),
        ))
    })())
}

pub fn criterion_6(run: &RandomRun) -> Check {
    let tol = 1e-10;
    let threshold = 10.0 * tol;
    or_fail(6, C6, threshold, (|| {
        let nu = Viscosity::new(RANDOM_NU)?;
        let u = &run.initial;
        let radius = estimate_radius(&taylor_coefficients(u, nu, 12)?)?;
        let dt = 0.125 * radius;
        let (half, s1) = step(u, nu, dt, tol, 30)?;
        let (two, s2) = step(&half, nu, dt, tol, 30)?;
        let (one, s3) = step(u, nu, 2.0 * dt, tol, 30)?;
        let measured = two.sub(&one).l2_norm() / u.l2_norm();
        let full_steps = s1.dt == dt && s2.dt == dt && s3.dt == 2.0 * dt;
        Ok(Check::new(
            6,
            C6,
            measured,
            threshold,
            full_steps && measured <= threshold,
            format!("dt {dt:.3e} = radius/8, steps taken in full: {full_steps}"),
        ))
    })())
}

pub fn criterion_7() -> Check {
    let threshold = 0.3;
    or_fail(7, C7, threshold, (|| {
        let slopes = convergence_slopes()?;
        let worst = slopes
            .iter()
            .map(|(n, s, _)| (s - (*n as f64 + 1.0)).abs())
            .fold(0.0, f64::max);
        let note = slopes
            .iter()
            .map(|(n, s, _)| format!("N={n}: {s:.3}"))
            .collect::<Vec<_>>()
            .join(", ");
        Ok(Check::new(7, C7, worst, threshold, worst <= threshold, format!("|slope - (N+1)|; {note}")))
    })())
}

pub fn criterion_8() -> Check {
    let threshold = BurgersReport::ROW_TOLERANCE;
    or_fail(8, C8, threshold, (|| {
        let r = burgers_check(5, 64)?;
        let rows = r.worst_row();
        Ok(Check::new(
            8,
            C8,
            rows,
            threshold,
            r.passed(),
            format!(
                "series N=2..10 monotone: {}, N=10 error {:.2e} (bound {:.0e})",
                r.series_monotone(),
                r.final_series_error(),
                BurgersReport::SERIES_TOLERANCE
            ),
        ))
    })())
}

pub fn criterion_9() -> Check {
    let failures = operator_law_failures(100, 9);
    Check::new(9, C9, failures as f64, 0.0, failures == 0, "failing instances out of 100".into())
}

/// Runs every criterion at `level`, in order.
pub fn run(level: Level, mut on_check: impl FnMut(&Check)) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |c: Check, checks: &mut Vec<Check>| {
        on_check(&c);
        checks.push(c);
    };

    let tg = analytic_run(AnalyticFlow::taylor_green_2d(), 2, 64, 0.1, 1.0, 1e-10);
    let c1 = match &tg {
        Ok(r) => Check::new(
            1,
            C1,
            r.rel_error,
            1e-8,
            r.rel_error <= 1e-8 && r.seconds < 5.0,
            format!("{:.2} s of 5 s, {} steps, orders <= {}", r.seconds, r.steps, r.max_order),
        ),
        Err(e) => Check::failed(1, C1, 1e-8, e.to_string()),
    };
    push(c1, &mut checks);

    let abc = (level == Level::Full)
        .then(|| analytic_run(AnalyticFlow::abc(1.0, 1.0, 1.0), 3, 32, 0.05, 0.5, 1e-10));
    let c2 = match &abc {
        None => Check::skipped(2, C2, 1e-7, "3-D, full level only"),
        Some(Ok(r)) => Check::new(
            2,
            C2,
            r.rel_error,
            1e-7,
            r.rel_error <= 1e-7 && r.seconds < 120.0,
            format!("{:.2} s of 120 s, {} steps", r.seconds, r.steps),
        ),
        Some(Err(e)) => Check::failed(2, C2, 1e-7, e.to_string()),
    };
    push(c2, &mut checks);

    push(criterion_3(level), &mut checks);

    let c4 = {
        let runs: Vec<_> = [Some(&tg), abc.as_ref()].into_iter().flatten().collect();
        match runs.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => Check::failed(4, C4, 1e-10, e.to_string()),
            None => {
                let ok: Vec<&AnalyticRun> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
                let coeff = ok.iter().map(|r| r.max_coeff_div).fold(0.0, f64::max);
                let steps = ok.iter().map(|r| r.max_step_div).fold(0.0, f64::max);
                let worst = coeff.max(steps);
                Check::new(
                    4,
                    C4,
                    worst,
                    1e-10,
                    worst <= 1e-10,
                    format!("coefficients {coeff:.1e}, accepted steps {steps:.1e}"),
                )
            }
        }
    };
    push(c4, &mut checks);

    let random = match level {
        Level::Full => random_run(3, 32),
        Level::Quick => random_run(2, 32),
    };
    let size = if level == Level::Full { "32^3" } else { "32^2" };
    let c5 = match &random {
        Ok(r) => Check::new(
            5,
            C5,
            r.distance,
            1e-6,
            r.distance <= 1e-6,
            format!("{size}, series {:.1} s, RK4 {:.1} s", r.lie_seconds, r.rk4_seconds),
        ),
        Err(e) => Check::failed(5, C5, 1e-6, e.to_string()),
    };
    push(c5, &mut checks);

    let c6 = match &random {
        Ok(r) => criterion_6(r),
        Err(e) => Check::failed(6, C6, 1e-9, format!("criterion 5 data unavailable: {e}")),
    };
    push(c6, &mut checks);

    push(criterion_7(), &mut checks);
    push(criterion_8(), &mut checks);
    push(criterion_9(), &mut checks);

    let c10 = {
        let mut rises = Vec::new();
        let mut errors = Vec::new();
        for r in [Some(&tg), abc.as_ref()].into_iter().flatten() {
            match r {
                Ok(r) => rises.push(r.max_energy_rise),
                Err(e) => errors.push(e.to_string()),
            }
        }
        match &random {
            Ok(r) => rises.extend([r.lie_energy_rise, r.rk4_energy_rise]),
            Err(e) => errors.push(e.to_string()),
        }
        let worst = rises.iter().copied().fold(0.0, f64::max);
        if errors.is_empty() {
            Check::new(
                10,
                C10,
                worst,
                1e-12,
                worst <= 1e-12,
                format!("largest relative rise over {} trajectories", rises.len()),
            )
        } else {
            Check::failed(10, C10, 1e-12, errors.join("; "))
        }
    };
    push(c10, &mut checks);
    checks
}
