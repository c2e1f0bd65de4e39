//! Energy, enstrophy, divergence and balance diagnostics.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::SpectralVectorField;
use crate::leray::{ns_rhs, Viscosity};

/// `½ ∫ |v|² dx`.
pub fn energy(v: &SpectralVectorField) -> f64 {
    0.5 * v.coefficient_power() * v.grid().volume()
}

/// `Σ_ij ∫ (∂_j v_i)² dx`.
pub fn enstrophy_norm(v: &SpectralVectorField) -> f64 {
    v.gradient_norm().powi(2)
}

/// Largest `|div v|` over the grid.
pub fn div_max(v: &SpectralVectorField) -> f64 {
    v.divergence()
        .physical_real_part()
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

/// `⟨F(v), v⟩ + ν Σ∫(∂_j v_i)²`; zero up to round-off for solenoidal,
/// dealiased `v`.
pub fn dissipativity_residual(v: &SpectralVectorField, nu: Viscosity) -> Result<f64> {
    let rhs = ns_rhs(v, nu)?;
    Ok(rhs.inner(v) + nu.value() * enstrophy_norm(v))
}

/// Energy binned by integer shells: a mode with integer wavevector `j`
/// lands in shell `round(|j|)`. Entry `s` of the result is `(s, E_s)`.
pub fn shell_spectrum(v: &SpectralVectorField) -> Vec<(usize, f64)> {
    let grid = v.grid();
    let dim = grid.dim();
    let half_volume = 0.5 * grid.volume();
    let mut shells: Vec<f64> = Vec::new();
    for idx in 0..grid.len() {
        let c = grid.coords(idx);
        let j2: i64 = c[..dim].iter().map(|&j| grid.signed_index(j).pow(2)).sum();
        let shell = (j2 as f64).sqrt().round() as usize;
        if shells.len() <= shell {
            shells.resize(shell + 1, 0.0);
        }
        let p: f64 = v.components().iter().map(|comp| comp[idx].norm_sqr()).sum();
        shells[shell] += half_volume * p;
    }
    shells.into_iter().enumerate().collect()
}

/// One row of the per-step diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub div_max: f64,
    pub balance_residual: f64,
    pub order_used: usize,
    pub dt: f64,
}

impl TimeSeriesRecord {
    /// Measures `v` at time `t`. The balance residual is left at zero until
    /// [`fill_balance_residuals`] sees the whole series.
    pub fn measure(t: f64, v: &SpectralVectorField, order_used: usize, dt: f64) -> Self {
        Self {
            t,
            energy: energy(v),
            enstrophy: enstrophy_norm(v),
            div_max: div_max(v),
            balance_residual: 0.0,
            order_used,
            dt,
        }
    }
}

pub const SERIES_CSV_HEADER: &str = "t,energy,enstrophy,div_max,balance_residual,order_used,dt";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series_csv(mut w: impl Write, records: &[TimeSeriesRecord]) -> std::io::Result<()> {
    writeln!(w, "{SERIES_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.energy),
            fmt_f64(r.enstrophy),
            fmt_f64(r.div_max),
            fmt_f64(r.balance_residual),
            r.order_used,
            fmt_f64(r.dt)
        )?;
    }
    Ok(())
}

pub fn write_spectrum_csv(mut w: impl Write, spectrum: &[(usize, f64)]) -> std::io::Result<()> {
    writeln!(w, "shell,energy")?;
    for (k, e) in spectrum {
        writeln!(w, "{k},{}", fmt_f64(*e))?;
    }
    Ok(())
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_sorted(series: &[TimeSeriesRecord]) -> Result<()> {
    // negated so that NaN times are rejected too
    if series.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidArgument(
            "time series must be strictly increasing in t".into(),
        ));
    }
    Ok(())
}

/// Three-point derivative of `E` at record `i` on a nonuniform mesh.
fn energy_rate(series: &[TimeSeriesRecord], i: usize) -> f64 {
    let n = series.len();
    let e = |k: usize| series[k].energy;
    let t = |k: usize| series[k].t;
    if n == 2 {
        return (e(1) - e(0)) / (t(1) - t(0));
    }
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    // derivative of the interpolating parabola through a, b, c at t(i)
    let x = t(i);
    let (ta, tb, tc) = (t(a), t(b), t(c));
    e(a) * (2.0 * x - tb - tc) / ((ta - tb) * (ta - tc))
        + e(b) * (2.0 * x - ta - tc) / ((tb - ta) * (tb - tc))
        + e(c) * (2.0 * x - ta - tb) / ((tc - ta) * (tc - tb))
}

/// Relative mismatch of `dE/dt = -ν Ω` at record `i`. The scale is `νΩ`; for
/// inviscid or irrotational states it falls back to `E`, so the residual is
/// then an energy drift rate per unit time.
fn balance_residual_at(series: &[TimeSeriesRecord], i: usize, nu: Viscosity) -> f64 {
    let rate = energy_rate(series, i);
    let sink = nu.value() * series[i].enstrophy;
    let mismatch = (rate + sink).abs();
    let scale = if sink > 0.0 { sink } else { series[i].energy };
    if scale > 0.0 {
        mismatch / scale
    } else {
        mismatch
    }
}

/// Maximum relative balance residual over interior records.
pub fn energy_balance(series: &[TimeSeriesRecord], nu: Viscosity) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "energy balance needs at least 3 records, got {}",
            series.len()
        )));
    }
    check_sorted(series)?;
    Ok((1..series.len() - 1)
        .map(|i| balance_residual_at(series, i, nu))
        .fold(0.0, f64::max))
}

/// Fills `balance_residual` on every record (one-sided stencils at the ends).
pub fn fill_balance_residuals(series: &mut [TimeSeriesRecord], nu: Viscosity) -> Result<()> {
    if series.len() < 2 {
        series.iter_mut().for_each(|r| r.balance_residual = 0.0);
        return Ok(());
    }
    check_sorted(series)?;
    let res: Vec<f64> = (0..series.len())
        .map(|i| balance_residual_at(series, i, nu))
        .collect();
    for (r, x) in series.iter_mut().zip(res) {
        r.balance_residual = x;
    }
    Ok(())
}

/// Whether recorded energies never rise by more than `rel` per step.
pub fn energy_non_increasing(series: &[TimeSeriesRecord], rel: f64) -> bool {
    series
        .windows(2)
        .all(|w| w[1].energy <= w[0].energy * (1.0 + rel))
}
