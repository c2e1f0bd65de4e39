//! Series propagator `exp(tA)u = Σ tⁿ Aⁿu / n!` for the Navier-Stokes generator.
//!
//! Because the right-hand side is quadratic, the scaled coefficients
//! `cₙ = Aⁿu/n!` obey
//!
//! ```text
//! (n+1) c_{n+1} = νΔcₙ - Σ_{m=0}^{n} P[(c_m·∇) c_{n-m}]
//! ```
//!
//! with every product dealiased. Coefficients are used as a one-step
//! integrator: a step accepts `dt` once the trailing terms `‖c_N‖ dtᴺ` are
//! below `tol·‖u‖` and `dt` is inside half the empirical convergence radius.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{forward_real, Grid, SpectralVectorField};
use crate::leray::{ensure_solenoidal, leray_project, PhysicalGradients, Viscosity, SOLENOIDAL_TOLERANCE};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ORDER: usize = 30;
pub const MAX_HALVINGS: u32 = 20;
/// Accepted steps satisfy `dt <= RADIUS_SAFETY * radius`.
pub const RADIUS_SAFETY: f64 = 0.5;

/// Truncated time-Taylor expansion `v(base_time + t) ≈ Σ cₙ tⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion {
    base_time: f64,
    coefficients: Vec<SpectralVectorField>,
}

impl TaylorExpansion {
    pub fn base_time(&self) -> f64 {
        self.base_time
    }

    pub fn coefficients(&self) -> &[SpectralVectorField] {
        &self.coefficients
    }

    /// Highest retained power.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn with_base_time(mut self, t: f64) -> Self {
        self.base_time = t;
        self
    }
}

/// Bookkeeping for one accepted series step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub order_used: usize,
    pub dt: f64,
    pub truncation_estimate: f64,
    pub radius_estimate: f64,
}

/// Incremental coefficient generator. Physical-space velocities and
/// gradients of every coefficient are cached for the Cauchy products.
struct Recursion {
    grid: Grid,
    nu: f64,
    coeffs: Vec<SpectralVectorField>,
    norms: Vec<f64>,
    phys: Vec<PhysicalGradients>,
}

impl Recursion {
    fn new(u: &SpectralVectorField, nu: Viscosity) -> Self {
        Self {
            grid: *u.grid(),
            nu: nu.value(),
            coeffs: vec![u.clone()],
            norms: vec![u.l2_norm()],
            phys: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Appends `c_{n+1}` where `n` is the current top index.
    fn advance(&mut self) {
        let n = self.coeffs.len() - 1;
        while self.phys.len() <= n {
            let next = PhysicalGradients::new(&self.coeffs[self.phys.len()]);
            self.phys.push(next);
        }
        let grid = self.grid;
        let dim = grid.dim();
        let phys = &self.phys;
        let products: Vec<_> = (0..dim)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![0.0; grid.len()];
                for m in 0..=n {
                    let left = &phys[m];
                    let right = &phys[n - m];
                    for j in 0..dim {
                        let vj = &left.vel[j];
                        let g = &right.grad[i * dim + j];
                        acc.iter_mut()
                            .zip(vj.iter().zip(g))
                            .for_each(|(a, (x, y))| *a += x * y);
                    }
                }
                forward_real(&grid, &acc)
            })
            .collect();
        let nonlinear = SpectralVectorField::new(grid, products)
            .expect("component layout")
            .dealias();
        let top = &self.coeffs[n];
        // P commutes with Δ; projecting the sum keeps round-off divergence
        // from being amplified by the Laplacian order after order
        let next = leray_project(&top.laplacian().scale(self.nu).sub(&nonlinear))
            .scale(1.0 / (n + 1) as f64);
        self.norms.push(next.l2_norm());
        self.coeffs.push(next);
    }

    fn grow_to(&mut self, order: usize) {
        while self.len() <= order {
            self.advance();
        }
    }

    fn expansion(&self, order: usize) -> TaylorExpansion {
        TaylorExpansion {
            base_time: 0.0,
            coefficients: self.coeffs[..=order].to_vec(),
        }
    }
}

/// Coefficients `c₀..c_order` with `n!·cₙ = Aⁿu`.
pub fn taylor_coefficients(
    u: &SpectralVectorField,
    nu: Viscosity,
    order: usize,
) -> Result<TaylorExpansion> {
    ensure_solenoidal(u, SOLENOIDAL_TOLERANCE)?;
    let mut rec = Recursion::new(u, nu);
    rec.grow_to(order);
    Ok(rec.expansion(order))
}

/// Horner evaluation of `Σ cₙ tⁿ`. `t = 0` returns `c₀` unchanged.
pub fn evaluate(e: &TaylorExpansion, t: f64) -> SpectralVectorField {
    if t == 0.0 {
        return e.coefficients[0].clone();
    }
    let mut acc = e.coefficients[e.order()].clone();
    for c in e.coefficients[..e.order()].iter().rev() {
        acc = c.axpy(t, &acc);
    }
    acc
}

fn radius_from_norms(norms: &[f64]) -> Result<f64> {
    if norms.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "radius estimate needs at least 4 coefficients, got {}",
            norms.len()
        )));
    }
    let last = norms.len() - 1;
    let r = (last - 3..last)
        .map(|n| {
            if norms[n + 1] == 0.0 {
                f64::INFINITY
            } else {
                norms[n] / norms[n + 1]
            }
        })
        .fold(f64::INFINITY, f64::min);
    Ok(r)
}

/// Ratio-test radius: the smallest of the last three `‖cₙ‖/‖c_{n+1}‖`.
/// Vanishing trailing coefficients give `+∞`.
pub fn estimate_radius(e: &TaylorExpansion) -> Result<f64> {
    let norms: Vec<f64> = e.coefficients.iter().map(|c| c.l2_norm()).collect();
    radius_from_norms(&norms)
}

fn validate_step_args(dt: f64, tol: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// Smallest order satisfying the truncation test at `dt`, if any.
fn accepted_order(rec: &mut Recursion, dt: f64, bound: f64, max_order: usize) -> Option<usize> {
    let term = |norms: &[f64], n: usize| norms[n] * dt.powi(n as i32);
    for order in 1..=max_order {
        rec.grow_to(order);
        let norms = &rec.norms;
        // two consecutive small terms guard against coefficient sequences
        // with vanishing odd or even members
        if term(norms, order) > bound || term(norms, order - 1) > bound {
            continue;
        }
        if order >= 3 {
            let radius = radius_from_norms(&norms[..=order]).unwrap_or(f64::INFINITY);
            if dt > RADIUS_SAFETY * radius {
                continue;
            }
        }
        return Some(order);
    }
    None
}

fn step_expansion(
    u: &SpectralVectorField,
    nu: Viscosity,
    dt: f64,
    tol: f64,
    max_order: usize,
) -> Result<(TaylorExpansion, SpectralVectorField, StepStats)> {
    validate_step_args(dt, tol)?;
    ensure_solenoidal(u, SOLENOIDAL_TOLERANCE)?;
    let mut rec = Recursion::new(u, nu);
    let norm_u = rec.norms[0];
    if norm_u == 0.0 || max_order == 0 {
        let stats = StepStats {
            order_used: 0,
            dt,
            truncation_estimate: 0.0,
            radius_estimate: f64::INFINITY,
        };
        return Ok((rec.expansion(0), u.clone(), stats));
    }
    let bound = tol * norm_u;
    let mut dt = dt;
    for halvings in 0..=MAX_HALVINGS {
        if let Some(order) = accepted_order(&mut rec, dt, bound, max_order) {
            let e = rec.expansion(order);
            let radius = if order >= 3 {
                radius_from_norms(&rec.norms[..=order])?
            } else {
                f64::INFINITY
            };
            let stats = StepStats {
                order_used: order,
                dt,
                truncation_estimate: rec.norms[order] * dt.powi(order as i32),
                radius_estimate: radius,
            };
            let v = evaluate(&e, dt);
            return Ok((e, v, stats));
        }
        if halvings == MAX_HALVINGS {
            break;
        }
        dt *= 0.5;
    }
    rec.grow_to(max_order.max(3));
    let radius = radius_from_norms(&rec.norms).unwrap_or(f64::NAN);
    Err(Error::StepFailed {
        halvings: MAX_HALVINGS,
        dt,
        radius,
    })
}

/// One adaptive series step of (at most) `dt`.
pub fn step(
    u: &SpectralVectorField,
    nu: Viscosity,
    dt: f64,
    tol: f64,
    max_order: usize,
) -> Result<(SpectralVectorField, StepStats)> {
    step_expansion(u, nu, dt, tol, max_order).map(|(_, v, s)| (v, s))
}

/// Receives every accepted step of [`propagate`], in time order.
pub trait Observer {
    fn on_step(&mut self, t: f64, field: &SpectralVectorField, stats: &StepStats);

    /// The truncated expansion an accepted step was evaluated from.
    fn on_expansion(&mut self, _expansion: &TaylorExpansion) {}
}

impl<F> Observer for F
where
    F: FnMut(f64, &SpectralVectorField, &StepStats),
{
    fn on_step(&mut self, t: f64, field: &SpectralVectorField, stats: &StepStats) {
        self(t, field, stats)
    }
}

/// Settings for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub tol: f64,
    pub max_order: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

/// Composes series steps from `t = 0` to exactly `t_end`.
pub fn propagate(
    u: &SpectralVectorField,
    nu: Viscosity,
    t_end: f64,
    opts: PropagateOptions,
    observer: &mut dyn Observer,
) -> Result<SpectralVectorField> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    validate_step_args(1.0, opts.tol)?;
    ensure_solenoidal(u, SOLENOIDAL_TOLERANCE)?;
    let mut v = u.clone();
    let mut t = 0.0;
    let mut dt_try = t_end;
    while t < t_end {
        let remaining = t_end - t;
        let dt = dt_try.min(remaining);
        let (e, next, stats) = step_expansion(&v, nu, dt, opts.tol, opts.max_order)?;
        t = if stats.dt >= remaining { t_end } else { t + stats.dt };
        observer.on_expansion(&e.with_base_time(t - stats.dt));
        observer.on_step(t, &next, &stats);
        v = next;
        dt_try = if stats.radius_estimate.is_finite() {
            (RADIUS_SAFETY * stats.radius_estimate).max(stats.dt)
        } else {
            2.0 * stats.dt
        };
    }
    Ok(v)
}
