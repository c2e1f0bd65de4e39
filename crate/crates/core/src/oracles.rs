//! Reference solutions: closed-form flows, a classical RK4 integrator and a
//! seeded generator of random solenoidal fields.
//!
//! The RK4 integrator only touches [`crate::leray`]; it shares no code with
//! the series propagator, so agreement between the two is a meaningful check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealVectorField, SpectralVectorField};
use crate::leray::{ensure_solenoidal, leray_project, ns_rhs, Viscosity, SOLENOIDAL_TOLERANCE};

/// Closed-form Navier-Stokes solutions on the periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFlow {
    /// `U (cos x sin y, -sin x cos y) e^{-2νt}`
    TaylorGreen2d { amplitude: f64 },
    /// The 2-D vortex on a 3-D grid with zero third component.
    TaylorGreen3dEmbedded { amplitude: f64 },
    /// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x) e^{-νt}`
    BeltramiAbc { a: f64, b: f64, c: f64 },
}

impl AnalyticFlow {
    pub fn taylor_green_2d() -> Self {
        Self::TaylorGreen2d { amplitude: 1.0 }
    }

    pub fn abc(a: f64, b: f64, c: f64) -> Self {
        Self::BeltramiAbc { a, b, c }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::TaylorGreen2d { .. } => 2,
            Self::TaylorGreen3dEmbedded { .. } | Self::BeltramiAbc { .. } => 3,
        }
    }

    /// Exponential decay rate of the flow for unit viscosity on a box of side `l`.
    pub fn decay_rate(&self, l: f64) -> f64 {
        let k2 = (2.0 * PI / l).powi(2);
        match self {
            Self::TaylorGreen2d { .. } | Self::TaylorGreen3dEmbedded { .. } => 2.0 * k2,
            Self::BeltramiAbc { .. } => k2,
        }
    }

    fn sample(&self, kappa: f64, [x, y, z]: [f64; 3]) -> [f64; 3] {
        let (x, y, z) = (kappa * x, kappa * y, kappa * z);
        match *self {
            Self::TaylorGreen2d { amplitude } | Self::TaylorGreen3dEmbedded { amplitude } => [
                amplitude * x.cos() * y.sin(),
                -amplitude * x.sin() * y.cos(),
                0.0,
            ],
            Self::BeltramiAbc { a, b, c } => [
                a * z.sin() + c * y.cos(),
                b * x.sin() + a * z.cos(),
                c * y.sin() + b * x.cos(),
            ],
        }
    }
}

/// Samples `flow` at time `t` on `grid`.
pub fn analytic_field(
    flow: &AnalyticFlow,
    t: f64,
    nu: Viscosity,
    grid: &Grid,
) -> Result<SpectralVectorField> {
    if flow.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "{flow:?} needs a {}-D grid, got {}-D",
            flow.dim(),
            grid.dim()
        )));
    }
    let kappa = 2.0 * PI / grid.l();
    let decay = (-flow.decay_rate(grid.l()) * nu.value() * t).exp();
    let field = RealVectorField::from_fn(*grid, |p| {
        let v = flow.sample(kappa, p);
        [v[0] * decay, v[1] * decay, v[2] * decay]
    })?;
    Ok(field.to_spectral())
}

/// Analytic time derivative of [`analytic_field`].
pub fn analytic_time_derivative(
    flow: &AnalyticFlow,
    t: f64,
    nu: Viscosity,
    grid: &Grid,
) -> Result<SpectralVectorField> {
    let rate = flow.decay_rate(grid.l()) * nu.value();
    Ok(analytic_field(flow, t, nu, grid)?.scale(-rate))
}

/// Explicit diffusive stability bound `0.5·dx²/ν`.
pub fn rk4_stability_limit(grid: &Grid, nu: Viscosity) -> f64 {
    if nu.value() == 0.0 {
        f64::INFINITY
    } else {
        0.5 * grid.dx().powi(2) / nu.value()
    }
}

/// Classical RK4 on [`ns_rhs`], re-projecting after every step.
pub fn rk4_propagate(
    u: &SpectralVectorField,
    nu: Viscosity,
    t_end: f64,
    dt: f64,
) -> Result<SpectralVectorField> {
    rk4_propagate_with(u, nu, t_end, dt, |_, _| {})
}

/// [`rk4_propagate`] with a callback after every step. The step size is the
/// largest `t_end / m` not exceeding `dt`, so the run lands on `t_end` exactly.
pub fn rk4_propagate_with(
    u: &SpectralVectorField,
    nu: Viscosity,
    t_end: f64,
    dt: f64,
    mut observer: impl FnMut(f64, &SpectralVectorField),
) -> Result<SpectralVectorField> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    let limit = rk4_stability_limit(u.grid(), nu);
    if dt > limit {
        return Err(Error::UnstableStep { dt, suggested: limit });
    }
    ensure_solenoidal(u, SOLENOIDAL_TOLERANCE)?;

    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(u.clone());
    }
    let h = t_end / steps as f64;
    let mut v = u.clone();
    for s in 1..=steps {
        let k1 = ns_rhs(&v, nu)?;
        let k2 = ns_rhs(&v.axpy(0.5 * h, &k1), nu)?;
        let k3 = ns_rhs(&v.axpy(0.5 * h, &k2), nu)?;
        let k4 = ns_rhs(&v.axpy(h, &k3), nu)?;
        let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4);
        v = leray_project(&v.axpy(h / 6.0, &incr));
        let t = if s == steps { t_end } else { s as f64 * h };
        observer(t, &v);
    }
    Ok(v)
}

/// Seeded random solenoidal field with energy spectrum `∝ k⁴ exp(-(k/peak_k)²)`,
/// zero mean, supported inside the 2/3 ball and scaled to `‖v‖₂ = amplitude`.
///
/// Each coefficient is drawn from a ChaCha stream keyed by `(seed, mode, component)`,
/// so the field does not depend on fill order.
pub fn random_divfree(
    seed: u64,
    grid: &Grid,
    peak_k: usize,
    amplitude: f64,
) -> Result<SpectralVectorField> {
    if peak_k == 0 || peak_k > grid.dealias_cutoff() {
        return Err(Error::InvalidArgument(format!(
            "peak_k must lie in 1..={}, got {peak_k}",
            grid.dealias_cutoff()
        )));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be non-negative, got {amplitude}"
        )));
    }
    let dim = grid.dim();
    let kappa = 2.0 * PI / grid.l();
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; dim];
    for idx in 1..grid.len() {
        if !grid.is_resolved(idx) {
            continue;
        }
        let k = grid.k_squared(idx).sqrt() / kappa;
        let shape = k * k * (-0.5 * (k / peak_k as f64).powi(2)).exp();
        for (a, comp) in comps.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((idx * dim + a) as u64);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            comp[idx] = Complex64::new(re, im) * shape;
        }
    }
    // Hermitian symmetrization
    for comp in comps.iter_mut() {
        let orig = comp.clone();
        for idx in 0..grid.len() {
            let partner = orig[grid.conjugate_index(idx)].conj();
            comp[idx] = (orig[idx] + partner) * 0.5;
        }
    }
    let v = leray_project(&SpectralVectorField::new(*grid, comps)?).dealias();
    let norm = v.l2_norm();
    if norm == 0.0 {
        return Ok(v);
    }
    Ok(v.scale(amplitude / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::energy;

    #[test]
    fn analytic_fields_are_solenoidal() {
        let g2 = Grid::periodic(2, 16).unwrap();
        let g3 = Grid::periodic(3, 16).unwrap();
        let nu = Viscosity::new(0.1).unwrap();
        let tg = analytic_field(&AnalyticFlow::taylor_green_2d(), 0.0, nu, &g2).unwrap();
        assert!(tg.divergence().l2_norm() <= 1e-13);
        let tg3 = analytic_field(
            &AnalyticFlow::TaylorGreen3dEmbedded { amplitude: 1.0 },
            0.3,
            nu,
            &g3,
        )
        .unwrap();
        assert!(tg3.divergence().l2_norm() <= 1e-13);
        assert!(tg3.component(2).iter().all(|c| c.norm() == 0.0));
        let abc = analytic_field(&AnalyticFlow::abc(1.0, 1.0, 1.0), 0.0, nu, &g3).unwrap();
        assert!(abc.divergence().l2_norm() <= 1e-12);
        // Δv = -v
        assert!(abc.laplacian().add(&abc).max_coefficient() <= 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g2 = Grid::periodic(2, 16).unwrap();
        assert!(analytic_field(&AnalyticFlow::abc(1.0, 1.0, 1.0), 0.0, Viscosity::inviscid(), &g2)
            .is_err());
    }

    #[test]
    fn closed_forms_solve_the_discrete_equations() {
        let nu = Viscosity::new(0.07).unwrap();
        let cases = [
            (AnalyticFlow::taylor_green_2d(), Grid::periodic(2, 32).unwrap()),
            (
                AnalyticFlow::TaylorGreen3dEmbedded { amplitude: 0.5 },
                Grid::periodic(3, 16).unwrap(),
            ),
            (AnalyticFlow::abc(1.0, 0.7, 0.3), Grid::periodic(3, 16).unwrap()),
        ];
        for (flow, g) in cases {
            for t in [0.0, 0.5] {
                let v = analytic_field(&flow, t, nu, &g).unwrap();
                let dvdt = analytic_time_derivative(&flow, t, nu, &g).unwrap();
                let r = dvdt.sub(&ns_rhs(&v, nu).unwrap());
                assert!(r.l2_norm() <= 1e-10, "{flow:?} t={t}: {}", r.l2_norm());
            }
        }
    }

    #[test]
    fn rk4_zero_and_bounds() {
        let g = Grid::periodic(2, 16).unwrap();
        let nu = Viscosity::new(0.1).unwrap();
        let z = SpectralVectorField::zeros(g);
        assert_eq!(rk4_propagate(&z, nu, 0.5, 1e-2).unwrap().l2_norm(), 0.0);
        let err = rk4_propagate(&z, nu, 0.5, 1.0).unwrap_err();
        match err {
            Error::UnstableStep { suggested, .. } => {
                assert!((suggested - 0.5 * g.dx().powi(2) / 0.1).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(rk4_propagate(&z, nu, 0.5, -1.0).is_err());
        let tg = analytic_field(&AnalyticFlow::taylor_green_2d(), 0.0, nu, &g).unwrap();
        assert_eq!(rk4_propagate(&tg, nu, 0.0, 1e-2).unwrap(), tg);
    }

    #[test]
    fn rk4_inviscid_energy_conservation() {
        let g = Grid::periodic(2, 16).unwrap();
        let nu = Viscosity::inviscid();
        let v0 = random_divfree(9, &g, 2, 5.0).unwrap();
        let v1 = rk4_propagate(&v0, nu, 0.1, 1e-3).unwrap();
        let (e0, e1) = (energy(&v0), energy(&v1));
        assert!((e1 - e0).abs() <= 1e-8 * e0, "{e0} {e1}");
    }

    #[test]
    fn random_fields() {
        let g = Grid::periodic(3, 16).unwrap();
        let v = random_divfree(42, &g, 3, 2.0).unwrap();
        assert!(v.divergence().l2_norm() <= 1e-12 * v.gradient_norm());
        assert!((energy(&v) - 2.0).abs() <= 1e-12 * 2.0);
        assert!(v.hermitian_defect() <= 1e-15);
        assert!(v.components().iter().all(|c| c[0].norm() == 0.0));
        for idx in 0..g.len() {
            if !g.is_resolved(idx) {
                assert!(v.components().iter().all(|c| c[idx].norm() == 0.0));
            }
        }
        let again = random_divfree(42, &g, 3, 2.0).unwrap();
        assert_eq!(v, again);
        let other = random_divfree(43, &g, 3, 2.0).unwrap();
        assert_ne!(v, other);
        assert!(random_divfree(1, &g, 6, 1.0).is_err());
        assert!(random_divfree(1, &g, 0, 1.0).is_err());
    }
}
