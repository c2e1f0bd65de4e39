//! Numeric 1-D periodic Burgers `u_t = ν u_xx - u u_x` on `[0, 2π)`.
//!
//! Two independent numeric routes used to check the symbolic generator:
//! the scalar time-Taylor recursion (the Navier-Stokes recursion without
//! projection) and a classical RK4 integrator. Products are formed
//! pointwise without dealiasing so they match the symbolic evaluation.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

use super::eval::{spectral_derivatives, spectral_derivatives_truncated};
use super::poly::DiffPoly;

/// `F = ν u_2 - u u_1`.
pub fn burgers_rhs(nu: &BigRational) -> DiffPoly {
    let advect = &DiffPoly::var(0) * &DiffPoly::var(1);
    &DiffPoly::var(2).scale(nu) - &advect
}

fn rhs(u: &[f64], nu: f64) -> Vec<f64> {
    let d = spectral_derivatives(u, 2).expect("validated line");
    d[2].iter()
        .zip(&d[1])
        .zip(u)
        .map(|((uxx, ux), u)| nu * uxx - u * ux)
        .collect()
}

/// Scaled Taylor coefficients `c₀..c_order` from
/// `(n+1) c_{n+1} = ν ∂²cₙ - Σ_m c_m ∂c_{n-m}`.
pub fn taylor_coefficients_1d(u0: &[f64], nu: f64, order: usize) -> Result<Vec<Vec<f64>>> {
    recursion(u0, nu, order, u0.len() / 2 - 1)
}

/// [`taylor_coefficients_1d`] with every coefficient truncated to modes
/// `|j| <= n/3`.
pub fn taylor_coefficients_1d_dealiased(
    u0: &[f64],
    nu: f64,
    order: usize,
) -> Result<Vec<Vec<f64>>> {
    recursion(u0, nu, order, u0.len() / 3)
}

fn recursion(u0: &[f64], nu: f64, order: usize, cutoff: usize) -> Result<Vec<Vec<f64>>> {
    let mut first = spectral_derivatives_truncated(u0, 1, cutoff)?;
    let len = u0.len();
    let mut grads = vec![first.pop().expect("derivative")];
    let mut coeffs = vec![first.pop().expect("samples")];
    for n in 0..order {
        let lap = derivative(&grads[n], cutoff);
        let mut next: Vec<f64> = lap.iter().map(|x| nu * x).collect();
        for m in 0..=n {
            let (a, b) = (&coeffs[m], &grads[n - m]);
            for i in 0..len {
                next[i] -= a[i] * b[i];
            }
        }
        let scale = 1.0 / (n + 1) as f64;
        next.iter_mut().for_each(|x| *x *= scale);
        let mut d = spectral_derivatives_truncated(&next, 1, cutoff).expect("finite line");
        grads.push(d.pop().expect("derivative"));
        coeffs.push(d.pop().expect("samples"));
    }
    Ok(coeffs)
}

fn derivative(samples: &[f64], cutoff: usize) -> Vec<f64> {
    spectral_derivatives_truncated(samples, 1, cutoff)
        .expect("finite line")
        .pop()
        .expect("derivative")
}

/// `Σ_{n ≤ N} cₙ tⁿ` over the supplied coefficients.
pub fn series_sum(coeffs: &[Vec<f64>], t: f64) -> Vec<f64> {
    let mut acc = coeffs.last().cloned().unwrap_or_default();
    for c in coeffs.iter().rev().skip(1) {
        acc.iter_mut().zip(c).for_each(|(a, x)| *a = x + t * *a);
    }
    acc
}

/// Classical RK4 to `t_end` with step at most `dt`.
pub fn rk4_burgers(u0: &[f64], nu: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    spectral_derivatives(u0, 0)?;
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut u = u0.to_vec();
    if steps == 0 {
        return Ok(u);
    }
    let h = t_end / steps as f64;
    let axpy = |u: &[f64], s: f64, k: &[f64]| -> Vec<f64> {
        u.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for _ in 0..steps {
        let k1 = rhs(&u, nu);
        let k2 = rhs(&axpy(&u, 0.5 * h, &k1), nu);
        let k3 = rhs(&axpy(&u, 0.5 * h, &k2), nu);
        let k4 = rhs(&axpy(&u, h, &k3), nu);
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(u)
}

pub fn to_f64(nu: &BigRational) -> f64 {
    nu.to_f64().unwrap_or(f64::NAN)
}

/// Relative `ℓ²` distance `‖a - b‖ / ‖b‖`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
