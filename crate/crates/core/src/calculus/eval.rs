//! Numeric evaluation of differential polynomials on a periodic line `[0, 2π)`.

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::grid::fft_1d;

use super::poly::DiffPoly;

fn check_line(samples: &[f64]) -> Result<()> {
    let n = samples.len();
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "line length must be a power of two and at least 8, got {n}"
        )));
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            component: 0,
            index,
        });
    }
    Ok(())
}

fn wavenumber(n: usize, j: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// Spectral derivatives `[u, u_1, …, u_max]` of periodic samples.
pub fn spectral_derivatives(samples: &[f64], max_order: u32) -> Result<Vec<Vec<f64>>> {
    spectral_derivatives_truncated(samples, max_order, samples.len() / 2 - 1)
}

/// Like [`spectral_derivatives`] with every mode `|j| > cutoff` removed
/// before differentiating, the input row included.
pub fn spectral_derivatives_truncated(
    samples: &[f64],
    max_order: u32,
    cutoff: usize,
) -> Result<Vec<Vec<f64>>> {
    check_line(samples)?;
    let n = samples.len();
    let keep = |j: usize| wavenumber(n, j).abs() <= cutoff as f64;
    let mut current: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_1d(&mut current, true);
    let mut out = Vec::with_capacity(max_order as usize + 1);
    if cutoff + 1 >= n / 2 {
        out.push(samples.to_vec());
    } else {
        current.iter_mut().enumerate().filter(|(j, _)| !keep(*j)).for_each(|(_, c)| *c = Complex64::new(0.0, 0.0));
        let mut phys = current.clone();
        fft_1d(&mut phys, false);
        out.push(phys.into_iter().map(|c| c.re).collect());
    }
    for _ in 0..max_order {
        for (j, c) in current.iter_mut().enumerate() {
            *c = if !keep(j) {
                Complex64::new(0.0, 0.0)
            } else {
                *c * Complex64::new(0.0, wavenumber(n, j))
            };
        }
        let mut phys = current.clone();
        fft_1d(&mut phys, false);
        out.push(phys.into_iter().map(|c| c.re).collect());
    }
    Ok(out)
}

/// Largest `|j|` whose Fourier coefficient exceeds `1e-12` of the largest one.
pub fn bandwidth(samples: &[f64]) -> Result<usize> {
    check_line(samples)?;
    let n = samples.len();
    let mut hat: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_1d(&mut hat, true);
    let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(hat
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 1e-12 * peak)
        .map(|(j, _)| wavenumber(n, j).abs() as usize)
        .max()
        .unwrap_or(0))
}

/// Evaluates `p` pointwise with every `u_k` taken from spectral derivatives
/// of `u_samples`.
pub fn eval_diffpoly(p: &DiffPoly, u_samples: &[f64]) -> Result<Vec<f64>> {
    let max = p.max_order().unwrap_or(0);
    eval_with(p, &spectral_derivatives(u_samples, max)?)
}

/// [`eval_diffpoly`] with `u` truncated to modes `|j| <= n/3` first, which
/// strips round-off in unresolved modes before high derivatives amplify it.
pub fn eval_diffpoly_dealiased(p: &DiffPoly, u_samples: &[f64]) -> Result<Vec<f64>> {
    let max = p.max_order().unwrap_or(0);
    let cutoff = u_samples.len() / 3;
    eval_with(p, &spectral_derivatives_truncated(u_samples, max, cutoff)?)
}

fn eval_with(p: &DiffPoly, derivs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = derivs[0].len();
    let mut out = vec![0.0; n];
    for (m, c) in p.terms() {
        let coeff = c
            .to_f64()
            .ok_or_else(|| Error::InvalidArgument(format!("coefficient {c} not representable")))?;
        let mut prod = vec![coeff; n];
        for &k in m.orders() {
            prod.iter_mut()
                .zip(&derivs[k as usize])
                .for_each(|(a, b)| *a *= b);
        }
        out.iter_mut().zip(prod).for_each(|(a, b)| *a += b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::syntax::parse;
    use std::f64::consts::PI;

    fn line(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).collect()
    }

    #[test]
    fn identity_and_products() {
        let u = line(32, f64::sin);
        let id = eval_diffpoly(&parse("u_0").unwrap(), &u).unwrap();
        assert_eq!(id, u);
        let uu1 = eval_diffpoly(&parse("u_0*u_1").unwrap(), &u).unwrap();
        let expected = line(32, |x| x.sin() * x.cos());
        for (a, b) in uu1.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn high_derivatives_of_sine() {
        // round-off in unresolved modes is amplified by up to (n/2)^4
        let u = line(64, |x| (2.0 * x).sin());
        let d = spectral_derivatives(&u, 4).unwrap();
        let expected = line(64, |x| 16.0 * (2.0 * x).sin());
        for (a, b) in d[4].iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn bandwidth_of_trig_polynomial() {
        let u = line(64, |x| x.sin() + 0.3 * (5.0 * x).cos());
        assert_eq!(bandwidth(&u).unwrap(), 5);
        assert_eq!(bandwidth(&[0.0; 16]).unwrap(), 0);
    }

    #[test]
    fn constants_and_validation() {
        let u = line(16, f64::cos);
        let c = eval_diffpoly(&parse("7/2").unwrap(), &u).unwrap();
        assert!(c.iter().all(|&x| x == 3.5));
        assert!(eval_diffpoly(&parse("u_0").unwrap(), &u[..12]).is_err());
        let mut bad = u.clone();
        bad[3] = f64::INFINITY;
        assert!(eval_diffpoly(&parse("u_0").unwrap(), &bad).is_err());
    }
}
