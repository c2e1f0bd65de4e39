//! Periodic-box fields, Fourier transforms, spectral derivatives and dealiasing.
//!
//! Storage is flat and x-fastest: the sample at integer coordinates
//! `(i0, i1, i2)` lives at `i0 + n*i1 + n*n*i2`. Forward transforms are
//! scaled by `1/n^dim`, inverse transforms are unscaled, so the spectral
//! coefficient of `sin(x)` at `k = (1, 0, 0)` is `-i/2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative imaginary residue above which an inverse transform is rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Discretization of the periodic box `[0, l)^dim` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    l: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, l: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two and at least 8, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {l}")));
        }
        Ok(Self { dim, n, l })
    }

    /// Box of side `2π`.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.dim as i32)
    }

    /// Signed integer wavenumber index for array index `j`.
    pub fn signed_index(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Physical wavenumber `2π/l · signed_index(j)`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI / self.l * self.signed_index(j) as f64
    }

    /// Largest retained index under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    /// Per-axis array indices of flat index `idx`. Unused axes are zero.
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        let mut c = [0; 3];
        let mut rest = idx;
        for slot in c.iter_mut().take(self.dim) {
            *slot = rest % n;
            rest /= n;
        }
        c
    }

    pub fn flat_index(&self, coords: [usize; 3]) -> usize {
        let n = self.n;
        coords
            .iter()
            .take(self.dim)
            .rev()
            .fold(0, |acc, &c| acc * n + c)
    }

    /// Flat index of the mode `-k` for the mode at `idx`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        let mut m = [0; 3];
        for a in 0..self.dim {
            m[a] = (self.n - c[a]) % self.n;
        }
        self.flat_index(m)
    }

    /// Physical wavevector of the mode at flat index `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(c[a]);
        }
        k
    }

    /// `|k|²` of the mode at `idx`.
    pub fn k_squared(&self, idx: usize) -> f64 {
        self.wavevector(idx).iter().map(|k| k * k).sum()
    }

    /// Whether any axis of the mode sits on the Nyquist index `n/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        c[..self.dim].contains(&(self.n / 2))
    }

    /// Whether the mode survives the 2/3 truncation.
    pub fn is_resolved(&self, idx: usize) -> bool {
        let cut = self.dealias_cutoff() as i64;
        let c = self.coords(idx);
        c[..self.dim]
            .iter()
            .all(|&j| self.signed_index(j).abs() <= cut)
    }

    /// Physical coordinate of sample `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let dx = self.dx();
        [c[0] as f64 * dx, c[1] as f64 * dx, c[2] as f64 * dx]
    }
}

type Plan = Arc<dyn Fft<f64>>;

fn plans(n: usize) -> (Plan, Plan) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// In-place multidimensional complex FFT. Forward is scaled by `1/len`.
pub(crate) fn fft_nd(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let len = grid.len();
    debug_assert_eq!(data.len(), len);
    let (fwd, inv) = plans(n);
    let plan = if forward { fwd } else { inv };

    // axis 0 is contiguous
    plan.process(data);

    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for axis in 1..grid.dim() {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        let mut line = 0;
        for outer in (0..len).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for m in 0..n {
                    buf[line * n + m] = data[base + m * stride];
                }
                line += 1;
            }
        }
        plan.process(&mut buf);
        line = 0;
        for outer in (0..len).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for m in 0..n {
                    data[base + m * stride] = buf[line * n + m];
                }
                line += 1;
            }
        }
    }

    if forward {
        let scale = 1.0 / len as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}

/// In-place 1-D complex FFT on a periodic line. Forward is scaled by `1/n`.
pub(crate) fn fft_1d(data: &mut [Complex64], forward: bool) {
    let n = data.len();
    let (fwd, inv) = plans(n);
    if forward {
        fwd.process(data);
        let scale = 1.0 / n as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    } else {
        inv.process(data);
    }
}

/// Forward transform of one real component.
pub(crate) fn forward_real(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(grid, &mut data, true);
    data
}

/// Inverse transform of one component, returning the real part and the
/// largest imaginary residue.
pub(crate) fn inverse_real(grid: &Grid, coeffs: &[Complex64]) -> (Vec<f64>, f64) {
    let mut data = coeffs.to_vec();
    fft_nd(grid, &mut data, false);
    let residue = data.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    (data.into_iter().map(|c| c.re).collect(), residue)
}

fn check_finite(samples: &[f64], component: usize) -> Result<()> {
    match samples.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { component, index }),
        None => Ok(()),
    }
}

fn check_residue(coeffs: &[&[Complex64]], residue: f64) -> Result<()> {
    // sum of |c| bounds the physical max norm
    let scale: f64 = coeffs.iter().flat_map(|c| c.iter()).map(|c| c.norm()).sum();
    if scale > 0.0 && residue > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian {
            residue: residue / scale,
        });
    }
    Ok(())
}

/// Real samples of a vector field, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl RealVectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for (a, c) in components.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::InvalidArgument(format!(
                    "component {a} has {} samples, expected {}",
                    c.len(),
                    grid.len()
                )));
            }
            check_finite(c, a)?;
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    /// Samples `f(position)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let mut components = vec![vec![0.0; grid.len()]; grid.dim()];
        for idx in 0..grid.len() {
            let v = f(grid.position(idx));
            for (a, comp) in components.iter_mut().enumerate() {
                comp[idx] = v[a];
            }
        }
        Self::new(grid, components)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_spectral(&self) -> SpectralVectorField {
        let grid = self.grid;
        let components = self
            .components
            .par_iter()
            .map(|c| forward_real(&grid, c))
            .collect();
        SpectralVectorField { grid, components }
    }
}

/// Forward transform with input validation.
pub fn to_spectral(f: &RealVectorField) -> Result<SpectralVectorField> {
    for (a, c) in f.components.iter().enumerate() {
        check_finite(c, a)?;
    }
    Ok(f.to_spectral())
}

/// Inverse transform; rejects coefficient sets that are not Hermitian.
pub fn to_physical(s: &SpectralVectorField) -> Result<RealVectorField> {
    let grid = s.grid;
    let parts: Vec<(Vec<f64>, f64)> = s
        .components
        .par_iter()
        .map(|c| inverse_real(&grid, c))
        .collect();
    let residue = parts.iter().fold(0.0_f64, |m, p| m.max(p.1));
    let refs: Vec<&[Complex64]> = s.components.iter().map(|c| c.as_slice()).collect();
    check_residue(&refs, residue)?;
    Ok(RealVectorField {
        grid,
        components: parts.into_iter().map(|p| p.0).collect(),
    })
}

fn derivative_coeffs(grid: &Grid, coeffs: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = grid.n();
    let stride = n.pow(axis as u32);
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let j = (idx / stride) % n;
            if j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, grid.wavenumber(j))
            }
        })
        .collect()
}

fn dealias_coeffs(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            if grid.is_resolved(idx) {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Fourier coefficients of a real vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    components: Vec<Vec<Complex64>>,
}

impl SpectralVectorField {
    pub fn new(grid: Grid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::InvalidArgument(format!(
                "component has {} coefficients, expected {}",
                c.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            components: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; grid.dim()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.components[axis]
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    pub fn to_physical(&self) -> Result<RealVectorField> {
        to_physical(self)
    }

    /// `∂/∂x_axis` of every component; Nyquist modes are zeroed.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim(), "axis {axis} out of range");
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| derivative_coeffs(&self.grid, c, axis))
                .collect(),
        }
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|idx, c| c * -self.grid.k_squared(idx))
    }

    /// 2/3-rule truncation.
    pub fn dealias(&self) -> Self {
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| dealias_coeffs(&self.grid, c))
                .collect(),
        }
    }

    pub fn divergence(&self) -> SpectralScalarField {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for a in 0..self.grid.dim() {
            let d = derivative_coeffs(&self.grid, &self.components[a], a);
            out.iter_mut().zip(d).for_each(|(o, x)| *o += x);
        }
        SpectralScalarField {
            grid: self.grid,
            coefficients: out,
        }
    }

    /// Applies `f(flat_index, coefficient)` to every coefficient of every component.
    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|c| c.iter().enumerate().map(|(i, &x)| f(i, x)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// Sum of `|ĉ|²` over all modes and components.
    pub fn coefficient_power(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// `⟨a, b⟩ = ∫ a·b dx` over the box.
    pub fn inner(&self, other: &Self) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        s * self.grid.volume()
    }

    /// `(∫ |v|² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.coefficient_power() * self.grid.volume()).sqrt()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest deviation from `ĉ(-k) = conj(ĉ(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| hermitian_defect(&self.grid, c))
            .fold(0.0, f64::max)
    }

    /// Relative divergence `‖div v‖ / ‖∇v‖` (zero for the zero field).
    pub fn relative_divergence(&self) -> f64 {
        let div = self.divergence().l2_norm();
        let grad = self.gradient_norm();
        if grad == 0.0 {
            0.0
        } else {
            div / grad
        }
    }

    /// `(Σ_ij ∫ (∂_j v_i)² dx)^{1/2}`.
    pub fn gradient_norm(&self) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .flat_map(|c| c.iter().enumerate())
            .filter(|(idx, _)| !self.grid.is_nyquist(*idx))
            .map(|(idx, c)| self.grid.k_squared(idx) * c.norm_sqr())
            .sum();
        (s * self.grid.volume()).sqrt()
    }
}

fn hermitian_defect(grid: &Grid, coeffs: &[Complex64]) -> f64 {
    (0..grid.len())
        .map(|idx| (coeffs[grid.conjugate_index(idx)] - coeffs[idx].conj()).norm())
        .fold(0.0, f64::max)
}

/// Fourier coefficients of a real scalar field (e.g. pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn new(grid: Grid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "scalar field has {} coefficients, expected {}",
                coefficients.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_samples(grid: Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument("sample count mismatch".into()));
        }
        check_finite(samples, 0)?;
        Ok(Self {
            grid,
            coefficients: forward_real(&grid, samples),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let (samples, residue) = inverse_real(&self.grid, &self.coefficients);
        check_residue(&[&self.coefficients], residue)?;
        Ok(samples)
    }

    /// Real part of the inverse transform, without the Hermitian check.
    /// Suited to fields that are round-off by construction, such as the
    /// divergence of a projected field.
    pub fn physical_real_part(&self) -> Vec<f64> {
        inverse_real(&self.grid, &self.coefficients).0
    }

    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim(), "axis {axis} out of range");
        Self {
            grid: self.grid,
            coefficients: derivative_coeffs(&self.grid, &self.coefficients, axis),
        }
    }

    pub fn dealias(&self) -> Self {
        Self {
            grid: self.grid,
            coefficients: dealias_coeffs(&self.grid, &self.coefficients),
        }
    }

    pub fn gradient(&self) -> SpectralVectorField {
        SpectralVectorField {
            grid: self.grid,
            components: (0..self.grid.dim())
                .map(|a| derivative_coeffs(&self.grid, &self.coefficients, a))
                .collect(),
        }
    }

    /// `(∫ s² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let p: f64 = self.coefficients.iter().map(|c| c.norm_sqr()).sum();
        (p * self.grid.volume()).sqrt()
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.grid, &self.coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid2(n: usize) -> Grid {
        Grid::periodic(2, n).unwrap()
    }

    fn smooth_field(grid: Grid, seed: u64) -> RealVectorField {
        let s = seed as f64;
        RealVectorField::from_fn(grid, |[x, y, z]| {
            [
                (x + 0.3 * s).sin() * (2.0 * y).cos() + 0.2 * (3.0 * z + s).cos(),
                (x * y.cos()).sin() * 0.1 + (y - s).cos(),
                (z + x).sin(),
            ]
        })
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::periodic(2, 10).is_err());
        assert!(Grid::periodic(2, 4).is_err());
        assert!(Grid::periodic(1, 16).is_err());
        assert!(Grid::periodic(4, 16).is_err());
        assert!(Grid::new(2, 16, -1.0).is_err());
        let g = Grid::periodic(3, 16).unwrap();
        assert_eq!(g.len(), 4096);
        assert_eq!(g.signed_index(8), 8);
        assert_eq!(g.signed_index(9), -7);
        assert_eq!(g.signed_index(15), -1);
        assert_eq!(g.dealias_cutoff(), 5);
    }

    #[test]
    fn flat_index_round_trip() {
        let g = Grid::periodic(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flat_index(g.coords(idx)), idx);
            assert_eq!(g.conjugate_index(g.conjugate_index(idx)), idx);
        }
    }

    #[test]
    fn sine_has_two_modes() {
        let g = grid2(16);
        let f = RealVectorField::from_fn(g, |[x, _, _]| [x.sin(), 0.0, 0.0]).unwrap();
        let s = to_spectral(&f).unwrap();
        let plus = g.flat_index([1, 0, 0]);
        let minus = g.flat_index([15, 0, 0]);
        for (idx, c) in s.component(0).iter().enumerate() {
            let expected = if idx == plus {
                Complex64::new(0.0, -0.5)
            } else if idx == minus {
                Complex64::new(0.0, 0.5)
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((c - expected).norm() < 1e-15, "mode {idx}: {c}");
        }
        assert!(s.component(1).iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn constant_is_mean_mode() {
        let g = grid2(8);
        let f = RealVectorField::from_fn(g, |_| [2.5, -1.0, 0.0]).unwrap();
        let s = f.to_spectral();
        assert!((s.component(0)[0] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        assert!((s.component(1)[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(s.component(0)[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn product_of_cos_sin_has_four_quarter_modes() {
        // cos x sin y = (e^{ix}+e^{-ix})(e^{iy}-e^{-iy})/(4i)
        let g = grid2(32);
        let f = RealVectorField::from_fn(g, |[x, y, _]| [x.cos() * y.sin(), 0.0, 0.0]).unwrap();
        let s = f.to_spectral();
        let mut nonzero = 0;
        for (idx, c) in s.component(0).iter().enumerate() {
            if c.norm() > 1e-14 {
                nonzero += 1;
                let [i, j, _] = g.coords(idx);
                assert_eq!(g.signed_index(i).abs(), 1);
                assert_eq!(g.signed_index(j).abs(), 1);
                assert!((c.norm() - 0.25).abs() < 1e-15);
                let sign = g.signed_index(j) as f64;
                assert!((c - Complex64::new(0.0, -0.25 * sign)).norm() < 1e-15);
            }
        }
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn inverse_of_single_mode() {
        let g = grid2(16);
        let mut s = SpectralVectorField::zeros(g);
        s.components[0][g.flat_index([1, 0, 0])] = Complex64::new(0.0, -0.5);
        s.components[0][g.flat_index([15, 0, 0])] = Complex64::new(0.0, 0.5);
        let f = to_physical(&s).unwrap();
        for idx in 0..g.len() {
            let x = g.position(idx)[0];
            assert!((f.component(0)[idx] - x.sin()).abs() < 1e-15);
        }
        let z = to_physical(&SpectralVectorField::zeros(g)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = grid2(8);
        let mut s = SpectralVectorField::zeros(g);
        s.components[0][g.flat_index([1, 0, 0])] = Complex64::new(1.0, 0.0);
        assert!(matches!(to_physical(&s), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid2(8);
        let mut c = vec![vec![0.0; g.len()]; 2];
        c[1][5] = f64::NAN;
        assert!(matches!(
            RealVectorField::new(g, c),
            Err(Error::NonFinite {
                component: 1,
                index: 5
            })
        ));
    }

    #[test]
    fn derivatives_of_trig_fields() {
        let g = grid2(16);
        let f = RealVectorField::from_fn(g, |[x, y, _]| [x.sin(), x.cos() * y.sin(), 0.0])
            .unwrap()
            .to_spectral();
        let d = to_physical(&f.derivative(0)).unwrap();
        let lap = to_physical(&f.laplacian()).unwrap();
        for idx in 0..g.len() {
            let [x, y, _] = g.position(idx);
            assert!((d.component(0)[idx] - x.cos()).abs() < 1e-12);
            assert!((lap.component(1)[idx] + 2.0 * x.cos() * y.sin()).abs() < 1e-12);
        }
        let c = RealVectorField::from_fn(g, |_| [3.0, 1.0, 0.0]).unwrap().to_spectral();
        assert_eq!(c.derivative(1).max_coefficient(), 0.0);
    }

    #[test]
    fn dealias_behaviour() {
        let g = grid2(16);
        let low = RealVectorField::from_fn(g, |[x, y, _]| [(5.0 * x).sin(), (4.0 * y).cos(), 0.0])
            .unwrap()
            .to_spectral();
        assert!(low.dealias().sub(&low).max_coefficient() <= 1e-15);
        let nyq = RealVectorField::from_fn(g, |[x, _, _]| [(8.0 * x).cos(), 0.0, 0.0])
            .unwrap()
            .to_spectral();
        assert!(nyq.max_coefficient() > 0.1);
        assert_eq!(nyq.dealias().max_coefficient(), 0.0);
    }

    #[test]
    fn three_d_round_trip() {
        let g = Grid::periodic(3, 16).unwrap();
        let f = smooth_field(g, 3);
        let back = to_physical(&to_spectral(&f).unwrap()).unwrap();
        for a in 0..3 {
            for (x, y) in f.component(a).iter().zip(back.component(a)) {
                assert!((x - y).abs() <= 1e-12 * f.max_abs());
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(seed in 0u64..1000, dim in 2usize..4) {
            let g = Grid::periodic(dim, 16).unwrap();
            let f = smooth_field(g, seed);
            let s = f.to_spectral();
            let back = to_physical(&s).unwrap();
            let scale = f.max_abs();
            for a in 0..dim {
                for (x, y) in f.component(a).iter().zip(back.component(a)) {
                    prop_assert!((x - y).abs() <= 1e-12 * scale);
                }
            }
            let physical: f64 = f.components().iter().flatten().map(|x| x * x).sum::<f64>()
                / g.len() as f64;
            let spectral = s.coefficient_power();
            prop_assert!((physical - spectral).abs() <= 1e-12 * physical);
            prop_assert!(s.hermitian_defect() <= 1e-14 * scale);
        }

        #[test]
        fn derivative_commutes_with_dealias(seed in 0u64..1000, axis in 0usize..2) {
            let g = grid2(16);
            let s = smooth_field(g, seed).to_spectral();
            prop_assert_eq!(s.derivative(axis).dealias(), s.dealias().derivative(axis));
            let e_in = s.coefficient_power();
            let e_out = s.dealias().coefficient_power();
            prop_assert!(e_out <= e_in);
        }

        #[test]
        fn derivative_stays_real(seed in 0u64..1000, axis in 0usize..3) {
            let g = Grid::periodic(3, 8).unwrap();
            let s = smooth_field(g, seed).to_spectral();
            let d = s.derivative(axis);
            let (_, residue) = inverse_real(&g, d.component(0));
            let scale: f64 = d.component(0).iter().map(|c| c.norm()).sum();
            prop_assert!(residue <= 1e-12 * scale.max(1.0));
        }
    }
}
