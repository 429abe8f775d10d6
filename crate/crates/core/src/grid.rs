//! Flat periodic d-torus grids with spectral (Fourier) differential calculus.
//!
//! All fields are real samples on a uniform row-major grid. Derivatives,
//! the Laplacian and the shifted-Helmholtz inverse act exactly on the
//! trigonometric interpolant, so the only error in downstream residuals is
//! floating-point rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    n: Vec<usize>,
    periods: Vec<f64>,
    len: usize,
    /// Signed angular wavenumbers 2*pi*freq/L per axis, freq in the
    /// symmetric range -n/2+1 ..= n/2.
    wavenumbers: Vec<Vec<f64>>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

/// A flat d-torus discretization. Cheap to clone (shared plans inside).
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("periods", &self.inner.periods)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.periods == other.inner.periods)
    }
}

/// Build a d-torus grid. Axis sizes must be even and at least 4, periods positive.
pub fn make_grid(d: usize, n: &[usize], periods: &[f64]) -> Result<Grid> {
    if d < 1 || d > 3 {
        return Err(Error::Config(format!("torus dimension must be 1..=3, got {d}")));
    }
    if n.len() != d || periods.len() != d {
        return Err(Error::Config(format!(
            "expected {d} axis sizes and periods, got {} and {}",
            n.len(),
            periods.len()
        )));
    }
    for (i, &ni) in n.iter().enumerate() {
        if ni < 4 || ni % 2 != 0 {
            return Err(Error::Config(format!(
                "axis {i}: size {ni} must be even and >= 4"
            )));
        }
    }
    for (i, &li) in periods.iter().enumerate() {
        if !(li > 0.0) || !li.is_finite() {
            return Err(Error::Config(format!("axis {i}: period {li} must be > 0")));
        }
    }
    let len = n.iter().product();
    let mut planner = FftPlanner::new();
    let fwd = n.iter().map(|&ni| planner.plan_fft_forward(ni)).collect();
    let inv = n.iter().map(|&ni| planner.plan_fft_inverse(ni)).collect();
    let wavenumbers = n
        .iter()
        .zip(periods)
        .map(|(&ni, &li)| {
            (0..ni)
                .map(|j| {
                    let freq = if j <= ni / 2 { j as i64 } else { j as i64 - ni as i64 };
                    2.0 * PI * freq as f64 / li
                })
                .collect()
        })
        .collect();
    Ok(Grid {
        inner: Arc::new(GridInner {
            n: n.to_vec(),
            periods: periods.to_vec(),
            len,
            wavenumbers,
            fwd,
            inv,
        }),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.inner.n.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.inner.n
    }

    pub fn periods(&self) -> &[f64] {
        &self.inner.periods
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing L_i / n_i along one axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.periods[axis] / self.inner.n[axis] as f64
    }

    /// Volume of the torus, prod L_i.
    pub fn volume(&self) -> f64 {
        self.inner.periods.iter().product()
    }

    /// Coordinates of the flat index `idx` (row-major), x_i = j_i * h_i.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        let mut rem = idx;
        for axis in (0..d).rev() {
            let ni = self.inner.n[axis];
            out[axis] = (rem % ni) as f64 * self.spacing(axis);
            rem /= ni;
        }
        out
    }

    /// Multi-index of the flat index `idx` (row-major).
    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let d = self.dim();
        let mut out = vec![0; d];
        let mut rem = idx;
        for axis in (0..d).rev() {
            out[axis] = rem % self.inner.n[axis];
            rem /= self.inner.n[axis];
        }
        out
    }

    fn transform_axis(&self, data: &mut [Complex<f64>], axis: usize, forward: bool) {
        let n = &self.inner.n;
        let na = n[axis];
        let stride: usize = n[axis + 1..].iter().product();
        let outer: usize = n[..axis].iter().product();
        let plan = if forward {
            &self.inner.fwd[axis]
        } else {
            &self.inner.inv[axis]
        };
        let mut line = vec![Complex::new(0.0, 0.0); na];
        let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for o in 0..outer {
            for i in 0..stride {
                let base = o * na * stride + i;
                for j in 0..na {
                    line[j] = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for j in 0..na {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }

    fn forward(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let mut data: Vec<Complex<f64>> =
            values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        for axis in 0..self.dim() {
            self.transform_axis(&mut data, axis, true);
        }
        data
    }

    fn inverse_real(&self, mut spec: Vec<Complex<f64>>) -> Vec<f64> {
        for axis in 0..self.dim() {
            self.transform_axis(&mut spec, axis, false);
        }
        let scale = 1.0 / self.inner.len as f64;
        spec.into_iter().map(|c| c.re * scale).collect()
    }

    /// Visit every Fourier mode with its per-axis signed wavenumbers.
    fn for_each_mode(&self, spec: &mut [Complex<f64>], mut f: impl FnMut(&[f64], &[usize]) -> Complex<f64>) {
        let d = self.dim();
        let n = &self.inner.n;
        let mut idx = vec![0usize; d];
        let mut k = vec![0.0f64; d];
        for c in spec.iter_mut() {
            for axis in 0..d {
                k[axis] = self.inner.wavenumbers[axis][idx[axis]];
            }
            *c *= f(&k, &idx);
            // row-major increment
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < n[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    fn nyquist(&self, axis: usize, j: usize) -> bool {
        j == self.inner.n[axis] / 2
    }
}

/// First nonzero eigenvalue of -Laplace on the torus: min over axes of (2*pi/L_i)^2.
pub fn lambda1(grid: &Grid) -> f64 {
    grid.periods()
        .iter()
        .map(|&l| (2.0 * PI / l).powi(2))
        .fold(f64::INFINITY, f64::min)
}

/// Periodic real scalar samples on a [`Grid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap raw samples; the count must match the grid and every value be finite.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "value count {} does not match grid point count {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    /// Sample a closure of the point coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the minimal sample.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Index of the maximal sample.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Discrete essinf surrogate: the grid minimum.
pub fn field_min(f: &ScalarField) -> f64 {
    f.min()
}

/// Discrete esssup surrogate: the grid maximum.
pub fn field_max(f: &ScalarField) -> f64 {
    f.max()
}

pub fn norm_inf(f: &ScalarField) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Integral over the torus, spectrally exact for the interpolant:
/// mean of the samples times the volume.
pub fn integrate(f: &ScalarField) -> f64 {
    let mean = f.values().iter().sum::<f64>() / f.grid().len() as f64;
    mean * f.grid().volume()
}

pub fn norm_l2(f: &ScalarField) -> f64 {
    integrate(&f.mul(f)).max(0.0).sqrt()
}

/// Spectral Laplacian: each mode scaled by -|k|^2.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let mut spec = grid.forward(f.values());
    grid.for_each_mode(&mut spec, |k, _| {
        let k2: f64 = k.iter().map(|ki| ki * ki).sum();
        Complex::new(-k2, 0.0)
    });
    ScalarField {
        grid: grid.clone(),
        values: grid.inverse_real(spec),
    }
}

/// Spectral partial derivative along `axis` (Nyquist mode zeroed for realness).
pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid();
    assert!(axis < grid.dim(), "axis out of range");
    let mut spec = grid.forward(f.values());
    grid.for_each_mode(&mut spec, |k, idx| {
        if grid.nyquist(axis, idx[axis]) {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, k[axis])
        }
    });
    ScalarField {
        grid: grid.clone(),
        values: grid.inverse_real(spec),
    }
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|a| derivative(f, a)).collect();
    VectorField { components: comps }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let mut out = derivative(&v.components[0], 0);
    for axis in 1..v.components.len() {
        out = out.add(&derivative(&v.components[axis], axis));
    }
    out
}

/// Exact inverse of (-Laplace + c), c > 0, in the discrete spectral sense.
pub fn inv_helmholtz(f: &ScalarField, c: f64) -> Result<ScalarField> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("helmholtz shift must be > 0, got {c}")));
    }
    let grid = f.grid();
    let mut spec = grid.forward(f.values());
    grid.for_each_mode(&mut spec, |k, _| {
        let k2: f64 = k.iter().map(|ki| ki * ki).sum();
        Complex::new(1.0 / (k2 + c), 0.0)
    });
    Ok(ScalarField {
        grid: grid.clone(),
        values: grid.inverse_real(spec),
    })
}

/// Discrete H^1 seminorm-plus-L2: ||grad u||_L2^2 + ||u||_L2^2.
pub fn h1_norm_sq(f: &ScalarField) -> f64 {
    let g = gradient(f);
    let mut total = integrate(&f.mul(f));
    for c in &g.components {
        total += integrate(&c.mul(c));
    }
    total
}

/// d component fields on one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("vector field needs at least one component".into()));
        }
        let grid = components[0].grid().clone();
        if components.len() != grid.dim() {
            return Err(Error::Config(format!(
                "vector field has {} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::Config("vector components on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zero(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::constant(grid, 0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    /// Pointwise squared Euclidean norm.
    pub fn norm_sq(&self) -> ScalarField {
        let mut out = self.components[0].mul(&self.components[0]);
        for c in &self.components[1..] {
            out = out.add(&c.mul(c));
        }
        out
    }

    /// Pointwise inner product with another vector field.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        assert_eq!(self.components.len(), other.components.len());
        let mut out = self.components[0].mul(&other.components[0]);
        for (a, b) in self.components[1..].iter().zip(&other.components[1..]) {
            out = out.add(&a.mul(b));
        }
        out
    }
}

/// Symmetric rank-2 tensor field; only the upper triangle (i <= j) is stored,
/// row-major: (0,0), (0,1), ..., (0,d-1), (1,1), ...
#[derive(Clone, Debug)]
pub struct SymTensorField {
    d: usize,
    components: Vec<ScalarField>,
}

impl SymTensorField {
    pub fn new(grid: &Grid, components: Vec<ScalarField>) -> Result<Self> {
        let d = grid.dim();
        let expected = d * (d + 1) / 2;
        if components.len() != expected {
            return Err(Error::Config(format!(
                "symmetric tensor on a {d}-torus needs {expected} components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::Config("tensor components on different grids".into()));
        }
        Ok(Self { d, components })
    }

    pub fn zero(grid: &Grid) -> Self {
        let d = grid.dim();
        Self {
            d,
            components: (0..d * (d + 1) / 2)
                .map(|_| ScalarField::constant(grid, 0.0))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.d - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.components[self.slot(i, j)]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn trace(&self) -> ScalarField {
        let mut out = self.get(0, 0).clone();
        for i in 1..self.d {
            out = out.add(self.get(i, i));
        }
        out
    }

    /// Pointwise Frobenius norm squared, off-diagonal entries counted twice.
    pub fn frobenius_sq(&self) -> ScalarField {
        let grid = self.grid().clone();
        let mut out = ScalarField::constant(&grid, 0.0);
        for i in 0..self.d {
            for j in 0..self.d {
                let t = self.get(i, j);
                out = out.add(&t.mul(t));
            }
        }
        out
    }

    pub fn add(&self, other: &SymTensorField) -> SymTensorField {
        assert_eq!(self.d, other.d);
        SymTensorField {
            d: self.d,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Row divergence (div T)_j = sum_i d_i T_ij, a vector field.
    pub fn divergence(&self) -> VectorField {
        let comps = (0..self.d)
            .map(|j| {
                let mut out = derivative(self.get(0, j), 0);
                for i in 1..self.d {
                    out = out.add(&derivative(self.get(i, j), i));
                }
                out
            })
            .collect();
        VectorField { components: comps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const TAU: f64 = 2.0 * PI;

    fn t1(n: usize) -> Grid {
        make_grid(1, &[n], &[TAU]).unwrap()
    }

    /// Smooth random band-limited field, reproducible from a seed.
    fn random_smooth(grid: &Grid, seed: u64, amplitude: f64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = grid.dim();
        let modes: Vec<(Vec<f64>, f64, f64)> = (0..5)
            .map(|_| {
                let k: Vec<f64> = (0..d)
                    .map(|a| {
                        rng.random_range(-3..=3i64) as f64 * TAU / grid.periods()[a]
                    })
                    .collect();
                (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU))
            })
            .collect();
        ScalarField::from_fn(grid, |x| {
            modes
                .iter()
                .map(|(k, a, phi)| {
                    a * amplitude
                        * (k.iter().zip(x).map(|(ki, xi)| ki * xi).sum::<f64>() + phi).cos()
                })
                .sum()
        })
    }

    #[test]
    fn make_grid_spacing() {
        let g = t1(8);
        assert_relative_eq!(g.spacing(0), PI / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn make_grid_point_count_3d() {
        let g = make_grid(3, &[32, 32, 32], &[TAU, TAU, TAU]).unwrap();
        assert_eq!(g.len(), 32768);
    }

    #[test]
    fn make_grid_rejects_odd_size() {
        assert!(matches!(
            make_grid(2, &[4, 5], &[1.0, 1.0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn make_grid_rejects_bad_dim() {
        assert!(make_grid(4, &[4, 4, 4, 4], &[1.0; 4]).is_err());
        assert!(make_grid(0, &[], &[]).is_err());
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = t1(16);
        let f = ScalarField::constant(&g, 3.5);
        assert!(norm_inf(&laplacian(&f)) < 1e-13);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let l = 3.0;
        let g = make_grid(1, &[32], &[l]).unwrap();
        let k = TAU / l;
        let f = ScalarField::from_fn(&g, |x| (k * x[0]).sin());
        let lap = laplacian(&f);
        let expected = f.scale(-k * k);
        assert!(norm_inf(&lap.sub(&expected)) < 1e-12 * norm_inf(&expected));
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        // second-order centered differences as independent oracle; error O(h^2)
        let mut errs = Vec::new();
        for &n in &[32usize, 64, 128] {
            let g = t1(n);
            let f = random_smooth(&g, 7, 1.0);
            let lap = laplacian(&f);
            let h = g.spacing(0);
            let v = f.values();
            let mut max_err = 0.0f64;
            for i in 0..n {
                let fd = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (h * h);
                max_err = max_err.max((fd - lap.values()[i]).abs());
            }
            errs.push(max_err);
        }
        // halving h divides the FD error by ~4
        assert!(errs[1] < errs[0] / 3.0);
        assert!(errs[2] < errs[1] / 3.0);
    }

    #[test]
    fn inv_helmholtz_constant_mode() {
        let g = t1(16);
        let f = ScalarField::constant(&g, 4.0);
        let u = inv_helmholtz(&f, 2.0).unwrap();
        assert!(norm_inf(&u.sub(&ScalarField::constant(&g, 2.0))) < 1e-13);
    }

    #[test]
    fn inv_helmholtz_single_mode() {
        let g = t1(32);
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let u = inv_helmholtz(&f, 0.5).unwrap();
        let expected = f.scale(1.0 / (4.0 + 0.5));
        assert!(norm_inf(&u.sub(&expected)) < 1e-13);
    }

    #[test]
    fn inv_helmholtz_rejects_nonpositive_shift() {
        let g = t1(8);
        let f = ScalarField::constant(&g, 1.0);
        assert!(matches!(inv_helmholtz(&f, 0.0), Err(Error::Domain(_))));
        assert!(matches!(inv_helmholtz(&f, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn integrate_constant() {
        let g = t1(16);
        assert_relative_eq!(
            integrate(&ScalarField::constant(&g, 2.0)),
            4.0 * PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn integrate_sin_mode_vanishes() {
        let g = t1(32);
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin());
        assert!(integrate(&f).abs() < 1e-13);
    }

    #[test]
    fn norm_inf_definition() {
        let g = t1(4);
        let f = ScalarField::from_values(&g, vec![-3.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(norm_inf(&f), 3.0);
        assert_eq!(field_min(&f), -3.0);
        assert_eq!(field_max(&f), 2.0);
    }

    #[test]
    fn lambda1_examples() {
        assert_relative_eq!(lambda1(&t1(8)), 1.0, max_relative = 1e-14);
        let g = make_grid(1, &[8], &[1.0]).unwrap();
        assert_relative_eq!(lambda1(&g), 4.0 * PI * PI, max_relative = 1e-14);
        let g = make_grid(2, &[8, 8], &[TAU, PI]).unwrap();
        assert_relative_eq!(lambda1(&g), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn div_grad_equals_laplacian() {
        for (seed, grid) in [
            (1u64, t1(64)),
            (2, make_grid(2, &[16, 12], &[TAU, 3.0]).unwrap()),
            (3, make_grid(3, &[8, 8, 8], &[TAU, 1.0, 2.0]).unwrap()),
        ] {
            let f = random_smooth(&grid, seed, 1.0);
            let a = divergence(&gradient(&f));
            let b = laplacian(&f);
            let scale = norm_inf(&b).max(1.0);
            assert!(norm_inf(&a.sub(&b)) < 1e-12 * scale);
        }
    }

    #[test]
    fn integral_of_laplacian_vanishes() {
        let g = make_grid(2, &[16, 16], &[TAU, 2.0]).unwrap();
        let f = random_smooth(&g, 11, 2.0);
        let lap = laplacian(&f);
        assert!(integrate(&lap).abs() < 1e-12 * norm_inf(&lap).max(1.0));
    }

    #[test]
    fn parseval() {
        let g = make_grid(2, &[16, 8], &[TAU, 1.5]).unwrap();
        let f = random_smooth(&g, 13, 1.0);
        let quad = integrate(&f.mul(&f));
        // spectral side: (vol/len^2) * sum |F_k|^2
        let spec = g.forward(f.values());
        let spectral: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.volume()
            / (g.len() as f64 * g.len() as f64);
        assert_relative_eq!(norm_l2(&f).powi(2), quad, max_relative = 1e-14);
        assert_relative_eq!(spectral, quad, max_relative = 1e-12);
    }

    #[test]
    fn nyquist_derivative_is_real_and_zeroed() {
        let g = t1(8);
        // pure Nyquist mode: (-1)^i samples
        let f = ScalarField::from_fn(&g, |x| (4.0 * x[0]).cos());
        let d = derivative(&f, 0);
        assert!(norm_inf(&d) < 1e-13);
        // but the Laplacian keeps the Nyquist |k|^2
        let lap = laplacian(&f);
        assert!(norm_inf(&lap.sub(&f.scale(-16.0))) < 1e-12 * 16.0);
    }

    #[test]
    fn from_values_rejects_bad_input() {
        let g = t1(4);
        assert!(ScalarField::from_values(&g, vec![1.0; 3]).is_err());
        assert!(ScalarField::from_values(&g, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn inv_helmholtz_roundtrip(seed in 0u64..500, log_c in -6.0f64..6.0) {
            let c = 10f64.powf(log_c);
            let g = t1(32);
            let f = random_smooth(&g, seed, 1.0);
            let u = inv_helmholtz(&f, c).unwrap();
            let back = laplacian(&u).scale(-1.0).add(&u.scale(c));
            // the constant mode is amplified by 1/c, so rounding in the
            // round-trip grows accordingly for small c
            let scale = norm_inf(&f).max(1.0) * (1.0 + 1.0 / c);
            prop_assert!(norm_inf(&back.sub(&f)) < 1e-12 * scale);
        }
    }
}
