//! Uniform periodic box grid, fields sampled on it, and the discrete
//! Fourier pair ĝ(ξ) = ∫ e^{+i x·ξ} g(x) dx.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

/// Cube [−L, L]³ sampled at x_i = −L + i·h, h = 2L/n, periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    n: usize,
    half_width: f64,
}

impl BoxGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Grid(format!("n = {n} must be even and >= 8")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Grid(format!("half width {half_width} must be positive")));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// h³, the trapezoid weight.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }
    /// Spacing π/L of the dual lattice.
    pub fn dual_spacing(&self) -> f64 {
        PI / self.half_width
    }
    pub fn dual_cell_volume(&self) -> f64 {
        self.dual_spacing().powi(3)
    }
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }
    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }
    pub fn node(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.split(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }
    /// Signed lattice index of FFT slot `m`; the Nyquist slot maps to −n/2.
    #[inline]
    pub fn signed(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }
    #[inline]
    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n / 2
    }
    /// FFT slot holding signed lattice index `s`, if it is representable.
    pub fn slot(&self, s: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if s < -h || s >= h {
            None
        } else if s >= 0 {
            Some(s as usize)
        } else {
            Some((s + self.n as i64) as usize)
        }
    }
    /// 1-D frequencies per FFT slot.
    pub fn frequencies_1d(&self) -> Vec<f64> {
        (0..self.n)
            .map(|m| self.signed(m) as f64 * self.dual_spacing())
            .collect()
    }
    pub fn frequency(&self, idx: usize) -> Vec3 {
        let [a, b, c] = self.split(idx);
        let d = self.dual_spacing();
        [
            self.signed(a) as f64 * d,
            self.signed(b) as f64 * d,
            self.signed(c) as f64 * d,
        ]
    }
    /// True if any axis of the mode sits on the Nyquist slot.
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let [a, b, c] = self.split(idx);
        self.is_nyquist(a) || self.is_nyquist(b) || self.is_nyquist(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: BoxGrid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            grid,
            values: vec![ZERO; grid.len()],
        }
    }

    pub fn from_values(grid: BoxGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: BoxGrid, f: impl Fn(Vec3) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: BoxGrid, f: impl Fn(Vec3) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// h³ Σ |f|²
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// h³ Σ f, the trapezoid integral.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Largest |x| over nodes where |f| exceeds `tol`; 0 for a field below tol.
    pub fn support_radius(&self, tol: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > tol)
            .map(|(i, _)| norm3(self.grid.node(i)))
            .fold(0.0, f64::max)
    }

    /// Largest imaginary-part magnitude, a real-valuedness diagnostic.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Cyclic shift by whole nodes along each axis.
    pub fn shifted(&self, by: [i64; 3]) -> Self {
        let g = self.grid;
        let n = g.n() as i64;
        let mut out = vec![ZERO; g.len()];
        for (idx, v) in self.values.iter().enumerate() {
            let [i, j, k] = g.split(idx);
            let w = |a: usize, s: i64| ((a as i64 + s).rem_euclid(n)) as usize;
            out[g.index(w(i, by[0]), w(j, by[1]), w(k, by[2]))] = *v;
        }
        Self { grid: g, values: out }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    components: [ScalarField; 3],
}

impl VectorField3 {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        same_grid(components[0].grid(), components[1].grid())?;
        same_grid(components[0].grid(), components[2].grid())?;
        Ok(Self { components })
    }
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }
    pub fn from_fn(grid: BoxGrid, f: impl Fn(Vec3) -> CVec3) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.node(i));
            for (c, vc) in v.iter().enumerate() {
                out.components[c].values[i] = *vc;
            }
        }
        out
    }
    pub fn grid(&self) -> &BoxGrid {
        self.components[0].grid()
    }
    pub fn component(&self, c: usize) -> &ScalarField {
        &self.components[c]
    }
    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.components[c]
    }
    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }
    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }
    pub fn at(&self, idx: usize) -> CVec3 {
        [
            self.components[0].values[idx],
            self.components[1].values[idx],
            self.components[2].values[idx],
        ]
    }
    /// max over nodes of the Euclidean magnitude.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid().len())
            .map(|i| self.at(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: [
                f(&self.components[0]),
                f(&self.components[1]),
                f(&self.components[2]),
            ],
        }
    }
    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].add(&other.components[0])?,
                self.components[1].add(&other.components[1])?,
                self.components[2].add(&other.components[2])?,
            ],
        })
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].sub(&other.components[0])?,
                self.components[1].sub(&other.components[1])?,
                self.components[2].sub(&other.components[2])?,
            ],
        })
    }
    pub fn scale(&self, c: Complex64) -> Self {
        self.map_components(|f| f.scale(c))
    }
    /// Σ_c u_c v_c per node (bilinear).
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        let mut out = self.components[0].mul(&other.components[0])?;
        for c in 1..3 {
            let p = self.components[c].mul(&other.components[c])?;
            out = out.add(&p)?;
        }
        Ok(out)
    }
    pub fn support_radius(&self, tol: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.support_radius(tol))
            .fold(0.0, f64::max)
    }
    pub fn max_imag(&self) -> f64 {
        self.components.iter().map(|c| c.max_imag()).fold(0.0, f64::max)
    }
}

/// ĝ on the aliased lattice (π/L)ℤ³, stored in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: BoxGrid,
    modes: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: BoxGrid) -> Self {
        Self {
            grid,
            modes: vec![ZERO; grid.len()],
        }
    }
    pub fn from_modes(grid: BoxGrid, modes: Vec<Complex64>) -> Result<Self> {
        if modes.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                found: modes.len(),
            });
        }
        Ok(Self { grid, modes })
    }
    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }
    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }
    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }
    pub fn frequency(&self, idx: usize) -> Vec3 {
        self.grid.frequency(idx)
    }
    /// Mode at signed lattice index (m1, m2, m3).
    pub fn at_lattice(&self, m: [i64; 3]) -> Option<Complex64> {
        let g = &self.grid;
        Some(self.modes[g.index(g.slot(m[0])?, g.slot(m[1])?, g.slot(m[2])?)])
    }
    /// Multiply every mode by `f(ξ)`; modes on the Nyquist plane are zeroed.
    pub fn multiplied(&self, f: impl Fn(Vec3) -> Complex64) -> Self {
        let g = self.grid;
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if g.touches_nyquist(i) {
                    ZERO
                } else {
                    v * f(g.frequency(i))
                }
            })
            .collect();
        Self { grid: g, modes }
    }
}

pub(crate) fn same_grid(a: &BoxGrid, b: &BoxGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// 3-D transforms along all axes, cached per n.
pub struct Fft3 {
    n: usize,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn for_size(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("fft cache poisoned");
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    // rustfft "inverse" is the e^{+2πi jm/n} sum
                    plus: planner.plan_fft_inverse(n),
                    minus: planner.plan_fft_forward(n),
                })
            })
            .clone()
    }

    /// Σ_j x_j e^{+2πi j·m/n}, unnormalized.
    pub fn plus(&self, data: &mut [Complex64]) {
        self.along_axes(data, &self.plus);
    }

    /// n⁻³ Σ_m x_m e^{−2πi j·m/n}; inverse of `plus`.
    pub fn minus(&self, data: &mut [Complex64]) {
        self.along_axes(data, &self.minus);
        let s = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn along_axes(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nn = n * n;
        assert_eq!(data.len(), nn * n);
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        let mut plane = vec![ZERO; nn];
        for chunk in data.chunks_exact_mut(nn) {
            for j in 0..n {
                for i in 0..n {
                    plane[j + n * i] = chunk[i + n * j];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for j in 0..n {
                for i in 0..n {
                    chunk[i + n * j] = plane[j + n * i];
                }
            }
        }
        let mut tmp = vec![ZERO; nn * n];
        for k in 0..n {
            for j in 0..nn {
                tmp[k + n * j] = data[j + nn * k];
            }
        }
        fft.process_with_scratch(&mut tmp, &mut scratch);
        for k in 0..n {
            for j in 0..nn {
                data[j + nn * k] = tmp[k + n * j];
            }
        }
    }
}

fn parity(g: &BoxGrid, idx: usize) -> f64 {
    let [a, b, c] = g.split(idx);
    if (a + b + c) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ĝ(ξ_m) = h³ Σ_x e^{+i x·ξ_m} g(x).
pub fn dft_forward(f: &ScalarField) -> SpectralField {
    let g = f.grid;
    let mut data = f.values.clone();
    Fft3::for_size(g.n()).plus(&mut data);
    let h3 = g.cell_volume();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= h3 * parity(&g, i);
    }
    SpectralField { grid: g, modes: data }
}

/// g(x) = (2π)⁻³ (π/L)³ Σ_m e^{−i x·ξ_m} ĝ_m.
pub fn dft_inverse(spec: &SpectralField) -> ScalarField {
    let g = spec.grid;
    let mut data = spec.modes.clone();
    // minus() divides by n³; restore the (2L)⁻³ n³ = h⁻³ factor
    let s = 1.0 / g.cell_volume();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= s * parity(&g, i);
    }
    Fft3::for_size(g.n()).minus(&mut data);
    ScalarField { grid: g, values: data }
}

/// Apply a Fourier multiplier m(ξ); Nyquist-plane modes are dropped.
pub fn apply_multiplier(f: &ScalarField, m: impl Fn(Vec3) -> Complex64) -> ScalarField {
    dft_inverse(&dft_forward(f).multiplied(m))
}

/// Direct quadrature h³ Σ e^{i x·ξ} f(x) at an arbitrary ξ.
pub fn fourier_at(f: &ScalarField, xi: Vec3) -> Complex64 {
    let g = f.grid;
    let n = g.n();
    let tables: Vec<Vec<Complex64>> = (0..3)
        .map(|c| (0..n).map(|i| (I * (g.coord(i) * xi[c])).exp()).collect())
        .collect();
    let mut acc = ZERO;
    for k in 0..n {
        let mut plane = ZERO;
        for j in 0..n {
            let row = &f.values[g.index(0, j, k)..g.index(0, j, k) + n];
            let s: Complex64 = row.iter().zip(&tables[0]).map(|(a, b)| a * b).sum();
            plane += s * tables[1][j];
        }
        acc += plane * tables[2][k];
    }
    acc * g.cell_volume()
}

/// ∂_j ↦ −iξ_j under the e^{+ix·ξ} convention.
pub fn gradient(f: &ScalarField) -> VectorField3 {
    let spec = dft_forward(f);
    let comp = |c: usize| dft_inverse(&spec.multiplied(|xi| Complex64::new(0.0, -xi[c])));
    VectorField3 {
        components: [comp(0), comp(1), comp(2)],
    }
}

pub fn divergence(v: &VectorField3) -> ScalarField {
    let g = *v.grid();
    let mut acc = SpectralField::zeros(g);
    for c in 0..3 {
        let s = dft_forward(&v.components[c]).multiplied(|xi| Complex64::new(0.0, -xi[c]));
        acc.modes.iter_mut().zip(&s.modes).for_each(|(a, b)| *a += b);
    }
    dft_inverse(&acc)
}

/// Standard 3-vector curl; component 0 is b₂₃ = ∂₂a₃ − ∂₃a₂ and cyclically.
pub fn curl(v: &VectorField3) -> VectorField3 {
    let specs: Vec<SpectralField> = v.components.iter().map(dft_forward).collect();
    let comp = |c: usize| {
        let (p, q) = ((c + 1) % 3, (c + 2) % 3);
        let g = *v.grid();
        let mut out = SpectralField::zeros(g);
        for i in 0..g.len() {
            if g.touches_nyquist(i) {
                continue;
            }
            let xi = g.frequency(i);
            out.modes[i] = Complex64::new(0.0, -xi[p]) * specs[q].modes[i]
                - Complex64::new(0.0, -xi[q]) * specs[p].modes[i];
        }
        dft_inverse(&out)
    };
    VectorField3 {
        components: [comp(0), comp(1), comp(2)],
    }
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    apply_multiplier(f, |xi| Complex64::new(-dot3(xi, xi), 0.0))
}

/// ⟨ξ⟩ = √(1 + |ξ|²)
pub fn japanese(xi: Vec3) -> f64 {
    (1.0 + dot3(xi, xi)).sqrt()
}

/// Σ ⟨ξ⟩^τ |F(ξ)| · (π/L)³
pub fn weighted_l1_norm(spec: &SpectralField, tau: f64) -> Result<f64> {
    weighted_l1_norm_of(&[spec], tau)
}

/// Same as `weighted_l1_norm` with |F| the Euclidean norm over components.
pub fn weighted_l1_norm_of(specs: &[&SpectralField], tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::param("tau", format!("{tau} must be >= 0")));
    }
    let g = *specs[0].grid();
    for s in specs {
        same_grid(&g, s.grid())?;
    }
    let sum: f64 = (0..g.len())
        .map(|i| {
            let mag = specs
                .iter()
                .map(|s| s.modes[i].norm_sqr())
                .sum::<f64>()
                .sqrt();
            japanese(g.frequency(i)).powf(tau) * mag
        })
        .sum();
    Ok(sum * g.dual_cell_volume())
}

/// Off-grid evaluation of the trigonometric interpolant of a sampled field.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: BoxGrid,
    modes: Vec<Complex64>,
    freqs: Vec<f64>,
}

impl TrigInterpolant {
    pub fn new(f: &ScalarField) -> Self {
        let mut spec = dft_forward(f);
        let g = spec.grid;
        let scale = 1.0 / (8.0 * g.half_width().powi(3));
        for (i, v) in spec.modes.iter_mut().enumerate() {
            *v = if g.touches_nyquist(i) { ZERO } else { *v * scale };
        }
        Self {
            grid: g,
            modes: spec.modes,
            freqs: g.frequencies_1d(),
        }
    }

    /// Value and gradient at x.
    pub fn eval(&self, x: Vec3) -> (Complex64, CVec3) {
        let n = self.grid.n();
        let t: Vec<Vec<Complex64>> = (0..3)
            .map(|c| self.freqs.iter().map(|&k| (-I * (x[c] * k)).exp()).collect())
            .collect();
        let mut v = ZERO;
        let mut d = [ZERO; 3];
        for k in 0..n {
            let (mut pv, mut p0, mut p1) = (ZERO, ZERO, ZERO);
            for j in 0..n {
                let base = self.grid.index(0, j, k);
                let row = &self.modes[base..base + n];
                let (mut rv, mut r0) = (ZERO, ZERO);
                for (i, m) in row.iter().enumerate() {
                    let z = m * t[0][i];
                    rv += z;
                    r0 += z * self.freqs[i];
                }
                pv += rv * t[1][j];
                p0 += r0 * t[1][j];
                p1 += rv * t[1][j] * self.freqs[j];
            }
            v += pv * t[2][k];
            d[0] += p0 * t[2][k];
            d[1] += p1 * t[2][k];
            d[2] += pv * t[2][k] * self.freqs[k];
        }
        (v, [-I * d[0], -I * d[1], -I * d[2]])
    }
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
#[inline]
pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}
#[inline]
pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
#[inline]
pub fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
/// Complex bilinear dot of a complex and a real 3-vector.
#[inline]
pub fn cdot3(a: CVec3, b: Vec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
/// Complex bilinear dot (no conjugation).
#[inline]
pub fn cdot(a: CVec3, b: CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
