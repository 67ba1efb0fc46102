//! Spherical Bessel/Hankel functions, spherical harmonics, far-field
//! coefficient tables, the 𝓕-norm and the far-to-near series.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::NearFieldMatrix;
use crate::error::{Error, Result};
use crate::field::{norm3, Vec3};
use crate::sphere::SphereGrid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// j_0..=j_lmax at x ≥ 0 by Miller backward recurrence, normalized with
/// Σ (2ℓ+1) j_ℓ² = 1.
pub fn bessel_j_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-3 {
        // series; the recurrence start below would be needlessly long
        let mut df = 1.0;
        for (l, o) in out.iter_mut().enumerate() {
            if l > 0 {
                df *= (2 * l + 1) as f64;
            }
            let t = x * x / 2.0;
            *o = x.powi(l as i32) / df
                * (1.0 - t / (2 * l + 3) as f64 + t * t / (2.0 * (2 * l + 3) as f64 * (2 * l + 5) as f64));
        }
        return out;
    }
    let start = lmax.max(x.ceil() as usize) + 20 + (x.sqrt() * 4.0) as usize;
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut norm = 0.0;
    for l in (0..=start).rev() {
        if l <= lmax {
            out[l] = j;
        }
        norm += (2 * l + 1) as f64 * j * j;
        let jm1 = (2 * l + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e100 {
            jp1 *= 1e-100;
            j *= 1e-100;
            norm *= 1e-200;
            out.iter_mut().for_each(|v| *v *= 1e-100);
        }
    }
    let s = 1.0 / norm.sqrt();
    // fix the sign against j0 = sin x / x where that is well conditioned
    let j0 = x.sin() / x;
    let sign = if j0.abs() > 1e-3 {
        (j0 / (out[0] * s)).signum()
    } else {
        let j1 = x.sin() / (x * x) - x.cos() / x;
        (j1 / (out[1.min(lmax)] * s)).signum()
    };
    out.iter_mut().for_each(|v| *v *= s * sign);
    out
}

/// y_0..=y_lmax at x > 0 by upward recurrence.
pub fn bessel_y_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    out[0] = -x.cos() / x;
    if lmax >= 1 {
        out[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for l in 1..lmax {
        out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
    }
    out
}

pub fn bessel_j(l: usize, x: f64) -> f64 {
    bessel_j_all(l, x)[l]
}

pub fn bessel_y(l: usize, x: f64) -> f64 {
    bessel_y_all(l, x)[l]
}

/// h_ℓ⁽¹⁾ = j_ℓ + i y_ℓ for ℓ = 0..=lmax.
pub fn hankel_h1_all(lmax: usize, x: f64) -> Vec<Complex64> {
    let j = bessel_j_all(lmax, x);
    let y = bessel_y_all(lmax, x);
    j.iter().zip(&y).map(|(a, b)| Complex64::new(*a, *b)).collect()
}

pub fn hankel_h1(l: usize, x: f64) -> Complex64 {
    hankel_h1_all(l, x)[l]
}

/// f'_ℓ = f_{ℓ−1} − (ℓ+1)/x f_ℓ, with f'_0 = −f_1; `f` must hold lmax+1 orders
/// plus one extra for ℓ = 0.
pub fn derivative_from_orders<T>(f: &[T], x: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Neg<Output = T>,
{
    let lmax = f.len() - 2;
    (0..=lmax)
        .map(|l| {
            if l == 0 {
                -f[1]
            } else {
                f[l - 1] - f[l] * ((l + 1) as f64 / x)
            }
        })
        .collect()
}

/// j_ℓ and j_ℓ' for ℓ = 0..=lmax.
pub fn bessel_j_with_derivative(lmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let j = bessel_j_all(lmax + 1, x);
    let d = if x == 0.0 {
        let mut d = vec![0.0; lmax + 1];
        if lmax >= 1 {
            d[1] = 1.0 / 3.0;
        }
        d
    } else {
        derivative_from_orders(&j, x)
    };
    (j[..=lmax].to_vec(), d)
}

/// h_ℓ and h_ℓ' for ℓ = 0..=lmax.
pub fn hankel_with_derivative(lmax: usize, x: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let h = hankel_h1_all(lmax + 1, x);
    let d = derivative_from_orders(&h, x);
    (h[..=lmax].to_vec(), d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::param("m", format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { l, m })
    }
    /// Position in the flat (ℓ, m) ordering ℓ² + ℓ + m.
    pub fn flat(&self) -> usize {
        ((self.l * self.l + self.l) as i64 + self.m) as usize
    }
    pub fn from_flat(i: usize) -> Self {
        let l = (i as f64).sqrt().floor() as usize;
        let l = if (l + 1) * (l + 1) <= i { l + 1 } else { l };
        Self {
            l,
            m: i as i64 - (l * l + l) as i64,
        }
    }
    /// All indices with ℓ ≤ lmax in flat order.
    pub fn all(lmax: usize) -> Vec<Self> {
        (0..(lmax + 1) * (lmax + 1)).map(Self::from_flat).collect()
    }
}

pub fn harmonic_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

fn flat(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// All fully normalized Y_ℓ^m (Condon–Shortley phase) at a direction, flat order.
pub fn ylm_all(lmax: usize, dir: Vec3) -> Vec<Complex64> {
    let r = norm3(dir);
    let (ct, st, phi) = if r == 0.0 {
        (1.0, 0.0, 0.0)
    } else {
        let ct = (dir[2] / r).clamp(-1.0, 1.0);
        let st = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt() / r;
        (ct, st, dir[1].atan2(dir[0]))
    };
    let mut out = vec![Complex64::new(0.0, 0.0); harmonic_count(lmax)];
    // normalized associated Legendre P̄_ℓ^m including (−1)^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st;
        }
        let mut p_lm2 = 0.0;
        let mut p_lm1 = pmm;
        let e = Complex64::from_polar(1.0, m as f64 * phi);
        let put = |out: &mut Vec<Complex64>, l: usize, p: f64| {
            let y = e * p;
            out[flat(l, m as i64)] = y;
            if m > 0 {
                let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[flat(l, -(m as i64))] = y.conj() * sgn;
            }
        };
        put(&mut out, m, pmm);
        for l in (m + 1)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = if l >= m + 2 {
                (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt()
            } else {
                0.0
            };
            let p = a * (ct * p_lm1 - b * p_lm2);
            put(&mut out, l, p);
            p_lm2 = p_lm1;
            p_lm1 = p;
        }
    }
    out
}

pub fn eval_ylm(l: usize, m: i64, dir: Vec3) -> Result<Complex64> {
    let idx = HarmonicIndex::new(l, m)?;
    Ok(ylm_all(l, dir)[idx.flat()])
}

/// μ_{(ℓ₁,m₁),(ℓ₂,m₂)} in flat×flat order, with the physics it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldCoefficients {
    l_max: usize,
    k: f64,
    a: f64,
    mu: Vec<Complex64>,
}

impl FarFieldCoefficients {
    pub fn from_table(l_max: usize, k: f64, a: f64, mu: Vec<Complex64>) -> Result<Self> {
        let n = harmonic_count(l_max);
        if mu.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: mu.len(),
            });
        }
        Ok(Self { l_max, k, a, mu })
    }
    pub fn zeros(l_max: usize, k: f64, a: f64) -> Self {
        let n = harmonic_count(l_max);
        Self {
            l_max,
            k,
            a,
            mu: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }
    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn get(&self, i1: HarmonicIndex, i2: HarmonicIndex) -> Complex64 {
        self.mu[i1.flat() * harmonic_count(self.l_max) + i2.flat()]
    }
    pub fn set(&mut self, i1: HarmonicIndex, i2: HarmonicIndex, v: Complex64) {
        let n = harmonic_count(self.l_max);
        self.mu[i1.flat() * n + i2.flat()] = v;
    }
    pub fn table(&self) -> &[Complex64] {
        &self.mu
    }
    /// Restriction to ℓ₁, ℓ₂ ≤ l.
    pub fn truncated(&self, l: usize) -> Self {
        let l = l.min(self.l_max);
        let n_old = harmonic_count(self.l_max);
        let n = harmonic_count(l);
        let mut mu = Vec::with_capacity(n * n);
        for i in 0..n {
            mu.extend_from_slice(&self.mu[i * n_old..i * n_old + n]);
        }
        Self {
            l_max: l,
            k: self.k,
            a: self.a,
            mu,
        }
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.l_max != other.l_max {
            return Err(Error::param("l_max", "tables of different size"));
        }
        Ok(Self {
            l_max: self.l_max,
            k: self.k,
            a: self.a,
            mu: self.mu.iter().zip(&other.mu).map(|(a, b)| a - b).collect(),
        })
    }
}

/// Far-field samples u^∞(x̂_i, d_j) on the direction set of a sphere grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldData {
    pub directions: SphereGrid,
    /// Row-major: entry [i * n + j] is u^∞(x̂_i, d_j).
    pub values: Vec<Complex64>,
}

impl FarFieldData {
    pub fn zeros(directions: SphereGrid) -> Self {
        let n = directions.len();
        Self {
            directions,
            values: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }
    pub fn from_fn(directions: SphereGrid, f: impl Fn(Vec3, Vec3) -> Complex64) -> Self {
        let d = directions.directions().to_vec();
        let values = d
            .iter()
            .flat_map(|x| d.iter().map(|y| f(*x, *y)).collect::<Vec<_>>())
            .collect();
        Self { directions, values }
    }
    /// Discrete L²(S²×S²) norm.
    pub fn l2_norm(&self) -> f64 {
        let w = self.directions.unit_weights();
        let n = w.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += w[i] * w[j] * self.values[i * n + j].norm_sqr();
            }
        }
        s.sqrt()
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(Error::SphereMismatch);
        }
        Ok(Self {
            directions: self.directions.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

/// μ = ∬ u^∞(x̂,d) conj(Y_{ℓ₁m₁}(x̂)) conj(Y_{ℓ₂m₂}(d)) ds(x̂) ds(d).
pub fn far_coefficients(data: &FarFieldData, l_max: usize, k: f64, a: f64) -> Result<FarFieldCoefficients> {
    let sphere = &data.directions;
    let degree = sphere.exact_degree();
    if degree < 2 * l_max {
        return Err(Error::Quadrature {
            degree,
            required: 2 * l_max,
        });
    }
    let w = sphere.unit_weights();
    let n = sphere.len();
    let nh = harmonic_count(l_max);
    // B[h][i] = w_i conj(Y_h(x̂_i))
    let mut b = vec![Complex64::new(0.0, 0.0); nh * n];
    for (i, d) in sphere.directions().iter().enumerate() {
        let y = ylm_all(l_max, *d);
        for h in 0..nh {
            b[h * n + i] = y[h].conj() * w[i];
        }
    }
    // T = B U  (nh × n), then μ = T Bᵗ
    let mut t = vec![Complex64::new(0.0, 0.0); nh * n];
    for h in 0..nh {
        for i in 0..n {
            let bi = b[h * n + i];
            if bi == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &data.values[i * n..(i + 1) * n];
            let trow = &mut t[h * n..(h + 1) * n];
            for (tj, uj) in trow.iter_mut().zip(row) {
                *tj += bi * uj;
            }
        }
    }
    let mut mu = vec![Complex64::new(0.0, 0.0); nh * nh];
    for h1 in 0..nh {
        for h2 in 0..nh {
            mu[h1 * nh + h2] = t[h1 * n..(h1 + 1) * n]
                .iter()
                .zip(&b[h2 * n..(h2 + 1) * n])
                .map(|(x, y)| x * y)
                .sum();
        }
    }
    FarFieldCoefficients::from_table(l_max, k, a, mu)
}

/// ((2ℓ+1)/(e k a))^{2ℓ}
pub fn f_weight(l: usize, k: f64, a: f64) -> f64 {
    ((2 * l + 1) as f64 / (E * k * a)).powi(2 * l as i32)
}

pub fn f_norm(c: &FarFieldCoefficients) -> f64 {
    let idx = HarmonicIndex::all(c.l_max);
    let w: Vec<f64> = idx.iter().map(|h| f_weight(h.l, c.k, c.a)).collect();
    let n = idx.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += w[i] * w[j] * c.mu[i * n + j].norm_sqr();
        }
    }
    s.sqrt()
}

fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// u^s(x,y) = −(k²/4π) Σ i^{ℓ₁−ℓ₂} μ h_{ℓ₁}(k|x|) h_{ℓ₂}(k|y|) Y(x̂) Y(ŷ).
pub fn near_from_far(c: &FarFieldCoefficients, x: Vec3, y: Vec3) -> Result<Complex64> {
    let (rx, ry) = (norm3(x), norm3(y));
    if rx < c.a * (1.0 - 1e-12) || ry < c.a * (1.0 - 1e-12) {
        return Err(Error::param("x, y", format!("radii {rx}, {ry} below a = {}", c.a)));
    }
    Ok(near_from_far_terms(c, x, y)
        .iter()
        .flat_map(|row| row.iter())
        .sum())
}

/// Per-(ℓ₁, ℓ₂) partial sums of the far-to-near series.
pub fn near_from_far_terms(c: &FarFieldCoefficients, x: Vec3, y: Vec3) -> Vec<Vec<Complex64>> {
    let l = c.l_max;
    let hx = hankel_h1_all(l, c.k * norm3(x));
    let hy = hankel_h1_all(l, c.k * norm3(y));
    let yx = ylm_all(l, x);
    let yy = ylm_all(l, y);
    let idx = HarmonicIndex::all(l);
    let n = idx.len();
    let pref = -c.k * c.k / (4.0 * PI);
    let mut terms = vec![vec![Complex64::new(0.0, 0.0); l + 1]; l + 1];
    for (i, a) in idx.iter().enumerate() {
        for (j, b) in idx.iter().enumerate() {
            let mu = c.mu[i * n + j];
            if mu == Complex64::new(0.0, 0.0) {
                continue;
            }
            terms[a.l][b.l] += i_pow(a.l as i64 - b.l as i64) * mu * hx[a.l] * hy[b.l] * yx[i] * yy[j] * pref;
        }
    }
    terms
}

/// Radiating solution outside the sphere with prescribed trace.
#[derive(Debug, Clone)]
pub struct ExteriorSolution {
    k: f64,
    a: f64,
    l_max: usize,
    /// g_{ℓm} / h_ℓ(ka)
    scaled: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    normal_derivative: Vec<Complex64>,
    tail: f64,
}

impl ExteriorSolution {
    pub fn l_max(&self) -> usize {
        self.l_max
    }
    /// Trace coefficients c_{ℓm} (flat order).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }
    /// ∂_r u⁺ at the sphere nodes.
    pub fn normal_derivative(&self) -> &[Complex64] {
        &self.normal_derivative
    }
    /// Relative nodal residual of the truncated expansion of the trace.
    pub fn tail(&self) -> f64 {
        self.tail
    }
    /// u⁺ at |x| ≥ a.
    pub fn eval(&self, x: Vec3) -> Complex64 {
        let r = norm3(x);
        let h = hankel_h1_all(self.l_max, self.k * r);
        let y = ylm_all(self.l_max, x);
        HarmonicIndex::all(self.l_max)
            .iter()
            .enumerate()
            .map(|(i, hi)| self.scaled[i] * h[hi.l] * y[i])
            .sum()
    }
    /// ∂_r u⁺ at |x| ≥ a.
    pub fn eval_radial_derivative(&self, x: Vec3) -> Complex64 {
        let r = norm3(x);
        let (_, dh) = hankel_with_derivative(self.l_max, self.k * r);
        let y = ylm_all(self.l_max, x);
        HarmonicIndex::all(self.l_max)
            .iter()
            .enumerate()
            .map(|(i, hi)| self.scaled[i] * dh[hi.l] * self.k * y[i])
            .sum()
    }
    pub fn radius(&self) -> f64 {
        self.a
    }
}

/// Spherical-harmonic analysis of nodal data: coefficients up to l_max and
/// the relative nodal residual of the truncated synthesis.
pub fn analyze(sphere: &SphereGrid, g: &[Complex64], l_max: usize) -> Result<(Vec<Complex64>, f64)> {
    if g.len() != sphere.len() {
        return Err(Error::SphereMismatch);
    }
    let w = sphere.unit_weights();
    let nh = harmonic_count(l_max);
    let tables: Vec<Vec<Complex64>> = sphere.directions().iter().map(|d| ylm_all(l_max, *d)).collect();
    let mut c = vec![Complex64::new(0.0, 0.0); nh];
    for (i, y) in tables.iter().enumerate() {
        let gw = g[i] * w[i];
        for h in 0..nh {
            c[h] += gw * y[h].conj();
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in tables.iter().enumerate() {
        let s: Complex64 = c.iter().zip(y).map(|(a, b)| a * b).sum();
        num += w[i] * (g[i] - s).norm_sqr();
        den += w[i] * g[i].norm_sqr();
    }
    let tail = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
    Ok((c, tail))
}

/// Solve the exterior Dirichlet problem for the trace `g` on the sphere.
pub fn exterior_dirichlet(sphere: &SphereGrid, g: &[Complex64], k: f64, l_max: usize, tail_tol: f64) -> Result<ExteriorSolution> {
    let degree = sphere.exact_degree();
    if degree < 2 * l_max {
        return Err(Error::Quadrature {
            degree,
            required: 2 * l_max,
        });
    }
    let (coeffs, tail) = analyze(sphere, g, l_max)?;
    if tail > tail_tol {
        return Err(Error::SpectralTail {
            tail,
            tol: tail_tol,
            l_max,
        });
    }
    let a = sphere.radius();
    let (h, dh) = hankel_with_derivative(l_max, k * a);
    let idx = HarmonicIndex::all(l_max);
    let scaled: Vec<Complex64> = idx.iter().enumerate().map(|(i, hi)| coeffs[i] / h[hi.l]).collect();
    let dn_coef: Vec<Complex64> = idx
        .iter()
        .enumerate()
        .map(|(i, hi)| scaled[i] * dh[hi.l] * k)
        .collect();
    let normal_derivative = sphere
        .directions()
        .iter()
        .map(|d| {
            let y = ylm_all(l_max, *d);
            dn_coef.iter().zip(&y).map(|(a, b)| a * b).sum()
        })
        .collect();
    Ok(ExteriorSolution {
        k,
        a,
        l_max,
        scaled,
        coeffs,
        normal_derivative,
        tail,
    })
}

/// max_{ℓ ≤ L} |h_ℓ(ka)| (eka/(2ℓ+1))^ℓ
pub fn hankel_alpha(l_max: usize, k: f64, a: f64) -> f64 {
    let h = hankel_h1_all(l_max, k * a);
    (0..=l_max)
        .map(|l| h[l].norm() * (E * k * a / (2 * l + 1) as f64).powi(l as i32))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormGap {
    pub lhs: f64,
    pub rhs: f64,
    pub alpha: f64,
    pub f_distance: f64,
}

/// ‖𝒩₁ − 𝒩₂‖ against a²α²k²/(4π)·‖u₁^∞ − u₂^∞‖_𝓕.
pub fn nearfield_farfield_gap(
    n1: &NearFieldMatrix,
    n2: &NearFieldMatrix,
    c1: &FarFieldCoefficients,
    c2: &FarFieldCoefficients,
) -> Result<NormGap> {
    if (c1.k - c2.k).abs() > 1e-14 || (c1.a - c2.a).abs() > 1e-14 {
        return Err(Error::param("physics", "coefficient tables from different physics"));
    }
    let lhs = crate::boundary::near_op_norm(n1, n2)?;
    let diff = c1.sub(c2)?;
    let f_distance = f_norm(&diff);
    let alpha = hankel_alpha(c1.l_max, c1.k, c1.a);
    let rhs = c1.a * c1.a * alpha * alpha * c1.k * c1.k / (4.0 * PI) * f_distance;
    Ok(NormGap {
        lhs,
        rhs,
        alpha,
        f_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_closed_form() {
        for x in [1e-4, 0.3, 1.0, 7.5, 40.0] {
            assert!((bessel_j(0, x) - x.sin() / x).abs() < 1e-14);
        }
        assert!((bessel_j(0, 1.0) - 0.8414709848078965).abs() < 1e-15);
    }

    #[test]
    fn j_small_matches_series_region() {
        let a = bessel_j_all(6, 0.999e-3);
        let b = bessel_j_all(6, 1.001e-3);
        // j_ℓ(x) ∝ x^ℓ at small x, so rescale across the switch point
        let r: f64 = 1.001 / 0.999;
        for l in 0..=6 {
            let expect = a[l] * r.powi(l as i32);
            assert!((expect - b[l]).abs() <= 1e-5 * b[l].abs(), "l = {l}");
        }
    }

    #[test]
    fn h0_closed_form() {
        let x = 1.0;
        let h = hankel_h1(0, x);
        let expect = -I * Complex64::from_polar(1.0, x) / x;
        assert!((h - expect).norm() < 1e-14);
    }

    #[test]
    fn flat_index_roundtrip() {
        for i in 0..100 {
            let h = HarmonicIndex::from_flat(i);
            assert_eq!(h.flat(), i);
            assert!(h.m.unsigned_abs() as usize <= h.l);
        }
    }

    #[test]
    fn y10_closed_form() {
        let d = [0.3, -0.4, 0.5];
        let r = norm3(d);
        let y = eval_ylm(1, 0, d).unwrap();
        assert!((y.re - (3.0 / (4.0 * PI)).sqrt() * d[2] / r).abs() < 1e-14);
        // Condon–Shortley: Y_1^1 = −√(3/8π) sinθ e^{iφ}
        let y11 = eval_ylm(1, 1, d).unwrap();
        let expect = -(3.0 / (8.0 * PI)).sqrt() * Complex64::new(d[0], d[1]) / r;
        assert!((y11 - expect).norm() < 1e-14);
    }
}
