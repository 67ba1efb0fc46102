use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Vec3;
use crate::forward::{kernel, kernel_grad, IncidentField, ScatteringProblem, Sources, TotalField};
use crate::sphere::{BoundaryDensity, SphereGrid, SphereSpec};
use crate::spherical::FarFieldData;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// v = S h = Σ_j w_j Φ(·, y_j) h(y_j)
pub fn single_layer(sphere: &SphereGrid, h: &BoundaryDensity) -> Result<IncidentField> {
    h.check(sphere)?;
    Ok(IncidentField::SingleLayer {
        sphere: sphere.clone(),
        density: h.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearFieldHeader {
    pub k: f64,
    pub radius: f64,
    pub sphere: SphereSpec,
    #[serde(default)]
    pub potential_hash: Option<String>,
}

/// Entry (i, j) is u^s(x_i, y_j), receivers x_i and point sources y_j on ∂B.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldMatrix {
    sphere: SphereGrid,
    k: f64,
    entries: Vec<Complex64>,
    pub potential_hash: Option<String>,
}

impl NearFieldMatrix {
    pub fn new(sphere: SphereGrid, k: f64, entries: Vec<Complex64>) -> Result<Self> {
        let n = sphere.len();
        if entries.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self {
            sphere,
            k,
            entries,
            potential_hash: None,
        })
    }

    pub fn zeros(sphere: SphereGrid, k: f64) -> Self {
        let n = sphere.len();
        Self {
            sphere,
            k,
            entries: vec![ZERO; n * n],
            potential_hash: None,
        }
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn size(&self) -> usize {
        self.sphere.len()
    }
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.size() + j]
    }

    pub fn header(&self) -> NearFieldHeader {
        NearFieldHeader {
            k: self.k,
            radius: self.sphere.radius(),
            sphere: self.sphere.spec(),
            potential_hash: self.potential_hash.clone(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sphere != other.sphere {
            return Err(Error::SphereMismatch);
        }
        if (self.k - other.k).abs() > 1e-14 {
            return Err(Error::param("k", "near-field matrices at different wavenumbers"));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            sphere: self.sphere.clone(),
            k: self.k,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
            potential_hash: None,
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            sphere: self.sphere.clone(),
            k: self.k,
            entries: self.entries.iter().map(|v| v * c).collect(),
            potential_hash: None,
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.size();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self {
            sphere: self.sphere.clone(),
            k: self.k,
            entries,
            potential_hash: None,
        }
    }

    /// (𝒩h)(x_i) = Σ_j N_ij w_j h_j
    pub fn apply(&self, h: &BoundaryDensity) -> Result<BoundaryDensity> {
        h.check(&self.sphere)?;
        let n = self.size();
        let w = self.sphere.weights();
        let hv = h.values();
        let out = (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(w.iter().zip(hv))
                    .map(|(a, (wj, hj))| a * wj * hj)
                    .sum()
            })
            .collect();
        BoundaryDensity::new(&self.sphere, out)
    }
}

/// Sources on active nodes keyed by a receiver kernel: rows (Φ, ∇Φ) per node.
fn receiver_kernel(k: f64, nodes: &[Vec3], receivers: &[Vec3]) -> Vec<Complex64> {
    let m = 4 * nodes.len();
    let mut kmat = vec![ZERO; receivers.len() * m];
    kmat.par_chunks_mut(m).zip(receivers.par_iter()).for_each(|(row, &x)| {
        for (p, &y) in nodes.iter().enumerate() {
            row[4 * p] = kernel(k, x, y);
            let g = kernel_grad(k, y, x);
            row[4 * p + 1] = g[0];
            row[4 * p + 2] = g[1];
            row[4 * p + 3] = g[2];
        }
    });
    kmat
}

/// C = A B for row-major complex matrices (m × l)(l × n).
pub(crate) fn zgemm(m: usize, l: usize, n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.len(), m * l);
    assert_eq!(b.len(), l * n);
    let mut c = vec![ZERO; m * n];
    if m == 0 || n == 0 || l == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2];
    // the slices are sized as asserted above.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            l,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            l as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

/// Scattered fields of many solves at many receivers, N = K S.
pub fn evaluate_sources(k: f64, sources: &[Sources], receivers: &[Vec3]) -> Vec<Complex64> {
    let ns = sources.len();
    if ns == 0 {
        return Vec::new();
    }
    let nodes = sources[0].nodes();
    let m = 4 * nodes.len();
    let h3 = sources[0].cell_volume();
    let mut s = vec![ZERO; m * ns];
    for (j, src) in sources.iter().enumerate() {
        for (p, (al, be)) in src.alpha().iter().zip(src.beta()).enumerate() {
            s[(4 * p) * ns + j] = al * h3;
            for c in 0..3 {
                s[(4 * p + 1 + c) * ns + j] = be[c] * h3;
            }
        }
    }
    let kmat = receiver_kernel(k, nodes, receivers);
    zgemm(receivers.len(), m, ns, &kmat, &s)
}

fn solve_all(problem: &ScatteringProblem, incidents: &[IncidentField]) -> Result<Vec<Sources>> {
    incidents
        .par_iter()
        .enumerate()
        .map(|(j, inc)| {
            problem.solve_sources(inc).map(|(s, _)| s).map_err(|e| Error::Source {
                index: j,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Column j is the scattered field of the point source at node y_j.
pub fn assemble_near_field(problem: &ScatteringProblem, sphere: &SphereGrid) -> Result<NearFieldMatrix> {
    let nodes = sphere.nodes();
    if problem.is_trivial() {
        return Ok(NearFieldMatrix::zeros(sphere.clone(), problem.k()));
    }
    problem.check_exterior(&nodes)?;
    let incidents: Vec<IncidentField> = nodes.iter().map(|&y| IncidentField::point_source(y)).collect();
    let sources = solve_all(problem, &incidents)?;
    let entries = evaluate_sources(problem.k(), &sources, &nodes);
    NearFieldMatrix::new(sphere.clone(), problem.k(), entries)
}

/// u^∞(x̂_i, d_j) over the directions of `directions` for both arguments.
pub fn assemble_far_field(problem: &ScatteringProblem, directions: &SphereGrid) -> Result<FarFieldData> {
    let dirs = directions.directions().to_vec();
    if problem.is_trivial() {
        return Ok(FarFieldData::zeros(directions.clone()));
    }
    let incidents: Vec<IncidentField> = dirs
        .iter()
        .map(|&d| IncidentField::plane_wave(d))
        .collect::<Result<_>>()?;
    let sources = solve_all(problem, &incidents)?;
    let n = dirs.len();
    let mut values = vec![ZERO; n * n];
    for (j, s) in sources.iter().enumerate() {
        for (i, &x) in dirs.iter().enumerate() {
            values[i * n + j] = s.far_field(x);
        }
    }
    Ok(FarFieldData {
        directions: directions.clone(),
        values,
    })
}

/// Largest singular value of W^{1/2}(N₁ − N₂)W^{1/2}.
pub fn near_op_norm(n1: &NearFieldMatrix, n2: &NearFieldMatrix) -> Result<f64> {
    n1.check_compatible(n2)?;
    let n = n1.size();
    let sw: Vec<f64> = n1.sphere.weights().iter().map(|w| w.sqrt()).collect();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| (n1.get(i, j) - n2.get(i, j)) * sw[i] * sw[j]);
    if m.iter().all(|v| *v == ZERO) {
        return Ok(0.0);
    }
    Ok(m.singular_values().iter().cloned().fold(0.0, f64::max))
}

/// ∫_{∂B} ((𝒩₁ − 𝒩₂) f₂) f₁ ds, bilinear as written (no conjugation).
pub fn data_functional(
    n1: &NearFieldMatrix,
    n2: &NearFieldMatrix,
    f1: &BoundaryDensity,
    f2: &BoundaryDensity,
) -> Result<Complex64> {
    n1.check_compatible(n2)?;
    f1.check(&n1.sphere)?;
    f2.check(&n1.sphere)?;
    let n = n1.size();
    let w = n1.sphere.weights();
    let wf2: Vec<Complex64> = f2.values().iter().zip(w).map(|(f, w)| f * w).collect();
    let mut total = ZERO;
    for i in 0..n {
        let mut row = ZERO;
        for j in 0..n {
            row += (n1.entries[i * n + j] - n2.entries[i * n + j]) * wf2[j];
        }
        total += f1.values()[i] * w[i] * row;
    }
    Ok(total)
}

/// h³ Σ [iA·(g₁u₂ − g₂u₁) + (c₂ − c₁)u₁u₂] with A = A₂ − A₁ and c_j = |A_j|² + q_j.
/// `p1` is built for (−A₁, q₁) and `p2` for (A₂, q₂); `t1`, `t2` are their total fields.
pub fn volume_side(p1: &ScatteringProblem, p2: &ScatteringProblem, t1: &TotalField, t2: &TotalField) -> Result<Complex64> {
    let g = *p1.grid();
    if p2.grid() != &g || t1.u.grid() != &g || t2.u.grid() != &g {
        return Err(Error::GridMismatch);
    }
    let (u1, u2) = (t1.u.values(), t2.u.values());
    let (c1, c2) = (p1.c_coefficients(), p2.c_coefficients());
    let (a1, a2) = (p1.magnetic_coefficients(), p2.magnetic_coefficients());
    let mut total = ZERO;
    for i in 0..g.len() {
        let mut v = (c2[i] - c1[i]) * u1[i] * u2[i];
        for c in 0..3 {
            // p1 carries −A₁, so A₂ − A₁ is the sum
            let a = a1.map_or(ZERO, |m| m[c][i]) + a2.map_or(ZERO, |m| m[c][i]);
            if a != ZERO {
                let flux = t1.gradient.component(c).values()[i] * u2[i] - t2.gradient.component(c).values()[i] * u1[i];
                v += Complex64::new(0.0, 1.0) * a * flux;
            }
        }
        total += v;
    }
    Ok(total * g.cell_volume())
}

/// Points on a sphere of given radius along the grid's directions.
pub fn points_on(sphere: &SphereGrid, radius: f64) -> Vec<Vec3> {
    sphere
        .directions()
        .iter()
        .map(|d| [d[0] * radius, d[1] * radius, d[2] * radius])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zgemm_matches_naive() {
        let (m, l, n) = (3, 5, 4);
        let a: Vec<Complex64> = (0..m * l).map(|i| Complex64::new(i as f64, 0.5 * i as f64)).collect();
        let b: Vec<Complex64> = (0..l * n).map(|i| Complex64::new(1.0 - i as f64, 0.1)).collect();
        let c = zgemm(m, l, n, &a, &b);
        for i in 0..m {
            for j in 0..n {
                let e: Complex64 = (0..l).map(|p| a[i * l + p] * b[p * n + j]).sum();
                assert!((c[i * n + j] - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_norm_homogeneity() {
        let s = SphereGrid::new(1.0, 3, 6).unwrap();
        let n = s.len();
        let entries = (0..n * n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let a = NearFieldMatrix::new(s.clone(), 1.0, entries).unwrap();
        let z = NearFieldMatrix::zeros(s, 1.0);
        let c = Complex64::new(-2.0, 1.5);
        let na = near_op_norm(&a, &z).unwrap();
        let nc = near_op_norm(&a.scaled(c), &z).unwrap();
        assert!((nc - c.norm() * na).abs() < 1e-12 * nc);
        assert_eq!(near_op_norm(&a, &a).unwrap(), 0.0);
    }
}
