use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    apply_multiplier, divergence, dot3, gradient, norm3, sub3, BoxGrid, CVec3, Fft3,
    ScalarField, Vec3, VectorField3,
};
use crate::gmres::{gmres, GmresOptions, GmresStats};
use crate::potentials::{ElectricPotential, MagneticPotential};
use crate::sphere::{gauss_legendre, BoundaryDensity, SphereGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub k: f64,
    /// measurement sphere radius
    pub a: f64,
    pub r_d: f64,
}

impl PhysicsParams {
    pub fn validate(&self, grid: &BoxGrid) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::param("k", "wavenumber must be positive"));
        }
        if !(self.r_d > 0.0 && self.r_d < self.a) {
            return Err(Error::param("r_d", format!("need 0 < r_D < a, got r_D = {}, a = {}", self.r_d, self.a)));
        }
        if self.a > grid.half_width() + 1e-12 {
            return Err(Error::param("a", format!("sphere radius {} exceeds half width {}", self.a, grid.half_width())));
        }
        Ok(())
    }
}

/// Φ(x, y) = e^{ik|x−y|} / (4π|x−y|)
pub fn kernel(k: f64, x: Vec3, y: Vec3) -> Complex64 {
    let r = norm3(sub3(x, y));
    (I * (k * r)).exp() / (4.0 * PI * r)
}

/// ∇ₓΦ(x, y)
pub fn kernel_grad(k: f64, x: Vec3, y: Vec3) -> CVec3 {
    let d = sub3(x, y);
    let r = norm3(d);
    let phi = (I * (k * r)).exp() / (4.0 * PI * r);
    let f = phi * (I * k - 1.0 / r) / r;
    [f * d[0], f * d[1], f * d[2]]
}

/// Fourier transform of Φ cut off sharply at |x| = R, evaluated at |ξ| = t.
pub fn truncated_kernel_hat(k: f64, t: f64, radius: f64) -> Complex64 {
    let e = (I * (k * radius)).exp();
    if t < 1e-8 * k.max(1.0) {
        return (e * (1.0 - I * k * radius) - 1.0) / (k * k);
    }
    let den = t * t - k * k;
    if den.abs() < 1e-3 * k * k {
        // (1/t) ∫₀^R e^{ikr} sin(tr) dr by Gauss–Legendre
        let (x, w) = gauss_legendre(64);
        let s: Complex64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let r = 0.5 * radius * (xi + 1.0);
                (I * (k * r)).exp() * (t * r).sin() * (0.5 * radius * wi)
            })
            .sum();
        return s / t;
    }
    (1.0 + e * (I * k * (t * radius).sin() / t - (t * radius).cos())) / den
}

#[derive(Debug, Clone, PartialEq)]
pub enum IncidentField {
    PlaneWave { direction: Vec3 },
    /// Φ(·, y)
    PointSource { source: Vec3 },
    /// Σ_j w_j Φ(·, y_j) h(y_j)
    SingleLayer { sphere: SphereGrid, density: BoundaryDensity },
}

impl IncidentField {
    pub fn plane_wave(direction: Vec3) -> Result<Self> {
        if (norm3(direction) - 1.0).abs() > 1e-12 {
            return Err(Error::param("direction", "plane-wave direction must be a unit vector"));
        }
        Ok(Self::PlaneWave { direction })
    }

    pub fn point_source(source: Vec3) -> Self {
        Self::PointSource { source }
    }

    /// Value and gradient at x; point sources evaluate to 0 on top of the source.
    pub fn eval(&self, k: f64, x: Vec3) -> (Complex64, CVec3) {
        match self {
            Self::PlaneWave { direction: d } => {
                let v = (I * (k * dot3(x, *d))).exp();
                (v, [I * k * d[0] * v, I * k * d[1] * v, I * k * d[2] * v])
            }
            Self::PointSource { source } => {
                if norm3(sub3(x, *source)) < 1e-12 {
                    (ZERO, [ZERO; 3])
                } else {
                    (kernel(k, x, *source), kernel_grad(k, x, *source))
                }
            }
            Self::SingleLayer { sphere, density } => {
                let mut v = ZERO;
                let mut g = [ZERO; 3];
                for (j, (h, w)) in density.values().iter().zip(sphere.weights()).enumerate() {
                    let y = sphere.node(j);
                    if norm3(sub3(x, y)) < 1e-12 {
                        continue;
                    }
                    let c = h * w;
                    v += c * kernel(k, x, y);
                    let kg = kernel_grad(k, x, y);
                    (0..3).for_each(|i| g[i] += c * kg[i]);
                }
                (v, g)
            }
        }
    }

    pub fn sample(&self, grid: &BoxGrid, k: f64) -> (ScalarField, VectorField3) {
        let vals: Vec<(Complex64, CVec3)> = (0..grid.len()).into_par_iter().map(|i| self.eval(k, grid.node(i))).collect();
        let u = ScalarField::from_values(*grid, vals.iter().map(|p| p.0).collect()).expect("grid-sized");
        let comp = |c: usize| ScalarField::from_values(*grid, vals.iter().map(|p| p.1[c]).collect()).expect("grid-sized");
        (u, VectorField3::new([comp(0), comp(1), comp(2)]).expect("same grid"))
    }
}

/// Q_{A,q}u = i div(Au) + iA·∇u − (|A|² + q)u, all derivatives spectral.
pub fn apply_q(a: &MagneticPotential, q: &ElectricPotential, u: &ScalarField) -> Result<ScalarField> {
    let g = *u.grid();
    if a.grid() != &g || q.grid() != &g {
        return Err(Error::GridMismatch);
    }
    let af = a.field();
    let au = VectorField3::new([0, 1, 2].map(|c| af.component(c).mul(u).expect("same grid")))?;
    let div = divergence(&au);
    let grad = gradient(u);
    let adg = af.dot(&grad)?;
    let a2 = af.dot(af)?;
    let mut out = div.scale(I).add(&adg.scale(I))?;
    let c = a2.add(q.field())?;
    out = out.sub(&c.mul(u)?)?;
    Ok(out)
}

/// w ↦ ∫Φ(·, y)w(y)dy on the grid through the periodized truncated kernel.
pub fn volume_potential(f: &ScalarField, k: f64) -> Result<ScalarField> {
    let g = *f.grid();
    let r = f.support_radius(1e-14 * f.sup_norm());
    if 2.0 * r > g.half_width() {
        return Err(Error::Support(format!(
            "density reaches |x| = {r:.3}; the truncated kernel needs 2r <= L = {}",
            g.half_width()
        )));
    }
    let radius = g.half_width();
    Ok(apply_multiplier(f, |xi| truncated_kernel_hat(k, norm3(xi), radius)))
}

/// Direct quadrature h³ Σ Φ(x, y_j) f_j at arbitrary points; a node on top of x is skipped.
pub fn volume_potential_at(f: &ScalarField, k: f64, points: &[Vec3]) -> Vec<Complex64> {
    let g = *f.grid();
    let idx: Vec<usize> = (0..g.len()).filter(|&i| f.values()[i] != ZERO).collect();
    let h3 = g.cell_volume();
    points
        .par_iter()
        .map(|&x| {
            idx.iter()
                .filter_map(|&i| {
                    let y = g.node(i);
                    (norm3(sub3(x, y)) > 1e-12).then(|| kernel(k, x, y) * f.values()[i])
                })
                .sum::<Complex64>()
                * h3
        })
        .collect()
}

/// Equivalent sources of one solve: u^s(z) = h³ Σ [Φ(z, x_j)α_j + ∇ₓΦ(x_j, z)·β_j].
#[derive(Debug, Clone)]
pub struct Sources {
    k: f64,
    cell_volume: f64,
    nodes: Arc<Vec<Vec3>>,
    alpha: Vec<Complex64>,
    beta: Vec<CVec3>,
}

impl Sources {
    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }
    pub fn beta(&self) -> &[CVec3] {
        &self.beta
    }
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn scattered_at(&self, z: Vec3) -> Complex64 {
        let mut s = ZERO;
        for ((x, al), be) in self.nodes.iter().zip(&self.alpha).zip(&self.beta) {
            let d = sub3(*x, z);
            let r = norm3(d);
            let phi = (I * (self.k * r)).exp() / (4.0 * PI * r);
            let f = phi * (I * self.k - 1.0 / r) / r;
            s += phi * al + f * (d[0] * be[0] + d[1] * be[1] + d[2] * be[2]);
        }
        s * self.cell_volume
    }

    /// u^∞(x̂) = (1/4π) h³ Σ e^{−ikx̂·x_j}(α_j − ik x̂·β_j)
    pub fn far_field(&self, xhat: Vec3) -> Complex64 {
        let mut s = ZERO;
        for ((x, al), be) in self.nodes.iter().zip(&self.alpha).zip(&self.beta) {
            let e = (-I * (self.k * dot3(xhat, *x))).exp();
            let xb = xhat[0] * be[0] + xhat[1] * be[1] + xhat[2] * be[2];
            s += e * (al - I * self.k * xb);
        }
        s * self.cell_volume / (4.0 * PI)
    }
}

#[derive(Debug, Clone)]
pub struct TotalField {
    pub u: ScalarField,
    /// analytic incident gradient plus the spectral gradient of the scattered part
    pub gradient: VectorField3,
    /// Q_{A,q}u, the density of the volume potential
    pub density: ScalarField,
    pub sources: Sources,
    pub stats: GmresStats,
}

impl TotalField {
    pub fn scattered(&self) -> &Sources {
        &self.sources
    }
}

/// Discretized Lippmann–Schwinger operator for one (A, q, k).
#[derive(Debug)]
pub struct ScatteringProblem {
    grid: BoxGrid,
    k: f64,
    support: f64,
    amag: Option<[Vec<Complex64>; 3]>,
    c: Vec<Complex64>,
    active: Vec<usize>,
    nodes: Arc<Vec<Vec3>>,
    table: Vec<Complex64>,
    dmul: [Vec<Complex64>; 3],
    fft: Arc<Fft3>,
    opts: GmresOptions,
}

impl ScatteringProblem {
    pub fn new(
        params: &PhysicsParams,
        a: &MagneticPotential,
        q: &ElectricPotential,
        opts: GmresOptions,
    ) -> Result<Self> {
        let grid = *a.grid();
        if q.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        params.validate(&grid)?;
        let support = a.support_radius().max(q.support_radius());
        if support >= params.a {
            return Err(Error::Support(format!(
                "potential support {support} must lie inside the sphere a = {}",
                params.a
            )));
        }
        if 2.0 * support > grid.half_width() {
            return Err(Error::Support(format!(
                "support diameter {} exceeds the kernel truncation radius {}",
                2.0 * support,
                grid.half_width()
            )));
        }
        let n3 = grid.len();
        let inside: Vec<bool> = (0..n3).map(|i| norm3(grid.node(i)) <= support).collect();
        let mask = |v: Complex64, i: usize| if inside[i] { Complex64::new(v.re, 0.0) } else { ZERO };
        let amag = if a.is_zero() {
            None
        } else {
            Some([0, 1, 2].map(|c| {
                a.field()
                    .component(c)
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| mask(v, i))
                    .collect::<Vec<_>>()
            }))
        };
        let c: Vec<Complex64> = (0..n3)
            .map(|i| {
                if !inside[i] {
                    return ZERO;
                }
                let a2 = amag.as_ref().map_or(0.0, |am| am.iter().map(|ac| ac[i].re * ac[i].re).sum());
                q.field().values()[i] + a2
            })
            .collect();
        let active: Vec<usize> = (0..n3)
            .filter(|&i| c[i] != ZERO || amag.as_ref().is_some_and(|am| am.iter().any(|ac| ac[i] != ZERO)))
            .collect();
        let nodes = Arc::new(active.iter().map(|&i| grid.node(i)).collect());
        let radius = grid.half_width();
        let table = (0..n3)
            .map(|i| {
                if grid.touches_nyquist(i) {
                    ZERO
                } else {
                    truncated_kernel_hat(params.k, norm3(grid.frequency(i)), radius)
                }
            })
            .collect();
        let dmul = [0, 1, 2].map(|c| {
            (0..n3)
                .map(|i| {
                    if grid.touches_nyquist(i) {
                        ZERO
                    } else {
                        Complex64::new(0.0, -grid.frequency(i)[c])
                    }
                })
                .collect()
        });
        Ok(Self {
            grid,
            k: params.k,
            support,
            amag,
            c,
            active,
            nodes,
            table,
            dmul,
            fft: Fft3::for_size(grid.n()),
            opts,
        })
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn support_radius(&self) -> f64 {
        self.support
    }
    pub fn active(&self) -> &[usize] {
        &self.active
    }
    pub fn active_nodes(&self) -> &[Vec3] {
        &self.nodes
    }
    pub fn options(&self) -> &GmresOptions {
        &self.opts
    }
    pub fn is_trivial(&self) -> bool {
        self.active.is_empty()
    }

    /// Masked A on the grid, `None` when A vanishes.
    pub(crate) fn magnetic_coefficients(&self) -> Option<&[Vec<Complex64>; 3]> {
        self.amag.as_ref()
    }

    /// Masked |A|² + q on the grid.
    pub(crate) fn c_coefficients(&self) -> &[Complex64] {
        &self.c
    }

    /// (Gf) = (Vf, DVf)
    fn potential_pair(&self, f: &[Complex64]) -> (Vec<Complex64>, Option<[Vec<Complex64>; 3]>) {
        let mut fh = f.to_vec();
        self.fft.plus(&mut fh);
        fh.iter_mut().zip(&self.table).for_each(|(v, t)| *v *= t);
        let grads = self.amag.as_ref().map(|_| {
            [0, 1, 2].map(|c| {
                let mut g: Vec<Complex64> = fh.iter().zip(&self.dmul[c]).map(|(v, m)| v * m).collect();
                self.fft.minus(&mut g);
                g
            })
        });
        self.fft.minus(&mut fh);
        (fh, grads)
    }

    /// Q_A applied to a pair (u, g) given on the full grid.
    fn q_pair(&self, u: &[Complex64], g: Option<&[Vec<Complex64>; 3]>, out: &mut [Complex64]) {
        out.iter_mut().zip(u.iter().zip(&self.c)).for_each(|(o, (uv, cv))| *o = -cv * uv);
        if let (Some(am), Some(g)) = (&self.amag, g) {
            let mut acc = vec![ZERO; self.grid.len()];
            for c in 0..3 {
                let mut w: Vec<Complex64> = am[c].iter().zip(u).map(|(a, v)| a * v).collect();
                self.fft.plus(&mut w);
                acc.iter_mut().zip(w.iter().zip(&self.dmul[c])).for_each(|(s, (wv, m))| *s += wv * m);
                out.iter_mut()
                    .zip(am[c].iter().zip(&g[c]))
                    .for_each(|(o, (a, gv))| *o += I * a * gv);
            }
            self.fft.minus(&mut acc);
            out.iter_mut().zip(&acc).for_each(|(o, d)| *o += I * d);
        }
    }

    fn incident_on_active(&self, inc: &IncidentField) -> Vec<(Complex64, CVec3)> {
        self.nodes.par_iter().map(|&x| inc.eval(self.k, x)).collect()
    }

    fn scatter_active(&self, vals: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.grid.len()];
        for (&i, v) in self.active.iter().zip(vals) {
            out[i] = v;
        }
        out
    }

    /// Solve f − Q_A G f = Q_A(v, ∇v) for the density f = Q_{A,q}u.
    fn solve_density(&self, inc_act: &[(Complex64, CVec3)]) -> Result<(Vec<Complex64>, GmresStats)> {
        let n3 = self.grid.len();
        let v = self.scatter_active(inc_act.iter().map(|p| p.0));
        let gv = self.amag.as_ref().map(|_| [0, 1, 2].map(|c| self.scatter_active(inc_act.iter().map(|p| p.1[c]))));
        let mut b = vec![ZERO; n3];
        self.q_pair(&v, gv.as_ref(), &mut b);
        let op = |x: &[Complex64], out: &mut [Complex64]| {
            let (u, g) = self.potential_pair(x);
            self.q_pair(&u, g.as_ref(), out);
            out.iter_mut().zip(x).for_each(|(o, xv)| *o = xv - *o);
        };
        gmres(op, &b, &self.opts)
    }

    fn sources_from(&self, inc_act: &[(Complex64, CVec3)], us: &[Complex64], gs: Option<&[Vec<Complex64>; 3]>) -> Sources {
        let mut alpha = Vec::with_capacity(self.active.len());
        let mut beta = Vec::with_capacity(self.active.len());
        for (j, &i) in self.active.iter().enumerate() {
            let u = inc_act[j].0 + us[i];
            let mut al = -self.c[i] * u;
            let mut be = [ZERO; 3];
            if let (Some(am), Some(gs)) = (&self.amag, gs) {
                for c in 0..3 {
                    let g = inc_act[j].1[c] + gs[c][i];
                    al += I * am[c][i] * g;
                    be[c] = -I * am[c][i] * u;
                }
            }
            alpha.push(al);
            beta.push(be);
        }
        Sources {
            k: self.k,
            cell_volume: self.grid.cell_volume(),
            nodes: self.nodes.clone(),
            alpha,
            beta,
        }
    }

    /// Equivalent sources only; the cheap path used for data assembly.
    pub fn solve_sources(&self, inc: &IncidentField) -> Result<(Sources, GmresStats)> {
        let inc_act = self.incident_on_active(inc);
        let (f, stats) = self.solve_density(&inc_act)?;
        let (us, gs) = self.potential_pair(&f);
        Ok((self.sources_from(&inc_act, &us, gs.as_ref()), stats))
    }

    /// The full total field on the grid.
    pub fn solve(&self, inc: &IncidentField) -> Result<TotalField> {
        let inc_act = self.incident_on_active(inc);
        let (f, stats) = self.solve_density(&inc_act)?;
        Ok(self.assemble_total(inc, &inc_act, f, stats))
    }

    /// First Born iterate u ≈ v + G Q_A(v, ∇v).
    pub fn born_iterate(&self, inc: &IncidentField) -> TotalField {
        let inc_act = self.incident_on_active(inc);
        let v = self.scatter_active(inc_act.iter().map(|p| p.0));
        let gv = self.amag.as_ref().map(|_| [0, 1, 2].map(|c| self.scatter_active(inc_act.iter().map(|p| p.1[c]))));
        let mut f = vec![ZERO; self.grid.len()];
        self.q_pair(&v, gv.as_ref(), &mut f);
        let stats = GmresStats {
            iterations: 0,
            residual: f64::NAN,
        };
        self.assemble_total(inc, &inc_act, f, stats)
    }

    fn assemble_total(&self, inc: &IncidentField, inc_act: &[(Complex64, CVec3)], f: Vec<Complex64>, stats: GmresStats) -> TotalField {
        let g = self.grid;
        let (us, _) = self.potential_pair(&f);
        let density = ScalarField::from_values(g, f).expect("grid-sized");
        let us_field = ScalarField::from_values(g, us).expect("grid-sized");
        let gs_field = gradient(&us_field);
        let gs: [Vec<Complex64>; 3] = [0, 1, 2].map(|c| gs_field.component(c).values().to_vec());
        let sources = self.sources_from(inc_act, us_field.values(), self.amag.as_ref().map(|_| &gs));
        let (v, gv) = inc.sample(&g, self.k);
        TotalField {
            u: v.add(&us_field).expect("same grid"),
            gradient: gv.add(&gs_field).expect("same grid"),
            density,
            sources,
            stats,
        }
    }

    /// Check that evaluation points stay off the potential support.
    pub fn check_exterior(&self, points: &[Vec3]) -> Result<()> {
        for p in points {
            if norm3(*p) <= self.support {
                return Err(Error::Support(format!(
                    "evaluation point at |x| = {:.4} inside the support radius {}",
                    norm3(*p),
                    self.support
                )));
            }
        }
        Ok(())
    }
}

/// Solve (I − T_{A,q})u = v.
pub fn solve_total_field(
    params: &PhysicsParams,
    a: &MagneticPotential,
    q: &ElectricPotential,
    v: &IncidentField,
    tol: f64,
) -> Result<TotalField> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let opts = GmresOptions {
        tol,
        ..GmresOptions::default()
    };
    ScatteringProblem::new(params, a, q, opts)?.solve(v)
}

pub fn scattered_field_at(problem: &ScatteringProblem, u: &TotalField, points: &[Vec3]) -> Result<Vec<Complex64>> {
    problem.check_exterior(points)?;
    Ok(points.par_iter().map(|&p| u.sources.scattered_at(p)).collect())
}

pub fn far_field(u: &TotalField, directions: &[Vec3]) -> Result<Vec<Complex64>> {
    for d in directions {
        if (norm3(*d) - 1.0).abs() > 1e-10 {
            return Err(Error::param("directions", "far-field directions must be unit vectors"));
        }
    }
    Ok(directions.par_iter().map(|&d| u.sources.far_field(d)).collect())
}
