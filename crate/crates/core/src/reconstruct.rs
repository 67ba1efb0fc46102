//! Fourier estimates of curl(A₂ − A₁) and q₂ − q₁ from near-field data via
//! CGO probes, low-pass synthesis and stability sweeps.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{data_functional, near_op_norm, NearFieldMatrix};
use crate::cgo::{boundary_densities, build_frame, build_probe, generic_frame, CGOProbe, DirectionFrame, ProbeKind, ProbeOptions};
use crate::error::{Error, Result};
use crate::field::{curl, dft_inverse, dot3, fourier_at, japanese, norm3, BoxGrid, CVec3, ScalarField, SpectralField, Vec3, VectorField3};
use crate::potentials::{gauge_transform, smooth_cutoff, HelmholtzDecomposition, MagneticPotential};
use crate::spherical::{f_norm, FarFieldCoefficients, FarFieldData};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coordinate pairs (j, ℓ) carrying (curl A)₃, −(curl A)₂, (curl A)₁.
pub const CURL_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub s: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// overrides s^{1/(σ+3)}
    pub cutoff_mag: Option<f64>,
    /// overrides s^{1/(γ+2)}
    pub cutoff_elec: Option<f64>,
    /// radius where the gauge cutoff χ equals 1; 0.85a when absent
    pub bprime_radius: Option<f64>,
    pub probe_kind: ProbeKind,
    pub s_min: f64,
    pub transport_tol: f64,
    /// harmonic degree for the exterior extension; half the sphere's exact degree when absent
    pub l_max: Option<usize>,
    pub tail_tol: f64,
    /// subtract (ρ₂ − ρ₁)·Ĥ(ξ) from the q data using the curl estimate
    pub q_magnetic_correction: bool,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            s: 8.0,
            sigma: 1.0,
            gamma: 1.0,
            cutoff_mag: None,
            cutoff_elec: None,
            bprime_radius: None,
            probe_kind: ProbeKind::HelmholtzCorrected,
            s_min: 2.0,
            transport_tol: 1e-6,
            l_max: None,
            tail_tol: 0.25,
            q_magnetic_correction: false,
        }
    }
}

impl ReconstructionConfig {
    pub fn cutoff_magnetic(&self) -> f64 {
        self.cutoff_mag.unwrap_or_else(|| self.s.powf(1.0 / (self.sigma + 3.0)))
    }
    pub fn cutoff_electric(&self) -> f64 {
        self.cutoff_elec.unwrap_or_else(|| self.s.powf(1.0 / (self.gamma + 2.0)))
    }
    /// κ = (2γ+3)(σ+3)/(σ(γ+2))
    pub fn kappa(&self) -> f64 {
        (2.0 * self.gamma + 3.0) * (self.sigma + 3.0) / (self.sigma * (self.gamma + 2.0))
    }
    /// γσ/((σ+3)(2γ+3)), the log-exponent for q
    pub fn electric_exponent(&self) -> f64 {
        self.gamma * self.sigma / ((self.sigma + 3.0) * (2.0 * self.gamma + 3.0))
    }
    /// σ/(σ+3), the log-exponent for curl A
    pub fn magnetic_exponent(&self) -> f64 {
        self.sigma / (self.sigma + 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::param("s", "must be positive"));
        }
        if !(self.sigma > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::param("sigma/gamma", "must be positive"));
        }
        for (name, r) in [("cutoff_mag", self.cutoff_magnetic()), ("cutoff_elec", self.cutoff_electric())] {
            if !(r >= 0.0) || r > self.s / 2.0 {
                return Err(Error::param(name, format!("{r} must lie in [0, s/2] so that s ≥ 2|ξ|")));
            }
        }
        Ok(())
    }

    /// (r_in, r_out) of the gauge cutoff χ for a measurement sphere of radius a.
    pub fn gauge_radii(&self, a: f64) -> (f64, f64) {
        let r_in = self.bprime_radius.unwrap_or(0.85 * a);
        (r_in, 0.5 * (r_in + a))
    }

    fn probe_options(&self, k: f64) -> ProbeOptions {
        ProbeOptions {
            k,
            kind: self.probe_kind,
            s_min: self.s_min,
            transport_tol: self.transport_tol,
        }
    }
}

/// Data and probe potentials for one (1, 2) pair.
///
/// `a1`, `a2` enter only through the transport phases; pass zero fields to
/// build phase-free probes.
#[derive(Debug, Clone, Copy)]
pub struct ProbeContext<'a> {
    pub n1: &'a NearFieldMatrix,
    pub n2: &'a NearFieldMatrix,
    pub a1: &'a MagneticPotential,
    pub a2: &'a MagneticPotential,
}

impl ProbeContext<'_> {
    fn grid(&self) -> &BoxGrid {
        self.a1.grid()
    }
    fn l_max(&self, cfg: &ReconstructionConfig) -> usize {
        cfg.l_max.unwrap_or(self.n1.sphere().exact_degree() / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    /// D(f₁, f₂)/(2s)
    pub value: Complex64,
    pub density_norms: [f64; 2],
    pub tails: [f64; 2],
}

impl MomentEstimate {
    /// |ΔD|/(2s) for a data perturbation of operator norm δ.
    pub fn noise_bound(&self, delta: f64, s: f64) -> f64 {
        delta * self.density_norms[0] * self.density_norms[1] / (2.0 * s)
    }
}

fn probe_data(ctx: &ProbeContext, probe: &CGOProbe, l_max: usize, tail_tol: f64) -> Result<(Complex64, [f64; 2], [f64; 2])> {
    let sphere = ctx.n1.sphere();
    let d = boundary_densities(probe, sphere, ctx.n1.k(), l_max, tail_tol)?;
    let v = data_functional(ctx.n1, ctx.n2, &d.f1, &d.f2)?;
    Ok((v, d.norms, d.tails))
}

/// D(f₁, f₂)/(2s) ≈ ∫ conj(ω)·(A₂ − A₁) e^{ix·ξ}dx.
pub fn estimate_omega_moment(n1: &NearFieldMatrix, n2: &NearFieldMatrix, probe: &CGOProbe, l_max: usize, tail_tol: f64) -> Result<MomentEstimate> {
    let sphere = n1.sphere();
    let d = boundary_densities(probe, sphere, n1.k(), l_max, tail_tol)?;
    let v = data_functional(n1, n2, &d.f1, &d.f2)?;
    Ok(MomentEstimate {
        value: v / (2.0 * probe.s),
        density_norms: d.norms,
        tails: d.tails,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhatEstimate {
    pub xi: Vec3,
    pub j: usize,
    pub l: usize,
    /// estimate of ∫e^{ix·ξ}(ξ_j a_ℓ − ξ_ℓ a_j)dx with a = A₂ − A₁
    pub moment: Complex64,
    /// b̂_{jℓ}(ξ) = −i·moment
    pub bhat: Complex64,
    /// ξ_j = ξ_ℓ = 0: the moment vanishes identically and is set to zero
    pub degenerate: bool,
    /// max over the two runs of ‖f₁‖‖f₂‖
    pub density_scale: f64,
    pub max_tail: f64,
}

/// Two runs with ±ω₁: M± = D±/(2s), then ω₂·â = i(M₊ + M₋)/2 scaled by |ξ_j e_ℓ − ξ_ℓ e_j|.
pub fn estimate_bhat(ctx: &ProbeContext, xi: Vec3, j: usize, l: usize, cfg: &ReconstructionConfig) -> Result<BhatEstimate> {
    let frame = match build_frame(xi, j, l) {
        Ok(f) => f,
        Err(Error::DegenerateFrame { .. }) => {
            return Ok(BhatEstimate {
                xi,
                j,
                l,
                moment: ZERO,
                bhat: ZERO,
                degenerate: true,
                density_scale: 0.0,
                max_tail: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    let opts = cfg.probe_options(ctx.n1.k());
    let l_max = ctx.l_max(cfg);
    let mut m = [ZERO; 2];
    let mut scale: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for (k, f) in [frame, frame.flipped()].iter().enumerate() {
        let probe = build_probe(ctx.a1, ctx.a2, f, cfg.s, &opts)?;
        let (d, norms, tails) = probe_data(ctx, &probe, l_max, cfg.tail_tol)?;
        m[k] = d / (2.0 * cfg.s);
        scale = scale.max(norms[0] * norms[1]);
        tail = tail.max(tails[0]).max(tails[1]);
    }
    let w = (xi[j] * xi[j] + xi[l] * xi[l]).sqrt();
    let moment = I * (m[0] + m[1]) * 0.5 * w;
    Ok(BhatEstimate {
        xi,
        j,
        l,
        moment,
        bhat: -I * moment,
        degenerate: false,
        density_scale: scale,
        max_tail: tail,
    })
}

/// Point of the dual lattice (π/L)ℤ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub index: [i64; 3],
    pub xi: Vec3,
}

/// Dual-lattice points with |ξ| ≤ radius.
pub fn xi_lattice(grid: &BoxGrid, radius: f64) -> Result<Vec<LatticePoint>> {
    let d = grid.dual_spacing();
    let half = (grid.n() / 2) as i64;
    let m = (radius / d).floor() as i64;
    if m >= half {
        return Err(Error::Lattice(format!(
            "cutoff {radius} reaches the Nyquist band {}",
            half as f64 * d
        )));
    }
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                let xi = [a as f64 * d, b as f64 * d, c as f64 * d];
                if norm3(xi) <= radius * (1.0 + 1e-12) {
                    out.push(LatticePoint { index: [a, b, c], xi });
                }
            }
        }
    }
    Ok(out)
}

fn is_canonical(m: [i64; 3]) -> bool {
    m > [0, 0, 0] || m == [0, 0, 0]
}

fn negate(m: [i64; 3]) -> [i64; 3] {
    m.map(|v| -v)
}

/// Per-ξ values for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierEstimate {
    pub target: Target,
    pub points: Vec<LatticePoint>,
    pub values: Vec<Complex64>,
    /// δ·‖f₁‖‖f₂‖/(2s) with δ = ‖𝒩₁ − 𝒩₂‖: the data-size scale of each value
    pub noise_scale: Vec<f64>,
    pub degenerate: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Target {
    CurlComponent { j: usize, l: usize },
    Q,
}

impl FourierEstimate {
    /// max |value(−ξ) − conj(value(ξ))| over points whose mirror is present.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, v) in self.points.iter().zip(&self.values) {
            if let Some(k) = self.points.iter().position(|q| q.index == negate(p.index)) {
                worst = worst.max((self.values[k] - v.conj()).norm());
            }
        }
        worst
    }

    /// Low-pass synthesis (1/(2L)³) Σ_ξ value(ξ) e^{−ix·ξ} on the grid.
    pub fn synthesize(&self, grid: &BoxGrid) -> Result<ScalarField> {
        let mut spec = SpectralField::zeros(*grid);
        for (p, v) in self.points.iter().zip(&self.values) {
            let slot = |m: i64| grid.slot(m).ok_or_else(|| Error::Lattice(format!("index {m} outside the grid")));
            let idx = grid.index(slot(p.index[0])?, slot(p.index[1])?, slot(p.index[2])?);
            spec.modes_mut()[idx] = *v;
        }
        Ok(dft_inverse(&spec))
    }

    pub fn errors_against(&self, truth: &[Complex64]) -> Vec<f64> {
        self.values.iter().zip(truth).map(|(v, t)| (v - t).norm()).collect()
    }
}

/// c⟨ξ⟩(e^{Λs}δ + ⟨ξ⟩/s)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub c: f64,
    pub lambda: f64,
}

impl ErrorModel {
    pub fn bound(&self, xi: Vec3, s: f64, delta: f64) -> f64 {
        let j = japanese(xi);
        self.c * j * ((self.lambda * s).exp() * delta + j / s)
    }

    /// Λ from the probe growth ‖f₁‖‖f₂‖ ≈ e^{Λs}, c as the smallest constant
    /// covering every observed error.
    pub fn fit(samples: &[ErrorSample]) -> Self {
        let lambda = samples
            .iter()
            .filter(|p| p.density_scale > 0.0)
            .map(|p| p.density_scale.ln().max(0.0) / p.s)
            .fold(0.0, f64::max);
        let base = Self { c: 1.0, lambda };
        let c = samples
            .iter()
            .map(|p| p.error / base.bound(p.xi, p.s, p.delta))
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        Self { c, lambda }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub xi: Vec3,
    pub s: f64,
    pub delta: f64,
    pub density_scale: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct CurlReconstruction {
    /// low-pass estimate of curl(A₂ − A₁)
    pub field: VectorField3,
    /// per (j, ℓ) in `CURL_PAIRS`
    pub estimates: Vec<FourierEstimate>,
    pub cutoff: f64,
    pub delta: f64,
    /// log(max ‖f₁‖‖f₂‖)/s over the lattice
    pub lambda: f64,
    /// e^{Λs}δ + s^{−σ/(σ+3)}, the shape of the sup-norm bound (constant 1)
    pub bound_shape: f64,
    pub max_tail: f64,
}

impl CurlReconstruction {
    pub fn relative_linf_error(&self, truth: &VectorField3) -> Result<f64> {
        let t = truth.sup_norm();
        let e = self.field.sub(truth)?.sup_norm();
        Ok(if t == 0.0 { e } else { e / t })
    }
}

fn check_lattice_support(ctx: &ProbeContext) -> Result<()> {
    let l = ctx.grid().half_width();
    let r = ctx.a1.support_radius().max(ctx.a2.support_radius());
    if r >= l {
        return Err(Error::Lattice(format!("support radius {r} not inside the synthesis box {l}")));
    }
    Ok(())
}

/// curl(A₂ − A₁) from b̂_{jℓ} on the dual lattice inside |ξ| ≤ s^{1/(σ+3)}.
pub fn reconstruct_curl(ctx: &ProbeContext, cfg: &ReconstructionConfig) -> Result<CurlReconstruction> {
    cfg.validate()?;
    check_lattice_support(ctx)?;
    let grid = *ctx.grid();
    let cutoff = cfg.cutoff_magnetic();
    let points = xi_lattice(&grid, cutoff)?;
    let delta = near_op_norm(ctx.n1, ctx.n2)?;
    let half: Vec<LatticePoint> = points.iter().copied().filter(|p| is_canonical(p.index)).collect();
    let jobs: Vec<(usize, LatticePoint)> = (0..3).flat_map(|c| half.iter().map(move |p| (c, *p))).collect();
    let results: Vec<Result<BhatEstimate>> = jobs
        .par_iter()
        .map(|&(c, p)| {
            let (j, l) = CURL_PAIRS[c];
            estimate_bhat(ctx, p.xi, j, l, cfg)
        })
        .collect();
    let mut estimates = Vec::with_capacity(3);
    let mut scale: f64 = 0.0;
    let mut max_tail: f64 = 0.0;
    let mut it = results.into_iter();
    for &(j, l) in &CURL_PAIRS {
        let mut est = FourierEstimate {
            target: Target::CurlComponent { j, l },
            points: Vec::new(),
            values: Vec::new(),
            noise_scale: Vec::new(),
            degenerate: Vec::new(),
        };
        for p in &half {
            let b = it.next().expect("one result per job")?;
            scale = scale.max(b.density_scale);
            max_tail = max_tail.max(b.max_tail);
            let ns = delta * b.density_scale / (2.0 * cfg.s);
            est.points.push(*p);
            est.values.push(b.bhat);
            est.noise_scale.push(ns);
            est.degenerate.push(b.degenerate);
            if p.index != [0, 0, 0] {
                est.points.push(LatticePoint {
                    index: negate(p.index),
                    xi: p.xi.map(|v| -v),
                });
                est.values.push(b.bhat.conj());
                est.noise_scale.push(ns);
                est.degenerate.push(b.degenerate);
            }
        }
        estimates.push(est);
    }
    let b: Vec<ScalarField> = estimates.iter().map(|e| e.synthesize(&grid)).collect::<Result<_>>()?;
    let real = |f: &ScalarField| f.map(|v| Complex64::new(v.re, 0.0));
    // (curl)₁ = b₂₃, (curl)₂ = −b₁₃, (curl)₃ = b₁₂
    let field = VectorField3::new([real(&b[2]), real(&b[1]).scale(Complex64::new(-1.0, 0.0)), real(&b[0])])?;
    let lambda = if scale > 1.0 { scale.ln() / cfg.s } else { 0.0 };
    let bound_shape = (lambda * cfg.s).exp() * delta + cfg.s.powf(-cfg.magnetic_exponent());
    Ok(CurlReconstruction {
        field,
        estimates,
        cutoff,
        delta,
        lambda,
        bound_shape,
        max_tail,
    })
}

/// b̂(ξ) of a sampled field, by direct quadrature.
pub fn curl_moments_truth(b: &VectorField3, points: &[LatticePoint], j: usize, l: usize) -> Vec<Complex64> {
    // b_{jℓ} = ε_{jℓm}(curl)_m
    let (m, sign) = match (j, l) {
        (0, 1) => (2, 1.0),
        (0, 2) => (1, -1.0),
        (1, 2) => (0, 1.0),
        (1, 0) => (2, -1.0),
        (2, 0) => (1, 1.0),
        _ => (0, -1.0),
    };
    points.iter().map(|p| fourier_at(b.component(m), p.xi) * sign).collect()
}

/// φ = χϑ with χ = 1 on |x| ≤ r_in and 0 beyond r_out.
pub fn gauge_phase(decomp: &HelmholtzDecomposition, r_in: f64, r_out: f64) -> ScalarField {
    let theta = decomp.theta();
    let g = *theta.grid();
    let vals = (0..g.len())
        .map(|i| theta.values()[i] * smooth_cutoff(norm3(g.node(i)), r_in, r_out))
        .collect();
    ScalarField::from_values(g, vals).expect("grid-sized")
}

/// Gauge-corrected probe potentials (A₁ + ∇φ/2, A₂ − ∇φ/2); the near-field data is unchanged.
pub fn gauge_split(a1: &MagneticPotential, a2: &MagneticPotential, phi: &ScalarField, outer_radius: f64) -> Result<(MagneticPotential, MagneticPotential)> {
    let half = phi.scale(Complex64::new(0.5, 0.0));
    let minus = phi.scale(Complex64::new(-0.5, 0.0));
    Ok((gauge_transform(a1, &half, outer_radius)?, gauge_transform(a2, &minus, outer_radius)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEstimate {
    pub xi: Vec3,
    pub value: Complex64,
    /// (ρ₂ − ρ₁)·Ĥ(ξ) subtracted from the data (zero without correction)
    pub magnetic_term: Complex64,
    pub density_scale: f64,
    pub max_tail: f64,
}

/// Transverse Coulomb-gauge potential at ξ from a curl field: −iξ × B̂/|ξ|².
pub fn coulomb_potential_hat(curl_field: &VectorField3, xi: Vec3) -> CVec3 {
    let x2 = dot3(xi, xi);
    if x2 == 0.0 {
        return [ZERO; 3];
    }
    let b = [0, 1, 2].map(|c| fourier_at(curl_field.component(c), xi));
    let cr = [
        xi[1] * b[2] - xi[2] * b[1],
        xi[2] * b[0] - xi[0] * b[2],
        xi[0] * b[1] - xi[1] * b[0],
    ];
    cr.map(|v| -I * v / x2)
}

/// q̂₂ − q̂₁ at ξ from one probe pair, D ≈ (ρ₂ − ρ₁)·Â(ξ) + q̂(ξ).
///
/// `gauge` replaces the probe potentials by their gauge-corrected split;
/// `curl_estimate` feeds the optional magnetic correction.
pub fn estimate_qhat(
    ctx: &ProbeContext,
    xi: Vec3,
    cfg: &ReconstructionConfig,
    gauge: Option<&ScalarField>,
    curl_estimate: Option<&VectorField3>,
) -> Result<QEstimate> {
    let frame: DirectionFrame = generic_frame(xi);
    let opts = cfg.probe_options(ctx.n1.k());
    let probe = match gauge {
        Some(phi) => {
            let (b1, b2) = gauge_split(ctx.a1, ctx.a2, phi, ctx.n1.sphere().radius())?;
            build_probe(&b1, &b2, &frame, cfg.s, &opts)?
        }
        None => build_probe(ctx.a1, ctx.a2, &frame, cfg.s, &opts)?,
    };
    let (d, norms, tails) = probe_data(ctx, &probe, ctx.l_max(cfg), cfg.tail_tol)?;
    let magnetic_term = match (cfg.q_magnetic_correction, curl_estimate) {
        (true, Some(b)) => {
            let h = coulomb_potential_hat(b, xi);
            (0..3).map(|c| (probe.rho2_probe[c] - probe.rho1_probe[c]) * h[c]).sum()
        }
        _ => ZERO,
    };
    Ok(QEstimate {
        xi,
        value: d - magnetic_term,
        magnetic_term,
        density_scale: norms[0] * norms[1],
        max_tail: tails[0].max(tails[1]),
    })
}

#[derive(Debug, Clone)]
pub struct QReconstruction {
    pub field: ScalarField,
    pub estimate: FourierEstimate,
    pub cutoff: f64,
    pub delta: f64,
    pub lambda: f64,
    /// γσ/((σ+3)(2γ+3)) echoed for sweeps
    pub composite_exponent: f64,
    pub kappa: f64,
    pub max_tail: f64,
}

impl QReconstruction {
    pub fn relative_linf_error(&self, truth: &ScalarField) -> Result<f64> {
        let t = truth.sup_norm();
        let e = self.field.sub(truth)?.sup_norm();
        Ok(if t == 0.0 { e } else { e / t })
    }
}

/// q₂ − q₁ from q̂ on the dual lattice inside |ξ| ≤ s^{1/(γ+2)}.
pub fn reconstruct_q(
    ctx: &ProbeContext,
    cfg: &ReconstructionConfig,
    gauge: Option<&ScalarField>,
    curl_estimate: Option<&VectorField3>,
) -> Result<QReconstruction> {
    cfg.validate()?;
    check_lattice_support(ctx)?;
    let grid = *ctx.grid();
    let cutoff = cfg.cutoff_electric();
    let points = xi_lattice(&grid, cutoff)?;
    let delta = near_op_norm(ctx.n1, ctx.n2)?;
    let res: Vec<QEstimate> = points
        .par_iter()
        .map(|p| estimate_qhat(ctx, p.xi, cfg, gauge, curl_estimate))
        .collect::<Result<_>>()?;
    let scale = res.iter().map(|r| r.density_scale).fold(0.0, f64::max);
    let estimate = FourierEstimate {
        target: Target::Q,
        values: res.iter().map(|r| r.value).collect(),
        noise_scale: res.iter().map(|r| delta * r.density_scale).collect(),
        degenerate: vec![false; points.len()],
        points,
    };
    Ok(QReconstruction {
        field: estimate.synthesize(&grid)?,
        estimate,
        cutoff,
        delta,
        lambda: if scale > 1.0 { scale.ln() / cfg.s } else { 0.0 },
        composite_exponent: cfg.electric_exponent(),
        kappa: cfg.kappa(),
        max_tail: res.iter().map(|r| r.max_tail).fold(0.0, f64::max),
    })
}

/// N + E with E complex white noise scaled so that ‖E‖ (weighted operator norm) = δ.
pub fn add_noise(n: &NearFieldMatrix, delta: f64, seed: u64) -> Result<NearFieldMatrix> {
    if !(delta >= 0.0) {
        return Err(Error::param("delta", "must be non-negative"));
    }
    if delta == 0.0 {
        return Ok(n.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = NearFieldMatrix::zeros(n.sphere().clone(), n.k());
    for v in e.entries_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v = Complex64::new(re, im);
    }
    let zero = NearFieldMatrix::zeros(n.sphere().clone(), n.k());
    let norm = near_op_norm(&e, &zero)?;
    let mut out = n.clone();
    for (o, v) in out.entries_mut().iter_mut().zip(e.entries()) {
        *o += v * (delta / norm);
    }
    Ok(out)
}

/// Ranks with ties averaged, 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut k = i;
        while k + 1 < idx.len() && v[idx[k + 1]] == v[idx[i]] {
            k += 1;
        }
        let avg = (i + k) as f64 / 2.0 + 1.0;
        for &p in &idx[i..=k] {
            r[p] = avg;
        }
        i = k + 1;
    }
    r
}

/// Spearman rank correlation; NaN for fewer than two points or constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    linear_fit(&ranks(x), &ranks(y)).correlation
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub correlation: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let correlation = sxy / (sxx * syy).sqrt();
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r2: correlation * correlation,
        correlation,
    }
}

/// One potential pair with its data and ground truth.
#[derive(Debug, Clone)]
pub struct SweepPair {
    pub id: String,
    pub n1: NearFieldMatrix,
    pub n2: NearFieldMatrix,
    pub a1: MagneticPotential,
    pub a2: MagneticPotential,
    pub q_truth: ScalarField,
    pub far1: Option<FarFieldCoefficients>,
    pub far2: Option<FarFieldCoefficients>,
    pub far_data: Option<(FarFieldData, FarFieldData)>,
}

impl SweepPair {
    pub fn curl_truth(&self) -> Result<VectorField3> {
        Ok(curl(self.a2.sub(&self.a1)?.field()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pair: String,
    pub noise: f64,
    pub near_distance: f64,
    pub f_distance: Option<f64>,
    pub l2_distance: Option<f64>,
    pub curl_error: Option<f64>,
    pub q_error: Option<f64>,
    /// curl error relative to ‖curl(A₂ − A₁)‖∞
    pub curl_relative: Option<f64>,
    pub q_relative: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// Spearman ρ between near distance and curl error
    pub spearman_curl: f64,
    pub spearman_q: f64,
    /// p in err ≈ C|log δ|^{−p}, fitted on rows with δ < 1
    pub curl_log_exponent: f64,
    pub q_log_exponent: f64,
    pub expected_curl_exponent: f64,
    pub expected_q_exponent: f64,
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
        let mut s = String::from("pair,noise,near_distance,f_distance,l2_distance,curl_error,curl_relative,q_error,q_relative,failure\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.6e},{:.12e},{},{},{},{},{},{},{}\n",
                r.pair,
                r.noise,
                r.near_distance,
                opt(r.f_distance),
                opt(r.l2_distance),
                opt(r.curl_error),
                opt(r.curl_relative),
                opt(r.q_error),
                opt(r.q_relative),
                r.failure.as_deref().unwrap_or("").replace(',', ";")
            ));
        }
        s
    }
}

fn log_exponent(delta: &[f64], err: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = delta
        .iter()
        .zip(err)
        .filter(|(d, e)| **d > 0.0 && **d < 1.0 && **e > 0.0)
        .map(|(d, e)| ((-d.ln()).ln(), e.ln()))
        .unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    -linear_fit(&x, &y).slope
}

/// Reconstruct every pair at every noise level; per-row failures are recorded.
pub fn stability_sweep(pairs: &[SweepPair], noise: &[f64], cfg: &ReconstructionConfig, seed: u64) -> Result<SweepSummary> {
    cfg.validate()?;
    let levels: Vec<f64> = if noise.is_empty() { vec![0.0] } else { noise.to_vec() };
    let mut rows = Vec::new();
    for (pi, p) in pairs.iter().enumerate() {
        let f_distance = match (&p.far1, &p.far2) {
            (Some(a), Some(b)) => Some(f_norm(&a.sub(b)?)),
            _ => None,
        };
        let l2_distance = match &p.far_data {
            Some((a, b)) => Some(a.sub(b)?.l2_norm()),
            None => None,
        };
        for (li, &level) in levels.iter().enumerate() {
            let row_seed = seed.wrapping_add((pi * levels.len() + li) as u64);
            let run = || -> Result<SweepRow> {
                let n2 = add_noise(&p.n2, level, row_seed)?;
                let ctx = ProbeContext {
                    n1: &p.n1,
                    n2: &n2,
                    a1: &p.a1,
                    a2: &p.a2,
                };
                let truth = p.curl_truth()?;
                let rc = reconstruct_curl(&ctx, cfg)?;
                let ce = rc.field.sub(&truth)?.sup_norm();
                let rq = reconstruct_q(&ctx, cfg, None, Some(&rc.field))?;
                let qe = rq.field.sub(&p.q_truth)?.sup_norm();
                let rel = |e: f64, t: f64| if t > 0.0 { e / t } else { e };
                Ok(SweepRow {
                    pair: p.id.clone(),
                    noise: level,
                    near_distance: rc.delta,
                    f_distance,
                    l2_distance,
                    curl_error: Some(ce),
                    q_error: Some(qe),
                    curl_relative: Some(rel(ce, truth.sup_norm())),
                    q_relative: Some(rel(qe, p.q_truth.sup_norm())),
                    failure: None,
                })
            };
            rows.push(run().unwrap_or_else(|e| SweepRow {
                pair: p.id.clone(),
                noise: level,
                near_distance: near_op_norm(&p.n1, &p.n2).unwrap_or(f64::NAN),
                f_distance,
                l2_distance,
                curl_error: None,
                q_error: None,
                curl_relative: None,
                q_relative: None,
                failure: Some(e.to_string()),
            }));
        }
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.failure.is_none()).collect();
    let d: Vec<f64> = ok.iter().map(|r| r.near_distance).collect();
    let ce: Vec<f64> = ok.iter().map(|r| r.curl_error.unwrap_or(f64::NAN)).collect();
    let qe: Vec<f64> = ok.iter().map(|r| r.q_error.unwrap_or(f64::NAN)).collect();
    Ok(SweepSummary {
        spearman_curl: spearman(&d, &ce),
        spearman_q: spearman(&d, &qe),
        curl_log_exponent: log_exponent(&d, &ce),
        q_log_exponent: log_exponent(&d, &qe),
        expected_curl_exponent: cfg.magnetic_exponent(),
        expected_q_exponent: cfg.electric_exponent(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_handles_ties_and_order() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[10.0, 20.0, 30.0, 40.0]) - 1.0).abs() < 1e-14);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-14);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_is_symmetric_and_bounded() {
        let g = BoxGrid::new(16, 1.0).unwrap();
        let pts = xi_lattice(&g, 4.5).unwrap();
        assert!(pts.iter().all(|p| norm3(p.xi) <= 4.5 + 1e-12));
        for p in &pts {
            assert!(pts.iter().any(|q| q.index == negate(p.index)));
        }
        // 0, 6 axis points, 12 face diagonals of norm π√2
        assert_eq!(pts.len(), 19);
        assert!(xi_lattice(&g, 30.0).is_err());
    }

    #[test]
    fn cutoffs_follow_the_exponents() {
        let c = ReconstructionConfig {
            s: 16.0,
            sigma: 1.0,
            gamma: 2.0,
            ..Default::default()
        };
        assert!((c.cutoff_magnetic() - 2.0).abs() < 1e-14);
        assert!((c.cutoff_electric() - 2.0).abs() < 1e-14);
        assert!((c.kappa() - 7.0 * 4.0 / 4.0).abs() < 1e-14);
        assert!((c.electric_exponent() - 2.0 / 28.0).abs() < 1e-14);
    }
}
