//! Complex geometric optics probes e^{ix·ρ}e^{iφ} with ρ·ρ = 0, their
//! transport phases and the boundary densities that feed the data functional.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    cdot, cross3, dft_forward, dft_inverse, dot3, gradient, norm3, scale3, BoxGrid, CVec3,
    ScalarField, TrigInterpolant, Vec3, VectorField3,
};
use crate::potentials::MagneticPotential;
use crate::sphere::{BoundaryDensity, SphereGrid};
use crate::spherical::exterior_dirichlet;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative threshold below which |ω·ξ| counts as zero on the lattice.
pub const EPS_REG: f64 = 1e-8;

fn cvec(v: Vec3) -> CVec3 {
    v.map(|x| Complex64::new(x, 0.0))
}

fn normalized(v: Vec3) -> Option<Vec3> {
    let n = norm3(v);
    (n > 0.0).then(|| scale3(v, 1.0 / n))
}

/// Orthogonal triple (ξ, ω₁, ω₂) with unit ω's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionFrame {
    pub xi: Vec3,
    pub omega1: Vec3,
    pub omega2: Vec3,
}

impl DirectionFrame {
    pub fn new(xi: Vec3, omega1: Vec3, omega2: Vec3) -> Result<Self> {
        let f = Self { xi, omega1, omega2 };
        let d = f.orthogonality_defect();
        if d > 1e-12 {
            return Err(Error::param("frame", format!("orthogonality defect {d:.2e}")));
        }
        Ok(f)
    }

    /// Largest of ||ω_i| − 1| and the normalized pairwise dot products.
    pub fn orthogonality_defect(&self) -> f64 {
        let xn = norm3(self.xi).max(1.0);
        [
            (norm3(self.omega1) - 1.0).abs(),
            (norm3(self.omega2) - 1.0).abs(),
            dot3(self.omega1, self.omega2).abs(),
            dot3(self.xi, self.omega1).abs() / xn,
            dot3(self.xi, self.omega2).abs() / xn,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// ω₁ ↦ −ω₁.
    pub fn flipped(&self) -> Self {
        Self {
            omega1: scale3(self.omega1, -1.0),
            ..*self
        }
    }

    /// ω = ω₁ + iω₂
    pub fn omega(&self) -> CVec3 {
        [0, 1, 2].map(|c| Complex64::new(self.omega1[c], self.omega2[c]))
    }
}

/// ω₂ = (ξ_j e_ℓ − ξ_ℓ e_j)/|·| and ω₁ = ξ×ω₂/|ξ×ω₂|.
pub fn build_frame(xi: Vec3, j: usize, l: usize) -> Result<DirectionFrame> {
    if j > 2 || l > 2 || j == l {
        return Err(Error::param("(j, l)", format!("({j}, {l}) is not a coordinate pair")));
    }
    let mut w = [0.0; 3];
    w[l] = xi[j];
    w[j] = -xi[l];
    let omega2 = normalized(w).ok_or(Error::DegenerateFrame { j, l })?;
    let omega1 = normalized(cross3(xi, omega2)).ok_or(Error::DegenerateFrame { j, l })?;
    DirectionFrame::new(xi, omega1, omega2)
}

/// Any orthogonal frame for ξ; ξ = 0 gets (e₁, e₂).
pub fn generic_frame(xi: Vec3) -> DirectionFrame {
    let Some(n) = normalized(xi) else {
        return DirectionFrame {
            xi,
            omega1: [1.0, 0.0, 0.0],
            omega2: [0.0, 1.0, 0.0],
        };
    };
    let c = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[c] = 1.0;
    let omega2 = normalized(cross3(n, e)).expect("e is not parallel to ξ");
    let omega1 = normalized(cross3(n, omega2)).expect("orthogonal pair");
    DirectionFrame { xi, omega1, omega2 }
}

/// Outcome of solving ω·∇φ = g spectrally.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub phi: ScalarField,
    pub grad: VectorField3,
    /// lattice modes with |ω·ξ| below the threshold (Nyquist planes excluded)
    pub zeroed_modes: usize,
    /// sup-norm of the part of g carried by the zeroed modes and Nyquist planes
    pub zeroed_sup: f64,
    /// sup |ω·∇φ − Pg| with P the projection on retained modes
    pub residual: f64,
}

/// Solve ω·∇φ = g with the multiplier i/(ω·ξ); modes with |ω·ξ| < EPS_REG·max are dropped.
pub fn transport_solve(g: &ScalarField, omega: CVec3) -> TransportSolution {
    let grid = *g.grid();
    let spec = dft_forward(g);
    let symbol = |xi: Vec3| cdot(omega, cvec(xi));
    let max = (0..grid.len())
        .filter(|&i| !grid.touches_nyquist(i))
        .map(|i| symbol(grid.frequency(i)).norm())
        .fold(0.0, f64::max);
    let floor = EPS_REG * max;
    let mut phi_hat = spec.clone();
    let mut kept = spec.clone();
    let mut zeroed = 0;
    for i in 0..grid.len() {
        let w = symbol(grid.frequency(i));
        if grid.touches_nyquist(i) {
            phi_hat.modes_mut()[i] = ZERO;
            kept.modes_mut()[i] = ZERO;
        } else if w.norm() < floor || max == 0.0 {
            zeroed += 1;
            phi_hat.modes_mut()[i] = ZERO;
            kept.modes_mut()[i] = ZERO;
        } else {
            phi_hat.modes_mut()[i] *= I / w;
        }
    }
    let phi = dft_inverse(&phi_hat);
    let grad = gradient(&phi);
    let projected = dft_inverse(&kept);
    let zeroed_sup = g.sub(&projected).expect("same grid").sup_norm();
    let residual = (0..grid.len())
        .map(|i| {
            let d: Complex64 = (0..3).map(|c| omega[c] * grad.component(c).values()[i]).sum();
            (d - projected.values()[i]).norm()
        })
        .fold(0.0, f64::max);
    TransportSolution {
        phi,
        grad,
        zeroed_modes: zeroed,
        zeroed_sup,
        residual,
    }
}

/// N_ω⁻¹g, the spectral inverse of ω·∇.
pub fn ninv_omega(g: &ScalarField, omega: CVec3) -> ScalarField {
    transport_solve(g, omega).phi
}

/// ω·A as a scalar field.
pub fn omega_dot(omega: CVec3, a: &MagneticPotential) -> ScalarField {
    let f = a.field();
    let grid = *f.component(0).grid();
    let vals = (0..grid.len())
        .map(|i| (0..3).map(|c| omega[c] * f.component(c).values()[i]).sum())
        .collect();
    ScalarField::from_values(grid, vals).expect("grid-sized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// e^{ix·ρ} with ρ·ρ = 0
    LeadingOrder,
    /// ρ̃ = ξ/2 ± isω₂ ∓ √(s² + k² − |ξ|²/4)ω₁, so that ρ̃·ρ̃ = k² and the
    /// exponential solves the Helmholtz equation
    #[default]
    HelmholtzCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub k: f64,
    pub kind: ProbeKind,
    pub s_min: f64,
    /// transport gate relative to ‖A‖_∞
    pub transport_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            k: 1.0,
            kind: ProbeKind::default(),
            s_min: 2.0,
            transport_tol: 1e-6,
        }
    }
}

/// Reproducible probe description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub xi: Vec3,
    pub j: usize,
    pub l: usize,
    pub s: f64,
    /// use the frame with ω₁ negated
    #[serde(default)]
    pub flip: bool,
}

impl ProbeSpec {
    pub fn frame(&self) -> Result<DirectionFrame> {
        let f = build_frame(self.xi, self.j, self.l)?;
        Ok(if self.flip { f.flipped() } else { f })
    }
}

/// ρ₁ = s(iω₂ + ξ/2s − √(1 − |ξ|²/4s²)ω₁), ρ₂ = s(−iω₂ + ξ/2s + √(1 − |ξ|²/4s²)ω₁);
/// with `extra` = k² the square root becomes √(s² + k² − |ξ|²/4)/s.
pub fn rho_pair(frame: &DirectionFrame, s: f64, extra: f64) -> (CVec3, CVec3) {
    let xi = frame.xi;
    let root = (s * s + extra - dot3(xi, xi) / 4.0).sqrt();
    let r1 = [0, 1, 2].map(|c| Complex64::new(xi[c] / 2.0 - root * frame.omega1[c], s * frame.omega2[c]));
    let r2 = [0, 1, 2].map(|c| Complex64::new(xi[c] / 2.0 + root * frame.omega1[c], -s * frame.omega2[c]));
    (r1, r2)
}

/// Probe pair u₁ (for −A₁) and u₂ (for A₂) with product ≈ e^{ix·ξ}.
#[derive(Debug, Clone)]
pub struct CGOProbe {
    pub frame: DirectionFrame,
    pub s: f64,
    pub kind: ProbeKind,
    /// ρ₁ = sω₁*, ρ₂ = sω₂*
    pub rho1: CVec3,
    pub rho2: CVec3,
    /// exponents actually sampled (equal to ρ for `LeadingOrder`)
    pub rho1_probe: CVec3,
    pub rho2_probe: CVec3,
    pub phi1: ScalarField,
    pub phi2: ScalarField,
    pub grad_phi1: VectorField3,
    pub grad_phi2: VectorField3,
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub grad_u1: VectorField3,
    pub grad_u2: VectorField3,
    /// sup transport residuals over ‖A_j‖_∞ (0 when A_j = 0)
    pub transport_residual: [f64; 2],
    pub zeroed_modes: [usize; 2],
    interp: [TrigInterpolant; 2],
}

fn probe_field(grid: &BoxGrid, rho: CVec3, phi: &ScalarField, grad_phi: &VectorField3) -> (ScalarField, VectorField3) {
    let vals: Vec<(Complex64, CVec3)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let u = (I * (cdot(rho, cvec(x)) + phi.values()[i])).exp();
            let g = [0, 1, 2].map(|c| I * (rho[c] + grad_phi.component(c).values()[i]) * u);
            (u, g)
        })
        .collect();
    let u = ScalarField::from_values(*grid, vals.iter().map(|v| v.0).collect()).expect("grid-sized");
    let comps = [0, 1, 2].map(|c| ScalarField::from_values(*grid, vals.iter().map(|v| v.1[c]).collect()).expect("grid-sized"));
    (u, VectorField3::new(comps).expect("same grid"))
}

/// Build (u₁, u₂) for the pair (−A₁ side, A₂ side) at frame and s.
pub fn build_probe(
    a1: &MagneticPotential,
    a2: &MagneticPotential,
    frame: &DirectionFrame,
    s: f64,
    opts: &ProbeOptions,
) -> Result<CGOProbe> {
    let grid = *a1.grid();
    if a2.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let smin = opts.s_min.max(norm3(frame.xi) / 2.0);
    if !(s > smin) {
        return Err(Error::param("s", format!("{s} must exceed {smin}")));
    }
    let (rho1, rho2) = rho_pair(frame, s, 0.0);
    let (rho1_probe, rho2_probe) = match opts.kind {
        ProbeKind::LeadingOrder => (rho1, rho2),
        ProbeKind::HelmholtzCorrected => rho_pair(frame, s, opts.k * opts.k),
    };
    let defect = cdot(rho1, rho1).norm().max(cdot(rho2, rho2).norm()) / (s * s);
    if defect > 1e-12 {
        return Err(Error::param("rho", format!("ρ·ρ defect {defect:.2e}")));
    }
    let w1 = rho1.map(|v| v / s);
    let w2 = rho2.map(|v| v / s);
    // ω₁*·∇φ₁ = ω₁*·A₁ and ω₂*·∇φ₂ = −ω₂*·A₂
    let solve = |w: CVec3, a: &MagneticPotential, sign: f64| -> Result<(TransportSolution, f64)> {
        let g = omega_dot(w, a).scale(Complex64::new(sign, 0.0));
        let t = transport_solve(&g, w);
        let scale = a.field().sup_norm();
        let rel = if scale > 0.0 { t.residual / scale } else { 0.0 };
        if rel > opts.transport_tol {
            return Err(Error::Transport {
                residual: rel,
                tol: opts.transport_tol,
            });
        }
        Ok((t, rel))
    };
    let (t1, r1) = solve(w1, a1, 1.0)?;
    let (t2, r2) = solve(w2, a2, -1.0)?;
    let (u1, grad_u1) = probe_field(&grid, rho1_probe, &t1.phi, &t1.grad);
    let (u2, grad_u2) = probe_field(&grid, rho2_probe, &t2.phi, &t2.grad);
    let interp = [TrigInterpolant::new(&t1.phi), TrigInterpolant::new(&t2.phi)];
    Ok(CGOProbe {
        frame: *frame,
        s,
        kind: opts.kind,
        rho1,
        rho2,
        rho1_probe,
        rho2_probe,
        zeroed_modes: [t1.zeroed_modes, t2.zeroed_modes],
        phi1: t1.phi,
        phi2: t2.phi,
        grad_phi1: t1.grad,
        grad_phi2: t2.grad,
        u1,
        u2,
        grad_u1,
        grad_u2,
        transport_residual: [r1, r2],
        interp,
    })
}

impl CGOProbe {
    /// |ρ₁·ρ₁|, |ρ₂·ρ₂| and |ρ₁ + ρ₂ − ξ|.
    pub fn rho_defects(&self) -> [f64; 3] {
        let sum = [0, 1, 2].map(|c| self.rho1[c] + self.rho2[c] - self.frame.xi[c]);
        [
            cdot(self.rho1, self.rho1).norm(),
            cdot(self.rho2, self.rho2).norm(),
            sum.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        ]
    }

    /// Value and gradient of u_j (j = 0, 1) at an arbitrary point.
    pub fn eval(&self, which: usize, x: Vec3) -> (Complex64, CVec3) {
        let rho = if which == 0 { self.rho1_probe } else { self.rho2_probe };
        let (phi, dphi) = self.interp[which].eval(x);
        let u = (I * (cdot(rho, cvec(x)) + phi)).exp();
        (u, [0, 1, 2].map(|c| I * (rho[c] + dphi[c]) * u))
    }
}

/// Densities f_j = ∂_ν u_j⁻ − ∂_ν u_j⁺ with u⁺ the radiating extension of the trace.
#[derive(Debug, Clone)]
pub struct ProbeDensities {
    pub f1: BoundaryDensity,
    pub f2: BoundaryDensity,
    pub norms: [f64; 2],
    /// spectral tails of the two traces
    pub tails: [f64; 2],
}

pub fn boundary_densities(probe: &CGOProbe, sphere: &SphereGrid, k: f64, l_max: usize, tail_tol: f64) -> Result<ProbeDensities> {
    let nodes = sphere.nodes();
    let dirs = sphere.directions();
    let mut out = Vec::with_capacity(2);
    for which in 0..2 {
        let vals: Vec<(Complex64, CVec3)> = nodes.par_iter().map(|&x| probe.eval(which, x)).collect();
        let trace: Vec<Complex64> = vals.iter().map(|v| v.0).collect();
        let ext = exterior_dirichlet(sphere, &trace, k, l_max, tail_tol)?;
        let f: Vec<Complex64> = vals
            .iter()
            .zip(dirs)
            .zip(ext.normal_derivative())
            .map(|((v, d), dn)| cdot(v.1, cvec(*d)) - dn)
            .collect();
        out.push((BoundaryDensity::new(sphere, f)?, ext.tail()));
    }
    let (f2, t2) = out.pop().expect("two densities");
    let (f1, t1) = out.pop().expect("two densities");
    Ok(ProbeDensities {
        norms: [f1.l2_norm(sphere), f2.l2_norm(sphere)],
        f1,
        f2,
        tails: [t1, t2],
    })
}

/// Both sides of ∫ω·A e^{ix·ξ}e^{iN_ω⁻¹(−ω·A)}dx = ∫ω·A e^{ix·ξ}dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaloCheck {
    pub nonlinear: Complex64,
    pub linear: Complex64,
    /// |nonlinear − linear| / |linear|
    pub gap: f64,
}

pub fn salo_identity(a: &MagneticPotential, omega: CVec3, xi: Vec3) -> SaloCheck {
    let g = omega_dot(omega, a);
    let phi = ninv_omega(&g.scale(Complex64::new(-1.0, 0.0)), omega);
    let grid = *g.grid();
    let (mut nl, mut lin) = (ZERO, ZERO);
    for i in 0..grid.len() {
        let v = g.values()[i];
        if v == ZERO {
            continue;
        }
        let e = (I * dot3(grid.node(i), xi)).exp() * v;
        lin += e;
        nl += e * (I * phi.values()[i]).exp();
    }
    let h3 = grid.cell_volume();
    let (nonlinear, linear) = (nl * h3, lin * h3);
    SaloCheck {
        nonlinear,
        linear,
        gap: (nonlinear - linear).norm() / linear.norm(),
    }
}

/// sup |N_θ⁻¹(−θ·A) − N_θ′⁻¹(−θ′·A)|
pub fn phase_difference(a: &MagneticPotential, theta: CVec3, theta2: CVec3) -> f64 {
    let p = |w: CVec3| ninv_omega(&omega_dot(w, a).scale(Complex64::new(-1.0, 0.0)), w);
    p(theta).sub(&p(theta2)).expect("same grid").sup_norm()
}
