use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{is_interior, SineSeries};
use crate::error::{Error, Result};
use crate::field::{
    cross3, curl, dft_forward, divergence, dot3, gradient, norm3, sub3, weighted_l1_norm, weighted_l1_norm_of,
    BoxGrid, ScalarField, SpectralField, Vec3, VectorField3,
};

/// Values this small outside the declared support count as zero.
pub const SUPPORT_TOL: f64 = 1e-10;

/// exp(1 − 1/(1 − r²/w²)), optionally damped by exp(−r²/2σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec3,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl Bump {
    pub fn value(&self, x: Vec3) -> f64 {
        let d = sub3(x, self.center);
        let t = dot3(d, d) / (self.width * self.width);
        if t >= 1.0 {
            return 0.0;
        }
        let mut v = (1.0 - 1.0 / (1.0 - t)).exp();
        if let Some(s) = self.window {
            v *= (-dot3(d, d) / (2.0 * s * s)).exp();
        }
        v
    }

    pub fn gradient(&self, x: Vec3) -> Vec3 {
        let d = sub3(x, self.center);
        let r2 = dot3(d, d);
        let w2 = self.width * self.width;
        let t = r2 / w2;
        if t >= 1.0 {
            return [0.0; 3];
        }
        // d log ψ / d(r²)
        let mut dl = -1.0 / (w2 * (1.0 - t) * (1.0 - t));
        if let Some(s) = self.window {
            dl -= 1.0 / (2.0 * s * s);
        }
        let v = self.value(x);
        [2.0 * d[0] * dl * v, 2.0 * d[1] * dl * v, 2.0 * d[2] * dl * v]
    }

    fn outer_radius(&self) -> f64 {
        norm3(self.center) + self.width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialDescriptor {
    /// A = amplitude · ψ
    Magnetic {
        #[serde(flatten)]
        bump: Bump,
        amplitude: Vec3,
    },
    /// A = curl(amplitude · ψ) = ∇ψ × amplitude, divergence-free with zero mean.
    MagneticCurl {
        #[serde(flatten)]
        bump: Bump,
        amplitude: Vec3,
    },
    /// q = (re + i·im) · ψ
    Electric {
        #[serde(flatten)]
        bump: Bump,
        amplitude: [f64; 2],
    },
}

impl PotentialDescriptor {
    pub fn bump(&self) -> &Bump {
        match self {
            Self::Magnetic { bump, .. } | Self::MagneticCurl { bump, .. } | Self::Electric { bump, .. } => bump,
        }
    }

    pub fn is_magnetic(&self) -> bool {
        !matches!(self, Self::Electric { .. })
    }

    fn validate(&self, r_d: f64) -> Result<()> {
        let b = self.bump();
        if !(b.width > 0.0) {
            return Err(Error::param("width", "must be positive"));
        }
        if let Some(s) = b.window {
            if !(s > 0.0) {
                return Err(Error::param("window", "must be positive"));
            }
        }
        if b.outer_radius() > r_d * (1.0 + 1e-12) {
            return Err(Error::Support(format!(
                "bump reaches |x| = {:.4} beyond r_D = {r_d}",
                b.outer_radius()
            )));
        }
        if let Self::Electric { amplitude, .. } = self {
            if amplitude[1] < 0.0 {
                return Err(Error::param("amplitude", "electric potential needs Im q >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPotential {
    a: VectorField3,
    support_radius: f64,
}

impl MagneticPotential {
    /// Wrap a sampled field, checking support and real-valuedness.
    pub fn new(a: VectorField3, support_radius: f64) -> Result<Self> {
        let g = *a.grid();
        let leak = (0..g.len())
            .filter(|&i| norm3(g.node(i)) > support_radius)
            .map(|i| a.at(i).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if leak > SUPPORT_TOL {
            return Err(Error::Support(format!(
                "|A| = {leak:.2e} outside r = {support_radius}"
            )));
        }
        if a.max_imag() > 1e-12 * a.sup_norm().max(1.0) {
            return Err(Error::param("a", "magnetic potential must be real"));
        }
        Ok(Self { a, support_radius })
    }

    pub fn zero(grid: BoxGrid, support_radius: f64) -> Self {
        Self {
            a: VectorField3::zeros(grid),
            support_radius,
        }
    }

    /// Sum of the magnetic descriptors in `descs`; electric ones are skipped.
    pub fn from_descriptors(grid: BoxGrid, descs: &[PotentialDescriptor], r_d: f64) -> Result<Self> {
        for d in descs {
            d.validate(r_d)?;
        }
        let mags: Vec<&PotentialDescriptor> = descs.iter().filter(|d| d.is_magnetic()).collect();
        let a = VectorField3::from_fn(grid, |x| {
            let mut v = [0.0; 3];
            for d in &mags {
                match d {
                    PotentialDescriptor::Magnetic { bump, amplitude } => {
                        let p = bump.value(x);
                        (0..3).for_each(|c| v[c] += amplitude[c] * p);
                    }
                    PotentialDescriptor::MagneticCurl { bump, amplitude } => {
                        let w = cross3(bump.gradient(x), *amplitude);
                        (0..3).for_each(|c| v[c] += w[c]);
                    }
                    PotentialDescriptor::Electric { .. } => {}
                }
            }
            v.map(|t| Complex64::new(t, 0.0))
        });
        Ok(Self { a, support_radius: r_d })
    }

    pub fn field(&self) -> &VectorField3 {
        &self.a
    }
    pub fn grid(&self) -> &BoxGrid {
        self.a.grid()
    }
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
    pub fn is_zero(&self) -> bool {
        self.a.sup_norm() == 0.0
    }

    pub fn negated(&self) -> Self {
        Self {
            a: self.a.scale(Complex64::new(-1.0, 0.0)),
            support_radius: self.support_radius,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            a: self.a.add(&other.a)?,
            support_radius: self.support_radius.max(other.support_radius),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.negated())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a: self.a.scale(Complex64::new(c, 0.0)),
            support_radius: self.support_radius,
        }
    }

    pub fn curl(&self) -> VectorField3 {
        curl(&self.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectricPotential {
    q: ScalarField,
    support_radius: f64,
}

impl ElectricPotential {
    pub fn new(q: ScalarField, support_radius: f64) -> Result<Self> {
        let g = *q.grid();
        let leak = (0..g.len())
            .filter(|&i| norm3(g.node(i)) > support_radius)
            .map(|i| q.values()[i].norm())
            .fold(0.0, f64::max);
        if leak > SUPPORT_TOL {
            return Err(Error::Support(format!(
                "|q| = {leak:.2e} outside r = {support_radius}"
            )));
        }
        let min_im = q.values().iter().map(|v| v.im).fold(f64::INFINITY, f64::min);
        if min_im < -1e-12 {
            return Err(Error::param("q", format!("Im q reaches {min_im:.3e} < 0")));
        }
        Ok(Self { q, support_radius })
    }

    pub fn zero(grid: BoxGrid, support_radius: f64) -> Self {
        Self {
            q: ScalarField::zeros(grid),
            support_radius,
        }
    }

    pub fn from_descriptors(grid: BoxGrid, descs: &[PotentialDescriptor], r_d: f64) -> Result<Self> {
        for d in descs {
            d.validate(r_d)?;
        }
        let els: Vec<(Bump, Complex64)> = descs
            .iter()
            .filter_map(|d| match d {
                PotentialDescriptor::Electric { bump, amplitude } => Some((*bump, Complex64::new(amplitude[0], amplitude[1]))),
                _ => None,
            })
            .collect();
        let q = ScalarField::from_fn(grid, |x| els.iter().map(|(b, c)| c * b.value(x)).sum());
        Ok(Self { q, support_radius: r_d })
    }

    pub fn field(&self) -> &ScalarField {
        &self.q
    }
    pub fn grid(&self) -> &BoxGrid {
        self.q.grid()
    }
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
    pub fn is_zero(&self) -> bool {
        self.q.sup_norm() == 0.0
    }
    pub fn sub(&self, other: &Self) -> Result<ScalarField> {
        self.q.sub(&other.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BumpPotential {
    Magnetic(MagneticPotential),
    Electric(ElectricPotential),
}

/// Single-bump factory.
pub fn make_bump_potential(grid: BoxGrid, desc: &PotentialDescriptor, r_d: f64) -> Result<BumpPotential> {
    let one = std::slice::from_ref(desc);
    if desc.is_magnetic() {
        MagneticPotential::from_descriptors(grid, one, r_d).map(BumpPotential::Magnetic)
    } else {
        ElectricPotential::from_descriptors(grid, one, r_d).map(BumpPotential::Electric)
    }
}

/// A + ∇φ with the spectral gradient, so the discrete curl is untouched.
/// φ must vanish on and outside |x| = `outer_radius`.
pub fn gauge_transform(a: &MagneticPotential, phi: &ScalarField, outer_radius: f64) -> Result<MagneticPotential> {
    let tol = SUPPORT_TOL * phi.sup_norm().max(1.0);
    let r_phi = phi.support_radius(tol);
    if r_phi >= outer_radius {
        return Err(Error::Support(format!(
            "gauge phase reaches |x| = {r_phi:.4}, not inside r = {outer_radius}"
        )));
    }
    let grad = gradient(phi).map_components(|c| c.map(|v| Complex64::new(v.re, 0.0)));
    Ok(MagneticPotential {
        a: a.a.add(&grad)?,
        support_radius: a.support_radius.max(r_phi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// max over nodes of |A|, |∂A| and |∂²A|, spectrally sampled
    pub a_w2inf_proxy: f64,
    pub q_sup: f64,
    /// ‖curl A‖ in L¹_σ of the spectrum
    pub curl_weighted: f64,
    /// ‖q̂‖ in L¹_γ
    pub q_weighted: f64,
    pub bound_m: f64,
    pub flags: [bool; 4],
    pub passes: bool,
}

fn w2inf_proxy(a: &VectorField3) -> f64 {
    let mut m = a.sup_norm();
    for c in 0..3 {
        let spec = dft_forward(a.component(c));
        for p in 0..3 {
            let d = crate::field::dft_inverse(&spec.multiplied(|xi| Complex64::new(0.0, -xi[p])));
            m = m.max(d.sup_norm());
            for q in p..3 {
                let dd = crate::field::dft_inverse(&spec.multiplied(|xi| Complex64::new(-xi[p] * xi[q], 0.0)));
                m = m.max(dd.sup_norm());
            }
        }
    }
    m
}

pub fn check_admissible(
    a: &MagneticPotential,
    q: &ElectricPotential,
    bound_m: f64,
    sigma: f64,
    gamma: f64,
) -> Result<AdmissibilityReport> {
    let a_w2inf_proxy = w2inf_proxy(&a.a);
    let q_sup = q.q.sup_norm();
    let b = curl(&a.a);
    let specs: Vec<SpectralField> = b.components().iter().map(dft_forward).collect();
    let curl_weighted = weighted_l1_norm_of(&[&specs[0], &specs[1], &specs[2]], sigma)?;
    let q_weighted = weighted_l1_norm(&dft_forward(&q.q), gamma)?;
    let vals = [a_w2inf_proxy, q_sup, curl_weighted, q_weighted];
    let flags = vals.map(|v| v > bound_m);
    Ok(AdmissibilityReport {
        a_w2inf_proxy,
        q_sup,
        curl_weighted,
        q_weighted,
        bound_m,
        flags,
        passes: !flags.iter().any(|&f| f),
    })
}

/// H = A + ∇ϑ with −Δϑ = div A in the cube and ϑ = 0 on its faces.
#[derive(Debug, Clone)]
pub struct HelmholtzDecomposition {
    a: VectorField3,
    series: SineSeries,
    theta: ScalarField,
    grad_theta: VectorField3,
    h_field: VectorField3,
}

pub fn helmholtz_decompose(a: &MagneticPotential) -> Result<HelmholtzDecomposition> {
    decompose_field(&a.a)
}

pub(crate) fn decompose_field(a: &VectorField3) -> Result<HelmholtzDecomposition> {
    let div = divergence(a);
    let series = SineSeries::poisson(&div);
    let theta = series.values();
    let grad_theta = VectorField3::new(series.gradient())?;
    let h_field = a.add(&grad_theta)?;
    Ok(HelmholtzDecomposition {
        a: a.clone(),
        series,
        theta,
        grad_theta,
        h_field,
    })
}

impl HelmholtzDecomposition {
    pub fn theta(&self) -> &ScalarField {
        &self.theta
    }
    pub fn grad_theta(&self) -> &VectorField3 {
        &self.grad_theta
    }
    pub fn h_field(&self) -> &VectorField3 {
        &self.h_field
    }

    /// div A + Δϑ; vanishes on interior nodes.
    pub fn divergence_h(&self) -> ScalarField {
        let mut d = divergence(&self.a).add(&self.series.laplacian()).expect("same grid");
        let g = *d.grid();
        for (i, v) in d.values_mut().iter_mut().enumerate() {
            if !is_interior(&g, i) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        d
    }

    /// curl A + curl ∇ϑ, the latter assembled from mixed sine-basis derivatives.
    pub fn curl_h(&self) -> VectorField3 {
        let ca = curl(&self.a);
        let comps = [0, 1, 2].map(|c| {
            let (p, q) = ((c + 1) % 3, (c + 2) % 3);
            let extra = self.series.mixed(p, q).sub(&self.series.mixed(q, p)).expect("same grid");
            ca.component(c).add(&extra).expect("same grid")
        });
        VectorField3::new(comps).expect("same grid")
    }

    /// ϑ′ from decomposing H again under the same divergence convention.
    pub fn redecompose_theta(&self) -> ScalarField {
        SineSeries::poisson(&self.divergence_h()).values()
    }

    /// ‖H‖∞ / ‖curl A‖∞
    pub fn morrey_constant(&self) -> f64 {
        let c = curl(&self.a).sup_norm();
        if c == 0.0 {
            0.0
        } else {
            self.h_field.sup_norm() / c
        }
    }
}

/// 1 on r ≤ r_in, 0 on r ≥ r_out, C^∞ between.
pub fn smooth_cutoff(r: f64, r_in: f64, r_out: f64) -> f64 {
    if r <= r_in {
        return 1.0;
    }
    if r >= r_out {
        return 0.0;
    }
    let t = (r - r_in) / (r_out - r_in);
    let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let step = f(t) / (f(t) + f(1.0 - t));
    1.0 - step
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> BoxGrid {
        BoxGrid::new(24, 1.0).unwrap()
    }

    #[test]
    fn bump_peak_and_support() {
        let b = Bump {
            center: [0.1, 0.0, 0.0],
            width: 0.3,
            window: None,
        };
        assert!((b.value([0.1, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(b.value([0.41, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn bump_gradient_matches_differences() {
        let b = Bump {
            center: [0.0, 0.05, 0.0],
            width: 0.4,
            window: Some(0.2),
        };
        let x = [0.1, -0.07, 0.12];
        let g = b.gradient(x);
        let e = 1e-6;
        for c in 0..3 {
            let mut p = x;
            let mut m = x;
            p[c] += e;
            m[c] -= e;
            let fd = (b.value(p) - b.value(m)) / (2.0 * e);
            assert!((fd - g[c]).abs() < 1e-7);
        }
    }

    #[test]
    fn support_violation_rejected() {
        let d = PotentialDescriptor::Electric {
            bump: Bump {
                center: [0.3, 0.0, 0.0],
                width: 0.3,
                window: None,
            },
            amplitude: [1.0, 0.0],
        };
        assert!(matches!(make_bump_potential(grid(), &d, 0.5), Err(Error::Support(_))));
    }

    #[test]
    fn negative_absorption_rejected() {
        let d = PotentialDescriptor::Electric {
            bump: Bump {
                center: [0.0; 3],
                width: 0.3,
                window: None,
            },
            amplitude: [1.0, -0.1],
        };
        assert!(make_bump_potential(grid(), &d, 0.5).is_err());
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let d = PotentialDescriptor::MagneticCurl {
            bump: Bump {
                center: [0.0, 0.1, 0.0],
                width: 0.3,
                window: Some(0.1),
            },
            amplitude: [0.0, 0.0, 1.0],
        };
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"kind\":\"magnetic_curl\""));
        let back: PotentialDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn smooth_cutoff_limits() {
        assert_eq!(smooth_cutoff(0.2, 0.5, 0.7), 1.0);
        assert_eq!(smooth_cutoff(0.8, 0.5, 0.7), 0.0);
        assert!((smooth_cutoff(0.6, 0.5, 0.7) - 0.5).abs() < 1e-14);
    }
}
