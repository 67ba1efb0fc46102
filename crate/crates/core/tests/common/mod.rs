#![allow(dead_code)]

use magscat::field::{norm3, BoxGrid, ScalarField, Vec3};
use magscat::forward::PhysicsParams;
use magscat::gmres::GmresOptions;
use magscat::potentials::{smooth_cutoff, Bump, ElectricPotential, MagneticPotential, PotentialDescriptor};
use magscat::spherical::{bessel_j_with_derivative, hankel_with_derivative};
use magscat::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn tight() -> GmresOptions {
    GmresOptions { tol: 1e-12, ..Default::default() }
}

pub fn windowed(center: Vec3, width: f64) -> Bump {
    Bump { center, width, window: Some(0.12) }
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// A generic pair of magnetic and electric potentials at the given amplitude.
pub struct Pair {
    pub a: MagneticPotential,
    pub q: ElectricPotential,
}

pub fn descriptors(amp: f64, variant: usize) -> Vec<PotentialDescriptor> {
    let (b, ma, qa) = match variant {
        0 => (windowed([0.05, 0.0, -0.05], 0.35), [1.0, -0.5, 0.3], [1.0, 0.2]),
        _ => (windowed([-0.05, 0.05, 0.0], 0.3), [0.5, 0.4, -0.3], [-0.5, 0.1]),
    };
    vec![
        PotentialDescriptor::Magnetic { bump: b, amplitude: ma.map(|c| c * amp) },
        PotentialDescriptor::Electric { bump: b, amplitude: qa.map(|c| c * amp) },
    ]
}

pub fn pair(g: BoxGrid, amp: f64, variant: usize, r_d: f64) -> Pair {
    let d = descriptors(amp, variant);
    Pair {
        a: MagneticPotential::from_descriptors(g, &d, r_d).unwrap(),
        q: ElectricPotential::from_descriptors(g, &d, r_d).unwrap(),
    }
}

pub const DESK: PhysicsParams = PhysicsParams { k: 1.0, a: 0.8, r_d: 0.45 };

/// Mollified step q₀·½erfc((r − R₀)/δ), cut off smoothly before `r_out`.
#[derive(Debug, Clone, Copy)]
pub struct RadialStep {
    pub q0: f64,
    pub r0: f64,
    pub delta: f64,
    pub r_cut: f64,
    pub r_out: f64,
}

impl RadialStep {
    pub fn value(&self, r: f64) -> f64 {
        self.q0 * 0.5 * libm::erfc((r - self.r0) / self.delta) * smooth_cutoff(r, self.r_cut, self.r_out)
    }

    pub fn sample(&self, g: BoxGrid) -> ElectricPotential {
        ElectricPotential::new(ScalarField::from_real_fn(g, |x| self.value(norm3(x))), self.r_out).unwrap()
    }
}

/// Partial-wave solution of Δu + k²u = q(r)u with incident e^{ikx·d}.
/// Radial equations are integrated by RK4 and matched to j_ℓ + c_ℓh_ℓ at `r_out`.
pub struct PartialWaves {
    r_start: f64,
    step: f64,
    /// inner series coefficient c of y = r^ℓ(1 − c r²)
    series: Vec<f64>,
    /// y_ℓ on the radial mesh
    radial: Vec<Vec<f64>>,
    /// α_ℓ with α_ℓ y_ℓ = j_ℓ + c_ℓ h_ℓ at the matching radius
    alpha: Vec<Complex64>,
    direction: Vec3,
}

impl PartialWaves {
    pub fn new(q: RadialStep, k: f64, l_max: usize, direction: Vec3) -> Self {
        let r_start = 1e-3;
        let steps = ((q.r_out - r_start) / 2e-5).ceil() as usize;
        let h = (q.r_out - r_start) / steps as f64;
        let (j, jp) = bessel_j_with_derivative(l_max, k * q.r_out);
        let (hk, hp) = hankel_with_derivative(l_max, k * q.r_out);
        let (mut radial, mut alpha, mut series) = (Vec::new(), Vec::new(), Vec::new());
        for l in 0..=l_max {
            let lf = l as f64;
            let c = (k * k - q.value(0.0)) / (2.0 * (2.0 * lf + 3.0));
            let rl = r_start.powi(l as i32);
            let mut y = [rl * (1.0 - c * r_start * r_start), (lf * rl - c * (lf + 2.0) * rl * r_start * r_start) / r_start];
            let rhs = |r: f64, y: [f64; 2]| [y[1], -2.0 / r * y[1] - (k * k - q.value(r) - lf * (lf + 1.0) / (r * r)) * y[0]];
            let mut table = Vec::with_capacity(steps + 1);
            table.push(y[0]);
            for s in 0..steps {
                let r = r_start + s as f64 * h;
                let k1 = rhs(r, y);
                let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
                let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
                let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
                y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                table.push(y[0]);
            }
            let (jv, jd, hv, hd) = (j[l], k * jp[l], hk[l], k * hp[l]);
            let det = hd * y[0] - hv * y[1];
            alpha.push((hd * jv - hv * jd) / det);
            radial.push(table);
            series.push(c);
        }
        Self { r_start, step: h, series, radial, alpha, direction }
    }

    fn radial_at(&self, l: usize, r: f64) -> f64 {
        if r < self.r_start {
            return r.powi(l as i32) * (1.0 - self.series[l] * r * r);
        }
        let t = (r - self.r_start) / self.step;
        let i = (t.floor() as usize).min(self.radial[l].len() - 2);
        let f = t - i as f64;
        self.radial[l][i] * (1.0 - f) + self.radial[l][i + 1] * f
    }

    /// Total field at a point inside the matching radius.
    pub fn eval(&self, x: Vec3) -> Complex64 {
        let r = norm3(x);
        let c = if r > 0.0 { (x[0] * self.direction[0] + x[1] * self.direction[1] + x[2] * self.direction[2]) / r } else { 1.0 };
        let (mut p0, mut p1) = (1.0, c);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut il = Complex64::new(1.0, 0.0);
        for l in 0..self.alpha.len() {
            let p = if l == 0 { p0 } else { p1 };
            sum += il * (2 * l + 1) as f64 * self.alpha[l] * self.radial_at(l, r) * p;
            if l >= 1 {
                let p2 = ((2 * l + 1) as f64 * c * p1 - l as f64 * p0) / (l + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            il *= I;
        }
        sum
    }
}
