//! Fixtures shared by the benchmarks.

use magscat::forward::PhysicsParams;
use magscat::potentials::{Bump, ElectricPotential, MagneticPotential, PotentialDescriptor};
use magscat::BoxGrid;

pub const DESK: PhysicsParams = PhysicsParams { k: 1.0, a: 0.8, r_d: 0.45 };

pub fn descriptors(amp: f64) -> Vec<PotentialDescriptor> {
    let bump = Bump { center: [0.05, 0.0, -0.05], width: 0.35, window: Some(0.12) };
    vec![
        PotentialDescriptor::MagneticCurl { bump, amplitude: [amp, -0.5 * amp, 0.8 * amp] },
        PotentialDescriptor::Electric { bump, amplitude: [3.0 * amp, 0.0] },
    ]
}

/// Desk-scale medium on an n³ grid over [−1, 1]³.
pub fn medium(n: usize, amp: f64) -> (BoxGrid, MagneticPotential, ElectricPotential) {
    let g = BoxGrid::new(n, 1.0).expect("valid grid");
    let d = descriptors(amp);
    let a = MagneticPotential::from_descriptors(g, &d, DESK.r_d).expect("inside support");
    let q = ElectricPotential::from_descriptors(g, &d, DESK.r_d).expect("inside support");
    (g, a, q)
}
