mod common;

use common::*;
use magscat::boundary::{
    assemble_far_field, assemble_near_field, data_functional, near_op_norm, points_on, single_layer, volume_side,
    NearFieldMatrix,
};
use magscat::field::{norm3, scale3, BoxGrid};
use magscat::forward::{IncidentField, ScatteringProblem};
use magscat::potentials::{ElectricPotential, MagneticPotential};
use magscat::sphere::{BoundaryDensity, SphereGrid};
use magscat::spherical::{bessel_j, eval_ylm, hankel_h1, ylm_all, HarmonicIndex};
use magscat::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density(s: &SphereGrid, seed: u64) -> BoundaryDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..s.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    BoundaryDensity::new(s, v).unwrap()
}

fn matrices(n: usize, sphere: &SphereGrid) -> (NearFieldMatrix, NearFieldMatrix, Pair) {
    let g = BoxGrid::new(n, 1.0).unwrap();
    let p = pair(g, 0.5, 0, 0.45);
    let plus = ScatteringProblem::new(&DESK, &p.a, &p.q, tight()).unwrap();
    let minus = ScatteringProblem::new(&DESK, &p.a.negated(), &p.q, tight()).unwrap();
    (assemble_near_field(&plus, sphere).unwrap(), assemble_near_field(&minus, sphere).unwrap(), p)
}

#[test]
fn zero_density_gives_zero_field() {
    let s = SphereGrid::new(0.8, 4, 8).unwrap();
    let v = single_layer(&s, &BoundaryDensity::zeros(&s)).unwrap();
    assert_eq!(v.eval(1.0, [0.1, 0.2, 0.3]).0, Complex64::new(0.0, 0.0));
}

#[test]
fn single_layer_of_a_harmonic_is_a_regular_wave() {
    // S Y_ℓ^m = ik a² h_ℓ(ka) j_ℓ(k|x|) Y_ℓ^m(x̂) inside B
    let (k, a) = (1.3, 0.8);
    let s = SphereGrid::new(a, 16, 32).unwrap();
    let pts = [[0.1, 0.2, -0.15], [-0.3, 0.05, 0.1], [0.0, 0.0, 0.25]];
    for l in 0..=6usize {
        for m in [-(l as i64), 0, l as i64] {
            let h = BoundaryDensity::new(&s, s.directions().iter().map(|d| eval_ylm(l, m, *d).unwrap()).collect()).unwrap();
            let v = single_layer(&s, &h).unwrap();
            for x in pts {
                let r = norm3(x);
                let expect = I * k * a * a * hankel_h1(l, k * a) * bessel_j(l, k * r) * eval_ylm(l, m, scale3(x, 1.0 / r)).unwrap();
                let got = v.eval(k, x).0;
                assert!((got - expect).norm() <= 1e-6 * expect.norm().max(1e-3), "l {l} m {m}: {got} vs {expect}");
            }
        }
    }
}

#[test]
fn zero_potentials_give_zero_matrix() {
    let g = BoxGrid::new(16, 1.0).unwrap();
    let s = SphereGrid::new(0.8, 4, 8).unwrap();
    let p = ScatteringProblem::new(&DESK, &MagneticPotential::zero(g, 0.45), &ElectricPotential::zero(g, 0.45), tight()).unwrap();
    let n = assemble_near_field(&p, &s).unwrap();
    assert!(n.entries().iter().all(|v| v.norm() == 0.0));
    assert_eq!(near_op_norm(&n, &n).unwrap(), 0.0);
}

#[test]
fn near_field_reciprocity_and_transpose_identity() {
    let s = SphereGrid::new(0.8, 6, 12).unwrap();
    let (np, nm, _) = matrices(32, &s);
    let scale = np.entries().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let nt = nm.transpose();
    let worst = np.entries().iter().zip(nt.entries()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst <= 1e-6 * scale, "{worst:.2e} vs {scale:.2e}");
    // ∫(𝒩_{A,q} f) g = ∫ f (𝒩_{−A,q} g)
    let (f, h) = (random_density(&s, 1), random_density(&s, 2));
    let w = s.weights();
    let pair = |x: &BoundaryDensity, y: &BoundaryDensity| -> Complex64 {
        x.values().iter().zip(y.values()).zip(w).map(|((a, b), w)| a * b * w).sum()
    };
    let lhs = pair(&np.apply(&f).unwrap(), &h);
    let rhs = pair(&f, &nm.apply(&h).unwrap());
    assert!((lhs - rhs).norm() <= 1e-6 * lhs.norm());
    // the magnetic part matters, so plain symmetry must fail for this pair
    let asym = np.entries().iter().zip(np.transpose().entries()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(asym > 1e-4 * scale);
}

#[test]
fn electric_only_matrix_is_symmetric() {
    let g = BoxGrid::new(32, 1.0).unwrap();
    let s = SphereGrid::new(0.8, 6, 12).unwrap();
    let p = pair(g, 0.5, 1, 0.45);
    let prob = ScatteringProblem::new(&DESK, &MagneticPotential::zero(g, 0.45), &p.q, tight()).unwrap();
    let n = assemble_near_field(&prob, &s).unwrap();
    let scale = n.entries().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = n.entries().iter().zip(n.transpose().entries()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst <= 1e-6 * scale);
}

#[test]
fn operator_norm_matches_power_iteration() {
    let s = SphereGrid::new(0.8, 6, 12).unwrap();
    let (np, nm, _) = matrices(24, &s);
    let d = np.sub(&nm).unwrap();
    let n = d.size();
    let sw: Vec<f64> = s.weights().iter().map(|w| w.sqrt()).collect();
    let m = |v: &[Complex64], adj: bool| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = if adj { d.get(j, i).conj() } else { d.get(i, j) };
                        e * sw[i] * sw[j] * v[j]
                    })
                    .sum()
            })
            .collect()
    };
    let mut v: Vec<Complex64> = random_density(&s, 3).values().to_vec();
    let mut sigma = 0.0;
    for _ in 0..300 {
        let w = m(&m(&v, false), true);
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        sigma = nrm.sqrt();
        v = w.iter().map(|z| z / nrm).collect();
    }
    let got = near_op_norm(&np, &nm).unwrap();
    assert!((got - sigma).abs() <= 1e-8 * got, "{got} vs {sigma}");
}

#[test]
fn data_functional_equals_volume_side() {
    let g = BoxGrid::new(32, 1.0).unwrap();
    let s = SphereGrid::new(0.8, 6, 12).unwrap();
    let (p1, p2) = (pair(g, 0.3, 0, 0.45), pair(g, 0.3, 1, 0.45));
    let build = |a: &MagneticPotential, q: &ElectricPotential| ScatteringProblem::new(&DESK, a, q, tight()).unwrap();
    let (pr1, pr2) = (build(&p1.a, &p1.q), build(&p2.a, &p2.q));
    let (n1, n2) = (assemble_near_field(&pr1, &s).unwrap(), assemble_near_field(&pr2, &s).unwrap());
    let pm1 = build(&p1.a.negated(), &p1.q);
    let (f1, f2) = (random_density(&s, 11), random_density(&s, 12));
    let data = data_functional(&n1, &n2, &f1, &f2).unwrap();
    let t1 = pm1.solve(&single_layer(&s, &f1).unwrap()).unwrap();
    let t2 = pr2.solve(&single_layer(&s, &f2).unwrap()).unwrap();
    let vol = volume_side(&pm1, &pr2, &t1, &t2).unwrap();
    assert!((data - vol).norm() <= 1e-8 * vol.norm(), "{data} vs {vol}");
    assert_eq!(data_functional(&n1, &n1, &f1, &f2).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn far_field_table_layout() {
    let g = BoxGrid::new(24, 1.0).unwrap();
    let p = pair(g, 0.3, 0, 0.45);
    let prob = ScatteringProblem::new(&DESK, &p.a, &p.q, tight()).unwrap();
    let dirs = SphereGrid::new(1.0, 3, 6).unwrap();
    let data = assemble_far_field(&prob, &dirs).unwrap();
    let n = dirs.len();
    let (i, j) = (4, 11);
    let t = prob.solve(&IncidentField::plane_wave(dirs.directions()[j]).unwrap()).unwrap();
    let direct = t.sources.far_field(dirs.directions()[i]);
    assert!((data.values[i * n + j] - direct).norm() < 1e-12 * direct.norm());
}

#[test]
fn points_on_scales_directions() {
    let s = SphereGrid::new(0.8, 4, 8).unwrap();
    for p in points_on(&s, 1.6) {
        assert!((norm3(p) - 1.6).abs() < 1e-14);
    }
    let idx = HarmonicIndex::all(2);
    assert_eq!(ylm_all(2, [0.0, 0.0, 1.0]).len(), idx.len());
}
