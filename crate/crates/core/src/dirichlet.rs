//! Sine-series calculus on the cube with homogeneous Dirichlet data on its
//! faces. Axis nodes j = 0..n−1 sit at −L + jh; modes are sin(πjk/n), k = 1..n−1.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{BoxGrid, ScalarField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisOp {
    /// Σ c_k sin(πjk/n)
    Sin,
    /// Σ c_k (πk/2L) cos(πjk/n), the first derivative
    Cos,
    /// −Σ c_k (πk/2L)² sin(πjk/n), the second derivative
    SinSecond,
}

struct LineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl LineTransform {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            n,
            fft: p.plan_fft_forward(2 * n),
        }
    }

    /// out_j = Σ_{k=1}^{n−1} x_k sin(πjk/n) for j = 0..n−1 (x_0 ignored).
    fn sine(&self, line: &mut [Complex64], buf: &mut [Complex64]) {
        let n = self.n;
        buf.iter_mut().for_each(|v| *v = ZERO);
        for k in 1..n {
            buf[k] = line[k];
            buf[2 * n - k] = -line[k];
        }
        self.fft.process(buf);
        let half_i = Complex64::new(0.0, 0.5);
        for j in 0..n {
            line[j] = half_i * buf[j];
        }
        line[0] = ZERO;
    }

    /// out_j = Σ_{k=1}^{n−1} x_k cos(πjk/n) for j = 0..n−1.
    fn cosine(&self, line: &mut [Complex64], buf: &mut [Complex64]) {
        let n = self.n;
        buf.iter_mut().for_each(|v| *v = ZERO);
        for k in 1..n {
            buf[k] = line[k];
            buf[2 * n - k] = line[k];
        }
        self.fft.process(buf);
        for j in 0..n {
            line[j] = buf[j] * 0.5;
        }
    }
}

/// Coefficients of the sine series, stored on the n³ slot layout with the
/// k = 0 slots unused.
#[derive(Clone, Debug)]
pub struct SineSeries {
    grid: BoxGrid,
    coeffs: Vec<Complex64>,
}

fn along_axis(grid: &BoxGrid, data: &mut [Complex64], axis: usize, mut f: impl FnMut(&mut [Complex64])) {
    let n = grid.n();
    let mut line = vec![ZERO; n];
    let stride = match axis {
        0 => 1,
        1 => n,
        _ => n * n,
    };
    for a in 0..n {
        for b in 0..n {
            let base = match axis {
                0 => grid.index(0, a, b),
                1 => grid.index(a, 0, b),
                _ => grid.index(a, b, 0),
            };
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[base + j * stride];
            }
            f(&mut line);
            for (j, l) in line.iter().enumerate() {
                data[base + j * stride] = *l;
            }
        }
    }
}

impl SineSeries {
    /// Expand the interior-node samples of `f`; face values are ignored.
    pub fn analyze(f: &ScalarField) -> Self {
        let grid = *f.grid();
        let n = grid.n();
        let t = LineTransform::new(n);
        let mut buf = vec![ZERO; 2 * n];
        let mut data = f.values().to_vec();
        for axis in 0..3 {
            along_axis(&grid, &mut data, axis, |line| t.sine(line, &mut buf));
        }
        let s = (2.0 / n as f64).powi(3);
        data.iter_mut().for_each(|v| *v *= s);
        Self { grid, coeffs: data }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    fn wavenumber(&self, k: usize) -> f64 {
        PI * k as f64 / (2.0 * self.grid.half_width())
    }

    /// Solve −Δϑ = f with ϑ = 0 on the faces.
    pub fn poisson(f: &ScalarField) -> Self {
        let mut s = Self::analyze(f);
        let g = s.grid;
        for idx in 0..g.len() {
            let [a, b, c] = g.split(idx);
            if a == 0 || b == 0 || c == 0 {
                s.coeffs[idx] = ZERO;
                continue;
            }
            let lam = s.wavenumber(a).powi(2) + s.wavenumber(b).powi(2) + s.wavenumber(c).powi(2);
            s.coeffs[idx] /= lam;
        }
        s
    }

    /// Evaluate the series (or a derivative, per axis) at every node.
    pub fn eval(&self, ops: [AxisOp; 3]) -> ScalarField {
        let g = self.grid;
        let n = g.n();
        let mut data = self.coeffs.clone();
        let t = LineTransform::new(n);
        let mut buf = vec![ZERO; 2 * n];
        for (axis, op) in ops.iter().enumerate() {
            let scale: Vec<f64> = (0..n)
                .map(|k| match op {
                    AxisOp::Sin => 1.0,
                    AxisOp::Cos => self.wavenumber(k),
                    AxisOp::SinSecond => -self.wavenumber(k).powi(2),
                })
                .collect();
            along_axis(&g, &mut data, axis, |line| {
                for (v, s) in line.iter_mut().zip(&scale) {
                    *v *= s;
                }
                match op {
                    AxisOp::Cos => t.cosine(line, &mut buf),
                    _ => t.sine(line, &mut buf),
                }
            });
        }
        ScalarField::from_values(g, data).expect("grid-sized buffer")
    }

    pub fn values(&self) -> ScalarField {
        self.eval([AxisOp::Sin; 3])
    }

    /// ∇ϑ in the sine basis.
    pub fn gradient(&self) -> [ScalarField; 3] {
        use AxisOp::*;
        [
            self.eval([Cos, Sin, Sin]),
            self.eval([Sin, Cos, Sin]),
            self.eval([Sin, Sin, Cos]),
        ]
    }

    pub fn laplacian(&self) -> ScalarField {
        use AxisOp::*;
        let a = self.eval([SinSecond, Sin, Sin]);
        let b = self.eval([Sin, SinSecond, Sin]);
        let c = self.eval([Sin, Sin, SinSecond]);
        a.add(&b).and_then(|s| s.add(&c)).expect("same grid")
    }

    /// ∂_p ∂_q ϑ for p ≠ q, evaluated directly from the coefficients.
    pub fn mixed(&self, p: usize, q: usize) -> ScalarField {
        let mut ops = [AxisOp::Sin; 3];
        ops[p] = AxisOp::Cos;
        ops[q] = AxisOp::Cos;
        self.eval(ops)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// True for nodes off the j = 0 faces, where Dirichlet data is imposed.
pub fn is_interior(grid: &BoxGrid, idx: usize) -> bool {
    let [a, b, c] = grid.split(idx);
    a != 0 && b != 0 && c != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_a_single_mode() {
        let g = BoxGrid::new(16, 1.0).unwrap();
        let kx = PI * 3.0 / 2.0;
        let ky = PI * 1.0 / 2.0;
        let kz = PI * 5.0 / 2.0;
        let f = ScalarField::from_real_fn(g, |x| ((x[0] + 1.0) * kx).sin() * ((x[1] + 1.0) * ky).sin() * ((x[2] + 1.0) * kz).sin());
        let lam = kx * kx + ky * ky + kz * kz;
        let theta = SineSeries::poisson(&f).values();
        let expect = f.scale(Complex64::new(1.0 / lam, 0.0));
        assert!(theta.sub(&expect).unwrap().sup_norm() < 1e-13);
        let dx = SineSeries::analyze(&f).gradient()[0].clone();
        let exact = ScalarField::from_real_fn(g, |x| kx * ((x[0] + 1.0) * kx).cos() * ((x[1] + 1.0) * ky).sin() * ((x[2] + 1.0) * kz).sin());
        assert!(dx.sub(&exact).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn laplacian_inverts_poisson() {
        let g = BoxGrid::new(16, 1.0).unwrap();
        let f = ScalarField::from_real_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2]) * 8.0).exp() * (1.0 + x[0]));
        let s = SineSeries::poisson(&f);
        let lap = s.laplacian();
        for i in 0..g.len() {
            if is_interior(&g, i) {
                assert!((lap.values()[i] + f.values()[i]).norm() < 1e-12);
            }
        }
    }
}
