use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 50,
            max_iterations: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub residual: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a == Complex64::new(0.0, 0.0) {
        return (0.0, b.conj() / b.norm());
    }
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Restarted GMRES for A x = b with A given as `apply(x, out)`.
/// Starts from x = 0; the relative residual ‖b − Ax‖/‖b‖ is the stopping test.
pub fn gmres<F>(apply: F, b: &[Complex64], opts: &GmresOptions) -> Result<(Vec<Complex64>, GmresStats)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((
            x,
            GmresStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let m = opts.restart.max(1);
    let mut total = 0;
    let mut r = b.to_vec();
    let mut w = vec![zero; n];
    loop {
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok((
                x,
                GmresStats {
                    iterations: total,
                    residual: rel,
                },
            ));
        }
        if total >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations: total,
                residual: rel,
            });
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for j in 0..m {
            apply(&basis[j], &mut w);
            total += 1;
            // modified Gram–Schmidt, twice for stability
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let hij = dotc(q, &w);
                    h[i][j] += hij;
                    w.iter_mut().zip(q).for_each(|(wv, qv)| *wv -= hij * qv);
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = Complex64::new(hn, 0.0);
            for i in 0..j {
                let t = h[i][j] * cs[i] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + h[i + 1][j] * cs[i];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = h[j][j] * c + s * h[j + 1][j];
            h[j + 1][j] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            k_used = j + 1;
            let est = g[j + 1].norm() / bnorm;
            if est <= opts.tol || total >= opts.max_iterations || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for l in (i + 1)..k_used {
                s -= h[i][l] * y[l];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[i]).for_each(|(xv, q)| *xv += yi * q);
        }
        // true residual
        apply(&x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(rv, (bv, wv))| *rv = bv - wv);
    }
}
