//! Small dense helpers: row-major matrix-vector products and an LU solver.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// `y = A x` for a row-major `n×n` complex matrix.
pub fn matvec_c(a: &[Complex64], x: &[Complex64], y: &mut [Complex64]) {
    let n = x.len();
    for (k, yk) in y.iter_mut().enumerate() {
        let row = &a[k * n..(k + 1) * n];
        *yk = row.iter().zip(x).fold(Complex64::new(0.0, 0.0), |s, (r, v)| s + r * v);
    }
}

/// `y = Aᵀ x` for a row-major `n×n` complex matrix.
pub fn matvec_c_t(a: &[Complex64], x: &[Complex64], y: &mut [Complex64]) {
    let n = x.len();
    y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for (k, xk) in x.iter().enumerate() {
        if *xk == Complex64::new(0.0, 0.0) {
            continue;
        }
        let row = &a[k * n..(k + 1) * n];
        for (yi, r) in y.iter_mut().zip(row) {
            *yi += r * xk;
        }
    }
}

/// `y = A x` for a row-major real matrix.
pub fn matvec(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    for (k, yk) in y.iter_mut().enumerate() {
        let row = &a[k * n..(k + 1) * n];
        *yk = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

/// LU factorization with partial pivoting of a row-major complex matrix.
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn new(mut a: Vec<Complex64>, n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Invalid("LU needs a square matrix".into()));
        }
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if best == 0.0 {
                return Err(Error::Invalid("singular matrix in LU".into()));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let t = a[k * n + j];
                        a[i * n + j] -= f * t;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let c = |r: f64, i: f64| Complex64::new(r, i);
        let a = vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(1.0, -1.0)];
        let x = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let mut b = vec![c(0.0, 0.0); 2];
        matvec_c(&a, &x, &mut b);
        let lu = Lu::new(a, 2).unwrap();
        let y = lu.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-14);
        }
    }
}
