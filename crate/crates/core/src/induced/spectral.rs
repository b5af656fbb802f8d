use super::InducedOperator;
use crate::error::{Error, Result};
use crate::grid::GridObservable;
use crate::linalg::{matvec_c, matvec_c_t};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Minimal `|λ| − |λ₂|` accepted.
    pub min_gap: f64,
    /// Include the lumped `φ > N` branches weighted by `z^{N+1}`.
    pub closed: bool,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 20_000, min_gap: 0.05, closed: true }
    }
}

/// Leading eigen-data of `R(z)` acting on functions in `L¹(μ)`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub z: Complex64,
    pub lambda: Complex64,
    /// Right eigenfunction with `∫_Y v dμ = 1`.
    pub v: Vec<Complex64>,
    /// Left eigenvector, scaled so that `⟨ℓ, v⟩ = 1`.
    pub left: Vec<Complex64>,
    /// Estimate of the modulus of the second eigenvalue.
    pub second_modulus: f64,
    /// `‖R(z)v − λv‖_∞`.
    pub residual: f64,
    h: Vec<f64>,
    w: f64,
}

impl SpectralData {
    /// `P(z) f = v ⟨ℓ, f⟩`.
    pub fn project(&self, f: &[Complex64]) -> Vec<Complex64> {
        let s = self.left.iter().zip(f).fold(Complex64::new(0.0, 0.0), |a, (l, x)| a + l * x);
        self.v.iter().map(|x| x * s).collect()
    }

    /// `∫_Y f dμ` with the density used to build the data.
    pub fn mu_integral(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.h).fold(Complex64::new(0.0, 0.0), |a, (x, h)| a + x * h) * self.w
    }

    pub fn eigengap(&self) -> f64 {
        self.lambda.norm() - self.second_modulus
    }
}

/// `R^μ(z) = D_h^{-1} R(z) D_h` as a dense row-major matrix.
pub(crate) fn mu_conjugate(op: &InducedOperator, h: &GridObservable, z: Complex64, closed: bool) -> Vec<Complex64> {
    let m = op.grid().cells();
    let mut a = if closed { op.r_of_z_closed(z) } else { op.r_of_z(z) };
    for k in 0..m {
        for i in 0..m {
            a[k * m + i] *= h.values[i] / h.values[k];
        }
    }
    a
}

pub fn spectral_data(op: &InducedOperator, h: &GridObservable, z: Complex64) -> Result<SpectralData> {
    spectral_data_with(op, h, z, &SpectralOptions::default())
}

pub fn spectral_data_with(
    op: &InducedOperator,
    h: &GridObservable,
    z: Complex64,
    opts: &SpectralOptions,
) -> Result<SpectralData> {
    if z.norm() > 1.0 + 1e-15 {
        return Err(Error::Invalid(format!("|z| = {} exceeds one", z.norm())));
    }
    if h.values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Invalid("density must be positive on every cell".into()));
    }
    let m = op.grid().cells();
    let w = op.grid().width();
    let a = mu_conjugate(op, h, z, opts.closed);
    let mu = |f: &[Complex64]| f.iter().zip(&h.values).fold(Complex64::new(0.0, 0.0), |s, (x, hh)| s + x * hh) * w;
    let zero = Complex64::new(0.0, 0.0);

    // Right eigenvector.
    let mut v = vec![Complex64::new(1.0, 0.0); m];
    let mut next = vec![zero; m];
    let mut lambda = zero;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        matvec_c(&a, &v, &mut next);
        let s = mu(&next);
        if s == zero {
            return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
        }
        lambda = s / mu(&v);
        residual = next.iter().zip(&v).map(|(p, q)| (p - lambda * q).norm()).fold(0.0, f64::max);
        let scale = lambda.norm().max(1e-300);
        next.iter_mut().for_each(|x| *x /= s);
        std::mem::swap(&mut v, &mut next);
        if residual <= opts.tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: opts.max_iter, residual });
    }

    // Left eigenvector.
    let mut l: Vec<Complex64> = h.values.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let mut lres = f64::INFINITY;
    converged = false;
    let lv0 = dot(&l, &v);
    l.iter_mut().for_each(|x| *x /= lv0);
    for _ in 0..opts.max_iter {
        matvec_c_t(&a, &l, &mut next);
        // With ⟨ℓ, v⟩ = 1, the Rayleigh-type quotient is ⟨Aᵀℓ, v⟩.
        let lam_l = dot(&next, &v);
        lres = next.iter().zip(&l).map(|(p, q)| (p - lam_l * q).norm()).fold(0.0, f64::max)
            / l.iter().fold(0.0f64, |s, x| s.max(x.norm()));
        next.iter_mut().for_each(|x| *x /= lam_l);
        std::mem::swap(&mut l, &mut next);
        if lres <= opts.tol * lambda.norm().max(1e-300) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: opts.max_iter, residual: lres });
    }
    let lv = dot(&l, &v);
    l.iter_mut().for_each(|x| *x /= lv);

    // Second eigenvalue modulus by power iteration on the deflated operator.
    let mut x: Vec<Complex64> = (0..m).map(|i| Complex64::new(((i * 7919) % 97) as f64 / 97.0 - 0.5, 0.0)).collect();
    deflate(&mut x, &v, &l);
    let mut growth = Vec::new();
    for it in 0..400 {
        let nx = x.iter().fold(0.0, |s, c| s + c.norm_sqr()).sqrt();
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|c| *c /= nx);
        matvec_c(&a, &x, &mut next);
        deflate(&mut next, &v, &l);
        let g = next.iter().fold(0.0, |s, c| s + c.norm_sqr()).sqrt();
        if it >= 300 {
            growth.push(g.max(1e-300).ln());
        }
        std::mem::swap(&mut x, &mut next);
    }
    let second = if growth.is_empty() { 0.0 } else { (growth.iter().sum::<f64>() / growth.len() as f64).exp() };
    let sd = SpectralData { z, lambda, v, left: l, second_modulus: second, residual, h: h.values.clone(), w };
    if sd.eigengap() < opts.min_gap {
        return Err(Error::Eigengap { gap: sd.eigengap(), threshold: opts.min_gap, z: format!("{z}") });
    }
    Ok(sd)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |s, (x, y)| s + x * y)
}

fn deflate(x: &mut [Complex64], v: &[Complex64], l: &[Complex64]) {
    let c = dot(l, x);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= c * vi;
    }
}
