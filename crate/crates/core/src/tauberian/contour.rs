use crate::error::{Error, Result};
use crate::quadrature::{integrate_breakpoints, QuadOptions};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex quadrature result with its error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourValue {
    pub value: Complex64,
    pub error_bar: f64,
}

fn panel_points(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=n).map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 }).collect()
}

/// `∫_0^R e^{-sx} (sx)^{-β} s dx` with `s = u − iθ`; tends to `Γ(1−β)` as `R → ∞`.
pub fn contour_b1(beta: f64, u: f64, theta: f64, r: f64) -> Result<ContourValue> {
    if !(beta > 0.0 && beta < 1.0) || !(u > 0.0) || theta == 0.0 || !(r > 0.0) {
        return Err(Error::Invalid("contour_b1 needs beta in (0,1), u > 0, theta != 0, R > 0".into()));
    }
    let s = Complex64::new(u, -theta);
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 200_000 };
    let f = |x: f64| (-s * x).exp() * (s * x).powf(-beta) * s;
    // x = t^{1/(1−β)} removes the endpoint singularity on [0, x0].
    let x0 = r.min(1.0);
    let q = 1.0 / (1.0 - beta);
    let t0 = x0.powf(1.0 - beta);
    let mut g = |t: f64| if t == 0.0 { (-s * 0.0).exp() * s.powf(-beta) * s * q } else { f(t.powf(q)) * q * t.powf(q - 1.0) };
    let head = integrate_breakpoints(&mut g, &panel_points(0.0, t0, 0.25), &opts)?;
    let mut value = head.value;
    let mut err = head.abs_error;
    if r > x0 {
        let width = (PI / theta.abs()).min(1.0);
        let mut ff = f;
        let body = integrate_breakpoints(&mut ff, &panel_points(x0, r, width), &opts)?;
        value += body.value;
        err += body.abs_error;
    }
    Ok(ContourValue { value, error_bar: err })
}

/// `∫_{-S}^{S} (1−iσ)^{-(β+1)} e^{-iσ} dσ` without tail corrections, for any `β > −1`.
pub fn contour_b2_truncated(beta: f64, s: f64) -> Result<ContourValue> {
    if !(beta > -1.0) || !(s > 0.0) {
        return Err(Error::Invalid("truncated B2 needs beta > -1 and S > 0".into()));
    }
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-14, max_subdivisions: 400_000 };
    let mut f = |x: f64| Complex64::new(1.0, -x).powf(-(beta + 1.0)) * Complex64::new(0.0, -x).exp();
    let r = integrate_breakpoints(&mut f, &panel_points(-s, s, 2.0 * PI), &opts)?;
    Ok(ContourValue { value: r.value, error_bar: r.abs_error })
}

/// `∫_ℝ (1−iσ)^{-(β+1)} e^{-iσ} dσ = (2π/e)/Γ(1+β)`.
///
/// Truncated at `|σ| = 10^5`; both tails are added by two integrations by
/// parts, whose remainder is bounded by `(β+1) S^{-β-2}` per side.
pub fn contour_b2(beta: f64) -> Result<ContourValue> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Invalid(format!("contour_b2 needs beta in (0,1), got {beta}")));
    }
    let s = 1e5;
    let core = contour_b2_truncated(beta, s)?;
    let g = |x: f64| Complex64::new(1.0, -x).powf(-(beta + 1.0));
    let dg = |x: f64| Complex64::new(0.0, beta + 1.0) * Complex64::new(1.0, -x).powf(-(beta + 2.0));
    let i = Complex64::new(0.0, 1.0);
    // Antiderivative of g e^{-iσ} up to O(g''): e^{-iσ}(i g + g').
    let anti = |x: f64| Complex64::new(0.0, -x).exp() * (i * g(x) + dg(x));
    let tails = -anti(s) + anti(-s);
    let rem = 2.0 * (beta + 1.0) * s.powf(-beta - 2.0);
    Ok(ContourValue { value: core.value + tails, error_bar: core.error_bar + rem })
}

/// `∫_{-n^{-γ}}^{n^{-γ}} e^{-inθ} (1/n − iθ)^{-(ρ+1)} dθ`, whose main term is `(2π/e) n^ρ/Γ(1+ρ)`.
pub fn contour_b3(rho: f64, gamma: f64, n: u64) -> Result<ContourValue> {
    if !(rho > 0.0) || !(gamma > 0.0 && gamma < 1.0) || n < 10 {
        return Err(Error::Invalid("contour_b3 needs rho > 0, gamma in (0,1), n >= 10".into()));
    }
    let nf = n as f64;
    let a = nf.powf(-gamma);
    let opts = QuadOptions { abs_tol: 1e-14 * nf.powf(rho), rel_tol: 1e-13, max_subdivisions: 400_000 };
    let mut f = |t: f64| Complex64::new(0.0, -nf * t).exp() * Complex64::new(1.0 / nf, -t).powf(-(rho + 1.0));
    // Panels on the scale of the oscillation 1/n.
    let r = integrate_breakpoints(&mut f, &panel_points(-a, a, PI / nf), &opts)?;
    Ok(ContourValue { value: r.value, error_bar: r.abs_error })
}
