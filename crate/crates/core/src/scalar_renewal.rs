//! Scalar renewal sequences, the Karamata first-order law, the constant
//! `c_H` and the higher-order expansion of partial sums.

use crate::error::{Error, Result};
use crate::fit::{loglog_slope, LineFit};
use crate::special_fn::{gamma, k_max, NormalizationConstants, SlowlyVarying};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Return-time law `P(X = j) = f_j`, `j = 1..=N`, with the mass beyond `N` kept separately.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnDistribution {
    /// `f[0] = 0`, `f[j] = P(X = j)`.
    f: Vec<f64>,
    tail_beyond: f64,
}

impl ReturnDistribution {
    /// From probabilities `f_1..f_N`; the deficit `1 − Σ f_j` is mass beyond `N`.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Invalid("probabilities must be non-negative".into()));
        }
        let s: f64 = probs.iter().sum();
        if s > 1.0 + 1e-12 {
            return Err(Error::Invalid(format!("probabilities sum to {s} > 1")));
        }
        let mut f = vec![0.0];
        f.extend_from_slice(probs);
        Ok(Self { f, tail_beyond: (1.0 - s).max(0.0) })
    }

    /// From tail values `T(0) = 1, T(1), …, T(N)`.
    pub fn from_tail(tail: &[f64]) -> Result<Self> {
        if tail.is_empty() || (tail[0] - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid("tail must start with T(0) = 1".into()));
        }
        if tail.windows(2).any(|w| w[1] > w[0] + 1e-15) || tail.iter().any(|t| *t < 0.0) {
            return Err(Error::Invalid("tail must be non-increasing and non-negative".into()));
        }
        let mut f = vec![0.0];
        f.extend(tail.windows(2).map(|w| (w[0] - w[1]).max(0.0)));
        Ok(Self { f, tail_beyond: *tail.last().unwrap() })
    }

    /// Exact power tail `T(n) = n^{-β}` for `n ≥ 1`, tabulated to `N`.
    pub fn power_tail(beta: f64, n: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Invalid(format!("power tail needs beta in (0,1), got {beta}")));
        }
        let mut f = vec![0.0, 0.0];
        for j in 2..=n {
            let a = (j - 1) as f64;
            // (j−1)^{-β} − j^{-β} without cancellation.
            f.push(-a.powf(-beta) * (-beta * (1.0 / a).ln_1p()).exp_m1());
        }
        Ok(Self { f, tail_beyond: (n as f64).powf(-beta) })
    }

    pub fn n(&self) -> usize {
        self.f.len() - 1
    }

    pub fn f(&self, j: usize) -> f64 {
        self.f.get(j).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.f
    }

    pub fn tail_beyond(&self) -> f64 {
        self.tail_beyond
    }

    /// `T(n) = Σ_{j>n} f_j`.
    pub fn tail(&self, n: usize) -> f64 {
        self.tail_beyond + self.f.iter().skip(n + 1).sum::<f64>()
    }

    /// `|Σ f_j + mass beyond N − 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.f.iter().sum::<f64>() + self.tail_beyond - 1.0).abs()
    }
}

/// `u_0 = 1`, `u_n = Σ_{j=1}^n f_j u_{n−j}` and partial sums `U_n = Σ_{j≤n} u_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarRenewal {
    pub u: Vec<f64>,
    pub partial: Vec<f64>,
}

impl ScalarRenewal {
    pub fn from_u(u: Vec<f64>) -> Self {
        let mut partial = Vec::with_capacity(u.len());
        let mut s = 0.0;
        for x in &u {
            s += x;
            partial.push(s);
        }
        Self { u, partial }
    }

    pub fn n_max(&self) -> usize {
        self.u.len() - 1
    }

    /// `Σ_{j<n} u_j`.
    pub fn sum_below(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.partial[n - 1]
        }
    }
}

/// Direct `O(n²)` recursion.
pub fn renewal_sequence_direct(dist: &ReturnDistribution, n_max: usize) -> ScalarRenewal {
    let mut u = vec![0.0; n_max + 1];
    u[0] = 1.0;
    let f = dist.probs();
    for n in 1..=n_max {
        let jmax = n.min(f.len() - 1);
        let mut s = 0.0;
        for j in 1..=jmax {
            s += f[j] * u[n - j];
        }
        u[n] = s;
    }
    ScalarRenewal::from_u(u)
}

/// `u = 1/(1 − F(z))` by Newton iteration on power series with FFT products.
pub fn renewal_sequence_fft(dist: &ReturnDistribution, n_max: usize) -> ScalarRenewal {
    let len = n_max + 1;
    let mut a = vec![0.0; len];
    a[0] = 1.0;
    for (j, fj) in dist.probs().iter().enumerate().skip(1).take(n_max) {
        a[j] = -fj;
    }
    let mut planner = FftPlanner::new();
    let mut b = vec![1.0];
    while b.len() < len {
        let k = b.len();
        let k2 = (2 * k).min(len);
        let ab = convolve(&mut planner, &a[..k2], &b, k2);
        // 1 − A·B vanishes below degree k; only the upper half matters.
        let e: Vec<f64> = ab[k..k2].iter().map(|x| -x).collect();
        let corr = convolve(&mut planner, &b[..(k2 - k)], &e, k2 - k);
        b.extend_from_slice(&corr);
    }
    ScalarRenewal::from_u(b)
}

/// First `len` coefficients of `a·b`.
fn convolve(planner: &mut FftPlanner<f64>, a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0.0; len];
        for (i, x) in a.iter().enumerate().take(len) {
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex64> = a.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fb.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let s = 1.0 / size as f64;
    fa.iter().take(len).map(|c| c.re * s).collect()
}

/// Reference path for short sequences, FFT path otherwise.
pub fn renewal_sequence(dist: &ReturnDistribution, n_max: usize) -> ScalarRenewal {
    if n_max <= 4096 {
        renewal_sequence_direct(dist, n_max)
    } else {
        renewal_sequence_fft(dist, n_max)
    }
}

/// `D_β^{-1} n^β / m(n)`.
pub fn karamata_first_order(beta: f64, ell: &SlowlyVarying, n: u64) -> Result<f64> {
    Ok(NormalizationConstants::new(beta, ell.clone())?.a_n(n))
}

#[derive(Clone, Copy, Debug)]
pub struct CHResult {
    pub value: f64,
    pub error_bar: f64,
    pub cutoff: u64,
}

/// `c_H = −Γ(1−β)^{-1} ∫_0^∞ H_1`, where `H_1(x) = T([x])/c − x^{-β}` and the
/// tail `T(n) = c(n^{-β} + H(n))` for `n ≥ 1`, `T(x) = 1` on `[0, 1)`.
///
/// Unit intervals are integrated in closed form up to the cutoff `X`; the
/// power part beyond `X` is summed by Euler–Maclaurin, and the remainder of
/// `Σ H` is bounded assuming `|H(n)| ≤ C n^{-2β}` with `C` fitted on `[X/2, X]`.
pub fn compute_ch<H: Fn(u64) -> f64>(beta: f64, c: f64, h: H) -> Result<CHResult> {
    compute_ch_with(beta, c, h, 1_000_000)
}

pub fn compute_ch_with<H: Fn(u64) -> f64>(beta: f64, c: f64, h: H, cutoff: u64) -> Result<CHResult> {
    if !(beta > 0.5) {
        return Err(Error::Divergence(format!("c_H needs beta > 1/2, got {beta}")));
    }
    if !(beta < 1.0 && c > 0.0) {
        return Err(Error::Invalid("c_H needs beta < 1 and c > 0".into()));
    }
    let om = 1.0 - beta;
    let mut s = 1.0 / c - 1.0 / om;
    let mut sh = 0.0;
    let mut hsup: f64 = 0.0;
    for n in 1..cutoff {
        let x = n as f64;
        // n^{-β} − ∫_n^{n+1} x^{-β} dx
        let int = x.powf(om) * (om * (1.0 / x).ln_1p()).exp_m1() / om;
        s += x.powf(-beta) - int;
        let hn = h(n);
        sh += hn;
        if 2 * n >= cutoff {
            hsup = hsup.max(hn.abs() * x.powf(2.0 * beta));
        }
    }
    let xx = cutoff as f64;
    let b = beta;
    // Σ_{n≥X} n^{-β} − ∫_X^∞ x^{-β} dx
    let em = 0.5 * xx.powf(-b) + b / 12.0 * xx.powf(-b - 1.0) - b * (b + 1.0) * (b + 2.0) / 720.0 * xx.powf(-b - 3.0);
    let em_err = b * (b + 1.0) * (b + 2.0) * (b + 3.0) * (b + 4.0) / 30240.0 * xx.powf(-b - 5.0);
    let total = s + em + sh;
    let g = gamma(1.0 - beta)?;
    let h_tail = hsup * xx.powf(1.0 - 2.0 * beta) / (2.0 * beta - 1.0);
    let rounding = 1e-15 * (cutoff as f64).sqrt() * (1.0 + total.abs());
    Ok(CHResult { value: -total / g, error_bar: (em_err + h_tail + rounding) / g, cutoff })
}

/// `d_j = c_H^j / Γ((j+1)β − (j−1))` and exponents `(j+1)β − j`, `j = 0..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticExpansion {
    pub beta: f64,
    pub c: f64,
    pub c_h: f64,
    pub c_h_error: f64,
    pub k: usize,
    pub d: Vec<f64>,
    pub exponents: Vec<f64>,
    /// Terms switched off for necessity checks.
    pub active: Vec<bool>,
}

impl AsymptoticExpansion {
    /// Full expansion for `β > 1/2`; the first-order term alone for `β ≤ 1/2`.
    pub fn new(beta: f64, c: f64, c_h: f64, c_h_error: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Invalid(format!("expansion needs beta in (0,1), got {beta}")));
        }
        let k = if beta > 0.5 { k_max(beta) } else { 0 };
        let mut d = Vec::new();
        let mut exponents = Vec::new();
        for j in 0..=k {
            let jf = j as f64;
            d.push(c_h.powi(j as i32) / gamma((jf + 1.0) * beta - (jf - 1.0))?);
            exponents.push((jf + 1.0) * beta - jf);
        }
        Ok(Self { beta, c, c_h, c_h_error, k, d, exponents, active: vec![true; k + 1] })
    }

    pub fn without(mut self, j: usize) -> Self {
        if j < self.active.len() {
            self.active[j] = false;
        }
        self
    }

    /// `cΓ(1−β)`.
    pub fn normalization(&self) -> f64 {
        self.c * gamma(1.0 - self.beta).unwrap()
    }

    /// `Σ d_j n^{(j+1)β−j}` over active terms.
    pub fn eval(&self, n: f64) -> f64 {
        (0..=self.k).filter(|j| self.active[*j]).map(|j| self.d[j] * n.powf(self.exponents[j])).sum()
    }

    /// Scalar coefficients `C_j = d_j / (cΓ(1−β))`.
    pub fn scalar_coefficients(&self) -> Vec<f64> {
        let z = self.normalization();
        self.d.iter().map(|d| d / z).collect()
    }

    /// Prediction for `Σ_{j<n} u_j`.
    pub fn eval_scalar(&self, n: f64) -> f64 {
        self.eval(n) / self.normalization()
    }

    /// Propagated uncertainty of [`Self::eval_scalar`] from the `c_H` error bar.
    pub fn eval_scalar_error(&self, n: f64) -> f64 {
        let dd: f64 = (1..=self.k)
            .filter(|j| self.active[*j])
            .map(|j| (j as f64) * self.d[j] / self.c_h * n.powf(self.exponents[j]))
            .sum();
        (dd * self.c_h_error).abs() / self.normalization()
    }
}

pub fn higher_order_eval(exp: &AsymptoticExpansion, n: f64) -> f64 {
    exp.eval(n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualRow {
    pub n: u64,
    pub partial_sum: f64,
    pub expansion: f64,
    pub residual: f64,
    pub error_bar: f64,
}

#[derive(Clone, Debug)]
pub struct ResidualTable {
    pub rows: Vec<ResidualRow>,
    pub slope: Option<LineFit>,
}

/// Residuals `Σ_{j<n} u_j − prediction` at the given `n` with a log-log slope fit.
pub fn residual_diagnostics(seq: &ScalarRenewal, exp: &AsymptoticExpansion, ns: &[u64]) -> Result<ResidualTable> {
    if seq.n_max() < 1000 {
        return Err(Error::Invalid("residual diagnostics need a sequence of length >= 1000".into()));
    }
    let mut rows = Vec::new();
    for &n in ns {
        if n as usize > seq.n_max() + 1 || n == 0 {
            return Err(Error::Invalid(format!("n = {n} outside the computed range")));
        }
        let p = seq.sum_below(n as usize);
        let e = exp.eval_scalar(n as f64);
        rows.push(ResidualRow {
            n,
            partial_sum: p,
            expansion: e,
            residual: p - e,
            error_bar: exp.eval_scalar_error(n as f64) + 1e-13 * p.abs(),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    Ok(ResidualTable { slope: loglog_slope(&x, &y), rows })
}

/// `U_n D_β n^{-β} m(n)`, the ratio that tends to one under the first-order law.
pub fn karamata_ratio(seq: &ScalarRenewal, beta: f64, ell: &SlowlyVarying, n: usize) -> f64 {
    seq.partial[n] / karamata_first_order(beta, ell, n as u64).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_returns() {
        let d = ReturnDistribution::from_probs(&[1.0]).unwrap();
        let s = renewal_sequence_direct(&d, 10);
        assert!(s.u.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn two_point() {
        let d = ReturnDistribution::from_probs(&[0.5, 0.5]).unwrap();
        let s = renewal_sequence_direct(&d, 200);
        assert_eq!(&s.u[..4], &[1.0, 0.5, 0.75, 0.625]);
        assert!((s.u[200] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fft_matches_direct() {
        let d = ReturnDistribution::power_tail(0.6, 5000).unwrap();
        let a = renewal_sequence_direct(&d, 5000);
        let b = renewal_sequence_fft(&d, 5000);
        let err = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "max deviation {err}");
    }

    #[test]
    fn power_tail_normalized() {
        let d = ReturnDistribution::power_tail(0.3, 1000).unwrap();
        assert!(d.normalization_error() < 1e-12);
        assert!((d.tail(10) - 10f64.powf(-0.3)).abs() < 1e-13);
        assert_eq!(d.f(1), 0.0);
    }

    #[test]
    fn ch_rejects_small_beta() {
        assert!(matches!(compute_ch(0.5, 1.0, |_| 0.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn expansion_at_half() {
        let e = AsymptoticExpansion::new(0.5, 1.0, 0.3, 0.0).unwrap();
        assert_eq!(e.k, 0);
        assert!((e.d[0] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }
}
