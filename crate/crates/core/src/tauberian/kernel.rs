use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::quadrature::{integrate_breakpoints, QuadOptions};
use crate::scalar_renewal::ReturnDistribution;
use crate::special_fn::gamma as gamma_fn;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Parameters of the windowed kernel: `r = e^{-1/n}`, `α = n^{-γ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    pub n: usize,
    pub p: u32,
    pub gamma: f64,
    /// Panels per oscillation half-wavelength `π/n`.
    pub resolution: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `sup |u_j|`, used for the bound on the off-window remainder.
    pub u_bound: Option<f64>,
}

impl KernelParams {
    /// Default window for a sequence of index `β`: `γ = min(β, 1/2)/2`.
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
        }
        Self::with_gamma(n, beta.min(0.5) / 2.0)
    }

    pub fn with_gamma(n: usize, gamma: f64) -> Result<Self> {
        let params = KernelParams { n, p: 2, gamma, resolution: 1.0, abs_tol: 1e-11, rel_tol: 1e-12, u_bound: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_u_bound(mut self, bound: f64) -> Self {
        self.u_bound = Some(bound);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n < 2 * self.p as usize {
            return Err(Error::Invalid(format!("kernel needs p >= 1 and n >= 2p, got n={} p={}", self.n, self.p)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Invalid(format!("kernel gamma must lie in (0,1), got {}", self.gamma)));
        }
        if 1.0 - self.r() > self.alpha() / 4.0 {
            return Err(Error::Invalid(format!("window too narrow: 1-r = {} > alpha/4 = {}", 1.0 - self.r(), self.alpha() / 4.0)));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Invalid("kernel resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        (-1.0 / self.n as f64).exp()
    }

    pub fn alpha(&self) -> f64 {
        (self.n as f64).powf(-self.gamma)
    }

    /// `1 − 2r cos α + r²`.
    pub fn a(&self) -> f64 {
        let r = self.r();
        1.0 - 2.0 * r * self.alpha().cos() + r * r
    }

    /// `2π r^{n−2p} A^p`.
    pub fn normalization(&self) -> f64 {
        let p = self.p as i32;
        2.0 * PI * self.r().powi(self.n as i32 - 2 * p) * self.a().powi(p)
    }

    /// Index of the last coefficient counted by the estimate.
    pub fn last_index(&self) -> usize {
        self.n - 2 * self.p as usize
    }

    /// `(e^{iθ} − e^{iα})^p (e^{iθ} − e^{−iα})^p`.
    pub fn window(&self, theta: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, theta);
        let a = self.alpha();
        ((e - Complex64::from_polar(1.0, a)) * (e - Complex64::from_polar(1.0, -a))).powu(self.p)
    }
}

/// Extracted partial sum `Σ_{j ≤ n−2p} u_j` with its error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEstimate {
    pub n: usize,
    pub last_index: usize,
    pub estimate: f64,
    /// Imaginary part; small for real coefficient sequences.
    pub imag: f64,
    pub quad_error: f64,
    /// Bound on the off-window remainder when `u_bound` is known.
    pub b_bound: Option<f64>,
    pub error_bar: f64,
}

/// Estimates `Σ_{j=0}^{n−2p} u_j` from boundary values of `φ(z) = Σ u_j z^j` on the arc
/// `{r e^{iθ}: |θ| ≤ α}`.
pub fn kernel_extract<F>(mut phi: F, params: &KernelParams) -> Result<KernelEstimate>
where
    F: FnMut(Complex64) -> Complex64,
{
    params.validate()?;
    let n = params.n as f64;
    let r = params.r();
    let alpha = params.alpha();
    let mut integrand = |theta: f64| {
        let z = Complex64::from_polar(r, theta);
        phi(z) / (1.0 - z) * params.window(theta) * Complex64::from_polar(1.0, -n * theta)
    };
    let width = PI / (n * params.resolution);
    let panels = ((2.0 * alpha / width).ceil() as usize).max(2);
    let points: Vec<f64> = (0..=panels).map(|k| -alpha + 2.0 * alpha * k as f64 / panels as f64).collect();
    let norm = params.normalization();
    let opts = QuadOptions {
        abs_tol: params.abs_tol * norm,
        rel_tol: params.rel_tol,
        max_subdivisions: 50 * panels + 2000,
    };
    let q = integrate_breakpoints(&mut integrand, &points, &opts)?;
    let quad_error = q.abs_error / norm;
    let b_bound = match params.u_bound {
        Some(bound) => Some(bound * remainder_weight_sum(params) / norm),
        None => None,
    };
    Ok(KernelEstimate {
        n: params.n,
        last_index: params.last_index(),
        estimate: q.value.re / norm,
        imag: q.value.im / norm,
        quad_error,
        b_bound,
        error_bar: quad_error + b_bound.unwrap_or(0.0),
    })
}

/// `I(m) = ∫_{−α}^{α} (e^{iθ}−e^{iα})^p (e^{iθ}−e^{−iα})^p e^{imθ} / (1 − re^{iθ}) dθ`
/// for `m ∈ [m_lo, m_hi]`.
pub fn window_integrals(params: &KernelParams, m_lo: i64, m_hi: i64) -> Vec<f64> {
    let p = params.p as i64;
    let r = params.r();
    let alpha = params.alpha();
    // Window polynomial (e^{2iθ} − 2cos α e^{iθ} + 1)^p in powers of e^{iθ}.
    let mut kappa = vec![1.0];
    for _ in 0..p {
        let mut next = vec![0.0; kappa.len() + 2];
        for (k, &c) in kappa.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= 2.0 * alpha.cos() * c;
            next[k + 2] += c;
        }
        kappa = next;
    }
    let s = |q: i64| if q == 0 { 2.0 * alpha } else { 2.0 * (q as f64 * alpha).sin() / q as f64 };
    // J(q) = Σ_l r^l S(q+l), summed backwards from where r^l is negligible.
    let q_lo = m_lo;
    let q_hi = m_hi + 2 * p;
    let tail = (40.0 * params.n as f64).ceil() as i64;
    let mut j = vec![0.0; (q_hi - q_lo + 1) as usize];
    let mut acc = 0.0;
    for q in (q_lo..=q_hi + tail).rev() {
        acc = s(q) + r * acc;
        if q <= q_hi {
            j[(q - q_lo) as usize] = acc;
        }
    }
    (m_lo..=m_hi)
        .map(|m| kappa.iter().enumerate().map(|(k, &c)| c * j[(m + k as i64 - q_lo) as usize]).sum())
        .collect()
}

/// Coefficient weights: the extraction equals `Σ_j u_j w_j` for `j = 0..len`.
pub fn kernel_weights(params: &KernelParams, len: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let n = params.n as i64;
    let r = params.r();
    let norm = params.normalization();
    let ints = window_integrals(params, -n, len as i64 - 1 - n);
    Ok(ints.iter().enumerate().map(|(j, &i)| r.powi(j as i32) * i / norm).collect())
}

/// Off-window error `E(m) = I(m) − 2π r^{−(2p+m)} A^p 1_{m ≤ −2p}`.
pub fn window_errors(params: &KernelParams, m_lo: i64, m_hi: i64) -> Vec<f64> {
    let p = params.p as i64;
    let r = params.r();
    let ap = params.a().powi(p as i32);
    window_integrals(params, m_lo, m_hi)
        .into_iter()
        .zip(m_lo..=m_hi)
        .map(|(i, m)| if m <= -2 * p { i - 2.0 * PI * r.powi(-(2 * p + m) as i32) * ap } else { i })
        .collect()
}

fn remainder_weight_sum(params: &KernelParams) -> f64 {
    let n = params.n as i64;
    let r = params.r();
    let jmax = 40 * n;
    let errs = window_errors(params, -n, jmax - n);
    let mut sum: f64 = errs.iter().enumerate().map(|(j, e)| r.powi(j as i32) * e.abs()).sum();
    // Crude bound beyond jmax: |I(m)| ≤ 2α 4^p n.
    let crude = 2.0 * params.alpha() * 4f64.powi(params.p as i32) * params.n as f64;
    sum += crude * r.powi(jmax as i32 + 1) / (1.0 - r);
    sum
}

/// Polynomial `Σ_j c_j z^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        PowerSeries { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `1/(1 − F(z))` for the renewal sequence of a return distribution.
    pub fn renewal_generating(dist: &ReturnDistribution) -> impl Fn(Complex64) -> Complex64 + '_ {
        move |z| {
            let f = dist.probs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
            1.0 / (1.0 - f)
        }
    }
}

/// Coefficients of `(1 − z)^{-γ}`.
pub fn binomial_series(gamma: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0;
    for j in 0..len {
        if j > 0 {
            c *= (j as f64 - 1.0 + gamma) / j as f64;
        }
        out.push(c);
    }
    out
}

/// Hypothesis sample and partial-sum comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct TaubRow {
    pub n: usize,
    pub partial_sum: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaubReport {
    /// `(u, θ, |Φ(e^{−(u−iθ)}) − Σ A_r (u−iθ)^{−γ_r}|, truncation bound)`.
    pub hypothesis: Vec<(f64, f64, f64, f64)>,
    pub rows: Vec<TaubRow>,
    /// Log-log slope of `|residual|` in `n`; `None` when residuals vanish.
    pub slope: Option<f64>,
}

/// Checks a multi-term Tauberian statement empirically: the boundary behaviour of
/// `Φ(z) = Σ u_j z^j` along `path` and the partial sums `Σ_{j<n} u_j` against
/// `Σ_r A_r n^{γ_r}/Γ(1+γ_r)`. `terms` holds `(A_r, γ_r)` with decreasing `γ_r` in `(0,1)`.
pub fn taub_theorem_check(u: &[f64], terms: &[(f64, f64)], ns: &[usize], path: &[(f64, f64)]) -> Result<TaubReport> {
    for w in terms.windows(2) {
        if !(w[0].1 > w[1].1) {
            return Err(Error::Invalid("exponents must be strictly decreasing".into()));
        }
    }
    if terms.iter().any(|&(_, g)| !(g > 0.0 && g < 1.0)) {
        return Err(Error::Invalid("exponents must lie in (0,1)".into()));
    }
    if ns.iter().any(|&n| n > u.len()) {
        return Err(Error::Invalid(format!("n grid exceeds sequence length {}", u.len())));
    }
    let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut hypothesis = Vec::with_capacity(path.len());
    for &(uu, theta) in path {
        if !(uu > 0.0) {
            return Err(Error::Invalid("path needs u > 0".into()));
        }
        let s = Complex64::new(uu, -theta);
        let z = (-s).exp();
        let phi = u.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        let model: Complex64 = terms.iter().map(|&(a, g)| a * s.powf(-g)).sum();
        let trunc = sup * (-uu * u.len() as f64).exp() / (1.0 - (-uu).exp());
        hypothesis.push((uu, theta, (phi - model).norm(), trunc));
    }
    let gammas: Vec<f64> = terms.iter().map(|&(_, g)| gamma_fn(1.0 + g)).collect::<Result<_>>()?;
    let mut prefix = vec![0.0; u.len() + 1];
    for (j, &x) in u.iter().enumerate() {
        prefix[j + 1] = prefix[j] + x;
    }
    let rows: Vec<TaubRow> = ns
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let predicted: f64 = terms.iter().zip(&gammas).map(|(&(a, g), gg)| a * nf.powf(g) / gg).sum();
            TaubRow { n, partial_sum: prefix[n], predicted, residual: prefix[n] - predicted }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let slope = loglog_slope(&xs, &ys).map(|f| f.slope);
    Ok(TaubReport { hypothesis, rows, slope })
}
