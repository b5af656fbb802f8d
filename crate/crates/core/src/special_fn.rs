//! Gamma function, slowly varying models and the normalization constants
//! of the dual ergodic theorems.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation, with reflection below 1/2.
///
/// Returns [`Error::Pole`] at zero and the negative integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    // Exact factorials where they are representable.
    if x >= 1.0 && x <= 171.0 && x == x.floor() {
        return Ok((2..x as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma_lanczos(1.0 - x)));
    }
    Ok(gamma_lanczos(x))
}

fn gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `D_β = Γ(1−β)Γ(1+β)`, with `D_0 = D_1 = 1`.
pub fn d_beta(beta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&beta), "beta must lie in [0,1], got {beta}");
    if beta == 0.0 || beta == 1.0 {
        return 1.0;
    }
    // Both factors are finite away from the endpoints.
    gamma(1.0 - beta).unwrap() * gamma(1.0 + beta).unwrap()
}

/// Largest `j ≥ 0` with `(j+1)β − j > 0`.
pub fn k_max(beta: f64) -> usize {
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0,1), got {beta}");
    let mut j = 0usize;
    while (j as f64 + 2.0) * beta - (j as f64 + 1.0) > 1e-12 {
        j += 1;
    }
    j
}

/// Closed set of slowly varying models, plus a tabulated fallback.
///
/// Models are evaluated at `max(x, 2)`, which keeps them finite and
/// positive on `[1, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SlowlyVarying {
    Constant(f64),
    /// `c / log x`
    InverseLog(f64),
    /// `c · log^p x`
    LogPower { c: f64, p: f64 },
    /// Log-log linear interpolation through `(x, value)` pairs, constant outside.
    Tabulated { x: Vec<f64>, values: Vec<f64> },
}

impl SlowlyVarying {
    pub fn tabulated(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() != values.len() || x.is_empty() {
            return Err(Error::Invalid("tabulated model needs matching non-empty arrays".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || x[0] <= 0.0 {
            return Err(Error::Invalid("tabulated abscissae must be positive and increasing".into()));
        }
        if values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Invalid("tabulated values must be positive".into()));
        }
        Ok(SlowlyVarying::Tabulated { x, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.max(2.0);
        match self {
            SlowlyVarying::Constant(c) => *c,
            SlowlyVarying::InverseLog(c) => c / x.ln(),
            SlowlyVarying::LogPower { c, p } => c * x.ln().powf(*p),
            SlowlyVarying::Tabulated { x: xs, values } => {
                if x <= xs[0] {
                    return values[0];
                }
                if x >= xs[xs.len() - 1] {
                    return values[values.len() - 1];
                }
                let k = xs.partition_point(|&t| t <= x) - 1;
                let t = (x.ln() - xs[k].ln()) / (xs[k + 1].ln() - xs[k].ln());
                (values[k].ln() * (1.0 - t) + values[k + 1].ln() * t).exp()
            }
        }
    }

    /// Sampled slow-variation check over `x = 10^2..10^7` and the given ratios.
    pub fn slow_variation_check(&self, lambdas: &[f64]) -> SlowVariationReport {
        let xs: Vec<f64> = (2..=7).map(|k| 10f64.powi(k)).collect();
        let max_dev: Vec<f64> = xs
            .iter()
            .map(|&x| {
                lambdas
                    .iter()
                    .map(|&l| (self.eval(l * x) / self.eval(x) - 1.0).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let non_increasing = max_dev.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
        SlowVariationReport { xs, max_dev, non_increasing }
    }
}

#[derive(Clone, Debug)]
pub struct SlowVariationReport {
    pub xs: Vec<f64>,
    /// `max_λ |ℓ(λx)/ℓ(x) − 1|` at each sampled `x`.
    pub max_dev: Vec<f64>,
    pub non_increasing: bool,
}

/// `ℓ` together with an auxiliary `ℓ̂` dominating its additive increments.
#[derive(Clone, Debug, PartialEq)]
pub struct DeHaanModel {
    pub base: SlowlyVarying,
    pub aux: SlowlyVarying,
}

impl DeHaanModel {
    /// Smallest `C` with `|ℓ(αx) − ℓ(x)| ≤ C ℓ̂(x)` on the standard sample.
    pub fn check(&self) -> DeHaanReport {
        let alphas = [0.5, 1.0, 2.0, 4.0];
        let xs: Vec<f64> = (2..=7).map(|k| 10f64.powi(k)).collect();
        let ratios: Vec<f64> = xs
            .iter()
            .map(|&x| {
                alphas
                    .iter()
                    .map(|&a| (self.base.eval(a * x) - self.base.eval(x)).abs() / self.aux.eval(x))
                    .fold(0.0, f64::max)
            })
            .collect();
        let constant = ratios.iter().cloned().fold(0.0, f64::max);
        DeHaanReport { xs, ratios, constant }
    }
}

#[derive(Clone, Debug)]
pub struct DeHaanReport {
    pub xs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub constant: f64,
}

/// `ℓ̃(n) = Σ_{j≤n} ℓ(j)/j`.
pub fn ell_tilde(ell: &SlowlyVarying, n: u64) -> f64 {
    assert!(n >= 1, "ell_tilde needs n >= 1");
    (1..=n).map(|j| ell.eval(j as f64) / j as f64).sum()
}

/// `β`, `D_β` and the scale function `m(n)` of the first-order law.
#[derive(Clone, Debug)]
pub struct NormalizationConstants {
    pub beta: f64,
    pub d_beta: f64,
    pub ell: SlowlyVarying,
}

impl NormalizationConstants {
    pub fn new(beta: f64, ell: SlowlyVarying) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Invalid(format!("beta must lie in [0,1], got {beta}")));
        }
        Ok(Self { beta, d_beta: d_beta(beta), ell })
    }

    /// `ℓ(n)` for `β < 1`, `ℓ̃(n)` for `β = 1`.
    pub fn m_of_n(&self, n: u64) -> f64 {
        if self.beta < 1.0 {
            self.ell.eval(n as f64)
        } else {
            ell_tilde(&self.ell, n)
        }
    }

    /// `a_n = D_β^{-1} n^β / m(n)`.
    pub fn a_n(&self, n: u64) -> f64 {
        (n as f64).powf(self.beta) / (self.d_beta * self.m_of_n(n))
    }
}
