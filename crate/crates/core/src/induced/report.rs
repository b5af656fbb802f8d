use super::renewal::RenewalAccumulator;
use super::spectral::{mu_conjugate, spectral_data_with, SpectralOptions};
use super::{InducedOperator, ReturnStructure};
use crate::error::{Error, Result};
use crate::fit::{loglog_slope, LineFit};
use crate::grid::GridObservable;
use crate::linalg::Lu;
use crate::maps::{MapFamily, MapSpec, TailModel};
use crate::scalar_renewal::{compute_ch_with, AsymptoticExpansion};
use crate::special_fn::{d_beta, gamma};
use num_complex::Complex64;

fn map_spec(op: &InducedOperator) -> Result<MapSpec> {
    match op.structure() {
        ReturnStructure::Map(s) => Ok(s),
        ReturnStructure::Doubling => Err(Error::Invalid("the synthetic full shift has no return-time tail".into())),
    }
}

/// Tabulated `μ(φ > n)` for `n ≤ N` from the operator's density.
pub fn operator_tail_model(op: &InducedOperator, h: &GridObservable) -> Result<TailModel> {
    map_spec(op)?;
    let tail = op.tail_sequence().expect("map operators carry their tail sequence");
    TailModel::from_density(tail, h)
}

/// Which asymptotic terms the report subtracts.
#[derive(Clone, Debug)]
pub enum ExpansionTerms {
    /// All terms `d_0..d_k`, with `c_H` computed from the tabulated tail.
    Full,
    /// Only `d_0`.
    FirstOrder,
    /// A caller-supplied expansion.
    Custom(AsymptoticExpansion),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualErgodicRow {
    pub n: u64,
    /// `sup_Y |a_n^{-1} S_n − ∫v dμ|`.
    pub sup_dev: f64,
    /// Largest and smallest signed residual over the grid.
    pub residual_max: f64,
    pub residual_min: f64,
    /// Uncertainty of the subtracted expansion plus the truncation deficit.
    pub error_bar: f64,
}

#[derive(Clone, Debug)]
pub struct DualErgodicReport {
    pub beta: f64,
    pub c: f64,
    pub mean: f64,
    pub expansion: Option<AsymptoticExpansion>,
    pub rows: Vec<DualErgodicRow>,
    pub sup_dev_slope: Option<LineFit>,
    pub residual_slope: Option<LineFit>,
}

impl DualErgodicRow {
    pub fn residual_sup(&self) -> f64 {
        self.residual_max.abs().max(self.residual_min.abs())
    }
}

/// Uniform dual-ergodic diagnostics from computed partial sums.
///
/// For `β > 0` the residual is `cΓ(1−β) S_{n−1} − Σ d_j n^{(j+1)β−j} ∫v dμ`;
/// for `β = 0` it is `c S_n − log n ∫v dμ`.
pub fn dual_ergodic_report(
    op: &InducedOperator,
    h: &GridObservable,
    v: &GridObservable,
    acc: &RenewalAccumulator,
    ns: &[u64],
    terms: ExpansionTerms,
) -> Result<DualErgodicReport> {
    let spec = map_spec(op)?;
    let beta = spec.beta();
    let c = spec.tail_constant(h.values[0]);
    let mean = v.integral_against(h);
    let expansion = if beta > 0.0 && beta < 1.0 {
        Some(match terms {
            ExpansionTerms::Custom(e) => e,
            ExpansionTerms::FirstOrder => AsymptoticExpansion::new(beta, c, 0.0, 0.0)?,
            ExpansionTerms::Full => {
                if beta > 0.5 {
                    let tm = operator_tail_model(op, h)?;
                    let nt = tm.len() - 1;
                    let ch = compute_ch_with(beta, c, |n| if (n as usize) <= nt { tm.remainder(n as usize) } else { 0.0 }, (nt as u64).max(2))?;
                    AsymptoticExpansion::new(beta, c, ch.value, ch.error_bar)?
                } else {
                    AsymptoticExpansion::new(beta, c, 0.0, 0.0)?
                }
            }
        })
    } else {
        None
    };
    let db = d_beta(beta);
    let mut rows = Vec::new();
    for &n in ns {
        let n_us = n as usize;
        if n_us > acc.n_max || n < 2 {
            return Err(Error::Invalid(format!("n = {n} outside [2, {}]", acc.n_max)));
        }
        let nf = n as f64;
        let a_n = if beta > 0.0 { nf.powf(beta) / (db * c) } else { nf.ln() / c };
        let s = acc.partial_sum(n_us);
        let sup_dev = s.iter().map(|x| (x / a_n - mean).abs()).fold(0.0, f64::max);
        let (resid, err): (Vec<f64>, f64) = match &expansion {
            Some(e) => {
                let s1 = acc.partial_sum(n_us - 1);
                let z = e.normalization();
                let pred = e.eval(nf) * mean;
                (s1.iter().map(|x| z * x - pred).collect(), e.eval_scalar_error(nf) * z * mean.abs())
            }
            None => (s.iter().map(|x| c * x - nf.ln() * mean).collect(), 0.0),
        };
        let residual_max = resid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let residual_min = resid.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(DualErgodicRow { n, sup_dev, residual_max, residual_min, error_bar: err });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let sd: Vec<f64> = rows.iter().map(|r| r.sup_dev).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.residual_sup()).collect();
    Ok(DualErgodicReport {
        beta,
        c,
        mean,
        expansion,
        sup_dev_slope: loglog_slope(&x, &sd),
        residual_slope: loglog_slope(&x, &rs),
        rows,
    })
}

/// `(u, ratio)` with ratio `(1−λ(e^{-u})) u^{-β} / (cΓ(1−β))` for LSV, or
/// `(1−λ(e^{-u})) log(1/u) / c` for LSV0; both tend to one as `u → 0`.
pub fn first_order_law(op: &InducedOperator, h: &GridObservable, us: &[f64]) -> Result<Vec<(f64, f64)>> {
    let spec = map_spec(op)?;
    let beta = spec.beta();
    let c = spec.tail_constant(h.values[0]);
    let opts = SpectralOptions { min_gap: 0.0, ..SpectralOptions::default() };
    us.iter()
        .map(|&u| {
            let sd = spectral_data_with(op, h, Complex64::new((-u).exp(), 0.0), &opts)?;
            let gap = 1.0 - sd.lambda.re;
            let r = match spec.family() {
                MapFamily::Lsv => gap * u.powf(-beta) / (c * gamma(1.0 - beta)?),
                MapFamily::Lsv0 => gap * (1.0 / u).ln() / c,
            };
            Ok((u, r))
        })
        .collect()
}

/// Operator-norm proxy of `Γ(1−β) ℓ(1/|s|) s^β T(z) − P` along `z = e^{-s}`,
/// `s = u − iθ`, using the probes `1`, `1_{[1/2,3/4]}` and a linear ramp.
pub fn resolvent_norm_proxy(op: &InducedOperator, h: &GridObservable, path: &[(f64, f64)]) -> Result<Vec<f64>> {
    let spec = map_spec(op)?;
    let beta = spec.beta();
    let c = spec.tail_constant(h.values[0]);
    let m = op.grid().cells();
    let w = op.grid().width();
    let probes: Vec<Vec<f64>> = vec![
        vec![1.0; m],
        (0..m).map(|i| if i < m / 2 { 1.0 } else { 0.0 }).collect(),
        (0..m).map(|i| i as f64 / m as f64).collect(),
    ];
    let g = gamma(1.0 - beta)?;
    let mut out = Vec::new();
    for &(u, theta) in path {
        let s = Complex64::new(u, -theta);
        let z = (-s).exp();
        let mut a = mu_conjugate(op, h, z, true);
        for (k, x) in a.iter_mut().enumerate() {
            *x = -*x;
            if k % (m + 1) == 0 {
                *x += 1.0;
            }
        }
        let lu = Lu::new(a, m)?;
        let ell = match spec.family() {
            MapFamily::Lsv => c,
            MapFamily::Lsv0 => c / (1.0 / s.norm()).ln(),
        };
        let factor = s.powf(beta) * g * ell;
        let mut worst: f64 = 0.0;
        for p in &probes {
            let rhs: Vec<Complex64> = p.iter().map(|x| Complex64::new(*x, 0.0)).collect();
            let t = lu.solve(&rhs);
            let pm: f64 = p.iter().zip(&h.values).map(|(a, b)| a * b).sum::<f64>() * w;
            let sup = p.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let dev = t.iter().map(|x| (x * factor - pm).norm()).fold(0.0, f64::max);
            worst = worst.max(dev / sup);
        }
        out.push(worst);
    }
    Ok(out)
}
