use super::config::{ExperimentConfig, Family};
use super::output::{emit, put, results, Table};
use crate::error::{Error, Result};
use crate::fit::log_grid;
use crate::grid::{GridObservable, YGrid};
use crate::induced::{
    assemble_rn, dual_ergodic_report, invariant_density, operator_tail_model, renewal_tn, ExpansionTerms,
    InducedOperator,
};
use crate::maps::{return_time_tail, tail_sequence, MapFamily, TailModel};
use crate::scalar_renewal::{
    compute_ch, compute_ch_with, karamata_ratio, renewal_sequence, residual_diagnostics, AsymptoticExpansion,
    ReturnDistribution,
};
use crate::special_fn::{gamma, SlowlyVarying};
use crate::tauberian::{
    contour_b1, contour_b2, contour_b3, fixed_quadratic, freud_one_sided_with, karamata_poly, kernel_extract,
    FreudOptions, KernelParams, PowerSeries, Side,
};
use num_complex::Complex64;
use std::f64::consts::{E, PI};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RenewalSource {
    /// Exact power tail `n^{-β}`.
    Power,
    /// Return-time tail of the configured map.
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelSource {
    Ones,
    Power,
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Terms {
    Full,
    First,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    #[value(name = "B1", alias = "b1")]
    B1,
    #[value(name = "B2", alias = "b2")]
    B2,
    #[value(name = "B3", alias = "b3")]
    B3,
}

#[derive(Debug, Clone, clap::Subcommand)]
pub enum Command {
    /// Tail sequence x_n, y_n and return-time tail probabilities.
    Tails {
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Scalar renewal sequence, Karamata ratio and higher-order residuals.
    Renewal {
        #[arg(long, default_value_t = 0.75)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = RenewalSource::Power)]
        source: RenewalSource,
        #[arg(long = "per-decade", default_value_t = 5)]
        per_decade: usize,
    },
    /// Operator partial sums against the first-order law and the expansion.
    DualErgodic {
        #[arg(long, value_enum, default_value_t = Terms::Full)]
        terms: Terms,
        #[arg(long = "per-decade", default_value_t = 4)]
        per_decade: usize,
    },
    /// Kernel extraction of partial sums against direct summation.
    Kernel {
        #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 500])]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value_t = KernelSource::Ones)]
        source: KernelSource,
        #[arg(long, default_value_t = 0.75)]
        beta: f64,
    },
    /// Contour integral validators.
    Contour {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long = "n", default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long = "R", alias = "r", default_value_t = 1000.0)]
        r: f64,
    },
    /// One-sided polynomial constructions.
    Polys {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.1])]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8, 16, 32])]
        m: Vec<usize>,
        #[arg(long = "freud-beta", default_value_t = 0.5)]
        freud_beta: f64,
    },
}

/// Runs one subcommand and returns the files written.
pub fn run(command: &Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    match command {
        Command::Tails { n } => tails(cfg, *n),
        Command::Renewal { beta, source, per_decade } => renewal(cfg, *beta, *source, *per_decade),
        Command::DualErgodic { terms, per_decade } => dual_ergodic(cfg, *terms, *per_decade),
        Command::Kernel { n, source, beta } => kernel(cfg, n, *source, *beta),
        Command::Contour { check, beta, rho, n, u, theta, r } => contour(cfg, *check, *beta, *rho, *n, *u, *theta, *r),
        Command::Polys { eps, m, freud_beta } => polys(cfg, eps, m, *freud_beta),
    }
}

fn map_operator(cfg: &ExperimentConfig) -> Result<(InducedOperator, GridObservable)> {
    let spec = cfg.map_spec()?;
    let op = assemble_rn(&spec, YGrid::new(cfg.grid)?, cfg.ntrunc)?;
    let h = invariant_density(&op)?;
    Ok((op, h))
}

fn map_tail(cfg: &ExperimentConfig) -> Result<(TailModel, f64)> {
    let (op, h) = map_operator(cfg)?;
    Ok((operator_tail_model(&op, &h)?, op.mass_deficit()))
}

fn tails(cfg: &ExperimentConfig, n: usize) -> Result<Vec<PathBuf>> {
    if !(1..=10_000_000).contains(&n) {
        return Err(Error::Config(format!("--n must lie in [1, 10^7], got {n}")));
    }
    let spec = cfg.map_spec()?;
    let (op, h) = map_operator(cfg)?;
    let coarse = {
        let g = YGrid::new(cfg.grid / 2)?;
        let op2 = assemble_rn(&spec, g, cfg.ntrunc)?;
        invariant_density(&op2)?
    };
    let seq = tail_sequence(&spec, n)?;
    let beta = spec.beta();
    let mut t = Table::new(&["n", "x_n", "y_n", "tail_prob", "asymptote_ratio", "tail_prob_err", "ratio_err"]);
    for k in 1..=n {
        let x = seq.x(k);
        let p = return_time_tail(&seq, &h, k)?;
        let p2 = return_time_tail(&seq, &coarse, k)?;
        let kf = k as f64;
        let x_err = 4.0 * f64::EPSILON * kf.sqrt() * x;
        let (ratio, ratio_err) = match spec.family() {
            MapFamily::Lsv => {
                let a = 0.5 * beta.powf(beta) * kf.powf(-beta);
                (x / a, x_err / a)
            }
            MapFamily::Lsv0 => {
                let r = (1.0 / x).exp() / kf;
                (r, r * x_err / (x * x))
            }
        };
        t.push(vec![k.into(), x.into(), seq.y(k).into(), p.into(), ratio.into(), (p - p2).abs().into(), ratio_err.into()]);
    }
    let mut res = results();
    put(&mut res, "beta", beta);
    put(&mut res, "tail_constant", spec.tail_constant(h.values[0]));
    put(&mut res, "h_half", h.values[0]);
    put(&mut res, "mass_deficit", op.mass_deficit());
    emit(cfg, "tails", "tails", &t, &res, Some((0, &[4], true)))
}

fn renewal(cfg: &ExperimentConfig, beta: f64, source: RenewalSource, per_decade: usize) -> Result<Vec<PathBuf>> {
    let nmax = cfg.nmax;
    if nmax < 1000 {
        return Err(Error::Config(format!("renewal needs --nmax >= 1000, got {nmax}")));
    }
    let (dist, beta, c, ch, deficit) = match source {
        RenewalSource::Power => {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::Config(format!("--beta must lie in (0,1), got {beta}")));
            }
            let dist = ReturnDistribution::power_tail(beta, nmax)?;
            let ch = if beta > 0.5 { Some(compute_ch(beta, 1.0, |_| 0.0)?) } else { None };
            (dist, beta, 1.0, ch, 0.0)
        }
        RenewalSource::Map => {
            if cfg.family != Family::Lsv || cfg.alpha <= 1.0 {
                return Err(Error::Config("map renewal needs the lsv family with alpha > 1".into()));
            }
            if nmax > cfg.ntrunc {
                return Err(Error::Config(format!("--nmax {nmax} exceeds --ntrunc {}", cfg.ntrunc)));
            }
            let (tm, deficit) = map_tail(cfg)?;
            let nt = tm.len() - 1;
            let ch = if tm.beta > 0.5 {
                Some(compute_ch_with(tm.beta, tm.c, |k| if (k as usize) <= nt { tm.remainder(k as usize) } else { 0.0 }, nt as u64)?)
            } else {
                None
            };
            (ReturnDistribution::from_tail(&tm.tail)?, tm.beta, tm.c, ch, deficit)
        }
    };
    let seq = renewal_sequence(&dist, nmax);
    let exp = match ch {
        Some(ch) => AsymptoticExpansion::new(beta, c, ch.value, ch.error_bar)?,
        None => AsymptoticExpansion::new(beta, c, 0.0, 0.0)?,
    };
    let ns = log_grid(1000, nmax as u64, per_decade.max(1));
    let table = residual_diagnostics(&seq, &exp, &ns)?;
    let ell = SlowlyVarying::Constant(c);
    let mut t = Table::new(&["n", "partial_sum", "expansion", "residual", "error_bar", "karamata_ratio"]);
    for row in &table.rows {
        let kr = karamata_ratio(&seq, beta, &ell, row.n as usize - 1);
        t.push(vec![row.n.into(), row.partial_sum.into(), row.expansion.into(), row.residual.into(), row.error_bar.into(), kr.into()]);
    }
    let mut res = results();
    put(&mut res, "beta", beta);
    put(&mut res, "c", c);
    put(&mut res, "c_h", exp.c_h);
    put(&mut res, "c_h_error", exp.c_h_error);
    put(&mut res, "terms", exp.k as i64 + 1);
    put(&mut res, "exponents", exp.exponents.clone());
    put(&mut res, "scalar_coefficients", exp.scalar_coefficients());
    put(&mut res, "mass_deficit", deficit);
    if let Some(f) = &table.slope {
        put(&mut res, "residual_slope", f.slope);
        put(&mut res, "residual_slope_ci95", vec![f.slope_ci95.0, f.slope_ci95.1]);
    }
    emit(cfg, "renewal", "renewal", &t, &res, Some((0, &[3], true)))
}

fn dual_ergodic(cfg: &ExperimentConfig, terms: Terms, per_decade: usize) -> Result<Vec<PathBuf>> {
    if cfg.nmax > cfg.ntrunc || cfg.nmax < 10 {
        return Err(Error::Config(format!("--nmax must lie in [10, ntrunc = {}], got {}", cfg.ntrunc, cfg.nmax)));
    }
    let (op, h) = map_operator(cfg)?;
    let v = GridObservable::constant(op.grid(), 1.0);
    let acc = renewal_tn(&op, &h, &v, cfg.nmax)?;
    let ns = log_grid(10, cfg.nmax as u64, per_decade.max(1));
    let which = match terms {
        Terms::Full => ExpansionTerms::Full,
        Terms::First => ExpansionTerms::FirstOrder,
    };
    let rep = dual_ergodic_report(&op, &h, &v, &acc, &ns, which)?;
    let mut t = Table::new(&["n", "sup_dev", "residual_max", "residual_min", "error_bar"]);
    for r in &rep.rows {
        t.push(vec![r.n.into(), r.sup_dev.into(), r.residual_max.into(), r.residual_min.into(), r.error_bar.into()]);
    }
    let mut res = results();
    put(&mut res, "beta", rep.beta);
    put(&mut res, "c", rep.c);
    put(&mut res, "mean", rep.mean);
    put(&mut res, "mass_deficit", op.mass_deficit());
    if let Some(e) = &rep.expansion {
        put(&mut res, "c_h", e.c_h);
        put(&mut res, "c_h_error", e.c_h_error);
        put(&mut res, "d", e.d.clone());
        put(&mut res, "exponents", e.exponents.clone());
    }
    if let Some(f) = &rep.sup_dev_slope {
        put(&mut res, "sup_dev_slope", f.slope);
    }
    if let Some(f) = &rep.residual_slope {
        put(&mut res, "residual_slope", f.slope);
    }
    emit(cfg, "dual-ergodic", "dual_ergodic", &t, &res, Some((0, &[1, 2], true)))
}

fn kernel(cfg: &ExperimentConfig, ns: &[usize], source: KernelSource, beta: f64) -> Result<Vec<PathBuf>> {
    if ns.is_empty() {
        return Err(Error::Config("--n needs at least one value".into()));
    }
    let n_hi = *ns.iter().max().unwrap();
    let (dist, seq_beta) = match source {
        KernelSource::Ones => (None, 1.0),
        KernelSource::Power => {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::Config(format!("--beta must lie in (0,1), got {beta}")));
            }
            (Some(ReturnDistribution::power_tail(beta, 40 * n_hi)?), beta)
        }
        KernelSource::Map => {
            let (tm, _) = map_tail(cfg)?;
            let b = if tm.beta > 0.0 { tm.beta } else { 1.0 };
            (Some(ReturnDistribution::from_tail(&tm.tail)?), b)
        }
    };
    let seq = dist.as_ref().map(|d| renewal_sequence(d, n_hi + 1));
    let mut t = Table::new(&[
        "n", "gamma", "last_index", "estimate", "imag", "direct", "abs_error", "rel_error", "quad_error", "b_bound", "error_bar",
    ]);
    let mut res = results();
    for &n in ns {
        let mut params = match cfg.gamma {
            Some(g) => KernelParams::with_gamma(n, g),
            None => KernelParams::new(n, seq_beta),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        params.p = cfg.kernel_p;
        params.validate().map_err(|e| Error::Config(e.to_string()))?;
        let params = params.with_u_bound(1.0);
        let last = params.last_index();
        let (est, direct) = match (&dist, &seq) {
            (Some(d), Some(s)) => (kernel_extract(PowerSeries::renewal_generating(d), &params)?, s.sum_below(last + 1)),
            _ => (kernel_extract(|z: Complex64| 1.0 / (1.0 - z), &params)?, (last + 1) as f64),
        };
        let abs = est.estimate - direct;
        t.push(vec![
            n.into(),
            params.gamma.into(),
            last.into(),
            est.estimate.into(),
            est.imag.into(),
            direct.into(),
            abs.into(),
            (abs / direct).into(),
            est.quad_error.into(),
            est.b_bound.unwrap_or(f64::NAN).into(),
            est.error_bar.into(),
        ]);
        put(&mut res, &format!("covered_n{n}"), abs.abs() <= est.error_bar);
    }
    emit(cfg, "kernel", "kernel", &t, &res, None)
}

#[allow(clippy::too_many_arguments)]
fn contour(cfg: &ExperimentConfig, check: Check, beta: f64, rho: f64, n: u64, u: f64, theta: f64, r: f64) -> Result<Vec<PathBuf>> {
    let usage = |e: Error| if e.is_usage() { Error::Config(e.to_string()) } else { e };
    let mut res = results();
    let (stem, t) = match check {
        Check::B1 => {
            let v = contour_b1(beta, u, theta, r).map_err(usage)?;
            let limit = gamma(1.0 - beta)?;
            let mut t = Table::new(&["beta", "u", "theta", "R", "re", "im", "limit", "abs_dev", "error_bar"]);
            t.push(vec![beta.into(), u.into(), theta.into(), r.into(), v.value.re.into(), v.value.im.into(), limit.into(), (v.value - limit).norm().into(), v.error_bar.into()]);
            ("contour_b1", t)
        }
        Check::B2 => {
            let v = contour_b2(beta).map_err(usage)?;
            let exact = 2.0 * PI / E / gamma(1.0 + beta)?;
            let mut t = Table::new(&["beta", "computed", "closed_form", "abs_error", "imag", "error_bar"]);
            t.push(vec![beta.into(), v.value.re.into(), exact.into(), (v.value.re - exact).abs().into(), v.value.im.into(), v.error_bar.into()]);
            ("contour_b2", t)
        }
        Check::B3 => {
            let g = cfg.gamma.unwrap_or(0.25);
            let v = contour_b3(rho, g, n).map_err(usage)?;
            let main = 2.0 * PI / E * (n as f64).powf(rho) / gamma(1.0 + rho)?;
            let mut t = Table::new(&["rho", "gamma", "n", "re", "im", "main_term", "abs_dev", "error_bar"]);
            t.push(vec![rho.into(), g.into(), n.into(), v.value.re.into(), v.value.im.into(), main.into(), (v.value - main).norm().into(), v.error_bar.into()]);
            ("contour_b3", t)
        }
    };
    put(&mut res, "rows", t.rows.len() as i64);
    emit(cfg, "contour", stem, &t, &res, None)
}

fn polys(cfg: &ExperimentConfig, eps: &[f64], ms: &[usize], freud_beta: f64) -> Result<Vec<PathBuf>> {
    let usage = |e: Error| if e.is_usage() { Error::Config(e.to_string()) } else { e };
    let mut files = Vec::new();
    let mut k = Table::new(&["eps", "degree", "gap", "sign_worst"]);
    for &e in eps {
        let q = karamata_poly(e).map_err(usage)?;
        k.push(vec![e.into(), q.degree().into(), q.gap.into(), q.sign_check(10_000).worst.into()]);
    }
    let mut res = results();
    put(&mut res, "sign_grid", 10_000i64);
    files.extend(emit(cfg, "polys", "polys_karamata", &k, &res, None)?);

    let mut f = Table::new(&["side", "b1", "b2", "gap", "sign_worst"]);
    for side in [Side::Upper, Side::Lower] {
        let q = fixed_quadratic(side);
        let b = q.coefficients();
        let name = if side == Side::Upper { "upper" } else { "lower" };
        f.push(vec![name.into(), b[0].into(), b[1].into(), q.gap.into(), q.sign_check(10_000).worst.into()]);
    }
    files.extend(emit(cfg, "polys", "polys_fixed", &f, &res, None)?);

    let opts = FreudOptions { beta: freud_beta, ..FreudOptions::default() };
    let mut fr = Table::new(&["m", "side", "gap", "m_gap", "coef_abs_sum", "sign_worst"]);
    for &m in ms {
        for side in [Side::Upper, Side::Lower] {
            let q = freud_one_sided_with(m, side, &opts).map_err(usage)?;
            let name = if side == Side::Upper { "upper" } else { "lower" };
            fr.push(vec![
                m.into(),
                name.into(),
                q.gap.into(),
                (m as f64 * q.gap).into(),
                q.coefficient_abs_sum().into(),
                q.sign_check(10_000).worst.into(),
            ]);
        }
    }
    let mut res = results();
    put(&mut res, "freud_beta", freud_beta);
    files.extend(emit(cfg, "polys", "polys_freud", &fr, &res, None)?);
    Ok(files)
}
