//! Least-squares line fits used for log-log trend diagnostics.

/// Fitted line `y = intercept + slope·x` with a 95% interval on the slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub slope_ci95: (f64, f64),
    pub points: usize,
}

const T95: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

fn t_quantile(dof: usize) -> f64 {
    if dof == 0 {
        f64::INFINITY
    } else if dof <= 30 {
        T95[dof - 1]
    } else {
        1.96
    }
}

/// Ordinary least squares. Needs at least two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n.saturating_sub(2);
    let stderr = if dof > 0 { (sse / dof as f64 / sxx).sqrt() } else { f64::INFINITY };
    let t = t_quantile(dof);
    Some(LineFit {
        slope,
        intercept,
        slope_stderr: stderr,
        slope_ci95: (slope - t * stderr, slope + t * stderr),
        points: n,
    })
}

/// Slope of `log|y|` against `log x`, skipping zero or non-finite entries.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && b.abs() > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.abs().ln()))
        .unzip();
    fit_line(&lx, &ly)
}

/// Roughly log-spaced integers in `[lo, hi]`, `per_decade` per factor of ten.
pub fn log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    for k in 0..=steps {
        let v = 10f64.powf(a + (b - a) * k as f64 / steps as f64).round() as u64;
        let v = v.clamp(lo, hi);
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}
