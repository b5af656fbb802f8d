use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_points, QuadOptions};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rustfft::{num_complex::Complex, FftPlanner};

/// `1/e`, the jump of `g = 1_{[e^{-1}, 1]}`.
const JUMP: f64 = 0.36787944117144233;
const DEGREE_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// `g(x) = 1_{[e^{-1}, 1]}(x)`.
pub fn indicator(x: f64) -> f64 {
    if x >= JUMP {
        1.0
    } else {
        0.0
    }
}

/// `q(x) = x · Σ_k c_k T_k(2x − 1)`, so `q(0) = 0` exactly and the degree is `cheb.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneSidedPoly {
    pub side: Side,
    pub cheb: Vec<f64>,
    /// Gap against `g`: `∫(q − g) x^{-3/2} dx` for Karamata polynomials,
    /// `∫_0^∞ |q − g|(e^{-t}) dt^β` for the Freud family.
    pub gap: f64,
}

/// Worst sampled violation of the one-sided condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignCheck {
    pub points: usize,
    /// Largest `g − q` (upper) or `q − g` (lower); non-positive when the check passes.
    pub worst: f64,
}

impl SignCheck {
    pub fn passed(&self) -> bool {
        self.worst <= 0.0
    }
}

impl OneSidedPoly {
    pub fn degree(&self) -> usize {
        self.cheb.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        x * clenshaw(&self.cheb, 2.0 * x - 1.0)
    }

    /// Monomial coefficients `b_1..b_m` of `q(x) = Σ b_k x^k`.
    pub fn coefficients(&self) -> Vec<f64> {
        let m = self.cheb.len();
        let mut out = vec![0.0; m];
        // T_k(2x − 1) in powers of x.
        let mut prev = vec![1.0];
        let mut cur = vec![-1.0, 2.0];
        for (k, &c) in self.cheb.iter().enumerate() {
            let t = match k {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let mut next = vec![0.0; cur.len() + 1];
                    for (i, &a) in cur.iter().enumerate() {
                        next[i] -= 2.0 * a;
                        next[i + 1] += 4.0 * a;
                    }
                    for (i, &a) in prev.iter().enumerate() {
                        next[i] -= a;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for (i, &a) in t.iter().enumerate() {
                out[i] += c * a;
            }
        }
        out
    }

    /// `Σ_k |b_k|`.
    pub fn coefficient_abs_sum(&self) -> f64 {
        self.coefficients().iter().map(|b| b.abs()).sum()
    }

    /// Samples the one-sided condition on `points` equally spaced nodes of `[0,1]`.
    pub fn sign_check(&self, points: usize) -> SignCheck {
        let points = points.max(2);
        let mut worst = f64::NEG_INFINITY;
        let last = (points - 1) as f64;
        for i in 0..points {
            let x = i as f64 / last;
            worst = worst.max(self.violation(x));
        }
        for x in [JUMP, JUMP.next_down()] {
            worst = worst.max(self.violation(x));
        }
        SignCheck { points, worst }
    }

    fn violation(&self, x: f64) -> f64 {
        match self.side {
            Side::Upper => indicator(x) - self.eval(x),
            Side::Lower => self.eval(x) - indicator(x),
        }
    }
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// The two quadratics bracketing `g`: `−7x² + 8x ≥ g` and `2x² − x ≤ g`.
pub fn fixed_quadratic(side: Side) -> OneSidedPoly {
    // 8 − 7x = 4.5 − 3.5 T_1(2x−1) and 2x − 1 = T_1(2x−1).
    let cheb = match side {
        Side::Upper => vec![4.5, -3.5],
        Side::Lower => vec![0.0, 1.0],
    };
    let mut q = OneSidedPoly { side, cheb, gap: 0.0 };
    q.gap = karamata_gap(&q);
    q
}

/// `∫_0^1 (q − g) x^{-3/2} dx` from the Chebyshev moments `∫_0^1 T_k(2x−1) x^{-1/2} dx = −2/(4k²−1)`.
fn karamata_gap(q: &OneSidedPoly) -> f64 {
    let moments: f64 = q.cheb.iter().enumerate().map(|(k, &c)| c * -2.0 / (4.0 * (k * k) as f64 - 1.0)).sum();
    moments - 2.0 * (0.5f64.exp() - 1.0)
}

/// The same gap by Gauss–Legendre in `x = s²`, exact for the polynomial part.
fn karamata_gap_quadrature(cheb: &[f64]) -> f64 {
    let (nodes, weights) = gauss_legendre(cheb.len() + 1);
    let part: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| {
            let s = 0.5 * (t + 1.0);
            w * clenshaw(cheb, 2.0 * s * s - 1.0)
        })
        .sum();
    part - 2.0 * (0.5f64.exp() - 1.0)
}

/// Chebyshev–Lobatto interpolation coefficients of values at `cos(πj/n)`, `j = 0..=n`.
fn cheb_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.extend(values[1..n].iter().rev().map(|&v| Complex::new(v, 0.0)));
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    let mut c: Vec<f64> = buf[..=n].iter().map(|z| z.re / n as f64).collect();
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

/// Values of `Σ c_k T_k` at `cos(πj/m)`, `j = 0..=m`, for `m ≥ c.len()`.
fn cheb_values(c: &[f64], m: usize) -> Vec<f64> {
    let mut buf = vec![Complex::new(0.0, 0.0); 2 * m];
    for (k, &ck) in c.iter().enumerate() {
        buf[k] = Complex::new(ck, 0.0);
        if k > 0 {
            buf[2 * m - k] = Complex::new(ck, 0.0);
        }
    }
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    (0..=m).map(|j| 0.5 * (buf[j].re + c[0])).collect()
}

/// Upper polynomial with `∫_0^1 (q − g) x^{-3/2} dx < ε`.
///
/// `g` is ramped linearly on `[e^{-1} − δ, e^{-1}]` to `h`, then `h(x)/x + δ` is interpolated at
/// Chebyshev points to uniform accuracy `δ` and multiplied by `x`, so `g ≤ h ≤ q ≤ h + 2δx`.
pub fn karamata_poly(epsilon: f64) -> Result<OneSidedPoly> {
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let e = std::f64::consts::E;
    let delta = 0.99 * (1.0 / (2.0 * e)).min(epsilon / ((2.0 * e).powf(1.5) + 4.0));
    let a = JUMP - delta;
    let target = move |x: f64| {
        let h = if x >= JUMP {
            1.0
        } else if x > a {
            (x - a) / delta
        } else {
            0.0
        };
        if x > 0.0 {
            h / x + delta
        } else {
            delta
        }
    };
    let at = |t: f64| target(0.5 * (1.0 + t));
    let mut n = 64;
    let mut achieved = f64::INFINITY;
    while n <= DEGREE_CAP {
        let values: Vec<f64> = (0..=n).map(|j| at((std::f64::consts::PI * j as f64 / n as f64).cos())).collect();
        let c = cheb_coefficients(&values);
        let fine = 8 * n;
        let mut err = cheb_values(&c, fine)
            .iter()
            .enumerate()
            .map(|(j, v)| (v - at((std::f64::consts::PI * j as f64 / fine as f64).cos())).abs())
            .fold(0.0f64, f64::max);
        // Dense look around the kinks.
        for kink in [a, JUMP] {
            let w = 20.0 / n as f64;
            for i in 0..=400 {
                let x = (kink - w + 2.0 * w * i as f64 / 400.0).clamp(0.0, 1.0);
                err = err.max((clenshaw(&c, 2.0 * x - 1.0) - target(x)).abs());
            }
        }
        achieved = err;
        if err <= delta {
            let gap = karamata_gap_quadrature(&c);
            let q = OneSidedPoly { side: Side::Upper, cheb: c, gap };
            if gap >= epsilon {
                return Err(Error::DegreeCap { cap: DEGREE_CAP, achieved: gap, requested: epsilon });
            }
            return Ok(q);
        }
        n *= 2;
    }
    Err(Error::DegreeCap { cap: DEGREE_CAP, achieved, requested: delta })
}

/// Options for the constrained fit of the Freud polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct FreudOptions {
    /// Index of the gap measure `dt^β`, `t = −log x`.
    pub beta: f64,
    /// Constraint nodes (uniform plus Chebyshev-clustered).
    pub grid: usize,
    /// Refinement factor of the verification grid.
    pub verify_factor: usize,
    /// Smallest admissible degree.
    pub m0: usize,
}

impl Default for FreudOptions {
    fn default() -> Self {
        FreudOptions { beta: 0.5, grid: 1000, verify_factor: 10, m0: 1 }
    }
}

pub fn freud_one_sided(m: usize, side: Side) -> Result<OneSidedPoly> {
    freud_one_sided_with(m, side, &FreudOptions::default())
}

fn constraint_nodes(count: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..count).map(|i| i as f64 / (count - 1) as f64).collect();
    xs.extend((0..count).map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (count - 1) as f64).cos())));
    // Cluster on both sides of the jump.
    for i in 1..=count / 10 {
        let d = 1e-4 * (i as f64).powi(2);
        xs.push(JUMP - d);
        xs.push(JUMP + d);
    }
    xs.push(JUMP);
    xs.push(JUMP.next_down());
    xs.retain(|x| (0.0..=1.0).contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `∫_0^∞ f(e^{-t}) dt^β` by the substitution `t = s^{1/β}`.
fn dt_beta_integral<F: Fn(f64) -> f64>(f: F, beta: f64) -> Result<f64> {
    let s_max = 60f64.powf(beta);
    let s_jump = 1.0;
    let mut pts = vec![0.0, s_jump];
    let panels = 64;
    for k in 1..=panels {
        pts.push(s_jump + (s_max - s_jump) * k as f64 / panels as f64);
    }
    let r = integrate_points(|s: f64| f((-s.powf(1.0 / beta)).exp()), &pts, &QuadOptions::with_tol(1e-13, 1e-12))?;
    Ok(r.value)
}

/// Degree-`m` one-sided approximant of `g` minimizing the `dt^β` gap subject to the sign
/// condition on a dense grid; the condition is re-checked on a finer grid and the
/// linear coefficient is shifted if a violation remains.
pub fn freud_one_sided_with(m: usize, side: Side, opts: &FreudOptions) -> Result<OneSidedPoly> {
    if m < opts.m0.max(1) {
        return Err(Error::Invalid(format!("degree {m} below minimum {}", opts.m0.max(1))));
    }
    if !(opts.beta > 0.0 && opts.beta <= 1.0) || opts.grid < 10 || opts.verify_factor == 0 {
        return Err(Error::Invalid("freud options need beta in (0,1], grid >= 10, verify_factor >= 1".into()));
    }
    let basis = |k: usize, x: f64| {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        x * clenshaw(&c, 2.0 * x - 1.0)
    };
    let weights: Vec<f64> = (0..m).map(|k| dt_beta_integral(|x| basis(k, x), opts.beta)).collect::<Result<_>>()?;
    let (dir, op) = match side {
        Side::Upper => (OptimizationDirection::Minimize, ComparisonOp::Ge),
        Side::Lower => (OptimizationDirection::Maximize, ComparisonOp::Le),
    };
    let solve = |grid: usize| -> Option<Vec<f64>> {
        let mut lp = Problem::new(dir);
        let vars: Vec<_> = weights.iter().map(|&w| lp.add_var(w, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        for x in constraint_nodes(grid) {
            let row: Vec<_> = vars.iter().enumerate().map(|(k, &v)| (v, basis(k, x))).collect();
            lp.add_constraint(row.as_slice(), op, indicator(x));
        }
        // The solver can panic on a numerically singular basis.
        let sol = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| lp.solve())).ok()?.ok()?;
        Some(vars.iter().map(|&v| *sol.var_value(v)).collect())
    };
    // Retry on slightly different node sets before giving up.
    let mut cheb = [0, 37, 101, 211]
        .iter()
        .find_map(|d| solve(opts.grid + d))
        .ok_or(Error::Infeasible(m))?;
    // Verify on the finer grid; shift by a multiple of x if needed.
    let mut poly = OneSidedPoly { side, cheb: cheb.clone(), gap: 0.0 };
    let mut eta = 0.0f64;
    for x in constraint_nodes(opts.grid * opts.verify_factor) {
        if x > 0.0 {
            eta = eta.max(poly.violation(x) / x);
        }
    }
    if eta > 0.0 {
        let shift = eta * (1.0 + 1e-9) + 1e-15;
        cheb[0] += if side == Side::Upper { shift } else { -shift };
        poly.cheb = cheb;
    }
    // ∫_0^∞ g(e^{-t}) dt^β = 1.
    let fit: f64 = poly.cheb.iter().zip(&weights).map(|(c, w)| c * w).sum();
    poly.gap = match side {
        Side::Upper => fit - 1.0,
        Side::Lower => 1.0 - fit,
    };
    Ok(poly)
}
