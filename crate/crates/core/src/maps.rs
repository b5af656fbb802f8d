//! The two intermittent interval maps, their left inverse branch, the tail
//! sequence `x_n` and return-time tails on `Y = [1/2, 1]`.

use crate::error::{Error, Result};
use crate::grid::GridObservable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapFamily {
    /// `x(1 + 2^α x^α)` on `(0, 1/2)`.
    Lsv,
    /// `x(1 + x e^{-1/x})` on `(0, 1/2)`.
    Lsv0,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapSpec {
    family: MapFamily,
    alpha: f64,
}

impl MapSpec {
    pub fn lsv(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("LSV needs alpha >= 1, got {alpha}")));
        }
        Ok(Self { family: MapFamily::Lsv, alpha })
    }

    pub fn lsv0() -> Self {
        Self { family: MapFamily::Lsv0, alpha: f64::INFINITY }
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.family {
            MapFamily::Lsv => Some(self.alpha),
            MapFamily::Lsv0 => None,
        }
    }

    /// Tail exponent: `1/α` for LSV, `0` for LSV0.
    pub fn beta(&self) -> f64 {
        match self.family {
            MapFamily::Lsv => 1.0 / self.alpha,
            MapFamily::Lsv0 => 0.0,
        }
    }

    /// `f(y) − y` on the left branch.
    #[inline]
    pub fn excess(&self, y: f64) -> f64 {
        match self.family {
            MapFamily::Lsv => y * (2.0 * y).powf(self.alpha),
            MapFamily::Lsv0 => y * y * (-1.0 / y).exp(),
        }
    }

    /// Derivative of [`Self::excess`].
    #[inline]
    pub fn excess_derivative(&self, y: f64) -> f64 {
        match self.family {
            MapFamily::Lsv => (self.alpha + 1.0) * (2.0 * y).powf(self.alpha),
            MapFamily::Lsv0 => (2.0 * y + 1.0) * (-1.0 / y).exp(),
        }
    }

    pub fn left_branch(&self, y: f64) -> f64 {
        y + self.excess(y)
    }

    pub fn left_derivative(&self, y: f64) -> f64 {
        1.0 + self.excess_derivative(y)
    }

    /// `f(1/2⁻)`: upper end of the left branch image.
    pub fn left_top(&self) -> f64 {
        self.left_branch(0.5)
    }

    /// `f(x)` on both branches.
    pub fn apply(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("map argument {x} outside (0,1)")));
        }
        if x < 0.5 {
            Ok(self.left_branch(x))
        } else if x > 0.5 {
            Ok(2.0 * x - 1.0)
        } else {
            Err(Error::Domain("map is discontinuous at 1/2".into()))
        }
    }

    /// `f'(x)` on both branches.
    pub fn derivative(&self, x: f64) -> f64 {
        if x < 0.5 {
            self.left_derivative(x)
        } else {
            2.0
        }
    }

    /// Unique `y ∈ (0, 1/2]` with `f(y) = x`, by safeguarded Newton.
    pub fn left_inverse(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("left inverse argument {x} outside (0,1)")));
        }
        let top = self.left_top();
        if x > top {
            return Err(Error::Bracket {
                target: x,
                detail: format!("outside the left-branch image (0, {top}]"),
            });
        }
        let (mut lo, mut hi) = (0.0f64, x.min(0.5));
        let mut y = hi;
        for _ in 0..200 {
            let r = (y - x) + self.excess(y);
            if r == 0.0 {
                return Ok(y);
            }
            if r > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let mut next = y - r / (1.0 + self.excess_derivative(y));
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 2.0 * f64::EPSILON * y || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            y = next;
        }
        let r = (y - x) + self.excess(y);
        if r.abs() <= 1e-14 * x {
            Ok(y)
        } else {
            Err(Error::Bracket { target: x, detail: format!("no convergence, bracket [{lo}, {hi}], residual {r:e}") })
        }
    }

    /// Constant `c` in `μ(φ>n) ~ c n^{-β}` (LSV) or `~ c/log n` (LSV0), given `h(1/2)`.
    pub fn tail_constant(&self, h_half: f64) -> f64 {
        match self.family {
            MapFamily::Lsv => {
                let b = self.beta();
                0.25 * b.powf(b) * h_half
            }
            MapFamily::Lsv0 => 0.5 * h_half,
        }
    }
}

/// `x_1 = 1/2`, `x_{n+1} = g(x_n)` with `g` the left inverse.
#[derive(Clone, Debug)]
pub struct TailSequence {
    spec: MapSpec,
    x: Vec<f64>,
}

impl TailSequence {
    pub fn new(spec: MapSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("tail sequence needs N >= 1".into()));
        }
        let mut x = Vec::with_capacity(n);
        x.push(0.5);
        for k in 1..n {
            let next = spec.left_inverse(x[k - 1])?;
            x.push(next);
        }
        Ok(Self { spec, x })
    }

    pub fn spec(&self) -> MapSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `x_n`, with the convention `x_0 = 1`.
    pub fn x(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.x[n - 1]
        }
    }

    /// `y_n = (x_n + 1)/2`; `φ = n` on `(y_n, y_{n-1}]`.
    pub fn y(&self, n: usize) -> f64 {
        0.5 * (self.x(n) + 1.0)
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }
}

pub fn apply_map(spec: &MapSpec, x: f64) -> Result<f64> {
    spec.apply(x)
}

pub fn left_inverse(spec: &MapSpec, x: f64) -> Result<f64> {
    spec.left_inverse(x)
}

pub fn tail_sequence(spec: &MapSpec, n: usize) -> Result<TailSequence> {
    TailSequence::new(*spec, n)
}

/// `∫_{1/2}^{y_n} h dx`: the mass of `{φ > n}` for a density on `Y`.
pub fn return_time_tail(tail: &TailSequence, density: &GridObservable, n: usize) -> Result<f64> {
    if n > tail.len() {
        return Err(Error::TailTooShort { len: tail.len(), needed: n });
    }
    if n == 0 {
        return Ok(density.integral());
    }
    Ok(integrate_cells_below(density, tail.y(n)))
}

/// `∫_{1/2}^{t} h dx` for a piecewise-constant density.
pub(crate) fn integrate_cells_below(h: &GridObservable, t: f64) -> f64 {
    let g = h.grid;
    let w = g.width();
    let full = (((t - 0.5) / w).floor().max(0.0) as usize).min(g.cells());
    let mut s: f64 = h.values[..full].iter().sum::<f64>() * w;
    if full < g.cells() {
        s += h.values[full] * (t - g.edge(full)).max(0.0);
    }
    s
}

/// `X_0 = [1/2, 1]` and `X_k = (x_{k+1}, x_k]` for `k = 1..K`.
pub fn x_level_sets(tail: &TailSequence, k: usize) -> Result<Vec<(f64, f64)>> {
    if k + 1 > tail.len() {
        return Err(Error::TailTooShort { len: tail.len(), needed: k + 1 });
    }
    let mut out = vec![(0.5, 1.0)];
    for j in 1..=k {
        out.push((tail.x(j + 1), tail.x(j)));
    }
    Ok(out)
}

/// Return-time tail `μ(φ > n)` for `n = 0..=N` together with its asymptotic form.
#[derive(Clone, Debug)]
pub struct TailModel {
    pub spec: MapSpec,
    pub beta: f64,
    pub c: f64,
    /// `μ(φ > n)` for `n = 0..=N`.
    pub tail: Vec<f64>,
    /// Monotone part `b(n)` of the remainder `H` (LSV only), `n = 0..=N`.
    pub b: Option<Vec<f64>>,
}

impl TailModel {
    /// Tabulates the tail from an invariant density on `Y`, normalized to mass one.
    pub fn from_density(tail: &TailSequence, h: &GridObservable) -> Result<Self> {
        let spec = tail.spec();
        let h_half = h.values[0];
        let c = spec.tail_constant(h_half);
        let mass = h.integral();
        let mut t = Vec::with_capacity(tail.len() + 1);
        for n in 0..=tail.len() {
            t.push(return_time_tail(tail, h, n)? / mass);
        }
        let b = match spec.family() {
            MapFamily::Lsv => Some(
                (0..=tail.len())
                    .map(|n| {
                        let yn = tail.y(n);
                        -((yn - 0.5) * h_half - integrate_cells_below(h, yn)) / (mass * c)
                    })
                    .collect(),
            ),
            MapFamily::Lsv0 => None,
        };
        Ok(Self { spec, beta: spec.beta(), c, tail: t, b })
    }

    pub fn len(&self) -> usize {
        self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tail.is_empty()
    }

    /// `μ(φ = n)` for `n ≥ 1`.
    pub fn prob(&self, n: usize) -> f64 {
        self.tail[n - 1] - self.tail[n]
    }

    /// `H(n) = μ(φ>n)/c − n^{-β}` for `n ≥ 1` (LSV), or `μ(φ>n)·log n / c − 1` (LSV0).
    pub fn remainder(&self, n: usize) -> f64 {
        let x = n as f64;
        match self.spec.family() {
            MapFamily::Lsv => self.tail[n] / self.c - x.powf(-self.beta),
            MapFamily::Lsv0 => self.tail[n] * x.ln() / self.c - 1.0,
        }
    }

    /// Checks the `H = b + c` split: `b` monotone, `c` summable.
    pub fn split_check(&self) -> Option<SplitReport> {
        let b = self.b.as_ref()?;
        let n_max = self.tail.len() - 1;
        let b_monotone = b[1..].windows(2).all(|w| w[1] >= w[0] - 1e-15);
        let rest: Vec<f64> = (1..=n_max).map(|n| self.remainder(n) - b[n]).collect();
        let half: f64 = rest[..n_max / 2].iter().map(|v| v.abs()).sum();
        let total: f64 = rest.iter().map(|v| v.abs()).sum();
        Some(SplitReport { b_monotone, summable_abs_sum: total, second_half_share: (total - half) / total.max(f64::MIN_POSITIVE) })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SplitReport {
    pub b_monotone: bool,
    /// `Σ |c(n)|` over the tabulated range.
    pub summable_abs_sum: f64,
    /// Fraction of that sum coming from the upper half of the range.
    pub second_half_share: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn map_examples() {
        let s = MapSpec::lsv(2.0).unwrap();
        assert_relative_eq!(s.apply(0.25).unwrap(), 0.3125, max_relative = 1e-15);
        assert_eq!(s.apply(0.75).unwrap(), 0.5);
        assert_eq!(MapSpec::lsv0().apply(0.75).unwrap(), 0.5);
        assert_relative_eq!(MapSpec::lsv0().left_top(), 0.5 * (1.0 + 0.5 * (-2f64).exp()), max_relative = 1e-15);
        assert!(s.apply(1.0).is_err());
        assert!(s.apply(0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let s = MapSpec::lsv(2.0).unwrap();
        assert_relative_eq!(s.left_inverse(0.3125).unwrap(), 0.25, max_relative = 1e-15);
        let one = MapSpec::lsv(1.0).unwrap();
        assert_relative_eq!(one.left_inverse(0.5).unwrap(), (5f64.sqrt() - 1.0) / 4.0, max_relative = 1e-15);
        assert!(MapSpec::lsv0().left_inverse(0.6).is_err());
    }

    #[test]
    fn tail_sequence_start() {
        let t = tail_sequence(&MapSpec::lsv(2.0).unwrap(), 2).unwrap();
        assert_eq!(t.x(1), 0.5);
        assert_eq!(t.y(1), 0.75);
        assert_eq!(t.x(0), 1.0);
        // 4y^3 + y = 1/2
        let y = t.x(2);
        assert!((4.0 * y * y * y + y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn level_sets() {
        let t = tail_sequence(&MapSpec::lsv(2.0).unwrap(), 5).unwrap();
        assert_eq!(x_level_sets(&t, 0).unwrap(), vec![(0.5, 1.0)]);
        let l = x_level_sets(&t, 1).unwrap();
        assert_eq!(l[1], (t.x(2), 0.5));
        assert!(x_level_sets(&t, 5).is_err());
    }
}
