//! Ulam discretization of the induced transfer operator `R = Σ R_n` on
//! `Y = [1/2, 1]`, its spectral data and the operator renewal sequence.
//!
//! All operators act on densities with respect to Lebesgue measure. Functions
//! with respect to `μ = h dx` are converted by multiplying with `h`.

mod full_map;
mod renewal;
mod report;
mod spectral;

pub use full_map::{
    extended_density, full_map_l, spread_push, FullMapOperator, Mesh, MeshObservable,
};
pub use renewal::{renewal_density, renewal_tn, RenewalAccumulator};
pub use report::{
    dual_ergodic_report, first_order_law, resolvent_norm_proxy, operator_tail_model, DualErgodicReport,
    DualErgodicRow, ExpansionTerms,
};
pub use spectral::{spectral_data, spectral_data_with, SpectralData, SpectralOptions};

use crate::error::{Error, Result};
use crate::grid::{GridObservable, YGrid};
use crate::linalg::matvec;
use crate::maps::{MapSpec, TailSequence};
use num_complex::Complex64;

/// Which first-return structure the operator discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnStructure {
    Map(MapSpec),
    /// Two full linear branches on `Y` with return time one.
    Doubling,
}

/// Contiguous run of non-zero entries in one source column of one `R_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Piece {
    pub ret: u32,
    pub source: u32,
    pub target: u32,
    pub len: u32,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    /// Largest admissible Lebesgue measure (normalized on `Y`) of `{φ > N}`.
    pub max_deficit: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { max_deficit: 0.25 }
    }
}

/// Truncated family `R_1..R_N` stored as column pieces, plus a closure term
/// lumping the branches with return time above `N`.
#[derive(Clone, Debug)]
pub struct InducedOperator {
    grid: YGrid,
    n_trunc: usize,
    structure: ReturnStructure,
    pieces: Vec<Piece>,
    values: Vec<f64>,
    branch_start: Vec<usize>,
    tail_pieces: Vec<Piece>,
    tail_values: Vec<f64>,
    mass_deficit: f64,
    tail: Option<TailSequence>,
}

struct Builder {
    m: usize,
    pieces: Vec<Piece>,
    values: Vec<f64>,
}

impl Builder {
    /// Source intervals `s[k]..s[k+1]` (in `u = 2y − 1`) land on target cell `t0 + k`.
    fn emit(&mut self, ret: u32, s: &[f64], t0: usize, scale: &[f64]) {
        let m = self.m;
        let mf = m as f64;
        let kk = s.len() - 1;
        let lo = s[0];
        let hi = s[kk];
        if hi <= lo {
            return;
        }
        let i_lo = ((lo * mf).floor().max(0.0) as usize).min(m - 1);
        let i_hi = ((hi * mf).ceil() as usize).clamp(i_lo + 1, m);
        let mut k0 = 0usize;
        for i in i_lo..i_hi {
            let a = i as f64 / mf;
            let b = (i + 1) as f64 / mf;
            while k0 < kk && s[k0 + 1] <= a {
                k0 += 1;
            }
            let offset = self.values.len();
            let mut first: Option<usize> = None;
            let mut k = k0;
            while k < kk && s[k] < b {
                let ov = b.min(s[k + 1]) - a.max(s[k]);
                if ov > 0.0 {
                    if first.is_none() {
                        first = Some(k);
                    }
                    let f = first.unwrap();
                    // Fill any zero-overlap gap so the run stays contiguous.
                    while self.values.len() - offset < k - f {
                        self.values.push(0.0);
                    }
                    self.values.push(ov * mf * scale[k]);
                }
                k += 1;
            }
            if let Some(f) = first {
                self.pieces.push(Piece {
                    ret,
                    source: i as u32,
                    target: (t0 + f) as u32,
                    len: (self.values.len() - offset) as u32,
                    offset,
                });
            }
        }
    }
}

/// Assembles `R_1..R_N` with default options.
pub fn assemble_rn(spec: &MapSpec, grid: YGrid, n_trunc: usize) -> Result<InducedOperator> {
    InducedOperator::assemble(spec, grid, n_trunc, &AssemblyOptions::default())
}

impl InducedOperator {
    pub fn assemble(spec: &MapSpec, grid: YGrid, n_trunc: usize, opts: &AssemblyOptions) -> Result<Self> {
        if n_trunc == 0 {
            return Err(Error::Invalid("branch truncation must be at least 1".into()));
        }
        let tail = TailSequence::new(*spec, n_trunc + 1)?;
        let deficit = tail.x(n_trunc);
        if deficit > opts.max_deficit {
            return Err(Error::MassDeficit { deficit, bound: opts.max_deficit });
        }
        let m = grid.cells();
        let mut bld = Builder { m, pieces: Vec::new(), values: Vec::new() };
        let mut branch_start = vec![0usize];

        // Branch 1: u = 2y − 1 runs over [1/2, 1] and F is the identity in u.
        let edges = grid.edges();
        let ones = vec![1.0; m];
        bld.emit(1, &edges, 0, &ones);
        branch_start.push(bld.pieces.len());

        // Later branches: preimages of the image breakpoints under g^{n−1}.
        let top = spec.left_top();
        let mut bps: Vec<f64> = edges.iter().cloned().filter(|&e| e < top).collect();
        if *bps.last().unwrap() < top {
            bps.push(top);
        }
        let kk = bps.len() - 1;
        let ones_k = vec![1.0; kk];
        let mut orbit: Vec<f64> = bps
            .iter()
            .map(|&b| if b == top { Ok(0.5) } else { spec.left_inverse(b) })
            .collect::<Result<_>>()?;
        for n in 2..=n_trunc {
            bld.emit(n as u32, &orbit, 0, &ones_k);
            branch_start.push(bld.pieces.len());
            for o in orbit.iter_mut() {
                *o = spec.left_inverse(*o)?;
            }
        }
        // `orbit` now holds g^N of the breakpoints: the landing profile of branch N+1.
        let span = orbit[kk] - orbit[0];
        let profile: Vec<f64> = orbit.windows(2).map(|w| (w[1] - w[0]) / span).collect();
        let xn = tail.x(n_trunc);
        let mut tb = Builder { m, pieces: Vec::new(), values: Vec::new() };
        tb.emit_closure(n_trunc as u32 + 1, xn, &profile);

        let (pieces, values) = (bld.pieces, bld.values);
        Ok(Self {
            grid,
            n_trunc,
            structure: ReturnStructure::Map(*spec),
            pieces,
            values,
            branch_start,
            tail_pieces: tb.pieces,
            tail_values: tb.values,
            mass_deficit: deficit,
            tail: Some(tail),
        })
    }

    /// Synthetic full shift on `Y`: `y ↦ 2y − 1/2` on `[1/2, 3/4]`, `y ↦ 2y − 1` on `[3/4, 1]`.
    pub fn doubling(grid: YGrid, n_trunc: usize) -> Result<Self> {
        if n_trunc == 0 {
            return Err(Error::Invalid("branch truncation must be at least 1".into()));
        }
        let m = grid.cells();
        let mut bld = Builder { m, pieces: Vec::new(), values: Vec::new() };
        let edges = grid.edges();
        let ones = vec![1.0; m];
        let low: Vec<f64> = edges.iter().map(|e| e - 0.5).collect();
        bld.emit(1, &low, 0, &ones);
        bld.emit(1, &edges, 0, &ones);
        let mut branch_start = vec![0, bld.pieces.len()];
        branch_start.resize(n_trunc + 1, bld.pieces.len());
        Ok(Self {
            grid,
            n_trunc,
            structure: ReturnStructure::Doubling,
            pieces: bld.pieces,
            values: bld.values,
            branch_start,
            tail_pieces: Vec::new(),
            tail_values: Vec::new(),
            mass_deficit: 0.0,
            tail: None,
        })
    }

    pub fn grid(&self) -> YGrid {
        self.grid
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn structure(&self) -> ReturnStructure {
        self.structure
    }

    /// Normalized Lebesgue measure of `{φ > N}` on `Y`.
    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }

    pub fn tail_sequence(&self) -> Option<&TailSequence> {
        self.tail.as_ref()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece_values(&self, p: &Piece) -> &[f64] {
        &self.values[p.offset..p.offset + p.len as usize]
    }

    /// Pieces of `R_n`, `1 ≤ n ≤ N`.
    pub fn branch(&self, n: usize) -> &[Piece] {
        &self.pieces[self.branch_start[n - 1]..self.branch_start[n]]
    }

    /// Pieces lumping all return times above `N`.
    pub fn closure_pieces(&self) -> impl Iterator<Item = (&Piece, &[f64])> {
        self.tail_pieces
            .iter()
            .map(move |p| (p, &self.tail_values[p.offset..p.offset + p.len as usize]))
    }

    /// `R_n ρ` for a density `ρ` on `Y`.
    pub fn apply_rn(&self, n: usize, rho: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.cells()];
        for p in self.branch(n) {
            add_piece(&mut out, p, self.piece_values(p), rho[p.source as usize]);
        }
        out
    }

    /// Dense row-major `Σ_{n≤N} w(n) R_n`, optionally with the closure weighted by `w(N+1)`.
    fn dense_weighted<F: Fn(usize) -> Complex64>(&self, w: F, closed: bool) -> Vec<Complex64> {
        let m = self.grid.cells();
        let mut a = vec![Complex64::new(0.0, 0.0); m * m];
        for n in 1..=self.n_trunc {
            let zn = w(n);
            for p in self.branch(n) {
                let i = p.source as usize;
                for (t, v) in self.piece_values(p).iter().enumerate() {
                    a[(p.target as usize + t) * m + i] += zn * v;
                }
            }
        }
        if closed {
            let zt = w(self.n_trunc + 1);
            for (p, vals) in self.closure_pieces() {
                let i = p.source as usize;
                for (t, v) in vals.iter().enumerate() {
                    a[(p.target as usize + t) * m + i] += zt * v;
                }
            }
        }
        a
    }

    /// Dense real matrix of the closed operator at `z = 1`.
    pub fn dense_closed_real(&self) -> Vec<f64> {
        self.dense_weighted(|_| Complex64::new(1.0, 0.0), true).into_iter().map(|c| c.re).collect()
    }

    /// Truncated `R(z) = Σ_{n≤N} R_n z^n` as a dense row-major matrix.
    pub fn r_of_z(&self, z: Complex64) -> Vec<Complex64> {
        self.dense_weighted(|n| z.powu(n as u32), false)
    }

    /// `R(z)` including the closure term `z^{N+1} R_{>N}`.
    pub fn r_of_z_closed(&self, z: Complex64) -> Vec<Complex64> {
        self.dense_weighted(|n| z.powu(n as u32), true)
    }
}

#[inline]
pub(crate) fn add_piece(out: &mut [f64], p: &Piece, vals: &[f64], coef: f64) {
    let t = p.target as usize;
    for (o, v) in out[t..t + vals.len()].iter_mut().zip(vals) {
        *o += coef * v;
    }
}

impl Builder {
    fn emit_closure(&mut self, ret: u32, xn: f64, profile: &[f64]) {
        let s = [0.0, xn];
        let mf = self.m as f64;
        let i_hi = ((xn * mf).ceil() as usize).clamp(1, self.m);
        for i in 0..i_hi {
            let a = i as f64 / mf;
            let ov = s[1].min((i + 1) as f64 / mf) - a;
            if ov <= 0.0 {
                continue;
            }
            let offset = self.values.len();
            self.values.extend(profile.iter().map(|q| ov * mf * q));
            self.pieces.push(Piece { ret, source: i as u32, target: 0, len: profile.len() as u32, offset });
        }
    }
}

/// Fixed point of the closed operator, normalized to `∫_Y h dx = 1`.
pub fn invariant_density(op: &InducedOperator) -> Result<GridObservable> {
    invariant_density_with(op, 1e-10, 20_000)
}

pub fn invariant_density_with(op: &InducedOperator, tol: f64, max_iter: usize) -> Result<GridObservable> {
    let grid = op.grid();
    let m = grid.cells();
    let w = grid.width();
    let a = op.dense_closed_real();
    let mut h = vec![1.0 / (m as f64 * w); m];
    let mut next = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        matvec(&a, &h, &mut next);
        let mass: f64 = next.iter().sum::<f64>() * w;
        next.iter_mut().for_each(|v| *v /= mass);
        residual = h.iter().zip(&next).map(|(p, q)| (p - q).abs()).sum::<f64>() * w;
        std::mem::swap(&mut h, &mut next);
        if residual <= tol * 0.1 {
            // Confirm against the un-normalized operator.
            matvec(&a, &h, &mut next);
            let r = h.iter().zip(&next).map(|(p, q)| (p - q).abs()).sum::<f64>() * w;
            if r <= tol {
                return GridObservable::new(grid, h);
            }
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}
