use super::{add_piece, InducedOperator, Piece};

use crate::error::{Error, Result};
use crate::grid::{GridObservable, YGrid};

const BLOCK: usize = 64;

/// `T_n v` and `S_n = Σ_{j≤n} T_j v` for `n = 0..=n_max`, as functions on `Y`.
#[derive(Clone, Debug)]
pub struct RenewalAccumulator {
    pub grid: YGrid,
    pub n_max: usize,
    tn: Vec<f64>,
    partial: Vec<f64>,
}

impl RenewalAccumulator {
    pub fn tn(&self, n: usize) -> &[f64] {
        let m = self.grid.cells();
        &self.tn[n * m..(n + 1) * m]
    }

    pub fn partial_sum(&self, n: usize) -> &[f64] {
        let m = self.grid.cells();
        &self.partial[n * m..(n + 1) * m]
    }
}

/// Push form of the renewal equation on densities:
/// `w_n = inj_n + Σ_{j=1}^{n} R_j w_{n−j}`, returned row-major in `n`.
///
/// With a single injection `inj_0 = ρ` this is `w_n = T_n ρ`. Only `R_j`
/// with `j ≤ n_max` enter, so `n_max` may not exceed the truncation.
pub fn renewal_density(op: &InducedOperator, injections: &[Vec<f64>], n_max: usize) -> Result<Vec<f64>> {
    if n_max > op.n_trunc() {
        return Err(Error::Invalid(format!(
            "n_max = {n_max} exceeds the branch truncation {}",
            op.n_trunc()
        )));
    }
    let m = op.grid().cells();
    if injections.iter().any(|v| v.len() != m) {
        return Err(Error::Invalid("injection length does not match the grid".into()));
    }
    let mut w = vec![0.0; (n_max + 1) * m];
    let pieces = op.pieces();
    let near_end = branch_end(op, BLOCK - 1);
    let mut n0 = 0;
    while n0 <= n_max {
        let n1 = (n0 + BLOCK).min(n_max + 1);
        let (hist, blk) = w.split_at_mut(n0 * m);
        let blk = &mut blk[..(n1 - n0) * m];
        // Branches with return time ≥ BLOCK only read rows before the block.
        let far_end = branch_end(op, n1 - 1);
        if far_end > near_end {
            for p in &pieces[near_end..far_end] {
                far_update(op, p, hist, blk, n0, n1, m);
            }
        }
        // Short return times, one step at a time.
        for t in n0..n1 {
            let row_start = (t - n0) * m;
            if let Some(inj) = injections.get(t) {
                for (o, v) in blk[row_start..row_start + m].iter_mut().zip(inj) {
                    *o += v;
                }
            }
            let (done, cur) = blk.split_at_mut(row_start);
            let cur = &mut cur[..m];
            for p in &pieces[..branch_end(op, (BLOCK - 1).min(t))] {
                let ret = p.ret as usize;
                let src = t - ret;
                let coef = if src >= n0 { done[(src - n0) * m + p.source as usize] } else { hist[src * m + p.source as usize] };
                if coef != 0.0 {
                    add_piece(cur, p, op.piece_values(p), coef);
                }
            }
        }
        n0 = n1;
    }
    Ok(w)
}

/// Index one past the last piece with return time `≤ n`.
fn branch_end(op: &InducedOperator, n: usize) -> usize {
    op.branch_start[n.min(op.n_trunc())]
}

fn far_update(op: &InducedOperator, p: &Piece, hist: &[f64], blk: &mut [f64], n0: usize, n1: usize, m: usize) {
    let ret = p.ret as usize;
    let vals = op.piece_values(p);
    let len = vals.len();
    let tgt = p.target as usize;
    let src_cell = p.source as usize;
    let mut t = n0.max(ret);
    let coef = |t: usize| hist[(t - ret) * m + src_cell];
    while t + 4 <= n1 {
        let c = [coef(t), coef(t + 1), coef(t + 2), coef(t + 3)];
        let rows = &mut blk[(t - n0) * m..(t - n0 + 4) * m];
        let (r0, rest) = rows.split_at_mut(m);
        let (r1, rest) = rest.split_at_mut(m);
        let (r2, r3) = rest.split_at_mut(m);
        let (r0, r1, r2, r3) = (
            &mut r0[tgt..tgt + len],
            &mut r1[tgt..tgt + len],
            &mut r2[tgt..tgt + len],
            &mut r3[tgt..tgt + len],
        );
        for j in 0..len {
            let v = vals[j];
            r0[j] += c[0] * v;
            r1[j] += c[1] * v;
            r2[j] += c[2] * v;
            r3[j] += c[3] * v;
        }
        t += 4;
    }
    while t < n1 {
        let c = coef(t);
        let row = &mut blk[(t - n0) * m + tgt..(t - n0) * m + tgt + len];
        for (o, v) in row.iter_mut().zip(vals) {
            *o += c * v;
        }
        t += 1;
    }
}

/// `T_n v` for a function `v` on `Y` (with respect to `μ = h dx`).
pub fn renewal_tn(op: &InducedOperator, h: &GridObservable, v: &GridObservable, n_max: usize) -> Result<RenewalAccumulator> {
    let m = op.grid().cells();
    if v.values.len() != m || h.values.len() != m {
        return Err(Error::Invalid("observable and density must live on the operator grid".into()));
    }
    let rho: Vec<f64> = v.values.iter().zip(&h.values).map(|(a, b)| a * b).collect();
    let mut tn = renewal_density(op, &[rho], n_max)?;
    for row in tn.chunks_mut(m) {
        for (x, hh) in row.iter_mut().zip(&h.values) {
            *x /= hh;
        }
    }
    let mut partial = tn.clone();
    for n in 1..=n_max {
        let (a, b) = partial.split_at_mut(n * m);
        for (x, p) in b[..m].iter_mut().zip(&a[(n - 1) * m..]) {
            *x += p;
        }
    }
    Ok(RenewalAccumulator { grid: op.grid(), n_max, tn, partial })
}
