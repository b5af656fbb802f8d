use super::InducedOperator;
use crate::error::{Error, Result};
use crate::grid::{GridObservable, YGrid};
use crate::maps::{x_level_sets, MapSpec, TailSequence};
use crate::quadrature::{integrate, QuadOptions};
use std::sync::Arc;

/// Increasing cell edges on `[δ, 1]`; `1/2` is always an edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    edges: Vec<f64>,
}

impl Mesh {
    pub fn new(mut edges: Vec<f64>) -> Result<Self> {
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        if edges.len() < 2 || edges[0] <= 0.0 || *edges.last().unwrap() != 1.0 {
            return Err(Error::Invalid("mesh must be an increasing partition of [δ, 1] with δ > 0".into()));
        }
        if !edges.contains(&0.5) {
            return Err(Error::Invalid("mesh must contain 1/2 as an edge".into()));
        }
        Ok(Self { edges })
    }

    /// Markov-adapted mesh: the `Y` grid plus `g^k` of the image breakpoints
    /// for `k = 1..K`, so each ladder cell maps onto one cell of the level above.
    pub fn ladder(spec: &MapSpec, grid: YGrid, levels: usize) -> Result<Self> {
        let mut edges = grid.edges();
        let top = spec.left_top();
        let mut orbit: Vec<f64> = edges.iter().cloned().filter(|&e| e < top).collect();
        if *orbit.last().unwrap() < top {
            orbit.push(top);
        }
        for k in 1..=levels {
            for o in orbit.iter_mut() {
                *o = if k == 1 && *o == top { 0.5 } else { spec.left_inverse(*o)? };
            }
            edges.extend_from_slice(&orbit);
        }
        Self::new(edges)
    }

    /// Geometric refinement towards `δ` below `1/2` plus a uniform grid on `Y`.
    pub fn geometric(delta: f64, ratio: f64, y_cells: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Invalid("geometric mesh needs δ in (0,1/2) and ratio in (0,1)".into()));
        }
        let mut edges = YGrid::new(y_cells)?.edges();
        let mut x = 0.5;
        loop {
            x *= ratio;
            if x <= delta {
                break;
            }
            edges.push(x);
        }
        edges.push(delta);
        Self::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn floor(&self) -> f64 {
        self.edges[0]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Index of the first cell whose right edge exceeds `x`.
    fn locate(&self, x: f64) -> usize {
        self.edges[1..].partition_point(|&e| e <= x).min(self.cells() - 1)
    }

    /// Index of the cell starting at edge `e` (which must be an edge).
    pub fn cell_starting_at(&self, e: f64) -> Option<usize> {
        self.edges[..self.cells()].binary_search_by(|x| x.total_cmp(&e)).ok()
    }
}

/// Cell averages of a density on a [`Mesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeshObservable {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

impl MeshObservable {
    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.cells();
        Self { mesh, values: vec![0.0; n] }
    }

    /// Embeds a density on the `Y` grid; the mesh must refine that grid on `Y`.
    pub fn from_y(mesh: Arc<Mesh>, v: &GridObservable) -> Result<Self> {
        let mut out = Self::zeros(mesh);
        let g = v.grid;
        for k in 0..g.cells() {
            let a = out.mesh.cell_starting_at(g.edge(k)).ok_or_else(|| Error::Invalid("mesh does not refine the Y grid".into()))?;
            let mut i = a;
            while i < out.mesh.cells() && out.mesh.edges[i] < g.edge(k + 1) {
                out.values[i] = v.values[k];
                i += 1;
            }
        }
        Ok(out)
    }

    /// Restriction to `Y`, averaged back onto the grid.
    pub fn to_y(&self, grid: YGrid) -> GridObservable {
        let w = grid.width();
        let mut vals = vec![0.0; grid.cells()];
        let e = self.mesh.edges();
        for i in 0..self.mesh.cells() {
            if e[i] < 0.5 {
                continue;
            }
            let k = grid.cell_of(0.5 * (e[i] + e[i + 1]));
            vals[k] += self.values[i] * (e[i + 1] - e[i]) / w;
        }
        GridObservable { grid, values: vals, regularity: crate::grid::Regularity::BoundedVariation }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.mesh.width(i)).sum()
    }
}

/// Ulam matrix of the full map `f` on a mesh over `[δ, 1]`.
#[derive(Clone, Debug)]
pub struct FullMapOperator {
    mesh: Arc<Mesh>,
    /// Target-major sparse rows: `(source, weight)`.
    rows: Vec<Vec<(usize, f64)>>,
    /// Fraction of each source cell mapped below `δ`.
    escape: Vec<f64>,
}

impl FullMapOperator {
    pub fn new(spec: &MapSpec, mesh: Arc<Mesh>) -> Result<Self> {
        let e = mesh.edges().to_vec();
        let top = spec.left_top();
        let delta = mesh.floor();
        let ginv = |x: f64| -> Result<f64> { if x >= top { Ok(0.5) } else { spec.left_inverse(x) } };
        let n = mesh.cells();
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let (c, d) = (e[j], e[j + 1]);
            let wj = d - c;
            let mut row = Vec::new();
            if c < top {
                let (a, b) = (ginv(c)?, ginv(d.min(top))?);
                push_overlaps(&mesh, a.max(delta), b, wj, &mut row);
            }
            push_overlaps(&mesh, 0.5 * (c + 1.0), 0.5 * (d + 1.0), wj, &mut row);
            rows.push(row);
        }
        let cut = 0.5 * (1.0 + delta);
        let escape = (0..n)
            .map(|i| {
                let ov = cut.min(e[i + 1]) - e[i].max(0.5);
                if ov > 0.0 {
                    ov / (e[i + 1] - e[i])
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { mesh, rows, escape })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// One application of `L`; fails if more than `escape_tol` mass leaves the mesh.
    pub fn apply(&self, v: &MeshObservable, escape_tol: f64) -> Result<MeshObservable> {
        let escaped: f64 = v
            .values
            .iter()
            .enumerate()
            .map(|(i, x)| x.abs() * self.escape[i] * self.mesh.width(i))
            .sum();
        if escaped > escape_tol {
            return Err(Error::Escape { mass: escaped, floor: self.mesh.floor(), tol: escape_tol });
        }
        let values = self.rows.iter().map(|r| r.iter().map(|(i, w)| w * v.values[*i]).sum()).collect();
        Ok(MeshObservable { mesh: self.mesh.clone(), values })
    }
}

fn push_overlaps(mesh: &Mesh, a: f64, b: f64, wj: f64, row: &mut Vec<(usize, f64)>) {
    if b <= a {
        return;
    }
    let e = mesh.edges();
    let mut i = mesh.locate(a);
    while i < mesh.cells() && e[i] < b {
        let ov = b.min(e[i + 1]) - a.max(e[i]);
        if ov > 0.0 {
            row.push((i, ov / wj));
        }
        i += 1;
    }
}

/// One application of the full-map transfer operator to a density on `mesh`.
pub fn full_map_l(spec: &MapSpec, mesh: Arc<Mesh>, v: &MeshObservable, escape_tol: f64) -> Result<MeshObservable> {
    FullMapOperator::new(spec, mesh)?.apply(v, escape_tol)
}

/// `L^ℓ(1_{X_ℓ} v)` for `ℓ = 0..=K` as densities on `Y`.
///
/// `v` is a density on `(0, 1]` supported in `[support.0, support.1]`.
/// Each term is evaluated as `v(g^ℓ y)·(g^ℓ)'(y)` and cell-averaged.
pub fn spread_push<F: Fn(f64) -> f64>(
    spec: &MapSpec,
    grid: YGrid,
    v: F,
    support: (f64, f64),
    k: usize,
) -> Result<Vec<GridObservable>> {
    if !(support.0 > 0.0) {
        return Err(Error::Domain("observable support touches 0".into()));
    }
    let tail = TailSequence::new(*spec, k + 1)?;
    if tail.x(k + 1) > support.0 {
        return Err(Error::Invalid(format!(
            "K = {k} too small: level K+1 starts at {} above the support floor {}",
            tail.x(k + 1),
            support.0
        )));
    }
    let levels = x_level_sets(&tail, k)?;
    let top = spec.left_top();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 2000 };
    let w = grid.width();
    let mut out = Vec::with_capacity(k + 1);
    out.push(GridObservable::from_fn(grid, |y| v(y)));
    for (ell, lev) in levels.iter().enumerate().skip(1) {
        let (lo, hi) = *lev;
        let mut vals = vec![0.0; grid.cells()];
        if hi > support.0 && lo < support.1 {
            for (c, val) in vals.iter_mut().enumerate() {
                let a = grid.edge(c);
                let b = grid.edge(c + 1).min(top);
                if b <= a {
                    break;
                }
                let r = integrate(
                    |y| {
                        let mut x = y;
                        let mut dj = 1.0;
                        for _ in 0..ell {
                            x = if x >= top { 0.5 } else { spec.left_inverse(x).unwrap_or(0.5) };
                            dj /= spec.left_derivative(x);
                        }
                        v(x) * dj
                    },
                    a,
                    b,
                    &opts,
                )?;
                *val = r.value / w;
            }
        }
        out.push(GridObservable::new(grid, vals)?);
    }
    Ok(out)
}

/// Invariant density extended to the first `K` ladder levels of the
/// Markov-adapted mesh, from the induced density `h` on `Y`.
///
/// Mass of the level-`k` cell over target cell `j` is `Σ_{n>k} (R_n h)_j·w`.
pub fn extended_density(op: &InducedOperator, h: &GridObservable, levels: usize) -> Result<MeshObservable> {
    let spec = match op.structure() {
        super::ReturnStructure::Map(s) => s,
        super::ReturnStructure::Doubling => return Err(Error::Invalid("no ladder for the synthetic full shift".into())),
    };
    if levels + 1 > op.n_trunc() {
        return Err(Error::Invalid("more ladder levels than branches".into()));
    }
    let grid = op.grid();
    let m = grid.cells();
    let w = grid.width();
    let mesh = Arc::new(Mesh::ladder(&spec, grid, levels)?);
    // landing[n][j] = (R_n h)_j·w, with the closure as the last entry.
    let mut suffix = vec![0.0; m];
    for (p, vals) in op.closure_pieces() {
        for (t, v) in vals.iter().enumerate() {
            suffix[p.target as usize + t] += v * h.values[p.source as usize] * w;
        }
    }
    let mut level_mass = vec![vec![0.0; m]; levels + 1];
    for n in (1..=op.n_trunc()).rev() {
        if n <= levels {
            level_mass[n] = suffix.clone();
        }
        for p in op.branch(n) {
            for (t, v) in op.piece_values(p).iter().enumerate() {
                suffix[p.target as usize + t] += v * h.values[p.source as usize] * w;
            }
        }
    }
    let mut out = MeshObservable::from_y(mesh.clone(), h)?;
    let top = spec.left_top();
    let mut orbit: Vec<f64> = grid.edges().into_iter().filter(|&e| e < top).collect();
    if *orbit.last().unwrap() < top {
        orbit.push(top);
    }
    for (k, mass) in level_mass.iter().enumerate().skip(1) {
        for o in orbit.iter_mut() {
            *o = if k == 1 && *o == top { 0.5 } else { spec.left_inverse(*o)? };
        }
        for j in 0..orbit.len() - 1 {
            let i = mesh.cell_starting_at(orbit[j]).ok_or_else(|| Error::Invalid("ladder mesh mismatch".into()))?;
            out.values[i] = mass[j] / (orbit[j + 1] - orbit[j]);
        }
    }
    Ok(out)
}
