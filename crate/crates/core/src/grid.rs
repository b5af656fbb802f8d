//! Uniform cell grid on `Y = [1/2, 1]` and cell-averaged observables.

use crate::error::{Error, Result};
use crate::quadrature::kronrod15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YGrid {
    m: usize,
}

impl YGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("grid needs at least one cell".into()));
        }
        Ok(Self { m })
    }

    pub fn cells(&self) -> usize {
        self.m
    }

    pub fn width(&self) -> f64 {
        0.5 / self.m as f64
    }

    pub fn edge(&self, i: usize) -> f64 {
        0.5 + 0.5 * i as f64 / self.m as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.edge(i)).collect()
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 + 0.5 * (i as f64 + 0.5) / self.m as f64
    }

    /// Cell containing `y`, clamped to the grid.
    pub fn cell_of(&self, y: f64) -> usize {
        let k = ((y - 0.5) * 2.0 * self.m as f64).floor();
        (k.max(0.0) as usize).min(self.m - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    BoundedVariation,
    Holder,
}

/// Cell averages of a function (or density) on `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridObservable {
    pub grid: YGrid,
    pub values: Vec<f64>,
    pub regularity: Regularity,
}

impl GridObservable {
    pub fn new(grid: YGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Invalid(format!(
                "observable has {} values for a {}-cell grid",
                values.len(),
                grid.cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("observable values must be finite".into()));
        }
        Ok(Self { grid, values, regularity: Regularity::BoundedVariation })
    }

    pub fn constant(grid: YGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.cells()], regularity: Regularity::BoundedVariation }
    }

    /// Cell averages of `f` by a 15-point rule per cell.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: YGrid, f: F) -> Self {
        let w = grid.width();
        let values = (0..grid.cells())
            .map(|i| kronrod15(&f, grid.edge(i), grid.edge(i + 1)) / w)
            .collect();
        Self { grid, values, regularity: Regularity::BoundedVariation }
    }

    /// Sum of absolute jumps between neighbouring cells.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Smallest closed interval containing all non-zero cells, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0)?;
        Some((self.grid.edge(first), self.grid.edge(last + 1)))
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.width()
    }

    /// `∫ v h dx` for a density `h` on the same grid.
    pub fn integral_against(&self, h: &GridObservable) -> f64 {
        self.values.iter().zip(&h.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.width()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
