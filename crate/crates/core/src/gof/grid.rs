use crate::error::{Error, Result};
use crate::model::check_density;
use crate::scalar::Scalar;
use crate::scenario::{Boundary, InitialDensity};

/// Cell averages on a uniform mesh; cell `m` is `[x0 + m dx, x0 + (m+1) dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid<T> {
    pub x0: T,
    pub dx: T,
    pub cells: Vec<T>,
    pub boundary: Boundary,
    frozen: [T; 2],
}

impl<T: Scalar> DensityGrid<T> {
    pub fn new(x0: T, dx: T, cells: Vec<T>, boundary: Boundary) -> Result<Self> {
        if !(dx > T::zero()) {
            return Err(Error::InvalidParams("dx must be positive".into()));
        }
        if cells.is_empty() {
            return Err(Error::InvalidParams("grid needs at least one cell".into()));
        }
        for (m, &v) in cells.iter().enumerate() {
            check_density(v, &format!("cell {m}"))?;
        }
        let frozen = [cells[0], cells[cells.len() - 1]];
        Ok(Self {
            x0,
            dx,
            cells,
            boundary,
            frozen,
        })
    }

    /// Exact cell averages of `rho` on `n` cells starting at `x0`.
    pub fn from_initial(rho: &InitialDensity, x0: f64, dx: f64, n: usize, boundary: Boundary) -> Result<Self> {
        let cells = (0..n)
            .map(|m| {
                let a = x0 + m as f64 * dx;
                T::lit(rho.cell_average(a, a + dx))
            })
            .collect();
        Self::new(T::lit(x0), T::lit(dx), cells, boundary)
    }

    /// Replaces the cell values, keeping mesh and frozen boundary data.
    pub fn with_cells(&self, cells: Vec<T>) -> Self {
        Self { cells, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Position of interface `k` (between cells `k−1` and `k`).
    pub fn interface(&self, k: usize) -> T {
        self.x0 + self.dx * T::lit(k as f64)
    }

    pub fn center(&self, m: usize) -> T {
        self.x0 + self.dx * (T::lit(m as f64) + T::half())
    }

    pub fn x_hi(&self) -> T {
        self.interface(self.len())
    }

    /// Ghost values left of cell 0 and right of the last cell.
    pub fn ghosts(&self) -> [T; 2] {
        match self.boundary {
            Boundary::DirichletFrozen => self.frozen,
            Boundary::Outflow => [self.cells[0], self.cells[self.len() - 1]],
        }
    }

    /// Density of cell `m`, with `-1` and `len()` mapping to the ghosts.
    pub fn value(&self, m: isize) -> T {
        let g = self.ghosts();
        if m < 0 {
            g[0]
        } else if m as usize >= self.len() {
            g[1]
        } else {
            self.cells[m as usize]
        }
    }

    /// Cell containing `y` under the half-open convention. Positions within
    /// `1e−9` cell widths of an interface are snapped onto it, so a vehicle
    /// sitting on an interface belongs to the cell on its right.
    pub fn locate(&self, y: T) -> Option<isize> {
        let s = (y - self.x0) / self.dx;
        let r = s.round();
        let s = if (s - r).abs() < T::lit(1e-9) { r } else { s };
        let m = s.floor().to_isize()?;
        Some(m)
    }

    pub fn mass(&self) -> T {
        self.cells.iter().fold(T::zero(), |a, &v| a + v) * self.dx
    }

    pub fn total_variation(&self) -> T {
        self.cells.windows(2).fold(T::zero(), |a, w| a + (w[1] - w[0]).abs())
    }
}
