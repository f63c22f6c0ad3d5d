//! Cell-centered grid on the unit square with one ghost layer.
//!
//! Interior cells are indexed `1..=n` along each axis; indices `0` and `n + 1`
//! are ghost cells. A field satisfies the homogeneous Neumann condition when
//! every ghost cell mirrors its adjacent interior cell. All reductions are
//! plain serial sums in a fixed order, so results are bit-reproducible.

use crate::error::{Error, Result};

/// Square cell-centered mesh over `[0, 1]²` with `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs n >= 2 cells per axis, got {n}")));
        }
        Ok(Grid {
            n,
            h: 1.0 / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of cells per axis including the ghost ring.
    pub fn stride(&self) -> usize {
        self.n + 2
    }

    /// Area of the domain.
    pub fn area(&self) -> f64 {
        1.0
    }

    /// Coordinate of cell center `l` (ghost indices included), `(l - 1/2) h`.
    pub fn center(&self, l: usize) -> f64 {
        (l as f64 - 0.5) * self.h
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n + 2) + j
    }
}

/// Norms available through [`norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    Linf,
    H1,
}

/// Scalar grid function with a ghost ring of width one.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.stride() * grid.stride()],
        }
    }

    /// Evaluates `f(x, y)` at every interior cell center, then mirrors the
    /// ghost ring.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for i in 1..=grid.n {
            let x = grid.center(i);
            for j in 1..=grid.n {
                out.values[grid.idx(i, j)] = f(x, grid.center(j));
            }
        }
        out.apply_neumann_bc();
        out
    }

    /// Builds a field from interior values in row-major order (row index is
    /// the x index), then mirrors the ghost ring.
    pub fn from_interior(grid: Grid, interior: &[f64]) -> Result<Self> {
        let n = grid.n;
        if interior.len() != n * n {
            return Err(Error::Config(format!(
                "expected {} interior values, got {}",
                n * n,
                interior.len()
            )));
        }
        let mut out = Self::zeros(grid);
        for i in 1..=n {
            for j in 1..=n {
                out.values[grid.idx(i, j)] = interior[(i - 1) * n + (j - 1)];
            }
        }
        out.apply_neumann_bc();
        Ok(out)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Raw storage including ghost cells.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> Vec<f64> {
        let n = self.grid.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Fills the ghost ring by mirroring the adjacent interior cells: first
    /// the x faces, then the y faces over the full extended x range, which
    /// also sets the corners.
    pub fn apply_neumann_bc(&mut self) {
        let n = self.grid.n;
        let g = self.grid;
        for j in 1..=n {
            self.values[g.idx(0, j)] = self.values[g.idx(1, j)];
            self.values[g.idx(n + 1, j)] = self.values[g.idx(n, j)];
        }
        for i in 0..=n + 1 {
            self.values[g.idx(i, 0)] = self.values[g.idx(i, 1)];
            self.values[g.idx(i, n + 1)] = self.values[g.idx(i, n)];
        }
    }

    pub fn with_neumann_bc(mut self) -> Self {
        self.apply_neumann_bc();
        self
    }

    /// Pointwise map over every stored value. Mirroring commutes with
    /// pointwise maps, so a bc-consistent input yields a bc-consistent output.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Field) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest interior value.
    pub fn max(&self) -> f64 {
        self.interior().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest interior value.
    pub fn min(&self) -> f64 {
        self.interior().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Five-point discrete Laplacian. Expects a bc-consistent input; the output
/// ghost ring is mirrored.
pub fn laplacian(f: &Field) -> Field {
    let g = f.grid;
    let n = g.n;
    let inv_h2 = 1.0 / (g.h * g.h);
    let v = &f.values;
    let s = g.stride();
    let mut out = Field::zeros(g);
    for i in 1..=n {
        for j in 1..=n {
            let k = g.idx(i, j);
            out.values[k] = (v[k + s] + v[k - s] + v[k + 1] + v[k - 1] - 4.0 * v[k]) * inv_h2;
        }
    }
    out.apply_neumann_bc();
    out
}

/// Discrete L² inner product `h² Σ f g` over interior cells.
pub fn inner(f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(f.grid, g.grid);
    let grid = f.grid;
    let n = grid.n;
    let mut sum = 0.0;
    for i in 1..=n {
        let row = grid.idx(i, 1);
        for k in row..row + n {
            sum += f.values[k] * g.values[k];
        }
    }
    grid.h * grid.h * sum
}

/// Inner product of discrete gradients on the staggered edges,
/// `[Dx f, Dx g]_x + [Dy f, Dy g]_y`, where each interior cell averages its
/// two adjacent edge products. Both inputs must be bc-consistent.
pub fn grad_inner(f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(f.grid, g.grid);
    let grid = f.grid;
    let n = grid.n;
    let s = grid.stride();
    let inv_h = 1.0 / grid.h;
    let a = &f.values;
    let b = &g.values;
    let mut sum = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            let k = grid.idx(i, j);
            let xp = (a[k + s] - a[k]) * (b[k + s] - b[k]);
            let xm = (a[k] - a[k - s]) * (b[k] - b[k - s]);
            let yp = (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
            let ym = (a[k] - a[k - 1]) * (b[k] - b[k - 1]);
            sum += 0.5 * (xp + xm) + 0.5 * (yp + ym);
        }
    }
    // h² · (1/h)² from the two difference quotients
    grid.h * grid.h * inv_h * inv_h * sum
}

/// Cell-center quadrature `h² Σ f` of the interior values.
pub fn quad(f: &Field) -> f64 {
    let grid = f.grid;
    let n = grid.n;
    let mut sum = 0.0;
    for i in 1..=n {
        let row = grid.idx(i, 1);
        sum += f.values[row..row + n].iter().sum::<f64>();
    }
    grid.h * grid.h * sum
}

pub fn norm(f: &Field, kind: Norm) -> f64 {
    match kind {
        Norm::L2 => inner(f, f).sqrt(),
        Norm::Linf => f.interior().into_iter().fold(0.0, |m, v| f64::max(m, v.abs())),
        Norm::H1 => (inner(f, f) + grad_inner(f, f)).sqrt(),
    }
}
