use crate::error::{Error, Result};
use crate::grid::SymGrid;
use crate::one_dim::Profile1D;
use crate::potential::{Point, PotentialSpec};
use crate::scalar::Real;
use crate::strip2d::{Field2D, YBoundary};

/// Condition imposed on the top level `z = Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapCondition {
    /// The top slice is fixed to the two-dimensional heteroclinic.
    Dirichlet,
    /// The top slice is free (natural boundary).
    Neumann,
}

/// Spacings and lateral extent of the prism grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrismGrid<T> {
    pub x_extent: T,
    pub hx: T,
    pub hy: T,
    pub hz: T,
}

impl<T: Real> Default for PrismGrid<T> {
    fn default() -> Self {
        Self { x_extent: T::lit(8.0), hx: T::lit(0.1), hy: T::lit(0.15), hz: T::lit(0.15) }
    }
}

impl<T: Real> PrismGrid<T> {
    pub fn xgrid(&self) -> Result<SymGrid<T>> {
        SymGrid::with_spacing(self.x_extent, self.hx)
    }

    /// Half-opening angle `pi / (2 j)` of the prism.
    pub fn theta(j: usize) -> Result<T> {
        if j < 2 {
            return Err(Error::Argument(format!("symmetry order must be at least 2, got {j}")));
        }
        Ok(T::lit(std::f64::consts::PI) / T::from_usize_lossy(2 * j))
    }

    /// Number of y-rows on each side of the centre line at every z-level:
    /// the largest `n` with `n hy <= z tan(theta)`.
    pub fn staircase(&self, j: usize, z_extent: T) -> Result<Vec<usize>> {
        let tan = Self::theta(j)?.tan();
        if !(self.hy > T::zero() && self.hz > T::zero()) {
            return Err(Error::Grid("prism spacings must be positive".into()));
        }
        let levels = (z_extent / self.hz).round();
        if !(levels >= T::one()) || ((z_extent / self.hz) - levels).abs() > T::lit(1e-6) * levels {
            return Err(Error::Grid(format!("Z = {z_extent} is not a positive multiple of hz = {}", self.hz)));
        }
        let levels = levels.to_usize().ok_or_else(|| Error::Grid("too many levels".into()))?;
        Ok((0..=levels)
            .map(|k| {
                let z = T::from_usize_lossy(k) * self.hz;
                (z * tan / self.hy + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
            })
            .collect())
    }
}

/// A field on the truncated prism `{0 <= z <= Z, |y| <= z tan(theta)}`,
/// discretized on staircase levels: level `k` sits at `z = k hz` and holds
/// the rows `|y| <= half_rows[k] hy`, each row spanning the whole x-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field3D<T> {
    pub j: usize,
    pub theta: T,
    pub xgrid: SymGrid<T>,
    pub hy: T,
    pub hz: T,
    pub half_rows: Vec<usize>,
    /// Level `k`, row-major with rows `y = -n_k hy, ..., n_k hy`.
    pub levels: Vec<Vec<Point<T>>>,
    pub cap: CapCondition,
}

impl<T: Real> Field3D<T> {
    pub fn from_fn(
        j: usize,
        z_extent: T,
        grid: &PrismGrid<T>,
        cap: CapCondition,
        mut f: impl FnMut(T, T, T) -> Point<T>,
    ) -> Result<Self> {
        let xgrid = grid.xgrid()?;
        let half_rows = grid.staircase(j, z_extent)?;
        let levels = half_rows
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let z = T::from_usize_lossy(k) * grid.hz;
                let mut level = Vec::with_capacity((2 * n + 1) * xgrid.n);
                for r in 0..2 * n + 1 {
                    let y = row_y(r, n, grid.hy);
                    level.extend((0..xgrid.n).map(|ix| f(xgrid.x(ix), y, z)));
                }
                level
            })
            .collect();
        Ok(Self { j, theta: PrismGrid::theta(j)?, xgrid, hy: grid.hy, hz: grid.hz, half_rows, levels, cap })
    }

    /// `u(x, y, z) = v(x, y)` on every level, except that levels too narrow
    /// to resolve a strip (a single row) carry `(q1, 0)`.
    pub fn extruded(
        v: &Field2D<T>,
        q: &Profile1D<T>,
        j: usize,
        z_extent: T,
        hz: T,
        cap: CapCondition,
    ) -> Result<Self> {
        let hy = v.ygrid.h();
        let grid = PrismGrid { x_extent: v.xgrid.extent, hx: v.xgrid.h(), hy, hz };
        if !q.grid.same_as(&v.xgrid) {
            return Err(Error::Grid("profile and field x-grids differ".into()));
        }
        let half_rows = grid.staircase(j, z_extent)?;
        let top = *half_rows.last().expect("at least one level");
        let c = v.ygrid.center();
        if top > c {
            return Err(Error::Grid(format!(
                "the 2D field covers |y| <= {}, the prism needs {}",
                v.half_width(),
                T::from_usize_lossy(top) * hy
            )));
        }
        let nx = v.nx();
        let levels = half_rows
            .iter()
            .map(|&n| {
                if n == 0 {
                    q.values.iter().map(|p| [p[0], T::zero()]).collect()
                } else {
                    v.values[(c - n) * nx..(c + n + 1) * nx].to_vec()
                }
            })
            .collect();
        Ok(Self { j, theta: PrismGrid::theta(j)?, xgrid: v.xgrid, hy, hz, half_rows, levels, cap })
    }

    pub fn nx(&self) -> usize {
        self.xgrid.n
    }

    pub fn nz(&self) -> usize {
        self.levels.len()
    }

    pub fn z_extent(&self) -> T {
        self.z(self.nz() - 1)
    }

    pub fn z(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.hz
    }

    /// Half-width `n_k hy` of the slice at level `k`.
    pub fn half_width(&self, k: usize) -> T {
        T::from_usize_lossy(self.half_rows[k]) * self.hy
    }

    /// Levels with a single row cannot carry a strip profile.
    pub fn is_apex(&self, k: usize) -> bool {
        self.half_rows[k] == 0
    }

    /// Value at column `ix`, row `iy` (signed, `|iy| <= n_k`) of level `k`.
    #[inline]
    pub fn at(&self, k: usize, ix: usize, iy: isize) -> Point<T> {
        let n = self.half_rows[k] as isize;
        self.levels[k][(iy + n) as usize * self.nx() + ix]
    }

    pub fn active_nodes(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    /// The slice at level `k` as a Neumann strip field (`None` at the apex).
    pub fn slice(&self, k: usize) -> Option<Field2D<T>> {
        let n = self.half_rows[k];
        if n == 0 {
            return None;
        }
        let ygrid = SymGrid::new(self.half_width(k), 2 * n + 1).ok()?;
        Some(Field2D { xgrid: self.xgrid, ygrid, values: self.levels[k].clone(), boundary: YBoundary::Neumann })
    }

    /// Largest violation of the slice symmetries
    /// `u(-x, y, z) = (-u1, u2)` and `u(x, -y, z) = (u1, -u2)`.
    pub fn symmetry_defect(&self) -> T {
        let nx = self.nx();
        let mut worst = T::zero();
        for k in 0..self.nz() {
            let n = self.half_rows[k] as isize;
            for iy in -n..=n {
                for ix in 0..nx {
                    let v = self.at(k, ix, iy);
                    let mx = self.at(k, nx - 1 - ix, iy);
                    let my = self.at(k, ix, -iy);
                    worst = worst
                        .max((v[0] + mx[0]).abs())
                        .max((v[1] - mx[1]).abs())
                        .max((v[0] - my[0]).abs())
                        .max((v[1] + my[1]).abs());
                }
            }
        }
        worst
    }

    pub fn sup_norm(&self) -> T {
        self.levels.iter().flatten().map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt()).fold(T::zero(), T::max)
    }

    /// Whether the columns `x = +-X` hold the wells on every level.
    pub fn is_clamped(&self, p: &PotentialSpec<T>) -> bool {
        let nx = self.nx();
        self.levels.iter().all(|l| l.chunks(nx).all(|row| row[0] == p.a_minus() && row[nx - 1] == p.a_plus()))
    }

    /// Zeroes `u1` on the plane `x = 0` and `u2` on the plane `y = 0`, the
    /// values forced there by the slice symmetries.
    pub fn zero_symmetry_lines(&mut self) {
        let (nx, c) = (self.nx(), self.xgrid.center());
        for (k, level) in self.levels.iter_mut().enumerate() {
            let n = self.half_rows[k];
            for (r, row) in level.chunks_mut(nx).enumerate() {
                row[c][0] = T::zero();
                if r == n {
                    row.iter_mut().for_each(|v| v[1] = T::zero());
                }
            }
        }
    }

    /// Quarter `x >= 0, y >= 0` of every level, interleaved, level after
    /// level.
    pub fn to_quarter(&self) -> Vec<T> {
        let (nx, c) = (self.nx(), self.xgrid.center());
        let mut out = Vec::new();
        for (k, level) in self.levels.iter().enumerate() {
            let n = self.half_rows[k];
            for r in n..=2 * n {
                for v in &level[r * nx + c..(r + 1) * nx] {
                    out.push(v[0]);
                    out.push(v[1]);
                }
            }
        }
        out
    }

    /// Overwrites the values from quarter data, expanding by both reflections.
    pub fn set_from_quarter(&mut self, quarter: &[T]) {
        let (nx, c) = (self.nx(), self.xgrid.center());
        let nqx = nx - c;
        let mut off = 0;
        for (k, level) in self.levels.iter_mut().enumerate() {
            let n = self.half_rows[k];
            for r in 0..2 * n + 1 {
                let (b, sy) = if r >= n { (r - n, T::one()) } else { (n - r, -T::one()) };
                for ix in 0..nx {
                    let (a, sx) = if ix >= c { (ix - c, T::one()) } else { (c - ix, -T::one()) };
                    let i = off + 2 * (b * nqx + a);
                    level[r * nx + ix] = [sx * quarter[i], sy * quarter[i + 1]];
                }
            }
            off += 2 * nqx * (n + 1);
        }
        assert_eq!(off, quarter.len(), "quarter length");
    }
}

#[inline]
pub(crate) fn row_y<T: Real>(r: usize, n: usize, hy: T) -> T {
    if r >= n {
        T::from_usize_lossy(r - n) * hy
    } else {
        -T::from_usize_lossy(n - r) * hy
    }
}
