use crate::error::{Error, Result};
use crate::grid::SymGrid;
use crate::one_dim::Profile1D;
use crate::potential::{Point, PotentialSpec};
use crate::scalar::Real;

/// Condition imposed on the rows `y = +-L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YBoundary {
    /// Natural boundary: `dv/dy = 0` (the strip problem).
    Neumann,
    /// Rows fixed to `q-bar` at `y = -L` and `q` at `y = +L`.
    Dirichlet,
}

/// A field `v : [-X, X] x [-L, L] -> R^2` on a tensor grid, stored row by row
/// (`values[iy * nx + ix]`). The columns `x = +-X` hold the wells.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<T> {
    pub xgrid: SymGrid<T>,
    pub ygrid: SymGrid<T>,
    pub values: Vec<Point<T>>,
    pub boundary: YBoundary,
}

impl<T: Real> Field2D<T> {
    pub fn from_fn(
        xgrid: SymGrid<T>,
        ygrid: SymGrid<T>,
        boundary: YBoundary,
        mut f: impl FnMut(T, T) -> Point<T>,
    ) -> Self {
        let mut values = Vec::with_capacity(xgrid.n * ygrid.n);
        for iy in 0..ygrid.n {
            for ix in 0..xgrid.n {
                values.push(f(xgrid.x(ix), ygrid.x(iy)));
            }
        }
        Self { xgrid, ygrid, values, boundary }
    }

    /// `v(x, y) = q(x)` for every `y`.
    pub fn constant_in_y(q: &Profile1D<T>, ygrid: SymGrid<T>, boundary: YBoundary) -> Self {
        let mut values = Vec::with_capacity(q.n() * ygrid.n);
        for _ in 0..ygrid.n {
            values.extend_from_slice(&q.values);
        }
        Self { xgrid: q.grid, ygrid, values, boundary }
    }

    /// The standard starting field `(q1(x), q2(x) tanh(y / width))`, which
    /// lies in the symmetry class and tends to `q` and `q-bar` at `+-infinity`.
    pub fn layered_guess(q: &Profile1D<T>, ygrid: SymGrid<T>, boundary: YBoundary, width: T) -> Self {
        let mut f = Self::constant_in_y(q, ygrid, boundary);
        let nx = q.n();
        for iy in 0..ygrid.n {
            let t = (ygrid.x(iy) / width).tanh();
            for ix in 0..nx {
                let v = &mut f.values[iy * nx + ix];
                v[1] = v[1] * t;
            }
        }
        if boundary == YBoundary::Dirichlet {
            f.set_dirichlet_rows(q);
        }
        f
    }

    pub fn nx(&self) -> usize {
        self.xgrid.n
    }

    pub fn ny(&self) -> usize {
        self.ygrid.n
    }

    /// Half-width `L` of the strip.
    pub fn half_width(&self) -> T {
        self.ygrid.extent
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Point<T> {
        self.values[iy * self.xgrid.n + ix]
    }

    /// The slice `x -> v(x, y_iy)`.
    pub fn row(&self, iy: usize) -> Profile1D<T> {
        let nx = self.nx();
        Profile1D { grid: self.xgrid, values: self.values[iy * nx..(iy + 1) * nx].to_vec() }
    }

    /// Sets the rows `y = +-L` to `q` and `q-bar`.
    pub fn set_dirichlet_rows(&mut self, q: &Profile1D<T>) {
        let nx = self.nx();
        let top = self.ny() - 1;
        for ix in 0..nx {
            let v = q.values[ix];
            self.values[top * nx + ix] = v;
            self.values[ix] = [v[0], -v[1]];
        }
    }

    /// Largest violation of `v(-x, y) = (-v1, v2)(x, y)` and
    /// `v(x, -y) = (v1, -v2)(x, y)`.
    pub fn symmetry_defect(&self) -> T {
        let (nx, ny) = (self.nx(), self.ny());
        let mut worst = T::zero();
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.at(ix, iy);
                let mx = self.at(nx - 1 - ix, iy);
                let my = self.at(ix, ny - 1 - iy);
                worst = worst
                    .max((v[0] + mx[0]).abs())
                    .max((v[1] - mx[1]).abs())
                    .max((v[0] - my[0]).abs())
                    .max((v[1] + my[1]).abs());
            }
        }
        worst
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt()).fold(T::zero(), T::max)
    }

    /// Values on the quarter `x >= 0, y >= 0`, interleaved components,
    /// row by row.
    pub fn to_quarter(&self) -> Vec<T> {
        let (cx, cy) = (self.xgrid.center(), self.ygrid.center());
        let mut out = Vec::with_capacity(2 * (self.nx() - cx) * (self.ny() - cy));
        for iy in cy..self.ny() {
            for ix in cx..self.nx() {
                let v = self.at(ix, iy);
                out.push(v[0]);
                out.push(v[1]);
            }
        }
        out
    }

    /// Expands quarter values using both reflections.
    pub fn from_quarter(xgrid: SymGrid<T>, ygrid: SymGrid<T>, boundary: YBoundary, quarter: &[T]) -> Self {
        let (cx, cy) = (xgrid.center(), ygrid.center());
        let nqx = xgrid.n - cx;
        assert_eq!(quarter.len(), 2 * nqx * (ygrid.n - cy), "quarter length");
        let mut values = Vec::with_capacity(xgrid.n * ygrid.n);
        for iy in 0..ygrid.n {
            let (b, sy) = if iy >= cy { (iy - cy, T::one()) } else { (cy - iy, -T::one()) };
            for ix in 0..xgrid.n {
                let (a, sx) = if ix >= cx { (ix - cx, T::one()) } else { (cx - ix, -T::one()) };
                let k = 2 * (b * nqx + a);
                values.push([sx * quarter[k], sy * quarter[k + 1]]);
            }
        }
        Self { xgrid, ygrid, values, boundary }
    }

    /// Continues a Neumann field to a wider strip by repeating its last row;
    /// used to warm-start the next entry of the `L` table.
    pub fn extend_to(&self, ygrid: SymGrid<T>) -> Result<Self> {
        let h_old = self.ygrid.h();
        if (ygrid.h() - h_old).abs() > T::lit(1e-12) * h_old {
            return Err(Error::Grid("extension must keep the y spacing".into()));
        }
        let (old_c, new_c) = (self.ygrid.center(), ygrid.center());
        let nx = self.nx();
        let mut values = Vec::with_capacity(nx * ygrid.n);
        for iy in 0..ygrid.n {
            let off = iy as isize - new_c as isize;
            let clamped = off.clamp(-(old_c as isize), old_c as isize);
            let src = (old_c as isize + clamped) as usize;
            values.extend_from_slice(&self.values[src * nx..(src + 1) * nx]);
        }
        Ok(Self { xgrid: self.xgrid, ygrid, values, boundary: self.boundary })
    }

    /// `L^2(x)` distance of each slice `y >= 0` to `q`, as `(y, distance)`.
    pub fn slice_distances(&self, q: &Profile1D<T>) -> Vec<(T, T)> {
        (self.ygrid.center()..self.ny()).map(|iy| (self.ygrid.x(iy), self.row(iy).l2_distance(q))).collect()
    }

    /// Largest pointwise distance of each slice `y >= 0` to `q`.
    pub fn slice_sup_distances(&self, q: &Profile1D<T>) -> Vec<(T, T)> {
        (self.ygrid.center()..self.ny()).map(|iy| (self.ygrid.x(iy), self.row(iy).sup_distance(q))).collect()
    }

    /// Whether the columns `x = +-X` hold the wells.
    pub fn is_clamped(&self, p: &PotentialSpec<T>) -> bool {
        let nx = self.nx();
        (0..self.ny()).all(|iy| self.at(0, iy) == p.a_minus() && self.at(nx - 1, iy) == p.a_plus())
    }
}

/// Radial clamp `v -> R v / |v|` wherever `|v| > R`.
pub fn truncate_r<T: Real>(v: &Field2D<T>, radius: T) -> Result<Field2D<T>> {
    if !(radius > T::one()) {
        return Err(Error::Argument(format!("truncation radius must exceed 1, got {radius}")));
    }
    let mut out = v.clone();
    for p in out.values.iter_mut() {
        clamp_point(p, radius);
    }
    Ok(out)
}

#[inline]
pub(crate) fn clamp_point<T: Real>(p: &mut Point<T>, radius: T) -> bool {
    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
    // A clamped point can land a few ulps above the radius; leaving those
    // alone makes the clamp idempotent.
    if r > radius * (T::one() + T::lit(4.0) * T::epsilon()) {
        let s = radius / r;
        p[0] = p[0] * s;
        p[1] = p[1] * s;
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> (SymGrid<f64>, SymGrid<f64>) {
        (SymGrid::new(2.0, 21).unwrap(), SymGrid::new(1.0, 11).unwrap())
    }

    #[test]
    fn quarter_round_trip_preserves_symmetric_fields() {
        let (xg, yg) = grids();
        let f = Field2D::from_fn(xg, yg, YBoundary::Neumann, |x, y| [x.tanh() * (1.0 + y * y), y * (1.0 - x * x)]);
        assert!(f.symmetry_defect() < 1e-15);
        let back = Field2D::from_quarter(xg, yg, YBoundary::Neumann, &f.to_quarter());
        assert_eq!(back, f);
    }

    #[test]
    fn extension_repeats_boundary_row() {
        let (xg, yg) = grids();
        let f = Field2D::from_fn(xg, yg, YBoundary::Neumann, |x, y| [x, y]);
        let wide = f.extend_to(SymGrid::new(2.0, 21).unwrap()).unwrap();
        assert_eq!(wide.row(20), f.row(10));
        assert_eq!(wide.row(0), f.row(0));
        assert_eq!(wide.row(10), f.row(5));
        assert!(f.extend_to(SymGrid::new(2.0, 11).unwrap()).is_err());
    }

    #[test]
    fn truncation_clamps_and_is_idempotent() {
        let (xg, yg) = grids();
        let mut f = Field2D::from_fn(xg, yg, YBoundary::Neumann, |_, _| [0.5, 0.0]);
        f.values[7] = [4.0, 0.0];
        let t = truncate_r(&f, 2.0).unwrap();
        assert_eq!(t.values[7], [2.0, 0.0]);
        assert_eq!(t.values[3], [0.5, 0.0]);
        assert_eq!(truncate_r(&t, 2.0).unwrap(), t);
        assert!(truncate_r(&f, 0.5).is_err());
    }
}
