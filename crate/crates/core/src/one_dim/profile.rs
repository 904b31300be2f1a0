use crate::grid::SymGrid;
use crate::potential::{Point, PotentialSpec};
use crate::scalar::Real;

/// A discretized curve `q : [-X, X] -> R^2` on a uniform symmetric grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile1D<T> {
    pub grid: SymGrid<T>,
    pub values: Vec<Point<T>>,
}

impl<T: Real> Profile1D<T> {
    pub fn from_fn(grid: SymGrid<T>, mut f: impl FnMut(T) -> Point<T>) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: SymGrid<T>, value: Point<T>) -> Self {
        Self { grid, values: vec![value; grid.n] }
    }

    /// Reference scalar profile `(p(x), 0)` with `p(x) = x (3 - x^2) / 2`
    /// on `|x| < 1` and `p = +-1` beyond; equal to the wells for `|x| >= 1`
    /// when they sit at `(+-1, 0)`.
    pub fn reference(grid: SymGrid<T>) -> Self {
        Self::from_fn(grid, |x| {
            let p = if x >= T::one() {
                T::one()
            } else if x <= -T::one() {
                -T::one()
            } else {
                x * (T::lit(3.0) - x * x) * T::half()
            };
            [p, T::zero()]
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn h(&self) -> T {
        self.grid.h()
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.grid.x(i)
    }

    /// Value at the origin.
    pub fn at_zero(&self) -> Point<T> {
        self.values[self.grid.center()]
    }

    /// Sets the end nodes to the wells.
    pub fn clamp_to_wells(&mut self, p: &PotentialSpec<T>) {
        let n = self.n();
        self.values[0] = p.a_minus();
        self.values[n - 1] = p.a_plus();
    }

    /// `(q1, -q2)`.
    pub fn bar(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| [v[0], -v[1]]).collect() }
    }

    /// Trapezoid `L^2` norm of `self - other`.
    pub fn l2_distance(&self, other: &Self) -> T {
        assert_eq!(self.n(), other.n(), "profiles on different grids");
        let mut acc = T::zero();
        for i in 0..self.n() {
            let a = self.values[i];
            let b = other.values[i];
            let d0 = a[0] - b[0];
            let d1 = a[1] - b[1];
            acc = acc + self.grid.weight(i) * (d0 * d0 + d1 * d1);
        }
        acc.sqrt()
    }

    pub fn l2_norm(&self) -> T {
        let mut acc = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            acc = acc + self.grid.weight(i) * (v[0] * v[0] + v[1] * v[1]);
        }
        acc.sqrt()
    }

    /// Largest pointwise distance to `other`.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(T::zero(), T::max)
    }

    /// Largest violation of `q1(-x) = -q1(x)`, `q2(-x) = q2(x)`.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n() {
            let j = self.grid.mirror(i);
            let a = self.values[i];
            let b = self.values[j];
            worst = worst.max((a[0] + b[0]).abs()).max((a[1] - b[1]).abs());
        }
        worst
    }

    /// Whether `q1(x) x > 0` at every node with `x != 0`.
    pub fn sign_condition(&self) -> bool {
        let c = self.grid.center();
        self.values.iter().enumerate().all(|(i, v)| {
            if i == c {
                true
            } else {
                v[0] * self.x(i) > T::zero()
            }
        })
    }

    /// Whether `|q2| <= tol` everywhere.
    pub fn is_scalar(&self, tol: T) -> bool {
        self.values.iter().all(|v| v[1].abs() <= tol)
    }

    /// Half-line unknowns: `q2(0)` followed by `(q1, q2)` at the interior
    /// nodes `0 < x < X`.
    pub fn to_reduced(&self) -> Vec<T> {
        let c = self.grid.center();
        let n = self.n();
        let mut out = Vec::with_capacity(2 * c - 1);
        out.push(self.values[c][1]);
        for v in &self.values[c + 1..n - 1] {
            out.push(v[0]);
            out.push(v[1]);
        }
        out
    }

    /// Rebuilds the symmetric, clamped profile from half-line unknowns.
    pub fn from_reduced(grid: SymGrid<T>, x: &[T], p: &PotentialSpec<T>) -> Self {
        let n = grid.n;
        let c = grid.center();
        assert_eq!(x.len(), 2 * c - 1, "reduced vector length");
        let mut values = vec![[T::zero(); 2]; n];
        values[c] = [T::zero(), x[0]];
        for i in (c + 1)..(n - 1) {
            let k = 1 + 2 * (i - c - 1);
            values[i] = [x[k], x[k + 1]];
        }
        values[n - 1] = p.a_plus();
        for i in 0..c {
            let m = grid.mirror(i);
            values[i] = [-values[m][0], values[m][1]];
        }
        values[0] = p.a_minus();
        Self { grid, values }
    }

    /// Linear interpolation of the profile at an arbitrary abscissa; values
    /// beyond the grid are those of the end nodes.
    pub fn sample(&self, x: T) -> Point<T> {
        let h = self.h();
        let s = (x + self.grid.extent) / h;
        if s <= T::zero() {
            return self.values[0];
        }
        let last = self.n() - 1;
        if s >= T::from_usize_lossy(last) {
            return self.values[last];
        }
        let i = s.floor().to_usize().unwrap_or(0).min(last - 1);
        let t = s - T::from_usize_lossy(i);
        let a = self.values[i];
        let b = self.values[i + 1];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// Resamples onto another grid by linear interpolation.
    pub fn resample(&self, grid: SymGrid<T>) -> Self {
        Self::from_fn(grid, |x| self.sample(x))
    }
}

/// Projection onto the symmetry class: odd part of `q1`, even part of `q2`.
pub fn symmetrize1d<T: Real>(q: &Profile1D<T>) -> Profile1D<T> {
    let mut out = q.clone();
    for i in 0..q.n() {
        let j = q.grid.mirror(i);
        let a = q.values[i];
        let b = q.values[j];
        out.values[i] = [T::half() * (a[0] - b[0]), T::half() * (a[1] + b[1])];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> SymGrid<f64> {
        SymGrid::new(4.0, 81).unwrap()
    }

    #[test]
    fn reference_profile_hits_wells_beyond_unit_distance() {
        let q = Profile1D::reference(grid());
        assert_eq!(q.sample(2.0), [1.0, 0.0]);
        assert_eq!(q.sample(-1.5), [-1.0, 0.0]);
        assert_eq!(q.at_zero(), [0.0, 0.0]);
        assert!(q.sign_condition());
        assert_eq!(q.symmetry_defect(), 0.0);
    }

    #[test]
    fn symmetric_input_unchanged() {
        let q = Profile1D::from_fn(grid(), |x| [x.tanh(), 0.3 / x.cosh()]);
        let s = symmetrize1d(&q);
        for (a, b) in q.values.iter().zip(&s.values) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn even_first_component_projects_to_zero() {
        let q = Profile1D::from_fn(grid(), |x| [x * x, x]);
        let s = symmetrize1d(&q);
        assert!(s.values.iter().all(|v| v[0].abs() < 1e-14 && v[1].abs() < 1e-14));
    }

    #[test]
    fn reduced_round_trip() {
        let p = PotentialSpec::abg(2.0, 0.3);
        let mut q = Profile1D::from_fn(grid(), |x| [x.tanh(), 0.5 / x.cosh()]);
        q.clamp_to_wells(&p);
        let r = q.to_reduced();
        let back = Profile1D::from_reduced(q.grid, &r, &p);
        assert!(back.l2_distance(&q) < 1e-14);
    }

    proptest! {
        #[test]
        fn symmetrize_is_idempotent(vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 21)) {
            let g = SymGrid::new(1.0, 21).unwrap();
            let q = Profile1D { grid: g, values: vals.into_iter().map(|(a, b)| [a, b]).collect() };
            let once = symmetrize1d(&q);
            let twice = symmetrize1d(&once);
            prop_assert!(once.l2_distance(&twice) < 1e-14);
            prop_assert!(once.symmetry_defect() < 1e-14);
        }
    }
}
