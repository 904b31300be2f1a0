//! Uniform grids symmetric about the origin and trapezoid weights.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid on `[-extent, extent]` with an odd number of nodes, so that
/// the origin is a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymGrid<T> {
    pub extent: T,
    pub n: usize,
}

impl<T: Real> SymGrid<T> {
    pub fn new(extent: T, n: usize) -> Result<Self> {
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::Grid(format!("extent must be positive, got {extent}")));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Grid(format!("node count must be odd and >= 3, got {n}")));
        }
        Ok(Self { extent, n })
    }

    /// Grid with spacing `h`; `extent / h` must be (numerically) an integer.
    pub fn with_spacing(extent: T, h: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::Grid(format!("spacing must be positive, got {h}")));
        }
        let half = (extent / h).round();
        if ((extent / h) - half).abs() > T::lit(1e-6) * half.max(T::one()) {
            return Err(Error::Grid(format!("extent {extent} is not a multiple of spacing {h}")));
        }
        let half = half.to_usize().ok_or_else(|| Error::Grid("grid too large".into()))?;
        Self::new(extent, 2 * half + 1)
    }

    #[inline]
    pub fn h(&self) -> T {
        T::two() * self.extent / T::from_usize_lossy(self.n - 1)
    }

    /// Index of the node at the origin.
    #[inline]
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Abscissa of node `i`; exactly antisymmetric, `x(mirror(i)) = -x(i)`.
    #[inline]
    pub fn x(&self, i: usize) -> T {
        let c = self.center();
        if i >= c {
            T::from_usize_lossy(i - c) * self.h()
        } else {
            -T::from_usize_lossy(c - i) * self.h()
        }
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        trapezoid_weight(i, self.n, self.h())
    }

    /// Index of the node mirrored through the origin.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && (self.extent - other.extent).abs() <= T::lit(1e-12) * self.extent
    }
}

/// Trapezoid weight of node `i` of `n` uniformly spaced nodes with spacing `h`.
#[inline]
pub fn trapezoid_weight<T: Real>(i: usize, n: usize, h: T) -> T {
    if n == 1 {
        T::zero()
    } else if i == 0 || i + 1 == n {
        T::half() * h
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_center() {
        let g = SymGrid::<f64>::with_spacing(10.0, 0.05).unwrap();
        assert_eq!(g.n, 401);
        assert_eq!(g.center(), 200);
        assert!((g.h() - 0.05).abs() < 1e-15);
        assert_eq!(g.x(g.center()), 0.0);
        assert!((g.x(g.n - 1) - 10.0).abs() < 1e-12);
        let total: f64 = (0..g.n).map(|i| g.weight(i)).sum();
        assert!((total - 20.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SymGrid::<f64>::new(1.0, 4).is_err());
        assert!(SymGrid::<f64>::new(-1.0, 5).is_err());
        assert!(SymGrid::<f64>::with_spacing(1.0, 0.3).is_err());
    }
}
