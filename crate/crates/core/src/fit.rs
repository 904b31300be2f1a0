//! Least-squares fits used by the decay diagnostics.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination.
    pub r2: T,
    pub n: usize,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("abscissa and ordinate lengths differ".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Fit(format!("need at least two points, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = *x - mx;
        let dy = *y - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > T::zero() { (sxy * sxy) / (sxx * syy) } else { T::one() };
    Ok(LinearFit { slope, intercept, r2, n })
}

/// Fit of `y ~ prefactor * exp(-rate * x)` by least squares on `ln y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpFit<T> {
    pub rate: T,
    pub prefactor: T,
    pub r2: T,
    pub n: usize,
}

pub fn exp_decay_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<ExpFit<T>> {
    if ys.iter().any(|y| !(*y > T::zero())) {
        return Err(Error::Fit("exponential fit needs positive ordinates".into()));
    }
    let logs: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let lf = linear_fit(xs, &logs)?;
    Ok(ExpFit { rate: -lf.slope, prefactor: lf.intercept.exp(), r2: lf.r2, n: lf.n })
}
