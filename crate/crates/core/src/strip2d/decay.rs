use super::field::Field2D;
use crate::error::{Error, Result};
use crate::fit::exp_decay_fit;
use crate::one_dim::Profile1D;
use crate::scalar::Real;

/// Convergence of the slices `v(., y)` to `q` as `y` grows.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceDecay<T> {
    /// Fitted exponent of `||v(., y) - q||_{L^2}`.
    pub rate: T,
    pub prefactor: T,
    pub r2: T,
    pub onset: T,
    pub points: usize,
    /// `(y, ||v(., y) - q||_{L^2})` for `y >= 0`.
    pub l2: Vec<(T, T)>,
    /// `(y, sup_x |v(x, y) - q(x)|)` for `y >= 0`.
    pub sup: Vec<(T, T)>,
    /// Distance at `y = 0` over distance at the last free row.
    pub end_ratio: T,
}

/// Fits the slice distances on the saturated window: at most a tenth of the
/// mid-line distance, above `1e-10`, and in the lower three quarters of
/// `[0, Y]` so the Dirichlet row does not bend the fit.
pub fn check_2d_decay<T: Real>(v: &Field2D<T>, q: &Profile1D<T>) -> Result<SliceDecay<T>> {
    let l2 = v.slice_distances(q);
    let sup = v.slice_sup_distances(q);
    let d0 = l2[0].1;
    let ymax = v.half_width() * T::lit(0.75);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(y, d) in &l2 {
        if y > ymax || d < T::lit(1e-10) {
            break;
        }
        if d <= d0 * T::lit(0.1) {
            xs.push(y);
            ys.push(d);
        }
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!("slice decay window has {} points", xs.len())));
    }
    let f = exp_decay_fit(&xs, &ys)?;
    let last = l2[l2.len() - 2].1;
    Ok(SliceDecay {
        rate: f.rate,
        prefactor: f.prefactor,
        r2: f.r2,
        onset: xs[0],
        points: f.n,
        end_ratio: if last > T::zero() { d0 / last } else { T::infinity() },
        l2,
        sup,
    })
}
