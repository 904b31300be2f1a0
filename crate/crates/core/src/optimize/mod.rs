//! Unconstrained minimization, gradient verification and the smallest
//! generalized eigenvalue of a symmetric operator.

mod banded;
mod eigen;
mod lbfgs;

pub use banded::SymBandMatrix;
pub use eigen::{jacobi_eigen, smallest_eigenvalue, smallest_eigenvalue_with, EigenOptions, EigenPair};
pub use lbfgs::{minimize, minimize_with_projection, MinimizeOptions, MinimizeResult};

use crate::scalar::Real;

/// Objective returning its value and writing its gradient into `grad`.
pub trait Objective<T> {
    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T;
}

impl<T, F> Objective<T> for F
where
    F: Fn(&[T], &mut [T]) -> T,
{
    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        self(x, grad)
    }
}

/// Largest relative disagreement between the analytic gradient and central
/// differences with step `h`, measured per component as
/// `|analytic - fd| / (|analytic| + h)`.
pub fn check_gradient<T: Real, O: Objective<T> + ?Sized>(objective: &O, x: &[T], h: T) -> T {
    assert!(h > T::zero(), "finite-difference step must be positive");
    let n = x.len();
    let mut analytic = vec![T::zero(); n];
    objective.value_and_gradient(x, &mut analytic);
    let mut scratch = vec![T::zero(); n];
    let mut xp = x.to_vec();
    let mut worst = T::zero();
    for i in 0..n {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = objective.value_and_gradient(&xp, &mut scratch);
        xp[i] = orig - h;
        let fm = objective.value_and_gradient(&xp, &mut scratch);
        xp[i] = orig;
        let fd = (fp - fm) / (T::two() * h);
        let err = (analytic[i] - fd).abs() / (analytic[i].abs() + h);
        if err > worst {
            worst = err;
        }
    }
    worst
}
