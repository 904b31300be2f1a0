use super::energy::{reduced_hessian, reduced_metric};
use super::heteroclinic::MinimizerSet;
use super::profile::Profile1D;
use crate::error::{Error, Result};
use crate::optimize::{smallest_eigenvalue_with, EigenOptions};
use crate::potential::{sym_eigenvalues, PotentialSpec};
use crate::scalar::Real;

/// Smallest eigenpair of the second variation at one profile.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEntry<T> {
    pub omega_star: T,
    /// Eigenvector on the full grid: first component odd, second even, zero
    /// at both ends, unit `L^2` norm.
    pub eigenvector: Profile1D<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Smallest generalized eigenvalue of `h -> -h'' + Hess W(q) h` on the
/// symmetric subspace with Dirichlet ends, relative to the `L^2` product.
///
/// The eigensolver is preconditioned with the exact inverse of the shifted
/// banded operator `H + s M`, where `s` makes every node block positive.
pub fn second_variation_min<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> Result<SpectralEntry<T>> {
    let hess = reduced_hessian(p, q);
    let metric = reduced_metric(q.grid);
    let lowest = q
        .values
        .iter()
        .map(|v| sym_eigenvalues(p.hess(*v)).0)
        .fold(T::infinity(), T::min);
    let shift = T::one() + (-lowest).max(T::zero());
    let mut shifted = hess.clone();
    for (i, m) in metric.iter().enumerate() {
        shifted.add(i, i, shift * *m);
    }
    // Fails only if the shift is wrong; the plain metric preconditioner
    // still converges, just slowly.
    let pc = |r: &[T], out: &mut [T]| match shifted.solve_spd(r) {
        Ok(v) => out.copy_from_slice(&v),
        Err(_) => {
            for i in 0..r.len() {
                out[i] = r[i] / metric[i];
            }
        }
    };
    let opts = EigenOptions { tol: T::lit(1e-10), max_iterations: 20_000, ..EigenOptions::default() };
    let pair = smallest_eigenvalue_with(|v, out| hess.matvec(v, out), &metric, Some(&pc), &opts)?;
    Ok(SpectralEntry {
        omega_star: pair.value,
        eigenvector: tangent_from_reduced(q, &pair.vector),
        residual: pair.residual,
        iterations: pair.iterations,
    })
}

fn tangent_from_reduced<T: Real>(q: &Profile1D<T>, x: &[T]) -> Profile1D<T> {
    let grid = q.grid;
    let (n, c) = (grid.n, grid.center());
    let mut values = vec![[T::zero(); 2]; n];
    values[c] = [T::zero(), x[0]];
    for i in (c + 1)..(n - 1) {
        let k = 1 + 2 * (i - c - 1);
        values[i] = [x[k], x[k + 1]];
    }
    for i in 1..c {
        let m = grid.mirror(i);
        values[i] = [-values[m][0], values[m][1]];
    }
    Profile1D { grid, values }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport<T> {
    /// One entry per profile of the minimizer set, in the same order.
    pub entries: Vec<SpectralEntry<T>>,
    /// Least `omega_star` over the least-energy profiles.
    pub omega_star: T,
}

pub fn spectral_report<T: Real>(p: &PotentialSpec<T>, ms: &MinimizerSet<T>) -> Result<SpectralReport<T>> {
    let entries = ms
        .profiles
        .iter()
        .map(|h| second_variation_min(p, &h.profile))
        .collect::<Result<Vec<_>>>()?;
    let least: Vec<&Profile1D<T>> = ms.least_energy().map(|h| &h.profile).collect();
    let omega_star = ms
        .profiles
        .iter()
        .zip(&entries)
        .filter(|(h, _)| least.iter().any(|l| std::ptr::eq(*l, &h.profile)))
        .map(|(_, e)| e.omega_star)
        .fold(T::infinity(), T::min);
    Ok(SpectralReport { entries, omega_star })
}

/// Outcome of checking discreteness `(*)` and non-degeneracy `(**)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    /// Every least-energy profile has `|q2(0)| > tol`.
    pub star: bool,
    /// `min |q2(0)|` over the least-energy profiles.
    pub star_margin: T,
    /// The least `omega_star` exceeds `tol`.
    pub double_star: bool,
    pub omega_star: T,
    pub tol: T,
}

impl<T: Real> Certificate<T> {
    pub fn holds(&self) -> bool {
        self.star && self.double_star
    }
}

pub fn certify_conditions<T: Real>(ms: &MinimizerSet<T>, sr: &SpectralReport<T>, tol: T) -> Result<Certificate<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Argument(format!("certificate tolerance must be positive, got {tol}")));
    }
    if sr.entries.len() != ms.profiles.len() {
        return Err(Error::Argument("spectral report does not match the minimizer set".into()));
    }
    let star_margin = ms.least_energy().map(|h| h.q2_at_zero.abs()).fold(T::infinity(), T::min);
    Ok(Certificate {
        star: star_margin > tol,
        star_margin,
        double_star: sr.omega_star > tol,
        omega_star: sr.omega_star,
        tol,
    })
}
