use super::profile::Profile1D;
use crate::grid::SymGrid;
use crate::optimize::{Objective, SymBandMatrix};
use crate::potential::PotentialSpec;
use crate::scalar::{pairwise_sum, Real};

/// Kinetic and potential parts of the discrete action: edge differences
/// (midpoint rule) for `1/2 |q'|^2`, trapezoid rule for `W(q)`.
pub fn phi1_parts<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> (T, T) {
    let h = q.h();
    let n = q.n();
    let inv = T::half() / h;
    let kin: Vec<T> = (0..n - 1)
        .map(|e| {
            let a = q.values[e];
            let b = q.values[e + 1];
            let d0 = b[0] - a[0];
            let d1 = b[1] - a[1];
            inv * (d0 * d0 + d1 * d1)
        })
        .collect();
    let pot: Vec<T> = (0..n).map(|i| q.grid.weight(i) * p.w(q.values[i])).collect();
    (pairwise_sum(&kin), pairwise_sum(&pot))
}

/// Discrete action `sum 1/2 |q'|^2 + W(q)` of any profile (no symmetry or
/// boundary values are assumed).
pub fn phi1<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> T {
    let (k, v) = phi1_parts(p, q);
    k + v
}

/// The action restricted to symmetric clamped profiles, as a function of the
/// half-line unknowns of [`Profile1D::to_reduced`].
pub struct HalfLineEnergy<'a, T> {
    pub potential: &'a PotentialSpec<T>,
    pub grid: SymGrid<T>,
}

impl<'a, T: Real> HalfLineEnergy<'a, T> {
    pub fn new(potential: &'a PotentialSpec<T>, grid: SymGrid<T>) -> Self {
        Self { potential, grid }
    }

    pub fn dim(&self) -> usize {
        2 * self.grid.center() - 1
    }

    #[inline]
    fn node(&self, x: &[T], i: usize) -> [T; 2] {
        let c = self.grid.center();
        if i == c {
            [T::zero(), x[0]]
        } else if i + 1 == self.grid.n {
            self.potential.a_plus()
        } else {
            let k = 1 + 2 * (i - c - 1);
            [x[k], x[k + 1]]
        }
    }
}

impl<T: Real> Objective<T> for HalfLineEnergy<'_, T> {
    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        let p = self.potential;
        let h = self.grid.h();
        let n = self.grid.n;
        let c = self.grid.center();
        let two = T::two();
        let inv_h = T::one() / h;
        grad.iter_mut().for_each(|g| *g = T::zero());

        let mut terms = Vec::with_capacity(2 * (n - c));
        // Each half-line edge stands for itself and its mirror image.
        for e in c..(n - 1) {
            let a = self.node(x, e);
            let b = self.node(x, e + 1);
            let d = [b[0] - a[0], b[1] - a[1]];
            terms.push(inv_h * (d[0] * d[0] + d[1] * d[1]));
            let ga = [-two * inv_h * d[0], -two * inv_h * d[1]];
            if e == c {
                grad[0] = grad[0] + ga[1];
            } else {
                let k = 1 + 2 * (e - c - 1);
                grad[k] = grad[k] + ga[0];
                grad[k + 1] = grad[k + 1] + ga[1];
            }
            if e + 1 < n - 1 {
                let k = 1 + 2 * (e - c);
                grad[k] = grad[k] - ga[0];
                grad[k + 1] = grad[k + 1] - ga[1];
            }
        }
        // Potential: the origin once, every other node twice.
        let q0 = self.node(x, c);
        terms.push(h * p.w(q0));
        grad[0] = grad[0] + h * p.grad(q0)[1];
        for i in (c + 1)..n {
            let qi = self.node(x, i);
            let w = two * self.grid.weight(i);
            terms.push(w * p.w(qi));
            if i + 1 < n {
                let g = p.grad(qi);
                let k = 1 + 2 * (i - c - 1);
                grad[k] = grad[k] + w * g[0];
                grad[k + 1] = grad[k + 1] + w * g[1];
            }
        }
        pairwise_sum(&terms)
    }
}

/// Gradient of the discrete action with respect to the half-line unknowns.
pub fn grad_phi1<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> Vec<T> {
    let e = HalfLineEnergy::new(p, q.grid);
    let x = q.to_reduced();
    let mut g = vec![T::zero(); x.len()];
    e.value_and_gradient(&x, &mut g);
    g
}

/// Hessian of the half-line action at `q`: the discrete second variation
/// `h -> -h'' + Hess W(q) h` on the symmetric subspace with Dirichlet ends,
/// in the stiffness form matching [`reduced_metric`].
pub fn reduced_hessian<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> SymBandMatrix<T> {
    let grid = q.grid;
    let h = grid.h();
    let n = grid.n;
    let c = grid.center();
    let dim = 2 * c - 1;
    let two = T::two();
    let inv_h = T::one() / h;
    let mut m = SymBandMatrix::zeros(dim, 2);
    // Origin: one doubled edge to the right plus the undoubled node weight.
    let h0 = p.hess(q.values[c]);
    m.add(0, 0, two * inv_h + h * h0[1][1]);
    for i in (c + 1)..(n - 1) {
        let k = 1 + 2 * (i - c - 1);
        let hw = p.hess(q.values[i]);
        let w = two * grid.weight(i);
        m.add(k, k, T::lit(4.0) * inv_h + w * hw[0][0]);
        m.add(k + 1, k + 1, T::lit(4.0) * inv_h + w * hw[1][1]);
        m.add(k + 1, k, w * hw[0][1]);
        if i == c + 1 {
            m.add(k + 1, 0, -two * inv_h);
        } else {
            let km = k - 2;
            m.add(k, km, -two * inv_h);
            m.add(k + 1, km + 1, -two * inv_h);
        }
    }
    m
}

/// `L^2` mass of the half-line unknowns: each interior node counts twice.
pub fn reduced_metric<T: Real>(grid: SymGrid<T>) -> Vec<T> {
    let c = grid.center();
    let mut m = Vec::with_capacity(2 * c - 1);
    m.push(grid.h());
    for i in (c + 1)..(grid.n - 1) {
        let w = T::two() * grid.weight(i);
        m.push(w);
        m.push(w);
    }
    m
}
