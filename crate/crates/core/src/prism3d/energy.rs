use rayon::prelude::*;

use super::field::{CapCondition, Field3D};
use crate::error::{Error, Result};
use crate::optimize::Objective;
use crate::potential::PotentialSpec;
use crate::scalar::{pairwise_sum, Real};
use crate::strip2d::{clamp_point, M2LTable, QuarterStrip, RenormLevel};

/// Renormalized energy and gradient of a prism field stored level by level
/// on the quarter `x >= 0, y >= 0`.
///
/// Level `k` contributes `wz_k (phi_{2,L_k}(u_k) - m_{2,L_k})` with the
/// trapezoid weight `wz_k` in z, and consecutive levels are coupled by
/// `|u_{k+1} - u_k|^2 / (2 hz)` on the nodes they share, weighted by the mean
/// of their slice quadrature weights. Single-row levels carry no slice energy
/// and zero slice weight.
#[derive(Clone, Debug)]
pub(crate) struct PrismKernel<T> {
    pub nqx: usize,
    pub hz: T,
    pub half_rows: Vec<usize>,
    pub offsets: Vec<usize>,
    pub strips: Vec<QuarterStrip<T>>,
    pub renorm: Vec<T>,
    pub wz: Vec<T>,
    pub fixed_cap: bool,
}

impl<T: Real> PrismKernel<T> {
    pub fn new(m1: &RenormLevel<T>, table: &M2LTable<T>, u: &Field3D<T>) -> Result<Self> {
        m1.check(&u.xgrid)?;
        let nqx = u.nx() - u.xgrid.center();
        let nz = u.nz();
        let mut offsets = Vec::with_capacity(nz + 1);
        let mut off = 0;
        for &n in &u.half_rows {
            offsets.push(off);
            off += 2 * nqx * (n + 1);
        }
        offsets.push(off);
        let strips = u
            .half_rows
            .iter()
            .map(|&n| QuarterStrip { nqx, nqy: n + 1, hx: u.xgrid.h(), hy: u.hy, m1: m1.value, fixed_top: false })
            .collect();
        let renorm = (0..nz)
            .map(|k| if u.is_apex(k) { Ok(T::zero()) } else { table.value_at(u.half_width(k)) })
            .collect::<Result<Vec<T>>>()?;
        let wz = (0..nz).map(|k| if k == 0 || k + 1 == nz { T::half() * u.hz } else { u.hz }).collect();
        Ok(Self {
            nqx,
            hz: u.hz,
            half_rows: u.half_rows.clone(),
            offsets,
            strips,
            renorm,
            wz,
            fixed_cap: u.cap == CapCondition::Dirichlet,
        })
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().expect("offsets")
    }

    fn nz(&self) -> usize {
        self.half_rows.len()
    }

    /// Slice quadrature weight (with mirror multiplicity) of quarter row `b`
    /// at level `k`.
    #[inline]
    fn cy(&self, k: usize, b: usize) -> T {
        if self.half_rows[k] == 0 {
            T::zero()
        } else {
            self.strips[k].cy(b)
        }
    }

    /// Whether global quarter entry `i` is an unknown.
    pub fn is_free(&self, i: usize) -> bool {
        let k = self.offsets.partition_point(|&o| o <= i) - 1;
        if self.half_rows[k] == 0 || (self.fixed_cap && k + 1 == self.nz()) {
            return false;
        }
        self.strips[k].is_free(i - self.offsets[k])
    }

    /// Energy of the level pair `(k, k+1)` coupling and its gradient with
    /// respect to level `k` (`lower = true`) or `k + 1`.
    fn z_edge(&self, v: &[T], k: usize, grad: Option<(&mut [T], bool)>) -> T {
        let nqx = self.nqx;
        let (lo, hi) = (&v[self.offsets[k]..], &v[self.offsets[k + 1]..]);
        let inv = T::one() / self.hz;
        let mut e = T::zero();
        let mut grad = grad;
        for b in 0..=self.half_rows[k] {
            let wy = T::half() * (self.cy(k, b) + self.cy(k + 1, b));
            for a in 0..nqx {
                let w = wy * self.strips[k].cx(a);
                let i = 2 * (b * nqx + a);
                let d0 = hi[i] - lo[i];
                let d1 = hi[i + 1] - lo[i + 1];
                e = e + T::half() * inv * w * (d0 * d0 + d1 * d1);
                if let Some((g, lower)) = grad.as_mut() {
                    let s = if *lower { -inv * w } else { inv * w };
                    g[i] = g[i] + s * d0;
                    g[i + 1] = g[i + 1] + s * d1;
                }
            }
        }
        e
    }

    /// Returns the energy and writes the gradient (zero on pinned entries).
    pub fn energy_gradient(&self, p: &PotentialSpec<T>, v: &[T], grad: &mut [T]) -> T {
        let nz = self.nz();
        let mut chunks: Vec<&mut [T]> = Vec::with_capacity(nz);
        let mut rest = grad;
        for k in 0..nz {
            let (head, tail) = rest.split_at_mut(self.offsets[k + 1] - self.offsets[k]);
            chunks.push(head);
            rest = tail;
        }
        let parts: Vec<T> = chunks
            .into_par_iter()
            .enumerate()
            .map(|(k, g)| {
                let own = &v[self.offsets[k]..self.offsets[k + 1]];
                let mut e = T::zero();
                if self.half_rows[k] == 0 {
                    g.iter_mut().for_each(|x| *x = T::zero());
                } else {
                    let s = self.strips[k].energy_gradient(p, own, g);
                    e = self.wz[k] * (s - self.renorm[k]);
                    g.iter_mut().for_each(|x| *x = *x * self.wz[k]);
                }
                if k > 0 {
                    self.z_edge(v, k - 1, Some((g, false)));
                }
                if k + 1 < nz {
                    e = e + self.z_edge(v, k, Some((g, true)));
                }
                if self.half_rows[k] == 0 || (self.fixed_cap && k + 1 == nz) {
                    g.iter_mut().for_each(|x| *x = T::zero());
                } else {
                    for (i, x) in g.iter_mut().enumerate() {
                        if !self.strips[k].is_free(i) {
                            *x = T::zero();
                        }
                    }
                }
                e
            })
            .collect();
        pairwise_sum(&parts)
    }

    /// Per-level pieces: `(phi_{2,L_k}(u_k), kinetic part of the slice)`.
    pub fn slice_parts(&self, p: &PotentialSpec<T>, v: &[T], k: usize) -> (T, T) {
        if self.half_rows[k] == 0 {
            return (T::zero(), T::zero());
        }
        let own = &v[self.offsets[k]..self.offsets[k + 1]];
        let strip = &self.strips[k];
        let mut scratch = vec![T::zero(); own.len()];
        let total = strip.energy_gradient(p, own, &mut scratch);
        let potential = strip.renormalized_potential(p, own);
        (total, total - potential)
    }

    /// Kinetic energy of the coupling between levels `k` and `k + 1`.
    pub fn z_kinetic(&self, v: &[T], k: usize) -> T {
        self.z_edge(v, k, None)
    }

    /// Sup norm of the discrete `-Lap u + grad W(u)` over the free entries.
    pub fn residual_sup(&self, p: &PotentialSpec<T>, v: &[T]) -> T {
        let mut g = vec![T::zero(); v.len()];
        self.energy_gradient(p, v, &mut g);
        let mut worst = T::zero();
        for k in 0..self.nz() {
            let w_lo = if k > 0 { T::half() } else { T::zero() };
            let w_hi = if k + 1 < self.nz() { T::half() } else { T::zero() };
            for i in self.offsets[k]..self.offsets[k + 1] {
                if !self.is_free(i) {
                    continue;
                }
                let node = (i - self.offsets[k]) / 2;
                let (a, b) = (node % self.nqx, node / self.nqx);
                // Volume weight of the node: slice weight times the z extent
                // it stands for.
                let w = self.strips[k].cx(a) * self.cy(k, b) * (w_lo + w_hi) * self.hz;
                if w > T::zero() {
                    worst = worst.max(g[i].abs() / w);
                }
            }
        }
        worst
    }
}

/// The renormalized energy `phi3` of a prism field.
pub fn phi3<T: Real>(p: &PotentialSpec<T>, m1: &RenormLevel<T>, table: &M2LTable<T>, u: &Field3D<T>) -> Result<T> {
    let kernel = PrismKernel::new(m1, table, u)?;
    let v = u.to_quarter();
    let mut g = vec![T::zero(); v.len()];
    Ok(kernel.energy_gradient(p, &v, &mut g))
}

/// The prism energy as a function of the free quarter entries.
pub struct PrismObjective<'a, T> {
    pub(crate) potential: &'a PotentialSpec<T>,
    pub(crate) kernel: PrismKernel<T>,
    free: Vec<usize>,
    base: Vec<T>,
}

impl<'a, T: Real> PrismObjective<'a, T> {
    /// Pinned entries (symmetry lines, clamped columns, apex levels and a
    /// Dirichlet cap) are taken from `template`.
    pub fn new(
        p: &'a PotentialSpec<T>,
        m1: &RenormLevel<T>,
        table: &M2LTable<T>,
        template: &Field3D<T>,
    ) -> Result<Self> {
        if template.half_rows.iter().all(|&n| n == 0) {
            return Err(Error::Grid("the prism has no level wide enough to resolve a strip".into()));
        }
        let kernel = PrismKernel::new(m1, table, template)?;
        let mut pinned = template.clone();
        pinned.zero_symmetry_lines();
        let base = pinned.to_quarter();
        let free = (0..kernel.len()).filter(|&i| kernel.is_free(i)).collect();
        Ok(Self { potential: p, kernel, free, base })
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn pack(&self, u: &Field3D<T>) -> Vec<T> {
        let q = u.to_quarter();
        self.free.iter().map(|&i| q[i]).collect()
    }

    pub fn unpack_quarter(&self, x: &[T]) -> Vec<T> {
        let mut q = self.base.clone();
        for (&i, v) in self.free.iter().zip(x) {
            q[i] = *v;
        }
        q
    }

    pub fn unpack(&self, x: &[T], like: &Field3D<T>) -> Field3D<T> {
        let mut u = like.clone();
        u.set_from_quarter(&self.unpack_quarter(x));
        u
    }

    /// Radial truncation of every free node; returns whether anything changed.
    pub fn truncate(&self, x: &mut [T], radius: T) -> bool {
        let q = self.unpack_quarter(x);
        let mut changed = false;
        // Free entries come in (v1, v2) pairs except on the symmetry lines,
        // where the partner is pinned to zero; clamp whole nodes.
        let mut pos = 0;
        while pos < self.free.len() {
            let i = self.free[pos];
            let node = i / 2;
            let mut pt = [q[2 * node], q[2 * node + 1]];
            let paired = pos + 1 < self.free.len() && self.free[pos + 1] == 2 * node + 1 && i == 2 * node;
            if clamp_point(&mut pt, radius) {
                changed = true;
                if paired {
                    x[pos] = pt[0];
                    x[pos + 1] = pt[1];
                } else {
                    x[pos] = pt[i % 2];
                }
            }
            pos += if paired { 2 } else { 1 };
        }
        changed
    }

    pub fn residual_sup(&self, x: &[T]) -> T {
        self.kernel.residual_sup(self.potential, &self.unpack_quarter(x))
    }
}

impl<T: Real> Objective<T> for PrismObjective<'_, T> {
    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        let q = self.unpack_quarter(x);
        let mut g = vec![T::zero(); q.len()];
        let e = self.kernel.energy_gradient(self.potential, &q, &mut g);
        for (&i, out) in self.free.iter().zip(grad.iter_mut()) {
            *out = g[i];
        }
        e
    }
}

/// Gradient of [`phi3`] with respect to the free entries (in the order of
/// [`PrismObjective::pack`]).
pub fn grad_phi3<T: Real>(
    p: &PotentialSpec<T>,
    m1: &RenormLevel<T>,
    table: &M2LTable<T>,
    u: &Field3D<T>,
) -> Result<Vec<T>> {
    let obj = PrismObjective::new(p, m1, table, u)?;
    let x = obj.pack(u);
    let mut g = vec![T::zero(); x.len()];
    obj.value_and_gradient(&x, &mut g);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{trapezoid_weight, SymGrid};
    use crate::optimize::check_gradient;
    use crate::prism3d::PrismGrid;
    use crate::strip2d::{phi2l, GapFit};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coarse() -> (PotentialSpec<f64>, PrismGrid<f64>, RenormLevel<f64>, M2LTable<f64>) {
        let p = PotentialSpec::abg(2.0, 0.3);
        let g = PrismGrid { x_extent: 1.2, hx: 0.2, hy: 0.2, hz: 0.2 };
        let m1 = RenormLevel::new(3.3, SymGrid::with_spacing(1.2, 0.2).unwrap());
        let ls: Vec<f64> = (1..=6).map(|n| 0.2 * n as f64).collect();
        let values: Vec<f64> = ls.iter().map(|l| 2.5 - 2.0 * (-1.5 * l).exp()).collect();
        let table = M2LTable {
            ls,
            values,
            fit: GapFit { m2: 2.5, rate: 1.5, prefactor: 2.0, r2: 1.0, points: 3 },
            scalar_excess: 4.0,
            solutions: Vec::new(),
        };
        (p, g, m1, table)
    }

    fn random_field(p: &PotentialSpec<f64>, g: &PrismGrid<f64>, j: usize, seed: u64) -> Field3D<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Field3D::from_fn(j, 1.2, g, CapCondition::Neumann, |x, _, _| [x.tanh(), 0.0]).unwrap();
        let mut q = u.to_quarter();
        q.iter_mut().for_each(|v| *v += rng.gen_range(-0.4..0.4));
        u.set_from_quarter(&q);
        u.zero_symmetry_lines();
        let nx = u.nx();
        for level in u.levels.iter_mut() {
            for row in level.chunks_mut(nx) {
                row[0] = p.a_minus();
                row[nx - 1] = p.a_plus();
            }
        }
        u
    }

    /// The same energy assembled on the full grid from independent pieces.
    fn full_grid_phi3(p: &PotentialSpec<f64>, m1: &RenormLevel<f64>, table: &M2LTable<f64>, u: &Field3D<f64>) -> f64 {
        let nz = u.nz();
        let nx = u.nx();
        let mut e = 0.0;
        for k in 0..nz {
            let wz = trapezoid_weight(k, nz, u.hz);
            if let Some(s) = u.slice(k) {
                e += wz * (phi2l(p, m1, &s).unwrap() - table.value_at(u.half_width(k)).unwrap());
            }
            if k + 1 < nz {
                let n = u.half_rows[k] as isize;
                let (n0, n1) = (2 * u.half_rows[k] + 1, 2 * u.half_rows[k + 1] + 1);
                for iy in -n..=n {
                    let wy = 0.5
                        * (trapezoid_weight((iy + n) as usize, n0, u.hy)
                            + trapezoid_weight((iy + u.half_rows[k + 1] as isize) as usize, n1, u.hy));
                    for ix in 0..nx {
                        let (a, b) = (u.at(k, ix, iy), u.at(k + 1, ix, iy));
                        let d = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
                        e += 0.5 * wy * u.xgrid.weight(ix) * d / u.hz;
                    }
                }
            }
        }
        e
    }

    #[test]
    fn quarter_energy_equals_full_grid_formula() {
        let (p, g, m1, table) = coarse();
        for j in [2, 3] {
            let u = random_field(&p, &g, j, 7 + j as u64);
            let a = phi3(&p, &m1, &table, &u).unwrap();
            let b = full_grid_phi3(&p, &m1, &table, &u);
            assert!((a - b).abs() < 1e-11 * b.abs().max(1.0), "j = {j}: {a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (p, g, m1, table) = coarse();
        for seed in 0..3 {
            let u = random_field(&p, &g, 2, seed);
            let obj = PrismObjective::new(&p, &m1, &table, &u).unwrap();
            let x = obj.pack(&u);
            let err = check_gradient(&obj, &x, 1e-5);
            assert!(err < 1e-6, "seed {seed}: {err}");
        }
    }

    #[test]
    fn dirichlet_cap_and_apex_are_pinned() {
        let (p, g, m1, table) = coarse();
        let mut u = random_field(&p, &g, 2, 1);
        u.cap = CapCondition::Dirichlet;
        let obj = PrismObjective::new(&p, &m1, &table, &u).unwrap();
        let x = obj.pack(&u);
        let mut grad = vec![0.0; x.len()];
        obj.value_and_gradient(&x, &mut grad);
        let q = obj.kernel.offsets.clone();
        let nz = u.nz();
        assert!(obj.free.iter().all(|&i| i >= q[1] && i < q[nz - 1]));
    }
}
