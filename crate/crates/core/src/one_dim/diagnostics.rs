use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::energy::{phi1, phi1_parts};
use super::heteroclinic::MinimizerSet;
use super::profile::{symmetrize1d, Profile1D};
use crate::error::{Error, Result};
use crate::fit::exp_decay_fit;
use crate::potential::{PotentialSpec, WellConstants};
use crate::scalar::Real;

/// `|K - V| / (K + V)` with `K` the kinetic and `V` the potential part of the
/// action. Zero for an exact heteroclinic of the continuous problem.
pub fn equipartition_defect<T: Real>(p: &PotentialSpec<T>, q: &Profile1D<T>) -> T {
    let (k, v) = phi1_parts(p, q);
    (k - v).abs() / (k + v)
}

/// Exponential fit of the tail `|q(x) - a+|` on `x > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit<T> {
    /// First abscissa of the fit window.
    pub onset: T,
    pub rate: T,
    pub prefactor: T,
    pub r2: T,
    pub points: usize,
    /// `sqrt(lambda_min(Hess W(a+)))`, the linearized rate of the slowest mode.
    pub asymptotic_rate: T,
    /// `sqrt(w_lower / 2)`, the rate guaranteed by the well constants.
    pub guaranteed_rate: T,
}

/// Fits `|q(x) - a+| ~ C exp(-rate x)` where `1e-8 <= |q - a+| <= delta_bar`.
///
/// The clamp at `x = X` bends the tail into `sinh(k (X - x))`, so nodes
/// within `2 / sqrt(lambda_min)` of the end are left out.
pub fn check_decay<T: Real>(q: &Profile1D<T>, wc: &WellConstants<T>) -> Result<DecayFit<T>> {
    let n = q.n();
    let target = q.values[n - 1];
    let asymptotic_rate = wc.lambda_min_plus.sqrt();
    let cutoff = q.grid.extent - T::two() / asymptotic_rate;
    let floor = T::lit(1e-8);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in (q.grid.center() + 1)..(n - 1) {
        let x = q.x(i);
        if x > cutoff {
            break;
        }
        let v = q.values[i];
        let d = ((v[0] - target[0]).powi(2) + (v[1] - target[1]).powi(2)).sqrt();
        if d <= wc.delta_bar && d >= floor {
            xs.push(x);
            ys.push(d);
        } else if !xs.is_empty() {
            // The window is the contiguous run after entering the ball.
            if d < floor {
                break;
            }
            xs.clear();
            ys.clear();
        }
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!("decay window has {} points", xs.len())));
    }
    let f = exp_decay_fit(&xs, &ys)?;
    Ok(DecayFit {
        onset: xs[0],
        rate: f.rate,
        prefactor: f.prefactor,
        r2: f.r2,
        points: f.n,
        asymptotic_rate,
        guaranteed_rate: (wc.w_lower * T::half()).sqrt(),
    })
}

/// One evaluation of `phi1(q + h) - m1 >= (omega / 4) dist(q + h, M1)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthProbe<T> {
    pub amplitude: T,
    pub excess: T,
    pub bound: T,
    pub holds: bool,
}

impl<T: Real> GrowthProbe<T> {
    /// `excess / bound`, infinite when the bound vanishes.
    pub fn ratio(&self) -> T {
        if self.bound > T::zero() {
            self.excess / self.bound
        } else {
            T::infinity()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeOutcome<T> {
    Checked(GrowthProbe<T>),
    /// The perturbation is larger than the small-ball window `0.1`.
    Excluded { amplitude: T },
}

/// Perturbs profile `index` of the set by `h` (projected onto the symmetry
/// class, ends held fixed) and evaluates the quadratic growth inequality.
pub fn growth_probe_single<T: Real>(
    p: &PotentialSpec<T>,
    ms: &MinimizerSet<T>,
    index: usize,
    h: &Profile1D<T>,
    omega_star: T,
    tol: T,
) -> ProbeOutcome<T> {
    let mut h = symmetrize1d(h);
    let n = h.n();
    h.values[0] = [T::zero(); 2];
    h.values[n - 1] = [T::zero(); 2];
    h.values[h.grid.center()][0] = T::zero();
    let amplitude = h.l2_norm();
    if amplitude > T::lit(0.1) {
        return ProbeOutcome::Excluded { amplitude };
    }
    let base = &ms.profiles[index].profile;
    let mut qh = base.clone();
    for (v, d) in qh.values.iter_mut().zip(&h.values) {
        v[0] = v[0] + d[0];
        v[1] = v[1] + d[1];
    }
    let excess = phi1(p, &qh) - ms.m1;
    let dist = ms.distance_to_minimal(&qh);
    let bound = omega_star * T::lit(0.25) * dist * dist;
    ProbeOutcome::Checked(GrowthProbe { amplitude, excess, bound, holds: excess >= bound - tol })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport<T> {
    pub probes: Vec<ProbeOutcome<T>>,
    pub violations: usize,
    pub min_ratio: T,
}

/// Random smooth symmetric perturbations with `L^2` norm in `(0, 0.1]` around
/// every least-energy profile.
pub fn quadratic_growth_probe<T: Real>(
    p: &PotentialSpec<T>,
    ms: &MinimizerSet<T>,
    omega_star: T,
    n_probes: usize,
    seed: u64,
    tol: T,
) -> GrowthReport<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::new();
    let least: Vec<usize> = (0..ms.profiles.len())
        .filter(|&i| {
            let e = ms.profiles[i].energy;
            e <= ms.m1 + ms.energy_tol * ms.m1.abs().max(T::one())
        })
        .collect();
    for &idx in &least {
        let grid = ms.profiles[idx].profile.grid;
        let ext = grid.extent;
        for _ in 0..n_probes {
            let modes: Vec<(f64, f64)> = (0..6).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let target = T::lit(rng.gen_range(0.001..0.1));
            let mut h = Profile1D::from_fn(grid, |x| {
                let s = (x / ext).to_f64_lossy();
                let mut a = 0.0;
                let mut b = 0.0;
                for (k, (c1, c2)) in modes.iter().enumerate() {
                    let kk = (k + 1) as f64 * std::f64::consts::PI;
                    a += c1 * (kk * s).sin();
                    b += c2 * ((k as f64 + 0.5) * std::f64::consts::PI * s).cos();
                }
                [T::lit(a), T::lit(b)]
            });
            let norm = h.l2_norm();
            if norm > T::zero() {
                let scale = target / norm;
                h.values.iter_mut().for_each(|v| {
                    v[0] = v[0] * scale;
                    v[1] = v[1] * scale;
                });
            }
            probes.push(growth_probe_single(p, ms, idx, &h, omega_star, tol));
        }
    }
    let mut violations = 0;
    let mut min_ratio = T::infinity();
    for pr in &probes {
        if let ProbeOutcome::Checked(g) = pr {
            if !g.holds {
                violations += 1;
            }
            min_ratio = min_ratio.min(g.ratio());
        }
    }
    GrowthReport { probes, violations, min_ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SymGrid;

    #[test]
    fn tanh_profile_is_nearly_equipartitioned() {
        let p = PotentialSpec::abg(0.0, 1.0);
        let grid = SymGrid::with_spacing(8.0, 0.005).unwrap();
        let mut q = Profile1D::from_fn(grid, |x| [(2f64.sqrt() * x).tanh(), 0.0]);
        q.clamp_to_wells(&p);
        assert!(equipartition_defect(&p, &q) < 1e-4);
    }

    #[test]
    fn tanh_tail_rate() {
        let p = PotentialSpec::abg(0.0, 1.0);
        let wc = p.well_constants(41).unwrap();
        let grid = SymGrid::with_spacing(8.0, 0.005).unwrap();
        let q = Profile1D::from_fn(grid, |x| [(2f64.sqrt() * x).tanh(), 0.0]);
        let f = check_decay(&q, &wc).unwrap();
        let exact = 2.0 * 2f64.sqrt();
        assert!((f.rate - exact).abs() < 0.1 * exact, "{}", f.rate);
    }

    #[test]
    fn constant_profile_has_no_decay_window() {
        let p = PotentialSpec::abg(2.0, 0.3);
        let wc = p.well_constants(41).unwrap();
        let q = Profile1D::constant(SymGrid::new(8.0, 161).unwrap(), [1.0, 0.0]);
        assert!(matches!(check_decay(&q, &wc), Err(Error::Fit(_))));
    }
}
