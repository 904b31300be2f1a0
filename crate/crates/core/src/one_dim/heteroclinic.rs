use rayon::prelude::*;

use super::energy::{phi1, reduced_hessian, HalfLineEnergy};
use super::profile::{symmetrize1d, Profile1D};
use crate::error::{Error, Result};
use crate::grid::SymGrid;
use crate::optimize::{minimize, MinimizeOptions, Objective};
use crate::potential::PotentialSpec;
use crate::scalar::{norm2, Real};

/// Starting point of one multistart run.
#[derive(Clone, Debug, PartialEq)]
pub enum Seed<T> {
    /// The reference scalar profile `(p(x), 0)`.
    Scalar,
    /// Reference profile plus `amplitude * sech^2(x)` in the second component.
    Bump(T),
    /// A caller-supplied profile, resampled to the working grid.
    User(Profile1D<T>),
}

impl<T: Real> Seed<T> {
    /// Scalar profile and the two opposite second-component bumps.
    pub fn standard() -> Vec<Self> {
        vec![Seed::Scalar, Seed::Bump(T::one()), Seed::Bump(-T::one())]
    }

    pub fn label(&self) -> String {
        match self {
            Seed::Scalar => "scalar".into(),
            Seed::Bump(a) => format!("bump({:+.3})", a.to_f64_lossy()),
            Seed::User(_) => "user".into(),
        }
    }

    fn initial_profile(&self, p: &PotentialSpec<T>, grid: SymGrid<T>) -> Profile1D<T> {
        let scale = p.a_plus()[0];
        let mut q = match self {
            Seed::Scalar => {
                let mut q = Profile1D::reference(grid);
                q.values.iter_mut().for_each(|v| v[0] = v[0] * scale);
                q
            }
            Seed::Bump(a) => {
                let mut q = Profile1D::reference(grid);
                for (i, v) in q.values.iter_mut().enumerate() {
                    let x = grid.x(i);
                    let s = T::one() / x.cosh();
                    v[0] = v[0] * scale;
                    v[1] = *a * s * s;
                }
                q
            }
            Seed::User(u) => {
                if u.grid.same_as(&grid) {
                    u.clone()
                } else {
                    u.resample(grid)
                }
            }
        };
        q = symmetrize1d(&q);
        q.clamp_to_wells(p);
        q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeteroclinicOptions<T> {
    pub minimize: MinimizeOptions<T>,
    /// Profiles closer than this in `L^2` are considered the same.
    pub dedup_threshold: T,
    /// `|q2| <= scalar_tol` everywhere marks a profile as scalar.
    pub scalar_tol: T,
    /// Relative energy window defining the least-energy subset.
    pub energy_tol: T,
}

impl<T: Real> Default for HeteroclinicOptions<T> {
    fn default() -> Self {
        Self {
            minimize: MinimizeOptions {
                grad_tol: T::lit(1e-9),
                max_iterations: 100_000,
                ..MinimizeOptions::default()
            },
            dedup_threshold: T::lit(0.1),
            scalar_tol: T::lit(1e-8),
            energy_tol: T::lit(1e-8),
        }
    }
}

/// Result of relaxing a single starting profile.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxOutcome<T> {
    pub profile: Profile1D<T>,
    pub energy: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Objective values of the quasi-Newton phase.
    pub trace: Vec<T>,
}

/// Minimizes the action from `q0` within the symmetry class, then polishes
/// with Newton steps on the banded Hessian while it stays positive definite.
pub fn relax<T: Real>(p: &PotentialSpec<T>, q0: &Profile1D<T>, opts: &MinimizeOptions<T>) -> Result<RelaxOutcome<T>> {
    let grid = q0.grid;
    let mut start = symmetrize1d(q0);
    start.clamp_to_wells(p);
    let energy = HalfLineEnergy::new(p, grid);
    let (mut x, iterations, trace) = match minimize(&energy, start.to_reduced(), opts) {
        Ok(r) => (r.x, r.iterations, r.trace),
        // The quasi-Newton phase ends at the rounding floor of the energy;
        // Newton steps below only need the gradient.
        Err(Error::Stall { x, iteration, .. }) => {
            let x: Vec<T> = x.into_iter().map(T::lit).collect();
            (x, iteration, Vec::new())
        }
        Err(e) => return Err(e),
    };

    let mut g = vec![T::zero(); x.len()];
    energy.value_and_gradient(&x, &mut g);
    let mut gnorm = norm2(&g);
    for _ in 0..30 {
        if gnorm <= opts.grad_tol * T::lit(1e-3) {
            break;
        }
        let q = Profile1D::from_reduced(grid, &x, p);
        let Ok(step) = reduced_hessian(p, &q).solve_spd(&g) else { break };
        let trial: Vec<T> = x.iter().zip(&step).map(|(a, b)| *a - *b).collect();
        let mut gt = vec![T::zero(); x.len()];
        let ft = energy.value_and_gradient(&trial, &mut gt);
        let gtn = norm2(&gt);
        if !(ft.is_finite() && gtn < gnorm) {
            break;
        }
        x = trial;
        g = gt;
        gnorm = gtn;
    }

    let profile = Profile1D::from_reduced(grid, &x, p);
    Ok(RelaxOutcome {
        energy: phi1(p, &profile),
        converged: gnorm <= opts.grad_tol,
        grad_norm: gnorm,
        iterations,
        trace,
        profile,
    })
}

/// One element of the computed minimal set.
#[derive(Clone, Debug, PartialEq)]
pub struct Heteroclinic<T> {
    pub profile: Profile1D<T>,
    pub energy: T,
    pub grad_norm: T,
    pub scalar: bool,
    pub q2_at_zero: T,
    /// `q1(x) x > 0` for `x != 0`, checked after the fact.
    pub sign_condition: bool,
    pub seed: String,
}

/// A converged critical point that was not kept, or a failed run.
#[derive(Clone, Debug, PartialEq)]
pub struct Discarded<T> {
    pub seed: String,
    pub energy: Option<T>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizerSet<T> {
    /// Distinct local minimizers sorted by energy; equal energies are ordered
    /// by decreasing `q2(0)`.
    pub profiles: Vec<Heteroclinic<T>>,
    pub m1: T,
    /// Least pairwise `L^2` distance, if there are at least two profiles.
    pub separation: Option<T>,
    pub discarded: Vec<Discarded<T>>,
    pub energy_tol: T,
}

impl<T: Real> MinimizerSet<T> {
    /// Profiles whose energy is within the relative window of `m1`.
    pub fn least_energy(&self) -> impl Iterator<Item = &Heteroclinic<T>> {
        let cut = self.m1 + self.energy_tol * self.m1.abs().max(T::one());
        self.profiles.iter().filter(move |h| h.energy <= cut)
    }

    /// Separation constant `d0 = separation / 5`.
    pub fn d0(&self) -> Option<T> {
        self.separation.map(|s| s / T::lit(5.0))
    }

    /// The least-energy profile with the largest `q2(0)`.
    pub fn primary(&self) -> &Heteroclinic<T> {
        &self.profiles[0]
    }

    /// `L^2` distance from `q` to the least-energy subset.
    pub fn distance_to_minimal(&self, q: &Profile1D<T>) -> T {
        self.least_energy().map(|h| h.profile.l2_distance(q)).fold(T::infinity(), T::min)
    }
}

/// Multistart search for the minimal heteroclinic set.
pub fn find_heteroclinics<T: Real>(
    p: &PotentialSpec<T>,
    grid: SymGrid<T>,
    seeds: &[Seed<T>],
    opts: &HeteroclinicOptions<T>,
) -> Result<MinimizerSet<T>> {
    if seeds.is_empty() {
        return Err(Error::NoMinimizer("empty seed list".into()));
    }
    let runs: Vec<(String, Result<RelaxOutcome<T>>)> = seeds
        .par_iter()
        .map(|s| (s.label(), relax(p, &s.initial_profile(p, grid), &opts.minimize)))
        .collect();

    let mut candidates = Vec::new();
    let mut discarded = Vec::new();
    for (seed, run) in runs {
        match run {
            Err(e) => discarded.push(Discarded { seed, energy: None, reason: e.to_string() }),
            Ok(r) => {
                if !reduced_hessian(p, &r.profile).is_positive_definite() {
                    discarded.push(Discarded {
                        seed,
                        energy: Some(r.energy),
                        reason: format!(
                            "critical point is not a local minimizer (gradient norm {:.3e})",
                            r.grad_norm.to_f64_lossy()
                        ),
                    });
                } else if !r.converged {
                    discarded.push(Discarded {
                        seed,
                        energy: Some(r.energy),
                        reason: format!("not converged (gradient norm {:.3e})", r.grad_norm.to_f64_lossy()),
                    });
                } else {
                    candidates.push((seed, r));
                }
            }
        }
    }
    if candidates.is_empty() {
        let why: Vec<String> = discarded.iter().map(|d| format!("{}: {}", d.seed, d.reason)).collect();
        return Err(Error::NoMinimizer(why.join("; ")));
    }

    candidates.sort_by(|a, b| a.1.energy.partial_cmp(&b.1.energy).unwrap_or(std::cmp::Ordering::Equal));
    let mut kept: Vec<Heteroclinic<T>> = Vec::new();
    for (seed, r) in candidates {
        if kept.iter().any(|k| k.profile.l2_distance(&r.profile) < opts.dedup_threshold) {
            continue;
        }
        kept.push(Heteroclinic {
            scalar: r.profile.is_scalar(opts.scalar_tol),
            q2_at_zero: r.profile.at_zero()[1],
            sign_condition: r.profile.sign_condition(),
            energy: r.energy,
            grad_norm: r.grad_norm,
            profile: r.profile,
            seed,
        });
    }
    let m1 = kept[0].energy;
    let tie = opts.energy_tol * m1.abs().max(T::one());
    kept.sort_by(|a, b| {
        if (a.energy - b.energy).abs() <= tie {
            b.q2_at_zero.partial_cmp(&a.q2_at_zero).unwrap_or(std::cmp::Ordering::Equal)
        } else {
            a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let mut separation: Option<T> = None;
    for i in 0..kept.len() {
        for j in (i + 1)..kept.len() {
            let d = kept[i].profile.l2_distance(&kept[j].profile);
            separation = Some(separation.map_or(d, |s| s.min(d)));
        }
    }
    Ok(MinimizerSet { profiles: kept, m1, separation, discarded, energy_tol: opts.energy_tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_seed_list_fails() {
        let p = PotentialSpec::abg(2.0, 0.3);
        let grid = SymGrid::new(8.0, 161).unwrap();
        assert!(matches!(
            find_heteroclinics(&p, grid, &[], &HeteroclinicOptions::default()),
            Err(Error::NoMinimizer(_))
        ));
    }

    #[test]
    fn scalar_potential_has_single_scalar_minimizer() {
        let p = PotentialSpec::abg(0.0, 1.0);
        let grid = SymGrid::with_spacing(8.0, 0.02).unwrap();
        let ms = find_heteroclinics(&p, grid, &Seed::standard(), &HeteroclinicOptions::default()).unwrap();
        assert_eq!(ms.profiles.len(), 1);
        assert!(ms.profiles[0].scalar);
        assert!(ms.separation.is_none());
        let exact = 4.0 / 3.0 * 2f64.sqrt();
        assert!((ms.m1 - exact).abs() / exact < 5e-3);
    }

    #[test]
    fn default_potential_has_bar_pair() {
        let p = PotentialSpec::<f64>::abg(2.0, 0.3);
        let grid = SymGrid::with_spacing(10.0, 0.02).unwrap();
        let ms = find_heteroclinics(&p, grid, &Seed::standard(), &HeteroclinicOptions::default()).unwrap();
        assert_eq!(ms.profiles.len(), 2, "{:?}", ms.discarded);
        let (q, qb) = (&ms.profiles[0], &ms.profiles[1]);
        assert!(q.q2_at_zero > 0.05 && qb.q2_at_zero < -0.05);
        assert!((q.energy - qb.energy).abs() < 1e-10);
        assert!(q.profile.bar().l2_distance(&qb.profile) < 1e-6);
        assert!(ms.m1 < 4.0 / 3.0 * 10f64.sqrt());
        assert!(ms.discarded.iter().any(|d| d.seed == "scalar"));
        for h in &ms.profiles {
            assert!(h.grad_norm <= 1e-9);
            assert!(h.sign_condition);
        }
    }
}
