use super::energy::{phi3, PrismObjective};
use super::field::{CapCondition, Field3D, PrismGrid};
use crate::error::{Error, Result};
use crate::one_dim::{find_heteroclinics, HeteroclinicOptions, MinimizerSet, Profile1D, Seed};
use crate::optimize::{minimize_with_projection, MinimizeOptions, Objective};
use crate::potential::PotentialSpec;
use crate::scalar::Real;
use crate::strip2d::{m2l_table, solve_hetero2d, Field2D, M2LTable, RenormLevel, StripOptions};

/// The lower-dimensional data the prism problem is built on, all computed on
/// the prism's own (hx, hy) grid so that every slice is compared with the
/// strip minimum of exactly the same discretization.
#[derive(Clone, Debug)]
pub struct PrismInputs<T> {
    pub minimizers: MinimizerSet<T>,
    pub m1: RenormLevel<T>,
    pub q: Profile1D<T>,
    /// `m_{2,L}` at every half-width `n hy` that occurs on a level.
    pub table: M2LTable<T>,
    /// Two-dimensional heteroclinic from `q-bar` to `q`.
    pub vq: Field2D<T>,
}

/// Extra rows beyond the widest level given to the 2D heteroclinic, so that
/// its Dirichlet rows stay away from the cap.
const VQ_MARGIN: f64 = 4.0;

/// Computes [`PrismInputs`] for the prism of order `j` and height `z_extent`,
/// built on the lowest-energy minimizer.
pub fn prepare_prism_inputs<T: Real>(
    p: &PotentialSpec<T>,
    j: usize,
    z_extent: T,
    grid: &PrismGrid<T>,
    hetero: &HeteroclinicOptions<T>,
    strip: &StripOptions<T>,
) -> Result<PrismInputs<T>> {
    prepare_prism_inputs_for(p, j, z_extent, grid, hetero, strip, 0)
}

/// As [`prepare_prism_inputs`], with `q` taken as minimizer `q_index` of the
/// minimal set (ordered by energy).
pub fn prepare_prism_inputs_for<T: Real>(
    p: &PotentialSpec<T>,
    j: usize,
    z_extent: T,
    grid: &PrismGrid<T>,
    hetero: &HeteroclinicOptions<T>,
    strip: &StripOptions<T>,
    q_index: usize,
) -> Result<PrismInputs<T>> {
    let xgrid = grid.xgrid()?;
    let half_rows = grid.staircase(j, z_extent)?;
    let n_max = half_rows.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::Grid("no prism level is wide enough to hold a strip".into()));
    }
    let minimizers = find_heteroclinics(p, xgrid, &Seed::standard(), hetero)?;
    let m1 = RenormLevel::of(&minimizers);
    let q = match minimizers.profiles.get(q_index) {
        Some(h) => h.profile.clone(),
        None => {
            return Err(Error::Argument(format!(
                "q index {q_index} out of range ({} minimizers)",
                minimizers.profiles.len()
            )))
        }
    };
    let ls: Vec<T> = (1..=n_max).map(|n| T::from_usize_lossy(n) * grid.hy).collect();
    let table = m2l_table(p, &m1, &q, &ls, grid.hy, strip)?;
    let margin = (T::lit(VQ_MARGIN) / grid.hy).ceil().to_usize().unwrap_or(1);
    let y_extent = T::from_usize_lossy(n_max + margin) * grid.hy;
    let vq = solve_hetero2d(p, &m1, &q, y_extent, grid.hy, None, strip)?;
    if !vq.converged {
        return Err(Error::NoConvergence { iterations: vq.iterations, residual: vq.grad_norm.to_f64_lossy() });
    }
    Ok(PrismInputs { minimizers, m1, q, table, vq: vq.field })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrismOptions<T> {
    pub minimize: MinimizeOptions<T>,
    /// Truncation radius; the potential's coercivity radius when `None`.
    pub radius: Option<T>,
    /// Gradient norm accepted when the line search stalls at rounding level.
    pub stall_tol: T,
    pub cap: CapCondition,
    /// Single-row levels are only allowed below this height.
    pub z_floor: T,
}

impl<T: Real> Default for PrismOptions<T> {
    fn default() -> Self {
        Self {
            minimize: MinimizeOptions {
                grad_tol: T::lit(1e-7),
                max_iterations: 200_000,
                memory: 20,
                ..MinimizeOptions::default()
            },
            radius: None,
            stall_tol: T::lit(1e-5),
            cap: CapCondition::Dirichlet,
            z_floor: T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrismSolution<T> {
    pub field: Field3D<T>,
    /// `phi3` of the minimizer: the estimate of `m_{3,theta}`.
    pub energy: T,
    /// `phi3` of the starting field (the 2D heteroclinic extended in z).
    pub competitor: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
    pub stalled: bool,
    /// Energy after every accepted step (empty if the run stalled).
    pub trace: Vec<T>,
    pub residual: T,
}

/// Minimizes `phi3` on the prism of order `j`, starting from the 2D
/// heteroclinic extended constantly in z.
pub fn solve_prism<T: Real>(
    p: &PotentialSpec<T>,
    j: usize,
    z_extent: T,
    grid: &PrismGrid<T>,
    opts: &PrismOptions<T>,
    inputs: &PrismInputs<T>,
) -> Result<PrismSolution<T>> {
    if !inputs.vq.xgrid.same_as(&grid.xgrid()?) || (inputs.vq.ygrid.h() - grid.hy).abs() > T::lit(1e-12) * grid.hy {
        return Err(Error::Grid("prism inputs were computed on a different grid".into()));
    }
    let init = Field3D::extruded(&inputs.vq, &inputs.q, j, z_extent, grid.hz, opts.cap)?;
    if let Some(k) = (0..init.nz()).find(|&k| init.is_apex(k) && init.z(k) > opts.z_floor) {
        return Err(Error::Grid(format!(
            "level z = {} has a single row above z = {}; refine hy",
            init.z(k),
            opts.z_floor
        )));
    }
    let obj = PrismObjective::new(p, &inputs.m1, &inputs.table, &init)?;
    let competitor = phi3(p, &inputs.m1, &inputs.table, &init)?;
    let radius = opts.radius.unwrap_or(p.radius);
    let mut x0 = obj.pack(&init);
    obj.truncate(&mut x0, radius);
    let (x, iterations, stalled, trace) =
        match minimize_with_projection(&obj, x0, &opts.minimize, |x| obj.truncate(x, radius)) {
            Ok(r) => (r.x, r.iterations, false, r.trace),
            Err(Error::Stall { x, iteration, .. }) => (x.into_iter().map(T::lit).collect(), iteration, true, Vec::new()),
            Err(e) => return Err(e),
        };
    let mut g = vec![T::zero(); x.len()];
    let energy = obj.value_and_gradient(&x, &mut g);
    let grad_norm = g.iter().map(|v| *v * *v).sum::<T>().sqrt();
    Ok(PrismSolution {
        field: obj.unpack(&x, &init),
        energy,
        competitor,
        grad_norm,
        iterations,
        converged: grad_norm <= opts.minimize.grad_tol || (stalled && grad_norm <= opts.stall_tol),
        stalled,
        trace,
        residual: obj.residual_sup(&x),
    })
}
