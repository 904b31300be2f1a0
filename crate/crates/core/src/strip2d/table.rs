use super::energy::RenormLevel;
use super::field::Field2D;
use super::solve::{solve_pl2, StripOptions, StripSolution};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::one_dim::{phi1, relax, Profile1D};
use crate::potential::PotentialSpec;
use crate::scalar::Real;

/// Exponential model `m2 - m_{2,L} = prefactor * exp(-rate L)` of the table's
/// upper half.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapFit<T> {
    pub m2: T,
    pub rate: T,
    pub prefactor: T,
    pub r2: T,
    pub points: usize,
}

/// Relative size below which a table increment is treated as rounding.
const INCREMENT_FLOOR: f64 = 1e-9;

/// Extrapolates the limit of an increasing, saturating sequence.
///
/// Under the model `m_L = m2 - A exp(-rate L)` the increments of the upper
/// half of the table satisfy
/// `m_{L'} - m_L = A exp(-rate L) (1 - exp(-rate (L' - L)))`, which involves
/// neither `m2` nor the rounding of the largest entry. The rate is found by a
/// logarithmic scan plus golden-section refinement of the log-space residual
/// of the increments (for fixed rate, `ln A` is their mean offset), and the
/// limit is the largest entry plus the remaining tail `A exp(-rate L_max)`.
/// The reported slope and `r2` are those of the straight-line fit of
/// `ln(m2 - m_L)` against `L` at that limit.
///
/// Fitting `ln(m2 - m_L)` directly with `m2` free is ill-posed: its residual
/// tends to zero as the trial limit grows without bound.
pub fn extrapolate_m2<T: Real>(ls: &[T], values: &[T]) -> Result<GapFit<T>> {
    let n = ls.len();
    if n != values.len() {
        return Err(Error::Fit("table lengths differ".into()));
    }
    let k = n.div_ceil(2).max(3);
    if n < k {
        return Err(Error::Fit(format!("need at least three table entries, got {n}")));
    }
    let xs: Vec<f64> = ls[n - k..].iter().map(|v| v.to_f64_lossy()).collect();
    let ys: Vec<f64> = values[n - k..].iter().map(|v| v.to_f64_lossy()).collect();
    // Increments at the rounding level of the energies carry no information
    // about the rate.
    let floor = INCREMENT_FLOOR * ys[k - 1].abs().max(1.0);
    let used: Vec<usize> = (0..k - 1).filter(|&i| ys[i + 1] - ys[i] > floor).collect();
    if used.len() < 2 {
        return Err(Error::Fit("upper half of the table has fewer than two resolved increments".into()));
    }
    let log_incs: Vec<f64> = used.iter().map(|&i| (ys[i + 1] - ys[i]).ln()).collect();
    // Returns (residual, ln A) for a trial rate.
    let fit_at = |rate: f64| -> (f64, f64) {
        let model: Vec<f64> =
            used.iter().map(|&i| -rate * xs[i] + (-(-rate * (xs[i + 1] - xs[i])).exp_m1()).ln()).collect();
        let off = log_incs.iter().zip(&model).map(|(l, m)| l - m).sum::<f64>() / used.len() as f64;
        let sse = log_incs.iter().zip(&model).map(|(l, m)| (l - m - off).powi(2)).sum();
        (sse, off)
    };
    let span = xs[k - 1] - xs[0];
    let (lo, hi) = ((1e-3 / span).ln(), (200.0 / span).ln());
    let sse = |t: f64| fit_at(t.exp()).0;
    let steps = 400;
    let dt = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + dt * i as f64)
        .map(|t| (sse(t), t))
        .fold((f64::INFINITY, lo), |a, b| if b.0 < a.0 { b } else { a });
    let (mut a, mut b) = (best.1 - dt, best.1 + dt);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let rate = (0.5 * (a + b)).exp();
    let (_, log_amp) = fit_at(rate);
    let top = ys[k - 1];
    let tail = (log_amp - rate * xs[k - 1]).exp();
    // Gaps measured from the last entry avoid cancellation against m2.
    let logs: Vec<f64> = ys.iter().map(|y| ((top - y) + tail).ln()).collect();
    let f = linear_fit(&xs, &logs)?;
    Ok(GapFit {
        m2: T::lit(top + tail),
        rate: T::lit(-f.slope),
        prefactor: T::lit(f.intercept.exp()),
        r2: T::lit(f.r2),
        points: k,
    })
}

/// The sampled curve `L -> m_{2,L}` with its extrapolated limit.
#[derive(Clone, Debug, PartialEq)]
pub struct M2LTable<T> {
    pub ls: Vec<T>,
    pub values: Vec<T>,
    pub fit: GapFit<T>,
    /// `phi1(scalar connection) - m1`: the energy per unit width of the
    /// y-constant scalar field, used below the first table entry.
    pub scalar_excess: T,
    pub solutions: Vec<StripSolution<T>>,
}

impl<T: Real> M2LTable<T> {
    pub fn m2(&self) -> T {
        self.fit.m2
    }

    /// Largest decrease between consecutive entries (zero if monotone).
    pub fn monotonicity_defect(&self) -> T {
        self.values.windows(2).map(|w| (w[0] - w[1]).max(T::zero())).fold(T::zero(), T::max)
    }

    pub fn fields(&self) -> impl Iterator<Item = &Field2D<T>> {
        self.solutions.iter().map(|s| &s.field)
    }

    /// `m_{2,L}` at any `L > 0`: linear between entries, the fitted
    /// exponential above the table, and below it the scalar competitor bound
    /// `2 L (phi1(scalar) - m1)` capped by the first entry.
    pub fn value_at(&self, l: T) -> Result<T> {
        if !(l >= T::zero()) {
            return Err(Error::Table(format!("negative half-width {l}")));
        }
        let n = self.ls.len();
        if l <= self.ls[0] {
            return Ok((T::two() * l * self.scalar_excess).min(self.values[0]));
        }
        if l >= self.ls[n - 1] {
            let tail = self.fit.m2 - self.fit.prefactor * (-self.fit.rate * l).exp();
            return Ok(tail.max(self.values[n - 1]));
        }
        let i = self.ls.windows(2).position(|w| l <= w[1]).expect("inside the table");
        let t = (l - self.ls[i]) / (self.ls[i + 1] - self.ls[i]);
        Ok(self.values[i] + t * (self.values[i + 1] - self.values[i]))
    }
}

/// Solves the strip problem for each half-width in `ls` (ascending), each
/// warm-started from the previous one, and extrapolates `m2`.
pub fn m2l_table<T: Real>(
    p: &PotentialSpec<T>,
    m1: &RenormLevel<T>,
    q: &Profile1D<T>,
    ls: &[T],
    hy: T,
    opts: &StripOptions<T>,
) -> Result<M2LTable<T>> {
    if ls.is_empty() || ls.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("L list must be nonempty and strictly ascending".into()));
    }
    let mut solutions: Vec<StripSolution<T>> = Vec::with_capacity(ls.len());
    for &l in ls {
        let warm = solutions.last().map(|s| &s.field);
        let s = solve_pl2(p, m1, q, l, hy, warm, opts)?;
        solutions.push(s);
    }
    let values: Vec<T> = solutions.iter().map(|s| s.energy).collect();
    let tol = T::lit(1e-8);
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - tol {
            return Err(Error::Table(format!(
                "m_2,L decreases from {} (L = {}) to {} (L = {})",
                w[0],
                ls[i],
                w[1],
                ls[i + 1]
            )));
        }
    }
    let fit = extrapolate_m2(ls, &values)?;
    let mut scalar = q.clone();
    scalar.values.iter_mut().for_each(|v| v[1] = T::zero());
    let scalar = relax(p, &scalar, &opts.minimize)?;
    let scalar_excess = phi1(p, &scalar.profile) - m1.value;
    Ok(M2LTable { ls: ls.to_vec(), values, fit, scalar_excess, solutions })
}
