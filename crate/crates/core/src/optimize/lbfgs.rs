use std::collections::VecDeque;

use super::Objective;
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOptions<T> {
    pub max_iterations: usize,
    /// Stop once the Euclidean gradient norm drops to this value.
    pub grad_tol: T,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Backtracking shrink factor in `(0, 1)`.
    pub shrink: T,
    /// Armijo sufficient-decrease constant in `(0, 1)`.
    pub armijo: T,
    /// Upper bound on the Euclidean length of a single step.
    pub max_step: T,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            grad_tol: T::lit(1e-8),
            memory: 12,
            shrink: T::half(),
            armijo: T::lit(1e-4),
            max_step: T::lit(10.0),
        }
    }
}

impl<T: Real> MinimizeOptions<T> {
    pub fn with_grad_tol(mut self, tol: T) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > T::zero()) {
            return Err(Error::Argument("grad_tol must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be at least 1".into()));
        }
        if !(self.shrink > T::zero() && self.shrink < T::one()) {
            return Err(Error::Argument("shrink factor must lie in (0, 1)".into()));
        }
        if !(self.armijo > T::zero() && self.armijo < T::one()) {
            return Err(Error::Argument("Armijo constant must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with `f(x0)`.
    pub trace: Vec<T>,
}

/// Limited-memory BFGS with backtracking Armijo line search.
pub fn minimize<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    x0: Vec<T>,
    opts: &MinimizeOptions<T>,
) -> Result<MinimizeResult<T>> {
    minimize_with_projection(objective, x0, opts, |_| false)
}

/// Like [`minimize`], but calls `project` on every accepted iterate. The
/// projection must not increase the objective; if it reports a change the
/// objective is re-evaluated and the curvature memory is cleared.
pub fn minimize_with_projection<T, O, P>(
    objective: &O,
    x0: Vec<T>,
    opts: &MinimizeOptions<T>,
    mut project: P,
) -> Result<MinimizeResult<T>>
where
    T: Real,
    O: Objective<T> + ?Sized,
    P: FnMut(&mut [T]) -> bool,
{
    opts.validate()?;
    let n = x0.len();
    let mut x = x0;
    project(&mut x);
    let mut g = vec![T::zero(); n];
    let mut f = objective.value_and_gradient(&x, &mut g);
    if !finite(f, &g) {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut trace = vec![f];
    let mut gnorm = norm2(&g);

    let mut s_hist: VecDeque<Vec<T>> = VecDeque::with_capacity(opts.memory);
    let mut y_hist: VecDeque<Vec<T>> = VecDeque::with_capacity(opts.memory);
    let mut rho_hist: VecDeque<T> = VecDeque::with_capacity(opts.memory);
    let mut alpha_buf = vec![T::zero(); opts.memory.max(1)];

    let mut d = vec![T::zero(); n];
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];

    let mut iter = 0;
    while iter < opts.max_iterations {
        if gnorm <= opts.grad_tol {
            break;
        }
        iter += 1;

        two_loop(&g, &s_hist, &y_hist, &rho_hist, &mut alpha_buf, &mut d);
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            clear(&mut s_hist, &mut y_hist, &mut rho_hist);
            steepest(&g, gnorm, &mut d);
            slope = dot(&g, &d);
        }

        let accepted = match line_search(objective, &x, f, &d, slope, opts, &mut x_new, &mut g_new) {
            Some(v) => Some(v),
            None if !s_hist.is_empty() => {
                clear(&mut s_hist, &mut y_hist, &mut rho_hist);
                steepest(&g, gnorm, &mut d);
                slope = dot(&g, &d);
                line_search(objective, &x, f, &d, slope, opts, &mut x_new, &mut g_new)
            }
            None => None,
        };
        let f_new = match accepted {
            Some(LineSearch::Accepted(v)) => v,
            Some(LineSearch::Diverged) => return Err(Error::Divergence { iteration: iter }),
            None => {
                return Err(Error::Stall {
                    iteration: iter,
                    grad_norm: gnorm.to_f64_lossy(),
                    value: f.to_f64_lossy(),
                    x: x.iter().map(|v| v.to_f64_lossy()).collect(),
                })
            }
        };

        let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;

        if project(&mut x) {
            f = objective.value_and_gradient(&x, &mut g);
            if !finite(f, &g) {
                return Err(Error::Divergence { iteration: iter });
            }
            clear(&mut s_hist, &mut y_hist, &mut rho_hist);
        } else if sy > T::epsilon() * norm2(&s) * norm2(&y) {
            if s_hist.len() == opts.memory {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            if opts.memory > 0 {
                s_hist.push_back(s);
                y_hist.push_back(y);
                rho_hist.push_back(T::one() / sy);
            }
        }
        trace.push(f);
        gnorm = norm2(&g);
    }

    Ok(MinimizeResult {
        converged: gnorm <= opts.grad_tol,
        x,
        value: f,
        grad_norm: gnorm,
        iterations: iter,
        trace,
    })
}

enum LineSearch<T> {
    Accepted(T),
    Diverged,
}

#[allow(clippy::too_many_arguments)]
fn line_search<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    x: &[T],
    f: T,
    d: &[T],
    slope: T,
    opts: &MinimizeOptions<T>,
    x_new: &mut [T],
    g_new: &mut [T],
) -> Option<LineSearch<T>> {
    let dnorm = norm2(d);
    let mut step = if dnorm > opts.max_step { opts.max_step / dnorm } else { T::one() };
    let mut any_finite = false;
    for _ in 0..80 {
        let mut moved = false;
        for i in 0..x.len() {
            x_new[i] = x[i] + step * d[i];
            moved |= x_new[i] != x[i];
        }
        // Steps below the resolution of x cannot make progress.
        if !moved {
            break;
        }
        let f_new = objective.value_and_gradient(x_new, g_new);
        // Non-finite trial values may be an overshoot into a steep region, so
        // keep shrinking; divergence is declared only if no trial was finite.
        if finite(f_new, g_new) {
            any_finite = true;
            if f_new <= f + opts.armijo * step * slope && f_new < f {
                return Some(LineSearch::Accepted(f_new));
            }
        }
        step = step * opts.shrink;
    }
    if any_finite {
        None
    } else {
        Some(LineSearch::Diverged)
    }
}

fn two_loop<T: Real>(
    g: &[T],
    s_hist: &VecDeque<Vec<T>>,
    y_hist: &VecDeque<Vec<T>>,
    rho_hist: &VecDeque<T>,
    alpha: &mut [T],
    d: &mut [T],
) {
    d.copy_from_slice(g);
    let m = s_hist.len();
    for k in (0..m).rev() {
        let a = rho_hist[k] * dot(&s_hist[k], d);
        alpha[k] = a;
        axpy(-a, &y_hist[k], d);
    }
    if let (Some(s), Some(y)) = (s_hist.back(), y_hist.back()) {
        let gamma = dot(s, y) / dot(y, y);
        for v in d.iter_mut() {
            *v = *v * gamma;
        }
    }
    for k in 0..m {
        let b = rho_hist[k] * dot(&y_hist[k], d);
        axpy(alpha[k] - b, &s_hist[k], d);
    }
    for v in d.iter_mut() {
        *v = -*v;
    }
}

fn steepest<T: Real>(g: &[T], gnorm: T, d: &mut [T]) {
    let scale = if gnorm > T::one() { T::one() / gnorm } else { T::one() };
    for (di, gi) in d.iter_mut().zip(g) {
        *di = -*gi * scale;
    }
}

fn clear<T>(s: &mut VecDeque<Vec<T>>, y: &mut VecDeque<Vec<T>>, r: &mut VecDeque<T>) {
    s.clear();
    y.clear();
    r.clear();
}

fn finite<T: Real>(f: T, g: &[T]) -> bool {
    f.is_finite() && g.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn quadratic_converges_to_center() {
        let c = [3.0, -1.0, 0.25, 7.0];
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..x.len() {
                g[i] = x[i] - c[i];
                v += 0.5 * g[i] * g[i];
            }
            v
        };
        let r = minimize(&f, vec![0.0; 4], &MinimizeOptions::default().with_grad_tol(1e-12)).unwrap();
        assert!(r.converged);
        assert!(r.value < 1e-20);
        for i in 0..4 {
            assert!((r.x[i] - c[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rosenbrock_reaches_global_minimum() {
        let r = minimize(&rosenbrock, vec![-1.2, 1.0], &MinimizeOptions::default().with_grad_tol(1e-10)).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!((r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_never_increases() {
        let r = minimize(&rosenbrock, vec![-1.2, 1.0], &MinimizeOptions::default()).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(r.trace.len(), r.iterations + 1);
    }

    #[test]
    fn nan_objective_is_divergence() {
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = f64::NAN;
            f64::NAN
        };
        assert!(matches!(minimize(&f, vec![1.0], &MinimizeOptions::default()), Err(Error::Divergence { .. })));
    }

    #[test]
    fn nan_mid_run_is_divergence() {
        // Finite only at the start point; every trial step is NaN.
        let f = |x: &[f64], g: &mut [f64]| {
            if x[0] == 1.0 {
                g[0] = 1.0;
                1.0
            } else {
                g[0] = f64::NAN;
                f64::NAN
            }
        };
        assert!(matches!(minimize(&f, vec![1.0], &MinimizeOptions::default()), Err(Error::Divergence { .. })));
    }

    #[test]
    fn inconsistent_gradient_stalls_with_last_iterate() {
        // Gradient points uphill, so no step satisfies the Armijo condition.
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * x[0];
            x[0] * x[0]
        };
        match minimize(&f, vec![1.0], &MinimizeOptions::default()) {
            Err(Error::Stall { x, .. }) => assert_eq!(x, vec![1.0]),
            other => panic!("expected stall, got {other:?}"),
        }
    }

    #[test]
    fn invalid_options_rejected() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0];
            0.5 * x[0] * x[0]
        };
        let bad = MinimizeOptions { grad_tol: 0.0, ..MinimizeOptions::default() };
        assert!(matches!(minimize(&f, vec![1.0], &bad), Err(Error::Argument(_))));
        let bad = MinimizeOptions { max_iterations: 0, ..MinimizeOptions::default() };
        assert!(matches!(minimize(&f, vec![1.0], &bad), Err(Error::Argument(_))));
    }

    #[test]
    fn projection_is_applied_to_iterates() {
        // Minimize (x - 5)^2 while clamping x <= 2.
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 5.0);
            (x[0] - 5.0).powi(2)
        };
        let r = minimize_with_projection(&f, vec![0.0], &MinimizeOptions::default().with_max_iterations(50), |x| {
            if x[0] > 2.0 {
                x[0] = 2.0;
                true
            } else {
                false
            }
        })
        .unwrap();
        assert!(r.x[0] <= 2.0);
        assert!((r.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_quadratic() {
        let f = |x: &[f32], g: &mut [f32]| {
            g[0] = x[0] - 2.0;
            g[1] = 4.0 * (x[1] + 1.0);
            0.5 * (x[0] - 2.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2)
        };
        let r = minimize(&f, vec![0.0f32, 0.0], &MinimizeOptions::default().with_grad_tol(1e-5)).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-4);
        assert!((r.x[1] + 1.0).abs() < 1e-4);
    }
}
