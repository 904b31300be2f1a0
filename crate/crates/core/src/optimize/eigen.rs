use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions<T> {
    /// Stop once the metric-weighted residual drops below `tol * max(1, |lambda|)`.
    pub tol: T,
    pub max_iterations: usize,
    /// Seed for the random start vector.
    pub seed: u64,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-9), max_iterations: 200_000, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    /// Normalized so that `v^T M v = 1`.
    pub vector: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Smallest eigenpair of `A v = lambda M v` for a symmetric operator `A` and a
/// positive diagonal metric `M`, i.e. the minimum of the generalized Rayleigh
/// quotient `v^T A v / v^T M v`.
///
/// Single-vector locally optimal block preconditioned conjugate gradient
/// (LOBPCG) with `M^{-1}` as preconditioner. `apply(v, out)` writes `A v`.
pub fn smallest_eigenvalue<T, A>(apply: A, metric: &[T], opts: &EigenOptions<T>) -> Result<EigenPair<T>>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
{
    smallest_eigenvalue_with(apply, metric, None, opts)
}

/// As [`smallest_eigenvalue`], with a caller-supplied preconditioner
/// `precond(r, out)` approximating `(A - sigma M)^{-1} r` for some shift that
/// makes the operator positive definite.
pub fn smallest_eigenvalue_with<T, A>(
    apply: A,
    metric: &[T],
    precond: Option<&dyn Fn(&[T], &mut [T])>,
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>>
where
    T: Real,
    A: Fn(&[T], &mut [T]),
{
    let n = metric.len();
    if n == 0 {
        return Err(Error::Argument("empty operator".into()));
    }
    if metric.iter().any(|m| !(*m > T::zero())) {
        return Err(Error::Argument("metric weights must be positive".into()));
    }
    let mdot = |a: &[T], b: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            acc = acc + metric[i] * a[i] * b[i];
        }
        acc
    };
    let plain = |a: &[T], b: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            acc = acc + a[i] * b[i];
        }
        acc
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let nx = mdot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v = *v / nx);
    let mut ax = vec![T::zero(); n];
    apply(&x, &mut ax);
    let mut p: Option<Vec<T>> = None;
    let mut lambda = plain(&x, &ax);
    let mut res = T::infinity();

    if n == 1 {
        return Ok(EigenPair { value: lambda, vector: x, iterations: 0, residual: T::zero() });
    }

    for it in 0..opts.max_iterations {
        lambda = plain(&x, &ax);
        let r: Vec<T> = (0..n).map(|i| ax[i] - lambda * metric[i] * x[i]).collect();
        res = (0..n).map(|i| r[i] * r[i] / metric[i]).fold(T::zero(), |a, b| a + b).sqrt();
        if !res.is_finite() || !lambda.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: f64::NAN });
        }
        if res <= opts.tol * lambda.abs().max(T::one()) {
            return Ok(EigenPair { value: lambda, vector: x, iterations: it, residual: res });
        }

        // Search space [x, M^{-1} r, p], M-orthonormalized with x kept first.
        let mut basis: Vec<Vec<T>> = vec![x.clone()];
        let mut abasis: Vec<Vec<T>> = vec![ax.clone()];
        let w: Vec<T> = match precond {
            Some(pc) => {
                let mut w = vec![T::zero(); n];
                pc(&r, &mut w);
                w
            }
            None => (0..n).map(|i| r[i] / metric[i]).collect(),
        };
        let mut candidates = vec![w];
        if let Some(pv) = p.take() {
            candidates.push(pv);
        }
        for mut v in candidates {
            let before = mdot(&v, &v).sqrt();
            for _ in 0..2 {
                for b in &basis {
                    let c = mdot(&v, b);
                    for i in 0..n {
                        v[i] = v[i] - c * b[i];
                    }
                }
            }
            let after = mdot(&v, &v).sqrt();
            if !(after > T::lit(1e-10) * before) {
                continue;
            }
            v.iter_mut().for_each(|e| *e = *e / after);
            let mut av = vec![T::zero(); n];
            apply(&v, &mut av);
            basis.push(v);
            abasis.push(av);
        }

        let k = basis.len();
        let mut h = vec![T::zero(); k * k];
        for i in 0..k {
            for j in i..k {
                let v = T::half() * (plain(&basis[i], &abasis[j]) + plain(&basis[j], &abasis[i]));
                h[i * k + j] = v;
                h[j * k + i] = v;
            }
        }
        let (_, vecs) = jacobi_eigen(k, &h);
        let c: Vec<T> = (0..k).map(|i| vecs[i * k]).collect();

        let mut xn = vec![T::zero(); n];
        let mut axn = vec![T::zero(); n];
        let mut pn = vec![T::zero(); n];
        for (j, cj) in c.iter().enumerate() {
            for i in 0..n {
                xn[i] = xn[i] + *cj * basis[j][i];
                axn[i] = axn[i] + *cj * abasis[j][i];
                if j > 0 {
                    pn[i] = pn[i] + *cj * basis[j][i];
                }
            }
        }
        let nrm = mdot(&xn, &xn).sqrt();
        for i in 0..n {
            xn[i] = xn[i] / nrm;
            axn[i] = axn[i] / nrm;
        }
        x = xn;
        ax = axn;
        // Refresh the image periodically so rounding in the recurrences
        // cannot accumulate.
        if it % 50 == 49 {
            apply(&x, &mut ax);
        }
        if k > 1 {
            p = Some(pn);
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: res.to_f64_lossy() })
}

/// Cyclic Jacobi eigensolver for a small dense symmetric matrix stored
/// row-major. Returns eigenvalues in ascending order and the matching
/// eigenvectors as the columns of a row-major `n x n` matrix.
pub fn jacobi_eigen<T: Real>(n: usize, a: &[T]) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let e = m[i * n + j] * m[i * n + j];
                total = total + e;
                if i != j {
                    off = off + e;
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + newc] = v[r * n + oldc];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_small_matrix() {
        let a = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = jacobi_eigen(3, &a);
        for k in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|c| a[r * 3 + c] * vecs[c * 3 + k]).sum();
                assert!((av - vals[k] * vecs[r * 3 + k]).abs() < 1e-12);
            }
        }
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
    }

    #[test]
    fn identity_has_unit_eigenvalue() {
        let e = smallest_eigenvalue(|v: &[f64], out: &mut [f64]| out.copy_from_slice(v), &[1.0; 10], &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_operator() {
        let d = [5.0, 2.0, 9.0];
        let e = smallest_eigenvalue(
            |v: &[f64], out: &mut [f64]| {
                for i in 0..3 {
                    out[i] = d[i] * v[i];
                }
            },
            &[1.0; 3],
            &EigenOptions::default(),
        )
        .unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
        assert!(e.vector[1].abs() > 0.999);
    }

    #[test]
    fn dirichlet_laplacian_on_zero_pi() {
        // -u'' on (0, pi), interior nodes, mass = h.
        let n = 200;
        let h = std::f64::consts::PI / (n + 1) as f64;
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { v[i - 1] } else { 0.0 };
                let r = if i + 1 < n { v[i + 1] } else { 0.0 };
                out[i] = (2.0 * v[i] - l - r) / h;
            }
        };
        let e = smallest_eigenvalue(apply, &vec![h; n], &EigenOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 0.01, "{}", e.value);
    }

    #[test]
    fn empty_or_bad_metric_rejected() {
        let id = |v: &[f64], out: &mut [f64]| out.copy_from_slice(v);
        assert!(smallest_eigenvalue(id, &[], &EigenOptions::default()).is_err());
        assert!(smallest_eigenvalue(id, &[1.0, 0.0], &EigenOptions::default()).is_err());
    }
}
