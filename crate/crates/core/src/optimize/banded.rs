use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric banded matrix storing the diagonal and `bandwidth` sub-diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBandMatrix<T> {
    n: usize,
    bw: usize,
    /// `data[i * (bw + 1) + k] = A[i][i - k]`.
    data: Vec<T>,
}

impl<T: Real> SymBandMatrix<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self { n, bw: bandwidth, data: vec![T::zero(); n * (bandwidth + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `v` to `A[i][j]` (and `A[j][i]`); `|i - j|` must be within the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        assert!(k <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let idx = r * (self.bw + 1) + k;
        self.data[idx] = self.data[idx] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.bw {
            T::zero()
        } else {
            self.data[r * (self.bw + 1) + k]
        }
    }

    pub fn matvec(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = T::zero();
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc = acc + self.get(i, j) * *xj;
            }
            *o = acc;
        }
    }

    /// Solves `A x = b` by banded Cholesky. Fails if `A` is not positive definite.
    pub fn solve_spd(&self, b: &[T]) -> Result<Vec<T>> {
        let chol = self.cholesky()?;
        let n = self.n;
        let bw = self.bw;
        let l = |i: usize, j: usize| chol[i * (bw + 1) + (i - j)];
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for j in i.saturating_sub(bw)..i {
                acc = acc - l(i, j) * y[j];
            }
            y[i] = acc / l(i, i);
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..(i + bw + 1).min(n) {
                acc = acc - l(j, i) * y[j];
            }
            y[i] = acc / l(i, i);
        }
        Ok(y)
    }

    /// True when the banded Cholesky factorization succeeds.
    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    fn cholesky(&self) -> Result<Vec<T>> {
        let n = self.n;
        let bw = self.bw;
        let mut l = self.data.clone();
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let mut acc = l[i * (bw + 1) + (i - j)];
                for k in i.saturating_sub(bw).max(j.saturating_sub(bw))..j {
                    acc = acc - l[i * (bw + 1) + (i - k)] * l[j * (bw + 1) + (j - k)];
                }
                if i == j {
                    if !(acc > T::zero()) {
                        return Err(Error::Domain(format!("matrix not positive definite at pivot {i}")));
                    }
                    l[i * (bw + 1)] = acc.sqrt();
                } else {
                    l[i * (bw + 1) + (i - j)] = acc / l[j * (bw + 1)];
                }
            }
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let mut a = SymBandMatrix::<f64>::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, 4.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
            if i + 2 < n {
                a.add(i + 2, i, 0.5);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x, &mut b);
        let sol = a.solve_spd(&b).unwrap();
        for i in 0..n {
            assert!((sol[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_detected() {
        let mut a = SymBandMatrix::<f64>::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(!a.is_positive_definite());
    }
}
