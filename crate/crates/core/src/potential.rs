//! Symmetric double-well potentials `W : R^2 -> R` and their well constants.
//!
//! Two families are supported. The built-in one is
//!
//! ```text
//! W(x1, x2) = (x1^2 - 1)^2 + (x2^2 - alpha (1 - x1^2))^2 + gamma x2^2
//! ```
//!
//! with wells at `(+-1, 0)`. The `gamma` term makes the Hessian at the wells
//! definite. The second family is an arbitrary polynomial in `(x1^2, x2^2)`,
//! which is even in each coordinate by construction.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of the target plane.
pub type Point<T> = [T; 2];
/// Symmetric 2x2 matrix stored row-major.
pub type Mat2<T> = [[T; 2]; 2];

/// One monomial `coeff * (x1^2)^pow1 * (x2^2)^pow2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTerm<T> {
    pub pow1: u32,
    pub pow2: u32,
    pub coeff: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialFamily<T> {
    /// The built-in `(alpha, gamma)` family.
    Abg { alpha: T, gamma: T },
    /// User polynomial in the squared coordinates.
    Poly { terms: Vec<PolyTerm<T>> },
}

/// Potential together with its declared wells `a-`, `a+` and coercivity radius `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec<T> {
    pub family: PotentialFamily<T>,
    /// `[a_minus, a_plus]`.
    pub wells: [Point<T>; 2],
    pub radius: T,
}

impl<T: Real> PotentialSpec<T> {
    /// Built-in family with wells at `(+-1, 0)` and `R = 2`.
    pub fn abg(alpha: T, gamma: T) -> Self {
        Self {
            family: PotentialFamily::Abg { alpha, gamma },
            wells: [[-T::one(), T::zero()], [T::one(), T::zero()]],
            radius: T::two(),
        }
    }

    /// Polynomial family with wells at `(+-well_x, 0)`.
    pub fn poly(terms: Vec<PolyTerm<T>>, well_x: T, radius: T) -> Self {
        Self {
            family: PotentialFamily::Poly { terms },
            wells: [[-well_x, T::zero()], [well_x, T::zero()]],
            radius,
        }
    }

    pub fn with_wells(mut self, minus: Point<T>, plus: Point<T>) -> Self {
        self.wells = [minus, plus];
        self
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = radius;
        self
    }

    #[inline]
    pub fn a_minus(&self) -> Point<T> {
        self.wells[0]
    }

    #[inline]
    pub fn a_plus(&self) -> Point<T> {
        self.wells[1]
    }

    /// Value of `W`. No input checking; see [`Self::eval_w`].
    #[inline]
    pub fn w(&self, xi: Point<T>) -> T {
        let [x1, x2] = xi;
        match &self.family {
            PotentialFamily::Abg { alpha, gamma } => {
                let s = x1 * x1;
                let t = x2 * x2;
                let a = s - T::one();
                let b = t - *alpha * (T::one() - s);
                a * a + b * b + *gamma * t
            }
            PotentialFamily::Poly { terms } => {
                let s = x1 * x1;
                let t = x2 * x2;
                terms
                    .iter()
                    .map(|m| m.coeff * s.powi(m.pow1 as i32) * t.powi(m.pow2 as i32))
                    .fold(T::zero(), |acc, v| acc + v)
            }
        }
    }

    /// Gradient of `W`.
    #[inline]
    pub fn grad(&self, xi: Point<T>) -> Point<T> {
        let [x1, x2] = xi;
        let four = T::lit(4.0);
        match &self.family {
            PotentialFamily::Abg { alpha, gamma } => {
                let s = x1 * x1;
                let t = x2 * x2;
                let a = s - T::one();
                let b = t - *alpha * (T::one() - s);
                [
                    four * x1 * (a + *alpha * b),
                    four * x2 * b + T::two() * *gamma * x2,
                ]
            }
            PotentialFamily::Poly { terms } => {
                let (ds, dt) = poly_partials(terms, x1 * x1, x2 * x2);
                [T::two() * x1 * ds, T::two() * x2 * dt]
            }
        }
    }

    /// Hessian of `W` (symmetric).
    #[inline]
    pub fn hess(&self, xi: Point<T>) -> Mat2<T> {
        let [x1, x2] = xi;
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        match &self.family {
            PotentialFamily::Abg { alpha, gamma } => {
                let s = x1 * x1;
                let t = x2 * x2;
                let a = s - T::one();
                let b = t - *alpha * (T::one() - s);
                let h11 = four * (a + *alpha * b) + eight * s * (T::one() + *alpha * *alpha);
                let h12 = eight * *alpha * x1 * x2;
                let h22 = four * b + eight * t + T::two() * *gamma;
                [[h11, h12], [h12, h22]]
            }
            PotentialFamily::Poly { terms } => {
                let s = x1 * x1;
                let t = x2 * x2;
                let (ds, dt) = poly_partials(terms, s, t);
                let (dss, dst, dtt) = poly_second_partials(terms, s, t);
                let h11 = T::two() * ds + four * s * dss;
                let h12 = four * x1 * x2 * dst;
                let h22 = T::two() * dt + four * t * dtt;
                [[h11, h12], [h12, h22]]
            }
        }
    }

    /// Checked value of `W`.
    pub fn eval_w(&self, xi: Point<T>) -> Result<T> {
        check_finite(xi)?;
        Ok(self.w(xi))
    }

    /// Checked gradient of `W`.
    pub fn grad_w(&self, xi: Point<T>) -> Result<Point<T>> {
        check_finite(xi)?;
        Ok(self.grad(xi))
    }

    /// Checked Hessian of `W`.
    pub fn hess_w(&self, xi: Point<T>) -> Result<Mat2<T>> {
        check_finite(xi)?;
        Ok(self.hess(xi))
    }

    /// Distance to the nearest well.
    #[inline]
    pub fn chi(&self, xi: Point<T>) -> T {
        dist(xi, self.wells[0]).min(dist(xi, self.wells[1]))
    }

    /// Deterministic sampling check of the three structural hypotheses.
    ///
    /// `n_samples` is the per-axis resolution of the square grid over
    /// `[-2R, 2R]^2` and the number of points on each sampled circle.
    pub fn validate_hypotheses(&self, n_samples: usize) -> HypothesisReport {
        let n = n_samples.max(3);
        let r = self.radius;
        let mut grid = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let u = T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
                let v = T::from_usize_lossy(j) / T::from_usize_lossy(n - 1);
                let two_r = T::two() * r;
                grid.push([-two_r + u * T::lit(4.0) * r, -two_r + v * T::lit(4.0) * r]);
            }
        }

        // (W1): zeros at the wells, positive elsewhere, definite Hessians.
        let tiny = T::lit(1e-12);
        let mut w1 = HypothesisCheck::pass("wells are the only zeros; Hessians definite");
        for (k, a) in self.wells.iter().enumerate() {
            let wa = self.w(*a);
            if wa.abs() > tiny {
                w1.fail(format!("W(a{}) = {:.3e} != 0", if k == 0 { "-" } else { "+" }, wa.to_f64_lossy()));
            }
            let (lo, _) = sym_eigenvalues(self.hess(*a));
            if !(lo > tiny) {
                w1.fail(format!(
                    "Hessian at a{} not positive definite (smallest eigenvalue {:.3e})",
                    if k == 0 { "-" } else { "+" },
                    lo.to_f64_lossy()
                ));
            }
            w1.margin = w1.margin.min(lo.to_f64_lossy());
        }
        for &xi in &grid {
            if self.chi(xi) < tiny {
                continue;
            }
            let v = self.w(xi);
            if !(v > T::zero()) {
                w1.fail(format!("W({:.4}, {:.4}) = {:.3e} <= 0", xi[0].to_f64_lossy(), xi[1].to_f64_lossy(), v.to_f64_lossy()));
                break;
            }
        }

        // (W2): inward-pointing gradient on circles of radius R, 1.5R, 2R.
        let mut w2 = HypothesisCheck::pass("grad W . xi > 0 for |xi| >= R");
        w2.margin = f64::INFINITY;
        'circles: for scale in [1.0, 1.5, 2.0] {
            let rad = r * T::lit(scale);
            for k in 0..n {
                let ang = T::two() * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(n);
                let xi = [rad * ang.cos(), rad * ang.sin()];
                let g = self.grad(xi);
                let d = g[0] * xi[0] + g[1] * xi[1];
                w2.margin = w2.margin.min(d.to_f64_lossy());
                if !(d > T::zero()) {
                    w2.fail(format!("grad W . xi = {:.3e} at |xi| = {:.3}", d.to_f64_lossy(), rad.to_f64_lossy()));
                    break 'circles;
                }
            }
        }

        // (W3): evenness in each coordinate.
        let mut w3 = HypothesisCheck::pass("W even in x1 and in x2");
        w3.margin = 0.0;
        for &xi in &grid {
            let v = self.w(xi);
            let a = self.w([-xi[0], xi[1]]);
            let b = self.w([xi[0], -xi[1]]);
            let dev = (v - a).abs().max((v - b).abs());
            let scale = T::one() + v.abs();
            w3.margin = w3.margin.max((dev / scale).to_f64_lossy());
            if dev > T::lit(1e-12) * scale {
                w3.fail(format!("asymmetry {:.3e} at ({:.4}, {:.4})", dev.to_f64_lossy(), xi[0].to_f64_lossy(), xi[1].to_f64_lossy()));
                break;
            }
        }

        HypothesisReport { w1, w2, w3 }
    }

    /// Well constants `w_lower`, `w_upper`, `delta_bar` and the smallest
    /// eigenvalue of the Hessian at `a+`.
    ///
    /// `delta_bar` is the largest radius in `[1e-3, 1/8]` (up to bisection
    /// resolution) on whose sampled balls the Hessian keeps at least half of
    /// its smallest eigenvalue at the wells and the quadratic bounds hold; `samples` is the radial and angular resolution.
    pub fn well_constants(&self, samples: usize) -> Result<WellConstants<T>> {
        for (k, a) in self.wells.iter().enumerate() {
            let (lo, _) = sym_eigenvalues(self.hess(*a));
            if !(lo > T::zero()) {
                return Err(Error::Hypothesis(format!(
                    "Hessian at a{} is not positive definite (smallest eigenvalue {:e})",
                    if k == 0 { "-" } else { "+" },
                    lo
                )));
            }
        }
        let floor = T::lit(1e-3);
        let top = T::lit(0.125);
        let samples = samples.max(4);
        // Radii where the Hessian is barely definite give a useless lower
        // constant, so half of the smallest well eigenvalue is kept in reserve.
        let reserve = self
            .wells
            .iter()
            .map(|a| sym_eigenvalues(self.hess(*a)).0)
            .fold(T::infinity(), T::min)
            * T::half();
        let accept = |delta: T| self.ball_bounds(delta, samples).filter(|(lo, _)| *lo >= reserve);

        let (delta, (lo, hi)) = if let Some(b) = accept(top) {
            (top, b)
        } else {
            let Some(mut good_bounds) = accept(floor) else {
                return Err(Error::Hypothesis(
                    "no neighbourhood radius >= 1e-3 satisfies the well bounds".into(),
                ));
            };
            let mut good = floor;
            let mut bad = top;
            for _ in 0..40 {
                let mid = T::half() * (good + bad);
                match accept(mid) {
                    Some(b) => {
                        good = mid;
                        good_bounds = b;
                    }
                    None => bad = mid,
                }
            }
            (good, good_bounds)
        };
        let (lambda_min_plus, _) = sym_eigenvalues(self.hess(self.a_plus()));
        Ok(WellConstants {
            w_lower: T::half() * lo,
            w_upper: T::half() * hi,
            delta_bar: delta,
            lambda_min_plus,
        })
    }

    /// Hessian eigenvalue extrema on the sampled `delta`-balls around both
    /// wells, or `None` if a bound fails there.
    fn ball_bounds(&self, delta: T, samples: usize) -> Option<(T, T)> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut pts = Vec::new();
        for a in self.wells {
            pts.push(a);
            for i in 1..=samples {
                let rad = delta * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
                for k in 0..(4 * samples) {
                    let ang = T::two() * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(4 * samples);
                    pts.push([a[0] + rad * ang.cos(), a[1] + rad * ang.sin()]);
                }
            }
        }
        for &p in &pts {
            let (l, h) = sym_eigenvalues(self.hess(p));
            lo = lo.min(l);
            hi = hi.max(h);
        }
        if !(lo > T::zero()) {
            return None;
        }
        let wl = T::half() * lo;
        let wu = T::half() * hi;
        let slack = T::lit(1e-10);
        for &p in &pts {
            let c = self.chi(p);
            let v = self.w(p);
            let c2 = c * c;
            if v < wl * c2 * (T::one() - slack) - slack * slack || v > wu * c2 * (T::one() + slack) + slack * slack {
                return None;
            }
            let g = self.grad(p);
            if (g[0] * g[0] + g[1] * g[1]).sqrt() > T::two() * wu * c * (T::one() + slack) + slack * slack {
                return None;
            }
        }
        Some((lo, hi))
    }
}

fn poly_partials<T: Real>(terms: &[PolyTerm<T>], s: T, t: T) -> (T, T) {
    let mut ds = T::zero();
    let mut dt = T::zero();
    for m in terms {
        if m.pow1 > 0 {
            ds = ds + m.coeff * T::from_u32(m.pow1).unwrap() * s.powi(m.pow1 as i32 - 1) * t.powi(m.pow2 as i32);
        }
        if m.pow2 > 0 {
            dt = dt + m.coeff * T::from_u32(m.pow2).unwrap() * s.powi(m.pow1 as i32) * t.powi(m.pow2 as i32 - 1);
        }
    }
    (ds, dt)
}

fn poly_second_partials<T: Real>(terms: &[PolyTerm<T>], s: T, t: T) -> (T, T, T) {
    let mut dss = T::zero();
    let mut dst = T::zero();
    let mut dtt = T::zero();
    for m in terms {
        let (i, j) = (m.pow1 as i32, m.pow2 as i32);
        let (fi, fj) = (T::from_i32(i).unwrap(), T::from_i32(j).unwrap());
        if i > 1 {
            dss = dss + m.coeff * fi * (fi - T::one()) * s.powi(i - 2) * t.powi(j);
        }
        if i > 0 && j > 0 {
            dst = dst + m.coeff * fi * fj * s.powi(i - 1) * t.powi(j - 1);
        }
        if j > 1 {
            dtt = dtt + m.coeff * fj * (fj - T::one()) * s.powi(i) * t.powi(j - 2);
        }
    }
    (dss, dst, dtt)
}

fn check_finite<T: Real>(xi: Point<T>) -> Result<()> {
    if xi.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite point ({}, {})", xi[0], xi[1])))
    }
}

#[inline]
fn dist<T: Real>(a: Point<T>, b: Point<T>) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Eigenvalues `(min, max)` of a symmetric 2x2 matrix.
pub fn sym_eigenvalues<T: Real>(m: Mat2<T>) -> (T, T) {
    let tr = m[0][0] + m[1][1];
    let d = m[0][0] - m[1][1];
    let disc = (d * d * T::lit(0.25) + m[0][1] * m[1][0]).sqrt();
    let mid = T::half() * tr;
    (mid - disc, mid + disc)
}

/// Well constants: `w_lower <= Hessian/2 <= w_upper` on the `delta_bar`-balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellConstants<T> {
    pub w_lower: T,
    pub w_upper: T,
    pub delta_bar: T,
    pub lambda_min_plus: T,
}

/// Outcome of one sampled hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisCheck {
    pub passed: bool,
    pub description: &'static str,
    pub failures: Vec<String>,
    /// Check-specific margin: smallest well eigenvalue for (W1), smallest
    /// `grad W . xi` for (W2), largest relative asymmetry for (W3).
    pub margin: f64,
}

impl HypothesisCheck {
    fn pass(description: &'static str) -> Self {
        Self { passed: true, description, failures: Vec::new(), margin: f64::INFINITY }
    }

    fn fail(&mut self, why: String) {
        self.passed = false;
        self.failures.push(why);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub w1: HypothesisCheck,
    pub w2: HypothesisCheck,
    pub w3: HypothesisCheck,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.w1.passed && self.w2.passed && self.w3.passed
    }
}
