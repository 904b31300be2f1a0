use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assembly::ReflectionAssembly;
use crate::error::Result;
use crate::scalar::Real;

/// Which samples [`check_assembly`] draws.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec<T> {
    pub samples: usize,
    pub seed: u64,
    /// Radii of the mid-ray comparisons, as fractions of the prism height.
    pub radii: Vec<T>,
}

impl<T: Real> Default for SampleSpec<T> {
    fn default() -> Self {
        Self { samples: 2000, seed: 1, radii: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9].map(T::lit).to_vec() }
    }
}

/// Sup distance of the profile `x -> v(x, rho, pi/2 + (pi/j)(1/2 + k))` to
/// its limit, `q` for odd `k` and `q-bar` for even `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MidRay<T> {
    pub k: usize,
    pub rho: T,
    pub sup_distance: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyReport<T> {
    /// Largest `|v(x, rho, phi + 2 pi / j) - v(x, rho, phi)|` over the samples.
    pub periodicity_residual: T,
    /// Largest difference between the two sector evaluations on a face.
    pub face_jump: T,
    pub interpolation_error: T,
    pub midrays: Vec<MidRay<T>>,
}

impl<T: Real> AssemblyReport<T> {
    pub fn midray(&self, k: usize, rho: T) -> Option<&MidRay<T>> {
        self.midrays.iter().find(|m| m.k == k && (m.rho - rho).abs() <= T::lit(1e-12) * rho.abs().max(T::one()))
    }

    /// Largest sup distance over all mid-rays at radius `rho`.
    pub fn worst_at(&self, rho: T) -> Option<T> {
        let d: Vec<T> = self
            .midrays
            .iter()
            .filter(|m| (m.rho - rho).abs() <= T::lit(1e-12) * rho.abs().max(T::one()))
            .map(|m| m.sup_distance)
            .collect();
        d.into_iter().reduce(T::max)
    }
}

fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])).sqrt()
}

/// Samples the assembled field for the conclusions of the construction:
/// rotational periodicity, continuity across sector faces, and convergence
/// along the mid-rays to `q` or `q-bar`.
pub fn check_assembly<T: Real>(asm: &ReflectionAssembly<T>, spec: &SampleSpec<T>) -> Result<AssemblyReport<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pi = std::f64::consts::PI;
    let alpha = pi / asm.j as f64;
    let x_max = asm.x_extent().to_f64_lossy();
    let rho_max = asm.z_extent().to_f64_lossy();
    let mut periodicity_residual = T::zero();
    let mut face_jump = T::zero();
    for _ in 0..spec.samples {
        let x = T::lit(rng.gen_range(-x_max..x_max));
        let rho = T::lit(rng.gen_range(0.0..rho_max));
        let phi = rng.gen_range(0.0..2.0 * pi);
        let a = asm.evaluate_polar(x, rho, T::lit(phi))?;
        let b = asm.evaluate_polar(x, rho, T::lit(phi + 2.0 * alpha))?;
        periodicity_residual = periodicity_residual.max(dist(a, b));

        let k = rng.gen_range(0..2 * asm.j);
        let face = pi / 2.0 - (k as f64 + 0.5) * alpha;
        let (y, z) = (rho * T::lit(face.cos()), rho * T::lit(face.sin()));
        let lo = asm.evaluate_in_sector(k, x, y, z)?;
        let hi = asm.evaluate_in_sector(k + 1, x, y, z)?;
        face_jump = face_jump.max(dist(lo, hi));
    }
    let mut midrays = Vec::new();
    for k in 0..2 * asm.j {
        let target = if k % 2 == 1 { &asm.q } else { &asm.q_bar };
        let phi = T::lit(pi / 2.0 + alpha * (0.5 + k as f64));
        for &frac in &spec.radii {
            let rho = frac * asm.z_extent();
            let mut sup = T::zero();
            for ix in 0..target.n() {
                let v = asm.evaluate_polar(target.x(ix), rho, phi)?;
                sup = sup.max(dist(v, target.values[ix]));
            }
            midrays.push(MidRay { k, rho, sup_distance: sup });
        }
    }
    Ok(AssemblyReport { periodicity_residual, face_jump, interpolation_error: asm.interpolation_error(), midrays })
}
