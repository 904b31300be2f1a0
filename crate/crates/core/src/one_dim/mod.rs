//! One-dimensional heteroclinic connections between the wells.
//!
//! Profiles live on `[-X, X]`, are clamped to `a-` and `a+` at the ends and
//! carry the symmetry `q(-x) = (-q1(x), q2(x))`. Minimization runs on the
//! half-line with `q1(0) = 0` pinned, so the symmetry is exact.

mod diagnostics;
mod energy;
mod heteroclinic;
mod profile;
mod spectral;

pub use diagnostics::{
    check_decay, equipartition_defect, growth_probe_single, quadratic_growth_probe, DecayFit, GrowthProbe,
    GrowthReport, ProbeOutcome,
};
pub use energy::{grad_phi1, phi1, phi1_parts, reduced_hessian, reduced_metric, HalfLineEnergy};
pub use heteroclinic::{
    find_heteroclinics, relax, Discarded, Heteroclinic, HeteroclinicOptions, MinimizerSet, RelaxOutcome, Seed,
};
pub use profile::{symmetrize1d, Profile1D};
pub use spectral::{
    certify_conditions, second_variation_min, spectral_report, Certificate, SpectralEntry, SpectralReport,
};
