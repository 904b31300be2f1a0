//! Acceptance criteria, one PASS/FAIL line each. Reference values come from
//! oracles written here, independently of the library's own formulas.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use layered_ac_core::assemble::{check_assembly, rotation_matrix, sector_index, ReflectionAssembly, SampleSpec};
use layered_ac_core::grid::SymGrid;
use layered_ac_core::one_dim::{
    certify_conditions, check_decay, equipartition_defect, find_heteroclinics, reduced_hessian, reduced_metric,
    spectral_report, HalfLineEnergy, HeteroclinicOptions, MinimizerSet, Profile1D, Seed,
};
use layered_ac_core::optimize::{check_gradient, smallest_eigenvalue, EigenOptions};
use layered_ac_core::potential::PotentialSpec;
use layered_ac_core::prism3d::{prepare_prism_inputs, solve_prism, CapCondition, Field3D, PrismGrid, PrismObjective, PrismOptions};
use layered_ac_core::strip2d::{
    check_2d_decay, m2l_table, phi2l, solve_hetero2d, Field2D, GapFit, M2LTable, RenormLevel, StripObjective,
    StripOptions, YBoundary,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

/// `W(xi) = (xi1^2 - 1)^2 + (xi2^2 - alpha (1 - xi1^2))^2 + gamma xi2^2`.
fn w_oracle(alpha: f64, gamma: f64, x1: f64, x2: f64) -> f64 {
    (x1 * x1 - 1.0).powi(2) + (x2 * x2 - alpha * (1.0 - x1 * x1)).powi(2) + gamma * x2 * x2
}

/// Energy of the straight connection along `xi2 = 0`, `int_{-1}^{1} sqrt(2 W(s, 0)) ds`,
/// by composite Simpson.
fn scalar_connection_energy(alpha: f64, gamma: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 / n as f64;
    let f = |s: f64| (2.0 * w_oracle(alpha, gamma, s, 0.0)).sqrt();
    let mut acc = f(-1.0) + f(1.0);
    for i in 1..n {
        let s = -1.0 + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(s);
    }
    acc * h / 3.0
}

/// Smaller eigenvalue of the finite-difference Hessian of `W` at `(1, 0)`.
fn well_lambda_min(alpha: f64, gamma: f64) -> f64 {
    let e = 1e-4;
    let w = |a: f64, b: f64| w_oracle(alpha, gamma, 1.0 + a, b);
    let hxx = (w(e, 0.0) - 2.0 * w(0.0, 0.0) + w(-e, 0.0)) / (e * e);
    let hyy = (w(0.0, e) - 2.0 * w(0.0, 0.0) + w(0.0, -e)) / (e * e);
    let hxy = (w(e, e) - w(e, -e) - w(-e, e) + w(-e, -e)) / (4.0 * e * e);
    let m = 0.5 * (hxx + hyy);
    m - (0.25 * (hxx - hyy).powi(2) + hxy * hxy).sqrt()
}

fn defaults() -> PotentialSpec<f64> {
    PotentialSpec::abg(2.0, 0.3)
}

fn default_minimizers(h: f64) -> MinimizerSet<f64> {
    let grid = SymGrid::with_spacing(10.0, h).unwrap();
    find_heteroclinics(&defaults(), grid, &Seed::standard(), &HeteroclinicOptions::default()).unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn scalar_oracle() -> Outcome {
    let p = PotentialSpec::abg(0.0, 1.0);
    let t = Instant::now();
    let grid = SymGrid::with_spacing(8.0, 0.005).unwrap();
    let ms = find_heteroclinics(&p, grid, &Seed::standard(), &HeteroclinicOptions::default()).unwrap();
    let dt = t.elapsed();
    let oracle = scalar_connection_energy(0.0, 1.0);
    let rel = (ms.m1 - oracle).abs() / oracle;
    let eq: f64 = ms.profiles.iter().map(|h| equipartition_defect(&p, &h.profile)).fold(0.0, f64::max);
    let ok = ms.profiles.len() == 1 && ms.profiles[0].scalar && rel < 5e-3 && secs(dt) < 10.0;
    (
        ok,
        format!(
            "{} minimizer(s), scalar = {}, m1 = {:.9} vs {:.9} (rel {:.2e}), equipartition {:.1e}, {:.2} s",
            ms.profiles.len(),
            ms.profiles.first().is_some_and(|h| h.scalar),
            ms.m1,
            oracle,
            rel,
            eq,
            secs(dt)
        ),
    )
}

fn default_pair() -> Outcome {
    let p = defaults();
    let t = Instant::now();
    let ms = default_minimizers(0.01);
    let sr = spectral_report(&p, &ms).unwrap();
    let cert = certify_conditions(&ms, &sr, 1e-6).unwrap();
    let dt = t.elapsed();
    let oracle = scalar_connection_energy(2.0, 0.3);
    let pair = ms.profiles.len() == 2 && ms.profiles[1].profile.sup_distance(&ms.profiles[0].profile.bar()) < 1e-6;
    let q20 = ms.profiles.iter().map(|h| h.q2_at_zero.abs()).fold(f64::INFINITY, f64::min);
    let ok = pair && q20 > 0.05 && ms.m1 < oracle && cert.star && cert.double_star && sr.omega_star > 0.0 && secs(dt) < 60.0;
    (
        ok,
        format!(
            "{} minimizers, bar pair = {pair}, |q2(0)| = {q20:.5}, m1 = {:.9} < {:.6}, (*) = {}, (**) = {}, omega* = {:.6}, {:.2} s",
            ms.profiles.len(),
            ms.m1,
            oracle,
            cert.star,
            cert.double_star,
            sr.omega_star,
            secs(dt)
        ),
    )
}

fn gradients() -> Outcome {
    let p = defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let seeds = 10;

    let g1 = SymGrid::with_spacing(4.0, 0.1).unwrap();
    let e1 = HalfLineEnergy::new(&p, g1);
    let base1 = Profile1D::reference(g1).to_reduced();
    let mut worst1: f64 = 0.0;
    for _ in 0..seeds {
        let x: Vec<f64> = base1.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
        worst1 = worst1.max(check_gradient(&e1, &x, 1e-5));
    }

    let (xg, yg) = (SymGrid::with_spacing(2.0, 0.2).unwrap(), SymGrid::with_spacing(1.0, 0.2).unwrap());
    let m1 = RenormLevel::new(3.3, xg);
    let mut worst2: f64 = 0.0;
    for _ in 0..seeds {
        let mut v = Field2D::from_fn(xg, yg, YBoundary::Neumann, |x: f64, y: f64| [x.tanh(), 0.5 * y / (1.0 + x * x)]);
        let obj = StripObjective::new(&p, &m1, &v).unwrap();
        let mut x = obj.pack(&v);
        x.iter_mut().for_each(|s| *s += rng.gen_range(-0.3..0.3));
        v = obj.unpack(&x, &v);
        worst2 = worst2.max(check_gradient(&obj, &obj.pack(&v), 1e-5));
    }

    let grid = PrismGrid { x_extent: 1.2, hx: 0.2, hy: 0.2, hz: 0.2 };
    let xg3 = grid.xgrid().unwrap();
    let m1_3 = RenormLevel::new(3.3, xg3);
    let ls: Vec<f64> = (1..=6).map(|n| 0.2 * n as f64).collect();
    let table = M2LTable {
        values: ls.iter().map(|l| 2.5 - 2.0 * (-1.5 * l).exp()).collect(),
        ls,
        fit: GapFit { m2: 2.5, rate: 1.5, prefactor: 2.0, r2: 1.0, points: 3 },
        scalar_excess: 4.0,
        solutions: Vec::new(),
    };
    let mut worst3: f64 = 0.0;
    for _ in 0..seeds {
        let u = Field3D::from_fn(2, 1.2, &grid, CapCondition::Neumann, |x: f64, y: f64, z: f64| {
            [x.tanh() * (1.0 + 0.1 * z), 0.4 * y / (1.0 + x * x)]
        })
        .unwrap();
        let obj = PrismObjective::new(&p, &m1_3, &table, &u).unwrap();
        let mut x = obj.pack(&u);
        x.iter_mut().for_each(|s| *s += rng.gen_range(-0.3..0.3));
        worst3 = worst3.max(check_gradient(&obj, &x, 1e-5));
    }
    let ok = worst1 < 1e-6 && worst2 < 1e-5 && worst3 < 1e-5;
    (ok, format!("{seeds} fields each: phi1 {worst1:.2e}, phi2L {worst2:.2e}, phi3 {worst3:.2e}"))
}

fn equipartition() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (p, h, x) in [(defaults(), 0.01, 10.0), (PotentialSpec::abg(0.0, 1.0), 0.005, 8.0)] {
        let grid = SymGrid::with_spacing(x, h).unwrap();
        let ms = find_heteroclinics(&p, grid, &Seed::standard(), &HeteroclinicOptions::default()).unwrap();
        for m in &ms.profiles {
            worst = worst.max(equipartition_defect(&p, &m.profile));
            count += 1;
        }
    }
    (worst < 1e-3, format!("worst defect {worst:.2e} over {count} minimizers"))
}

fn decay() -> Outcome {
    let p = defaults();
    let ms = default_minimizers(0.01);
    let wc = p.well_constants(2000).unwrap();
    let lambda = well_lambda_min(2.0, 0.3);
    let floor = 0.8 * lambda.sqrt();
    let rates: Vec<f64> = ms.profiles.iter().map(|h| check_decay(&h.profile, &wc).unwrap().rate).collect();
    let ok = !rates.is_empty() && rates.iter().all(|r| *r >= floor);
    (ok, format!("rates {rates:.4?} >= 0.8 sqrt({lambda:.6}) = {floor:.4}"))
}

fn strip_table() -> Outcome {
    let p = defaults();
    let ms = default_minimizers(0.05);
    let m1 = RenormLevel::of(&ms);
    let ls = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0];
    let t = Instant::now();
    let table = m2l_table(&p, &m1, &ms.primary().profile, &ls, 0.05, &StripOptions::default());
    let dt = t.elapsed();
    match table {
        Err(e) => (false, format!("table failed: {e}")),
        Ok(table) => {
            let mono = table.monotonicity_defect();
            let top = table.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ok = mono <= 1e-8
                && -table.fit.rate < 0.0
                && table.fit.r2 > 0.9
                && table.m2() >= top
                && table.solutions.iter().all(|s| s.converged)
                && secs(dt) < 600.0;
            (
                ok,
                format!(
                    "m2L = {:.10?}, decrease {mono:.1e}, slope {:.4}, R2 {:.5}, m2 = {:.10} >= {:.10}, {:.1} s",
                    table.values,
                    -table.fit.rate,
                    table.fit.r2,
                    table.m2(),
                    top,
                    secs(dt)
                ),
            )
        }
    }
}

fn renormalization_identity() -> Outcome {
    let p = defaults();
    let mut worst: f64 = 0.0;
    for h in [0.05, 0.01] {
        let ms = default_minimizers(h);
        let m1 = RenormLevel::of(&ms);
        for half_width in [0.5, 1.0, 3.0] {
            let yg = SymGrid::with_spacing(half_width, 0.05).unwrap();
            for m in &ms.profiles {
                let v = Field2D::constant_in_y(&m.profile, yg, YBoundary::Neumann);
                worst = worst.max(phi2l(&p, &m1, &v).unwrap().abs());
            }
        }
    }
    (worst <= 1e-10, format!("max |phi2L| = {worst:.2e}"))
}

fn hetero2d() -> Outcome {
    let p = defaults();
    let ms = default_minimizers(0.05);
    let m1 = RenormLevel::of(&ms);
    let q = &ms.primary().profile;
    let opts = StripOptions::default();
    let t = Instant::now();
    let a = solve_hetero2d(&p, &m1, q, 12.0, 0.05, None, &opts).unwrap();
    let b = solve_hetero2d(&p, &m1, q, 24.0, 0.05, None, &opts).unwrap();
    let dt = t.elapsed();
    let mid = a.field.row(a.field.ygrid.center()).l2_distance(q);
    let half = 0.5 * q.l2_distance(&q.bar());
    let fit = check_2d_decay(&a.field, q);
    let rate = fit.as_ref().map_or(f64::NAN, |f| f.rate);
    let change = (a.energy - b.energy).abs();
    let ok = a.converged && b.converged && mid >= half - 0.02 && rate > 0.0 && change < 1e-6;
    (
        ok,
        format!(
            "mid-line {mid:.5} >= {half:.5} - 0.02, slice decay rate {rate:.4}, E(12) = {:.10}, E(24) = {:.10}, change {change:.1e}, {:.1} s",
            a.energy,
            b.energy,
            secs(dt)
        ),
    )
}

fn prism_assembly() -> Outcome {
    let p = defaults();
    let grid = PrismGrid::default();
    let z = 12.0;
    let mut ok = true;
    let mut lines = Vec::new();
    for j in [2, 3] {
        let t = Instant::now();
        let inputs =
            prepare_prism_inputs(&p, j, z, &grid, &HeteroclinicOptions::default(), &StripOptions::default()).unwrap();
        let sol = solve_prism(&p, j, z, &grid, &PrismOptions::default(), &inputs).unwrap();
        let asm = ReflectionAssembly::new(&p, sol.field, inputs.q.clone()).unwrap();
        let report = check_assembly(&asm, &SampleSpec::default()).unwrap();
        let dt = t.elapsed();
        let (near, far) = (report.worst_at(0.3 * z).unwrap(), report.worst_at(0.8 * z).unwrap());
        let trend = (0..2 * j).all(|k| {
            report.midray(k, 0.8 * z).unwrap().sup_distance < report.midray(k, 0.3 * z).unwrap().sup_distance
        });
        let pass = sol.converged
            && report.periodicity_residual < 1e-10
            && report.face_jump < 5.0 * report.interpolation_error
            && trend
            && far < 0.1
            && secs(dt) < 1800.0;
        ok &= pass;
        lines.push(format!(
            "j={j}: phi3 {:.6} (start {:.6}), periodicity {:.1e}, face jump {:.1e} vs 5 x {:.1e}, mid-ray sup {near:.4} (0.3Z) -> {far:.4} (0.8Z), {:.1} s",
            sol.energy,
            sol.competitor,
            report.periodicity_residual,
            report.face_jump,
            report.interpolation_error,
            secs(dt)
        ));
    }
    (ok, lines.join("; "))
}

/// Smallest eigenvalue of `M^{-1/2} A M^{-1/2}` by a dense symmetric solve.
fn dense_smallest(a: &DMatrix<f64>, metric: &[f64]) -> f64 {
    let n = metric.len();
    let s = DMatrix::from_fn(n, n, |i, k| a[(i, k)] / (metric[i] * metric[k]).sqrt());
    s.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for n in [5, 40, 150, 400] {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = (&b + b.transpose()) * 0.5 + DMatrix::from_diagonal_element(n, n, 0.1 * n as f64);
        let metric: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let pair = smallest_eigenvalue(
            |v: &[f64], out: &mut [f64]| {
                for i in 0..n {
                    out[i] = (0..n).map(|k| a[(i, k)] * v[k]).sum();
                }
            },
            &metric,
            &EigenOptions { tol: 1e-11, ..EigenOptions::default() },
        )
        .unwrap();
        let dense = dense_smallest(&a, &metric);
        worst = worst.max((pair.value - dense).abs() / dense.abs().max(1e-12));
    }
    // The second variation at the computed minimizer, reduced dimension 399.
    let p = defaults();
    let ms = default_minimizers(0.05);
    let q = &ms.primary().profile;
    let hess = reduced_hessian(&p, q);
    let metric = reduced_metric(q.grid);
    let n = metric.len();
    let a = DMatrix::from_fn(n, n, |i, k| hess.get(i, k));
    let sr = spectral_report(&p, &ms).unwrap();
    let dense = dense_smallest(&a, &metric);
    let sv = (sr.entries[0].omega_star - dense).abs() / dense.abs();
    worst = worst.max(sv);

    let mut tiling_failures = 0;
    let points = 10_000;
    for i in 0..points {
        let j = 2 + i % 5;
        let (y, z): (f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let k = sector_index(y, z, j);
        // Rotating back by k pi / j must land in the wedge around +z.
        let back = z.atan2(y) + k as f64 * PI / j as f64;
        let off = (back - PI / 2.0 + PI).rem_euclid(2.0 * PI) - PI;
        let inside = off.abs() <= PI / (2.0 * j as f64) + 1e-12;
        let a = rotation_matrix::<f64>(j).unwrap();
        let (ry, rz) = (a[1][1] * y + a[1][2] * z, a[2][1] * y + a[2][2] * z);
        let on_face = (off.abs() - PI / (2.0 * j as f64)).abs() < 1e-9;
        let advances = on_face || sector_index(ry, rz, j) == (k + 1) % (2 * j);
        if !(k < 2 * j && inside && advances) {
            tiling_failures += 1;
        }
    }
    let ok = worst < 1e-6 && tiling_failures == 0;
    (
        ok,
        format!(
            "eigenvalue rel. error {worst:.1e} (second variation, n = {n}: {sv:.1e}); tiling failures {tiling_failures}/{points}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 scalar oracle", scalar_oracle),
        ("2 default minimal pair", default_pair),
        ("3 gradient verification", gradients),
        ("4 equipartition", equipartition),
        ("5 tail decay", decay),
        ("6 m2L table", strip_table),
        ("7 renormalization identity", renormalization_identity),
        ("8 2D heteroclinic", hetero2d),
        ("9 prism and assembly", prism_assembly),
        ("10 oracle equivalence", oracles),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!("{} criterion {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
