//! The pipeline stages. Each reads its upstream data from the output
//! directory, writes its own files and records itself in the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use layered_ac_core::assemble::{check_assembly, export_field3d, ReflectionAssembly, SampleBox, SampleSpec};
use layered_ac_core::grid::SymGrid;
use layered_ac_core::one_dim::{
    certify_conditions, check_decay, equipartition_defect, find_heteroclinics, quadratic_growth_probe, relax,
    spectral_report, Heteroclinic, HeteroclinicOptions, MinimizerSet, Profile1D, Seed,
};
use layered_ac_core::optimize::MinimizeOptions;
use layered_ac_core::potential::PotentialSpec;
use layered_ac_core::prism3d::{
    check_far_field, gradient_bound, prepare_prism_inputs_for, slice_diagnostics, solve_prism, PrismGrid,
    PrismOptions,
};
use layered_ac_core::strip2d::{check_2d_decay, m2l_table, solve_hetero2d, solve_pl2, RenormLevel, StripOptions};

use crate::artifacts::{
    f, flag, read_field3d, read_profiles, write_csv, write_field2d, write_field3d, write_profiles, Table,
};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::StageManifest;
use crate::svg::{Plot, Series};

/// What a stage body hands back to [`Pipeline::run`].
struct Outcome {
    outputs: Vec<PathBuf>,
    summary: BTreeMap<String, f64>,
    /// A failed check; the stage is still recorded, marked as not ok.
    failure: Option<CliError>,
}

impl Outcome {
    fn new() -> Self {
        Self { outputs: Vec::new(), summary: BTreeMap::new(), failure: None }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.summary.insert(key.to_string(), v);
    }

    fn file(&mut self, p: PathBuf) -> PathBuf {
        self.outputs.push(p.clone());
        p
    }
}

fn b(v: bool) -> f64 {
    if v {
        1.0
    } else {
        0.0
    }
}

type Step = fn(&mut Pipeline) -> Result<(), CliError>;

pub struct Pipeline {
    pub cfg: RunConfig,
    pub dir: PathBuf,
    pub manifest: StageManifest,
    potential: PotentialSpec<f64>,
    /// Half-widths solved by the `strip` command; empty means the largest
    /// configured one.
    pub strip_ls: Vec<f64>,
}

impl Pipeline {
    pub fn open(cfg: RunConfig) -> Result<Self, CliError> {
        let dir = cfg.out_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let manifest = StageManifest::load(&dir)?;
        let potential = cfg.potential.spec();
        Ok(Self { cfg, dir, manifest, potential, strip_ls: Vec::new() })
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    fn run(&mut self, stage: &str, body: fn(&Self) -> Result<Outcome, CliError>) -> Result<(), CliError> {
        self.manifest.require_upstream(stage, &self.cfg, &self.dir)?;
        let input_hash = self.manifest.input_hash(stage, &self.cfg)?;
        let t = Instant::now();
        let out = body(self)?;
        let elapsed = t.elapsed().as_secs_f64();
        self.manifest.record(
            stage,
            input_hash,
            out.failure.is_none(),
            &out.outputs,
            &self.dir,
            out.summary.clone(),
            elapsed,
        )?;
        self.manifest.save(&self.dir)?;
        let scalars: Vec<String> = out.summary.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        println!("[{stage}] {:.2} s  {}", elapsed, scalars.join(" "));
        match out.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn hypotheses(&mut self) -> Result<(), CliError> {
        self.run("hypotheses", stage_hypotheses)
    }

    pub fn heteroclinic(&mut self) -> Result<(), CliError> {
        self.run("heteroclinic", stage_heteroclinic)
    }

    pub fn spectrum(&mut self) -> Result<(), CliError> {
        self.run("spectrum", stage_spectrum)
    }

    pub fn strip(&mut self) -> Result<(), CliError> {
        self.run("strip", stage_strip)
    }

    pub fn table(&mut self) -> Result<(), CliError> {
        self.run("m2l-table", stage_table)
    }

    pub fn hetero2d(&mut self) -> Result<(), CliError> {
        self.run("hetero2d", stage_hetero2d)
    }

    pub fn prism(&mut self) -> Result<(), CliError> {
        self.run("prism", stage_prism)
    }

    pub fn assemble(&mut self) -> Result<(), CliError> {
        self.run("assemble", stage_assemble)
    }

    pub fn plot(&mut self) -> Result<(), CliError> {
        self.run("plot", stage_plot)
    }

    /// Hypotheses, minimizers and the (*) / (**) certificate.
    pub fn check(&mut self) -> Result<(), CliError> {
        self.hypotheses()?;
        self.heteroclinic()?;
        self.spectrum()
    }

    pub fn run_all(&mut self) -> Result<(), CliError> {
        let s = self.cfg.stages.clone();
        let steps: [(bool, Step); 8] = [
            (s.hypotheses, Self::hypotheses),
            (s.heteroclinic, Self::heteroclinic),
            (s.spectrum, Self::spectrum),
            (s.table, Self::table),
            (s.hetero2d, Self::hetero2d),
            (s.prism, Self::prism),
            (s.assemble, Self::assemble),
            (s.plot, Self::plot),
        ];
        for (enabled, step) in steps {
            if enabled {
                step(self)?;
            }
        }
        Ok(())
    }

    fn hetero_options(&self) -> HeteroclinicOptions<f64> {
        let d = HeteroclinicOptions::default();
        HeteroclinicOptions {
            minimize: MinimizeOptions {
                grad_tol: self.cfg.heteroclinic.grad_tol,
                max_iterations: self.cfg.heteroclinic.max_iterations,
                ..d.minimize
            },
            energy_tol: self.cfg.heteroclinic.energy_tol,
            ..d
        }
    }

    fn strip_options(&self) -> StripOptions<f64> {
        let d = StripOptions::default();
        StripOptions {
            minimize: MinimizeOptions {
                grad_tol: self.cfg.strip.grad_tol,
                max_iterations: self.cfg.strip.max_iterations,
                ..d.minimize
            },
            ..d
        }
    }

    fn load_minimizers(&self) -> Result<MinimizerSet<f64>, CliError> {
        let missing = || CliError::Dependency("heteroclinic outputs are not in the manifest".into());
        let profiles = read_profiles(&self.manifest.output("heteroclinic", "profiles.csv", &self.dir).ok_or_else(missing)?)?;
        let meta = Table::read(&self.manifest.output("heteroclinic", "minimizers.csv", &self.dir).ok_or_else(missing)?)?;
        if meta.rows.len() != profiles.len() {
            return Err(CliError::Io("profiles.csv and minimizers.csv disagree on the number of minimizers".into()));
        }
        let col = |name: &str| meta.column(name);
        let (ce, cg, cs, cq, csign, cseed) =
            (col("energy")?, col("grad_norm")?, col("scalar")?, col("q2_at_zero")?, col("sign_condition")?, col("seed")?);
        let profiles = profiles
            .into_iter()
            .enumerate()
            .map(|(r, profile)| {
                Ok(Heteroclinic {
                    profile,
                    energy: meta.num(r, ce)?,
                    grad_norm: meta.num(r, cg)?,
                    scalar: meta.rows[r][cs] == "true",
                    q2_at_zero: meta.num(r, cq)?,
                    sign_condition: meta.rows[r][csign] == "true",
                    seed: meta.rows[r][cseed].clone(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(MinimizerSet {
            profiles,
            m1: self.manifest.summary("heteroclinic", "m1")?,
            separation: self.manifest.summary("heteroclinic", "separation").ok(),
            discarded: Vec::new(),
            energy_tol: self.cfg.heteroclinic.energy_tol,
        })
    }

    /// `m1` and the minimizers relaxed again on the strip's x-grid, in the
    /// order of the heteroclinic stage.
    fn strip_inputs(&self) -> Result<(RenormLevel<f64>, Vec<Profile1D<f64>>), CliError> {
        let ms = self.load_minimizers()?;
        let xgrid = SymGrid::with_spacing(self.cfg.strip.x_extent, self.cfg.strip.hx)?;
        let opts = self.hetero_options();
        let mut energies = Vec::new();
        let mut profiles = Vec::new();
        for h in &ms.profiles {
            let r = relax(&self.potential, &h.profile.resample(xgrid), &opts.minimize)?;
            if !r.converged {
                return Err(CliError::Solver(format!(
                    "minimizer from seed {} did not converge on the strip grid (gradient {:.3e})",
                    h.seed, r.grad_norm
                )));
            }
            energies.push(r.energy);
            profiles.push(r.profile);
        }
        let m1 = energies.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((RenormLevel::new(m1, xgrid), profiles))
    }

    fn selected_q(&self, profiles: &[Profile1D<f64>]) -> Result<Profile1D<f64>, CliError> {
        profiles.get(self.cfg.q_index).cloned().ok_or_else(|| {
            CliError::Config(format!("q index {} out of range ({} minimizers)", self.cfg.q_index, profiles.len()))
        })
    }
}

fn stage_hypotheses(pl: &Pipeline) -> Result<Outcome, CliError> {
    let rep = pl.potential.validate_hypotheses(101);
    let mut out = Outcome::new();
    let checks = [("W1", &rep.w1), ("W2", &rep.w2), ("W3", &rep.w3)];
    let path = out.file(pl.path("hypotheses/hypotheses.csv"));
    write_csv(
        &path,
        &["check", "passed", "margin", "description", "failures"],
        checks.iter().map(|(name, c)| {
            vec![
                name.to_string(),
                flag(c.passed),
                f(c.margin),
                c.description.to_string(),
                c.failures.iter().take(5).cloned().collect::<Vec<_>>().join("; "),
            ]
        }),
    )?;
    for (name, c) in checks {
        out.set(&format!("{name}_passed"), b(c.passed));
    }
    if !rep.all_passed() {
        let failed: Vec<String> = checks
            .iter()
            .filter(|(_, c)| !c.passed)
            .map(|(n, c)| format!("({n}) fails: {}", c.failures.first().cloned().unwrap_or_default()))
            .collect();
        out.failure = Some(CliError::Certificate(failed.join("; ")));
    }
    Ok(out)
}

fn stage_heteroclinic(pl: &Pipeline) -> Result<Outcome, CliError> {
    let c = &pl.cfg.heteroclinic;
    let grid = SymGrid::with_spacing(c.x_extent, c.h)?;
    let p = &pl.potential;
    let ms = find_heteroclinics(p, grid, &Seed::standard(), &pl.hetero_options())?;
    let wc = p.well_constants(200)?;
    let mut out = Outcome::new();
    let profiles: Vec<&Profile1D<f64>> = ms.profiles.iter().map(|h| &h.profile).collect();
    write_profiles(&out.file(pl.path("heteroclinic/profiles.csv")), &profiles, ["q1", "q2"])?;

    let mut worst_eq: f64 = 0.0;
    let mut slowest = f64::INFINITY;
    let mut rows = Vec::new();
    for (i, h) in ms.profiles.iter().enumerate() {
        let eq = equipartition_defect(p, &h.profile);
        worst_eq = worst_eq.max(eq);
        let (rate, r2) = match check_decay(&h.profile, &wc) {
            Ok(d) => (d.rate, d.r2),
            Err(_) => (f64::NAN, f64::NAN),
        };
        if rate.is_finite() {
            slowest = slowest.min(rate);
        }
        rows.push(vec![
            i.to_string(),
            f(h.energy),
            f(h.grad_norm),
            flag(h.scalar),
            f(h.q2_at_zero),
            flag(h.sign_condition),
            h.seed.clone(),
            f(eq),
            f(rate),
            f(r2),
        ]);
    }
    write_csv(
        &out.file(pl.path("heteroclinic/minimizers.csv")),
        &[
            "index",
            "energy",
            "grad_norm",
            "scalar",
            "q2_at_zero",
            "sign_condition",
            "seed",
            "equipartition",
            "decay_rate",
            "decay_r2",
        ],
        rows,
    )?;
    out.set("m1", ms.m1);
    out.set("minimizers", ms.profiles.len() as f64);
    out.set("discarded", ms.discarded.len() as f64);
    if let Some(s) = ms.separation {
        out.set("separation", s);
    }
    out.set("q2_at_zero", ms.primary().q2_at_zero);
    out.set("equipartition", worst_eq);
    if slowest.is_finite() {
        out.set("decay_rate", slowest);
    } else {
        eprintln!("warning: no tail decay fit succeeded; the x-window may be too short");
    }
    out.set("lambda_min_plus", wc.lambda_min_plus);
    Ok(out)
}

fn stage_spectrum(pl: &Pipeline) -> Result<Outcome, CliError> {
    let ms = pl.load_minimizers()?;
    let p = &pl.potential;
    let sr = spectral_report(p, &ms)?;
    let tol = pl.cfg.spectrum.tol;
    let cert = certify_conditions(&ms, &sr, tol)?;
    let growth = quadratic_growth_probe(p, &ms, sr.omega_star, pl.cfg.spectrum.probes, pl.cfg.seed, tol);
    let mut out = Outcome::new();
    write_csv(
        &out.file(pl.path("spectrum/eigen.csv")),
        &["index", "omega", "residual", "iterations"],
        sr.entries.iter().enumerate().map(|(i, e)| {
            vec![i.to_string(), f(e.omega_star), f(e.residual), e.iterations.to_string()]
        }),
    )?;
    let vectors: Vec<&Profile1D<f64>> = sr.entries.iter().map(|e| &e.eigenvector).collect();
    write_profiles(&out.file(pl.path("spectrum/eigenvectors.csv")), &vectors, ["e1", "e2"])?;
    out.set("omega_star", sr.omega_star);
    out.set("star", b(cert.star));
    out.set("star_margin", cert.star_margin);
    out.set("double_star", b(cert.double_star));
    out.set("growth_violations", growth.violations as f64);
    out.set("growth_min_ratio", growth.min_ratio);
    let mut failures = Vec::new();
    if !cert.star {
        failures.push(format!(
            "(*) fails: a minimal heteroclinic has |q2(0)| = {:.3e} <= {tol:.1e}, so the minimal set is not a symmetric pair",
            cert.star_margin
        ));
    }
    if !cert.double_star {
        failures.push(format!("(**) fails: smallest second-variation eigenvalue {:.3e} <= {tol:.1e}", cert.omega_star));
    }
    if !failures.is_empty() {
        out.failure = Some(CliError::Certificate(failures.join("; ")));
    }
    Ok(out)
}

fn stage_strip(pl: &Pipeline) -> Result<Outcome, CliError> {
    let (m1, profiles) = pl.strip_inputs()?;
    let q = pl.selected_q(&profiles)?;
    let ls = if pl.strip_ls.is_empty() {
        vec![*pl.cfg.strip.ls.last().expect("validated nonempty")]
    } else {
        pl.strip_ls.clone()
    };
    let opts = pl.strip_options();
    let mut out = Outcome::new();
    let mut rows = Vec::new();
    let mut warm = None;
    for &l in &ls {
        let s = solve_pl2(&pl.potential, &m1, &q, l, pl.cfg.strip.hy, warm.as_ref(), &opts)?;
        if !s.converged {
            return Err(CliError::Solver(format!("strip L = {l} did not converge (gradient {:.3e})", s.grad_norm)));
        }
        write_field2d(&out.file(pl.path(&format!("strip/field_L{l}.csv"))), &s.field)?;
        let mid = s.field.row(s.field.ygrid.center());
        rows.push(vec![
            f(l),
            f(s.energy),
            f(s.grad_norm),
            s.start.clone(),
            f(mid.l2_distance(&q)),
            f(mid.l2_distance(&q.bar())),
        ]);
        out.set(&format!("m2L_{l}"), s.energy);
        warm = Some(s.field);
    }
    write_csv(
        &out.file(pl.path("strip/strip.csv")),
        &["L", "m2L", "grad_norm", "start", "mid_to_q", "mid_to_qbar"],
        rows,
    )?;
    out.set("m1", m1.value);
    Ok(out)
}

fn stage_table(pl: &Pipeline) -> Result<Outcome, CliError> {
    let (m1, profiles) = pl.strip_inputs()?;
    let q = pl.selected_q(&profiles)?;
    let c = &pl.cfg.strip;
    let table = m2l_table(&pl.potential, &m1, &q, &c.ls, c.hy, &pl.strip_options())?;
    if let Some(s) = table.solutions.iter().find(|s| !s.converged) {
        return Err(CliError::Solver(format!("a strip solve stopped at gradient {:.3e}", s.grad_norm)));
    }
    let fit = table.fit;
    let mut out = Outcome::new();
    write_csv(
        &out.file(pl.path("m2l-table/table.csv")),
        &["L", "m2L", "gap", "fit", "grad_norm"],
        table.ls.iter().zip(&table.values).zip(&table.solutions).map(|((&l, &m), s)| {
            vec![f(l), f(m), f(fit.m2 - m), f(fit.m2 - fit.prefactor * (-fit.rate * l).exp()), f(s.grad_norm)]
        }),
    )?;
    out.set("m1", m1.value);
    out.set("m2", fit.m2);
    out.set("rate", fit.rate);
    out.set("prefactor", fit.prefactor);
    out.set("r2", fit.r2);
    out.set("fit_points", fit.points as f64);
    out.set("monotonicity_defect", table.monotonicity_defect());
    out.set("scalar_excess", table.scalar_excess);
    Ok(out)
}

fn stage_hetero2d(pl: &Pipeline) -> Result<Outcome, CliError> {
    let (m1, profiles) = pl.strip_inputs()?;
    let q = pl.selected_q(&profiles)?;
    let c = &pl.cfg.strip;
    let s = solve_hetero2d(&pl.potential, &m1, &q, c.y_extent, c.hy, None, &pl.strip_options())?;
    if !s.converged {
        return Err(CliError::Solver(format!("2D heteroclinic did not converge (gradient {:.3e})", s.grad_norm)));
    }
    let mut out = Outcome::new();
    write_field2d(&out.file(pl.path("hetero2d/field.csv")), &s.field)?;
    let l2 = s.field.slice_distances(&q);
    let sup = s.field.slice_sup_distances(&q);
    write_csv(
        &out.file(pl.path("hetero2d/slices.csv")),
        &["y", "l2_to_q", "sup_to_q"],
        l2.iter().zip(&sup).map(|(&(y, a), &(_, b))| vec![f(y), f(a), f(b)]),
    )?;
    let mid = s.field.row(s.field.ygrid.center()).l2_distance(&q);
    let half = 0.5 * q.l2_distance(&q.bar());
    out.set("energy", s.energy);
    out.set("grad_norm", s.grad_norm);
    out.set("midline_distance", mid);
    out.set("half_separation", half);
    out.set("obstruction_holds", b(mid >= half - 0.02));
    match check_2d_decay(&s.field, &q) {
        Ok(d) => {
            out.set("decay_rate", d.rate);
            out.set("decay_r2", d.r2);
        }
        Err(e) => eprintln!("warning: slice decay fit failed: {e}"),
    }
    Ok(out)
}

fn stage_prism(pl: &Pipeline) -> Result<Outcome, CliError> {
    let c = &pl.cfg.prism;
    let p = &pl.potential;
    let grid = PrismGrid { x_extent: c.x_extent, hx: c.hx, hy: c.hy, hz: c.hz };
    let strip = pl.strip_options();
    let inputs = prepare_prism_inputs_for(p, c.j, c.z_extent, &grid, &pl.hetero_options(), &strip, pl.cfg.q_index)?;
    let d = PrismOptions::default();
    let opts = PrismOptions {
        minimize: MinimizeOptions { grad_tol: c.grad_tol, max_iterations: c.max_iterations, ..d.minimize },
        cap: c.cap,
        ..d
    };
    let sol = solve_prism(p, c.j, c.z_extent, &grid, &opts, &inputs)?;
    if !sol.converged {
        return Err(CliError::Solver(format!(
            "prism solve stopped after {} iterations at gradient {:.3e}",
            sol.iterations, sol.grad_norm
        )));
    }
    let slices = slice_diagnostics(p, &inputs, &sol.field)?;
    let bound = gradient_bound(p, &inputs, &sol.field, 0.5 * c.z_extent)?;
    let mut out = Outcome::new();
    write_field3d(&out.file(pl.path("prism/field.csv")), &sol.field)?;
    write_profiles(&out.file(pl.path("prism/q.csv")), &[&inputs.q], ["q1", "q2"])?;
    write_csv(
        &out.file(pl.path("prism/slices.csv")),
        &["z", "half_width", "l2_to_vq", "l2_to_periodic", "sup_to_vq", "energy_gap"],
        slices.iter().map(|s| {
            vec![f(s.z), f(s.half_width), f(s.l2_to_vq), f(s.l2_to_periodic), f(s.sup_to_vq), f(s.energy_gap)]
        }),
    )?;
    write_csv(
        &out.file(pl.path("prism/table.csv")),
        &["L", "m2L"],
        inputs.table.ls.iter().zip(&inputs.table.values).map(|(&l, &m)| vec![f(l), f(m)]),
    )?;
    out.set("phi3", sol.energy);
    out.set("competitor", sol.competitor);
    out.set("grad_norm", sol.grad_norm);
    out.set("iterations", sol.iterations as f64);
    out.set("active_nodes", sol.field.active_nodes() as f64);
    out.set("m1_grid", inputs.m1.value);
    out.set("m2_grid", inputs.table.m2());
    out.set("m2_reference", pl.manifest.summary("m2l-table", "m2")?);
    out.set("min_slice_gap", slices.iter().map(|s| s.energy_gap).fold(f64::INFINITY, f64::min));
    out.set("gradient_lhs", bound.lhs);
    out.set("gradient_rhs", bound.rhs);
    match check_far_field(p, &sol.field) {
        Ok(ff) => {
            out.set("far_field_rate", ff.rate);
            out.set("far_field_monotone", b(ff.monotone));
        }
        Err(e) => eprintln!("warning: far-field fit failed: {e}"),
    }
    Ok(out)
}

fn stage_assemble(pl: &Pipeline) -> Result<Outcome, CliError> {
    let missing = || CliError::Dependency("prism outputs are not in the manifest".into());
    let field = read_field3d(&pl.manifest.output("prism", "field.csv", &pl.dir).ok_or_else(missing)?, &pl.cfg.prism)?;
    let q = read_profiles(&pl.manifest.output("prism", "q.csv", &pl.dir).ok_or_else(missing)?)?
        .pop()
        .ok_or_else(|| CliError::Io("prism/q.csv holds no profile".into()))?;
    let asm = ReflectionAssembly::new(&pl.potential, field, q)?;
    let spec = SampleSpec { samples: pl.cfg.assemble.samples, seed: pl.cfg.seed, ..SampleSpec::default() };
    let report = check_assembly(&asm, &spec)?;
    let mut out = Outcome::new();
    let vtk = out.file(pl.path("assemble/field.vtk"));
    fs::create_dir_all(pl.path("assemble"))?;
    {
        let mut w = BufWriter::new(fs::File::create(&vtk)?);
        export_field3d(&asm, &SampleBox::covering(&asm, pl.cfg.assemble.resolution), &mut w)?;
        w.flush()?;
    }
    write_csv(
        &out.file(pl.path("assemble/midrays.csv")),
        &["k", "rho", "sup_distance"],
        report.midrays.iter().map(|m| vec![m.k.to_string(), f(m.rho), f(m.sup_distance)]),
    )?;
    let z = asm.z_extent();
    out.set("periodicity_residual", report.periodicity_residual);
    out.set("face_jump", report.face_jump);
    out.set("interpolation_error", report.interpolation_error);
    if let (Some(near), Some(far)) = (report.worst_at(0.3 * z), report.worst_at(0.8 * z)) {
        out.set("midray_sup_0.3Z", near);
        out.set("midray_sup_0.8Z", far);
    }
    Ok(out)
}

fn points(t: &Table, x: &str, y: &str) -> Result<Vec<(f64, f64)>, CliError> {
    Ok(t.numbers(x)?.into_iter().zip(t.numbers(y)?).collect())
}

fn save_svg(out: &mut Outcome, path: PathBuf, plot: &Plot) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, plot.render())?;
    out.file(path);
    Ok(())
}

fn stage_plot(pl: &Pipeline) -> Result<Outcome, CliError> {
    let m = &pl.manifest;
    let dir = &pl.dir;
    let mut out = Outcome::new();

    if let Some(path) = m.output("heteroclinic", "profiles.csv", dir) {
        let t = Table::read(&path)?;
        let mut plot = Plot::new("Minimal heteroclinics", "x", "q");
        for k in 0..(t.header.len() - 1) / 2 {
            plot.push(Series::line(format!("q1 #{k}"), points(&t, "x", &format!("q1_{k}"))?));
            plot.push(Series::line(format!("q2 #{k}"), points(&t, "x", &format!("q2_{k}"))?).dashed());
        }
        save_svg(&mut out, pl.path("plots/profiles.svg"), &plot)?;
    }

    match m.output("m2l-table", "table.csv", dir).map(|p| Table::read(&p)).transpose()? {
        Some(t) if !t.rows.is_empty() => {
            let rate = m.summary("m2l-table", "rate")?;
            let mut plot = Plot::new(format!("Strip minima, fitted gap slope {:.4}", -rate), "L", "m2 - m2L").log_y();
            plot.push(Series::line("table", points(&t, "L", "gap")?).with_markers());
            let m2 = m.summary("m2l-table", "m2")?;
            let fit: Vec<(f64, f64)> =
                t.numbers("L")?.into_iter().zip(t.numbers("fit")?).map(|(l, v)| (l, m2 - v)).collect();
            plot.push(Series::line("exponential fit", fit).dashed());
            save_svg(&mut out, pl.path("plots/m2l.svg"), &plot)?;
            out.set("fit_slope", -rate);
        }
        _ => eprintln!("warning: no m2L table in {}, skipping its plot", dir.display()),
    }

    let mut decay = Plot::new("Slice distance decay", "y or z", "L2 distance").log_y();
    if let Some(path) = m.output("hetero2d", "slices.csv", dir) {
        decay.push(Series::line("2D heteroclinic to q (y)", points(&Table::read(&path)?, "y", "l2_to_q")?));
    }
    if let Some(path) = m.output("prism", "slices.csv", dir) {
        decay.push(Series::line("prism slice to v_q (z)", points(&Table::read(&path)?, "z", "l2_to_vq")?).dashed());
    }
    if !decay.series.is_empty() {
        save_svg(&mut out, pl.path("plots/slice_decay.svg"), &decay)?;
    }

    if let Some(path) = m.output("assemble", "midrays.csv", dir) {
        let t = Table::read(&path)?;
        let mut worst: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for (rho, s) in points(&t, "rho", "sup_distance")? {
            let e = worst.entry(rho.to_bits()).or_insert((rho, s));
            e.1 = e.1.max(s);
        }
        let mut series: Vec<(f64, f64)> = worst.into_values().collect();
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut plot = Plot::new("Mid-ray asymptotics", "rho", "sup distance to q / q-bar").log_y();
        plot.push(Series::line("worst mid-ray", series).with_markers());
        save_svg(&mut out, pl.path("plots/midrays.svg"), &plot)?;
    }
    out.set("plots", out.outputs.len() as f64);
    Ok(out)
}

