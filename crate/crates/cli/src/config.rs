//! Plain-text run configuration: one `key = value` per line, keys grouped by
//! dotted prefixes (`strip.hy = 0.05`), `#` starts a comment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use layered_ac_core::potential::{PolyTerm, PotentialSpec};
use layered_ac_core::prism3d::CapCondition;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Abg { alpha: f64, gamma: f64 },
    /// Monomials `coeff * (x1^2)^pow1 * (x2^2)^pow2`.
    Poly { terms: Vec<(u32, u32, f64)>, well: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub family: Family,
    pub radius: f64,
}

impl PotentialConfig {
    pub fn spec(&self) -> PotentialSpec<f64> {
        match &self.family {
            Family::Abg { alpha, gamma } => PotentialSpec::abg(*alpha, *gamma).with_radius(self.radius),
            Family::Poly { terms, well } => PotentialSpec::poly(
                terms.iter().map(|&(pow1, pow2, coeff)| PolyTerm { pow1, pow2, coeff }).collect(),
                *well,
                self.radius,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeteroclinicConfig {
    pub x_extent: f64,
    pub h: f64,
    pub grad_tol: f64,
    pub max_iterations: usize,
    pub energy_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumConfig {
    /// Tolerance of the (*) / (**) certificate.
    pub tol: f64,
    /// Number of random perturbations in the quadratic-growth probe.
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripConfig {
    pub x_extent: f64,
    pub hx: f64,
    pub hy: f64,
    pub ls: Vec<f64>,
    /// Half-width of the truncated 2D heteroclinic problem.
    pub y_extent: f64,
    pub grad_tol: f64,
    pub max_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrismConfig {
    pub j: usize,
    pub z_extent: f64,
    pub x_extent: f64,
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
    pub cap: CapCondition,
    pub grad_tol: f64,
    pub max_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssembleConfig {
    pub resolution: usize,
    pub samples: usize,
}

/// Stages executed by `run-all`.
#[derive(Clone, Debug, PartialEq)]
pub struct StageToggles {
    pub hypotheses: bool,
    pub heteroclinic: bool,
    pub spectrum: bool,
    pub table: bool,
    pub hetero2d: bool,
    pub prism: bool,
    pub assemble: bool,
    pub plot: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub heteroclinic: HeteroclinicConfig,
    pub spectrum: SpectrumConfig,
    pub strip: StripConfig,
    pub prism: PrismConfig,
    pub assemble: AssembleConfig,
    pub stages: StageToggles,
    pub out_dir: PathBuf,
    /// Seed of every randomized probe.
    pub seed: u64,
    /// Which minimizer (ordered by energy) the 2D and 3D stages are built on.
    pub q_index: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig { family: Family::Abg { alpha: 2.0, gamma: 0.3 }, radius: 2.0 },
            heteroclinic: HeteroclinicConfig {
                x_extent: 10.0,
                h: 0.01,
                grad_tol: 1e-9,
                max_iterations: 100_000,
                energy_tol: 1e-8,
            },
            spectrum: SpectrumConfig { tol: 1e-6, probes: 64 },
            strip: StripConfig {
                x_extent: 10.0,
                hx: 0.05,
                hy: 0.05,
                ls: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0],
                y_extent: 12.0,
                grad_tol: 1e-7,
                max_iterations: 200_000,
            },
            prism: PrismConfig {
                j: 2,
                z_extent: 12.0,
                x_extent: 8.0,
                hx: 0.1,
                hy: 0.15,
                hz: 0.15,
                cap: CapCondition::Dirichlet,
                grad_tol: 1e-7,
                max_iterations: 200_000,
            },
            assemble: AssembleConfig { resolution: 32, samples: 2000 },
            stages: StageToggles {
                hypotheses: true,
                heteroclinic: true,
                spectrum: true,
                table: true,
                hetero2d: true,
                prism: true,
                assemble: true,
                plot: true,
            },
            out_dir: PathBuf::from("out"),
            seed: 1,
            q_index: 0,
        }
    }
}

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {key}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(line, key, format!("cannot parse {v:?}: {e}")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(line, key, format!("expected a boolean, got {v:?}"))),
    }
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| num(line, key, s.trim())).collect()
}

/// `pow1:pow2:coeff` triples separated by commas.
fn terms(line: usize, key: &str, v: &str) -> Result<Vec<(u32, u32, f64)>, CliError> {
    v.split(',')
        .map(|t| {
            let parts: Vec<&str> = t.trim().split(':').collect();
            if parts.len() != 3 {
                return Err(bad(line, key, format!("term {t:?} is not pow1:pow2:coeff")));
            }
            Ok((num(line, key, parts[0])?, num(line, key, parts[1])?, num(line, key, parts[2])?))
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses a configuration; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = Self::default();
        let mut family: Option<String> = None;
        let (mut alpha, mut gamma) = (2.0, 0.3);
        let mut poly_terms: Option<Vec<(u32, u32, f64)>> = None;
        let mut well = 1.0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected `key = value`, got {content:?}")))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "potential.family" => family = Some(v.to_string()),
                "potential.alpha" => alpha = num(line, key, v)?,
                "potential.gamma" => gamma = num(line, key, v)?,
                "potential.terms" => poly_terms = Some(terms(line, key, v)?),
                "potential.well" => well = num(line, key, v)?,
                "potential.radius" => c.potential.radius = num(line, key, v)?,

                "heteroclinic.X" => c.heteroclinic.x_extent = num(line, key, v)?,
                "heteroclinic.h" => c.heteroclinic.h = num(line, key, v)?,
                "heteroclinic.grad_tol" => c.heteroclinic.grad_tol = num(line, key, v)?,
                "heteroclinic.max_iterations" => c.heteroclinic.max_iterations = num(line, key, v)?,
                "heteroclinic.energy_tol" => c.heteroclinic.energy_tol = num(line, key, v)?,

                "spectrum.tol" => c.spectrum.tol = num(line, key, v)?,
                "spectrum.probes" => c.spectrum.probes = num(line, key, v)?,

                "strip.X" => c.strip.x_extent = num(line, key, v)?,
                "strip.hx" => c.strip.hx = num(line, key, v)?,
                "strip.hy" => c.strip.hy = num(line, key, v)?,
                "strip.L" => c.strip.ls = list(line, key, v)?,
                "strip.Y" => c.strip.y_extent = num(line, key, v)?,
                "strip.grad_tol" => c.strip.grad_tol = num(line, key, v)?,
                "strip.max_iterations" => c.strip.max_iterations = num(line, key, v)?,

                "prism.j" => c.prism.j = num(line, key, v)?,
                "prism.Z" => c.prism.z_extent = num(line, key, v)?,
                "prism.X" => c.prism.x_extent = num(line, key, v)?,
                "prism.hx" => c.prism.hx = num(line, key, v)?,
                "prism.hy" => c.prism.hy = num(line, key, v)?,
                "prism.hz" => c.prism.hz = num(line, key, v)?,
                "prism.cap" => {
                    c.prism.cap = match v {
                        "dirichlet" => CapCondition::Dirichlet,
                        "neumann" => CapCondition::Neumann,
                        _ => return Err(bad(line, key, format!("expected dirichlet or neumann, got {v:?}"))),
                    }
                }
                "prism.grad_tol" => c.prism.grad_tol = num(line, key, v)?,
                "prism.max_iterations" => c.prism.max_iterations = num(line, key, v)?,

                "assemble.resolution" => c.assemble.resolution = num(line, key, v)?,
                "assemble.samples" => c.assemble.samples = num(line, key, v)?,

                "stages.hypotheses" => c.stages.hypotheses = boolean(line, key, v)?,
                "stages.heteroclinic" => c.stages.heteroclinic = boolean(line, key, v)?,
                "stages.spectrum" => c.stages.spectrum = boolean(line, key, v)?,
                "stages.table" => c.stages.table = boolean(line, key, v)?,
                "stages.hetero2d" => c.stages.hetero2d = boolean(line, key, v)?,
                "stages.prism" => c.stages.prism = boolean(line, key, v)?,
                "stages.assemble" => c.stages.assemble = boolean(line, key, v)?,
                "stages.plot" => c.stages.plot = boolean(line, key, v)?,

                "output.dir" => c.out_dir = PathBuf::from(v),
                "seed" => c.seed = num(line, key, v)?,
                "q_index" => c.q_index = num(line, key, v)?,
                _ => return Err(CliError::Config(format!("line {line}: unknown key {key:?}"))),
            }
        }
        c.potential.family = match family.as_deref().unwrap_or("abg") {
            "abg" => Family::Abg { alpha, gamma },
            "poly" => Family::Poly {
                terms: poly_terms
                    .ok_or_else(|| CliError::Config("potential.family = poly requires potential.terms".into()))?,
                well,
            },
            other => return Err(CliError::Config(format!("unknown potential family {other:?}"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("potential.radius", self.potential.radius),
            ("heteroclinic.X", self.heteroclinic.x_extent),
            ("heteroclinic.h", self.heteroclinic.h),
            ("strip.X", self.strip.x_extent),
            ("strip.hx", self.strip.hx),
            ("strip.hy", self.strip.hy),
            ("strip.Y", self.strip.y_extent),
            ("prism.Z", self.prism.z_extent),
            ("prism.X", self.prism.x_extent),
            ("prism.hx", self.prism.hx),
            ("prism.hy", self.prism.hy),
            ("prism.hz", self.prism.hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.strip.ls.is_empty() || self.strip.ls.iter().any(|l| !(*l > 0.0)) {
            return Err(CliError::Config("strip.L must be a nonempty list of positive half-widths".into()));
        }
        if self.strip.ls.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Config(format!("strip.L must be strictly ascending, got {:?}", self.strip.ls)));
        }
        if self.prism.j < 2 {
            return Err(CliError::Config(format!("prism.j must be at least 2, got {}", self.prism.j)));
        }
        if self.assemble.resolution < 2 {
            return Err(CliError::Config("assemble.resolution must be at least 2".into()));
        }
        Ok(())
    }

    /// Canonical text of the settings a stage depends on; hashed into the
    /// stage's input hash so that edits to unrelated sections do not make
    /// results stale.
    pub fn fingerprint(&self, stage: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "potential {:?}", self.potential);
        let _ = match stage {
            "hypotheses" => Ok(()),
            "heteroclinic" => writeln!(s, "heteroclinic {:?}", self.heteroclinic),
            "spectrum" => writeln!(s, "spectrum {:?} seed {}", self.spectrum, self.seed),
            "strip" | "m2l-table" | "hetero2d" => writeln!(s, "strip {:?} q {}", self.strip, self.q_index),
            "prism" => writeln!(s, "prism {:?} q {}", self.prism, self.q_index),
            "assemble" => writeln!(s, "assemble {:?} seed {}", self.assemble, self.seed),
            _ => Ok(()),
        };
        s
    }
}
