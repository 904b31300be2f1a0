//! The run manifest: what each stage consumed, what it wrote, and the scalars
//! it produced. Downstream stages consult it before reading upstream files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub input_hash: String,
    /// `false` when the stage ran but its check failed (e.g. the certificate).
    pub ok: bool,
    pub outputs: Vec<OutputFile>,
    pub summary: BTreeMap<String, f64>,
    pub wall_clock_s: f64,
}

/// Pipeline-wide scalars collected from the stage summaries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub m1: Option<f64>,
    pub omega_star: Option<f64>,
    pub m2: Option<f64>,
    pub table_digest: Option<String>,
    pub m3_proxy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub stages: BTreeMap<String, StageRecord>,
    pub headline: Headline,
}

/// Upstream stages whose outputs a stage reads.
pub fn dependencies(stage: &str) -> &'static [&'static str] {
    match stage {
        "spectrum" => &["heteroclinic"],
        "strip" | "m2l-table" | "hetero2d" => &["heteroclinic", "spectrum"],
        "prism" => &["spectrum", "m2l-table"],
        "assemble" => &["prism"],
        _ => &[],
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

impl StageManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&mut self, dir: &Path) -> Result<(), CliError> {
        self.refresh_headline();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    fn scalar(&self, stage: &str, key: &str) -> Option<f64> {
        self.stages.get(stage).and_then(|r| r.summary.get(key).copied())
    }

    fn refresh_headline(&mut self) {
        self.headline = Headline {
            m1: self.scalar("heteroclinic", "m1"),
            omega_star: self.scalar("spectrum", "omega_star"),
            m2: self.scalar("m2l-table", "m2"),
            table_digest: self.stages.get("m2l-table").and_then(|r| {
                r.outputs.iter().find(|o| o.path.ends_with("table.csv")).map(|o| o.sha256.clone())
            }),
            m3_proxy: self.scalar("prism", "phi3"),
        };
    }

    /// Hash of everything `stage` would consume under `cfg`: its configuration
    /// fingerprint and the recorded output hashes of its dependencies.
    pub fn input_hash(&self, stage: &str, cfg: &RunConfig) -> Result<String, CliError> {
        let mut text = format!("stage {stage}\n{}", cfg.fingerprint(stage));
        for dep in dependencies(stage) {
            let rec = self.stages.get(*dep).ok_or_else(|| {
                CliError::Dependency(format!("stage `{stage}` needs `{dep}`, which has not been run in this output directory"))
            })?;
            for o in &rec.outputs {
                text.push_str(&format!("{dep} {} {}\n", o.path, o.sha256));
            }
        }
        Ok(sha256_hex(text.as_bytes()))
    }

    /// Verifies that every upstream stage of `stage` ran successfully under
    /// the current configuration and that its files are intact.
    pub fn require_upstream(&self, stage: &str, cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
        for dep in dependencies(stage) {
            let rec = self.stages.get(*dep).ok_or_else(|| {
                CliError::Dependency(format!("stage `{stage}` needs `{dep}`, which has not been run in this output directory"))
            })?;
            if !rec.ok {
                return Err(CliError::Dependency(format!("upstream stage `{dep}` did not pass; `{stage}` refuses to run")));
            }
            if self.input_hash(dep, cfg)? != rec.input_hash {
                return Err(CliError::Dependency(format!(
                    "outputs of `{dep}` are stale (configuration or its own inputs changed); rerun `{dep}`"
                )));
            }
            for o in &rec.outputs {
                let path = dir.join(&o.path);
                if !path.exists() {
                    return Err(CliError::Dependency(format!("missing file {} from stage `{dep}`", path.display())));
                }
                if file_sha256(&path)? != o.sha256 {
                    return Err(CliError::Dependency(format!(
                        "file {} was modified after stage `{dep}` wrote it",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Records a finished stage. Downstream records are dropped, since they
    /// were computed from outputs that have just been replaced.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        stage: &str,
        input_hash: String,
        ok: bool,
        outputs: &[PathBuf],
        dir: &Path,
        summary: BTreeMap<String, f64>,
        wall_clock_s: f64,
    ) -> Result<(), CliError> {
        let outputs = outputs
            .iter()
            .map(|p| {
                Ok(OutputFile {
                    path: p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/"),
                    sha256: file_sha256(p)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let changed = self.stages.get(stage).is_none_or(|old| old.outputs != outputs);
        self.stages.insert(stage.to_string(), StageRecord { input_hash, ok, outputs, summary, wall_clock_s });
        if changed {
            self.drop_downstream(stage);
        }
        Ok(())
    }

    fn drop_downstream(&mut self, stage: &str) {
        let mut pending = vec![stage.to_string()];
        while let Some(s) = pending.pop() {
            let downstream: Vec<String> =
                self.stages.keys().filter(|k| dependencies(k).contains(&s.as_str())).cloned().collect();
            for d in downstream {
                self.stages.remove(&d);
                pending.push(d);
            }
        }
    }

    /// Output file of `stage` whose path ends with `suffix`.
    pub fn output(&self, stage: &str, suffix: &str, dir: &Path) -> Option<PathBuf> {
        self.stages
            .get(stage)?
            .outputs
            .iter()
            .find(|o| o.path.ends_with(suffix))
            .map(|o| dir.join(&o.path))
    }

    pub fn summary(&self, stage: &str, key: &str) -> Result<f64, CliError> {
        self.scalar(stage, key)
            .ok_or_else(|| CliError::Dependency(format!("manifest has no `{key}` for stage `{stage}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_hash_requires_dependencies() {
        let m = StageManifest::default();
        let cfg = RunConfig::default();
        assert!(m.input_hash("heteroclinic", &cfg).is_ok());
        assert!(matches!(m.input_hash("prism", &cfg), Err(CliError::Dependency(_))));
    }

    #[test]
    fn rerunning_upstream_with_new_outputs_drops_downstream() {
        let dir = std::env::temp_dir().join(format!("lac-manifest-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = dir.join("a.csv");
        fs::write(&f, "x\n1\n").unwrap();
        let mut m = StageManifest::default();
        m.record("heteroclinic", "h".into(), true, std::slice::from_ref(&f), &dir, BTreeMap::new(), 0.0).unwrap();
        m.record("spectrum", "s".into(), true, &[], &dir, BTreeMap::new(), 0.0).unwrap();
        m.record("heteroclinic", "h".into(), true, std::slice::from_ref(&f), &dir, BTreeMap::new(), 0.0).unwrap();
        assert!(m.stages.contains_key("spectrum"));
        fs::write(&f, "x\n2\n").unwrap();
        m.record("heteroclinic", "h".into(), true, &[f], &dir, BTreeMap::new(), 0.0).unwrap();
        assert!(!m.stages.contains_key("spectrum"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
