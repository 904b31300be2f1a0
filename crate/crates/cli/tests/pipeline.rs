use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const SMALL: &str = "\
heteroclinic.X = 6
heteroclinic.h = 0.05
strip.X = 6
strip.hx = 0.1
strip.hy = 0.1
strip.L = 0.5, 1, 2, 3, 4
strip.Y = 4
prism.X = 4
prism.hx = 0.2
prism.hy = 0.2
prism.hz = 0.2
prism.Z = 3
assemble.resolution = 6
assemble.samples = 100
";

fn config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path
}

fn run(args: &[&str], conf: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layered-ac"))
        .args(args)
        .arg("--config")
        .arg(conf)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn full_run_declares_files_that_exist_and_parse_back() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let out = tmp.path().join("out");
    let o = run(&["run-all"], &conf, &out);
    assert!(o.status.success(), "{}", stderr(&o));

    let m = manifest(&out);
    let stages = m["stages"].as_object().unwrap();
    for s in ["hypotheses", "heteroclinic", "spectrum", "m2l-table", "hetero2d", "prism", "assemble", "plot"] {
        assert_eq!(stages[s]["ok"], Value::Bool(true), "{s}");
    }
    for (name, rec) in stages {
        for file in rec["outputs"].as_array().unwrap() {
            let path = out.join(file["path"].as_str().unwrap());
            let bytes = fs::read(&path).unwrap_or_else(|_| panic!("{name}: {} missing", path.display()));
            assert_eq!(format!("{:x}", Sha256::digest(&bytes)), file["sha256"].as_str().unwrap());
            let ext = path.extension().unwrap().to_str().unwrap();
            match ext {
                "csv" => {
                    let mut r = csv::Reader::from_path(&path).unwrap();
                    let width = r.headers().unwrap().len();
                    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
                    assert!(!rows.is_empty() && rows.iter().all(|x| x.len() == width), "{}", path.display());
                }
                "svg" => assert!(String::from_utf8(bytes).unwrap().trim_end().ends_with("</svg>")),
                "vtk" => {
                    let text = String::from_utf8(bytes).unwrap();
                    assert!(text.contains("DIMENSIONS 6 6 6") && text.contains("POINT_DATA 216"));
                }
                _ => panic!("unexpected output {}", path.display()),
            }
        }
    }
    let head = &m["headline"];
    for key in ["m1", "omega_star", "m2", "m3_proxy"] {
        assert!(head[key].as_f64().unwrap().is_finite(), "{key}");
    }
    assert_eq!(head["table_digest"], stages["m2l-table"]["outputs"][0]["sha256"]);
    assert!(head["m2"].as_f64().unwrap() < head["m1"].as_f64().unwrap());
}

#[test]
fn identical_configs_give_identical_results() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["run-all"], &conf, dir);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["headline"], mb["headline"]);
    for (name, rec) in ma["stages"].as_object().unwrap() {
        assert_eq!(rec["summary"], mb["stages"][name]["summary"], "{name}");
        assert_eq!(rec["outputs"], mb["stages"][name]["outputs"], "{name}");
        assert_eq!(rec["input_hash"], mb["stages"][name]["input_hash"], "{name}");
    }
}

#[test]
fn scalar_potential_halts_after_the_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "potential.alpha = 0\npotential.gamma = 1\n");
    let out = tmp.path().join("out");
    let o = run(&["run-all"], &conf, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(*) fails"), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["stages"]["spectrum"]["ok"], Value::Bool(false));
    assert!(m["stages"].get("m2l-table").is_none());

    // Downstream stages refuse to build on the failed certificate.
    let o = run(&["hetero2d"], &conf, &out);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("did not pass"));
}

#[test]
fn prism_requires_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert!(run(&["check"], &conf, &out).status.success());

    let o = run(&["prism"], &conf, &out);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("dependency error") && stderr(&o).contains("m2l-table"));

    assert!(run(&["m2l-table"], &conf, &out).status.success());
    fs::remove_file(out.join("m2l-table/table.csv")).unwrap();
    let o = run(&["prism"], &conf, &out);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("missing file") && stderr(&o).contains("table.csv"), "{}", stderr(&o));
}

#[test]
fn changed_configuration_makes_upstream_stale() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert!(run(&["check"], &conf, &out).status.success());
    let edited = config(tmp.path(), "heteroclinic.h = 0.04\n");
    let o = run(&["m2l-table"], &edited, &out);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("stale"), "{}", stderr(&o));

    // Editing an unrelated section leaves the upstream valid.
    let unrelated = config(tmp.path(), "prism.Z = 2\n");
    assert!(run(&["m2l-table"], &unrelated, &out).status.success());
}

#[test]
fn strip_command_solves_requested_widths() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert!(run(&["check"], &conf, &out).status.success());
    let o = run(&["strip", "--L", "0.5,1"], &conf, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    let s = &m["stages"]["strip"]["summary"];
    let (a, b) = (s["m2L_0.5"].as_f64().unwrap(), s["m2L_1"].as_f64().unwrap());
    assert!(0.0 < a && a < b);
    assert!(out.join("strip/field_L0.5.csv").exists());
}

#[test]
fn plot_skips_missing_data_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = config(tmp.path(), "");
    let out = tmp.path().join("out");
    let o = run(&["plot"], &conf, &out);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));

    assert!(run(&["check"], &conf, &out).status.success());
    assert!(run(&["m2l-table"], &conf, &out).status.success());
    assert!(run(&["plot"], &conf, &out).status.success());
    let first = fs::read(out.join("plots/m2l.svg")).unwrap();
    assert!(run(&["plot"], &conf, &out).status.success());
    assert_eq!(first, fs::read(out.join("plots/m2l.svg")).unwrap());

    let m = manifest(&out);
    let slope = m["stages"]["plot"]["summary"]["fit_slope"].as_f64().unwrap();
    assert_eq!(slope, -m["stages"]["m2l-table"]["summary"]["rate"].as_f64().unwrap());
}

#[test]
fn bad_input_is_reported_with_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let conf = config(tmp.path(), "strip.L = 3, 1\n");
    assert_eq!(run(&["check"], &conf, &out).status.code(), Some(1));
    let conf = config(tmp.path(), "");
    assert_eq!(run(&["check", "--j", "1"], &conf, &out).status.code(), Some(1));
    let missing = tmp.path().join("nope.conf");
    assert_eq!(run(&["check"], &missing, &out).status.code(), Some(4));
}
