use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use conflux_cli::RunConfig;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    out: PathBuf,
    stderr: String,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        let text = fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        serde_json::from_str(&text).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

fn conflux(dir: &Path, cmd: &str, cfg: &Value, extra: &[&str]) -> Run {
    let cfg_path = dir.join(format!("{cmd}-input.json"));
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = dir.join(format!("{cmd}-out"));
    let mut c = Command::new(env!("CARGO_BIN_EXE_conflux"));
    c.arg(cmd).arg("--config").arg(&cfg_path).arg("--out").arg(&out).args(extra);
    let o = c.output().unwrap();
    Run { code: o.status.code().unwrap(), out, stderr: String::from_utf8_lossy(&o.stderr).into() }
}

fn abc(a: f64, b: f64, c: f64) -> Value {
    json!({"name": "abc_flow", "params": {"A": a, "B": b, "C": c}})
}

fn threshold(kind: &str, t: f64, power: i32) -> Value {
    json!({"kind": kind, "threshold": t, "relative_power": power})
}

fn check_cfg(field: Value, metric: Value, thresholds: Vec<Value>) -> Value {
    json!({
        "field": field,
        "metric": metric,
        "sampling": {"kind": "halton", "count": 100},
        "solver_params": {"check": {"thresholds": thresholds}},
    })
}

#[test]
fn config_round_trips_through_json() {
    let cfg = RunConfig::from_json(
        &json!({
            "command": "trace",
            "field": abc(1.0, 0.5, 0.25),
            "metric": {"conformal": {"mode": "canonical_beta_squared"}, "eps_supp": 1e-6},
            "sampling": {"kind": "grid", "per_axis": 3},
            "solver_params": {"trace": {"steps": 10, "metrics": [{}]}},
            "seed": 7,
        })
        .to_string(),
    )
    .unwrap();
    let again = RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.seed, 7);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    assert!(RunConfig::from_json(r#"{"solver_params": {"check": {"thresholds": [], "extra": 0}}}"#).is_err());
    assert!(RunConfig::from_json(r#"{"metric": {"conformal": {"mode": "sideways"}}}"#).is_err());
}

#[test]
fn abc_is_force_free_under_the_flat_metric() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(abc(1.0, 0.7, 0.4), json!({}), vec![threshold("force_free", 1e-8, 2), threshold("beltrami", 1e-8, 0)]);
    let r = conflux(dir.path(), "check", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.json("summary.json");
    assert_eq!(s["pass"], true);
    assert_eq!(s["points"], 100);
    assert!(r.text("force_free_rel2.csv").lines().count() == 101);
}

#[test]
fn abc_geodesic_fails_flat_and_expect_fail_inverts() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(abc(1.0, 1.0, 1.0), json!({}), vec![threshold("geodesic", 1e-6, 2)]);
    let r = conflux(dir.path(), "check", &cfg, &[]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json("summary.json")["pass"], false);
    assert_eq!(r.json("manifest.json")["status"], "fail");

    let r = conflux(dir.path(), "check", &cfg, &["--expect-fail"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json("manifest.json")["expect_fail"], true);
}

#[test]
fn abc_geodesic_passes_under_the_canonical_metric() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(
        abc(1.0, 0.7, 0.4),
        json!({"conformal": {"mode": "canonical_beta_squared"}}),
        vec![threshold("geodesic", 1e-6, 2)],
    );
    let r = conflux(dir.path(), "check", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn hopf_on_the_round_sphere() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(
        json!({"name": "hopf"}),
        json!({"base": {"type": "round_sphere"}}),
        ["killing", "geodesic", "force_free", "unit_norm"].iter().map(|k| threshold(k, 1e-8, 0)).collect(),
    );
    let r = conflux(dir.path(), "check", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for c in r.json("summary.json")["checks"].as_array().unwrap() {
        assert!(c["max"].as_f64().unwrap() < 1e-12, "{c}");
    }
}

#[test]
fn duplicate_threshold_stems_are_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(abc(1.0, 1.0, 1.0), json!({}), vec![threshold("beltrami", 1.0, 0), threshold("beltrami", 2.0, 0)]);
    let r = conflux(dir.path(), "check", &cfg, &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json("manifest.json")["status"], "error");
}

#[test]
fn conformal_energy_identity_for_abc() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": abc(1.0, 0.7, 0.4),
        "sampling": {"kind": "halton", "count": 50},
        "solver_params": {"conformal": {"quadrature_nodes": 16}},
    });
    let r = conflux(dir.path(), "conformal", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.json("conformal.json");
    assert_eq!(s["bar_equals_hat"], false);
    assert!(s["max_law_residual"].as_f64().unwrap() < 1e-9);
    assert!(s["energy_identity"]["rel_diff"].as_f64().unwrap() < 1e-6);
    assert_eq!(r.text("conformal.csv").lines().count(), 51);
}

#[test]
fn conformal_reports_unchanged_metric_for_unit_fields() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": {"name": "hopf_stereographic"},
        "metric": {"base": {"type": "stereographic_sphere", "dim": 3}},
        "sampling": {"kind": "halton", "count": 30, "margin": 0.05},
        "solver_params": {"conformal": {"quadrature_nodes": 0}},
    });
    let r = conflux(dir.path(), "conformal", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.json("conformal.json");
    assert_eq!(s["bar_equals_hat"], true);
    assert_eq!(s["note"], "ḡ = ĝ");
}

#[test]
fn conformal_on_a_surface_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({"field": {"name": "annulus_rotational", "params": {"r0": 0.5, "r1": 2.0}}});
    let r = conflux(dir.path(), "conformal", &cfg, &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("surface_star_invariance"), "{}", r.stderr);
}

#[test]
fn l2_homological_solve_on_the_annulus() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": {"name": "annulus_rotational", "params": {"r0": 0.5, "r1": 2.0}},
        "solver_params": {"solve": {"problem": "l2_homological", "resolution": [8, 32]}},
    });
    let r = conflux(dir.path(), "solve", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let h = r.json("hierarchy.json");
    assert!(h["closed"].as_f64().unwrap() < 1e-10);
    assert!(h["l2_harmonic"].as_f64().unwrap() < 1e-8);
    let doc = r.json("solution.json");
    assert!(doc.to_string().contains("beta0"));
    assert!(r.text("solution.vtk").starts_with("# vtk DataFile"));
}

#[test]
fn l1_two_mass_solve_converges() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "domain": {"bounds": [[0.0, 1.0], [0.0, 1.0]]},
        "solver_params": {"solve": {
            "problem": "l1_exact",
            "resolution": [12, 12],
            "trace": {"source": "two_mass", "from": [0.0, 0.3], "to": [1.0, 0.7]},
        }},
        "outputs": {"vtk": false},
    });
    let r = conflux(dir.path(), "solve", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.json("summary.json");
    assert_eq!(s["solution"]["converged"], true);
    // unit mass carried at least the straight-line distance
    let primal = s["solution"]["primal"].as_f64().unwrap();
    assert!(primal >= (1.0f64 + 0.16).sqrt() * 0.9 && primal < 2.0, "{primal}");
    assert!(s["hierarchy"]["l1_exact_eikonal"].as_f64().unwrap() < 1e-6);
    assert!(!r.out.join("solution.vtk").exists());
}

#[test]
fn zero_trace_on_the_torus_gives_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "domain": {"bounds": [[0.0, 1.0], [0.0, 1.0]], "periodic": [true, true]},
        "solver_params": {"solve": {"problem": "l2_exact", "resolution": [6, 6], "trace": {"source": "zero"}}},
    });
    let r = conflux(dir.path(), "solve", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json("summary.json")["solution"]["energy"].as_f64().unwrap(), 0.0);
}

#[test]
fn trace_separates_flat_and_canonical_defects() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": abc(1.0, 0.7, 0.4),
        "sampling": {"kind": "halton", "count": 4},
        "solver_params": {"trace": {
            "steps": 300,
            "metrics": [{}, {"conformal": {"mode": "canonical_beta_squared"}}],
        }},
    });
    let r = conflux(dir.path(), "trace", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.json("defects.json");
    for line in s["lines"].as_array().unwrap() {
        let flat = line["defects"]["euclidean"].as_f64().unwrap();
        let canon = line["defects"]["euclidean_canonical"].as_f64().unwrap();
        assert!(flat > 100.0 * canon, "{flat} vs {canon}");
    }
    assert!(r.text("lines.vtk").contains("LINES"));
}

#[test]
fn hopf_lines_close_up() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": {"name": "hopf_stereographic", "params": {"extent": 4.0}},
        "metric": {"base": {"type": "stereographic_sphere", "dim": 3}},
        "sampling": {"kind": "points", "points": [[0.5, 0.4, -0.6], [-0.6, 0.5, 0.3], [1.0, 0.0, 0.5]]},
        // fibers have period 2π in the flow parameter
        "solver_params": {"trace": {"h_int": std::f64::consts::TAU / 400.0, "steps": 400, "mode": "parameter"}},
        "outputs": {"vtk": false},
    });
    let r = conflux(dir.path(), "trace", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines = r.json("defects.json")["lines"].as_array().unwrap().clone();
    assert_eq!(lines.len(), 3);
    for line in lines {
        assert_eq!(line["stop"], "completed");
        assert!(line["closure_error"].as_f64().unwrap() < 1e-6, "{line}");
    }
}

#[test]
fn constant_field_lines_are_geodesics() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "field": {"name": "reeb_standard", "params": {"dim": 3}},
        "domain": {"bounds": [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]], "periodic": [true, true, true]},
        "sampling": {"kind": "halton", "count": 5},
        "solver_params": {"trace": {"steps": 50, "h_int": 0.01, "section": {
            "origin": [0.0, 0.0, 0.5], "normal": [0.0, 0.0, 1.0], "crossings": 2, "max_steps": 1000,
        }}},
    });
    let r = conflux(dir.path(), "trace", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for line in r.json("defects.json")["lines"].as_array().unwrap() {
        assert_eq!(line["defects"]["euclidean"].as_f64().unwrap(), 0.0);
    }
    // every seed crosses z = 1/2 twice
    assert_eq!(r.text("section.csv").lines().count(), 11);
}

#[test]
fn reruns_are_byte_identical_and_config_reruns_the_job() {
    let dir = TempDir::new().unwrap();
    let cfg = check_cfg(abc(1.0, 0.7, 0.4), json!({}), vec![threshold("geodesic", 10.0, 0)]);
    let a = conflux(dir.path(), "check", &cfg, &["--seed", "11"]);
    let first: Vec<(String, Vec<u8>)> = ["summary.json", "geodesic.csv", "manifest.json"]
        .iter()
        .map(|f| (f.to_string(), fs::read(a.out.join(f)).unwrap()))
        .collect();
    let b = conflux(dir.path(), "check", &cfg, &["--seed", "11"]);
    for (f, bytes) in &first {
        assert_eq!(&fs::read(b.out.join(f)).unwrap(), bytes, "{f}");
    }
    let saved: Value = b.json("config.json");
    assert_eq!(saved["seed"], 11);
    let c = conflux(dir.path(), "check", &saved, &[]);
    assert_eq!(c.text("geodesic.csv").as_bytes(), first[1].1.as_slice());

    let d = conflux(dir.path(), "check", &cfg, &["--seed", "12"]);
    assert_ne!(d.text("geodesic.csv").as_bytes(), first[1].1.as_slice());
}

#[test]
fn manifest_lists_outputs() {
    let dir = TempDir::new().unwrap();
    let r = conflux(dir.path(), "catalog", &json!({}), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let m = r.json("manifest.json");
    assert_eq!(m["command"], "catalog");
    assert_eq!(m["status"], "pass");
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(files.contains(&"catalog.json") && files.contains(&"config.json"), "{files:?}");
    let catalog = r.json("catalog.json");
    let names: Vec<&str> = catalog["fields"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"abc_flow") && names.contains(&"hopf"));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(conflux(dir.path(), "check", &json!({"bogus": true}), &[]).code, 2);
    assert_eq!(conflux(dir.path(), "check", &json!({"field": {"name": "no_such_field"}}), &[]).code, 2);
    // a config written for another command
    assert_eq!(conflux(dir.path(), "solve", &json!({"command": "check"}), &[]).code, 2);
    let r = conflux(dir.path(), "trace", &json!({"field": abc(1.0, 1.0, 1.0), "solver_params": {"trace": {"seeds": []}}}), &[]);
    assert_eq!(r.code, 2);
    // --expect-fail does not hide configuration errors
    assert_eq!(conflux(dir.path(), "check", &json!({"bogus": true}), &["--expect-fail"]).code, 2);
    let missing = Command::new(env!("CARGO_BIN_EXE_conflux")).args(["check", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn solve_reads_its_own_container_back() {
    let dir = TempDir::new().unwrap();
    let first = json!({
        "domain": {"bounds": [[0.0, 1.0], [0.0, 1.0]]},
        "solver_params": {"solve": {
            "resolution": [4, 4],
            "trace": {"source": "two_mass", "from": [0.0, 0.5], "to": [1.0, 0.5]},
        }},
        "outputs": {"vtk": false},
    });
    let a = conflux(dir.path(), "solve", &first, &[]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let container = a.out.join("solution.json");
    let second = json!({
        "solver_params": {"solve": {"trace": {"source": "container", "path": container, "name": "trace"}}},
        "outputs": {"vtk": false, "dir": dir.path().join("again")},
    });
    let cfg_path = dir.path().join("again.json");
    fs::write(&cfg_path, second.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_conflux")).arg("solve").arg("--config").arg(&cfg_path).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = fs::read_to_string(dir.path().join("again/solution.json")).unwrap();
    assert_eq!(b, a.text("solution.json"));

    let missing = json!({"solver_params": {"solve": {"trace": {"source": "container", "path": container, "name": "nope"}}}});
    assert_eq!(conflux(dir.path(), "solve", &missing, &[]).code, 2);
}
