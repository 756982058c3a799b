use std::path::Path;
use std::process::{Command, Output};

fn capsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capsym")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn mesh_zero_has_twelve_vertices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let o = capsym(&["mesh", "--subdivisions", "0", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(read(&out, "vertices.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.starts_with("index,x,y,z,area,colatitude"));
    let summary: serde_json::Value = serde_json::from_slice(&read(&out, "mesh.json")).unwrap();
    assert_eq!(summary["vertices"], 12);
}

#[test]
fn verify_passes_with_default_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = capsym(&["verify", "--seed", "42", "--subdivisions", "4", "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&read(&out, "report.json")).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert_eq!(report["summary"]["failed"], 0);
    assert_eq!(report["summary"]["total"].as_u64().unwrap() as usize, checks.len());
    for c in checks {
        assert!(!c["paper_anchor"].as_str().unwrap().is_empty());
        assert_eq!(c["inputs_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn failing_checks_exit_one_and_keep_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    // a coarse mesh with shrunken tolerances cannot meet the accuracy checks
    let o = capsym(&[
        "verify",
        "--subdivisions",
        "2",
        "--tolerance-scale",
        "1e-6",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&read(&out, "report.json")).unwrap();
    assert!(report["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["symmetrize", "heat", "solve-sphere", "verify"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        for dir in [&a, &b] {
            let o = capsym(&[cmd, "--seed", "7", "--subdivisions", "3", "--out", &out_arg(dir)]);
            assert!(o.status.code().is_some_and(|c| c <= 1), "{cmd}");
        }
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let name = name.to_str().unwrap();
            assert_eq!(read(&a, name), read(&b, name), "{cmd}/{name}");
        }
    }
}

#[test]
fn malformed_config_exits_two_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = \"not a number\"\n").unwrap();
    let out = tmp.path().join("never");
    let o = capsym(&["mesh", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    std::fs::write(&cfg, "[heat]\nstep = -1.0\n").unwrap();
    let o = capsym(&["heat", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = capsym(&["mesh", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = capsym(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_drives_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    let out = tmp.path().join("run");
    std::fs::write(
        &cfg,
        format!(
            r#"
seed = 3
mesh_subdivisions = 3
output_dir = "{}"

[variation]
family = {{ kind = "cap", area = 3.14159 }}

[solve_sphere]
preset = {{ kind = "harmonic", degree = 1 }}

[dirac]
grid_spacing = 0.25
radial = {{ p = 2.0, n = 3, charge = 1.0, epsilon = 0.1, radius = 10.0, bc = "decay" }}
"#,
            out.display()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let o = capsym(&["variation", "--config", c]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&read(&out, "variation.json")).unwrap();
    let (p, cap) = (v["perimeter"].as_f64().unwrap(), v["cap_perimeter"].as_f64().unwrap());
    assert!((p / cap - 1.0).abs() < 0.1, "{p} vs {cap}");

    let o = capsym(&["solve-sphere", "--config", c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_slice(&read(&out, "decay.json")).unwrap();
    assert!(s["residual"].as_f64().unwrap() <= 1e-10);
    assert!(out.join("solution.csv").exists() && out.join("distribution.csv").exists());

    let o = capsym(&["dirac", "--config", c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d: serde_json::Value = serde_json::from_slice(&read(&out, "dirac.json")).unwrap();
    assert_eq!(d["fundamental_solution"]["branch"], "log");
    let radial = String::from_utf8(read(&out, "radial.csv")).unwrap();
    assert!(radial.starts_with("r,u,q"));
    let plane = String::from_utf8(read(&out, "plane.csv")).unwrap();
    assert!(plane.starts_with("x,y,u,gap"));
}

#[test]
fn sphere_solver_errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[solve_sphere]\nmax_iterations = 1\n").unwrap();
    let out = tmp.path().join("o");
    let o = capsym(&["solve-sphere", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("convergence"));
    assert!(!out.exists());
}
