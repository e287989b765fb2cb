use std::path::Path;
use std::process::{Command, Output};

use quadsim::cli::{EXIT_CONFIG, EXIT_IO};
use quadsim::metrics::{read_report_csv, read_trace_csv};

fn quadsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsim"))
        .args(args)
        .env_remove("QUADSIM_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("sim.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_with_defaults_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = quadsim(&["run", "--rounds", "400", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for key in ["fnd", "lnd", "throughput", "manifest"] {
        assert!(text.contains(key), "{text}");
    }
    let trace = read_trace_csv(out.join("trace-qleach-seed0.csv")).unwrap();
    assert_eq!(trace.len(), 400);
    for fig in ["fig3a", "fig3b", "fig3c", "fig3d", "fig3e"] {
        assert!(
            out.join(format!("plot-qleach-seed0-{fig}.dat")).exists(),
            "{fig}"
        );
    }
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("ChaCha8"));
    assert!(manifest.contains("trace-qleach-seed0.csv"));
    let fp = text
        .lines()
        .find_map(|l| l.strip_prefix("manifest"))
        .unwrap()
        .trim();
    let plot = std::fs::read_to_string(out.join("plot-qleach-seed0-fig3a.dat")).unwrap();
    assert!(plot.contains(&format!("# manifest {fp}")));
}

#[test]
fn missing_config_fails_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = quadsim(&[
        "run",
        "--config",
        "/no/such/file.toml",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_IO));
    assert!(stderr(&o).contains("/no/such/file.toml"));
    assert!(!out.exists());
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[network]\nnodes = \"many\"\n");
    let o = quadsim(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("nodes"), "{}", stderr(&o));
}

#[test]
fn unknown_protocol_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadsim(&[
        "run",
        "--protocol",
        "pegasis",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("qleach, leach"), "{}", stderr(&o));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let out = dir.path().join(name);
        let o = quadsim(&[
            "run",
            "--seed",
            "7",
            "--rounds",
            "600",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out.join("trace-qleach-seed7.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn flags_beat_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[simulation]\nseed = 3\nprotocol = \"leach\"\nmax_rounds = 50\n",
    );
    let out = dir.path().join("o");
    let o = quadsim(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--rounds",
        "20",
        "--override",
        "network.nodes=30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = read_trace_csv(out.join("trace-leach-seed5.csv")).unwrap();
    assert_eq!(trace.len(), 20);
    assert!(trace[0].alive <= 30);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_quadsim"))
        .args(["run", "--rounds", "5"])
        .env("QUADSIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("trace-qleach-seed0.csv").exists());
}

#[test]
fn run_without_out_dir_is_a_config_error() {
    let o = quadsim(&["run", "--rounds", "5"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("QUADSIM_OUT"));
}

#[test]
fn compare_pairs_protocols_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = quadsim(&[
        "compare",
        "--protocol",
        "qleach,leach",
        "--seeds",
        "3",
        "--rounds",
        "300",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("S.P") && text.contains("N.L.T") && text.contains("T.P"),
        "{text}"
    );
    let rows = read_report_csv(out.join("report.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    let order: Vec<(&str, u64)> = rows.iter().map(|r| (r.protocol.as_str(), r.seed)).collect();
    assert_eq!(
        order,
        [
            ("qleach", 0),
            ("qleach", 1),
            ("qleach", 2),
            ("leach", 0),
            ("leach", 1),
            ("leach", 2)
        ]
    );
    for p in ["qleach", "leach"] {
        for fig in ["fig3a", "fig3b", "fig3c", "fig3d", "fig3e"] {
            assert!(out.join(format!("plot-{p}-{fig}.dat")).exists());
        }
    }
    // paired deployment: identical quadrant counts for both protocols
    let q = std::fs::read_to_string(out.join("plot-qleach-fig3e.dat")).unwrap();
    let l = std::fs::read_to_string(out.join("plot-leach-fig3e.dat")).unwrap();
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&q), body(&l));
}

#[test]
fn compare_rejects_planned_protocols() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadsim(&[
        "compare",
        "--protocol",
        "qleach,sep",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&o).contains("not implemented"), "{}", stderr(&o));
}

#[test]
fn compare_needs_two_protocols() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadsim(&[
        "compare",
        "--protocol",
        "leach",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn validate_echoes_defaults() {
    let o = quadsim(&["validate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in [
        "e_elec",
        "e_amp",
        "e_da",
        "per_area_cap = 2",
        "bs_x = 50.0",
        "bs_y = 150.0",
    ] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn validate_reports_each_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[election]\np = 1.5\nper_area_cap = 0\n");
    let o = quadsim(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let err = stderr(&o);
    assert!(
        err.contains("election.p") && err.contains("(0, 1)"),
        "{err}"
    );
    assert!(err.contains("per_area_cap"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn validate_cap_zero_via_override() {
    let o = quadsim(&["validate", "--override", "election.per_area_cap=0"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}
