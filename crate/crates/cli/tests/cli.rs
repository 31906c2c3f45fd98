use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dharper(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dharper"));
    cmd.env_remove("DHARPER_OUT").arg("--quiet").args(args);
    cmd
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    dharper(args).arg("--out").arg(dir).output().unwrap()
}

fn sets(pairs: &[&str]) -> Vec<String> {
    pairs
        .iter()
        .flat_map(|p| ["--set".to_string(), p.to_string()])
        .collect()
}

fn with_sets<'a>(head: &[&'a str], tail: &'a [String]) -> Vec<&'a str> {
    head.iter()
        .copied()
        .chain(tail.iter().map(String::as_str))
        .collect()
}

fn files(dir: &Path) -> Vec<String> {
    if !dir.exists() {
        return Vec::new();
    }
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

const MAP: &[&str] = &[
    "alpha=0.1545",
    "omega=0.3",
    "beta_r=1",
    "beta_q=3",
    "periods=20",
    "n_orbits=2",
];

#[test]
fn missing_key_exits_2_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let extra = sets(&["alpha=0.1545", "beta_r=1", "beta_q=3"]);
    let res = run_in(&out, &with_sets(&["classical-map"], &extra));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("omega"));
    assert!(files(&out).is_empty());
}

#[test]
fn unknown_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut pairs = MAP.to_vec();
    pairs.push("bogus_knob=1");
    let extra = sets(&pairs);
    let res = run_in(tmp.path(), &with_sets(&["classical-map"], &extra));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bogus_knob"));
    assert!(files(tmp.path()).is_empty());
}

#[test]
fn invalid_parameter_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut pairs = MAP.to_vec();
    pairs[1] = "omega=-1";
    let extra = sets(&pairs);
    let res = run_in(tmp.path(), &with_sets(&["classical-map"], &extra));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn bad_subcommand_is_a_usage_error() {
    let res = dharper(&["no-such-command"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn csv_comes_with_meta_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = sets(MAP);
    let res = run_in(
        tmp.path(),
        &with_sets(&["--seed", "5", "classical-map"], &extra),
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(
        files(tmp.path()),
        ["classical_map.csv", "classical_map.meta.json"]
    );

    let csv = std::fs::read_to_string(tmp.path().join("classical_map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("orbit,t,x_mod,p_mod"));
    // start plus two random orbits, 21 samples each
    assert_eq!(lines.count(), 3 * 21);

    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("classical_map.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["file"], "classical_map.csv");
    assert_eq!(meta["rows"], 63);
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["columns"].as_array().unwrap().len(), 4);
    assert_eq!(meta["config"]["omega"], 0.3);
    assert!(meta["derived"].is_object() || meta["derived"].is_array());
    assert!(meta["tool_version"].is_string());
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = sets(MAP);
    let res = dharper(&with_sets(&["classical-map"], &extra))
        .env("DHARPER_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(tmp.path().join("classical_map.csv").exists());
}

#[test]
fn config_file_and_set_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "alpha = 0.1545\nomega = 0.9\nbeta_r = 1\nbeta_q = 3\nperiods = 5\nn_orbits = 0\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let res = run_in(
        &out,
        &[
            "--config",
            cfg.to_str().unwrap(),
            "classical-map",
            "--set",
            "omega=0.3",
        ],
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("classical_map.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["config"]["omega"], 0.3);
    assert_eq!(meta["rows"], 6);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = sets(MAP);
    for dir in [a.path(), b.path()] {
        assert!(
            run_in(dir, &with_sets(&["--seed", "11", "classical-map"], &extra))
                .status
                .success()
        );
    }
    let read = |d: &Path| std::fs::read(d.join("classical_map.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn repro_spread_matches_standalone_command() {
    let tmp = tempfile::tempdir().unwrap();
    let size = ["ensemble=40", "periods=40", "samples=20", "island_grid=8"];
    let fig: Vec<&str> = size.iter().copied().chain(["omegas=[0.5]"]).collect();
    let fig_sets = sets(&fig);
    let repro = tmp.path().join("repro");
    assert!(run_in(
        &repro,
        &with_sets(&["--seed", "3", "repro", "fig2"], &fig_sets)
    )
    .status
    .success());

    let single: Vec<&str> = size
        .iter()
        .copied()
        .chain(["omega=0.5", "alpha=0.1545", "beta_irrational=\"golden\""])
        .collect();
    let single_sets = sets(&single);
    let alone = tmp.path().join("alone");
    let res = run_in(
        &alone,
        &with_sets(&["--seed", "3", "classical-spread"], &single_sets),
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let read = |p: std::path::PathBuf| std::fs::read(p).unwrap();
    assert_eq!(
        read(repro.join("fig2_irrational.csv")),
        read(alone.join("spread_summary.csv"))
    );
    assert_eq!(
        read(repro.join("fig2_irrational_dispersion.csv")),
        read(alone.join("dispersion.csv"))
    );
}

#[test]
fn floquet_build_writes_binary_operator() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = sets(&[
        "alpha=0.1545",
        "omega=0.6",
        "beta_irrational=\"golden\"",
        "L=64",
    ]);
    let res = run_in(tmp.path(), &with_sets(&["floquet-build"], &extra));
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let bytes = std::fs::read(tmp.path().join("floquet.bin")).unwrap();
    assert_eq!(&bytes[..4], b"DHFQ");
    let op = driven_harper::floquet::read_operator(bytes.as_slice()).unwrap();
    assert_eq!(op.len(), 64);
    assert!(tmp.path().join("floquet.meta.json").exists());
}

#[test]
fn equal_split_reports_bessel_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = sets(&[
        "alpha=0.1545",
        "omega=6.0",
        "beta_r=1",
        "beta_q=1",
        "periods=200",
        "x0=1.0",
        "p0=0.5",
    ]);
    let res = run_in(tmp.path(), &with_sets(&["classical-map"], &extra));
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("classical_map.meta.json")).unwrap(),
    )
    .unwrap();
    let orbit = &meta["results"]["orbits"][0];
    assert!(orbit["mean_velocity"].as_f64().unwrap().is_finite());
    assert!(orbit["velocity_over_j1"].as_f64().unwrap().is_finite());

    let other = tempfile::tempdir().unwrap();
    let extra = sets(MAP);
    assert!(run_in(other.path(), &with_sets(&["classical-map"], &extra))
        .status
        .success());
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(other.path().join("classical_map.meta.json")).unwrap(),
    )
    .unwrap();
    assert!(meta["results"]["orbits"][0]["velocity_over_j1"].is_null());
}
