use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn windform(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windform"))
        .args(args)
        .env("WINDFORM_OUTPUT_DIR", out_dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn swarm_config(dir: &Path, steps: usize) -> PathBuf {
    let stations = assets().join("fig1_stations.csv");
    let cfg = serde_json::json!({
        "terrain": {"synthetic": {"kind": "hills", "amplitude": 2, "waves": 2, "size": 40, "resolution": 16}},
        "field": {"stations": stations, "grid": {"cols": 16, "rows": 16}},
        "swarms": [{
            "name": "small",
            "n": 20,
            "seed": 42,
            "spawn": [[0.3, 0.3], [0.7, 0.7]],
            "steps": steps,
            "stride": 4
        }]
    });
    let path = dir.join(format!("swarm_{steps}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn interpolate_writes_three_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let stations = assets().join("fig1_stations.csv");
    let out = windform(
        &[
            "interpolate",
            stations.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["speed.asc", "dir_x.asc", "dir_y.asc"] {
        let text = std::fs::read_to_string(tmp.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap().split_whitespace().collect::<Vec<_>>(),
            ["ncols", "64"]
        );
        assert_eq!(
            lines.next().unwrap().split_whitespace().collect::<Vec<_>>(),
            ["nrows", "64"]
        );
        let values = text.lines().skip(6).flat_map(str::split_whitespace).count();
        assert_eq!(values, 64 * 64, "{name}");
    }
}

#[test]
fn zero_steps_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = swarm_config(tmp.path(), 0);
    let out = windform(&["swarm", cfg.to_str().unwrap()], tmp.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("steps must be ≥ 1"), "{err}");
}

#[test]
fn swarm_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = swarm_config(tmp.path(), 40);
    let read = |dir: &Path| {
        let out = windform(&["swarm", cfg.to_str().unwrap()], dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (
            std::fs::read(dir.join("small_trails.obj")).unwrap(),
            std::fs::read(dir.join("small_metrics.csv")).unwrap(),
        )
    };
    let a = read(&tmp.path().join("a"));
    let b = read(&tmp.path().join("b"));
    assert!(a == b, "outputs differ between runs");

    let csv = String::from_utf8(a.1).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("step,time,polarization,mean_nn_distance,mean_height")
    );
    assert_eq!(lines.count(), 41);
}

#[test]
fn unknown_scenario_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = swarm_config(tmp.path(), 5);
    let out = windform(
        &["swarm", cfg.to_str().unwrap(), "--scenario", "nope"],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn trial_configs_produce_meshes() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, cfg, file) in [
        ("scatter", "trial1_scatter.json", "wings.obj"),
        ("iktrail", "trial2_iktrail.json", "wingbeat.obj"),
    ] {
        let out = windform(&[cmd, assets().join(cfg).to_str().unwrap()], tmp.path());
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(tmp.path().join(file)).unwrap();
        assert!(text.lines().any(|l| l.starts_with("f ")), "{file} has no faces");
    }
}
