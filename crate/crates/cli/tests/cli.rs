use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use agiven_cli::load_config;
use agiven_core::presets::reference;

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn agiven(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agiven")).args(args).output().unwrap()
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.split_once('\n').unwrap().1.to_string()
}

fn small_config(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(reference_config())
        .unwrap()
        .replace("vehicles = 100000", "vehicles = 5000")
        .replace("events = 1000000", "events = 20000");
    let text = format!("{text}\n[grid]\nc_m = [0, 5, 10]\nr_hm = [0, 10000000, 20000000]\nc_p = [0, 50, 100]\nr_hp = [0, 1000000, 2000000]\n");
    let p = dir.join("small.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn shipped_config_is_the_preset() {
    let (file, seed) = load_config(&reference_config()).unwrap();
    let mut expected = reference();
    expected.run.seed = Some(1);
    assert_eq!(file, expected);
    assert_eq!(seed, Some(1));
}

#[test]
fn analyze_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = agiven(&["analyze", "--config", reference_config().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["p_acc", "mg1_delay", "md1_delay", "p_hit", "foci_delay"] {
        assert!(header.contains(&col), "missing {col}");
    }
    assert_eq!(lines.count(), 1);
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let out = out.to_str().unwrap();

    let missing = agiven(&["analyze", "--config", "/nonexistent/x.toml", "--out", out]);
    assert_eq!(missing.status.code(), Some(3));

    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(reference_config()).unwrap().replace("zipf_skew = 0.56", "zipf_skew = -1.0");
    std::fs::write(&bad, text).unwrap();
    let o = agiven(&["analyze", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zipf_skew"));

    let unstable = dir.path().join("unstable.toml");
    let text = std::fs::read_to_string(reference_config()).unwrap().replace("rsu_rate = \"10 Gbps\"", "rsu_rate = \"1 Gbps\"");
    std::fs::write(&unstable, text).unwrap();
    let o = agiven(&["simulate", "--config", unstable.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unstable"));

    let unwritable = agiven(&["analyze", "--config", reference_config().to_str().unwrap(), "--out", "/nonexistent/dir/o.csv"]);
    assert_eq!(unwritable.status.code(), Some(3));

    let usage = agiven(&["analyze", "--config", reference_config().to_str().unwrap()]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn infeasible_optimum_still_writes_its_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("opt.csv");
    let o = agiven(&["optimize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2 + 5);
    let optimal = text.lines().nth(2).unwrap();
    assert!(optimal.starts_with("optimal,"));
    let feasible = optimal.split(',').nth(1).unwrap() == "true";
    assert_eq!(o.status.code(), Some(if feasible { 0 } else { 2 }));
}

#[test]
fn header_alone_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let first = dir.path().join("first.csv");
    let o = agiven(&["simulate", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--seed", "77"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let again = dir.path().join("again.csv");
    let o = agiven(&["simulate", "--config", first.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn simulate_without_seed_records_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(small_config(dir.path())).unwrap().replace("seed = 1\n", "");
    let cfg = dir.path().join("noseed.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("s.csv");
    let o = agiven(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, seed) = load_config(&out).unwrap();
    assert!(seed.is_some());
}

#[test]
fn sweep_rows_follow_axis_order_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw.csv");
    let o = agiven(&[
        "sweep",
        "--config",
        reference_config().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--sweep",
        "mana.cache_slots=3,5,10",
        "--sweep",
        "mana.hap_rate=10Mbps:50Mbps:10Mbps",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 15);
    assert!(rows[0].starts_with("3,10 Mbps,"));
    assert!(rows[14].starts_with("10,50 Mbps,"));

    let again = dir.path().join("again.csv");
    let o = agiven(&["sweep", "--config", out.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn sweep_points_with_model_errors_become_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("sw.csv");
    let o = agiven(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--of",
        "simulate",
        "--sweep",
        "mana.rsu_rate=0,10Gbps",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = body(&out);
    let mut rows = text.lines().skip(1);
    assert!(rows.next().unwrap().contains("RSU rate required"));
    assert!(rows.next().unwrap().starts_with("10Gbps,,"));
}

#[test]
fn json_mirror_matches_csv_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv_out = dir.path().join("a.csv");
    let json_out = dir.path().join("a.json");
    let cfg = reference_config();
    let cfg = cfg.to_str().unwrap();
    assert!(agiven(&["analyze", "--config", cfg, "--out", csv_out.to_str().unwrap()]).status.success());
    assert!(agiven(&["analyze", "--config", cfg, "--out", json_out.to_str().unwrap(), "--json"]).status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    let text = body(&csv_out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|c| *c == "p_acc").unwrap();
    let from_json = v["rows"][0]["p_acc"].as_f64().unwrap();
    assert_eq!(row[i].parse::<f64>().unwrap(), from_json);
    let (file, _) = load_config(&json_out).unwrap();
    assert_eq!(file.mana, reference().mana);
}
