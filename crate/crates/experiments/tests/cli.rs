use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polya(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polya"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn experiment_writes_schema_and_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out| vec!["experiment", "third_party_ii", "--p", "0.1", "--reps", "12", "--seed", "5", "--target", "20000", "--out", out];
    assert_eq!(code(&polya(&args("a"), dir.path())), 0);
    assert_eq!(code(&polya(&args("b"), dir.path())), 0);

    let a = fs::read(dir.path().join("a/dataset.csv")).unwrap();
    let b = fs::read(dir.path().join("b/dataset.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "replicate_id,seed,popular_share_p1,popular_share_p2,popular_share_p3,\
         seats_p1,seats_p2,seats_p3,district1_share_p1,north_share_p1,south_share_p1"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.split(',').count() == 11));
    for svg in ["seats", "popular_vote", "district_share", "north_south", "seats_votes"] {
        let body = fs::read_to_string(dir.path().join(format!("a/plots/{svg}.svg"))).unwrap();
        assert!(body.contains(r#"version="1.1""#));
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&polya(&["experiment", "sym_1_1", "--reps", "3", "--target", "1000", "--out", "first"], dir.path())),
        0
    );
    let out = polya(
        &["experiment", "--config", "first/manifest.json", "--reps", "5", "--p", "0.4", "--out", "second"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("second/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["replicates"], 5);
    assert_eq!(manifest["config"]["imitation_prob"], 0.4);
    assert_eq!(manifest["config"]["target_total_balls"], 1000);
    assert_eq!(manifest["scenario"], "sym_1_1");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["experiment", "no_such_scenario", "--out", "x"],
        &["experiment", "sym_1_1"],
        &["experiment", "sym_1_1", "--p", "1.5", "--out", "x"],
        &["simulate", "--block", "3:1,x"],
        &["curve", "cube:-2"],
    ] {
        let out = polya(args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_files_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&polya(&["cubefit", "absent.csv"], dir.path())), 3);
    assert_eq!(code(&polya(&["plot", "absent.csv", "--out", "p"], dir.path())), 3);
    assert_eq!(code(&polya(&["experiment", "--config", "absent.json"], dir.path())), 3);
}

#[test]
fn plot_rejects_unknown_kind_and_cubefit_reads_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&polya(&["experiment", "sym_1_1", "--p", "0.3", "--reps", "40", "--target", "20000", "--out", "e"], dir.path())),
        0
    );
    let out = polya(&["plot", "e/dataset.csv", "--out", "figs", "--kind", "pie"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("figs").exists());

    let out = polya(&["plot", "e/dataset.csv", "--out", "figs", "--kind", "seats_votes", "--cube-k", "4"], dir.path());
    assert_eq!(code(&out), 0);
    let svg = fs::read_to_string(dir.path().join("figs/seats_votes.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="point""#).count(), 40);
    assert!(svg.contains(r#"class="curve""#));

    let out = polya(&["cubefit", "e/dataset.csv"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("central slope"));
}

#[test]
fn simulate_writes_state_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = polya(
        &["simulate", "--block", "2:1,1", "--block", "1:2,1", "--p", "0.3", "--target", "50", "--seed", "4", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("balls 50 "));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "district,p1,p2");
    assert_eq!(lines.len(), 4);
    let total: u64 = lines[1..]
        .iter()
        .flat_map(|l| l.split(',').skip(1))
        .map(|v| v.parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 50);
}

#[test]
fn validate_negative_control_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = polya(
        &["validate", "--samples", "50000", "--reps", "100", "--corrupt-imitation", "1"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("FAIL multi_urn_oracle_p0:"));
}

#[test]
fn swing_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = polya(
        &["swing", "--p", "0", "--reps", "6", "--grow", "20000", "--rescale", "600", "--regrow", "20000", "--out", "sw.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("swing slope"));
    let csv = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn curve_prints_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = polya(&["curve", "beta:2,1", "--points", "3"], dir.path());
    assert_eq!(stdout(&out), "x,y\n0,0\n0.5,0.25\n1,1\n");
}
