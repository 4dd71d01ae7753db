use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auction-sim"))
        .args(args)
        .current_dir(dir)
        .env("AUCTION_SIM_WORKERS", "2")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const INSTANCE_X: &str = "# seed=0\n5,1,1000\n0,1,2,600,2,2,10,4,6\n1,1,2,600,2,3,8,5,5\n";

#[test]
fn run_reports_instance_x() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.txt"), INSTANCE_X).unwrap();
    let out = stdout(&sim(&["run", "x.txt", "-a", "trwaem"], dir.path()));
    assert_eq!(out.lines().nth(1), Some("0000000000000000,trwaem,15,,,2,"));
    let out = stdout(&sim(&["run", "x.txt", "-a", "oracle"], dir.path()));
    assert_eq!(out.lines().nth(1), Some("0000000000000000,oracle,15,15,1.000000,0,"));
    let out = stdout(&sim(&["oracle", "x.txt"], dir.path()));
    assert!(out.contains("Optimal,15,"), "{out}");
}

#[test]
fn empty_instance_has_zero_welfare() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.txt"), "# seed=3\n8,2,1000,1000\n").unwrap();
    for a in ["truem", "trwaem", "greedy", "random", "oracle", "online-truem", "online-trwaem"] {
        let out = stdout(&sim(&["run", "e.txt", "-a", a], dir.path()));
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[2], "0", "{a}");
    }
}

#[test]
fn bad_inputs_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.txt"), INSTANCE_X).unwrap();
    let out = sim(&["run", "x.txt", "-a", "fastest"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown algorithm"));

    std::fs::write(dir.path().join("bad.conf"), "users = 10\nreps = 3\n").unwrap();
    let out = sim(&["generate", "bad.conf", "-o", "g"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("`reps`"), "{err}");

    // user 0 asks for 1200 of a 1000 capacity
    std::fs::write(dir.path().join("over.txt"), "5,1,1000\n0,1,2,1200,1,3,5\n").unwrap();
    let out = sim(&["validate", "over.txt"], dir.path());
    assert!(!out.status.success());
    let out = sim(&["run", "over.txt", "-a", "truem"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn validate_accepts_produced_schedules() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.txt"), INSTANCE_X).unwrap();
    stdout(&sim(&["run", "x.txt", "-a", "greedy", "--schedule", "s.csv"], dir.path()));
    assert_eq!(stdout(&sim(&["validate", "x.txt", "--schedule", "s.csv"], dir.path())).trim(), "ok");

    // both users crammed into slots 1 and 2 overload the resource
    let overload = "user_id,outcome,option,completion,payment,slots\n0,won,0,2,10,1 2\n1,won,0,2,8,1 2\n";
    std::fs::write(dir.path().join("bad.csv"), overload).unwrap();
    assert!(!sim(&["validate", "x.txt", "--schedule", "bad.csv"], dir.path()).status.success());
}

#[test]
fn generate_writes_one_file_per_user_count() {
    let dir = tempfile::tempdir().unwrap();
    let conf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/exp1_instances.conf");
    stdout(&sim(&["generate", conf.to_str().unwrap(), "-o", "out"], dir.path()));
    assert_eq!(std::fs::read_dir(dir.path().join("out")).unwrap().count(), 41);
    for f in std::fs::read_dir(dir.path().join("out")).unwrap() {
        let path = f.unwrap().path();
        stdout(&sim(&["validate", path.to_str().unwrap()], dir.path()));
    }
}

#[test]
fn trace_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let trace = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/sample_trace.csv");
    stdout(&sim(&["generate", "--trace", trace.to_str().unwrap(), "-o", "t.txt"], dir.path()));
    stdout(&sim(&["validate", "t.txt"], dir.path()));
    let out = stdout(&sim(&["run", "t.txt", "-a", "online-trwaem", "--trace", "events.csv"], dir.path()));
    assert_eq!(out.lines().count(), 2);
    let events = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(events.contains("Accepted"), "{events}");
}

#[test]
fn experiment_one_summary_has_a_row_per_cell_and_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&sim(&["experiment", "1", "--repetitions", "2", "-o", "r"], dir.path()));
    assert_eq!(out.lines().count(), 1 + 5 * 5);
    let summary = std::fs::read_to_string(dir.path().join("r/summary.csv")).unwrap();
    assert_eq!(summary, out);
    assert!(dir.path().join("r/exp1_u30_m2_b1_trwaem.csv").exists());
}

#[test]
fn experiment_two_leaves_oracle_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e2.conf"), "experiment = 2\nusers = 100\nrepetitions = 1\n").unwrap();
    stdout(&sim(&["experiment", "2", "--config", "e2.conf", "-o", "r"], dir.path()));
    let rows = std::fs::read_to_string(dir.path().join("r/exp2_u100_m2_b9_trwaem.csv")).unwrap();
    let row: Vec<&str> = rows.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[3], row[4]), ("", ""));

    // a config for another experiment is refused
    assert!(!sim(&["experiment", "3", "--config", "e2.conf", "-o", "r"], dir.path()).status.success());
}
