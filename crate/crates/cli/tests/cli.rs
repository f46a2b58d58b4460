use std::path::PathBuf;
use std::process::{Command, Output};

fn pcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcap")).args(args).output().expect("run pcap")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "pcap failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows as (header, rows) with the comment line removed.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let split = |l: &str| l.split(',').map(String::from).collect::<Vec<_>>();
    let header = split(lines.next().unwrap());
    (header, lines.map(split).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

fn value(text: &str, row: usize, name: &str) -> f64 {
    let (h, rows) = table(text);
    rows[row][col(&h, name)].parse().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("pcap-test-{}-{name}", std::process::id()))
}

#[test]
fn header_comment_records_version_hash_and_seed() {
    let text = stdout(&pcap(&["bound", "--family", "depolarizing", "--seed", "3"]));
    let first = text.lines().next().unwrap();
    assert!(first.starts_with(&format!("# pcap {} command=bound config_sha256=", env!("CARGO_PKG_VERSION"))), "{first}");
    assert!(first.ends_with(" seed=3"));
    let other = stdout(&pcap(&["bound", "--family", "depolarizing", "--seed", "4"]));
    assert_ne!(first, other.lines().next().unwrap());
}

#[test]
fn entropy_at_repetition_threshold() {
    let text = stdout(&pcap(&["entropy", "--family", "depolarizing", "--rep", "5,bit", "--p", "0.0634520293"]));
    assert!((value(&text, 0, "entropy") - 1.0).abs() < 1e-8);
    let text = stdout(&pcap(&["entropy", "--family", "custom:1,0,0,0", "--rep", "3,bit", "--p", "0"]));
    assert_eq!(value(&text, 0, "entropy"), 0.0);
}

#[test]
fn entropy_lists_every_level() {
    let text = stdout(&pcap(&["entropy", "--stack", "five513x2", "--p", "0.062,0.064"]));
    let (h, rows) = table(&text);
    let levels: Vec<&str> = rows.iter().map(|r| r[col(&h, "level")].as_str()).collect();
    assert_eq!(levels, ["1", "2", "1", "2"]);
    assert!(rows.iter().all(|r| r[col(&h, "method")] == "exact"));
}

#[test]
fn monte_carlo_output_is_reproducible() {
    let args = ["entropy", "--stack", "rep3bit+five513x2", "--p", "0.06", "--samples", "500", "--top-only"];
    let a = stdout(&pcap(&args));
    let b = stdout(&pcap(&[&args[..], &["--workers", "1"]].concat()));
    assert_eq!(a, b);
    let (h, rows) = table(&a);
    assert_eq!(rows[0][col(&h, "method")], "mc");
    assert!(rows[0][col(&h, "std_error")].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn thresholds() {
    let text = stdout(&pcap(&["threshold", "--family", "independent-sym", "--n1", "5", "--n2", "77"]));
    assert!((value(&text, 0, "threshold") - 0.1127458434).abs() < 5e-10);
    let text = stdout(&pcap(&["threshold", "--family", "two-pauli", "--n1", "5", "--n2", "74"]));
    assert!((value(&text, 0, "threshold") - 0.1139425214).abs() < 5e-10);
    let text = stdout(&pcap(&["threshold", "--family", "depolarizing", "--n1", "1", "--n2", "1", "--percent"]));
    assert!((value(&text, 0, "threshold") - 6.30965416384).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(pcap(&["threshold", "--stack", "nonsense"]).status.code(), Some(2));
    assert_eq!(pcap(&["entropy", "--rep", "3,bit"]).status.code(), Some(2));
    assert_eq!(pcap(&["table", "9"]).status.code(), Some(2));
    assert_eq!(pcap(&["threshold", "--n1", "5", "--n2", "300", "--budget", "1e6"]).status.code(), Some(3));
    assert_eq!(pcap(&["threshold", "--rep", "3,bit", "--bracket", "0.2,0.24"]).status.code(), Some(4));
}

#[test]
fn config_file_with_flag_override() {
    let path = tmp("run.cfg");
    std::fs::write(&path, "family = independent-sym\nrep = 7,bit\n# comment\n").unwrap();
    let cfg = path.to_str().unwrap();
    let from_file = stdout(&pcap(&["threshold", "--config", cfg]));
    assert!((value(&from_file, 0, "threshold") - 0.1121074102).abs() < 5e-10);
    let flag_wins = stdout(&pcap(&["threshold", "--config", cfg, "--family", "two-pauli"]));
    assert!((value(&flag_wins, 0, "threshold") - 0.1132891165).abs() < 5e-10);
    std::fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(pcap(&["bound", "--config", cfg]).status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn output_file_matches_stdout() {
    let path = tmp("bound.csv");
    let printed = stdout(&pcap(&["bound"]));
    stdout(&pcap(&["bound", "-o", path.to_str().unwrap()]));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    std::fs::remove_file(&path).ok();
}

#[test]
fn bounds_of_standard_families() {
    let text = stdout(&pcap(&["bound"]));
    let want = [(0.0630965416, 1.0 / 12.0, 0.0606394190), (0.1100278644, 0.146446609, 0.1069243112), (0.1135460976, 1.0 / 6.0, 0.1079171085)];
    for (i, (h, u, inf)) in want.into_iter().enumerate() {
        assert!((value(&text, i, "hashing") - h).abs() < 1e-10);
        assert!((value(&text, i, "upper_bound") - u).abs() < 1e-9);
        assert!((value(&text, i, "infinite_bit_flip") - inf).abs() < 1e-10);
    }
}

#[test]
fn sweep_marks_best_and_budget_cut() {
    let text = stdout(&pcap(&["sweep", "--n1", "1", "--n2-max", "9"]));
    let (h, rows) = table(&text);
    let best: Vec<&Vec<String>> = rows.iter().filter(|r| r[col(&h, "best")] == "true").collect();
    assert_eq!(best.len(), 1);
    assert_eq!(best[0][col(&h, "n2")], "5");
    let text = stdout(&pcap(&["sweep", "--n1", "5", "--n2-max", "12", "--budget", "500"]));
    let (h, rows) = table(&text);
    assert!(rows.iter().any(|r| r[col(&h, "provenance")] == "skipped(budget)"));
    assert_eq!(rows.len(), 12);
}

#[test]
fn independent_frontier_on_the_diagonal() {
    let q = "0.1127458434";
    let text = stdout(&pcap(&["frontier", "--grid", q, "--classes", "bit-in-phase,phase-in-bit", "--max-inner", "5"]));
    for name in ["bit-in-phase", "phase-in-bit"] {
        assert!((value(&text, 0, name) - 0.1127458434).abs() < 1e-9, "{name}");
    }
    let text = stdout(&pcap(&["frontier", "--grid", "0", "--classes", "bit-flip", "--max-single", "5"]));
    assert_eq!(value(&text, 0, "infinite_bit_flip"), 0.5);
}

#[test]
fn two_pauli_frontier_at_zero() {
    let text = stdout(&pcap(&["frontier", "--kind", "two-pauli", "--grid", "0", "--max-single", "9"]));
    assert!((value(&text, 0, "bit-flip") - 0.1133392680).abs() < 1e-9);
    assert!((value(&text, 0, "hashing") - 0.1135460976).abs() < 1e-9);
}

#[test]
fn mc_threshold_rows() {
    let args = ["mc", "--rep", "3,bit", "--grid", "0.058,0.06,0.062,0.064,0.066", "--samples", "2000", "--seed", "5"];
    let text = stdout(&pcap(&args));
    assert_eq!(text, stdout(&pcap(&args)));
    let (h, rows) = table(&text);
    let last = rows.last().unwrap();
    assert_eq!(last[col(&h, "kind")], "threshold");
    let p: f64 = last[col(&h, "p")].parse().unwrap();
    assert!((p - 0.0633766430).abs() < 2e-3, "{p}");
}

#[test]
fn table3_bit_flip_thresholds() {
    let text = stdout(&pcap(&["table", "3"]));
    let (h, rows) = table(&text);
    assert_eq!(rows.len(), 10);
    let i = col(&h, "independent-sym");
    assert!((rows[6][i].parse::<f64>().unwrap() - 0.1121074102).abs() < 5e-10);
    assert_eq!(rows[9][0], "inf");
    assert!((rows[9][col(&h, "two-pauli")].parse::<f64>().unwrap() - 0.1079171085).abs() < 5e-10);
    assert!(rows.iter().all(|r| r[col(&h, "depolarizing_provenance")] == "exact"));
}

#[test]
fn tables_7_and_8_at_small_scale() {
    let small = ["--n2-max", "6", "--max-single", "9"];
    let text = stdout(&pcap(&[&["table", "7"][..], &small].concat()));
    let (h, rows) = table(&text);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["hashing", "bit_flip", "bit_phase", "lower", "upper"]);
    let d = col(&h, "depolarizing");
    assert!((rows[4][d].parse::<f64>().unwrap() - 1.0 / 12.0).abs() < 1e-10);
    assert!((rows[1][d].parse::<f64>().unwrap() - 0.0634520293).abs() < 5e-10);
    assert_eq!(rows[1][col(&h, "depolarizing_code")], "rep5bit");
    assert_eq!(rows[3][col(&h, "depolarizing_provenance")], "skipped(budget)");

    let text = stdout(&pcap(&[&["table", "8"][..], &small].concat()));
    let (h, rows) = table(&text);
    assert!((rows[0][col(&h, "two-pauli")].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    assert!((rows[1][col(&h, "independent-sym")].parse::<f64>().unwrap() - 1.01248000).abs() < 5e-9);
}
