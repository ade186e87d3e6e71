use std::process::Command;

use esslab::rng::stream;
use esslab::{compute_weights, Density, EssReport, Integrand, WeightedSampleSet};

fn esslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esslab"))
}

fn parse_report(stdout: &[u8]) -> Vec<String> {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(EssReport::CSV_HEADER));
    lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn diagnose_uniform_and_degenerate_files() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = dir.path().join("uniform.csv");
    std::fs::write(&uniform, "x,log_w\n0.1,0\n-2,0\n3.5,0\n7,0\n").unwrap();
    let out = esslab()
        .args(["diagnose", "--in"])
        .arg(&uniform)
        .output()
        .unwrap();
    assert!(out.status.success());
    let row = parse_report(&out.stdout);
    assert_eq!(row[0], "4");
    assert_eq!(row[1].parse::<f64>().unwrap(), 4.0);
    assert_eq!(row[4], "");

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "x,log_w\n0.1,-3\n-2,-inf\n3.5,-inf\n7,-inf\n").unwrap();
    let out = esslab()
        .args(["diagnose", "--in"])
        .arg(&one)
        .output()
        .unwrap();
    assert_eq!(parse_report(&out.stdout)[1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn diagnose_round_trip_matches_in_process_report() {
    let target = Density::gaussian(0.0, 1.0).unwrap();
    let q = Density::gaussian(0.7, 1.8).unwrap();
    let ws = compute_weights(&target, &q, q.sample(&mut stream(3, 0), 500)).unwrap();
    let h = Integrand::IndicatorAbsGt(1.0);
    let expected = EssReport::from_sample_set(&ws, Some(&h)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ws.csv");
    ws.write_csv(std::fs::File::create(&input).unwrap())
        .unwrap();
    let out_path = dir.path().join("report.csv");
    let status = esslab()
        .args(["diagnose", "--h", "abs-gt:1", "--in"])
        .arg(&input)
        .arg("--out")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let row = parse_report(&std::fs::read(&out_path).unwrap());
    let got: Vec<f64> = row.iter().map(|v| v.parse().unwrap()).collect();
    let want = [
        expected.n as f64,
        expected.ess_hat,
        expected.cv,
        expected.l2,
        expected.ess_hat_h.unwrap(),
    ];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}");
    }
}

#[test]
fn diagnose_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,log_w\n1,0\n2,0\n3,oops\n").unwrap();
    let out = esslab()
        .args(["diagnose", "--in"])
        .arg(&bad)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");

    let nomass = dir.path().join("nomass.csv");
    std::fs::write(&nomass, "x,log_w\n0.1,0\n0.2,0\n").unwrap();
    let out = esslab()
        .args(["diagnose", "--h", "abs-gt:5", "--in"])
        .arg(&nomass)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("vanishes"));
}

#[test]
fn diagnose_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = esslab()
        .args(["diagnose", "--in", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"x,log_w\n0,0\n1,0\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(parse_report(&out.stdout)[1], "2.0");
}

#[test]
fn experiment_output_is_bit_identical_and_commented() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = esslab()
            .args([
                "rare-event",
                "--n",
                "20",
                "--grid",
                "1:2:0.5",
                "--replicates",
                "300",
                "--seed",
                "9",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "# experiment=rare-event");
    assert!(lines.contains(&"# seed=9"));
    let header = lines.iter().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("n,alpha,true_value"));
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 1 + 3);
    assert!(!a.contains('\r'));
}

#[test]
fn cli_rejects_bad_arguments() {
    let out = esslab()
        .args(["mis-scenario", "--scenario", "4"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = esslab()
        .args(["mean-mismatch", "--grid", "3:0:1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = esslab()
        .args(["mis-scenario", "--n", "4", "--replicates", "10"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn read_back_sample_set_equals_original() {
    let ws = WeightedSampleSet::new(vec![1.5, -0.25], vec![0.0, -1e-17], "t").unwrap();
    let mut buf = Vec::new();
    ws.write_csv(&mut buf).unwrap();
    assert_eq!(
        WeightedSampleSet::read_csv(buf.as_slice(), "t").unwrap(),
        ws
    );
}
