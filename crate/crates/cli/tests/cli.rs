use std::path::PathBuf;
use std::process::{Command, Output};

fn presentation(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../presentations")
        .join(name)
}

fn sofic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sofic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows (after the header line) as cells.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let header: Vec<&str> = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split('\t')
        .collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    rows(text).into_iter().map(|r| r[i].clone()).collect()
}

#[test]
fn check_swap_is_generating() {
    let out = sofic(&[
        "check",
        presentation("swap.json").to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("valid\ttrue"));
    assert!(text.contains("dynamically_generating\ttrue"));
}

#[test]
fn check_rejects_crossing_generator() {
    let out = sofic(&["check", presentation("crossing.json").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("generator s maps point 1 to 0"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn check_empty_generators() {
    let out = sofic(&[
        "check",
        presentation("empty.json").to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("valid\ttrue"));
    assert!(text.contains("dynamically_generating\tfalse"));
}

#[test]
fn check_reports_missing_file() {
    let out = sofic(&["check", "/nonexistent/presentation.json"]);
    assert!(!out.status.success());
}

#[test]
fn count_swap_sweep() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "2,4,6,8",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(column(&text, "count"), ["2", "12", "120", "1680"]);
    assert_eq!(column(&text, "embeddings"), ["2", "12", "120", "1680"]);
    let ratios = column(&text, "ratio");
    assert_eq!(ratios[0], "0.500000000000000");
    assert!(ratios[1].starts_with("0.448"));
    assert!(ratios[2].starts_with("0.445"));
    assert!(ratios[3].starts_with("0.446"));
    assert_eq!(column(&text, "predicted_dimension"), ["1/2"; 4]);
}

#[test]
fn count_records_divisibility_error_per_row() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "2,3,4",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(column(&text, "count"), ["2", "", "12"]);
    let errors = column(&text, "error");
    assert!(errors[1].contains("divisible"), "{errors:?}");
    assert!(errors[0].is_empty() && errors[2].is_empty());
}

#[test]
fn count_identity_generator() {
    let out = sofic(&[
        "count",
        presentation("identity.json").to_str().unwrap(),
        "--d",
        "1-5",
        "--delta",
        "1/10",
        "--exact",
        "false",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(column(&text, "count"), ["1"; 5]);
    assert_eq!(column(&text, "ratio"), ["0"; 5]);
}

#[test]
fn count_is_deterministic_and_independent_of_workers() {
    let path = presentation("swap.json");
    let base = [
        "count",
        path.to_str().unwrap(),
        "--d",
        "2-6",
        "--delta",
        "1/2",
        "--no-timestamp",
        "--epsilon",
        "1/4,1/2",
    ];
    let a = sofic(&base);
    let b = sofic(&[&base[..], &["--workers", "1"]].concat());
    let c = sofic(&[&base[..], &["--workers", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn timestamp_line_is_optional() {
    let path = presentation("swap.json");
    let with = stdout(&sofic(&["count", path.to_str().unwrap(), "--d", "2"]));
    let without = stdout(&sofic(&[
        "count",
        path.to_str().unwrap(),
        "--d",
        "2",
        "--no-timestamp",
    ]));
    assert!(with.lines().any(|l| l.starts_with("# timestamp:")));
    assert!(!without.contains("timestamp"));
    let stripped: Vec<&str> = with
        .lines()
        .filter(|l| !l.starts_with("# timestamp:"))
        .collect();
    assert_eq!(stripped, without.lines().collect::<Vec<_>>());
}

#[test]
fn count_cap_is_a_row_error() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "2,4",
        "--psi-cap",
        "10",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let errors = column(&stdout(&out), "error");
    assert!(errors[0].is_empty(), "{errors:?}");
    assert!(errors[1].contains("exceeds cap"), "{errors:?}");
}

#[test]
fn count_with_sampling_reports_estimate() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "4",
        "--psi-cap",
        "10",
        "--samples",
        "2000",
        "--no-timestamp",
    ]);
    let text = stdout(&out);
    assert_eq!(column(&text, "count_kind"), ["estimate"]);
    let low: f64 = column(&text, "count_low")[0].parse().unwrap();
    let high: f64 = column(&text, "count_high")[0].parse().unwrap();
    assert!(low <= 12.0 && 12.0 <= high, "{low} {high}");
}

#[test]
fn exact_and_anchored_modes() {
    let path = presentation("swap.json");
    let exact = stdout(&sofic(&[
        "count",
        path.to_str().unwrap(),
        "--mode",
        "exact",
        "--d",
        "2",
        "--no-timestamp",
    ]));
    assert_eq!(column(&exact, "count"), ["2"]);
    let anchored = stdout(&sofic(&[
        "count",
        path.to_str().unwrap(),
        "--mode",
        "g-anchored",
        "--anchor",
        "s",
        "--d",
        "3,4",
        "--no-timestamp",
    ]));
    assert_eq!(column(&anchored, "count"), ["", "12"]);
    assert!(column(&anchored, "error")[0].contains("divisible"));
    let missing = sofic(&["count", path.to_str().unwrap(), "--mode", "g-anchored"]);
    assert!(!missing.status.success());
}

#[test]
fn unknown_generator_is_fatal() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--generators",
        "t",
    ]);
    assert!(!out.status.success());
}

#[test]
fn jsonl_records() {
    let out = sofic(&[
        "count",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "2,4",
        "--format",
        "jsonl",
        "--no-timestamp",
    ]);
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["config"]["mode"], "canonical");
    assert_eq!(lines[1]["count"], "2");
    assert_eq!(lines[2]["count"], "12");
    assert_eq!(lines[2]["delta"], "0/1");
    assert!(lines[2]["error"].is_null());
}

#[test]
fn cover_rows() {
    let out = sofic(&[
        "cover",
        presentation("swap.json").to_str().unwrap(),
        "--d",
        "4",
        "--epsilon",
        "0,1/4,11/10",
        "--no-timestamp",
    ]);
    let text = stdout(&out);
    assert_eq!(column(&text, "covering"), ["12", "12", "1"]);
    assert_eq!(column(&text, "covering_exact"), ["true"; 3]);
}

#[test]
fn concentrate_defaults() {
    let out = sofic(&["concentrate", "--no-timestamp"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(column(&text, "d"), ["50", "100", "200"]);
    let fractions: Vec<f64> = column(&text, "passing")
        .iter()
        .map(|p| p.parse::<f64>().unwrap() / 1000.0)
        .collect();
    assert!(fractions[2] >= 0.9);
    for w in fractions.windows(2) {
        assert!(w[1] >= w[0] - 0.03);
    }
    assert_eq!(column(&text, "wall_time_ms"), ["", "", ""]);
    assert_eq!(stdout(&sofic(&["concentrate", "--no-timestamp"])), text);
}

#[test]
fn concentrate_zero_samples_and_bad_seed() {
    let out = sofic(&["concentrate", "--samples", "0", "--no-timestamp"]);
    assert!(out.status.success());
    assert_eq!(column(&stdout(&out), "fraction"), ["", "", ""]);
    let bad = sofic(&["concentrate", "--seed", "one"]);
    assert!(!bad.status.success());
}

#[test]
fn concentrate_with_wall_time() {
    let out = sofic(&["concentrate", "--d", "20", "--samples", "10"]);
    let text = stdout(&out);
    assert!(!column(&text, "wall_time_ms")[0].is_empty());
}

#[test]
fn split_two_swaps() {
    let out = sofic(&[
        "split",
        presentation("two_swaps.json").to_str().unwrap(),
        "--left",
        "a",
        "--right",
        "b",
        "--d",
        "2,4",
        "--no-timestamp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(column(&text, "holds"), ["true", "true"]);
    assert_eq!(column(&text, "lhs"), ["0", "24"]);
}

#[test]
fn report_reads_count_output() {
    let dir = std::env::temp_dir().join(format!("sofic-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (format, file) in [("dsv", "counts.tsv"), ("jsonl", "counts.jsonl")] {
        let path = dir.join(file);
        let out = sofic(&[
            "count",
            presentation("swap.json").to_str().unwrap(),
            "--d",
            "2,3,4",
            "--format",
            format,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let report = stdout(&sofic(&[
            "report",
            path.to_str().unwrap(),
            "--no-timestamp",
        ]));
        assert_eq!(column(&report, "d"), ["2", "4"]);
        assert_eq!(column(&report, "ratio")[1], "0.448120312590145");
        assert!(report.contains("# trend: decreasing"));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
