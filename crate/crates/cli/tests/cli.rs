use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gowers-lab"));
    cmd.current_dir(dir).args(args).env_remove("GWRS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn gowers-lab");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(dir: &Path, args: &[&str]) -> Run {
    run_in(dir, args, &[])
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let shapes = [
        (
            "interval.json",
            r#"{"type": "box", "lo": [-0.5], "hi": [0.5]}"#,
        ),
        ("empty.json", r#"{"type": "union", "parts": []}"#),
        (
            "ball2d.json",
            r#"{"type": "ball", "center": [0.0, 0.0], "radius": 0.5}"#,
        ),
        (
            "ellipse.json",
            r#"{"type": "ellipsoid", "center": [0.1, -0.05], "matrix": [[9.0, 2.0], [2.0, 4.0]]}"#,
        ),
        (
            "two_intervals.json",
            r#"{"type": "union", "parts": [
                {"type": "box", "lo": [-0.9], "hi": [-0.6]},
                {"type": "box", "lo": [0.3], "hi": [0.5]}]}"#,
        ),
        (
            "broken.json",
            r#"{"type": "ball", "center": [0.0], "radius": -1.0}"#,
        ),
    ];
    for (name, text) in shapes {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn mkdir(dir: &Path, name: &str) -> PathBuf {
    let p = dir.join(name);
    fs::create_dir(&p).unwrap();
    p
}

/// `(t, value)` rows of a profile table.
fn table(path: &Path) -> (String, Vec<(f64, f64)>) {
    let text = fs::read_to_string(path).unwrap();
    let header = text.lines().next().unwrap().to_string();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    (header, rows)
}

fn interpolate(rows: &[(f64, f64)], t: f64) -> f64 {
    let i = rows.partition_point(|r| r.0 <= t);
    let (a, b) = (rows[i - 1], rows[i]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

fn float(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn norm_of_the_unit_interval() {
    let w = workspace();
    let r = run(
        w.path(),
        &[
            "norm",
            "--shape",
            "interval.json",
            "--k",
            "2",
            "--n",
            "1024",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert!((float(&v["power_value"]) - 2.0 / 3.0).abs() < 1e-3, "{v}");
    assert_eq!(v["source"]["kind"], "shape");
    assert_eq!(v["source"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn norm_of_the_empty_shape_is_zero() {
    let w = workspace();
    let r = run(
        w.path(),
        &["norm", "--shape", "empty.json", "--d", "2", "--n", "32"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(float(&r.json()["power_value"]), 0.0);
    // without a dimension the empty union cannot be placed on a grid
    assert_eq!(run(w.path(), &["norm", "--shape", "empty.json"]).code, 2);
}

#[test]
fn ball_matches_its_rearrangement() {
    let w = workspace();
    let r = run(
        w.path(),
        &[
            "norm",
            "--shape",
            "ball2d.json",
            "--k",
            "2",
            "--compare-star",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let ratio = float(&r.json()["star"]["ratio"]);
    assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
}

#[test]
fn fourier_and_recursive_agree() {
    let w = workspace();
    let base = ["norm", "--shape", "ellipse.json", "--n", "96"];
    let rec = run(w.path(), &base);
    let four = run(w.path(), &[&base[..], &["--method", "fourier"]].concat());
    assert_eq!((rec.code, four.code), (0, 0));
    let (a, b) = (
        float(&rec.json()["power_value"]),
        float(&four.json()["power_value"]),
    );
    assert!((a - b).abs() <= 1e-9 * a, "{a} {b}");
    assert_eq!(
        run(
            w.path(),
            &[&base[..], &["--method", "fourier", "--k", "3"]].concat()
        )
        .code,
        2
    );
}

#[test]
fn exit_codes() {
    let w = workspace();
    let d = w.path();
    assert_eq!(run(d, &["norm", "--shape", "broken.json"]).code, 2);
    assert_eq!(run(d, &["norm", "--shape", "missing.json"]).code, 2);
    assert_eq!(
        run(d, &["norm", "--shape", "interval.json", "--d", "2"]).code,
        2
    );
    assert_eq!(
        run(d, &["norm", "--shape", "interval.json", "--k", "0"]).code,
        2
    );
    assert_eq!(
        run(d, &["norm", "--shape", "interval.json", "--extent", "0.4"]).code,
        2
    );
    assert_eq!(
        run(d, &["norm", "--shape", "ball2d.json", "--k", "4"]).code,
        3
    );
    assert_eq!(
        run(d, &["norm", "--shape", "interval.json", "--threads", "0"]).code,
        2
    );
    assert_eq!(
        run_in(
            d,
            &["norm", "--shape", "interval.json"],
            &[("GWRS_THREADS", "x")]
        )
        .code,
        2
    );
    assert_eq!(run(d, &["frobnicate"]).code, 2);
    let budget = run(d, &["norm", "--shape", "ball2d.json", "--budget", "1e3"]);
    assert_eq!(budget.code, 3);
    assert!(budget.stderr.contains("budget"), "{}", budget.stderr);
}

#[test]
fn help_describes_every_command() {
    let w = workspace();
    for (cmd, phrase) in [
        ("norm", "uniformity norm"),
        ("chain", "c_j = integral f_*^{k-j} g^j"),
        ("rearrange", "F(t) = integral_0^t f_*"),
        ("stability", "moment-fit ellipsoid"),
    ] {
        let r = run(w.path(), &[cmd, "--help"]);
        assert_eq!(r.code, 0);
        assert!(r.stdout.contains(phrase), "{cmd}: {}", r.stdout);
    }
    assert!(run(w.path(), &["--help"]).stdout.contains("Exit codes"));
}

#[test]
fn chain_of_a_ball_is_flat() {
    let w = workspace();
    for shape in ["ball2d.json", "ellipse.json"] {
        let r = run(
            w.path(),
            &[
                "chain",
                "--shape",
                shape,
                "--k",
                "3",
                "--n",
                "64",
                "--assert-monotone",
            ],
        );
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v = r.json();
        assert!(float(&v["spread"]) < 1e-8, "{v}");
        assert_eq!(v["affine_reduced"], true);
        assert_eq!(v["terms"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn chain_of_two_intervals_increases() {
    let w = workspace();
    let r = run(
        w.path(),
        &[
            "chain",
            "--shape",
            "two_intervals.json",
            "--n",
            "512",
            "--assert-monotone",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    let c: Vec<f64> = v["terms"].as_array().unwrap().iter().map(float).collect();
    assert!(c[0] < c[1] && c[1] < c[2], "{c:?}");
    assert!(v["violations"].as_array().unwrap().is_empty());
    assert!(float(&v["power"]) <= float(&v["gamma_prev"]) * c[0] * (1.0 + float(&v["tol_disc"])));
}

#[test]
fn chain_from_stored_profiles() {
    let w = workspace();
    let d = w.path();
    mkdir(d, "out");
    let r = run(
        d,
        &[
            "rearrange",
            "--shape",
            "two_intervals.json",
            "--n",
            "512",
            "--out-dir",
            "out",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let args = [
        "chain",
        "--profile",
        "out/decreasing.tsv",
        "--d",
        "1",
        "--n",
        "512",
        "--assert-monotone",
    ];
    let ok = run(d, &args);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    let c: Vec<f64> = ok.json()["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(float)
        .collect();
    assert!(c[0] < c[2]);

    // a profile that rises is not a rearrangement
    let text = fs::read_to_string(d.join("out/decreasing.tsv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let body = lines.len() - 1;
    lines.swap(2, body - 1);
    fs::write(d.join("out/decreasing.tsv"), lines.join("\n") + "\n").unwrap();
    assert_eq!(run(d, &args).code, 4);
    assert_eq!(run(d, &args[..args.len() - 1]).code, 2);

    fs::write(d.join("out/decreasing.tsv"), "# profile step\n0.0 one\n").unwrap();
    assert_eq!(run(d, &args).code, 4);
    assert_eq!(
        run(
            d,
            &["chain", "--profile", "out/decreasing.tsv", "--n", "512"]
        )
        .code,
        2
    );
}

#[test]
fn rearrange_interval_profiles() {
    let w = workspace();
    let d = w.path();
    let out = mkdir(d, "out");
    let r = run(
        d,
        &[
            "rearrange",
            "--shape",
            "interval.json",
            "--n",
            "1024",
            "--out-dir",
            "out",
            "--bathtub-check",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert!(float(&v["bathtub"]["max_relative_gap"]) <= 1e-12);
    let (header, rows) = table(&out.join("cumulative.tsv"));
    assert_eq!(header, "# profile linear");
    // F(t) = t - t^2 / 4 for the autocorrelation of a unit interval
    assert!((interpolate(&rows, 1.0) - 0.75).abs() < 1e-3);
    let (header, rows) = table(&out.join("decreasing.tsv"));
    assert_eq!(header, "# profile step");
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1));
    let gwrs = fs::read(out.join("rearranged.gwrs")).unwrap();
    assert_eq!(&gwrs[..4], b"GWRS");
}

#[test]
fn rearrange_of_the_input_and_of_nothing() {
    let w = workspace();
    let d = w.path();
    let out = mkdir(d, "input");
    let r = run(
        d,
        &[
            "rearrange",
            "--shape",
            "interval.json",
            "--n",
            "64",
            "--of",
            "input",
            "--out-dir",
            "input",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = table(&out.join("cumulative.tsv"));
    for t in [0.25, 0.5, 0.99] {
        assert!((interpolate(&rows, t) - t).abs() < 1e-12);
    }
    assert_eq!(rows.last().unwrap().1, 1.0);

    let out = mkdir(d, "empty");
    let r = run(
        d,
        &[
            "rearrange",
            "--shape",
            "empty.json",
            "--d",
            "2",
            "--n",
            "16",
            "--out-dir",
            "empty",
            "--bathtub-check",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    for f in ["decreasing.tsv", "cumulative.tsv"] {
        assert!(table(&out.join(f)).1.iter().all(|r| r.1 == 0.0));
    }
    assert_eq!(
        run(
            d,
            &[
                "rearrange",
                "--shape",
                "interval.json",
                "--out-dir",
                "nowhere"
            ]
        )
        .code,
        2
    );
}

#[test]
fn grid_files_feed_back_in() {
    let w = workspace();
    let d = w.path();
    mkdir(d, "out");
    let args = ["--shape", "ellipse.json", "--n", "64"];
    let r = run(
        d,
        &[
            &["rearrange", "--of", "input", "--out-dir", "out"][..],
            &args,
        ]
        .concat(),
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let star = run(d, &[&["norm", "--compare-star"][..], &args].concat()).json();
    let from_file = run(d, &["norm", "--grid", "out/rearranged.gwrs"]).json();
    assert_eq!(from_file["source"]["kind"], "grid");
    assert_eq!(from_file["power_value"], star["star"]["power_value"]);
    fs::write(d.join("bad.gwrs"), b"GWRX").unwrap();
    assert_eq!(run(d, &["norm", "--grid", "bad.gwrs"]).code, 2);
}

#[test]
fn stability_writes_records_and_plot_data() {
    let w = workspace();
    let d = w.path();
    let out = mkdir(d, "sweep");
    let r = run(
        d,
        &[
            "stability",
            "--n",
            "96",
            "--amplitudes",
            "0",
            "--seeds",
            "0,1,2",
            "--out-dir",
            "sweep",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let records: Vec<Value> = fs::read_to_string(out.join("records.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 3);
    for rec in &records {
        // unperturbed ellipses: only the grid separates the set from its fit
        assert!(float(&rec["epsilon"]) < 0.05, "{rec}");
        assert!(float(&rec["delta"]) < float(&rec["tol_disc"]));
    }
    let plot = fs::read_to_string(out.join("plot.tsv")).unwrap();
    assert_eq!(plot.lines().next(), Some("# delta epsilon"));
    assert_eq!(plot.lines().count(), 4);
    assert_eq!(run(d, &["stability", "--out-dir", "missing"]).code, 2);
}

#[test]
fn default_sweep_is_monotone() {
    let w = workspace();
    let d = w.path();
    mkdir(d, "sweep");
    let r = run(d, &["stability", "--out-dir", "sweep", "--assert-monotone"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["records"], 40);
    assert_eq!(v["binned_monotone"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let w = workspace();
    let d = w.path();
    let (a, b) = (mkdir(d, "a"), mkdir(d, "b"));
    let sweep = |dir: &str, env: &[(&str, &str)]| {
        let args = [
            "stability",
            "--n",
            "64",
            "--amplitudes",
            "0.1,0.3",
            "--seeds",
            "4,5",
            "--out-dir",
            dir,
        ];
        let r = run_in(d, &args, env);
        assert_eq!(r.code, 0, "{}", r.stderr);
    };
    sweep("a", &[("GWRS_THREADS", "1")]);
    sweep("b", &[("GWRS_THREADS", "4")]);
    for f in ["records.jsonl", "plot.tsv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    for args in [
        &["norm", "--shape", "ellipse.json", "--k", "3", "--n", "48"][..],
        &[
            "chain",
            "--shape",
            "two_intervals.json",
            "--k",
            "3",
            "--n",
            "256",
        ][..],
        &[
            "rearrange",
            "--shape",
            "ball2d.json",
            "--n",
            "40",
            "--out-dir",
            "a",
        ][..],
    ] {
        let one = run(d, &[args, &["--threads", "1"]].concat());
        let many = run(d, &[args, &["--threads", "3"]].concat());
        assert_eq!(one.code, 0, "{}", one.stderr);
        assert_eq!(one.stdout, many.stdout);
    }
}

#[test]
fn pretty_and_file_output() {
    let w = workspace();
    let d = w.path();
    let r = run(d, &["norm", "--shape", "interval.json", "--pretty"]);
    assert_eq!(r.code, 0);
    assert!(
        r.stdout.lines().any(|l| l.starts_with("power_value")),
        "{}",
        r.stdout
    );
    let plain = run(d, &["norm", "--shape", "interval.json"]);
    let to_file = run(
        d,
        &["norm", "--shape", "interval.json", "--out", "norm.json"],
    );
    assert_eq!(to_file.stdout, "");
    assert_eq!(
        fs::read_to_string(d.join("norm.json")).unwrap(),
        plain.stdout
    );
}
