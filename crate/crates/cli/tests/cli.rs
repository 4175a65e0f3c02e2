use std::collections::HashMap;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_kernquad");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

struct Csv {
    header: HashMap<String, usize>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines
            .next()
            .expect("header line")
            .split(',')
            .enumerate()
            .map(|(i, c)| (c.to_string(), i))
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        *self
            .header
            .get(name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn text<'a>(&self, row: &'a [String], name: &str) -> &'a str {
        &row[self.col(name)]
    }

    fn num(&self, row: &[String], name: &str) -> f64 {
        self.text(row, name)
            .parse()
            .unwrap_or_else(|_| panic!("{name} not numeric"))
    }

    fn opt(&self, row: &[String], name: &str) -> Option<f64> {
        let s = self.text(row, name);
        (!s.is_empty()).then(|| s.parse().unwrap())
    }
}

fn csv(args: &[&str]) -> Csv {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Csv::parse(&String::from_utf8(out.stdout).unwrap())
}

#[test]
fn three_point_rule() {
    let t = csv(&["rule", "--ell", "1", "--n", "3"]);
    assert_eq!(t.rows.len(), 3);
    let mid = &t.rows[1];
    assert_eq!(t.num(mid, "node"), 0.0);
    let w: Vec<f64> = t.rows.iter().map(|r| t.num(r, "approx_weight")).collect();
    assert!(w.iter().all(|&w| w > 0.0));
    assert_eq!(w[0].to_bits(), w[2].to_bits());
    let x0 = t.num(&t.rows[0], "node");
    assert_eq!(x0, -t.num(&t.rows[2], "node"));
    // x̃ = x_GH / β with β = 5^{1/4}
    assert!((x0 + 3f64.sqrt() / 5f64.powf(0.25)).abs() < 1e-14);
}

#[test]
fn flat_rule_matches_gauss_hermite() {
    let t = csv(&["rule", "--ell", "1e8", "--n", "10"]);
    for r in &t.rows {
        assert!((t.num(r, "approx_weight") - t.num(r, "gh_weight")).abs() <= 1e-6);
        assert!((t.num(r, "node") - t.num(r, "gh_node")).abs() <= 1e-6);
    }
}

#[test]
fn single_node_sweeps() {
    let t = csv(&["positivity-sweep", "--ell", "1", "--n", "1"]);
    assert_eq!(t.rows.len(), 1);
    let delta_sq = 0.25 * (5f64.sqrt() - 1.0);
    let w = t.num(&t.rows[0], "min_weight");
    assert!((w - (1.0 + 2.0 * delta_sq).powf(-0.5)).abs() < 1e-14);

    let t = csv(&["weights-compare", "--ell", "1", "--n", "1"]);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.num(&t.rows[0], "symmetry_proxy"), 0.0);
    assert_eq!(t.text(&t.rows[0], "cutoff"), "false");
}

#[test]
fn derived_columns_recompute() {
    let t = csv(&["positivity-sweep", "--ells", "0.2,1", "--ns", "1:30"]);
    for r in &t.rows {
        let s = t.num(r, "weight_sum");
        assert!(((s - 1.0).abs() - t.num(r, "weight_sum_error")).abs() <= 1e-12);
        assert!(t.num(r, "min_weight") > 0.0);
        assert!(t.num(r, "abs_weight_sum") >= s - 1e-15);
    }

    let t = csv(&["integrate", "--ns", "1:20"]);
    for r in &t.rows {
        if let (Some(q), Some(e)) = (t.opt(r, "estimate"), t.opt(r, "abs_error")) {
            assert!(((q - t.num(r, "exact")).abs() - e).abs() <= 1e-12);
        }
    }

    for l in ["0.2", "1", "4"] {
        let t = csv(&["constants", "--ell", l]);
        let r = &t.rows[0];
        let eta = t.num(r, "eta");
        assert!((t.num(r, "c_theory") + eta.ln()).abs() <= 1e-12);
        let (lambda, beta) = (t.num(r, "lambda"), t.num(r, "beta"));
        assert!((eta - lambda.sqrt() * (1.0 / (beta * beta)).exp()).abs() <= 1e-12);
    }
}

#[test]
fn constants_small_length_scale() {
    let t = csv(&["constants", "--ell", "0.05", "--dims", "3"]);
    let r = &t.rows[0];
    assert!((t.num(r, "gamma") - 0.9512).abs() < 1e-4);
    assert_eq!(t.num(r, "hermite_k"), 1.087);
    assert!(t.num(r, "c_multi") > 0.0);

    let t = csv(&["constants", "--ell", "1", "--alpha", "2"]);
    let r = &t.rows[0];
    assert!(t.opt(r, "c_theory").is_none());
    assert!(t.num(r, "gamma").is_finite());
}

#[test]
fn odd_moment_integrates_to_zero() {
    let t = csv(&["integrate", "--m", "3", "--ns", "1:8"]);
    for r in &t.rows {
        assert_eq!(t.num(r, "exact"), 0.0);
        if let Some(e) = t.opt(r, "abs_error") {
            assert!(e < 1e-12, "{e}");
        }
    }
}

#[test]
fn wce_sweep_shape() {
    let t = csv(&[
        "wce-sweep",
        "--ells",
        "1",
        "--ns",
        "1:20",
        "--rules",
        "sghkq,gh",
    ]);
    let series = |rule: &str| -> Vec<(usize, f64)> {
        t.rows
            .iter()
            .filter(|r| t.text(r, "rule") == rule)
            .map(|r| (t.text(r, "n").parse().unwrap(), t.num(r, "wce")))
            .collect()
    };
    let (s, g) = (series("sghkq"), series("gh"));
    for (a, b) in s.iter().zip(&g) {
        assert_eq!(a.0, b.0);
        assert!(a.1 <= b.1 * (1.0 + 1e-9) + 1e-12, "n={}", a.0);
    }
    // log-linear decay: the mean slope over the first ten sizes is clearly negative
    let slope = (s[9].1.ln() - s[0].1.ln()) / 9.0;
    assert!(slope < -0.5, "{slope}");
    // the series stops at the first size below the floor
    let last = s.last().unwrap().1;
    assert!(last < 1.4901e-8 || s.len() == 20);
    assert!(s[..s.len() - 1].iter().all(|p| p.1 >= 1.4901e-8));
}

#[test]
fn tensor_error_decreases() {
    let t = csv(&["tensor-integrate", "--ns", "4:10", "--rules", "sghkq"]);
    let e: Vec<f64> = t.rows.iter().map(|r| t.num(r, "abs_error")).collect();
    assert_eq!(t.num(&t.rows[0], "points"), 64.0);
    for w in e.windows(2) {
        assert!(w[1] < w[0], "{e:?}");
    }
}

#[test]
fn deterministic_output() {
    let args = [
        "wce-sweep",
        "--ells",
        "0.2,1",
        "--ns",
        "1:40",
        "--rules",
        "sghkq,ukq,gh",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_and_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let st = run(&[
        "constants",
        "--ell",
        "1",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert!(st.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "constants");
    assert_eq!(v["rows"][0]["ell"], 1.0);
    assert!(v["rows"][0]["dims"].is_null());

    let data = dir.path().join("w.csv");
    let plot = dir.path().join("w.gp");
    let st = run(&[
        "wce-sweep",
        "--ell",
        "1",
        "--ns",
        "1:5",
        "--out",
        data.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains("set logscale y"));
    assert!(script.contains(data.to_str().unwrap()));
    assert_eq!(
        Csv::parse(&std::fs::read_to_string(&data).unwrap())
            .rows
            .len(),
        15
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["rule", "--ell", "1", "--n", "3"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["rule", "--ell", "1", "--n", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["rule", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["integrate", "--rules", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["constants", "--ell", "-1"]).status.code(), Some(2));
    let bad = run(&["rule", "--ell", "1", "--n", "200", "--alpha", "1e3"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}

#[test]
fn ill_conditioned_rows_are_flagged() {
    let t = csv(&["integrate", "--ell", "20", "--n", "150", "--rules", "kq"]);
    let r = &t.rows[0];
    assert_eq!(t.text(r, "flag"), "ill_conditioned");
    assert!(t.opt(r, "estimate").is_none());
    assert!(t.num(r, "condition") > 1e12);
}
