use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn multipolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multipolar"))
        .args(args)
        .env_remove("MULTIPOLAR_CONFIG")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Splits CSV output into its JSON header and the data rows.
fn csv_of(out: &Output) -> (Value, Vec<csv::StringRecord>, csv::StringRecord) {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let (first, rest) = text.split_once("\r\n").unwrap();
    let header: Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let columns = reader.headers().unwrap().clone();
    let rows = reader.records().map(|r| r.unwrap()).collect();
    (header, rows, columns)
}

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn rates_reproduce_lyman_alpha() {
    let out = multipolar(&[
        "rates",
        "--transition",
        "1s:2pz",
        "--sigma-p",
        "0",
        "--convention",
        "hl",
        "--omega-ev",
        "10.2",
    ]);
    let v = json_of(&out);
    let gamma = v["results"][0]["gamma_0"].as_f64().unwrap();
    assert!((gamma / 6.27e8 - 1.0).abs() < 5e-3, "{gamma}");
    let header = &v["header"];
    assert_eq!(header["convention"], "hl");
    assert_eq!(header["atom"]["omega"], 10.2);
    assert!(header["version"].is_string());
    assert!(header["seed"].is_u64());
}

#[test]
fn rates_for_several_spreads() {
    let v = json_of(&multipolar(&["rates", "--sigma-p", "0,0.01"]));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    let g0 = results[1]["gamma_0"].as_f64().unwrap();
    let numeric = results[1]["gamma_numeric"].as_f64().unwrap();
    assert!(numeric > g0);
}

#[test]
fn vep_range_gives_one_row_per_time() {
    let out = multipolar(&["vep", "--T-range", "0.01:10:60", "--convention", "paper"]);
    let (header, rows, columns) = csv_of(&out);
    assert_eq!(
        &columns,
        &csv::StringRecord::from(vec!["T", "probability", "error"])
    );
    assert_eq!(rows.len(), 60);
    assert_eq!(header["command"], "vep");
    assert_eq!(header["convention"], "paper");
    assert_eq!(header["arguments"]["method"], "closed");
    let t: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let p: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(t[0], 0.01);
    assert_eq!(t[59], 10.0);
    assert!(p.iter().all(|x| *x >= 0.0));
    // past the peak near T = 5e-4 the curve only falls
    assert!(p.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn vep_default_grid_has_an_interior_peak() {
    let (_, rows, _) = csv_of(&multipolar(&["vep"]));
    let p: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(p.len(), 60);
    let imax = (0..p.len()).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap();
    assert!(imax > 0 && imax < 59);
}

#[test]
fn vep_methods_agree() {
    let closed = csv_of(&multipolar(&["vep", "--T", "0.3"])).1;
    let pipe = csv_of(&multipolar(&["vep", "--T", "0.3", "--method", "pipeline"])).1;
    let a: f64 = closed[0][1].parse().unwrap();
    let b: f64 = pipe[0][1].parse().unwrap();
    assert!((a / b - 1.0).abs() < 1e-8);
    let boosted = multipolar(&[
        "vep",
        "--T",
        "0.3",
        "--v",
        "0.5",
        "--samples",
        "50000",
        "--format",
        "json",
    ]);
    let v = json_of(&boosted);
    let p = v["results"][0]["probability"].as_f64().unwrap();
    let e = v["results"][0]["error"].as_f64().unwrap();
    assert!((p - a).abs() <= 4.0 * e);
    assert_eq!(v["header"]["arguments"]["samples"], 50000);
}

#[test]
fn boost_check_reports_pass() {
    let out = multipolar(&[
        "boost-check",
        "--v",
        "0.5",
        "--T",
        "0.5",
        "--samples",
        "100000",
        "--seed",
        "42",
    ]);
    let v = json_of(&out);
    let r = &v["results"][0];
    for key in ["rest", "boosted", "mc_sigma", "z", "pointwise_max_relative"] {
        assert!(r[key].is_number(), "{key}");
    }
    assert_eq!(r["pass"], true);
    assert_eq!(v["header"]["seed"], 42);
}

#[test]
fn seeded_runs_are_identical() {
    let args = [
        "vep",
        "--T",
        "0.5",
        "--v",
        "0.3",
        "--samples",
        "20000",
        "--seed",
        "3",
    ];
    let a = multipolar(&args);
    let b = multipolar(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = multipolar(&[
        "vep",
        "--T",
        "0.5",
        "--v",
        "0.3",
        "--samples",
        "20000",
        "--seed",
        "4",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn wightman_tensor_rows() {
    let v = json_of(&multipolar(&[
        "wightman",
        "--x",
        "0,0,0,0",
        "--xp",
        "0.5,0.3,0,0.2",
    ]));
    assert_eq!(v["results"].as_array().unwrap().len(), 36);
    let m = json_of(&multipolar(&[
        "wightman",
        "--x",
        "0,0,0,0",
        "--xp",
        "0.5,0.3,0,0.2",
        "--pairing",
        "EE",
        "--method",
        "momentum",
    ]));
    let c = json_of(&multipolar(&[
        "wightman",
        "--x",
        "0,0,0,0",
        "--xp",
        "0.5,0.3,0,0.2",
        "--pairing",
        "EE",
    ]));
    for (a, b) in m["results"]
        .as_array()
        .unwrap()
        .iter()
        .zip(c["results"].as_array().unwrap())
    {
        let (x, y) = (a["re"].as_f64().unwrap(), b["re"].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0));
    }
}

#[test]
fn hydrogen_subcommands() {
    let v = json_of(&multipolar(&[
        "hydrogen",
        "matrix-element",
        "--transition",
        "1s:2pz",
    ]));
    let ratio = v["results"][0]["norm_squared_over_a0_squared"]
        .as_f64()
        .unwrap();
    assert!((ratio / (32768.0 / 59049.0) - 1.0).abs() < 1e-10);
    let (_, rows, _) = csv_of(&multipolar(&[
        "hydrogen",
        "form-factor",
        "--k",
        "0,0,1000",
        "--k",
        "1000,0,0",
        "--format",
        "csv",
    ]));
    assert_eq!(rows.len(), 2);
    // along the dipole axis the form factor is purely longitudinal
    let transverse: f64 = rows[0][10].parse().unwrap();
    assert_eq!(transverse, 0.0);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["rates", "--transition", "1s:2s"],
        vec!["rates", "--transition", "1s:9q"],
        vec!["rates", "--sigma-p", "0.2"],
        vec!["vep", "--T", "-1"],
        vec!["vep", "--T", "0.1", "--T-range", "0.1:1:3"],
        vec!["vep", "--T", "0.1", "--v", "0.9"],
        vec!["wightman", "--x", "0,0,0,0", "--xp", "0,0,0,0"],
        vec!["rates", "--no-such-flag"],
        vec!["frobnicate"],
        vec!["rates", "--omega-ev", "1e6"],
    ] {
        let out = multipolar(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn unknown_label_lists_supported_ones() {
    let out = multipolar(&["hydrogen", "matrix-element", "--transition", "1s:2x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2pz"));
}

#[test]
fn config_file_values_and_precedence() {
    let f = config_file("# reference-curve constants\nomega_ev = 3.73\nseed = 11\n");
    let path = f.path().to_str().unwrap();
    let v = json_of(&multipolar(&["rates", "--config", path]));
    assert_eq!(v["header"]["atom"]["omega"], 3.73);
    assert_eq!(v["header"]["seed"], 11);
    assert_eq!(v["header"]["config"]["source"], path);
    let v = json_of(&multipolar(&[
        "rates",
        "--config",
        path,
        "--omega-ev",
        "10.2",
    ]));
    assert_eq!(v["header"]["atom"]["omega"], 10.2);
}

#[test]
fn empty_config_gives_defaults() {
    let f = config_file("");
    let a = json_of(&multipolar(&[
        "rates",
        "--config",
        f.path().to_str().unwrap(),
    ]));
    let b = json_of(&multipolar(&["rates"]));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["header"]["atom"], b["header"]["atom"]);
}

#[test]
fn config_errors_name_the_line() {
    for (text, line) in [
        ("seed = 1\ncolour = red\n", 2),
        ("\nomega_ev 3.73\n", 2),
        ("a0 = big", 1),
    ] {
        let f = config_file(text);
        let out = multipolar(&["rates", "--config", f.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(&format!("line {line}")), "{err}");
    }
}

#[test]
fn config_path_from_environment() {
    let f = config_file("omega_ev = 3.73\n");
    let out = Command::new(env!("CARGO_BIN_EXE_multipolar"))
        .arg("rates")
        .env("MULTIPOLAR_CONFIG", f.path())
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["header"]["atom"]["omega"], 3.73);
}

#[test]
fn output_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = multipolar(&[
        "vep",
        "--T-range",
        "0.01:1:5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn numerical_failures_exit_with_three() {
    // on the light cone the regulated mode sum has no limit to extrapolate to
    let out = multipolar(&[
        "wightman",
        "--x",
        "0,0,0,0",
        "--xp",
        "0.5,0.3,0,0.4",
        "--pairing",
        "EE",
        "--method",
        "momentum",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // too few samples for the effective-sample-size floor
    let out = multipolar(&["vep", "--T", "0.5", "--v", "0.5", "--samples", "1500"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("effective sample size"));
    assert!(out.stdout.is_empty());
}
