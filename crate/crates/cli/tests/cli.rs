use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fm2i(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fm2i")).args(args).output().expect("spawn fm2i")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_series(dir: &Path, name: &str, values: &[f64]) -> std::path::PathBuf {
    let path = dir.join(name);
    let body: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    fs::write(&path, format!("value\n{}\n", body.join("\n"))).unwrap();
    path
}

fn sine(n: usize) -> Vec<f64> {
    (0..n).map(|t| 30.0 + 5.0 * (t as f64 / 1.7).sin()).collect()
}

fn single_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("space.conf");
    fs::write(&path, "# one configuration\ntransforms = mac\ndifferenced = false\npatch_sizes = 3\n").unwrap();
    path
}

fn forecast_values(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn missing_input_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = fm2i(&["forecast", "--input", "/nonexistent/series.csv", "--horizon", "3", "--auto", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_input_exits_2() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "value\n1\n2\nthree\n").unwrap();
    let out = fm2i(&["forecast", "--input", p(&input), "--horizon", "1", "--auto", "--out", p(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_short_series_exits_3() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "short.csv", &[1.0, 2.0, 3.0, 4.0]);
    let out = fm2i(&["forecast", "--input", p(&input), "--horizon", "3", "--auto", "--out", p(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn incomplete_external_method_exits_4() {
    let tmp = TempDir::new().unwrap();
    let dataset = tmp.path().join("data.csv");
    let row = |id: &str| {
        let v: Vec<String> = sine(24).iter().map(|v| format!("{v:.4}")).collect();
        format!("{id},Micro,Yearly,4,24,{}\n", v.join(","))
    };
    fs::write(&dataset, format!("id,category,period,horizon,n,values\n{}{}", row("a"), row("b"))).unwrap();
    let methods = tmp.path().join("methods");
    fs::create_dir(&methods).unwrap();
    fs::write(methods.join("Other.csv"), "id,step,value\na,1,1\na,2,1\na,3,1\na,4,1\n").unwrap();
    let out = fm2i(&[
        "bench",
        "--dataset",
        p(&dataset),
        "--methods",
        p(&methods),
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing b"));
}

#[test]
fn forecast_outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "s.csv", &sine(40));
    let conf = single_config(tmp.path());
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let dir = tmp.path().join(name);
            let out = fm2i(&[
                "forecast", "--input", p(&input), "--horizon", "4", "--config", p(&conf), "--holdout", "--out", p(&dir),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            dir
        })
        .collect();
    for file in ["forecast.csv", "plot.csv", "selected.csv", "metrics.csv"] {
        let a = fs::read(runs[0].join(file)).unwrap();
        let b = fs::read(runs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
    assert_eq!(forecast_values(&runs[0].join("forecast.csv")).len(), 4);
    assert!(runs[0].join("manifest.json").exists());
}

#[test]
fn sequential_flag_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "s.csv", &sine(30));
    let conf = tmp.path().join("space.conf");
    fs::write(&conf, "transforms = mac, gasf\npatch_sizes = 3, 5\n").unwrap();
    let run = |extra: &[&str], name: &str| {
        let dir = tmp.path().join(name);
        let mut args = extra.to_vec();
        args.extend(["forecast", "--input", p(&input), "--horizon", "3", "--config", p(&conf), "--out", p(&dir)]);
        assert!(fm2i(&args).status.success());
        fs::read(dir.join("forecast.csv")).unwrap()
    };
    assert_eq!(run(&["--sequential"], "seq"), run(&[], "par"));
}

#[test]
fn zero_horizon_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "s.csv", &sine(30));
    let conf = single_config(tmp.path());
    let dir = tmp.path().join("o");
    let out = fm2i(&["forecast", "--input", p(&input), "--horizon", "0", "--config", p(&conf), "--out", p(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.join("forecast.csv")).unwrap(), "id,step,value\n");
}

#[test]
fn constant_series_forecasts_constant() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "flat.csv", &[7.25; 30]);
    let conf = tmp.path().join("space.conf");
    fs::write(&conf, "transforms = mac, gasf, rpm\ndifferenced = both\npatch_sizes = 3\n").unwrap();
    let dir = tmp.path().join("o");
    let out = fm2i(&["forecast", "--input", p(&input), "--horizon", "5", "--config", p(&conf), "--out", p(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for v in forecast_values(&dir.join("forecast.csv")) {
        assert!((v - 7.25).abs() <= 1e-6, "{v}");
    }
}

#[test]
fn gc_transform_reports_clamping() {
    let tmp = TempDir::new().unwrap();
    let ramp: Vec<f64> = (0..16).map(f64::from).collect();
    let input = write_series(tmp.path(), "s.csv", &ramp);
    let dir = tmp.path().join("o");
    // [0, 1] scaling puts only the two endpoints outside the GC domain
    let out = fm2i(&["transform", "--input", p(&input), "--kind", "gc", "--bounds", "0,1", "--out", p(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("2 value(s) clamped into [0.05, 0.95] for gc"), "{stderr}");
    assert!(dir.join("image.ppm").exists());
}

#[test]
fn gasf_matrix_is_symmetric() {
    let tmp = TempDir::new().unwrap();
    let input = write_series(tmp.path(), "s.csv", &sine(12));
    let dir = tmp.path().join("o");
    assert!(fm2i(&["transform", "--input", p(&input), "--kind", "gasf", "--out", p(&dir)]).status.success());
    let m: Vec<Vec<f64>> = fs::read_to_string(dir.join("matrix.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(m.len(), 12);
    for (i, row) in m.iter().enumerate() {
        assert_eq!(row.len(), 12);
        for (j, v) in row.iter().enumerate() {
            assert!((v - m[j][i]).abs() <= 1e-12);
        }
    }
}
