use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn expray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expray")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn address_summary() {
    let out = expray(&["address", "--address", "p:|0"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("speed    slow"), "{text}");
    assert!(text.contains("t_s      0 (exact)"), "{text}");

    let out = expray(&["address", "--address", "f:2.0", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["t_s"], 2.0);
    assert_eq!(v["speed"], "fast");
    assert_eq!(v["entries"].as_array().unwrap()[..3], [0, 1, 94]);
}

#[test]
fn malformed_address_is_a_usage_error() {
    let out = expray(&["address", "--address", "p:1,2|"]);
    assert_eq!(code(&out), 2);
    let out = expray(&["address", "--address", "q:|0", "--json"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["error"], "address_parse");
}

#[test]
fn missing_flag_is_a_usage_error() {
    assert_eq!(code(&expray(&["ray-dyn", "--address", "p:|0"])), 2);
    assert_eq!(code(&expray(&["no-such-command"])), 2);
}

#[test]
fn potential_below_domain_is_a_usage_error() {
    let out = expray(&[
        "ray-dyn",
        "--kappa",
        "0,0",
        "--address",
        "f:2.0",
        "--t-lo",
        "1",
        "--t-hi",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn classify_attracting_parameter_reports_not_escaping() {
    let out = expray(&["classify", "--kappa", "-2,0", "--json"]);
    assert_eq!(code(&out), 5);
    let v = json(&out);
    assert_eq!(v["error"], "not_escaping");
    assert_eq!(v["verdict"]["kind"], "bounded");
}

#[test]
fn classify_escaping_parameter() {
    let out = expray(&["classify", "--kappa", "1,0", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["address"], "p:|0");
    assert!(v["roundtrip_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn endpoint_requires_fast_address() {
    assert_eq!(code(&expray(&["endpoint", "--address", "p:|1"])), 5);
    let out = expray(&["endpoint", "--address", "f:1.0", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["verdict"]["kind"], "escaping");
}

#[test]
fn parameter_ray_on_real_axis() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ray.csv");
    let out = expray(&[
        "ray-par",
        "--address",
        "p:|0",
        "--t-lo",
        "1",
        "--t-hi",
        "10",
        "--samples",
        "20",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,re,im,d_re,d_im,depth,residual,newton_iters");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert_eq!(r.len(), 8);
        assert!(r[2].abs() < 1e-12, "Im kappa = {}", r[2]);
    }
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ray.json")).unwrap()).unwrap();
    assert_eq!(side["address"], "p:|0");
    assert_eq!(side["samples"], 20);
}

#[test]
fn dynamic_ray_premature_end_exit_code() {
    // Landing parameter of `f:1.0`; the preimage ray `0 s` runs into it.
    let out = expray(&["endpoint", "--address", "f:1.0", "--json"]);
    let k = &json(&out)["kappa"];
    let kappa = format!("{},{}", k[0], k[1]);
    let out = expray(&[
        "ray-dyn",
        "--kappa",
        &kappa,
        "--address",
        "f:0|1.0",
        "--t-lo",
        "0.6931471805599453",
        "--t-hi",
        "6",
        "--samples",
        "40",
        "--json",
    ]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["truncation"]["kind"], "premature_end");
    assert_eq!(v["samples"], 39);
}

#[test]
fn complete_dynamic_ray_to_stdout() {
    let out = expray(&[
        "ray-dyn",
        "--kappa",
        "1,0",
        "--address",
        "p:|1",
        "--t-lo",
        "0.5",
        "--t-hi",
        "5",
        "--samples",
        "8",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("t,re,im,d_re,d_im,depth,residual\n"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "address = \"p:|1\"\nkappa = [1.0, 0.0]\nt_lo = 0.5\nt_hi = 5.0\nsamples = 6\n",
    );
    let out = expray(&["ray-dyn", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 7);
    let out = expray(&["ray-dyn", "--config", &cfg, "--samples", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "address = \"p:|1\"\ncolour = \"red\"\n");
    let out = expray(&["address", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn render_writes_ppm_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("p.ppm");
    let counts = dir.path().join("p.csv");
    let out = expray(&[
        "render-dyn",
        "--kappa",
        "1,0",
        "--grid",
        "0,0,8,6,16,12",
        "--budget",
        "50",
        "--out",
        ppm.to_str().unwrap(),
        "--counts",
        counts.to_str().unwrap(),
        "--ray",
        "p:|0;0.5;4;10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let img = expray::formats::parse_ppm(&std::fs::read(&ppm).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (16, 12));
    let text = std::fs::read_to_string(&counts).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|l| l.split(',').count() == 16));

    let out = expray(&["render-dyn", "--grid", "0,0,8,6,16,12", "--out", ppm.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = expray(&[
        "render-par",
        "--grid",
        "0,0,8,6,16,12",
        "--out",
        "/nonexistent-dir/x.ppm",
    ]);
    assert_eq!(code(&out), 1);
}
