use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_causal-diff"));
    c.env_remove("CAUSAL_DIFF_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn causal-diff")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("summary is JSON")
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("error is JSON")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn green_3d_is_an_annulus_between_half_and_one_and_a_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = run(&["green", "--dim", "3", "--c0", "1", "--tau", "1", "--t", "1.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout_json(&o);
    let support = s["support"].as_array().unwrap();
    assert!((support[0].as_f64().unwrap() - 0.5).abs() < 1e-3);
    assert!((support[1].as_f64().unwrap() - 1.5).abs() < 1e-3);
    assert!(s["gaussian_comparison"]["mass_outside_light_cone"].as_f64().unwrap() > 0.0);

    let body = fs::read_to_string(out.join("green.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("r,density,atom_mass"));
    for line in lines {
        let r: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!((0.5 - 1e-9..=1.5 + 1e-9).contains(&r), "{r}");
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&[
        "sample", "--dim", "2", "--t", "1.5", "--samples", "2000", "--seed", "9", "--out", a.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o2 = run(&["rerun", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o2.status.success(), "{}", String::from_utf8_lossy(&o2.stderr));
    assert_eq!(o.stdout, o2.stdout);
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));
}

#[test]
fn constant_field_is_reproduced_and_input_is_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.csv");
    let mut body = String::from("i0,value\n");
    for i in 0..21 {
        body.push_str(&format!("{i},3.25\n"));
    }
    fs::write(&u, &body).unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "simulate", "--dim", "1", "--u", u.to_str().unwrap(), "--origin=-1", "--h", "0.1", "--t", "2.0",
        "--boundary", "clamp", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&u).unwrap(), body);
    let v = fs::read_to_string(out.join("v_000.csv")).unwrap();
    for line in v.lines().skip(1) {
        let val: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(val, 3.25);
    }
}

#[test]
fn gaussian_symbol_is_incompatible() {
    let o = run(&["pws", "--symbol", "gaussian", "--D0", "1", "--t", "1", "--rmax", "20"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["classification"], "incompatible");
}

#[test]
fn shell_reference_recovers_its_radius() {
    let o = run(&["pws", "--symbol", "shell", "--radius", "2"]);
    let s = stdout_json(&o);
    assert_eq!(s["classification"], "compatible-with-compact-support");
    assert!((s["fitted_type"].as_f64().unwrap() - 2.0).abs() < 0.05);
}

#[test]
fn probe_reports_the_degree() {
    let o = run(&["probe", "--b", "-1", "--degree", "4"]);
    assert!((stdout_json(&o)["exponent"].as_f64().unwrap() - 4.0).abs() < 0.1);
}

#[test]
fn invalid_configuration_exits_with_2() {
    let o = run(&["green", "--dim", "4", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "unsupported_dimension");

    let o = run(&["green", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "invalid_config");

    let o = run(&["limit", "--t-end", "1", "--taus", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn insufficient_padding_exits_with_3_and_names_the_box() {
    let o = run(&["simulate", "--dim", "2", "--n", "41", "--half-width", "1", "--t", "2.0"]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "out_of_domain");
    assert_eq!(e["required_box"].as_array().unwrap().len(), 2);
}

#[test]
fn residual_tolerance_violation_exits_with_4() {
    let args = ["residual", "--dim", "2", "--t", "0.5", "--x", "0.1,0.2", "--kind", "continuity"];
    let o = run(&[&args[..], &["--tol", "1e-20"]].concat());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "tolerance");
    let o = run(&[&args[..], &["--tol", "1e-3"]].concat());
    assert!(o.status.success());
    let orders = stdout_json(&o)["observed_orders"].clone();
    assert!(orders.as_array().unwrap().iter().all(|v| v.as_f64().unwrap() > 1.8));
}

#[test]
fn check_with_mass_leak_fails_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run(&["check", "--mc-samples", "5000", "--mass-leak", "0.9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let mass = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "evolution.mass_conservation")
        .unwrap();
    assert_eq!(mass["passed"], false);
}

#[test]
fn thread_flag_and_env_var_are_accepted() {
    let o = run(&["--threads", "1", "probe", "--b", "1", "--degree", "2"]);
    assert!(o.status.success());
    let o = bin()
        .env("CAUSAL_DIFF_THREADS", "1")
        .args(["probe", "--b", "1", "--degree", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = run(&["--threads", "0", "probe", "--b", "1", "--degree", "2"]);
    assert_eq!(o.status.code(), Some(2));
}
