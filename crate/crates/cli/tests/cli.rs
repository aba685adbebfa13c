use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spdelab"));
    c.env_remove("SPDELAB_THREADS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &TempDir, text: &str) -> String {
    let p = dir.path().join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn minimal_config_gets_defaults() {
    let d = TempDir::new().unwrap();
    let cfg = config(&d, "[model]\nfamily = \"lks\"\nd = 2\nt = 1.0\n");
    let out = d.path().join("o");
    let o = bin()
        .args(["--config", &cfg, "--out"])
        .arg(&out)
        .args(["cov", "eval", "--t", "1", "--s", "0.5"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(m.contains("dim = 2"));
    assert!(m.contains("epsilon = 1.0") && m.contains("theta = 0.0"), "{m}");
    assert!(m.contains("seeds = [1]"));
}

#[test]
fn out_of_range_beta_is_rejected_with_key() {
    let d = TempDir::new().unwrap();
    let cfg = config(&d, "[model]\nfamily = \"tf\"\ndim = 1\nt = 1.0\nbeta = 0.7\n");
    let o = bin().args(["--config", &cfg, "specfun", "eval", "--function", "gamma", "--x", "2"]).output().unwrap();
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("model.beta"), "{}", stderr(&o));
}

#[test]
fn duplicate_and_unknown_keys_are_rejected() {
    let d = TempDir::new().unwrap();
    for text in [
        "[model]\nfamily = \"lks\"\ndim = 1\ndim = 2\nt = 1.0\n",
        "[model]\nfamily = \"lks\"\ndim = 1\nt = 1.0\nwidth = 3\n",
        "seeds = [1]\n[grid]\nstep = 0.1\n",
    ] {
        let cfg = config(&d, text);
        let o = bin().args(["--config", &cfg, "specfun", "eval", "--function", "gamma", "--x", "2"]).output().unwrap();
        assert_eq!(code(&o), 3, "{text}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: config"), "{}", stderr(&o));
    }
}

#[test]
fn parameters_of_the_other_family_are_rejected() {
    let d = TempDir::new().unwrap();
    let o = run(&["kernel", "eval", "--beta", "0.25", "--t", "1", "--r", "0"], d.path());
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("model.beta"));
}

#[test]
fn floats_round_trip_with_seventeen_digits() {
    let d = TempDir::new().unwrap();
    let o = run(&["specfun", "eval", "--function", "ml", "--beta", "0.5", "--x=-0.3,-7"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("specfun.csv")).unwrap();
    let (head, rows) = spdelab::io::parse_csv(&text).unwrap();
    assert_eq!(head, ["x", "value"]);
    for row in rows {
        let want = spdelab::specfun::mittag_leffler(0.5, row[0]).unwrap();
        assert_eq!(row[1].to_bits(), want.to_bits());
    }
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}

fn outputs(args: &[&str], threads: &str) -> Vec<(String, Vec<u8>)> {
    let d = TempDir::new().unwrap();
    let o = bin()
        .args(["--threads", threads, "--seed", "11", "--out"])
        .arg(d.path())
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(d.path())
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    files
}

#[test]
fn stochastic_commands_are_byte_identical() {
    let cases: [&[&str]; 7] = [
        &["simulate", "--method", "brownian", "--n", "513", "--spacing", "0.001953125", "--replicas", "8"],
        &["simulate", "--method", "increments", "--family", "tf", "--beta", "0.25", "--n", "257", "--spacing", "0.00390625", "--replicas", "4"],
        &["simulate", "--method", "spectral", "--field", "gradient", "--n", "512", "--spacing", "0.001", "--replicas", "4"],
        &["simulate", "--method", "cholesky", "--start", "0.05", "--n", "20", "--spacing", "0.05", "--replicas", "4"],
        &["moduli", "--method", "brownian", "--n", "2049", "--spacing", "0.00048828125", "--replicas", "16", "--delta-max", "0.25", "--levels", "5"],
        &["moduli", "--mode", "local", "--method", "brownian", "--n", "2049", "--spacing", "0.00048828125", "--replicas", "64", "--delta-max", "0.25", "--levels", "5"],
        &["cov", "slnd", "--dim", "3", "--trials", "40"],
    ];
    for args in cases {
        let a = outputs(args, "1");
        let b = outputs(args, "1");
        let c = outputs(args, "3");
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a, c, "{args:?} across thread counts");
    }
}

#[test]
fn different_seeds_differ() {
    let args = ["simulate", "--method", "brownian", "--n", "65", "--spacing", "0.015625", "--replicas", "2"];
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    assert_eq!(code(&bin().args(["--seed", "1", "--out"]).arg(d1.path()).args(args).output().unwrap()), 0);
    assert_eq!(code(&bin().args(["--seed", "2", "--out"]).arg(d2.path()).args(args).output().unwrap()), 0);
    let a = fs::read(d1.path().join("paths_seed1.csv")).unwrap();
    let b = fs::read(d2.path().join("paths_seed2.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn manifest_records_outputs_and_seeds() {
    let d = TempDir::new().unwrap();
    let cfg = config(&d, "seeds = [4, 9]\n[simulate]\nmethod = \"brownian\"\nreplicas = 2\n[grid]\nn = 33\nspacing = 0.03125\n");
    let out = d.path().join("o");
    let o = bin().args(["--config", &cfg, "--out"]).arg(&out).arg("simulate").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: toml::Value = toml::from_str(&fs::read_to_string(out.join("manifest.toml")).unwrap()).unwrap();
    assert_eq!(m["command"].as_str(), Some("simulate"));
    let seeds: Vec<i64> = m["config"]["seeds"].as_array().unwrap().iter().map(|v| v.as_integer().unwrap()).collect();
    assert_eq!(seeds, [4, 9]);
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["paths_seed4.csv", "paths_seed9.csv"]);
    for v in m["outputs"].as_array().unwrap() {
        let bytes = fs::read(out.join(v["file"].as_str().unwrap())).unwrap();
        assert_eq!(v["bytes"].as_integer().unwrap() as usize, bytes.len());
        assert_eq!(v["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn thread_count_env_and_flag() {
    let d = TempDir::new().unwrap();
    let args = ["specfun", "eval", "--function", "erfcx", "--x", "1"];
    let o = bin().env("SPDELAB_THREADS", "2").arg("--out").arg(d.path()).args(args).output().unwrap();
    assert_eq!(code(&o), 0);
    let m = fs::read_to_string(d.path().join("manifest.toml")).unwrap();
    assert!(m.contains("threads = 2"), "{m}");
    let o = bin()
        .env("SPDELAB_THREADS", "2")
        .args(["--threads", "1", "--out"])
        .arg(d.path())
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let m = fs::read_to_string(d.path().join("manifest.toml")).unwrap();
    assert!(m.contains("threads = 1"), "{m}");
}

#[test]
fn verify_subset_by_module_name() {
    let d = TempDir::new().unwrap();
    let o = run(&["verify", "--only", "kernels"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().all(|l| l.starts_with("[PASS]")));
    let report = fs::read_to_string(d.path().join("verify.csv")).unwrap();
    let ids: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["2", "3"]);
    assert!(report.starts_with("id,target,measured,tolerance,pass"));
}

#[test]
fn verify_expected_failure_exit_code() {
    let d = TempDir::new().unwrap();
    let o = run(&["verify", "--only", "1"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("[XFAIL]"));
}

#[test]
fn perturbed_constant_fails_verify() {
    let d = TempDir::new().unwrap();
    let cfg = config(&d, "[verify]\nconstant_perturbation = 1.05\n");
    let o = bin()
        .args(["--config", &cfg, "--only", "4", "--out"])
        .arg(d.path().join("o"))
        .arg("verify")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("constant corrected"));
}

#[test]
fn usage_errors() {
    let d = TempDir::new().unwrap();
    let o = run(&["--only", "3", "simulate"], d.path());
    assert_eq!(code(&o), 3);
    let o = run(&["verify", "--only", "13"], d.path());
    assert_eq!(code(&o), 3);
    let o = run(&["specfun", "eval", "--function", "ml", "--x", "1"], d.path());
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("--beta"));
    let o = run(&["simulate", "--method", "spectral", "--family", "tf", "--dim", "2"], d.path());
    assert_eq!(code(&o), 4);
    let o = run(&["frobnicate"], d.path());
    assert_eq!(code(&o), 3);
}
