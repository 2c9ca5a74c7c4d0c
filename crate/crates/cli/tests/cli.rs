use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use symplectic_polar::{check_structure, validate_channel, Channel64, Matrix64, StructureKind, TolerancePolicy, Vector64};
use tempfile::TempDir;

fn sympolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympolar")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matrix(v: &Value) -> Matrix64 {
    let rows: Vec<Vec<f64>> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect();
    Matrix64::from_rows(&rows).unwrap()
}

fn read_matrix(p: &Path) -> Matrix64 {
    let v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    matrix(&v["rows"])
}

fn read_channel(p: &Path) -> Channel64 {
    let v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    let l: Vec<f64> = v["l"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    Channel64::new(matrix(&v["rows"]), Vector64::from_slice(&l).unwrap(), matrix(&v["alpha"])).unwrap()
}

const I1: &str = r#"{"n": 1, "rows": [[1, 0], [0, 1]]}"#;
const J1: &str = r#"{"n": 1, "rows": [[0, -1], [1, 0]]}"#;
const D1: &str = r#"{"n": 1, "rows": [[1, 0], [0, -1]]}"#;

#[test]
fn decompose_identity_and_j() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.json", I1);
    let o = sympolar(&["decompose", s(&i), "--variant", "ms", "--no-timestamp"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["verdict"], "ok");
    assert_eq!(read_matrix(&dir.path().join("i.ms.1.json")), Matrix64::identity(1).unwrap());
    assert_eq!(read_matrix(&dir.path().join("i.ms.2.json")), Matrix64::identity(1).unwrap());

    let j = write(dir.path(), "j.json", J1);
    let o = sympolar(&["decompose", s(&j), "-v", "MS", "--no-timestamp"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_matrix(&dir.path().join("j.ms.1.json")), Matrix64::identity(1).unwrap());
    assert_eq!(read_matrix(&dir.path().join("j.ms.2.json")), read_matrix(&j));
}

#[test]
fn decompose_reports_precondition() {
    let dir = TempDir::new().unwrap();
    let d = write(dir.path(), "d.json", D1);
    let o = sympolar(&["decompose", s(&d), "--variant", "ms"]);
    assert_eq!(code(&o), 2);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("negative") && stderr.contains("-1.0"), "{stderr}");
    let r = report(&o);
    assert_eq!(r["verdict"], "error");
    assert_eq!(r["classification"]["real_eigenvalues"][0].as_f64(), Some(-1.0));
    assert!(!dir.path().join("d.ms.1.json").exists());
}

#[test]
fn verify_examples() {
    let dir = TempDir::new().unwrap();
    let (i, j, d) = (write(dir.path(), "i.json", I1), write(dir.path(), "j.json", J1), write(dir.path(), "d.json", D1));
    let ok = sympolar(&["verify", s(&j), "--variant", "ms", "--factors", s(&i), s(&j)]);
    assert_eq!(code(&ok), 0);
    assert_eq!(report(&ok)["verdict"], "ok");
    let bad = sympolar(&["verify", s(&j), "--variant", "ms", "--factors", s(&i), s(&d)]);
    assert_eq!(code(&bad), 4);
    assert_eq!(report(&bad)["verdict"], "fail");
    assert_eq!(code(&sympolar(&["verify", s(&i), "--variant", "ms", "--factors", s(&i), s(&i)])), 0);
}

#[test]
fn io_and_argument_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&sympolar(&["decompose", s(&missing), "--variant", "ms"])), 1);
    let ragged = write(dir.path(), "ragged.json", r#"{"n": 1, "rows": [[1, 0], [0]]}"#);
    assert_eq!(code(&sympolar(&["decompose", s(&ragged), "--variant", "ms"])), 1);
    let i = write(dir.path(), "i.json", I1);
    assert_eq!(code(&sympolar(&["decompose", s(&i), "--variant", "xyz"])), 1);
    assert_eq!(code(&sympolar(&["generate", "symplectic", "0", "1"])), 1);
    assert_eq!(code(&sympolar(&["channel", "validate", s(&i)])), 1);
}

#[test]
fn channel_commands() {
    let dir = TempDir::new().unwrap();
    let id = write(dir.path(), "id.json", r#"{"n": 1, "rows": [[1, 0], [0, 1]], "l": [0, 0], "alpha": [[0, 0], [0, 0]]}"#);
    let o = sympolar(&["channel", "validate", s(&id)]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["valid"], true);
    assert_eq!(r["min_eigenvalue"].as_f64(), Some(0.0));

    let k = write(dir.path(), "k.json", D1);
    let r = report(&sympolar(&["channel", "classify", s(&k)]));
    assert_eq!(r["auto_case"], "DAForm");
    assert_eq!(r["holevo_class"], "D)");
    assert!(r["admissible"].as_array().unwrap().iter().any(|c| c == "DAForm"));

    let jc = write(dir.path(), "jc.json", r#"{"n": 1, "rows": [[0, -1], [1, 0]], "l": [0, 0], "alpha": [[1, 0], [0, 1]]}"#);
    let canon = dir.path().join("canon.json");
    let o = sympolar(&["channel", "normal-form", s(&jc), "--result", s(&canon)]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["case"], "AForm");
    assert!(r["reconstruction"]["residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(read_channel(&canon), read_channel(&jc));

    let inadmissible = sympolar(&["channel", "normal-form", s(&jc), "--case", "daform"]);
    assert_eq!(code(&inadmissible), 2);
    assert!(String::from_utf8_lossy(&inadmissible.stderr).contains("zero or positive"));

    let product = dir.path().join("product.json");
    let o = sympolar(&["channel", "compose", s(&jc), s(&id), "--result", s(&product)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_channel(&product), read_channel(&jc));
}

#[test]
fn generated_instances() {
    let dir = TempDir::new().unwrap();
    let tol = TolerancePolicy::default();
    let p = dir.path().join("s.json");
    assert_eq!(code(&sympolar(&["generate", "symplectic", "2", "42", "--out", s(&p)])), 0);
    let m = read_matrix(&p);
    assert!(check_structure(&m, StructureKind::Symplectic, &tol).residual <= 1e-12);

    let p = dir.path().join("sh.json");
    assert_eq!(code(&sympolar(&["generate", "skew_hamiltonian", "1", "7", "--out", s(&p)])), 0);
    assert!(check_structure(&read_matrix(&p), StructureKind::SkewHamiltonian, &tol).holds);

    let p = dir.path().join("c.json");
    assert_eq!(code(&sympolar(&["generate", "valid_channel", "1", "7", "--out", s(&p)])), 0);
    assert!(validate_channel(&read_channel(&p), &tol).unwrap().valid);
    assert_eq!(code(&sympolar(&["channel", "validate", s(&p)])), 0);

    let a = sympolar(&["generate", "nondegenerate", "3", "5"]);
    let b = sympolar(&["generate", "nondegenerate", "3", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let x = dir.path().join("x.json");
    assert_eq!(code(&sympolar(&["generate", "nondegenerate", "2", "11", "--out", s(&x)])), 0);
    let a = sympolar(&["decompose", s(&x), "--variant", "ht", "--no-timestamp"]);
    let b = sympolar(&["decompose", s(&x), "--variant", "ht", "--no-timestamp"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["seed"], 11);
    assert!(report(&sympolar(&["decompose", s(&x), "--variant", "ht"])).get("timestamp").is_some());
}

#[test]
fn generate_decompose_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let variants = ["ht", "th", "rds", "sdr", "ms", "as", "mds", "ads", "sm", "sa", "sdm", "sda"];
    for seed in 0..4 {
        let x = dir.path().join(format!("x{seed}.json"));
        let n = (1 + seed % 3).to_string();
        assert_eq!(code(&sympolar(&["generate", "nondegenerate", &n, &seed.to_string(), "--out", s(&x)])), 0);
        for v in variants {
            let o = sympolar(&["decompose", s(&x), "--variant", v, "--no-timestamp"]);
            match code(&o) {
                0 => {
                    let r = report(&o);
                    let files: Vec<&str> = r["factor_files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
                    let check = sympolar(&["verify", s(&x), "--variant", v, "--factors", files[0], files[1]]);
                    assert_eq!(code(&check), 0, "{v} seed {seed}");
                }
                2 => assert!(!matches!(v, "ht" | "th" | "rds" | "sdr"), "{v} seed {seed}"),
                c => panic!("{v} seed {seed}: exit {c}"),
            }
        }
    }
}

#[test]
fn batch_decompose_with_jobs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("factors");
    let mut inputs = Vec::new();
    for seed in 0..5 {
        let x = dir.path().join(format!("b{seed}.json"));
        assert_eq!(code(&sympolar(&["generate", "nondegenerate", "2", &seed.to_string(), "--out", s(&x)])), 0);
        inputs.push(x);
    }
    let mut args = vec!["decompose", "--variant", "rds", "--jobs", "3", "--no-timestamp", "--factors-dir", s(&out)];
    args.extend(inputs.iter().map(|p| s(p)));
    let o = sympolar(&args);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    let items = r.as_array().unwrap();
    assert_eq!(items.len(), 5);
    for (item, input) in items.iter().zip(&inputs) {
        assert_eq!(item["input"], s(input));
        assert_eq!(item["verdict"], "ok");
    }
    assert!(out.join("b4.rds.2.json").exists());
}

#[test]
fn tolerance_flag_is_recorded() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.json", I1);
    let r = report(&sympolar(&["decompose", s(&i), "--variant", "ms", "--tol", "1e-6"]));
    assert_eq!(r["tolerance"]["rel_tol"].as_f64(), Some(1e-6));
    assert_eq!(code(&sympolar(&["decompose", s(&i), "--variant", "ms", "--tol", "-1"])), 1);
}
