use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixtures() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("torus.pres", "# the torus\n<a,b | [a,b]>\n"),
        ("torus2.pres", "<a,b | [a,b]^2>\n"),
        ("dunce.pres", "<a | a a a^-1>\n"),
        ("cyclic3.pres", "<a | a^3>\n"),
        ("broken.pres", "<a,b | a c>\n"),
    ] {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn collapsar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapsar")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn claim<'a>(report: &'a Value, name: &str) -> &'a str {
    report["claims"].as_array().unwrap().iter().find(|c| c["claim"] == name).unwrap()["status"].as_str().unwrap()
}

#[test]
fn certify_torus_chain() {
    let d = fixtures();
    let o = collapsar(d.path(), &["certify", "torus.pres", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["outcome"], "success");
    for c in ["C(4)", "T(4)", "3-collapsing", "bicollapsible"] {
        assert_eq!(claim(&r, c), "holds", "{c}");
    }
    assert_eq!(claim(&r, "C(6)"), "fails");
}

#[test]
fn solve_exit_codes() {
    let d = fixtures();
    assert_eq!(code(&collapsar(d.path(), &["solve", "torus2.pres", "abAB"])), 1);
    let o = collapsar(d.path(), &["solve", "torus2.pres", "abABabAB", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["data"]["trivial"], true);
    assert_eq!(r["data"]["heuristic"], false);
    assert!(!r["data"]["trace"].as_array().unwrap().is_empty());
}

#[test]
fn unsafe_gate() {
    let d = fixtures();
    let o = collapsar(d.path(), &["solve", "torus.pres", "abAB"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--unsafe"));
    let o = collapsar(d.path(), &["solve", "torus.pres", "abAB", "--unsafe", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["data"]["heuristic"], true);
}

#[test]
fn order_and_sphere() {
    let d = fixtures();
    let o = collapsar(d.path(), &["order", "torus2.pres", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["data"]["orders"][0]["order"], 2);
    assert_eq!(code(&collapsar(d.path(), &["sphere-search", "dunce.pres"])), 1);
    assert_eq!(code(&collapsar(d.path(), &["sphere-search", "torus.pres", "--max-area", "2"])), 2);
}

#[test]
fn geometry_commands() {
    let d = fixtures();
    let o = collapsar(d.path(), &["ball", "torus.pres", "--oracle", "abelian", "--radius", "2", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["data"]["vertices"], 13);
    assert_eq!(code(&collapsar(d.path(), &["ball", "torus.pres"])), 3);
    assert_eq!(code(&collapsar(d.path(), &["walls", "torus2.pres", "--radius", "5"])), 0);
    let o = collapsar(d.path(), &["cube", "cyclic3.pres", "--oracle", "abelian", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["data"]["simply_connected"], true);
}

#[test]
fn input_errors_exit_3() {
    let d = fixtures();
    assert_eq!(code(&collapsar(d.path(), &["frobnicate"])), 3);
    assert_eq!(code(&collapsar(d.path(), &["parse", "missing.pres"])), 3);
    assert_eq!(code(&collapsar(d.path(), &["parse", "broken.pres"])), 3);
    assert_eq!(code(&collapsar(d.path(), &["solve", "torus2.pres", "abz"])), 3);
    assert_eq!(code(&collapsar(d.path(), &["--help"])), 0);
}

#[test]
fn thread_cap() {
    let d = fixtures();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_collapsar"))
            .current_dir(d.path())
            .env("COLLAPSAR_THREADS", v)
            .args(["diagrams", "torus2.pres", "--max-area", "2"])
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("zero")), 3);
}

#[test]
fn reports_are_deterministic() {
    let d = fixtures();
    let args = ["walls", "torus2.pres", "--radius", "5", "--seed", "7", "--json"];
    let a = collapsar(d.path(), &args);
    let b = collapsar(d.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let c = collapsar(d.path(), &["walls", "torus2.pres", "--radius", "5", "--seed", "8", "--json"]);
    assert_ne!(json(&a)["input_digest"], json(&c)["input_digest"]);
}

#[test]
fn artifacts_and_bundle() {
    let d = fixtures();
    let out: PathBuf = d.path().join("run");
    let out_s = out.to_str().unwrap();
    assert_eq!(code(&collapsar(d.path(), &["certify", "torus.pres", "--out", out_s])), 0);
    assert_eq!(code(&collapsar(d.path(), &["walls", "torus2.pres", "--radius", "5", "--out", out_s])), 0);
    for f in ["certify.json", "certify.txt", "certify.timing.json", "walls.json", "walls.dot"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = fs::read(out.join("certify.json")).unwrap();
    assert_eq!(code(&collapsar(d.path(), &["certify", "torus.pres", "--out", out_s])), 0);
    assert_eq!(first, fs::read(out.join("certify.json")).unwrap());
    assert!(fs::read_to_string(out.join("walls.dot")).unwrap().contains("color="));

    let o = collapsar(d.path(), &["report", out_s, "--json"]);
    assert_eq!(code(&o), 0);
    let bundle = json(&o);
    let commands: Vec<&str> = bundle["reports"].as_array().unwrap().iter().map(|r| r["command"].as_str().unwrap()).collect();
    assert_eq!(commands, ["certify", "walls"]);
    assert!(out.join("summary.txt").exists());

    let empty = d.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&collapsar(d.path(), &["report", empty.to_str().unwrap()])), 3);
}
