use std::path::Path;
use std::process::{Command, Output};

fn thick(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thick")).args(args).current_dir(dir).output().expect("spawn thick")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn gen_embed_measure_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&thick(d, &["--seed", "3", "--out", "g.json", "gen", "--generator", "cycle", "--size", "12"])), 0);
    assert_eq!(code(&thick(d, &["--seed", "3", "--out", "e.json", "embed", "--input", "g.json"])), 0);
    let o = thick(d, &["measure", "--input", "e.json", "--measures", "thickness,total-crossings"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.lines().next().unwrap().contains("measure"));
    assert!(csv.contains("thickness"));

    let o = thick(d, &["--format", "structured-text", "measure", "--input", "e.json", "--measures", "thickness"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("[[row]]"));
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("s.toml"), "generator = \"cycle\"\nmeasures = [\"thickness\"]\nsizes = [8, 16, 32]\nseeds = 6\n")
        .unwrap();
    let o = thick(d, &["--out", "rows.csv", "sweep", "--config", "s.toml"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = thick(d, &["--out", "p.svg", "plot", "--input", "rows.csv", "--measure", "thickness"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(d.join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("slope"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "generator = \"hypercube\"\nmeasures = [\"thickness\"]\nsizes = [8]\nseeds = 1\n")
        .unwrap();
    let o = thick(d, &["sweep", "--config", "bad.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypercube"));
    std::fs::write(d.join("typo.toml"), "generator = \"cycle\"\nmeasure = [\"thickness\"]\nsizes = [8]\nseeds = 1\n")
        .unwrap();
    assert_eq!(code(&thick(d, &["sweep", "--config", "typo.toml"])), 2);
    assert_eq!(code(&thick(d, &["sweep", "--config", "missing.toml"])), 2);
    assert_eq!(code(&thick(d, &["knot", "--torus", "2,4"])), 2);
    assert_eq!(code(&thick(d, &["frobnicate"])), 2);
}

#[test]
fn construction_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&thick(d, &["--out", "g.json", "gen", "--generator", "random-bipartite", "--size", "12", "--degree", "6"])),
        0
    );
    let o = thick(d, &["embed", "--input", "g.json", "--construction", "kb", "--route-attempts", "1"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exhausted_budget_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = thick(dir.path(), &["knot", "--torus", "2,3", "--distortion-budget", "10"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn knot_writes_tree_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = thick(d, &["knot", "--polygon", "40", "--tree-out", "tree.json", "--knot-out", "k.txt"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let tree: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("tree.json")).unwrap()).unwrap();
    assert!(tree.is_object());
    let o = thick(d, &["knot", "--input", "k.txt", "--points", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
