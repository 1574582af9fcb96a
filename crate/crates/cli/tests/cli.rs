//! Exit codes and files of the `drsub` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsub")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_OFFLINE: &str = "experiment = \"offline-quadratic\"\nrepeats = 2\n\n[generator]\nn = 3\nm = 2\n\n[algorithm]\nT = 10\n";

#[test]
fn run_writes_csv_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_OFFLINE);
    let out = dir.path().join("r.csv");
    let o = drsub(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# drsub "));
    assert!(text.contains("kind,experiment,instance"));
    assert!(dir.path().join("r.timing.csv").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("frank-wolfe"));
}

#[test]
fn overrides_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_OFFLINE);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["run", s(&cfg), "--out", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(drsub(&args).status.code(), Some(0));
        std::fs::read_to_string(out).unwrap()
    };
    let base = run("a.csv", &[]);
    let seeded = run("b.csv", &["--seed", "99"]);
    let longer = run("c.csv", &["--T", "12", "--repeats", "1"]);
    assert!(seeded.contains("master_seed = 99"));
    assert_ne!(base.lines().last(), seeded.lines().last());
    assert!(longer.contains("T = 12") && longer.contains("repeats = 1"));
}

#[test]
fn verify_passes_and_fails_with_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = "experiment = \"verify\"\n\n[verify]\ntrials = 30\ngradient_points = 5\nfw_runs = 1\nlp_instances = 5\n";
    let cfg = write(dir.path(), "v.toml", small);
    let out = dir.path().join("v.txt");
    let o = drsub(&["verify", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!std::fs::read_to_string(&out).unwrap().contains("FAIL"));

    let bad = write(dir.path(), "bad.toml", &format!("{small}inject_violation = true\n"));
    let o = drsub(&["verify", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("FAIL dr/injected"), "{report}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(drsub(&["run", s(&missing)]).status.code(), Some(2));
    let unknown = write(dir.path(), "u.toml", "experiment = \"offline-quadratic\"\nbogus = 3\n");
    assert_eq!(drsub(&["run", s(&unknown)]).status.code(), Some(2));
    let wrong_family = write(
        dir.path(),
        "w.toml",
        "experiment = \"offline-softmax\"\n\n[generator]\nfamily = \"quadratic_uniform\"\n",
    );
    assert_eq!(drsub(&["run", s(&wrong_family)]).status.code(), Some(2));
    assert_eq!(drsub(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn project_bench_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.toml", "experiment = \"project-bench\"\n\n[bench]\nsizes = [3, 20]\ntrials = 40\n");
    let out = dir.path().join("b.csv");
    let o = drsub(&["project-bench", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.contains("max_diff_iterative"));
    assert!(dir.path().join("b.timing.csv").exists());
}

#[test]
fn gen_writes_instance_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.toml", "family = \"quadratic_uniform\"\nn = 4\nm = 3\nseed = 7\n");
    let a = dir.path().join("a.txt");
    let b = dir.path().join("sub/b.txt");
    assert_eq!(drsub(&["gen", s(&spec), "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(drsub(&["gen", s(&spec), "--out", s(&b), "--seed", "8"]).status.code(), Some(0));
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert!(ta.contains("objective quadratic 4"));
    assert_ne!(ta, tb);
    let bad = write(dir.path(), "bad.toml", "family = \"quadratic_uniform\"\nn = 0\n");
    assert_eq!(drsub(&["gen", s(&bad), "--out", s(&a)]).status.code(), Some(2));
}
