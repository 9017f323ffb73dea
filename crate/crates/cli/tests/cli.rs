use std::path::Path;
use std::process::{Command, Output};

fn perfect(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfect")).args(args).arg("--cache-dir").arg(cache).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn enumerate_reports_two_classes_in_dimension_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = perfect(dir.path(), &["voronoi", "enumerate", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["class_count"], 2);
    assert_eq!(v["provenance"], "exact");
}

#[test]
fn cache_hits_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["voronoi", "enumerate", "--n", "3"];
    let first = perfect(dir.path(), &args);
    let second = perfect(dir.path(), &args);
    assert!(String::from_utf8_lossy(&second.stderr).contains("served from cache"));
    assert_eq!(first.stdout, second.stdout);
    let uncached = perfect(dir.path(), &["voronoi", "enumerate", "--n", "3", "--no-cache"]);
    assert!(!String::from_utf8_lossy(&uncached.stderr).contains("served from cache"));
    assert_eq!(first.stdout, uncached.stdout);
}

#[test]
fn damaged_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["voronoi", "complex", "--n", "2"];
    let first = perfect(dir.path(), &args);
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        std::fs::write(entry.unwrap().path(), b"{\"key\": \"garbage").unwrap();
    }
    let second = perfect(dir.path(), &args);
    assert_eq!(second.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&second.stderr).contains("recomputed"));
    assert_eq!(first.stdout, second.stdout);
    let third = perfect(dir.path(), &args);
    assert!(String::from_utf8_lossy(&third.stderr).contains("served from cache"));
}

#[test]
fn complex_file_feeds_torsion_bound() {
    let dir = tempfile::tempdir().unwrap();
    for (format, name) in [("json", "c.json"), ("text", "c.txt")] {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let out =
            perfect(dir.path(), &["voronoi", "complex", "--n", "3", "--group", "sl", "--format", format, "--out", p]);
        assert_eq!(out.status.code(), Some(0));
        let out = perfect(dir.path(), &["torsion", "bound", "--complex", p, "--k", "5", "--check"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["degrees"][0]["betti"], 1);
        assert_eq!(v["check"]["passed"], true);
    }
}

#[test]
fn seeded_checks_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.mtx");
    std::fs::write(&m, "3 3 4\n1 1 2\n2 2 6\n3 3 0\n1 3 4\n").unwrap();
    let args = ["torsion", "snf", m.to_str().unwrap(), "--check", "--seed", "7"];
    let (a, b) = (perfect(dir.path(), &args), perfect(dir.path(), &args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["invariant_factors"], serde_json::json!(["2", "6"]));
    assert_eq!(v["check"]["seed"], 7);
}

#[test]
fn bounds_and_cyclotomic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&perfect(dir.path(), &["bounds", "v", "--n", "5"]));
    let lnln: f64 = v["ln_ln"].as_str().unwrap().parse().unwrap();
    assert!((lnln - 1.4e5).abs() < 1.4e4);
    assert_eq!(v["inequalities"]["ok"], true);
    let b = json(&perfect(dir.path(), &["cyclo", "bernoulli", "--n", "3"]));
    assert_eq!(b["value"], "0");
    let store = dir.path().join("certs.jsonl");
    let s = store.to_str().unwrap();
    for _ in 0..2 {
        let out = perfect(dir.path(), &["cyclo", "vandiver", "--p", "37", "--k", "32", "--store", s]);
        assert_eq!(out.status.code(), Some(0));
    }
    let lines: Vec<String> = std::fs::read_to_string(&store).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    let cert: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(cert["verdict"], "component_zero");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(perfect(dir.path(), &["nonsense"]).status.code(), Some(64));
    assert_eq!(perfect(dir.path(), &["bounds", "v", "--n", "5", "--digits", "5"]).status.code(), Some(64));
    assert_eq!(perfect(dir.path(), &["cyclo", "vandiver", "--p", "37", "--k", "30"]).status.code(), Some(1));
    assert_eq!(perfect(dir.path(), &["cyclo", "heuristic", "--x", "10"]).status.code(), Some(1));
    let bad = dir.path().join("bad.txt");
    // d1 d2 != 0
    std::fs::write(&bad, "% sizes 1 1 1\n1 1 1 1\n1 1 1\n2 1 1 1\n1 1 1\n").unwrap();
    let out = perfect(dir.path(), &["torsion", "bound", "--complex", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
