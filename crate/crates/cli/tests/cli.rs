use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hpq(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hpq"));
    c.args(args);
    match threads {
        Some(t) => c.env("HPQ_THREADS", t),
        None => c.env_remove("HPQ_THREADS"),
    };
    c.output().expect("hpq runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_then_verify_interval() {
    let dir = tempfile::tempdir().unwrap();
    let pts = path(dir.path(), "pts.json");
    let g = hpq(&["gen", "--n", "1024", "--seed", "7", "--shape", "circle", "--out", &pts], None);
    assert_eq!(g.status.code(), Some(0), "{}", stderr(&g));
    let v = hpq(&["verify", "--in", &pts, "--structure", "interval", "--mode", "farthest", "--queries", "10000"], None);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    assert!(String::from_utf8_lossy(&v.stdout).contains("10000 queries"));
}

#[test]
fn every_structure_verifies_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let pts = path(dir.path(), "pts.json");
    assert!(hpq(&["gen", "--n", "200", "--seed", "3", "--shape", "parabola-arc", "--mode", "nearest", "--out", &pts], None)
        .status
        .success());
    for mode in ["farthest", "nearest"] {
        for s in [
            &["--structure", "okey-dokey", "--eps", "1.0"][..],
            &["--structure", "okey-dokey", "--depth", "3"],
            &["--structure", "prefix"],
            &["--structure", "interval"],
        ] {
            let mut args = vec!["verify", "--in", &pts, "--mode", mode, "--queries", "2000"];
            args.extend_from_slice(s);
            let o = hpq(&args, Some("3"));
            assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        }
    }
}

#[test]
fn corrupt_instance_is_rejected_with_the_broken_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    fs::write(&bad, r#"{"mode":"farthest","points":[[0,0],[40,0],[20,10],[40,40],[0,40]]}"#).unwrap();
    let o = hpq(&["verify", "--in", &bad, "--structure", "okey-dokey", "--eps", "1.0"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("convex position"), "{}", stderr(&o));

    fs::write(&bad, r#"{"mode":"farthest","points":[[5,0],[0,5],[-5,0],[0,-5]]}"#).unwrap();
    let o = hpq(&["verify", "--in", &bad, "--structure", "interval"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cocircular"), "{}", stderr(&o));

    fs::write(&bad, r#"{"mode":"farthest","points":[[0,0],[99999999,0],[0,1]]}"#).unwrap();
    let o = hpq(&["verify", "--in", &bad, "--structure", "prefix"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2^24"), "{}", stderr(&o));

    fs::write(&bad, "{\"mode\": \"farthest\", \"points\": [[0, 0], [1]]}").unwrap();
    let o = hpq(&["verify", "--in", &bad, "--structure", "prefix"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed"));
}

#[test]
fn usage_errors_exit_two() {
    for args in
        [&["verify", "--n", "10"][..], &["frobnicate"], &["gen"], &["verify", "--n", "10", "--structure", "okey-dokey", "--eps", "-1"]]
    {
        assert_eq!(hpq(args, None).status.code(), Some(2), "{args:?}");
    }
    let o = hpq(&["verify", "--n", "50", "--structure", "interval"], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("HPQ_THREADS"));
    assert_eq!(hpq(&["--help"], None).status.code(), Some(0));
}

#[test]
fn bench_flarb_csv_meets_the_calibrated_bound() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "flarb.csv");
    let n = 4096usize;
    let o = hpq(&["bench-flarb", "--n", &n.to_string(), "--shape", "circle", "--out", &csv], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,delta,cumulative,potential,grappa_writes"));
    let mut sum = 0usize;
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        sum += f[1].parse::<usize>().unwrap();
        assert_eq!(f[2].parse::<usize>().unwrap(), sum);
        rows += 1;
    }
    assert_eq!(rows, n);
    assert!(sum as f64 <= 4.0 * n as f64 * (n as f64).log2());
    assert!(stderr(&o).contains("fitted constant"));
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let strip = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout).lines().map(|l| l.rsplit_once(',').unwrap().0.to_owned()).collect()
    };
    let args = ["bench-query", "--n", "300", "--seed", "2", "--structure", "okey-dokey", "--depth", "2", "--queries", "500"];
    let a = hpq(&args, Some("1"));
    let b = hpq(&args, Some("4"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a)[0], "query,structure,budget");
    assert!(strip(&a)[1..].iter().all(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap() <= 8));

    let s = ["space", "--sizes", "64,128", "--format", "json"];
    let (x, y) = (hpq(&s, None), hpq(&s, None));
    assert_eq!(x.stdout, y.stdout);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&x.stdout).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["okey_cells"], 4704);
}
