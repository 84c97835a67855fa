use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn gcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcs"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

#[test]
fn demo_solve_writes_solution_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let trace = dir.path().join("trace.csv");
    let p = instance("demo_spp.json");
    let out = gcs(&[
        "solve",
        p.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "-o",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(doc["status"], "optimal");
    assert!((doc["value"].as_f64().unwrap() - 2.4561622478270677).abs() < 1e-5);
    assert_eq!(doc["subgraph"]["edges"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("elapsed_seconds,lower_bound,upper_bound"));
    assert!(csv.lines().count() >= 2);

    let svg = gcs(&[
        "export-plot",
        p.to_str().unwrap(),
        "--solution",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(svg.status.code(), Some(0));
    let svg = String::from_utf8(svg.stdout).unwrap();
    assert_eq!(svg.matches(r#"class="set""#).count(), 9);
    assert_eq!(svg.matches(r#"class="point""#).count(), 5);
    assert_eq!(svg.matches(r#"class="edge""#).count(), 4);
}

#[test]
fn relaxation_bounds_demo() {
    let out = gcs(&["relax", instance("demo_spp.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out)["relaxation_value"].as_f64().unwrap();
    assert!(r <= 2.4561623, "{r}");
    let out = gcs(&[
        "relax",
        instance("demo_spp.json").to_str().unwrap(),
        "--formulation",
        "mccormick",
    ]);
    assert!(json(&out)["relaxation_value"].as_f64().unwrap() <= r + 1e-7);
}

#[test]
fn oracle_agrees_with_solve() {
    for name in [
        "k4_tsp.json",
        "msap5.json",
        "flp6.json",
        "custom_detour.json",
    ] {
        let p = instance(name);
        let s = json(&gcs(&["solve", p.to_str().unwrap()]));
        let o = json(&gcs(&["oracle", p.to_str().unwrap(), "--workers", "2"]));
        let (a, b) = (s["value"].as_f64().unwrap(), o["value"].as_f64().unwrap());
        assert!(
            (a - b).abs() <= 1e-5 * b.abs().max(1.0),
            "{name}: {a} vs {b}"
        );
    }
}

#[test]
fn custom_detour_takes_upper_route() {
    let s = json(&gcs(&[
        "solve",
        instance("custom_detour.json").to_str().unwrap(),
    ]));
    assert!((s["value"].as_f64().unwrap() - 2.0 * 4.25f64.sqrt()).abs() < 1e-6);
    let verts: Vec<&str> = s["subgraph"]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(verts, ["s", "upper", "t"]);
}

#[test]
fn compare_has_two_rows() {
    let out = gcs(&["compare", instance("k4_tsp.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1][0] <= rows[0][0] + 1e-7);
    assert!((rows[0][1] - rows[1][1]).abs() < 1e-5);
}

#[test]
fn generate_is_reproducible_and_canonical() {
    let a = gcs(&["generate", "tsp", "--seed", "1", "--vertices", "4"]);
    let b = gcs(&["generate", "tsp", "--seed", "1", "--vertices", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, std::fs::read(instance("k4_tsp.json")).unwrap());
    let demo = gcs(&["generate", "demo_spp"]);
    assert_eq!(
        demo.stdout,
        std::fs::read(instance("demo_spp.json")).unwrap()
    );
}

#[test]
fn input_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        gcs(&["solve", "/definitely/missing.json"]).status.code(),
        Some(4)
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"format_version":1,"graph":{"directed":true,"vertices":[]},"problem":{"kind":"spp","source":"a","target":"b"}}"#).unwrap();
    let out = gcs(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    assert_eq!(gcs(&["generate", "nonsense"]).status.code(), Some(4));
    assert_eq!(
        gcs(&[
            "solve",
            instance("k4_tsp.json").to_str().unwrap(),
            "--time-limit=-1"
        ])
        .status
        .code(),
        Some(4)
    );
    assert_eq!(gcs(&["solve"]).status.code(), Some(4));
    assert_eq!(gcs(&["--help"]).status.code(), Some(0));
}

#[test]
fn infeasible_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("inf.json");
    std::fs::write(
        &p,
        r#"{"format_version":1,"graph":{"directed":true,"vertices":[
            {"name":"a","dim":1,"constraints":[{"type":"point","point":[0]}]},
            {"name":"b","dim":1,"constraints":[{"type":"point","point":[5]}]}],
            "edges":[{"tail":"a","head":"b","constraints":[{"type":"halfspaces","a":[[-1,1]],"b":[1]}]}]},
            "problem":{"kind":"spp","source":"a","target":"b"}}"#,
    )
    .unwrap();
    let out = gcs(&["solve", p.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)["status"], "infeasible");
}

#[test]
fn strict_recession_rejects_unbounded_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rec.json");
    std::fs::write(
        &p,
        r#"{"format_version":1,"graph":{"directed":true,"vertices":[
            {"name":"a","dim":1,"constraints":[{"type":"point","point":[0]}]},
            {"name":"b","dim":1,"constraints":[{"type":"halfspaces","a":[[-1]],"b":[0]}],
             "costs":[{"kind":"linear","c":[-1]}]}],
            "edges":[{"tail":"a","head":"b"}]},
            "problem":{"kind":"spp","source":"a","target":"b"}}"#,
    )
    .unwrap();
    let strict = gcs(&["solve", p.to_str().unwrap(), "--strict-recession"]);
    assert_eq!(strict.status.code(), Some(4));
    let lax = gcs(&["solve", p.to_str().unwrap()]);
    assert_ne!(lax.status.code(), Some(0));
}
