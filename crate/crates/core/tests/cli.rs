use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catk::scenario::{RegionSpec, Scenario};
use serde_json::Value;

fn catk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catk")).args(args).output().expect("catk runs")
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_example_validates() {
    let dir = tempfile::tempdir().unwrap();
    for name in catk::scenario::examples::NAMES {
        let f = path(dir.path(), &format!("{name}.json"));
        assert!(catk(&["example", name, "--emit", s(&f)]).status.success());
        let out = catk(&["validate", s(&f)]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        let sc = Scenario::from_json(&fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), format!("ok {name} {}", sc.hash()));
    }
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "broken.json");
    fs::write(&f, "{\"format_version\": 1}").unwrap();
    let out = catk(&["validate", s(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error ("));

    let out = catk(&["run", s(&path(dir.path(), "missing.json"))]);
    assert_eq!(out.status.code(), Some(1));

    let out = catk(&["example", "nonesuch", "--emit", s(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("tripod"));
}

#[test]
fn tripod_dimensions_apply_to_the_tripod_only() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "t.json");
    assert!(catk(&["example", "tripod", "--W", "6", "--H", "7", "--h", "0.5", "--emit", s(&f)]).status.success());
    let sc = Scenario::from_json(&fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(sc.h, 0.5);
    let widths: Vec<f64> = sc.complex.edges.iter().map(|e| e.length).collect();
    assert!(widths.contains(&6.0) && widths.contains(&14.0), "{widths:?}");

    let out = catk(&["example", "square", "--W", "6", "--emit", s(&f)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_the_report_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "g.json");
    let out_file = path(dir.path(), "report.json");
    assert!(catk(&["example", "tripod-generated", "--h", "0.5", "--emit", s(&f)]).status.success());
    let out = catk(&["run", s(&f), "--seed", "9", "--h", "0.75", "--out", s(&out_file)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("status: Pass"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(report["body"]["seed"], 9);
    assert_eq!(report["body"]["h"], 0.75);
    assert!(report["metadata"]["timing_ms"].is_object());
}

#[test]
fn gen_region_rewrites_the_region() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "sq.json");
    let g = path(dir.path(), "gen.json");
    assert!(catk(&["example", "square", "--h", "0.5", "--emit", s(&f)]).status.success());
    let out = catk(&["gen-region", s(&f), "--seed", "4", "--cells", "30", "--out", s(&g)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("betti1 0"));
    let sc = Scenario::from_json(&fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(sc.region, RegionSpec::Generated { seed: 4, cells: 30 });
    // the input is untouched when --out is given
    let orig = Scenario::from_json(&fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(orig.region, RegionSpec::Whole);
}

#[test]
fn shipped_scenarios_match_the_builtins() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in catk::scenario::examples::NAMES {
        let text = fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
        let shipped = Scenario::from_json(&text).unwrap();
        assert_eq!(shipped, catk::scenario::examples::by_name(name).unwrap(), "{name}");
    }
}
