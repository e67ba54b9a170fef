use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use catk_ffi::*;

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    catk_string_free(s);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(catk_last_error()).to_str().unwrap().to_owned() }
}

fn example(name: &str) -> *mut CatkScenario {
    let name = CString::new(name).unwrap();
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { catk_scenario_example(name.as_ptr(), &mut sc) }, CatkStatus::Ok);
    sc
}

#[test]
fn round_trip_through_json_keeps_the_hash() {
    unsafe {
        let sc = example("notch");
        let mut text = ptr::null_mut();
        let mut hash = ptr::null_mut();
        assert_eq!(catk_scenario_to_json(sc, &mut text), CatkStatus::Ok);
        assert_eq!(catk_scenario_hash(sc, &mut hash), CatkStatus::Ok);
        let text = CString::new(take(text)).unwrap();
        let hash = take(hash);
        let mut back = ptr::null_mut();
        assert_eq!(catk_scenario_from_json(text.as_ptr(), &mut back), CatkStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(catk_scenario_hash(back, &mut again), CatkStatus::Ok);
        assert_eq!(take(again), hash);
        catk_scenario_free(back);
        catk_scenario_free(sc);
    }
}

#[test]
fn run_reports_deterministic_bodies() {
    unsafe {
        let sc = example("tripod-geodesic");
        assert_eq!(catk_scenario_set_h(sc, 0.5), CatkStatus::Ok);
        assert_eq!(catk_scenario_set_seed(sc, 5), CatkStatus::Ok);
        let mut bodies = Vec::new();
        for _ in 0..2 {
            let mut r = ptr::null_mut();
            assert_eq!(catk_run(sc, &mut r), CatkStatus::Ok, "{}", last_error());
            assert_eq!(catk_report_exit_code(r), 0);
            assert_eq!(catk_report_failure_count(r), 0);
            let mut body = ptr::null_mut();
            assert_eq!(catk_report_body_json(r, &mut body), CatkStatus::Ok);
            bodies.push(take(body));
            let mut full = ptr::null_mut();
            assert_eq!(catk_report_json(r, &mut full), CatkStatus::Ok);
            assert!(take(full).contains("timing_ms"));
            catk_report_free(r);
        }
        assert_eq!(bodies[0], bodies[1]);
        assert!(bodies[0].contains("\"seed\": 5"));
        catk_scenario_free(sc);
    }
}

#[test]
fn errors_carry_a_status_and_a_message() {
    unsafe {
        let mut sc = ptr::null_mut();
        let bad = CString::new("{\"format_version\": 1").unwrap();
        assert_eq!(catk_scenario_from_json(bad.as_ptr(), &mut sc), CatkStatus::Parse);
        assert!(sc.is_null());
        assert!(last_error().contains("parse"));

        let name = CString::new("nonesuch").unwrap();
        assert_eq!(catk_scenario_example(name.as_ptr(), &mut sc), CatkStatus::Scenario);
        assert!(last_error().contains("tripod"));

        assert_eq!(catk_scenario_from_json(ptr::null(), &mut sc), CatkStatus::NullPointer);
        assert_eq!(catk_run(ptr::null(), &mut ptr::null_mut()), CatkStatus::NullPointer);
        assert_eq!(catk_report_exit_code(ptr::null()), -1);

        let sc = example("square");
        assert_eq!(catk_scenario_set_h(sc, -1.0), CatkStatus::Scenario);
        assert_eq!(catk_scenario_hash(sc, ptr::null_mut()), CatkStatus::NullPointer);
        catk_scenario_free(sc);

        // freeing null is a no-op
        catk_scenario_free(ptr::null_mut());
        catk_report_free(ptr::null_mut());
        catk_string_free(ptr::null_mut());
    }
}

#[test]
fn negative_control_exit_code() {
    unsafe {
        let sc = example("cone");
        let mut r = ptr::null_mut();
        assert_eq!(catk_run(sc, &mut r), CatkStatus::Ok);
        assert_eq!(catk_report_exit_code(r), 0);
        assert_eq!(catk_report_failure_count(r), 1);
        catk_report_free(r);
        catk_scenario_free(sc);
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libcatk_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_builds_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib().expect("static library is built next to the tests");
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("catk_smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler is installed");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let line = String::from_utf8(run.stdout).unwrap();
    assert_eq!(line.trim(), format!("{} 0 1 {}", env!("CARGO_PKG_VERSION"), CatkStatus::Parse as i32));
}
