use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use benchgate_ffi::*;

fn coverage(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/coverage").join(name)
}

fn c_path(name: &str) -> CString {
    CString::new(coverage(name).to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = bg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn load(name: &str) -> *mut BgCallGraph {
    let mut g = ptr::null_mut();
    let status = unsafe { bg_callgraph_load(c_path(name).as_ptr(), BgGraphFormat::Auto, &mut g) };
    assert_eq!(status, BgStatus::Ok, "{name}: {}", last_error());
    g
}

#[test]
fn optimizes_the_example_graphs() {
    let app = load("app.json");
    let micros: Vec<*mut BgCallGraph> = ["mb1.json", "mb2.csv", "mb3.csv", "mb4.json"].into_iter().map(load).collect();
    let handles: Vec<*const BgCallGraph> = micros.iter().map(|&m| m.cast_const()).collect();
    unsafe {
        let mut n = 0;
        assert_eq!(bg_callgraph_node_count(app, &mut n), BgStatus::Ok);
        assert_eq!(n, 10);
        let mut is_app = false;
        assert_eq!(bg_callgraph_is_application(app, &mut is_app), BgStatus::Ok);
        assert!(is_app);
        assert_eq!(bg_callgraph_is_application(micros[0], &mut is_app), BgStatus::Ok);
        assert!(!is_app);

        let mut impact = 0.0;
        assert_eq!(bg_reference_impact(app, micros[2], &mut impact), BgStatus::Ok);
        assert_eq!(impact, 15.0);

        let mut suite = ptr::null_mut();
        assert_eq!(bg_optimize(app, handles.as_ptr(), handles.len(), 1, 0, &mut suite), BgStatus::Ok);
        assert!(bg_last_error_message().is_null());
        assert_eq!(bg_suite_len(suite), 2);
        let names: Vec<&str> = (0..2).map(|i| CStr::from_ptr(bg_suite_benchmark(suite, i)).to_str().unwrap()).collect();
        assert_eq!(names, ["MB1", "MB3"]);
        assert!(bg_suite_benchmark(suite, 2).is_null());
        let mut gain = 0;
        assert_eq!(bg_suite_gain(suite, 1, &mut gain), BgStatus::Ok);
        assert_eq!(gain, 2);
        assert_eq!(bg_suite_gain(suite, 5, &mut gain), BgStatus::InvalidArgument);
        let mut relevance = 0.0;
        assert_eq!(bg_suite_practical_relevance(suite, &mut relevance), BgStatus::Ok);
        assert_eq!(relevance, 0.8);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(bg_suite_to_json(suite, &mut json), BgStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["steps"][0]["benchmark"], "MB1");
        bg_string_free(json);

        // top_k of 1 keeps only the first pick.
        let mut top = ptr::null_mut();
        assert_eq!(bg_optimize(app, handles.as_ptr(), handles.len(), 1, 1, &mut top), BgStatus::Ok);
        assert_eq!(bg_suite_len(top), 1);
        bg_suite_free(top);

        bg_suite_free(suite);
        micros.into_iter().for_each(|m| bg_callgraph_free(m));
        bg_callgraph_free(app);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        let missing = CString::new("/no/such/graph.json").unwrap();
        assert_eq!(bg_callgraph_load(missing.as_ptr(), BgGraphFormat::Json, &mut g), BgStatus::Io);
        assert!(last_error().contains("/no/such/graph.json"));
        assert!(g.is_null());

        assert_eq!(bg_callgraph_load(ptr::null(), BgGraphFormat::Json, &mut g), BgStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(bg_callgraph_load(bad.as_ptr().cast(), BgGraphFormat::Json, &mut g), BgStatus::InvalidUtf8);

        // A CSV graph read as JSON does not parse.
        assert_eq!(bg_callgraph_load(c_path("mb2.csv").as_ptr(), BgGraphFormat::Json, &mut g), BgStatus::Parse);

        let app = load("app.json");
        let mut suite = ptr::null_mut();
        assert_eq!(bg_optimize(app, ptr::null(), 0, 1, 0, &mut suite), BgStatus::InvalidArgument);
        assert!(last_error().contains("no microbenchmark"));
        let micros = [ptr::null::<BgCallGraph>()];
        assert_eq!(bg_optimize(app, micros.as_ptr(), 1, 1, 0, &mut suite), BgStatus::NullPointer);
        assert!(suite.is_null());
        assert_eq!(bg_suite_len(ptr::null()), 0);
        bg_callgraph_free(app);
        bg_suite_free(ptr::null_mut());
        bg_string_free(ptr::null_mut());
    }
}

#[test]
fn statistics() {
    let base = [10.0, 11.0, 12.0];
    let var = [11.0, 12.1, 13.2];
    unsafe {
        let mut change = 0.0;
        assert_eq!(bg_median_change(base.as_ptr(), 3, var.as_ptr(), 3, &mut change), BgStatus::Ok);
        assert!((change - 10.0).abs() < 1e-9);
        assert_eq!(bg_median_change(base.as_ptr(), 3, ptr::null(), 0, &mut change), BgStatus::InvalidArgument);

        let base: Vec<f64> = (0..200).map(|i| 1.0 + 0.001 * f64::from(i % 7)).collect();
        let var: Vec<f64> = base.iter().map(|v| v * 1.05).collect();
        let mut a = BgChangeInterval { median_change_pct: 0.0, ci_low_pct: 0.0, ci_high_pct: 0.0, instability_pct: 0.0, excludes_zero: false };
        let mut b = a;
        assert_eq!(bg_bootstrap_flat(base.as_ptr(), 200, var.as_ptr(), 200, 1000, 0.005, 4, &mut a), BgStatus::Ok);
        assert_eq!(bg_bootstrap_flat(base.as_ptr(), 200, var.as_ptr(), 200, 1000, 0.005, 4, &mut b), BgStatus::Ok);
        assert_eq!(a, b);
        assert!(a.excludes_zero);
        assert!(a.ci_low_pct <= a.median_change_pct && a.median_change_pct <= a.ci_high_pct);
        assert!((a.instability_pct - (a.ci_high_pct - a.ci_low_pct)).abs() < 1e-12);
        assert_eq!(bg_bootstrap_flat(base.as_ptr(), 200, var.as_ptr(), 200, 10, 0.005, 4, &mut a), BgStatus::InvalidArgument);

        let params = BgThresholdParams { threshold_factor: 0.75, min_threshold_pct: 1.0, instability_window: 10 };
        let mut t = 0.0;
        assert_eq!(bg_dynamic_threshold([4.0].as_ptr(), 1, &params, 1.0, &mut t), BgStatus::Ok);
        assert_eq!(t, 3.0);
        assert_eq!(bg_dynamic_threshold(ptr::null(), 0, &params, 2.5, &mut t), BgStatus::Ok);
        assert_eq!(t, 2.5);
        let zero = BgThresholdParams { instability_window: 0, ..params };
        assert_eq!(bg_dynamic_threshold(ptr::null(), 0, &zero, 2.5, &mut t), BgStatus::InvalidArgument);
    }
    let v = unsafe { CStr::from_ptr(bg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Builds tests/c/smoke.c against the generated header and the static
/// library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_against_the_static_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler `{cc}`");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbenchgate_ffi.a");
    assert!(lib.is_file(), "missing {}", lib.display());
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("bg_smoke");
    let build = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe)
        .args(["app.json", "mb1.json", "mb2.csv", "mb3.csv", "mb4.json"].map(coverage))
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "2 MB1 MB3 0.80");
    assert_eq!(lines[1], "10.0 1");
    assert!(lines[2].contains("min_gain"), "{stdout}");
}
