use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use wedcs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(wedcs_last_error()) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut WedcsGraph {
    let text = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { wedcs_graph_parse(text.as_ptr(), &mut g) }, WedcsStatus::Ok);
    g
}

fn params(w: u32, beta: u64) -> WedcsParams {
    WedcsParams { w_cap: w, epsilon_num: 1, epsilon_den: 10, beta, beta_minus: beta - 2 }
}

// path 0-1-2-3 with weights 2, 1, 2
const PATH: &str = "g 4 3 2\ne 0 1 2\ne 1 2 1\ne 2 3 2\n";

#[test]
fn build_validate_and_match() {
    let g = parse(PATH);
    unsafe {
        assert_eq!(wedcs_graph_vertex_count(g), 4);
        assert_eq!(wedcs_graph_edge_count(g), 3);
        let p = params(2, 6);
        let mut h = ptr::null_mut();
        assert_eq!(wedcs_build_edcs(g, &p, &mut h), WedcsStatus::Ok);
        let len = wedcs_subgraph_edge_count(h);
        let mut ids = vec![0u32; len];
        let mut written = 0;
        assert_eq!(wedcs_subgraph_edges(h, ids.as_mut_ptr(), ids.len(), &mut written), WedcsStatus::Ok);
        assert_eq!(written, len);
        let (mut up, mut low) = (usize::MAX, usize::MAX);
        assert_eq!(wedcs_validate(g, ids.as_ptr(), ids.len(), &p, &mut up, &mut low), WedcsStatus::Ok);
        assert_eq!((up, low), (0, 0));
        let (mut up, mut low) = (0, 0);
        assert_eq!(wedcs_validate(g, ptr::null(), 0, &p, &mut up, &mut low), WedcsStatus::Ok);
        assert_eq!((up, low), (0, 3));

        let mut m = ptr::null_mut();
        assert_eq!(wedcs_max_weight_b_matching(g, 1000, &mut m), WedcsStatus::Ok);
        assert_eq!(wedcs_subgraph_weight(m), 4);
        let mut d = 0;
        assert_eq!(wedcs_subgraph_weighted_degree(m, 1, &mut d), WedcsStatus::Ok);
        assert_eq!(d, 2);
        assert_eq!(wedcs_subgraph_weighted_degree(m, 9, &mut d), WedcsStatus::InvalidArgument);

        let mut small = [0u32; 1];
        assert_eq!(wedcs_subgraph_edges(m, small.as_mut_ptr(), 1, &mut written), WedcsStatus::InvalidArgument);
        assert!(last_error().contains("needed"));

        wedcs_subgraph_free(m);
        wedcs_subgraph_free(h);
        wedcs_graph_free(g);
    }
}

#[test]
fn from_edges_and_stream() {
    let us = [0u32, 1, 2, 0];
    let vs = [1u32, 2, 3, 3];
    let ws = [1u32, 3, 1, 2];
    let caps = [1u32, 2, 1, 1];
    let mut g = ptr::null_mut();
    unsafe {
        let st = wedcs_graph_from_edges(4, 3, us.as_ptr(), vs.as_ptr(), ws.as_ptr(), 4, caps.as_ptr(), &mut g);
        assert_eq!(st, WedcsStatus::Ok);
        let p = params(3, 6);
        let mut a = WedcsStreamResult::default();
        let mut b = WedcsStreamResult::default();
        assert_eq!(wedcs_stream_run(g, &p, 7, 1, 1, 10_000, &mut a), WedcsStatus::Ok);
        assert_eq!(wedcs_stream_run(g, &p, 7, 1, 1, 10_000, &mut b), WedcsStatus::Ok);
        assert_eq!(a.result_weight, b.result_weight);
        assert_eq!(a.result_weight, 5);
        assert_eq!(a.fallback, 1);
        assert_eq!(wedcs_stream_run(g, &p, 7, 2, 1, 10_000, &mut a), WedcsStatus::InvalidArgument);
        wedcs_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = CString::new("g 3 1 1\ne 0 1\n").unwrap();
        assert_eq!(wedcs_graph_parse(bad.as_ptr(), &mut g), WedcsStatus::Parse);
        assert!(last_error().contains("line 2"));
        assert!(g.is_null());
        assert_eq!(wedcs_graph_parse(ptr::null(), &mut g), WedcsStatus::NullPointer);
        let missing = CString::new("/nonexistent/graph.txt").unwrap();
        assert_eq!(wedcs_graph_load(missing.as_ptr(), &mut g), WedcsStatus::Io);

        let g = parse(PATH);
        let mut h = ptr::null_mut();
        let bad_params = WedcsParams { w_cap: 2, epsilon_num: 1, epsilon_den: 10, beta: 4, beta_minus: 3 };
        assert_eq!(wedcs_build_edcs(g, &bad_params, &mut h), WedcsStatus::InvalidArgument);
        let low_cap = params(1, 6);
        assert_eq!(wedcs_build_edcs(g, &low_cap, &mut h), WedcsStatus::Precondition);
        wedcs_graph_free(g);

        // two parallel edges between unit-capacity vertices
        let multi = parse("g 2 2 1\ne 0 1 1\ne 0 1 1\n");
        assert_eq!(wedcs_build_edcs(multi, &params(1, 6), &mut h), WedcsStatus::Precondition);
        wedcs_graph_free(multi);

        // two disjoint unit triangles exhaust a one-node budget
        let tri = parse("g 6 6 1\ne 0 1 1\ne 1 2 1\ne 0 2 1\ne 3 4 1\ne 4 5 1\ne 3 5 1\n");
        let mut m = ptr::null_mut();
        assert_eq!(wedcs_max_weight_b_matching(tri, 1, &mut m), WedcsStatus::OracleBudget);
        assert!(last_error().contains("too large for exact oracle"));
        wedcs_graph_free(tri);

        wedcs_graph_free(ptr::null_mut());
        wedcs_subgraph_free(ptr::null_mut());
        assert_eq!(wedcs_graph_edge_count(ptr::null()), 0);
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(wedcs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/wedcs.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["wedcs_graph_parse", "wedcs_stream_run", "WEDCS_STATUS_ORACLE_BUDGET", "typedef struct WedcsGraph WedcsGraph"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header]).output() else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_and_runs() {
    // target/<profile>/deps/abi-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    if !lib_dir.join("libwedcs_ffi.so").exists() {
        eprintln!("shared library not built, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let Ok(out) = Command::new("cc")
        .arg(format!("{manifest}/tests/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(format!("-L{}", lib_dir.display()))
        .args(["-lwedcs_ffi", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("cc not available, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).env("LD_LIBRARY_PATH", lib_dir).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout), "h=3 weight=4\n");
}
