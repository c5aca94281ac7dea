use std::fs;

use histotet::cli::{run_from, EXIT_CHECK_FAILED, EXIT_OK, EXIT_UNWRITABLE};

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["histotet"];
    v.extend_from_slice(args);
    run_from(v)
}

#[test]
fn converge_writes_csv_and_valid_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(&["converge", "--functions", "f3,f7", "--n", "3,5", "--out", out]),
        EXIT_OK
    );
    let csv = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "function,n,method,params,l1_error,seconds");
    // 2 functions x 2 meshes x 4 methods
    assert_eq!(lines.len(), 1 + 16);
    for l in &lines[1..] {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 6, "{l}");
        assert!(cols[4].parse::<f64>().unwrap() >= 0.0);
    }
    for f in ["f3", "f7"] {
        let svg = fs::read_to_string(dir.path().join(format!("convergence_{f}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(lines, 4);
    }
}

#[test]
fn single_method_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "converge",
        "--strategy",
        "ef",
        "--zeta",
        "1.5",
        "--nu",
        "3",
        "--functions",
        "f2",
        "--n",
        "4",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("f2,4,ef,zeta=1.5;nu=3,"));
}

#[test]
fn timing_flag_fills_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(&[
            "converge",
            "--strategy",
            "classical",
            "--functions",
            "f1",
            "--n",
            "6",
            "--timing",
            "--out",
            out
        ]),
        EXIT_OK
    );
    let csv = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    let secs: f64 = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(secs > 0.0);
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["check", "--out", out]), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    // 6x6 fv, 5x6 vol, 6x6 ef
    assert_eq!(csv.lines().count(), 1 + 36 + 30 + 36);
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.contains(",true,") || l.ends_with(",true")));
    assert_eq!(
        run(&["check", "--strategy", "fv", "--alpha", "1e-6", "--beta", "1"]),
        EXIT_CHECK_FAILED
    );
    assert_eq!(
        run(&[
            "check",
            "--strategy",
            "vol",
            "--theta",
            "0,0.1,0.3,0.6,0.9,1",
            "--gamma",
            "0.5,7"
        ]),
        EXIT_OK
    );
}

#[test]
fn unwritable_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let code = run(&[
        "converge",
        "--strategy",
        "classical",
        "--functions",
        "f1",
        "--n",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_UNWRITABLE);
}

#[test]
fn tune_writes_surface_and_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "tune",
        "--strategy",
        "fv",
        "--alpha",
        "1,2",
        "--beta",
        "0.5,1,2",
        "--functions",
        "f3,f5",
        "--n",
        "3,4",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("tuning_surface.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "alpha,beta,total_l1_error");
    assert_eq!(csv.lines().count(), 1 + 6);

    let code = run(&[
        "tune",
        "--strategy",
        "ef",
        "--functions",
        "f1",
        "--holdout",
        "f1",
        "--n",
        "3",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED);
}

#[test]
fn project_and_bad_function() {
    assert_eq!(
        run(&[
            "project",
            "--strategy",
            "vol",
            "--theta",
            "0.5",
            "--gamma",
            "2",
            "--function",
            "f4"
        ]),
        EXIT_OK
    );
    assert_eq!(
        run(&[
            "project",
            "--strategy",
            "classical",
            "--function",
            "f1",
            "--tet",
            "0,0,0;2,0,0;0,1,0;0,0,3"
        ]),
        EXIT_OK
    );
    assert_ne!(run(&["project", "--function", "f9"]), EXIT_OK);
    assert_ne!(run(&["converge", "--functions", "g1"]), EXIT_OK);
}
