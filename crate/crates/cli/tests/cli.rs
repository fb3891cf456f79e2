use std::process::{Command, Output};

fn twk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twk"))
        .args(args)
        .output()
        .expect("spawn twk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn levenshtein_on_strings() {
    let o = twk(&["distance", "abc", "bad", "--measure", "lev"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn identical_inputs_are_at_distance_zero() {
    for m in ["dtw", "erp", "twed", "ed", "twip1", "twip2"] {
        let o = twk(&["distance", "fig2:A", "fig2:A", "--measure", m]);
        assert!(o.status.success(), "{m}");
        assert!(
            stdout(&o).trim().parse::<f64>().unwrap().abs() < 1e-6,
            "{m}"
        );
    }
}

#[test]
fn kernel_value_matches_library() {
    let o = twk(&[
        "kernel", "fig2:A", "fig2:B", "--kernel", "twip1", "--nu", "0.001",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    let (a, b) = twk::datasets::fixture_fig2();
    assert!((v - twk::twip1(&a, &b, 0.001).unwrap()).abs() < 1e-12);
}

#[test]
fn gram_reports_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let out_s = out.to_str().unwrap();
    let args = [
        "gram",
        "--items",
        "appendix-a:three-digit",
        "--measure",
        "twed",
        "--out",
        out_s,
    ];
    let first = twk(&args);
    assert!(first.status.success());
    assert!(stdout(&first).contains("#Pev = 2"));
    assert!(dir.path().join("g.csv.json").exists());
    assert!(dir.path().join("g.csv.report.json").exists());
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cache hit"));

    let second = twk(&args);
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(stdout(&first), stdout(&second));

    // Different parameters invalidate the cache.
    let mut changed = args.to_vec();
    changed.extend(["--nu", "0.5"]);
    let third = twk(&changed);
    assert!(!String::from_utf8_lossy(&third.stderr).contains("cache hit"));
}

#[test]
fn knn_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = twk(&[
        "classify",
        "--dataset",
        "synth:3",
        "--classifier",
        "knn",
        "--measure",
        "twed",
        "--nu",
        "0.001",
        "--lambda",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# twk-results v1");
    assert!(lines[2].contains(",1nn,twed,"));
}

#[test]
fn svm_row_format() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"C":[1,10],"sigma2":[1]}"#).unwrap();
    let model = dir.path().join("m.json");
    let o = twk(&[
        "classify",
        "--dataset",
        "synth:2",
        "--classifier",
        "svm",
        "--measure",
        "dtw",
        "--grid",
        grid.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(2).unwrap().to_string();
    assert!(row.contains(",svm,dtw,"));
    assert!(row.contains(r#"""C"""#) && row.contains(r#"""sigma2"""#));
    let fields: Vec<&str> = row.rsplitn(4, ',').collect();
    for f in &fields[..3] {
        f.parse::<f64>().unwrap();
    }
    assert!(model.exists());
}

#[test]
fn bad_inputs_fail() {
    let o = twk(&[
        "classify",
        "--train",
        "/no/such/file",
        "--test",
        "/no/such/file",
        "--measure",
        "dtw",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert!(!twk(&["distance", "0,1", "0,1", "--measure", "nope"])
        .status
        .success());
    assert!(!twk(&[
        "distance",
        "0,1,2",
        "0",
        "--measure",
        "dtw",
        "--corridor",
        "0"
    ])
    .status
    .success());
    assert!(!twk(&["verify", "--only", "nope"]).status.success());
}

#[test]
fn verify_subset_passes() {
    let o = twk(&["verify", "--only", "appendix-a"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("PASS  appendix-a"));
    assert!(!s.contains("fig2"));
}

#[test]
fn svm_with_kernel_reports_both_scores() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"C":[1,10],"sigma2":[1],"inv_nu_prime":[1]}"#).unwrap();
    for mode in ["rbf", "direct"] {
        let o = twk(&[
            "classify",
            "--dataset",
            "synth:4",
            "--classifier",
            "svm",
            "--svm-kernel",
            mode,
            "--kernel",
            "stwk_twed",
            "--nu",
            "0.01",
            "--lambda",
            "0.5",
            "--grid",
            grid.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let row = stdout(&o).lines().nth(2).unwrap().to_string();
        assert!(row.contains(",svm,stwk_twed,"), "{row}");
        let fields: Vec<&str> = row.rsplitn(4, ',').collect();
        assert!(
            fields[..3].iter().all(|f| f.parse::<f64>().is_ok()),
            "{row}"
        );
    }
}
