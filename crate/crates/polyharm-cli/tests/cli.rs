//! End-to-end checks of the command-line surface: exit codes, file
//! round-trips, and the construct-then-verify loop for every method.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyharm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyharm-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn catalog_list_is_json_with_all_groups() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = parsed
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    for want in ["G4.1", "G4.4", "G4.8", "G4.9", "G4.10", "Sol3"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
}

#[test]
fn catalog_show_reports_family_and_omega() {
    let out = run(&["catalog", "show", "G4.8", "--alpha", "0.5"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["kind"], "heisenberg");
    assert_eq!(parsed["omega"][0].as_f64().unwrap(), 3.0);
    assert_eq!(parsed["matrices"][0][0].as_f64().unwrap(), 1.0);
    assert_eq!(parsed["matrices"][0][3].as_f64().unwrap(), 0.5);
}

#[test]
fn catalog_show_rejects_out_of_range_parameter() {
    let out = run(&["catalog", "show", "G4.8", "--alpha", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["verify", "--group", "Sol3", "--function", "builtin:sol3-arsinh",
        "--order", "1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_group_is_a_usage_error() {
    let out = run(&["verify", "--group", "G99", "--function", "builtin:x", "--order", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_sol3_arsinh_passes() {
    let out = run(&["verify", "--group", "Sol3", "--function", "builtin:sol3-arsinh",
        "--order", "2", "--samples", "60"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["claim"], "r_harmonic");
}

#[test]
fn verify_g49_harmonic_carries_erratum_flag() {
    let dir = tmpdir("g49");
    let report_path = dir.join("report.json");
    let out = run(&["verify", "--group", "G4.9", "--alpha", "1", "--function",
        "builtin:g49-harmonic", "--order", "1", "--samples", "60",
        "--out", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    let flags: Vec<&str> = report["erratum_flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(flags.contains(&"phi-coefficient-5a2"), "{flags:?}");
}

#[test]
fn verify_biharmonic_polynomial_fails_at_order_one() {
    // builtin constructed at r = 2 but verified at order 1: exit 1
    let out = run(&["verify", "--group", "G4.1", "--function", "builtin:g41-poly",
        "--builtin-r", "2", "--order", "1", "--samples", "60"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
}

#[test]
fn verify_eigenfunction_claim_via_builtin() {
    let out = run(&["verify", "--group", "G4.10", "--function", "builtin:g410-eigen",
        "--claim", "eigenfunction", "--coeffs", "0.5,0.5", "--samples", "60"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["claim"], "eigenfunction");
    assert_eq!(report["verdict"], "pass");
}

#[test]
fn verify_isoparametric_claim_with_polynomials() {
    let dir = tmpdir("iso");
    let fn_path = dir.join("phi.json");
    // e^{-t} x1 on Sol3: Phi(z) = z, Psi(z) = z^2 + 1
    let construct = run(&["construct", "--group", "Sol3", "--method", "eigenvector",
        "--eigen-index", "1", "--r", "1", "--coeffs", "1,0",
        "--out", fn_path.to_str().unwrap()]);
    assert_eq!(construct.status.code(), Some(0),
        "stderr: {}", String::from_utf8_lossy(&construct.stderr));

    // the eigenvector construction at r=1 composes f1 = c1 arsinh(z); verify
    // the raw pair instead through a hand-written phi file
    let phi = r#"{"op":"mul","args":[
        {"op":"exp","args":[{"op":"neg","args":[{"op":"coord","name":"t1"}]}]},
        {"op":"coord","name":"x1"}]}"#;
    std::fs::write(&fn_path, phi).unwrap();
    let out = run(&["verify", "--group", "Sol3", "--function", fn_path.to_str().unwrap(),
        "--claim", "isoparametric", "--phi-poly", "0,1", "--psi-poly", "1,0,1",
        "--samples", "60"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // a wrong Psi constant must fail
    let out = run(&["verify", "--group", "Sol3", "--function", fn_path.to_str().unwrap(),
        "--claim", "isoparametric", "--phi-poly", "0,1", "--psi-poly", "1.001,0,1",
        "--samples", "60"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_then_verify_round_trip_all_methods() {
    let dir = tmpdir("roundtrip");
    let cases: Vec<(Vec<String>, Vec<String>)> = vec![
        // eigenvector ladder on Sol3, order 2
        (
            vec!["construct", "--group", "Sol3", "--method", "eigenvector", "--r", "2"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "Sol3", "--order", "2"]
                .into_iter().map(String::from).collect(),
        ),
        // isotropic eigenfunction ladder on G4.10, order 2
        (
            vec!["construct", "--group", "G4.10", "--method", "isotropic", "--r", "2",
                "--eigen-index", "0", "--nu", "0.5,0.5"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.10", "--order", "2"]
                .into_iter().map(String::from).collect(),
        ),
        // real part on G4.9 (exponent 5/2 data), order 1
        (
            vec!["construct", "--group", "G4.9", "--alpha", "1", "--method", "re-im",
                "--part", "re", "--r", "1"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.9", "--alpha", "1", "--order", "1"]
                .into_iter().map(String::from).collect(),
        ),
        // t-factor on G4.4, order 3
        (
            vec!["construct", "--group", "G4.4", "--method", "t-factor", "--r", "3"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.4", "--order", "3"]
                .into_iter().map(String::from).collect(),
        ),
        // default quadratic (affine) on G4.8, order 1
        (
            vec!["construct", "--group", "G4.8", "--alpha", "0.5", "--method", "quadratic"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.8", "--alpha", "0.5", "--order", "1"]
                .into_iter().map(String::from).collect(),
        ),
        // explicit ladder over a coordinate base on G4.1 (Phi = 0, Psi = 1)
        (
            vec!["construct", "--group", "G4.1", "--method", "ladder", "--r", "2",
                "--psi", "builtin:g41-poly", "--phi-poly", "0", "--psi-poly", "1"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.1", "--order", "2"]
                .into_iter().map(String::from).collect(),
        ),
        // separated product on G4.1: t-factor(order 2) times x3^3 (order 2) -> order 3
        (
            vec!["construct", "--group", "G4.1", "--method", "product", "--r", "2",
                "--psi", "builtin:g41-poly", "--psi-order", "2", "--coeffs", "1,0"]
                .into_iter().map(String::from).collect(),
            vec!["verify", "--group", "G4.1", "--order", "3"]
                .into_iter().map(String::from).collect(),
        ),
    ];
    for (i, (mut construct_args, mut verify_args)) in cases.into_iter().enumerate() {
        let fn_path = dir.join(format!("fn-{i}.json"));
        construct_args.push("--out".into());
        construct_args.push(fn_path.to_str().unwrap().into());
        let out = bin().args(&construct_args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "construct case {i}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        // provenance block goes to stdout and is JSON
        let provenance: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(provenance["claimed_order"].is_u64());

        verify_args.push("--function".into());
        verify_args.push(fn_path.to_str().unwrap().into());
        verify_args.push("--samples".into());
        verify_args.push("80".into());
        let out = bin().args(&verify_args).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "verify case {i}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn construct_output_is_a_bare_function_file() {
    let dir = tmpdir("barefn");
    let fn_path = dir.join("fn.json");
    let out = run(&["construct", "--group", "Sol3", "--method", "t-factor", "--r", "2",
        "--out", fn_path.to_str().unwrap()]);
    assert!(out.status.success());
    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&fn_path).unwrap()).unwrap();
    assert!(tree["op"].is_string(), "function file must be a bare {{op, ...}} tree");
}

#[test]
fn oracle_tau_prints_jet_and_fd_side_by_side() {
    let out = run(&["oracle", "tau", "--group", "Sol3", "--function", "builtin:sol3-arsinh",
        "--point", "0,2,1"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed["jet"].is_array());
    assert!(parsed["finite_difference"].is_array());
    let rel = parsed["rel_diff"].as_f64().unwrap();
    assert!(rel < 1e-5, "oracle deviation {rel}");
}

#[test]
fn group_spec_file_input_works() {
    let dir = tmpdir("specfile");
    let spec_path = dir.join("group.json");
    std::fs::write(
        &spec_path,
        r#"{"kind":"abelian","m":1,"n":2,"matrices":[[1.0,0.0,0.0,-1.0]]}"#,
    )
    .unwrap();
    let fn_path = dir.join("fn.json");
    let out = run(&["construct", "--group", spec_path.to_str().unwrap(), "--method",
        "eigenvector", "--r", "1", "--out", fn_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "--group", spec_path.to_str().unwrap(), "--function",
        fn_path.to_str().unwrap(), "--order", "1", "--samples", "60"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // builtins are refused on file-backed groups
    let out = run(&["verify", "--group", spec_path.to_str().unwrap(), "--function",
        "builtin:sol3-arsinh", "--order", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_single_criterion_runs() {
    let out = run(&["selftest", "--criterion", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[PASS] criterion  1"), "{text}");
}
