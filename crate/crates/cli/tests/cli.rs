use hessq::concavity::analytic_tensor;
use hessq::{EigenTuple64, QuotientOperator};
use hessq_lab::report::body;
use hessq_lab::{main_with_args, Hooks};
use serde_json::Value;

fn run_args(args: &[&str], hooks: &Hooks<'_>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hessq-lab").chain(args.iter().copied());
    let code = main_with_args(argv, hooks, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_args(args, &Hooks::default())
}

fn result<'a>(report: &'a str, key: &str) -> &'a str {
    let prefix = format!("# result.{key}=");
    report.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

#[test]
fn documented_examples_pass() {
    let (code, out, _) = run(&["concavity", "--n", "3", "--k", "2", "--samples", "100000", "--seed", "42"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# hessq-lab v0.1.0\n"));
    assert!(out.contains("# seed=42\n") && out.contains("# decision=C(n)=binomial(n,k)\n"));
    assert!(out.contains("# tolerance.gap=0.000000001\n"));
    assert!(result(&out, "min_gap").parse::<f64>().unwrap() >= -1e-9);

    let (code, out, _) = run(&["identities", "--n", "5", "--k", "3", "--samples", "1000"]);
    assert_eq!(code, 0);
    assert!(result(&out, "max_normalized_residual").parse::<f64>().unwrap() <= 1e-12);

    let (code, out, _) = run(&["singular", "--n", "4", "--k", "1", "--profile"]);
    assert_eq!(code, 0);
    assert!(out.contains("\nr,u,grad_norm,lambda_min,f\n"));
    assert!((result(&out, "exponent").parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 0.05);
}

#[test]
fn invalid_configuration_exits_2() {
    for args in [
        &["concavity", "--n", "5", "--k", "1"][..],
        &["singular", "--n", "4", "--k", "2"],
        &["identities", "--n", "3", "--k", "3"],
        &["identities", "--tol", "gap=1"],
        &["identities", "--tol", "residual=-1"],
        &["induction", "--n", "3", "--k", "2", "--l", "3"],
        &["no-such-command"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn io_failure_exits_3() {
    let (code, _, err) = run(&["identities", "--samples", "10", "--output", "/nonexistent-dir/report.csv"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = run(&["jacobi", "--field-in", "/nonexistent-dir/field.csv"]);
    assert_eq!(code, 3);
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.csv");
    std::fs::write(&junk, "not a field\n").unwrap();
    let (code, _, _) = run(&["legendre", "--field-in", junk.to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn wrong_tensor_is_caught() {
    // a sign error turns the concave operator convex
    let broken = |op: &QuotientOperator, l: &EigenTuple64| {
        let mut t = analytic_tensor(op, l)?;
        t.diag_block = t.diag_block.scale(-1.0);
        Ok(t)
    };
    let hooks = Hooks { tensor: &broken };
    let (code, out, err) = run_args(&["concavity", "--n", "4", "--k", "3", "--samples", "2000"], &hooks);
    assert_eq!(code, 1);
    assert!(result(&out, "witness").starts_with("sample "));
    assert_eq!(result(&out, "status"), "fail");
    assert!(err.contains("contract violated"));
    let (code, _, _) = run(&["concavity", "--n", "4", "--k", "3", "--samples", "2000"]);
    assert_eq!(code, 0);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["concavity", "--n", "4", "--k", "2", "--samples", "5000", "--seed", "9"][..],
        &["spectral-bounds", "--samples", "3000", "--seed", "9", "--format", "json"],
        &["legendre", "--samples", "300", "--seed", "9"],
    ] {
        let (c1, a, _) = run(args);
        let (c2, b, _) = run(args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(body(&a), body(&b));
    }
    let (_, a, _) = run(&["concavity", "--samples", "5000", "--seed", "1"]);
    let (_, b, _) = run(&["concavity", "--samples", "5000", "--seed", "2"]);
    assert_ne!(body(&a), body(&b));
}

#[test]
fn json_mirrors_csv() {
    let args = ["ellipticity", "--n", "4", "--k", "2"];
    let (_, csv, _) = run(&args);
    let (_, json, _) = run(&[&args[..], &["--format", "json"]].concat());
    let doc: Value = serde_json::from_str(&json).unwrap();
    let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect::<Vec<_>>().join(","), lines[0]);
    for (row, line) in doc["rows"].as_array().unwrap().iter().zip(&lines[1..]) {
        let joined = row.as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect::<Vec<_>>().join(",");
        assert_eq!(&joined, line);
    }
    assert_eq!(doc["rows"].as_array().unwrap().len(), lines.len() - 1);
    assert_eq!(doc["summary"]["variation"].as_str().unwrap(), result(&csv, "variation"));
    assert_eq!(doc["header"]["tolerance.variation"], "0.05");
}

#[test]
fn fields_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["field.csv", "field.bin"] {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let (c1, a, _) = run(&["jacobi", "--grid", "9", "--field-out", p]);
        let (c2, b, _) = run(&["jacobi", "--grid", "9", "--field-in", p]);
        assert_eq!((c1, c2), (0, 0));
        let strip = |s: &str| body(s).lines().filter(|l| !l.starts_with("# field_in=")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(&a), strip(&b));
    }
}

#[test]
fn binary_honours_seed_environment() {
    let exe = env!("CARGO_BIN_EXE_hessq-lab");
    let go = |seed: Option<&str>, extra: &[&str]| {
        let mut cmd = std::process::Command::new(exe);
        cmd.args(["concavity", "--samples", "500"]).args(extra).env_remove("HESSQ_SEED");
        if let Some(s) = seed {
            cmd.env("HESSQ_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    assert!(go(Some("77"), &[]).contains("# seed=77\n"));
    assert!(go(Some("77"), &["--seed", "5"]).contains("# seed=5\n"));
    assert!(go(None, &[]).contains(&format!("# seed={}\n", hessq_lab::config::DEFAULT_SEED)));
    assert_eq!(body(&go(Some("77"), &[])), body(&go(None, &["--seed", "77"])));
}
