use std::io::Write;
use std::process::Command as Process;

use skellam_markov::bounds::{bound_shape, read_csv, TheoremId};
use skellam_markov::{ChainParams, LatticeMeasure, NormKind, SkellamParams};
use skellam_markov_cli::{
    format_significant, parse_command, resolve_jobs, run_command, CliError, Command, Format,
};

fn run(args: &[&str]) -> (Result<(), CliError>, String, String) {
    let cmd = parse_command(args.iter().copied()).expect("command parses");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let result = run_command(&cmd, &mut out, &mut err);
    (
        result,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_skellam-markov"))
}

#[test]
fn pmf_parses_into_skellam_params() {
    match parse_command(["pmf", "--l1", "1", "--l2", "1", "--k", "0"]).unwrap() {
        Command::Pmf { params, k, .. } => {
            assert_eq!(params, SkellamParams::new(1.0, 1.0).unwrap());
            assert_eq!(k, 0);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(parse_command(["pmf", "--l1", "1", "--l2", "1", "--k", "-4"]).is_ok());
}

#[test]
fn pmf_prints_twelve_digits() {
    let (res, out, _) = run(&["pmf", "--l1", "1", "--l2", "1", "--k", "0"]);
    res.unwrap();
    // e^{-2} Σ 1/(m!)^2
    let mut oracle = 0.0;
    let mut f = 1.0;
    for m in 0..30 {
        if m > 0 {
            f *= m as f64;
        }
        oracle += 1.0 / (f * f);
    }
    oracle *= (-2.0f64).exp();
    assert_eq!(out.trim(), "0.308508322554");
    assert_eq!(out.trim(), format_significant(oracle));
}

#[test]
fn significant_digit_formatting() {
    assert_eq!(format_significant(1.0), "1.00000000000");
    assert_eq!(format_significant(123.456), "123.456000000");
    assert_eq!(format_significant(1.5e-9), "1.50000000000e-9");
    assert_eq!(format_significant(0.0), "0");
}

#[test]
fn unknown_subcommand_fails() {
    let err = parse_command(["frobnicate"]).unwrap_err();
    assert_ne!(err.exit_code(), 0);
    let status = binary().arg("frobnicate").output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn strict_region_is_enforced() {
    let err = parse_command([
        "sweep", "--alpha", "0.5", "--beta", "0.02", "--n", "10", "--approx", "skellam",
    ])
    .unwrap_err();
    assert!(err.to_string().contains("0 ≤ α ≤ 1/30"), "{err}");
    assert!(err.to_string().contains("--alpha"));
    assert_eq!(err.exit_code(), 3);
    let ok = parse_command([
        "exact",
        "--alpha",
        "0.2",
        "--beta",
        "0.1",
        "--n",
        "3",
        "--exploratory",
    ]);
    assert!(ok.is_ok());
}

#[test]
fn malformed_numbers_name_the_flag() {
    let err = parse_command(["exact", "--alpha", "abc", "--beta", "0.02", "--n", "3"]).unwrap_err();
    assert!(err.to_string().contains("--alpha"), "{err}");
    assert_eq!(err.exit_code(), 2);
    let err = parse_command(["check", "--suite", "nope"]).unwrap_err();
    assert!(err.to_string().contains("--suite"));
    let err = parse_command([
        "compare", "--alpha", "0.02", "--beta", "0.02", "--n", "5", "--approx", "skellam",
        "--metric", "xx",
    ])
    .unwrap_err();
    assert!(err.to_string().contains("--metric"));
}

#[test]
fn defaults_are_applied() {
    match parse_command([
        "compare", "--alpha", "0.02", "--beta", "0.02", "--n", "4", "--approx", "skellam",
        "--metric", "tv",
    ])
    .unwrap()
    {
        Command::Compare {
            chain, tol, out, ..
        } => {
            assert_eq!([chain.p1, chain.p2, chain.p3], [1.0 / 3.0; 3]);
            assert_eq!(tol, 1e-12);
            assert_eq!(out.format, Format::Csv);
            assert!(out.path.is_none());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn compare_matches_bound_shape() {
    let (res, out, _) = run(&[
        "compare", "--alpha", "0.02", "--beta", "0.02", "--n", "256", "--approx", "skellam",
        "--metric", "tv",
    ]);
    res.unwrap();
    let rows = read_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    let cp = ChainParams::uniform_start(0.02, 0.02).unwrap();
    let shape = bound_shape(TheoremId::Skellam, NormKind::TotalVariation, &cp, 256).unwrap();
    assert_eq!(row.shape, shape);
    assert_eq!(row.shape, 1.0 / 256.0);
    assert!((row.ratio - row.lhs / row.shape).abs() <= 1e-15 * row.ratio);
    assert!(row.lhs > 0.0);
}

#[test]
fn measure_json_round_trips() {
    for args in [
        vec![
            "exact", "--alpha", "0.03", "--beta", "0.01", "--p1", "0.2", "--p2", "0.5", "--p3",
            "0.3", "--n", "40",
        ],
        vec![
            "build",
            "--alpha",
            "0.03",
            "--beta",
            "0.01",
            "--component",
            "W1",
        ],
        vec![
            "build",
            "--alpha",
            "0.03",
            "--beta",
            "0.01",
            "--component",
            "k",
            "--k-variant",
            "proof",
        ],
        vec![
            "approx", "--alpha", "0.02", "--beta", "0.01", "--n", "30", "--approx", "ekg",
        ],
    ] {
        let (res, out, _) = run(&args);
        res.unwrap();
        let m = LatticeMeasure::from_json(out.trim()).unwrap();
        assert_eq!(LatticeMeasure::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(m.to_json(), out.trim());
    }
}

#[test]
fn exploratory_run_warns() {
    let (res, _, err) = run(&[
        "exact",
        "--alpha",
        "0.2",
        "--beta",
        "0.1",
        "--n",
        "3",
        "--exploratory",
    ]);
    res.unwrap();
    assert!(err.contains("warning"));
}

#[test]
fn sweep_and_ratefit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let (res, _, _) = run(&[
        "sweep",
        "--alpha",
        "0.02",
        "--beta",
        "0.02",
        "--n",
        "128,256,512,1024",
        "--approx",
        "skellam",
        "--metrics",
        "tv,local",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    res.unwrap();
    let rows = read_csv(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    let (res, out, _) = run(&[
        "ratefit",
        "--input",
        csv_path.to_str().unwrap(),
        "--metric",
        "tv",
    ]);
    res.unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "approximant,metric,alpha,beta,p1,p2,p3,points,slope,intercept"
    );
    assert_eq!(lines.len(), 2);
    let slope: f64 = lines[1].split(',').nth(8).unwrap().parse().unwrap();
    assert!((-1.15..=-0.85).contains(&slope), "{slope}");
}

#[test]
fn sweep_grid_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let mut f = std::fs::File::create(&grid).unwrap();
    writeln!(f, "alpha,beta,n").unwrap();
    writeln!(f, "0.02,0.02,50").unwrap();
    writeln!(f, "0.01,0.03,60").unwrap();
    drop(f);
    let (res, out, _) = run(&[
        "sweep",
        "--grid",
        grid.to_str().unwrap(),
        "--approx",
        "explicit",
        "--format",
        "json",
    ]);
    res.unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[3]["n"], 60);
    assert_eq!(rows[0]["metric"], "tv");
    assert!(rows[0]["error"].is_null());
}

#[test]
fn sweep_row_errors_exit_nonzero() {
    let (res, out, err) = run(&[
        "sweep",
        "--alpha",
        "0.02",
        "--beta",
        "0.02",
        "--n",
        "20",
        "--approx",
        "skellam",
        "--metrics",
        "tv,lr:2",
    ]);
    let e = res.unwrap_err();
    assert_eq!(e.exit_code(), 5);
    assert!(err.contains("1 of 2 rows failed"));
    assert_eq!(read_csv(out.as_bytes()).unwrap().len(), 2);
}

#[test]
fn check_suites_pass() {
    let (res, _, err) = run(&[
        "check",
        "--suite",
        "smoothing",
        "--cases",
        "200",
        "--seed",
        "7",
    ]);
    res.unwrap();
    assert!(err.contains("0 failed"));
    for suite in ["norms", "bergstrom", "skellam-oracle", "decomposition"] {
        let (res, out, _) = run(&[
            "check", "--suite", suite, "--cases", "5", "--format", "json",
        ]);
        res.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(!v.as_array().unwrap().is_empty());
    }
    let status = binary()
        .args([
            "check",
            "--suite",
            "smoothing",
            "--cases",
            "200",
            "--seed",
            "7",
        ])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "sweep",
        "--alpha",
        "0.01,0.03",
        "--beta",
        "0.02",
        "--n",
        "16,32",
        "--approx",
        "ekg",
    ];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
}

#[test]
fn jobs_environment_overrides_flag() {
    assert_eq!(resolve_jobs(3, None).unwrap(), 3);
    assert_eq!(resolve_jobs(3, Some("")).unwrap(), 3);
    assert_eq!(resolve_jobs(3, Some("2")).unwrap(), 2);
    assert!(resolve_jobs(3, Some("many")).is_err());
}

#[test]
fn missing_output_directory_is_io_error() {
    let (res, _, _) = run(&[
        "pmf",
        "--l1",
        "1",
        "--l2",
        "1",
        "--k",
        "0",
        "--out",
        "/nonexistent/dir/x.txt",
    ]);
    assert_eq!(res.unwrap_err().exit_code(), 6);
}
