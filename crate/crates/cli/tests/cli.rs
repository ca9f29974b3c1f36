use std::path::Path;

use poisson_lab_cli::output::{
    CheckOutcome, HistogramRow, LimitPoint, SimplexReport, SimplexRow, VerifyReport,
};
use poisson_lab_cli::{run, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, EXIT_USAGE};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut argv = vec!["poisson-lab"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn read_histogram(path: &Path) -> Vec<HistogramRow> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn simulate_writes_count_frequency_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.csv");
    let r = cli(&[
        "simulate",
        "--rate",
        "2",
        "--horizon",
        "3",
        "--replicas",
        "100000",
        "--seed",
        "42",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("count,frequency\n"));
    let rows = read_histogram(&path);
    assert_eq!(rows.iter().map(|r| r.frequency).sum::<u64>(), 100_000);
    assert!(rows.iter().enumerate().all(|(i, r)| r.count == i as u64));
    assert!(r.stderr.contains("100000 replicas"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = [
        "simulate",
        "--rate",
        "1.5",
        "--horizon",
        "4",
        "--replicas",
        "5000",
        "--seed",
        "8",
        "--method",
        "conditional-uniform",
    ];
    let a = cli(&args);
    let b = cli(&args);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let other = cli(&[
        "simulate",
        "--rate",
        "1.5",
        "--horizon",
        "4",
        "--replicas",
        "5000",
        "--seed",
        "9",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn simplex_table_matches_exact_volumes() {
    let r = cli(&[
        "simplex",
        "--dim",
        "3",
        "--extent",
        "1",
        "--mc-samples",
        "1000000",
        "--seed",
        "7",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows: Vec<SimplexRow> = csv::Reader::from_reader(r.stdout.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[2].exact - 1.0 / 6.0).abs() < 1e-15);
    assert!((rows[2].recursive - 1.0 / 6.0).abs() < 1e-8);
    assert!((rows[2].mc - 1.0 / 6.0).abs() < 4.0 * rows[2].mc_std_error);
    assert_eq!(rows[0].mc, 1.0);
}

#[test]
fn simplex_json_round_trips() {
    let r = cli(&[
        "simplex",
        "--dim",
        "4",
        "--extent",
        "2",
        "--mc-samples",
        "20000",
        "--seed",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(r.code, EXIT_OK);
    let report: SimplexReport = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.rows.len(), 4);
    assert_eq!(
        serde_json::to_string_pretty(&report).unwrap() + "\n",
        r.stdout
    );
}

#[test]
fn limit_emits_decreasing_tv_array() {
    let r = cli(&["limit", "--mu", "1", "--n", "10,100,1000"]);
    assert_eq!(r.code, EXIT_OK);
    let points: Vec<LimitPoint> = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(
        points.iter().map(|p| p.n).collect::<Vec<_>>(),
        [10, 100, 1000]
    );
    assert!(points.windows(2).all(|w| w[1].tv < w[0].tv));
}

#[test]
fn verify_checks_pass_and_round_trip() {
    for check in ["poisson", "uniformity", "rarity", "independence"] {
        let r = cli(&[
            "verify",
            check,
            "--rate",
            "1",
            "--horizon",
            "10",
            "--replicas",
            "20000",
            "--seed",
            "3",
        ]);
        assert_eq!(r.code, EXIT_OK, "{check}: {}", r.stderr);
        let report: VerifyReport = serde_json::from_str(&r.stdout).unwrap();
        assert!(report.passed);
        assert_eq!(report.schema_version, 1);
        let value: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(value["check"], check);
        assert!(r.stderr.contains("PASS"));
    }
}

#[test]
fn verify_failure_has_its_own_exit_code() {
    // At alpha = 0.999 almost any p-value rejects.
    let r = cli(&[
        "verify",
        "poisson",
        "--rate",
        "2",
        "--horizon",
        "3",
        "--replicas",
        "2000",
        "--seed",
        "4",
        "--alpha",
        "0.999",
    ]);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    let report: VerifyReport = serde_json::from_str(&r.stdout).unwrap();
    assert!(!report.passed);
    assert!(matches!(report.outcome, CheckOutcome::Poisson(_)));
    assert!(r.stderr.contains("FAIL"));
}

#[test]
fn gas_reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.csv");
    let r = cli(&[
        "gas",
        "binomial",
        "--particles",
        "200",
        "--volume",
        "100",
        "--sub-volume",
        "5",
        "--replicas",
        "5000",
        "--seed",
        "2",
        "--histogram",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report: poisson_lab_cli::output::GasBinomialReport =
        serde_json::from_str(&r.stdout).unwrap();
    assert!((report.outcome.p - 0.05).abs() < 1e-15);
    assert_eq!(
        read_histogram(&hist)
            .iter()
            .map(|r| r.frequency)
            .sum::<u64>(),
        5000
    );

    let r = cli(&[
        "gas",
        "multinomial",
        "--particles",
        "100",
        "--volume",
        "100",
        "--sub-volumes",
        "10,20",
        "--replicas",
        "3000",
        "--seed",
        "2",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report: poisson_lab_cli::output::GasMultinomialReport =
        serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report.marginals.len(), 2);
    assert!((report.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let r = cli(&[
        "gas",
        "thermo",
        "--density",
        "1",
        "--sub-volume",
        "10",
        "--particles",
        "100,1000,10000",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report: poisson_lab_cli::output::ThermoReport = serde_json::from_str(&r.stdout).unwrap();
    assert!(report.points.windows(2).all(|w| w[1].tv < w[0].tv));

    let r = cli(&[
        "gas",
        "conditioning",
        "--density",
        "1",
        "--volume",
        "100",
        "--sub-volume",
        "10",
        "--density-replicas",
        "20000",
        "--fixed-replicas",
        "5000",
        "--seed",
        "6",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report: poisson_lab_cli::output::ConditioningReportOut =
        serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report.total, 100);
    assert!(report.matched_replicas > 0);
}

#[test]
fn malformed_flags_are_usage_errors() {
    let r = cli(&["simulate", "--rate", "2"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("--seed"));
    assert_eq!(cli(&["bogus"]).code, EXIT_USAGE);
    assert_eq!(
        cli(&[
            "simulate",
            "--rate",
            "x",
            "--horizon",
            "1",
            "--replicas",
            "1",
            "--seed",
            "1"
        ])
        .code,
        EXIT_USAGE
    );
    let help = cli(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("simulate"));
}

#[test]
fn precondition_violations_name_the_bound() {
    let r = cli(&[
        "simulate",
        "--rate=-1",
        "--horizon",
        "3",
        "--replicas",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(
        r.stderr.contains("`rate`") && r.stderr.contains("> 0"),
        "{}",
        r.stderr
    );

    let r = cli(&[
        "simplex",
        "--dim",
        "3",
        "--extent",
        "1",
        "--mc-samples",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains(">= 1000"), "{}", r.stderr);

    let r = cli(&["limit", "--mu", "50", "--n", "10"]);
    assert_eq!(r.code, EXIT_ERROR);

    let r = cli(&[
        "gas",
        "binomial",
        "--particles",
        "10",
        "--volume",
        "10",
        "--sub-volume",
        "20",
        "--replicas",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, EXIT_ERROR);

    let r = cli(&[
        "simulate",
        "--rate",
        "1",
        "--horizon",
        "3",
        "--replicas",
        "0",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains(">= 1"));
}
