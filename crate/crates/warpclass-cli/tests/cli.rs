//! End-to-end behavior of the command-line interface: exit codes, output
//! schemas, config handling, format switches and determinism.

mod support;

use support::*;

#[test]
fn classify_reports_validate_against_the_schema() {
    let sch = schema("classify.schema.json");

    let out = run(&["classify", "-m", "2", "--family", "euclidean"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["parabolic"], "yes");
    assert_eq!(v["stochastically_complete"], "yes");
    assert_eq!(v["l1_liouville"], "yes");

    let out = run(&[
        "classify",
        "-m",
        "2",
        "--family",
        "spliced-exp-power",
        "--a",
        "1",
        "--p",
        "3",
        "--t0",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["stochastically_complete"], "no");
    assert_eq!(v["l1_liouville"], "no");
    assert!(v["tonelli_reldiff"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn short_table_classifies_unknown_with_exit_10() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("short.csv");
    write_short_table(&table);
    let out = run(&[
        "classify",
        "-m",
        "2",
        "--family",
        "tabulated",
        "--file",
        table.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 10, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["stochastically_complete"], "unknown");
    assert_eq!(v["l1_liouville"], "unknown");
}

#[test]
fn usage_errors_exit_2() {
    // invalid family parameter
    let out = run(&["classify", "-m", "2", "--family", "hyperbolic", "--k", "-1"]);
    assert_eq!(exit_code(&out), 2);
    // r beyond R
    let out = run(&[
        "exit-time", "-m", "3", "--family", "euclidean", "--r", "2", "--R", "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    // unknown flag (clap)
    let out = run(&["classify", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 2);
    // dimension below 2
    let out = run(&["classify", "-m", "1", "--family", "euclidean"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn exit_time_ball_and_global() {
    let sch = schema("exit_time.schema.json");
    let out = run(&[
        "exit-time", "-m", "3", "--family", "euclidean", "--r", "0", "--R", "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert!((v["value"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);

    let out = run(&[
        "exit-time",
        "-m",
        "2",
        "--family",
        "spliced-exp-power",
        "--global",
        "--r",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["claim"], "not_l1_liouville");
    assert!(v["value"].as_f64().unwrap() > 0.0);

    let out = run(&[
        "exit-time", "-m", "2", "--family", "euclidean", "--global", "--r", "0",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["claim"], "l1_liouville");
}

#[test]
fn simulate_stats_schema_check_and_determinism() {
    let sch = schema("simulate_stats.schema.json");
    let args = [
        "simulate", "-m", "3", "--family", "euclidean", "--r0", "0", "--R", "1", "--paths",
        "2000", "--seed", "42", "--check",
    ];
    let a = run(&args);
    assert_eq!(exit_code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let v = stdout_json(&a);
    assert_valid(&sch, &v);
    assert!(v["check"]["pass"].as_bool().unwrap());
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");

    // different seed, different sample
    let c = run(&[
        "simulate", "-m", "3", "--family", "euclidean", "--r0", "0", "--R", "1", "--paths",
        "2000", "--seed", "43", "--check",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_is_worker_count_independent() {
    let args = [
        "simulate", "-m", "3", "--family", "euclidean", "--r0", "0", "--R", "1", "--paths",
        "1500", "--seed", "9", "--check",
    ];
    let run_with = |threads: &str| {
        bin()
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("spawning warpclass")
    };
    let one = run_with("1");
    let four = run_with("4");
    assert_eq!(exit_code(&one), 0);
    assert_eq!(
        one.stdout, four.stdout,
        "statistics must not depend on the worker count"
    );
}

#[test]
fn simulate_explosion_and_scan() {
    let out = run(&[
        "simulate",
        "-m",
        "2",
        "--family",
        "spliced-exp-power",
        "--r0",
        "1",
        "--explosion",
        "--paths",
        "300",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&schema("simulate_explosion.schema.json"), &v);
    assert!(v["fraction"].as_f64().unwrap() >= 0.99);

    let out = run(&[
        "simulate",
        "-m",
        "2",
        "--family",
        "spliced-exp-power",
        "--r0",
        "1",
        "--scan",
        "2,4",
        "--paths",
        "500",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&schema("simulate_scan.schema.json"), &v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);

    // CSV flavor has the documented stable header
    let out = run(&[
        "--format",
        "csv",
        "simulate",
        "-m",
        "2",
        "--family",
        "spliced-exp-power",
        "--r0",
        "1",
        "--scan",
        "2,4",
        "--paths",
        "200",
        "--seed",
        "7",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("R,n_paths,n_exited,n_censored,mean,se,min,max\n"));
}

#[test]
fn simulate_trace_dump() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "simulate",
        "-m",
        "3",
        "--family",
        "euclidean",
        "--r0",
        "0",
        "--R",
        "1",
        "--paths",
        "4",
        "--seed",
        "5",
        "--trace-paths",
        "2",
        "--trace-file",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("path_index,step,t,r\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn example_one_end_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sector.csv");
    let out = run(&[
        "example",
        "one-end",
        "--a",
        "1",
        "--p",
        "3",
        "--t0",
        "1",
        "--grid-n",
        "64",
        "--sector-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_valid(&schema("example_one_end.schema.json"), &v);
    assert!(v["certificate"]["certified"].as_bool().unwrap());
    assert!(
        v["certificate"]["min_value"].as_f64().unwrap() >= 0.35355339059327373 - 1e-9
    );
    assert_eq!(v["sector_divergence"]["verdict"], "divergent");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("R_cut,mass,lower_bound\n"));
    assert_eq!(text.lines().count(), 4, "three cutoffs plus header");
}

#[test]
fn example_two_end_exit_codes() {
    let sch = schema("example_two_end.schema.json");
    let out = run(&[
        "example", "two-end", "--sigma1", "euclidean", "--sigma2", "spliced-exp-power",
        "--a2", "1", "--p2", "3", "--t02", "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["conclusion"], "hypotheses_hold");

    let out = run(&[
        "example", "two-end", "--sigma1", "euclidean", "--sigma2", "euclidean",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_valid(&sch, &stdout_json(&out));
}

#[test]
fn minimal_scenarios_and_schema() {
    let sch = schema("minimal.schema.json");
    let out = run(&["minimal", "--G", "const:0", "-m", "3"]);
    assert_eq!(exit_code(&out), 1);
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["conclusion"], "no_conclusion_exit_time_infinite");

    let out = run(&["minimal", "--G", "const:1", "-m", "2"]);
    assert_eq!(exit_code(&out), 1);
    assert_valid(&sch, &stdout_json(&out));

    let out = run(&["minimal", "--G", "poly-sq:3t^2", "-m", "2", "--tmax", "12"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_valid(&sch, &v);
    assert_eq!(v["conclusion"], "not_l1_liouville");

    let out = run(&["minimal", "--G", "nonsense", "-m", "2"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn config_file_mirrors_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
[model]
dim = 2
family = "spliced-exp-power"
a = 1.0
p = 3.0
t0 = 1.0

[quadrature]
tol = 1e-8
jmax = 40
"#,
    )
    .unwrap();
    let via_config = run(&["--config", cfg.to_str().unwrap(), "classify"]);
    assert_eq!(exit_code(&via_config), 0);
    let via_flags = run(&[
        "classify", "-m", "2", "--family", "spliced-exp-power", "--a", "1", "--p", "3",
        "--t0", "1",
    ]);
    assert_eq!(via_config.stdout, via_flags.stdout);

    // flags override the file
    let overridden = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "classify",
        "--family",
        "euclidean",
    ]);
    let v = stdout_json(&overridden);
    assert_eq!(v["provenance"]["model"], "euclidean");

    // unknown keys are rejected
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[model]\nfamly = \"euclidean\"\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "classify"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn output_file_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "--output",
        path.to_str().unwrap(),
        "classify",
        "-m",
        "3",
        "--family",
        "euclidean",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "file output keeps stdout clean");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["parabolic"], "no");

    let out = run(&["--format", "csv", "classify", "-m", "3", "--family", "euclidean"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with(
        "parabolic,stochastically_complete,l1_liouville,volume_growth_sufficient"
    ));

    let out = run(&["--format", "table", "classify", "-m", "3", "--family", "euclidean"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("parabolic") && text.contains("no"));
}

#[test]
fn help_documents_defaults() {
    for (args, needles) in [
        (
            vec!["simulate", "--help"],
            vec!["100000", "1e-4", "50", "10", "1e-3"],
        ),
        (vec!["--help"], vec!["1e-8", "40", "json"]),
        (vec!["example", "one-end", "--help"], vec!["1.2", "200", "2,4,8"]),
        (vec!["minimal", "--help"], vec!["10", "1e-3"]),
    ] {
        let out = run(&args);
        let text = String::from_utf8_lossy(&out.stdout);
        for needle in needles {
            assert!(
                text.contains(needle),
                "`{}` help must document default {needle}:\n{text}",
                args.join(" ")
            );
        }
    }
}

#[test]
fn float_output_is_17_significant_digits() {
    let out = run(&[
        "exit-time", "-m", "3", "--family", "euclidean", "--r", "0", "--R", "1",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("1.6666666666666669e-1") || text.contains("1.6666666666666666e-1"),
        "expected 17-significant-digit floats, got {text}"
    );
}
