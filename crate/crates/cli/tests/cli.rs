//! End-to-end tests of the `pld` binary: exit codes, table layout, row
//! round-trips and output determinism.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn pld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pld"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Parses a rendered table into (columns, rows), skipping `#` header lines.
fn parse_table(body: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = body.lines().filter(|l| !l.starts_with('#'));
    let columns: Vec<String> = lines
        .next()
        .expect("column header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (columns, rows)
}

fn row_map(body: &str) -> HashMap<String, String> {
    let (cols, rows) = parse_table(body);
    assert_eq!(rows.len(), 1, "expected a single row");
    cols.into_iter().zip(rows[0].clone()).collect()
}

#[test]
fn eval_emits_one_row_with_profile() {
    let out = pld(&["eval"]);
    assert!(out.status.success());
    let row = row_map(&stdout(&out));
    let r_d: f64 = row["r_d"].parse().unwrap();
    assert!(r_d > 0.0 && r_d < 1.0);
    assert_eq!(row["feasible"], "false", "the surface-plot point is not itself feasible");
}

#[test]
fn eval_row_round_trips_bit_for_bit() {
    let out = pld(&["eval", "--override", "link.z_eve_db=-12.5", "--override", "alloc.n_m=77"]);
    assert!(out.status.success());
    let row = row_map(&stdout(&out));

    let overrides = [
        format!("link.z_bob_db={}", row["z_bob_db"]),
        format!("link.z_eve_db={}", row["z_eve_db"]),
        format!("link.power_mw={}", row["power_mw"]),
        format!("link.noise_mw={}", row["noise_mw"]),
        format!("payload.d_m={}", row["d_m"]),
        format!("payload.d_k={}", row["d_k"]),
        format!("alloc.n_m={}", row["n_m"]),
        format!("alloc.n_k={}", row["n_k"]),
    ];
    let mut args = vec!["eval"];
    for o in &overrides {
        args.push("--override");
        args.push(o);
    }
    let again = row_map(&stdout(&pld(&args)));
    for col in ["eps_bob_m", "eps_bob_k", "eps_eve_m", "eps_eve_k", "eps_lf", "r_d", "throughput"] {
        assert_eq!(row[col], again[col], "column {col} must reproduce bit-for-bit");
    }
}

#[test]
fn eval_baseline_mode_has_zero_deception() {
    let out = pld(&["eval", "--override", "payload.d_k=0"]);
    assert!(out.status.success());
    let row = row_map(&stdout(&out));
    assert_eq!(row["r_d"], "0");
    assert_eq!(row["n_k"], "0");
}

#[test]
fn missing_value_is_a_usage_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("broken.spec");
    std::fs::write(&spec, "link.power_mw =\n").unwrap();
    let out = pld(&["eval", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("link.power_mw"), "stderr must name the field: {err}");
}

#[test]
fn unknown_key_and_bad_override_are_usage_errors() {
    assert_eq!(pld(&["eval", "--override", "link.bogus=1"]).status.code(), Some(64));
    assert_eq!(pld(&["eval", "--override", "no-equals-sign"]).status.code(), Some(64));
    assert_eq!(pld(&["no-such-command"]).status.code(), Some(64));
}

#[test]
fn infeasible_solve_exits_2_with_explicit_row() {
    let out = pld(&["solve", "--override", "thresholds.throughput_min=10"]);
    assert_eq!(out.status.code(), Some(2));
    let row = row_map(&stdout(&out));
    assert_eq!(row["feasible"], "false");
}

#[test]
fn solve_writes_result_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.csv");
    let out = pld(&[
        "solve",
        "--override",
        "link.z_bob_db=-5",
        "--override",
        "link.z_eve_db=-15",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let row = row_map(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(row["feasible"], "true");

    let trace_path = dir.path().join("result_trace.csv");
    assert!(trace_path.exists(), "solve must write the iterate trace next to the result");
    let (cols, rows) = parse_table(&std::fs::read_to_string(&trace_path).unwrap());
    assert_eq!(cols, ["layer", "index", "n_m", "n_k", "y", "surrogate_rd", "true_rd"]);
    assert!(rows.len() > 3);
    assert!(rows.iter().any(|r| r[0] == "mm"));
    assert!(rows.iter().any(|r| r[0] == "fp"));
}

fn oracle_best(path: &Path) -> (u32, u32, f64) {
    let (cols, rows) = parse_table(&std::fs::read_to_string(path).unwrap());
    let idx = |name: &str| cols.iter().position(|c| c == name).unwrap();
    let (n_m, n_k, r_d, feas) = (idx("n_m"), idx("n_k"), idx("r_d"), idx("feasible"));
    rows.iter()
        .filter(|r| r[feas] == "true")
        .map(|r| {
            (
                r[n_m].parse::<u32>().unwrap(),
                r[n_k].parse::<u32>().unwrap(),
                r[r_d].parse::<f64>().unwrap(),
            )
        })
        .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .expect("a feasible point exists")
}

#[test]
fn solve_matches_oracle_argmax_on_search_path_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    for d_m in ["16", "24"] {
        let overrides = [
            "link.z_bob_db=-5".to_string(),
            "link.z_eve_db=-15".to_string(),
            format!("payload.d_m={d_m}"),
        ];
        let oracle_path = dir.path().join(format!("oracle_{d_m}.csv"));
        let mut args = vec!["oracle"];
        for o in &overrides {
            args.push("--override");
            args.push(o);
        }
        args.push("--out");
        args.push(oracle_path.to_str().unwrap());
        assert!(pld(&args).status.success());
        let (om, ok, ord) = oracle_best(&oracle_path);

        let mut args = vec!["solve"];
        for o in &overrides {
            args.push("--override");
            args.push(o);
        }
        let row = row_map(&stdout(&pld(&args)));
        assert_eq!(row["n_m_opt"].parse::<u32>().unwrap(), om, "d_m={d_m}");
        assert_eq!(row["n_k_opt"].parse::<u32>().unwrap(), ok, "d_m={d_m}");
        let rd: f64 = row["r_d"].parse().unwrap();
        assert!(rd >= (1.0 - 1e-6) * ord);
    }
}

#[test]
fn oracle_surface_has_full_box_and_consistent_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    assert!(pld(&["oracle", "--out", path.to_str().unwrap()]).status.success());
    let (cols, rows) = parse_table(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(
        cols,
        ["n_m", "n_k", "eps_bob_m", "eps_bob_k", "eps_eve_m", "eps_eve_k", "eps_lf", "r_d",
         "throughput", "feasible"]
    );
    assert_eq!(rows.len(), 113 * 113);
    // feasible rows satisfy the default thresholds when rechecked
    let idx = |name: &str| cols.iter().position(|c| c == name).unwrap();
    for r in rows.iter().filter(|r| r[idx("feasible")] == "true") {
        let g = |name: &str| r[idx(name)].parse::<f64>().unwrap();
        assert!(g("eps_bob_m") <= 0.5);
        assert!(g("eps_eve_m") <= 0.5);
        assert!(g("eps_bob_k") <= 0.5);
        assert!(g("eps_eve_k") >= 0.5);
        assert!(g("throughput") >= 0.1);
    }
}

#[test]
fn sweep_records_infeasible_points_and_continues() {
    let out = pld(&[
        "sweep",
        "--override", "sweep.axis=z_eve_db",
        "--override", "sweep.start=-20",
        "--override", "sweep.stop=-16",
        "--override", "sweep.step=1",
        "--override", "thresholds.throughput_min=0.05",
    ]);
    assert!(out.status.success());
    let (cols, rows) = parse_table(&stdout(&out));
    assert_eq!(rows.len(), 5);
    let feas = cols.iter().position(|c| c == "pld_feasible").unwrap();
    let states: Vec<&str> = rows.iter().map(|r| r[feas].as_str()).collect();
    assert!(states.contains(&"false"), "the weak-eavesdropper end is infeasible in the default box");
    assert!(states.contains(&"true"));
}

#[test]
fn two_axis_sweep_emits_the_full_grid() {
    let out = pld(&[
        "sweep",
        "--override", "sweep.axis=z_eve_db",
        "--override", "sweep.start=-16",
        "--override", "sweep.stop=-14",
        "--override", "sweep.step=1",
        "--override", "sweep.axis2=power_mw",
        "--override", "sweep.start2=4",
        "--override", "sweep.stop2=6",
        "--override", "sweep.step2=1",
        "--override", "thresholds.throughput_min=0.05",
    ]);
    assert!(out.status.success());
    let (cols, rows) = parse_table(&stdout(&out));
    assert_eq!(rows.len(), 9, "3 gains x 3 powers");
    let idx = |name: &str| cols.iter().position(|c| c == name).unwrap();
    let gains: Vec<&str> = rows.iter().map(|r| r[idx("z_eve_db")].as_str()).collect();
    let powers: Vec<&str> = rows.iter().map(|r| r[idx("power_mw")].as_str()).collect();
    assert_eq!(gains[..3], ["-16", "-16", "-16"]);
    assert_eq!(powers[..3], ["4", "5", "6"]);
}

#[test]
fn simulate_is_deterministic_and_agrees() {
    let run = || stdout(&pld(&["simulate", "--trials", "200000", "--seed", "7"]));
    let a = run();
    let b = run();
    assert_eq!(a, b, "same seed must reproduce the table bit-for-bit");
    let row = row_map(&a);
    assert_eq!(row["r_d_agree"], "true");
    assert_eq!(row["eps_lf_agree"], "true");

    let c = stdout(&pld(&["simulate", "--trials", "200000", "--seed", "8"]));
    assert_ne!(a, c, "a different seed draws different outcomes");
}

#[test]
fn validate_codebook_default_passes() {
    let out = pld(&["validate-codebook"]);
    assert!(out.status.success());
    let (cols, rows) = parse_table(&stdout(&out));
    let idx = |name: &str| cols.iter().position(|c| c == name).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[idx("valid")], "true", "{r:?}");
    }
    assert_eq!(rows[0][idx("mode")], "algebraic-xor");
}

#[test]
fn spec_file_drives_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("scenario.spec");
    std::fs::write(&spec, "# scenario\nlink.z_eve_db = -15\nalloc.n_m = 100\n").unwrap();
    let row = row_map(&stdout(&pld(&["eval", "--spec", spec.to_str().unwrap()])));
    assert_eq!(row["z_eve_db"], "-15");
    assert_eq!(row["n_m"], "100");
}
