//! The six subcommands: point evaluation, solving, the oracle surface,
//! experiment sweeps, Monte-Carlo validation and codebook checks.

use std::path::{Path, PathBuf};

use pld_core::linkmodel::{
    empirical_metrics, generate_litter, simulate_outcomes, validate_codebook, RepetitionCode,
    ToyCodebook, ValidationMode,
};
use pld_core::solver::Layer;
use pld_core::{
    baseline_pls, check_feasible, evaluate, grid_oracle, solve, CodeAllocation, ErasureProfile,
    SolveResult,
};

use crate::row;
use crate::scenario::ScenarioSpec;
use crate::table::ResultTable;
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 2;

fn point_allocation(spec: &ScenarioSpec) -> Result<CodeAllocation, CliError> {
    let n_k = if spec.d_k == 0 { 0.0 } else { spec.n_k };
    CodeAllocation::new(spec.d_m, spec.d_k, spec.n_m, n_k)
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_eval(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    let link = spec.link()?;
    let th = spec.thresholds()?;
    let alloc = point_allocation(spec)?;
    let profile = evaluate(&link, &alloc)?;
    let verdict = check_feasible(&profile, &alloc, &th);
    let mut table = ResultTable::new(
        "eval",
        &spec.config_hash(),
        vec![
            "z_bob_db", "z_eve_db", "power_mw", "noise_mw", "d_m", "d_k", "n_m", "n_k",
            "eps_bob_m_max", "eps_eve_m_max", "eps_bob_k_max", "eps_eve_k_min", "throughput_min",
            "eps_bob_m", "eps_bob_k", "eps_eve_m", "eps_eve_k", "eps_lf", "r_d", "throughput",
            "feasible", "slack_bob_m", "slack_eve_m", "slack_bob_k", "slack_eve_k",
            "slack_throughput",
        ],
    );
    table.push_row(row![
        spec.z_bob_db,
        spec.z_eve_db,
        spec.power_mw,
        spec.noise_mw,
        spec.d_m,
        spec.d_k,
        alloc.n_m,
        alloc.n_k,
        spec.eps_bob_m_max,
        spec.eps_eve_m_max,
        spec.eps_bob_k_max,
        spec.eps_eve_k_min,
        spec.throughput_min,
        profile.eps_bob_m,
        profile.eps_bob_k,
        profile.eps_eve_m,
        profile.eps_eve_k,
        profile.eps_lf,
        profile.r_d,
        profile.throughput,
        verdict.feasible,
        verdict.slack.bob_m,
        verdict.slack.eve_m,
        verdict.slack.bob_k,
        verdict.slack.eve_k,
        verdict.slack.throughput,
    ]);
    table.write(out)?;
    Ok(EXIT_OK)
}

fn solve_row(spec: &ScenarioSpec, result: &SolveResult) -> Vec<String> {
    let p = &result.profile;
    let count = |layer: Layer| result.trace.records.iter().filter(|r| r.layer == layer).count() as u64;
    row![
        spec.z_bob_db,
        spec.z_eve_db,
        spec.power_mw,
        spec.noise_mw,
        spec.d_m,
        spec.d_k,
        spec.throughput_min,
        spec.n_min,
        spec.n_max,
        result.n_m_opt,
        result.n_k_opt,
        p.eps_bob_m,
        p.eps_bob_k,
        p.eps_eve_m,
        p.eps_eve_k,
        p.eps_lf,
        p.r_d,
        p.throughput,
        result.feasible,
        count(Layer::Mm),
        count(Layer::Bcd),
        count(Layer::Fp),
    ]
}

const SOLVE_COLUMNS: [&str; 22] = [
    "z_bob_db", "z_eve_db", "power_mw", "noise_mw", "d_m", "d_k", "throughput_min", "n_min",
    "n_max", "n_m_opt", "n_k_opt", "eps_bob_m", "eps_bob_k", "eps_eve_m", "eps_eve_k", "eps_lf",
    "r_d", "throughput", "feasible", "mm_iterations", "bcd_iterations", "fp_iterations",
];

fn derived_trace_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}_trace.csv"))
}

fn write_trace(
    spec: &ScenarioSpec,
    result: &SolveResult,
    path: &Path,
) -> Result<(), CliError> {
    let mut table = ResultTable::new(
        "solve-trace",
        &spec.config_hash(),
        vec!["layer", "index", "n_m", "n_k", "y", "surrogate_rd", "true_rd"],
    );
    for r in &result.trace.records {
        let layer = match r.layer {
            Layer::Mm => "mm",
            Layer::Bcd => "bcd",
            Layer::Fp => "fp",
        };
        let y = r.y.map(|v| v.to_string()).unwrap_or_default();
        table.push_row(row![layer, r.index, r.n_m, r.n_k, y, r.surrogate, r.true_rd]);
    }
    table.write(Some(path))
}

pub fn cmd_solve(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    if spec.d_m < 1 || spec.d_k < 1 {
        return Err(CliError::Usage("solve requires payload.d_m and payload.d_k >= 1".into()));
    }
    let link = spec.link()?;
    let th = spec.thresholds()?;
    let result = solve(&link, spec.d_m, spec.d_k, &th, &spec.solver_config())?;
    let mut table = ResultTable::new("solve", &spec.config_hash(), SOLVE_COLUMNS.to_vec());
    table.push_row(solve_row(spec, &result));
    table.write(out)?;
    let trace_path = spec
        .trace_path
        .clone()
        .or_else(|| out.map(derived_trace_path));
    if let Some(path) = trace_path {
        write_trace(spec, &result, &path)?;
    }
    Ok(if result.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

pub fn cmd_oracle(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    if spec.d_m < 1 || spec.d_k < 1 {
        return Err(CliError::Usage("oracle requires payload.d_m and payload.d_k >= 1".into()));
    }
    let link = spec.link()?;
    let th = spec.thresholds()?;
    let box_range = (spec.n_min.ceil() as u32, spec.n_max.floor() as u32);
    let oracle = grid_oracle(&link, spec.d_m, spec.d_k, &th, box_range)?;
    let mut table = ResultTable::new(
        "oracle",
        &spec.config_hash(),
        vec![
            "n_m", "n_k", "eps_bob_m", "eps_bob_k", "eps_eve_m", "eps_eve_k", "eps_lf", "r_d",
            "throughput", "feasible",
        ],
    );
    for pt in &oracle.surface {
        let p = &pt.profile;
        table.push_row(row![
            pt.n_m,
            pt.n_k,
            p.eps_bob_m,
            p.eps_bob_k,
            p.eps_eve_m,
            p.eps_eve_k,
            p.eps_lf,
            p.r_d,
            p.throughput,
            pt.feasible,
        ]);
    }
    table.write(out)?;
    Ok(EXIT_OK)
}

pub fn cmd_sweep(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    let Some(axis) = spec.sweep else {
        return Err(CliError::Usage("sweep requires a sweep.axis definition".into()));
    };
    if spec.d_k < 1 {
        return Err(CliError::Usage("sweep requires payload.d_k >= 1".into()));
    }
    let mut table = ResultTable::new(
        "sweep",
        &spec.config_hash(),
        vec![
            "z_bob_db", "z_eve_db", "power_mw", "noise_mw", "d_m", "d_k", "throughput_min",
            "pld_n_m", "pld_n_k", "pld_r_d", "pld_eps_lf", "pld_throughput", "pld_feasible",
            "baseline_n_m", "baseline_r_d", "baseline_eps_lf", "baseline_throughput",
            "baseline_feasible",
        ],
    );
    let secondary = spec.sweep2.map(|a| a.values()).unwrap_or_else(|| vec![f64::NAN]);
    for v1 in axis.values() {
        for &v2 in &secondary {
            let mut point = spec.clone();
            point.apply_axis(axis.param, v1);
            if let Some(axis2) = spec.sweep2 {
                point.apply_axis(axis2.param, v2);
            }
            if point.d_m < 1 {
                return Err(CliError::Usage("swept payload.d_m must stay >= 1".into()));
            }
            let link = point.link()?;
            let th = point.thresholds()?;
            let pld = solve(&link, point.d_m, point.d_k, &th, &point.solver_config())?;
            let base = baseline_pls(&link, point.d_m, &th, &point.solver_config())?;
            table.push_row(row![
                point.z_bob_db,
                point.z_eve_db,
                point.power_mw,
                point.noise_mw,
                point.d_m,
                point.d_k,
                point.throughput_min,
                pld.n_m_opt,
                pld.n_k_opt,
                pld.profile.r_d,
                pld.profile.eps_lf,
                pld.profile.throughput,
                pld.feasible,
                base.n_m_opt,
                base.profile.r_d,
                base.profile.eps_lf,
                base.profile.throughput,
                base.feasible,
            ]);
        }
    }
    table.write(out)?;
    Ok(EXIT_OK)
}

fn binomial_half_width(p: f64, trials: u64) -> f64 {
    let n = trials.max(1) as f64;
    let var = p * (1.0 - p);
    let var = if var > 0.0 { var } else { 0.25 };
    3.0 * (var / n).sqrt()
}

pub fn cmd_simulate(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    let link = spec.link()?;
    let alloc = point_allocation(spec)?;
    let profile: ErasureProfile = evaluate(&link, &alloc)?;
    let counts = simulate_outcomes(&profile, spec.trials, spec.seed);
    let emp = empirical_metrics(&counts);
    let rd_hw = binomial_half_width(profile.r_d, spec.trials);
    let lf_hw = binomial_half_width(profile.eps_lf, spec.trials);
    let rd_agree = (profile.r_d - emp.r_d_hat).abs() <= rd_hw;
    let lf_agree = (profile.eps_lf - emp.eps_lf_hat).abs() <= lf_hw;
    let mut table = ResultTable::new(
        "simulate",
        &spec.config_hash(),
        vec![
            "z_bob_db", "z_eve_db", "power_mw", "noise_mw", "d_m", "d_k", "n_m", "n_k", "trials",
            "seed", "analytic_r_d", "empirical_r_d", "r_d_half_width", "r_d_agree",
            "analytic_eps_lf", "empirical_eps_lf", "eps_lf_half_width", "eps_lf_agree",
            "bob_perception", "bob_loss", "bob_deception", "eve_perception", "eve_loss",
            "eve_deception", "leakage_failures", "effective_deceptions",
        ],
    );
    table.push_row(row![
        spec.z_bob_db,
        spec.z_eve_db,
        spec.power_mw,
        spec.noise_mw,
        spec.d_m,
        spec.d_k,
        alloc.n_m,
        alloc.n_k,
        spec.trials,
        spec.seed,
        profile.r_d,
        emp.r_d_hat,
        rd_hw,
        rd_agree,
        profile.eps_lf,
        emp.eps_lf_hat,
        lf_hw,
        lf_agree,
        counts.bob.perception,
        counts.bob.loss,
        counts.bob.deception,
        counts.eve.perception,
        counts.eve.loss,
        counts.eve.deception,
        counts.leakage_failures,
        counts.effective_deceptions,
    ]);
    table.write(out)?;
    Ok(EXIT_OK)
}

pub fn cmd_validate_codebook(spec: &ScenarioSpec, out: Option<&Path>) -> Result<u8, CliError> {
    let book = ToyCodebook::xor(spec.codebook_width).map_err(|e| CliError::Usage(e.to_string()))?;
    let verdict = validate_codebook(&book);
    let mode = match verdict.mode {
        ValidationMode::AlgebraicXor => "algebraic-xor".to_string(),
        ValidationMode::Exhaustive => "exhaustive".to_string(),
        ValidationMode::Sampled { triples } => format!("sampled-{triples}"),
    };
    let witness = verdict.witness.map(|w| format!("{w:?}")).unwrap_or_default();

    let mut table = ResultTable::new(
        "validate-codebook",
        &spec.config_hash(),
        vec!["check", "valid", "mode", "witness", "detail"],
    );
    table.push_row(row![
        "cipher",
        verdict.valid,
        mode,
        witness,
        format!("width={}", spec.codebook_width),
    ]);

    let code = RepetitionCode::new(spec.litter_key_width, spec.litter_repetitions)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let d_max = spec.litter_d_max.unwrap_or_else(|| code.correction_radius(1));
    let keys: Vec<u32> = (0..(1u32 << spec.litter_key_width)).collect();
    match generate_litter(&keys, &code, d_max, spec.litter_count, spec.seed) {
        Ok(set) => {
            let violation = set.first_violation();
            table.push_row(row![
                "litter",
                violation.is_none(),
                "rejection-sampling",
                violation
                    .map(|(k, l)| format!("key_codeword={k:#b} litter={l:#b}"))
                    .unwrap_or_default(),
                format!(
                    "len={},d_max={},count={}",
                    set.codeword_len,
                    set.d_max,
                    set.words.len()
                ),
            ]);
        }
        Err(e) => {
            table.push_row(row![
                "litter",
                false,
                "rejection-sampling",
                "",
                e.to_string(),
            ]);
        }
    }
    table.write(out)?;
    Ok(EXIT_OK)
}
