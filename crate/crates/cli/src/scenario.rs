//! Scenario specification: a flat key-value file with dotted keys, plus
//! command-line overrides. Every key has a default, so an empty spec is a
//! complete scenario.

use std::fmt::Write as _;
use std::path::PathBuf;

use pld_core::{InitStrategy, LinkConfig, SolverConfig, Thresholds};

use crate::CliError;

/// A swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    ZEveDb,
    PowerMw,
    DM,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::ZEveDb => "z_eve_db",
            AxisParam::PowerMw => "power_mw",
            AxisParam::DM => "d_m",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "z_eve_db" => Some(AxisParam::ZEveDb),
            "power_mw" => Some(AxisParam::PowerMw),
            "d_m" => Some(AxisParam::DM),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: AxisParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// The resolved scenario: link, payload, point allocation, thresholds,
/// solver configuration, sweep axes, simulation and codebook parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub z_bob_db: f64,
    pub z_eve_db: f64,
    pub power_mw: f64,
    pub noise_mw: f64,
    pub d_m: u32,
    pub d_k: u32,
    pub n_m: f64,
    pub n_k: f64,
    pub eps_bob_m_max: f64,
    pub eps_eve_m_max: f64,
    pub eps_bob_k_max: f64,
    pub eps_eve_k_min: f64,
    pub throughput_min: f64,
    pub tol_mm: f64,
    pub tol_bcd: f64,
    pub tol_fp: f64,
    pub max_mm: u32,
    pub max_bcd: u32,
    pub max_fp: u32,
    pub n_min: f64,
    pub n_max: f64,
    pub init: InitStrategy,
    pub sweep: Option<SweepAxis>,
    pub sweep2: Option<SweepAxis>,
    pub trials: u64,
    pub seed: u64,
    pub codebook_width: u8,
    pub litter_key_width: u8,
    pub litter_repetitions: u8,
    pub litter_d_max: Option<u32>,
    pub litter_count: usize,
    pub trace_path: Option<PathBuf>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            z_bob_db: 0.0,
            z_eve_db: -10.0,
            power_mw: 5.0,
            noise_mw: 1.0,
            d_m: 16,
            d_k: 16,
            n_m: 64.0,
            n_k: 64.0,
            eps_bob_m_max: 0.5,
            eps_eve_m_max: 0.5,
            eps_bob_k_max: 0.5,
            eps_eve_k_min: 0.5,
            throughput_min: 0.1,
            tol_mm: 2e-16,
            tol_bcd: 2e-16,
            tol_fp: 2e-16,
            max_mm: 100,
            max_bcd: 100,
            max_fp: 100,
            n_min: 16.0,
            n_max: 128.0,
            init: InitStrategy::CoarseGrid,
            sweep: None,
            sweep2: None,
            trials: 1_000_000,
            seed: 1,
            codebook_width: 16,
            litter_key_width: 2,
            litter_repetitions: 3,
            litter_d_max: None,
            litter_count: 4,
            trace_path: None,
        }
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| usage(format!("invalid value for {key}: {value:?}")))
}

// Sweep axis fields arrive in any order; they are collected raw and
// assembled after the whole spec is read.
#[derive(Debug, Default, Clone)]
struct RawAxis {
    param: Option<AxisParam>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

impl RawAxis {
    fn build(&self, which: &str) -> Result<Option<SweepAxis>, CliError> {
        match (self.param, self.start, self.stop, self.step) {
            (None, None, None, None) => Ok(None),
            (Some(param), Some(start), Some(stop), Some(step)) => {
                if !step.is_finite() || step <= 0.0 {
                    return Err(usage(format!("{which}.step must be > 0, got {step}")));
                }
                if stop < start {
                    return Err(usage(format!("{which}.stop must be >= {which}.start")));
                }
                Ok(Some(SweepAxis { param, start, stop, step }))
            }
            _ => Err(usage(format!(
                "incomplete {which} definition: axis, start, stop and step are all required"
            ))),
        }
    }
}

#[derive(Debug, Default)]
pub struct SpecBuilder {
    spec: ScenarioSpec,
    axis1: RawAxis,
    axis2: RawAxis,
}

impl SpecBuilder {
    pub fn new() -> Self {
        SpecBuilder::default()
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(usage(format!("missing value for {key}")));
        }
        let s = &mut self.spec;
        match key {
            "link.z_bob_db" => s.z_bob_db = parse_num(key, value)?,
            "link.z_eve_db" => s.z_eve_db = parse_num(key, value)?,
            "link.power_mw" => s.power_mw = parse_num(key, value)?,
            "link.noise_mw" => s.noise_mw = parse_num(key, value)?,
            "payload.d_m" => s.d_m = parse_num(key, value)?,
            "payload.d_k" => s.d_k = parse_num(key, value)?,
            "alloc.n_m" => s.n_m = parse_num(key, value)?,
            "alloc.n_k" => s.n_k = parse_num(key, value)?,
            "thresholds.eps_bob_m_max" => s.eps_bob_m_max = parse_num(key, value)?,
            "thresholds.eps_eve_m_max" => s.eps_eve_m_max = parse_num(key, value)?,
            "thresholds.eps_bob_k_max" => s.eps_bob_k_max = parse_num(key, value)?,
            "thresholds.eps_eve_k_min" => s.eps_eve_k_min = parse_num(key, value)?,
            "thresholds.throughput_min" => s.throughput_min = parse_num(key, value)?,
            "solver.tol_mm" => s.tol_mm = parse_num(key, value)?,
            "solver.tol_bcd" => s.tol_bcd = parse_num(key, value)?,
            "solver.tol_fp" => s.tol_fp = parse_num(key, value)?,
            "solver.max_mm" => s.max_mm = parse_num(key, value)?,
            "solver.max_bcd" => s.max_bcd = parse_num(key, value)?,
            "solver.max_fp" => s.max_fp = parse_num(key, value)?,
            "solver.n_min" => s.n_min = parse_num(key, value)?,
            "solver.n_max" => s.n_max = parse_num(key, value)?,
            "solver.init" => {
                s.init = match value {
                    "box_midpoint" => InitStrategy::BoxMidpoint,
                    "coarse_grid" => InitStrategy::CoarseGrid,
                    other => {
                        return Err(usage(format!("invalid value for solver.init: {other:?}")))
                    }
                }
            }
            "sweep.axis" => {
                self.axis1.param = Some(
                    AxisParam::parse(value)
                        .ok_or_else(|| usage(format!("unknown sweep axis {value:?}")))?,
                )
            }
            "sweep.start" => self.axis1.start = Some(parse_num(key, value)?),
            "sweep.stop" => self.axis1.stop = Some(parse_num(key, value)?),
            "sweep.step" => self.axis1.step = Some(parse_num(key, value)?),
            "sweep.axis2" => {
                self.axis2.param = Some(
                    AxisParam::parse(value)
                        .ok_or_else(|| usage(format!("unknown sweep axis {value:?}")))?,
                )
            }
            "sweep.start2" => self.axis2.start = Some(parse_num(key, value)?),
            "sweep.stop2" => self.axis2.stop = Some(parse_num(key, value)?),
            "sweep.step2" => self.axis2.step = Some(parse_num(key, value)?),
            "sim.trials" => s.trials = parse_num(key, value)?,
            "sim.seed" => s.seed = parse_num(key, value)?,
            "codebook.width" => s.codebook_width = parse_num(key, value)?,
            "litter.key_width" => s.litter_key_width = parse_num(key, value)?,
            "litter.repetitions" => s.litter_repetitions = parse_num(key, value)?,
            "litter.d_max" => s.litter_d_max = Some(parse_num(key, value)?),
            "litter.count" => s.litter_count = parse_num(key, value)?,
            "output.trace" => s.trace_path = Some(PathBuf::from(value)),
            other => return Err(usage(format!("unknown spec key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a spec file body: `key = value` lines, `#` comments, blank
    /// lines ignored.
    pub fn parse_file(&mut self, body: &str) -> Result<(), CliError> {
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("line {}: expected key = value, got {line:?}", lineno + 1)));
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<ScenarioSpec, CliError> {
        let mut spec = self.spec;
        spec.sweep = self.axis1.build("sweep")?;
        spec.sweep2 = self.axis2.build("sweep.axis2")?;
        if spec.sweep.is_none() && spec.sweep2.is_some() {
            return Err(usage("sweep.axis2 given without a primary sweep.axis".into()));
        }
        Ok(spec)
    }
}

impl ScenarioSpec {
    pub fn link(&self) -> Result<LinkConfig, CliError> {
        LinkConfig::from_db(self.z_bob_db, self.z_eve_db, self.power_mw, self.noise_mw)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn thresholds(&self) -> Result<Thresholds, CliError> {
        Thresholds::new(
            self.eps_bob_m_max,
            self.eps_eve_m_max,
            self.eps_bob_k_max,
            self.eps_eve_k_min,
            self.throughput_min,
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol_mm: self.tol_mm,
            tol_bcd: self.tol_bcd,
            tol_fp: self.tol_fp,
            max_mm: self.max_mm,
            max_bcd: self.max_bcd,
            max_fp: self.max_fp,
            n_min: self.n_min,
            n_max: self.n_max,
            init_strategy: self.init,
        }
    }

    pub fn apply_axis(&mut self, param: AxisParam, value: f64) {
        match param {
            AxisParam::ZEveDb => self.z_eve_db = value,
            AxisParam::PowerMw => self.power_mw = value,
            AxisParam::DM => self.d_m = value.round() as u32,
        }
    }

    /// Canonical serialization of the resolved scenario; the config hash in
    /// table headers is the FNV-1a digest of this string.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("link.z_bob_db", self.z_bob_db.to_string());
        kv("link.z_eve_db", self.z_eve_db.to_string());
        kv("link.power_mw", self.power_mw.to_string());
        kv("link.noise_mw", self.noise_mw.to_string());
        kv("payload.d_m", self.d_m.to_string());
        kv("payload.d_k", self.d_k.to_string());
        kv("alloc.n_m", self.n_m.to_string());
        kv("alloc.n_k", self.n_k.to_string());
        kv("thresholds.eps_bob_m_max", self.eps_bob_m_max.to_string());
        kv("thresholds.eps_eve_m_max", self.eps_eve_m_max.to_string());
        kv("thresholds.eps_bob_k_max", self.eps_bob_k_max.to_string());
        kv("thresholds.eps_eve_k_min", self.eps_eve_k_min.to_string());
        kv("thresholds.throughput_min", self.throughput_min.to_string());
        kv("solver.tol_mm", self.tol_mm.to_string());
        kv("solver.tol_bcd", self.tol_bcd.to_string());
        kv("solver.tol_fp", self.tol_fp.to_string());
        kv("solver.max_mm", self.max_mm.to_string());
        kv("solver.max_bcd", self.max_bcd.to_string());
        kv("solver.max_fp", self.max_fp.to_string());
        kv("solver.n_min", self.n_min.to_string());
        kv("solver.n_max", self.n_max.to_string());
        kv(
            "solver.init",
            match self.init {
                InitStrategy::BoxMidpoint => "box_midpoint".into(),
                InitStrategy::CoarseGrid => "coarse_grid".into(),
            },
        );
        if let Some(axis) = &self.sweep {
            kv("sweep.axis", axis.param.name().into());
            kv("sweep.start", axis.start.to_string());
            kv("sweep.stop", axis.stop.to_string());
            kv("sweep.step", axis.step.to_string());
        }
        if let Some(axis) = &self.sweep2 {
            kv("sweep.axis2", axis.param.name().into());
            kv("sweep.start2", axis.start.to_string());
            kv("sweep.stop2", axis.stop.to_string());
            kv("sweep.step2", axis.step.to_string());
        }
        kv("sim.trials", self.trials.to_string());
        kv("sim.seed", self.seed.to_string());
        kv("codebook.width", self.codebook_width.to_string());
        kv("litter.key_width", self.litter_key_width.to_string());
        kv("litter.repetitions", self.litter_repetitions.to_string());
        if let Some(d) = self.litter_d_max {
            kv("litter.d_max", d.to_string());
        }
        kv("litter.count", self.litter_count.to_string());
        out
    }

    pub fn config_hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
