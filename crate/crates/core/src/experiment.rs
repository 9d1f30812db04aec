//! Experiment configuration and the sweep and distance drivers behind the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes::{build_bb_code, build_rotated_surface, BBSpec, CssCode};
use crate::decoders::{logical_error_rate, BpOsdDecoder, DecoderConfig, LogicalErrorRate, ShotSource};
use crate::dem::compile_dem;
use crate::distance::{estimate_circuit_distance, DistanceConfig};
use crate::error::{Error, ParseError, Result};
use crate::noise::{NoiseKind, NoiseModel};
use crate::schedules::{Schedule, ScheduleKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Code selector: `surface:5`, a named instance such as `bb72`, `bb:6,6,3,-1,-1,3`
/// or `toric:3,3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CodeSpec {
    Surface(usize),
    Named(String),
    Bb { ell: usize, m: usize, a: i64, b: i64, c: i64, d: i64 },
    Toric { ell: usize, m: usize },
}

impl CodeSpec {
    pub fn is_surface(&self) -> bool {
        matches!(self, CodeSpec::Surface(_))
    }

    pub fn bb_spec(&self) -> Result<Option<BBSpec>> {
        Ok(match *self {
            CodeSpec::Surface(_) => None,
            CodeSpec::Named(ref name) => {
                Some(BBSpec::named(name).ok_or_else(|| Error::Config(format!("unknown code {name:?}")))?)
            }
            CodeSpec::Bb { ell, m, a, b, c, d } => Some(BBSpec::new(ell, m, a, b, c, d)?),
            CodeSpec::Toric { ell, m } => Some(BBSpec::toric(ell, m)?),
        })
    }

    pub fn build(&self) -> Result<CssCode> {
        match self {
            CodeSpec::Surface(d) => Ok(build_rotated_surface(*d)?),
            _ => Ok(build_bb_code(&self.bb_spec()?.expect("non-surface codes have a spec"))?),
        }
    }

    pub fn schedule(&self, scheme: ScheduleKind) -> Result<Schedule> {
        match self {
            CodeSpec::Surface(d) => Schedule::surface(scheme, *d),
            _ => Schedule::bb(scheme, &self.bb_spec()?.expect("non-surface codes have a spec")),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Surface(d) => write!(f, "surface:{d}"),
            CodeSpec::Named(name) => f.write_str(name),
            CodeSpec::Bb { ell, m, a, b, c, d } => write!(f, "bb:{ell},{m},{a},{b},{c},{d}"),
            CodeSpec::Toric { ell, m } => write!(f, "toric:{ell},{m}"),
        }
    }
}

fn numbers<T: FromStr>(s: &str, count: usize) -> Result<Vec<T>, ParseError> {
    let v: Vec<T> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| ParseError::new(format!("bad number {t:?} in code spec"))))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(ParseError::new(format!("expected {count} numbers, got {}", v.len())));
    }
    Ok(v)
}

impl FromStr for CodeSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let s = s.trim();
        match s.split_once(':') {
            Some(("surface", d)) => Ok(CodeSpec::Surface(numbers(d, 1)?[0])),
            Some(("bb", rest)) => {
                let v: Vec<i64> = numbers(rest, 6)?;
                if v[0] < 1 || v[1] < 1 {
                    return Err(ParseError::new("torus dimensions must be positive"));
                }
                Ok(CodeSpec::Bb { ell: v[0] as usize, m: v[1] as usize, a: v[2], b: v[3], c: v[4], d: v[5] })
            }
            Some(("toric", rest)) => {
                let v: Vec<usize> = numbers(rest, 2)?;
                Ok(CodeSpec::Toric { ell: v[0], m: v[1] })
            }
            None if BBSpec::named(s).is_some() => Ok(CodeSpec::Named(s.to_string())),
            _ => Err(ParseError::new(format!("unknown code spec {s:?}"))),
        }
    }
}

impl TryFrom<String> for CodeSpec {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Self, ParseError> {
        s.parse()
    }
}

impl From<CodeSpec> for String {
    fn from(c: CodeSpec) -> String {
        c.to_string()
    }
}

/// Everything a sweep or distance run needs. Parsed from TOML; command-line flags
/// override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub codes: Vec<CodeSpec>,
    pub schemes: Vec<ScheduleKind>,
    pub noise: NoiseKind,
    pub p: Vec<f64>,
    pub rounds: usize,
    pub shots: usize,
    pub flag_detectors: bool,
    pub seed: u64,
    pub decoder: DecoderConfig,
    pub distance: DistanceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            codes: vec![CodeSpec::Surface(3)],
            schemes: vec![ScheduleKind::SurfaceConventional, ScheduleKind::SurfaceRouted],
            noise: NoiseKind::Si1000,
            p: vec![1e-3],
            rounds: 3,
            shots: 10_000,
            flag_detectors: false,
            seed: 0,
            decoder: DecoderConfig::default(),
            distance: DistanceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ParseError::new(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without building circuits.
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        for &p in &self.p {
            NoiseModel::new(self.noise, p)?;
        }
        self.decoder.bp.validate()?;
        for code in &self.codes {
            for &scheme in &self.schemes {
                if code.is_surface() != scheme.is_surface() {
                    return Err(Error::Config(format!("scheme {} does not apply to code {code}", scheme.name())));
                }
            }
        }
        Ok(())
    }

    /// Single-line JSON echo of the effective configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Comment lines identifying the tool version and the effective configuration.
    pub fn header(&self) -> String {
        format!("# qroute {VERSION}\n# config {}\n", self.to_json())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub code: String,
    pub scheme: String,
    pub p: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub result: LogicalErrorRate,
}

pub const CSV_COLUMNS: &str = "code,scheme,p,rounds,shots,failures,rate,rate_per_round,stderr,seed";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let r = &self.result;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.code, self.scheme, self.p, r.rounds, r.shots, r.failures, r.rate, r.rate_per_round, r.stderr, self.seed
        )
    }
}

/// Runs every (code, scheme, p) point of the grid in order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for code in &cfg.codes {
        for &scheme in &cfg.schemes {
            let sched = code.schedule(scheme)?;
            for &p in &cfg.p {
                let noise = NoiseModel::new(cfg.noise, p)?;
                let circuit = sched.generate(cfg.rounds, Some(&noise), cfg.flag_detectors)?;
                let dem = compile_dem(&circuit)?;
                let decoder = BpOsdDecoder::new(&dem, cfg.decoder)?;
                let result = logical_error_rate(ShotSource::Circuit(&circuit), &decoder, cfg.shots, cfg.rounds, cfg.seed);
                rows.push(SweepRow { code: code.to_string(), scheme: scheme.name().into(), p, seed: cfg.seed, result });
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let mut s = cfg.header();
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for row in rows {
        s.push_str(&row.csv_line());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceRow {
    pub code: String,
    pub scheme: String,
    pub upper_bound: usize,
    pub witness_size: usize,
    pub samples: usize,
    pub seed: u64,
    pub rounds: usize,
    pub witness: Vec<usize>,
}

/// Estimates the circuit distance of every (code, scheme) pair at the first noise
/// strength of the grid.
pub fn run_distance(cfg: &ExperimentConfig) -> Result<Vec<DistanceRow>> {
    cfg.validate()?;
    let p = *cfg.p.first().ok_or_else(|| Error::Config("need at least one noise strength".into()))?;
    let noise = NoiseModel::new(cfg.noise, p)?;
    let mut rows = Vec::new();
    for code in &cfg.codes {
        for &scheme in &cfg.schemes {
            let circuit = code.schedule(scheme)?.generate(cfg.rounds, Some(&noise), cfg.flag_detectors)?;
            let dem = compile_dem(&circuit)?;
            let est = estimate_circuit_distance(&dem, &cfg.distance, cfg.seed)?;
            rows.push(DistanceRow {
                code: code.to_string(),
                scheme: scheme.name().into(),
                upper_bound: est.upper_bound,
                witness_size: est.witness.len(),
                samples: est.samples_used,
                seed: cfg.seed,
                rounds: cfg.rounds,
                witness: est.witness,
            });
        }
    }
    Ok(rows)
}

/// JSON document with version, effective config and one entry per row.
pub fn distance_json(cfg: &ExperimentConfig, rows: &[DistanceRow]) -> String {
    let doc = serde_json::json!({ "version": VERSION, "config": cfg, "results": rows });
    serde_json::to_string_pretty(&doc).expect("rows serialize") + "\n"
}
