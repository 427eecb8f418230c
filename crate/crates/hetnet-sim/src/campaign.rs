//! Monte Carlo orchestration: deterministic drops, scenario execution,
//! result records, aggregation, and record-file I/O.
//!
//! Seed discipline: every drop derives its seed from the scenario's
//! master seed and the drop index alone, so scenarios sharing a master
//! seed see identical geometry and form paired comparisons. Stages
//! inside a drop (MBS process, UE process, destruction, optimizer) own
//! fixed substreams of the drop seed.

use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{IcicMode, NetworkEvaluator};
use crate::deployment::{destroy_mbs, place_hex_grid, sample_ppp, NetworkLayout, Region};
use crate::optimizer::{
    ga_optimize, grid_search_icic, FitnessEnv, GaSettings, IcicGrid,
};
use crate::radio::PowerModel;
use crate::seed::{mix, stream};
use crate::{Error, Result};

/// Substream tags within one drop.
const STREAM_MBS: u64 = 0;
const STREAM_UE: u64 = 1;
const STREAM_DESTROY: u64 = 2;
const STREAM_GA: u64 = 3;
const STREAM_FIXUP: u64 = 4;

/// How many times an empty UE drop is re-rolled before giving up.
const MAX_UE_ATTEMPTS: u64 = 16;

/// Physical context shared by every scenario of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub region: Region,
    pub mbs_per_km2: f64,
    pub ue_per_km2: f64,
    pub power: PowerModel,
    pub uabs_altitude: f64,
    pub beta: f64,
    pub mbs_height: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if !(self.mbs_per_km2 >= 0.0 && self.mbs_per_km2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "MBS density must be non-negative, got {}",
                self.mbs_per_km2
            )));
        }
        if !(self.ue_per_km2 > 0.0 && self.ue_per_km2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "UE density must be positive, got {}",
                self.ue_per_km2
            )));
        }
        if !(self.uabs_altitude > 0.0 && self.uabs_altitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "UABS altitude must be positive, got {}",
                self.uabs_altitude
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie strictly between 0 and 1, got {}",
                self.beta
            )));
        }
        if !(self.mbs_height >= 0.0 && self.mbs_height.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "MBS height must be non-negative, got {}",
                self.mbs_height
            )));
        }
        Ok(())
    }
}

impl Default for Environment {
    /// 10 x 10 km region, 4 MBS/km^2, 100 UE/km^2, default powers,
    /// 121.92 m UABS altitude, beta 0.5, planar MBS antennas.
    fn default() -> Self {
        Environment {
            region: Region::new(10_000.0, 10_000.0).unwrap(),
            mbs_per_km2: 4.0,
            ue_per_km2: 100.0,
            power: PowerModel::default(),
            uabs_altitude: 121.92,
            beta: 0.5,
            mbs_height: 0.0,
        }
    }
}

/// UABS placement strategy with its strategy-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Deployment {
    /// Fixed hexagonal placement, exhaustive parameter grid.
    Hex(IcicGrid),
    /// Genetic optimization of positions and parameters jointly.
    Ga(GaSettings),
}

impl Deployment {
    pub fn kind(&self) -> DeploymentKind {
        match self {
            Deployment::Hex(_) => DeploymentKind::Hex,
            Deployment::Ga(_) => DeploymentKind::Ga,
        }
    }
}

/// Deployment label carried by output records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeploymentKind {
    Hex,
    Ga,
}

impl DeploymentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeploymentKind::Hex => "hex",
            DeploymentKind::Ga => "ga",
        }
    }
}

impl std::fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DeploymentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hex" => Ok(DeploymentKind::Hex),
            "ga" => Ok(DeploymentKind::Ga),
            other => Err(Error::InvalidParameter(format!(
                "unknown deployment {other:?}, expected hex or ga"
            ))),
        }
    }
}

/// One simulation scenario: a coordination flavor, a UABS budget, a
/// destruction level, and a placement strategy, repeated over drops.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub mode: IcicMode,
    pub n_uabs: usize,
    pub destroyed_fraction: f64,
    pub drops: u32,
    pub master_seed: u64,
    pub deployment: Deployment,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty()
            || !self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::InvalidParameter(format!(
                "scenario id {:?} must be non-empty and use only ASCII letters, digits, '-', '_'",
                self.id
            )));
        }
        if self.n_uabs == 0 {
            return Err(Error::InvalidParameter(format!(
                "scenario {}: at least one UABS is required",
                self.id
            )));
        }
        if !(0.0..=1.0).contains(&self.destroyed_fraction) {
            return Err(Error::InvalidParameter(format!(
                "scenario {}: destroyed fraction must lie in [0, 1], got {}",
                self.id, self.destroyed_fraction
            )));
        }
        if self.drops == 0 {
            return Err(Error::InvalidParameter(format!(
                "scenario {}: at least one drop is required",
                self.id
            )));
        }
        match &self.deployment {
            Deployment::Hex(grid) => {
                if grid.is_empty() {
                    return Err(Error::InvalidParameter(format!(
                        "scenario {}: empty parameter grid",
                        self.id
                    )));
                }
                // Re-validate axes against the mode.
                IcicGrid::with_values(
                    self.mode,
                    grid.tau_db.clone(),
                    grid.alpha.clone(),
                    grid.rho_db.clone(),
                    grid.rho_prime_db.clone(),
                )?;
            }
            Deployment::Ga(settings) => settings.validate()?,
        }
        Ok(())
    }
}

/// One output row: a parameter point of one drop of one scenario.
/// Field order matches the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario_id: String,
    pub drop: u32,
    pub mode: IcicMode,
    pub deployment: DeploymentKind,
    pub n_uabs: u32,
    pub destroyed_fraction: f64,
    pub tau_db: f64,
    pub alpha: f64,
    pub rho_db: f64,
    pub rho_prime_db: f64,
    pub se_5pct_bps_hz: f64,
    pub n_usf_mue: u32,
    pub n_csf_mue: u32,
    pub n_usf_uue: u32,
    pub n_csf_uue: u32,
    pub wall_ms: f64,
}

/// CSV header, pinned to the `ResultRecord` field order.
pub const RECORD_HEADER: [&str; 16] = [
    "scenario_id",
    "drop",
    "mode",
    "deployment",
    "n_uabs",
    "destroyed_fraction",
    "tau_db",
    "alpha",
    "rho_db",
    "rho_prime_db",
    "se_5pct_bps_hz",
    "n_usf_mue",
    "n_csf_mue",
    "n_usf_uue",
    "n_csf_uue",
    "wall_ms",
];

/// Best fitness per generation of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub scenario_id: String,
    pub drop: u32,
    pub generation: u32,
    pub best_se_5pct_bps_hz: f64,
}

/// Records and optimizer traces produced by one drop or one scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioOutput {
    pub records: Vec<ResultRecord>,
    pub trace: Vec<TraceRow>,
}

/// Builds the network geometry of one drop: Poisson MBS and UE
/// processes, destruction, and (for hex deployments) UABS placement.
/// GA scenarios get an empty UABS list; the optimizer places them.
pub fn drop_layout(env: &Environment, scenario: &Scenario, drop: u32) -> Result<NetworkLayout> {
    let drop_seed = mix(scenario.master_seed, &[drop as u64]);

    let mbs = sample_ppp(env.mbs_per_km2, env.region, &mut stream(drop_seed, &[STREAM_MBS]));

    let mut ue = Vec::new();
    for attempt in 0..MAX_UE_ATTEMPTS {
        ue = sample_ppp(
            env.ue_per_km2,
            env.region,
            &mut stream(drop_seed, &[STREAM_UE, attempt]),
        );
        if !ue.is_empty() {
            break;
        }
        eprintln!(
            "warning: scenario {} drop {drop}: empty UE drop, re-drawing (attempt {})",
            scenario.id,
            attempt + 1
        );
    }
    if ue.is_empty() {
        return Err(Error::InvalidLayout(format!(
            "scenario {} drop {drop}: UE process stayed empty after {MAX_UE_ATTEMPTS} draws",
            scenario.id
        )));
    }

    let uabs = match &scenario.deployment {
        Deployment::Hex(_) => place_hex_grid(scenario.n_uabs, env.region, env.uabs_altitude)?,
        Deployment::Ga(_) => Vec::new(),
    };

    let layout = NetworkLayout::new(env.region, mbs, uabs, ue)?
        .with_mbs_height(env.mbs_height)?;
    let mut layout = destroy_mbs(
        &layout,
        scenario.destroyed_fraction,
        &mut stream(drop_seed, &[STREAM_DESTROY]),
    );

    // With planar MBS antennas a UE can coincide with a surviving MBS,
    // which would make path loss undefined; re-draw such UEs.
    if layout.mbs_height == 0.0 {
        let mut fixup = stream(drop_seed, &[STREAM_FIXUP]);
        let mbs = layout.mbs.clone();
        for ue in &mut layout.ue {
            while mbs.iter().any(|m| m.x == ue.x && m.y == ue.y) {
                eprintln!(
                    "warning: scenario {} drop {drop}: UE collocated with an MBS, re-drawing",
                    scenario.id
                );
                ue.x = fixup.random_range(0.0..=env.region.width);
                ue.y = fixup.random_range(0.0..=env.region.height);
            }
        }
    }
    Ok(layout)
}

/// Runs one drop end to end and emits its records and traces.
pub fn run_drop(env: &Environment, scenario: &Scenario, drop: u32) -> Result<ScenarioOutput> {
    let layout = drop_layout(env, scenario, drop)?;
    let record = |tau_db: f64,
                  alpha: f64,
                  rho_db: f64,
                  rho_prime_db: f64,
                  se: f64,
                  totals: crate::association::ClassTotals,
                  wall_ms: f64| ResultRecord {
        scenario_id: scenario.id.clone(),
        drop,
        mode: scenario.mode,
        deployment: scenario.deployment.kind(),
        n_uabs: scenario.n_uabs as u32,
        destroyed_fraction: scenario.destroyed_fraction,
        tau_db,
        alpha,
        rho_db,
        rho_prime_db,
        se_5pct_bps_hz: se,
        n_usf_mue: totals.usf_mue,
        n_csf_mue: totals.csf_mue,
        n_usf_uue: totals.usf_uue,
        n_csf_uue: totals.csf_uue,
        wall_ms,
    };

    match &scenario.deployment {
        Deployment::Hex(grid) => {
            let evaluator = NetworkEvaluator::new(&layout, &env.power)?;
            let outcome = grid_search_icic(&evaluator, grid, scenario.mode, env.beta)?;
            let records = outcome
                .points
                .into_iter()
                .map(|p| {
                    record(
                        p.tau_db,
                        p.alpha,
                        p.rho_db,
                        p.rho_prime_db,
                        p.se_5pct,
                        p.totals,
                        p.wall_ms,
                    )
                })
                .collect();
            Ok(ScenarioOutput {
                records,
                trace: Vec::new(),
            })
        }
        Deployment::Ga(settings) => {
            let started = Instant::now();
            let fitness_env = FitnessEnv::new(
                &layout,
                scenario.n_uabs,
                env.uabs_altitude,
                &env.power,
                scenario.mode,
                env.beta,
            )?;
            let drop_seed = mix(scenario.master_seed, &[drop as u64]);
            let ga_seed = mix(drop_seed, &[STREAM_GA]);
            let outcome = ga_optimize(&fitness_env, settings, &[], ga_seed)?;
            let final_eval = fitness_env.evaluate(&outcome.best)?;
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;

            let tail = &outcome.best.genes[2 * scenario.n_uabs..];
            let records = vec![record(
                tail[0],
                tail[1],
                tail[2],
                tail[3],
                outcome.best_fitness,
                final_eval.counts.totals(),
                wall_ms,
            )];
            let trace = outcome
                .trace
                .iter()
                .enumerate()
                .map(|(generation, &best)| TraceRow {
                    scenario_id: scenario.id.clone(),
                    drop,
                    generation: generation as u32,
                    best_se_5pct_bps_hz: best,
                })
                .collect();
            Ok(ScenarioOutput { records, trace })
        }
    }
}

/// Runs every drop of a scenario (in parallel) and concatenates the
/// outputs in drop order.
pub fn run_scenario(env: &Environment, scenario: &Scenario) -> Result<ScenarioOutput> {
    env.validate()?;
    scenario.validate()?;
    let per_drop: Vec<ScenarioOutput> = (0..scenario.drops)
        .into_par_iter()
        .map(|d| run_drop(env, scenario, d))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ScenarioOutput::default();
    for mut d in per_drop {
        out.records.append(&mut d.records);
        out.trace.append(&mut d.trace);
    }
    Ok(out)
}

/// Distribution statistics of one parameter point across drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub mode: IcicMode,
    pub deployment: DeploymentKind,
    pub n_uabs: u32,
    pub destroyed_fraction: f64,
    pub tau_db: f64,
    pub alpha: f64,
    pub rho_db: f64,
    pub rho_prime_db: f64,
    pub drops: u32,
    pub se_median_bps_hz: f64,
    pub se_mean_bps_hz: f64,
    pub se_p5_bps_hz: f64,
    pub se_p95_bps_hz: f64,
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "scenario_id",
    "mode",
    "deployment",
    "n_uabs",
    "destroyed_fraction",
    "tau_db",
    "alpha",
    "rho_db",
    "rho_prime_db",
    "drops",
    "se_median_bps_hz",
    "se_mean_bps_hz",
    "se_p5_bps_hz",
    "se_p95_bps_hz",
];

/// Grouping key order: scenario, mode, deployment, UABS count,
/// destruction level, then the four parameters.
fn cmp_group(a: &ResultRecord, b: &ResultRecord) -> std::cmp::Ordering {
    a.scenario_id
        .cmp(&b.scenario_id)
        .then_with(|| a.mode.as_str().cmp(b.mode.as_str()))
        .then_with(|| a.deployment.as_str().cmp(b.deployment.as_str()))
        .then_with(|| a.n_uabs.cmp(&b.n_uabs))
        .then_with(|| a.destroyed_fraction.total_cmp(&b.destroyed_fraction))
        .then_with(|| a.tau_db.total_cmp(&b.tau_db))
        .then_with(|| a.alpha.total_cmp(&b.alpha))
        .then_with(|| a.rho_db.total_cmp(&b.rho_db))
        .then_with(|| a.rho_prime_db.total_cmp(&b.rho_prime_db))
}

fn sorted_stat(sorted: &[f64], numer: usize, denom: usize) -> f64 {
    let rank = (sorted.len() * numer).div_ceil(denom).max(1);
    sorted[rank - 1]
}

/// Collapses records over drops into one row per parameter point.
/// Input order does not matter; output rows follow the grouping key.
pub fn aggregate(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&ResultRecord> = records.iter().collect();
    sorted.sort_by(|a, b| cmp_group(a, b).then_with(|| a.drop.cmp(&b.drop)));

    let mut rows = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && cmp_group(sorted[i], sorted[j]).is_eq() {
            j += 1;
        }
        let group = &sorted[i..j];
        let mut se: Vec<f64> = group.iter().map(|r| r.se_5pct_bps_hz).collect();
        se.sort_by(f64::total_cmp);
        let n = se.len();
        let median = if n % 2 == 1 {
            se[n / 2]
        } else {
            (se[n / 2 - 1] + se[n / 2]) / 2.0
        };
        let head = group[0];
        rows.push(SummaryRow {
            scenario_id: head.scenario_id.clone(),
            mode: head.mode,
            deployment: head.deployment,
            n_uabs: head.n_uabs,
            destroyed_fraction: head.destroyed_fraction,
            tau_db: head.tau_db,
            alpha: head.alpha,
            rho_db: head.rho_db,
            rho_prime_db: head.rho_prime_db,
            drops: n as u32,
            se_median_bps_hz: median,
            se_mean_bps_hz: se.iter().sum::<f64>() / n as f64,
            se_p5_bps_hz: sorted_stat(&se, 1, 20),
            se_p95_bps_hz: sorted_stat(&se, 19, 20),
        });
        i = j;
    }
    rows
}

/// On-disk format of records and summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonText,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonText => "json-text",
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonText => "json",
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-text" => Ok(OutputFormat::JsonText),
            other => Err(Error::InvalidParameter(format!(
                "unknown output format {other:?}, expected csv or json-text"
            ))),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| Error::format(path, e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, rows).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_records(path: &Path, records: &[ResultRecord], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(path, &RECORD_HEADER, records),
        OutputFormat::JsonText => write_json(path, records),
    }
}

pub fn read_records(path: &Path, format: OutputFormat) -> Result<Vec<ResultRecord>> {
    match format {
        OutputFormat::Csv => read_csv(path),
        OutputFormat::JsonText => read_json(path),
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(path, &SUMMARY_HEADER, rows),
        OutputFormat::JsonText => write_json(path, rows),
    }
}

/// Optimizer traces are always CSV; they are diagnostic output.
pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_csv(
        path,
        &["scenario_id", "drop", "generation", "best_se_5pct_bps_hz"],
        rows,
    )
}

/// One plot-ready table: x column, 5pSE column, one file per group.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub mode: IcicMode,
    pub deployment: DeploymentKind,
    pub destroyed_fraction: f64,
    pub x_label: &'static str,
    /// (x, best median 5pSE at that x), sorted by x.
    pub rows: Vec<(f64, f64)>,
}

/// Series names accepted by the plot-data extractor.
pub const SERIES_NAMES: [&str; 2] = ["5pse_vs_cre", "5pse_vs_nuabs"];

/// Extracts `5pSE vs range-expansion bias` curves: for each (mode,
/// deployment, destruction) group, the best median 5pSE per tau over
/// all other parameters.
pub fn series_5pse_vs_cre(records: &[ResultRecord]) -> Vec<SeriesTable> {
    series_by(records, "tau_db", |row| row.tau_db)
}

/// Extracts `5pSE vs UABS count` curves across scenarios.
pub fn series_5pse_vs_nuabs(records: &[ResultRecord]) -> Vec<SeriesTable> {
    series_by(records, "n_uabs", |row| row.n_uabs as f64)
}

fn series_by(
    records: &[ResultRecord],
    x_label: &'static str,
    x_of: fn(&SummaryRow) -> f64,
) -> Vec<SeriesTable> {
    let rows = aggregate(records);
    let mut keys: Vec<(IcicMode, DeploymentKind, f64)> = rows
        .iter()
        .map(|r| (r.mode, r.deployment, r.destroyed_fraction))
        .collect();
    keys.sort_by(|a, b| {
        a.0.as_str()
            .cmp(b.0.as_str())
            .then_with(|| a.1.as_str().cmp(b.1.as_str()))
            .then_with(|| a.2.total_cmp(&b.2))
    });
    keys.dedup();

    keys.into_iter()
        .map(|(mode, deployment, frac)| {
            let mut best: Vec<(f64, f64)> = Vec::new();
            for row in rows.iter().filter(|r| {
                r.mode == mode && r.deployment == deployment && r.destroyed_fraction == frac
            }) {
                let x = x_of(row);
                match best.iter_mut().find(|(bx, _)| *bx == x) {
                    Some((_, by)) => *by = by.max(row.se_median_bps_hz),
                    None => best.push((x, row.se_median_bps_hz)),
                }
            }
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            SeriesTable {
                mode,
                deployment,
                destroyed_fraction: frac,
                x_label,
                rows: best,
            }
        })
        .collect()
}

/// Writes one series table as a two-column CSV.
pub fn write_series(path: &Path, table: &SeriesTable) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{},se_5pct_median_bps_hz", table.x_label).map_err(|e| Error::io(path, e))?;
    for (x, y) in &table.rows {
        writeln!(w, "{x},{y}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
