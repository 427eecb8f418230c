//! Run configuration: a flat `key = value` text format with dotted
//! section keys, built-in presets, and override layering.
//!
//! Precedence, lowest to highest: built-in defaults, config file,
//! environment variables (`HETSIM_*`), command-line flags. Overrides
//! are expressed as dotted keys so every layer funnels through the
//! same parser and validation.
//!
//! `to_text` emits every resolved field, so parse -> serialize ->
//! parse reproduces the configuration exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::association::IcicMode;
use crate::campaign::{Deployment, DeploymentKind, Environment, OutputFormat, Scenario};
use crate::deployment::Region;
use crate::optimizer::{GaSettings, IcicGrid};
use crate::radio::PowerModel;
use crate::{Error, Result};

/// Prefix of the environment variables mirroring CLI flags.
pub const ENV_PREFIX: &str = "HETSIM_";
/// Environment variable naming a config file (mirrors `--config`).
pub const ENV_CONFIG: &str = "HETSIM_CONFIG";
/// Environment variable naming a preset (mirrors `--preset`).
pub const ENV_PRESET: &str = "HETSIM_PRESET";

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub region_width_km: f64,
    pub region_height_km: f64,
    pub mbs_per_km2: f64,
    pub ue_per_km2: f64,
    pub mbs_dbm: f64,
    pub uabs_dbm: f64,
    pub k_mbs: f64,
    pub k_uabs: f64,
    pub pathloss_exponent: f64,
    pub sir_cap: f64,
    pub mbs_height_m: f64,
    pub uabs_altitude_m: f64,
    pub beta: f64,
    /// Default drop count for scenarios that do not set their own.
    pub drops: u32,
    /// Default master seed for scenarios that do not set their own.
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub verbosity: u32,
    pub out_dir: String,
    pub format: OutputFormat,
    pub scenarios: Vec<Scenario>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            region_width_km: 10.0,
            region_height_km: 10.0,
            mbs_per_km2: 4.0,
            ue_per_km2: 100.0,
            mbs_dbm: 46.0,
            uabs_dbm: 30.0,
            k_mbs: 1.0,
            k_uabs: 1.0,
            pathloss_exponent: 4.0,
            sir_cap: 1e9,
            mbs_height_m: 0.0,
            uabs_altitude_m: 121.92,
            beta: 0.5,
            drops: 100,
            seed: 1,
            threads: 0,
            verbosity: 0,
            out_dir: "results".into(),
            format: OutputFormat::Csv,
            scenarios: Vec::new(),
        }
    }
}

/// Splits config text into ordered key-value pairs. Only full-line
/// `#` comments are recognized; values may contain any character.
fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key}",
                lineno + 1
            )));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

fn parse_scalar<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        let want = match std::any::type_name::<T>() {
            "f64" => "a number",
            "u32" | "u64" | "usize" => "a non-negative integer",
            _ => "a valid value",
        };
        Error::Config(format!("key {key}: cannot parse {raw:?} as {want}"))
    })
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    if raw.trim().is_empty() {
        return Err(Error::Config(format!("key {key}: empty list")));
    }
    raw.split(',')
        .map(|item| parse_scalar(key, item.trim()))
        .collect()
}

/// Parses an enum-like value through its FromStr, keeping the key in
/// the message.
fn parse_named<T>(key: &str, raw: &str) -> Result<T>
where
    T: std::str::FromStr<Err = Error>,
{
    raw.parse()
        .map_err(|e: Error| Error::Config(format!("key {key}: {e}")))
}

struct KeyMap {
    map: BTreeMap<String, String>,
    scenario_order: Vec<String>,
}

fn merge(layers: &[&[(String, String)]]) -> KeyMap {
    let mut map = BTreeMap::new();
    let mut scenario_order: Vec<String> = Vec::new();
    for layer in layers {
        for (key, value) in *layer {
            if let Some(rest) = key.strip_prefix("scenario.") {
                if let Some((id, _)) = rest.split_once('.') {
                    if !scenario_order.iter().any(|s| s == id) {
                        scenario_order.push(id.to_string());
                    }
                }
            }
            map.insert(key.clone(), value.clone());
        }
    }
    KeyMap {
        map,
        scenario_order,
    }
}

fn take_or<T, F>(map: &mut BTreeMap<String, String>, key: &str, default: T, parse: F) -> Result<T>
where
    F: FnOnce(&str, &str) -> Result<T>,
{
    match map.remove(key) {
        None => Ok(default),
        Some(raw) => parse(key, &raw),
    }
}

fn resolve(mut keys: KeyMap) -> Result<RunConfig> {
    let map = &mut keys.map;
    let d = RunConfig::default();
    let num = parse_scalar::<f64>;

    let mut cfg = RunConfig {
        region_width_km: take_or(map, "region.width_km", d.region_width_km, num)?,
        region_height_km: take_or(map, "region.height_km", d.region_height_km, num)?,
        mbs_per_km2: take_or(map, "density.mbs_per_km2", d.mbs_per_km2, num)?,
        ue_per_km2: take_or(map, "density.ue_per_km2", d.ue_per_km2, num)?,
        mbs_dbm: take_or(map, "power.mbs_dbm", d.mbs_dbm, num)?,
        uabs_dbm: take_or(map, "power.uabs_dbm", d.uabs_dbm, num)?,
        k_mbs: take_or(map, "power.k_mbs", d.k_mbs, num)?,
        k_uabs: take_or(map, "power.k_uabs", d.k_uabs, num)?,
        pathloss_exponent: take_or(map, "power.pathloss_exponent", d.pathloss_exponent, num)?,
        sir_cap: take_or(map, "power.sir_cap", d.sir_cap, num)?,
        mbs_height_m: take_or(map, "geometry.mbs_height_m", d.mbs_height_m, num)?,
        uabs_altitude_m: take_or(map, "geometry.uabs_altitude_m", d.uabs_altitude_m, num)?,
        beta: take_or(map, "icic.beta", d.beta, num)?,
        drops: take_or(map, "run.drops", d.drops, parse_scalar)?,
        seed: take_or(map, "run.seed", d.seed, parse_scalar)?,
        threads: take_or(map, "run.threads", d.threads, parse_scalar)?,
        verbosity: take_or(map, "run.verbosity", d.verbosity, parse_scalar)?,
        out_dir: take_or(map, "output.dir", d.out_dir, |_, raw| Ok(raw.to_string()))?,
        format: take_or(map, "output.format", d.format, parse_named)?,
        scenarios: Vec::new(),
    };

    for id in &keys.scenario_order {
        let prefix = format!("scenario.{id}.");
        let take = |map: &mut BTreeMap<String, String>, field: &str| {
            map.remove(&format!("{prefix}{field}"))
        };
        let key = |field: &str| format!("{prefix}{field}");

        let mode = match take(map, "mode") {
            None => IcicMode::Feicic,
            Some(raw) => parse_named(&key("mode"), &raw)?,
        };
        let kind = match take(map, "deployment") {
            None => DeploymentKind::Hex,
            Some(raw) => parse_named(&key("deployment"), &raw)?,
        };
        let n_uabs = match take(map, "n_uabs") {
            None => 7,
            Some(raw) => parse_scalar(&key("n_uabs"), &raw)?,
        };
        let destroyed_fraction = match take(map, "destroyed_fraction") {
            None => 0.5,
            Some(raw) => parse_scalar(&key("destroyed_fraction"), &raw)?,
        };
        let drops = match take(map, "drops") {
            None => cfg.drops,
            Some(raw) => parse_scalar(&key("drops"), &raw)?,
        };
        let master_seed = match take(map, "seed") {
            None => cfg.seed,
            Some(raw) => parse_scalar(&key("seed"), &raw)?,
        };

        let deployment = match kind {
            DeploymentKind::Hex => {
                let defaults = IcicGrid::for_mode(mode);
                let axis = |map: &mut BTreeMap<String, String>,
                            field: &str,
                            default: Vec<f64>|
                 -> Result<Vec<f64>> {
                    match map.remove(&format!("{prefix}{field}")) {
                        None => Ok(default),
                        Some(raw) => parse_list(&format!("{prefix}{field}"), &raw),
                    }
                };
                let grid = IcicGrid::with_values(
                    mode,
                    axis(map, "tau_db", defaults.tau_db)?,
                    axis(map, "alpha", defaults.alpha)?,
                    axis(map, "rho_db", defaults.rho_db)?,
                    axis(map, "rho_prime_db", defaults.rho_prime_db)?,
                )
                .map_err(|e| Error::Config(format!("scenario {id}: {e}")))?;
                Deployment::Hex(grid)
            }
            DeploymentKind::Ga => {
                let dg = GaSettings::default();
                let settings = GaSettings {
                    population_size: match take(map, "ga.population") {
                        None => dg.population_size,
                        Some(raw) => parse_scalar(&key("ga.population"), &raw)?,
                    },
                    generations: match take(map, "ga.generations") {
                        None => dg.generations,
                        Some(raw) => parse_scalar(&key("ga.generations"), &raw)?,
                    },
                    crossover_prob: match take(map, "ga.crossover_prob") {
                        None => dg.crossover_prob,
                        Some(raw) => parse_scalar(&key("ga.crossover_prob"), &raw)?,
                    },
                    mutation_prob: match take(map, "ga.mutation_prob") {
                        None => dg.mutation_prob,
                        Some(raw) => parse_scalar(&key("ga.mutation_prob"), &raw)?,
                    },
                    elitism: match take(map, "ga.elitism") {
                        None => dg.elitism,
                        Some(raw) => parse_scalar(&key("ga.elitism"), &raw)?,
                    },
                };
                settings
                    .validate()
                    .map_err(|e| Error::Config(format!("scenario {id}: {e}")))?;
                Deployment::Ga(settings)
            }
        };

        cfg.scenarios.push(Scenario {
            id: id.clone(),
            mode,
            n_uabs,
            destroyed_fraction,
            drops,
            master_seed,
            deployment,
        });
    }

    if !map.is_empty() {
        let keys: Vec<&str> = map.keys().map(String::as_str).collect();
        return Err(Error::Config(format!(
            "unknown keys: {}",
            keys.join(", ")
        )));
    }

    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Parses config text with no overrides.
    pub fn from_text(text: &str) -> Result<Self> {
        RunConfig::from_text_with(text, &[])
    }

    /// Parses config text, then applies override pairs (dotted keys,
    /// later entries win).
    pub fn from_text_with(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        resolve(merge(&[pairs.as_slice(), overrides]))
    }

    /// Loads a config file; errors carry the path.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_text_with(&text, overrides)
            .map_err(|e| Error::format(path, e.to_string()))
    }

    /// Serializes every resolved field. Parsing the result yields an
    /// identical configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "region.width_km = {}", self.region_width_km);
        let _ = writeln!(w, "region.height_km = {}", self.region_height_km);
        let _ = writeln!(w, "density.mbs_per_km2 = {}", self.mbs_per_km2);
        let _ = writeln!(w, "density.ue_per_km2 = {}", self.ue_per_km2);
        let _ = writeln!(w, "power.mbs_dbm = {}", self.mbs_dbm);
        let _ = writeln!(w, "power.uabs_dbm = {}", self.uabs_dbm);
        let _ = writeln!(w, "power.k_mbs = {}", self.k_mbs);
        let _ = writeln!(w, "power.k_uabs = {}", self.k_uabs);
        let _ = writeln!(w, "power.pathloss_exponent = {}", self.pathloss_exponent);
        let _ = writeln!(w, "power.sir_cap = {}", self.sir_cap);
        let _ = writeln!(w, "geometry.mbs_height_m = {}", self.mbs_height_m);
        let _ = writeln!(w, "geometry.uabs_altitude_m = {}", self.uabs_altitude_m);
        let _ = writeln!(w, "icic.beta = {}", self.beta);
        let _ = writeln!(w, "run.drops = {}", self.drops);
        let _ = writeln!(w, "run.seed = {}", self.seed);
        let _ = writeln!(w, "run.threads = {}", self.threads);
        let _ = writeln!(w, "run.verbosity = {}", self.verbosity);
        let _ = writeln!(w, "output.dir = {}", self.out_dir);
        let _ = writeln!(w, "output.format = {}", self.format);

        let list = |values: &[f64]| {
            values
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        for sc in &self.scenarios {
            let _ = writeln!(w);
            let p = format!("scenario.{}", sc.id);
            let _ = writeln!(w, "{p}.mode = {}", sc.mode);
            let _ = writeln!(w, "{p}.deployment = {}", sc.deployment.kind());
            let _ = writeln!(w, "{p}.n_uabs = {}", sc.n_uabs);
            let _ = writeln!(w, "{p}.destroyed_fraction = {}", sc.destroyed_fraction);
            let _ = writeln!(w, "{p}.drops = {}", sc.drops);
            let _ = writeln!(w, "{p}.seed = {}", sc.master_seed);
            match &sc.deployment {
                Deployment::Hex(grid) => {
                    let _ = writeln!(w, "{p}.tau_db = {}", list(&grid.tau_db));
                    let _ = writeln!(w, "{p}.alpha = {}", list(&grid.alpha));
                    let _ = writeln!(w, "{p}.rho_db = {}", list(&grid.rho_db));
                    let _ = writeln!(w, "{p}.rho_prime_db = {}", list(&grid.rho_prime_db));
                }
                Deployment::Ga(ga) => {
                    let _ = writeln!(w, "{p}.ga.population = {}", ga.population_size);
                    let _ = writeln!(w, "{p}.ga.generations = {}", ga.generations);
                    let _ = writeln!(w, "{p}.ga.crossover_prob = {}", ga.crossover_prob);
                    let _ = writeln!(w, "{p}.ga.mutation_prob = {}", ga.mutation_prob);
                    let _ = writeln!(w, "{p}.ga.elitism = {}", ga.elitism);
                }
            }
        }
        s
    }

    /// Builds the physical context, converting km to m and dBm to
    /// watts.
    pub fn environment(&self) -> Result<Environment> {
        let region = Region::new(
            self.region_width_km * 1000.0,
            self.region_height_km * 1000.0,
        )?;
        let power = PowerModel::from_dbm(
            self.mbs_dbm,
            self.uabs_dbm,
            self.k_mbs,
            self.k_uabs,
            self.pathloss_exponent,
        )?
        .with_sir_cap(self.sir_cap)?;
        let env = Environment {
            region,
            mbs_per_km2: self.mbs_per_km2,
            ue_per_km2: self.ue_per_km2,
            power,
            uabs_altitude: self.uabs_altitude_m,
            beta: self.beta,
            mbs_height: self.mbs_height_m,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        self.environment()?;
        let mut ids = std::collections::BTreeSet::new();
        for sc in &self.scenarios {
            sc.validate()?;
            if !ids.insert(&sc.id) {
                return Err(Error::Config(format!("duplicate scenario id {}", sc.id)));
            }
        }
        Ok(())
    }
}

/// Maps `HETSIM_*` variables to override pairs. `HETSIM_CONFIG` and
/// `HETSIM_PRESET` select the config source and are skipped here.
/// Unrecognized `HETSIM_*` names are rejected to catch typos.
pub fn env_overrides_from(
    vars: impl Iterator<Item = (String, String)>,
) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (name, value) in vars {
        let Some(suffix) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let key = match suffix {
            "CONFIG" | "PRESET" => continue,
            "SEED" => "run.seed",
            "DROPS" => "run.drops",
            "THREADS" => "run.threads",
            "OUT" => "output.dir",
            "FORMAT" => "output.format",
            _ => {
                return Err(Error::Config(format!(
                    "unknown environment variable {name}; known: HETSIM_CONFIG, \
                     HETSIM_PRESET, HETSIM_SEED, HETSIM_DROPS, HETSIM_THREADS, \
                     HETSIM_OUT, HETSIM_FORMAT"
                )))
            }
        };
        out.push((key.to_string(), value));
    }
    out.sort();
    Ok(out)
}

/// Reads overrides from the process environment.
pub fn env_overrides() -> Result<Vec<(String, String)>> {
    env_overrides_from(std::env::vars())
}

pub const PRESET_NAMES: [&str; 4] = ["small", "hex-sweep", "ga-deploy", "compare"];

/// Built-in config texts; they parse through the ordinary pipeline.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "small" => Ok(PRESET_SMALL),
        "hex-sweep" => Ok(PRESET_HEX_SWEEP),
        "ga-deploy" => Ok(PRESET_GA_DEPLOY),
        "compare" => Ok(PRESET_COMPARE),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

const PRESET_SMALL: &str = "\
# Quarter-scale region for fast runs and CI checks.
region.width_km = 5
region.height_km = 5
run.drops = 10

scenario.sweep.mode = feicic
scenario.sweep.deployment = hex
scenario.sweep.n_uabs = 7
scenario.sweep.destroyed_fraction = 0.5
";

const PRESET_HEX_SWEEP: &str = "\
# Range-expansion sweep on fixed hexagonal placements, one scenario
# per coordination flavor, half the macro layer destroyed.
run.drops = 20

scenario.sweep-none.mode = none
scenario.sweep-none.deployment = hex
scenario.sweep-none.n_uabs = 19
scenario.sweep-none.destroyed_fraction = 0.5

scenario.sweep-eicic.mode = eicic
scenario.sweep-eicic.deployment = hex
scenario.sweep-eicic.n_uabs = 19
scenario.sweep-eicic.destroyed_fraction = 0.5

scenario.sweep-feicic.mode = feicic
scenario.sweep-feicic.deployment = hex
scenario.sweep-feicic.n_uabs = 19
scenario.sweep-feicic.destroyed_fraction = 0.5
";

const PRESET_GA_DEPLOY: &str = "\
# Genetic placement and parameter search per coordination flavor.
run.drops = 10

scenario.ga-eicic.mode = eicic
scenario.ga-eicic.deployment = ga
scenario.ga-eicic.n_uabs = 19
scenario.ga-eicic.destroyed_fraction = 0.5

scenario.ga-feicic.mode = feicic
scenario.ga-feicic.deployment = ga
scenario.ga-feicic.n_uabs = 19
scenario.ga-feicic.destroyed_fraction = 0.5
";

const PRESET_COMPARE: &str = "\
# Fixed hexagonal vs genetic placement at two destruction levels.
run.drops = 10

scenario.hex-d50.mode = feicic
scenario.hex-d50.deployment = hex
scenario.hex-d50.n_uabs = 19
scenario.hex-d50.destroyed_fraction = 0.5

scenario.hex-d975.mode = feicic
scenario.hex-d975.deployment = hex
scenario.hex-d975.n_uabs = 19
scenario.hex-d975.destroyed_fraction = 0.975

scenario.ga-d50.mode = feicic
scenario.ga-d50.deployment = ga
scenario.ga-d50.n_uabs = 19
scenario.ga-d50.destroyed_fraction = 0.5

scenario.ga-d975.mode = feicic
scenario.ga-d975.deployment = ga
scenario.ga-d975.n_uabs = 19
scenario.ga-d975.destroyed_fraction = 0.975
";
