//! Release acceptance checks. Runs ten criteria end to end, prints one
//! PASS/FAIL line per criterion, and exits nonzero if any fail.
//!
//! The harness is disabled for this target so the report is always
//! visible and all criteria run even after a failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hetnet_sim::association::{ClassTotals, IcicConfig, IcicMode, NetworkEvaluator, Tier};
use hetnet_sim::campaign::{
    drop_layout, run_scenario, series_5pse_vs_cre, Deployment, Environment, ResultRecord,
    Scenario, SeriesTable,
};
use hetnet_sim::config::{preset_text, RunConfig};
use hetnet_sim::deployment::{sample_ppp, GroundPoint, NetworkLayout, Region, UabsPosition};
use hetnet_sim::optimizer::{
    ga_optimize, mutate, roulette_select, Chromosome, FitnessEnv, GaSettings, GeneBounds,
    IcicGrid,
};
use hetnet_sim::radio::{PowerModel, SubframeClass};
use hetnet_sim::seed::stream;

type CheckResult = Result<(), String>;

/// Runs one criterion, prints its verdict, and reports whether it
/// passed. Panics inside a criterion are caught and shown as failures.
fn run_check(number: u32, name: &str, f: impl FnOnce() -> CheckResult) -> bool {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let elapsed = started.elapsed().as_secs_f64();
    let verdict = match outcome {
        Ok(Ok(())) => None,
        Ok(Err(msg)) => Some(msg),
        Err(payload) => Some(
            payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked".into()),
        ),
    };
    match verdict {
        None => {
            println!("criterion {number} ({name}): PASS  [{elapsed:.1}s]");
            true
        }
        Some(msg) => {
            println!("criterion {number} ({name}): FAIL  [{elapsed:.1}s]\n    {msg}");
            false
        }
    }
}

fn main() {
    let mut passed = Vec::new();

    passed.push(run_check(1, "reduction identities", c1_reduction_identities));
    passed.push(run_check(2, "scheduling partition", c2_partition));
    passed.push(run_check(3, "end-to-end oracle", c3_oracle));

    // Criteria 4 and 5 share one full-scale hex sweep.
    let sweep = timed_fixture("hex sweep campaign", hex_sweep_fixture);
    passed.push(run_check(4, "uncoordinated CRE trend", || c4_nim_trend(&sweep)));
    passed.push(run_check(5, "coordinated CRE peak", || c5_icic_peak(&sweep)));

    // Criteria 6 and 7 share the placement-comparison campaign.
    let placement = timed_fixture("placement campaign", placement_fixture);
    passed.push(run_check(6, "optimized vs hex placement", || c6_ga_vs_hex(&placement)));
    passed.push(run_check(7, "reduced power vs blanking", || c7_feicic_vs_eicic(&placement)));

    passed.push(run_check(8, "thread-count determinism", c8_thread_determinism));
    passed.push(run_check(9, "optimizer sanity", c9_ga_sanity));
    passed.push(run_check(10, "selection and mutation statistics", c10_operator_statistics));

    let failures = passed.iter().filter(|ok| !**ok).count();
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Builds a fixture shared by several criteria, reporting its wall time
/// separately so the per-criterion times stay meaningful.
fn timed_fixture<T>(name: &str, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    let started = Instant::now();
    let fixture = f();
    println!("fixture ({name}): {:.1}s", started.elapsed().as_secs_f64());
    fixture
}

// --- criterion 1 -----------------------------------------------------

/// On the small preset's scale, the general reduced-power path with
/// alpha pinned to 0 or 1 must match the dedicated blanking and
/// uncoordinated paths bit for bit, assignments included.
fn c1_reduction_identities() -> CheckResult {
    let cfg = RunConfig::from_text(preset_text("small").map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let env = cfg.environment().map_err(|e| e.to_string())?;
    let scenario = Scenario {
        id: "c1".into(),
        mode: IcicMode::Feicic,
        n_uabs: 7,
        destroyed_fraction: 0.5,
        drops: 50,
        master_seed: 11,
        deployment: Deployment::Hex(IcicGrid::for_mode(IcicMode::Feicic)),
    };
    let params = [(0.0, 20.0, -20.0), (6.0, 30.0, -15.0), (15.0, 40.0, -10.0)];

    for drop in 0..scenario.drops {
        let layout = drop_layout(&env, &scenario, drop).map_err(|e| e.to_string())?;
        let evaluator = NetworkEvaluator::new(&layout, &env.power).map_err(|e| e.to_string())?;
        for (tau_db, rho_db, rho_prime_db) in params {
            let pairs = [
                (IcicMode::Eicic, 0.0),
                (IcicMode::NoIcic, 1.0),
            ];
            for (reduced_mode, alpha) in pairs {
                let general = evaluator
                    .evaluate(
                        &IcicConfig::new(
                            IcicMode::Feicic,
                            alpha,
                            env.beta,
                            tau_db,
                            rho_db,
                            rho_prime_db,
                        )
                        .map_err(|e| e.to_string())?,
                    )
                    .map_err(|e| e.to_string())?;
                let special = evaluator
                    .evaluate(
                        &IcicConfig::new(
                            reduced_mode,
                            alpha,
                            env.beta,
                            tau_db,
                            rho_db,
                            rho_prime_db,
                        )
                        .map_err(|e| e.to_string())?,
                    )
                    .map_err(|e| e.to_string())?;

                ensure(
                    general.se_5pct.to_bits() == special.se_5pct.to_bits(),
                    || {
                        format!(
                            "drop {drop} tau {tau_db}: 5pSE differs, {} vs {} (alpha {alpha})",
                            general.se_5pct, special.se_5pct
                        )
                    },
                )?;
                ensure(
                    general.se_per_ue.len() == special.se_per_ue.len()
                        && general
                            .se_per_ue
                            .iter()
                            .zip(&special.se_per_ue)
                            .all(|(a, b)| a.to_bits() == b.to_bits()),
                    || format!("drop {drop} tau {tau_db}: per-UE SE differs (alpha {alpha})"),
                )?;
                ensure(general.assignments == special.assignments, || {
                    format!("drop {drop} tau {tau_db}: assignments differ (alpha {alpha})")
                })?;
            }
        }
    }
    Ok(())
}

// --- criterion 2 -----------------------------------------------------

/// The four scheduling classes partition the UE population in every
/// evaluation.
fn c2_partition() -> CheckResult {
    let env = Environment {
        region: Region::new(2000.0, 2000.0).map_err(|e| e.to_string())?,
        mbs_per_km2: 3.0,
        ue_per_km2: 50.0,
        ..Environment::default()
    };
    let grid = IcicGrid::with_values(
        IcicMode::Feicic,
        vec![0.0, 6.0, 12.0, 15.0],
        vec![0.0, 0.5, 1.0],
        vec![20.0, 30.0],
        vec![-20.0, -10.0],
    )
    .map_err(|e| e.to_string())?;
    let scenario = Scenario {
        id: "c2".into(),
        mode: IcicMode::Feicic,
        n_uabs: 5,
        destroyed_fraction: 0.5,
        drops: 25,
        master_seed: 17,
        deployment: Deployment::Hex(grid.clone()),
    };

    let mut evaluations = 0u32;
    for drop in 0..scenario.drops {
        let layout = drop_layout(&env, &scenario, drop).map_err(|e| e.to_string())?;
        let n_ue = layout.ue.len() as u32;
        let evaluator = NetworkEvaluator::new(&layout, &env.power).map_err(|e| e.to_string())?;
        for (tau_db, alpha, rho_db, rho_prime_db) in grid.points() {
            let icic =
                IcicConfig::new(IcicMode::Feicic, alpha, env.beta, tau_db, rho_db, rho_prime_db)
                    .map_err(|e| e.to_string())?;
            let out = evaluator.evaluate(&icic).map_err(|e| e.to_string())?;
            let totals = out.counts.totals();
            ensure(totals.sum() == n_ue, || {
                format!(
                    "drop {drop} tau {tau_db} alpha {alpha}: classes sum to {} of {} UEs",
                    totals.sum(),
                    n_ue
                )
            })?;
            ensure(out.assignments.len() as u32 == n_ue, || {
                format!("drop {drop}: {} assignments for {} UEs", out.assignments.len(), n_ue)
            })?;
            evaluations += 1;
        }
    }
    ensure(evaluations >= 1000, || {
        format!("only {evaluations} evaluations, need at least 1000")
    })
}

// --- criterion 3 -----------------------------------------------------

/// Frozen layouts checked against an independent straight-line
/// recomputation of the whole chain: path loss, the four SIRs,
/// association, per-cell scheduling loads, per-UE SE, and the
/// 5th-percentile score.
///
/// The primary layout (2 MBS, 1 UABS, 10 UEs) covers the common
/// classes; with a single interfering MBS the serving macro signal
/// always dominates the interference, so a CSF-UUE cannot arise there.
/// A second 3-MBS layout parks one UE equidistant from all three
/// macros, deep in the expanded aerial range, to exercise the
/// protected-subframe aerial path too.
fn c3_oracle() -> CheckResult {
    let common = check_against_oracle(
        vec![
            GroundPoint { x: 200.0, y: 300.0 },
            GroundPoint { x: 750.0, y: 650.0 },
        ],
        UabsPosition {
            x: 480.0,
            y: 520.0,
            altitude: 121.92,
        },
        vec![
            (100.0, 100.0),
            (250.0, 320.0),
            (400.0, 480.0),
            (520.0, 510.0),
            (660.0, 700.0),
            (800.0, 820.0),
            (90.0, 900.0),
            (950.0, 120.0),
            (333.0, 666.0),
            (505.0, 495.0),
        ],
        6.0,
    )?;
    ensure(
        common.usf_mue > 0 && common.csf_mue > 0 && common.usf_uue > 0,
        || format!("first oracle layout misses a class: {common:?}"),
    )?;

    let expanded = check_against_oracle(
        vec![
            GroundPoint { x: 500.0, y: 900.0 },
            GroundPoint { x: 153.6, y: 300.0 },
            GroundPoint { x: 846.4, y: 300.0 },
        ],
        UabsPosition {
            x: 797.7,
            y: 500.0,
            altitude: 121.92,
        },
        vec![
            (500.0, 500.0),
            (505.0, 870.0),
            (760.0, 480.0),
            (846.0, 170.0),
            (200.0, 320.0),
            (100.0, 100.0),
        ],
        15.0,
    )?;
    ensure(expanded.csf_uue > 0, || {
        format!("second oracle layout has no protected aerial UE: {expanded:?}")
    })
}

/// Evaluates one frozen single-UABS layout and compares it against the
/// inline oracle. Returns the class totals so callers can assert the
/// layout exercises the classes it was designed for.
fn check_against_oracle(
    mbs: Vec<GroundPoint>,
    uabs_pos: UabsPosition,
    ue_xy: Vec<(f64, f64)>,
    tau_db: f64,
) -> Result<ClassTotals, String> {
    let region = Region::new(1000.0, 1000.0).map_err(|e| e.to_string())?;
    let altitude = uabs_pos.altitude;
    let uabs = vec![uabs_pos];
    let ue: Vec<GroundPoint> = ue_xy.into_iter().map(|(x, y)| GroundPoint { x, y }).collect();

    let layout = NetworkLayout::new(region, mbs.clone(), uabs.clone(), ue.clone())
        .map_err(|e| e.to_string())?;
    let pm = PowerModel::default();
    let (alpha, beta, rho_db, rho_prime_db) = (0.5, 0.5, 30.0, -15.0);
    let icic = IcicConfig::new(IcicMode::Feicic, alpha, beta, tau_db, rho_db, rho_prime_db)
        .map_err(|e| e.to_string())?;

    let evaluator = NetworkEvaluator::new(&layout, &pm).map_err(|e| e.to_string())?;
    let out = evaluator.evaluate(&icic).map_err(|e| e.to_string())?;

    // Independent recomputation with explicit loops and powf only.
    let p_mbs = 10f64.powf((46.0 - 30.0) / 10.0);
    let p_uabs = 1.0;
    let tau = 10f64.powf(tau_db / 10.0);
    let rho = 10f64.powf(rho_db / 10.0);
    let rho_prime = 10f64.powf(rho_prime_db / 10.0);

    struct OracleUe {
        on_mbs: bool,
        cell: usize,
        usf: bool,
        gamma: f64,
        gamma_csf: f64,
        gamma_p: f64,
        gamma_p_csf: f64,
    }

    let mut oracle: Vec<OracleUe> = Vec::new();
    for u in &ue {
        let s_of = |bx: f64, by: f64, bz: f64, p: f64| {
            let d2 = (u.x - bx).powf(2.0) + (u.y - by).powf(2.0) + bz.powf(2.0);
            p / d2.powf(2.0)
        };
        let s: Vec<f64> = mbs.iter().map(|m| s_of(m.x, m.y, 0.0, p_mbs)).collect();
        let mut moi = 0;
        for (i, m) in mbs.iter().enumerate() {
            let d2 = (u.x - m.x).powf(2.0) + (u.y - m.y).powf(2.0);
            let best = &mbs[moi];
            let best_d2 = (u.x - best.x).powf(2.0) + (u.y - best.y).powf(2.0);
            if d2 < best_d2 {
                moi = i;
            }
        }
        let s_mbs = s[moi];
        let z_mbs: f64 = s.iter().enumerate().filter(|(i, _)| *i != moi).map(|(_, v)| v).sum();
        let s_uabs = s_of(uabs[0].x, uabs[0].y, altitude, p_uabs);
        let z_uabs = 0.0;

        let gamma = s_mbs / (s_uabs + z_mbs + z_uabs);
        let gamma_csf = alpha * s_mbs / (s_uabs + alpha * z_mbs + z_uabs);
        let gamma_p = s_uabs / (s_mbs + z_mbs + z_uabs);
        let gamma_p_csf = s_uabs / (alpha * s_mbs + alpha * z_mbs + z_uabs);

        let on_mbs = gamma > tau * gamma_p;
        let usf = if on_mbs { gamma <= rho } else { gamma_p > rho_prime };
        oracle.push(OracleUe {
            on_mbs,
            cell: if on_mbs { moi } else { 0 },
            usf,
            gamma,
            gamma_csf,
            gamma_p,
            gamma_p_csf,
        });
    }

    // Per-cell class loads.
    let load = |on_mbs: bool, cell: usize, usf: bool| {
        oracle
            .iter()
            .filter(|o| o.on_mbs == on_mbs && o.cell == cell && o.usf == usf)
            .count() as f64
    };
    let mut se_oracle: Vec<f64> = Vec::new();
    for o in &oracle {
        let n = load(o.on_mbs, o.cell, o.usf);
        let se = match (o.on_mbs, o.usf) {
            (true, true) => beta * (1.0 + o.gamma).log2() / n,
            (true, false) => (1.0 - beta) * (1.0 + o.gamma_csf).log2() / n,
            (false, true) => (1.0 + o.gamma_p).log2() / n,
            (false, false) => (1.0 + o.gamma_p_csf).log2() / n,
        };
        se_oracle.push(se);
    }
    let mut sorted = se_oracle.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = (se_oracle.len() as f64 / 20.0).ceil().max(1.0) as usize;
    let se_5pct_oracle = sorted[rank - 1];

    let rel = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    };

    ensure(rel(out.se_5pct, se_5pct_oracle) <= 1e-12, || {
        format!("5pSE {} vs oracle {}", out.se_5pct, se_5pct_oracle)
    })?;
    for (i, (got, want)) in out.se_per_ue.iter().zip(&se_oracle).enumerate() {
        ensure(rel(*got, *want) <= 1e-12, || {
            format!("UE {i}: SE {got} vs oracle {want}")
        })?;
    }
    for (i, (a, o)) in out.assignments.iter().zip(&oracle).enumerate() {
        let tier_ok = (a.tier == Tier::Mbs) == o.on_mbs;
        let class_ok = (a.class == SubframeClass::Usf) == o.usf;
        ensure(tier_ok && class_ok && a.cell == o.cell, || {
            format!("UE {i}: assignment {a:?} disagrees with the oracle")
        })?;
    }
    Ok(out.counts.totals())
}

// --- criteria 4 and 5 -------------------------------------------------

/// Full-scale bias sweep: default region and densities, 20 drops, half
/// the macro layer destroyed, 91 aerial cells.
///
/// All three coordination flavors run at fixed scheduling thresholds
/// so the bias axis isolates the range-expansion physics; left free,
/// the thresholds act as a second relief valve that re-tunes the
/// protected pool at every bias level and masks the expansion-victim
/// effect the sweep exists to show. The protection threshold rho' is a
/// coordination knob: the uncoordinated baseline runs at the floor of
/// its range (protected pool vestigial, the honest no-coordination
/// operating point), the coordinated flavors at midrange, where the
/// protected pool is used but its capacity stays capped. The
/// reduced-power flavor still sweeps its power factor, which is the
/// knob that defines it.
fn hex_sweep_fixture() -> Result<Vec<SeriesTable>, String> {
    let text = "\
run.drops = 20
run.seed = 3

scenario.none.mode = none
scenario.none.deployment = hex
scenario.none.n_uabs = 91
scenario.none.destroyed_fraction = 0.5
scenario.none.rho_db = 30
scenario.none.rho_prime_db = -20

scenario.eicic.mode = eicic
scenario.eicic.deployment = hex
scenario.eicic.n_uabs = 91
scenario.eicic.destroyed_fraction = 0.5
scenario.eicic.rho_db = 30
scenario.eicic.rho_prime_db = -15

scenario.feicic.mode = feicic
scenario.feicic.deployment = hex
scenario.feicic.n_uabs = 91
scenario.feicic.destroyed_fraction = 0.5
scenario.feicic.rho_db = 30
scenario.feicic.rho_prime_db = -15
";
    let cfg = RunConfig::from_text(text).map_err(|e| e.to_string())?;
    let env = cfg.environment().map_err(|e| e.to_string())?;
    let mut records: Vec<ResultRecord> = Vec::new();
    for sc in &cfg.scenarios {
        let out = run_scenario(&env, sc).map_err(|e| e.to_string())?;
        records.extend(out.records);
    }
    Ok(series_5pse_vs_cre(&records))
}

fn curve(
    sweep: &Result<Vec<SeriesTable>, String>,
    mode: IcicMode,
) -> Result<&SeriesTable, String> {
    let tables = sweep.as_ref().map_err(|e| e.clone())?;
    tables
        .iter()
        .find(|t| t.mode == mode)
        .ok_or_else(|| format!("no {mode} curve in the sweep fixture"))
}

/// Without coordination the best-median 5pSE must decay from 0 dB to
/// 12 dB of range-expansion bias.
fn c4_nim_trend(sweep: &Result<Vec<SeriesTable>, String>) -> CheckResult {
    let table = curve(sweep, IcicMode::NoIcic)?;
    let at = |x: f64| -> Result<f64, String> {
        table
            .rows
            .iter()
            .find(|(tx, _)| *tx == x)
            .map(|(_, y)| *y)
            .ok_or_else(|| format!("no point at {x} dB"))
    };
    let (y0, y12) = (at(0.0)?, at(12.0)?);
    ensure(y0 > y12, || {
        format!("median 5pSE {y0:.6} at 0 dB is not above {y12:.6} at 12 dB")
    })
}

/// With coordination the best-median curve must peak strictly inside
/// the bias range, between 3 and 12 dB.
fn c5_icic_peak(sweep: &Result<Vec<SeriesTable>, String>) -> CheckResult {
    for mode in [IcicMode::Eicic, IcicMode::Feicic] {
        let table = curve(sweep, mode)?;
        let mut best = &table.rows[0];
        for row in &table.rows[1..] {
            if row.1 > best.1 {
                best = row;
            }
        }
        let points: Vec<String> = table
            .rows
            .iter()
            .map(|(x, y)| format!("{x}:{y:.6}"))
            .collect();
        ensure((3.0..=12.0).contains(&best.0), || {
            format!(
                "{mode}: curve peaks at {} dB, outside [3, 12]; curve {}",
                best.0,
                points.join(" ")
            )
        })?;
    }
    Ok(())
}

// --- criteria 6 and 7 -------------------------------------------------

struct PlacementFixture {
    /// Records per scenario id.
    records: BTreeMap<String, Vec<ResultRecord>>,
}

/// Quarter-scale comparison campaign: exhaustive hex sweeps and
/// genetic placement runs over shared geometry, both destruction
/// levels for the reduced-power flavor plus a blanking run.
fn placement_fixture() -> Result<PlacementFixture, String> {
    let text = "\
region.width_km = 5
region.height_km = 5
run.drops = 11
run.seed = 5

scenario.hex-d50.mode = feicic
scenario.hex-d50.deployment = hex
scenario.hex-d50.n_uabs = 7
scenario.hex-d50.destroyed_fraction = 0.5

scenario.hex-d975.mode = feicic
scenario.hex-d975.deployment = hex
scenario.hex-d975.n_uabs = 7
scenario.hex-d975.destroyed_fraction = 0.975

scenario.ga-fe-d50.mode = feicic
scenario.ga-fe-d50.deployment = ga
scenario.ga-fe-d50.n_uabs = 7
scenario.ga-fe-d50.destroyed_fraction = 0.5
scenario.ga-fe-d50.ga.population = 24
scenario.ga-fe-d50.ga.generations = 40

scenario.ga-fe-d975.mode = feicic
scenario.ga-fe-d975.deployment = ga
scenario.ga-fe-d975.n_uabs = 7
scenario.ga-fe-d975.destroyed_fraction = 0.975
scenario.ga-fe-d975.ga.population = 24
scenario.ga-fe-d975.ga.generations = 40

scenario.ga-ei-d50.mode = eicic
scenario.ga-ei-d50.deployment = ga
scenario.ga-ei-d50.n_uabs = 7
scenario.ga-ei-d50.destroyed_fraction = 0.5
scenario.ga-ei-d50.ga.population = 24
scenario.ga-ei-d50.ga.generations = 40
";
    let cfg = RunConfig::from_text(text).map_err(|e| e.to_string())?;
    let env = cfg.environment().map_err(|e| e.to_string())?;
    let mut records = BTreeMap::new();
    for sc in &cfg.scenarios {
        let out = run_scenario(&env, sc).map_err(|e| e.to_string())?;
        records.insert(sc.id.clone(), out.records);
    }
    Ok(PlacementFixture { records })
}

/// Best grid point per drop, i.e. the per-drop envelope of the sweep.
fn per_drop_best(records: &[ResultRecord]) -> Vec<f64> {
    let mut best: BTreeMap<u32, f64> = BTreeMap::new();
    for r in records {
        let slot = best.entry(r.drop).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(r.se_5pct_bps_hz);
    }
    best.into_values().collect()
}

fn scenario_records<'a>(
    fixture: &'a Result<PlacementFixture, String>,
    id: &str,
) -> Result<&'a [ResultRecord], String> {
    let fixture = fixture.as_ref().map_err(|e| e.clone())?;
    fixture
        .records
        .get(id)
        .map(Vec::as_slice)
        .ok_or_else(|| format!("scenario {id} missing from fixture"))
}

/// Genetic placement must match or beat the best fixed hex grid point
/// (2% slack) at both destruction levels.
fn c6_ga_vs_hex(fixture: &Result<PlacementFixture, String>) -> CheckResult {
    for level in ["d50", "d975"] {
        let hex = per_drop_best(scenario_records(fixture, &format!("hex-{level}"))?);
        let ga: Vec<f64> = scenario_records(fixture, &format!("ga-fe-{level}"))?
            .iter()
            .map(|r| r.se_5pct_bps_hz)
            .collect();
        let (hex_med, ga_med) = (median(&hex), median(&ga));
        ensure(ga_med >= 0.98 * hex_med, || {
            format!(
                "{level}: optimized median {ga_med:.6} below hex best median {hex_med:.6} \
                 beyond 2% slack"
            )
        })?;
    }
    Ok(())
}

/// With genetic placement, the reduced-power flavor must match or beat
/// subframe blanking on the cross-drop median.
fn c7_feicic_vs_eicic(fixture: &Result<PlacementFixture, String>) -> CheckResult {
    let feicic: Vec<f64> = scenario_records(fixture, "ga-fe-d50")?
        .iter()
        .map(|r| r.se_5pct_bps_hz)
        .collect();
    let eicic: Vec<f64> = scenario_records(fixture, "ga-ei-d50")?
        .iter()
        .map(|r| r.se_5pct_bps_hz)
        .collect();
    let (fe_med, ei_med) = (median(&feicic), median(&eicic));
    ensure(fe_med >= ei_med, || {
        format!("reduced-power median {fe_med:.6} below blanking median {ei_med:.6}")
    })
}

// --- criterion 8 -------------------------------------------------------

/// Drops the wall-time column (the last one) from a records CSV.
fn strip_wall_column(text: &str) -> String {
    text.lines()
        .map(|line| line.rsplit_once(',').map(|(head, _)| head).unwrap_or(line))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<String>, String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|entry| entry.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    Ok(names)
}

/// The binary must produce byte-identical files (wall-time column
/// aside) regardless of the worker thread count.
fn c8_thread_determinism() -> CheckResult {
    let exe = env!("CARGO_BIN_EXE_hetnet-sim");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config_path = dir.path().join("run.conf");
    std::fs::write(
        &config_path,
        "\
region.width_km = 2
region.height_km = 2
density.mbs_per_km2 = 2
density.ue_per_km2 = 30
run.drops = 3
run.seed = 9

scenario.sweep.mode = feicic
scenario.sweep.n_uabs = 3
scenario.sweep.tau_db = 0, 6
scenario.sweep.alpha = 0, 1
scenario.sweep.rho_db = 30
scenario.sweep.rho_prime_db = -15

scenario.evo.mode = feicic
scenario.evo.deployment = ga
scenario.evo.n_uabs = 2
scenario.evo.ga.population = 6
scenario.evo.ga.generations = 3
",
    )
    .map_err(|e| e.to_string())?;

    let run = |threads: u32, out: &Path| -> Result<(), String> {
        let mut cmd = Command::new(exe);
        cmd.arg("run")
            .arg("--config")
            .arg(&config_path)
            .arg("--threads")
            .arg(threads.to_string())
            .arg("--out")
            .arg(out);
        for (name, _) in std::env::vars() {
            if name.starts_with("HETSIM_") {
                cmd.env_remove(name);
            }
        }
        let output = cmd.output().map_err(|e| e.to_string())?;
        if !output.status.success() {
            return Err(format!(
                "run with {threads} thread(s) failed: {}",
                String::from_utf8_lossy(&output.stderr)
            ));
        }
        Ok(())
    };

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run(1, &out_a)?;
    run(8, &out_b)?;

    let names_a = read_dir_sorted(&out_a)?;
    let names_b = read_dir_sorted(&out_b)?;
    ensure(names_a == names_b, || {
        format!("file sets differ: {names_a:?} vs {names_b:?}")
    })?;
    ensure(
        names_a.contains(&"sweep_records.csv".to_string())
            && names_a.contains(&"evo_trace.csv".to_string())
            && names_a.contains(&"summary.csv".to_string()),
        || format!("unexpected output files: {names_a:?}"),
    )?;

    for name in &names_a {
        let a = std::fs::read_to_string(out_a.join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read_to_string(out_b.join(name)).map_err(|e| e.to_string())?;
        let (a, b) = if name.ends_with("_records.csv") {
            (strip_wall_column(&a), strip_wall_column(&b))
        } else {
            (a, b)
        };
        ensure(a == b, || format!("{name} differs between thread counts"))?;
    }
    Ok(())
}

// --- criterion 9 -------------------------------------------------------

/// Ten seeded optimizer runs: the per-generation best never decreases
/// and the final best is at least the best initial individual.
fn c9_ga_sanity() -> CheckResult {
    let region = Region::new(1500.0, 1500.0).map_err(|e| e.to_string())?;
    let pm = PowerModel::default();
    for run in 0..10u64 {
        let mut rng = stream(1000 + run, &[0]);
        let mbs = sample_ppp(3.0, region, &mut rng);
        let mut rng = stream(1000 + run, &[1]);
        let ue = sample_ppp(40.0, region, &mut rng);
        if ue.is_empty() {
            return Err(format!("run {run}: empty UE set"));
        }
        let layout =
            NetworkLayout::new(region, mbs, Vec::new(), ue).map_err(|e| e.to_string())?;
        let env = FitnessEnv::new(&layout, 2, 121.92, &pm, IcicMode::Feicic, 0.5)
            .map_err(|e| e.to_string())?;
        let settings = GaSettings {
            population_size: 10,
            generations: 12,
            ..GaSettings::default()
        };
        let outcome = ga_optimize(&env, &settings, &[], run).map_err(|e| e.to_string())?;

        ensure(outcome.trace.len() == 13, || {
            format!("run {run}: trace has {} entries, expected 13", outcome.trace.len())
        })?;
        for (g, w) in outcome.trace.windows(2).enumerate() {
            ensure(w[1] >= w[0], || {
                format!(
                    "run {run}: best fitness fell from {} to {} at generation {}",
                    w[0],
                    w[1],
                    g + 1
                )
            })?;
        }
        ensure(outcome.best_fitness >= outcome.trace[0], || {
            format!(
                "run {run}: final best {} below initial best {}",
                outcome.best_fitness, outcome.trace[0]
            )
        })?;
        ensure(outcome.best_fitness == *outcome.trace.last().unwrap(), || {
            format!("run {run}: trace end disagrees with the reported best")
        })?;
    }
    Ok(())
}

// --- criterion 10 ------------------------------------------------------

/// Selection frequencies follow fitness proportions (chi-squared at
/// p > 0.01) and the observed per-gene mutation rate stays within
/// three standard errors of the configured probability.
fn c10_operator_statistics() -> CheckResult {
    // Roulette selection over four individuals with fitness 1:2:3:4.
    let population: Vec<Chromosome> = (0..4)
        .map(|i| Chromosome {
            genes: vec![i as f64; 6],
            fitness: Some((i + 1) as f64),
        })
        .collect();
    let draws = 10_000usize;
    let mut counts = [0u32; 4];
    let mut rng = stream(42, &[0]);
    for _ in 0..draws {
        let picked = roulette_select(&population, &mut rng);
        let idx = picked.genes[0] as usize;
        counts[idx] += 1;
    }
    let total_fitness = 10.0;
    let mut chi2 = 0.0;
    for (i, &observed) in counts.iter().enumerate() {
        let expected = draws as f64 * (i + 1) as f64 / total_fitness;
        chi2 += (observed as f64 - expected).powi(2) / expected;
    }
    // Critical value for 3 degrees of freedom at the 1% level.
    ensure(chi2 < 11.345, || {
        format!("selection chi-squared {chi2:.2} >= 11.345 (counts {counts:?})")
    })?;

    // Per-gene mutation rate over 10^4 trials.
    let region = Region::new(1000.0, 1000.0).map_err(|e| e.to_string())?;
    let bounds = GeneBounds::new(2, region, IcicMode::Feicic).map_err(|e| e.to_string())?;
    let mut rng = stream(43, &[0]);
    let base = bounds.sample(&mut rng);
    let trials = 10_000usize;
    let prob = 0.1;
    let mut flips = vec![0u32; base.genes.len()];
    for _ in 0..trials {
        let mut c = base.clone();
        mutate(&mut c, &bounds, prob, &mut rng);
        for (i, (a, b)) in c.genes.iter().zip(&base.genes).enumerate() {
            if a != b {
                flips[i] += 1;
            }
        }
    }
    let sigma = (prob * (1.0 - prob) / trials as f64).sqrt();
    for (i, &flipped) in flips.iter().enumerate() {
        let rate = flipped as f64 / trials as f64;
        ensure((rate - prob).abs() <= 3.0 * sigma, || {
            format!(
                "gene {i}: mutation rate {rate:.4} outside {prob} +/- {:.4}",
                3.0 * sigma
            )
        })?;
    }
    Ok(())
}
