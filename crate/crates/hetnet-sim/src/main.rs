//! Command-line front end: config loading with flag and environment
//! overrides, scenario dispatch, result files, and plot-data export.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hetnet_sim::campaign::{
    aggregate, read_records, run_scenario, series_5pse_vs_cre, series_5pse_vs_nuabs,
    write_records, write_series, write_summary, write_trace, Deployment, OutputFormat,
    ResultRecord, SeriesTable, SummaryRow, SERIES_NAMES,
};
use hetnet_sim::config::{self, preset_text, RunConfig, ENV_CONFIG, ENV_PRESET, PRESET_NAMES};
use hetnet_sim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hetnet-sim",
    version,
    about = "Two-tier air/ground HetNet simulator scoring 5th-percentile spectral efficiency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all configured scenarios and write result files.
    Run(RunArgs),
    /// Extract plot-ready series from a records file.
    Plotdata(PlotdataArgs),
    /// Check a configuration and report the resolved form.
    Validate(ValidateArgs),
}

/// Where the base configuration comes from. Without either flag the
/// HETSIM_CONFIG / HETSIM_PRESET variables are consulted, then the
/// built-in defaults.
#[derive(Args)]
struct ConfigSource {
    /// Path to a key = value config file.
    #[arg(long, conflicts_with = "preset", value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in preset: small, hex-sweep, ga-deploy, or compare.
    #[arg(long, value_parser = PRESET_NAMES)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Master seed override (key run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Drop-count override (key run.drops).
    #[arg(long)]
    drops: Option<u32>,
    /// Output directory override (key output.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Worker threads, 0 = all cores (key run.threads). Never changes
    /// results.
    #[arg(long)]
    threads: Option<usize>,
    /// Result file format (key output.format).
    #[arg(long, value_parser = ["csv", "json-text"])]
    format: Option<String>,
    /// Validate, print the execution plan, and write nothing.
    #[arg(long)]
    dry_run: bool,
    /// Increase verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct PlotdataArgs {
    /// Records file produced by `run`.
    #[arg(long, value_name = "PATH")]
    records: PathBuf,
    /// Series to extract: 5pse_vs_cre or 5pse_vs_nuabs.
    #[arg(long)]
    series: String,
    /// Directory for the extracted series files.
    #[arg(long, value_name = "DIR", default_value = "plotdata")]
    out: String,
    /// Records format; inferred from the file extension when omitted.
    #[arg(long, value_parser = ["csv", "json-text"])]
    format: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Print the fully resolved configuration text.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Loads the configuration honoring precedence: flags over environment
/// variables over file values over defaults.
fn load_config(source: &ConfigSource, flag_overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut overrides = config::env_overrides()?;
    overrides.extend_from_slice(flag_overrides);

    let env_config = std::env::var(ENV_CONFIG).ok();
    let env_preset = std::env::var(ENV_PRESET).ok();

    if let Some(path) = &source.config {
        return RunConfig::load(path, &overrides);
    }
    if let Some(name) = &source.preset {
        return RunConfig::from_text_with(preset_text(name)?, &overrides)
            .map_err(|e| Error::Config(format!("preset {name}: {e}")));
    }
    match (env_config, env_preset) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "both {ENV_CONFIG} and {ENV_PRESET} are set; set only one"
        ))),
        (Some(path), None) => RunConfig::load(Path::new(&path), &overrides),
        (None, Some(name)) => RunConfig::from_text_with(preset_text(&name)?, &overrides)
            .map_err(|e| Error::Config(format!("preset {name}: {e}"))),
        (None, None) => RunConfig::from_text_with("", &overrides),
    }
}

fn run_flag_overrides(args: &RunArgs) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Some(seed) = args.seed {
        out.push(("run.seed".into(), seed.to_string()));
    }
    if let Some(drops) = args.drops {
        out.push(("run.drops".into(), drops.to_string()));
    }
    if let Some(dir) = &args.out {
        out.push(("output.dir".into(), dir.clone()));
    }
    if let Some(threads) = args.threads {
        out.push(("run.threads".into(), threads.to_string()));
    }
    if let Some(format) = &args.format {
        out.push(("output.format".into(), format.clone()));
    }
    out
}

fn describe_deployment(deployment: &Deployment) -> String {
    match deployment {
        Deployment::Hex(grid) => format!("hex grid, {} parameter points", grid.len()),
        Deployment::Ga(ga) => format!(
            "ga, population {}, {} generations",
            ga.population_size, ga.generations
        ),
    }
}

fn print_plan(cfg: &RunConfig) {
    println!(
        "plan: {} scenario(s), region {} x {} km, output {} ({})",
        cfg.scenarios.len(),
        cfg.region_width_km,
        cfg.region_height_km,
        cfg.out_dir,
        cfg.format
    );
    for sc in &cfg.scenarios {
        println!(
            "  {}: mode {}, {} UABS, {}% of MBSs destroyed, {} drops, seed {}, {}",
            sc.id,
            sc.mode,
            sc.n_uabs,
            sc.destroyed_fraction * 100.0,
            sc.drops,
            sc.master_seed,
            describe_deployment(&sc.deployment)
        );
    }
}

/// First row with the maximum median, so ties keep enumeration order.
fn best_row(rows: &[SummaryRow]) -> &SummaryRow {
    let mut best = &rows[0];
    for row in &rows[1..] {
        if row.se_median_bps_hz > best.se_median_bps_hz {
            best = row;
        }
    }
    best
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = load_config(&args.source, &run_flag_overrides(&args))?;
    let verbosity = cfg.verbosity.max(args.verbose as u32);
    if cfg.scenarios.is_empty() {
        return Err(Error::Config(
            "configuration defines no scenarios; add scenario.<id>.* keys or use --preset".into(),
        ));
    }

    if args.dry_run {
        print_plan(&cfg);
        return Ok(());
    }

    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let started = Instant::now();
    let env = cfg.environment()?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let mut all_records: Vec<ResultRecord> = Vec::new();
    for sc in &cfg.scenarios {
        let sc_started = Instant::now();
        let out = run_scenario(&env, sc)?;

        let records_path = out_dir.join(format!("{}_records.{}", sc.id, cfg.format.extension()));
        write_records(&records_path, &out.records, cfg.format)?;
        if verbosity >= 1 {
            println!("wrote {} ({} records)", records_path.display(), out.records.len());
        }
        if !out.trace.is_empty() {
            let trace_path = out_dir.join(format!("{}_trace.csv", sc.id));
            write_trace(&trace_path, &out.trace)?;
            if verbosity >= 1 {
                println!("wrote {} ({} rows)", trace_path.display(), out.trace.len());
            }
        }

        let timing = if verbosity >= 1 {
            format!(", {:.1}s", sc_started.elapsed().as_secs_f64())
        } else {
            String::new()
        };
        match &sc.deployment {
            Deployment::Hex(_) => {
                let agg = aggregate(&out.records);
                let best = best_row(&agg);
                println!(
                    "{}: best median 5pSE {:.6} bps/Hz at tau {} dB, alpha {}, rho {} dB, \
                     rho' {} dB (hex, {} UABS, {} drops{timing})",
                    sc.id,
                    best.se_median_bps_hz,
                    best.tau_db,
                    best.alpha,
                    best.rho_db,
                    best.rho_prime_db,
                    best.n_uabs,
                    best.drops,
                );
            }
            Deployment::Ga(_) => {
                // One record per drop; parameters differ per drop, so
                // report the cross-drop median and the best drop.
                let mut se: Vec<f64> =
                    out.records.iter().map(|r| r.se_5pct_bps_hz).collect();
                se.sort_by(f64::total_cmp);
                let median = if se.len() % 2 == 1 {
                    se[se.len() / 2]
                } else {
                    (se[se.len() / 2 - 1] + se[se.len() / 2]) / 2.0
                };
                let best = out.records.iter().skip(1).fold(&out.records[0], |b, r| {
                    if r.se_5pct_bps_hz > b.se_5pct_bps_hz {
                        r
                    } else {
                        b
                    }
                });
                println!(
                    "{}: median per-drop best 5pSE {:.6} bps/Hz over {} drops; best drop {} \
                     reached {:.6} at tau {:.2} dB, alpha {:.3}, rho {:.2} dB, rho' {:.2} dB \
                     (ga, {} UABS{timing})",
                    sc.id,
                    median,
                    out.records.len(),
                    best.drop,
                    best.se_5pct_bps_hz,
                    best.tau_db,
                    best.alpha,
                    best.rho_db,
                    best.rho_prime_db,
                    sc.n_uabs,
                );
            }
        }
        all_records.extend(out.records);
    }

    let summary_path = out_dir.join(format!("summary.{}", cfg.format.extension()));
    write_summary(&summary_path, &aggregate(&all_records), cfg.format)?;
    if verbosity >= 1 {
        println!(
            "wrote {} (total {:.1}s)",
            summary_path.display(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

/// Infers the records format from the extension unless a flag says
/// otherwise.
fn records_format(path: &Path, flag: Option<&str>) -> Result<OutputFormat> {
    if let Some(flag) = flag {
        return flag.parse();
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(OutputFormat::JsonText),
        _ => Ok(OutputFormat::Csv),
    }
}

fn series_file_name(series: &str, table: &SeriesTable) -> String {
    format!(
        "{series}_{}_{}_destroyed{}.csv",
        table.mode, table.deployment, table.destroyed_fraction
    )
}

fn cmd_plotdata(args: PlotdataArgs) -> Result<()> {
    let format = records_format(&args.records, args.format.as_deref())?;
    let records = read_records(&args.records, format)?;
    if records.is_empty() {
        return Err(Error::Config(format!(
            "records file {} contains no records",
            args.records.display()
        )));
    }

    let tables = match args.series.as_str() {
        "5pse_vs_cre" => series_5pse_vs_cre(&records),
        "5pse_vs_nuabs" => series_5pse_vs_nuabs(&records),
        other => {
            return Err(Error::Config(format!(
                "unknown series {other:?}; valid series: {}",
                SERIES_NAMES.join(", ")
            )))
        }
    };

    let out_dir = PathBuf::from(&args.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    for table in &tables {
        let path = out_dir.join(series_file_name(&args.series, table));
        write_series(&path, table)?;
        println!("wrote {} ({} points)", path.display(), table.rows.len());
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let cfg = load_config(&args.source, &[])?;
    println!(
        "configuration OK: {} scenario(s), output {} ({})",
        cfg.scenarios.len(),
        cfg.out_dir,
        cfg.format
    );
    if args.print_config {
        print!("{}", cfg.to_text());
    }
    Ok(())
}
