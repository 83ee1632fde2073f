use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use teamsim::config::{Overrides, RunConfig};
use teamsim::engine::Runner;
use teamsim::error::{Error, Result};
use teamsim::metrics::{Preset, ScenarioSummary, DEFAULT_ALPHA};
use teamsim::oracle::{run_check, CHECKS};
use teamsim::output::{self, OutputSet, OUT_ENV};

/// Team composition, coordination and learning on NK landscapes.
#[derive(Parser)]
#[command(name = "teamsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario or a grid and write summary.csv, periods.csv and manifest.toml.
    Run(RunArgs),
    /// Build grouped tables from a summary.csv.
    Report(ReportArgs),
    /// Run a built-in verification check (or `all`).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; a manifest from an earlier run also works.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reset the grid to the full default grid before axis overrides.
    #[arg(long, value_parser = ["default"])]
    grid: Option<String>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    periods: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
    /// 1,500 rounds per scenario.
    #[arg(long, conflicts_with = "rounds")]
    paper_scale: bool,
    /// Coordination modes, comma separated.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    structure: Vec<String>,
    /// Re-formation intervals; `inf` for a team that never changes.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<String>,
    /// Learning probabilities.
    #[arg(long, value_delimiter = ',')]
    prob: Vec<f64>,
    /// Standard deviation of the estimation error.
    #[arg(long)]
    error_sd: Option<f64>,
    /// Significance level of the reported intervals.
    #[arg(long)]
    alpha: Option<f64>,
    /// Also write per-round samples to rounds.csv.
    #[arg(long)]
    rounds_csv: bool,
    /// No progress output.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// summary.csv written by `run`.
    summary: PathBuf,
    /// table2, table3, table4, fig3 or all.
    #[arg(long, default_value = "all")]
    preset: String,
    /// Output directory; defaults to the summary's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Significance level; defaults to the one in the neighbouring manifest.
    #[arg(long)]
    alpha: Option<f64>,
    /// Keep only this learning probability instead of averaging over it.
    #[arg(long)]
    prob: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Check name or `all`.
    check: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(values: &[String]) -> Result<Option<Vec<T>>> {
    if values.is_empty() {
        return Ok(None);
    }
    values.iter().map(|v| v.parse()).collect::<Result<Vec<T>>>().map(Some)
}

fn overrides(a: &RunArgs) -> Result<Overrides> {
    Ok(Overrides {
        default_grid: a.grid.is_some(),
        paper_scale: a.paper_scale,
        rounds: a.rounds,
        periods: a.periods,
        seed: a.seed,
        workers: a.workers,
        error_sd: a.error_sd,
        alpha: a.alpha,
        rounds_csv: a.rounds_csv,
        modes: parse_list(&a.mode)?,
        ks: (!a.k.is_empty()).then(|| a.k.clone()),
        structures: parse_list(&a.structure)?,
        taus: parse_list(&a.tau)?,
        probs: (!a.prob.is_empty()).then(|| a.prob.clone()),
    })
}

fn check_summary(s: &ScenarioSummary) -> Result<()> {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    let ci_ok = |c: Option<f64>| c.is_none_or(|c| c >= 0.0);
    if unit(s.mean_perf) && unit(s.final_perf) && ci_ok(s.mean_ci) && ci_ok(s.final_ci) {
        Ok(())
    } else {
        Err(Error::Config(format!("scenario {} produced values outside [0, 1]", s.scenario_id)))
    }
}

fn write_run(cfg: &RunConfig, set: &mut OutputSet, quiet: bool) -> Result<()> {
    let started = Instant::now();
    let scenarios = cfg.scenarios();
    let runner = Runner::new(cfg.workers)?;
    let results = runner.run_all(&scenarios, |done, total| {
        if !quiet {
            eprint!("\r{done}/{total} scenarios");
        }
    })?;
    if !quiet {
        eprintln!();
    }
    let summaries = results
        .iter()
        .map(|r| ScenarioSummary::from_result(r, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    summaries.iter().try_for_each(check_summary)?;
    output::write_summary(&set.path("summary.csv"), &summaries)?;
    output::write_periods(&set.path("periods.csv"), &results)?;
    if cfg.rounds_csv {
        output::write_rounds(&set.path("rounds.csv"), &results)?;
    }
    let manifest = set.path("manifest.toml");
    let text = output::manifest_text(cfg, started.elapsed().as_secs_f64(), set.files());
    std::fs::write(&manifest, text).map_err(|source| Error::Io { path: manifest.clone(), source })?;
    if !quiet {
        eprintln!("wrote {} scenarios to {}", summaries.len(), set.files()[0].parent().unwrap_or(Path::new(".")).display());
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg = RunConfig::resolve(a.config.as_deref(), &overrides(a)?)?;
    let mut set = OutputSet::create(&a.out)?;
    match write_run(&cfg, &mut set, a.quiet) {
        Ok(()) => Ok(()),
        Err(e) => {
            set.discard();
            Err(e)
        }
    }
}

fn manifest_alpha(summary: &Path) -> Result<f64> {
    let manifest = summary.with_file_name("manifest.toml");
    if !manifest.exists() {
        return Ok(DEFAULT_ALPHA);
    }
    let text = std::fs::read_to_string(&manifest).map_err(|source| Error::Io { path: manifest.clone(), source })?;
    let mut cfg = RunConfig::default();
    cfg.apply_toml(&text)?;
    Ok(cfg.alpha)
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let presets: Vec<Preset> = if a.preset == "all" { Preset::ALL.to_vec() } else { vec![a.preset.parse()?] };
    let alpha = match a.alpha {
        Some(v) => v,
        None => manifest_alpha(&a.summary)?,
    };
    let summaries = output::read_summary(&a.summary, alpha)?;
    if summaries.is_empty() {
        return Err(Error::Schema { path: a.summary.clone(), message: "no scenario rows".into() });
    }
    let tables = presets
        .iter()
        .map(|p| p.apply(&summaries, a.prob, alpha).map(|rows| (p, rows)))
        .collect::<Result<Vec<_>>>()?;
    let dir = a.out.clone().unwrap_or_else(|| a.summary.parent().map(Path::to_path_buf).unwrap_or_default());
    let mut set = OutputSet::create(&dir)?;
    for (preset, rows) in &tables {
        if rows.is_empty() {
            eprintln!("{preset}: no matching scenarios, skipped");
            continue;
        }
        let path = set.path(&format!("{preset}.csv"));
        if let Err(e) = output::write_groups(&path, rows) {
            set.discard();
            return Err(e);
        }
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<bool> {
    let names: Vec<&str> = if a.check == "all" { CHECKS.to_vec() } else { vec![a.check.as_str()] };
    let mut ok = true;
    for name in names {
        let r = run_check(name, a.seed)?;
        match &r.failure {
            None => println!("PASS {} ({} cases) {}", r.name, r.cases, r.detail),
            Some(f) => {
                ok = false;
                println!("FAIL {} ({} cases) {}", r.name, r.cases, f);
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|()| true),
        Command::Report(a) => cmd_report(a).map(|()| true),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) | Error::Toml { .. } | Error::Schema { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
