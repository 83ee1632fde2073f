//! CSV schemas, run manifests and the output directory lifecycle.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::engine::ScenarioResult;
use crate::error::{Error, Result};
use crate::metrics::{GroupRow, ScenarioSummary};

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "scenario_id",
    "mode",
    "k",
    "structure",
    "tau",
    "prob",
    "rounds",
    "mean_perf",
    "mean_ci",
    "final_perf",
    "final_ci",
];
pub const PERIODS_COLUMNS: [&str; 3] = ["scenario_id", "period", "mean_norm_perf"];
pub const ROUNDS_COLUMNS: [&str; 4] = ["scenario_id", "round", "mean_perf", "final_perf"];

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TEAMSIM_OUT";

/// Formats a value with 17 significant digits, enough to read back the
/// identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (16 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_summary(path: &Path, summaries: &[ScenarioSummary]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for s in summaries {
        w.write_record([
            s.scenario_id.clone(),
            s.mode.to_string(),
            s.k.to_string(),
            s.structure.to_string(),
            s.tau.to_string(),
            s.prob.to_string(),
            s.rounds.to_string(),
            fmt_f64(s.mean_perf),
            fmt_opt(s.mean_ci),
            fmt_f64(s.final_perf),
            fmt_opt(s.final_ci),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_periods(path: &Path, results: &[ScenarioResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(PERIODS_COLUMNS)?;
    for r in results {
        let id = r.config.id();
        for (t, v) in r.per_period.iter().enumerate() {
            w.write_record([id.clone(), (t + 1).to_string(), fmt_f64(*v)])?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_rounds(path: &Path, results: &[ScenarioResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(ROUNDS_COLUMNS)?;
    for r in results {
        let id = r.config.id();
        for (round, (m, f)) in r.round_mean.iter().zip(&r.round_final).enumerate() {
            w.write_record([id.clone(), round.to_string(), fmt_f64(*m), fmt_f64(*f)])?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Writes a grouped view; collapsed axes are left out of the columns.
pub fn write_groups(path: &Path, rows: &[GroupRow]) -> Result<()> {
    let mut w = writer(path)?;
    let first = rows.first().map(|r| r.key).unwrap_or_default();
    let mut header = Vec::new();
    if first.tau.is_some() {
        header.push("tau");
    }
    if first.mode.is_some() {
        header.push("mode");
    }
    if first.structure.is_some() {
        header.push("structure");
    }
    if first.k.is_some() {
        header.push("k");
    }
    if first.prob.is_some() {
        header.push("prob");
    }
    header.extend(["scenarios", "rounds", "mean_perf", "mean_ci", "final_perf", "final_ci"]);
    w.write_record(&header)?;
    for r in rows {
        let k = r.key;
        let mut rec: Vec<String> = Vec::new();
        rec.extend(k.tau.map(|v| v.to_string()));
        rec.extend(k.mode.map(|v| v.to_string()));
        rec.extend(k.structure.map(|v| v.to_string()));
        rec.extend(k.k.map(|v| v.to_string()));
        rec.extend(k.prob.map(|v| v.to_string()));
        rec.extend([
            r.scenarios.to_string(),
            r.rounds.to_string(),
            fmt_f64(r.mean_perf),
            fmt_opt(r.mean_ci),
            fmt_f64(r.final_perf),
            fmt_opt(r.final_ci),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads `summary.csv`; moments are rebuilt from the intervals at `alpha`,
/// which must be the level the file was written with.
pub fn read_summary(path: &Path, alpha: f64) -> Result<Vec<ScenarioSummary>> {
    let schema = |message: String| Error::Schema { path: path.into(), message };
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let mut index = [0usize; SUMMARY_COLUMNS.len()];
    for (slot, name) in index.iter_mut().zip(SUMMARY_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema(format!("missing column `{name}`")))?;
    }
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(index[c]).unwrap_or("");
        let bad = |c: usize| schema(format!("row {}: bad value `{}` in column `{}`", row + 1, field(c), SUMMARY_COLUMNS[c]));
        let num = |c: usize| field(c).parse::<f64>().map_err(|_| bad(c));
        let opt = |c: usize| if field(c).is_empty() { Ok(None) } else { num(c).map(Some) };
        out.push(ScenarioSummary::from_columns(
            field(0).to_string(),
            field(1).parse().map_err(|_| bad(1))?,
            field(2).parse().map_err(|_| bad(2))?,
            field(3).parse().map_err(|_| bad(3))?,
            field(4).parse().map_err(|_| bad(4))?,
            num(5)?,
            field(6).parse().map_err(|_| bad(6))?,
            (num(7)?, opt(8)?),
            (num(9)?, opt(10)?),
            alpha,
        )?);
    }
    Ok(out)
}

/// Provenance written next to every output set. Feeding the manifest back
/// as a config file reproduces the CSVs byte for byte.
pub fn manifest_text(cfg: &RunConfig, seconds: f64, outputs: &[PathBuf]) -> String {
    let mut text = cfg.to_toml();
    text += "\n[run]\n";
    text += &format!("version = \"{}\"\n", env!("CARGO_PKG_VERSION"));
    text += &format!("scenarios = {}\n", cfg.grid.len());
    text += &format!("wall_clock_seconds = {seconds:.3}\n");
    let files: Vec<String> = outputs.iter().map(|p| format!("{:?}", p.display().to_string())).collect();
    text += &format!("outputs = [{}]\n", files.join(", "));
    text
}

/// Files written into an output directory, removed again if the run fails.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<OutputSet> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(OutputSet { dir: dir.into(), created_dir, files: Vec::new() })
    }

    /// Registers `name` inside the directory and returns its full path.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// Deletes everything registered, and the directory if this set made it.
    pub fn discard(self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.9410, 0.1, 1.0 / 3.0, 0.7617, 1.0, 1e-7, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "0.50000000000000000");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000");
    }
}
