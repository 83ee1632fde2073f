//! Run configuration: defaults, an optional TOML file with dotted keys
//! (`grid.k = [3, 5]`), and command-line overrides, applied in that order.

use std::path::Path;

use serde::Deserialize;

use crate::coordination::CoordinationMode;
use crate::engine::{default_workers, Grid, ModelParams, ScenarioConfig, PAPER_ROUNDS};
use crate::error::{config, Error, Result};
use crate::formation::FormationSchedule;
use crate::landscape::Structure;
use crate::metrics::DEFAULT_ALPHA;

/// Everything a `run` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub workers: usize,
    pub alpha: f64,
    pub rounds_csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            grid: Grid::default(),
            workers: default_workers(),
            alpha: DEFAULT_ALPHA,
            rounds_csv: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TauValue {
    Every(u32),
    Named(String),
}

impl TauValue {
    fn schedule(&self) -> Result<FormationSchedule> {
        match self {
            TauValue::Every(t) => FormationSchedule::every(*t),
            TauValue::Named(s) => s.parse(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    mode: Option<Vec<String>>,
    k: Option<Vec<usize>>,
    structure: Option<Vec<String>>,
    tau: Option<Vec<TauValue>>,
    prob: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    m_subtasks: Option<usize>,
    p_agents: Option<usize>,
    periods: Option<u32>,
    rounds: Option<u32>,
    seed: Option<u64>,
    error_sd: Option<f64>,
    workers: Option<usize>,
    alpha: Option<f64>,
    rounds_csv: Option<bool>,
    grid: Option<GridFile>,
    /// Run metadata written into manifests; not configuration.
    #[allow(dead_code)]
    run: Option<toml::Value>,
}

/// Command-line values that replace file or default values when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub default_grid: bool,
    pub paper_scale: bool,
    pub rounds: Option<u32>,
    pub periods: Option<u32>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub error_sd: Option<f64>,
    pub alpha: Option<f64>,
    pub rounds_csv: bool,
    pub modes: Option<Vec<CoordinationMode>>,
    pub ks: Option<Vec<usize>>,
    pub structures: Option<Vec<Structure>>,
    pub taus: Option<Vec<FormationSchedule>>,
    pub probs: Option<Vec<f64>>,
}

fn parse_all<T: std::str::FromStr<Err = Error>>(values: &[String]) -> Result<Vec<T>> {
    values.iter().map(|v| v.parse()).collect()
}

impl RunConfig {
    /// Defaults, then `path` if given, then `overrides`; validated.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
            cfg.apply_toml(&text).map_err(|e| match e {
                Error::Toml { source, .. } => Error::Toml { path: path.into(), source },
                other => other,
            })?;
        }
        cfg.apply_overrides(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies the keys present in a TOML document.
    pub fn apply_toml(&mut self, text: &str) -> Result<()> {
        let file: ConfigFile = toml::from_str(text).map_err(|source| Error::Toml { path: "<config>".into(), source })?;
        let p = &mut self.params;
        p.n = file.n.unwrap_or(p.n);
        p.m_subtasks = file.m_subtasks.unwrap_or(p.m_subtasks);
        p.p_agents = file.p_agents.unwrap_or(p.p_agents);
        p.periods = file.periods.unwrap_or(p.periods);
        p.rounds = file.rounds.unwrap_or(p.rounds);
        p.master_seed = file.seed.unwrap_or(p.master_seed);
        p.error_sd = file.error_sd.unwrap_or(p.error_sd);
        self.workers = file.workers.unwrap_or(self.workers);
        self.alpha = file.alpha.unwrap_or(self.alpha);
        self.rounds_csv = file.rounds_csv.unwrap_or(self.rounds_csv);
        if let Some(g) = file.grid {
            if let Some(v) = g.mode {
                self.grid.modes = parse_all(&v)?;
            }
            if let Some(v) = g.k {
                self.grid.ks = v;
            }
            if let Some(v) = g.structure {
                self.grid.structures = parse_all(&v)?;
            }
            if let Some(v) = g.tau {
                self.grid.taus = v.iter().map(TauValue::schedule).collect::<Result<_>>()?;
            }
            if let Some(v) = g.prob {
                self.grid.probs = v;
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if o.default_grid {
            self.grid = Grid::default();
        }
        if o.paper_scale {
            self.params.rounds = PAPER_ROUNDS;
        }
        let p = &mut self.params;
        p.rounds = o.rounds.unwrap_or(p.rounds);
        p.periods = o.periods.unwrap_or(p.periods);
        p.master_seed = o.seed.unwrap_or(p.master_seed);
        p.error_sd = o.error_sd.unwrap_or(p.error_sd);
        self.workers = o.workers.unwrap_or(self.workers);
        self.alpha = o.alpha.unwrap_or(self.alpha);
        self.rounds_csv |= o.rounds_csv;
        let g = &mut self.grid;
        if let Some(v) = &o.modes {
            g.modes = v.clone();
        }
        if let Some(v) = &o.ks {
            g.ks = v.clone();
        }
        if let Some(v) = &o.structures {
            g.structures = v.clone();
        }
        if let Some(v) = &o.taus {
            g.taus = v.clone();
        }
        if let Some(v) = &o.probs {
            g.probs = v.clone();
        }
    }

    /// Checks every scenario of the grid before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return config("workers must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return config(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        let g = &self.grid;
        for (name, len) in [
            ("grid.mode", g.modes.len()),
            ("grid.k", g.ks.len()),
            ("grid.structure", g.structures.len()),
            ("grid.tau", g.taus.len()),
            ("grid.prob", g.probs.len()),
        ] {
            if len == 0 {
                return config(format!("{name} must list at least one value"));
            }
        }
        for s in self.scenarios() {
            s.validate()?;
        }
        let mut ids: Vec<String> = self.scenarios().iter().map(ScenarioConfig::id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return config(format!("grid lists scenario {} more than once", w[0]));
        }
        Ok(())
    }

    pub fn scenarios(&self) -> Vec<ScenarioConfig> {
        self.grid.enumerate(&self.params)
    }

    /// The configuration as a TOML document that [`RunConfig::apply_toml`]
    /// reads back to an equal value.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let list = |items: Vec<String>| format!("[{}]", items.join(", "));
        let g = &self.grid;
        let mut out = String::new();
        out += &format!("n = {}\n", p.n);
        out += &format!("m_subtasks = {}\n", p.m_subtasks);
        out += &format!("p_agents = {}\n", p.p_agents);
        out += &format!("periods = {}\n", p.periods);
        out += &format!("rounds = {}\n", p.rounds);
        out += &format!("seed = {}\n", p.master_seed);
        out += &format!("error_sd = {:?}\n", p.error_sd);
        out += &format!("workers = {}\n", self.workers);
        out += &format!("alpha = {:?}\n", self.alpha);
        out += &format!("rounds_csv = {}\n", self.rounds_csv);
        out += &format!("grid.mode = {}\n", list(g.modes.iter().map(|m| format!("\"{m}\"")).collect()));
        out += &format!("grid.k = {}\n", list(g.ks.iter().map(|k| k.to_string()).collect()));
        out += &format!("grid.structure = {}\n", list(g.structures.iter().map(|s| format!("\"{s}\"")).collect()));
        out += &format!(
            "grid.tau = {}\n",
            list(g.taus.iter().map(|t| t.tau().map_or("\"inf\"".to_string(), |v| v.to_string())).collect())
        );
        out += &format!("grid.prob = {}\n", list(g.probs.iter().map(|v| format!("{v:?}")).collect()));
        out
    }
}
