//! Scenario grid, the per-period model loop and the seeded round runner.
//!
//! A round realizes a fresh landscape, population and initial solution from
//! seeds derived from `(master_seed, scenario id, round)`, then for each
//! period: re-forms the team when the schedule says so, runs one coordination
//! step, realizes utilities and lets every agent learn. Rounds are
//! independent, so a scenario's rounds run on a worker pool and are reduced
//! in round-index order; the result does not depend on the worker count.

use rand::Rng;
use rayon::prelude::*;

use crate::coordination::{decide, CoordinationMode};
use crate::error::{config, Error, Result};
use crate::formation::{form_team, FormationSchedule, TeamState};
use crate::landscape::{InterdependenceMatrix, Landscape, Partition, Solution, Structure};
use crate::learning::{end_of_period, LearningConfig, Outcome};
use crate::population::{utility, ErrorModel, Population};
use crate::rng::{fnv1a, round_seed, substream, Phase};

/// Parameters shared by every scenario of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub m_subtasks: usize,
    pub p_agents: usize,
    pub periods: u32,
    pub rounds: u32,
    pub master_seed: u64,
    pub error_sd: f64,
}

/// Rounds per scenario used unless full scale is requested.
pub const DESK_ROUNDS: u32 = 300;
pub const PAPER_ROUNDS: u32 = 1500;

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 12,
            m_subtasks: 3,
            p_agents: 30,
            periods: 100,
            rounds: DESK_ROUNDS,
            master_seed: 42,
            error_sd: 0.1,
        }
    }
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub mode: CoordinationMode,
    pub k: usize,
    pub structure: Structure,
    pub tau: FormationSchedule,
    pub prob: f64,
}

impl ScenarioConfig {
    /// Stable identifier built from the grid axes.
    pub fn id(&self) -> String {
        format!("{}-k{}-{}-tau{}-p{}", self.mode, self.k, self.structure, self.tau, self.prob)
    }

    fn seed_key(&self) -> u64 {
        fnv1a(self.id().as_bytes())
    }

    /// Checks every constraint before anything runs.
    pub fn validate(&self) -> Result<()> {
        Simulation::new(self).map(|_| ())
    }
}

/// Values for each grid axis; scenarios are their cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub modes: Vec<CoordinationMode>,
    pub ks: Vec<usize>,
    pub structures: Vec<Structure>,
    pub taus: Vec<FormationSchedule>,
    pub probs: Vec<f64>,
}

impl Default for Grid {
    /// 4 modes × K ∈ {3, 5} × 6 structures × τ ∈ {∞, 10, 1} × ℙ ∈ {0, 0.1, …, 1}.
    fn default() -> Self {
        Grid {
            modes: CoordinationMode::ALL.to_vec(),
            ks: vec![3, 5],
            structures: Structure::ALL.to_vec(),
            taus: vec![
                FormationSchedule::NEVER,
                FormationSchedule::every(10).expect("positive"),
                FormationSchedule::every(1).expect("positive"),
            ],
            probs: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        self.modes.len() * self.ks.len() * self.structures.len() * self.taus.len() * self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scenarios ordered mode → K → structure → τ → ℙ.
    pub fn enumerate(&self, params: &ModelParams) -> Vec<ScenarioConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &mode in &self.modes {
            for &k in &self.ks {
                for &structure in &self.structures {
                    for &tau in &self.taus {
                        for &prob in &self.probs {
                            out.push(ScenarioConfig { params: params.clone(), mode, k, structure, tau, prob });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Shorthand for the default grid with the given shared parameters.
pub fn enumerate_scenarios(grid: &Grid, params: &ModelParams) -> Vec<ScenarioConfig> {
    grid.enumerate(params)
}

/// One (round, period) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub round: u32,
    pub period: u32,
    pub performance: f64,
    /// Performance over the round's global maximum, in (0, 1].
    pub normalized: f64,
    pub members: Vec<usize>,
    pub reformed: bool,
}

/// Everything one round emits.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub scenario_id: String,
    pub round: u32,
    pub global_max: f64,
    pub records: Vec<PeriodRecord>,
}

impl RoundTrace {
    pub fn normalized_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.normalized).collect()
    }
}

/// A validated scenario ready to run rounds.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    config: &'a ScenarioConfig,
    partition: Partition,
    noise: ErrorModel,
    learning: LearningConfig,
    seed_key: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Result<Simulation<'a>> {
        let p = &config.params;
        let partition = Partition::new(p.n, p.m_subtasks)?;
        if p.p_agents < p.m_subtasks {
            return config_err(format!("p_agents = {} must be at least m_subtasks = {}", p.p_agents, p.m_subtasks));
        }
        if p.periods == 0 {
            return config_err("periods must be at least 1".into());
        }
        if p.rounds == 0 {
            return config_err("rounds must be at least 1".into());
        }
        if !p.error_sd.is_finite() || p.error_sd < 0.0 {
            return config_err(format!("error_sd = {} must be finite and non-negative", p.error_sd));
        }
        // Surfaces structure/k errors (block divisibility, k < n) up front.
        InterdependenceMatrix::build(config.structure, p.n, config.k, &mut rand::rngs::mock::StepRng::new(0, 1))?;
        Ok(Simulation {
            config,
            partition,
            noise: ErrorModel::normal(p.error_sd)?,
            learning: LearningConfig::new(config.prob)?,
            seed_key: config.seed_key(),
        })
    }

    /// Replaces the estimation error model (tests force errors to fixed values).
    pub fn with_noise(mut self, noise: ErrorModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn run_round(&self, round: u32) -> Result<RoundTrace> {
        let cfg = self.config;
        let p = &cfg.params;
        let seed = round_seed(p.master_seed, self.seed_key, u64::from(round));

        let mut rng = substream(seed, Phase::Landscape);
        let matrix = InterdependenceMatrix::build(cfg.structure, p.n, cfg.k, &mut rng)?;
        let landscape = Landscape::generate(matrix, self.partition, &mut rng)?;

        let mut population = Population::init(p.p_agents, &self.partition, &mut substream(seed, Phase::Population))?;
        let initial = Solution(substream(seed, Phase::Initial).gen_range(0..self.partition.solution_count() as u32));

        let mut formation_rng = substream(seed, Phase::Formation);
        let mut coordination_rng = substream(seed, Phase::Coordination);
        let mut learning_rng = substream(seed, Phase::Learning);

        let m = self.partition.subtasks();
        let mut team = TeamState::new(Vec::new(), initial, &landscape);
        let mut records = Vec::with_capacity(p.periods as usize);

        for t in 1..=p.periods {
            let reformed = cfg.tau.should_reform(t);
            if reformed {
                let members = form_team(&population, team.standing, &landscape, &self.noise, &mut formation_rng);
                team = TeamState::new(members, team.standing, &landscape);
            }

            let decision = decide(cfg.mode, &team, &population, &landscape, &self.noise, &mut coordination_rng);
            let solution = decision.solution;
            let realized: Vec<f64> = (0..m).map(|sub| utility(&landscape, solution, sub)).collect();

            for agent in population.agents.iter_mut() {
                let sub = agent.subtask;
                let outcome = (team.members[sub] == agent.id).then(|| Outcome {
                    implemented: self.partition.sub_of(solution, sub),
                    u_now: realized[sub],
                    u_prev: team.last_utilities[sub],
                });
                match outcome {
                    Some(o) => agent.last_utility = Some(o.u_now),
                    None if agent.last_utility.is_some() => agent.last_utility = Some(0.0),
                    None => {}
                }
                end_of_period(agent, outcome, &self.learning, &mut learning_rng);
            }

            team.standing = solution;
            team.last_utilities = realized;

            let performance = landscape.performance(solution);
            records.push(PeriodRecord {
                round,
                period: t,
                performance,
                normalized: performance / landscape.global_max(),
                members: team.members.clone(),
                reformed,
            });
        }

        Ok(RoundTrace { scenario_id: cfg.id(), round, global_max: landscape.global_max(), records })
    }
}

fn config_err<T>(msg: String) -> Result<T> {
    config(msg)
}

/// Aggregated output of all rounds of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    /// C̄_t: mean normalized performance per period across rounds.
    pub per_period: Vec<f64>,
    /// Per-round mean of the normalized series.
    pub round_mean: Vec<f64>,
    /// Per-round normalized performance in the last period.
    pub round_final: Vec<f64>,
}

impl ScenarioResult {
    /// Reduces round series given in round-index order.
    pub fn from_series(config: ScenarioConfig, series: &[Vec<f64>]) -> ScenarioResult {
        let periods = config.params.periods as usize;
        let mut per_period = vec![0.0; periods];
        for s in series {
            for (acc, v) in per_period.iter_mut().zip(s) {
                *acc += v;
            }
        }
        let rounds = series.len() as f64;
        per_period.iter_mut().for_each(|v| *v /= rounds);
        let round_mean = series.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect();
        let round_final = series.iter().map(|s| *s.last().expect("at least one period")).collect();
        ScenarioResult { config, per_period, round_mean, round_final }
    }
}

/// Runs scenarios on a fixed-size worker pool.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Runner> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Runner { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Runs every round of `config` and reduces them in round-index order.
    pub fn run_scenario(&self, config: &ScenarioConfig) -> Result<ScenarioResult> {
        let sim = Simulation::new(config)?;
        let series: Vec<Vec<f64>> = self.pool.install(|| {
            (0..config.params.rounds)
                .into_par_iter()
                .map(|round| sim.run_round(round).map(|trace| trace.normalized_series()))
                .collect::<Result<_>>()
        })?;
        Ok(ScenarioResult::from_series(config.clone(), &series))
    }

    /// Runs a list of scenarios, calling `progress(done, total)` after each.
    pub fn run_all(
        &self,
        configs: &[ScenarioConfig],
        mut progress: impl FnMut(usize, usize),
    ) -> Result<Vec<ScenarioResult>> {
        for c in configs {
            c.validate()?;
        }
        let mut out = Vec::with_capacity(configs.len());
        for (i, c) in configs.iter().enumerate() {
            out.push(self.run_scenario(c)?);
            progress(i + 1, configs.len());
        }
        Ok(out)
    }
}

/// Convenience wrapper: one scenario on the default pool size.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    Runner::new(default_workers())?.run_scenario(config)
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
