//! Agents, their knowledge and beliefs, and the utility they derive from a
//! joint solution.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{config, Result};
use crate::landscape::{Landscape, Partition, Solution, SubSolution};

/// Beta-style counters behind the discovery belief `p = α/(α+β)` and the
/// forgetting belief `q = λ/(λ+δ)` of one sub-solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Beliefs {
    pub alpha: u32,
    pub beta: u32,
    pub lambda: u32,
    pub delta: u32,
}

impl Default for Beliefs {
    fn default() -> Self {
        Beliefs { alpha: 1, beta: 1, lambda: 1, delta: 1 }
    }
}

impl Beliefs {
    pub fn discovery(&self) -> f64 {
        f64::from(self.alpha) / f64::from(self.alpha + self.beta)
    }

    pub fn forgetting(&self) -> f64 {
        f64::from(self.lambda) / f64::from(self.lambda + self.delta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub subtask: usize,
    /// Known sub-solutions, ascending. Never empty.
    known: Vec<SubSolution>,
    /// Membership flags for `known`, indexed by sub-solution.
    flags: Vec<bool>,
    /// Indexed by sub-solution; kept for unknown solutions too.
    beliefs: Vec<Beliefs>,
    pub last_utility: Option<f64>,
}

impl Agent {
    pub fn new(id: usize, subtask: usize, sub_count: usize, initial: SubSolution) -> Agent {
        assert!((initial.0 as usize) < sub_count, "initial sub-solution out of range");
        let mut flags = vec![false; sub_count];
        flags[initial.0 as usize] = true;
        Agent {
            id,
            subtask,
            known: vec![initial],
            flags,
            beliefs: vec![Beliefs::default(); sub_count],
            last_utility: None,
        }
    }

    pub fn known(&self) -> &[SubSolution] {
        &self.known
    }

    pub fn knows(&self, sub: SubSolution) -> bool {
        self.flags.get(sub.0 as usize).copied().unwrap_or(false)
    }

    pub fn beliefs(&self, sub: SubSolution) -> &Beliefs {
        &self.beliefs[sub.0 as usize]
    }

    pub fn beliefs_mut(&mut self, sub: SubSolution) -> &mut Beliefs {
        &mut self.beliefs[sub.0 as usize]
    }

    pub fn all_beliefs(&self) -> &[Beliefs] {
        &self.beliefs
    }

    pub fn sub_count(&self) -> usize {
        self.beliefs.len()
    }

    /// λ += 1 for every known sub-solution except `skip`.
    pub fn age_known(&mut self, skip: Option<SubSolution>) {
        for &sub in &self.known {
            if Some(sub) != skip {
                self.beliefs[sub.0 as usize].lambda += 1;
            }
        }
    }

    /// Sub-solutions the agent does not currently know, ascending.
    pub fn unknown(&self) -> impl Iterator<Item = SubSolution> + Clone + '_ {
        (0..self.beliefs.len() as u32).map(SubSolution).filter(|s| !self.knows(*s))
    }

    /// Returns false if already known.
    pub fn learn(&mut self, sub: SubSolution) -> bool {
        match self.known.binary_search(&sub) {
            Ok(_) => false,
            Err(pos) => {
                self.known.insert(pos, sub);
                self.flags[sub.0 as usize] = true;
                true
            }
        }
    }

    /// Removes `sub` unless it is the last known solution. Beliefs are kept.
    pub fn forget(&mut self, sub: SubSolution) -> bool {
        if self.known.len() <= 1 {
            return false;
        }
        match self.known.binary_search(&sub) {
            Ok(pos) => {
                self.known.remove(pos);
                self.flags[sub.0 as usize] = false;
                true
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub agents: Vec<Agent>,
    rosters: Vec<Vec<usize>>,
}

impl Population {
    /// Assigns each agent a uniformly random subtask, redrawing the whole
    /// assignment until no subtask is empty, then endows each agent with one
    /// uniformly random sub-solution.
    pub fn init<R: Rng + ?Sized>(p: usize, partition: &Partition, rng: &mut R) -> Result<Population> {
        let m = partition.subtasks();
        if p < m {
            return config(format!("p_agents = {p} must be at least m_subtasks = {m}"));
        }
        let assignment = loop {
            let draw: Vec<usize> = (0..p).map(|_| rng.gen_range(0..m)).collect();
            let mut covered = vec![false; m];
            for &s in &draw {
                covered[s] = true;
            }
            if covered.iter().all(|&c| c) {
                break draw;
            }
        };
        let sub_count = partition.sub_count();
        let agents = assignment
            .into_iter()
            .enumerate()
            .map(|(id, subtask)| {
                let initial = SubSolution(rng.gen_range(0..sub_count as u32));
                Agent::new(id, subtask, sub_count, initial)
            })
            .collect();
        Ok(Population::from_agents(agents, m))
    }

    /// Wraps explicitly constructed agents. Agent ids must equal their positions.
    pub fn from_agents(agents: Vec<Agent>, subtasks: usize) -> Population {
        let mut rosters = vec![Vec::new(); subtasks];
        for (pos, agent) in agents.iter().enumerate() {
            assert_eq!(agent.id, pos, "agent ids must match their positions");
            rosters[agent.subtask].push(agent.id);
        }
        Population { agents, rosters }
    }

    pub fn roster(&self, m: usize) -> &[usize] {
        &self.rosters[m]
    }

    pub fn rosters(&self) -> &[Vec<usize>] {
        &self.rosters
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Utility of the member owning subtask `m` under `solution`: the mean of
/// the own subtask performance and the average residual subtask performance.
/// With a single subtask there are no residuals and utility is the own
/// subtask performance.
#[inline]
pub fn utility(landscape: &Landscape, solution: Solution, m: usize) -> f64 {
    let perf = landscape.subtask_performances(solution);
    let count = perf.len();
    if count == 1 {
        return perf[0];
    }
    let own = perf[m];
    let residual = (perf.iter().sum::<f64>() - own) / (count - 1) as f64;
    0.5 * (own + residual)
}

/// Multiplicative estimation error `e` in `EU = U · (1 + e)`.
#[derive(Debug, Clone, Copy)]
pub enum ErrorModel {
    /// Fresh `e ~ N(0, sd)` per evaluation.
    Normal(Normal<f64>),
    /// Fixed `e`, still consuming one draw per evaluation so stream
    /// positions match the stochastic case.
    Fixed(f64),
}

impl ErrorModel {
    pub fn normal(sd: f64) -> Result<ErrorModel> {
        Normal::new(0.0, sd)
            .map(ErrorModel::Normal)
            .map_err(|e| crate::Error::Config(format!("error_sd = {sd}: {e}")))
    }

    pub fn none() -> ErrorModel {
        ErrorModel::Fixed(0.0)
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorModel::Normal(dist) => dist.sample(rng),
            ErrorModel::Fixed(e) => {
                let _: f64 = rng.gen();
                *e
            }
        }
    }
}

/// Estimated utility of putting `own` in subtask `m` while every other
/// subtask keeps its value in `residuals` (the stale previous-period solution).
#[inline]
pub fn estimated_utility<R: Rng + ?Sized>(
    landscape: &Landscape,
    own: SubSolution,
    residuals: Solution,
    m: usize,
    noise: &ErrorModel,
    rng: &mut R,
) -> f64 {
    let candidate = landscape.partition().with_sub(residuals, m, own);
    estimate(landscape, candidate, m, noise, rng)
}

/// Estimated utility of a complete candidate solution for subtask `m`.
#[inline]
pub fn estimate<R: Rng + ?Sized>(landscape: &Landscape, candidate: Solution, m: usize, noise: &ErrorModel, rng: &mut R) -> f64 {
    utility(landscape, candidate, m) * (1.0 + noise.draw(rng))
}

/// Uniform pick used where the model breaks ties at random.
pub fn pick_uniform<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    *items.choose(rng).expect("pick from an empty slice")
}
