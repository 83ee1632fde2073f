//! Per-period joint decision protocols.
//!
//! Every protocol starts from the standing solution `d_{t-1}` held by the
//! team. Fully autonomous and sequential teams always implement their
//! members' proposals; liaison and lateral teams assemble two candidates and
//! implement the first one no member vetoes, keeping `d_{t-1}` otherwise.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formation::TeamState;
use crate::landscape::{Landscape, Solution, SubSolution};
use crate::population::{estimate, estimated_utility, Agent, ErrorModel, Population};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinationMode {
    FullyAutonomous,
    Sequential,
    Liaison,
    Lateral,
}

impl CoordinationMode {
    pub const ALL: [CoordinationMode; 4] = [
        CoordinationMode::FullyAutonomous,
        CoordinationMode::Sequential,
        CoordinationMode::Liaison,
        CoordinationMode::Lateral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoordinationMode::FullyAutonomous => "fully_autonomous",
            CoordinationMode::Sequential => "sequential",
            CoordinationMode::Liaison => "liaison",
            CoordinationMode::Lateral => "lateral",
        }
    }

    /// Whether members can veto candidates (and the team can stand still).
    pub fn has_veto(self) -> bool {
        matches!(self, CoordinationMode::Liaison | CoordinationMode::Lateral)
    }
}

impl fmt::Display for CoordinationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoordinationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "autonomous" => Ok(CoordinationMode::FullyAutonomous),
            _ => CoordinationMode::ALL
                .into_iter()
                .find(|m| m.as_str() == s)
                .ok_or_else(|| Error::Config(format!("unknown coordination mode `{s}`"))),
        }
    }
}

/// A candidate joint solution assembled from one sub-proposal per member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSolution {
    pub proposals: Vec<SubSolution>,
    pub solution: Solution,
}

impl CandidateSolution {
    fn assemble(landscape: &Landscape, proposals: Vec<SubSolution>) -> CandidateSolution {
        let solution = landscape.partition().concat(&proposals);
        CandidateSolution { proposals, solution }
    }
}

/// Outcome of one coordination step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub solution: Solution,
    /// For veto protocols: index of the accepted candidate, `None` if both were vetoed.
    pub accepted: Option<usize>,
}

impl Decision {
    fn implemented(solution: Solution) -> Decision {
        Decision { solution, accepted: Some(0) }
    }
}

/// Runs one coordination step for `mode`.
pub fn decide<R: Rng + ?Sized>(
    mode: CoordinationMode,
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Decision {
    match mode {
        CoordinationMode::FullyAutonomous => {
            Decision::implemented(decide_autonomous(team, population, landscape, noise, rng))
        }
        CoordinationMode::Sequential => Decision::implemented(decide_sequential(team, population, landscape, noise, rng)),
        CoordinationMode::Liaison => decide_liaison(team, population, landscape, noise, rng),
        CoordinationMode::Lateral => decide_lateral(team, population, landscape, noise, rng),
    }
}

fn members<'a>(team: &'a TeamState, population: &'a Population) -> impl Iterator<Item = (usize, &'a Agent)> + 'a {
    team.members.iter().enumerate().map(move |(m, &id)| {
        let agent = &population.agents[id];
        debug_assert_eq!(agent.subtask, m, "member {id} does not own subtask {m}");
        (m, agent)
    })
}

/// Best known sub-solution against `residuals`; earlier (lower) sub-solutions
/// win exact ties.
fn best_proposal<R: Rng + ?Sized>(
    agent: &Agent,
    m: usize,
    residuals: Solution,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> SubSolution {
    let mut best = (agent.known()[0], f64::NEG_INFINITY);
    for &sub in agent.known() {
        let eu = estimated_utility(landscape, sub, residuals, m, noise, rng);
        if eu > best.1 {
            best = (sub, eu);
        }
    }
    best.0
}

/// Each member proposes its best sub-solution against the stale residuals.
pub fn decide_autonomous<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Solution {
    let proposals: Vec<SubSolution> = members(team, population)
        .map(|(m, agent)| best_proposal(agent, m, team.standing, landscape, noise, rng))
        .collect();
    landscape.partition().concat(&proposals)
}

/// Members propose in subtask order, each seeing the fresh proposals of the
/// members before it and the stale decisions of those after it.
pub fn decide_sequential<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Solution {
    let partition = landscape.partition();
    members(team, population).fold(team.standing, |residuals, (m, agent)| {
        let choice = best_proposal(agent, m, residuals, landscape, noise, rng);
        partition.with_sub(residuals, m, choice)
    })
}

/// Members nominate their two best-ranked sub-solutions; candidate `j`
/// concatenates everyone's `j`-th nomination.
pub fn decide_liaison<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Decision {
    let candidates = liaison_candidates(team, population, landscape, noise, rng);
    vote(team, &candidates, landscape, noise, rng)
}

/// The two liaison candidates: all first choices, then all second choices.
/// A member knowing a single sub-solution nominates it twice.
pub fn liaison_candidates<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Vec<CandidateSolution> {
    let mut first = Vec::with_capacity(team.members.len());
    let mut second = Vec::with_capacity(team.members.len());
    for (m, agent) in members(team, population) {
        let mut ranked: Vec<(f64, SubSolution)> = agent
            .known()
            .iter()
            .map(|&sub| (estimated_utility(landscape, sub, team.standing, m, noise, rng), sub))
            .collect();
        // Descending estimate; the stable sort keeps lower sub-solutions first on ties.
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        first.push(ranked[0].1);
        second.push(ranked.get(1).unwrap_or(&ranked[0]).1);
    }
    vec![CandidateSolution::assemble(landscape, first), CandidateSolution::assemble(landscape, second)]
}

/// Members bring two sub-solutions drawn at random from what they know;
/// each candidate takes one of the two from every member at random.
pub fn decide_lateral<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Decision {
    let candidates = lateral_candidates(team, population, landscape, rng);
    vote(team, &candidates, landscape, noise, rng)
}

/// The two lateral candidates. Consumes only the sampling draws.
pub fn lateral_candidates<R: Rng + ?Sized>(
    team: &TeamState,
    population: &Population,
    landscape: &Landscape,
    rng: &mut R,
) -> Vec<CandidateSolution> {
    let picks: Vec<[SubSolution; 2]> = members(team, population)
        .map(|(_, agent)| {
            let known = agent.known();
            if known.len() == 1 {
                [known[0], known[0]]
            } else {
                let idx = sample(rng, known.len(), 2);
                [known[idx.index(0)], known[idx.index(1)]]
            }
        })
        .collect();
    (0..2)
        .map(|_| {
            let proposals = picks.iter().map(|pair| pair[rng.gen_range(0..2)]).collect();
            CandidateSolution::assemble(landscape, proposals)
        })
        .collect()
}

/// Candidates are put to the members in order. A member accepts when its
/// estimated utility of the candidate strictly exceeds its utility of the
/// standing solution. The first unanimously accepted candidate wins.
pub fn vote<R: Rng + ?Sized>(
    team: &TeamState,
    candidates: &[CandidateSolution],
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Decision {
    for (j, candidate) in candidates.iter().enumerate() {
        let mut unanimous = true;
        for (m, &baseline) in team.last_utilities.iter().enumerate() {
            if estimate(landscape, candidate.solution, m, noise, rng) <= baseline {
                unanimous = false;
            }
        }
        if unanimous {
            return Decision { solution: candidate.solution, accepted: Some(j) };
        }
    }
    Decision { solution: team.standing, accepted: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{InterdependenceMatrix, Partition};
    use crate::population::utility;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn rng() -> SimRng {
        SimRng::seed_from_u64(99)
    }

    /// N=4, M=2 landscape with every contribution depending on every decision.
    fn dense(seed: u64) -> Landscape {
        let mut r = SimRng::seed_from_u64(seed);
        let matrix = InterdependenceMatrix::from_rows((0..4).map(|_| (0..4).collect()).collect(), 3).unwrap();
        Landscape::generate(matrix, Partition::new(4, 2).unwrap(), &mut r).unwrap()
    }

    fn team_of(known: &[&[u32]], standing: Solution, landscape: &Landscape) -> (TeamState, Population) {
        let agents = known
            .iter()
            .enumerate()
            .map(|(m, subs)| {
                let mut a = Agent::new(m, m, landscape.partition().sub_count(), SubSolution(subs[0]));
                for &s in &subs[1..] {
                    a.learn(SubSolution(s));
                }
                a
            })
            .collect();
        let pop = Population::from_agents(agents, known.len());
        let team = TeamState::new((0..known.len()).collect(), standing, landscape);
        (team, pop)
    }

    #[test]
    fn singleton_knowledge_is_concatenated() {
        let l = dense(1);
        let (team, pop) = team_of(&[&[2], &[1]], Solution(0), &l);
        let expected = Solution(0b01_10);
        assert_eq!(decide_autonomous(&team, &pop, &l, &ErrorModel::normal(0.1).unwrap(), &mut rng()), expected);
        assert_eq!(decide_sequential(&team, &pop, &l, &ErrorModel::normal(0.1).unwrap(), &mut rng()), expected);
    }

    #[test]
    fn autonomous_picks_member_argmax() {
        let l = dense(2);
        let standing = Solution(0b11_00);
        let (team, pop) = team_of(&[&[0], &[0, 1, 2, 3]], standing, &l);
        let best = (0..4u32)
            .max_by(|&a, &b| {
                let ua = utility(&l, l.partition().with_sub(standing, 1, SubSolution(a)), 1);
                let ub = utility(&l, l.partition().with_sub(standing, 1, SubSolution(b)), 1);
                ua.total_cmp(&ub)
            })
            .unwrap();
        let d = decide_autonomous(&team, &pop, &l, &ErrorModel::none(), &mut rng());
        assert_eq!(l.partition().sub_of(d, 1), SubSolution(best));
    }

    #[test]
    fn first_sequential_member_ignores_later_knowledge() {
        let l = dense(3);
        let (team_a, pop_a) = team_of(&[&[0, 1, 3], &[0]], Solution(0b10_01), &l);
        let (team_b, pop_b) = team_of(&[&[0, 1, 3], &[0, 1, 2, 3]], Solution(0b10_01), &l);
        let a = decide_sequential(&team_a, &pop_a, &l, &ErrorModel::none(), &mut rng());
        let b = decide_sequential(&team_b, &pop_b, &l, &ErrorModel::none(), &mut rng());
        assert_eq!(l.partition().sub_of(a, 0), l.partition().sub_of(b, 0));
    }

    #[test]
    fn liaison_falls_back_when_vetoed() {
        let l = dense(4);
        let (argmax, _) = l.global_optimum();
        // Standing on the optimum with K=N-1: every candidate is weakly worse
        // for at least one member unless it is the optimum itself.
        let (team, pop) = team_of(&[&[0, 1, 2, 3], &[0, 1, 2, 3]], argmax, &l);
        let d = decide_liaison(&team, &pop, &l, &ErrorModel::none(), &mut rng());
        if d.accepted.is_none() {
            assert_eq!(d.solution, argmax);
        } else {
            for m in 0..2 {
                assert!(utility(&l, d.solution, m) > team.last_utilities[m]);
            }
        }
    }

    #[test]
    fn lateral_singletons_give_identical_candidates() {
        let l = dense(5);
        let (team, pop) = team_of(&[&[3], &[2]], Solution(0), &l);
        let d = decide_lateral(&team, &pop, &l, &ErrorModel::none(), &mut rng());
        let only = Solution(0b10_11);
        let improves = (0..2).all(|m| utility(&l, only, m) > team.last_utilities[m]);
        assert_eq!(d.solution, if improves { only } else { Solution(0) });
    }

    #[test]
    fn modes_parse_and_print() {
        for mode in CoordinationMode::ALL {
            assert_eq!(mode.as_str().parse::<CoordinationMode>().unwrap(), mode);
        }
        assert_eq!("autonomous".parse::<CoordinationMode>().unwrap(), CoordinationMode::FullyAutonomous);
        assert!("committee".parse::<CoordinationMode>().is_err());
    }
}
