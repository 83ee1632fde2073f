//! Signaling-based team formation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::landscape::{Landscape, Solution};
use crate::population::{estimated_utility, pick_uniform, utility, Agent, ErrorModel, Population};

/// Periods between team re-formations; `None` means the team never re-forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormationSchedule {
    tau: Option<u32>,
}

impl FormationSchedule {
    pub const NEVER: FormationSchedule = FormationSchedule { tau: None };

    pub fn every(tau: u32) -> Result<FormationSchedule> {
        if tau == 0 {
            return Err(Error::Config("tau must be a positive period count or `inf`".into()));
        }
        Ok(FormationSchedule { tau: Some(tau) })
    }

    pub fn tau(&self) -> Option<u32> {
        self.tau
    }

    /// True in period 1 and then every `tau` periods (t = 1, 1+τ, 1+2τ, ...).
    pub fn should_reform(&self, t: u32) -> bool {
        debug_assert!(t >= 1, "periods are numbered from 1");
        match self.tau {
            _ if t == 1 => true,
            None => false,
            Some(tau) => (t - 1).is_multiple_of(tau),
        }
    }
}

impl fmt::Display for FormationSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tau {
            Some(tau) => write!(f, "{tau}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for FormationSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(FormationSchedule::NEVER),
            other => other
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("tau `{other}` is neither a positive integer nor `inf`")))
                .and_then(FormationSchedule::every),
        }
    }
}

/// The current team and the solution it stands on.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamState {
    /// Agent id of the member for each subtask.
    pub members: Vec<usize>,
    /// d_{t-1} at the start of a period.
    pub standing: Solution,
    /// U_m(d_{t-1}) for each subtask.
    pub last_utilities: Vec<f64>,
}

impl TeamState {
    pub fn new(members: Vec<usize>, standing: Solution, landscape: &Landscape) -> TeamState {
        let mut team = TeamState { members, standing, last_utilities: Vec::new() };
        team.refresh_baselines(landscape);
        team
    }

    /// Recomputes the error-free utilities of the standing solution.
    pub fn refresh_baselines(&mut self, landscape: &Landscape) {
        self.last_utilities = (0..self.members.len()).map(|m| utility(landscape, self.standing, m)).collect();
    }

    pub fn is_member(&self, agent: usize) -> bool {
        self.members.contains(&agent)
    }
}

/// Highest estimated utility over the agent's known sub-solutions, each with a
/// fresh error draw, against the stale residuals in `standing`.
pub fn signal<R: Rng + ?Sized>(agent: &Agent, standing: Solution, landscape: &Landscape, noise: &ErrorModel, rng: &mut R) -> f64 {
    agent
        .known()
        .iter()
        .map(|&sub| estimated_utility(landscape, sub, standing, agent.subtask, noise, rng))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Picks the top signaler of every subtask. Signals are drawn in ascending
/// agent id order; exact ties are broken uniformly at random.
pub fn form_team<R: Rng + ?Sized>(
    population: &Population,
    standing: Solution,
    landscape: &Landscape,
    noise: &ErrorModel,
    rng: &mut R,
) -> Vec<usize> {
    let signals: Vec<f64> = population
        .agents
        .iter()
        .map(|a| signal(a, standing, landscape, noise, rng))
        .collect();
    population
        .rosters()
        .iter()
        .enumerate()
        .map(|(m, roster)| {
            assert!(!roster.is_empty(), "subtask {m} has no candidates");
            let best = roster.iter().map(|&id| signals[id]).fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<usize> = roster.iter().copied().filter(|&id| signals[id] == best).collect();
            if top.len() == 1 {
                top[0]
            } else {
                pick_uniform(&top, rng)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{InterdependenceMatrix, Partition, SubSolution};
    use crate::rng::SimRng;
    use rand::SeedableRng;

    #[test]
    fn schedule_infinite() {
        let s = FormationSchedule::NEVER;
        assert!(s.should_reform(1));
        assert!((2..=100).all(|t| !s.should_reform(t)));
    }

    #[test]
    fn schedule_every_period() {
        let s = FormationSchedule::every(1).unwrap();
        assert!((1..=100).all(|t| s.should_reform(t)));
    }

    #[test]
    fn schedule_every_ten() {
        let s = FormationSchedule::every(10).unwrap();
        let reforms: Vec<u32> = (1..=35).filter(|&t| s.should_reform(t)).collect();
        assert_eq!(reforms, vec![1, 11, 21, 31]);
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("inf".parse::<FormationSchedule>().unwrap(), FormationSchedule::NEVER);
        assert_eq!("10".parse::<FormationSchedule>().unwrap().tau(), Some(10));
        assert!("0".parse::<FormationSchedule>().is_err());
        assert!("soon".parse::<FormationSchedule>().is_err());
    }

    /// N=2, M=2, K=0 landscape: c_1 = a[d_1], c_2 = b[d_2].
    fn tiny(a: [f64; 2], b: [f64; 2]) -> Landscape {
        let matrix = InterdependenceMatrix::from_rows(vec![vec![0], vec![1]], 0).unwrap();
        Landscape::from_tables(matrix, Partition::new(2, 2).unwrap(), vec![a.to_vec(), b.to_vec()]).unwrap()
    }

    #[test]
    fn singleton_signal_is_its_estimate() {
        let l = tiny([0.2, 0.6], [0.4, 0.4]);
        let a = Agent::new(0, 0, 2, SubSolution(1));
        let mut rng = SimRng::seed_from_u64(0);
        let s = signal(&a, Solution(0), &l, &ErrorModel::none(), &mut rng);
        assert!((s - 0.5 * (0.6 + 0.4)).abs() < 1e-15);
    }

    #[test]
    fn signal_is_max_of_known() {
        // utilities: sub 0 -> 0.5*(0.8+0.6)=0.7, sub 1 -> 0.5*(0.6+0.6)=0.6
        let l = tiny([0.8, 0.6], [0.6, 0.6]);
        let mut a = Agent::new(0, 0, 2, SubSolution(0));
        a.learn(SubSolution(1));
        let mut rng = SimRng::seed_from_u64(0);
        let s = signal(&a, Solution(0), &l, &ErrorModel::none(), &mut rng);
        assert!((s - 0.7).abs() < 1e-12);
    }

    #[test]
    fn highest_signal_joins() {
        // subtask 0 candidates: agent 0 estimates 0.5, agent 2 estimates 0.9
        let l = tiny([0.2, 1.0], [0.8, 0.8]);
        let agents = vec![
            Agent::new(0, 0, 2, SubSolution(0)),
            Agent::new(1, 1, 2, SubSolution(0)),
            Agent::new(2, 0, 2, SubSolution(1)),
        ];
        let pop = Population::from_agents(agents, 2);
        let mut rng = SimRng::seed_from_u64(0);
        let members = form_team(&pop, Solution(0), &l, &ErrorModel::none(), &mut rng);
        assert_eq!(members, vec![2, 1]);
    }

    #[test]
    fn exact_ties_split_evenly() {
        let l = tiny([0.5, 0.5], [0.5, 0.5]);
        let agents = vec![
            Agent::new(0, 0, 2, SubSolution(0)),
            Agent::new(1, 0, 2, SubSolution(0)),
            Agent::new(2, 1, 2, SubSolution(0)),
        ];
        let pop = Population::from_agents(agents, 2);
        let trials = 10_000;
        let first = (0..trials)
            .filter(|&seed| {
                let mut rng = SimRng::seed_from_u64(seed);
                form_team(&pop, Solution(0), &l, &ErrorModel::none(), &mut rng)[0] == 0
            })
            .count();
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
    }
}
