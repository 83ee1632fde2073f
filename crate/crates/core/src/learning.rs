//! End-of-period learning: outcome updates, memory decay, discovery and
//! forgetting.

use rand::Rng;

use crate::error::{config, Result};
use crate::landscape::SubSolution;
use crate::population::Agent;

/// Shared per-period probability of discovering and of forgetting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningConfig {
    prob: f64,
}

impl LearningConfig {
    pub fn new(prob: f64) -> Result<LearningConfig> {
        if !(0.0..=1.0).contains(&prob) {
            return config(format!("learning probability {prob} outside [0, 1]"));
        }
        Ok(LearningConfig { prob })
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }
}

/// Outcome update for the sub-solution a team member just implemented.
///
/// Discovery side: α += 1 on `u_now >= u_prev`, otherwise β += 1.
/// Forgetting side: λ += 2 on a utility drop and += 1 otherwise (the memory
/// increment for this period is folded in); δ += 1 on a strict improvement.
pub fn update_beliefs_on_outcome(agent: &mut Agent, implemented: SubSolution, u_now: f64, u_prev: f64) {
    let b = agent.beliefs_mut(implemented);
    if u_now >= u_prev {
        b.alpha += 1;
    } else {
        b.beta += 1;
    }
    b.lambda += if u_now < u_prev { 2 } else { 1 };
    if u_now > u_prev {
        b.delta += 1;
    }
}

/// λ += 1 for every known sub-solution except `skip`.
pub fn apply_memory_decay(agent: &mut Agent, skip: Option<SubSolution>) {
    agent.age_known(skip);
}

/// Draws one item with probability proportional to its weight. Weights must
/// be positive and the iterator non-empty and restartable.
fn weighted_pick<I, R>(items: I, rng: &mut R) -> Option<SubSolution>
where
    I: Iterator<Item = (SubSolution, f64)> + Clone,
    R: Rng + ?Sized,
{
    let total: f64 = items.clone().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    let mut last = None;
    for (sub, w) in items {
        if target < w {
            return Some(sub);
        }
        target -= w;
        last = Some(sub);
    }
    last
}

/// With probability ℙ, learns one unknown sub-solution drawn in proportion to
/// its discovery belief. Returns the discovered sub-solution.
pub fn discovery_step<R: Rng + ?Sized>(agent: &mut Agent, config: &LearningConfig, rng: &mut R) -> Option<SubSolution> {
    if !rng.gen_bool(config.prob) {
        return None;
    }
    let pick = weighted_pick(agent.unknown().map(|s| (s, agent.beliefs(s).discovery())), rng)?;
    agent.learn(pick);
    Some(pick)
}

/// With probability ℙ, forgets one known sub-solution drawn in proportion to
/// its forgetting belief. An agent never forgets its last known solution.
pub fn forgetting_step<R: Rng + ?Sized>(agent: &mut Agent, config: &LearningConfig, rng: &mut R) -> Option<SubSolution> {
    if !rng.gen_bool(config.prob) {
        return None;
    }
    if agent.known().len() < 2 {
        return None;
    }
    let pick = weighted_pick(agent.known().iter().map(|&s| (s, agent.beliefs(s).forgetting())), rng)?;
    agent.forget(pick);
    Some(pick)
}

/// What happened to one agent at the end of a period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LearningEvents {
    pub discovered: Option<SubSolution>,
    pub forgotten: Option<SubSolution>,
}

/// Outcome of the period for a team member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub implemented: SubSolution,
    pub u_now: f64,
    pub u_prev: f64,
}

/// Full end-of-period sequence for one agent: outcome update (members that
/// know the implemented sub-solution only), memory decay, discovery, then
/// forgetting.
pub fn end_of_period<R: Rng + ?Sized>(
    agent: &mut Agent,
    outcome: Option<Outcome>,
    config: &LearningConfig,
    rng: &mut R,
) -> LearningEvents {
    let updated = outcome.filter(|o| agent.knows(o.implemented)).map(|o| {
        update_beliefs_on_outcome(agent, o.implemented, o.u_now, o.u_prev);
        o.implemented
    });
    apply_memory_decay(agent, updated);
    let discovered = discovery_step(agent, config, rng);
    let forgotten = forgetting_step(agent, config, rng);
    LearningEvents { discovered, forgotten }
}
