//! Brute-force verification checks. Each check rebuilds a quantity the
//! simulator computes from an independent, exhaustive or closed-form route
//! and reports the first counterexample it finds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::coordination::{
    decide_autonomous, decide_lateral, decide_liaison, decide_sequential, lateral_candidates, liaison_candidates,
    CandidateSolution, CoordinationMode, Decision,
};
use crate::engine::{Grid, ModelParams, Runner};
use crate::error::{Error, Result};
use crate::formation::{form_team, FormationSchedule, TeamState};
use crate::landscape::{InterdependenceMatrix, Landscape, Partition, Solution, Structure, SubSolution};
use crate::learning::{discovery_step, forgetting_step, update_beliefs_on_outcome, LearningConfig};
use crate::population::{utility, Agent, Beliefs, ErrorModel, Population};
use crate::rng::{combine, SimRng};

pub const CHECKS: [&str; 8] = [
    "block-decomposability",
    "k0-single-peak",
    "ruggedness-trend",
    "argmax-equivalence",
    "veto-fallback",
    "serial-parallel",
    "sampling-frequencies",
    "belief-algebra",
];

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    /// First counterexample, if any.
    pub failure: Option<String>,
    /// One-line summary of what was measured.
    pub detail: String,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs the check called `name`.
pub fn run_check(name: &str, seed: u64) -> Result<OracleReport> {
    match name {
        "block-decomposability" => block_decomposability(seed, 100),
        "k0-single-peak" => k0_single_peak(seed, 100),
        "ruggedness-trend" => ruggedness_trend(seed, 100),
        "argmax-equivalence" => argmax_equivalence(seed, 1000),
        "veto-fallback" => veto_fallback(seed, 1000),
        "serial-parallel" => serial_parallel(seed, 4),
        "sampling-frequencies" => sampling_frequencies(seed, 10_000),
        "belief-algebra" => Ok(belief_algebra()),
        _ => Err(Error::Usage(format!("unknown check `{name}`; available checks: {}", CHECKS.join(", ")))),
    }
}

fn case_rng(seed: u64, case: usize) -> SimRng {
    SimRng::seed_from_u64(combine(&[seed, case as u64]))
}

fn report(name: &'static str, cases: usize, failure: Option<String>, detail: String) -> OracleReport {
    OracleReport { name, cases, failure, detail }
}

fn landscape(structure: Structure, n: usize, m: usize, k: usize, rng: &mut SimRng) -> Result<Landscape> {
    let matrix = InterdependenceMatrix::build(structure, n, k, rng)?;
    Landscape::generate(matrix, Partition::new(n, m)?, rng)
}

/// Block K=3 on N=12: the global optimum is the sum of independently
/// maximized 4-bit blocks.
pub fn block_decomposability(seed: u64, cases: usize) -> Result<OracleReport> {
    let (n, k) = (12, 3);
    let size = k + 1;
    for case in 0..cases {
        let mut rng = case_rng(seed, case);
        let l = landscape(Structure::Block, n, 3, k, &mut rng)?;
        let mut total = 0.0;
        let mut optimum = 0u32;
        for block in 0..n / size {
            let mut best = (f64::NEG_INFINITY, 0u32);
            for pattern in 0..1u32 << size {
                let sol = Solution(pattern << (block * size));
                let mut sum = 0.0;
                for c in block * size..(block + 1) * size {
                    sum += l.contribution(sol, c)?;
                }
                if sum > best.0 {
                    best = (sum, pattern);
                }
            }
            total += best.0;
            optimum |= best.1 << (block * size);
        }
        let expected = total / n as f64;
        let (argmax, max) = l.global_optimum();
        if (expected - max).abs() > 1e-12 || (l.evaluate(Solution(optimum)) - max).abs() > 1e-12 {
            return Ok(report(
                "block-decomposability",
                cases,
                Some(format!(
                    "case {case}: per-block optimum {expected} at {:#014b}, enumeration {max} at {:#014b}",
                    optimum, argmax.0
                )),
                String::new(),
            ));
        }
    }
    Ok(report("block-decomposability", cases, None, format!("{cases} block landscapes match the per-block optimum")))
}

/// K=0: exactly one local optimum, at the bitwise best values.
pub fn k0_single_peak(seed: u64, cases: usize) -> Result<OracleReport> {
    for case in 0..cases {
        let mut rng = case_rng(seed, case);
        let l = landscape(Structure::Random, 12, 3, 0, &mut rng)?;
        let peaks = l.local_optima_count();
        let mut best = 0u32;
        for (c, table) in l.tables().iter().enumerate() {
            if table[1] > table[0] {
                best |= 1 << c;
            }
        }
        if peaks != 1 || l.global_optimum().0 != Solution(best) {
            return Ok(report(
                "k0-single-peak",
                cases,
                Some(format!("case {case}: {peaks} local optima, optimum {:?} vs bitwise {best}", l.global_optimum().0)),
                String::new(),
            ));
        }
    }
    Ok(report("k0-single-peak", cases, None, format!("{cases} K=0 landscapes are single-peaked")))
}

/// Values of K used by the ruggedness check.
pub const RUGGEDNESS_KS: [usize; 7] = [0, 1, 2, 3, 5, 7, 11];

/// Mean number of local optima per K over `cases` random-structure landscapes.
pub fn mean_local_optima(seed: u64, cases: usize) -> Result<Vec<(usize, f64)>> {
    RUGGEDNESS_KS
        .iter()
        .map(|&k| {
            let mut sum = 0usize;
            for case in 0..cases {
                let mut rng = case_rng(combine(&[seed, k as u64]), case);
                sum += landscape(Structure::Random, 12, 3, k, &mut rng)?.local_optima_count();
            }
            Ok((k, sum as f64 / cases as f64))
        })
        .collect()
}

/// Mean local-optima count does not decrease with K.
pub fn ruggedness_trend(seed: u64, cases: usize) -> Result<OracleReport> {
    let means = mean_local_optima(seed, cases)?;
    let detail = means.iter().map(|(k, m)| format!("K={k}:{m:.1}")).collect::<Vec<_>>().join(" ");
    let failure = means
        .windows(2)
        .find(|w| w[1].1 < w[0].1)
        .map(|w| format!("mean local optima fall from {:.2} at K={} to {:.2} at K={}", w[0].1, w[0].0, w[1].1, w[1].0));
    Ok(report("ruggedness-trend", cases * RUGGEDNESS_KS.len(), failure, detail))
}

/// Random N=4, M=2 instance: landscape, two members with random known sets,
/// and a standing solution.
pub struct SmallInstance {
    pub landscape: Landscape,
    pub population: Population,
    pub team: TeamState,
}

pub fn small_instance(rng: &mut SimRng) -> Result<SmallInstance> {
    let k = rng.gen_range(0..4);
    let l = landscape(Structure::Random, 4, 2, k, rng)?;
    let agents = (0..2)
        .map(|m| {
            let mut subs: Vec<u32> = (0..4).collect();
            subs.shuffle(rng);
            let count = rng.gen_range(1..=4);
            let mut agent = Agent::new(m, m, 4, SubSolution(subs[0]));
            for &s in &subs[1..count] {
                agent.learn(SubSolution(s));
            }
            agent
        })
        .collect();
    let standing = Solution(rng.gen_range(0..16));
    let team = TeamState::new(vec![0, 1], standing, &l);
    Ok(SmallInstance { landscape: l, population: Population::from_agents(agents, 2), team })
}

/// Exact best known sub-solution against `residuals`; lower sub-solutions
/// win ties.
fn exact_best(agent: &Agent, m: usize, residuals: Solution, l: &Landscape) -> SubSolution {
    let p = l.partition();
    let mut best = (agent.known()[0], f64::NEG_INFINITY);
    for &s in agent.known() {
        let u = utility(l, p.with_sub(residuals, m, s), m);
        if u > best.1 {
            best = (s, u);
        }
    }
    best.0
}

/// Exact first and second choices by utility; a singleton is nominated twice.
fn exact_top_two(agent: &Agent, m: usize, residuals: Solution, l: &Landscape) -> (SubSolution, SubSolution) {
    let p = l.partition();
    let mut ranked: Vec<(f64, SubSolution)> =
        agent.known().iter().map(|&s| (utility(l, p.with_sub(residuals, m, s), m), s)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    (ranked[0].1, ranked.get(1).unwrap_or(&ranked[0]).1)
}

/// First candidate that every member strictly prefers to its baseline, else
/// the standing solution.
fn exact_vote(team: &TeamState, candidates: &[Solution], l: &Landscape) -> Solution {
    candidates
        .iter()
        .copied()
        .find(|&c| (0..team.members.len()).all(|m| utility(l, c, m) > team.last_utilities[m]))
        .unwrap_or(team.standing)
}

/// Error-free autonomous, sequential and liaison decisions agree with
/// brute-force enumeration of the known sets.
pub fn argmax_equivalence(seed: u64, cases: usize) -> Result<OracleReport> {
    let none = ErrorModel::none();
    for case in 0..cases {
        let mut rng = case_rng(seed, case);
        let SmallInstance { landscape: l, population: pop, team } = small_instance(&mut rng)?;
        let p = l.partition();
        let agent = |m: usize| &pop.agents[team.members[m]];

        let auto = p.concat(&[exact_best(agent(0), 0, team.standing, &l), exact_best(agent(1), 1, team.standing, &l)]);
        let first = exact_best(agent(0), 0, team.standing, &l);
        let after_first = p.with_sub(team.standing, 0, first);
        let seq = p.with_sub(after_first, 1, exact_best(agent(1), 1, after_first, &l));
        let (a1, a2) = exact_top_two(agent(0), 0, team.standing, &l);
        let (b1, b2) = exact_top_two(agent(1), 1, team.standing, &l);
        let liaison = exact_vote(&team, &[p.concat(&[a1, b1]), p.concat(&[a2, b2])], &l);

        let got = [
            (CoordinationMode::FullyAutonomous, decide_autonomous(&team, &pop, &l, &none, &mut rng), auto),
            (CoordinationMode::Sequential, decide_sequential(&team, &pop, &l, &none, &mut rng), seq),
            (CoordinationMode::Liaison, decide_liaison(&team, &pop, &l, &none, &mut rng).solution, liaison),
        ];
        for (mode, actual, expected) in got {
            if actual != expected {
                return Ok(report(
                    "argmax-equivalence",
                    cases,
                    Some(format!(
                        "case {case} {mode}: decided {:04b}, brute force {:04b} (standing {:04b}, known {:?} / {:?})",
                        actual.0,
                        expected.0,
                        team.standing.0,
                        agent(0).known(),
                        agent(1).known()
                    )),
                    String::new(),
                ));
            }
        }
    }
    Ok(report("argmax-equivalence", cases, None, format!("{cases} N=4, M=2 instances match enumeration")))
}

/// Error-free liaison and lateral decisions equal the exact vote over their
/// candidates: the standing solution whenever every candidate is vetoed.
pub fn veto_fallback(seed: u64, cases: usize) -> Result<OracleReport> {
    let none = ErrorModel::none();
    let mut fallbacks = 0;
    for case in 0..cases {
        let mut rng = case_rng(seed, case);
        let SmallInstance { landscape: l, population: pop, team } = small_instance(&mut rng)?;
        for mode in [CoordinationMode::Liaison, CoordinationMode::Lateral] {
            let mut draw = rng.clone();
            let candidates: Vec<CandidateSolution> = match mode {
                CoordinationMode::Liaison => liaison_candidates(&team, &pop, &l, &none, &mut draw),
                _ => lateral_candidates(&team, &pop, &l, &mut draw),
            };
            let solutions: Vec<Solution> = candidates.iter().map(|c| c.solution).collect();
            let expected = exact_vote(&team, &solutions, &l);
            let decision: Decision = match mode {
                CoordinationMode::Liaison => decide_liaison(&team, &pop, &l, &none, &mut rng),
                _ => decide_lateral(&team, &pop, &l, &none, &mut rng),
            };
            let all_vetoed = solutions.iter().all(|&c| (0..2).any(|m| utility(&l, c, m) <= team.last_utilities[m]));
            if all_vetoed {
                fallbacks += 1;
            }
            let consistent = decision.solution == expected && all_vetoed == decision.accepted.is_none();
            if !consistent {
                return Ok(report(
                    "veto-fallback",
                    cases * 2,
                    Some(format!(
                        "case {case} {mode}: decided {:04b} ({:?}), exact vote {:04b}, standing {:04b}, candidates {:?}",
                        decision.solution.0, decision.accepted, expected.0, team.standing.0, solutions
                    )),
                    String::new(),
                ));
            }
        }
    }
    if fallbacks == 0 {
        return Ok(report("veto-fallback", cases * 2, Some("no case exercised the fallback".into()), String::new()));
    }
    Ok(report("veto-fallback", cases * 2, None, format!("{fallbacks} of {} decisions fell back", cases * 2)))
}

/// Aggregates from one worker equal those from several.
pub fn serial_parallel(seed: u64, workers: usize) -> Result<OracleReport> {
    let params = ModelParams { periods: 30, rounds: 12, master_seed: seed, ..ModelParams::default() };
    let grid = Grid {
        modes: CoordinationMode::ALL.to_vec(),
        ks: vec![3],
        structures: vec![Structure::Random],
        taus: vec![FormationSchedule::every(10)?],
        probs: vec![0.5],
    };
    let scenarios = grid.enumerate(&params);
    let serial = Runner::new(1)?.run_all(&scenarios, |_, _| {})?;
    let parallel = Runner::new(workers)?.run_all(&scenarios, |_, _| {})?;
    let failure = serial
        .iter()
        .zip(&parallel)
        .find(|(a, b)| a != b)
        .map(|(a, _)| format!("scenario {} differs between 1 and {workers} workers", a.config.id()));
    Ok(report(
        "serial-parallel",
        scenarios.len(),
        failure,
        format!("{} scenarios identical on 1 and {workers} workers", scenarios.len()),
    ))
}

/// Empirical frequency of each sampling rule against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    pub rule: &'static str,
    pub observed: f64,
    pub expected: f64,
}

/// Runs every sampling rule `trials` times.
pub fn frequencies(seed: u64, trials: usize) -> Result<Vec<Frequency>> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Lateral: member knows {x, y}; how often x fills the member's slot.
    let l = landscape(Structure::Random, 4, 2, 1, &mut rng)?;
    let mut a0 = Agent::new(0, 0, 4, SubSolution(1));
    a0.learn(SubSolution(2));
    let pop = Population::from_agents(vec![a0, Agent::new(1, 1, 4, SubSolution(0))], 2);
    let team = TeamState::new(vec![0, 1], Solution(0), &l);
    let mut hits = 0;
    for _ in 0..trials {
        let c = lateral_candidates(&team, &pop, &l, &mut rng);
        hits += usize::from(c[0].proposals[0] == SubSolution(1));
    }
    out.push(Frequency { rule: "lateral slot", observed: hits as f64 / trials as f64, expected: 0.5 });

    // Formation: two identical candidates with equal fixed errors.
    let agents = vec![
        Agent::new(0, 0, 4, SubSolution(3)),
        Agent::new(1, 0, 4, SubSolution(3)),
        Agent::new(2, 1, 4, SubSolution(0)),
    ];
    let pop = Population::from_agents(agents, 2);
    let fixed = ErrorModel::Fixed(0.0);
    let mut first = 0;
    for _ in 0..trials {
        first += usize::from(form_team(&pop, Solution(0), &l, &fixed, &mut rng)[0] == 0);
    }
    out.push(Frequency { rule: "formation tie", observed: first as f64 / trials as f64, expected: 0.5 });

    // Discovery: uniform over 15 unknown solutions.
    let always = LearningConfig::new(1.0)?;
    let mut count = 0;
    for _ in 0..trials {
        let mut a = Agent::new(0, 0, 16, SubSolution(0));
        count += usize::from(discovery_step(&mut a, &always, &mut rng) == Some(SubSolution(7)));
    }
    out.push(Frequency { rule: "discovery uniform", observed: count as f64 / trials as f64, expected: 1.0 / 15.0 });

    // Discovery: the two unknown solutions hold p = 2/3 and p = 1/3.
    let mut count = 0;
    for _ in 0..trials {
        let mut a = Agent::new(0, 0, 4, SubSolution(0));
        a.learn(SubSolution(3));
        *a.beliefs_mut(SubSolution(1)) = Beliefs { alpha: 2, beta: 1, ..Beliefs::default() };
        *a.beliefs_mut(SubSolution(2)) = Beliefs { alpha: 1, beta: 2, ..Beliefs::default() };
        count += usize::from(discovery_step(&mut a, &always, &mut rng) == Some(SubSolution(1)));
    }
    out.push(Frequency { rule: "discovery weighted", observed: count as f64 / trials as f64, expected: 2.0 / 3.0 });

    // Forgetting: q = 0.75 against q = 0.25.
    let mut count = 0;
    for _ in 0..trials {
        let mut a = Agent::new(0, 0, 4, SubSolution(0));
        a.learn(SubSolution(1));
        *a.beliefs_mut(SubSolution(0)) = Beliefs { lambda: 3, delta: 1, ..Beliefs::default() };
        *a.beliefs_mut(SubSolution(1)) = Beliefs { lambda: 1, delta: 3, ..Beliefs::default() };
        count += usize::from(forgetting_step(&mut a, &always, &mut rng) == Some(SubSolution(0)));
    }
    out.push(Frequency { rule: "forgetting weighted", observed: count as f64 / trials as f64, expected: 0.75 });

    // Bernoulli gate of the learning probability.
    let half = LearningConfig::new(0.3)?;
    let mut count = 0;
    for _ in 0..trials {
        let mut a = Agent::new(0, 0, 16, SubSolution(0));
        count += usize::from(discovery_step(&mut a, &half, &mut rng).is_some());
    }
    out.push(Frequency { rule: "discovery gate", observed: count as f64 / trials as f64, expected: 0.3 });
    Ok(out)
}

/// Every sampling rule within ±0.02 of its closed form.
pub fn sampling_frequencies(seed: u64, trials: usize) -> Result<OracleReport> {
    let freqs = frequencies(seed, trials)?;
    let detail = freqs.iter().map(|f| format!("{}={:.4}/{:.4}", f.rule, f.observed, f.expected)).collect::<Vec<_>>();
    let failure = freqs
        .iter()
        .find(|f| (f.observed - f.expected).abs() > 0.02)
        .map(|f| format!("{}: observed {:.4}, expected {:.4}", f.rule, f.observed, f.expected));
    Ok(report("sampling-frequencies", trials * freqs.len(), failure, detail.join(" ")))
}

/// The hand-derived outcome updates of a fresh agent.
pub fn belief_algebra() -> OracleReport {
    let case = |u_now: f64, u_prev: f64| {
        let mut a = Agent::new(0, 0, 4, SubSolution(0));
        update_beliefs_on_outcome(&mut a, SubSolution(0), u_now, u_prev);
        *a.beliefs(SubSolution(0))
    };
    let checks = [
        ("equal utility", case(0.5, 0.5), Beliefs { alpha: 2, beta: 1, lambda: 2, delta: 1 }, (2.0 / 3.0, 2.0 / 3.0)),
        ("improvement", case(0.6, 0.5), Beliefs { alpha: 2, beta: 1, lambda: 2, delta: 2 }, (2.0 / 3.0, 0.5)),
        ("drop", case(0.4, 0.5), Beliefs { alpha: 1, beta: 2, lambda: 3, delta: 1 }, (1.0 / 3.0, 0.75)),
    ];
    let failure = checks.iter().find_map(|(name, got, want, (p, q))| {
        let ok = got == want && got.discovery() == *p && got.forgetting() == *q;
        (!ok).then(|| format!("{name}: got {got:?}, expected {want:?} with p={p}, q={q}"))
    });
    report("belief-algebra", checks.len(), failure, "equal, improvement and drop cases exact".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_lists_names() {
        let err = run_check("nope", 1).unwrap_err().to_string();
        assert!(err.contains("block-decomposability") && err.contains("belief-algebra"));
    }

    #[test]
    fn quick_checks_pass() {
        for (name, r) in [
            ("block", block_decomposability(7, 10).unwrap()),
            ("k0", k0_single_peak(7, 10).unwrap()),
            ("argmax", argmax_equivalence(7, 100).unwrap()),
            ("veto", veto_fallback(7, 100).unwrap()),
        ] {
            assert!(r.passed(), "{name}: {:?}", r.failure);
        }
        assert!(belief_algebra().passed());
    }
}
