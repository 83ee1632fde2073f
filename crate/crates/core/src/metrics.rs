//! Performance measures, normal-approximation confidence intervals and the
//! grouped views behind the result tables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::coordination::CoordinationMode;
use crate::engine::{ScenarioConfig, ScenarioResult};
use crate::error::{usage, Error, Result};
use crate::formation::FormationSchedule;
use crate::landscape::Structure;

/// Significance level used for reported intervals unless overridden.
pub const DEFAULT_ALPHA: f64 = 1e-4;

/// Mean of the first `t_max` entries of a per-period series.
pub fn mean_performance(series: &[f64], t_max: usize) -> Result<f64> {
    if t_max == 0 || series.len() < t_max {
        return usage(format!("need {t_max} periods, series has {}", series.len()));
    }
    Ok(series[..t_max].iter().sum::<f64>() / t_max as f64)
}

/// Value of the series at period `t_max` (one-based).
pub fn final_performance(series: &[f64], t_max: usize) -> Result<f64> {
    if t_max == 0 || series.len() < t_max {
        return usage(format!("need {t_max} periods, series has {}", series.len()));
    }
    Ok(series[t_max - 1])
}

/// Two-sided standard normal quantile `z_{1-alpha/2}`.
pub fn z_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return usage(format!("alpha = {alpha} must lie in (0, 1)"));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(std.inverse_cdf(1.0 - alpha / 2.0))
}

/// `(mean, halfwidth)` of the interval `mean ± z · sd / √n`, with the sample
/// standard deviation.
pub fn confidence_interval(samples: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return usage(format!("confidence interval needs at least 2 samples, got {}", samples.len()));
    }
    let m = Moments::from_samples(samples);
    Ok((m.mean, m.halfwidth(alpha)?.expect("n >= 2")))
}

/// Count, mean and sum of squared deviations of a sample; merges exactly
/// across groups.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn from_samples(samples: &[f64]) -> Moments {
        samples.iter().fold(Moments::default(), |mut acc, &x| {
            acc.n += 1;
            let delta = x - acc.mean;
            acc.mean += delta / acc.n as f64;
            acc.m2 += delta * (x - acc.mean);
            acc
        })
    }

    /// Recovers the moments of `n` samples from a reported mean and interval
    /// halfwidth at `alpha`.
    pub fn from_interval(n: u64, mean: f64, halfwidth: Option<f64>, alpha: f64) -> Result<Moments> {
        let m2 = match halfwidth {
            Some(h) if n >= 2 => {
                let sd = h * (n as f64).sqrt() / z_value(alpha)?;
                sd * sd * (n - 1) as f64
            }
            _ => 0.0,
        };
        Ok(Moments { n, mean, m2 })
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn variance(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.m2 / (self.n - 1) as f64)
    }

    /// Interval halfwidth, absent with fewer than two samples.
    pub fn halfwidth(&self, alpha: f64) -> Result<Option<f64>> {
        let z = z_value(alpha)?;
        Ok(self.variance().map(|v| z * v.max(0.0).sqrt() / (self.n as f64).sqrt()))
    }
}

/// Per-scenario figures written to `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub scenario_id: String,
    pub mode: CoordinationMode,
    pub k: usize,
    pub structure: Structure,
    pub tau: FormationSchedule,
    pub prob: f64,
    pub rounds: u64,
    pub mean_perf: f64,
    pub mean_ci: Option<f64>,
    pub final_perf: f64,
    pub final_ci: Option<f64>,
    /// Moments of the per-round mean performance.
    pub mean_moments: Moments,
    /// Moments of the per-round final performance.
    pub final_moments: Moments,
}

impl ScenarioSummary {
    pub fn from_result(result: &ScenarioResult, alpha: f64) -> Result<ScenarioSummary> {
        let t = result.per_period.len();
        let mean_moments = Moments::from_samples(&result.round_mean);
        let final_moments = Moments::from_samples(&result.round_final);
        ScenarioSummary::with_axes(
            &result.config,
            mean_performance(&result.per_period, t)?,
            final_performance(&result.per_period, t)?,
            mean_moments,
            final_moments,
            alpha,
        )
    }

    fn with_axes(
        c: &ScenarioConfig,
        mean_perf: f64,
        final_perf: f64,
        mean_moments: Moments,
        final_moments: Moments,
        alpha: f64,
    ) -> Result<ScenarioSummary> {
        Ok(ScenarioSummary {
            scenario_id: c.id(),
            mode: c.mode,
            k: c.k,
            structure: c.structure,
            tau: c.tau,
            prob: c.prob,
            rounds: mean_moments.n,
            mean_perf,
            mean_ci: mean_moments.halfwidth(alpha)?,
            final_perf,
            final_ci: final_moments.halfwidth(alpha)?,
            mean_moments,
            final_moments,
        })
    }

    /// Rebuilds the moments from stored columns, as when read back from CSV.
    #[allow(clippy::too_many_arguments)]
    pub fn from_columns(
        scenario_id: String,
        mode: CoordinationMode,
        k: usize,
        structure: Structure,
        tau: FormationSchedule,
        prob: f64,
        rounds: u64,
        (mean_perf, mean_ci): (f64, Option<f64>),
        (final_perf, final_ci): (f64, Option<f64>),
        alpha: f64,
    ) -> Result<ScenarioSummary> {
        Ok(ScenarioSummary {
            scenario_id,
            mode,
            k,
            structure,
            tau,
            prob,
            rounds,
            mean_perf,
            mean_ci,
            final_perf,
            final_ci,
            mean_moments: Moments::from_interval(rounds, mean_perf, mean_ci, alpha)?,
            final_moments: Moments::from_interval(rounds, final_perf, final_ci, alpha)?,
        })
    }
}

/// A grid axis that a grouped view can keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Mode,
    K,
    Structure,
    Tau,
    Prob,
}

/// Values of the kept axes; collapsed axes are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupKey {
    pub tau: Option<FormationSchedule>,
    pub mode: Option<CoordinationMode>,
    pub structure: Option<Structure>,
    pub k: Option<usize>,
    pub prob: Option<f64>,
}

impl GroupKey {
    fn of(s: &ScenarioSummary, axes: &[Axis]) -> GroupKey {
        let mut key = GroupKey::default();
        for axis in axes {
            match axis {
                Axis::Mode => key.mode = Some(s.mode),
                Axis::K => key.k = Some(s.k),
                Axis::Structure => key.structure = Some(s.structure),
                Axis::Tau => key.tau = Some(s.tau),
                Axis::Prob => key.prob = Some(s.prob),
            }
        }
        key
    }

    // Long-lived teams first, then modes and structures in declaration order.
    fn sort_key(&self) -> (u64, usize, usize, usize, u64) {
        let tau = match self.tau.map(|t| t.tau()) {
            None => 0,
            Some(None) => 1,
            Some(Some(t)) => u64::MAX - u64::from(t),
        };
        let mode = self.mode.map_or(0, |m| 1 + CoordinationMode::ALL.iter().position(|&x| x == m).unwrap_or(0));
        let structure = self.structure.map_or(0, |s| 1 + Structure::ALL.iter().position(|&x| x == s).unwrap_or(0));
        let k = self.k.map_or(0, |k| k + 1);
        let prob = self.prob.map_or(0, |p| p.to_bits());
        (tau, mode, structure, k, prob)
    }
}

impl Eq for GroupKey {}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// One cell of a grouped view.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub key: GroupKey,
    pub scenarios: usize,
    pub rounds: u64,
    /// Unweighted mean of the member scenarios' mean performance.
    pub mean_perf: f64,
    pub mean_ci: Option<f64>,
    pub final_perf: f64,
    pub final_ci: Option<f64>,
}

/// Groups summaries by `axes`, averaging over everything else.
pub fn aggregate(summaries: &[ScenarioSummary], axes: &[Axis], alpha: f64) -> Result<Vec<GroupRow>> {
    #[derive(Default)]
    struct Acc {
        count: usize,
        mean_sum: f64,
        final_sum: f64,
        mean_m: Moments,
        final_m: Moments,
    }
    let mut groups: BTreeMap<GroupKey, Acc> = BTreeMap::new();
    // Sorting members first makes the floating-point sums independent of input order.
    let mut ordered: Vec<&ScenarioSummary> = summaries.iter().collect();
    ordered.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    for s in ordered {
        let acc = groups.entry(GroupKey::of(s, axes)).or_default();
        acc.count += 1;
        acc.mean_sum += s.mean_perf;
        acc.final_sum += s.final_perf;
        acc.mean_m = acc.mean_m.merge(&s.mean_moments);
        acc.final_m = acc.final_m.merge(&s.final_moments);
    }
    groups
        .into_iter()
        .map(|(key, acc)| {
            Ok(GroupRow {
                key,
                scenarios: acc.count,
                rounds: acc.mean_m.n,
                mean_perf: acc.mean_sum / acc.count as f64,
                mean_ci: acc.mean_m.halfwidth(alpha)?,
                final_perf: acc.final_sum / acc.count as f64,
                final_ci: acc.final_m.halfwidth(alpha)?,
            })
        })
        .collect()
}

/// Named grouped views.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// τ × mode over everything else.
    Table2,
    /// τ × mode × structure at K = 3.
    Table3,
    /// τ × mode × structure at K = 5.
    Table4,
    /// τ × mode × ℙ over K and structure.
    Fig3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Table2, Preset::Table3, Preset::Table4, Preset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Table4 => "table4",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn axes(self) -> &'static [Axis] {
        match self {
            Preset::Table2 => &[Axis::Tau, Axis::Mode],
            Preset::Table3 | Preset::Table4 => &[Axis::Tau, Axis::Mode, Axis::Structure],
            Preset::Fig3 => &[Axis::Tau, Axis::Mode, Axis::Prob],
        }
    }

    pub fn k_filter(self) -> Option<usize> {
        match self {
            Preset::Table3 => Some(3),
            Preset::Table4 => Some(5),
            _ => None,
        }
    }

    /// Applies the preset, optionally fixing ℙ instead of averaging over it.
    pub fn apply(self, summaries: &[ScenarioSummary], prob: Option<f64>, alpha: f64) -> Result<Vec<GroupRow>> {
        let selected: Vec<ScenarioSummary> = summaries
            .iter()
            .filter(|s| self.k_filter().is_none_or(|k| s.k == k))
            .filter(|s| prob.is_none_or(|p| s.prob == p))
            .cloned()
            .collect();
        aggregate(&selected, self.axes(), alpha)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::Usage(format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// Looks up a cell of a grouped view; absent groups stay absent.
pub fn find<'a>(rows: &'a [GroupRow], key: &GroupKey) -> Option<&'a GroupRow> {
    rows.iter().find(|r| r.key == *key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ModelParams;

    #[test]
    fn mean_and_final_by_hand() {
        assert_eq!(mean_performance(&[0.2, 0.4], 2).unwrap(), 0.30000000000000004);
        assert!((mean_performance(&[0.4, 0.2], 2).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(mean_performance(&[0.7; 5], 5).unwrap(), 0.7);
        assert_eq!(final_performance(&[0.5, 0.9410], 2).unwrap(), 0.9410);
        assert!(matches!(final_performance(&[0.5], 2), Err(Error::Usage(_))));
    }

    #[test]
    fn final_at_least_mean_for_non_decreasing_series() {
        let s: Vec<f64> = (0..50).map(|i| 0.5 + f64::from(i) * 0.01).collect();
        assert!(final_performance(&s, 50).unwrap() >= mean_performance(&s, 50).unwrap());
    }

    #[test]
    fn interval_for_alternating_samples() {
        let samples: Vec<f64> = (0..2000).map(|i| f64::from(i % 2)).collect();
        let (mean, h) = confidence_interval(&samples, 0.05).unwrap();
        assert_eq!(mean, 0.5);
        let sd = (0.25f64 * 2000.0 / 1999.0).sqrt();
        assert!((h - 1.959963984540054 * sd / 2000f64.sqrt()).abs() < 1e-12);
        assert!((h - 0.0219).abs() < 1e-4);
    }

    #[test]
    fn identical_samples_have_zero_width() {
        assert_eq!(confidence_interval(&[0.3; 10], 0.05).unwrap().1, 0.0);
        assert!(confidence_interval(&[0.3], 0.05).is_err());
    }

    #[test]
    fn moments_merge_matches_direct() {
        let a = [0.1, 0.5, 0.3, 0.9];
        let b = [0.2, 0.8, 0.4];
        let all: Vec<f64> = a.iter().chain(&b).copied().collect();
        let merged = Moments::from_samples(&a).merge(&Moments::from_samples(&b));
        let direct = Moments::from_samples(&all);
        assert_eq!(merged.n, direct.n);
        assert!((merged.mean - direct.mean).abs() < 1e-15);
        assert!((merged.m2 - direct.m2).abs() < 1e-14);
    }

    #[test]
    fn interval_round_trips_through_moments() {
        let samples = [0.61, 0.72, 0.93, 0.55, 0.8];
        let m = Moments::from_samples(&samples);
        let h = m.halfwidth(1e-4).unwrap();
        let back = Moments::from_interval(5, m.mean, h, 1e-4).unwrap();
        assert!((back.m2 - m.m2).abs() < 1e-12);
    }

    fn summary(mode: CoordinationMode, tau: FormationSchedule, prob: f64, samples: &[f64]) -> ScenarioSummary {
        let config = ScenarioConfig {
            params: ModelParams::default(),
            mode,
            k: 3,
            structure: Structure::Block,
            tau,
            prob,
        };
        let result = ScenarioResult {
            config,
            per_period: vec![Moments::from_samples(samples).mean],
            round_mean: samples.to_vec(),
            round_final: samples.to_vec(),
        };
        ScenarioSummary::from_result(&result, 0.05).unwrap()
    }

    #[test]
    fn collapsing_two_scenarios_averages_them() {
        let a = summary(CoordinationMode::Lateral, FormationSchedule::NEVER, 0.0, &[0.8, 0.8]);
        let b = summary(CoordinationMode::Lateral, FormationSchedule::NEVER, 0.5, &[0.9, 0.9]);
        let rows = aggregate(&[a.clone(), b], &[Axis::Mode], 0.05).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].mean_perf - 0.85).abs() < 1e-15);
        assert_eq!(rows[0].rounds, 4);
        let identity = aggregate(std::slice::from_ref(&a), &[Axis::Mode, Axis::Prob], 0.05).unwrap();
        assert_eq!(identity[0].mean_perf, a.mean_perf);
    }

    #[test]
    fn aggregation_ignores_input_order() {
        let taus = [FormationSchedule::NEVER, FormationSchedule::every(1).unwrap()];
        let mut all = Vec::new();
        for (i, mode) in CoordinationMode::ALL.into_iter().enumerate() {
            for &tau in &taus {
                for j in 0..3 {
                    let x = 0.5 + 0.01 * (i * 7 + j) as f64;
                    all.push(summary(mode, tau, f64::from(j as u32) / 10.0, &[x, x + 0.1, x - 0.05]));
                }
            }
        }
        let forward = Preset::Table2.apply(&all, None, 0.05).unwrap();
        all.reverse();
        assert_eq!(forward, Preset::Table2.apply(&all, None, 0.05).unwrap());
        assert_eq!(forward.len(), 8);
        assert_eq!(forward[0].key.tau, Some(FormationSchedule::NEVER));
        assert_eq!(forward[0].key.mode, Some(CoordinationMode::FullyAutonomous));
    }

    #[test]
    fn presets_parse_by_name() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("table9".parse::<Preset>().is_err());
    }
}
