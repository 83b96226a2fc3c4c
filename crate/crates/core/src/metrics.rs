//! Success rate, SPL, distance to goal, length groups, progress curves,
//! bifurcation detection and dataset statistics.

use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::episode::EpisodeLog;
use crate::geom::Vec3;
use crate::scenario::{LengthGroup, Scenario, FIXED_BOUNDARIES};
use crate::world::ActionCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricError {
    EmptySet,
    LengthMismatch,
    NonPositiveOptimal,
    /// The episode starts within its success radius, so progress is undefined.
    DegenerateStart,
    SeriesTooShort,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricError::EmptySet => "metric over an empty episode set",
            MetricError::LengthMismatch => "episode and optimal-length counts differ",
            MetricError::NonPositiveOptimal => "optimal path length must be positive",
            MetricError::DegenerateStart => "episode starts at the goal",
            MetricError::SeriesTooShort => "distance series needs at least two entries",
        })
    }
}

impl core::error::Error for MetricError {}

pub fn success_rate(logs: &[EpisodeLog]) -> Result<f64, MetricError> {
    if logs.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(logs.iter().filter(|l| l.is_success()).count() as f64 / logs.len() as f64)
}

/// One SPL summand: `s · l / max(l, g)`.
pub fn spl_term(success: bool, optimal: f64, traveled: f64) -> f64 {
    if success {
        optimal / optimal.max(traveled)
    } else {
        0.0
    }
}

/// Success weighted by path length, with `g_i` taken from each log's poses.
pub fn spl(logs: &[EpisodeLog], optimal_lengths: &[f64]) -> Result<f64, MetricError> {
    if logs.is_empty() {
        return Err(MetricError::EmptySet);
    }
    if logs.len() != optimal_lengths.len() {
        return Err(MetricError::LengthMismatch);
    }
    let mut sum = 0.0;
    for (log, &l) in logs.iter().zip(optimal_lengths) {
        if l.is_nan() || l <= 0.0 {
            return Err(MetricError::NonPositiveOptimal);
        }
        sum += spl_term(log.is_success(), l, log.traveled_length());
    }
    Ok(sum / logs.len() as f64)
}

/// Mean final distance to goal.
pub fn dtg(logs: &[EpisodeLog]) -> Result<f64, MetricError> {
    if logs.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(logs.iter().map(|l| l.final_distance).sum::<f64>() / logs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GroupMode {
    /// Boundaries at the 1/3 and 2/3 quantiles of the lengths at hand.
    Trisect,
    /// The benchmark's published boundaries.
    PaperFixed,
}

/// Indices into the input, split by ground-truth length.
#[derive(Debug, Clone, PartialEq)]
pub struct Groups {
    pub bounds: (f64, f64),
    pub short: Vec<usize>,
    pub middle: Vec<usize>,
    pub long: Vec<usize>,
}

impl Groups {
    pub fn get(&self, g: LengthGroup) -> &[usize] {
        match g {
            LengthGroup::Short => &self.short,
            LengthGroup::Middle => &self.middle,
            LengthGroup::Long => &self.long,
        }
    }
}

/// Linearly interpolated sample quantile (the common "type 7" definition).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn group_bounds(gt_lengths: &[f64], mode: GroupMode) -> (f64, f64) {
    match mode {
        GroupMode::PaperFixed => FIXED_BOUNDARIES,
        GroupMode::Trisect if gt_lengths.is_empty() => (0.0, 0.0),
        GroupMode::Trisect => {
            let mut v = gt_lengths.to_vec();
            v.sort_by(f64::total_cmp);
            (quantile(&v, 1.0 / 3.0), quantile(&v, 2.0 / 3.0))
        }
    }
}

pub fn group_episodes(gt_lengths: &[f64], mode: GroupMode) -> Groups {
    let bounds = group_bounds(gt_lengths, mode);
    let mut g = Groups {
        bounds,
        short: Vec::new(),
        middle: Vec::new(),
        long: Vec::new(),
    };
    for (i, &l) in gt_lengths.iter().enumerate() {
        match LengthGroup::classify(l, bounds) {
            LengthGroup::Short => g.short.push(i),
            LengthGroup::Middle => g.middle.push(i),
            LengthGroup::Long => g.long.push(i),
        }
    }
    g
}

/// `r_t = d_t / d_0` for every entry of the distance series. Values above 1
/// mean the agent is further away than where it started.
pub fn progress_ratios(distances: &[f64]) -> Result<Vec<f64>, MetricError> {
    match distances.first() {
        None => Err(MetricError::EmptySet),
        Some(&d0) if d0 <= 0.0 => Err(MetricError::DegenerateStart),
        Some(&d0) => Ok(distances.iter().map(|d| d / d0).collect()),
    }
}

/// Progress ratios for a logged episode; fails when it starts inside its
/// own success radius.
pub fn progress_curve(log: &EpisodeLog) -> Result<Vec<f64>, MetricError> {
    if log.initial_distance <= log.epsilon {
        return Err(MetricError::DegenerateStart);
    }
    progress_ratios(&log.distances())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CdbResult {
    pub found: bool,
    pub t_star: Option<usize>,
    /// Least-squares slope of the distance series before and after `t_star`,
    /// meters per step. Both are 0 when nothing is found.
    pub pre_slope: f64,
    pub post_slope: f64,
    pub progress: Vec<f64>,
}

/// Least-squares slope of `ys` against their indices.
pub fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Finds the step after which the distance to goal only grows.
///
/// `t*` is the smallest index from which the series never drops by more
/// than `tol` and ends more than `tol` above its value at `t*`. Successful
/// episodes never have one.
pub fn detect_cdb(distances: &[f64], failed: bool, tol: f64) -> Result<CdbResult, MetricError> {
    if distances.len() < 2 {
        return Err(MetricError::SeriesTooShort);
    }
    let progress = progress_ratios(distances).unwrap_or_default();
    let last = distances.len() - 1;
    let mut start = last;
    while start > 0 && distances[start] >= distances[start - 1] - tol {
        start -= 1;
    }
    let t_star = if failed {
        (start..last).find(|&t| distances[last] > distances[t] + tol)
    } else {
        None
    };
    Ok(match t_star {
        Some(t) => CdbResult {
            found: true,
            t_star: Some(t),
            pre_slope: ls_slope(&distances[..=t]),
            post_slope: ls_slope(&distances[t..]),
            progress,
        },
        None => CdbResult {
            found: false,
            t_star: None,
            pre_slope: 0.0,
            post_slope: 0.0,
            progress,
        },
    })
}

/// SR, SPL and DTG over one set of episodes; `None` for an empty set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GroupMetrics {
    pub episodes: usize,
    pub sr: Option<f64>,
    pub spl: Option<f64>,
    pub dtg: Option<f64>,
}

impl GroupMetrics {
    pub fn compute(logs: &[&EpisodeLog]) -> Self {
        if logs.is_empty() {
            return Self {
                episodes: 0,
                sr: None,
                spl: None,
                dtg: None,
            };
        }
        let owned: Vec<EpisodeLog> = logs.iter().map(|l| (*l).clone()).collect();
        let optimal: Vec<f64> = owned.iter().map(|l| l.optimal_length).collect();
        Self {
            episodes: logs.len(),
            sr: success_rate(&owned).ok(),
            spl: spl(&owned, &optimal).ok(),
            dtg: dtg(&owned).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MetricReport {
    pub mode: GroupMode,
    pub bounds: (f64, f64),
    pub short: GroupMetrics,
    pub middle: GroupMetrics,
    pub long: GroupMetrics,
    pub average: GroupMetrics,
}

impl MetricReport {
    /// Groups by each log's optimal length and scores every group.
    pub fn compute(logs: &[EpisodeLog], mode: GroupMode) -> Self {
        let lengths: Vec<f64> = logs.iter().map(|l| l.optimal_length).collect();
        let groups = group_episodes(&lengths, mode);
        let pick = |idx: &[usize]| -> GroupMetrics {
            let v: Vec<&EpisodeLog> = idx.iter().map(|&i| &logs[i]).collect();
            GroupMetrics::compute(&v)
        };
        let all: Vec<&EpisodeLog> = logs.iter().collect();
        Self {
            mode,
            bounds: groups.bounds,
            short: pick(&groups.short),
            middle: pick(&groups.middle),
            long: pick(&groups.long),
            average: GroupMetrics::compute(&all),
        }
    }

    pub fn rows(&self) -> [(&'static str, &GroupMetrics); 4] {
        [
            ("short", &self.short),
            ("middle", &self.middle),
            ("long", &self.long),
            ("average", &self.average),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DatasetStats {
    pub scenarios: usize,
    pub mean_length: f64,
    pub length_histogram: Vec<HistogramBin>,
    /// Share of horizontal, vertical and rotation/gimbal actions over all
    /// ground-truth actions.
    pub horizontal: f64,
    pub vertical: f64,
    pub rotation: f64,
    /// Goal minus start for each scenario, in world axes.
    pub displacements: Vec<Vec3>,
}

pub const HISTOGRAM_BIN: f64 = 50.0;

pub fn dataset_stats(scenarios: &[Scenario]) -> Result<DatasetStats, MetricError> {
    if scenarios.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let lengths: Vec<f64> = scenarios.iter().map(|s| s.ground_truth.length).collect();
    let mean_length = lengths.iter().sum::<f64>() / lengths.len() as f64;
    let top = lengths.iter().copied().fold(0.0, f64::max);
    let bins = (libm::floor(top / HISTOGRAM_BIN) as usize) + 1;
    let mut length_histogram: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lo: i as f64 * HISTOGRAM_BIN,
            hi: (i + 1) as f64 * HISTOGRAM_BIN,
            count: 0,
        })
        .collect();
    for l in &lengths {
        length_histogram[libm::floor(l / HISTOGRAM_BIN) as usize].count += 1;
    }
    let mut counts = [0usize; 3];
    for a in scenarios.iter().flat_map(|s| s.ground_truth.actions.iter()) {
        match a.category() {
            Some(ActionCategory::Horizontal) => counts[0] += 1,
            Some(ActionCategory::Vertical) => counts[1] += 1,
            Some(ActionCategory::Rotation) => counts[2] += 1,
            None => {}
        }
    }
    let total = counts.iter().sum::<usize>().max(1) as f64;
    Ok(DatasetStats {
        scenarios: scenarios.len(),
        mean_length,
        length_histogram,
        horizontal: counts[0] as f64 / total,
        vertical: counts[1] as f64 / total,
        rotation: counts[2] as f64 / total,
        displacements: scenarios
            .iter()
            .map(|s| s.goal.position - s.start.position)
            .collect(),
    })
}
