//! Duration regulation.
//!
//! Turns per-unit duration predictions into integer frame counts. The
//! bounded regulator rescales predictions to a frame budget and then
//! repairs the rounding error one frame at a time so the realized length
//! equals the budget exactly. The early-stop regulator is the baseline
//! that simply cuts synthesis off at the budget.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{OrigUnitSeq, UnitId};

/// Integer durations whose sum is exactly `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundedAllocation {
    durations: Vec<usize>,
    target: usize,
}

impl BoundedAllocation {
    pub fn durations(&self) -> &[usize] {
        &self.durations
    }

    pub fn into_durations(self) -> Vec<usize> {
        self.durations
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

/// How predicted durations are realized as frame counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegulationMode {
    /// Rescale to the target and repair rounding so the sum is exact.
    Bounded,
    /// Natural durations truncated once the target is reached.
    EarlyStop,
    /// Natural durations, target ignored.
    Unbounded,
}

impl RegulationMode {
    pub const ALL: [RegulationMode; 3] = [
        RegulationMode::Bounded,
        RegulationMode::EarlyStop,
        RegulationMode::Unbounded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegulationMode::Bounded => "bounded",
            RegulationMode::EarlyStop => "early_stop",
            RegulationMode::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for RegulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(RegulationMode::Bounded),
            "early_stop" | "early-stop" => Ok(RegulationMode::EarlyStop),
            "unbounded" => Ok(RegulationMode::Unbounded),
            other => Err(Error::InvalidArgument(format!(
                "unknown regulation mode '{other}' (expected bounded, early_stop or unbounded)"
            ))),
        }
    }
}

/// Round half away from zero, then clamp to at least one frame.
pub(crate) fn natural_frames(d: f64) -> usize {
    // `as` saturates, which is fine for the absurdly large values it could see.
    (d.round() as usize).max(1)
}

fn check_positive(d: &[f64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (index, &value) in d.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if value <= 0.0 {
            return Err(Error::NonPositiveDuration { index, value });
        }
    }
    Ok(())
}

/// Rescales `d` so it sums to `target`: `d_i * target / sum(d)`.
pub fn allocate_proportional(d: &[f64], target: usize) -> Result<Vec<f64>> {
    check_positive(d)?;
    if target == 0 {
        return Err(Error::NonPositiveTarget);
    }
    let total: f64 = d.iter().sum();
    let t = target as f64;
    Ok(d.iter().map(|&x| x * t / total).collect())
}

/// Integerizes already-normalized durations so they sum to `target`.
///
/// Each value is rounded and clamped to at least 1. If the rounded sum
/// overshoots, the `sum - target` entries whose rounding went up the most
/// lose one frame; if it undershoots, the entries that were rounded down
/// the most gain one. Ties go to the lowest index. An entry may end at 0,
/// which drops its unit.
pub fn integerize_bounded(dprime: &[f64], target: usize) -> Result<BoundedAllocation> {
    if dprime.is_empty() {
        return Err(Error::EmptyInput);
    }
    if target == 0 {
        return Err(Error::NonPositiveTarget);
    }
    for (index, &value) in dprime.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if value < 0.0 {
            return Err(Error::NegativeDuration { index });
        }
    }

    let mut durations: Vec<usize> = dprime.iter().map(|&x| natural_frames(x)).collect();
    let residual: Vec<f64> = dprime
        .iter()
        .zip(&durations)
        .map(|(&x, &p)| x - p as f64)
        .collect();
    let total = durations.iter().fold(0usize, |acc, &p| acc.saturating_add(p));

    let by_residual =
        |a: &usize, b: &usize| residual[*a].partial_cmp(&residual[*b]).unwrap_or(Ordering::Equal);

    match total.cmp(&target) {
        Ordering::Equal => {}
        Ordering::Greater => {
            let k = total - target;
            let order = ranked(dprime.len(), k, |a, b| by_residual(a, b).then(a.cmp(b)))?;
            for i in order {
                durations[i] -= 1;
            }
        }
        Ordering::Less => {
            let k = target - total;
            let order = ranked(dprime.len(), k, |a, b| by_residual(b, a).then(a.cmp(b)))?;
            for i in order {
                durations[i] += 1;
            }
        }
    }

    debug_assert_eq!(durations.iter().sum::<usize>(), target);
    Ok(BoundedAllocation { durations, target })
}

/// First `k` indices of `0..n` under `cmp`.
fn ranked<F>(n: usize, k: usize, mut cmp: F) -> Result<Vec<usize>>
where
    F: FnMut(&usize, &usize) -> Ordering,
{
    if k > n {
        return Err(Error::InfeasibleAdjustment {
            needed: k,
            available: n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if k < n {
        idx.select_nth_unstable_by(k, &mut cmp);
        idx.truncate(k);
    }
    Ok(idx)
}

/// Proportional allocation followed by bounded integerization.
pub fn bound_durations(d: &[f64], target: usize) -> Result<BoundedAllocation> {
    let dprime = allocate_proportional(d, target)?;
    integerize_bounded(&dprime, target)
}

/// Baseline: realize natural durations left to right and stop at `target`.
///
/// The unit that crosses the budget is cut short and everything after it
/// gets 0 frames. The result may be shorter than `target`.
pub fn early_stop(d: &[f64], target: usize) -> Result<Vec<usize>> {
    check_positive(d)?;
    if target == 0 {
        return Err(Error::NonPositiveTarget);
    }
    let mut remaining = target;
    Ok(d.iter()
        .map(|&x| {
            let take = natural_frames(x).min(remaining);
            remaining -= take;
            take
        })
        .collect())
}

/// Natural durations with no length control.
pub fn unbounded(d: &[f64]) -> Result<Vec<usize>> {
    check_positive(d)?;
    Ok(d.iter().map(|&x| natural_frames(x)).collect())
}

/// Dispatches to the regulator selected by `mode`.
pub fn regulate(mode: RegulationMode, d: &[f64], target: usize) -> Result<Vec<usize>> {
    match mode {
        RegulationMode::Bounded => bound_durations(d, target).map(BoundedAllocation::into_durations),
        RegulationMode::EarlyStop => early_stop(d, target),
        RegulationMode::Unbounded => unbounded(d),
    }
}

/// Per-unit mean run lengths, used as a duration predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationTable {
    mean_duration: BTreeMap<UnitId, f64>,
    fallback: f64,
}

impl DurationTable {
    pub fn new(mean_duration: BTreeMap<UnitId, f64>, fallback: f64) -> Result<Self> {
        let table = Self {
            mean_duration,
            fallback,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 1.0;
        if !ok(self.fallback) {
            return Err(Error::Format(format!(
                "duration table fallback {} is below 1",
                self.fallback
            )));
        }
        if let Some((unit, v)) = self.mean_duration.iter().find(|(_, &v)| !ok(v)) {
            return Err(Error::Format(format!(
                "duration table entry for unit {unit} is {v}, below 1"
            )));
        }
        Ok(())
    }

    pub fn mean_duration(&self) -> &BTreeMap<UnitId, f64> {
        &self.mean_duration
    }

    pub fn fallback(&self) -> f64 {
        self.fallback
    }

    pub fn lookup(&self, unit: UnitId) -> f64 {
        self.mean_duration.get(&unit).copied().unwrap_or(self.fallback)
    }
}

/// Fits a [`DurationTable`] from observed (units, run lengths) pairs.
pub fn fit_duration_table<'a, I>(corpus: I) -> Result<DurationTable>
where
    I: IntoIterator<Item = (&'a OrigUnitSeq, &'a [usize])>,
{
    let mut sums: BTreeMap<UnitId, (u64, u64)> = BTreeMap::new();
    let mut total: u64 = 0;
    let mut runs: u64 = 0;
    let mut pairs = 0usize;
    for (u, d) in corpus {
        pairs += 1;
        if u.len() != d.len() {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: d.len(),
            }
            .at_line(pairs));
        }
        for (index, (&unit, &dur)) in u.units().iter().zip(d).enumerate() {
            if dur == 0 {
                return Err(Error::NonPositiveDuration { index, value: 0.0 }.at_line(pairs));
            }
            let entry = sums.entry(unit).or_default();
            entry.0 += dur as u64;
            entry.1 += 1;
            total += dur as u64;
            runs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::EmptyCorpus);
    }
    if runs == 0 {
        // Only empty sequences: nothing observed, fall back to one frame per unit.
        return DurationTable::new(BTreeMap::new(), 1.0);
    }
    let mean_duration = sums
        .into_iter()
        .map(|(unit, (sum, count))| (unit, sum as f64 / count as f64))
        .collect();
    DurationTable::new(mean_duration, total as f64 / runs as f64)
}

/// Looks up a duration prediction for every unit.
pub fn predict_durations(table: &DurationTable, u: &OrigUnitSeq) -> Vec<f64> {
    u.units().iter().map(|&unit| table.lookup(unit)).collect()
}
