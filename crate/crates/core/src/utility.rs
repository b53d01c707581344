//! Utility functions over decision-maker points, the trivial-preference
//! axioms they must respect, ranking and optimal selection.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disparity::DecisionMakerPoint;
use crate::error::{Error, Result};

/// A total map from `[0, 1]^2` to the reals that orders decision-makers.
pub trait Utility: Send + Sync {
    fn name(&self) -> &str;

    /// Raw evaluation at (disparity, uncertainty); no domain checks.
    fn value_at(&self, disparity: f64, uncertainty: f64) -> f64;

    fn evaluate(&self, point: &DecisionMakerPoint) -> Result<UtilityValue> {
        point.check_domain()?;
        Ok(UtilityValue {
            value: self.value_at(point.disparity, point.uncertainty),
            function: self.name().to_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityValue {
    pub value: f64,
    pub function: String,
}

/// Difference of the distances to the worst corner `(1, 0)` and to the
/// ideal corner `(0, 0)`. Ranges over `[-1, 1]`.
pub fn topsis_value(disparity: f64, uncertainty: f64) -> f64 {
    (disparity - 1.0).hypot(uncertainty) - disparity.hypot(uncertainty)
}

/// [`topsis_value`] rescaled to `[0, 1]`.
pub fn norm_value(disparity: f64, uncertainty: f64) -> f64 {
    (topsis_value(disparity, uncertainty) + 1.0) / 2.0
}

/// The shipped utility functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    #[default]
    Topsis,
    Norm,
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Utility for UtilityKind {
    fn name(&self) -> &str {
        match self {
            UtilityKind::Topsis => "topsis",
            UtilityKind::Norm => "norm",
        }
    }

    fn value_at(&self, disparity: f64, uncertainty: f64) -> f64 {
        match self {
            UtilityKind::Topsis => topsis_value(disparity, uncertainty),
            UtilityKind::Norm => norm_value(disparity, uncertainty),
        }
    }
}

pub fn u_topsis(point: &DecisionMakerPoint) -> Result<UtilityValue> {
    UtilityKind::Topsis.evaluate(point)
}

pub fn u_norm(point: &DecisionMakerPoint) -> Result<UtilityValue> {
    UtilityKind::Norm.evaluate(point)
}

/// One strict inequality `u(better) > u(worse)` between corner decision-makers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub better: Corner,
    pub worse: Corner,
    pub better_value: f64,
    pub worse_value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

const FAIR_CERTAIN: Corner = (0.0, 0.0);
const FAIR_UNCERTAIN: Corner = (0.0, 1.0);
const UNFAIR_UNCERTAIN: Corner = (1.0, 1.0);
const UNFAIR_CERTAIN: Corner = (1.0, 0.0);

/// Corner `(disparity, uncertainty)`.
pub type Corner = (f64, f64);

/// The three stated preferences followed by the three implied by transitivity.
pub const TRIVIAL_PREFERENCES: [(&str, Corner, Corner); 6] = [
    (
        "fair certain > fair uncertain",
        FAIR_CERTAIN,
        FAIR_UNCERTAIN,
    ),
    (
        "fair uncertain > unfair uncertain",
        FAIR_UNCERTAIN,
        UNFAIR_UNCERTAIN,
    ),
    (
        "unfair uncertain > unfair certain",
        UNFAIR_UNCERTAIN,
        UNFAIR_CERTAIN,
    ),
    (
        "fair certain > unfair uncertain",
        FAIR_CERTAIN,
        UNFAIR_UNCERTAIN,
    ),
    (
        "fair certain > unfair certain",
        FAIR_CERTAIN,
        UNFAIR_CERTAIN,
    ),
    (
        "fair uncertain > unfair certain",
        FAIR_UNCERTAIN,
        UNFAIR_CERTAIN,
    ),
];

pub fn verify_utility_axioms<U: Utility + ?Sized>(utility: &U) -> AxiomReport {
    let checks = TRIVIAL_PREFERENCES
        .iter()
        .map(|&(name, better, worse)| {
            let better_value = utility.value_at(better.0, better.1);
            let worse_value = utility.value_at(worse.0, worse.1);
            AxiomCheck {
                name,
                better,
                worse,
                better_value,
                worse_value,
                holds: better_value > worse_value,
            }
        })
        .collect();
    AxiomReport { checks }
}

/// A utility that has passed [`verify_utility_axioms`]. Custom utility
/// functions enter ranking through this wrapper.
#[derive(Debug, Clone)]
pub struct VerifiedUtility<U>(U);

impl<U: Utility> VerifiedUtility<U> {
    pub fn register(utility: U) -> Result<Self> {
        let report = verify_utility_axioms(&utility);
        if report.passed() {
            Ok(Self(utility))
        } else {
            Err(Error::AxiomViolation {
                name: utility.name().to_owned(),
                failures: report.failures().count(),
            })
        }
    }

    pub fn into_inner(self) -> U {
        self.0
    }
}

impl<U: Utility> Utility for VerifiedUtility<U> {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn value_at(&self, disparity: f64, uncertainty: f64) -> f64 {
        self.0.value_at(disparity, uncertainty)
    }
}

/// Closure-backed utility, mostly for experiments and tests.
pub struct FnUtility<F> {
    name: String,
    f: F,
}

impl<F> fmt::Debug for FnUtility<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnUtility")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> FnUtility<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Utility for FnUtility<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn value_at(&self, disparity: f64, uncertainty: f64) -> f64 {
        (self.f)(disparity, uncertainty)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    /// 1-based position in the ordering.
    pub rank: usize,
    pub point: DecisionMakerPoint,
    pub utility: UtilityValue,
    /// Index into [`RankedSelection::tie_groups`] when the entry shares its
    /// utility with another entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSelection {
    pub entries: Vec<RankedEntry>,
    /// Labels of contiguous runs of two or more entries with equal utility.
    pub tie_groups: Vec<Vec<String>>,
}

pub fn rank_all<U: Utility + ?Sized>(
    points: &[DecisionMakerPoint],
    utility: &U,
) -> Result<RankedSelection> {
    rank_all_with_key(points, utility, None)
}

/// Ranks by descending utility. Equal utilities (compared as exact doubles)
/// form a tie group; inside a tie group the order follows `secondary`
/// (descending, e.g. accuracy) if given, otherwise input order.
pub fn rank_all_with_key<U: Utility + ?Sized>(
    points: &[DecisionMakerPoint],
    utility: &U,
    secondary: Option<&[f64]>,
) -> Result<RankedSelection> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(keys) = secondary {
        if keys.len() != points.len() {
            return Err(Error::Domain(format!(
                "{} secondary keys supplied for {} decision-makers",
                keys.len(),
                points.len()
            )));
        }
    }
    let values: Vec<UtilityValue> = points
        .par_iter()
        .map(|p| utility.evaluate(p))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.par_sort_by(|&a, &b| {
        let by_utility = values[b].value.total_cmp(&values[a].value);
        match secondary {
            Some(keys) => by_utility.then_with(|| keys[b].total_cmp(&keys[a])),
            None => by_utility,
        }
    });

    let mut entries: Vec<RankedEntry> = Vec::with_capacity(points.len());
    let mut tie_groups: Vec<Vec<String>> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let value = values[order[start]].value;
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&idx| values[idx].value == value)
                .count();
        let tie = if end - start > 1 {
            tie_groups.push(
                order[start..end]
                    .iter()
                    .map(|&idx| points[idx].label.clone())
                    .collect(),
            );
            Some(tie_groups.len() - 1)
        } else {
            None
        };
        for (offset, &idx) in order[start..end].iter().enumerate() {
            entries.push(RankedEntry {
                rank: start + offset + 1,
                point: points[idx].clone(),
                utility: values[idx].clone(),
                tie_group: tie,
            });
        }
        start = end;
    }
    Ok(RankedSelection {
        entries,
        tie_groups,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub label: String,
    pub point: DecisionMakerPoint,
    pub utility: UtilityValue,
}

/// Argmax of the utility in one pass; the earliest point wins a tie.
pub fn select_optimal<U: Utility + ?Sized>(
    points: &[DecisionMakerPoint],
    utility: &U,
) -> Result<Selection> {
    let mut best: Option<(&DecisionMakerPoint, UtilityValue)> = None;
    for point in points {
        let value = utility.evaluate(point)?;
        if best.as_ref().is_none_or(|(_, b)| value.value > b.value) {
            best = Some((point, value));
        }
    }
    let (point, utility) = best.ok_or(Error::EmptyInput)?;
    Ok(Selection {
        label: point.label.clone(),
        point: point.clone(),
        utility,
    })
}

/// Bisection tolerance on the disparity when tracing indifference curves.
pub const INDIFFERENCE_TOL: f64 = 1e-10;

/// Points of the TOPSIS indifference curve at `target`.
///
/// Uncertainty is sampled at `samples` evenly spaced values in `[0, 1]`; for
/// each one the disparity solving `u_topsis = target` is found by bisection
/// (the utility is strictly decreasing in disparity). Uncertainty values
/// where no disparity in `[0, 1]` reaches the target are skipped.
pub fn indifference_points(target: f64, samples: usize) -> Result<Vec<DecisionMakerPoint>> {
    if !(-1.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!(
            "target utility {target} is outside [-1, 1]"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let step = if samples == 1 {
        0.0
    } else {
        1.0 / (samples - 1) as f64
    };
    let mut points = Vec::new();
    for m in 0..samples {
        let sigma = if m + 1 == samples && samples > 1 {
            1.0
        } else {
            m as f64 * step
        };
        if let Some(delta) = solve_disparity(target, sigma) {
            points.push(DecisionMakerPoint {
                label: m.to_string(),
                disparity: delta,
                uncertainty: sigma,
                detail: None,
            });
        }
    }
    Ok(points)
}

fn solve_disparity(target: f64, sigma: f64) -> Option<f64> {
    let u = |d: f64| topsis_value(d, sigma);
    let (top, bottom) = (u(0.0), u(1.0));
    if target > top || target < bottom {
        return None;
    }
    if target == top {
        return Some(0.0);
    }
    if target == bottom {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > INDIFFERENCE_TOL {
        let mid = 0.5 * (lo + hi);
        let v = u(mid);
        if v == target {
            return Some(mid);
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
