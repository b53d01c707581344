//! Exhaustive synthetic population of two-group decision-makers.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::Flavor;
use crate::disparity::{decision_maker_from_pair, DecisionMakerPoint, GroupPair};
use crate::error::{Error, Result};
use crate::utility::{rank_all, RankedEntry, Utility, UtilityKind};

pub const DEFAULT_GROUP_SIZES: [u64; 4] = [1, 5, 10, 50];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub group_sizes: BTreeSet<u64>,
    pub utility: UtilityKind,
    pub flavor: Flavor,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            group_sizes: DEFAULT_GROUP_SIZES.into_iter().collect(),
            utility: UtilityKind::Topsis,
            flavor: Flavor::Frequentist,
        }
    }
}

impl GridSpec {
    pub fn with_sizes(sizes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let spec = Self {
            group_sizes: sizes.into_iter().collect(),
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_sizes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::Domain("group sizes must be at least 1".into()));
        }
        Ok(())
    }

    /// `(Σ (n + 1))²`
    pub fn cardinality(&self) -> u64 {
        let per_group: u64 = self.group_sizes.iter().map(|n| n + 1).sum();
        per_group * per_group
    }
}

/// Canonical label `n_i:k_i|n_j:k_j`.
pub fn grid_label(n_i: u64, k_i: u64, n_j: u64, k_j: u64) -> String {
    format!("{n_i}:{k_i}|{n_j}:{k_j}")
}

/// One decision-maker per `(n_i, k_i, n_j, k_j)` with `n` drawn from the
/// spec's sizes and `0 <= k <= n`, in lexicographic tuple order.
pub fn generate_grid(spec: &GridSpec) -> Result<Vec<DecisionMakerPoint>> {
    spec.validate()?;
    let groups: Vec<(u64, u64)> = spec
        .group_sizes
        .iter()
        .flat_map(|&n| (0..=n).map(move |k| (n, k)))
        .collect();
    let tuples: Vec<(u64, u64, u64, u64)> = groups
        .iter()
        .flat_map(|&(ni, ki)| groups.iter().map(move |&(nj, kj)| (ni, ki, nj, kj)))
        .collect();
    tuples
        .par_iter()
        .map(|&(ni, ki, nj, kj)| {
            let pair = GroupPair::from_counts(ni, ki, nj, kj)?;
            decision_maker_from_pair(&pair, spec.flavor, grid_label(ni, ki, nj, kj))
        })
        .collect()
}

/// A grid decision-maker with every column of the extremes table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub rank: usize,
    pub label: String,
    pub n_i: u64,
    pub k_i: u64,
    pub n_j: u64,
    pub k_j: u64,
    pub p_i: f64,
    pub p_j: f64,
    pub disparity: f64,
    pub uncertainty: f64,
    pub utility: f64,
}

impl GridRow {
    fn from_entry(entry: &RankedEntry) -> Result<Self> {
        let detail = entry.point.detail.as_ref().ok_or_else(|| {
            Error::Domain(format!("`{}` carries no group detail", entry.point.label))
        })?;
        Ok(Self {
            rank: entry.rank,
            label: entry.point.label.clone(),
            n_i: detail.i.n,
            k_i: detail.i.k,
            n_j: detail.j.n,
            k_j: detail.j.k,
            p_i: detail.i.p,
            p_j: detail.j.p,
            disparity: entry.point.disparity,
            uncertainty: entry.point.uncertainty,
            utility: entry.utility.value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub top: Vec<GridRow>,
    pub bottom: Vec<GridRow>,
}

/// Every grid row in rank order.
pub fn ranked_rows<U: Utility + ?Sized>(
    grid: &[DecisionMakerPoint],
    utility: &U,
) -> Result<Vec<GridRow>> {
    rank_all(grid, utility)?
        .entries
        .iter()
        .map(GridRow::from_entry)
        .collect()
}

/// The `count` highest and `count` lowest ranked rows.
pub fn table_extremes<U: Utility + ?Sized>(
    grid: &[DecisionMakerPoint],
    utility: &U,
    count: usize,
) -> Result<Extremes> {
    let ranked = rank_all(grid, utility)?;
    let entries = &ranked.entries;
    let count = count.min(entries.len());
    let top = entries[..count]
        .iter()
        .map(GridRow::from_entry)
        .collect::<Result<_>>()?;
    let bottom = entries[entries.len() - count..]
        .iter()
        .map(GridRow::from_entry)
        .collect::<Result<_>>()?;
    Ok(Extremes { top, bottom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::topsis_value;

    #[test]
    fn default_grid_size() {
        let spec = GridSpec::default();
        assert_eq!(spec.cardinality(), 4900);
        assert_eq!(generate_grid(&spec).unwrap().len(), 4900);
    }

    #[test]
    fn tiny_grid_is_exhaustive() {
        let grid = generate_grid(&GridSpec::with_sizes([1]).unwrap()).unwrap();
        let labels: Vec<_> = grid.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels, ["1:0|1:0", "1:0|1:1", "1:1|1:0", "1:1|1:1"]);
    }

    #[test]
    fn cardinality_formula() {
        for sizes in [vec![1, 5], vec![2], vec![3, 7, 9], vec![50]] {
            let spec = GridSpec::with_sizes(sizes.clone()).unwrap();
            let expected = (sizes.iter().map(|n| n + 1).sum::<u64>()).pow(2);
            assert_eq!(generate_grid(&spec).unwrap().len() as u64, expected);
        }
        assert_eq!(GridSpec::with_sizes([1, 5]).unwrap().cardinality(), 64);
    }

    #[test]
    fn invalid_specs() {
        assert_eq!(GridSpec::with_sizes([]), Err(Error::EmptyInput));
        assert!(matches!(
            GridSpec::with_sizes([0, 3]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn swap_closure() {
        let grid = generate_grid(&GridSpec::with_sizes([1, 5, 10]).unwrap()).unwrap();
        let by_label: std::collections::HashMap<_, _> =
            grid.iter().map(|p| (p.label.clone(), p)).collect();
        for p in &grid {
            let d = p.detail.as_ref().unwrap();
            let swapped = by_label[&grid_label(d.j.n, d.j.k, d.i.n, d.i.k)];
            assert_eq!(p.disparity, swapped.disparity);
            assert_eq!(p.uncertainty, swapped.uncertainty);
        }
    }

    #[test]
    fn utility_bounded_by_least_uncertain_fair_point() {
        let spec = GridSpec::default();
        let grid = generate_grid(&spec).unwrap();
        let largest = *spec.group_sizes.iter().max().unwrap();
        let sigma_min = crate::disparity::disparity_uncertainty(
            &GroupPair::from_counts(largest, largest, largest, largest).unwrap(),
        )
        .unwrap();
        let cap = topsis_value(0.0, sigma_min);
        assert!(grid
            .iter()
            .all(|p| topsis_value(p.disparity, p.uncertainty) <= cap));
    }

    #[test]
    fn extremes_zero_and_tiny() {
        let grid = generate_grid(&GridSpec::with_sizes([1]).unwrap()).unwrap();
        let none = table_extremes(&grid, &UtilityKind::Topsis, 0).unwrap();
        assert!(none.top.is_empty() && none.bottom.is_empty());
        let all = table_extremes(&grid, &UtilityKind::Topsis, 10).unwrap();
        assert_eq!(all.top.len(), 4);
        assert_eq!(all.bottom.last().unwrap().rank, 4);
        assert_eq!(ranked_rows(&grid, &UtilityKind::Topsis).unwrap().len(), 4);
    }
}
