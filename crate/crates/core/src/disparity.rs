//! Pairwise and multi-group disparities, the uncertainty attached to them,
//! and assembly of the resulting decision-maker points.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    frequentist_treatment, normalized_variance, posterior_from_counts, posterior_mean, Flavor,
    GroupObservation, PosteriorShape,
};
use crate::error::{Error, Result};

/// Two distinct groups to be compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPair {
    pub i: GroupObservation,
    pub j: GroupObservation,
}

impl GroupPair {
    pub fn new(i: GroupObservation, j: GroupObservation) -> Result<Self> {
        if i.group_label == j.group_label {
            return Err(Error::SameGroup(i.group_label));
        }
        Ok(Self { i, j })
    }

    /// Builds a pair directly from counts, labeling the groups `i` and `j`.
    pub fn from_counts(n_i: u64, k_i: u64, n_j: u64, k_j: u64) -> Result<Self> {
        Self::new(
            GroupObservation::new("i", n_i, k_i)?,
            GroupObservation::new("j", n_j, k_j)?,
        )
    }

    pub fn swapped(&self) -> Self {
        Self {
            i: self.j.clone(),
            j: self.i.clone(),
        }
    }
}

/// Estimates recorded for one group of a decision-maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: u64,
    pub k: u64,
    /// Frequentist treatment `k / n`.
    pub p: f64,
    /// Posterior mean under the uniform prior.
    pub posterior_mean: f64,
    pub posterior: PosteriorShape,
    pub normalized_variance: f64,
}

impl GroupSummary {
    pub fn from_observation(obs: &GroupObservation) -> Result<Self> {
        let posterior = posterior_from_counts(obs)?;
        Ok(Self {
            label: obs.group_label.clone(),
            n: obs.n,
            k: obs.k,
            p: frequentist_treatment(obs)?.value,
            posterior_mean: posterior_mean(posterior).value,
            posterior,
            normalized_variance: normalized_variance(posterior)?,
        })
    }
}

/// Provenance of a decision-maker point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDetail {
    /// First group of the pair; the most privileged one for multi-group audits.
    pub i: GroupSummary,
    /// Second group of the pair; the least privileged one for multi-group audits.
    pub j: GroupSummary,
    /// Flavor of the reported disparity.
    pub flavor: Flavor,
    /// Set for multi-group audits: the flavor used to pick the extreme
    /// groups, which is always frequentist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremes_selected_by: Option<Flavor>,
}

/// A decision-maker as the point (disparity, uncertainty) in the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionMakerPoint {
    pub label: String,
    pub disparity: f64,
    pub uncertainty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<PointDetail>,
}

impl DecisionMakerPoint {
    /// A bare point without provenance.
    pub fn new(label: impl Into<String>, disparity: f64, uncertainty: f64) -> Result<Self> {
        let point = Self {
            label: label.into(),
            disparity,
            uncertainty,
            detail: None,
        };
        point.check_domain()?;
        Ok(point)
    }

    pub fn check_domain(&self) -> Result<()> {
        let inside = |v: f64| (0.0..=1.0).contains(&v);
        if inside(self.disparity) && inside(self.uncertainty) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "decision-maker ({}, {}) lies outside [0, 1]^2",
                self.disparity, self.uncertainty
            )))
        }
    }
}

// (a_num / a_den) - (b_num / b_den) with one rounding, so that equal
// rationals give bit-identical results.
fn rational_gap(a_num: u64, a_den: u64, b_num: u64, b_den: u64) -> f64 {
    let num = a_num as i128 * b_den as i128 - b_num as i128 * a_den as i128;
    let den = a_den as i128 * b_den as i128;
    num as f64 / den as f64
}

/// `|k_i/n_i - k_j/n_j|`
pub fn frequentist_disparity(pair: &GroupPair) -> Result<f64> {
    frequentist_treatment(&pair.i)?;
    frequentist_treatment(&pair.j)?;
    Ok(rational_gap(pair.i.k, pair.i.n, pair.j.k, pair.j.n).abs())
}

/// Absolute difference of the posterior means.
pub fn bayesian_disparity(pair: &GroupPair) -> Result<f64> {
    let (si, sj) = (
        posterior_from_counts(&pair.i)?,
        posterior_from_counts(&pair.j)?,
    );
    Ok(rational_gap(si.alpha, si.alpha + si.beta, sj.alpha, sj.alpha + sj.beta).abs())
}

pub fn disparity(pair: &GroupPair, flavor: Flavor) -> Result<f64> {
    match flavor {
        Flavor::Frequentist => frequentist_disparity(pair),
        Flavor::Bayesian => bayesian_disparity(pair),
    }
}

/// Mean of the two groups' normalized posterior variances.
pub fn disparity_uncertainty(pair: &GroupPair) -> Result<f64> {
    let vi = normalized_variance(posterior_from_counts(&pair.i)?)?;
    let vj = normalized_variance(posterior_from_counts(&pair.j)?)?;
    Ok((vi + vj) / 2.0)
}

pub fn decision_maker_from_pair(
    pair: &GroupPair,
    flavor: Flavor,
    label: impl Into<String>,
) -> Result<DecisionMakerPoint> {
    let i = GroupSummary::from_observation(&pair.i)?;
    let j = GroupSummary::from_observation(&pair.j)?;
    Ok(DecisionMakerPoint {
        label: label.into(),
        disparity: disparity(pair, flavor)?,
        uncertainty: (i.normalized_variance + j.normalized_variance) / 2.0,
        detail: Some(PointDetail {
            i,
            j,
            flavor,
            extremes_selected_by: None,
        }),
    })
}

// Exact comparison of k_a / n_a against k_b / n_b.
fn cmp_rate(a: &GroupObservation, b: &GroupObservation) -> Ordering {
    (a.k as u128 * b.n as u128).cmp(&(b.k as u128 * a.n as u128))
}

/// Most privileged (highest rate) and least privileged (lowest rate) group.
///
/// Groups are ordered by frequentist treatment, descending, with ties broken
/// by ascending label; the first and last of that order are returned, so
/// the two are always distinct.
pub fn extreme_groups(
    groups: &[GroupObservation],
) -> Result<(&GroupObservation, &GroupObservation)> {
    if groups.len() < 2 {
        return Err(Error::TooFewGroups(groups.len()));
    }
    for (idx, g) in groups.iter().enumerate() {
        if g.n == 0 {
            return Err(Error::EmptyGroup(g.group_label.clone()));
        }
        if g.k > g.n {
            return Err(Error::InvalidCounts {
                label: g.group_label.clone(),
                n: g.n,
                k: g.k,
            });
        }
        if groups[..idx].iter().any(|h| h.group_label == g.group_label) {
            return Err(Error::DuplicateGroup(g.group_label.clone()));
        }
    }
    let order = |a: &&GroupObservation, b: &&GroupObservation| {
        cmp_rate(b, a).then_with(|| a.group_label.cmp(&b.group_label))
    };
    let most = groups.iter().min_by(order).expect("non-empty");
    let least = groups.iter().max_by(order).expect("non-empty");
    Ok((most, least))
}

/// Max-minus-min disparity over any number of groups. The uncertainty is
/// that of the two extreme groups.
pub fn multigroup_decision_maker(
    groups: &[GroupObservation],
    flavor: Flavor,
    label: impl Into<String>,
) -> Result<DecisionMakerPoint> {
    let (most, least) = extreme_groups(groups)?;
    let pair = GroupPair::new(most.clone(), least.clone())?;
    // most - least is non-negative, so the pairwise absolute value is the same number
    let mut point = decision_maker_from_pair(&pair, flavor, label)?;
    if let Some(detail) = point.detail.as_mut() {
        detail.extremes_selected_by = Some(Flavor::Frequentist);
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair(ni: u64, ki: u64, nj: u64, kj: u64) -> GroupPair {
        GroupPair::from_counts(ni, ki, nj, kj).unwrap()
    }

    fn g(label: &str, n: u64, k: u64) -> GroupObservation {
        GroupObservation::new(label, n, k).unwrap()
    }

    #[test]
    fn frequentist_examples() {
        assert_eq!(frequentist_disparity(&pair(3, 3, 3, 0)).unwrap(), 1.0);
        assert_eq!(frequentist_disparity(&pair(50, 49, 50, 49)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            frequentist_disparity(&pair(6, 5, 4, 0)).unwrap(),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        let empty = GroupPair::new(g("a", 0, 0), g("b", 2, 1)).unwrap();
        assert_eq!(
            frequentist_disparity(&empty),
            Err(Error::EmptyGroup("a".into()))
        );
    }

    #[test]
    fn bayesian_examples() {
        assert_abs_diff_eq!(
            bayesian_disparity(&pair(3, 3, 3, 0)).unwrap(),
            0.6,
            epsilon = 1e-15
        );
        assert_eq!(bayesian_disparity(&pair(1, 1, 1, 1)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            bayesian_disparity(&pair(50, 50, 50, 0)).unwrap(),
            50.0 / 52.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn uncertainty_examples() {
        assert_abs_diff_eq!(
            disparity_uncertainty(&pair(3, 3, 3, 0)).unwrap(),
            0.48,
            epsilon = 1e-12
        );
        assert_eq!(disparity_uncertainty(&pair(1, 1, 1, 0)).unwrap(), 1.0);
        assert!((disparity_uncertainty(&pair(50, 0, 50, 49)).unwrap() - 0.009).abs() < 5e-4);
    }

    #[test]
    fn same_label_is_rejected() {
        assert_eq!(
            GroupPair::new(g("a", 1, 1), g("a", 2, 1)),
            Err(Error::SameGroup("a".into()))
        );
    }

    #[test]
    fn points_from_pairs() {
        let a = decision_maker_from_pair(&pair(3, 3, 3, 0), Flavor::Frequentist, "A").unwrap();
        assert_eq!(
            (a.disparity, (a.uncertainty * 1000.0).round() / 1000.0),
            (1.0, 0.48)
        );
        let detail = a.detail.unwrap();
        assert_eq!(detail.i.posterior, PosteriorShape { alpha: 4, beta: 1 });
        assert_eq!(detail.j.p, 0.0);

        let b = decision_maker_from_pair(&pair(1, 1, 1, 0), Flavor::Frequentist, "B").unwrap();
        assert_eq!((b.disparity, b.uncertainty), (1.0, 1.0));

        let top =
            decision_maker_from_pair(&pair(50, 50, 50, 50), Flavor::Frequentist, "top").unwrap();
        assert_eq!(top.disparity, 0.0);
        assert!((top.uncertainty - 0.006).abs() < 5e-4);
    }

    #[test]
    fn multigroup_examples() {
        let lr = [
            g("African-American", 30, 20),
            g("Asian", 6, 6),
            g("Native American", 4, 2),
            g("Other", 10, 7),
        ];
        let p = multigroup_decision_maker(&lr, Flavor::Frequentist, "LR").unwrap();
        let d = p.detail.as_ref().unwrap();
        assert_eq!(
            (d.i.label.as_str(), d.j.label.as_str()),
            ("Asian", "Native American")
        );
        assert_eq!(p.disparity, 0.5);
        assert!((p.uncertainty - 0.431).abs() < 5e-4);
        assert_eq!(d.extremes_selected_by, Some(Flavor::Frequentist));

        let svm = [g("Asian", 6, 6), g("Native American", 4, 0)];
        let p = multigroup_decision_maker(&svm, Flavor::Frequentist, "SVM").unwrap();
        assert_eq!(p.disparity, 1.0);
        assert!((p.uncertainty - 0.288).abs() < 5e-4);
    }

    #[test]
    fn multigroup_ties_are_lexicographic() {
        let same = [g("c", 4, 2), g("a", 4, 2), g("b", 4, 2)];
        let p = multigroup_decision_maker(&same, Flavor::Frequentist, "x").unwrap();
        let d = p.detail.unwrap();
        assert_eq!(p.disparity, 0.0);
        assert_eq!((d.i.label.as_str(), d.j.label.as_str()), ("a", "c"));

        // 1/2 and 2/4 are the same rate
        let tied_top = [g("z", 2, 1), g("y", 4, 2), g("low", 3, 0)];
        let (most, least) = extreme_groups(&tied_top).unwrap();
        assert_eq!(
            (most.group_label.as_str(), least.group_label.as_str()),
            ("y", "low")
        );
    }

    #[test]
    fn multigroup_errors() {
        assert_eq!(
            multigroup_decision_maker(&[g("a", 1, 1)], Flavor::Frequentist, "x"),
            Err(Error::TooFewGroups(1))
        );
        assert_eq!(
            multigroup_decision_maker(&[g("a", 1, 1), g("b", 0, 0)], Flavor::Frequentist, "x"),
            Err(Error::EmptyGroup("b".into()))
        );
        assert_eq!(
            multigroup_decision_maker(&[g("a", 1, 1), g("a", 2, 0)], Flavor::Frequentist, "x"),
            Err(Error::DuplicateGroup("a".into()))
        );
    }

    #[test]
    fn multigroup_bayesian_uses_posterior_means() {
        let groups = [g("a", 6, 6), g("b", 4, 2)];
        let p = multigroup_decision_maker(&groups, Flavor::Bayesian, "x").unwrap();
        assert_abs_diff_eq!(p.disparity, 7.0 / 8.0 - 0.5, epsilon = 1e-15);
        assert_eq!(p.detail.unwrap().flavor, Flavor::Bayesian);
    }

    #[test]
    fn two_groups_agree_with_pairwise() {
        for (ni, ki, nj, kj) in [
            (3, 3, 3, 0),
            (3, 0, 3, 3),
            (6, 5, 4, 0),
            (5, 2, 5, 2),
            (1, 0, 7, 7),
        ] {
            let pr = pair(ni, ki, nj, kj);
            let multi =
                multigroup_decision_maker(&[pr.i.clone(), pr.j.clone()], Flavor::Frequentist, "m")
                    .unwrap();
            let direct = decision_maker_from_pair(&pr, Flavor::Frequentist, "m").unwrap();
            assert_eq!(multi.disparity, direct.disparity);
            assert_eq!(multi.uncertainty, direct.uncertainty);
        }
    }

    #[test]
    fn metric_and_bound_properties_small_counts() {
        let mut groups = Vec::new();
        for n in 1..=10u64 {
            for k in 0..=n {
                groups.push(g("x", n, k));
            }
        }
        let d = |a: &GroupObservation, b: &GroupObservation| {
            frequentist_disparity(&GroupPair {
                i: a.clone(),
                j: b.clone(),
            })
            .unwrap()
        };
        for a in &groups {
            assert_eq!(d(a, a), 0.0);
            for b in &groups {
                assert_eq!(d(a, b), d(b, a));
                let pr = GroupPair {
                    i: a.clone(),
                    j: b.clone(),
                };
                let u = disparity_uncertainty(&pr).unwrap();
                assert_eq!(u, disparity_uncertainty(&pr.swapped()).unwrap());
                let flipped = GroupPair {
                    i: g("x", a.n, a.n - a.k),
                    j: b.clone(),
                };
                assert_eq!(u, disparity_uncertainty(&flipped).unwrap());
            }
        }
    }

    #[test]
    fn bayesian_disparity_bound() {
        for ni in 1..=20u64 {
            for nj in 1..=20u64 {
                for ki in 0..=ni {
                    for kj in 0..=nj {
                        let pr = pair(ni, ki, nj, kj);
                        let bound =
                            frequentist_disparity(&pr).unwrap() + 2.0 / (ni.min(nj) as f64 + 2.0);
                        assert!(bayesian_disparity(&pr).unwrap() <= bound + 1e-15);
                    }
                }
            }
        }
    }
}
