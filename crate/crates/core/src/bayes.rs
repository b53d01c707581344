//! Frequentist and Beta-Binomial estimates of a group's treatment
//! probability, together with the normalized posterior variance used as the
//! uncertainty measure.
//!
//! The prior is fixed at the uniform `Beta(1, 1)`. With integer counts the
//! largest reachable posterior variance is that of `Beta(1, 2)` (one
//! individual in the group), which is the normalization constant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Counts for one group under a fairness criterion: `n` individuals satisfy
/// the conditioning event, `k` of them also satisfy the outcome event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupObservation {
    pub group_label: String,
    pub n: u64,
    pub k: u64,
}

impl GroupObservation {
    pub fn new(group_label: impl Into<String>, n: u64, k: u64) -> Result<Self> {
        let group_label = group_label.into();
        if k > n {
            return Err(Error::InvalidCounts {
                label: group_label,
                n,
                k,
            });
        }
        Ok(Self { group_label, n, k })
    }

    fn check(&self) -> Result<()> {
        if self.k > self.n {
            return Err(Error::InvalidCounts {
                label: self.group_label.clone(),
                n: self.n,
                k: self.k,
            });
        }
        if self.n == 0 {
            return Err(Error::EmptyGroup(self.group_label.clone()));
        }
        Ok(())
    }
}

/// How a treatment (and hence a disparity) is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Empirical rate `k / n`.
    #[default]
    Frequentist,
    /// Posterior mean under the uniform prior.
    Bayesian,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Frequentist => "frequentist",
            Flavor::Bayesian => "bayesian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreatmentEstimate {
    pub value: f64,
    pub flavor: Flavor,
}

/// Shape parameters of a Beta posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PosteriorShape {
    pub alpha: u64,
    pub beta: u64,
}

impl PosteriorShape {
    pub const PRIOR: PosteriorShape = PosteriorShape { alpha: 1, beta: 1 };

    pub fn new(alpha: u64, beta: u64) -> Result<Self> {
        if alpha == 0 || beta == 0 {
            return Err(Error::InvalidShape { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    fn sum(self) -> f64 {
        (self.alpha + self.beta) as f64
    }
}

impl fmt::Display for PosteriorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Beta({}, {})", self.alpha, self.beta)
    }
}

pub fn frequentist_treatment(obs: &GroupObservation) -> Result<TreatmentEstimate> {
    obs.check()?;
    Ok(TreatmentEstimate {
        value: obs.k as f64 / obs.n as f64,
        flavor: Flavor::Frequentist,
    })
}

/// Conjugate update of the uniform prior: successes go to `alpha`,
/// failures to `beta`.
pub fn posterior_from_counts(obs: &GroupObservation) -> Result<PosteriorShape> {
    obs.check()?;
    Ok(PosteriorShape {
        alpha: PosteriorShape::PRIOR.alpha + obs.k,
        beta: PosteriorShape::PRIOR.beta + obs.n - obs.k,
    })
}

pub fn posterior_mean(shape: PosteriorShape) -> TreatmentEstimate {
    TreatmentEstimate {
        value: shape.alpha as f64 / shape.sum(),
        flavor: Flavor::Bayesian,
    }
}

/// Treatment of a group under the requested flavor.
pub fn treatment(obs: &GroupObservation, flavor: Flavor) -> Result<TreatmentEstimate> {
    match flavor {
        Flavor::Frequentist => frequentist_treatment(obs),
        Flavor::Bayesian => posterior_from_counts(obs).map(posterior_mean),
    }
}

/// `αβ / ((α+β)²(α+β+1))`
pub fn posterior_variance(shape: PosteriorShape) -> f64 {
    let s = shape.sum();
    (shape.alpha as f64 * shape.beta as f64) / (s * s * (s + 1.0))
}

/// Variance of `Beta(1, 2)`, the largest a posterior from a non-empty group can have.
pub const MAX_POSTERIOR_VARIANCE: f64 = 1.0 / 18.0;

/// Posterior variance divided by the variance of `Beta(1, 2)`.
///
/// Evaluated as `18αβ / ((α+β)²(α+β+1))` so that the two maximal shapes
/// map to exactly 1.
pub fn normalized_variance(shape: PosteriorShape) -> Result<f64> {
    if shape.alpha + shape.beta < 3 {
        return Err(Error::OutOfRange(format!(
            "{shape} does not come from a non-empty group; its normalized variance exceeds 1"
        )));
    }
    let s = shape.sum();
    Ok(18.0 * (shape.alpha as f64 * shape.beta as f64) / (s * s * (s + 1.0)))
}

/// Density of `Beta(α, β)` at `x`.
pub fn beta_pdf(shape: PosteriorShape, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
    }
    let (a, b) = (shape.alpha as f64, shape.beta as f64);
    let ln_norm = -special::ln_beta(a, b);
    // x^0 = 1 at the endpoints, avoid ln(0) * 0
    let lx = if shape.alpha == 1 {
        0.0
    } else if x == 0.0 {
        return Ok(0.0);
    } else {
        (a - 1.0) * x.ln()
    };
    let l1x = if shape.beta == 1 {
        0.0
    } else if x == 1.0 {
        return Ok(0.0);
    } else {
        (b - 1.0) * (1.0 - x).ln()
    };
    Ok((ln_norm + lx + l1x).exp())
}

pub fn beta_cdf(shape: PosteriorShape, x: f64) -> Result<f64> {
    special::inc_beta(shape.alpha as f64, shape.beta as f64, x)
}

pub fn beta_quantile(shape: PosteriorShape, p: f64) -> Result<f64> {
    special::inc_beta_inv(shape.alpha as f64, shape.beta as f64, p)
}

/// Equal-tailed credible interval holding `mass` of the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub lo: f64,
    pub hi: f64,
}

pub fn credible_interval(shape: PosteriorShape, mass: f64) -> Result<CredibleInterval> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Domain(format!(
            "credible mass {mass} is outside (0, 1)"
        )));
    }
    let tail = (1.0 - mass) / 2.0;
    Ok(CredibleInterval {
        lo: beta_quantile(shape, tail)?,
        hi: beta_quantile(shape, 1.0 - tail)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn obs(n: u64, k: u64) -> GroupObservation {
        GroupObservation::new("g", n, k).unwrap()
    }

    fn shape(alpha: u64, beta: u64) -> PosteriorShape {
        PosteriorShape::new(alpha, beta).unwrap()
    }

    #[test]
    fn frequentist_examples() {
        assert_eq!(frequentist_treatment(&obs(3, 3)).unwrap().value, 1.0);
        assert_eq!(frequentist_treatment(&obs(10, 8)).unwrap().value, 0.8);
        assert_eq!(frequentist_treatment(&obs(5, 0)).unwrap().value, 0.0);
        assert_eq!(
            frequentist_treatment(&obs(0, 0)),
            Err(Error::EmptyGroup("g".into()))
        );
    }

    #[test]
    fn counts_are_validated() {
        assert!(matches!(
            GroupObservation::new("g", 2, 3),
            Err(Error::InvalidCounts { .. })
        ));
        assert!(matches!(
            PosteriorShape::new(0, 1),
            Err(Error::InvalidShape { .. })
        ));
    }

    #[test]
    fn posterior_update_examples() {
        assert_eq!(posterior_from_counts(&obs(3, 3)).unwrap(), shape(4, 1));
        assert_eq!(posterior_from_counts(&obs(1, 1)).unwrap(), shape(2, 1));
        assert_eq!(posterior_from_counts(&obs(50, 49)).unwrap(), shape(50, 2));
        assert!(matches!(
            posterior_from_counts(&obs(0, 0)),
            Err(Error::EmptyGroup(_))
        ));
    }

    #[test]
    fn posterior_mean_examples() {
        assert_eq!(posterior_mean(shape(4, 1)).value, 0.8);
        assert_eq!(posterior_mean(shape(1, 1)).value, 0.5);
        assert_abs_diff_eq!(
            posterior_mean(shape(2, 1)).value,
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(posterior_mean(shape(2, 1)).flavor, Flavor::Bayesian);
    }

    #[test]
    fn variance_examples() {
        assert_abs_diff_eq!(posterior_variance(shape(1, 2)), 1.0 / 18.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            posterior_variance(shape(4, 1)),
            4.0 / 150.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(posterior_variance(shape(1, 1)), 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            MAX_POSTERIOR_VARIANCE,
            posterior_variance(shape(2, 1)),
            epsilon = 1e-17
        );
    }

    #[test]
    fn normalized_variance_examples() {
        assert_abs_diff_eq!(
            normalized_variance(shape(4, 1)).unwrap(),
            0.48,
            epsilon = 1e-12
        );
        assert_eq!(normalized_variance(shape(2, 1)).unwrap(), 1.0);
        assert_eq!(normalized_variance(shape(1, 2)).unwrap(), 1.0);
        // 18 * 51 / (52^2 * 53)
        assert_abs_diff_eq!(
            normalized_variance(shape(51, 1)).unwrap(),
            918.0 / 143_312.0,
            epsilon = 1e-15
        );
        assert!((normalized_variance(shape(51, 1)).unwrap() - 0.006406).abs() < 5e-7);
        assert!(matches!(
            normalized_variance(shape(1, 1)),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn pdf_examples() {
        assert_abs_diff_eq!(beta_pdf(shape(1, 1), 0.3).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(beta_pdf(shape(2, 1), 0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(beta_pdf(shape(2, 2), 0.5).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(beta_pdf(shape(1, 3), 0.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(beta_pdf(shape(2, 3), 0.0).unwrap(), 0.0);
        assert_eq!(beta_pdf(shape(2, 3), 1.0).unwrap(), 0.0);
        assert!(matches!(beta_pdf(shape(2, 2), 1.01), Err(Error::Domain(_))));
        assert!(matches!(beta_pdf(shape(2, 2), -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn credible_interval_examples() {
        let ci = credible_interval(shape(2, 1), 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.025_f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(ci.hi, 0.975_f64.sqrt(), epsilon = 1e-9);
        assert!((ci.lo - 0.15811).abs() < 5e-6 && (ci.hi - 0.98742).abs() < 5e-6);

        let ci = credible_interval(shape(1, 1), 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.025, epsilon = 1e-9);
        assert_abs_diff_eq!(ci.hi, 0.975, epsilon = 1e-9);

        let ci = credible_interval(shape(1, 2), 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 1.0 - 0.975_f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(ci.hi, 1.0 - 0.025_f64.sqrt(), epsilon = 1e-9);

        for mass in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                credible_interval(shape(2, 2), mass),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn maximal_uncertainty_only_for_single_individual() {
        for n in 1..=30u64 {
            for k in 0..=n {
                let v = normalized_variance(posterior_from_counts(&obs(n, k)).unwrap()).unwrap();
                assert!(v > 0.0 && v <= 1.0);
                assert_eq!(v == 1.0, n == 1);
            }
        }
    }

    proptest! {
        #[test]
        fn doubling_counts_concentrates(n in 1u64..500, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as u64;
            let once = normalized_variance(posterior_from_counts(&obs(n, k)).unwrap()).unwrap();
            let twice = normalized_variance(posterior_from_counts(&obs(2 * n, 2 * k)).unwrap()).unwrap();
            prop_assert!(twice < once);
        }

        #[test]
        fn variance_is_symmetric(a in 1u64..10_000, b in 1u64..10_000) {
            prop_assert_eq!(posterior_variance(shape(a, b)), posterior_variance(shape(b, a)));
        }

        #[test]
        fn mean_stays_close_to_rate(n in 1u64..5_000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).round() as u64;
            let o = obs(n, k);
            let gap = (posterior_mean(posterior_from_counts(&o).unwrap()).value
                - frequentist_treatment(&o).unwrap().value).abs();
            prop_assert!(gap <= 1.0 / (n as f64 + 2.0) + 1e-15);
        }

        #[test]
        fn interval_holds_requested_mass(a in 1u64..80, b in 1u64..80, mass in 0.01f64..0.99) {
            let s = shape(a, b);
            let ci = credible_interval(s, mass).unwrap();
            prop_assert!(ci.lo < ci.hi);
            let got = beta_cdf(s, ci.hi).unwrap() - beta_cdf(s, ci.lo).unwrap();
            prop_assert!((got - mass).abs() <= 1e-8, "mass {} vs {}", got, mass);
        }
    }
}
