//! Disparity and Bayesian uncertainty of group-fairness assessments, and
//! utility-based ranking of the decision-makers they describe.
//!
//! A decision-maker (a model or a human) is summarized by the point
//! `(disparity, uncertainty)` in the unit square. Disparity is the absolute
//! difference between two groups' treatment probabilities under a fairness
//! criterion; uncertainty is the mean normalized variance of the groups'
//! Beta posteriors. A utility function that respects the trivial
//! preferences between the four corners of the square turns these points
//! into a ranking.
//!
//! ```
//! use dmrank_core::{decision_maker_from_pair, u_topsis, Flavor, GroupPair};
//!
//! let pair = GroupPair::from_counts(3, 3, 3, 0).unwrap();
//! let point = decision_maker_from_pair(&pair, Flavor::Frequentist, "A").unwrap();
//! assert_eq!(point.disparity, 1.0);
//! assert!((point.uncertainty - 0.48).abs() < 1e-12);
//! assert!((u_topsis(&point).unwrap().value + 0.629).abs() < 5e-4);
//! ```

pub mod bayes;
pub mod disparity;
pub mod error;
pub mod ingest;
pub mod report;
pub mod special;
pub mod synthetic;
pub mod utility;

pub use bayes::{
    beta_cdf, beta_pdf, beta_quantile, credible_interval, frequentist_treatment,
    normalized_variance, posterior_from_counts, posterior_mean, posterior_variance,
    CredibleInterval, Flavor, GroupObservation, PosteriorShape, TreatmentEstimate,
};
pub use disparity::{
    bayesian_disparity, decision_maker_from_pair, disparity_uncertainty, frequentist_disparity,
    multigroup_decision_maker, DecisionMakerPoint, GroupPair, GroupSummary, PointDetail,
};
pub use error::{Error, Result};
pub use ingest::{
    audit, group_counts, parse_dataset, Audit, AuditReport, CriterionKind, Dataset,
    FairnessCriterion, FormatOptions, GroupCounts, Predicate,
};
pub use synthetic::{generate_grid, table_extremes, Extremes, GridRow, GridSpec};
pub use utility::{
    indifference_points, rank_all, rank_all_with_key, select_optimal, u_norm, u_topsis,
    verify_utility_axioms, AxiomReport, RankedSelection, Selection, Utility, UtilityKind,
    UtilityValue, VerifiedUtility,
};
