//! Tabular outcome data, fairness criteria expressed as an outcome event
//! `E1` conditioned on `E2`, and per-group counting.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bayes::{Flavor, GroupObservation};
use crate::disparity::{multigroup_decision_maker, DecisionMakerPoint, GroupSummary};
use crate::error::{Error, Result};
use crate::utility::{Utility, UtilityValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatOptions {
    pub delimiter: u8,
}

impl Default for FormatOptions {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

impl FormatOptions {
    pub fn tab() -> Self {
        Self { delimiter: b'\t' }
    }
}

/// Rectangular table of verbatim string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub struct Record<'a> {
    columns: &'a [String],
    cells: &'a [String],
}

impl<'a> Record<'a> {
    pub fn get(&self, column: &str) -> Option<&'a str> {
        self.columns
            .iter()
            .position(|c| c == column)
            .map(|idx| self.cells[idx].as_str())
    }

    pub fn cells(&self) -> &'a [String] {
        self.cells
    }
}

impl Dataset {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Parse {
                    line: idx as u64 + 2,
                    message: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| Error::MissingColumn(column.to_owned()))
    }

    pub fn records(&self) -> impl Iterator<Item = Record<'_>> {
        self.rows.iter().map(|cells| Record {
            columns: &self.columns,
            cells,
        })
    }
}

/// Reads delimited text with a header row. Cells are kept verbatim.
pub fn parse_dataset<R: Read>(input: R, options: FormatOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::None)
        .from_reader(input);

    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "missing header row".into(),
        });
    }
    let columns: Vec<String> = header.iter().map(|h| h.trim().to_owned()).collect();
    for (idx, name) in columns.iter().enumerate() {
        if columns[..idx].contains(name) {
            return Err(Error::Parse {
                line: 1,
                message: format!("duplicate column `{name}`"),
            });
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(Dataset { columns, rows })
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    let message = match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => {
            format!("ragged row: expected {expected_len} fields, found {len}")
        }
        _ => err.to_string(),
    };
    Error::Parse { line, message }
}

/// Event over a record, built from exact (trimmed) cell matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// The whole sample.
    Always,
    Equals {
        column: String,
        value: String,
    },
    All(Vec<Predicate>),
}

impl Predicate {
    pub fn equals(column: impl Into<String>, value: impl Into<String>) -> Self {
        Predicate::Equals {
            column: column.into(),
            value: value.into(),
        }
    }

    fn columns<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::Always => {}
            Predicate::Equals { column, .. } => out.push(column),
            Predicate::All(parts) => parts.iter().for_each(|p| p.columns(out)),
        }
    }

    fn compile(&self, data: &Dataset) -> Result<Compiled> {
        Ok(match self {
            Predicate::Always => Compiled::Always,
            Predicate::Equals { column, value } => {
                Compiled::Equals(data.column_index(column)?, value.trim().to_owned())
            }
            Predicate::All(parts) => Compiled::All(
                parts
                    .iter()
                    .map(|p| p.compile(data))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

enum Compiled {
    Always,
    Equals(usize, String),
    All(Vec<Compiled>),
}

impl Compiled {
    fn matches(&self, cells: &[String]) -> bool {
        match self {
            Compiled::Always => true,
            Compiled::Equals(idx, value) => cells[*idx].trim() == value,
            Compiled::All(parts) => parts.iter().all(|p| p.matches(cells)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// `E1`: favorable outcome, `E2`: whole sample.
    StatisticalParity,
    /// `E1`: favorable prediction, `E2`: favorable ground truth.
    EqualOpportunity,
    /// `E1`: favorable ground truth, `E2`: favorable prediction.
    PredictiveParity,
    Custom {
        event: Predicate,
        condition: Predicate,
    },
}

impl CriterionKind {
    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::StatisticalParity => "statistical_parity",
            CriterionKind::EqualOpportunity => "equal_opportunity",
            CriterionKind::PredictiveParity => "predictive_parity",
            CriterionKind::Custom { .. } => "custom",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessCriterion {
    pub kind: CriterionKind,
    /// Protected attribute, used with all of its values.
    pub protected_column: String,
    pub outcome_column: String,
    pub predicted_column: Option<String>,
    /// Cell value of the favorable outcome; never inferred.
    pub favorable_value: String,
}

impl FairnessCriterion {
    pub fn new(
        kind: CriterionKind,
        protected_column: impl Into<String>,
        outcome_column: impl Into<String>,
        predicted_column: Option<String>,
        favorable_value: impl Into<String>,
    ) -> Result<Self> {
        let criterion = Self {
            kind,
            protected_column: protected_column.into(),
            outcome_column: outcome_column.into(),
            predicted_column,
            favorable_value: favorable_value.into(),
        };
        criterion.events()?;
        Ok(criterion)
    }

    /// The outcome event `E1` and the conditioning event `E2`.
    ///
    /// For statistical parity the favorable value is looked up in the
    /// predicted column when one is configured (auditing a model's
    /// decisions), otherwise in the outcome column.
    pub fn events(&self) -> Result<(Predicate, Predicate)> {
        let fav = &self.favorable_value;
        let outcome = || Predicate::equals(&self.outcome_column, fav);
        let predicted = || {
            self.predicted_column
                .as_ref()
                .map(|col| Predicate::equals(col, fav))
                .ok_or_else(|| {
                    Error::InvalidCriterion(format!("{} requires a predicted column", self.kind))
                })
        };
        Ok(match &self.kind {
            CriterionKind::StatisticalParity => {
                let event = if self.predicted_column.is_some() {
                    predicted()?
                } else {
                    outcome()
                };
                (event, Predicate::Always)
            }
            CriterionKind::EqualOpportunity => (predicted()?, outcome()),
            CriterionKind::PredictiveParity => (outcome(), predicted()?),
            CriterionKind::Custom { event, condition } => (event.clone(), condition.clone()),
        })
    }

    /// Every column the criterion reads.
    pub fn referenced_columns(&self) -> Result<Vec<String>> {
        let (e1, e2) = self.events()?;
        let mut cols = vec![self.protected_column.as_str()];
        e1.columns(&mut cols);
        e2.columns(&mut cols);
        let mut out: Vec<String> = Vec::new();
        for c in cols {
            if !out.iter().any(|o| o == c) {
                out.push(c.to_owned());
            }
        }
        Ok(out)
    }
}

/// Per-group counts, sorted by group label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    /// Groups with at least one record satisfying `E2`.
    pub groups: Vec<GroupObservation>,
    /// Groups present in the data but with no record satisfying `E2`.
    pub excluded: Vec<String>,
}

pub fn group_counts(data: &Dataset, criterion: &FairnessCriterion) -> Result<GroupCounts> {
    for column in criterion.referenced_columns()? {
        data.column_index(&column)?;
    }
    let (event, condition) = criterion.events()?;
    let (event, condition) = (event.compile(data)?, condition.compile(data)?);
    let protected = data.column_index(&criterion.protected_column)?;

    let mut counts: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for row in &data.rows {
        let entry = counts.entry(row[protected].trim()).or_default();
        if condition.matches(row) {
            entry.0 += 1;
            if event.matches(row) {
                entry.1 += 1;
            }
        }
    }

    let mut out = GroupCounts {
        groups: Vec::new(),
        excluded: Vec::new(),
    };
    for (label, (n, k)) in counts {
        if n == 0 {
            warn!(
                "group `{label}` has no records satisfying the conditioning event and is excluded"
            );
            out.excluded.push(label.to_owned());
        } else {
            out.groups.push(GroupObservation {
                group_label: label.to_owned(),
                n,
                k,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub label: String,
    pub n: u64,
    pub k: u64,
    pub p: f64,
}

impl From<&GroupSummary> for GroupStat {
    fn from(s: &GroupSummary) -> Self {
        Self {
            label: s.label.clone(),
            n: s.n,
            k: s.k,
            p: s.p,
        }
    }
}

/// Result of auditing one decision-maker's outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub label: String,
    pub criterion: String,
    pub disparity_flavor: Flavor,
    pub extremes_selected_by: Flavor,
    pub disparity: f64,
    pub uncertainty: f64,
    pub utility_function: String,
    pub utility: f64,
    pub most_privileged: GroupStat,
    pub least_privileged: GroupStat,
    pub excluded_groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub point: DecisionMakerPoint,
    pub utility: UtilityValue,
    pub report: AuditReport,
}

pub fn audit<U: Utility + ?Sized>(
    data: &Dataset,
    criterion: &FairnessCriterion,
    flavor: Flavor,
    utility: &U,
    label: impl Into<String>,
) -> Result<Audit> {
    let counts = group_counts(data, criterion)?;
    let point = multigroup_decision_maker(&counts.groups, flavor, label)?;
    let value = utility.evaluate(&point)?;
    let detail = point
        .detail
        .as_ref()
        .expect("multi-group points carry detail");
    let report = AuditReport {
        label: point.label.clone(),
        criterion: criterion.kind.name().to_owned(),
        disparity_flavor: flavor,
        extremes_selected_by: Flavor::Frequentist,
        disparity: point.disparity,
        uncertainty: point.uncertainty,
        utility_function: value.function.clone(),
        utility: value.value,
        most_privileged: (&detail.i).into(),
        least_privileged: (&detail.j).into(),
        excluded_groups: counts.excluded,
    };
    Ok(Audit {
        point,
        utility: value,
        report,
    })
}
