//! Fixed-precision rendering and flat CSV rows for reports.

use serde_json::Value;

use crate::ingest::AuditReport;
use crate::synthetic::GridRow;

/// Default number of decimals in rendered output.
pub const DEFAULT_PRECISION: usize = 3;

/// `value` with `digits` decimals, without a `-0.000` for tiny negatives.
pub fn fixed(value: f64, digits: usize) -> String {
    let s = format!("{value:.digits$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

pub fn round_to(value: f64, digits: usize) -> f64 {
    let r: f64 = fixed(value, digits).parse().unwrap_or(value);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds every non-integer number inside a JSON document.
pub fn round_json(value: &mut Value, digits: usize) {
    match value {
        Value::Number(num) if num.is_f64() => {
            if let Some(f) = num.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_to(f, digits)) {
                    *num = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_json(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_json(v, digits)),
        _ => {}
    }
}

pub const AUDIT_CSV_HEADER: [&str; 17] = [
    "label",
    "criterion",
    "disparity_flavor",
    "extremes_selected_by",
    "disparity",
    "uncertainty",
    "utility_function",
    "utility",
    "most_privileged_label",
    "most_privileged_n",
    "most_privileged_k",
    "most_privileged_p",
    "least_privileged_label",
    "least_privileged_n",
    "least_privileged_k",
    "least_privileged_p",
    "excluded_groups",
];

/// Flat CSV fields matching [`AUDIT_CSV_HEADER`]; excluded groups are joined with `;`.
pub fn audit_csv_fields(r: &AuditReport, digits: usize) -> Vec<String> {
    vec![
        r.label.clone(),
        r.criterion.clone(),
        r.disparity_flavor.to_string(),
        r.extremes_selected_by.to_string(),
        fixed(r.disparity, digits),
        fixed(r.uncertainty, digits),
        r.utility_function.clone(),
        fixed(r.utility, digits),
        r.most_privileged.label.clone(),
        r.most_privileged.n.to_string(),
        r.most_privileged.k.to_string(),
        fixed(r.most_privileged.p, digits),
        r.least_privileged.label.clone(),
        r.least_privileged.n.to_string(),
        r.least_privileged.k.to_string(),
        fixed(r.least_privileged.p, digits),
        r.excluded_groups.join(";"),
    ]
}

pub const GRID_CSV_HEADER: [&str; 11] = [
    "rank",
    "label",
    "n_i",
    "k_i",
    "n_j",
    "k_j",
    "p_i",
    "p_j",
    "disparity",
    "uncertainty",
    "utility",
];

pub fn grid_csv_fields(r: &GridRow, digits: usize) -> Vec<String> {
    vec![
        r.rank.to_string(),
        r.label.clone(),
        r.n_i.to_string(),
        r.k_i.to_string(),
        r.n_j.to_string(),
        r.k_j.to_string(),
        fixed(r.p_i, digits),
        fixed(r.p_j, digits),
        fixed(r.disparity, digits),
        fixed(r.uncertainty, digits),
        fixed(r.utility, digits),
    ]
}
