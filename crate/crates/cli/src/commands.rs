use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dmrank_core::report::{audit_csv_fields, grid_csv_fields, AUDIT_CSV_HEADER, GRID_CSV_HEADER};
use dmrank_core::synthetic::{generate_grid, ranked_rows, table_extremes, GridSpec};
use dmrank_core::{
    audit, beta_pdf, credible_interval, decision_maker_from_pair, indifference_points,
    parse_dataset, posterior_from_counts, rank_all_with_key, select_optimal, CriterionKind,
    Dataset, DecisionMakerPoint, FairnessCriterion, Flavor, FormatOptions, GroupObservation,
    GroupPair, Utility, UtilityKind,
};
use serde::Serialize;

use crate::output::{csv, Ctx};
use crate::{Command, CriterionArg, Format, InputFile};

pub fn dispatch(command: &Command, ctx: Ctx, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Score {
            n_i,
            k_i,
            n_j,
            k_j,
            disparity,
            mass,
        } => score(
            ctx,
            out,
            [*n_i, *k_i, *n_j, *k_j],
            (*disparity).into(),
            *mass,
        ),
        Command::Rank {
            input,
            scoring,
            tie_key,
        } => rank(
            ctx,
            out,
            input,
            scoring.disparity.into(),
            scoring.utility.into(),
            tie_key.as_deref(),
        ),
        Command::Select { input, scoring } => select(
            ctx,
            out,
            input,
            scoring.disparity.into(),
            scoring.utility.into(),
        ),
        Command::Audit {
            input,
            scoring,
            criterion,
            favorable,
            group_col,
            outcome_col,
            pred_col,
            label,
        } => {
            let kind = match criterion {
                CriterionArg::StatisticalParity => CriterionKind::StatisticalParity,
                CriterionArg::EqualOpportunity => CriterionKind::EqualOpportunity,
                CriterionArg::PredictiveParity => CriterionKind::PredictiveParity,
            };
            let criterion =
                FairnessCriterion::new(kind, group_col, outcome_col, pred_col.clone(), favorable)?;
            let data = read_dataset(input)?;
            let utility: UtilityKind = scoring.utility.into();
            let result = audit(&data, &criterion, scoring.disparity.into(), &utility, label)?;
            match ctx.format {
                Format::Json => ctx.json(out, &result.report),
                Format::Csv => csv(
                    out,
                    Some(&AUDIT_CSV_HEADER),
                    [audit_csv_fields(&result.report, ctx.precision)],
                ),
            }
        }
        Command::Synth {
            scoring,
            sizes,
            extremes,
        } => {
            let spec = GridSpec {
                group_sizes: sizes.iter().copied().collect(),
                utility: scoring.utility.into(),
                flavor: scoring.disparity.into(),
            };
            let grid = generate_grid(&spec)?;
            match extremes {
                Some(count) => {
                    let table = table_extremes(&grid, &spec.utility, *count)?;
                    match ctx.format {
                        Format::Json => ctx.json(out, &table),
                        Format::Csv => csv(
                            out,
                            Some(&GRID_CSV_HEADER),
                            table
                                .top
                                .iter()
                                .chain(&table.bottom)
                                .map(|r| grid_csv_fields(r, ctx.precision)),
                        ),
                    }
                }
                None => {
                    let rows = ranked_rows(&grid, &spec.utility)?;
                    match ctx.format {
                        Format::Json => ctx.json(out, &rows),
                        Format::Csv => csv(
                            out,
                            Some(&GRID_CSV_HEADER),
                            rows.iter().map(|r| grid_csv_fields(r, ctx.precision)),
                        ),
                    }
                }
            }
        }
        Command::Posterior {
            n,
            k,
            mass,
            samples,
        } => posterior(ctx, out, *n, *k, *mass, *samples),
        Command::Indiff { target, samples } => {
            let points = indifference_points(*target, *samples)?;
            match ctx.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Pt {
                        disparity: f64,
                        uncertainty: f64,
                    }
                    let pts: Vec<Pt> = points
                        .iter()
                        .map(|p| Pt {
                            disparity: p.disparity,
                            uncertainty: p.uncertainty,
                        })
                        .collect();
                    ctx.json(out, &serde_json::json!({ "target": target, "points": pts }))
                }
                Format::Csv => csv(
                    out,
                    Some(&["disparity", "uncertainty"]),
                    points
                        .iter()
                        .map(|p| [ctx.num(p.disparity), ctx.num(p.uncertainty)]),
                ),
            }
        }
    }
}

fn read_dataset(input: &InputFile) -> Result<Dataset> {
    let options = if input.tab {
        FormatOptions::tab()
    } else {
        FormatOptions::default()
    };
    let reader: Box<dyn Read> = if input.file == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        Box::new(
            File::open(&input.file)
                .with_context(|| format!("cannot open {}", input.file.display()))?,
        )
    };
    parse_dataset(reader, options).with_context(|| format!("reading {}", input.file.display()))
}

#[derive(Debug, Serialize)]
struct GroupReport {
    label: String,
    n: u64,
    k: u64,
    p: f64,
    posterior_mean: f64,
    alpha: u64,
    beta: u64,
    normalized_variance: f64,
    credible_lo: f64,
    credible_hi: f64,
}

#[derive(Debug, Serialize)]
struct ScoreReport {
    disparity_flavor: Flavor,
    disparity: f64,
    uncertainty: f64,
    u_topsis: f64,
    u_norm: f64,
    credible_mass: f64,
    i: GroupReport,
    j: GroupReport,
}

fn score(ctx: Ctx, out: &mut dyn Write, counts: [u64; 4], flavor: Flavor, mass: f64) -> Result<()> {
    let [n_i, k_i, n_j, k_j] = counts;
    let pair = GroupPair::from_counts(n_i, k_i, n_j, k_j)?;
    let point = decision_maker_from_pair(&pair, flavor, "score")?;
    let detail = point
        .detail
        .as_ref()
        .ok_or_else(|| anyhow!("missing group detail"))?;
    let group = |s: &dmrank_core::GroupSummary| -> Result<GroupReport> {
        let ci = credible_interval(s.posterior, mass)?;
        Ok(GroupReport {
            label: s.label.clone(),
            n: s.n,
            k: s.k,
            p: s.p,
            posterior_mean: s.posterior_mean,
            alpha: s.posterior.alpha,
            beta: s.posterior.beta,
            normalized_variance: s.normalized_variance,
            credible_lo: ci.lo,
            credible_hi: ci.hi,
        })
    };
    let report = ScoreReport {
        disparity_flavor: flavor,
        disparity: point.disparity,
        uncertainty: point.uncertainty,
        u_topsis: UtilityKind::Topsis.evaluate(&point)?.value,
        u_norm: UtilityKind::Norm.evaluate(&point)?.value,
        credible_mass: mass,
        i: group(&detail.i)?,
        j: group(&detail.j)?,
    };
    match ctx.format {
        Format::Json => ctx.json(out, &report),
        Format::Csv => {
            let mut header: Vec<String> = [
                "disparity",
                "uncertainty",
                "u_topsis",
                "u_norm",
                "credible_mass",
            ]
            .map(String::from)
            .to_vec();
            let mut row = vec![
                ctx.num(report.disparity),
                ctx.num(report.uncertainty),
                ctx.num(report.u_topsis),
                ctx.num(report.u_norm),
                ctx.num(mass),
            ];
            for (prefix, g) in [("i", &report.i), ("j", &report.j)] {
                let names = [
                    "n",
                    "k",
                    "p",
                    "posterior_mean",
                    "alpha",
                    "beta",
                    "normalized_variance",
                    "credible_lo",
                    "credible_hi",
                ];
                header.extend(names.iter().map(|n| format!("{n}_{prefix}")));
                row.extend([
                    g.n.to_string(),
                    g.k.to_string(),
                    ctx.num(g.p),
                    ctx.num(g.posterior_mean),
                    g.alpha.to_string(),
                    g.beta.to_string(),
                    ctx.num(g.normalized_variance),
                    ctx.num(g.credible_lo),
                    ctx.num(g.credible_hi),
                ]);
            }
            csv(out, None, [header, row])
        }
    }
}

/// Rows of `label,n_i,k_i,n_j,k_j`, plus the optional tie-key column.
fn load_points(
    input: &InputFile,
    flavor: Flavor,
    tie_key: Option<&str>,
) -> Result<(Vec<DecisionMakerPoint>, Option<Vec<f64>>)> {
    let data = read_dataset(input)?;
    let cols = ["label", "n_i", "k_i", "n_j", "k_j"];
    for c in cols {
        data.column_index(c)?;
    }
    if let Some(key) = tie_key {
        data.column_index(key)?;
    }
    let mut points = Vec::with_capacity(data.len());
    let mut keys = tie_key.map(|_| Vec::with_capacity(data.len()));
    for (idx, record) in data.records().enumerate() {
        let line = idx + 2;
        let get = |c: &str| record.get(c).unwrap_or_default().trim();
        let count = |c: &str| -> Result<u64> {
            get(c).parse().with_context(|| {
                format!(
                    "line {line}: `{c}` is not a non-negative integer: `{}`",
                    get(c)
                )
            })
        };
        let label = get("label").to_owned();
        let i = GroupObservation::new("i", count("n_i")?, count("k_i")?)
            .with_context(|| format!("line {line}"))?;
        let j = GroupObservation::new("j", count("n_j")?, count("k_j")?)
            .with_context(|| format!("line {line}"))?;
        let pair = GroupPair::new(i, j)?;
        points.push(
            decision_maker_from_pair(&pair, flavor, label)
                .with_context(|| format!("line {line}"))?,
        );
        if let (Some(keys), Some(key)) = (keys.as_mut(), tie_key) {
            let v: f64 = get(key)
                .parse()
                .with_context(|| format!("line {line}: `{key}` is not a number"))?;
            keys.push(v);
        }
    }
    if points.is_empty() {
        bail!("no decision-makers in {}", input.file.display());
    }
    Ok((points, keys))
}

#[derive(Debug, Serialize)]
struct RankRow {
    rank: usize,
    label: String,
    n_i: u64,
    k_i: u64,
    n_j: u64,
    k_j: u64,
    disparity: f64,
    uncertainty: f64,
    utility: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tie_group: Option<usize>,
}

fn rank(
    ctx: Ctx,
    out: &mut dyn Write,
    input: &InputFile,
    flavor: Flavor,
    utility: UtilityKind,
    tie_key: Option<&str>,
) -> Result<()> {
    let (points, keys) = load_points(input, flavor, tie_key)?;
    let ranked = rank_all_with_key(&points, &utility, keys.as_deref())?;
    let rows: Vec<RankRow> = ranked
        .entries
        .iter()
        .map(|e| {
            let d = e.point.detail.as_ref().expect("pair points carry detail");
            RankRow {
                rank: e.rank,
                label: e.point.label.clone(),
                n_i: d.i.n,
                k_i: d.i.k,
                n_j: d.j.n,
                k_j: d.j.k,
                disparity: e.point.disparity,
                uncertainty: e.point.uncertainty,
                utility: e.utility.value,
                tie_group: e.tie_group.map(|t| t + 1),
            }
        })
        .collect();
    match ctx.format {
        Format::Json => ctx.json(
            out,
            &serde_json::json!({
                "utility_function": utility.name(),
                "disparity_flavor": flavor,
                "entries": rows,
                "tie_groups": ranked.tie_groups,
            }),
        ),
        Format::Csv => csv(
            out,
            Some(&[
                "rank",
                "label",
                "n_i",
                "k_i",
                "n_j",
                "k_j",
                "disparity",
                "uncertainty",
                "utility",
                "tie_group",
            ]),
            rows.iter().map(|r| {
                [
                    r.rank.to_string(),
                    r.label.clone(),
                    r.n_i.to_string(),
                    r.k_i.to_string(),
                    r.n_j.to_string(),
                    r.k_j.to_string(),
                    ctx.num(r.disparity),
                    ctx.num(r.uncertainty),
                    ctx.num(r.utility),
                    r.tie_group.map(|t| t.to_string()).unwrap_or_default(),
                ]
            }),
        ),
    }
}

fn select(
    ctx: Ctx,
    out: &mut dyn Write,
    input: &InputFile,
    flavor: Flavor,
    utility: UtilityKind,
) -> Result<()> {
    let (points, _) = load_points(input, flavor, None)?;
    let best = select_optimal(&points, &utility)?;
    match ctx.format {
        Format::Json => ctx.json(
            out,
            &serde_json::json!({ "label": best.label, "utility": best.utility.value }),
        ),
        Format::Csv => csv(
            out,
            None,
            [[best.label.clone(), ctx.num(best.utility.value)]],
        ),
    }
}

fn posterior(
    ctx: Ctx,
    out: &mut dyn Write,
    n: u64,
    k: u64,
    mass: f64,
    samples: usize,
) -> Result<()> {
    if samples < 2 {
        bail!("at least two density samples are required");
    }
    let shape = posterior_from_counts(&GroupObservation::new("group", n, k)?)?;
    let ci = credible_interval(shape, mass)?;
    let density: Vec<(f64, f64)> = (0..samples)
        .map(|m| {
            let x = if m + 1 == samples {
                1.0
            } else {
                m as f64 / (samples - 1) as f64
            };
            beta_pdf(shape, x).map(|pdf| (x, pdf))
        })
        .collect::<Result<_, _>>()?;
    match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Sample {
                x: f64,
                pdf: f64,
            }
            ctx.json(
                out,
                &serde_json::json!({
                    "n": n, "k": k, "alpha": shape.alpha, "beta": shape.beta, "mass": mass,
                    "interval": { "lo": ci.lo, "hi": ci.hi },
                    "density": density.iter().map(|&(x, pdf)| Sample { x, pdf }).collect::<Vec<_>>(),
                }),
            )
        }
        Format::Csv => csv(
            out,
            Some(&["x", "pdf", "ci_lo", "ci_hi"]),
            density
                .iter()
                .map(|&(x, pdf)| [ctx.num(x), ctx.num(pdf), ctx.num(ci.lo), ctx.num(ci.hi)]),
        ),
    }
}
