//! Study results: per-repetition records, aggregate rows recomputable from
//! them, and the on-disk layout (CSVs plus a JSON metadata echo).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RepRecord {
    pub rep: usize,
    pub kind: String,
    pub method: String,
    pub point: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Interval produced (always true for posterior summaries; false when a
    /// variance estimate came out negative).
    pub valid: bool,
    /// Interval covers the true functional; absent when no truth is known.
    pub covered: Option<bool>,
    pub variance: Option<f64>,
    pub ess: Option<f64>,
}

impl RepRecord {
    pub fn length(&self) -> Option<f64> {
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AggregateRow {
    pub kind: String,
    pub method: String,
    pub reps_total: usize,
    /// Repetitions that produced an interval.
    pub reps_valid: usize,
    pub coverage: Option<f64>,
    pub avg_length: Option<f64>,
    pub avg_point: f64,
    pub negative_variance: usize,
    pub avg_ess: Option<f64>,
}

/// One failed repetition, kept out of the aggregates but never silently
/// dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Failure {
    pub rep: usize,
    pub kind: String,
    pub method: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    pub study: String,
    /// True functional values by kind, when the truth is known.
    pub truth: BTreeMap<String, f64>,
    pub records: Vec<RepRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub failures: Vec<Failure>,
    /// Posterior draws per (rep, kind): the resampled values.
    pub posterior_draws: Vec<PosteriorDrawSet>,
    pub metadata: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosteriorDrawSet {
    pub rep: usize,
    pub kind: String,
    pub draws: Vec<f64>,
}

/// Aggregates grouped by (kind, method), averaging over the repetitions
/// that produced intervals; the denominators count successes only.
pub fn aggregate(records: &[RepRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, String), Vec<&RepRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.kind.clone(), r.method.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((kind, method), rs)| {
            let reps_total = rs.len();
            let valid: Vec<&&RepRecord> = rs.iter().filter(|r| r.valid).collect();
            let reps_valid = valid.len();
            let covered: Vec<bool> = valid.iter().filter_map(|r| r.covered).collect();
            let coverage = if covered.is_empty() {
                None
            } else {
                Some(covered.iter().filter(|&&c| c).count() as f64 / covered.len() as f64)
            };
            let lengths: Vec<f64> = valid.iter().filter_map(|r| r.length()).collect();
            let avg_length = if lengths.is_empty() {
                None
            } else {
                Some(lengths.iter().sum::<f64>() / lengths.len() as f64)
            };
            let avg_point = rs.iter().map(|r| r.point).sum::<f64>() / reps_total as f64;
            let negative_variance = rs
                .iter()
                .filter(|r| r.variance.is_some_and(|v| v < 0.0))
                .count();
            let esses: Vec<f64> = rs.iter().filter_map(|r| r.ess).collect();
            let avg_ess = if esses.is_empty() {
                None
            } else {
                Some(esses.iter().sum::<f64>() / esses.len() as f64)
            };
            AggregateRow {
                kind,
                method,
                reps_total,
                reps_valid,
                coverage,
                avg_length,
                avg_point,
                negative_variance,
                avg_ess,
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|b| (b as u8).to_string()).unwrap_or_default()
}

/// Writes aggregate.csv, repetitions.csv, posterior_draws.csv and
/// metadata.json under `dir`.
pub fn write_results(result: &StudyResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut written = Vec::new();
    let io_err = |path: &Path| {
        let p = path.to_path_buf();
        move |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::Io {
                path: p.clone(),
                source: io,
            },
            other => HarnessError::Other(format!("{}: {other:?}", p.display())),
        }
    };

    let agg_path = dir.join("aggregate.csv");
    {
        let mut w = csv::Writer::from_path(&agg_path).map_err(io_err(&agg_path))?;
        w.write_record([
            "study",
            "kind",
            "method",
            "reps_total",
            "reps_valid",
            "coverage",
            "avg_length",
            "avg_point",
            "negative_variance",
            "avg_ess",
        ])
        .map_err(io_err(&agg_path))?;
        for a in &result.aggregates {
            w.write_record([
                result.study.clone(),
                a.kind.clone(),
                a.method.clone(),
                a.reps_total.to_string(),
                a.reps_valid.to_string(),
                fmt_opt(a.coverage),
                fmt_opt(a.avg_length),
                format!("{:.12e}", a.avg_point),
                a.negative_variance.to_string(),
                fmt_opt(a.avg_ess),
            ])
            .map_err(io_err(&agg_path))?;
        }
        w.flush().map_err(|e| HarnessError::Io {
            path: agg_path.clone(),
            source: e,
        })?;
    }
    written.push(agg_path);

    let rep_path = dir.join("repetitions.csv");
    {
        let mut w = csv::Writer::from_path(&rep_path).map_err(io_err(&rep_path))?;
        w.write_record([
            "rep", "kind", "method", "point", "lower", "upper", "length", "valid", "covered",
            "variance", "ess",
        ])
        .map_err(io_err(&rep_path))?;
        for r in &result.records {
            w.write_record([
                r.rep.to_string(),
                r.kind.clone(),
                r.method.clone(),
                format!("{:.12e}", r.point),
                fmt_opt(r.lower),
                fmt_opt(r.upper),
                fmt_opt(r.length()),
                (r.valid as u8).to_string(),
                fmt_opt_bool(r.covered),
                fmt_opt(r.variance),
                fmt_opt(r.ess),
            ])
            .map_err(io_err(&rep_path))?;
        }
        w.flush().map_err(|e| HarnessError::Io {
            path: rep_path.clone(),
            source: e,
        })?;
    }
    written.push(rep_path);

    let draws_path = dir.join("posterior_draws.csv");
    {
        let mut w = csv::Writer::from_path(&draws_path).map_err(io_err(&draws_path))?;
        w.write_record(["rep", "kind", "draw_index", "value"])
            .map_err(io_err(&draws_path))?;
        for set in &result.posterior_draws {
            for (i, v) in set.draws.iter().enumerate() {
                w.write_record([
                    set.rep.to_string(),
                    set.kind.clone(),
                    i.to_string(),
                    format!("{v:.12e}"),
                ])
                .map_err(io_err(&draws_path))?;
            }
        }
        w.flush().map_err(|e| HarnessError::Io {
            path: draws_path.clone(),
            source: e,
        })?;
    }
    written.push(draws_path);

    let meta_path = dir.join("metadata.json");
    {
        let mut meta = result.metadata.clone();
        if let serde_json::Value::Object(map) = &mut meta {
            map.insert(
                "truth".to_string(),
                serde_json::to_value(&result.truth).expect("serializable truth"),
            );
            map.insert(
                "failures".to_string(),
                serde_json::to_value(&result.failures).expect("serializable failures"),
            );
        }
        let mut f = std::fs::File::create(&meta_path).map_err(|e| HarnessError::Io {
            path: meta_path.clone(),
            source: e,
        })?;
        let body = serde_json::to_string_pretty(&meta).expect("serializable metadata");
        f.write_all(body.as_bytes()).map_err(|e| HarnessError::Io {
            path: meta_path.clone(),
            source: e,
        })?;
    }
    written.push(meta_path);
    Ok(written)
}

/// Renders aggregate.csv from a result directory as an aligned text table.
pub fn render_report(dir: &Path) -> Result<String> {
    let agg_path = dir.join("aggregate.csv");
    let mut reader = csv::Reader::from_path(&agg_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::Io {
            path: agg_path.clone(),
            source: io,
        },
        other => HarnessError::Other(format!("{}: {other:?}", agg_path.display())),
    })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::Other(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows: Vec<Vec<String>> = vec![headers];
    for record in reader.records() {
        let record = record.map_err(|e| HarnessError::Other(e.to_string()))?;
        rows.push(
            record
                .iter()
                .map(|cell| {
                    // shorten float cells for the console
                    cell.parse::<f64>()
                        .map(|v| {
                            if cell.contains('e') || cell.contains('.') {
                                format!("{v:.4}")
                            } else {
                                cell.to_string()
                            }
                        })
                        .unwrap_or_else(|_| cell.to_string())
                })
                .collect(),
        );
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Recomputes the aggregates from a persisted repetitions.csv; the round
/// trip must reproduce the persisted aggregate rows exactly.
pub fn read_repetitions(path: &Path) -> Result<Vec<RepRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::Io {
            path: path.to_path_buf(),
            source: io,
        },
        other => HarnessError::Other(format!("{}: {other:?}", path.display())),
    })?;
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| HarnessError::Other(e.to_string()))?;
        let opt = |s: &str| -> Option<f64> {
            if s.is_empty() {
                None
            } else {
                s.parse().ok()
            }
        };
        out.push(RepRecord {
            rep: r[0].parse().unwrap_or(0),
            kind: r[1].to_string(),
            method: r[2].to_string(),
            point: r[3].parse().unwrap_or(f64::NAN),
            lower: opt(&r[4]),
            upper: opt(&r[5]),
            valid: &r[7] == "1",
            covered: match &r[8] {
                "" => None,
                "1" => Some(true),
                _ => Some(false),
            },
            variance: opt(&r[9]),
            ess: opt(&r[10]),
        });
    }
    Ok(out)
}
