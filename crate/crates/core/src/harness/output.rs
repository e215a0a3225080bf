use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::bounds::{BoundKind, BoundValues};
use crate::error::{Error, Result};
use crate::format::fmt10;
use crate::harness::run::TrialRecord;

pub const CSV_HEADER: &str = "scenario,grid_value,method,p_err,stderr,bound_prop1,bound_prop2,bound_cor1,bound_prop3,bound_cor2,trials,seed,collisions";

/// How `mii_known` scores invariance; written next to its diagnostics rows.
pub const MII_TEST_NOTE: &str = "z-test mean + chi-square variance; 2*min(p); min over environments";

/// Summary of one (grid point, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scenario: String,
    pub seed: u64,
    pub grid_index: usize,
    pub grid_value: f64,
    pub method: String,
    pub p_err: f64,
    pub stderr: f64,
    /// Mean over trials where the bound was computed.
    pub bounds: BoundValues<f64>,
    pub bound_min: BoundValues<f64>,
    pub bound_max: BoundValues<f64>,
    pub trials: usize,
    pub collisions: usize,
    pub abstentions: usize,
    pub low_confidence: usize,
}

#[derive(Default)]
struct Cell {
    grid_value: f64,
    seed: u64,
    n: usize,
    errors: usize,
    collisions: usize,
    abstentions: usize,
    low_confidence: usize,
    sums: [(f64, usize); 5],
    min: BoundValues<f64>,
    max: BoundValues<f64>,
}

/// Groups records by grid point, then method name.
pub fn aggregate(records: &[TrialRecord]) -> Result<Vec<AggregateRow>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let mut cells: BTreeMap<(usize, &str), Cell> = BTreeMap::new();
    for r in records {
        if r.scenario != first.scenario {
            return Err(Error::MixedScenarios(first.scenario.clone(), r.scenario.clone()));
        }
        let cell = cells.entry((r.grid_index, r.method.as_str())).or_default();
        cell.grid_value = r.grid_value;
        cell.seed = r.seed;
        cell.n += 1;
        cell.errors += r.error as usize;
        cell.collisions += r.collision as usize;
        cell.abstentions += r.abstained as usize;
        cell.low_confidence += r.low_confidence as usize;
        for (k, kind) in BoundKind::ALL.into_iter().enumerate() {
            if let Some(v) = r.bounds.get(kind) {
                cell.sums[k].0 += v;
                cell.sums[k].1 += 1;
                cell.min.set(kind, Some(cell.min.get(kind).map_or(v, |m| m.min(v))));
                cell.max.set(kind, Some(cell.max.get(kind).map_or(v, |m| m.max(v))));
            }
        }
    }
    Ok(cells
        .into_iter()
        .map(|((grid_index, method), c)| {
            let trials = c.n as f64;
            let p_err = c.errors as f64 / trials;
            let mut bounds = BoundValues::default();
            for (k, kind) in BoundKind::ALL.into_iter().enumerate() {
                let (sum, count) = c.sums[k];
                bounds.set(kind, (count > 0).then(|| sum / count as f64));
            }
            AggregateRow {
                scenario: first.scenario.clone(),
                seed: c.seed,
                grid_index,
                grid_value: c.grid_value,
                method: method.to_string(),
                p_err,
                stderr: (p_err * (1.0 - p_err) / trials).sqrt(),
                bounds,
                bound_min: c.min,
                bound_max: c.max,
                trials: c.n,
                collisions: c.collisions,
                abstentions: c.abstentions,
                low_confidence: c.low_confidence,
            }
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt10).unwrap_or_default()
}

fn bound_cells(values: &BoundValues<f64>) -> String {
    BoundKind::ALL
        .iter()
        .map(|&k| opt(values.get(k)))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn rows_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario,
            fmt10(r.grid_value),
            r.method,
            fmt10(r.p_err),
            fmt10(r.stderr),
            bound_cells(&r.bounds),
            r.trials,
            r.seed,
            r.collisions
        );
    }
    out
}

pub fn emit_csv(rows: &[AggregateRow], path: &Path) -> io::Result<()> {
    fs::write(path, rows_csv(rows))
}

/// Per-cell abstention counts and bound ranges.
pub fn diagnostics_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("scenario,grid_value,method,abstentions,low_confidence");
    for bound in BoundKind::ALL {
        let _ = write!(out, ",{bound}_min,{bound}_max");
    }
    out.push_str(",notes\n");
    for r in rows {
        let _ = write!(out, "{},{},{},{},{}", r.scenario, fmt10(r.grid_value), r.method, r.abstentions, r.low_confidence);
        for kind in BoundKind::ALL {
            let _ = write!(out, ",{},{}", opt(r.bound_min.get(kind)), opt(r.bound_max.get(kind)));
        }
        let note = if r.method == "mii_known" { MII_TEST_NOTE } else { "" };
        let _ = writeln!(out, ",{note}");
    }
    out
}

/// One line per (trial, method).
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "scenario,grid_value,trial,method,error,abstained,low_confidence,collision,m,s_star,estimate,bound_prop1,bound_prop2,bound_cor1,bound_prop3,bound_cor2\n",
    );
    let set = |s: crate::support::SupportSet| {
        s.indices().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    };
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            fmt10(r.grid_value),
            r.trial,
            r.method,
            r.error as u8,
            r.abstained as u8,
            r.low_confidence as u8,
            r.collision as u8,
            r.m,
            set(r.s_star),
            r.estimate.map_or_else(|| "NONE".to_string(), set),
            bound_cells(&r.bounds)
        );
    }
    out
}

/// `out.csv` → `out.<tag>.csv`.
pub fn sidecar_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support::SupportSet;

    fn record(grid_index: usize, method: &str, error: bool) -> TrialRecord {
        TrialRecord {
            scenario: "s".into(),
            seed: 3,
            grid_index,
            grid_value: [2.0, 5.0][grid_index],
            trial: 0,
            method: method.into(),
            error,
            abstained: false,
            low_confidence: false,
            bounds: BoundValues {
                prop1: Some(0.25),
                ..Default::default()
            },
            collision: false,
            m: 3,
            s_star: SupportSet::EMPTY,
            estimate: Some(SupportSet::EMPTY),
        }
    }

    #[test]
    fn single_error() {
        let rows = aggregate(&[record(0, "a", true)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].p_err, rows[0].stderr), (1.0, 0.0));
    }

    #[test]
    fn mean_and_order() {
        let recs = [record(1, "b", true), record(0, "b", false), record(0, "a", true), record(0, "b", true)];
        let rows = aggregate(&recs).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.grid_index, r.method.as_str())).collect();
        assert_eq!(keys, [(0, "a"), (0, "b"), (1, "b")]);
        assert_eq!(rows[1].p_err, 0.5);
        assert!((rows[1].stderr - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(rows[1].bounds.prop1, Some(0.25));
        assert_eq!(rows[1].bounds.prop2, None);
    }

    #[test]
    fn mixed_scenarios_rejected() {
        let mut other = record(0, "a", true);
        other.scenario = "t".into();
        assert!(matches!(aggregate(&[record(0, "a", false), other]), Err(Error::MixedScenarios(..))));
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(rows_csv(&[]), format!("{CSV_HEADER}\n"));
        let rows = aggregate(&[record(0, "a", true)]).unwrap();
        let text = rows_csv(&rows);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "s,2,a,1,0,0.25,,,,,1,3,0");
        assert_eq!(text, rows_csv(&rows));
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("/tmp/out.csv"), "trials"), Path::new("/tmp/out.trials.csv"));
        assert_eq!(sidecar_path(Path::new("out"), "trials"), Path::new("out.trials"));
    }
}
