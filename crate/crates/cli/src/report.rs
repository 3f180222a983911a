use std::fs;
use std::path::{Path, PathBuf};

use content_defect::eval::{aggregate, EvalReport, RepetitionMetrics, Summary};

use crate::error::{usage, CliResult};
use crate::experiment::{EXPERIMENT, REPORTS_DIR};

fn sorted_entries(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Parses one per-configuration report written by the experiment command.
pub fn read_report(path: &Path) -> CliResult<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |line: &str| usage(format!("{}: malformed line {line:?}", path.display()));
    let mut release = None;
    let mut config = None;
    let mut reps = Vec::new();
    for line in text.lines().skip(1) {
        // release and config never contain commas; metrics are the last two fields
        let fields: Vec<&str> = line.rsplitn(4, ',').collect();
        if fields.len() != 4 {
            return Err(bad(line));
        }
        let (mae, scc, head) = (fields[0], fields[1], fields[3]);
        let (rel, cfg) = head.split_once(',').ok_or_else(|| bad(line))?;
        release.get_or_insert_with(|| rel.to_string());
        config.get_or_insert_with(|| cfg.to_string());
        reps.push(RepetitionMetrics {
            scc: scc.parse().map_err(|_| bad(line))?,
            mae: mae.parse().map_err(|_| bad(line))?,
        });
    }
    match (release, config) {
        (Some(r), Some(c)) => Ok(EvalReport::new(r, c, 0, reps)),
        _ => Err(usage(format!("{}: no repetitions", path.display()))),
    }
}

/// Re-aggregates every report below `<dir>/reports`.
pub fn load_summary(dir: &Path) -> CliResult<Summary> {
    let root = dir.join(REPORTS_DIR);
    let mut reports = Vec::new();
    for release_dir in sorted_entries(&root)? {
        if !release_dir.is_dir() {
            continue;
        }
        for file in sorted_entries(&release_dir)? {
            if file.extension().is_some_and(|e| e == "csv") {
                reports.push(read_report(&file)?);
            }
        }
    }
    if reports.is_empty() {
        return Err(usage(format!("no reports found under {}", root.display())));
    }
    // restore the run order recorded by the experiment, if present
    let order = run_order(&dir.join(EXPERIMENT));
    reports.sort_by_key(|r| order.iter().position(|c| *c == r.config).unwrap_or(order.len()));
    Ok(aggregate(&reports))
}

fn run_order(path: &Path) -> Vec<String> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    let Ok(value) = text.parse::<toml::Table>() else {
        return Vec::new();
    };
    value
        .get("configs")
        .and_then(|c| c.as_array())
        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
        .unwrap_or_default()
}
