use std::collections::BTreeMap;
use std::io::Write;

use super::EvalReport;

/// Label of the cross-release row.
pub const ALL_RELEASES: &str = "Mean";

/// Per-release and cross-release mean metrics for each configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    /// Configurations in order of first appearance.
    pub configs: Vec<String>,
    /// Releases in order of first appearance.
    pub releases: Vec<String>,
    cells: BTreeMap<(String, String), (f64, f64)>,
}

/// Groups reports by release and configuration. The cross-release figure is
/// the unweighted mean of per-release means.
pub fn aggregate(reports: &[EvalReport]) -> Summary {
    let mut summary = Summary::default();
    let mut pooled: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in reports {
        if !summary.configs.contains(&r.config) {
            summary.configs.push(r.config.clone());
        }
        if !summary.releases.contains(&r.release) {
            summary.releases.push(r.release.clone());
        }
        pooled
            .entry((r.release.clone(), r.config.clone()))
            .or_default()
            .push((r.mean_scc, r.mean_mae));
    }
    summary.cells = pooled
        .into_iter()
        .map(|(key, v)| {
            let n = v.len() as f64;
            let scc = v.iter().map(|p| p.0).sum::<f64>() / n;
            let mae = v.iter().map(|p| p.1).sum::<f64>() / n;
            (key, (scc, mae))
        })
        .collect();
    summary
}

impl Summary {
    /// `(mean SCC, mean MAE)` of one configuration on one release.
    pub fn cell(&self, release: &str, config: &str) -> Option<(f64, f64)> {
        self.cells.get(&(release.to_string(), config.to_string())).copied()
    }

    /// Unweighted mean over the releases that ran `config`.
    pub fn cross_release(&self, config: &str) -> Option<(f64, f64)> {
        let values: Vec<(f64, f64)> = self.releases.iter().filter_map(|r| self.cell(r, config)).collect();
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        Some((
            values.iter().map(|v| v.0).sum::<f64>() / n,
            values.iter().map(|v| v.1).sum::<f64>() / n,
        ))
    }

    /// `release,config,mean_scc,mean_mae`; cross-release rows use release `Mean`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "release,config,mean_scc,mean_mae")?;
        for release in &self.releases {
            for config in &self.configs {
                if let Some((s, m)) = self.cell(release, config) {
                    writeln!(out, "{release},{config},{s},{m}")?;
                }
            }
        }
        for config in &self.configs {
            if let Some((s, m)) = self.cross_release(config) {
                writeln!(out, "{ALL_RELEASES},{config},{s},{m}")?;
            }
        }
        Ok(())
    }

    /// Two aligned tables (SCC, then MAE): one row per release plus a `Mean`
    /// row, one column per configuration.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let label_width = self
            .releases
            .iter()
            .map(String::len)
            .chain([ALL_RELEASES.len(), "release".len()])
            .max()
            .unwrap_or(7);
        for (title, pick) in [("SCC", 0usize), ("MAE", 1)] {
            writeln!(out, "{title}")?;
            write!(out, "{:<label_width$}", "release")?;
            for c in &self.configs {
                write!(out, "  {c:>w$}", w = c.len().max(6))?;
            }
            writeln!(out)?;
            let rows = self
                .releases
                .iter()
                .map(|r| (r.as_str(), self.configs.iter().map(|c| self.cell(r, c)).collect::<Vec<_>>()))
                .chain(std::iter::once((
                    ALL_RELEASES,
                    self.configs.iter().map(|c| self.cross_release(c)).collect(),
                )));
            for (label, cells) in rows {
                write!(out, "{label:<label_width$}")?;
                for (c, cell) in self.configs.iter().zip(cells) {
                    let text = match cell {
                        Some(v) => format!("{:.4}", if pick == 0 { v.0 } else { v.1 }),
                        None => "-".to_string(),
                    };
                    write!(out, "  {text:>w$}", w = c.len().max(6))?;
                }
                writeln!(out)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
