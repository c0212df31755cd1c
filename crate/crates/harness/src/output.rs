//! CSV tables with a provenance header.
//!
//! Every table starts with `# key=value` comment lines recording the command,
//! seed and configuration, followed by a standard CSV header row and records.
//! Numbers use Rust's shortest round-trip formatting, so the same seed gives
//! the same bytes.

use std::io::Write;
use std::path::Path;

use crate::config::Config;
use crate::error::{HarnessError, Result};
use crate::estimators::Method;
use crate::experiments::{GridTable, MethodTable};

pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &str, cfg: &Config, seed: u64) -> Self {
        let mut meta = vec![("command".to_string(), command.to_string()), ("seed".to_string(), seed.to_string())];
        meta.extend(cfg.provenance());
        Table { meta, header: Vec::new(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}").expect("writing to a Vec cannot fail");
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| HarnessError::Config(format!("csv flush: {e}")))
    }

    /// Writes to `path`, or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let bytes = self.to_bytes()?;
        match path {
            Some(p) => std::fs::write(p, bytes).map_err(|e| HarnessError::Io(p.display().to_string(), e)),
            None => std::io::stdout().write_all(&bytes).map_err(|e| HarnessError::Io("stdout".into(), e)),
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn method_table(command: &str, cfg: &Config, seed: u64, t: &MethodTable) -> Table {
    let paths = t.paths.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
    let mut table = Table::new(command, cfg, seed)
        .meta("trials", t.trials)
        .meta("true_paths_cm", paths)
        .meta("statistic", "median absolute first-path error over valid estimates, cm");
    table.header.push("snr".into());
    for m in Method::ALL {
        table.header.push(m.name().into());
    }
    for m in Method::ALL {
        table.header.push(format!("{}_invalid", m.name()));
    }
    for i in 0..t.paths.len() {
        table.header.push(format!("SRA_peak{}_cm", i + 1));
    }
    for row in &t.rows {
        let mut r = vec![num(row.snr)];
        r.extend(row.errors.iter().map(|e| num(e.median)));
        r.extend(row.errors.iter().map(|e| num(e.invalid_fraction)));
        r.extend(row.sra_peaks.iter().map(|&p| num(p)));
        table.rows.push(r);
    }
    table
}

pub fn grid_table(cfg: &Config, seed: u64, t: &GridTable) -> Table {
    let g = &cfg.two_path_grid;
    let (rs, rq) = t.marginal_spearman();
    let mut table = Table::new("two-path-grid", cfg, seed)
        .meta("instances", t.cells.iter().map(|c| c.instances).sum::<usize>())
        .meta("d1_range_cm", format!("{}:{}", g.d1_range.0, g.d1_range.1))
        .meta("separation_range_cm", format!("{}:{}", g.separation_range.0, g.separation_range.1))
        .meta("spearman_strength", rs)
        .meta("spearman_inverse_snr", rq)
        .meta("statistic", "SRA mean absolute first-path error over valid estimates, cm");
    table.header = ["strength", "snr", "mae_cm", "median_cm", "invalid_fraction", "instances"].map(String::from).to_vec();
    for c in &t.cells {
        table.rows.push(vec![
            num(c.strength),
            num(c.snr),
            num(c.sra.mean),
            num(c.sra.median),
            num(c.sra.invalid_fraction),
            c.instances.to_string(),
        ]);
    }
    table
}
