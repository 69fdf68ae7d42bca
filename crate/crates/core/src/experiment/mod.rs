//! The bundled experiments and their on-disk result bundles.
//!
//! [`run`] executes one experiment and returns a [`Report`]: a flat
//! `key,value` summary, the outcome of every internal consistency check
//! and the bundle files. [`Report::write_bundle`] puts them on disk:
//!
//! | file | content |
//! |---|---|
//! | `summary.csv` | `schema_version,1`, then every summary value and `check_*` outcome |
//! | `config.toml` | the resolved configuration |
//! | `spectrum.csv` | `j,sigma,amplitude` |
//! | `vectors/checkpoint_{t}_mode_{j}.csv` | `box,value` |
//! | `delta_n.csv` | `N,delta` |
//! | `threshold_curve_{plus,minus}.csv` | `threshold,measure,matched_measure,rho` |
//! | `family_{plus,minus}.csv` | `k,threshold,measure,components,rho,set` |
//! | `rho_mean_{plus,minus}.csv` | `level,mean_rho` |
//! | `sets/{plus,minus}_k{k}.csv` | `box,in_set` |
//! | `matrices/*.coo` | Ulam matrices, when requested |
//!
//! Floating-point values are written in shortest round-trip form, so a
//! bundle is byte-identical whenever the computation is.

mod config;
mod plot;
mod runs;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_layer, Config, ExperimentKind, Preset};
pub use plot::{emit_plotdata, FIGURES};

use crate::error::Result;
use crate::grid::BoxSet;
use crate::parallel::with_workers;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default bundle directory.
pub const OUTPUT_ENV: &str = "COHERENT_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
    /// Bundle files by relative path.
    pub files: BTreeMap<String, String>,
}

impl Report {
    pub(crate) fn put(&mut self, key: impl Into<String>, value: f64) {
        self.summary.push((key.into(), format!("{value:?}")));
    }

    pub(crate) fn put_text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub(crate) fn file(&mut self, path: impl Into<String>, contents: String) {
        self.files.insert(path.into(), contents);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("key,value\nschema_version,{SCHEMA_VERSION}\n");
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k},{v}");
        }
        for c in &self.checks {
            let _ = writeln!(out, "check_{},{}", c.name, if c.pass { "pass" } else { "fail" });
        }
        out
    }

    /// Write `summary.csv` and every bundle file under `dir`.
    pub fn write_bundle(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len() + 1);
        let summary = dir.join("summary.csv");
        fs::write(&summary, self.summary_csv())?;
        written.push(summary);
        for (rel, contents) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Parse a `summary.csv` back into key/value pairs.
pub fn read_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

/// Run the configured experiment with the configured worker count.
pub fn run(config: &Config) -> Result<Report> {
    config.validate()?;
    let mut report = with_workers(config.workers, || runs::execute(config))??;
    report.file("config.toml", config.to_toml()?);
    Ok(report)
}

/// Maximal runs of consecutive boxes as `first..last`, separated by
/// spaces. On a periodic axis a run may wrap (`95..3`).
pub fn box_runs(set: &BoxSet, periodic: bool) -> String {
    let idx = set.indices();
    if idx.is_empty() {
        return String::new();
    }
    let n = set.grid_len();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &i in idx {
        match runs.last_mut() {
            Some(r) if r.1 + 1 == i => r.1 = i,
            _ => runs.push((i, i)),
        }
    }
    if periodic && runs.len() > 1 && runs[0].0 == 0 && runs[runs.len() - 1].1 == n - 1 {
        let first = runs.remove(0);
        runs.last_mut().expect("at least one run").1 = first.1;
        runs.rotate_right(1);
    }
    runs.iter()
        .map(|(a, b)| format!("{a}..{b}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_are_compact() {
        let s = BoxSet::new(10, [0, 1, 4, 8, 9]).unwrap();
        assert_eq!(box_runs(&s, false), "0..1 4..4 8..9");
        assert_eq!(box_runs(&s, true), "8..1 4..4");
        assert_eq!(box_runs(&BoxSet::full(4), true), "0..3");
        assert_eq!(box_runs(&BoxSet::empty(4), true), "");
    }

    #[test]
    fn summary_round_trips() {
        let mut r = Report::default();
        r.put("a", 0.1);
        r.put_text("b", "3..7");
        r.check("c", false, "why");
        let csv = r.summary_csv();
        assert!(csv.starts_with("key,value\nschema_version,1\n"));
        let back = read_summary(&csv);
        assert_eq!(back[1], ("a".to_owned(), "0.1".to_owned()));
        assert_eq!(back[3], ("check_c".to_owned(), "fail".to_owned()));
        assert!(!r.passed());
    }
}
