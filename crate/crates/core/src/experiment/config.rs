//! Experiment configuration.
//!
//! A configuration is resolved in layers: the built-in preset for the
//! experiment, then a TOML file, then `key = value` fragments, then
//! individual overrides. Later layers win; nested tables merge key by key.
//!
//! ```toml
//! experiment = "aperiodic4"
//! q = 100
//! m = 20
//! n_push = 10
//!
//! [svd]
//! tol = 1e-10
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::oseledets::SvdOptions;
use crate::systems::FlowSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// One Markov map of the circle.
    SingleMap,
    /// Three Markov maps applied in turn.
    Periodic3,
    /// Four perturbed circle maps driven by a subshift sequence.
    Aperiodic4,
    /// The Lorenz-driven travelling wave on the cylinder.
    Wave2d,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::SingleMap,
        ExperimentKind::Periodic3,
        ExperimentKind::Aperiodic4,
        ExperimentKind::Wave2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SingleMap => "single-map",
            ExperimentKind::Periodic3 => "periodic3",
            ExperimentKind::Aperiodic4 => "aperiodic4",
            ExperimentKind::Wave2d => "wave2d",
        }
    }

    pub fn is_discrete(self) -> bool {
        self != ExperimentKind::Wave2d
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Resolution of the flow experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 120×60 boxes, 100 test points, M = 40, N = 20.
    #[default]
    Desk,
    /// 240×120 boxes, 400 test points, M = 80, N = 40.
    Full,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Full => "full",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            _ => Err(Error::Config(format!("unknown preset {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentKind,
    pub preset: Preset,
    /// Boxes per axis: one entry on the circle, two on the cylinder.
    pub cells: Vec<usize>,
    /// Test points per box; a perfect square on the cylinder.
    pub q: usize,
    /// Length of the long product whose singular vectors seed the modes.
    pub m: usize,
    /// Push-forward length from the seed time to the reference time.
    pub n_push: usize,
    /// Number of leading modes.
    pub modes: usize,
    /// Map experiments: number of steps followed after the reference time.
    pub family_steps: usize,
    /// Flow experiment: elapsed times after the reference time at which
    /// pushed modes are stored. The last one is the coherent pair horizon.
    pub checkpoints: Vec<f64>,
    /// Push lengths `N` for the convergence diagnostic (map experiments).
    pub delta_n: Vec<usize>,
    /// Write every Ulam matrix into the bundle.
    pub write_matrices: bool,
    /// Worker threads; unset uses every core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub svd: SvdOptions,
    pub flow: FlowSystem,
}

impl Config {
    pub fn preset(kind: ExperimentKind, preset: Preset) -> Self {
        let base = Config {
            experiment: kind,
            preset,
            cells: vec![6],
            q: 30,
            m: 20,
            n_push: 10,
            modes: 3,
            family_steps: 1,
            checkpoints: Vec::new(),
            delta_n: Vec::new(),
            write_matrices: false,
            workers: None,
            output: None,
            svd: SvdOptions::default(),
            flow: FlowSystem::default(),
        };
        match (kind, preset) {
            (ExperimentKind::SingleMap, _) => base,
            (ExperimentKind::Periodic3, _) => Config {
                m: 24,
                n_push: 12,
                family_steps: 2,
                ..base
            },
            (ExperimentKind::Aperiodic4, _) => Config {
                cells: vec![100],
                q: 100,
                family_steps: 6,
                delta_n: (2..=19).collect(),
                ..base
            },
            (ExperimentKind::Wave2d, Preset::Desk) => Config {
                cells: vec![120, 60],
                q: 100,
                m: 40,
                n_push: 20,
                family_steps: 0,
                checkpoints: vec![2.5, 5.0, 7.5, 10.0],
                ..base
            },
            (ExperimentKind::Wave2d, Preset::Full) => Config {
                cells: vec![240, 120],
                q: 400,
                m: 80,
                n_push: 40,
                family_steps: 0,
                checkpoints: vec![2.5, 5.0, 7.5, 10.0],
                ..base
            },
        }
    }

    /// Merge `layers` over the preset and validate the result.
    ///
    /// `kind` and `preset` override the corresponding keys of the layers;
    /// without them the last layer naming one decides.
    pub fn resolve(
        kind: Option<ExperimentKind>,
        preset: Option<Preset>,
        layers: &[toml::Table],
    ) -> Result<Self> {
        let pick = |key: &str| -> Option<String> {
            layers
                .iter()
                .rev()
                .find_map(|l| l.get(key).and_then(|v| v.as_str()).map(str::to_owned))
        };
        let kind = match kind {
            Some(k) => k,
            None => pick("experiment")
                .ok_or_else(|| Error::Config("no experiment given".into()))?
                .parse()?,
        };
        let preset = match preset {
            Some(p) => p,
            None => pick("preset").map(|p| p.parse()).transpose()?.unwrap_or_default(),
        };
        let mut table = toml::Table::try_from(Self::preset(kind, preset))
            .map_err(|e| Error::Config(e.to_string()))?;
        for layer in layers {
            merge(&mut table, layer);
        }
        table.insert("experiment".into(), kind.name().into());
        table.insert("preset".into(), preset.name().into());
        let config: Config = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn grid(&self) -> Result<Grid> {
        match (self.experiment.is_discrete(), self.cells.as_slice()) {
            (true, &[n]) => Ok(Grid::circle(n)),
            (false, &[nx, ny]) => Ok(Grid::cylinder(nx, ny)),
            _ => Err(Error::Config(format!(
                "{} needs {} cell counts, got {:?}",
                self.experiment,
                if self.experiment.is_discrete() { 1 } else { 2 },
                self.cells
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.cells.contains(&0) {
            return Err(Error::Config("cell counts must be positive".into()));
        }
        if self.q == 0 {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if grid.dim() == 2 {
            grid.lattice_side(self.q)?;
        }
        if self.m == 0 || self.n_push > self.m {
            return Err(Error::Config(format!(
                "need m >= n_push and m >= 1, got m = {}, n_push = {}",
                self.m, self.n_push
            )));
        }
        if self.modes < 2 || self.modes > grid.len() {
            return Err(Error::Config(format!(
                "modes must lie in 2..={}, got {}",
                grid.len(),
                self.modes
            )));
        }
        if self.experiment == ExperimentKind::Aperiodic4 && self.family_steps == 0 {
            return Err(Error::Config("family_steps must be at least 1".into()));
        }
        if self.delta_n.contains(&0) {
            return Err(Error::Config("delta_n entries must be positive".into()));
        }
        if !self.experiment.is_discrete() {
            if self.n_push == 0 {
                return Err(Error::Config("wave2d needs n_push >= 1".into()));
            }
            if self.checkpoints.is_empty() {
                return Err(Error::Config("wave2d needs at least one checkpoint".into()));
            }
            let mut prev = 0.0;
            for &c in &self.checkpoints {
                if !(c.is_finite() && c > prev) {
                    return Err(Error::Config(format!(
                        "checkpoints must be positive and increasing, got {:?}",
                        self.checkpoints
                    )));
                }
                prev = c;
            }
            self.flow.validate()?;
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !(self.svd.tol > 0.0) || self.svd.max_sweeps == 0 {
            return Err(Error::Config("svd.tol and svd.max_sweeps must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Parse TOML text into a layer.
pub fn parse_layer(text: &str, source: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Parse {
        source_name: source.to_owned(),
        message: e.to_string(),
    })
}

fn merge(base: &mut toml::Table, layer: &toml::Table) {
    for (key, value) in layer {
        match (base.get_mut(key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(l)) => merge(b, l),
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
}
