//! Run configuration shared by all subcommands.
//!
//! A [`RunConfig`] is everything that determines a run's outputs. It is
//! written into every metadata file, so a metadata file can be fed back with
//! `--config` to reproduce the run. Thread count and output directory do not
//! affect results and are kept out of it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stereoboot_core::bootstrap::BOOTSTRAP_GCM_REFINEMENT;
use stereoboot_core::estimators::DEFAULT_GCM_REFINEMENT;
use stereoboot_core::{EstimatorKind, EstimatorOptions, IntervalStyle, RadialModel};

use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Estimate,
    Ci,
    Simulate,
    Mc,
    Coverage,
}

impl CommandName {
    fn default_refinement(self) -> usize {
        match self {
            CommandName::Estimate => DEFAULT_GCM_REFINEMENT,
            _ => BOOTSTRAP_GCM_REFINEMENT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Recenter {
    #[default]
    None,
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Which CSV columns hold the data.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Columns {
    /// `y` if the header has it, otherwise `x1,x2`.
    #[default]
    Auto,
    Positions(String, String),
    Radii(String),
}

impl FromStr for Columns {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            ["auto"] => Ok(Columns::Auto),
            [y] if !y.is_empty() => Ok(Columns::Radii(y.to_string())),
            [a, b] if !a.is_empty() && !b.is_empty() => Ok(Columns::Positions(a.to_string(), b.to_string())),
            _ => Err(format!("columns must be 'auto', one name or two comma-separated names, got '{s}'")),
        }
    }
}

impl fmt::Display for Columns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Columns::Auto => f.write_str("auto"),
            Columns::Positions(a, b) => write!(f, "{a},{b}"),
            Columns::Radii(y) => f.write_str(y),
        }
    }
}

impl TryFrom<String> for Columns {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Columns> for String {
    fn from(c: Columns) -> Self {
        c.to_string()
    }
}

/// Evaluation points: `start:end:count` (inclusive, equally spaced) or an
/// explicit comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GridSpec {
    Range { start: f64, end: f64, count: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            GridSpec::Range { start, end, count } => {
                if count == 1 {
                    return vec![start];
                }
                let step = (end - start) / (count - 1) as f64;
                (0..count).map(|i| if i + 1 == count { end } else { start + step * i as f64 }).collect()
            }
            GridSpec::List(ref xs) => xs.clone(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad grid value '{t}' in '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, m] => {
                let count: usize = m.trim().parse().map_err(|_| format!("bad grid count in '{s}'"))?;
                let (start, end) = (num(a)?, num(b)?);
                if count == 0 || end < start {
                    return Err(format!("grid '{s}' needs count >= 1 and end >= start"));
                }
                Ok(GridSpec::Range { start, end, count })
            }
            [list] => Ok(GridSpec::List(list.split(',').map(num).collect::<Result<_, _>>()?)),
            _ => Err(format!("grid must be 'start:end:count' or a comma list, got '{s}'")),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Range { start, end, count } => write!(f, "{start}:{end}:{count}"),
            GridSpec::List(xs) => {
                let parts: Vec<String> = xs.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> Self {
        g.to_string()
    }
}

mod model_text {
    use serde::{Deserialize, Deserializer, Serializer};
    use stereoboot_core::RadialModel;

    pub fn serialize<S: Serializer>(m: &Option<RadialModel>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => s.serialize_some(&m.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<RadialModel>, D::Error> {
        Option::<String>::deserialize(d)?.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub columns: Columns,
    #[serde(default)]
    pub recenter: Recenter,
    /// Rows that may be dropped before ingestion fails.
    #[serde(default)]
    pub max_rejected: usize,
    #[serde(default)]
    pub kinds: Vec<EstimatorKind>,
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Bootstrap replicates `B`.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub style: IntervalStyle,
    /// Interior grid points per data gap for `F̌`; resolved per command
    /// when absent.
    #[serde(default)]
    pub refinement: Option<usize>,
    #[serde(default)]
    pub clamp: bool,
    #[serde(default, with = "model_text")]
    pub model: Option<RadialModel>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        Self {
            command,
            input: None,
            columns: Columns::Auto,
            recenter: Recenter::None,
            max_rejected: 0,
            kinds: Vec::new(),
            x0: None,
            grid: None,
            replicates: default_replicates(),
            alpha: default_alpha(),
            seed: 0,
            style: IntervalStyle::default(),
            refinement: None,
            clamp: false,
            model: None,
            n: None,
            reps: None,
            format: OutputFormat::Csv,
        }
    }

    /// Reads a config file, or the `config` object of a metadata file.
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let inner = match value {
            serde_json::Value::Object(mut map) if map.contains_key("spec_version") => {
                map.remove("config").unwrap_or(serde_json::Value::Null)
            }
            other => other,
        };
        serde_json::from_value(inner).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills in command-dependent defaults.
    pub fn resolved(mut self) -> Self {
        if self.refinement.is_none() {
            self.refinement = Some(self.command.default_refinement());
        }
        self
    }

    pub fn options(&self) -> EstimatorOptions {
        EstimatorOptions {
            gcm_refinement: self.refinement.unwrap_or(self.command.default_refinement()),
            clamp: self.clamp,
        }
    }

    /// Evaluation points from `grid`, else the single point `x0`.
    pub fn points(&self) -> Option<Vec<f64>> {
        match (&self.grid, self.x0) {
            (Some(g), _) => Some(g.points()),
            (None, Some(x)) => Some(vec![x]),
            (None, None) => None,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        use CommandName::*;
        if self.refinement == Some(0) {
            return config_err("refinement must be at least 1");
        }
        if matches!(self.command, Estimate | Ci) && self.input.is_none() {
            return config_err("--input is required");
        }
        if matches!(self.command, Estimate | Ci | Mc | Coverage) && self.kinds.is_empty() {
            return config_err("no estimator kinds requested");
        }
        if matches!(self.command, Simulate | Mc | Coverage) {
            if self.model.is_none() {
                return config_err("--model is required");
            }
            let min_n = if self.command == Mc { 2 } else { 1 };
            match self.n {
                Some(n) if n >= min_n => {}
                _ => return config_err(format!("--n must be at least {min_n}")),
            }
        }
        if matches!(self.command, Ci | Coverage) {
            if self.replicates == 0 {
                return config_err("--B must be at least 1");
            }
            if !(self.alpha > 0.0 && self.alpha < 1.0) {
                return config_err(format!("--alpha must lie in (0, 1), got {}", self.alpha));
            }
        }
        if matches!(self.command, Mc | Coverage) {
            match self.x0 {
                Some(x) if x.is_finite() && x > 0.0 => {}
                _ => return config_err("--x0 must be given and positive"),
            }
            let min_reps = if self.command == Mc { 2 } else { 1 };
            match self.reps {
                Some(r) if r >= min_reps => {}
                _ => return config_err(format!("--reps must be at least {min_reps}")),
            }
        }
        if matches!(self.command, Estimate | Ci) {
            let needs_points = self.command == Ci || self.kinds.iter().any(|k| k.is_naive());
            match self.points() {
                None if needs_points => return config_err("--grid or --x0 is required"),
                None => {}
                Some(points) => {
                    let lowest_ok = |x: f64| if self.command == Ci { x > 0.0 } else { x >= 0.0 };
                    if points.iter().any(|&x| !(x.is_finite() && lowest_ok(x))) {
                        return config_err("evaluation points must be finite and positive");
                    }
                    if points.windows(2).any(|w| w[0] >= w[1]) {
                        return config_err("evaluation points must be strictly increasing");
                    }
                }
            }
        }
        Ok(())
    }
}
