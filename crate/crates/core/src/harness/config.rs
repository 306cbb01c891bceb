use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{select_source, Graph, SourcePolicy};
use crate::montecarlo::IsingMcOptions;
use crate::rng::Seed;
use crate::solver::SolverOptions;

use super::grid::SweepGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[serde(alias = "perc")]
    Percolation,
    Ising,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Percolation => "percolation",
            Model::Ising => "ising",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perc" | "percolation" => Ok(Model::Percolation),
            "ising" => Ok(Model::Ising),
            _ => Err(Error::Config(format!("unknown model '{s}' (expected perc or ising)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bp,
    Snbp,
    Mfa,
    Snmfa,
    Mc,
    Snmc,
    Exact,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Bp,
        Method::Snbp,
        Method::Mfa,
        Method::Snmfa,
        Method::Mc,
        Method::Snmc,
        Method::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bp => "bp",
            Method::Snbp => "snbp",
            Method::Mfa => "mfa",
            Method::Snmfa => "snmfa",
            Method::Mc => "mc",
            Method::Snmc => "snmc",
            Method::Exact => "exact",
        }
    }

    pub fn needs_source(self) -> bool {
        matches!(self, Method::Snbp | Method::Snmfa | Method::Snmc)
    }

    /// Parse a comma-separated list such as `bp,snbp,mc`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out: Vec<Method> = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let m: Method = tok.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// How the symmetry-breaking node is picked for a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SourceChoice {
    /// Highest degree, smallest id on ties.
    #[default]
    Auto,
    Node(usize),
    None,
}

impl SourceChoice {
    pub fn resolve(self, g: &Graph) -> Result<Option<usize>> {
        match self {
            SourceChoice::Auto => select_source(g, SourcePolicy::HighestDegree).map(Some),
            SourceChoice::Node(x) => select_source(g, SourcePolicy::Explicit(x)).map(Some),
            SourceChoice::None => Ok(None),
        }
    }
}

impl FromStr for SourceChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(SourceChoice::Auto),
            "none" => Ok(SourceChoice::None),
            other => other
                .parse()
                .map(SourceChoice::Node)
                .map_err(|_| Error::Config(format!("source must be auto, none or a node id, got '{s}'"))),
        }
    }
}

impl fmt::Display for SourceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceChoice::Auto => f.write_str("auto"),
            SourceChoice::None => f.write_str("none"),
            SourceChoice::Node(x) => write!(f, "{x}"),
        }
    }
}

impl TryFrom<String> for SourceChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SourceChoice> for String {
    fn from(s: SourceChoice) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub p_min: f64,
    pub p_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 50,
            p_min: 0.01,
            p_max: 0.99,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<SweepGrid> {
        SweepGrid::linspace(self.p_min, self.p_max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    /// Bond configurations per percolation grid point.
    pub realizations: usize,
    pub ising: IsingMcOptions,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            realizations: DESK_REALIZATIONS,
            ising: IsingMcOptions::default(),
        }
    }
}

pub const DESK_REALIZATIONS: usize = 10_000;
pub const PAPER_REALIZATIONS: usize = 400_000;

/// Everything that determines a run. Serialized into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub methods: Vec<Method>,
    pub seed: Seed,
    pub source: SourceChoice,
    /// Replace desk-scale sample counts by the full-size ones.
    pub paper_scale: bool,
    pub manifest: Option<PathBuf>,
    pub grid: GridConfig,
    pub solver: SolverOptions,
    pub montecarlo: McConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: Model::Percolation,
            methods: vec![Method::Bp, Method::Snbp, Method::Mfa, Method::Mc],
            seed: Seed(1),
            source: SourceChoice::Auto,
            paper_scale: false,
            manifest: None,
            grid: GridConfig::default(),
            solver: SolverOptions::default(),
            montecarlo: McConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Apply `paper_scale`, leaving the flag set so outputs record it.
    pub fn resolved(&self) -> RunConfig {
        let mut out = self.clone();
        if out.paper_scale {
            out.montecarlo.realizations = PAPER_REALIZATIONS;
            out.montecarlo.ising.measurement_divisor = 1.0;
            out.montecarlo.ising.measurements = None;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.solver.validate()?;
        self.montecarlo.ising.validate()?;
        if self.montecarlo.realizations < 2 {
            return Err(Error::Config("montecarlo.realizations must be >= 2".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        Ok(())
    }
}
