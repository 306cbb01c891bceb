//! Sample summaries shared by the Monte Carlo estimators.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    S1,
    SX,
    AbsM,
    MSq,
    MSigmaX,
    ChiTrue,
    ChiPractical,
    ChiSource,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::S1 => "s1",
            Observable::SX => "s_x",
            Observable::AbsM => "abs_m",
            Observable::MSq => "m_sq",
            Observable::MSigmaX => "m_sigma_x",
            Observable::ChiTrue => "chi_true",
            Observable::ChiPractical => "chi_practical",
            Observable::ChiSource => "chi_source",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean with sample standard deviation (ddof = 1) and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Result<Estimate> {
        Self::from_linearized(mean(xs), xs)
    }

    /// Estimate for a derived quantity whose value is `value` and whose
    /// per-sample linearization (influence values) is `influence`.
    pub fn from_linearized(value: f64, influence: &[f64]) -> Result<Estimate> {
        let count = influence.len();
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 samples for a standard deviation, got {count}"
            )));
        }
        let mu = mean(influence);
        let ss: f64 = influence.iter().map(|x| (x - mu) * (x - mu)).sum();
        let std = (ss / (count - 1) as f64).sqrt();
        Ok(Estimate {
            mean: value,
            std,
            stderr: std / (count as f64).sqrt(),
            count,
        })
    }

    /// `|mean - reference| <= k * stderr`, treating a zero stderr as exact.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        let diff = (self.mean - reference).abs();
        diff <= k * self.stderr || diff <= 1e-12 * reference.abs().max(1.0)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub estimates: BTreeMap<Observable, Estimate>,
}

impl McStats {
    pub fn get(&self, obs: Observable) -> Option<&Estimate> {
        self.estimates.get(&obs)
    }

    pub fn mean(&self, obs: Observable) -> Option<f64> {
        self.get(obs).map(|e| e.mean)
    }

    pub(crate) fn insert(&mut self, obs: Observable, e: Estimate) {
        self.estimates.insert(obs, e);
    }
}
