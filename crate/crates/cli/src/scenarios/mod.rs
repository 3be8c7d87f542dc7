//! Registered scenarios. Each one rebuilds a published construction, runs
//! the library checks on it and compares the verdicts with the claims made
//! for that construction.

use ddchaos::chaos::{DensityRule, TraceMatrix};
use ddchaos::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

mod gallery;
mod lattice;
mod mlo;
mod shifts;
mod translations;

pub const DEFAULT_SEED: u64 = 0x5eed_d15c;

/// Run parameters. Every scenario has its own defaults; `None` horizon means
/// the scenario's natural one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub horizon: Option<u64>,
    pub delta: f64,
    pub sigma: f64,
    pub eps: Vec<f64>,
    pub seed: u64,
}

impl Params {
    pub fn new(sigma: f64, eps: &[f64]) -> Self {
        Params {
            horizon: None,
            delta: 0.1,
            sigma,
            eps: eps.to_vec(),
            seed: DEFAULT_SEED,
        }
    }

    pub fn horizon_or(&self, default: u64) -> u64 {
        self.horizon.unwrap_or(default)
    }

    pub fn eps_min(&self) -> f64 {
        self.eps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Partial parameters from a config file or flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub horizon: Option<u64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// `self` wins over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            horizon: self.horizon.or(base.horizon),
            delta: self.delta.or(base.delta),
            sigma: self.sigma.or(base.sigma),
            eps: self.eps.or(base.eps),
            seed: self.seed.or(base.seed),
        }
    }

    pub fn apply(&self, mut p: Params) -> std::result::Result<Params, String> {
        if let Some(h) = self.horizon {
            if h == 0 {
                return Err("horizon must be positive".into());
            }
            p.horizon = Some(h);
        }
        if let Some(d) = self.delta {
            if !(0.0..1.0).contains(&d) {
                return Err("delta must lie in [0, 1)".into());
            }
            p.delta = d;
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err("sigma must be positive".into());
            }
            p.sigma = s;
        }
        if let Some(e) = &self.eps {
            if e.is_empty() || e.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err("eps needs one or more positive values".into());
            }
            p.eps = e.clone();
        }
        if let Some(s) = self.seed {
            p.seed = s;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub claim: String,
    pub expected: bool,
    pub observed: bool,
    pub matches: bool,
    pub note: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub claims: Vec<Claim>,
    pub details: serde_json::Map<String, Value>,
}

impl Outcome {
    pub fn claim(
        &mut self,
        claim: impl Into<String>,
        expected: bool,
        observed: bool,
        note: impl Into<String>,
    ) {
        self.claims.push(Claim {
            claim: claim.into(),
            expected,
            observed,
            matches: expected == observed,
            note: note.into(),
        });
    }

    pub fn detail(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v)
            .unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.details.insert(key.to_string(), v);
    }

    pub fn all_match(&self) -> bool {
        self.claims.iter().all(|c| c.matches)
    }
}

/// A trace ready for CSV export: the clause flags use `σ` and the smallest `ε`.
#[derive(Debug)]
pub struct TraceExport {
    pub trace: TraceMatrix,
    pub sigma: f64,
    pub eps: f64,
    pub rule: DensityRule,
}

pub struct Scenario {
    pub name: &'static str,
    /// What the scenario builds, with its parameters.
    pub anchor: &'static str,
    pub defaults: fn() -> Params,
    pub run: fn(&Params) -> Result<Outcome>,
    pub trace: Option<fn(&Params) -> Result<TraceExport>>,
}

pub fn registry() -> Vec<Scenario> {
    let mut v = Vec::new();
    v.extend(mlo::scenarios());
    v.extend(gallery::scenarios());
    v.extend(shifts::scenarios());
    v.extend(lattice::scenarios());
    v.extend(translations::scenarios());
    v
}

pub fn find(name: &str) -> Option<Scenario> {
    registry().into_iter().find(|s| s.name == name)
}
