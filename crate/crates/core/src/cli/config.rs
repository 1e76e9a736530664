use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::metrics::Normalization;
use crate::params::{GroupParams, ModelParams};

/// Flat key-value configuration shared by every subcommand. Keys a
/// subcommand does not use are ignored by it; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p_swap0: Option<f64>,
    pub p_swap1: Option<f64>,
    pub p_assort0: Option<f64>,
    pub p_assort1: Option<f64>,
    pub alpha0: Option<f64>,
    pub alpha1: Option<f64>,
    pub p_remove0: Option<f64>,
    pub p_remove1: Option<f64>,
    pub n0: Option<usize>,
    pub n1: Option<usize>,

    pub sweeps: Option<u64>,
    pub sample_every: Option<u64>,
    pub replicas: Option<usize>,
    pub window: Option<f64>,
    pub q: Option<f64>,
    pub seed: Option<u64>,

    pub b: Option<f64>,
    pub c: Option<f64>,
    /// Swap probabilities of the planes to scan.
    pub p_swap: Option<Vec<f64>>,
    pub p_remove: Option<f64>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,

    pub omega: Option<[[f64; 2]; 2]>,
    pub omega_file: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub normalization: Option<Normalization>,

    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }

    /// Entries set in `flags` replace those of `self`.
    pub fn overlay(self, flags: RunConfig) -> Result<Self> {
        let mut base = to_map(&self)?;
        for (k, v) in to_map(&flags)? {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
        Ok(serde_json::from_value(Value::Object(base))?)
    }

    /// Model parameters, falling back to the reference run for unset keys.
    pub fn model(&self) -> Result<ModelParams> {
        let base = ModelParams::reference_run();
        let [g0, g1] = base.groups;
        let group = |g: GroupParams, ps, pa, a, pr: Option<f64>| GroupParams {
            p_swap: ps,
            p_assort: pa,
            alpha: a,
            p_remove: pr.unwrap_or(g.p_remove),
        };
        ModelParams::new(
            [
                group(
                    g0,
                    self.p_swap0.unwrap_or(g0.p_swap),
                    self.p_assort0.unwrap_or(g0.p_assort),
                    self.alpha0.unwrap_or(g0.alpha),
                    self.p_remove0,
                ),
                group(
                    g1,
                    self.p_swap1.unwrap_or(g1.p_swap),
                    self.p_assort1.unwrap_or(g1.p_assort),
                    self.alpha1.unwrap_or(g1.alpha),
                    self.p_remove1,
                ),
            ],
            [
                self.n0.unwrap_or(base.group_sizes[0]),
                self.n1.unwrap_or(base.group_sizes[1]),
            ],
        )
    }

    /// JSON object of the keys that are set.
    pub fn to_value(&self) -> Value {
        let mut m = to_map(self).expect("config serializes");
        m.retain(|_, v| !v.is_null());
        Value::Object(m)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("output"))
    }
}

fn to_map(c: &RunConfig) -> Result<Map<String, Value>> {
    match serde_json::to_value(c)? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("config serializes to an object"),
    }
}
