//! Flat JSON experiment configuration.
//!
//! Every key is optional; experiments read the subset they need and ignore
//! the rest. Keys that are not fields of [`Config`] are rejected.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::RunError;

pub const EXPERIMENTS: [&str; 13] = [
    "phase-diagram",
    "gap-scaling",
    "evolve",
    "error-scaling",
    "tts",
    "tts-scaling",
    "svd",
    "svd-scan",
    "potential",
    "svmc",
    "ira-cycle",
    "ira-markov",
    "ira-spectrum",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Must name the subcommand when present.
    pub experiment: Option<String>,

    pub p: u32,
    /// System size `N`.
    pub n: usize,
    /// Fraction of initially-up spins; `n_up` takes precedence.
    pub c: f64,
    pub n_up: Option<usize>,
    pub gamma: f64,

    /// `qa`, `ara` or `ira`.
    pub protocol: String,
    pub tau: f64,
    pub s_min: f64,
    /// Number of IRA cycles.
    pub r: usize,
    /// Replaces the ARA path by `s = t/tau` at this constant `lambda`.
    pub lambda_override: Option<f64>,

    pub n_list: Vec<usize>,
    pub c_list: Vec<f64>,
    pub gamma_list: Vec<f64>,
    pub beta_list: Vec<f64>,
    /// Explicit annealing times; when empty the log grid below is used.
    pub tau_list: Vec<f64>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,

    /// `diagonal`, `qa` or a number giving a fixed `lambda`.
    pub path: String,
    /// Step of statics scans in `s` and `lambda`.
    pub s_step: f64,
    pub jump_threshold: f64,
    /// Sampling step of gap scans.
    pub s_resolution: f64,
    pub s_tol: f64,

    pub p_d: f64,
    pub tol: f64,
    pub expm_tol: f64,
    /// `cf4` or `midpoint`.
    pub propagator: String,
    pub samples: usize,
    pub refine_steps: usize,

    pub beta: f64,
    pub sweeps: usize,
    pub runs: usize,
    /// `uniform` or `perturbation`.
    pub proposal: String,
    pub proposal_width: f64,

    /// Controls of a single landscape evaluation.
    pub s: f64,
    pub lambda: f64,
    /// Grid points per axis of the potential landscape.
    pub points: usize,
    /// Instantaneous levels traced by `ira-spectrum`.
    pub levels: usize,

    /// `csv` or `jsonl`.
    pub format: String,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            experiment: None,
            p: 3,
            n: 20,
            c: 1.0,
            n_up: None,
            gamma: 1.0,
            protocol: "ara".into(),
            tau: 10.0,
            s_min: 0.5,
            r: 1,
            lambda_override: None,
            n_list: Vec::new(),
            c_list: Vec::new(),
            gamma_list: Vec::new(),
            beta_list: Vec::new(),
            tau_list: Vec::new(),
            tau_min: 1.0,
            tau_max: 1000.0,
            tau_points: 13,
            path: "diagonal".into(),
            s_step: 0.005,
            jump_threshold: 0.05,
            s_resolution: 0.01,
            s_tol: 1e-5,
            p_d: 0.99,
            tol: 1e-9,
            expm_tol: 1e-12,
            propagator: "cf4".into(),
            samples: 101,
            refine_steps: 8,
            beta: 5.0,
            sweeps: 500,
            runs: 100,
            proposal: "uniform".into(),
            proposal_width: 0.1,
            s: 0.5,
            lambda: 0.5,
            points: 101,
            levels: 6,
            format: "csv".into(),
            seed: 0,
            workers: 1,
        }
    }
}

impl Config {
    /// Parses a config document and applies `key=value` overrides. Override
    /// values are read as JSON when they parse as JSON, as strings otherwise.
    pub fn load(document: Option<&str>, overrides: &[String]) -> Result<Config, RunError> {
        let mut map = match document {
            Some(text) => match serde_json::from_str::<Value>(text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(RunError::config("config document must be a JSON object")),
                Err(e) => return Err(RunError::config(format!("config is not valid JSON: {e}"))),
            },
            None => Map::new(),
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| RunError::config(format!("override `{item}` is not of the form key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            map.insert(key.trim().to_string(), value);
        }
        serde_json::from_value(Value::Object(map.clone())).map_err(|e| {
            // serde does not report which field held a mistyped value; find
            // it by deserializing the keys one at a time
            let culprit = map.iter().find(|(k, v)| {
                let single = Map::from_iter([((*k).clone(), (*v).clone())]);
                serde_json::from_value::<Config>(Value::Object(single)).is_err()
            });
            match culprit {
                Some((k, _)) => RunError::config(format!("key `{k}`: {e}")),
                None => RunError::config(e.to_string()),
            }
        })
    }

    /// Checks experiment-independent constraints.
    pub fn validate(&self, experiment: &str) -> Result<(), RunError> {
        if !EXPERIMENTS.contains(&experiment) {
            return Err(RunError::config(format!("unknown experiment `{experiment}`")));
        }
        if let Some(e) = &self.experiment {
            if e != experiment {
                return Err(RunError::config(format!("key `experiment` is `{e}` but the subcommand is `{experiment}`")));
            }
        }
        if !matches!(self.format.as_str(), "csv" | "jsonl") {
            return Err(RunError::config(format!("key `format`: expected csv or jsonl, got `{}`", self.format)));
        }
        if self.workers == 0 {
            return Err(RunError::config("key `workers` must be at least 1"));
        }
        Ok(())
    }

    pub fn n_list(&self) -> Vec<usize> {
        if self.n_list.is_empty() {
            vec![self.n]
        } else {
            self.n_list.clone()
        }
    }

    pub fn c_list(&self) -> Vec<f64> {
        if self.c_list.is_empty() {
            vec![self.c]
        } else {
            self.c_list.clone()
        }
    }

    pub fn gamma_list(&self) -> Vec<f64> {
        if self.gamma_list.is_empty() {
            vec![self.gamma]
        } else {
            self.gamma_list.clone()
        }
    }

    pub fn beta_list(&self) -> Vec<f64> {
        if self.beta_list.is_empty() {
            vec![self.beta]
        } else {
            self.beta_list.clone()
        }
    }

    pub fn taus(&self) -> Result<Vec<f64>, RunError> {
        if !self.tau_list.is_empty() {
            return Ok(self.tau_list.clone());
        }
        if !(self.tau_min > 0.0 && self.tau_max > self.tau_min && self.tau_points >= 2) {
            return Err(RunError::config("keys `tau_min`, `tau_max`, `tau_points` must give a positive increasing grid"));
        }
        Ok(revanneal::dynamics::log_grid(self.tau_min, self.tau_max, self.tau_points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_as_json_or_string() {
        let cfg = Config::load(Some(r#"{"n": 10, "c": 0.8}"#), &["n=12".into(), "path=qa".into(), "n_list=[4,6]".into()]).unwrap();
        assert_eq!(cfg.n, 12);
        assert_eq!(cfg.c, 0.8);
        assert_eq!(cfg.path, "qa");
        assert_eq!(cfg.n_list, vec![4, 6]);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = Config::load(Some(r#"{"gama": 2}"#), &[]).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("gama"));
        let err = Config::load(None, &["bogus=1".into()]).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = Config::load(Some(r#"{"n": "ten"}"#), &[]).unwrap_err();
        assert!(err.to_string().contains("key `n`"), "{err}");
    }

    #[test]
    fn experiment_key_must_match() {
        let cfg = Config::load(Some(r#"{"experiment": "svd"}"#), &[]).unwrap();
        assert!(cfg.validate("svd").is_ok());
        assert!(cfg.validate("svmc").is_err());
        assert!(Config::default().validate("nope").is_err());
    }
}
