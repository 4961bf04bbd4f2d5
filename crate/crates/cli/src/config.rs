//! Experiment configuration.
//!
//! Precedence, lowest first: built-in defaults, the `--config` JSON file,
//! positional `key=value` overrides, then the dedicated flags (`--seed`,
//! `--trials`, `--out`, `--graph`).

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use excl_core::chameleon::PinkeningRule;
use excl_core::exact::ProcessKind;
use excl_core::{GraphKind, WeightedGraph};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// `gen:<kind>:<params>` or a path to a graph text file.
    pub graph: String,
    /// Seed for random graph generators.
    pub graph_seed: u64,
    pub seed: u64,
    pub trials: usize,
    pub out: String,
    pub processes: Vec<ProcessKind>,
    pub process: ProcessKind,
    pub k: usize,
    /// Initial tuple; defaults to `0..k`.
    pub start: Option<Vec<usize>>,
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    pub phase_length: f64,
    pub rounds: u64,
    /// Red vertices in the red-decay start state.
    pub red: usize,
    pub rule: PinkeningRule,
    pub k_max: u64,
    pub m: u64,
    pub steps: usize,
    pub method: MethodChoice,
    pub path_families: usize,
    pub state_cap: usize,
    pub time_tol: f64,
    pub suite: String,
    pub trial_scale: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            graph: "gen:cycle:4".into(),
            graph_seed: 0,
            seed: 1,
            trials: 100_000,
            out: "excl-out".into(),
            processes: vec![ProcessKind::Rw, ProcessKind::RwK, ProcessKind::ExK, ProcessKind::IpK],
            process: ProcessKind::ExK,
            k: 2,
            start: None,
            eps: vec![0.25, 0.125],
            times: vec![0.8, 2.0],
            phase_length: 1.0,
            rounds: 20,
            red: 1,
            rule: PinkeningRule::NoPinkCap,
            k_max: 10,
            m: 100,
            steps: 300,
            method: MethodChoice::Exact,
            path_families: 100,
            state_cap: excl_core::exact::DEFAULT_STATE_CAP,
            time_tol: 1e-6,
            suite: "all".into(),
            trial_scale: 1.0,
        }
    }
}

/// Values given on the command line that sit above everything else.
#[derive(Debug, Default, Clone)]
pub struct Flags {
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<String>,
    pub graph: Option<String>,
    pub overrides: Vec<String>,
}

fn alias(key: &str) -> &str {
    match key {
        "L" => "steps",
        "T" => "phase_length",
        other => other,
    }
}

impl Config {
    pub fn resolve(flags: &Flags) -> Result<Config> {
        let mut doc = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
                let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
                match v {
                    Value::Object(m) => m,
                    _ => bail!("config {path} must be a JSON object"),
                }
            }
            None => Map::new(),
        };
        for kv in &flags.overrides {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{kv}`"))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            doc.insert(alias(k).to_string(), value);
        }
        let mut cfg: Config = serde_json::from_value(Value::Object(doc)).context("invalid configuration")?;
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if let Some(t) = flags.trials {
            cfg.trials = t;
        }
        if let Some(o) = &flags.out {
            cfg.out = o.clone();
        }
        if let Some(g) = &flags.graph {
            cfg.graph = g.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        if self.k == 0 {
            bail!("k must be positive");
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            bail!("every eps must lie in (0, 1)");
        }
        if self.times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            bail!("times must be finite and non-negative");
        }
        if !(self.phase_length > 0.0 && self.phase_length.is_finite()) {
            bail!("phase_length must be positive");
        }
        if !(self.time_tol > 0.0) {
            bail!("time_tol must be positive");
        }
        if !(self.trial_scale > 0.0) {
            bail!("trial_scale must be positive");
        }
        if let Some(s) = &self.start {
            if s.len() != self.k {
                bail!("start has {} entries but k = {}", s.len(), self.k);
            }
        }
        Ok(())
    }

    pub fn load_graph(&self) -> Result<WeightedGraph> {
        match self.graph.strip_prefix("gen:") {
            Some(spec) => Ok(WeightedGraph::generate(&GraphKind::parse(spec)?, self.graph_seed)?),
            None => {
                let text = std::fs::read_to_string(Path::new(&self.graph)).with_context(|| format!("reading graph {}", self.graph))?;
                Ok(WeightedGraph::from_text(&text)?)
            }
        }
    }

    pub fn start_tuple(&self) -> Vec<usize> {
        self.start.clone().unwrap_or_else(|| (0..self.k).collect())
    }

    /// SHA-256 of the subcommand and the resolved configuration, leaving
    /// out the output directory.
    pub fn hash(&self, command: &str) -> String {
        let mut config = serde_json::to_value(self).expect("config serializes");
        config.as_object_mut().expect("object").remove("out");
        let body = serde_json::json!({ "command": command, "config": config });
        hex::encode(Sha256::digest(body.to_string().as_bytes()))
    }
}
