//! Seeded benchmark instance generators.
//!
//! Specs are written `kind[:key=value,...]`, for example
//! `maxcut-ring:n=10` or `knapsack:items=3,capacity=7,seed=4`.
//!
//! Max-cut instances use `J_ij = −w_ij / 2` and offset `−Σ w / 2`, so the
//! Ising energy of a colouring is exactly minus its cut weight.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::formats::{Instance, ParseError};
use crate::ising::{IsingModel, SpinState};
use crate::reduction::{BilpInstance, Constraint, Sense, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    MaxcutRandom,
    MaxcutRing,
    Knapsack,
    RandomBilp,
}

impl GeneratorKind {
    fn name(self) -> &'static str {
        match self {
            GeneratorKind::MaxcutRandom => "maxcut-random",
            GeneratorKind::MaxcutRing => "maxcut-ring",
            GeneratorKind::Knapsack => "knapsack",
            GeneratorKind::RandomBilp => "random-bilp",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            GeneratorKind::MaxcutRandom => &["n", "p", "wmin", "wmax", "seed"],
            GeneratorKind::MaxcutRing => &["n", "w", "seed"],
            GeneratorKind::Knapsack => {
                &["items", "vmin", "vmax", "wmin", "wmax", "capacity", "seed"]
            }
            GeneratorKind::RandomBilp => &["vars", "rows", "cmin", "cmax", "seed"],
        }
    }
}

/// Generator kind plus its size, weight-range and seed parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

fn spec_error(message: impl Into<String>) -> ParseError {
    ParseError::Invalid {
        location: "generator spec".into(),
        message: message.into(),
    }
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ParseError> {
        let v = self.get(key, default as f64);
        if v.fract() != 0.0 || v < 1.0 {
            return Err(spec_error(format!(
                "{key} = {v} must be a positive integer"
            )));
        }
        Ok(v as usize)
    }

    fn int_range(
        &self,
        lo_key: &str,
        hi_key: &str,
        default: (i64, i64),
    ) -> Result<(i64, i64), ParseError> {
        let lo = self.get(lo_key, default.0 as f64);
        let hi = self.get(hi_key, default.1 as f64);
        if lo.fract() != 0.0 || hi.fract() != 0.0 || lo > hi {
            return Err(spec_error(format!(
                "range [{lo_key}, {hi_key}] = [{lo}, {hi}] must be non-empty integers"
            )));
        }
        Ok((lo as i64, hi as i64))
    }

    /// Parses `kind[:key=value,...]`; `default_seed` applies unless the spec
    /// carries its own `seed`.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self, ParseError> {
        let (kind_str, rest) = text.split_once(':').unwrap_or((text, ""));
        let kind = match kind_str.trim() {
            "maxcut-random" => GeneratorKind::MaxcutRandom,
            "maxcut-ring" => GeneratorKind::MaxcutRing,
            "knapsack" => GeneratorKind::Knapsack,
            "random-bilp" => GeneratorKind::RandomBilp,
            other => return Err(spec_error(format!("unknown generator '{other}'"))),
        };
        let mut spec = GeneratorSpec::new(kind, default_seed);
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| spec_error(format!("expected key=value, found '{item}'")))?;
            let key = key.trim();
            if !kind.keys().contains(&key) {
                return Err(spec_error(format!(
                    "unknown parameter '{key}' for {}",
                    kind.name()
                )));
            }
            if key == "seed" {
                spec.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| spec_error(format!("bad seed '{value}'")))?;
                continue;
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| spec_error(format!("bad number '{value}' for {key}")))?;
            if !v.is_finite() {
                return Err(spec_error(format!("{key} must be finite")));
            }
            spec.params.insert(key.to_string(), v);
        }
        Ok(spec)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.kind.name())?;
        for (k, v) in &self.params {
            write!(f, "{k}={v},")?;
        }
        write!(f, "seed={}", self.seed)
    }
}

impl FromStr for GeneratorSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, 0)
    }
}

/// Ising model whose energy is minus the cut weight of `edges`.
pub fn maxcut_model(num_nodes: usize, edges: &[(usize, usize, f64)]) -> IsingModel {
    let total: f64 = edges.iter().map(|e| e.2).sum();
    IsingModel::new(
        num_nodes,
        edges.iter().map(|&(i, j, w)| (i, j, -w / 2.0)),
        vec![0.0; num_nodes],
        -total / 2.0,
    )
    .expect("generated edges are valid")
}

/// Cut weight of a colouring.
pub fn cut_value(edges: &[(usize, usize, f64)], state: &SpinState) -> f64 {
    edges
        .iter()
        .filter(|&&(i, j, _)| state.get(i) != state.get(j))
        .map(|e| e.2)
        .sum()
}

pub fn ring_edges(n: usize, weight: f64) -> Vec<(usize, usize, f64)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1, weight)],
        _ => (0..n).map(|i| (i, (i + 1) % n, weight)).collect(),
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance, ParseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GeneratorKind::MaxcutRing => {
            let n = spec.count("n", 10)?;
            let w = spec.get("w", 1.0);
            Ok(Instance::Ising(maxcut_model(n, &ring_edges(n, w))))
        }
        GeneratorKind::MaxcutRandom => {
            let n = spec.count("n", 10)?;
            let p = spec.get("p", 0.5);
            if !(0.0..=1.0).contains(&p) {
                return Err(spec_error(format!(
                    "edge probability p = {p} not in [0, 1]"
                )));
            }
            let (wmin, wmax) = spec.int_range("wmin", "wmax", (1, 1))?;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((i, j, rng.random_range(wmin..=wmax) as f64));
                    }
                }
            }
            Ok(Instance::Ising(maxcut_model(n, &edges)))
        }
        GeneratorKind::Knapsack => {
            let items = spec.count("items", 3)?;
            let (vmin, vmax) = spec.int_range("vmin", "vmax", (1, 10))?;
            let (wmin, wmax) = spec.int_range("wmin", "wmax", (1, 10))?;
            let values: Vec<f64> = (0..items)
                .map(|_| rng.random_range(vmin..=vmax) as f64)
                .collect();
            let weights: Vec<f64> = (0..items)
                .map(|_| rng.random_range(wmin..=wmax) as f64)
                .collect();
            let capacity = match spec.params.get("capacity") {
                Some(&c) => c,
                None => (weights.iter().sum::<f64>() / 2.0).floor(),
            };
            let row = Constraint::new(
                weights.into_iter().enumerate().collect(),
                Sense::Le,
                capacity,
            );
            BilpInstance::maximize(values, vec![row], vec![VarKind::Binary; items])
                .map(Instance::Bilp)
                .map_err(|e| spec_error(e.to_string()))
        }
        GeneratorKind::RandomBilp => {
            let n = spec.count("vars", 5)?;
            let rows = spec.get("rows", 2.0);
            if rows.fract() != 0.0 || rows < 0.0 {
                return Err(spec_error(format!(
                    "rows = {rows} must be a non-negative integer"
                )));
            }
            let (cmin, cmax) = spec.int_range("cmin", "cmax", (-5, 5))?;
            let planted: Vec<i64> = (0..n).map(|_| rng.random_range(0..=1)).collect();
            let objective = (0..n)
                .map(|_| rng.random_range(cmin..=cmax) as f64)
                .collect();
            let constraints = (0..rows as usize)
                .map(|_| {
                    let coeffs: Vec<(usize, f64)> = (0..n)
                        .map(|i| (i, rng.random_range(cmin..=cmax) as f64))
                        .collect();
                    let act: f64 = coeffs.iter().map(|&(i, s)| s * planted[i] as f64).sum();
                    if rng.random::<bool>() {
                        Constraint::new(coeffs, Sense::Eq, act)
                    } else {
                        Constraint::new(coeffs, Sense::Le, act + rng.random_range(0..=2) as f64)
                    }
                })
                .collect();
            BilpInstance::new(objective, constraints, vec![VarKind::Binary; n])
                .map(Instance::Bilp)
                .map_err(|e| spec_error(e.to_string()))
        }
    }
}
