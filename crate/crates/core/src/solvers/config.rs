use std::path::Path;

use serde::{Deserialize, Serialize};

use super::exact::DEFAULT_EXACT_LIMIT;
use super::SolverError;

/// Simulated annealing. `iter_cap` bounds the number of temperature levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SAConfig {
    pub t0: f64,
    pub ts: f64,
    pub alpha: f64,
    /// Proposals per temperature level.
    pub lk: usize,
    pub iter_cap: usize,
    pub seed: u64,
    /// Optional wall-clock budget in seconds.
    pub time_limit: Option<f64>,
}

impl Default for SAConfig {
    fn default() -> Self {
        Self {
            t0: 500.0,
            ts: 1.0,
            alpha: 0.997,
            lk: 300,
            iter_cap: 3000,
            seed: 0,
            time_limit: None,
        }
    }
}

impl SAConfig {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if !(self.ts > 0.0 && self.t0 >= self.ts) {
            return Err(SolverError::Config(format!(
                "SA needs t0 >= ts > 0, got t0 = {}, ts = {}",
                self.t0, self.ts
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SolverError::Config(format!(
                "SA cooling coefficient must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Genetic algorithm. `iter_cap` bounds the number of generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAConfig {
    pub pop_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub iter_cap: usize,
    pub seed: u64,
    pub time_limit: Option<f64>,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            pop_size: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.08,
            iter_cap: 3000,
            seed: 0,
            time_limit: None,
        }
    }
}

impl GAConfig {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if self.pop_size < 2 {
            return Err(SolverError::Config(format!(
                "GA population must hold at least 2 individuals, got {}",
                self.pop_size
            )));
        }
        for (name, rate) in [
            ("crossover", self.crossover_rate),
            ("mutation", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(SolverError::Config(format!(
                    "GA {name} rate must lie in [0, 1], got {rate}"
                )));
            }
        }
        Ok(())
    }
}

/// Particle swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PSOConfig {
    pub n_particles: usize,
    pub iter_cap: usize,
    pub v_max: f64,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    pub time_limit: Option<f64>,
}

impl Default for PSOConfig {
    fn default() -> Self {
        Self {
            n_particles: 2000,
            iter_cap: 1000,
            v_max: 2.0,
            inertia: 0.5,
            c1: 1.0,
            c2: 1.0,
            seed: 0,
            time_limit: None,
        }
    }
}

impl PSOConfig {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if self.n_particles == 0 {
            return Err(SolverError::Config("PSO needs at least one particle".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(SolverError::Config(format!(
                "PSO maximum velocity must be positive, got {}",
                self.v_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactConfig {
    /// Largest number of non-depot tasks the enumeration accepts.
    pub limit: usize,
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            limit: DEFAULT_EXACT_LIMIT,
            time_limit: Some(600.0),
        }
    }
}

/// The solver configuration file: optional `[sa]`, `[ga]`, `[pso]` and
/// `[exact]` tables, each defaulting field by field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub sa: SAConfig,
    pub ga: GAConfig,
    pub pso: PSOConfig,
    pub exact: ExactConfig,
}

impl SolverConfig {
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        toml::from_str(text).map_err(|e| SolverError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SolverError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolverError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies one `table.key=value` override, with `value` in TOML syntax
    /// (`sa.lk=50`, `ga.crossover_rate=0.8`, `pso.time_limit=30.0`).
    pub fn set(&mut self, assignment: &str) -> Result<(), SolverError> {
        let bad = |why: &str| SolverError::Config(format!("override {assignment:?}: {why}"));
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| bad("expected table.key=value"))?;
        let (table, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| bad("expected table.key=value"))?;
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", value.trim()))
            .map_err(|_| bad("value is not a TOML number, string or boolean"))?
            .remove("v")
            .expect("parsed key");
        let mut doc = toml::Table::try_from(&*self).expect("config serializes");
        doc.entry(table.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| bad("unknown table"))?
            .insert(key.to_string(), value);
        *self = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| bad(e.message()))?;
        Ok(())
    }
}
