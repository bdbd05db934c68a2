//! The TOML instance file. Field names are documented in `docs/formats.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    validate_instance, CleaningZone, InstanceError, PrecedenceRule, ProblemInstance, RobotSpec,
    ScenarioSet, TaskType,
};
use crate::gridmap::{Cell, GridMap};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    name: String,
    depot: Cell,
    map: MapSection,
    task_types: Vec<TaskTypeEntry>,
    zones: Vec<ZoneEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    precedence: Vec<RuleEntry>,
    robots: Vec<RobotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenarios: Option<Vec<ScenarioEntry>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskTypeEntry {
    id: usize,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneEntry {
    id: usize,
    centroid: Cell,
    area: f64,
    #[serde(default)]
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    types: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    before: usize,
    after: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotEntry {
    id: usize,
    #[serde(default)]
    name: String,
    abilities: Vec<usize>,
    cleaning_efficiency: Vec<f64>,
    travel_speed: f64,
    max_runtime: f64,
    #[serde(default)]
    battery_capacity: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    deviations: Vec<Vec<f64>>,
}

/// Parses an instance whose map is inline or referenced relative to the
/// current directory.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, InstanceError> {
    parse_instance_in(text, None)
}

/// Parses an instance, resolving a `map.file` reference against `base`.
pub fn parse_instance_in(
    text: &str,
    base: Option<&Path>,
) -> Result<ProblemInstance, InstanceError> {
    let file: InstanceFile =
        toml::from_str(text).map_err(|e| InstanceError::Schema(e.to_string()))?;
    let inst = from_file(file, base)?;
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut inst = parse_instance_in(&text, path.parent())?;
    if inst.name.is_empty() {
        inst.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(inst)
}

fn from_file(f: InstanceFile, base: Option<&Path>) -> Result<ProblemInstance, InstanceError> {
    let map = match (f.map.file, f.map.rows) {
        (Some(_), Some(_)) => {
            return Err(InstanceError::Schema(
                "map: give either `file` or `rows`, not both".into(),
            ))
        }
        (Some(file), None) => {
            if f.map.resolution.is_some() {
                return Err(InstanceError::Schema(
                    "map.resolution: a map file carries its own resolution".into(),
                ));
            }
            let path = base.map(|b| b.join(&file)).unwrap_or_else(|| file.into());
            let text = std::fs::read_to_string(&path).map_err(|source| InstanceError::Io {
                path: path.display().to_string(),
                source,
            })?;
            text.parse::<GridMap>()?
        }
        (None, Some(rows)) => {
            let resolution = f
                .map
                .resolution
                .ok_or_else(|| InstanceError::Schema("map.resolution: missing field".into()))?;
            GridMap::from_rows(&rows, resolution)?
        }
        (None, None) => {
            return Err(InstanceError::Schema(
                "map: one of `file` or `rows` is required".into(),
            ))
        }
    };

    let n_types = f.task_types.len();
    let zones = f
        .zones
        .into_iter()
        .map(|z| {
            let mut task_types = z.types.unwrap_or_else(|| (0..n_types).collect());
            task_types.sort_unstable();
            CleaningZone {
                id: z.id,
                centroid: z.centroid,
                area: z.area,
                label: z.label,
                task_types,
            }
        })
        .collect();

    Ok(ProblemInstance {
        name: f.name,
        zones,
        task_types: f
            .task_types
            .into_iter()
            .map(|t| TaskType {
                id: t.id,
                name: t.name,
            })
            .collect(),
        robots: f
            .robots
            .into_iter()
            .map(|r| RobotSpec {
                id: r.id,
                name: r.name,
                abilities: r.abilities,
                cleaning_efficiency: r.cleaning_efficiency,
                travel_speed: r.travel_speed,
                max_runtime: r.max_runtime,
                battery_capacity: r.battery_capacity,
            })
            .collect(),
        precedence: f
            .precedence
            .into_iter()
            .map(|r| PrecedenceRule {
                before: r.before,
                after: r.after,
            })
            .collect(),
        depot: f.depot,
        map,
        scenarios: f.scenarios.map(|s| ScenarioSet {
            scenarios: s.into_iter().map(|e| e.deviations).collect(),
        }),
    })
}

/// Writes the instance as TOML with the map inlined.
pub fn serialize_instance(inst: &ProblemInstance) -> String {
    let file = InstanceFile {
        name: inst.name.clone(),
        depot: inst.depot,
        map: MapSection {
            file: None,
            resolution: Some(inst.map.resolution()),
            rows: Some(inst.map.rows()),
        },
        task_types: inst
            .task_types
            .iter()
            .map(|t| TaskTypeEntry {
                id: t.id,
                name: t.name.clone(),
            })
            .collect(),
        zones: inst
            .zones
            .iter()
            .map(|z| ZoneEntry {
                id: z.id,
                centroid: z.centroid,
                area: z.area,
                label: z.label.clone(),
                types: Some(z.task_types.clone()),
            })
            .collect(),
        precedence: inst
            .precedence
            .iter()
            .map(|r| RuleEntry {
                before: r.before,
                after: r.after,
            })
            .collect(),
        robots: inst
            .robots
            .iter()
            .map(|r| RobotEntry {
                id: r.id,
                name: r.name.clone(),
                abilities: r.abilities.clone(),
                cleaning_efficiency: r.cleaning_efficiency.clone(),
                travel_speed: r.travel_speed,
                max_runtime: r.max_runtime,
                battery_capacity: r.battery_capacity,
            })
            .collect(),
        scenarios: inst.scenarios.as_ref().map(|s| {
            s.scenarios
                .iter()
                .map(|d| ScenarioEntry {
                    deviations: d.clone(),
                })
                .collect()
        }),
    };
    toml::to_string(&file).expect("instance is always representable as TOML")
}
