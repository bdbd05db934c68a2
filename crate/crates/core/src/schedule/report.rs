//! Schedule reports (JSON) and Gantt tables (CSV).

use std::io;

use serde::{Deserialize, Serialize};

use super::{Schedule, ScheduleError, SolutionVector};
use crate::instance::ProblemInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub robot: usize,
    pub robot_name: String,
    pub task: usize,
    pub label: String,
    pub travel_start: f64,
    pub clean_start: f64,
    pub clean_end: f64,
    pub wait: f64,
}

/// Everything needed to reproduce and inspect one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub uncertainty: String,
    pub deviation: f64,
    /// The solution vector in `orders|...|workloads|...` form.
    pub vector: String,
    pub makespan: f64,
    pub returns: Vec<f64>,
    pub entries: Vec<ReportEntry>,
}

impl ScheduleReport {
    pub fn new(
        inst: &ProblemInstance,
        sched: &Schedule,
        vector: Option<&SolutionVector>,
        solver: &str,
        seed: u64,
        uncertainty: &str,
        deviation: f64,
    ) -> Self {
        let tasks = inst.tasks();
        let entries = sched
            .entries()
            .map(|e| ReportEntry {
                robot: e.robot,
                robot_name: inst
                    .robots
                    .get(e.robot)
                    .map(|r| r.name.clone())
                    .unwrap_or_default(),
                task: e.task,
                label: tasks
                    .get(e.task)
                    .map(|t| inst.task_label(t))
                    .unwrap_or_default(),
                travel_start: e.travel_start,
                clean_start: e.clean_start,
                clean_end: e.clean_end,
                wait: e.wait,
            })
            .collect();
        Self {
            instance: inst.name.clone(),
            solver: solver.to_string(),
            seed,
            uncertainty: uncertainty.to_string(),
            deviation,
            vector: vector.map(|v| v.to_string()).unwrap_or_default(),
            makespan: sched.makespan,
            returns: sched.returns.clone(),
            entries,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScheduleError> {
        serde_json::from_str(text).map_err(|e| ScheduleError::Report(e.to_string()))
    }
}

/// One bar of a Gantt chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanttRow {
    pub robot: String,
    pub task: String,
    pub start: f64,
    pub end: f64,
    pub wait: f64,
}

pub fn gantt_rows(report: &ScheduleReport) -> Vec<GanttRow> {
    report
        .entries
        .iter()
        .map(|e| GanttRow {
            robot: if e.robot_name.is_empty() {
                format!("robot{}", e.robot)
            } else {
                e.robot_name.clone()
            },
            task: e.label.clone(),
            start: e.clean_start,
            end: e.clean_end,
            wait: e.wait,
        })
        .collect()
}

/// Writes `robot,task,start,end,wait` with a header row, even when empty.
pub fn write_gantt_csv<W: io::Write>(rows: &[GanttRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["robot", "task", "start", "end", "wait"])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
