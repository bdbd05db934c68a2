//! The full mixed-integer model in CPLEX LP text format.
//!
//! Variables:
//! - `X_i_j_r` binary, robot `r` travels from task `i` to task `j`
//!   (`X_0_0_r` marks a robot that stays at the depot),
//! - `Y_j_r` binary, task `j` is assigned to robot `r`,
//! - `U_j` continuous, start time of task `j` (`U_0 = 0`),
//! - `Cmax` continuous, the makespan.
//!
//! Rows are named `c<family>_<indices>` after the constraint family they
//! instantiate, e.g. `c9_3_5_1` is the non-overlap row for tasks 3 -> 5 on
//! robot 1.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ModelError, ModelMatrices};
use crate::instance::ProblemInstance;

/// Slack that turns the strict runtime bound `sum Y D < L` into `<= L - eps`.
pub const RUNTIME_EPSILON: f64 = 1e-9;

const MAX_LINE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearExpr {
    pub terms: Vec<(f64, String)>,
}

impl LinearExpr {
    fn add(&mut self, coef: f64, var: impl Into<String>) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((coef, var.into()));
        }
        self
    }

    pub fn evaluate(&self, values: &HashMap<String, f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, v)| c * values.get(v).copied().unwrap_or(0.0))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub expr: LinearExpr,
    pub sense: Sense,
    pub rhs: f64,
}

/// A row that an assignment violates by more than the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub name: String,
    pub lhs: f64,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub objective: LinearExpr,
    pub rows: Vec<LpRow>,
    /// `(variable, lower, upper)`; `upper = None` means unbounded above.
    pub bounds: Vec<(String, f64, Option<f64>)>,
    pub binaries: Vec<String>,
}

impl LpModel {
    fn row(&mut self, name: String, expr: LinearExpr, sense: Sense, rhs: f64) {
        self.rows.push(LpRow {
            name,
            expr,
            sense,
            rhs,
        });
    }

    /// Rows violated by `values` beyond an absolute tolerance `tol`, plus any
    /// bound or integrality violation reported under the pseudo-row names
    /// `bound:<var>` and `binary:<var>`.
    pub fn check(&self, values: &HashMap<String, f64>, tol: f64) -> Vec<RowCheck> {
        let mut out = Vec::new();
        for row in &self.rows {
            let lhs = row.expr.evaluate(values);
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + tol,
                Sense::Ge => lhs >= row.rhs - tol,
                Sense::Eq => (lhs - row.rhs).abs() <= tol,
            };
            if !ok {
                out.push(RowCheck {
                    name: row.name.clone(),
                    lhs,
                    sense: row.sense,
                    rhs: row.rhs,
                });
            }
        }
        for (var, lo, hi) in &self.bounds {
            let v = values.get(var).copied().unwrap_or(0.0);
            if v < lo - tol || hi.is_some_and(|h| v > h + tol) {
                out.push(RowCheck {
                    name: format!("bound:{var}"),
                    lhs: v,
                    sense: Sense::Ge,
                    rhs: *lo,
                });
            }
        }
        for var in &self.binaries {
            let v = values.get(var).copied().unwrap_or(0.0);
            if v != 0.0 && v != 1.0 {
                out.push(RowCheck {
                    name: format!("binary:{var}"),
                    lhs: v,
                    sense: Sense::Eq,
                    rhs: v.round(),
                });
            }
        }
        out
    }

    pub fn n_variables(&self) -> usize {
        let mut names: Vec<&str> = self.binaries.iter().map(String::as_str).collect();
        names.extend(self.bounds.iter().map(|(v, _, _)| v.as_str()));
        names.sort_unstable();
        names.dedup();
        names.len()
    }

    pub fn to_lp_string(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "\\ {line}");
        }
        out.push_str("Minimize\n");
        write_expr(&mut out, " obj:", &self.objective, "");
        out.push_str("Subject To\n");
        for row in &self.rows {
            let tail = format!(" {} {}", row.sense.as_str(), fmt_num(row.rhs));
            write_expr(&mut out, &format!(" {}:", row.name), &row.expr, &tail);
        }
        out.push_str("Bounds\n");
        for (var, lo, hi) in &self.bounds {
            match hi {
                Some(h) if h == lo => {
                    let _ = writeln!(out, " {var} = {}", fmt_num(*lo));
                }
                Some(h) => {
                    let _ = writeln!(out, " {} <= {var} <= {}", fmt_num(*lo), fmt_num(*h));
                }
                None => {
                    let _ = writeln!(out, " {var} >= {}", fmt_num(*lo));
                }
            }
        }
        out.push_str("Binaries\n");
        let mut line = String::new();
        for var in &self.binaries {
            if line.len() + var.len() + 1 > MAX_LINE {
                let _ = writeln!(out, "{line}");
                line.clear();
            }
            line.push(' ');
            line.push_str(var);
        }
        if !line.is_empty() {
            let _ = writeln!(out, "{line}");
        }
        out.push_str("End\n");
        out
    }

    /// Reads back the subset of LP syntax that [`LpModel::to_lp_string`]
    /// writes: named rows, `Bounds` and `Binaries`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Objective,
            Rows,
            Bounds,
            Binaries,
            Done,
        }
        let mut model = LpModel::default();
        let mut section = Section::Preamble;
        let mut pending: Vec<String> = Vec::new();
        let mut pending_name: Option<String> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('\\').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ModelError::LpParse {
                line: lineno + 1,
                message,
            };
            match line.to_ascii_lowercase().as_str() {
                "minimize" | "minimise" | "min" => {
                    section = Section::Objective;
                    continue;
                }
                "subject to" | "such that" | "st" | "s.t." => {
                    section = Section::Rows;
                    continue;
                }
                "bounds" => {
                    section = Section::Bounds;
                    continue;
                }
                "binaries" | "binary" | "bin" => {
                    section = Section::Binaries;
                    continue;
                }
                "end" => {
                    section = Section::Done;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Preamble | Section::Done => {
                    return Err(err(format!("unexpected content {line:?}")))
                }
                Section::Objective => {
                    let mut tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.first().is_some_and(|t| t.ends_with(':')) {
                        tokens.remove(0);
                    }
                    let expr = parse_terms(&tokens).map_err(err)?;
                    model.objective.terms.extend(expr.terms);
                }
                Section::Rows => {
                    let mut tokens: Vec<&str> = line.split_whitespace().collect();
                    if pending_name.is_none() {
                        match tokens.first() {
                            Some(t) if t.ends_with(':') => {
                                pending_name = Some(t.trim_end_matches(':').to_string());
                                tokens.remove(0);
                            }
                            _ => return Err(err("constraint rows must be named".into())),
                        }
                    }
                    pending.extend(tokens.iter().map(|s| s.to_string()));
                    if let Some(pos) = pending
                        .iter()
                        .position(|t| matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>"))
                    {
                        let sense = match pending[pos].as_str() {
                            "<=" | "<" | "=<" => Sense::Le,
                            ">=" | ">" | "=>" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        let rhs_tokens = &pending[pos + 1..];
                        let rhs = parse_number(&rhs_tokens.join("")).map_err(err)?;
                        let lhs: Vec<&str> = pending[..pos].iter().map(String::as_str).collect();
                        let expr = parse_terms(&lhs).map_err(err)?;
                        model.row(pending_name.take().unwrap_or_default(), expr, sense, rhs);
                        pending.clear();
                    }
                }
                Section::Bounds => {
                    let t: Vec<&str> = line.split_whitespace().collect();
                    match t.as_slice() {
                        [var, "=", v] => {
                            let v = parse_number(v).map_err(err)?;
                            model.bounds.push((var.to_string(), v, Some(v)));
                        }
                        [var, ">=", v] => {
                            let v = parse_number(v).map_err(err)?;
                            model.bounds.push((var.to_string(), v, None));
                        }
                        [lo, "<=", var, "<=", hi] => {
                            let lo = parse_number(lo).map_err(err)?;
                            let hi = parse_number(hi).map_err(err)?;
                            model.bounds.push((var.to_string(), lo, Some(hi)));
                        }
                        _ => return Err(err(format!("unsupported bound {line:?}"))),
                    }
                }
                Section::Binaries => {
                    model
                        .binaries
                        .extend(line.split_whitespace().map(str::to_string));
                }
            }
        }
        if !pending.is_empty() || pending_name.is_some() {
            return Err(ModelError::LpParse {
                line: text.lines().count(),
                message: "unterminated constraint".into(),
            });
        }
        if section != Section::Done {
            return Err(ModelError::LpParse {
                line: text.lines().count(),
                message: "missing End".into(),
            });
        }
        Ok(model)
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| format!("bad number {s:?}")),
    }
}

fn parse_terms(tokens: &[&str]) -> Result<LinearExpr, String> {
    let mut expr = LinearExpr::default();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    coef = Some(coef.unwrap_or(1.0) * v);
                } else {
                    let c = sign * coef.unwrap_or(1.0);
                    if c != 0.0 {
                        expr.terms.push((c, tok.to_string()));
                    }
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some() {
        return Err("constant terms are not allowed on the left-hand side".into());
    }
    Ok(expr)
}

// Shortest representation that parses back to the same f64.
fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn write_expr(out: &mut String, head: &str, expr: &LinearExpr, tail: &str) {
    let mut line = head.to_string();
    if expr.terms.is_empty() {
        line.push_str(" 0 Cmax");
    }
    for (i, (c, v)) in expr.terms.iter().enumerate() {
        let sign = if *c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        let term = if mag == 1.0 {
            if i == 0 && sign == "+" {
                format!(" {v}")
            } else {
                format!(" {sign} {v}")
            }
        } else if i == 0 && sign == "+" {
            format!(" {} {v}", fmt_num(mag))
        } else {
            format!(" {sign} {} {v}", fmt_num(mag))
        };
        if line.len() + term.len() > MAX_LINE {
            let _ = writeln!(out, "{line}");
            line = "  ".to_string();
        }
        line.push_str(&term);
    }
    line.push_str(tail);
    let _ = writeln!(out, "{line}");
}

fn x(i: usize, j: usize, r: usize) -> String {
    format!("X_{i}_{j}_{r}")
}

fn y(j: usize, r: usize) -> String {
    format!("Y_{j}_{r}")
}

fn u(j: usize) -> String {
    format!("U_{j}")
}

/// Instantiates every constraint family with the concrete coefficients of
/// `mats`.
pub fn lp_model(mats: &ModelMatrices) -> LpModel {
    let n = mats.n_tasks();
    let k = mats.n_robots();
    let lambda = mats.lambda;
    let mut m = LpModel::default();
    m.objective.add(1.0, "Cmax");

    // c2: makespan covers every task's completion plus the trip home.
    for i in 1..n {
        for r in 0..k {
            let mut e = LinearExpr::default();
            e.add(1.0, "Cmax")
                .add(-1.0, u(i))
                .add(-mats.cleaning(i, r), y(i, r))
                .add(-mats.travel(i, 0, r), x(i, 0, r));
            m.row(format!("c2_{i}_{r}"), e, Sense::Ge, 0.0);
        }
    }
    // c3: ability.
    for j in 1..n {
        for r in 0..k {
            if !mats.able(j, r) {
                let mut e = LinearExpr::default();
                e.add(1.0, y(j, r));
                m.row(format!("c3_{j}_{r}"), e, Sense::Eq, 0.0);
            }
        }
    }
    // c4: every robot is dispatched from the depot.
    let mut e = LinearExpr::default();
    for r in 0..k {
        e.add(1.0, y(0, r));
    }
    m.row("c4".into(), e, Sense::Eq, k as f64);
    // c5: each task served once.
    for j in 1..n {
        let mut e = LinearExpr::default();
        for r in 0..k {
            e.add(1.0, y(j, r));
        }
        m.row(format!("c5_{j}"), e, Sense::Eq, 1.0);
    }
    // c6: each robot returns to the depot once (X_0_0_r for an idle robot).
    for r in 0..k {
        let mut e = LinearExpr::default();
        for i in 0..n {
            e.add(1.0, x(i, 0, r));
        }
        m.row(format!("c6_{r}"), e, Sense::Eq, 1.0);
    }
    // c7 inflow and c8 outflow match the assignment.
    for j in 1..n {
        for r in 0..k {
            let mut e = LinearExpr::default();
            for i in (0..n).filter(|&i| i != j) {
                e.add(1.0, x(i, j, r));
            }
            e.add(-1.0, y(j, r));
            m.row(format!("c7_{j}_{r}"), e, Sense::Eq, 0.0);
        }
    }
    for i in 1..n {
        for r in 0..k {
            let mut e = LinearExpr::default();
            for j in (0..n).filter(|&j| j != i) {
                e.add(1.0, x(i, j, r));
            }
            e.add(-1.0, y(i, r));
            m.row(format!("c8_{i}_{r}"), e, Sense::Eq, 0.0);
        }
    }
    // c9: consecutive tasks of one robot do not overlap.
    for r in 0..k {
        for j in 1..n {
            if !mats.able(j, r) {
                continue;
            }
            for i in (0..n).filter(|&i| i != j && (i == 0 || mats.able(i, r))) {
                let mut e = LinearExpr::default();
                e.add(1.0, u(i)).add(-1.0, u(j)).add(lambda, x(i, j, r));
                let rhs = lambda - mats.cleaning(i, r) - mats.travel(i, j, r);
                m.row(format!("c9_{i}_{j}_{r}"), e, Sense::Le, rhs);
            }
        }
    }
    // c10: a successor starts after its predecessor finished, whoever runs them.
    for i in 1..n {
        for j in 1..n {
            if i == j || !mats.precedes(i, j) {
                continue;
            }
            for a in (0..k).filter(|&a| mats.able(i, a)) {
                for b in (0..k).filter(|&b| mats.able(j, b)) {
                    let d = mats.cleaning(i, a);
                    let mut e = LinearExpr::default();
                    e.add(1.0, u(j))
                        .add(-1.0, u(i))
                        .add(-d, y(i, a))
                        .add(-d, y(j, b));
                    m.row(format!("c10_{i}_{j}_{a}_{b}"), e, Sense::Ge, -d);
                }
            }
        }
    }
    // c11: cleaning workload within the runtime limit.
    for r in 0..k {
        let mut e = LinearExpr::default();
        for i in 1..n {
            e.add(mats.cleaning(i, r), y(i, r));
        }
        m.row(
            format!("c11_{r}"),
            e,
            Sense::Le,
            mats.max_runtime[r] - RUNTIME_EPSILON,
        );
    }

    m.bounds.push((u(0), 0.0, Some(0.0)));
    for j in 1..n {
        m.bounds.push((u(j), 0.0, None));
    }
    m.bounds.push(("Cmax".into(), 0.0, None));

    for r in 0..k {
        m.binaries.push(x(0, 0, r));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for r in 0..k {
                m.binaries.push(x(i, j, r));
            }
        }
    }
    for j in 0..n {
        for r in 0..k {
            m.binaries.push(y(j, r));
        }
    }
    m
}

/// The LP file text. The header comment lists the task and robot legend.
pub fn export_lp(mats: &ModelMatrices, inst: &ProblemInstance) -> String {
    let mut header = format!(
        "instance: {}\nuncertainty set: {}\ntasks: {}, robots: {}, big-M: {}\n",
        inst.name,
        mats.uncertainty,
        mats.n_tasks(),
        mats.n_robots(),
        fmt_num(mats.lambda)
    );
    for task in inst.tasks() {
        let _ = writeln!(header, "task {} = {}", task.id, inst.task_label(&task));
    }
    for robot in &inst.robots {
        let _ = writeln!(header, "robot {} = {}", robot.id, robot.name);
    }
    lp_model(mats).to_lp_string(&header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::tests::one_zone;
    use crate::model::{assemble_matrices, RobustConfig};

    fn single_task() -> (ProblemInstance, ModelMatrices) {
        let mut inst = one_zone();
        inst.task_types.truncate(1);
        inst.precedence.clear();
        inst.zones[0].task_types = vec![0];
        inst.robots.truncate(1);
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let mats = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        (inst, mats)
    }

    fn values(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn single_task_model() {
        let (_, mats) = single_task();
        let lp = lp_model(&mats);
        let c5: Vec<_> = lp.rows.iter().filter(|r| r.name.starts_with("c5_")).collect();
        assert_eq!(c5.len(), 1);
        assert_eq!(c5[0].rhs, 1.0);
        assert_eq!(c5[0].expr.terms, vec![(1.0, "Y_1_0".to_string())]);

        // The only feasible routing: depot -> 1 -> depot.
        let mut sol = values(&[
            ("Y_0_0", 1.0),
            ("Y_1_0", 1.0),
            ("X_0_1_0", 1.0),
            ("X_1_0_0", 1.0),
            ("U_1", 22.5),
            ("Cmax", 2445.0),
        ]);
        assert!(lp.check(&sol, 1e-6).is_empty(), "{:?}", lp.check(&sol, 1e-6));
        // Cmax below T01 + D1 + T10 breaks c2.
        sol.insert("Cmax".into(), 2444.0);
        let bad = lp.check(&sol, 1e-6);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].name, "c2_1_0");
        // Starting earlier than the travel time breaks c9.
        sol.insert("Cmax".into(), 2445.0);
        sol.insert("U_1".into(), 10.0);
        assert!(lp.check(&sol, 1e-6).iter().any(|r| r.name == "c9_0_1_0"));
    }

    #[test]
    fn inability_fixes_y_to_zero() {
        let inst = one_zone();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let mats = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let lp = lp_model(&mats);
        // robot 1 only mops, task 1 is vacuuming
        let row = lp.rows.iter().find(|r| r.name == "c3_1_1").unwrap();
        assert_eq!(row.sense, Sense::Eq);
        assert_eq!(row.rhs, 0.0);
        assert_eq!(row.expr.terms, vec![(1.0, "Y_1_1".to_string())]);
        assert!(lp.rows.iter().all(|r| r.name != "c3_1_0"));
    }

    #[test]
    fn text_round_trip_and_determinism() {
        let inst = one_zone();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let mats = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let a = export_lp(&mats, &inst);
        let b = export_lp(&mats, &inst);
        assert_eq!(a, b);
        let parsed = LpModel::parse(&a).unwrap();
        assert_eq!(parsed, lp_model(&mats));
        assert!(a.lines().all(|l| l.len() <= 255));
    }

    #[test]
    fn long_rows_wrap() {
        let mut expr = LinearExpr::default();
        for i in 0..100 {
            expr.add(-1.5, format!("X_{i}_0_0"));
        }
        let mut m = LpModel::default();
        m.objective.add(1.0, "Cmax");
        m.row("big".into(), expr, Sense::Le, -3.0);
        let text = m.to_lp_string("");
        assert!(text.lines().all(|l| l.len() <= 255));
        assert_eq!(LpModel::parse(&text).unwrap(), m);
    }

    #[test]
    fn parse_errors() {
        assert!(LpModel::parse("Minimize\n obj: Cmax\nSubject To\n c: Cmax >= 1\n").is_err());
        assert!(LpModel::parse("Minimize\n obj: Cmax\nSubject To\n Cmax >= 1\nEnd\n").is_err());
    }
}
