//! Time-indexed MIP model and LP-format writer.
//!
//! Binary `x_j_t` means activity `j` starts at time `t`, for `t` in
//! `0..=T` with `T` the sum of all durations. Rows:
//!
//! * `assign_j`: `Σ_t x_j_t = 1`
//! * `prec_i_j` for arc `(i, j)`: `Σ_t t·x_i_t − Σ_t t·x_j_t ≤ −τ_i`
//! * `cap_r_t`: `Σ_j u_jr Σ_{q=max(0,t−τ_j+1)}^{t} x_j_q ≤ c_r`
//!
//! and the objective minimizes `Σ_t t·x_{n+1}_t`.

use std::fmt::Write as _;

use crate::instance::{ActivityId, RcpspInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowKind {
    Assign(ActivityId),
    Precedence(ActivityId, ActivityId),
    Capacity(usize, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub kind: RowKind,
    /// `(variable index, coefficient)`; zero coefficients are never stored.
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Row {
    pub fn name(&self) -> String {
        match self.kind {
            RowKind::Assign(j) => format!("assign_{j}"),
            RowKind::Precedence(i, j) => format!("prec_{i}_{j}"),
            RowKind::Capacity(r, t) => format!("cap_{r}_{t}"),
        }
    }

    fn holds(&self, x: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|&&(v, _)| x[v])
            .map(|&(_, c)| c)
            .sum();
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeIndexedModel {
    num_activities: usize,
    horizon: u32,
    objective: Vec<(usize, i64)>,
    rows: Vec<Row>,
}

impl TimeIndexedModel {
    pub fn build(inst: &RcpspInstance) -> Self {
        let n = inst.num_activities();
        let horizon = u32::try_from(inst.total_duration()).expect("horizon fits in u32");
        let slots = horizon as usize + 1;
        let var = |j: ActivityId, t: u32| j * slots + t as usize;
        let times = || 0..=horizon;

        let objective = times()
            .filter(|&t| t > 0)
            .map(|t| (var(inst.finish(), t), t as i64))
            .collect();

        let mut rows = Vec::new();
        for j in 0..n {
            rows.push(Row {
                kind: RowKind::Assign(j),
                terms: times().map(|t| (var(j, t), 1)).collect(),
                sense: Sense::Eq,
                rhs: 1,
            });
        }
        for &(i, j) in inst.precedence() {
            let mut terms: Vec<(usize, i64)> = times()
                .filter(|&t| t > 0)
                .map(|t| (var(i, t), t as i64))
                .collect();
            terms.extend(times().filter(|&t| t > 0).map(|t| (var(j, t), -(t as i64))));
            rows.push(Row {
                kind: RowKind::Precedence(i, j),
                terms,
                sense: Sense::Le,
                rhs: -(inst.duration(i) as i64),
            });
        }
        for r in 0..inst.num_resources() {
            for t in times() {
                let mut terms = Vec::new();
                for j in 0..n {
                    let (u, dur) = (inst.demand(j, r), inst.duration(j));
                    if u == 0 || dur == 0 {
                        continue;
                    }
                    let first = (t + 1).saturating_sub(dur);
                    terms.extend((first..=t).map(|q| (var(j, q), u as i64)));
                }
                rows.push(Row {
                    kind: RowKind::Capacity(r, t),
                    terms,
                    sense: Sense::Le,
                    rhs: inst.capacities()[r] as i64,
                });
            }
        }
        Self {
            num_activities: n,
            horizon,
            objective,
            rows,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn num_vars(&self) -> usize {
        self.num_activities * (self.horizon as usize + 1)
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn count_rows(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(&r.kind)).count()
    }

    pub fn var_name(&self, v: usize) -> String {
        let slots = self.horizon as usize + 1;
        format!("x_{}_{}", v / slots, v % slots)
    }

    /// 0/1 assignment with `x_{j,S_j} = 1`; `None` if a start lies beyond the horizon.
    pub fn assignment(&self, starts: &[u32]) -> Option<Vec<bool>> {
        let slots = self.horizon as usize + 1;
        let mut x = vec![false; self.num_vars()];
        for (j, &s) in starts.iter().enumerate() {
            if s > self.horizon {
                return None;
            }
            x[j * slots + s as usize] = true;
        }
        Some(x)
    }

    /// Rows not satisfied by `x`.
    pub fn violated_rows(&self, x: &[bool]) -> Vec<&Row> {
        self.rows.iter().filter(|r| !r.holds(x)).collect()
    }

    pub fn objective_value(&self, x: &[bool]) -> i64 {
        self.objective
            .iter()
            .filter(|&&(v, _)| x[v])
            .map(|&(_, c)| c)
            .sum()
    }

    /// Deterministic LP-format text.
    pub fn write_lp(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ time-indexed RCPSP model, horizon {}", self.horizon);
        s.push_str("Minimize\n obj:");
        self.write_expr(&mut s, &self.objective);
        s.push_str("Subject To\n");
        for row in &self.rows {
            let _ = write!(s, " {}:", row.name());
            self.write_expr_open(&mut s, &row.terms);
            let op = match row.sense {
                Sense::Eq => "=",
                Sense::Le => "<=",
            };
            let _ = writeln!(s, " {op} {}", row.rhs);
        }
        s.push_str("Binary\n");
        for v in 0..self.num_vars() {
            let _ = writeln!(s, " {}", self.var_name(v));
        }
        s.push_str("End\n");
        s
    }

    fn write_expr(&self, s: &mut String, terms: &[(usize, i64)]) {
        self.write_expr_open(s, terms);
        s.push('\n');
    }

    /// Writes the terms, eight per line; an empty expression is written as
    /// `0 x_0_0` so every row stays syntactically valid.
    fn write_expr_open(&self, s: &mut String, terms: &[(usize, i64)]) {
        if terms.is_empty() {
            let _ = write!(s, " 0 {}", self.var_name(0));
            return;
        }
        for (k, &(v, c)) in terms.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                s.push_str("\n   ");
            }
            let sign = if c < 0 { '-' } else { '+' };
            if k == 0 && c >= 0 {
                let _ = write!(s, " {} {}", c, self.var_name(v));
            } else {
                let _ = write!(s, " {sign} {} {}", c.abs(), self.var_name(v));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::example1;
    use crate::instance::Activity;

    #[test]
    fn example1_counts() {
        let m = TimeIndexedModel::build(&example1());
        assert_eq!(m.horizon(), 9);
        assert_eq!(m.num_vars(), 60);
        assert_eq!(m.count_rows(|k| matches!(k, RowKind::Assign(_))), 6);
        assert_eq!(m.count_rows(|k| matches!(k, RowKind::Precedence(..))), 6);
        assert_eq!(m.count_rows(|k| matches!(k, RowKind::Capacity(..))), 10);
    }

    #[test]
    fn optimal_assignment_satisfies_rows() {
        let m = TimeIndexedModel::build(&example1());
        let x = m.assignment(&[0, 0, 3, 0, 3, 5]).unwrap();
        assert!(m.violated_rows(&x).is_empty());
        assert_eq!(m.objective_value(&x), 5);
    }

    #[test]
    fn overload_fails_a_capacity_row() {
        let m = TimeIndexedModel::build(&example1());
        // b, d and e all running at t = 0..2; e ignores its predecessor too
        let x = m.assignment(&[0, 0, 3, 0, 0, 5]).unwrap();
        let bad = m.violated_rows(&x);
        assert!(bad.iter().any(|r| r.name() == "cap_0_0"));
        assert!(bad.iter().any(|r| r.name() == "prec_3_4"));
    }

    #[test]
    fn early_window_rows_only_see_started_activities() {
        let m = TimeIndexedModel::build(&example1());
        let row = m
            .rows()
            .iter()
            .find(|r| r.kind == RowKind::Capacity(0, 0))
            .unwrap();
        let names: Vec<_> = row.terms.iter().map(|&(v, _)| m.var_name(v)).collect();
        assert_eq!(names, vec!["x_1_0", "x_2_0", "x_3_0", "x_4_0"]);
    }

    #[test]
    fn dummy_only_model() {
        let acts = vec![Activity::new(0, 0, vec![]), Activity::new(1, 0, vec![])];
        let inst = RcpspInstance::new(acts, [(0, 1)], vec![]);
        let m = TimeIndexedModel::build(&inst);
        assert_eq!(m.horizon(), 0);
        assert_eq!(m.num_vars(), 2);
        let x = m.assignment(&[0, 0]).unwrap();
        assert!(m.violated_rows(&x).is_empty());
        assert_eq!(m.objective_value(&x), 0);
        assert!(m.write_lp().contains(" obj: 0 x_0_0\n"));
    }

    #[test]
    fn lp_text_is_deterministic() {
        let m = TimeIndexedModel::build(&example1());
        let lp = m.write_lp();
        assert_eq!(lp, TimeIndexedModel::build(&example1()).write_lp());
        let binaries = lp
            .split("Binary\n")
            .nth(1)
            .unwrap()
            .lines()
            .take_while(|l| *l != "End")
            .count();
        assert_eq!(binaries, 60);
        assert!(lp.contains(" prec_1_2:"));
        assert!(lp.contains(" assign_5:"));
        assert!(lp.ends_with("End\n"));
    }
}
