use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{BlockType, DashboardGraphs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::R1, Rule::R2, Rule::R3, Rule::R4];

    pub fn name(self) -> &'static str {
        match self {
            Rule::R1 => "partial-scope-filter",
            Rule::R2 => "orphan-legend",
            Rule::R3 => "isolated-block",
            Rule::R4 => "static-with-widgets",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::R3 => Severity::Info,
            _ => Severity::Warning,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule: Rule,
    pub name: String,
    pub severity: Severity,
    pub dashboard: String,
    pub subjects: Vec<String>,
    pub message: String,
}

impl LintFinding {
    fn new(rule: Rule, dashboard: &str, subjects: Vec<String>, message: String) -> Self {
        LintFinding {
            rule,
            name: rule.name().to_string(),
            severity: rule.severity(),
            dashboard: dashboard.to_string(),
            subjects,
            message,
        }
    }
}

/// Evaluates every rule on one dashboard. Findings are sorted by rule,
/// dashboard and subjects.
pub fn lint(g: &DashboardGraphs) -> Vec<LintFinding> {
    let id = g.dashboard_id.as_str();
    let charts: BTreeSet<&str> = g
        .nodes
        .iter()
        .filter(|b| b.is(BlockType::Chart))
        .map(|b| b.id.as_str())
        .collect();
    let targets_of = |src: &str| -> BTreeSet<&str> {
        g.interaction_edges
            .iter()
            .filter(|e| e.source == src && charts.contains(e.target.as_str()))
            .map(|e| e.target.as_str())
            .collect()
    };
    let adjacent_to = |node: &str| -> BTreeSet<&str> {
        g.adjacency_edges
            .iter()
            .filter_map(|e| {
                if e.source == node {
                    Some(e.target.as_str())
                } else if e.target == node {
                    Some(e.source.as_str())
                } else {
                    None
                }
            })
            .collect()
    };
    let mut out = Vec::new();

    for f in g.nodes.iter().filter(|b| b.is(BlockType::Filter)) {
        let targets = targets_of(&f.id);
        if !targets.is_empty() && targets.len() < charts.len() {
            let missing: Vec<&str> = charts.difference(&targets).copied().collect();
            out.push(LintFinding::new(
                Rule::R1,
                id,
                vec![f.id.clone()],
                format!(
                    "filter {} applies to {} of {} charts; not applied to {}",
                    f.id,
                    targets.len(),
                    charts.len(),
                    missing.join(", ")
                ),
            ));
        }
    }

    for l in g.nodes.iter().filter(|b| b.is(BlockType::Legend)) {
        let wired = g.interaction_edges.iter().any(|e| e.source == l.id || e.target == l.id);
        let near_chart = adjacent_to(&l.id).iter().any(|n| charts.contains(n));
        if !wired && !near_chart {
            out.push(LintFinding::new(
                Rule::R2,
                id,
                vec![l.id.clone()],
                format!("legend {} has no interactions and is not adjacent to any chart", l.id),
            ));
        }
    }

    for b in &g.nodes {
        if adjacent_to(&b.id).is_empty() {
            out.push(LintFinding::new(
                Rule::R3,
                id,
                vec![b.id.clone()],
                format!("{} block {} is not adjacent to any other block", b.block_type(), b.id),
            ));
        }
    }

    let widgets: Vec<String> = g
        .nodes
        .iter()
        .filter(|b| b.is(BlockType::Filter) || b.is(BlockType::Legend))
        .map(|b| b.id.clone())
        .collect();
    if !widgets.is_empty() && g.interaction_edges.is_empty() {
        out.push(LintFinding::new(
            Rule::R4,
            id,
            widgets.clone(),
            format!(
                "dashboard has filters or legends ({}) but no interactions",
                widgets.join(", ")
            ),
        ));
    }

    out.sort_by(|a, b| (a.rule, &a.dashboard, &a.subjects).cmp(&(b.rule, &b.dashboard, &b.subjects)));
    out
}

pub fn lint_corpus<'a>(graphs: impl IntoIterator<Item = &'a DashboardGraphs>) -> Vec<LintFinding> {
    let mut out: Vec<LintFinding> = graphs.into_iter().flat_map(lint).collect();
    out.sort_by(|a, b| (a.rule, &a.dashboard, &a.subjects).cmp(&(b.rule, &b.dashboard, &b.subjects)));
    out
}
