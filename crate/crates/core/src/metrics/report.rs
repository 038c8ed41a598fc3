use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::f1::{class_stats, majority_baseline, mean_in_macro, AbsentClassPolicy, ClassStats};
use super::MetricsError;
use crate::dataset::Label;
use crate::scoring::ScoredInstance;

/// Groups smaller than this fraction of the input are flagged.
pub const DEFAULT_MIN_GROUP_FRACTION: f64 = 0.05;

pub const UNTAGGED: &str = "untagged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows including failures.
    pub total: usize,
    pub failures: usize,
    pub unmatched_generations: usize,
    /// Gold label counts over successfully scored rows.
    pub gold_counts: BTreeMap<Label, usize>,
    pub classes: Vec<ClassStats>,
    /// None when nothing was scored.
    pub macro_f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub majority_baseline: Option<f64>,
}

impl EvalReport {
    pub fn scored(&self) -> usize {
        self.total - self.failures
    }
}

/// Report over rows; failed rows are counted but excluded from the rates.
pub fn eval_report(rows: &[&ScoredInstance], policy: AbsentClassPolicy) -> EvalReport {
    let mut preds = Vec::with_capacity(rows.len());
    let mut golds = Vec::with_capacity(rows.len());
    let mut failures = 0;
    for r in rows {
        match r.predicted {
            Some(p) if !r.is_failed() => {
                preds.push(p);
                golds.push(r.gold);
            }
            _ => failures += 1,
        }
    }
    let mut gold_counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|&l| (l, 0)).collect();
    for g in &golds {
        *gold_counts.get_mut(g).expect("all labels present") += 1;
    }
    let classes = class_stats(&preds, &golds, policy).unwrap_or_default();
    let (macro_f1, accuracy, baseline) = if golds.is_empty() {
        (None, None, None)
    } else {
        let correct = preds.iter().zip(&golds).filter(|(p, g)| p == g).count();
        (
            Some(mean_in_macro(&classes)),
            Some(correct as f64 / golds.len() as f64),
            majority_baseline(&golds).ok(),
        )
    };
    EvalReport {
        total: rows.len(),
        failures,
        unmatched_generations: rows.iter().filter(|r| r.unmatched_generation).count(),
        gold_counts,
        classes,
        macro_f1,
        accuracy,
        majority_baseline: baseline,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Dataset,
    Category,
    ReasoningType,
}

impl GroupKey {
    pub fn of(self, row: &ScoredInstance) -> String {
        match self {
            GroupKey::Dataset => row.dataset.clone(),
            GroupKey::Category => row.category.as_str().to_string(),
            GroupKey::ReasoningType => row
                .reasoning_type
                .map(|r| r.as_str().to_string())
                .unwrap_or_else(|| UNTAGGED.to_string()),
        }
    }
}

impl FromStr for GroupKey {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dataset" => Ok(GroupKey::Dataset),
            "category" => Ok(GroupKey::Category),
            "reasoning_type" | "reasoning-type" => Ok(GroupKey::ReasoningType),
            other => Err(MetricsError::UnknownGroupKey(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub report: EvalReport,
    /// Share of all rows in this group.
    pub fraction: f64,
    /// Below the minimum group fraction.
    pub small: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedReport {
    pub key: GroupKey,
    pub min_group_fraction: f64,
    pub groups: BTreeMap<String, GroupEntry>,
    pub pooled: EvalReport,
}

pub fn grouped_report(rows: &[ScoredInstance], key: GroupKey) -> GroupedReport {
    grouped_report_with(rows, key, AbsentClassPolicy::default(), DEFAULT_MIN_GROUP_FRACTION)
}

pub fn grouped_report_with(
    rows: &[ScoredInstance],
    key: GroupKey,
    policy: AbsentClassPolicy,
    min_group_fraction: f64,
) -> GroupedReport {
    let mut buckets: BTreeMap<String, Vec<&ScoredInstance>> = BTreeMap::new();
    for r in rows {
        buckets.entry(key.of(r)).or_default().push(r);
    }
    let groups = buckets
        .into_iter()
        .map(|(name, members)| {
            let fraction = members.len() as f64 / rows.len() as f64;
            let entry = GroupEntry {
                report: eval_report(&members, policy),
                fraction,
                small: fraction < min_group_fraction,
            };
            (name, entry)
        })
        .collect();
    let all: Vec<&ScoredInstance> = rows.iter().collect();
    GroupedReport {
        key,
        min_group_fraction,
        groups,
        pooled: eval_report(&all, policy),
    }
}

/// Systems × datasets grid of macro-F1 with a trailing average column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, BTreeMap<String, f64>)>,
}

impl ResultsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a system row from a dataset-grouped report.
    pub fn add_system(&mut self, system: &str, report: &GroupedReport) {
        let mut cells = BTreeMap::new();
        for (name, entry) in &report.groups {
            if let Some(f1) = entry.report.macro_f1 {
                cells.insert(name.clone(), f1);
            }
            if !self.columns.contains(name) {
                self.columns.push(name.clone());
            }
        }
        self.rows.push((system.to_string(), cells));
    }

    /// Mean over the row's present cells.
    pub fn average(cells: &BTreeMap<String, f64>) -> Option<f64> {
        (!cells.is_empty()).then(|| cells.values().sum::<f64>() / cells.len() as f64)
    }

    /// Plain-text table; scores are shown as percentages with one decimal.
    pub fn render(&self) -> String {
        let mut header = vec!["system".to_string()];
        header.extend(self.columns.iter().cloned());
        header.push("avg".to_string());
        let fmt = |v: Option<f64>| v.map(|x| format!("{:.1}", 100.0 * x)).unwrap_or_else(|| "-".into());
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(name, cells)| {
                let mut line = vec![name.clone()];
                line.extend(self.columns.iter().map(|c| fmt(cells.get(c).copied())));
                line.push(fmt(Self::average(cells)));
                line
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                std::iter::once(&header)
                    .chain(&body)
                    .map(|l| l[i].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let mut emit = |line: &[String]| {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = widths[i])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        };
        emit(&header);
        for line in &body {
            emit(line);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Category, ReasoningType};

    fn row(id: usize, dataset: &str, rt: Option<ReasoningType>, gold: Label, pred: Option<Label>) -> ScoredInstance {
        ScoredInstance {
            id: format!("r{id}"),
            dataset: dataset.into(),
            category: Category::Nli,
            reasoning_type: rt,
            gold,
            predicted: pred,
            score: None,
            unmatched_generation: false,
            error: pred.is_none().then(|| "boom".to_string()),
        }
    }

    #[test]
    fn reasoning_groups_and_untagged() {
        let types = [ReasoningType::R1, ReasoningType::R2, ReasoningType::R3, ReasoningType::R4];
        let mut rows: Vec<ScoredInstance> = (0..40)
            .map(|i| row(i, "d", Some(types[i % 4]), Label::Support, Some(Label::Support)))
            .collect();
        let r = grouped_report(&rows, GroupKey::ReasoningType);
        assert_eq!(r.groups.len(), 4);
        assert!(r.groups.values().all(|g| !g.small && g.report.macro_f1 == Some(1.0)));
        rows.push(row(99, "d", None, Label::NotSupport, Some(Label::Support)));
        let r = grouped_report(&rows, GroupKey::ReasoningType);
        assert_eq!(r.groups.len(), 5);
        assert!(r.groups[UNTAGGED].small);
        assert_eq!(r.pooled.total, 41);
    }

    #[test]
    fn single_group_equals_pooled_and_failures_counted() {
        let rows = vec![
            row(0, "d", None, Label::Support, Some(Label::Support)),
            row(1, "d", None, Label::NotSupport, Some(Label::Support)),
            row(2, "d", None, Label::NotSupport, None),
        ];
        let r = grouped_report(&rows, GroupKey::Dataset);
        assert_eq!(r.groups["d"].report, r.pooled);
        assert_eq!(r.pooled.failures, 1);
        assert_eq!(r.pooled.scored(), 2);
        assert_eq!(r.pooled.gold_counts[&Label::NotSupport], 1);
    }

    #[test]
    fn all_failed_has_no_rates() {
        let rows = vec![row(0, "d", None, Label::Support, None)];
        let r = grouped_report(&rows, GroupKey::Dataset);
        assert_eq!(r.pooled.macro_f1, None);
        assert!(r.pooled.classes.is_empty());
    }

    #[test]
    fn table_layout() {
        let a = vec![
            row(0, "anli", None, Label::Support, Some(Label::Support)),
            row(1, "qasc", None, Label::Support, Some(Label::Support)),
        ];
        let mut t = ResultsTable::new();
        t.add_system("sys-a", &grouped_report(&a, GroupKey::Dataset));
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].split_whitespace().collect::<Vec<_>>(), ["system", "anli", "qasc", "avg"]);
        assert_eq!(lines[1].split_whitespace().collect::<Vec<_>>(), ["sys-a", "100.0", "100.0", "100.0"]);
    }
}
