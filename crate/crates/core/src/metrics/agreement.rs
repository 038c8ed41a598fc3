use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::dataset::{DatasetError, Label, Record};

/// Five-way human judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Support,
    PartiallySupport,
    Irrelevant,
    PartiallyContradict,
    Contradict,
}

impl Judgment {
    pub const ALL: [Judgment; 5] = [
        Judgment::Support,
        Judgment::PartiallySupport,
        Judgment::Irrelevant,
        Judgment::PartiallyContradict,
        Judgment::Contradict,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub rater_id: String,
    pub judgment: Judgment,
}

impl Record for AnnotationRecord {
    fn validate(&self) -> Result<(), DatasetError> {
        if self.instance_id.trim().is_empty() {
            return Err(DatasetError::invalid("instance_id", "must be non-empty"));
        }
        if self.rater_id.trim().is_empty() {
            return Err(DatasetError::invalid("rater_id", "must be non-empty"));
        }
        Ok(())
    }
}

/// Support and partial support count as support, everything else does not.
pub fn collapse_annotation(judgment: Judgment) -> Label {
    match judgment {
        Judgment::Support | Judgment::PartiallySupport => Label::Support,
        Judgment::Irrelevant | Judgment::PartiallyContradict | Judgment::Contradict => Label::NotSupport,
    }
}

/// Most frequent label; an exact tie is not_support.
pub fn majority_verdict(labels: &[Label]) -> Result<Label, MetricsError> {
    if labels.is_empty() {
        return Err(MetricsError::Empty("labels"));
    }
    let support = labels.iter().filter(|&&l| l == Label::Support).count();
    Ok(if support * 2 > labels.len() {
        Label::Support
    } else {
        Label::NotSupport
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseAgreement {
    /// Agreeing pairs over all pairs; None when no instance had two labels.
    pub ratio: Option<f64>,
    pub agreeing_pairs: u64,
    pub total_pairs: u64,
    /// Instances with fewer than two labels.
    pub skipped: usize,
}

/// Agreeing unordered pairs over all unordered pairs, pooled across
/// instances.
pub fn pairwise_agreement<T: Eq>(instances: &[Vec<T>]) -> PairwiseAgreement {
    let (mut agree, mut total, mut skipped) = (0u64, 0u64, 0usize);
    for (i, labels) in instances.iter().enumerate() {
        if labels.len() < 2 {
            log::warn!("instance {i} has {} label(s), skipped for pairwise agreement", labels.len());
            skipped += 1;
            continue;
        }
        for a in 0..labels.len() {
            for b in a + 1..labels.len() {
                total += 1;
                if labels[a] == labels[b] {
                    agree += 1;
                }
            }
        }
    }
    PairwiseAgreement {
        ratio: (total > 0).then(|| agree as f64 / total as f64),
        agreeing_pairs: agree,
        total_pairs: total,
        skipped,
    }
}

/// Fleiss' kappa over an instances × categories count matrix.
///
/// Every row must sum to the same rater count n ≥ 2. When chance agreement
/// is 1 (every rating in one category) the result is 1.0.
pub fn fleiss_kappa(counts: &[Vec<u64>]) -> Result<f64, MetricsError> {
    let n_items = counts.len();
    if n_items == 0 {
        return Err(MetricsError::Empty("count matrix"));
    }
    let n_cats = counts[0].len();
    if n_cats == 0 {
        return Err(MetricsError::Ragged("matrix has no categories".into()));
    }
    let raters: u64 = counts[0].iter().sum();
    for (i, row) in counts.iter().enumerate() {
        if row.len() != n_cats {
            return Err(MetricsError::Ragged(format!("row {i} has {} categories, expected {n_cats}", row.len())));
        }
        let sum: u64 = row.iter().sum();
        if sum != raters {
            return Err(MetricsError::Ragged(format!("row {i} has {sum} ratings, expected {raters}")));
        }
    }
    if raters < 2 {
        return Err(MetricsError::Ragged(format!("need at least 2 raters per instance, got {raters}")));
    }
    let n = raters as f64;
    let total = n * n_items as f64;
    let mut p_bar = 0.0;
    let mut col = vec![0u64; n_cats];
    for row in counts {
        let agree: u64 = row.iter().map(|&c| c * c.saturating_sub(1)).sum();
        p_bar += agree as f64 / (n * (n - 1.0));
        for (j, &c) in row.iter().enumerate() {
            col[j] += c;
        }
    }
    p_bar /= n_items as f64;
    let p_e: f64 = col.iter().map(|&c| (c as f64 / total).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Ratings grouped by instance, in instance-id order. Rejects a rater who
/// judged the same instance twice.
pub fn group_by_instance(records: &[AnnotationRecord]) -> Result<BTreeMap<String, Vec<Judgment>>, MetricsError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut grouped: BTreeMap<String, Vec<Judgment>> = BTreeMap::new();
    for r in records {
        if !seen.insert((r.instance_id.as_str(), r.rater_id.as_str())) {
            return Err(MetricsError::DuplicateRating {
                instance: r.instance_id.clone(),
                rater: r.rater_id.clone(),
            });
        }
        grouped.entry(r.instance_id.clone()).or_default().push(r.judgment);
    }
    Ok(grouped)
}

pub fn binary_count_row(labels: &[Label]) -> Vec<u64> {
    let support = labels.iter().filter(|&&l| l == Label::Support).count() as u64;
    vec![support, labels.len() as u64 - support]
}

pub fn judgment_count_row(judgments: &[Judgment]) -> Vec<u64> {
    let mut row = vec![0u64; Judgment::ALL.len()];
    for j in judgments {
        row[j.index()] += 1;
    }
    row
}

/// Which labels pairwise agreement compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AgreementLabels {
    #[default]
    Collapsed,
    FiveWay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub instances: usize,
    pub labels: AgreementLabels,
    pub pairwise: PairwiseAgreement,
    /// Kappa on collapsed labels; None when rater counts differ by instance.
    pub fleiss_kappa_binary: Option<f64>,
    pub fleiss_kappa_five_way: Option<f64>,
    pub verdicts: BTreeMap<String, Label>,
}

/// Collapses, votes, and computes agreement statistics for a set of
/// annotation records.
pub fn agreement_summary(records: &[AnnotationRecord], labels: AgreementLabels) -> Result<AgreementSummary, MetricsError> {
    let grouped = group_by_instance(records)?;
    if grouped.is_empty() {
        return Err(MetricsError::Empty("annotation records"));
    }
    let collapsed: Vec<Vec<Label>> = grouped
        .values()
        .map(|js| js.iter().map(|&j| collapse_annotation(j)).collect())
        .collect();
    let pairwise = match labels {
        AgreementLabels::Collapsed => pairwise_agreement(&collapsed),
        AgreementLabels::FiveWay => pairwise_agreement(&grouped.values().cloned().collect::<Vec<_>>()),
    };
    let kappa = |rows: Vec<Vec<u64>>| match fleiss_kappa(&rows) {
        Ok(k) => Some(k),
        Err(e) => {
            log::warn!("fleiss kappa unavailable: {e}");
            None
        }
    };
    let fleiss_kappa_binary = kappa(collapsed.iter().map(|l| binary_count_row(l)).collect());
    let fleiss_kappa_five_way = kappa(grouped.values().map(|j| judgment_count_row(j)).collect());
    let mut verdicts = BTreeMap::new();
    for (id, labels) in grouped.keys().zip(&collapsed) {
        verdicts.insert(id.clone(), majority_verdict(labels)?);
    }
    Ok(AgreementSummary {
        instances: grouped.len(),
        labels,
        pairwise,
        fleiss_kappa_binary,
        fleiss_kappa_five_way,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{NotSupport as N, Support as S};

    #[test]
    fn collapse_and_verdict() {
        assert_eq!(collapse_annotation(Judgment::PartiallySupport), S);
        assert_eq!(collapse_annotation(Judgment::Irrelevant), N);
        assert_eq!(collapse_annotation(Judgment::Contradict), N);
        assert_eq!(majority_verdict(&[S, S, N]).unwrap(), S);
        assert_eq!(majority_verdict(&[S, N]).unwrap(), N);
        assert_eq!(majority_verdict(&[N]).unwrap(), N);
        assert!(majority_verdict(&[]).is_err());
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_agreement(&[vec!['A', 'A', 'B']]).ratio, Some(1.0 / 3.0));
        assert_eq!(pairwise_agreement(&[vec![1, 1, 1]]).ratio, Some(1.0));
        assert_eq!(pairwise_agreement(&[vec!['A', 'A'], vec!['A', 'B']]).ratio, Some(0.5));
        let skipped = pairwise_agreement(&[vec!['A'], vec!['A', 'A']]);
        assert_eq!((skipped.ratio, skipped.skipped), (Some(1.0), 1));
        assert_eq!(pairwise_agreement::<u8>(&[]).ratio, None);
    }

    #[test]
    fn kappa_degenerate_and_errors() {
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]]).unwrap(), 1.0);
        assert!(fleiss_kappa(&[vec![3, 0], vec![2, 0]]).is_err());
        assert!(fleiss_kappa(&[vec![3, 0], vec![3]]).is_err());
        assert!(fleiss_kappa(&[vec![1, 0]]).is_err());
        assert!(fleiss_kappa(&[]).is_err());
        // perfect agreement across categories
        assert!((fleiss_kappa(&[vec![3, 0], vec![0, 3]]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_from_records() {
        let rec = |i: &str, r: &str, j| AnnotationRecord {
            instance_id: i.into(),
            rater_id: r.into(),
            judgment: j,
        };
        let records = vec![
            rec("x", "a", Judgment::Support),
            rec("x", "b", Judgment::PartiallySupport),
            rec("x", "c", Judgment::Contradict),
            rec("y", "a", Judgment::Irrelevant),
            rec("y", "b", Judgment::Contradict),
            rec("y", "c", Judgment::Contradict),
        ];
        let s = agreement_summary(&records, AgreementLabels::Collapsed).unwrap();
        assert_eq!(s.verdicts["x"], S);
        assert_eq!(s.verdicts["y"], N);
        assert_eq!((s.pairwise.agreeing_pairs, s.pairwise.total_pairs), (4, 6));
        let five = agreement_summary(&records, AgreementLabels::FiveWay).unwrap();
        assert_eq!(five.pairwise.agreeing_pairs, 1);
        let mut dup = records.clone();
        dup.push(rec("x", "a", Judgment::Irrelevant));
        assert!(agreement_summary(&dup, AgreementLabels::Collapsed).is_err());
    }
}
