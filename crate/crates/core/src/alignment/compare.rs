use serde::Serialize;

use super::{alignment_order, Alignment, AlignmentOrder, AlignmentTable};
use crate::error::{Error, Result};
use crate::features::{ratio, FeatureTable, LearnerFeatures, OrderClass};
use crate::ingest::ResourceId;
use crate::report::{Cell, Table};

/// Per-learner dropout from both methods; `delta` is alignment minus features.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LearnerComparison {
    pub learner_id: String,
    #[serde(rename = "ruaf_dropout")]
    pub feature_dropout: usize,
    pub alignment_dropout: usize,
    pub delta: i64,
}

/// Per-resource counts of learners flagged early/late by both methods or
/// by only one of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceComparison {
    pub resource: ResourceId,
    pub feature_active: usize,
    pub alignment_active: usize,
    pub active_ratio: Option<f64>,
    pub feature_drop: Option<f64>,
    pub alignment_drop: Option<f64>,
    pub alignment_early: Option<f64>,
    pub alignment_late: Option<f64>,
    pub early_both: usize,
    pub early_feature_only: usize,
    pub early_alignment_only: usize,
    pub late_both: usize,
    pub late_feature_only: usize,
    pub late_alignment_only: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub learners: usize,
    pub mean_dropout_delta: Option<f64>,
    /// Mean of `alignment_active / feature_active` over resources with
    /// `feature_active > 0`.
    pub mean_active_ratio: Option<f64>,
    pub alignment_earlier: usize,
    pub same_dropout: usize,
    pub alignment_later: usize,
    /// Share of (learner, resource) pairs with the same early flag.
    pub early_agreement: Option<f64>,
    pub late_agreement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub summary: ComparisonSummary,
    pub resources: Vec<ResourceComparison>,
    pub learners: Vec<LearnerComparison>,
}

pub const LEARNER_COLUMNS: [&str; 4] = ["learner_id", "ruaf_dropout", "alignment_dropout", "delta"];

impl ComparisonReport {
    pub fn learner_table(&self) -> Table {
        Table {
            columns: LEARNER_COLUMNS.iter().map(|c| c.to_string()).collect(),
            rows: self
                .learners
                .iter()
                .map(|l| {
                    vec![
                        Cell::Text(l.learner_id.clone()),
                        Cell::Int(l.feature_dropout as i64),
                        Cell::Int(l.alignment_dropout as i64),
                        Cell::Int(l.delta),
                    ]
                })
                .collect(),
        }
    }

    pub fn resource_table(&self) -> Table {
        let columns = [
            "resource",
            "ruaf_active",
            "alignment_active",
            "active_ratio",
            "ruaf_drop",
            "alignment_drop",
            "alignment_early",
            "alignment_late",
            "early_both",
            "early_ruaf_only",
            "early_alignment_only",
            "late_both",
            "late_ruaf_only",
            "late_alignment_only",
        ];
        let int = |v: usize| Cell::Int(v as i64);
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: self
                .resources
                .iter()
                .map(|r| {
                    vec![
                        Cell::Text(r.resource.to_string()),
                        int(r.feature_active),
                        int(r.alignment_active),
                        Cell::from(r.active_ratio),
                        Cell::from(r.feature_drop),
                        Cell::from(r.alignment_drop),
                        Cell::from(r.alignment_early),
                        Cell::from(r.alignment_late),
                        int(r.early_both),
                        int(r.early_feature_only),
                        int(r.early_alignment_only),
                        int(r.late_both),
                        int(r.late_feature_only),
                        int(r.late_alignment_only),
                    ]
                })
                .collect(),
        }
    }
}

/// Contrasts the feature analysis with the alignment analysis of the same
/// cohort. `learners` and `alignments` must list the same learners in the
/// same order, and both tables must cover the same curriculum.
pub fn compare(
    features: &FeatureTable,
    alignment_table: &AlignmentTable,
    learners: &[LearnerFeatures],
    alignments: &[Alignment],
) -> Result<ComparisonReport> {
    if features.rows.len() != alignment_table.rows.len()
        || features
            .rows
            .iter()
            .zip(&alignment_table.rows)
            .any(|(a, b)| a.resource != b.resource)
    {
        return Err(Error::Mismatch("tables cover different curricula".into()));
    }
    if learners.len() != alignments.len() {
        return Err(Error::Mismatch(format!(
            "{} learners analysed but {} aligned",
            learners.len(),
            alignments.len()
        )));
    }
    if let Some((l, a)) = learners.iter().zip(alignments).find(|(l, a)| l.learner_id != a.learner_id) {
        return Err(Error::Mismatch(format!(
            "learner {} paired with alignment of {}",
            l.learner_id, a.learner_id
        )));
    }
    if features.cohort_size != learners.len() || alignment_table.cohort_size != learners.len() {
        return Err(Error::Mismatch("tables were built from a different cohort".into()));
    }

    let resources = features.rows.len();
    let mut early = vec![[0usize; 3]; resources + 1];
    let mut late = vec![[0usize; 3]; resources + 1];
    let mut early_agree = 0usize;
    let mut late_agree = 0usize;
    let mut learner_rows = Vec::with_capacity(learners.len());

    for (l, a) in learners.iter().zip(alignments) {
        let mut ours = vec![None; resources + 1];
        for &(r, class) in &l.orders {
            ours[r] = Some(class);
        }
        let mut theirs = vec![None; resources + 1];
        for (r, class) in alignment_order(a) {
            theirs[r] = Some(class);
        }
        for r in 1..=resources {
            let pairs = [
                (&mut early, ours[r] == Some(OrderClass::Early), theirs[r] == Some(AlignmentOrder::Early), &mut early_agree),
                (&mut late, ours[r] == Some(OrderClass::Late), theirs[r] == Some(AlignmentOrder::Late), &mut late_agree),
            ];
            for (tally, f, g, agree) in pairs {
                match (f, g) {
                    (true, true) => tally[r][0] += 1,
                    (true, false) => tally[r][1] += 1,
                    (false, true) => tally[r][2] += 1,
                    (false, false) => {}
                }
                if f == g {
                    *agree += 1;
                }
            }
        }
        learner_rows.push(LearnerComparison {
            learner_id: l.learner_id.clone(),
            feature_dropout: l.dropout,
            alignment_dropout: a.dropout_index,
            delta: a.dropout_index as i64 - l.dropout as i64,
        });
    }

    let resource_rows: Vec<ResourceComparison> = features
        .rows
        .iter()
        .zip(&alignment_table.rows)
        .enumerate()
        .map(|(i, (f, g))| {
            let r = i + 1;
            ResourceComparison {
                resource: f.resource,
                feature_active: f.active,
                alignment_active: g.active,
                active_ratio: (f.active > 0).then(|| g.active as f64 / f.active as f64),
                feature_drop: f.drop,
                alignment_drop: g.drop,
                alignment_early: g.early,
                alignment_late: g.late,
                early_both: early[r][0],
                early_feature_only: early[r][1],
                early_alignment_only: early[r][2],
                late_both: late[r][0],
                late_feature_only: late[r][1],
                late_alignment_only: late[r][2],
            }
        })
        .collect();

    let n = learner_rows.len();
    let delta_sum: i64 = learner_rows.iter().map(|l| l.delta).sum();
    let ratios: Vec<f64> = resource_rows.iter().filter_map(|r| r.active_ratio).collect();
    let summary = ComparisonSummary {
        learners: n,
        mean_dropout_delta: (n > 0).then(|| delta_sum as f64 / n as f64),
        mean_active_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        alignment_earlier: learner_rows.iter().filter(|l| l.delta < 0).count(),
        same_dropout: learner_rows.iter().filter(|l| l.delta == 0).count(),
        alignment_later: learner_rows.iter().filter(|l| l.delta > 0).count(),
        early_agreement: ratio(early_agree, n * resources),
        late_agreement: ratio(late_agree, n * resources),
    };
    Ok(ComparisonReport {
        summary,
        resources: resource_rows,
        learners: learner_rows,
    })
}
