//! Alignment-based dropout and order detection.
//!
//! Each learner's done sequence is aligned against a sequential Petri net
//! of the curriculum that can end early through a `drop-j` shortcut after
//! any resource. Because the model is linear, an optimal alignment is
//! fully described by its drop point and a longest increasing subsequence,
//! so no state-space search is needed.

mod align;
mod compare;
mod model;

use rayon::prelude::*;
use serde::Serialize;

pub use align::{align, align_sequence, alignment_order, optimal_drop, Alignment, AlignmentMove, AlignmentOrder, MoveKind};
pub use compare::{compare, ComparisonReport, ComparisonSummary, LearnerComparison, ResourceComparison};
pub use model::{build_model, Label, SequentialDropModel, Transition};

use crate::features::{ratio, Tally};
use crate::ingest::{Curriculum, ResourceId};
use crate::report::{Cell, Table};
use crate::traces::Cohort;

/// One alignment per learner, in cohort order.
pub fn align_cohort(cohort: &Cohort) -> Vec<Alignment> {
    let model = build_model(&cohort.curriculum);
    cohort.traces.par_iter().map(|t| align(t, &model)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentRow {
    pub resource: ResourceId,
    pub active: usize,
    pub drop: Option<f64>,
    pub early: Option<f64>,
    pub late: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentTable {
    pub cohort_size: usize,
    pub rows: Vec<AlignmentRow>,
}

pub const ALIGNMENT_COLUMNS: [&str; 5] = ["resource", "active", "drop", "early", "late"];

impl AlignmentTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let pick: fn(&AlignmentRow) -> Option<f64> = match name {
            "active" => |r| Some(r.active as f64),
            "drop" => |r| r.drop,
            "early" => |r| r.early,
            "late" => |r| r.late,
            _ => return None,
        };
        Some(self.rows.iter().map(pick).collect())
    }

    pub fn to_table(&self) -> Table {
        Table {
            columns: ALIGNMENT_COLUMNS.iter().map(|c| c.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Text(r.resource.to_string()),
                        Cell::Int(r.active as i64),
                        Cell::from(r.drop),
                        Cell::from(r.early),
                        Cell::from(r.late),
                    ]
                })
                .collect(),
        }
    }
}

/// Aggregates alignments with the feature formulas: the drop index plays
/// the dropout point and [`alignment_order`] plays the order class.
pub fn aggregate_alignment(curriculum: &Curriculum, alignments: &[Alignment]) -> AlignmentTable {
    let mut tally = Tally::new(curriculum.len());
    for a in alignments {
        tally.add_dropout(a.dropout_index);
        for (r, class) in alignment_order(a) {
            match class {
                AlignmentOrder::Early => tally.add_early(a.dropout_index, r),
                AlignmentOrder::Late => tally.add_late(a.dropout_index, r),
                AlignmentOrder::OnTime | AlignmentOrder::Skipped => {}
            }
        }
    }
    let active = tally.active();
    let rows = (1..=curriculum.len())
        .map(|r| {
            let counts = tally.counts(r);
            AlignmentRow {
                resource: curriculum.resource(r),
                active: active[r],
                drop: ratio(counts.drop, active[r]),
                early: ratio(counts.early, active[r]),
                late: ratio(counts.late, active[r]),
            }
        })
        .collect();
    AlignmentTable {
        cohort_size: tally.learners(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::aggregate_features;
    use crate::traces::{AnalysisConfig, LearnerTrace};

    fn cohort(n: usize, orders: &[&[usize]]) -> Cohort {
        Cohort {
            traces: orders
                .iter()
                .enumerate()
                .map(|(i, o)| LearnerTrace::from_done_order(format!("l{i}"), n, o))
                .collect(),
            curriculum: Curriculum::new((1..=n as u32).map(|s| ResourceId::new(1, s)).collect(), None).unwrap(),
            config: AnalysisConfig::default(),
        }
    }

    #[test]
    fn perfect_learner_matches_feature_table() {
        let c = cohort(5, &[&[1, 2, 3, 4, 5]]);
        let ours = aggregate_features(&c);
        let theirs = aggregate_alignment(&c.curriculum, &align_cohort(&c));
        for (a, b) in ours.rows.iter().zip(&theirs.rows) {
            assert_eq!((a.active, a.drop, a.early, a.late), (b.active, b.drop, b.early, b.late));
        }
    }

    #[test]
    fn in_order_cohort_has_no_order_flags() {
        let c = cohort(6, &[&[1, 2, 3], &[1, 3, 5, 6], &[2, 4], &[1, 2, 3, 4, 5, 6]]);
        let table = aggregate_alignment(&c.curriculum, &align_cohort(&c));
        for row in &table.rows {
            assert!(row.early.unwrap_or(0.0) == 0.0 && row.late.unwrap_or(0.0) == 0.0);
        }
        assert_eq!(table.rows[0].active, 4);
    }

    #[test]
    fn late_past_drop_is_not_counted_as_active() {
        let c = cohort(6, &[&[1, 2, 6, 5, 4]]);
        let table = aggregate_alignment(&c.curriculum, &align_cohort(&c));
        assert_eq!(table.rows[1].drop, Some(1.0));
        assert_eq!(table.rows[3].active, 0);
        assert_eq!(table.rows[3].late, None);
    }
}
