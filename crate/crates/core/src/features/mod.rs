//! Dropout points and the seven per-resource usage features.
//!
//! Everything here is computed per learner first ([`analyze_learner`]) and
//! then reduced with integer counts, so the result does not depend on the
//! order in which learners are processed.

mod dropout;
mod order;

use rayon::prelude::*;
use serde::Serialize;

pub use dropout::{done_between, dropout_index, dropout_point, dropout_property, DropoutPoint};
pub use order::{came_back, came_back_all, classify_all, classify_order, OrderClass};

use crate::ingest::{Curriculum, ResourceId};
use crate::report::{Cell, Table};
use crate::traces::{AnalysisConfig, Cohort, LearnerTrace};

/// Everything the aggregation needs to know about one learner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnerFeatures {
    pub learner_id: String,
    pub dropout: usize,
    /// Done resources, ascending.
    pub done: Vec<usize>,
    /// Order class of each done resource, in visit order.
    pub orders: Vec<(usize, OrderClass)>,
    /// Done resources the learner came back to, ascending.
    pub came_back: Vec<usize>,
}

impl LearnerFeatures {
    pub fn order_of(&self, index: usize) -> Option<OrderClass> {
        self.orders.iter().find(|(i, _)| *i == index).map(|(_, c)| *c)
    }
}

pub fn analyze_learner(trace: &LearnerTrace, config: &AnalysisConfig) -> LearnerFeatures {
    LearnerFeatures {
        learner_id: trace.learner_id.clone(),
        dropout: dropout_index(trace, config.dropout_fraction),
        done: trace.done().to_vec(),
        orders: classify_all(trace, config.order_k),
        came_back: came_back_all(trace, config.back_threshold),
    }
}

/// Per-learner features for the whole cohort, in cohort order.
pub fn analyze_cohort(cohort: &Cohort) -> Vec<LearnerFeatures> {
    cohort
        .traces
        .par_iter()
        .map(|t| analyze_learner(t, &cohort.config))
        .collect()
}

/// Integer numerators per resource. Early, late and back only count
/// learners that are active at the resource.
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    learners: usize,
    dropouts: Vec<usize>,
    skip: Vec<usize>,
    peek: Vec<usize>,
    early: Vec<usize>,
    late: Vec<usize>,
    back: Vec<usize>,
}

impl Tally {
    pub(crate) fn new(resources: usize) -> Self {
        let zeros = vec![0; resources + 1];
        Tally {
            learners: 0,
            dropouts: zeros.clone(),
            skip: zeros.clone(),
            peek: zeros.clone(),
            early: zeros.clone(),
            late: zeros.clone(),
            back: zeros,
        }
    }

    pub(crate) fn add_dropout(&mut self, dropout: usize) {
        self.learners += 1;
        self.dropouts[dropout] += 1;
    }

    /// Skip for undone resources up to the dropout, peek for done ones past it.
    pub(crate) fn add_done_set(&mut self, dropout: usize, done: &[usize]) {
        let mut done_iter = done.iter().peekable();
        for r in 1..self.dropouts.len() {
            let is_done = done_iter.next_if(|&&d| d == r).is_some();
            if r <= dropout && !is_done {
                self.skip[r] += 1;
            } else if r > dropout && is_done {
                self.peek[r] += 1;
            }
        }
    }

    pub(crate) fn add_early(&mut self, dropout: usize, r: usize) {
        if r <= dropout {
            self.early[r] += 1;
        }
    }

    pub(crate) fn add_late(&mut self, dropout: usize, r: usize) {
        if r <= dropout {
            self.late[r] += 1;
        }
    }

    pub(crate) fn add_back(&mut self, dropout: usize, r: usize) {
        if r <= dropout {
            self.back[r] += 1;
        }
    }

    pub(crate) fn learners(&self) -> usize {
        self.learners
    }

    /// `active(r)`: learners whose dropout is at or after `r`.
    pub(crate) fn active(&self) -> Vec<usize> {
        let n = self.dropouts.len();
        let mut active = vec![0; n];
        let mut acc = 0;
        for r in (1..n).rev() {
            acc += self.dropouts[r];
            active[r] = acc;
        }
        active
    }

    pub(crate) fn counts(&self, r: usize) -> FeatureCounts {
        FeatureCounts {
            drop: self.dropouts[r],
            skip: self.skip[r],
            peek: self.peek[r],
            early: self.early[r],
            late: self.late[r],
            back: self.back[r],
        }
    }
}

/// `count / denom`, or `None` when nobody is in the denominator.
pub fn ratio(count: usize, denom: usize) -> Option<f64> {
    (denom > 0).then(|| count as f64 / denom as f64)
}

/// Raw numerators behind a [`ResourceFeatureRow`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FeatureCounts {
    pub drop: usize,
    pub skip: usize,
    pub peek: usize,
    pub early: usize,
    pub late: usize,
    pub back: usize,
}

/// One resource's features. `None` marks a zero denominator: `active = 0`
/// for everything but `peek`, an empty cohort for `peek`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceFeatureRow {
    pub resource: ResourceId,
    pub active: usize,
    pub drop: Option<f64>,
    pub skip: Option<f64>,
    pub peek: Option<f64>,
    pub early: Option<f64>,
    pub late: Option<f64>,
    pub back: Option<f64>,
    #[serde(skip)]
    pub counts: FeatureCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureTable {
    pub cohort_size: usize,
    pub rows: Vec<ResourceFeatureRow>,
}

pub const FEATURE_COLUMNS: [&str; 8] = ["resource", "active", "drop", "skip", "peek", "early", "late", "back"];

impl FeatureTable {
    pub(crate) fn from_tally(curriculum: &Curriculum, tally: &Tally) -> Self {
        let cohort_size = tally.learners();
        let active = tally.active();
        let rows = (1..=curriculum.len())
            .map(|r| {
                let counts = tally.counts(r);
                let a = active[r];
                ResourceFeatureRow {
                    resource: curriculum.resource(r),
                    active: a,
                    drop: ratio(counts.drop, a),
                    skip: ratio(counts.skip, a),
                    peek: ratio(counts.peek, cohort_size),
                    early: ratio(counts.early, a),
                    late: ratio(counts.late, a),
                    back: ratio(counts.back, a),
                    counts,
                }
            })
            .collect();
        FeatureTable { cohort_size, rows }
    }

    /// Values of one named feature column, in curriculum order.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let pick: fn(&ResourceFeatureRow) -> Option<f64> = match name {
            "active" => |r| Some(r.active as f64),
            "drop" => |r| r.drop,
            "skip" => |r| r.skip,
            "peek" => |r| r.peek,
            "early" => |r| r.early,
            "late" => |r| r.late,
            "back" => |r| r.back,
            _ => return None,
        };
        Some(self.rows.iter().map(pick).collect())
    }

    pub fn to_table(&self) -> Table {
        Table {
            columns: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Text(r.resource.to_string()),
                        Cell::Int(r.active as i64),
                        Cell::from(r.drop),
                        Cell::from(r.skip),
                        Cell::from(r.peek),
                        Cell::from(r.early),
                        Cell::from(r.late),
                        Cell::from(r.back),
                    ]
                })
                .collect(),
        }
    }
}

/// Reduces per-learner results into the feature table.
pub fn aggregate_learners(curriculum: &Curriculum, learners: &[LearnerFeatures]) -> FeatureTable {
    let mut tally = Tally::new(curriculum.len());
    for l in learners {
        tally.add_dropout(l.dropout);
        tally.add_done_set(l.dropout, &l.done);
        for &(r, class) in &l.orders {
            match class {
                OrderClass::Early => tally.add_early(l.dropout, r),
                OrderClass::Late => tally.add_late(l.dropout, r),
                OrderClass::OnTime => {}
            }
        }
        for &r in &l.came_back {
            tally.add_back(l.dropout, r);
        }
    }
    FeatureTable::from_tally(curriculum, &tally)
}

pub fn aggregate_features(cohort: &Cohort) -> FeatureTable {
    aggregate_learners(&cohort.curriculum, &analyze_cohort(cohort))
}
