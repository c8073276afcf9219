use serde::Serialize;

use super::model::{Label, SequentialDropModel};
use crate::traces::LearnerTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Sync,
    LogOnly,
    ModelOnly,
    Drop,
}

impl MoveKind {
    pub fn cost(self) -> usize {
        match self {
            MoveKind::Sync | MoveKind::Drop => 0,
            MoveKind::LogOnly | MoveKind::ModelOnly => 1,
        }
    }
}

/// One alignment step. `resource` is the curriculum index, or `j` for the
/// `drop-j` move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentMove {
    pub kind: MoveKind,
    pub resource: usize,
}

impl AlignmentMove {
    fn new(kind: MoveKind, resource: usize) -> Self {
        AlignmentMove { kind, resource }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alignment {
    pub learner_id: String,
    pub moves: Vec<AlignmentMove>,
    pub cost: usize,
    /// `j` of the fired `drop-j`.
    pub dropout_index: usize,
}

impl Alignment {
    /// Trace-side events: sync and log-only moves.
    pub fn log_projection(&self) -> Vec<usize> {
        self.moves
            .iter()
            .filter(|m| matches!(m.kind, MoveKind::Sync | MoveKind::LogOnly))
            .map(|m| m.resource)
            .collect()
    }

    /// Model-side firing sequence: sync, model-only and drop moves.
    pub fn model_projection(&self) -> Vec<Label> {
        self.moves
            .iter()
            .filter_map(|m| match m.kind {
                MoveKind::Sync | MoveKind::ModelOnly => Some(Label::Resource(m.resource)),
                MoveKind::Drop => Some(Label::Drop(m.resource)),
                MoveKind::LogOnly => None,
            })
            .collect()
    }
}

/// For every `j`, the longest strictly increasing subsequence of `seq`
/// using only values `≤ j`. Index 0 is unused.
///
/// The longest increasing subsequence ending at an element only uses
/// smaller values, so it is the same whether or not larger values are
/// filtered out; `m_j` is a prefix maximum over values.
fn lis_by_bound(seq: &[usize], resources: usize) -> Vec<usize> {
    let mut ending = vec![0usize; seq.len()];
    for p in 0..seq.len() {
        ending[p] = 1 + (0..p).filter(|&q| seq[q] < seq[p]).map(|q| ending[q]).max().unwrap_or(0);
    }
    let mut by_value = vec![0usize; resources + 1];
    for (p, &v) in seq.iter().enumerate() {
        by_value[v] = by_value[v].max(ending[p]);
    }
    for v in 1..=resources {
        by_value[v] = by_value[v].max(by_value[v - 1]);
    }
    by_value
}

/// Optimal `(cost, j)`: the cost of aligning with the run ending in
/// `drop-j` is `(j − m_j) + (n − m_j)`; ties go to the smallest `j`.
pub fn optimal_drop(seq: &[usize], resources: usize) -> (usize, usize) {
    let m = lis_by_bound(seq, resources);
    (1..=resources)
        .map(|j| (j + seq.len() - 2 * m[j], j))
        .min()
        .expect("at least one resource")
}

/// Rebuilds the moves against `1..=j` with sync preferred over model-only
/// over log-only whenever they tie on remaining cost.
fn reconstruct(seq: &[usize], j: usize) -> Vec<AlignmentMove> {
    let n = seq.len();
    // rest[a][b]: cheapest completion from trace position a, model position b.
    let mut rest = vec![vec![0usize; j + 1]; n + 1];
    for a in (0..=n).rev() {
        for b in (0..=j).rev() {
            rest[a][b] = if a == n {
                j - b
            } else if b == j {
                n - a
            } else {
                let mut best = 1 + rest[a + 1][b].min(rest[a][b + 1]);
                if seq[a] == b + 1 {
                    best = best.min(rest[a + 1][b + 1]);
                }
                best
            };
        }
    }

    let mut moves = Vec::with_capacity(n + j + 1);
    let (mut a, mut b) = (0, 0);
    let mut dropped = false;
    while a < n || !dropped {
        if b == j && !dropped {
            moves.push(AlignmentMove::new(MoveKind::Drop, j));
            dropped = true;
        } else if a < n && b < j && seq[a] == b + 1 && rest[a][b] == rest[a + 1][b + 1] {
            moves.push(AlignmentMove::new(MoveKind::Sync, seq[a]));
            a += 1;
            b += 1;
        } else if b < j && rest[a][b] == 1 + rest[a][b + 1] {
            moves.push(AlignmentMove::new(MoveKind::ModelOnly, b + 1));
            b += 1;
        } else {
            moves.push(AlignmentMove::new(MoveKind::LogOnly, seq[a]));
            a += 1;
        }
    }
    moves
}

/// Aligns a done sequence (curriculum indices, visit order, no repeats).
pub fn align_sequence(learner_id: impl Into<String>, seq: &[usize], model: &SequentialDropModel) -> Alignment {
    let resources = model.resource_count();
    debug_assert!(seq.iter().all(|&v| (1..=resources).contains(&v)));
    let (cost, dropout_index) = optimal_drop(seq, resources);
    let moves = reconstruct(seq, dropout_index);
    debug_assert_eq!(moves.iter().map(|m| m.kind.cost()).sum::<usize>(), cost);
    Alignment {
        learner_id: learner_id.into(),
        moves,
        cost,
        dropout_index,
    }
}

/// Minimal-cost alignment of the learner's done resources, in visit order,
/// against the drop model.
pub fn align(trace: &LearnerTrace, model: &SequentialDropModel) -> Alignment {
    align_sequence(trace.learner_id.clone(), &trace.done_sequence(), model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentOrder {
    OnTime,
    Early,
    Late,
    Skipped,
}

/// Per-resource reading of an alignment, ascending by resource.
///
/// A synchronous resource is on time. A resource with both a log-only and
/// a model-only move is early when the log move comes first and late
/// otherwise. A log-only resource past the drop has no model counterpart
/// and is late; a model-only resource the learner never did is skipped.
pub fn alignment_order(alignment: &Alignment) -> Vec<(usize, AlignmentOrder)> {
    let max = alignment
        .moves
        .iter()
        .map(|m| m.resource)
        .max()
        .unwrap_or(0);
    let mut sync = vec![false; max + 1];
    let mut log_at = vec![None; max + 1];
    let mut model_at = vec![None; max + 1];
    for (pos, m) in alignment.moves.iter().enumerate() {
        match m.kind {
            MoveKind::Sync => sync[m.resource] = true,
            MoveKind::LogOnly => log_at[m.resource] = Some(pos),
            MoveKind::ModelOnly => model_at[m.resource] = Some(pos),
            MoveKind::Drop => {}
        }
    }
    (1..=max)
        .filter_map(|r| {
            let class = match (sync[r], log_at[r], model_at[r]) {
                (true, _, _) => AlignmentOrder::OnTime,
                (false, Some(l), Some(m)) if l < m => AlignmentOrder::Early,
                (false, Some(_), Some(_)) => AlignmentOrder::Late,
                (false, Some(_), None) => AlignmentOrder::Late,
                (false, None, Some(_)) => AlignmentOrder::Skipped,
                (false, None, None) => return None,
            };
            Some((r, class))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use MoveKind::*;

    fn aligned(seq: &[usize], resources: usize) -> Alignment {
        align_sequence("l", seq, &SequentialDropModel::new(resources))
    }

    fn mv(kind: MoveKind, resource: usize) -> AlignmentMove {
        AlignmentMove::new(kind, resource)
    }

    #[test]
    fn unordered_tail_prefers_early_drop() {
        let a = aligned(&[1, 2, 6, 5, 4], 6);
        assert_eq!((a.cost, a.dropout_index), (3, 2));
        assert_eq!(
            a.moves,
            vec![mv(Sync, 1), mv(Sync, 2), mv(Drop, 2), mv(LogOnly, 6), mv(LogOnly, 5), mv(LogOnly, 4)]
        );
    }

    #[test]
    fn perfect_trace_costs_nothing() {
        let a = aligned(&[1, 2, 3, 4, 5, 6], 6);
        assert_eq!((a.cost, a.dropout_index), (0, 6));
        assert!(alignment_order(&a).iter().all(|(_, c)| *c == AlignmentOrder::OnTime));
    }

    #[test]
    fn single_first_resource() {
        let a = aligned(&[1], 3);
        assert_eq!((a.cost, a.dropout_index), (0, 1));
        assert_eq!(a.moves, vec![mv(Sync, 1), mv(Drop, 1)]);
    }

    #[test]
    fn swap_flags_exactly_one() {
        let a = aligned(&[1, 2, 4, 3, 5, 6], 6);
        assert_eq!((a.cost, a.dropout_index), (2, 6));
        let flagged: Vec<_> = alignment_order(&a)
            .into_iter()
            .filter(|(_, c)| *c != AlignmentOrder::OnTime)
            .collect();
        // The model-only move for 3 is preferred, so 3 comes out late.
        assert_eq!(flagged, vec![(3, AlignmentOrder::Late)]);
    }

    #[test]
    fn tail_past_drop_is_late() {
        let orders = alignment_order(&aligned(&[1, 2, 6, 5, 4], 6));
        assert_eq!(
            orders,
            vec![
                (1, AlignmentOrder::OnTime),
                (2, AlignmentOrder::OnTime),
                (4, AlignmentOrder::Late),
                (5, AlignmentOrder::Late),
                (6, AlignmentOrder::Late),
            ]
        );
    }

    #[test]
    fn missing_first_resource_is_skipped() {
        let a = aligned(&[2, 3], 3);
        assert_eq!((a.cost, a.dropout_index), (1, 3));
        assert_eq!(a.moves[0], mv(ModelOnly, 1));
        assert_eq!(alignment_order(&a)[0], (1, AlignmentOrder::Skipped));
    }

    #[test]
    fn projections_reproduce_inputs() {
        let model = SequentialDropModel::new(6);
        for seq in [&[1, 2, 6, 5, 4][..], &[3, 1, 2], &[6], &[2, 4, 6, 1, 3, 5]] {
            let a = align_sequence("l", seq, &model);
            assert_eq!(a.log_projection(), seq);
            assert!(model.accepts(&a.model_projection()));
        }
    }

    #[test]
    fn lis_bounds() {
        assert_eq!(lis_by_bound(&[1, 2, 6, 5, 4], 6), vec![0, 1, 2, 2, 3, 3, 3]);
        assert_eq!(lis_by_bound(&[3, 1, 2], 3), vec![0, 1, 2, 2]);
    }
}
