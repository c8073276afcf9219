use serde::Serialize;

use crate::traces::{Fraction, LearnerTrace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DropoutPoint {
    pub learner_id: String,
    /// 1-based curriculum index.
    pub index: usize,
}

/// Number of done resources with curriculum index in `i+1..=r`.
pub fn done_between(trace: &LearnerTrace, i: usize, r: usize) -> usize {
    debug_assert!(1 <= i && i < r && r <= trace.resource_count());
    let done = trace.done();
    let lo = done.partition_point(|&d| d <= i);
    let hi = done.partition_point(|&d| d <= r);
    hi - lo
}

/// True iff every window `(i, r]` with `i < r ≤ R` has at most
/// `fraction · (r - i)` done resources. Holds vacuously at `i = R`.
pub fn dropout_property(trace: &LearnerTrace, i: usize, fraction: Fraction) -> bool {
    let total = trace.resource_count();
    debug_assert!((1..=total).contains(&i));
    (i + 1..=total).all(|r| fraction.admits(done_between(trace, i, r), r - i))
}

/// Smallest `i` for which [`dropout_property`] holds.
///
/// With `c(x)` the number of done resources up to `x` and
/// `g(x) = den·c(x) − num·x`, the property at `i` reads
/// `max_{r>i} g(r) ≤ g(i)`, so one backward pass over a suffix maximum
/// decides every `i`.
pub fn dropout_index(trace: &LearnerTrace, fraction: Fraction) -> usize {
    let total = trace.resource_count();
    let (num, den) = (fraction.numer() as i128, fraction.denom() as i128);

    let mut prefix = vec![0i128; total + 1];
    let mut done = trace.done().iter().peekable();
    for x in 1..=total {
        prefix[x] = prefix[x - 1];
        if done.next_if(|&&d| d == x).is_some() {
            prefix[x] += 1;
        }
    }
    let g = |x: usize| den * prefix[x] - num * x as i128;

    let mut best = total;
    let mut suffix_max = g(total);
    for i in (1..total).rev() {
        let gi = g(i);
        if suffix_max <= gi {
            best = i;
        }
        suffix_max = suffix_max.max(gi);
    }
    best
}

pub fn dropout_point(trace: &LearnerTrace, fraction: Fraction) -> DropoutPoint {
    DropoutPoint {
        learner_id: trace.learner_id.clone(),
        index: dropout_index(trace, fraction),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(total: usize, done: &[usize]) -> LearnerTrace {
        LearnerTrace::from_done_order("l", total, done)
    }

    fn third() -> Fraction {
        Fraction::new(1, 3)
    }

    #[test]
    fn nine_resource_example() {
        let t = trace(9, &[1, 2, 3, 6]);
        assert_eq!(done_between(&t, 3, 5), 0);
        assert_eq!(done_between(&t, 3, 6), 1);
        assert_eq!(done_between(&t, 1, 9), 3);
        assert!(dropout_property(&t, 3, third()));
        assert!(!dropout_property(&t, 2, third()));
        assert!(!dropout_property(&t, 1, third()));
        assert_eq!(dropout_index(&t, third()), 3);
    }

    #[test]
    fn adjacent_window() {
        let t = trace(5, &[2, 4]);
        for i in 1..5 {
            assert_eq!(done_between(&t, i, i + 1) == 1, t.is_done(i + 1));
        }
    }

    #[test]
    fn last_index_always_qualifies() {
        for done in [&[1][..], &[1, 2, 3, 4], &[4], &[2, 3]] {
            assert!(dropout_property(&trace(4, done), 4, third()));
        }
    }

    #[test]
    fn full_completion_drops_at_the_end() {
        let t = trace(7, &[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(dropout_index(&t, third()), 7);
    }

    #[test]
    fn lone_late_resource_is_a_peek() {
        let t = trace(6, &[5]);
        assert_eq!(dropout_index(&t, third()), 1);
    }

    #[test]
    fn reorder_does_not_matter() {
        let a = trace(6, &[1, 2, 4, 5, 6]);
        let b = trace(6, &[1, 2, 6, 5, 4]);
        assert_eq!(dropout_index(&a, third()), 6);
        assert_eq!(dropout_index(&b, third()), 6);
    }

    #[test]
    fn single_resource_course() {
        assert_eq!(dropout_index(&trace(1, &[1]), third()), 1);
    }

    #[test]
    fn point_carries_learner() {
        let p = dropout_point(&trace(9, &[1, 2, 3, 6]), third());
        assert_eq!(p, DropoutPoint { learner_id: "l".into(), index: 3 });
    }
}
