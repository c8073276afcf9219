use serde::Serialize;

use crate::traces::LearnerTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderClass {
    Early,
    Late,
    OnTime,
}

/// Classifies every done resource of the trace, in visit order.
///
/// Over done resources ordered by first visit, `A(r)` holds the resources
/// preceding `r` in the curriculum but started after it, and `B(r)` those
/// following `r` in the curriculum but started before it. `r` is early when
/// at least `k` members `x` of `A(r)` have `|B(x)| < |A(r)|`, late when at
/// least `k` members `x` of `B(r)` have `|A(x)| < |B(r)|`. The two
/// conditions are mutually exclusive; early is checked first.
pub fn classify_all(trace: &LearnerTrace, k: usize) -> Vec<(usize, OrderClass)> {
    let seq = trace.done_sequence();
    let n = seq.len();
    let mut a_size = vec![0usize; n];
    let mut b_size = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if seq[q] < seq[p] {
                a_size[p] += 1;
                b_size[q] += 1;
            }
        }
    }
    (0..n)
        .map(|p| {
            let early = (p + 1..n)
                .filter(|&q| seq[q] < seq[p] && b_size[q] < a_size[p])
                .count();
            if early >= k {
                return (seq[p], OrderClass::Early);
            }
            let late = (0..p)
                .filter(|&q| seq[q] > seq[p] && a_size[q] < b_size[p])
                .count();
            let class = if late >= k {
                OrderClass::Late
            } else {
                OrderClass::OnTime
            };
            (seq[p], class)
        })
        .collect()
}

/// Order class of one done resource. Panics if `r` is not done.
pub fn classify_order(trace: &LearnerTrace, r: usize, k: usize) -> OrderClass {
    classify_all(trace, k)
        .into_iter()
        .find(|&(index, _)| index == r)
        .map(|(_, class)| class)
        .unwrap_or_else(|| panic!("resource {r} is not done"))
}

/// Done resources the learner came back to: more than `threshold` done
/// resources later in the curriculum were first visited strictly between
/// the resource's first visit and its completion.
pub fn came_back_all(trace: &LearnerTrace, threshold: usize) -> Vec<usize> {
    let done: Vec<_> = trace.done_visits().collect();
    let mut out = Vec::new();
    for (p, v) in done.iter().enumerate() {
        let Some(end) = v.completion else { continue };
        let later = done[p + 1..]
            .iter()
            .take_while(|w| w.first_visit < end)
            .filter(|w| w.first_visit > v.first_visit && w.index > v.index)
            .count();
        if later > threshold {
            out.push(v.index);
        }
    }
    out.sort_unstable();
    out
}

pub fn came_back(trace: &LearnerTrace, r: usize, threshold: usize) -> bool {
    came_back_all(trace, threshold).binary_search(&r).is_ok()
}
