//! Brute-force oracles. Each one evaluates a definition literally, with no
//! code shared with the library paths it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use stepusage::features::OrderClass;
use stepusage::LearnerTrace;

/// A raw visit: `(index, first_visit, completion)`.
pub type RawVisit = (usize, i64, Option<i64>);

#[derive(Clone, Debug)]
pub struct RandomTrace {
    pub resources: usize,
    pub visits: Vec<RawVisit>,
    pub min_done: i64,
}

impl RandomTrace {
    pub fn trace(&self) -> LearnerTrace {
        LearnerTrace::from_visits("oracle", self.resources, self.visits.iter().copied(), self.min_done)
    }

    /// Done visits in `(first_visit, index)` order.
    pub fn done_visits(&self) -> Vec<RawVisit> {
        let mut done: Vec<RawVisit> = self
            .visits
            .iter()
            .copied()
            .filter(|&(_, first, completion)| completion.map_or(0, |c| c - first) > self.min_done)
            .collect();
        done.sort_by_key(|&(index, first, _)| (first, index));
        done
    }

    pub fn done_set(&self) -> BTreeSet<usize> {
        self.done_visits().iter().map(|v| v.0).collect()
    }

    pub fn done_sequence(&self) -> Vec<usize> {
        self.done_visits().iter().map(|v| v.0).collect()
    }
}

/// Random trace over at most `max_resources` resources. First visits are
/// drawn from a small range so ties happen; durations straddle the
/// threshold and completions are sometimes missing.
pub fn random_trace<R: Rng>(rng: &mut R, max_resources: usize) -> RandomTrace {
    let resources = rng.gen_range(1..=max_resources);
    let min_done = 60;
    let mut visits = Vec::new();
    for index in 1..=resources {
        if rng.gen_bool(0.75) {
            let first = rng.gen_range(0..40) * 30;
            let completion = if rng.gen_bool(0.1) {
                None
            } else if rng.gen_bool(0.2) {
                Some(first + rng.gen_range(0..=1200))
            } else {
                Some(first + rng.gen_range(0..=150))
            };
            visits.push((index, first, completion));
        }
    }
    RandomTrace {
        resources,
        visits,
        min_done,
    }
}

/// `P(i)`: every window `(i, r]` holds at most `num/den · (r − i)` done resources.
pub fn brute_property(done: &BTreeSet<usize>, resources: usize, i: usize, num: u64, den: u64) -> bool {
    (i + 1..=resources).all(|r| {
        let count = (i + 1..=r).filter(|x| done.contains(x)).count() as u64;
        count * den <= num * (r - i) as u64
    })
}

pub fn brute_dropout(done: &BTreeSet<usize>, resources: usize, num: u64, den: u64) -> usize {
    (1..=resources)
        .find(|&i| brute_property(done, resources, i, num, den))
        .expect("P(R) holds vacuously")
}

/// True iff some `k` distinct members of `pool` all satisfy `pred`,
/// checked by enumerating subsets of `pool`.
fn exists_k_subset(pool: &[usize], k: usize, pred: impl Fn(usize) -> bool) -> bool {
    assert!(pool.len() < 20);
    (0u32..1 << pool.len()).any(|mask| {
        mask.count_ones() as usize == k
            && pool
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .all(|(_, &x)| pred(x))
    })
}

/// Literal reading of the early / late definitions over a done sequence.
pub fn brute_classify(seq: &[usize], r: usize, k: usize) -> OrderClass {
    let pos = |x: usize| seq.iter().position(|&s| s == x).unwrap();
    let a = |x: usize| -> Vec<usize> { seq.iter().copied().filter(|&y| y < x && pos(y) > pos(x)).collect() };
    let b = |x: usize| -> Vec<usize> { seq.iter().copied().filter(|&y| y > x && pos(y) < pos(x)).collect() };
    let (ar, br) = (a(r), b(r));
    if exists_k_subset(&ar, k, |x| b(x).len() < ar.len()) {
        OrderClass::Early
    } else if exists_k_subset(&br, k, |x| a(x).len() < br.len()) {
        OrderClass::Late
    } else {
        OrderClass::OnTime
    }
}

/// Later-in-curriculum done resources first visited strictly inside the
/// done resource's `(first, completion)` window, compared to `threshold`.
pub fn brute_came_back(t: &RandomTrace, r: usize, threshold: usize) -> bool {
    let done = t.done_visits();
    let Some(&(_, first, completion)) = done.iter().find(|v| v.0 == r) else {
        return false;
    };
    let Some(end) = completion else { return false };
    let inside = done
        .iter()
        .filter(|&&(x, f, _)| x > r && first < f && f < end)
        .count();
    inside > threshold
}

/// Complete runs of the drop model, written out directly: `1..=j, drop-j`.
pub fn model_runs(resources: usize) -> Vec<Vec<usize>> {
    (1..=resources).map(|j| (1..=j).collect()).collect()
}

/// Minimal alignment cost over every complete run and every
/// order-preserving matching between trace and run, with the smallest
/// run length attaining it. Matchings are enumerated as subsets of
/// trace positions.
pub fn brute_align(seq: &[usize], resources: usize) -> (usize, usize) {
    let n = seq.len();
    assert!(n <= 16);
    let mut best: Option<(usize, usize)> = None;
    for run in model_runs(resources) {
        let j = run.len();
        for mask in 0u32..1 << n {
            let matched: Vec<usize> = (0..n).filter(|p| mask & (1 << p) != 0).map(|p| seq[p]).collect();
            let in_run = matched.iter().all(|v| run.contains(v));
            let run_pos: Vec<usize> = matched.iter().map(|v| run.iter().position(|x| x == v).unwrap_or(0)).collect();
            let order_preserved = run_pos.windows(2).all(|w| w[0] < w[1]);
            if in_run && order_preserved {
                let m = matched.len();
                let cost = (n - m) + (j - m);
                if best.is_none_or(|(c, bj)| (cost, j) < (c, bj)) {
                    best = Some((cost, j));
                }
            }
        }
    }
    best.unwrap()
}

/// Minimal cost among runs that go at least as far as `reach`.
pub fn brute_align_reaching(seq: &[usize], resources: usize, reach: usize) -> usize {
    let n = seq.len();
    (reach..=resources)
        .flat_map(|j| {
            (0u32..1 << n).filter_map(move |mask| {
                let matched: Vec<usize> = (0..n).filter(|p| mask & (1 << p) != 0).map(|p| seq[p]).collect();
                (matched.iter().all(|&v| v <= j) && matched.windows(2).all(|w| w[0] < w[1]))
                    .then(|| (n - matched.len()) + (j - matched.len()))
            })
        })
        .min()
        .unwrap()
}
