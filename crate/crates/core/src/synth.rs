//! Synthetic step-activity cohorts with known ground truth.
//!
//! Each learner draws an intended dropout `d`, does every resource up to
//! `d` except for random skips (the dropout resource itself is always
//! done), peeks at later resources with a small probability, and visits
//! what they do in curriculum order up to a bounded local shuffle.
//! Timestamps sit on a one-minute grid: visits start three minutes apart
//! and last two minutes, so every emitted visit clears the default done
//! threshold. A revisited resource stays open across the next
//! [`REVISIT_SPAN`] visit starts.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureTable, LearnerFeatures};
use crate::ingest::{Curriculum, EventLog, ResourceId, StepActivityRecord};
use crate::traces::Fraction;

pub const SLOT_SECONDS: i64 = 180;
pub const VISIT_SECONDS: i64 = 120;
pub const REVISIT_SPAN: i64 = 5;
/// 2016-07-11 00:00:00 UTC.
pub const DEFAULT_START: i64 = 1_468_195_200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DropoutDistribution {
    Uniform,
    /// `P(d = k) = (1 − p)^(k−1) p`, with the tail mass beyond `R` put on `R`.
    Geometric { p: f64 },
    /// Relative weight of each resource, `R` entries.
    Weights { weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub resources: usize,
    /// Resources per week; empty means weeks of ten.
    pub week_sizes: Vec<usize>,
    pub learners: usize,
    pub dropout: DropoutDistribution,
    /// Multiplies the dropout weight of each week's last resource.
    pub week_bump: f64,
    pub p_skip: f64,
    pub p_peek: f64,
    pub p_revisit: f64,
    pub reorder_window: usize,
    pub seed: u64,
    pub start: i64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            resources: 40,
            week_sizes: Vec::new(),
            learners: 1000,
            dropout: DropoutDistribution::Geometric { p: 0.05 },
            week_bump: 1.0,
            p_skip: 0.0,
            p_peek: 0.0,
            p_revisit: 0.0,
            reorder_window: 0,
            seed: 0,
            start: DEFAULT_START,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Params(msg));
        if self.resources == 0 {
            return bad("resources must be positive".into());
        }
        for (name, p) in [("p_skip", self.p_skip), ("p_peek", self.p_peek), ("p_revisit", self.p_revisit)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.reorder_window >= self.resources {
            return bad("reorder_window must be smaller than resources".into());
        }
        if !self.week_sizes.is_empty() {
            if self.week_sizes.contains(&0) || self.week_sizes.iter().sum::<usize>() != self.resources {
                return bad("week_sizes must be positive and sum to resources".into());
            }
            if self.week_sizes.len() > u32::MAX as usize {
                return bad("too many weeks".into());
            }
        }
        if !self.week_bump.is_finite() || self.week_bump < 0.0 {
            return bad("week_bump must be finite and non-negative".into());
        }
        match &self.dropout {
            DropoutDistribution::Uniform => {}
            DropoutDistribution::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return bad(format!("geometric p must lie in (0, 1], got {p}"));
                }
            }
            DropoutDistribution::Weights { weights } => {
                if weights.len() != self.resources {
                    return bad(format!("{} dropout weights for {} resources", weights.len(), self.resources));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                    return bad("dropout weights must be non-negative with a positive sum".into());
                }
            }
        }
        let pmf = self.dropout_pmf();
        if pmf.iter().sum::<f64>() <= 0.0 {
            return bad("week_bump leaves no dropout mass".into());
        }
        Ok(())
    }

    /// Week of each resource, 1-based.
    pub fn weeks(&self) -> Vec<u32> {
        let sizes = if self.week_sizes.is_empty() {
            let mut sizes = vec![10; self.resources / 10];
            if !self.resources.is_multiple_of(10) {
                sizes.push(self.resources % 10);
            }
            sizes
        } else {
            self.week_sizes.clone()
        };
        sizes
            .iter()
            .enumerate()
            .flat_map(|(w, &n)| std::iter::repeat_n(w as u32 + 1, n))
            .collect()
    }

    pub fn curriculum(&self) -> Curriculum {
        let mut ids = Vec::with_capacity(self.resources);
        let mut prev = 0;
        let mut step = 0;
        for week in self.weeks() {
            step = if week == prev { step + 1 } else { 1 };
            prev = week;
            ids.push(ResourceId::new(week, step));
        }
        Curriculum::new(ids, None).expect("generated ids are increasing")
    }

    /// Probability of each intended dropout `1..=R` (index 0 is `d = 1`).
    pub fn dropout_pmf(&self) -> Vec<f64> {
        let r = self.resources;
        let mut pmf: Vec<f64> = match &self.dropout {
            DropoutDistribution::Uniform => vec![1.0; r],
            DropoutDistribution::Geometric { p } => {
                let mut v: Vec<f64> = (0..r).map(|k| (1.0 - p).powi(k as i32) * p).collect();
                v[r - 1] = (1.0 - p).powi(r as i32 - 1);
                v
            }
            DropoutDistribution::Weights { weights } => weights.clone(),
        };
        let weeks = self.weeks();
        for i in 0..r {
            if i + 1 == r || weeks[i] != weeks[i + 1] {
                pmf[i] *= self.week_bump;
            }
        }
        let total: f64 = pmf.iter().sum();
        if total > 0.0 {
            pmf.iter_mut().for_each(|w| *w /= total);
        }
        pmf
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerTruth {
    pub learner_id: String,
    pub dropout: usize,
    pub skipped: Vec<usize>,
    pub peeked: Vec<usize>,
    pub revisited: Vec<usize>,
    /// Done resources in visit order.
    pub order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: GeneratorParams,
    pub learners: Vec<LearnerTruth>,
}

pub fn learner_id(index: usize) -> String {
    format!("learner{index:06}")
}

fn generate_learner(
    params: &GeneratorParams,
    curriculum: &Curriculum,
    pmf: &WeightedIndex<f64>,
    index: usize,
) -> (LearnerTruth, Vec<StepActivityRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);

    let dropout = pmf.sample(&mut rng) + 1;
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    let mut peeked = Vec::new();
    for r in 1..=params.resources {
        if r < dropout {
            if rng.gen_bool(params.p_skip) {
                skipped.push(r);
            } else {
                done.push(r);
            }
        } else if r == dropout {
            done.push(r);
        } else if rng.gen_bool(params.p_peek) {
            peeked.push(r);
            done.push(r);
        }
    }

    let mut keyed: Vec<(usize, usize, usize)> = done
        .iter()
        .enumerate()
        .map(|(pos, &r)| {
            let jitter = if params.reorder_window > 0 {
                rng.gen_range(0..=params.reorder_window)
            } else {
                0
            };
            (pos + jitter, pos, r)
        })
        .collect();
    keyed.sort_unstable();
    let order: Vec<usize> = keyed.into_iter().map(|(_, _, r)| r).collect();

    let id = learner_id(index);
    let base = params.start + index as i64 * 60;
    let mut revisited = Vec::new();
    let mut records = Vec::with_capacity(order.len());
    for (slot, &r) in order.iter().enumerate() {
        let first = base + slot as i64 * SLOT_SECONDS;
        let completion = if rng.gen_bool(params.p_revisit) {
            revisited.push(r);
            first + REVISIT_SPAN * SLOT_SECONDS + 60
        } else {
            first + VISIT_SECONDS
        };
        records.push(StepActivityRecord {
            learner_id: id.clone(),
            resource: curriculum.resource(r),
            first_visited_at: first,
            last_completed_at: Some(completion),
        });
    }
    revisited.sort_unstable();
    (
        LearnerTruth {
            learner_id: id,
            dropout,
            skipped,
            peeked,
            revisited,
            order,
        },
        records,
    )
}

/// Generates a log and its ground truth. Identical params give identical
/// output; each learner draws from its own `(seed, index)` stream.
pub fn generate_cohort(params: &GeneratorParams) -> Result<(EventLog, GroundTruth)> {
    params.validate()?;
    let pmf = WeightedIndex::new(params.dropout_pmf()).map_err(|e| Error::Params(e.to_string()))?;
    let curriculum = params.curriculum();
    let mut records = Vec::new();
    let mut learners = Vec::with_capacity(params.learners);
    for i in 0..params.learners {
        let (truth, recs) = generate_learner(params, &curriculum, &pmf, i);
        learners.push(truth);
        records.extend(recs);
    }
    Ok((
        EventLog::from_records(records),
        GroundTruth {
            params: params.clone(),
            learners,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleTolerances {
    pub skip: f64,
    /// Resources with fewer active learners are not checked for skip.
    pub min_active: usize,
    pub peek: f64,
}

impl Default for OracleTolerances {
    fn default() -> Self {
        OracleTolerances {
            skip: 0.04,
            min_active: 200,
            peek: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Compares recovered features against the generator's ground truth.
///
/// * `skip`: every resource with enough active learners is within
///   tolerance of `p_skip`.
/// * `peek`: the mean peek over resources is within tolerance of the
///   generated peek rate.
/// * `dropout` (only without peeks and reordering): the recovered dropout
///   never exceeds the intended one, and equals it unless the learner has
///   a run of skips long enough to satisfy the dropout property before
///   `d`, i.e. at least `⌈1/fraction⌉ − 1` consecutive skips.
pub fn oracle_check(
    table: &FeatureTable,
    learners: &[LearnerFeatures],
    truth: &GroundTruth,
    fraction: Fraction,
    tol: &OracleTolerances,
) -> Vec<OracleCheck> {
    let params = &truth.params;
    let mut checks = Vec::new();

    let off: Vec<String> = table
        .rows
        .iter()
        .filter(|row| row.active >= tol.min_active)
        .filter_map(|row| {
            let skip = row.skip?;
            ((skip - params.p_skip).abs() > tol.skip).then(|| format!("{}: {skip:.4}", row.resource))
        })
        .collect();
    let checked = table.rows.iter().filter(|r| r.active >= tol.min_active).count();
    checks.push(OracleCheck {
        name: "skip",
        passed: off.is_empty(),
        detail: format!("{checked} resources checked, {} outside ±{}: {}", off.len(), tol.skip, off.join(", ")),
    });

    let n = truth.learners.len().max(1) as f64;
    let r = table.rows.len().max(1) as f64;
    let truth_peek = truth.learners.iter().map(|l| l.peeked.len()).sum::<usize>() as f64 / n / r;
    let peek_sum: f64 = table.rows.iter().filter_map(|row| row.peek).sum();
    let mean_peek = peek_sum / r;
    checks.push(OracleCheck {
        name: "peek",
        passed: (mean_peek - truth_peek).abs() <= tol.peek,
        detail: format!("mean peek {mean_peek:.5} vs ground truth {truth_peek:.5}"),
    });

    if params.p_peek == 0.0 && params.reorder_window == 0 {
        let min_run = fraction.denom().div_ceil(fraction.numer()).saturating_sub(1) as usize;
        let recovered: HashMap<&str, usize> = learners.iter().map(|l| (l.learner_id.as_str(), l.dropout)).collect();
        let mut exceed = 0;
        let mut unequal = 0;
        let mut missing = 0;
        for l in &truth.learners {
            let Some(&got) = recovered.get(l.learner_id.as_str()) else {
                missing += 1;
                continue;
            };
            if got > l.dropout {
                exceed += 1;
            }
            if got != l.dropout && longest_run(&l.skipped) < min_run {
                unequal += 1;
            }
        }
        checks.push(OracleCheck {
            name: "dropout",
            passed: exceed == 0 && unequal == 0 && missing == 0,
            detail: format!(
                "{} learners: {exceed} past intended, {unequal} differing without a skip run of {min_run}, {missing} missing",
                truth.learners.len()
            ),
        });
    }
    checks
}

/// Longest run of consecutive indices in an ascending list.
fn longest_run(sorted: &[usize]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &v in sorted {
        run = if prev.is_some_and(|p| p + 1 == v) { run + 1 } else { 1 };
        best = best.max(run);
        prev = Some(v);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GeneratorParams {
        GeneratorParams {
            resources: 12,
            learners: 50,
            seed,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn degenerate_params_do_prefix() {
        let (log, truth) = generate_cohort(&small(3)).unwrap();
        for l in &truth.learners {
            assert_eq!(l.order, (1..=l.dropout).collect::<Vec<_>>());
            assert_eq!(log.learner(&l.learner_id).unwrap().len(), l.dropout);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let bytes = |p: &GeneratorParams| {
            let (log, _) = generate_cohort(p).unwrap();
            let mut buf = Vec::new();
            log.write_csv(&mut buf).unwrap();
            buf
        };
        let p = GeneratorParams {
            p_skip: 0.2,
            p_peek: 0.1,
            reorder_window: 3,
            p_revisit: 0.1,
            ..small(9)
        };
        assert_eq!(bytes(&p), bytes(&p));
        assert_ne!(bytes(&p), bytes(&GeneratorParams { seed: 10, ..p.clone() }));
    }

    #[test]
    fn weeks_default_to_tens() {
        let p = GeneratorParams { resources: 23, ..small(0) };
        let weeks = p.weeks();
        assert_eq!(weeks.len(), 23);
        assert_eq!((weeks[9], weeks[10], weeks[22]), (1, 2, 3));
        let c = p.curriculum();
        assert_eq!(c.resource(11).to_string(), "2.1");
    }

    #[test]
    fn pmf_normalizes_and_bumps() {
        let p = GeneratorParams {
            resources: 4,
            week_sizes: vec![2, 2],
            dropout: DropoutDistribution::Uniform,
            week_bump: 3.0,
            ..small(0)
        };
        let pmf = p.dropout_pmf();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((pmf[1] - 3.0 / 8.0).abs() < 1e-12);
        assert!((pmf[0] - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_params() {
        let base = small(0);
        for p in [
            GeneratorParams { resources: 0, ..base.clone() },
            GeneratorParams { p_skip: 1.5, ..base.clone() },
            GeneratorParams { reorder_window: 12, ..base.clone() },
            GeneratorParams { week_sizes: vec![5, 5], ..base.clone() },
            GeneratorParams { dropout: DropoutDistribution::Geometric { p: 0.0 }, ..base.clone() },
            GeneratorParams { dropout: DropoutDistribution::Weights { weights: vec![1.0] }, ..base.clone() },
        ] {
            assert!(generate_cohort(&p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn params_from_json_with_defaults() {
        let p: GeneratorParams =
            serde_json::from_str(r#"{"resources": 6, "dropout": {"kind": "uniform"}, "p_skip": 0.1}"#).unwrap();
        assert_eq!(p.resources, 6);
        assert_eq!(p.learners, 1000);
        assert_eq!(p.dropout, DropoutDistribution::Uniform);
    }

    #[test]
    fn runs() {
        assert_eq!(longest_run(&[]), 0);
        assert_eq!(longest_run(&[3]), 1);
        assert_eq!(longest_run(&[1, 2, 4, 5, 6, 9]), 3);
    }
}
