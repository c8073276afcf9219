//! Per-learner traces after the done-threshold preprocessing.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Curriculum, EventLog, StepActivityRecord};

/// An exact non-negative rational, used for the dropout fraction so that
/// `done ≤ fraction · width` is decided without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    /// `count ≤ self · width`, exactly.
    pub fn admits(&self, count: usize, width: usize) -> bool {
        (count as u128) * (self.den as u128) <= (width as u128) * (self.num as u128)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Accepts `a/b` or a finite decimal such as `0.25`. Decimals are taken at
/// face value: `0.3333` is 3333/10000, not one third.
impl FromStr for Fraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid fraction {s:?}");
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if let Some((n, d)) = s.split_once('/') {
            let (n, d) = (n.trim(), d.trim());
            if !digits(n) || !digits(d) {
                return Err(bad());
            }
            let num: u64 = n.parse().map_err(|_| bad())?;
            let den: u64 = d.parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Fraction::new(num, den));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if !(digits(int) || (int.is_empty() && digits(frac))) || (!frac.is_empty() && !digits(frac)) {
            return Err(bad());
        }
        if frac.len() > 18 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_v))
            .ok_or_else(bad)?;
        Ok(Fraction::new(num, den))
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Tunable thresholds. Defaults: one minute to count as done, one third
/// for the dropout fraction, three for coming back, two for early/late.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisConfig {
    pub min_done_seconds: i64,
    pub dropout_fraction: Fraction,
    pub back_threshold: usize,
    pub order_k: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            min_done_seconds: 60,
            dropout_fraction: Fraction::new(1, 3),
            back_threshold: 3,
            order_k: 2,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_done_seconds <= 0 {
            return Err(Error::Config("min_done_seconds must be positive".into()));
        }
        let f = self.dropout_fraction;
        if f.numer() == 0 || f.numer() >= f.denom() {
            return Err(Error::Config(format!(
                "dropout_fraction must lie strictly between 0 and 1, got {f}"
            )));
        }
        if self.order_k == 0 {
            return Err(Error::Config("order_k must be positive".into()));
        }
        Ok(())
    }

    /// Sets one parameter by name, as used in `key=value` config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let invalid = |e: &dyn fmt::Display| Error::Config(format!("{key}: {e}"));
        match key {
            "min_done_seconds" => self.min_done_seconds = value.parse().map_err(|e| invalid(&e))?,
            "dropout_fraction" => self.dropout_fraction = value.parse().map_err(|e| invalid(&e))?,
            "back_threshold" => self.back_threshold = value.parse().map_err(|e| invalid(&e))?,
            "order_k" => self.order_k = value.parse().map_err(|e| invalid(&e))?,
            _ => return Err(Error::Config(format!("unknown parameter {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// One visited resource within a learner trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Visit {
    /// 1-based curriculum index.
    pub index: usize,
    pub first_visit: i64,
    pub completion: Option<i64>,
    pub done: bool,
}

impl Visit {
    pub fn duration(&self) -> i64 {
        self.completion.map_or(0, |c| c - self.first_visit)
    }
}

/// A learner's visits in `(first_visit, index)` order together with the set
/// of resources they have done.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnerTrace {
    pub learner_id: String,
    resource_count: usize,
    visits: Vec<Visit>,
    done: Vec<usize>,
}

impl LearnerTrace {
    /// Builds a trace from `(index, first_visit, completion)` triples.
    ///
    /// Panics if an index repeats or falls outside `1..=resource_count`.
    pub fn from_visits(
        learner_id: impl Into<String>,
        resource_count: usize,
        visits: impl IntoIterator<Item = (usize, i64, Option<i64>)>,
        min_done_seconds: i64,
    ) -> Self {
        let mut visits: Vec<Visit> = visits
            .into_iter()
            .map(|(index, first_visit, completion)| {
                assert!((1..=resource_count).contains(&index), "index {index} out of range");
                let mut v = Visit {
                    index,
                    first_visit,
                    completion,
                    done: false,
                };
                v.done = v.duration() > min_done_seconds;
                v
            })
            .collect();
        visits.sort_unstable_by_key(|v| (v.first_visit, v.index));
        let mut done: Vec<usize> = visits.iter().filter(|v| v.done).map(|v| v.index).collect();
        done.sort_unstable();
        let mut seen: Vec<usize> = visits.iter().map(|v| v.index).collect();
        seen.sort_unstable();
        assert!(seen.windows(2).all(|w| w[0] != w[1]), "resource visited twice");
        LearnerTrace {
            learner_id: learner_id.into(),
            resource_count,
            visits,
            done,
        }
    }

    /// A trace in which every listed resource is done, visited one minute
    /// apart in the given order. Handy for order-only reasoning.
    pub fn from_done_order(learner_id: impl Into<String>, resource_count: usize, order: &[usize]) -> Self {
        LearnerTrace::from_visits(
            learner_id,
            resource_count,
            order
                .iter()
                .enumerate()
                .map(|(slot, &index)| (index, slot as i64 * 600, Some(slot as i64 * 600 + 120))),
            60,
        )
    }

    /// `R`, the curriculum length this trace was built against.
    pub fn resource_count(&self) -> usize {
        self.resource_count
    }

    pub fn visits(&self) -> &[Visit] {
        &self.visits
    }

    /// Done curriculum indices, ascending.
    pub fn done(&self) -> &[usize] {
        &self.done
    }

    pub fn is_done(&self, index: usize) -> bool {
        self.done.binary_search(&index).is_ok()
    }

    /// Done visits in visit order.
    pub fn done_visits(&self) -> impl Iterator<Item = &Visit> + '_ {
        self.visits.iter().filter(|v| v.done)
    }

    /// Curriculum indices of done resources in visit order.
    pub fn done_sequence(&self) -> Vec<usize> {
        self.done_visits().map(|v| v.index).collect()
    }

    pub fn visit(&self, index: usize) -> Option<&Visit> {
        self.visits.iter().find(|v| v.index == index)
    }

    /// The same trace with every timestamp moved by `offset` seconds.
    pub fn shifted(&self, offset: i64) -> Self {
        let mut out = self.clone();
        for v in &mut out.visits {
            v.first_visit += offset;
            v.completion = v.completion.map(|c| c + offset);
        }
        out
    }
}

/// The retained learners, each with at least one done resource.
#[derive(Clone, Debug)]
pub struct Cohort {
    pub traces: Vec<LearnerTrace>,
    pub curriculum: Curriculum,
    pub config: AnalysisConfig,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn resource_count(&self) -> usize {
        self.curriculum.len()
    }
}

fn trace_for(
    learner_id: &str,
    records: &[StepActivityRecord],
    curriculum: &Curriculum,
    min_done_seconds: i64,
) -> Result<LearnerTrace> {
    let visits = records
        .iter()
        .map(|rec| {
            let index = curriculum
                .index_of(rec.resource)
                .ok_or(Error::UnknownResource(rec.resource))?;
            Ok((index, rec.first_visited_at, rec.last_completed_at))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LearnerTrace::from_visits(
        learner_id,
        curriculum.len(),
        visits,
        min_done_seconds,
    ))
}

/// Builds one trace per learner and drops learners with nothing done.
///
/// A visit counts as done when `completion - first_visit` is strictly
/// greater than `min_done_seconds`; a visit without completion lasts zero
/// seconds. Traces come out in learner-id order.
pub fn build_cohort(log: &EventLog, curriculum: &Curriculum, config: &AnalysisConfig) -> Result<Cohort> {
    config.validate()?;
    let learners: Vec<(&str, &[StepActivityRecord])> = log.learners().collect();
    let traces = learners
        .par_iter()
        .map(|(id, recs)| trace_for(id, recs, curriculum, config.min_done_seconds))
        .filter(|t| t.as_ref().map_or(true, |t| !t.done().is_empty()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Cohort {
        traces,
        curriculum: curriculum.clone(),
        config: config.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohortStats {
    pub learners: usize,
    pub resources: usize,
    /// Done (learner, resource) pairs over `learners × resources`.
    pub done_density: f64,
    pub empty: bool,
}

pub fn cohort_stats(cohort: &Cohort) -> CohortStats {
    let learners = cohort.len();
    let resources = cohort.resource_count();
    let done: usize = cohort.traces.iter().map(|t| t.done().len()).sum();
    let done_density = if learners == 0 {
        0.0
    } else {
        done as f64 / (learners * resources) as f64
    };
    CohortStats {
        learners,
        resources,
        done_density,
        empty: learners == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{derive_curriculum, parse_step_activity};

    const TABLE_ONE: &str = "\
learner_id,resource,first_visited_at,last_completed_at
learner1,1.1,2016-07-11 00:02:28 UTC,2016-07-11 00:12:54 UTC
learner2,1.1,2016-07-11 00:20:30 UTC,2016-07-11 00:22:55 UTC
learner3,1.1,2016-07-11 00:34:18 UTC,2016-07-11 00:35:46 UTC
learner1,1.2,2016-07-11 00:38:20 UTC,2016-07-11 00:40:24 UTC
";

    fn cohort_from(csv: &str) -> Cohort {
        let (log, errors) = parse_step_activity(csv.as_bytes()).unwrap();
        assert!(errors.is_empty());
        let curriculum = derive_curriculum(&log).unwrap();
        build_cohort(&log, &curriculum, &AnalysisConfig::default()).unwrap()
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!("1/3".parse::<Fraction>().unwrap(), Fraction::new(1, 3));
        assert_eq!("2/6".parse::<Fraction>().unwrap(), Fraction::new(1, 3));
        assert_eq!("0.25".parse::<Fraction>().unwrap(), Fraction::new(1, 4));
        assert_eq!(".5".parse::<Fraction>().unwrap(), Fraction::new(1, 2));
        assert_eq!("0.3333".parse::<Fraction>().unwrap(), Fraction::new(3333, 10000));
        for bad in ["", "1/0", "x", "0.3.3", "-0.2", "1/-3", "."] {
            assert!(bad.parse::<Fraction>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn fraction_admits_is_exact() {
        let third = Fraction::new(1, 3);
        assert!(third.admits(1, 3));
        assert!(!third.admits(1, 2));
        assert!(third.admits(2, 6));
        assert!(!"0.3333".parse::<Fraction>().unwrap().admits(1, 3));
    }

    #[test]
    fn config_validation() {
        let base = AnalysisConfig::default();
        base.validate().unwrap();
        let bad = [
            AnalysisConfig { dropout_fraction: Fraction::new(1, 1), ..base.clone() },
            AnalysisConfig { order_k: 0, ..base.clone() },
            AnalysisConfig { min_done_seconds: 0, ..base.clone() },
        ];
        assert!(bad.iter().all(|c| c.validate().is_err()));
        AnalysisConfig { back_threshold: 0, ..base }.validate().unwrap();
    }

    #[test]
    fn config_file() {
        let mut c = AnalysisConfig::default();
        c.apply_config_text("# course tuning\nmin_done_seconds = 30\ndropout_fraction=1/4\n\norder_k=3\n")
            .unwrap();
        assert_eq!(c.min_done_seconds, 30);
        assert_eq!(c.dropout_fraction, Fraction::new(1, 4));
        assert_eq!(c.order_k, 3);
        assert_eq!(c.back_threshold, 3);
        assert!(c.apply_config_text("speed=3").is_err());
        assert!(c.apply_config_text("order_k").is_err());
    }

    #[test]
    fn table_one_retains_all_three() {
        let cohort = cohort_from(TABLE_ONE);
        assert_eq!(cohort.len(), 3);
        assert_eq!(cohort.traces[0].learner_id, "learner1");
        assert_eq!(cohort.traces[0].done(), &[1, 2]);
        let stats = cohort_stats(&cohort);
        assert_eq!(stats.resources, 2);
        assert!(!stats.empty);
    }

    #[test]
    fn exactly_sixty_seconds_is_not_done() {
        let cohort = cohort_from(
            "learner_id,resource,first_visited_at,last_completed_at\n\
             a,1.1,2016-07-11 00:00:00 UTC,2016-07-11 00:01:00 UTC\n\
             b,1.1,2016-07-11 00:00:00 UTC,2016-07-11 00:00:59 UTC\n\
             b,1.2,2016-07-11 00:02:00 UTC,2016-07-11 00:03:01 UTC\n",
        );
        assert_eq!(cohort.len(), 1);
        let b = &cohort.traces[0];
        assert_eq!(b.learner_id, "b");
        assert_eq!(b.done(), &[2]);
        assert_eq!(b.visits().len(), 2, "sub-threshold visits are kept");
    }

    #[test]
    fn visit_ties_break_on_index() {
        let t = LearnerTrace::from_visits("x", 5, [(4, 10, Some(100)), (2, 10, Some(100)), (3, 5, None)], 60);
        let order: Vec<usize> = t.visits().iter().map(|v| v.index).collect();
        assert_eq!(order, vec![3, 2, 4]);
        assert_eq!(t.done_sequence(), vec![2, 4]);
    }

    #[test]
    fn stats_examples() {
        let c = Curriculum::new(
            ["1.1", "1.2", "1.3"].iter().map(|s| s.parse().unwrap()).collect(),
            None,
        )
        .unwrap();
        let cohort = Cohort {
            traces: vec![LearnerTrace::from_done_order("a", 3, &[1, 2])],
            curriculum: c.clone(),
            config: AnalysisConfig::default(),
        };
        let s = cohort_stats(&cohort);
        assert_eq!((s.learners, s.resources), (1, 3));
        assert!((s.done_density - 2.0 / 3.0).abs() < 1e-12);

        let empty = Cohort {
            traces: vec![],
            curriculum: c,
            config: AnalysisConfig::default(),
        };
        let s = cohort_stats(&empty);
        assert_eq!(s.learners, 0);
        assert!(s.empty);
    }

    #[test]
    fn unknown_resource_propagates() {
        let (log, _) = parse_step_activity(TABLE_ONE.as_bytes()).unwrap();
        let c = Curriculum::new(vec!["1.1".parse().unwrap()], None).unwrap();
        assert!(matches!(
            build_cohort(&log, &c, &AnalysisConfig::default()),
            Err(Error::UnknownResource(_))
        ));
    }
}
