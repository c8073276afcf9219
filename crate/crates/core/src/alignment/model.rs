use std::fmt;

use crate::ingest::Curriculum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// The visible transition of a 1-based curriculum index.
    Resource(usize),
    /// Shortcut from the place after resource `j` to the end place.
    Drop(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Resource(r) => write!(f, "{r}"),
            Label::Drop(j) => write!(f, "drop-{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub label: Label,
    pub input: usize,
    pub output: usize,
}

/// The curriculum as a sequential Petri net with a drop shortcut after
/// every resource.
///
/// Places are `0` (start), `1..=R` (the place after resource `r`) and
/// `R + 1` (end). Resource `r` moves the token from place `r - 1` to `r`;
/// `drop-j` moves it from place `j` to the end. The complete runs are
/// exactly `1 2 … j drop-j` for `1 ≤ j ≤ R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequentialDropModel {
    resources: usize,
    transitions: Vec<Transition>,
}

impl SequentialDropModel {
    pub fn new(resources: usize) -> Self {
        assert!(resources >= 1, "a model needs at least one resource");
        let end = resources + 1;
        let mut transitions: Vec<Transition> = (1..=resources)
            .map(|r| Transition {
                label: Label::Resource(r),
                input: r - 1,
                output: r,
            })
            .collect();
        transitions.extend((1..=resources).map(|j| Transition {
            label: Label::Drop(j),
            input: j,
            output: end,
        }));
        SequentialDropModel {
            resources,
            transitions,
        }
    }

    pub fn resource_count(&self) -> usize {
        self.resources
    }

    pub fn place_count(&self) -> usize {
        self.resources + 2
    }

    pub fn start_place(&self) -> usize {
        0
    }

    pub fn end_place(&self) -> usize {
        self.resources + 1
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn initial_marking(&self) -> Vec<u32> {
        let mut m = vec![0; self.place_count()];
        m[self.start_place()] = 1;
        m
    }

    fn is_final(&self, marking: &[u32]) -> bool {
        marking
            .iter()
            .enumerate()
            .all(|(p, &tokens)| tokens == u32::from(p == self.end_place()))
    }

    fn enabled<'a>(&'a self, marking: &'a [u32]) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(|t| marking[t.input] > 0)
    }

    /// Plays the token game; true iff every label fires in turn and the
    /// run ends with a single token in the end place.
    pub fn accepts(&self, run: &[Label]) -> bool {
        let mut marking = self.initial_marking();
        for label in run {
            let Some(t) = self.transitions.iter().find(|t| t.label == *label) else {
                return false;
            };
            if marking[t.input] == 0 {
                return false;
            }
            marking[t.input] -= 1;
            marking[t.output] += 1;
        }
        self.is_final(&marking)
    }

    /// Every complete run, found by exploring the reachability graph.
    pub fn complete_runs(&self) -> Vec<Vec<Label>> {
        fn explore(model: &SequentialDropModel, marking: &mut Vec<u32>, run: &mut Vec<Label>, out: &mut Vec<Vec<Label>>) {
            if model.is_final(marking) {
                out.push(run.clone());
                return;
            }
            let enabled: Vec<Transition> = model.enabled(marking).cloned().collect();
            for t in enabled {
                marking[t.input] -= 1;
                marking[t.output] += 1;
                run.push(t.label);
                explore(model, marking, run, out);
                run.pop();
                marking[t.output] -= 1;
                marking[t.input] += 1;
            }
        }
        let mut out = Vec::new();
        explore(self, &mut self.initial_marking(), &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

pub fn build_model(curriculum: &Curriculum) -> SequentialDropModel {
    SequentialDropModel::new(curriculum.len())
}
