use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{EventLog, ResourceId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceType {
    Video,
    Article,
    Discussion,
    Quiz,
    Assessment,
    #[default]
    Unknown,
}

impl FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "video" => ResourceType::Video,
            "article" => ResourceType::Article,
            "discussion" => ResourceType::Discussion,
            "quiz" => ResourceType::Quiz,
            "assessment" => ResourceType::Assessment,
            "" => ResourceType::Unknown,
            other => return Err(format!("unknown resource type {other:?}")),
        })
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResourceType::Video => "video",
            ResourceType::Article => "article",
            ResourceType::Discussion => "discussion",
            ResourceType::Quiz => "quiz",
            ResourceType::Assessment => "assessment",
            ResourceType::Unknown => "",
        })
    }
}

/// The designer-intended order of resources.
///
/// Curriculum indices are 1-based: the first resource has index 1 and the
/// last has index `len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curriculum {
    resources: Vec<ResourceId>,
    types: Vec<ResourceType>,
    positions: HashMap<ResourceId, usize>,
}

impl Curriculum {
    /// Builds a curriculum from resources in strictly increasing order.
    pub fn new(resources: Vec<ResourceId>, types: Option<Vec<ResourceType>>) -> Result<Self> {
        if resources.is_empty() {
            return Err(Error::Curriculum {
                line: 0,
                reason: "curriculum has no resources".into(),
            });
        }
        if let Some(pair) = resources.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Curriculum {
                line: 0,
                reason: format!("{} listed after {}", pair[1], pair[0]),
            });
        }
        let types = types.unwrap_or_else(|| vec![ResourceType::Unknown; resources.len()]);
        assert_eq!(types.len(), resources.len(), "one type per resource");
        let positions = resources
            .iter()
            .enumerate()
            .map(|(i, r)| (*r, i + 1))
            .collect();
        Ok(Curriculum {
            resources,
            types,
            positions,
        })
    }

    /// Parses a `resource,type` sidecar. A leading `resource,...` header
    /// line is optional; the type column may be blank or absent.
    pub fn from_sidecar<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut resources = Vec::new();
        let mut types = Vec::new();
        for (n, row) in reader.records().enumerate() {
            let row = row?;
            let line = row.position().map_or(n as u64 + 1, |p| p.line());
            let first = row.get(0).unwrap_or("");
            if n == 0 && first == "resource" {
                continue;
            }
            if first.is_empty() && row.len() <= 1 {
                continue;
            }
            let id: ResourceId = first.parse().map_err(|e: super::ParseResourceError| {
                Error::Curriculum {
                    line,
                    reason: e.to_string(),
                }
            })?;
            if let Some(prev) = resources.last() {
                if *prev >= id {
                    return Err(Error::Curriculum {
                        line,
                        reason: format!("{id} is out of (week, step) order after {prev}"),
                    });
                }
            }
            let kind = row
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|reason| Error::Curriculum { line, reason })?;
            resources.push(id);
            types.push(kind);
        }
        Curriculum::new(resources, Some(types))
    }

    /// Number of resources.
    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn resources(&self) -> &[ResourceId] {
        &self.resources
    }

    /// Resource at a 1-based curriculum index.
    pub fn resource(&self, index: usize) -> ResourceId {
        self.resources[index - 1]
    }

    pub fn resource_type(&self, index: usize) -> ResourceType {
        self.types[index - 1]
    }

    /// 1-based curriculum index of a resource.
    pub fn index_of(&self, id: ResourceId) -> Option<usize> {
        self.positions.get(&id).copied()
    }

    pub fn weeks(&self) -> Vec<u32> {
        self.resources.iter().map(|r| r.week).collect()
    }

    /// Fails with the first (lowest) log resource the curriculum lacks.
    pub fn check_covers(&self, log: &EventLog) -> Result<()> {
        let missing = log
            .records()
            .iter()
            .map(|r| r.resource)
            .filter(|r| !self.positions.contains_key(r))
            .min();
        match missing {
            Some(r) => Err(Error::UnknownResource(r)),
            None => Ok(()),
        }
    }
}

/// Curriculum made of every resource observed in the log, in (week, step) order.
pub fn derive_curriculum(log: &EventLog) -> Result<Curriculum> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut ids: Vec<ResourceId> = log.records().iter().map(|r| r.resource).collect();
    ids.sort_unstable();
    ids.dedup();
    Curriculum::new(ids, None)
}

/// Reads a sidecar curriculum and checks that it covers every log resource.
pub fn load_curriculum(path: &Path, log: &EventLog) -> Result<Curriculum> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let curriculum = Curriculum::from_sidecar(std::io::BufReader::new(file))?;
    curriculum.check_covers(log)?;
    Ok(curriculum)
}
