//! Nondominated archive and its JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Algorithm, RunConfig, Space};
use crate::error::{Error, Result};
use crate::metrics::{dominates, Point};
use crate::plan::{BudgetAllocation, PurchasePlan};
use crate::subproblem::SubproblemSolution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveEntry {
    /// Effects of `plan` under the arrival simulation; the archive ranks
    /// entries by these.
    pub objectives: Point,
    /// Objectives the search optimized: the same as `objectives` in the
    /// original space, summed subproblem effects in the transformed one.
    pub search_objectives: Point,
    pub genome: Vec<f64>,
    pub plan: PurchasePlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<BudgetAllocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solutions: Option<Vec<SubproblemSolution>>,
}

/// Mutually nondominated feasible entries without repeated objectives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    pub fn search_points(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.search_objectives).collect()
    }

    /// Whether a point with these objectives would be added.
    pub fn accepts(&self, p: Point) -> bool {
        !self.entries.iter().any(|e| e.objectives == p || dominates(e.objectives, p))
    }

    /// Adds `entry` unless an existing entry dominates it or has the same
    /// objectives; drops entries it dominates. Returns whether it was added.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        let p = entry.objectives;
        if !self.accepts(p) {
            return false;
        }
        self.entries.retain(|e| !dominates(p, e.objectives));
        self.entries.push(entry);
        true
    }

    /// Sorts by epidemic effect ascending, treatment effect descending.
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            a.objectives.0.total_cmp(&b.objectives.0).then(b.objectives.1.total_cmp(&a.objectives.1))
        });
    }

    pub fn is_mutually_nondominated(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || (a.objectives != b.objectives && !dominates(b.objectives, a.objectives)))
        })
    }
}

/// An archive with the settings that produced it. Wall time and thread
/// count are left out so repeated runs produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveFile {
    pub algorithm: Algorithm,
    pub space: Space,
    pub seed: u64,
    pub evaluations: u64,
    pub generations: u64,
    pub config: RunConfig,
    pub entries: ParetoArchive,
}

impl ArchiveFile {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(json: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse {
            location: format!("{origin}:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&json, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(a: f64, b: f64) -> ArchiveEntry {
        ArchiveEntry {
            objectives: (a, b),
            search_objectives: (a, b),
            genome: vec![a, b],
            plan: PurchasePlan(vec![1, 2]),
            allocation: None,
            solutions: None,
        }
    }

    #[test]
    fn keeps_only_nondominated() {
        let mut archive = ParetoArchive::new();
        assert!(archive.insert(entry(1.0, 1.0)));
        assert!(archive.insert(entry(2.0, 0.5)));
        assert!(!archive.insert(entry(0.5, 0.5)));
        assert!(!archive.insert(entry(1.0, 1.0)));
        assert!(archive.insert(entry(1.5, 1.5)));
        archive.sort();
        assert_eq!(archive.points(), vec![(1.5, 1.5), (2.0, 0.5)]);
        assert!(archive.is_mutually_nondominated());
    }

    #[test]
    fn file_round_trip() {
        let mut entries = ParetoArchive::new();
        entries.insert(entry(0.5, 2.4));
        let file = ArchiveFile {
            algorithm: Algorithm::Nsga2,
            space: Space::Original,
            seed: 3,
            evaluations: 10,
            generations: 1,
            config: RunConfig::default(),
            entries,
        };
        let json = file.to_json_string();
        assert!(!json.contains("threads"));
        assert_eq!(ArchiveFile::from_json_str(&json, "mem").unwrap(), file);
        let err = ArchiveFile::from_json_str("{\"algorithm\": 1}", "a.json").unwrap_err();
        assert!(err.to_string().contains("a.json:1:"), "{err}");
    }
}
