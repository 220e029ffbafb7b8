use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::columns::ColumnSet;
use crate::error::{Error, Result};

/// Ordered, disjoint groups of model columns. Each group is one Shapley
/// player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct PlayerPartition {
    players: Vec<Vec<usize>>,
    labels: Vec<String>,
}

#[derive(Deserialize)]
struct RawPartition {
    players: Vec<Vec<usize>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawPartition> for PlayerPartition {
    type Error = Error;
    fn try_from(raw: RawPartition) -> Result<Self> {
        let labels = raw
            .labels
            .unwrap_or_else(|| (0..raw.players.len()).map(|i| format!("player{i}")).collect());
        PlayerPartition::new(raw.players, labels)
    }
}

impl PlayerPartition {
    pub fn new(players: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        if players.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} player groups but {} labels",
                players.len(),
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, g) in players.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Config(format!("player '{}' has no columns", labels[i])));
            }
            for &c in g {
                if !seen.insert(c) {
                    return Err(Error::Config(format!("column {c} belongs to two players")));
                }
            }
        }
        Ok(Self { players, labels })
    }

    /// One player per column.
    pub fn singletons(labels: Vec<String>) -> Self {
        Self {
            players: (0..labels.len()).map(|i| vec![i]).collect(),
            labels,
        }
    }

    /// Merges `groups` into a partition over `names.len()` columns: every
    /// column outside the groups and outside `skip` becomes its own player.
    /// Players are ordered by their smallest column.
    pub fn with_groups(names: &[String], groups: &PlayerPartition, skip: &[usize]) -> Result<Self> {
        let mut covered = vec![false; names.len()];
        for &c in groups.players.iter().flatten().chain(skip) {
            if c >= names.len() {
                return Err(Error::Dimension {
                    expected: names.len(),
                    got: c + 1,
                });
            }
            covered[c] = true;
        }
        let mut entries: Vec<(usize, Vec<usize>, String)> = groups
            .players
            .iter()
            .zip(&groups.labels)
            .map(|(g, l)| (*g.iter().min().unwrap(), g.clone(), l.clone()))
            .collect();
        for (c, name) in names.iter().enumerate() {
            if !covered[c] {
                entries.push((c, vec![c], name.clone()));
            }
        }
        entries.sort_by_key(|e| e.0);
        let (players, labels) = entries.into_iter().map(|(_, g, l)| (g, l)).unzip();
        Self::new(players, labels)
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Vec<usize>] {
        &self.players
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn group(&self, player: usize) -> &[usize] {
        &self.players[player]
    }

    pub fn max_column(&self) -> Option<usize> {
        self.players.iter().flatten().copied().max()
    }

    /// Checks every column index is below `n_columns`.
    pub fn check_columns(&self, n_columns: usize) -> Result<()> {
        match self.max_column() {
            Some(m) if m >= n_columns => Err(Error::Config(format!(
                "partition references column {m} but the model has {n_columns} columns"
            ))),
            _ => Ok(()),
        }
    }

    /// Player owning each column, if any.
    pub fn player_of_column(&self, n_columns: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n_columns];
        for (p, g) in self.players.iter().enumerate() {
            for &c in g {
                if c < n_columns {
                    owner[c] = Some(p);
                }
            }
        }
        owner
    }

    /// Union of the columns of the players whose bit is set in `mask`.
    pub fn columns_of_mask(&self, mask: u64, n_columns: usize) -> ColumnSet {
        let mut set = ColumnSet::empty(n_columns);
        for (p, g) in self.players.iter().enumerate() {
            if mask >> p & 1 == 1 {
                for &c in g {
                    set.insert(c);
                }
            }
        }
        set
    }

    pub fn columns_of(&self, players: &[usize], n_columns: usize) -> ColumnSet {
        let mut set = ColumnSet::empty(n_columns);
        for &p in players {
            for &c in &self.players[p] {
                set.insert(c);
            }
        }
        set
    }

    pub fn player_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Error::Config(format!("player partition: {e}")),
            _ => Error::Parse {
                path: "partition".into(),
                message: e.to_string(),
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("partition serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
