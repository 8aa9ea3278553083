//! Strict total orders over argument ids.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::ArgumentId;

/// Arguments ordered strongest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    order: Vec<ArgumentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl Ranking {
    pub fn new(order: Vec<ArgumentId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for id in &order {
            if !seen.insert(id) {
                return Err(GraspError::DuplicateArgumentId(id.to_string()));
            }
        }
        Ok(Ranking { order, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn order(&self) -> &[ArgumentId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based position of every item.
    pub fn positions(&self) -> HashMap<&ArgumentId, usize> {
        self.order.iter().enumerate().map(|(i, id)| (id, i)).collect()
    }

    pub fn item_set(&self) -> BTreeSet<&ArgumentId> {
        self.order.iter().collect()
    }

    /// Applies an id relabeling to every item.
    pub fn relabel(&self, f: impl Fn(&ArgumentId) -> ArgumentId) -> Result<Self> {
        let mut r = Ranking::new(self.order.iter().map(f).collect())?;
        r.label = self.label.clone();
        Ok(r)
    }
}

/// Sorts by descending score, breaking ties by ascending id.
pub fn scores_to_ranking(scores: &[f64], arguments: &[ArgumentId]) -> Result<Ranking> {
    if scores.len() != arguments.len() {
        return Err(GraspError::DimensionMismatch { expected: arguments.len(), found: scores.len() });
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| arguments[a].cmp(&arguments[b])));
    Ranking::new(idx.into_iter().map(|i| arguments[i].clone()).collect())
}

/// 1-based rank of each argument in input order (1 = strongest).
pub fn rank_assignment(scores: &[f64], arguments: &[ArgumentId]) -> Result<Vec<usize>> {
    let ranking = scores_to_ranking(scores, arguments)?;
    let pos = ranking.positions();
    Ok(arguments.iter().map(|a| pos[a] + 1).collect())
}
