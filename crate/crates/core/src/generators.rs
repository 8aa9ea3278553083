//! Synthetic graphs: canonical motifs with their critical ranking
//! conditions, random DAG stress tests, and unstructured random graphs for
//! property checks. Every generator is a pure function of its arguments and
//! seed.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::{ArgumentId, DefenseMode, WeightedInteractionGraph};
use crate::matrix::Matrix;
use crate::sufficiency::ArgumentationStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motif {
    Chain,
    Fork,
    Diamond,
    Bipolar,
    RandomDag,
}

impl Motif {
    pub const ARCHETYPES: [Motif; 4] = [Motif::Chain, Motif::Fork, Motif::Diamond, Motif::Bipolar];

    pub fn as_str(self) -> &'static str {
        match self {
            Motif::Chain => "chain",
            Motif::Fork => "fork",
            Motif::Diamond => "diamond",
            Motif::Bipolar => "bipolar",
            Motif::RandomDag => "random_dag",
        }
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Motif {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        [Motif::Chain, Motif::Fork, Motif::Diamond, Motif::Bipolar, Motif::RandomDag]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| GraspError::InvalidConfig(format!("unknown motif `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    S1,
    S2,
    S3,
    S4,
}

/// Required relation `stronger ≻ weaker`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalRankingCondition {
    pub stronger: ArgumentId,
    pub weaker: ArgumentId,
    pub axiom: Axiom,
    pub motif: Motif,
}

pub const MIN_MOTIF_SIZE: usize = 3;
pub const MAX_MOTIF_SIZE: usize = 6;
pub const NOISE_WEIGHT_RANGE: (f64, f64) = (0.05, 0.15);
pub const DAG_WEIGHT_RANGE: (f64, f64) = (0.2, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub graph: WeightedInteractionGraph,
    pub crcs: Vec<CriticalRankingCondition>,
}

fn named(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Unit-weight core edges `(attacker, target)` over named nodes.
fn motif_core(kind: Motif, size: usize) -> (Vec<ArgumentId>, Vec<(usize, usize)>) {
    let names: Vec<String>;
    let mut edges = Vec::new();
    match kind {
        Motif::Chain => {
            // a_{k+1} attacks a_k
            names = named("a", size).collect();
            edges.extend((0..size - 1).map(|k| (k + 1, k)));
        }
        Motif::Fork => {
            names = std::iter::once("t".to_string()).chain(named("b", size - 1)).collect();
            edges.extend((1..size).map(|b| (b, 0)));
        }
        Motif::Diamond | Motif::Bipolar => {
            let k = size - 2;
            names = std::iter::once("a".to_string())
                .chain(named("b", k))
                .chain(std::iter::once("c".to_string()))
                .collect();
            let c = size - 1;
            edges.extend((1..=k).map(|b| (b, 0)));
            if kind == Motif::Diamond {
                edges.extend((1..=k).map(|b| (c, b)));
            } else {
                edges.push((c, 1));
            }
        }
        Motif::RandomDag => unreachable!("random DAGs have no fixed core"),
    }
    (names.iter().map(|s| ArgumentId::from(s.as_str())).collect(), edges)
}

/// CRCs implied by the sufficiency axioms on a motif's core structure.
///
/// * S2 (chain, diamond): for an attack `(b, a)` where `a` is sufficient and
///   `b` is not, `a ≻ b`.
/// * S1 (fork, bipolar): an unattacked attacker `b` of `a` gives `b ≻ a`.
/// * S4 (all): every unattacked argument outranks every attacked,
///   insufficient one.
///
/// Pairs already produced by an earlier rule are not repeated.
pub fn derive_crcs(structure: &ArgumentationStructure, kind: Motif) -> Vec<CriticalRankingCondition> {
    let ss = |a: &ArgumentId| structure.is_structurally_sufficient(a).unwrap_or(false);
    let mut out: Vec<CriticalRankingCondition> = Vec::new();
    let mut push = |stronger: &ArgumentId, weaker: &ArgumentId, axiom| {
        if !out.iter().any(|c| &c.stronger == stronger && &c.weaker == weaker) {
            out.push(CriticalRankingCondition {
                stronger: stronger.clone(),
                weaker: weaker.clone(),
                axiom,
                motif: kind,
            });
        }
    };
    if matches!(kind, Motif::Chain | Motif::Diamond) {
        for (b, a) in structure.attacks() {
            if ss(a) && !ss(b) {
                push(a, b, Axiom::S2);
            }
        }
    }
    if matches!(kind, Motif::Fork | Motif::Bipolar) {
        for (b, a) in structure.attacks() {
            if !structure.is_attacked(b) {
                push(b, a, Axiom::S1);
            }
        }
    }
    let unattacked: Vec<_> = structure.arguments().iter().filter(|a| !structure.is_attacked(a)).collect();
    let insufficient: Vec<_> = structure.arguments().iter().filter(|a| !ss(a)).collect();
    for u in &unattacked {
        for x in &insufficient {
            push(u, x, Axiom::S4);
        }
    }
    out
}

/// Builds a canonical motif of `size` arguments.
///
/// Core edges carry weight 1. With `noise`, `⌈size/2⌉` extra attacks with
/// weights in `[0.05, 0.15]` are added; they never target an argument that
/// is the stronger side of an S1 or S4 condition, so every unattacked core
/// argument stays unattacked.
pub fn generate_archetype(kind: Motif, size: usize, noise: bool, seed: u64) -> Result<GeneratedGraph> {
    if kind == Motif::RandomDag {
        return Err(GraspError::InvalidConfig("use generate_random_dag for random DAGs".into()));
    }
    if !(MIN_MOTIF_SIZE..=MAX_MOTIF_SIZE).contains(&size) {
        return Err(GraspError::InvalidConfig(format!(
            "motif size must lie in {MIN_MOTIF_SIZE}..={MAX_MOTIF_SIZE}, got {size}"
        )));
    }
    let (names, edges) = motif_core(kind, size);
    let structure = ArgumentationStructure::new(
        names.iter().cloned(),
        edges.iter().map(|&(f, t)| (names[f].clone(), names[t].clone())),
        [],
    )?;
    let crcs = derive_crcs(&structure, kind);

    let mut w = Matrix::zeros(size);
    for &(f, t) in &edges {
        w[(f, t)] = 1.0;
    }
    if noise {
        let protected: Vec<bool> = names
            .iter()
            .map(|id| crcs.iter().any(|c| &c.stronger == id && matches!(c.axiom, Axiom::S1 | Axiom::S4)))
            .collect();
        let mut candidates: Vec<(usize, usize)> = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && w[(i, j)] == 0.0 && !protected[j])
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = size.div_ceil(2).min(candidates.len());
        let (chosen, _) = candidates.partial_shuffle(&mut rng, count);
        for &(i, j) in chosen.iter() {
            w[(i, j)] = rng.gen_range(NOISE_WEIGHT_RANGE.0..=NOISE_WEIGHT_RANGE.1);
        }
    }
    let graph = WeightedInteractionGraph::from_attacks(names, w, DefenseMode::WSquared)?;
    Ok(GeneratedGraph { graph, crcs })
}

/// Random DAG on `n` nodes: a random topological order, each forward pair
/// joined with probability `edge_prob` and weight uniform in `[0.2, 1.0]`.
/// CRCs require every unattacked node to outrank every attacked node.
pub fn generate_random_dag(n: usize, edge_prob: f64, seed: u64) -> Result<GeneratedGraph> {
    if n < 2 {
        return Err(GraspError::InvalidConfig(format!("random DAG needs n >= 2, got {n}")));
    }
    if !(edge_prob > 0.0 && edge_prob < 1.0) {
        return Err(GraspError::InvalidConfig(format!("edge probability must lie in (0, 1), got {edge_prob}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.to_string().len();
    let names: Vec<ArgumentId> = (1..=n).map(|i| ArgumentId::from(format!("v{i:0width$}").as_str())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut w = Matrix::zeros(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(edge_prob) {
                w[(order[a], order[b])] = rng.gen_range(DAG_WEIGHT_RANGE.0..=DAG_WEIGHT_RANGE.1);
            }
        }
    }
    let graph = WeightedInteractionGraph::from_attacks(names, w, DefenseMode::WSquared)?;
    let attacked = graph.attacked();
    let args = graph.arguments();
    let mut crcs = Vec::new();
    for u in (0..n).filter(|&i| !attacked[i]) {
        for x in (0..n).filter(|&i| attacked[i]) {
            crcs.push(CriticalRankingCondition {
                stronger: args[u].clone(),
                weaker: args[x].clone(),
                axiom: Axiom::S4,
                motif: Motif::RandomDag,
            });
        }
    }
    Ok(GeneratedGraph { graph, crcs })
}

/// Random attack matrix: each off-diagonal entry is present with
/// probability `density` and then uniform in `[0, 1]`.
pub fn random_attacks<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, |i, j| {
        if i != j && rng.gen_bool(density.clamp(0.0, 1.0)) {
            rng.gen_range(0.0..=1.0)
        } else {
            0.0
        }
    })
}

/// Random graph with generated ids `x01, x02, …` and derived defense.
pub fn random_graph<R: Rng + ?Sized>(
    n: usize,
    density: f64,
    mode: DefenseMode,
    rng: &mut R,
) -> WeightedInteractionGraph {
    let width = n.max(1).to_string().len().max(2);
    let names: Vec<ArgumentId> = (1..=n).map(|i| ArgumentId::from(format!("x{i:0width$}").as_str())).collect();
    WeightedInteractionGraph::from_attacks(names, random_attacks(n, density, rng), mode)
        .expect("random attacks lie in [0, 1]")
}
