//! Agreement between rankings of the same argument set.
//!
//! Rankings are strict total orders, so Kendall's τ-a and τ-b coincide and
//! the normalized swap distance is exactly `(1 − τ)/2`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::{pearson, ArgumentId, WeightedInteractionGraph};
use crate::ranking::Ranking;

pub const TOP_K: [usize; 2] = [3, 5];

pub(crate) fn check_same_items(r1: &Ranking, r2: &Ranking) -> Result<()> {
    if r1.len() != r2.len() || r1.item_set() != r2.item_set() {
        let label = |r: &Ranking| r.label().unwrap_or("<unlabeled>").to_string();
        return Err(GraspError::MismatchedItems(format!(
            "`{}` ({} items) vs `{}` ({} items)",
            label(r1),
            r1.len(),
            label(r2),
            r2.len()
        )));
    }
    Ok(())
}

/// Positions in `r2` of the items of `r1`, in `r1` order.
fn relative_positions(r1: &Ranking, r2: &Ranking) -> Vec<usize> {
    let pos = r2.positions();
    r1.order().iter().map(|id| pos[id]).collect()
}

fn count_inversions(xs: &mut [usize], buf: &mut Vec<usize>) -> usize {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut xs[..mid], buf) + count_inversions(&mut xs[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if xs[i] <= xs[j] {
            buf.push(xs[i]);
            i += 1;
        } else {
            buf.push(xs[j]);
            inv += mid - i;
            j += 1;
        }
    }
    buf.extend_from_slice(&xs[i..mid]);
    buf.extend_from_slice(&xs[j..]);
    xs.copy_from_slice(buf);
    inv
}

/// Number of discordant pairs.
pub fn swap_distance(r1: &Ranking, r2: &Ranking) -> Result<usize> {
    check_same_items(r1, r2)?;
    let mut pos = relative_positions(r1, r2);
    let mut buf = Vec::with_capacity(pos.len());
    Ok(count_inversions(&mut pos, &mut buf))
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Discordant pairs divided by `C(n, 2)`; 0 when there are no pairs.
pub fn swap_distance_normalized(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let d = swap_distance(r1, r2)?;
    let pairs = pair_count(r1.len());
    Ok(if pairs == 0 { 0.0 } else { d as f64 / pairs as f64 })
}

/// Kendall's τ-a. Rankings of fewer than two items are treated as identical.
pub fn kendall_tau(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let d = swap_distance(r1, r2)?;
    let pairs = pair_count(r1.len());
    if pairs == 0 {
        return Ok(1.0);
    }
    Ok((pairs as f64 - 2.0 * d as f64) / pairs as f64)
}

/// Spearman's ρ via `1 − 6Σd²/(n(n² − 1))`.
pub fn spearman_rho(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    check_same_items(r1, r2)?;
    let n = r1.len();
    if n < 2 {
        return Ok(1.0);
    }
    let pos = relative_positions(r1, r2);
    let d2: usize = pos.iter().enumerate().map(|(i, &j)| i.abs_diff(j).pow(2)).sum();
    let n = n as f64;
    Ok(1.0 - 6.0 * d2 as f64 / (n * (n * n - 1.0)))
}

/// `|top-k(r1) ∩ top-k(r2)| / k`.
pub fn top_k_overlap(r1: &Ranking, r2: &Ranking, k: usize) -> Result<f64> {
    check_same_items(r1, r2)?;
    if k > r1.len() {
        return Err(GraspError::KTooLarge { k, n: r1.len() });
    }
    if k == 0 {
        return Err(GraspError::InvalidConfig("k must be >= 1".into()));
    }
    let top2: std::collections::BTreeSet<_> = r2.order()[..k].iter().collect();
    let shared = r1.order()[..k].iter().filter(|id| top2.contains(id)).count();
    Ok(shared as f64 / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub first: String,
    pub second: String,
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub swap_norm: f64,
    pub swap_raw: usize,
    /// Keyed by k; absent when k exceeds the number of items.
    pub top_k_overlap: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub swap_norm: f64,
    pub swap_raw: f64,
    pub top_k_overlap: BTreeMap<usize, f64>,
    pub pairs: usize,
}

impl MeanMetrics {
    fn from_pairs(pairs: &[PairMetrics]) -> Self {
        let m = pairs.len();
        if m == 0 {
            return MeanMetrics::default();
        }
        let mean = |f: &dyn Fn(&PairMetrics) -> f64| pairs.iter().map(f).sum::<f64>() / m as f64;
        let mut top = BTreeMap::new();
        for k in TOP_K {
            let vals: Vec<f64> = pairs.iter().filter_map(|p| p.top_k_overlap.get(&k).copied()).collect();
            if !vals.is_empty() {
                top.insert(k, vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        MeanMetrics {
            kendall_tau: mean(&|p| p.kendall_tau),
            spearman_rho: mean(&|p| p.spearman_rho),
            swap_norm: mean(&|p| p.swap_norm),
            swap_raw: mean(&|p| p.swap_raw as f64),
            top_k_overlap: top,
            pairs: m,
        }
    }

    fn average(items: &[MeanMetrics]) -> Self {
        let m = items.len();
        if m == 0 {
            return MeanMetrics::default();
        }
        let mean = |f: &dyn Fn(&MeanMetrics) -> f64| items.iter().map(f).sum::<f64>() / m as f64;
        let mut top = BTreeMap::new();
        for k in TOP_K {
            let vals: Vec<f64> = items.iter().filter_map(|p| p.top_k_overlap.get(&k).copied()).collect();
            if !vals.is_empty() {
                top.insert(k, vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        MeanMetrics {
            kendall_tau: mean(&|p| p.kendall_tau),
            spearman_rho: mean(&|p| p.spearman_rho),
            swap_norm: mean(&|p| p.swap_norm),
            swap_raw: mean(&|p| p.swap_raw),
            top_k_overlap: top,
            pairs: items.iter().map(|p| p.pairs).sum(),
        }
    }
}

pub(crate) fn source_label(r: &Ranking, i: usize) -> String {
    r.label().map(str::to_string).unwrap_or_else(|| format!("source{}", i + 1))
}

pub fn pair_metrics(r1: &Ranking, r2: &Ranking) -> Result<PairMetrics> {
    Ok(PairMetrics {
        first: r1.label().unwrap_or_default().to_string(),
        second: r2.label().unwrap_or_default().to_string(),
        kendall_tau: kendall_tau(r1, r2)?,
        spearman_rho: spearman_rho(r1, r2)?,
        swap_norm: swap_distance_normalized(r1, r2)?,
        swap_raw: swap_distance(r1, r2)?,
        top_k_overlap: TOP_K
            .iter()
            .filter(|&&k| k <= r1.len())
            .map(|&k| Ok((k, top_k_overlap(r1, r2, k)?)))
            .collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateAgreement {
    pub debate: String,
    pub pairs: Vec<PairMetrics>,
    pub mean: MeanMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub debates: Vec<DebateAgreement>,
    /// Per-debate means averaged across debates.
    pub mean: MeanMetrics,
}

/// Rankings of one argument set by several sources.
#[derive(Debug, Clone, PartialEq)]
pub struct DebateRankings {
    pub id: String,
    pub rankings: Vec<Ranking>,
}

/// All `C(m, 2)` pairwise metrics within one debate.
pub fn debate_agreement(debate: &DebateRankings) -> Result<DebateAgreement> {
    let rs = &debate.rankings;
    if rs.len() < 2 {
        return Err(GraspError::InvalidConfig(format!("debate `{}` needs at least 2 rankings", debate.id)));
    }
    let mut pairs = Vec::with_capacity(rs.len() * (rs.len() - 1) / 2);
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let mut p = pair_metrics(&rs[i], &rs[j])
                .map_err(|e| with_debate_context(e, &debate.id))?;
            p.first = source_label(&rs[i], i);
            p.second = source_label(&rs[j], j);
            pairs.push(p);
        }
    }
    let mean = MeanMetrics::from_pairs(&pairs);
    Ok(DebateAgreement { debate: debate.id.clone(), pairs, mean })
}

pub(crate) fn with_debate_context(e: GraspError, debate: &str) -> GraspError {
    match e {
        GraspError::MismatchedItems(msg) => GraspError::MismatchedItems(format!("debate `{debate}`: {msg}")),
        other => other,
    }
}

/// Pairwise agreement per debate, then averaged across debates in input order.
pub fn agreement(debates: &[DebateRankings]) -> Result<AgreementReport> {
    let per = debates.iter().map(debate_agreement).collect::<Result<Vec<_>>>()?;
    let means: Vec<MeanMetrics> = per.iter().map(|d| d.mean.clone()).collect();
    Ok(AgreementReport { mean: MeanMetrics::average(&means), debates: per })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityAlignment {
    /// `None` when the strength has zero variance.
    pub in_strength: Option<f64>,
    pub out_strength: Option<f64>,
    pub net_strength: Option<f64>,
}

/// Average (1-based) ranks of `values` sorted descending, ties sharing the
/// mean of their positions.
fn descending_fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman correlation between a ranking's positions and the descending
/// order of in-, out- and net-strength (`out − in`) in the attack matrix.
///
/// A ranking that puts heavily attacked arguments last has negative
/// in-strength alignment.
pub fn centrality_alignment(graph: &WeightedInteractionGraph, ranking: &Ranking) -> Result<CentralityAlignment> {
    let args = graph.arguments();
    let graph_ranking = Ranking::new(args.to_vec())?;
    check_same_items(&graph_ranking, ranking)?;
    let pos = ranking.positions();
    let ranking_pos: Vec<f64> = args.iter().map(|a: &ArgumentId| (pos[a] + 1) as f64).collect();
    let w = graph.attacks();
    let incoming = w.column_sums();
    let outgoing: Vec<f64> = (0..w.dim()).map(|i| w.row(i).iter().sum()).collect();
    let net: Vec<f64> = outgoing.iter().zip(&incoming).map(|(o, i)| o - i).collect();
    let align = |strength: &[f64]| pearson(&ranking_pos, &descending_fractional_ranks(strength));
    Ok(CentralityAlignment {
        in_strength: align(&incoming),
        out_strength: align(&outgoing),
        net_strength: align(&net),
    })
}
