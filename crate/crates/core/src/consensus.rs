//! Rank aggregation and distance-to-consensus analysis.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::ArgumentId;
use crate::metrics::{check_same_items, source_label, swap_distance, with_debate_context, DebateRankings};
use crate::ranking::Ranking;

pub const KEMENY_EXACT_MAX: usize = 8;

fn check_common(rankings: &[Ranking]) -> Result<()> {
    let first = rankings
        .first()
        .ok_or_else(|| GraspError::InvalidConfig("at least one ranking is required".into()))?;
    rankings[1..].iter().try_for_each(|r| check_same_items(first, r))
}

/// Items of the first ranking sorted by id; the canonical index order.
fn sorted_items(rankings: &[Ranking]) -> Vec<ArgumentId> {
    let mut items = rankings[0].order().to_vec();
    items.sort();
    items
}

/// `prefer[i][j]` = number of rankings placing item `i` before item `j`.
fn preference_matrix(items: &[ArgumentId], rankings: &[Ranking]) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut prefer = vec![vec![0usize; n]; n];
    for r in rankings {
        let pos = r.positions();
        let p: Vec<usize> = items.iter().map(|id| pos[id]).collect();
        for i in 0..n {
            for j in 0..n {
                if p[i] < p[j] {
                    prefer[i][j] += 1;
                }
            }
        }
    }
    prefer
}

/// Each item scores `Σ (n − position)` with 0-based positions; sorted
/// descending with ties broken by id.
pub fn borda_consensus(rankings: &[Ranking]) -> Result<Ranking> {
    check_common(rankings)?;
    let n = rankings[0].len();
    let mut score: BTreeMap<&ArgumentId, usize> = BTreeMap::new();
    for r in rankings {
        for (p, id) in r.order().iter().enumerate() {
            *score.entry(id).or_default() += n - p;
        }
    }
    let mut items: Vec<(&ArgumentId, usize)> = score.into_iter().collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ranking::new(items.into_iter().map(|(id, _)| id.clone()).collect()).map(|r| r.with_label("borda"))
}

/// Builds the order front to back, each time appending the unplaced item
/// that the fewest input rankings place behind some other unplaced item.
pub fn kemeny_greedy(rankings: &[Ranking]) -> Result<Ranking> {
    check_common(rankings)?;
    let items = sorted_items(rankings);
    let prefer = preference_matrix(&items, rankings);
    let n = items.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&x| !placed[x])
            .min_by_key(|&x| {
                let cost: usize = (0..n).filter(|&y| y != x && !placed[y]).map(|y| prefer[y][x]).sum();
                (cost, x)
            })
            .expect("an unplaced item remains");
        placed[best] = true;
        order.push(items[best].clone());
    }
    Ranking::new(order).map(|r| r.with_label("kemeny_greedy"))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive Kemeny optimum for at most eight items. Among optimal orders
/// the lexicographically first (by id) wins.
pub fn kemeny_exact(rankings: &[Ranking]) -> Result<Ranking> {
    check_common(rankings)?;
    let n = rankings[0].len();
    if n > KEMENY_EXACT_MAX {
        return Err(GraspError::TooLarge { n, max: KEMENY_EXACT_MAX });
    }
    let items = sorted_items(rankings);
    let prefer = preference_matrix(&items, rankings);
    let cost = |perm: &[usize]| -> usize {
        let mut c = 0;
        for a in 0..perm.len() {
            for b in a + 1..perm.len() {
                c += prefer[perm[b]][perm[a]];
            }
        }
        c
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = cost(&perm);
    while next_permutation(&mut perm) {
        let c = cost(&perm);
        if c < best_cost {
            best_cost = c;
            best.clone_from(&perm);
        }
    }
    Ranking::new(best.into_iter().map(|i| items[i].clone()).collect()).map(|r| r.with_label("kemeny_exact"))
}

/// Summed swap distance from `consensus` to every input ranking.
pub fn total_distance(consensus: &Ranking, rankings: &[Ranking]) -> Result<usize> {
    rankings.iter().map(|r| swap_distance(consensus, r)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateConsensus {
    pub debate: String,
    pub borda_ranking: Ranking,
    pub kemeny_greedy_ranking: Ranking,
    /// Raw swap distance from each source to each consensus.
    pub borda_distance: BTreeMap<String, usize>,
    pub kemeny_distance: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDivergence {
    pub borda_mean: f64,
    pub kemeny_mean: f64,
    pub borda_mean_normalized: f64,
    pub kemeny_mean_normalized: f64,
    pub debates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub source: String,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub debates: Vec<DebateConsensus>,
    pub per_source: BTreeMap<String, SourceDivergence>,
    /// Source with the largest mean raw distance to the Borda consensus.
    pub outlier_borda: Outlier,
    pub outlier_kemeny: Outlier,
}

#[derive(Default)]
struct Acc {
    borda: f64,
    kemeny: f64,
    borda_norm: f64,
    kemeny_norm: f64,
    debates: usize,
}

/// Distance of every source to the Borda and greedy-Kemeny consensus of each
/// debate, averaged per source across debates.
///
/// Sources are identified by ranking label (or `sourceN` when unlabeled).
/// Ties for the outlier go to the source whose label sorts first.
pub fn consensus_divergence(debates: &[DebateRankings]) -> Result<ConsensusReport> {
    if debates.is_empty() {
        return Err(GraspError::InvalidConfig("no debates given".into()));
    }
    let mut per_debate = Vec::with_capacity(debates.len());
    let mut acc: BTreeMap<String, Acc> = BTreeMap::new();
    for d in debates {
        if d.rankings.len() < 2 {
            return Err(GraspError::InvalidConfig(format!("debate `{}` needs at least 2 rankings", d.id)));
        }
        let ctx = |e| with_debate_context(e, &d.id);
        let borda = borda_consensus(&d.rankings).map_err(ctx)?;
        let kemeny = kemeny_greedy(&d.rankings).map_err(ctx)?;
        let n = borda.len();
        let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
        let mut bd = BTreeMap::new();
        let mut kd = BTreeMap::new();
        for (i, r) in d.rankings.iter().enumerate() {
            let label = source_label(r, i);
            let b = swap_distance(r, &borda)?;
            let k = swap_distance(r, &kemeny)?;
            let e = acc.entry(label.clone()).or_default();
            e.borda += b as f64;
            e.kemeny += k as f64;
            e.borda_norm += b as f64 / pairs;
            e.kemeny_norm += k as f64 / pairs;
            e.debates += 1;
            bd.insert(label.clone(), b);
            kd.insert(label, k);
        }
        per_debate.push(DebateConsensus {
            debate: d.id.clone(),
            borda_ranking: borda,
            kemeny_greedy_ranking: kemeny,
            borda_distance: bd,
            kemeny_distance: kd,
        });
    }
    let per_source: BTreeMap<String, SourceDivergence> = acc
        .into_iter()
        .map(|(label, a)| {
            let m = a.debates as f64;
            let div = SourceDivergence {
                borda_mean: a.borda / m,
                kemeny_mean: a.kemeny / m,
                borda_mean_normalized: a.borda_norm / m,
                kemeny_mean_normalized: a.kemeny_norm / m,
                debates: a.debates,
            };
            (label, div)
        })
        .collect();
    let outlier = |f: fn(&SourceDivergence) -> f64| {
        let mut best: Option<Outlier> = None;
        for (label, div) in &per_source {
            let v = f(div);
            if best.as_ref().is_none_or(|b| v > b.mean_distance) {
                best = Some(Outlier { source: label.clone(), mean_distance: v });
            }
        }
        best.expect("at least one source")
    };
    Ok(ConsensusReport {
        outlier_borda: outlier(|d| d.borda_mean),
        outlier_kemeny: outlier(|d| d.kemeny_mean),
        per_source,
        debates: per_debate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ids;

    fn r(names: &[&str]) -> Ranking {
        Ranking::new(ids(names)).unwrap()
    }

    #[test]
    fn unanimity() {
        let x = r(&["c", "a", "b", "d"]);
        let rs = vec![x.clone(), x.clone(), x.clone()];
        assert_eq!(borda_consensus(&rs).unwrap().order(), x.order());
        assert_eq!(kemeny_greedy(&rs).unwrap().order(), x.order());
        assert_eq!(kemeny_exact(&rs).unwrap().order(), x.order());
        assert_eq!(total_distance(&kemeny_greedy(&rs).unwrap(), &rs).unwrap(), 0);
    }

    #[test]
    fn reversed_pair_falls_back_to_ids() {
        let rs = vec![r(&["c", "b", "a"]), r(&["a", "b", "c"])];
        assert_eq!(borda_consensus(&rs).unwrap().order(), ids(&["a", "b", "c"]).as_slice());
        let two = vec![r(&["b", "a"]), r(&["a", "b"])];
        let exact = kemeny_exact(&two).unwrap();
        assert_eq!(exact.order(), ids(&["a", "b"]).as_slice());
        assert_eq!(total_distance(&exact, &two).unwrap(), 1);
    }

    #[test]
    fn borda_score_table() {
        // n = 4, scores n − position:
        //   r1 a b c d -> a4 b3 c2 d1
        //   r2 b a d c -> b4 a3 d2 c1
        //   r3 c b a d -> c4 b3 a2 d1
        // totals: a 9, b 10, c 7, d 4
        let rs = vec![r(&["a", "b", "c", "d"]), r(&["b", "a", "d", "c"]), r(&["c", "b", "a", "d"])];
        assert_eq!(borda_consensus(&rs).unwrap().order(), ids(&["b", "a", "c", "d"]).as_slice());
    }

    #[test]
    fn single_ranking_is_returned() {
        let x = r(&["d", "b", "a", "c"]);
        assert_eq!(kemeny_greedy(std::slice::from_ref(&x)).unwrap().order(), x.order());
    }

    #[test]
    fn exact_guard() {
        let big: Vec<String> = (0..9).map(|i| format!("i{i}")).collect();
        let x = Ranking::new(ids(&big)).unwrap();
        assert!(matches!(kemeny_exact(&[x]), Err(GraspError::TooLarge { n: 9, max: 8 })));
    }

    #[test]
    fn next_permutation_is_lexicographic() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn divergence_outlier() {
        let base = r(&["a", "b", "c", "d"]);
        let rs = vec![
            base.clone().with_label("j1"),
            base.clone().with_label("j2"),
            r(&["d", "c", "a", "b"]).with_label("j3"),
        ];
        let rep = consensus_divergence(&[DebateRankings { id: "d".into(), rankings: rs }]).unwrap();
        assert_eq!(rep.outlier_borda.source, "j3");
        assert_eq!(rep.outlier_kemeny.source, "j3");
        assert_eq!(rep.per_source["j1"].borda_mean, 0.0);
        for div in rep.per_source.values() {
            assert!(rep.outlier_borda.mean_distance >= div.borda_mean);
        }
    }

    #[test]
    fn all_identical_sources() {
        let x = r(&["a", "b", "c"]);
        let rep = consensus_divergence(&[DebateRankings {
            id: "d".into(),
            rankings: vec![x.clone().with_label("p"), x.clone().with_label("q")],
        }])
        .unwrap();
        assert_eq!(rep.outlier_borda.mean_distance, 0.0);
        assert_eq!(rep.outlier_borda.source, "p");
    }
}
