//! Command logic shared by the CLI: variant preprocessing, ranking, agreement
//! across debates, parameter sweeps and testbed reports.
//!
//! Every function here returns plain data; serializing it with
//! [`crate::io::to_json`] gives byte-identical output for identical inputs.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_scores, Baseline};
use crate::consensus::{consensus_divergence, ConsensusReport};
use crate::error::{GraspError, Result};
use crate::graph::{
    graph_stats, normalize_attacks, rescale_defense, DefenseMode, DefenseProvenance, GraphStats, Normalization,
    WeightedInteractionGraph,
};
use crate::io::{LoadedDebate, RankingReport, ScoreEntry, SourceData, TraceReport, FORMAT_VERSION};
use crate::metrics::{agreement, centrality_alignment, AgreementReport, CentralityAlignment, DebateRankings};
use crate::operator::{iterate_to_fixed_point, solve, GraspConfig};
use crate::ranking::{scores_to_ranking, Ranking};
use crate::testbed::{run_testbed, SuiteConfig, TestbedTable};

/// Preprocessing applied before propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Grasp,
    GraspWInf,
    GraspW1,
    GraspWInfDbar,
    GraspW1Dbar,
}

impl Variant {
    pub const ALL: [Variant; 5] =
        [Variant::Grasp, Variant::GraspWInf, Variant::GraspW1, Variant::GraspWInfDbar, Variant::GraspW1Dbar];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Grasp => "grasp",
            Variant::GraspWInf => "grasp_w_inf",
            Variant::GraspW1 => "grasp_w_1",
            Variant::GraspWInfDbar => "grasp_w_inf_dbar",
            Variant::GraspW1Dbar => "grasp_w_1_dbar",
        }
    }

    pub fn normalization(self) -> Normalization {
        match self {
            Variant::Grasp => Normalization::None,
            Variant::GraspWInf | Variant::GraspWInfDbar => Normalization::LInf,
            Variant::GraspW1 | Variant::GraspW1Dbar => Normalization::L1,
        }
    }

    pub fn rescales_defense(self) -> bool {
        matches!(self, Variant::GraspWInfDbar | Variant::GraspW1Dbar)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| GraspError::InvalidConfig(format!("unknown variant `{s}`")))
    }
}

/// Normalize W, derive D from the normalized W, then optionally rescale D.
///
/// The plain variant keeps an explicit D as given; `mode` overrides the
/// construction of a derived D.
pub fn prepare(graph: &WeightedInteractionGraph, variant: Variant, mode: Option<DefenseMode>) -> Result<WeightedInteractionGraph> {
    let current = match graph.provenance() {
        DefenseProvenance::Derived(m) => Some(m),
        DefenseProvenance::Explicit => None,
    };
    let base = match (variant, current, mode) {
        (Variant::Grasp, None, None) => graph.clone(),
        (Variant::Grasp, Some(m), None) => graph.rederive(m)?,
        _ => {
            let mode = mode.or(current).unwrap_or_default();
            let w = normalize_attacks(graph.attacks(), variant.normalization());
            WeightedInteractionGraph::from_attacks(graph.arguments().to_vec(), w, mode)?
        }
    };
    if variant.rescales_defense() {
        base.map_defenses(rescale_defense)
    } else {
        Ok(base)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankMethod {
    Grasp { variant: Variant, config: GraspConfig },
    Baseline(Baseline),
}

impl RankMethod {
    pub fn label(&self) -> String {
        match self {
            RankMethod::Grasp { variant, .. } => variant.to_string(),
            RankMethod::Baseline(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOutput {
    pub report: RankingReport,
    pub trace: Option<TraceReport>,
}

impl RankOutput {
    pub fn ranking(&self) -> Result<Ranking> {
        self.report.to_ranking()
    }
}

/// Runs one method on one graph. Baselines see the graph as given.
pub fn rank(
    graph: &WeightedInteractionGraph,
    method: &RankMethod,
    mode: Option<DefenseMode>,
    with_trace: bool,
) -> Result<RankOutput> {
    let label = method.label();
    let report = |scores: &[f64], converged, iterations, residual| -> Result<RankingReport> {
        Ok(RankingReport {
            format_version: FORMAT_VERSION,
            method: Some(label.clone()),
            scores: graph
                .arguments()
                .iter()
                .zip(scores)
                .map(|(id, &score)| ScoreEntry { id: id.clone(), score })
                .collect(),
            ranking: scores_to_ranking(scores, graph.arguments())?.order().to_vec(),
            converged,
            iterations,
            residual,
        })
    };
    match method {
        RankMethod::Baseline(kind) => {
            let g = match mode {
                Some(m) => graph.rederive(m)?,
                None => graph.clone(),
            };
            let s = baseline_scores(&g, *kind)?;
            Ok(RankOutput { report: report(&s, None, None, None)?, trace: None })
        }
        RankMethod::Grasp { variant, config } => {
            let g = prepare(graph, *variant, mode)?;
            if with_trace {
                let (s, t) = iterate_to_fixed_point(&g, config)?;
                let trace = TraceReport {
                    format_version: FORMAT_VERSION,
                    method: label.clone(),
                    arguments: g.arguments().to_vec(),
                    scores: t.per_iteration_scores.iter().map(|v| v.to_vec()).collect(),
                    ranks: t.per_iteration_ranks.clone(),
                    converged: t.converged,
                    iterations: t.iterations_used,
                    residual: t.final_residual,
                };
                let rep = report(&s, Some(t.converged), Some(t.iterations_used), Some(t.final_residual))?;
                Ok(RankOutput { report: rep, trace: Some(trace) })
            } else {
                let fp = solve(&g, config)?;
                let rep = report(&fp.scores, Some(fp.converged), Some(fp.iterations), Some(fp.residual))?;
                Ok(RankOutput { report: rep, trace: None })
            }
        }
    }
}

/// Every baseline on one graph, in a fixed order.
pub fn all_baselines(graph: &WeightedInteractionGraph) -> Result<Vec<RankingReport>> {
    Baseline::ALL.iter().map(|&b| rank(graph, &RankMethod::Baseline(b), None, false).map(|o| o.report)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub arguments: usize,
    pub defense: String,
    #[serde(flatten)]
    pub stats: GraphStats,
    pub w_norm_1: f64,
    pub d_norm_1: f64,
    /// Alignment of the plain GRASP ranking (library defaults) with in-,
    /// out- and net-strength.
    pub centrality_alignment: CentralityAlignment,
}

pub fn stats(graph: &WeightedInteractionGraph, threshold: f64) -> Result<StatsReport> {
    let method = RankMethod::Grasp { variant: Variant::Grasp, config: GraspConfig::default() };
    let ranking = rank(graph, &method, None, false)?.ranking()?;
    Ok(StatsReport {
        arguments: graph.len(),
        defense: graph.provenance().to_string(),
        stats: graph_stats(graph.attacks(), threshold),
        w_norm_1: graph.attacks().norm_1(),
        d_norm_1: graph.defenses().norm_1(),
        centrality_alignment: centrality_alignment(graph, &ranking)?,
    })
}

/// Turns loaded sources into rankings: ranking files pass through, graphs
/// are ranked with `method`.
pub fn debate_rankings(
    debates: &[LoadedDebate],
    method: &RankMethod,
    mode: Option<DefenseMode>,
) -> Result<Vec<DebateRankings>> {
    debates
        .iter()
        .map(|d| {
            let rankings = d
                .sources
                .iter()
                .map(|s| {
                    let r = match &s.data {
                        SourceData::Ranking(r) => r.clone(),
                        SourceData::Graph(g) => rank(g, method, mode, false)?.ranking()?,
                    };
                    Ok(r.with_label(s.label.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DebateRankings { id: d.id.clone(), rankings })
        })
        .collect()
}

pub fn agree(debates: &[LoadedDebate], method: &RankMethod, mode: Option<DefenseMode>) -> Result<AgreementReport> {
    agreement(&debate_rankings(debates, method, mode)?)
}

pub fn consensus(debates: &[LoadedDebate], method: &RankMethod, mode: Option<DefenseMode>) -> Result<ConsensusReport> {
    consensus_divergence(&debate_rankings(debates, method, mode)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_max_iters() -> usize {
    GraspConfig::DEFAULT_MAX_ITERS
}

fn default_tol() -> f64 {
    GraspConfig::DEFAULT_TOL
}

impl Default for SweepGrid {
    /// 4 × 4 × 4 grid.
    fn default() -> Self {
        SweepGrid {
            alphas: vec![0.1, 0.25, 0.5, 1.0],
            betas: vec![0.1, 0.25, 0.5, 0.75],
            gammas: vec![0.6, 0.8, 0.9, 1.0],
            max_iters: default_max_iters(),
            tol: default_tol(),
        }
    }
}

impl SweepGrid {
    pub fn single(alpha: f64, beta: f64, gamma: f64) -> Self {
        SweepGrid { alphas: vec![alpha], betas: vec![beta], gammas: vec![gamma], ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.betas.is_empty() || self.gammas.is_empty() {
            return Err(GraspError::InvalidConfig("sweep grid has an empty axis".into()));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return Err(GraspError::InvalidConfig(format!("gamma {g} outside (0, 1]")));
        }
        Ok(())
    }

    /// Triples in grid order: alpha outermost, gamma innermost.
    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.alphas.len() * self.betas.len() * self.gammas.len());
        for &a in &self.alphas {
            for &b in &self.betas {
                for &g in &self.gammas {
                    out.push((a, b, g));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Per-debate mean pairwise τ across sources, averaged across debates.
    pub mean_tau: f64,
    pub converged_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub variant: Variant,
    pub debates: usize,
    /// Sorted by `mean_tau` descending; ties keep grid order.
    pub rows: Vec<SweepRow>,
    pub best: SweepRow,
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("{:>6} {:>6} {:>6} {:>10} {:>10}\n", "alpha", "beta", "gamma", "mean_tau", "converged");
        for r in &self.rows {
            let _ = writeln!(s, "{:>6} {:>6} {:>6} {:>10.6} {:>10.3}", r.alpha, r.beta, r.gamma, r.mean_tau, r.converged_fraction);
        }
        s
    }
}

/// Scores every grid triple by cross-source agreement. All sources must be
/// graphs.
pub fn sweep(debates: &[LoadedDebate], grid: &SweepGrid, variant: Variant, mode: Option<DefenseMode>) -> Result<SweepReport> {
    grid.validate()?;
    if debates.is_empty() {
        return Err(GraspError::InvalidConfig("sweep needs at least one debate".into()));
    }
    let mut prepared = Vec::with_capacity(debates.len());
    for d in debates {
        if d.sources.len() < 2 {
            return Err(GraspError::InvalidConfig(format!("debate `{}` needs at least 2 sources", d.id)));
        }
        let graphs = d
            .sources
            .iter()
            .map(|s| match &s.data {
                SourceData::Graph(g) => Ok((s.label.clone(), prepare(g, variant, mode)?)),
                SourceData::Ranking(_) => Err(GraspError::InvalidConfig(format!(
                    "debate `{}`: sweep needs graph sources, `{}` is a ranking",
                    d.id, s.label
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        prepared.push((d.id.clone(), graphs));
    }

    let mut rows = Vec::new();
    for (alpha, beta, gamma) in grid.triples() {
        let mut cfg = GraspConfig::with_params(alpha, beta, gamma);
        cfg.max_iters = grid.max_iters;
        cfg.tol = grid.tol;
        let (mut converged, mut runs) = (0usize, 0usize);
        let mut per_debate = Vec::with_capacity(prepared.len());
        for (id, graphs) in &prepared {
            let rankings = graphs
                .iter()
                .map(|(label, g)| {
                    let fp = solve(g, &cfg)?;
                    runs += 1;
                    converged += usize::from(fp.converged);
                    Ok(scores_to_ranking(&fp.scores, g.arguments())?.with_label(label.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            per_debate.push(DebateRankings { id: id.clone(), rankings });
        }
        let report = agreement(&per_debate)?;
        rows.push(SweepRow {
            alpha,
            beta,
            gamma,
            mean_tau: report.mean.kendall_tau,
            converged_fraction: converged as f64 / runs as f64,
        });
    }
    rows.sort_by(|a, b| b.mean_tau.total_cmp(&a.mean_tau));
    Ok(SweepReport { variant, debates: prepared.len(), best: rows[0].clone(), rows })
}

/// Runs the testbed; an empty method list is a configuration error.
pub fn testbed(suite: &SuiteConfig, seed: u64) -> Result<TestbedTable> {
    if suite.methods.is_empty() {
        return Err(GraspError::InvalidConfig("testbed needs at least one method".into()));
    }
    run_testbed(suite, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ids, worked_example};
    use crate::io::{LoadedSource, graph_to_string};
    use crate::matrix::Matrix;

    fn appendix_config() -> GraspConfig {
        GraspConfig::with_params(1.0, 0.5, 1.0)
    }

    #[test]
    fn worked_example_ranking() {
        let m = RankMethod::Grasp { variant: Variant::Grasp, config: appendix_config() };
        let out = rank(&worked_example(), &m, None, true).unwrap();
        assert_eq!(out.report.ranking, ids(&["a2", "a1", "a4", "a3"]));
        let t = out.trace.unwrap();
        assert_eq!(t.ranks[0], vec![1, 2, 3, 4]);
        assert_eq!(t.scores.len(), t.iterations + 1);
    }

    #[test]
    fn normalization_is_a_no_op_on_max_one_matrix() {
        let g = worked_example();
        let cfg = appendix_config();
        let a = rank(&g, &RankMethod::Grasp { variant: Variant::Grasp, config: cfg.clone() }, None, true).unwrap();
        let b = rank(&g, &RankMethod::Grasp { variant: Variant::GraspWInf, config: cfg }, None, true).unwrap();
        let strip = |mut r: RankingReport| {
            r.method = None;
            r
        };
        assert_eq!(strip(a.report), strip(b.report));
        assert_eq!(a.trace.unwrap().scores, b.trace.unwrap().scores);
    }

    #[test]
    fn variant_order_normalizes_before_deriving() {
        let w = Matrix::from_rows(&[vec![0.0, 0.4, 0.0], vec![0.0, 0.0, 0.4], vec![0.0, 0.0, 0.0]]).unwrap();
        let g = WeightedInteractionGraph::from_attacks(ids(&["a", "b", "c"]), w, DefenseMode::WSquared).unwrap();
        let p = prepare(&g, Variant::GraspWInf, None).unwrap();
        assert_eq!(p.attacks()[(0, 1)], 1.0);
        assert_eq!(p.defenses()[(0, 2)], 1.0);
    }

    #[test]
    fn h_categorizer_on_worked_example() {
        let out = rank(&worked_example(), &RankMethod::Baseline(Baseline::HCategorizer), None, false).unwrap();
        let s: Vec<f64> = out.report.scores.iter().map(|e| e.score).collect();
        let expect = [0.5, 1.0, 0.5, 1.0 / 1.3];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn debate_of(id: &str, graphs: Vec<WeightedInteractionGraph>) -> LoadedDebate {
        LoadedDebate {
            id: id.into(),
            sources: graphs
                .into_iter()
                .enumerate()
                .map(|(i, g)| LoadedSource { label: format!("s{i}"), data: SourceData::Graph(g) })
                .collect(),
        }
    }

    #[test]
    fn sweep_grid_shape_and_single_triple() {
        let g = worked_example();
        let h = g.map_attacks(|w| w.scale(0.5)).unwrap();
        let debates = vec![debate_of("d", vec![g.clone(), h.clone(), g.clone()])];
        let full = sweep(&debates, &SweepGrid::default(), Variant::Grasp, None).unwrap();
        assert_eq!(full.rows.len(), 64);
        for w in full.rows.windows(2) {
            assert!(w[0].mean_tau >= w[1].mean_tau);
        }
        let one = sweep(&debates, &SweepGrid::single(1.0, 0.6, 0.9), Variant::Grasp, None).unwrap();
        let m = RankMethod::Grasp { variant: Variant::Grasp, config: GraspConfig::main_preset() };
        let agg = agree(&debates, &m, None).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.rows[0].mean_tau, agg.mean.kendall_tau);
    }

    #[test]
    fn sweep_ties_keep_grid_order() {
        let g = worked_example();
        let debates = vec![debate_of("d", vec![g.clone(), g])];
        let grid = SweepGrid { alphas: vec![0.5, 1.0], betas: vec![0.5], gammas: vec![1.0], ..Default::default() };
        let rep = sweep(&debates, &grid, Variant::Grasp, None).unwrap();
        assert_eq!(rep.rows[0].mean_tau, rep.rows[1].mean_tau);
        assert_eq!((rep.rows[0].alpha, rep.rows[1].alpha), (0.5, 1.0));
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let debates = vec![debate_of("d", vec![worked_example(), worked_example()])];
        let grid = SweepGrid { gammas: vec![0.0], ..SweepGrid::single(1.0, 1.0, 1.0) };
        assert!(sweep(&debates, &grid, Variant::Grasp, None).is_err());
        let grid = SweepGrid { alphas: vec![], ..SweepGrid::single(1.0, 1.0, 1.0) };
        assert!(sweep(&debates, &grid, Variant::Grasp, None).is_err());
    }

    #[test]
    fn empty_testbed_methods_rejected() {
        let suite = SuiteConfig { methods: vec![], ..SuiteConfig::standard() };
        assert!(matches!(testbed(&suite, 1), Err(GraspError::InvalidConfig(_))));
    }

    #[test]
    fn stats_report_serializes_flat() {
        let r = stats(&worked_example(), 0.5).unwrap();
        let text = crate::io::to_json(&r).unwrap();
        assert!(text.contains("\"density_d\""));
        assert!(graph_to_string(&worked_example()).unwrap().contains("defense_mode"));
    }
}
