//! Attack-defense strength propagation over weighted argument graphs, with
//! baseline scorers, a structural-sufficiency testbed, ranking agreement
//! metrics and file ingestion.

pub mod baselines;
pub mod consensus;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod operator;
pub mod pipeline;
pub mod ranking;
pub mod sufficiency;
pub mod testbed;

pub use baselines::{baseline_scores, Baseline};
pub use consensus::{borda_consensus, consensus_divergence, kemeny_exact, kemeny_greedy, ConsensusReport};
pub use error::{GraspError, Result};
pub use graph::{
    derive_defense, graph_stats, normalize_attacks, rescale_defense, worked_example, ArgumentId, DefenseMode,
    GraphStats, Normalization, WeightedInteractionGraph,
};
pub use matrix::Matrix;
pub use metrics::{
    agreement, centrality_alignment, kendall_tau, spearman_rho, swap_distance, swap_distance_normalized,
    top_k_overlap, AgreementReport, DebateRankings,
};
pub use operator::{iterate_to_fixed_point, solve, GraspConfig, IterationTrace, StrengthVector};
pub use pipeline::{RankMethod, Variant};
pub use ranking::{scores_to_ranking, Ranking};
pub use sufficiency::{check_axioms, ArgumentationStructure};
pub use testbed::{run_testbed, SuiteConfig, TestbedTable};
