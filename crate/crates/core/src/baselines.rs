//! Closed-form structural ranking baselines. All of them read only the
//! attack matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::WeightedInteractionGraph;
use crate::matrix::{solve_dense, Matrix};
use crate::operator::StrengthVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Baseline {
    /// `s_j = 1 / (1 + Σ_i W_ij)`.
    HCategorizer,
    /// `c = (I − λWᵀ)⁻¹·1`, `s_j = 1 / c_j`. `λ` defaults to `0.9/‖W‖₁`.
    KatzAttack {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    /// `s_j = (1 + Σ_k (W²)_kj) / (1 + Σ_i W_ij)`.
    DefenseRatio,
    /// `s_j = 1 / (1 + #{i : W_ij > 0})`.
    BinaryIndegree,
    /// `s_j = 1 / (1 + max_i W_ij)`.
    MaxIncomingAttack,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::HCategorizer,
        Baseline::KatzAttack { lambda: None },
        Baseline::DefenseRatio,
        Baseline::BinaryIndegree,
        Baseline::MaxIncomingAttack,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Baseline::HCategorizer => "h_categorizer",
            Baseline::KatzAttack { .. } => "katz_attack",
            Baseline::DefenseRatio => "defense_ratio",
            Baseline::BinaryIndegree => "binary_indegree",
            Baseline::MaxIncomingAttack => "max_incoming_attack",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| GraspError::InvalidConfig(format!("unknown baseline `{s}`")))
    }
}

pub const KATZ_RESIDUAL_TOL: f64 = 1e-8;

/// `0.9/‖W‖₁`; keeps the Neumann series for `(I − λWᵀ)⁻¹` convergent.
pub fn default_katz_lambda(attacks: &Matrix) -> f64 {
    let norm = attacks.norm_1();
    if norm > 0.0 {
        0.9 / norm
    } else {
        0.9
    }
}

pub fn baseline_scores(graph: &WeightedInteractionGraph, kind: Baseline) -> Result<StrengthVector> {
    let w = graph.attacks();
    let n = w.dim();
    let incoming = w.column_sums();
    let scores = match kind {
        Baseline::HCategorizer => incoming.iter().map(|a| 1.0 / (1.0 + a)).collect(),
        Baseline::DefenseRatio => {
            let two_hop = w.matmul(w).column_sums();
            two_hop.iter().zip(&incoming).map(|(d, a)| (1.0 + d) / (1.0 + a)).collect()
        }
        Baseline::BinaryIndegree => (0..n)
            .map(|j| {
                let count = (0..n).filter(|&i| w[(i, j)] > 0.0).count();
                1.0 / (1.0 + count as f64)
            })
            .collect(),
        Baseline::MaxIncomingAttack => (0..n)
            .map(|j| {
                let max = (0..n).map(|i| w[(i, j)]).fold(0.0, f64::max);
                1.0 / (1.0 + max)
            })
            .collect(),
        Baseline::KatzAttack { lambda } => {
            let lambda = lambda.unwrap_or_else(|| default_katz_lambda(w));
            katz(w, lambda)?.into_iter().map(|c| 1.0 / c).collect()
        }
    };
    Ok(StrengthVector::new(scores))
}

fn katz(w: &Matrix, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(GraspError::InvalidConfig(format!("katz lambda must be > 0, got {lambda}")));
    }
    let n = w.dim();
    let system = Matrix::identity(n).add(&w.transpose().scale(-lambda));
    let ones = vec![1.0; n];
    let c = solve_dense(&system, &ones)?;
    let residual = (0..n)
        .map(|i| {
            let row: f64 = (0..n).map(|k| system[(i, k)] * c[k]).sum();
            (row - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if residual >= KATZ_RESIDUAL_TOL || c.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(GraspError::SingularSystem(format!(
            "katz solve residual {residual:e} with lambda {lambda}"
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ids, worked_example, DefenseMode};
    use crate::operator::apply_g;

    #[test]
    fn h_categorizer_on_worked_example() {
        let s = baseline_scores(&worked_example(), Baseline::HCategorizer).unwrap();
        let expected = [0.5, 1.0, 0.5, 1.0 / 1.3];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn defense_ratio_offsets_unit_attack() {
        let s = baseline_scores(&worked_example(), Baseline::DefenseRatio).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn defense_ratio_is_one_operator_step() {
        let g = worked_example();
        let dr = baseline_scores(&g, Baseline::DefenseRatio).unwrap();
        let step = apply_g(&g, &[1.0; 4], 1.0, 1.0).unwrap();
        for (a, b) in dr.iter().zip(step.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unattacked_scores_one_under_every_kind() {
        let g = worked_example();
        for kind in Baseline::ALL {
            let s = baseline_scores(&g, kind).unwrap();
            assert!((s[1] - 1.0).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn binary_and_max_incoming() {
        let g = worked_example();
        let b = baseline_scores(&g, Baseline::BinaryIndegree).unwrap();
        assert_eq!(&*b, &[0.5, 1.0, 0.5, 0.5]);
        let m = baseline_scores(&g, Baseline::MaxIncomingAttack).unwrap();
        assert!((m[3] - 1.0 / 1.3).abs() < 1e-12);
    }

    #[test]
    fn katz_matches_neumann_series() {
        let g = worked_example();
        let lambda = 0.5;
        let s = baseline_scores(&g, Baseline::KatzAttack { lambda: Some(lambda) }).unwrap();
        // Σ_k (λWᵀ)^k·1 summed until negligible
        let wt = g.attacks().transpose().scale(lambda);
        let mut term = vec![1.0; 4];
        let mut c = term.clone();
        for _ in 0..200 {
            term = (0..4).map(|i| (0..4).map(|k| wt[(i, k)] * term[k]).sum()).collect();
            c.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
        }
        for (got, ci) in s.iter().zip(c) {
            assert!((got - 1.0 / ci).abs() < 1e-12);
        }
    }

    #[test]
    fn katz_small_lambda_is_flat() {
        let g = worked_example();
        let s = baseline_scores(&g, Baseline::KatzAttack { lambda: Some(1e-6) }).unwrap();
        let spread = s.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        assert!(spread < 1e-4);
    }

    #[test]
    fn katz_singular_system_reported() {
        // λ = 1 on a 2-cycle of unit attacks makes I − λWᵀ singular
        let mut w = Matrix::zeros(2);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 1.0;
        let g = WeightedInteractionGraph::from_attacks(ids(&["a", "b"]), w, DefenseMode::WSquared).unwrap();
        assert!(matches!(
            baseline_scores(&g, Baseline::KatzAttack { lambda: Some(1.0) }),
            Err(GraspError::SingularSystem(_))
        ));
    }

    #[test]
    fn names_parse_back() {
        for kind in Baseline::ALL {
            assert_eq!(kind.name().parse::<Baseline>().unwrap().name(), kind.name());
        }
    }
}
