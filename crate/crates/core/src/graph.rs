//! Weighted interaction graphs: arguments plus an attack matrix `W` and a
//! defense matrix `D`.
//!
//! `W[i][j]` is the strength with which argument `i` attacks argument `j`
//! and lies in `[0, 1]`. `D[k][j]` is the extent to which `k` defends `j` and
//! is only required to be nonnegative. Both diagonals are forced to zero.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(GraspError::EmptyArgumentId);
        }
        Ok(ArgumentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArgumentId {
    /// Panics on the empty string; use [`ArgumentId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        ArgumentId::new(s).expect("argument id must be non-empty")
    }
}

/// Convenience for building id lists in tests and examples.
pub fn ids<S: AsRef<str>>(names: &[S]) -> Vec<ArgumentId> {
    names.iter().map(|s| ArgumentId::from(s.as_ref())).collect()
}

/// How a defense matrix is derived from the attack matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefenseMode {
    /// `D = W·W`: `k` defends `j` when `k` attacks an attacker of `j`.
    #[default]
    WSquared,
    /// `D = Wᵀ`: reciprocal attacks count as defense.
    WTranspose,
    /// `D = W⁴`.
    WFourth,
    /// `D = W² + ½·W⁴`.
    W2PlusHalfW4,
}

impl DefenseMode {
    pub const ALL: [DefenseMode; 4] = [
        DefenseMode::WSquared,
        DefenseMode::WTranspose,
        DefenseMode::WFourth,
        DefenseMode::W2PlusHalfW4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DefenseMode::WSquared => "w_squared",
            DefenseMode::WTranspose => "w_transpose",
            DefenseMode::WFourth => "w_fourth",
            DefenseMode::W2PlusHalfW4 => "w2_plus_half_w4",
        }
    }
}

impl fmt::Display for DefenseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DefenseMode {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        DefenseMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| GraspError::InvalidConfig(format!("unknown defense mode `{s}`")))
    }
}

/// Where a graph's defense matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefenseProvenance {
    Explicit,
    Derived(DefenseMode),
}

impl DefenseProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            DefenseProvenance::Explicit => "explicit",
            DefenseProvenance::Derived(mode) => mode.as_str(),
        }
    }
}

impl fmt::Display for DefenseProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DefenseProvenance {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "explicit" {
            Ok(DefenseProvenance::Explicit)
        } else {
            s.parse().map(DefenseProvenance::Derived)
        }
    }
}

impl Serialize for DefenseProvenance {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DefenseProvenance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInteractionGraph {
    arguments: Vec<ArgumentId>,
    attacks: Matrix,
    defenses: Matrix,
    provenance: DefenseProvenance,
}

/// Checks every graph invariant and returns the validated graph.
///
/// Diagonal entries are clamped to zero rather than rejected. Attack weights
/// must lie in `[0, 1]`, defense weights must be nonnegative, and both must
/// be finite.
pub fn validate_graph(
    arguments: Vec<ArgumentId>,
    mut attacks: Matrix,
    mut defenses: Matrix,
    provenance: DefenseProvenance,
) -> Result<WeightedInteractionGraph> {
    let n = arguments.len();
    let mut seen = HashSet::with_capacity(n);
    for id in &arguments {
        if !seen.insert(id) {
            return Err(GraspError::DuplicateArgumentId(id.to_string()));
        }
    }
    for m in [&attacks, &defenses] {
        if m.dim() != n {
            return Err(GraspError::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    attacks.zero_diagonal();
    defenses.zero_diagonal();
    check_attacks(&attacks)?;
    for (row, col, value) in defenses.iter() {
        check_entry(row, col, value)?;
    }
    Ok(WeightedInteractionGraph { arguments, attacks, defenses, provenance })
}

fn check_attacks(attacks: &Matrix) -> Result<()> {
    for (row, col, value) in attacks.iter() {
        check_entry(row, col, value)?;
        if value > 1.0 {
            return Err(GraspError::WeightAboveOne { row, col, value });
        }
    }
    Ok(())
}

fn check_entry(row: usize, col: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(GraspError::NonFiniteWeight { row, col });
    }
    if value < 0.0 {
        return Err(GraspError::NegativeWeight { row, col, value });
    }
    Ok(())
}

impl WeightedInteractionGraph {
    /// Validates `attacks` and derives the defense matrix with `mode`.
    pub fn from_attacks(arguments: Vec<ArgumentId>, mut attacks: Matrix, mode: DefenseMode) -> Result<Self> {
        if attacks.dim() != arguments.len() {
            return Err(GraspError::DimensionMismatch { expected: arguments.len(), found: attacks.dim() });
        }
        attacks.zero_diagonal();
        check_attacks(&attacks)?;
        let defenses = derive_defense(&attacks, mode);
        validate_graph(arguments, attacks, defenses, DefenseProvenance::Derived(mode))
    }

    pub fn with_defenses(arguments: Vec<ArgumentId>, attacks: Matrix, defenses: Matrix) -> Result<Self> {
        validate_graph(arguments, attacks, defenses, DefenseProvenance::Explicit)
    }

    pub fn arguments(&self) -> &[ArgumentId] {
        &self.arguments
    }

    pub fn attacks(&self) -> &Matrix {
        &self.attacks
    }

    pub fn defenses(&self) -> &Matrix {
        &self.defenses
    }

    pub fn provenance(&self) -> DefenseProvenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    pub fn index_of(&self, id: &ArgumentId) -> Option<usize> {
        self.arguments.iter().position(|a| a == id)
    }

    /// Indices of arguments with at least one positive incoming attack.
    pub fn attacked(&self) -> Vec<bool> {
        self.attacks.column_sums().into_iter().map(|s| s > 0.0).collect()
    }

    /// Replaces the attack matrix and re-derives `D` when it was derived.
    pub fn map_attacks(&self, f: impl FnOnce(&Matrix) -> Matrix) -> Result<Self> {
        let attacks = f(&self.attacks);
        match self.provenance {
            DefenseProvenance::Derived(mode) => {
                Self::from_attacks(self.arguments.clone(), attacks, mode)
            }
            DefenseProvenance::Explicit => {
                Self::with_defenses(self.arguments.clone(), attacks, self.defenses.clone())
            }
        }
    }

    /// Replaces the defense matrix, keeping the provenance tag.
    pub fn map_defenses(&self, f: impl FnOnce(&Matrix) -> Matrix) -> Result<Self> {
        validate_graph(
            self.arguments.clone(),
            self.attacks.clone(),
            f(&self.defenses),
            self.provenance,
        )
    }

    /// Re-derives `D` from `W` with a different mode.
    pub fn rederive(&self, mode: DefenseMode) -> Result<Self> {
        Self::from_attacks(self.arguments.clone(), self.attacks.clone(), mode)
    }
}

pub fn derive_defense(attacks: &Matrix, mode: DefenseMode) -> Matrix {
    let mut d = match mode {
        DefenseMode::WSquared => attacks.matmul(attacks),
        DefenseMode::WTranspose => attacks.transpose(),
        DefenseMode::WFourth => {
            let sq = attacks.matmul(attacks);
            sq.matmul(&sq)
        }
        DefenseMode::W2PlusHalfW4 => {
            let sq = attacks.matmul(attacks);
            let fourth = sq.matmul(&sq);
            sq.add(&fourth.scale(0.5))
        }
    };
    d.zero_diagonal();
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// Divide by the largest entry.
    LInf,
    /// Divide by the induced 1-norm (largest column sum).
    L1,
}

impl FromStr for Normalization {
    type Err = GraspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "l_inf" => Ok(Normalization::LInf),
            "l_1" => Ok(Normalization::L1),
            _ => Err(GraspError::InvalidConfig(format!("unknown normalization `{s}`"))),
        }
    }
}

pub fn normalize_attacks(attacks: &Matrix, scheme: Normalization) -> Matrix {
    let divisor = match scheme {
        Normalization::None => return attacks.clone(),
        Normalization::LInf => attacks.max_entry(),
        Normalization::L1 => attacks.norm_1(),
    };
    if attacks.is_zero() || divisor <= 0.0 {
        return attacks.clone();
    }
    attacks.scale(1.0 / divisor)
}

/// Divides `D` by its largest entry when that entry exceeds 1.
pub fn rescale_defense(defenses: &Matrix) -> Matrix {
    let max = defenses.max_entry();
    if max > 1.0 {
        defenses.scale(1.0 / max)
    } else {
        defenses.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub density_d: f64,
    pub mean_mu: f64,
    pub threshold_tau: f64,
    pub thresholded_edge_count: usize,
}

/// Density and mean positive weight over off-diagonal entries, computed
/// before thresholding, plus the number of entries strictly above `threshold`.
pub fn graph_stats(attacks: &Matrix, threshold: f64) -> GraphStats {
    let n = attacks.dim();
    let mut positive = 0usize;
    let mut positive_sum = 0.0;
    let mut above = 0usize;
    for (_, _, w) in attacks.off_diagonal() {
        if w > 0.0 {
            positive += 1;
            positive_sum += w;
        }
        if w > threshold {
            above += 1;
        }
    }
    let pairs = n * n.saturating_sub(1);
    GraphStats {
        density_d: if pairs == 0 { 0.0 } else { positive as f64 / pairs as f64 },
        mean_mu: if positive == 0 { 0.0 } else { positive_sum / positive as f64 },
        threshold_tau: threshold,
        thresholded_edge_count: above,
    }
}

/// Pearson correlation of the off-diagonal entries of two matrices.
///
/// Returns `Ok(None)` when either vector has zero variance.
pub fn matrix_pearson(a: &Matrix, b: &Matrix) -> Result<Option<f64>> {
    if a.dim() != b.dim() {
        return Err(GraspError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let xs: Vec<f64> = a.off_diagonal().map(|(_, _, v)| v).collect();
    let ys: Vec<f64> = b.off_diagonal().map(|(_, _, v)| v).collect();
    Ok(pearson(&xs, &ys))
}

pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// The four-argument graph used throughout the documentation and tests:
/// `a3` attacks `a1`, `a4` attacks `a3`, and `a2` weakly attacks `a4`.
pub fn worked_example() -> WeightedInteractionGraph {
    let mut w = Matrix::zeros(4);
    w[(2, 0)] = 1.0;
    w[(3, 2)] = 1.0;
    w[(1, 3)] = 0.3;
    WeightedInteractionGraph::from_attacks(ids(&["a1", "a2", "a3", "a4"]), w, DefenseMode::WSquared)
        .expect("worked example is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 0.3], vec![0.0, 0.0]]).unwrap()
    }

    #[test]
    fn valid_graph_accepted_unchanged() {
        let g = WeightedInteractionGraph::with_defenses(ids(&["a", "b"]), two_node(), Matrix::zeros(2))
            .unwrap();
        assert_eq!(g.attacks(), &two_node());
        assert_eq!(g.provenance(), DefenseProvenance::Explicit);
    }

    #[test]
    fn diagonal_is_clamped() {
        let mut w = two_node();
        w[(0, 0)] = 0.5;
        let g = WeightedInteractionGraph::with_defenses(ids(&["a", "b"]), w, Matrix::zeros(2)).unwrap();
        assert_eq!(g.attacks()[(0, 0)], 0.0);
        assert_eq!(g.attacks()[(0, 1)], 0.3);
    }

    #[test]
    fn weight_above_one_rejected() {
        let mut w = two_node();
        w[(1, 0)] = 1.2;
        let err = WeightedInteractionGraph::from_attacks(ids(&["a", "b"]), w, DefenseMode::WSquared)
            .unwrap_err();
        assert!(matches!(err, GraspError::WeightAboveOne { row: 1, col: 0, .. }));
    }

    #[test]
    fn negative_and_duplicate_and_mismatch_rejected() {
        let mut w = two_node();
        w[(1, 0)] = -0.1;
        assert!(matches!(
            WeightedInteractionGraph::from_attacks(ids(&["a", "b"]), w, DefenseMode::WSquared),
            Err(GraspError::NegativeWeight { .. })
        ));
        assert!(matches!(
            WeightedInteractionGraph::from_attacks(ids(&["a", "a"]), two_node(), DefenseMode::WSquared),
            Err(GraspError::DuplicateArgumentId(_))
        ));
        assert!(matches!(
            WeightedInteractionGraph::from_attacks(ids(&["a", "b", "c"]), two_node(), DefenseMode::WSquared),
            Err(GraspError::DimensionMismatch { expected: 3, found: 2 })
        ));
        let mut d = Matrix::zeros(2);
        d[(0, 1)] = -1.0;
        assert!(matches!(
            WeightedInteractionGraph::with_defenses(ids(&["a", "b"]), two_node(), d),
            Err(GraspError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn defense_may_exceed_one() {
        let mut d = Matrix::zeros(2);
        d[(0, 1)] = 3.0;
        assert!(WeightedInteractionGraph::with_defenses(ids(&["a", "b"]), two_node(), d).is_ok());
    }

    #[test]
    fn worked_example_two_hop_defense() {
        let g = worked_example();
        let d = g.defenses();
        assert_eq!(d[(3, 0)], 1.0);
        assert!((d[(1, 2)] - 0.3).abs() < 1e-15);
        let nonzero = d.iter().filter(|&(_, _, v)| v != 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn zero_attacks_give_zero_defense_in_every_mode() {
        for mode in DefenseMode::ALL {
            assert!(derive_defense(&Matrix::zeros(4), mode).is_zero());
        }
    }

    #[test]
    fn transpose_mode_and_mixed_mode() {
        let g = worked_example();
        let w = g.attacks();
        let dt = derive_defense(w, DefenseMode::WTranspose);
        assert_eq!(dt[(0, 2)], 1.0);
        let mixed = derive_defense(w, DefenseMode::W2PlusHalfW4);
        let sq = derive_defense(w, DefenseMode::WSquared);
        let fourth = derive_defense(w, DefenseMode::WFourth);
        assert!(mixed.max_abs_diff(&sq.add(&fourth.scale(0.5))) < 1e-15);
    }

    #[test]
    fn l_inf_normalization_hits_one() {
        let w = Matrix::from_rows(&[vec![0.0, 0.8, 0.2], vec![0.4, 0.0, 0.1], vec![0.0, 0.3, 0.0]]).unwrap();
        let n = normalize_attacks(&w, Normalization::LInf);
        assert_eq!(n.max_entry(), 1.0);
        assert_eq!(normalize_attacks(&w, Normalization::None), w);
    }

    #[test]
    fn l1_normalization_on_worked_example_is_identity() {
        let w = worked_example().attacks().clone();
        assert_eq!(w.column_sums(), vec![1.0, 0.0, 1.0, 0.3]);
        assert_eq!(w.norm_1(), 1.0);
        assert_eq!(normalize_attacks(&w, Normalization::L1), w);
    }

    #[test]
    fn zero_matrix_survives_every_normalization() {
        let z = Matrix::zeros(3);
        for s in [Normalization::None, Normalization::LInf, Normalization::L1] {
            assert!(normalize_attacks(&z, s).is_zero());
        }
    }

    #[test]
    fn rescale_defense_cases() {
        let mut d = Matrix::zeros(2);
        d[(0, 1)] = 2.0;
        d[(1, 0)] = 0.5;
        assert_eq!(rescale_defense(&d).max_entry(), 1.0);
        assert!(rescale_defense(&Matrix::zeros(3)).is_zero());
        let ex = worked_example();
        assert_eq!(&rescale_defense(ex.defenses()), ex.defenses());
    }

    #[test]
    fn stats_uniform_matrix() {
        let w = Matrix::from_fn(4, |i, j| if i == j { 0.0 } else { 0.5 });
        let s = graph_stats(&w, 0.6);
        assert_eq!(s.density_d, 1.0);
        assert_eq!(s.mean_mu, 0.5);
        assert_eq!(s.thresholded_edge_count, 0);
    }

    #[test]
    fn stats_worked_example() {
        let s = graph_stats(worked_example().attacks(), 0.6);
        assert_eq!(s.density_d, 0.25);
        assert!((s.mean_mu - 2.3 / 3.0).abs() < 1e-12);
        assert_eq!(s.thresholded_edge_count, 2);
    }

    #[test]
    fn stats_zero_matrix() {
        let s = graph_stats(&Matrix::zeros(5), 0.5);
        assert_eq!((s.density_d, s.mean_mu, s.thresholded_edge_count), (0.0, 0.0, 0));
    }

    #[test]
    fn pearson_self_and_complement() {
        let a = Matrix::from_fn(4, |i, j| if i == j { 0.0 } else { ((i * 3 + j) % 5) as f64 / 5.0 });
        let b = Matrix::from_fn(4, |i, j| if i == j { 0.0 } else { 1.0 - a[(i, j)] });
        assert!((matrix_pearson(&a, &a).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert!((matrix_pearson(&a, &b).unwrap().unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(matrix_pearson(&a, &Matrix::zeros(4)).unwrap(), None);
        assert!(matrix_pearson(&a, &Matrix::zeros(3)).is_err());
    }

    #[test]
    fn pearson_matches_textbook_formula() {
        let a = Matrix::from_fn(4, |i, j| ((i * 7 + j * 5) % 9) as f64 / 9.0);
        let b = Matrix::from_fn(4, |i, j| ((i * 2 + j * 11 + 3) % 7) as f64 / 7.0);
        // textbook: cov / (sd_x sd_y) with population moments
        let xs: Vec<f64> = a.off_diagonal().map(|t| t.2).collect();
        let ys: Vec<f64> = b.off_diagonal().map(|t| t.2).collect();
        let n = xs.len() as f64;
        let ex = xs.iter().sum::<f64>() / n;
        let ey = ys.iter().sum::<f64>() / n;
        let exy = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / n;
        let exx = xs.iter().map(|x| x * x).sum::<f64>() / n;
        let eyy = ys.iter().map(|y| y * y).sum::<f64>() / n;
        let expected = (exy - ex * ey) / ((exx - ex * ex).sqrt() * (eyy - ey * ey).sqrt());
        let got = matrix_pearson(&a, &b).unwrap().unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn provenance_round_trips_as_string() {
        for p in [
            DefenseProvenance::Explicit,
            DefenseProvenance::Derived(DefenseMode::W2PlusHalfW4),
        ] {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<DefenseProvenance>(&s).unwrap(), p);
        }
    }
}
