//! Violation metrics for critical ranking conditions and the synthetic suite
//! runner that compares propagation variants with the closed-form baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_scores, Baseline};
use crate::error::{GraspError, Result};
use crate::generators::{generate_archetype, generate_random_dag, Axiom, CriticalRankingCondition, GeneratedGraph, Motif};
use crate::graph::{ArgumentId, DefenseMode, WeightedInteractionGraph};
use crate::operator::{solve, GraspConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxiomCount {
    pub total: usize,
    pub violated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub total_crcs: usize,
    pub violated: usize,
    pub violation_rate: f64,
    pub mean_severity: f64,
    /// Sum of severities, kept so reports can be pooled across graphs.
    pub severity_sum: f64,
    pub per_axiom: BTreeMap<Axiom, AxiomCount>,
}

/// Checks every `stronger ≻ weaker` condition against `scores`.
///
/// A tie counts as a violation. The severity of a violation is
/// `(s_weaker − s_stronger)` divided by the score range of the graph, or 1
/// when all scores are equal.
pub fn evaluate_crcs(
    scores: &[f64],
    arguments: &[ArgumentId],
    crcs: &[CriticalRankingCondition],
) -> Result<ViolationReport> {
    if scores.len() != arguments.len() {
        return Err(GraspError::DimensionMismatch { expected: arguments.len(), found: scores.len() });
    }
    let index: BTreeMap<&ArgumentId, usize> = arguments.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let lookup = |id: &ArgumentId| index.get(id).copied().ok_or_else(|| GraspError::UnknownArgument(id.to_string()));
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;

    let mut violated = 0;
    let mut severity_sum = 0.0;
    let mut per_axiom: BTreeMap<Axiom, AxiomCount> = BTreeMap::new();
    for crc in crcs {
        let (s, w) = (scores[lookup(&crc.stronger)?], scores[lookup(&crc.weaker)?]);
        let entry = per_axiom.entry(crc.axiom).or_default();
        entry.total += 1;
        if s <= w {
            violated += 1;
            entry.violated += 1;
            severity_sum += if range > 0.0 { ((w - s) / range).clamp(0.0, 1.0) } else { 1.0 };
        }
    }
    let total = crcs.len();
    Ok(ViolationReport {
        total_crcs: total,
        violated,
        violation_rate: if total == 0 { 0.0 } else { violated as f64 / total as f64 },
        mean_severity: if violated == 0 { 0.0 } else { severity_sum / violated as f64 },
        severity_sum,
        per_axiom,
    })
}

/// Gains used by a propagation method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainPolicy {
    Fixed { alpha: f64, beta: f64 },
    /// `α = β = 1/(4·max(‖W‖₁, ‖D‖₁))`, which satisfies both contraction
    /// bounds at once.
    TheoremBound,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Grasp { defense: DefenseMode, gains: GainPolicy, gamma: f64, max_iters: usize, tol: f64 },
    Baseline(Baseline),
}

/// Serialized form of a method in a suite config.
///
/// `method` is `"grasp"` or a baseline name. Unset GRASP fields fall back to
/// the tuned preset `(1.0, 0.25, 0.6)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense: Option<DefenseMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub theorem_bound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl MethodSpec {
    pub fn grasp(defense: DefenseMode) -> Self {
        MethodSpec { method: "grasp".into(), defense: Some(defense), ..Default::default() }
    }

    pub fn baseline(kind: Baseline) -> Self {
        MethodSpec { method: kind.name().into(), ..Default::default() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn resolve(&self) -> Result<Method> {
        if self.method == "grasp" {
            if self.lambda.is_some() {
                return Err(GraspError::InvalidConfig("`lambda` applies to katz_attack only".into()));
            }
            let preset = GraspConfig::tuned_preset();
            let gains = if self.theorem_bound {
                if self.alpha.is_some() || self.beta.is_some() {
                    return Err(GraspError::InvalidConfig("`theorem_bound` excludes explicit alpha/beta".into()));
                }
                GainPolicy::TheoremBound
            } else {
                GainPolicy::Fixed { alpha: self.alpha.unwrap_or(preset.alpha), beta: self.beta.unwrap_or(preset.beta) }
            };
            let method = Method::Grasp {
                defense: self.defense.unwrap_or_default(),
                gains,
                gamma: self.gamma.unwrap_or(preset.gamma),
                max_iters: self.max_iters.unwrap_or(preset.max_iters),
                tol: self.tol.unwrap_or(preset.tol),
            };
            // surface parameter errors before any graph is generated
            let mut probe = GraspConfig::with_params(0.0, 0.0, 1.0);
            if let Method::Grasp { gamma, max_iters, tol, gains, .. } = &method {
                probe.gamma = *gamma;
                probe.max_iters = *max_iters;
                probe.tol = *tol;
                if let GainPolicy::Fixed { alpha, beta } = gains {
                    probe.alpha = *alpha;
                    probe.beta = *beta;
                }
            }
            probe.validate(0)?;
            return Ok(method);
        }
        let kind: Baseline = self.method.parse()?;
        if self.defense.is_some() || self.alpha.is_some() || self.beta.is_some() || self.gamma.is_some() || self.theorem_bound {
            return Err(GraspError::InvalidConfig(format!("GRASP parameters given for baseline `{}`", self.method)));
        }
        Ok(match (kind, self.lambda) {
            (Baseline::KatzAttack { .. }, lambda) => Method::Baseline(Baseline::KatzAttack { lambda }),
            (_, Some(_)) => return Err(GraspError::InvalidConfig("`lambda` applies to katz_attack only".into())),
            (k, None) => Method::Baseline(k),
        })
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        if self.method != "grasp" {
            return self.method.clone();
        }
        let mut label = format!("grasp[{}]", self.defense.unwrap_or_default());
        if self.theorem_bound {
            label.push_str("[theorem_bound]");
        } else if self.beta == Some(0.0) {
            label = "grasp[beta=0]".into();
        }
        label
    }
}

/// Scores produced by one method on one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub scores: Vec<f64>,
    /// `(iterations, converged)` for iterative methods.
    pub iterations: Option<(usize, bool)>,
}

pub fn run_method(graph: &WeightedInteractionGraph, method: &Method) -> Result<MethodRun> {
    match method {
        Method::Baseline(kind) => Ok(MethodRun { scores: baseline_scores(graph, *kind)?.into_inner(), iterations: None }),
        Method::Grasp { defense, gains, gamma, max_iters, tol } => {
            let g = graph.rederive(*defense)?;
            let (alpha, beta) = match *gains {
                GainPolicy::Fixed { alpha, beta } => (alpha, beta),
                GainPolicy::TheoremBound => {
                    let m = g.attacks().norm_1().max(g.defenses().norm_1());
                    let v = if m > 0.0 { 1.0 / (4.0 * m) } else { 1.0 };
                    (v, v)
                }
            };
            let mut cfg = GraspConfig::with_params(alpha, beta, *gamma);
            cfg.max_iters = *max_iters;
            cfg.tol = *tol;
            let fp = solve(&g, &cfg)?;
            Ok(MethodRun { scores: fp.scores.into_inner(), iterations: Some((fp.iterations, fp.converged)) })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifSuite {
    pub kinds: Vec<Motif>,
    pub count_per_kind: usize,
    #[serde(default = "MotifSuite::default_min")]
    pub min_size: usize,
    #[serde(default = "MotifSuite::default_max")]
    pub max_size: usize,
    pub noise: bool,
}

impl MotifSuite {
    fn default_min() -> usize {
        4
    }

    fn default_max() -> usize {
        6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagSuite {
    pub n: usize,
    pub edge_probs: Vec<f64>,
    pub count_per_prob: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motifs: Option<MotifSuite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dags: Option<DagSuite>,
    pub methods: Vec<MethodSpec>,
}

impl SuiteConfig {
    /// Four noisy motifs × 25, 20 random DAGs at each of p = 0.1 and 0.3, and
    /// the full method lineup.
    pub fn standard() -> Self {
        SuiteConfig {
            motifs: Some(MotifSuite {
                kinds: Motif::ARCHETYPES.to_vec(),
                count_per_kind: 25,
                min_size: 4,
                max_size: 6,
                noise: true,
            }),
            dags: Some(DagSuite { n: 20, edge_probs: vec![0.1, 0.3], count_per_prob: 20 }),
            methods: standard_methods(),
        }
    }

    pub fn noiseless_motifs(methods: Vec<MethodSpec>) -> Self {
        SuiteConfig {
            motifs: Some(MotifSuite {
                kinds: Motif::ARCHETYPES.to_vec(),
                count_per_kind: 25,
                min_size: 4,
                max_size: 6,
                noise: false,
            }),
            dags: None,
            methods,
        }
    }
}

/// Propagation variants over the defense constructions plus the attack-only
/// ablation, followed by every baseline.
pub fn standard_methods() -> Vec<MethodSpec> {
    let mut out: Vec<MethodSpec> = DefenseMode::ALL.iter().map(|&d| MethodSpec::grasp(d)).collect();
    out.push(MethodSpec { beta: Some(0.0), ..MethodSpec::grasp(DefenseMode::WSquared) });
    out.extend(Baseline::ALL.iter().map(|&b| MethodSpec::baseline(b)));
    out
}

/// Expands a suite into its graphs, in a fixed order.
pub fn generate_suite(suite: &SuiteConfig, seed: u64) -> Result<Vec<GeneratedGraph>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::new();
    if let Some(m) = &suite.motifs {
        if m.min_size > m.max_size {
            return Err(GraspError::InvalidConfig("motif min_size exceeds max_size".into()));
        }
        for &kind in &m.kinds {
            for _ in 0..m.count_per_kind {
                let size = rng.gen_range(m.min_size..=m.max_size);
                graphs.push(generate_archetype(kind, size, m.noise, rng.gen())?);
            }
        }
    }
    if let Some(d) = &suite.dags {
        for &p in &d.edge_probs {
            for _ in 0..d.count_per_prob {
                graphs.push(generate_random_dag(d.n, p, rng.gen())?);
            }
        }
    }
    Ok(graphs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestbedRow {
    pub method: String,
    /// Per-graph violation fraction averaged over graphs with at least one CRC.
    pub violation_rate: f64,
    /// Mean severity over all violations.
    pub violation_severity: f64,
    /// Violated CRCs divided by all CRCs in the suite.
    pub pooled_violation_rate: f64,
    pub violated: usize,
    pub total_crcs: usize,
    pub mean_iterations: Option<f64>,
    pub convergence_fraction: Option<f64>,
    pub per_motif_rate: BTreeMap<Motif, f64>,
    pub per_axiom: BTreeMap<Axiom, AxiomCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestbedTable {
    pub seed: u64,
    pub graphs: usize,
    pub rows: Vec<TestbedRow>,
}

impl TestbedTable {
    pub fn row(&self, method: &str) -> Option<&TestbedRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}", "Method", "Viol.", "Sev.", "Iter.", "Conv.");
        for r in &self.rows {
            let iter = r.mean_iterations.map_or("--".to_string(), |v| format!("{v:.1}"));
            let conv = r.convergence_fraction.map_or("--".to_string(), |v| format!("{:.0}%", v * 100.0));
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.3}  {:>7.3}  {:>7}  {:>7}",
                r.method, r.violation_rate, r.violation_severity, iter, conv
            );
        }
        out
    }
}

/// Generates the suite and evaluates every method on every graph.
///
/// Results are merged in graph order so the table is a pure function of
/// `(suite, seed)`.
pub fn run_testbed(suite: &SuiteConfig, seed: u64) -> Result<TestbedTable> {
    let methods = suite.methods.iter().map(|m| Ok((m.display_label(), m.resolve()?))).collect::<Result<Vec<_>>>()?;
    let graphs = generate_suite(suite, seed)?;
    if graphs.is_empty() {
        return Ok(TestbedTable { seed, graphs: 0, rows: Vec::new() });
    }
    let mut rows = Vec::with_capacity(methods.len());
    for (label, method) in &methods {
        let mut rates = Vec::new();
        let (mut violated, mut total, mut severity_sum) = (0usize, 0usize, 0.0);
        let mut iterations = Vec::new();
        let mut per_motif: BTreeMap<Motif, (usize, usize)> = BTreeMap::new();
        let mut per_axiom: BTreeMap<Axiom, AxiomCount> = BTreeMap::new();
        for g in &graphs {
            let run = run_method(&g.graph, method)?;
            let report = evaluate_crcs(&run.scores, g.graph.arguments(), &g.crcs)?;
            if report.total_crcs > 0 {
                rates.push(report.violation_rate);
            }
            violated += report.violated;
            total += report.total_crcs;
            severity_sum += report.severity_sum;
            if let Some(kind) = g.crcs.first().map(|c| c.motif) {
                let e = per_motif.entry(kind).or_default();
                e.0 += report.violated;
                e.1 += report.total_crcs;
            }
            for (axiom, count) in report.per_axiom {
                let e = per_axiom.entry(axiom).or_default();
                e.total += count.total;
                e.violated += count.violated;
            }
            if let Some(it) = run.iterations {
                iterations.push(it);
            }
        }
        let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        rows.push(TestbedRow {
            method: label.clone(),
            violation_rate: mean(&rates),
            violation_severity: if violated == 0 { 0.0 } else { severity_sum / violated as f64 },
            pooled_violation_rate: if total == 0 { 0.0 } else { violated as f64 / total as f64 },
            violated,
            total_crcs: total,
            mean_iterations: (!iterations.is_empty())
                .then(|| iterations.iter().map(|&(i, _)| i as f64).sum::<f64>() / iterations.len() as f64),
            convergence_fraction: (!iterations.is_empty())
                .then(|| iterations.iter().filter(|(_, c)| *c).count() as f64 / iterations.len() as f64),
            per_motif_rate: per_motif.into_iter().map(|(k, (v, t))| (k, v as f64 / t as f64)).collect(),
            per_axiom,
        });
    }
    Ok(TestbedTable { seed, graphs: graphs.len(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ids;

    fn crc(s: &str, w: &str) -> CriticalRankingCondition {
        CriticalRankingCondition { stronger: s.into(), weaker: w.into(), axiom: Axiom::S2, motif: Motif::Chain }
    }

    #[test]
    fn satisfied_conditions() {
        let r = evaluate_crcs(&[1.0, 0.5], &ids(&["a", "b"]), &[crc("a", "b")]).unwrap();
        assert_eq!((r.violation_rate, r.mean_severity), (0.0, 0.0));
    }

    #[test]
    fn ties_violate_with_unit_severity() {
        let r = evaluate_crcs(&[0.7; 3], &ids(&["a", "b", "c"]), &[crc("a", "b"), crc("c", "a")]).unwrap();
        assert_eq!(r.violated, 2);
        assert_eq!(r.violation_rate, 1.0);
        assert_eq!(r.mean_severity, 1.0);
    }

    #[test]
    fn normalized_margin() {
        let r = evaluate_crcs(&[0.2, 0.5, 1.0], &ids(&["a1", "a2", "a3"]), &[crc("a1", "a2")]).unwrap();
        assert_eq!(r.violation_rate, 1.0);
        assert!((r.mean_severity - 0.375).abs() < 1e-12);
        assert_eq!(r.per_axiom[&Axiom::S2], AxiomCount { total: 1, violated: 1 });
    }

    #[test]
    fn unknown_argument_in_crc() {
        assert!(matches!(
            evaluate_crcs(&[1.0], &ids(&["a"]), &[crc("a", "zz")]),
            Err(GraspError::UnknownArgument(_))
        ));
    }

    #[test]
    fn empty_suite_gives_empty_table() {
        let suite = SuiteConfig { motifs: None, dags: None, methods: standard_methods() };
        let t = run_testbed(&suite, 1).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.graphs, 0);
    }

    #[test]
    fn noiseless_motifs_with_theorem_bound_gains_have_no_violations() {
        let spec = MethodSpec { theorem_bound: true, gamma: Some(1.0), ..MethodSpec::grasp(DefenseMode::WSquared) };
        let t = run_testbed(&SuiteConfig::noiseless_motifs(vec![spec]), 3).unwrap();
        assert_eq!(t.rows[0].violated, 0);
        assert_eq!(t.rows[0].convergence_fraction, Some(1.0));
    }

    #[test]
    fn method_spec_resolution() {
        assert!(matches!(MethodSpec::grasp(DefenseMode::WFourth).resolve().unwrap(), Method::Grasp { .. }));
        let katz = MethodSpec { lambda: Some(0.1), ..MethodSpec::baseline(Baseline::KatzAttack { lambda: None }) };
        assert_eq!(katz.resolve().unwrap(), Method::Baseline(Baseline::KatzAttack { lambda: Some(0.1) }));
        let bad = MethodSpec { alpha: Some(1.0), ..MethodSpec::baseline(Baseline::HCategorizer) };
        assert!(bad.resolve().is_err());
        let bad_gamma = MethodSpec { gamma: Some(0.0), ..MethodSpec::grasp(DefenseMode::WSquared) };
        assert!(bad_gamma.resolve().is_err());
        assert!(MethodSpec { method: "pagerank".into(), ..Default::default() }.resolve().is_err());
    }

    #[test]
    fn labels() {
        let labels: Vec<String> = standard_methods().iter().map(|m| m.display_label()).collect();
        assert_eq!(labels[0], "grasp[w_squared]");
        assert_eq!(labels[4], "grasp[beta=0]");
        assert_eq!(labels[5], "h_categorizer");
    }

    #[test]
    fn suite_config_json_shape() {
        let json = r#"{
            "motifs": {"kinds": ["chain", "fork"], "count_per_kind": 2, "noise": true},
            "dags": {"n": 8, "edge_probs": [0.3], "count_per_prob": 1},
            "methods": [{"method": "grasp", "defense": "w_squared", "alpha": 1.0},
                        {"method": "katz_attack", "lambda": 0.05}]
        }"#;
        let suite: SuiteConfig = serde_json::from_str(json).unwrap();
        let t = run_testbed(&suite, 11).unwrap();
        assert_eq!(t.graphs, 5);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[1].mean_iterations.is_none());
        assert!(t.to_text().contains("katz_attack"));
    }
}
