//! File formats: graph documents, pairwise score streams, ranking and trace
//! exports, and debate manifests.
//!
//! Every JSON document carries `"format_version": 1`. Floats are written with
//! shortest round-trip formatting, so reading a written graph reproduces its
//! matrices exactly.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{GraspError, Result};
use crate::graph::{derive_defense, ArgumentId, DefenseMode, DefenseProvenance, WeightedInteractionGraph};
use crate::matrix::Matrix;
use crate::ranking::Ranking;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArgumentEntry {
    Bare(String),
    Full {
        id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<Value>,
    },
}

impl ArgumentEntry {
    pub fn id(&self) -> &str {
        match self {
            ArgumentEntry::Bare(id) | ArgumentEntry::Full { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// On-disk graph. Without `defenses`, D is derived from W using
/// `defense_mode` (default `w_squared`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub format_version: u32,
    pub arguments: Vec<ArgumentEntry>,
    pub attacks: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defenses: Option<Vec<EdgeEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense_mode: Option<DefenseMode>,
}

fn edges(args: &[ArgumentId], m: &Matrix) -> Vec<EdgeEntry> {
    m.off_diagonal()
        .filter(|&(_, _, w)| w != 0.0)
        .map(|(i, j, w)| EdgeEntry { from: args[i].to_string(), to: args[j].to_string(), weight: w })
        .collect()
}

fn fill(index: &HashMap<&str, usize>, entries: &[EdgeEntry], n: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(n);
    let mut seen = HashSet::new();
    for e in entries {
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| GraspError::UnknownArgument(id.to_string()));
        let (i, j) = (lookup(&e.from)?, lookup(&e.to)?);
        if !seen.insert((i, j)) {
            return Err(GraspError::DuplicateEdge { from: e.from.clone(), to: e.to.clone() });
        }
        m[(i, j)] = e.weight;
    }
    Ok(m)
}

impl GraphDocument {
    pub fn from_graph(graph: &WeightedInteractionGraph) -> Self {
        let args = graph.arguments();
        // A derived D that was transformed afterwards (e.g. rescaled) is
        // written out explicitly.
        let (defenses, defense_mode) = match graph.provenance() {
            DefenseProvenance::Derived(mode) if derive_defense(graph.attacks(), mode) == *graph.defenses() => {
                (None, Some(mode))
            }
            _ => (Some(edges(args, graph.defenses())), None),
        };
        GraphDocument {
            format_version: FORMAT_VERSION,
            arguments: args.iter().map(|a| ArgumentEntry::Full { id: a.to_string(), meta: None }).collect(),
            attacks: edges(args, graph.attacks()),
            defenses,
            defense_mode,
        }
    }

    pub fn to_graph(&self) -> Result<WeightedInteractionGraph> {
        if self.format_version != FORMAT_VERSION {
            return Err(GraspError::Format(format!("unsupported format_version {}", self.format_version)));
        }
        let args = self.arguments.iter().map(|a| ArgumentId::new(a.id())).collect::<Result<Vec<_>>>()?;
        let n = args.len();
        let mut index = HashMap::with_capacity(n);
        for (i, a) in args.iter().enumerate() {
            if index.insert(a.as_str(), i).is_some() {
                return Err(GraspError::DuplicateArgumentId(a.to_string()));
            }
        }
        let w = fill(&index, &self.attacks, n)?;
        match (&self.defenses, self.defense_mode) {
            (Some(_), Some(_)) => Err(GraspError::Format("give either `defenses` or `defense_mode`, not both".into())),
            (Some(d), None) => WeightedInteractionGraph::with_defenses(args.clone(), w, fill(&index, d, n)?),
            (None, mode) => WeightedInteractionGraph::from_attacks(args.clone(), w, mode.unwrap_or_default()),
        }
    }
}

fn format_err(path: &Path, e: serde_json::Error) -> GraspError {
    GraspError::Format(format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GraspError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| GraspError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| GraspError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn graph_from_str(text: &str) -> Result<WeightedInteractionGraph> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraspError::Format(e.to_string()))?;
    doc.to_graph()
}

pub fn graph_to_string(graph: &WeightedInteractionGraph) -> Result<String> {
    to_json(&GraphDocument::from_graph(graph))
}

pub fn read_graph(path: &Path) -> Result<WeightedInteractionGraph> {
    let text = read_text(path)?;
    let doc: GraphDocument = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
    doc.to_graph()
}

pub fn write_graph(path: &Path, graph: &WeightedInteractionGraph) -> Result<()> {
    write_text(path, &graph_to_string(graph)?)
}

#[derive(Debug, Deserialize)]
struct PairwiseRecord {
    attacker: String,
    target: String,
    attack_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseIngest {
    pub graph: WeightedInteractionGraph,
    /// Records that filled an entry of W.
    pub records: usize,
    pub self_pairs_dropped: usize,
}

/// Fills W from `{"attacker", "target", "attack_score"}` lines.
///
/// With `arguments = None` the argument list is taken from the records in
/// first-appearance order. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn ingest_pairwise_scores<R: BufRead>(
    reader: R,
    arguments: Option<&[ArgumentId]>,
    mode: DefenseMode,
) -> Result<PairwiseIngest> {
    let mut parsed = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| GraspError::MalformedRecord { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairwiseRecord = serde_json::from_str(&line)
            .map_err(|e| GraspError::MalformedRecord { line: line_no, message: e.to_string() })?;
        parsed.push((line_no, rec));
    }

    let args: Vec<ArgumentId> = match arguments {
        Some(a) => a.to_vec(),
        None => {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for (line, rec) in &parsed {
                for id in [&rec.attacker, &rec.target] {
                    if seen.insert(id.clone()) {
                        let id = ArgumentId::new(id.as_str())
                            .map_err(|e| GraspError::MalformedRecord { line: *line, message: e.to_string() })?;
                        out.push(id);
                    }
                }
            }
            out
        }
    };
    let index: HashMap<&str, usize> = args.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let n = args.len();
    let mut w = Matrix::zeros(n);
    let mut seen = HashSet::new();
    let (mut records, mut self_pairs) = (0, 0);
    for (line, rec) in &parsed {
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| GraspError::UnknownArgumentAt { line: *line, id: id.to_string() })
        };
        let (i, j) = (lookup(&rec.attacker)?, lookup(&rec.target)?);
        if !(0.0..=1.0).contains(&rec.attack_score) {
            return Err(GraspError::ScoreOutOfRange { line: *line, score: rec.attack_score });
        }
        if i == j {
            self_pairs += 1;
            continue;
        }
        if !seen.insert((i, j)) {
            return Err(GraspError::DuplicatePair { line: *line, from: rec.attacker.clone(), to: rec.target.clone() });
        }
        w[(i, j)] = rec.attack_score;
        records += 1;
    }
    let graph = WeightedInteractionGraph::from_attacks(args, w, mode)?;
    Ok(PairwiseIngest { graph, records, self_pairs_dropped: self_pairs })
}

pub fn read_pairwise(path: &Path, arguments: Option<&[ArgumentId]>, mode: DefenseMode) -> Result<PairwiseIngest> {
    let file = fs::File::open(path).map_err(|e| GraspError::io(path, e))?;
    ingest_pairwise_scores(std::io::BufReader::new(file), arguments, mode).map_err(|e| match e {
        GraspError::MalformedRecord { line, message } => {
            GraspError::MalformedRecord { line, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub id: ArgumentId,
    pub score: f64,
}

/// Scores and ranking produced by one method on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// In graph argument order.
    #[serde(default)]
    pub scores: Vec<ScoreEntry>,
    pub ranking: Vec<ArgumentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl RankingReport {
    pub fn to_ranking(&self) -> Result<Ranking> {
        let r = Ranking::new(self.ranking.clone())?;
        Ok(match &self.method {
            Some(m) => r.with_label(m.clone()),
            None => r,
        })
    }
}

/// Per-iteration scores and 1-based ranks; row 0 is the initial vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub format_version: u32,
    pub method: String,
    pub arguments: Vec<ArgumentId>,
    pub scores: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<usize>>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Reads a ranking from a report object or a bare array of ids. The label is
/// the report's `method`, else the file stem.
pub fn read_ranking(path: &Path) -> Result<Ranking> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    ranking_from_value(value, &stem).map_err(|e| match e {
        GraspError::Format(m) => GraspError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn ranking_from_value(value: Value, default_label: &str) -> Result<Ranking> {
    let r = if value.is_array() {
        let ids: Vec<ArgumentId> = serde_json::from_value(value).map_err(|e| GraspError::Format(e.to_string()))?;
        Ranking::new(ids)?
    } else {
        let rep: RankingReport = serde_json::from_value(value).map_err(|e| GraspError::Format(e.to_string()))?;
        rep.to_ranking()?
    };
    Ok(if r.label().is_some() { r } else { r.with_label(default_label) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebateEntry {
    pub id: String,
    /// Argument order for pairwise sources; inferred when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arguments: Option<Vec<String>>,
    pub sources: Vec<SourceEntry>,
}

/// Debates with several sources each. Source paths are relative to the
/// manifest. `.jsonl` sources are pairwise score streams; `.json` sources are
/// graph documents or ranking files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense_mode: Option<DefenseMode>,
    pub debates: Vec<DebateEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceData {
    Graph(WeightedInteractionGraph),
    Ranking(Ranking),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSource {
    pub label: String,
    pub data: SourceData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDebate {
    pub id: String,
    pub sources: Vec<LoadedSource>,
}

/// Loads a `.jsonl` pairwise stream, a graph document or a ranking file.
pub fn load_source(path: &Path, arguments: Option<&[ArgumentId]>, mode: DefenseMode) -> Result<SourceData> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return Ok(SourceData::Graph(read_pairwise(path, arguments, mode)?.graph));
    }
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
    if value.get("attacks").is_some() {
        let doc: GraphDocument = serde_json::from_value(value).map_err(|e| format_err(path, e))?;
        return Ok(SourceData::Graph(doc.to_graph()?));
    }
    ranking_from_value(value, "").map(SourceData::Ranking)
}

/// Loads every source of every debate; debates come back sorted by id.
pub fn load_manifest(path: &Path) -> Result<Vec<LoadedDebate>> {
    let text = read_text(path)?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(GraspError::Format(format!("unsupported format_version {}", manifest.format_version)));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mode = manifest.defense_mode.unwrap_or_default();
    let mut by_id: BTreeMap<String, LoadedDebate> = BTreeMap::new();
    for d in &manifest.debates {
        let args = d
            .arguments
            .as_ref()
            .map(|a| a.iter().map(|s| ArgumentId::new(s.as_str())).collect::<Result<Vec<_>>>())
            .transpose()?;
        let mut sources = Vec::with_capacity(d.sources.len());
        for s in &d.sources {
            let data = match load_source(&base.join(&s.path), args.as_deref(), mode)? {
                SourceData::Ranking(r) => SourceData::Ranking(r.with_label(s.label.clone())),
                g => g,
            };
            sources.push(LoadedSource { label: s.label.clone(), data });
        }
        if by_id.insert(d.id.clone(), LoadedDebate { id: d.id.clone(), sources }).is_some() {
            return Err(GraspError::Format(format!("duplicate debate id `{}`", d.id)));
        }
    }
    Ok(by_id.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_stats, ids, worked_example};

    #[test]
    fn graph_round_trip_is_exact() {
        let g = worked_example();
        let back = graph_from_str(&graph_to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);

        let w = Matrix::from_fn(3, |i, j| if i == j { 0.0 } else { 0.1 + (i * 3 + j) as f64 / 7.0 / 3.0 });
        let d = Matrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 / 3.0 + j as f64 });
        let g = WeightedInteractionGraph::with_defenses(ids(&["x", "y", "z"]), w, d).unwrap();
        let back = graph_from_str(&graph_to_string(&g).unwrap()).unwrap();
        assert_eq!(back.attacks().max_abs_diff(g.attacks()), 0.0);
        assert_eq!(back.defenses().max_abs_diff(g.defenses()), 0.0);
        assert_eq!(back.provenance(), DefenseProvenance::Explicit);
    }

    #[test]
    fn bare_argument_ids_and_default_mode() {
        let g = graph_from_str(
            r#"{"format_version":1,"arguments":["a","b","c"],
                "attacks":[{"from":"c","to":"b","weight":1.0},{"from":"b","to":"a","weight":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(g.provenance(), DefenseProvenance::Derived(DefenseMode::WSquared));
        assert_eq!(g.defenses()[(2, 0)], 0.5);
    }

    #[test]
    fn graph_document_errors() {
        let dup = r#"{"format_version":1,"arguments":["a","b"],
            "attacks":[{"from":"a","to":"b","weight":0.1},{"from":"a","to":"b","weight":0.2}]}"#;
        assert!(matches!(graph_from_str(dup), Err(GraspError::DuplicateEdge { .. })));
        let unknown = r#"{"format_version":1,"arguments":["a"],"attacks":[{"from":"a","to":"q","weight":0.1}]}"#;
        assert!(matches!(graph_from_str(unknown), Err(GraspError::UnknownArgument(_))));
        let version = r#"{"format_version":2,"arguments":[],"attacks":[]}"#;
        assert!(matches!(graph_from_str(version), Err(GraspError::Format(_))));
        let heavy = r#"{"format_version":1,"arguments":["a","b"],"attacks":[{"from":"a","to":"b","weight":1.5}]}"#;
        assert!(matches!(graph_from_str(heavy), Err(GraspError::WeightAboveOne { .. })));
    }

    fn ingest(text: &str, args: Option<&[ArgumentId]>) -> Result<PairwiseIngest> {
        ingest_pairwise_scores(text.as_bytes(), args, DefenseMode::WSquared)
    }

    #[test]
    fn three_records_over_four_arguments() {
        let args = ids(&["a", "b", "c", "d"]);
        let text = r#"{"attacker":"a","target":"b","attack_score":0.4}
{"attacker":"c","target":"d","attack_score":0.9}

{"attacker":"d","target":"a","attack_score":0.2}
"#;
        let out = ingest(text, Some(&args)).unwrap();
        assert_eq!(out.records, 3);
        assert_eq!(out.graph.attacks().iter().filter(|&(_, _, v)| v != 0.0).count(), 3);
        assert_eq!(out.graph.attacks()[(2, 3)], 0.9);
    }

    #[test]
    fn ingestion_errors_carry_lines() {
        let args = ids(&["a", "b"]);
        let e = ingest("{\"attacker\":\"a\",\"target\":\"b\",\"attack_score\":0.2}\n{\"attacker\":\"b\",\"target\":\"a\",\"attack_score\":1.3}", Some(&args));
        assert_eq!(e, Err(GraspError::ScoreOutOfRange { line: 2, score: 1.3 }));
        let e = ingest("{\"attacker\":\"a\",\"target\":\"z\",\"attack_score\":0.2}", Some(&args));
        assert!(matches!(e, Err(GraspError::UnknownArgumentAt { line: 1, .. })));
        let e = ingest("{\"attacker\":\"a\",\"target\":\"b\"}", Some(&args));
        assert!(matches!(e, Err(GraspError::MalformedRecord { line: 1, .. })));
        let e = ingest("not json", Some(&args));
        assert!(matches!(e, Err(GraspError::MalformedRecord { line: 1, .. })));
        let rec = "{\"attacker\":\"a\",\"target\":\"b\",\"attack_score\":0.2}\n";
        let e = ingest(&format!("{rec}{rec}"), Some(&args));
        assert!(matches!(e, Err(GraspError::DuplicatePair { line: 2, .. })));
    }

    #[test]
    fn self_pairs_are_dropped_and_counted() {
        let text = "{\"attacker\":\"a\",\"target\":\"a\",\"attack_score\":0.7}\n{\"attacker\":\"a\",\"target\":\"b\",\"attack_score\":0.7}";
        let out = ingest(text, None).unwrap();
        assert_eq!(out.self_pairs_dropped, 1);
        assert_eq!(out.records, 1);
        assert_eq!(out.graph.arguments(), ids(&["a", "b"]).as_slice());
    }

    #[test]
    fn full_record_set_is_fully_dense() {
        let names = ["p", "q", "r"];
        let mut text = String::new();
        for a in names {
            for b in names {
                if a != b {
                    text.push_str(&format!("{{\"attacker\":\"{a}\",\"target\":\"{b}\",\"attack_score\":0.5}}\n"));
                }
            }
        }
        let out = ingest(&text, None).unwrap();
        assert_eq!(graph_stats(out.graph.attacks(), 0.5).density_d, 1.0);
    }

    #[test]
    fn ranking_values() {
        let r = ranking_from_value(serde_json::json!(["b", "a"]), "file").unwrap();
        assert_eq!(r.label(), Some("file"));
        let r = ranking_from_value(
            serde_json::json!({"format_version": 1, "method": "grasp", "ranking": ["a", "b"]}),
            "file",
        )
        .unwrap();
        assert_eq!(r.label(), Some("grasp"));
        assert!(matches!(
            ranking_from_value(serde_json::json!(["a", "a"]), "f"),
            Err(GraspError::DuplicateArgumentId(_))
        ));
    }
}
