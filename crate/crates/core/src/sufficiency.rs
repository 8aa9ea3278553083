//! Boolean structural sufficiency over explicit attack and support relations.
//!
//! An attack `(b, a)` is neutralized when some `c` attacks `b`; an argument
//! is structurally sufficient when every attack on it is neutralized.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};
use crate::graph::{ArgumentId, WeightedInteractionGraph};

pub type Edge = (ArgumentId, ArgumentId);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArgumentationStructure {
    arguments: BTreeSet<ArgumentId>,
    attacks: BTreeSet<Edge>,
    supports: BTreeSet<Edge>,
}

impl ArgumentationStructure {
    pub fn new(
        arguments: impl IntoIterator<Item = ArgumentId>,
        attacks: impl IntoIterator<Item = Edge>,
        supports: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut s = ArgumentationStructure { arguments: arguments.into_iter().collect(), ..Default::default() };
        for (from, to) in attacks {
            s.add_attack(from, to)?;
        }
        for (from, to) in supports {
            s.check_known(&from)?;
            s.check_known(&to)?;
            s.supports.insert((from, to));
        }
        Ok(s)
    }

    /// Attack relation of all positive off-diagonal weights; no supports.
    pub fn from_graph(graph: &WeightedInteractionGraph) -> Self {
        let args = graph.arguments();
        let attacks = graph
            .attacks()
            .off_diagonal()
            .filter(|&(_, _, w)| w > 0.0)
            .map(|(i, j, _)| (args[i].clone(), args[j].clone()))
            .collect();
        ArgumentationStructure { arguments: args.iter().cloned().collect(), attacks, supports: BTreeSet::new() }
    }

    fn check_known(&self, id: &ArgumentId) -> Result<()> {
        if self.arguments.contains(id) {
            Ok(())
        } else {
            Err(GraspError::UnknownArgument(id.to_string()))
        }
    }

    pub fn add_attack(&mut self, from: ArgumentId, to: ArgumentId) -> Result<()> {
        self.check_known(&from)?;
        self.check_known(&to)?;
        if from == to {
            return Err(GraspError::InvalidConfig(format!("self-attack on `{from}`")));
        }
        self.attacks.insert((from, to));
        Ok(())
    }

    pub fn arguments(&self) -> &BTreeSet<ArgumentId> {
        &self.arguments
    }

    pub fn attacks(&self) -> &BTreeSet<Edge> {
        &self.attacks
    }

    pub fn supports(&self) -> &BTreeSet<Edge> {
        &self.supports
    }

    pub fn attackers<'a>(&'a self, a: &'a ArgumentId) -> impl Iterator<Item = &'a ArgumentId> + 'a {
        self.attacks.iter().filter(move |(_, t)| t == a).map(|(b, _)| b)
    }

    pub fn is_attacked(&self, a: &ArgumentId) -> bool {
        self.attackers(a).next().is_some()
    }

    /// True when `(b, a)` is an attack and `b` is itself attacked.
    pub fn is_neutralized(&self, b: &ArgumentId, a: &ArgumentId) -> bool {
        self.attacks.contains(&(b.clone(), a.clone())) && self.is_attacked(b)
    }

    pub fn is_structurally_sufficient(&self, a: &ArgumentId) -> Result<bool> {
        self.check_known(a)?;
        Ok(self.attackers(a).all(|b| self.is_attacked(b)))
    }

    /// Whether `x` reaches `a` along attack or support edges.
    pub fn has_path(&self, x: &ArgumentId, a: &ArgumentId) -> bool {
        let mut succ: BTreeMap<&ArgumentId, Vec<&ArgumentId>> = BTreeMap::new();
        for (f, t) in self.attacks.iter().chain(&self.supports) {
            succ.entry(f).or_default().push(t);
        }
        let mut seen = BTreeSet::from([x]);
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            for &next in succ.get(v).into_iter().flatten() {
                if next == a {
                    return true;
                }
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        false
    }

    pub fn without(&self, x: &ArgumentId) -> Self {
        let keep = |(f, t): &&Edge| f != x && t != x;
        ArgumentationStructure {
            arguments: self.arguments.iter().filter(|a| *a != x).cloned().collect(),
            attacks: self.attacks.iter().filter(keep).cloned().collect(),
            supports: self.supports.iter().filter(keep).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxiomEvidence {
    pub holds: bool,
    /// Number of instances the axiom's premise applied to.
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

impl AxiomEvidence {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.counterexamples.push(describe());
        }
    }

    fn finish(mut self) -> Self {
        self.holds = self.counterexamples.is_empty();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub s1: AxiomEvidence,
    pub s2: AxiomEvidence,
    /// Attacks found neutralized while checking S2.
    pub s2_neutralized: Vec<Edge>,
    pub s3: AxiomEvidence,
    pub s4: AxiomEvidence,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.s1.holds && self.s2.holds && self.s3.holds && self.s4.holds
    }
}

pub fn check_axioms(structure: &ArgumentationStructure) -> AxiomReport {
    let mut s1 = AxiomEvidence::default();
    let mut s2 = AxiomEvidence::default();
    let mut s3 = AxiomEvidence::default();
    let mut s4 = AxiomEvidence::default();
    let mut neutralized = BTreeSet::new();
    let ss = |a: &ArgumentId| structure.is_structurally_sufficient(a).unwrap_or(false);

    for (b, a) in structure.attacks() {
        if !structure.is_attacked(b) {
            s1.record(!ss(a), || format!("S1: unneutralized attack ({b}, {a}) but `{a}` is sufficient"));
        }
        for c in structure.attackers(b) {
            let ok = structure.is_neutralized(b, a);
            s2.record(ok, || format!("S2: ({c}, {b}) and ({b}, {a}) but ({b}, {a}) not neutralized"));
            if ok {
                neutralized.insert((b.clone(), a.clone()));
            }
        }
    }

    for a in structure.arguments() {
        if !structure.is_attacked(a) {
            s4.record(ss(a), || format!("S4: `{a}` has no attackers but is not sufficient"));
        }
        let before = ss(a);
        for x in structure.arguments() {
            if x == a || structure.has_path(x, a) {
                continue;
            }
            let after = structure.without(x).is_structurally_sufficient(a).unwrap_or(false);
            s3.record(before == after, || format!("S3: deleting unconnected `{x}` changes SS(`{a}`)"));
        }
    }

    AxiomReport {
        s1: s1.finish(),
        s2: s2.finish(),
        s2_neutralized: neutralized.into_iter().collect(),
        s3: s3.finish(),
        s4: s4.finish(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ids;

    fn edge(f: &str, t: &str) -> Edge {
        (f.into(), t.into())
    }

    fn structure(nodes: &[&str], attacks: &[(&str, &str)]) -> ArgumentationStructure {
        ArgumentationStructure::new(ids(nodes), attacks.iter().map(|(f, t)| edge(f, t)), []).unwrap()
    }

    #[test]
    fn chain_sufficiency() {
        let s = structure(&["a1", "a2", "a3"], &[("a3", "a2"), ("a2", "a1")]);
        assert!(s.is_structurally_sufficient(&"a1".into()).unwrap());
        assert!(!s.is_structurally_sufficient(&"a2".into()).unwrap());
        assert!(s.is_structurally_sufficient(&"a3".into()).unwrap());
        assert!(check_axioms(&s).all_hold());
    }

    #[test]
    fn isolated_argument_is_sufficient() {
        let s = structure(&["x"], &[]);
        assert!(s.is_structurally_sufficient(&"x".into()).unwrap());
    }

    #[test]
    fn fork_target_is_insufficient() {
        let s = structure(&["t", "b1", "b2"], &[("b1", "t"), ("b2", "t")]);
        assert!(!s.is_structurally_sufficient(&"t".into()).unwrap());
    }

    #[test]
    fn unknown_argument_error() {
        let s = structure(&["x"], &[]);
        assert!(matches!(s.is_structurally_sufficient(&"y".into()), Err(GraspError::UnknownArgument(_))));
        assert!(ArgumentationStructure::new(ids(&["x"]), [edge("x", "z")], []).is_err());
        assert!(ArgumentationStructure::new(ids(&["x"]), [edge("x", "x")], []).is_err());
    }

    #[test]
    fn isolated_node_does_not_affect_chain() {
        let s = structure(&["a1", "a2", "a3", "iso"], &[("a3", "a2"), ("a2", "a1")]);
        let r = check_axioms(&s);
        assert!(r.s3.holds);
        assert!(r.s3.checked >= 3);
    }

    #[test]
    fn diamond_lists_both_neutralized_attacks() {
        let s = structure(&["a", "b1", "b2", "c"], &[("b1", "a"), ("b2", "a"), ("c", "b1"), ("c", "b2")]);
        let r = check_axioms(&s);
        assert!(r.all_hold());
        assert_eq!(r.s2_neutralized, vec![edge("b1", "a"), edge("b2", "a")]);
    }

    #[test]
    fn counter_attack_restores_sufficiency() {
        let mut s = structure(&["a", "b", "c"], &[("b", "a")]);
        assert!(!s.is_structurally_sufficient(&"a".into()).unwrap());
        s.add_attack("c".into(), "b".into()).unwrap();
        assert!(s.is_neutralized(&"b".into(), &"a".into()));
        assert!(s.is_structurally_sufficient(&"a".into()).unwrap());
    }

    #[test]
    fn support_edges_count_as_paths() {
        let s = ArgumentationStructure::new(ids(&["a", "b", "x"]), [edge("b", "a")], [edge("x", "b")]).unwrap();
        assert!(s.has_path(&"x".into(), &"a".into()));
        assert!(!s.has_path(&"a".into(), &"x".into()));
    }
}
