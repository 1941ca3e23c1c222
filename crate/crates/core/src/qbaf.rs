//! QBAF data model, JSON document format and structural validation.
//!
//! A [`Qbaf`] pairs an immutable argument graph (shared behind an `Arc`) with a
//! [`BaseScoreFn`]. Swapping base scores is cheap, which is what the
//! counterfactual search does on every sweep. Arguments are stored in
//! lexicographic id order and addressed internally by that position.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of an argument, unique within its [`Qbaf`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArgumentId(String);

impl ArgumentId {
    pub fn new(name: impl Into<String>) -> Self {
        ArgumentId(name.into())
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
    fn from(s: &str) -> Self {
        ArgumentId(s.to_owned())
    }
}

impl From<String> for ArgumentId {
    fn from(s: String) -> Self {
        ArgumentId(s)
    }
}

impl std::borrow::Borrow<str> for ArgumentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Attack,
    Support,
}

impl Relation {
    pub fn is_attack(self) -> bool {
        matches!(self, Relation::Attack)
    }
}

/// Base scores, one per argument, aligned with the argument order of the
/// [`Qbaf`] they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseScoreFn {
    scores: Vec<f64>,
}

impl BaseScoreFn {
    /// Fails if any score lies outside `[0, 1]`.
    pub fn from_vec(scores: Vec<f64>) -> Result<Self> {
        if let Some((i, s)) = scores
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=1.0).contains(*s))
        {
            return Err(Error::InvalidInput(format!(
                "base score {s} at position {i} is outside [0, 1]"
            )));
        }
        Ok(BaseScoreFn { scores })
    }

    pub fn zeros(len: usize) -> Self {
        BaseScoreFn {
            scores: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, ix: usize) -> f64 {
        self.scores[ix]
    }

    /// Sets one score, clipping it into `[0, 1]`.
    pub fn set(&mut self, ix: usize, value: f64) {
        self.scores[ix] = value.clamp(0.0, 1.0);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores.iter().copied()
    }
}

struct Graph {
    ids: Vec<ArgumentId>,
    index: HashMap<ArgumentId, usize>,
    attacks: Vec<(usize, usize)>,
    supports: Vec<(usize, usize)>,
    attackers: Vec<Vec<usize>>,
    supporters: Vec<Vec<usize>>,
    successors: Vec<Vec<(usize, Relation)>>,
    predecessors: Vec<Vec<(usize, Relation)>>,
    topo: Option<Vec<usize>>,
}

/// A quantitative bipolar argumentation framework: arguments, attacks,
/// supports and a base score per argument.
#[derive(Clone)]
pub struct Qbaf {
    graph: Arc<Graph>,
    base: BaseScoreFn,
}

impl Qbaf {
    /// Builds and validates a QBAF. Duplicate edges within one relation are
    /// merged; everything else that breaks the framework invariants is a
    /// [`Error::Schema`].
    pub fn new<A, I, E, F>(arguments: A, attacks: E, supports: F) -> Result<Self>
    where
        A: IntoIterator<Item = (I, f64)>,
        I: Into<ArgumentId>,
        E: IntoIterator<Item = (I, I)>,
        F: IntoIterator<Item = (I, I)>,
    {
        let mut named: BTreeMap<ArgumentId, f64> = BTreeMap::new();
        for (id, score) in arguments {
            let id = id.into();
            if id.as_str().is_empty() {
                return Err(Error::Schema("argument id must be non-empty".into()));
            }
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::Schema(format!(
                    "base score {score} of `{id}` is outside [0, 1]"
                )));
            }
            if named.insert(id.clone(), score).is_some() {
                return Err(Error::Schema(format!("duplicate argument id `{id}`")));
            }
        }

        let ids: Vec<ArgumentId> = named.keys().cloned().collect();
        let base = BaseScoreFn {
            scores: named.values().copied().collect(),
        };
        let index: HashMap<ArgumentId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();

        let resolve =
            |kind: &str, edges: Vec<(ArgumentId, ArgumentId)>| -> Result<Vec<(usize, usize)>> {
                let mut out = Vec::new();
                for (from, to) in edges {
                    let f = *index.get(&from).ok_or_else(|| {
                        Error::Schema(format!(
                            "{kind} ({from}, {to}) names unknown argument `{from}`"
                        ))
                    })?;
                    let t = *index.get(&to).ok_or_else(|| {
                        Error::Schema(format!(
                            "{kind} ({from}, {to}) names unknown argument `{to}`"
                        ))
                    })?;
                    out.push((f, t));
                }
                out.sort_unstable();
                out.dedup();
                Ok(out)
            };
        let named_pairs = |edges: Vec<(I, I)>| -> Vec<(ArgumentId, ArgumentId)> {
            edges
                .into_iter()
                .map(|(a, b)| (a.into(), b.into()))
                .collect()
        };
        let attacks = resolve("attack", named_pairs(attacks.into_iter().collect()))?;
        let supports = resolve("support", named_pairs(supports.into_iter().collect()))?;

        if let Some(&(f, t)) = attacks.iter().find(|e| supports.binary_search(e).is_ok()) {
            return Err(Error::Schema(format!(
                "({}, {}) is both an attack and a support",
                ids[f], ids[t]
            )));
        }
        for &(f, t) in attacks.iter().chain(&supports) {
            if f == t {
                log::warn!("argument `{}` has a self-loop", ids[f]);
            }
        }

        let n = ids.len();
        let mut attackers = vec![Vec::new(); n];
        let mut supporters = vec![Vec::new(); n];
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for &(f, t) in &attacks {
            attackers[t].push(f);
            successors[f].push((t, Relation::Attack));
            predecessors[t].push((f, Relation::Attack));
        }
        for &(f, t) in &supports {
            supporters[t].push(f);
            successors[f].push((t, Relation::Support));
            predecessors[t].push((f, Relation::Support));
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
        }
        let topo = topological_order(&successors);

        Ok(Qbaf {
            graph: Arc::new(Graph {
                ids,
                index,
                attacks,
                supports,
                attackers,
                supporters,
                successors,
                predecessors,
                topo,
            }),
            base,
        })
    }

    /// Same structure, different base scores.
    pub fn with_base(&self, base: BaseScoreFn) -> Result<Qbaf> {
        if base.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "base score function covers {} arguments, framework has {}",
                base.len(),
                self.len()
            )));
        }
        Ok(Qbaf {
            graph: Arc::clone(&self.graph),
            base,
        })
    }

    pub fn len(&self) -> usize {
        self.graph.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.ids.is_empty()
    }

    /// Argument ids in lexicographic order; position is the argument index.
    pub fn ids(&self) -> &[ArgumentId] {
        &self.graph.ids
    }

    pub fn id(&self, ix: usize) -> &ArgumentId {
        &self.graph.ids[ix]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.graph.index.get(id).copied()
    }

    /// Like [`Qbaf::index_of`] but reports a missing id as an error.
    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownArgument(id.to_owned()))
    }

    pub fn base(&self) -> &BaseScoreFn {
        &self.base
    }

    pub fn base_score(&self, ix: usize) -> f64 {
        self.base.get(ix)
    }

    pub fn attacks(&self) -> &[(usize, usize)] {
        &self.graph.attacks
    }

    pub fn supports(&self) -> &[(usize, usize)] {
        &self.graph.supports
    }

    pub fn edge_count(&self) -> usize {
        self.graph.attacks.len() + self.graph.supports.len()
    }

    pub fn attackers(&self, ix: usize) -> &[usize] {
        &self.graph.attackers[ix]
    }

    pub fn supporters(&self, ix: usize) -> &[usize] {
        &self.graph.supporters[ix]
    }

    /// Outgoing edges of `ix`, sorted by target.
    pub fn successors(&self, ix: usize) -> &[(usize, Relation)] {
        &self.graph.successors[ix]
    }

    /// Incoming edges of `ix`, sorted by source.
    pub fn predecessors(&self, ix: usize) -> &[(usize, Relation)] {
        &self.graph.predecessors[ix]
    }

    pub fn relation(&self, from: usize, to: usize) -> Option<Relation> {
        self.graph.successors[from]
            .iter()
            .find(|(t, _)| *t == to)
            .map(|&(_, r)| r)
    }

    pub fn is_acyclic(&self) -> bool {
        self.graph.topo.is_some()
    }

    /// Parents before children. `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<&[usize]> {
        self.graph.topo.as_deref()
    }

    /// Base scores keyed by id.
    pub fn scores_by_id(&self, scores: &BaseScoreFn) -> BTreeMap<ArgumentId, f64> {
        self.ids().iter().cloned().zip(scores.iter()).collect()
    }
}

impl PartialEq for Qbaf {
    fn eq(&self, other: &Self) -> bool {
        self.graph.ids == other.graph.ids
            && self.graph.attacks == other.graph.attacks
            && self.graph.supports == other.graph.supports
            && self.base == other.base
    }
}

impl fmt::Debug for Qbaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |edges: &[(usize, usize)]| -> Vec<(&str, &str)> {
            edges
                .iter()
                .map(|&(a, b)| (self.id(a).as_str(), self.id(b).as_str()))
                .collect()
        };
        f.debug_struct("Qbaf")
            .field("base_scores", &self.scores_by_id(&self.base))
            .field("attacks", &names(self.attacks()))
            .field("supports", &names(self.supports()))
            .finish()
    }
}

/// Kahn's algorithm. Ties are broken by smallest index so the order is
/// deterministic.
fn topological_order(successors: &[Vec<(usize, Relation)>]) -> Option<Vec<usize>> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for outs in successors {
        for &(t, _) in outs {
            indegree[t] += 1;
        }
    }
    let mut ready: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &(t, _) in &successors[v] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.push_back(t);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// True iff the attack/support graph has no directed cycle (self-loops count).
pub fn is_acyclic(q: &Qbaf) -> bool {
    q.is_acyclic()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    arguments: Vec<ArgumentEntry>,
    attacks: Vec<(String, String)>,
    supports: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArgumentEntry {
    id: String,
    base_score: f64,
}

/// Parses a QBAF JSON document.
pub fn parse_qbaf(text: &str) -> Result<Qbaf> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => Error::Schema(e.to_string()),
            Category::Io | Category::Syntax | Category::Eof => Error::Syntax(e.to_string()),
        }
    })?;
    Qbaf::new(
        doc.arguments.into_iter().map(|a| (a.id, a.base_score)),
        doc.attacks,
        doc.supports,
    )
}

/// Serializes with arguments sorted by id, relations sorted lexicographically
/// by id pair and two-space indentation.
pub fn serialize_qbaf(q: &Qbaf) -> String {
    serialize_with_scores(q, q.base())
}

/// Serializes the structure of `q` with `scores` in place of its base scores.
pub fn serialize_with_scores(q: &Qbaf, scores: &BaseScoreFn) -> String {
    let pairs = |edges: &[(usize, usize)]| -> Vec<(String, String)> {
        // Index order is id order, so index-sorted edges are already id-sorted.
        edges
            .iter()
            .map(|&(a, b)| (q.id(a).to_string(), q.id(b).to_string()))
            .collect()
    };
    let doc = Document {
        arguments: q
            .ids()
            .iter()
            .zip(scores.iter())
            .map(|(id, s)| ArgumentEntry {
                id: id.to_string(),
                base_score: s,
            })
            .collect(),
        attacks: pairs(q.attacks()),
        supports: pairs(q.supports()),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("QBAF documents always serialize");
    out.push('\n');
    out
}
