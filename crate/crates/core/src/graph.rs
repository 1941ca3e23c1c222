//! Path structure of a QBAF: simple paths, elementary cycles, connectivity,
//! polarity and priority between arguments.
//!
//! Paths here follow the walk notion of the framework: a path may revisit
//! arguments, so a cycle anywhere between two arguments yields infinitely
//! many paths. Connectivity and [`polarity`] are decided exactly on the
//! subgraph `H(from, to)` of arguments reachable from `from` that can still
//! reach `to`; every walk from `from` to `to` lives inside it.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::qbaf::{Qbaf, Relation};

/// A chain of edges, each an attack or a support of the framework.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub edges: Vec<(usize, usize, Relation)>,
}

impl Path {
    fn from_nodes(q: &Qbaf, nodes: &[usize]) -> Path {
        let edges = nodes
            .windows(2)
            .map(|w| {
                let r = q
                    .relation(w[0], w[1])
                    .expect("consecutive path nodes share an edge");
                (w[0], w[1], r)
            })
            .collect();
        Path { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn attack_count(&self) -> usize {
        self.edges.iter().filter(|e| e.2.is_attack()).count()
    }

    /// Source followed by the head of every edge.
    pub fn nodes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.first().map(|e| vec![e.0]).unwrap_or_default();
        out.extend(self.edges.iter().map(|e| e.1));
        out
    }

    /// Renders the path with argument names, e.g. `a -attack-> b -support-> c`.
    pub fn describe(&self, q: &Qbaf) -> String {
        let mut out = String::new();
        if let Some(first) = self.edges.first() {
            out.push_str(q.id(first.0).as_str());
        }
        for &(_, to, r) in &self.edges {
            out.push_str(if r.is_attack() {
                " -attack-> "
            } else {
                " -support-> "
            });
            out.push_str(q.id(to).as_str());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Connectivity {
    Disconnected,
    SinglePath,
    MultiPath,
}

/// Influence of one argument on another, derived from the attack parity of
/// the paths between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarity {
    Neutral,
    Positive,
    Negative,
    Unknown,
}

impl Polarity {
    /// Integer code: neutral -2, positive 1, negative -1, unknown 0.
    pub fn code(self) -> i8 {
        match self {
            Polarity::Neutral => -2,
            Polarity::Positive => 1,
            Polarity::Negative => -1,
            Polarity::Unknown => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All elementary (no repeated argument) paths from `from` to `to`, in
/// lexicographic order of their node sequences. Empty when `from == to`.
pub fn enumerate_simple_paths(q: &Qbaf, from: usize, to: usize) -> Vec<Path> {
    let mut out = Vec::new();
    if from == to {
        return out;
    }
    // Only arguments that can still reach `to` are worth descending into.
    let useful = reaches(q, to, Direction::Backward);
    if !useful[from] {
        return out;
    }
    let mut on_path = vec![false; q.len()];
    let mut nodes = vec![from];
    on_path[from] = true;
    // Explicit stack of (node, next successor slot).
    let mut stack: Vec<(usize, usize)> = vec![(from, 0)];
    while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
        let succ = q.successors(v);
        if *slot >= succ.len() {
            stack.pop();
            nodes.pop();
            on_path[v] = false;
            continue;
        }
        let (w, _) = succ[*slot];
        *slot += 1;
        if w == to {
            let mut full = nodes.clone();
            full.push(to);
            out.push(Path::from_nodes(q, &full));
        } else if useful[w] && !on_path[w] {
            on_path[w] = true;
            nodes.push(w);
            stack.push((w, 0));
        }
    }
    out.sort();
    out
}

/// Every elementary cycle passing through `through`, each rotated to start
/// at its smallest argument (lexicographically smallest id).
pub fn find_elementary_cycles(q: &Qbaf, through: usize) -> Vec<Path> {
    let forward = reaches(q, through, Direction::Forward);
    let backward = reaches(q, through, Direction::Backward);
    let scc: Vec<bool> = forward
        .iter()
        .zip(&backward)
        .map(|(a, b)| *a && *b)
        .collect();
    let mut cycles: Vec<Path> = circuits(q, through, &scc)
        .into_iter()
        .map(|nodes| Path::from_nodes(q, &canonical_rotation(nodes)))
        .collect();
    cycles.sort();
    cycles
}

/// All elementary cycles of the framework (Johnson's algorithm), each in
/// canonical rotation.
pub fn elementary_cycles(q: &Qbaf) -> Vec<Path> {
    let n = q.len();
    let mut out = Vec::new();
    for s in 0..n {
        // Strongly connected component of s within the arguments >= s.
        let allowed: Vec<bool> = (0..n).map(|v| v >= s).collect();
        let fw = reaches_within(q, s, Direction::Forward, &allowed);
        let bw = reaches_within(q, s, Direction::Backward, &allowed);
        let scc: Vec<bool> = fw.iter().zip(&bw).map(|(a, b)| *a && *b).collect();
        for nodes in circuits(q, s, &scc) {
            out.push(Path::from_nodes(q, &nodes));
        }
    }
    out.sort();
    out
}

/// Johnson's CIRCUIT search: elementary cycles through `start` that stay
/// inside `allowed`. Returned as closed node sequences `[start, .., start]`.
fn circuits(q: &Qbaf, start: usize, allowed: &[bool]) -> Vec<Vec<usize>> {
    struct Search<'a> {
        q: &'a Qbaf,
        start: usize,
        allowed: &'a [bool],
        blocked: Vec<bool>,
        block_map: Vec<Vec<usize>>,
        stack: Vec<usize>,
        found: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn unblock(&mut self, u: usize) {
            let mut pending = vec![u];
            while let Some(u) = pending.pop() {
                if !self.blocked[u] {
                    continue;
                }
                self.blocked[u] = false;
                pending.append(&mut self.block_map[u]);
            }
        }

        fn circuit(&mut self, v: usize) -> bool {
            let mut closed = false;
            self.stack.push(v);
            self.blocked[v] = true;
            for &(w, _) in self.q.successors(v) {
                if !self.allowed[w] {
                    continue;
                }
                if w == self.start {
                    let mut cycle = self.stack.clone();
                    cycle.push(self.start);
                    self.found.push(cycle);
                    closed = true;
                } else if !self.blocked[w] && self.circuit(w) {
                    closed = true;
                }
            }
            if closed {
                self.unblock(v);
            } else {
                for &(w, _) in self.q.successors(v) {
                    if self.allowed[w] && !self.block_map[w].contains(&v) {
                        self.block_map[w].push(v);
                    }
                }
            }
            self.stack.pop();
            closed
        }
    }

    if !allowed[start] {
        return Vec::new();
    }
    let n = q.len();
    let mut search = Search {
        q,
        start,
        allowed,
        blocked: vec![false; n],
        block_map: vec![Vec::new(); n],
        stack: Vec::new(),
        found: Vec::new(),
    };
    search.circuit(start);
    search.found
}

/// Rotates a closed node sequence `[v0, .., v0]` to start at its minimum.
fn canonical_rotation(mut closed: Vec<usize>) -> Vec<usize> {
    closed.pop();
    let pivot = closed
        .iter()
        .enumerate()
        .min_by_key(|(_, v)| **v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    closed.rotate_left(pivot);
    closed.push(closed[0]);
    closed
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Backward,
}

fn reaches(q: &Qbaf, root: usize, dir: Direction) -> Vec<bool> {
    let all = vec![true; q.len()];
    reaches_within(q, root, dir, &all)
}

/// Arguments reachable from (forward) or reaching (backward) `root` through
/// arguments in `allowed`. `root` itself is always included.
fn reaches_within(q: &Qbaf, root: usize, dir: Direction, allowed: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; q.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let next = match dir {
            Direction::Forward => q.successors(v),
            Direction::Backward => q.predecessors(v),
        };
        for &(w, _) in next {
            if allowed[w] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Whether `from` reaches `to` through at least one edge. Differs from
/// `reaches` only for `from == to`, where a cycle is required.
fn has_walk(q: &Qbaf, from: usize, to: usize) -> bool {
    if from != to {
        return reaches(q, from, Direction::Forward)[to];
    }
    q.successors(from)
        .iter()
        .any(|&(w, _)| reaches(q, w, Direction::Forward)[to])
}

/// Membership of the walk subgraph `H(from, to)`.
fn walk_subgraph(q: &Qbaf, from: usize, coreach_to: &[bool]) -> Vec<bool> {
    reaches_within(q, from, Direction::Forward, coreach_to)
}

/// Number of paths from `from` to `to`: none, exactly one, or more than one.
pub fn connectivity(q: &Qbaf, from: usize, to: usize) -> Connectivity {
    let coreach = reaches(q, to, Direction::Backward);
    if !coreach[from] || !has_walk(q, from, to) {
        return Connectivity::Disconnected;
    }
    let h = walk_subgraph(q, from, &coreach);

    // Any cycle inside H can be spliced into a path, giving infinitely many.
    let mut indegree = vec![0usize; q.len()];
    for v in (0..q.len()).filter(|&v| h[v]) {
        for &(w, _) in q.successors(v) {
            if h[w] {
                indegree[w] += 1;
            }
        }
    }
    let mut ready: VecDeque<usize> = (0..q.len()).filter(|&v| h[v] && indegree[v] == 0).collect();
    let mut order = Vec::new();
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &(w, _) in q.successors(v) {
            if h[w] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push_back(w);
                }
            }
        }
    }
    if order.len() != h.iter().filter(|x| **x).count() {
        return Connectivity::MultiPath;
    }

    // Path counting over the DAG, saturating at 2.
    let mut count = vec![0u8; q.len()];
    count[from] = 1;
    for &v in &order {
        for &(w, _) in q.successors(v) {
            if h[w] {
                count[w] = count[w].saturating_add(count[v]).min(2);
            }
        }
    }
    if count[to] == 1 {
        Connectivity::SinglePath
    } else {
        Connectivity::MultiPath
    }
}

/// Polarity from `from` to `to` (`from != to`).
///
/// Neutral when no path exists. Otherwise every walk inside `H(from, to)` is
/// two-coloured by attack parity; a colouring conflict means paths of both
/// parities exist (Unknown), else the parity at `to` decides between
/// Positive (even) and Negative (odd).
pub fn polarity(q: &Qbaf, from: usize, to: usize) -> Polarity {
    let coreach = reaches(q, to, Direction::Backward);
    polarity_with_coreach(q, from, to, &coreach)
}

fn polarity_with_coreach(q: &Qbaf, from: usize, to: usize, coreach: &[bool]) -> Polarity {
    debug_assert_ne!(from, to);
    if !coreach[from] {
        return Polarity::Neutral;
    }
    let mut parity: Vec<Option<bool>> = vec![None; q.len()];
    parity[from] = Some(false);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        let pv = parity[v].expect("queued nodes are coloured");
        for &(w, r) in q.successors(v) {
            if !coreach[w] {
                continue;
            }
            let pw = pv ^ r.is_attack();
            match parity[w] {
                None => {
                    parity[w] = Some(pw);
                    queue.push_back(w);
                }
                Some(existing) if existing != pw => return Polarity::Unknown,
                Some(_) => {}
            }
        }
    }
    match parity[to] {
        Some(true) => Polarity::Negative,
        Some(false) => Polarity::Positive,
        None => Polarity::Neutral,
    }
}

/// Polarity computed from elementary paths and the elementary cycles that
/// touch them: Unknown if any such cycle carries an odd number of attacks,
/// otherwise decided by the attack parities of the elementary paths.
///
/// Exponential in the worst case. Agrees with [`polarity`] except where a
/// parity-flipping cycle is only reachable through a detour that no
/// elementary path takes; there [`polarity`] reports Unknown and this
/// function does not.
pub fn polarity_by_paths(q: &Qbaf, from: usize, to: usize) -> Polarity {
    let paths = enumerate_simple_paths(q, from, to);
    if paths.is_empty() {
        return Polarity::Neutral;
    }
    let mut checked = vec![false; q.len()];
    for path in &paths {
        for node in path.nodes() {
            if std::mem::replace(&mut checked[node], true) {
                continue;
            }
            if find_elementary_cycles(q, node)
                .iter()
                .any(|c| c.attack_count() % 2 == 1)
            {
                return Polarity::Unknown;
            }
        }
    }
    let odd = paths.iter().filter(|p| p.attack_count() % 2 == 1).count();
    if odd == paths.len() {
        Polarity::Negative
    } else if odd == 0 {
        Polarity::Positive
    } else {
        Polarity::Unknown
    }
}

/// Priority from `from` to `to`: `c` for the argument itself, 0 when
/// disconnected, else the reciprocal of the shortest path length.
pub fn priority(q: &Qbaf, from: usize, to: usize, c: f64) -> f64 {
    if from == to {
        return c;
    }
    match shortest_distances_to(q, to)[from] {
        Some(d) => 1.0 / d as f64,
        None => 0.0,
    }
}

/// Length of the shortest path from every argument to `to` (`Some(0)` for
/// `to` itself).
fn shortest_distances_to(q: &Qbaf, to: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; q.len()];
    dist[to] = Some(0);
    let mut queue = VecDeque::from([to]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued nodes have a distance");
        for &(w, _) in q.predecessors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Whether `v` lies on some elementary cycle (self-loops included).
pub fn on_cycle(q: &Qbaf, v: usize) -> bool {
    has_walk(q, v, v)
}

/// Polarity the solver assigns to the topic with respect to itself: every
/// influence function is non-decreasing in the argument's own base score at
/// a fixed aggregate, so the topic counts as Positive unless a cycle feeds
/// its strength back into itself.
pub fn self_polarity(q: &Qbaf, topic: usize) -> Polarity {
    if on_cycle(q, topic) {
        Polarity::Unknown
    } else {
        Polarity::Positive
    }
}

/// Polarity and priority of every argument with respect to one topic.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicProfile {
    pub topic: usize,
    pub polarity: Vec<Polarity>,
    pub priority: Vec<f64>,
}

/// Batched [`polarity`] and [`priority`] against a fixed topic. The topic's
/// own entry uses [`self_polarity`] and priority `c`.
pub fn topic_profile(q: &Qbaf, topic: usize, c: f64) -> TopicProfile {
    let coreach = reaches(q, topic, Direction::Backward);
    let dist = shortest_distances_to(q, topic);
    let polarity = (0..q.len())
        .map(|v| {
            if v == topic {
                self_polarity(q, topic)
            } else {
                polarity_with_coreach(q, v, topic, &coreach)
            }
        })
        .collect();
    let priority = (0..q.len())
        .map(|v| match (v == topic, dist[v]) {
            (true, _) => c,
            (false, Some(d)) => 1.0 / d as f64,
            (false, None) => 0.0,
        })
        .collect();
    TopicProfile {
        topic,
        polarity,
        priority,
    }
}
