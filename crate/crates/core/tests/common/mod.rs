//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use qarg::{evaluate_restricted, BaseScoreFn, EvalConfig, Polarity, Qbaf, Relation, Semantics};

/// Copy of `q` with optional new base scores and extra edges.
pub fn rebuild(q: &Qbaf, base: Option<&BaseScoreFn>, extra: &[(usize, usize, Relation)]) -> Qbaf {
    let scores = base.unwrap_or(q.base());
    let name = |v: usize| q.id(v).as_str().to_owned();
    let mut attacks: Vec<(String, String)> = q
        .attacks()
        .iter()
        .map(|&(a, b)| (name(a), name(b)))
        .collect();
    let mut supports: Vec<(String, String)> = q
        .supports()
        .iter()
        .map(|&(a, b)| (name(a), name(b)))
        .collect();
    for &(a, b, rel) in extra {
        match rel {
            Relation::Attack => attacks.push((name(a), name(b))),
            Relation::Support => supports.push((name(a), name(b))),
        }
    }
    Qbaf::new(
        (0..q.len()).map(|v| (name(v), scores.get(v))),
        attacks,
        supports,
    )
    .expect("rebuilt framework is valid")
}

/// Polarity from the attack parities of every walk `from -> to` of length at
/// most `2n`: no walk is neutral, mixed parities are unknown.
pub fn walk_polarity(q: &Qbaf, from: usize, to: usize) -> Polarity {
    let n = q.len();
    // frontier[v][p]: some walk of the current length ends at v with parity p
    let mut frontier = vec![[false; 2]; n];
    frontier[from][0] = true;
    let (mut even, mut odd) = (false, false);
    for _ in 0..2 * n {
        let mut next = vec![[false; 2]; n];
        for (v, ends) in frontier.iter().enumerate() {
            for p in 0..2 {
                if !ends[p] {
                    continue;
                }
                for w in attack_targets(q, v) {
                    next[w][1 - p] = true;
                }
                for w in support_targets(q, v) {
                    next[w][p] = true;
                }
            }
        }
        even |= next[to][0];
        odd |= next[to][1];
        frontier = next;
    }
    match (even, odd) {
        (false, false) => Polarity::Neutral,
        (true, false) => Polarity::Positive,
        (false, true) => Polarity::Negative,
        (true, true) => Polarity::Unknown,
    }
}

fn attack_targets(q: &Qbaf, v: usize) -> Vec<usize> {
    q.attacks()
        .iter()
        .filter(|e| e.0 == v)
        .map(|e| e.1)
        .collect()
}

fn support_targets(q: &Qbaf, v: usize) -> Vec<usize> {
    q.supports()
        .iter()
        .filter(|e| e.0 == v)
        .map(|e| e.1)
        .collect()
}

/// Shapley values as the average marginal contribution over every ordering
/// of the non-topic arguments.
pub fn shapley_by_permutations(
    q: &Qbaf,
    sem: Semantics,
    topic: usize,
    eval: &EvalConfig,
) -> Vec<(usize, f64)> {
    let players: Vec<usize> = (0..q.len()).filter(|&v| v != topic).collect();
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut value = |set: &[usize]| -> f64 {
        let mut key = set.to_vec();
        key.sort_unstable();
        *memo.entry(key.clone()).or_insert_with(|| {
            evaluate_restricted(q, &key, sem, eval, topic).expect("coalition converges")
        })
    };
    let mut totals = vec![0.0; q.len()];
    let mut count = 0usize;
    let mut order = players.clone();
    permutations(&mut order, 0, &mut |perm| {
        count += 1;
        let mut prefix = Vec::new();
        for &p in perm {
            let before = value(&prefix);
            prefix.push(p);
            totals[p] += value(&prefix) - before;
        }
    });
    players
        .iter()
        .map(|&p| (p, totals[p] / count as f64))
        .collect()
}

fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Cycle detection by white/grey/black DFS marking.
pub fn has_cycle(q: &Qbaf) -> bool {
    fn visit(q: &Qbaf, v: usize, colour: &mut [u8]) -> bool {
        colour[v] = 1;
        let next: Vec<usize> = q
            .attacks()
            .iter()
            .chain(q.supports())
            .filter(|e| e.0 == v)
            .map(|e| e.1)
            .collect();
        for w in next {
            if colour[w] == 1 || (colour[w] == 0 && visit(q, w, colour)) {
                return true;
            }
        }
        colour[v] = 2;
        false
    }
    let mut colour = vec![0u8; q.len()];
    (0..q.len()).any(|v| colour[v] == 0 && visit(q, v, &mut colour))
}

/// Whether some directed path leads from `from` to `to`, by plain DFS over
/// the edge lists.
pub fn reaches(q: &Qbaf, from: usize, to: usize) -> bool {
    let mut seen = vec![false; q.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &(a, b) in q.attacks().iter().chain(q.supports()) {
            if a == v && !seen[b] {
                if b == to {
                    return true;
                }
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    false
}
