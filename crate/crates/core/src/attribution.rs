//! Shapley-based argument importance for a topic argument.
//!
//! The game's players are the non-topic arguments; the value of a coalition
//! is the topic's strength in the sub-framework where every other argument
//! (and its edges) is deleted. Computation is exact, so it is capped at a
//! configurable framework size.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qbaf::{ArgumentId, Qbaf};
use crate::semantics::{evaluate_mask, EvalConfig, Semantics};

pub const DEFAULT_EXACT_LIMIT: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionReport {
    pub topic: ArgumentId,
    pub semantics: Semantics,
    /// One score per non-topic argument.
    pub scores: BTreeMap<ArgumentId, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapleyConfig {
    pub eval: EvalConfig,
    /// Largest framework (argument count) handled exactly.
    pub exact_limit: usize,
}

impl Default for ShapleyConfig {
    fn default() -> Self {
        ShapleyConfig {
            eval: EvalConfig::default(),
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

fn check_size(q: &Qbaf, cfg: &ShapleyConfig) -> Result<()> {
    if q.len() > cfg.exact_limit {
        return Err(Error::TooLarge {
            args: q.len(),
            limit: cfg.exact_limit,
        });
    }
    Ok(())
}

/// `|S|! (m - |S| - 1)! / m!` for `m` players.
fn coalition_weight(size: usize, players: usize) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    fact(size) * fact(players - size - 1) / fact(players)
}

/// Topic strength when only `present` (plus the topic) exist.
fn coalition_value(
    q: &Qbaf,
    sem: Semantics,
    topic: usize,
    present: impl IntoIterator<Item = usize>,
    eval: &EvalConfig,
) -> Result<f64> {
    let mut mask = vec![false; q.len()];
    mask[topic] = true;
    for p in present {
        mask[p] = true;
    }
    Ok(evaluate_mask(q, q.base().as_slice(), &mask, sem, eval)?.get(topic))
}

/// Exact Shapley importance of `subject` for `topic`, summing marginal
/// contributions over every coalition of the remaining arguments.
pub fn shapley_importance(
    q: &Qbaf,
    sem: Semantics,
    topic: usize,
    subject: usize,
    cfg: &ShapleyConfig,
) -> Result<f64> {
    if subject == topic {
        return Err(Error::InvalidInput(
            "subject must differ from the topic".into(),
        ));
    }
    check_size(q, cfg)?;
    let players = q.len() - 1;
    let others: Vec<usize> = (0..q.len())
        .filter(|&v| v != topic && v != subject)
        .collect();
    let mut total = 0.0;
    for bits in 0u64..(1u64 << others.len()) {
        let members: Vec<usize> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let without = coalition_value(q, sem, topic, members.iter().copied(), &cfg.eval)?;
        let with = coalition_value(
            q,
            sem,
            topic,
            members.iter().copied().chain([subject]),
            &cfg.eval,
        )?;
        total += coalition_weight(members.len(), players) * (with - without);
    }
    Ok(total)
}

/// Shapley importance of every non-topic argument. Each coalition is
/// evaluated once and shared across subjects.
pub fn shapley_all(
    q: &Qbaf,
    sem: Semantics,
    topic: usize,
    cfg: &ShapleyConfig,
) -> Result<AttributionReport> {
    check_size(q, cfg)?;
    let players: Vec<usize> = (0..q.len()).filter(|&v| v != topic).collect();
    let m = players.len();

    let values: Vec<f64> = (0u64..(1u64 << m))
        .into_par_iter()
        .map(|bits| {
            let members = (0..m).filter(|i| bits >> i & 1 == 1).map(|i| players[i]);
            coalition_value(q, sem, topic, members, &cfg.eval)
        })
        .collect::<Result<_>>()?;

    let mut scores = BTreeMap::new();
    for (i, &subject) in players.iter().enumerate() {
        let flag = 1u64 << i;
        let phi: f64 = (0u64..(1u64 << m))
            .filter(|bits| bits & flag == 0)
            .map(|bits| {
                let size = bits.count_ones() as usize;
                coalition_weight(size, m) * (values[(bits | flag) as usize] - values[bits as usize])
            })
            .sum();
        scores.insert(q.id(subject).clone(), phi);
    }
    Ok(AttributionReport {
        topic: q.id(topic).clone(),
        semantics: sem,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbaf::parse_qbaf;
    use crate::semantics::evaluate_restricted;
    use crate::testdata::LOAN;

    #[test]
    fn loan_example_scores() {
        let q = parse_qbaf(LOAN).unwrap();
        let alpha = q.require("alpha").unwrap();
        let report = shapley_all(&q, Semantics::DfQuad, alpha, &ShapleyConfig::default()).unwrap();
        let expected = [
            ("beta", 0.0975),
            ("gamma", -0.34),
            ("rho", -0.0525),
            ("zeta", -0.04),
        ];
        assert_eq!(report.scores.len(), 4);
        for (id, want) in expected {
            let got = report.scores[id];
            assert!((got - want).abs() < 1e-9, "{id}: {got} vs {want}");
            let single = shapley_importance(
                &q,
                Semantics::DfQuad,
                alpha,
                q.require(id).unwrap(),
                &ShapleyConfig::default(),
            )
            .unwrap();
            assert!((single - got).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_has_no_scores() {
        let q = Qbaf::new([("a", 0.3)], [], []).unwrap();
        let report = shapley_all(&q, Semantics::Qe, 0, &ShapleyConfig::default()).unwrap();
        assert!(report.scores.is_empty());
    }

    #[test]
    fn disconnected_subject_scores_zero() {
        let q = Qbaf::new(
            [("a", 0.3), ("b", 0.9), ("c", 0.4)],
            [("b", "a")],
            [("a", "c")],
        )
        .unwrap();
        let s = shapley_importance(&q, Semantics::Qe, 0, 2, &ShapleyConfig::default()).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn two_argument_game_is_a_single_marginal() {
        let q = Qbaf::new([("a", 0.6), ("b", 0.7)], [("b", "a")], []).unwrap();
        let cfg = ShapleyConfig::default();
        let phi = shapley_importance(&q, Semantics::DfQuad, 0, 1, &cfg).unwrap();
        let with = evaluate_restricted(&q, &[1], Semantics::DfQuad, &cfg.eval, 0).unwrap();
        let without = evaluate_restricted(&q, &[], Semantics::DfQuad, &cfg.eval, 0).unwrap();
        assert!((phi - (with - without)).abs() < 1e-15);
        // 0.6 - 0.6 * 0.7
        assert!((phi + 0.42).abs() < 1e-12);
    }

    #[test]
    fn size_cap_is_enforced() {
        let q = parse_qbaf(LOAN).unwrap();
        let cfg = ShapleyConfig {
            exact_limit: 4,
            ..ShapleyConfig::default()
        };
        assert!(matches!(
            shapley_all(&q, Semantics::Qe, 0, &cfg),
            Err(Error::TooLarge { args: 5, limit: 4 })
        ));
        assert!(shapley_importance(&q, Semantics::Qe, 0, 0, &ShapleyConfig::default()).is_err());
    }

    #[test]
    fn weights_sum_to_one() {
        for m in 1..10usize {
            // Over all coalitions not containing a fixed player.
            let total: f64 = (0..m)
                .map(|s| {
                    let ways = (0..s).fold(1.0, |acc, i| acc * (m - 1 - i) as f64 / (i + 1) as f64);
                    ways * coalition_weight(s, m)
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "m={m}");
        }
    }
}
