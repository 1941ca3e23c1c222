//! Gradual semantics: DF-QuAD, Quadratic Energy and Restricted Euler-based.
//!
//! Every semantics is an aggregation function over the strengths of an
//! argument's attackers and supporters followed by an influence function that
//! combines the aggregate with the argument's base score. Acyclic frameworks
//! are evaluated exactly in topological order; cyclic ones by synchronous
//! fixed-point sweeps starting from the base scores.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qbaf::{ArgumentId, BaseScoreFn, Qbaf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    DfQuad,
    Qe,
    Reb,
}

impl Semantics {
    pub const ALL: [Semantics; 3] = [Semantics::DfQuad, Semantics::Qe, Semantics::Reb];

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::DfQuad => "dfquad",
            Semantics::Qe => "qe",
            Semantics::Reb => "reb",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dfquad" | "df-quad" => Ok(Semantics::DfQuad),
            "qe" => Ok(Semantics::Qe),
            "reb" => Ok(Semantics::Reb),
            other => Err(Error::InvalidInput(format!(
                "unknown semantics `{other}` (expected dfquad, qe or reb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tolerance: 1e-6,
            max_iterations: 10_000,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidInput(format!(
                "convergence tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Final strengths, aligned with the argument order of the evaluated QBAF.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMap {
    pub strengths: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Largest per-argument change in the last sweep (0 for exact evaluation).
    pub max_residual: f64,
}

impl StrengthMap {
    pub fn get(&self, ix: usize) -> f64 {
        self.strengths[ix]
    }

    pub fn by_id<'a>(&'a self, q: &'a Qbaf) -> impl Iterator<Item = (&'a ArgumentId, f64)> + 'a {
        q.ids().iter().zip(self.strengths.iter().copied())
    }
}

/// Combines attacker and supporter strengths into a single aggregate.
///
/// DF-QuAD: `prod(1 - attackers) - prod(1 - supporters)`, empty products are 1.
/// QE and REB: `sum(supporters) - sum(attackers)`.
pub fn aggregate(sem: Semantics, attackers: &[f64], supporters: &[f64]) -> f64 {
    match sem {
        Semantics::DfQuad => {
            let a: f64 = attackers.iter().map(|s| 1.0 - s).product();
            let s: f64 = supporters.iter().map(|s| 1.0 - s).product();
            a - s
        }
        Semantics::Qe | Semantics::Reb => {
            supporters.iter().sum::<f64>() - attackers.iter().sum::<f64>()
        }
    }
}

/// Maps a base score and an aggregate to a strength in `[0, 1]`.
pub fn influence(sem: Semantics, base: f64, e: f64) -> f64 {
    let out = match sem {
        Semantics::DfQuad => {
            if e <= 0.0 {
                base - base * e.abs()
            } else {
                base + (1.0 - base) * e
            }
        }
        Semantics::Qe => {
            let sq = e * e / (1.0 + e * e);
            if e <= 0.0 {
                base - base * sq
            } else {
                base + (1.0 - base) * sq
            }
        }
        // Algebraically the base score at e = 0; return it without rounding.
        Semantics::Reb if e == 0.0 => base,
        Semantics::Reb => 1.0 - (1.0 - base * base) / (1.0 + base * e.exp()),
    };
    out.clamp(0.0, 1.0)
}

/// Strength of `v` given parent strengths `s`. Parents outside `mask` are
/// treated as deleted.
fn node_strength(
    q: &Qbaf,
    sem: Semantics,
    base: &[f64],
    v: usize,
    s: &[f64],
    mask: Option<&[bool]>,
) -> f64 {
    let present = |p: &usize| mask.is_none_or(|m| m[*p]);
    let e = match sem {
        Semantics::DfQuad => {
            let a: f64 = q
                .attackers(v)
                .iter()
                .filter(|p| present(p))
                .map(|&p| 1.0 - s[p])
                .product();
            let b: f64 = q
                .supporters(v)
                .iter()
                .filter(|p| present(p))
                .map(|&p| 1.0 - s[p])
                .product();
            a - b
        }
        Semantics::Qe | Semantics::Reb => {
            let sup: f64 = q
                .supporters(v)
                .iter()
                .filter(|p| present(p))
                .map(|&p| s[p])
                .sum();
            let att: f64 = q
                .attackers(v)
                .iter()
                .filter(|p| present(p))
                .map(|&p| s[p])
                .sum();
            sup - att
        }
    };
    influence(sem, base[v], e)
}

/// Evaluates `q` with its own base scores.
pub fn evaluate(q: &Qbaf, sem: Semantics, cfg: &EvalConfig) -> Result<StrengthMap> {
    evaluate_masked(q, q.base().as_slice(), None, sem, cfg)
}

/// Evaluates the structure of `q` under the base scores `scores`.
pub fn evaluate_with(
    q: &Qbaf,
    scores: &BaseScoreFn,
    sem: Semantics,
    cfg: &EvalConfig,
) -> Result<StrengthMap> {
    if scores.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "base score function covers {} arguments, framework has {}",
            scores.len(),
            q.len()
        )));
    }
    evaluate_masked(q, scores.as_slice(), None, sem, cfg)
}

/// Strength of `topic` in the sub-framework induced by `present ∪ {topic}`;
/// every other argument is deleted together with its edges.
pub fn evaluate_restricted(
    q: &Qbaf,
    present: &[usize],
    sem: Semantics,
    cfg: &EvalConfig,
    topic: usize,
) -> Result<f64> {
    let mut mask = vec![false; q.len()];
    for &p in present {
        mask[p] = true;
    }
    mask[topic] = true;
    evaluate_mask(q, q.base().as_slice(), &mask, sem, cfg).map(|s| s.strengths[topic])
}

/// Masked evaluation over a boolean membership vector. Strengths of absent
/// arguments are reported as 0.
pub(crate) fn evaluate_mask(
    q: &Qbaf,
    base: &[f64],
    mask: &[bool],
    sem: Semantics,
    cfg: &EvalConfig,
) -> Result<StrengthMap> {
    evaluate_masked(q, base, Some(mask), sem, cfg)
}

fn evaluate_masked(
    q: &Qbaf,
    base: &[f64],
    mask: Option<&[bool]>,
    sem: Semantics,
    cfg: &EvalConfig,
) -> Result<StrengthMap> {
    cfg.validate()?;
    let present = |v: usize| mask.is_none_or(|m| m[v]);

    if let Some(order) = q.topological_order() {
        let mut s = vec![0.0; q.len()];
        for &v in order.iter().filter(|&&v| present(v)) {
            s[v] = node_strength(q, sem, base, v, &s, mask);
        }
        return Ok(StrengthMap {
            strengths: s,
            converged: true,
            iterations_used: 1,
            max_residual: 0.0,
        });
    }

    let nodes: Vec<usize> = (0..q.len()).filter(|&v| present(v)).collect();
    let mut current = vec![0.0; q.len()];
    for &v in &nodes {
        current[v] = base[v];
    }
    let mut next = current.clone();
    let mut residual = 0.0;
    for it in 1..=cfg.max_iterations {
        residual = 0.0f64;
        for &v in &nodes {
            let s = node_strength(q, sem, base, v, &current, mask);
            debug_assert!((0.0..=1.0).contains(&s));
            residual = residual.max((s - current[v]).abs());
            next[v] = s;
        }
        std::mem::swap(&mut current, &mut next);
        if residual <= cfg.tolerance {
            return Ok(StrengthMap {
                strengths: current,
                converged: true,
                iterations_used: it,
                max_residual: residual,
            });
        }
    }
    Err(Error::NonConvergence {
        last: Box::new(StrengthMap {
            strengths: current,
            converged: false,
            iterations_used: cfg.max_iterations,
            max_residual: residual,
        }),
    })
}

/// Largest violation of the fixed-point equations by `s` under the base
/// scores of `q`.
pub fn residual(q: &Qbaf, sem: Semantics, s: &StrengthMap) -> f64 {
    let base = q.base().as_slice();
    (0..q.len())
        .map(|v| (node_strength(q, sem, base, v, &s.strengths, None) - s.strengths[v]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbaf::parse_qbaf;
    use crate::testdata::LOAN;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dfquad_aggregate_matches_worked_example() {
        assert!(close(
            aggregate(Semantics::DfQuad, &[0.76], &[0.09]),
            -0.67,
            1e-12
        ));
        assert_eq!(aggregate(Semantics::DfQuad, &[], &[]), 0.0);
    }

    #[test]
    fn qe_aggregate_is_signed_sum() {
        assert!(close(
            aggregate(Semantics::Qe, &[0.3, 0.2], &[0.6]),
            0.1,
            1e-12
        ));
        assert!(close(
            aggregate(Semantics::Reb, &[0.3, 0.2], &[0.6]),
            0.1,
            1e-12
        ));
    }

    #[test]
    fn dfquad_influence_matches_worked_example() {
        assert!(close(
            influence(Semantics::DfQuad, 0.5, -0.67),
            0.165,
            1e-12
        ));
        assert!(close(influence(Semantics::DfQuad, 0.6, 0.4), 0.76, 1e-12));
    }

    #[test]
    fn zero_aggregate_returns_base() {
        for sem in Semantics::ALL {
            for t in [0.0, 0.1, 0.5, 0.93, 1.0] {
                assert!(close(influence(sem, t, 0.0), t, 1e-15), "{sem} {t}");
            }
        }
    }

    #[test]
    fn influence_stays_in_unit_interval() {
        for sem in Semantics::ALL {
            for t in [0.0, 0.3, 1.0] {
                for e in [-40.0, -3.0, -1.0, -0.2, 0.2, 1.0, 3.0, 40.0] {
                    let s = influence(sem, t, e);
                    assert!((0.0..=1.0).contains(&s), "{sem} {t} {e} -> {s}");
                }
            }
        }
    }

    #[test]
    fn loan_example_under_dfquad() {
        let q = parse_qbaf(LOAN).unwrap();
        let s = evaluate(&q, Semantics::DfQuad, &EvalConfig::default()).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations_used, 1);
        for (id, want) in [
            ("alpha", 0.165),
            ("beta", 0.09),
            ("gamma", 0.76),
            ("rho", 0.7),
            ("zeta", 0.4),
        ] {
            assert!(close(s.get(q.require(id).unwrap()), want, 1e-12), "{id}");
        }
    }

    #[test]
    fn no_relations_gives_base_scores() {
        let q = Qbaf::new([("a", 0.2), ("b", 0.9), ("c", 0.0)], [], []).unwrap();
        for sem in Semantics::ALL {
            let s = evaluate(&q, sem, &EvalConfig::default()).unwrap();
            assert_eq!(s.strengths, q.base().as_slice());
        }
    }

    /// Fixed point of the mutual-support pair solves s^3 - s^2 + s - 1/2 = 0
    /// under QE with base 0.5; located here by bisection.
    #[test]
    fn mutual_support_cycle_matches_bisection_oracle() {
        let f = |s: f64| s * s * s - s * s + s - 0.5;
        let (mut lo, mut hi) = (0.5f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        // residual substitution into the QE equations
        let e = root;
        assert!(close(0.5 + 0.5 * e * e / (1.0 + e * e), root, 1e-12));

        let q = Qbaf::new([("a", 0.5), ("b", 0.5)], [], [("a", "b"), ("b", "a")]).unwrap();
        let cfg = EvalConfig {
            tolerance: 1e-12,
            max_iterations: 100_000,
        };
        let s = evaluate(&q, Semantics::Qe, &cfg).unwrap();
        assert!(s.converged);
        assert!(s.iterations_used > 1);
        assert!(close(s.get(0), root, 1e-9), "{} vs {root}", s.get(0));
        assert!(close(s.get(1), root, 1e-9));
        assert!(residual(&q, Semantics::Qe, &s) <= cfg.tolerance);
    }

    #[test]
    fn restricted_evaluation_examples() {
        let q = parse_qbaf(LOAN).unwrap();
        let cfg = EvalConfig::default();
        let ix = |id| q.require(id).unwrap();
        let alpha = ix("alpha");
        let only = evaluate_restricted(&q, &[alpha], Semantics::DfQuad, &cfg, alpha).unwrap();
        assert!(close(only, 0.5, 1e-12));
        let with_gamma =
            evaluate_restricted(&q, &[alpha, ix("gamma")], Semantics::DfQuad, &cfg, alpha).unwrap();
        assert!(close(with_gamma, 0.2, 1e-12));
        let all: Vec<usize> = (0..q.len()).collect();
        let full = evaluate_restricted(&q, &all, Semantics::DfQuad, &cfg, alpha).unwrap();
        assert!(close(full, 0.165, 1e-12));
    }

    #[test]
    fn residual_checks() {
        let q = parse_qbaf(LOAN).unwrap();
        let s = evaluate(&q, Semantics::Qe, &EvalConfig::default()).unwrap();
        assert!(residual(&q, Semantics::Qe, &s) < 1e-12);
        let zeros = StrengthMap {
            strengths: vec![0.0; q.len()],
            converged: false,
            iterations_used: 0,
            max_residual: 0.0,
        };
        assert!(residual(&q, Semantics::DfQuad, &zeros) > 0.1);
    }

    #[test]
    fn oscillating_cycle_reports_non_convergence() {
        // a attacks b, b attacks a, both at 1: DF-QuAD sweeps flip between 0 and 1.
        let q = Qbaf::new([("a", 1.0), ("b", 1.0)], [("a", "b"), ("b", "a")], []).unwrap();
        let cfg = EvalConfig {
            tolerance: 1e-6,
            max_iterations: 50,
        };
        match evaluate(&q, Semantics::DfQuad, &cfg) {
            Err(Error::NonConvergence { last }) => {
                assert!(!last.converged);
                assert_eq!(last.iterations_used, 50);
                assert!(last.max_residual > cfg.tolerance);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = EvalConfig {
            tolerance: 0.0,
            max_iterations: 10,
        };
        assert!(bad.validate().is_err());
        let bad = EvalConfig {
            tolerance: 1e-6,
            max_iterations: 0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn semantics_names_round_trip() {
        for sem in Semantics::ALL {
            assert_eq!(sem.as_str().parse::<Semantics>().unwrap(), sem);
        }
        assert!("social".parse::<Semantics>().is_err());
    }
}
