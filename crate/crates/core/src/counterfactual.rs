//! Counterfactual base-score functions for a topic argument.
//!
//! A counterfactual is an alternative base-score function under which the
//! topic argument reaches a desired strength: exactly (strong), inside a
//! one-sided band of width `delta` (delta-approximate) or past the threshold
//! (weak). [`solve`] searches for one iteratively, moving every base score by
//! a small step in the direction its polarity (or a difference quotient)
//! prescribes, scaled by its priority.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{topic_profile, Polarity};
use crate::qbaf::{BaseScoreFn, Qbaf};
use crate::semantics::{evaluate_with, EvalConfig, Semantics, StrengthMap};

/// Slack applied to every validity comparison.
pub const VALIDITY_TOLERANCE: f64 = 1e-9;

/// Step halvings allowed before an overshooting search is declared
/// unreachable.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Strong,
    DeltaApproximate { delta: f64 },
    Weak,
}

impl ProblemKind {
    fn validate(&self) -> Result<()> {
        match *self {
            ProblemKind::DeltaApproximate { delta } if delta.is_nan() || delta <= 0.0 => Err(
                Error::InvalidInput(format!("delta must be positive, got {delta}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Topic argument, the strength it should reach and the problem variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CexQuery {
    pub topic: usize,
    pub desired: f64,
    pub kind: ProblemKind,
}

impl CexQuery {
    pub fn new(q: &Qbaf, topic: &str, desired: f64, kind: ProblemKind) -> Result<Self> {
        let topic = q.require(topic)?;
        if !(0.0..=1.0).contains(&desired) {
            return Err(Error::InvalidInput(format!(
                "desired strength {desired} is outside [0, 1]"
            )));
        }
        kind.validate()?;
        Ok(CexQuery {
            topic,
            desired,
            kind,
        })
    }
}

/// Whether `achieved` solves the problem, given the topic's strength
/// `original` under the unmodified base scores.
pub fn meets_target(kind: ProblemKind, original: f64, desired: f64, achieved: f64) -> bool {
    let tol = VALIDITY_TOLERANCE;
    let ascend = original < desired;
    match kind {
        ProblemKind::Strong => (achieved - desired).abs() <= tol,
        ProblemKind::DeltaApproximate { delta } => {
            if ascend {
                achieved >= desired - tol && achieved <= desired + delta + tol
            } else {
                achieved <= desired + tol && achieved >= desired - delta - tol
            }
        }
        ProblemKind::Weak => {
            if ascend {
                achieved >= desired - tol
            } else {
                achieved <= desired + tol
            }
        }
    }
}

/// `(sum |a - b|^p)^(1/p)` over all arguments.
pub fn lp_distance(a: &BaseScoreFn, b: &BaseScoreFn, p: f64) -> f64 {
    assert_eq!(
        a.len(),
        b.len(),
        "base score functions over different argument sets"
    );
    assert!(p >= 1.0, "L_p distance needs p >= 1");
    let sum: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

/// The topic at `s_star`, everything else at 0.
pub fn trivial_counterfactual(q: &Qbaf, topic: usize, s_star: f64) -> BaseScoreFn {
    let mut out = BaseScoreFn::zeros(q.len());
    out.set(topic, s_star);
    out
}

/// Re-evaluates `candidate` and checks it against the query's problem kind.
pub fn check_validity(
    q: &Qbaf,
    sem: Semantics,
    query: &CexQuery,
    candidate: &BaseScoreFn,
    eval: &EvalConfig,
) -> Result<bool> {
    if candidate == q.base() {
        return Err(Error::InvalidInput(
            "a counterfactual must differ from the original base scores".into(),
        ));
    }
    let original = evaluate_with(q, q.base(), sem, eval)?.get(query.topic);
    let achieved = evaluate_with(q, candidate, sem, eval)?.get(query.topic);
    Ok(meets_target(query.kind, original, query.desired, achieved))
}

/// Offset actually applied to `base` when probing with `h`: `h` itself if
/// it stays inside `[0, 1]`, else `-h`, else the larger in-range move.
pub fn effective_offset(base: f64, h: f64) -> f64 {
    if (0.0..=1.0).contains(&(base + h)) {
        h
    } else if (0.0..=1.0).contains(&(base - h)) {
        -h
    } else if 1.0 - base >= base {
        1.0 - base
    } else {
        -base
    }
}

/// Finite-difference sensitivity of the topic's strength to `source`'s base
/// score, measured against `baseline` (the evaluation of `q` as given).
pub fn difference_quotient(
    q: &Qbaf,
    sem: Semantics,
    source: usize,
    topic: usize,
    h: f64,
    baseline: &StrengthMap,
    eval: &EvalConfig,
) -> Result<f64> {
    if h == 0.0 || !(-1.0..=1.0).contains(&h) {
        return Err(Error::InvalidInput(format!(
            "quotient offset must lie in [-1, 0) or (0, 1], got {h}"
        )));
    }
    quotient_at(
        q,
        q.base(),
        sem,
        source,
        topic,
        h,
        baseline.get(topic),
        eval,
    )
}

#[allow(clippy::too_many_arguments)]
fn quotient_at(
    q: &Qbaf,
    scores: &BaseScoreFn,
    sem: Semantics,
    source: usize,
    topic: usize,
    h: f64,
    baseline_topic: f64,
    eval: &EvalConfig,
) -> Result<f64> {
    let step = effective_offset(scores.get(source), h);
    if step == 0.0 {
        return Ok(0.0);
    }
    let mut probe = scores.clone();
    probe.set(source, scores.get(source) + step);
    let moved = evaluate_with(q, &probe, sem, eval)?.get(topic);
    Ok((moved - baseline_topic) / step)
}

/// Copy of `candidate` with `victim`'s score set to 0.
pub fn nullify(candidate: &BaseScoreFn, victim: usize) -> BaseScoreFn {
    let mut out = candidate.clone();
    out.set(victim, 0.0);
    out
}

/// Solver ablations: which of polarity and priority guide the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "BL")]
    Baseline,
    #[serde(rename = "BL+pri")]
    BaselinePriority,
    #[serde(rename = "BL+pol")]
    BaselinePolarity,
    #[serde(rename = "CE-QArg")]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Baseline,
        Variant::BaselinePriority,
        Variant::BaselinePolarity,
        Variant::Full,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Baseline => "BL",
            Variant::BaselinePriority => "BL+pri",
            Variant::BaselinePolarity => "BL+pol",
            Variant::Full => "CE-QArg",
        }
    }

    pub fn use_polarity(self) -> bool {
        matches!(self, Variant::BaselinePolarity | Variant::Full)
    }

    pub fn use_priority(self) -> bool {
        matches!(self, Variant::BaselinePriority | Variant::Full)
    }

    /// `base` with the polarity/priority switches of this variant.
    pub fn configure(self, base: SolverConfig) -> SolverConfig {
        SolverConfig {
            use_polarity: self.use_polarity(),
            use_priority: self.use_priority(),
            ..base
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown solver variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Base step applied per sweep, before priority scaling.
    pub epsilon: f64,
    /// Offset used by difference quotients.
    pub h: f64,
    /// Priority of the topic with respect to itself; must exceed 1.
    pub self_priority: f64,
    pub use_polarity: bool,
    pub use_priority: bool,
    pub max_sweeps: usize,
    pub eval: EvalConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 0.01,
            h: 0.1,
            self_priority: 2.0,
            use_polarity: true,
            use_priority: true,
            max_sweeps: 100_000,
            eval: EvalConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.h == 0.0 || !(-1.0..=1.0).contains(&self.h) {
            return bad(format!("h must lie in [-1, 0) or (0, 1], got {}", self.h));
        }
        if self.self_priority.is_nan() || self.self_priority <= 1.0 {
            return bad(format!(
                "self priority must exceed 1, got {}",
                self.self_priority
            ));
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1".into());
        }
        self.eval.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CexResult {
    pub counterfactual: BaseScoreFn,
    pub valid: bool,
    /// Topic strength under the original base scores.
    pub original_strength: f64,
    /// Topic strength under `counterfactual`.
    pub achieved_strength: f64,
    pub l1: f64,
    pub l2: f64,
    pub sweeps: usize,
    pub wall_time: Duration,
}

impl CexResult {
    pub fn summary(&self) -> String {
        format!(
            "valid={} achieved={:.6} l1={:.6} l2={:.6} sweeps={} time={:.6}",
            self.valid,
            self.achieved_strength,
            self.l1,
            self.l2,
            self.sweeps,
            self.wall_time.as_secs_f64()
        )
    }
}

/// Searches for a counterfactual base-score function.
///
/// Directions are fixed once for positive (+1), negative (-1) and neutral (0)
/// arguments and re-derived every sweep from the sign of a difference
/// quotient for unknown ones (or for all arguments when polarity is off).
/// All directions flip when the topic has to lose strength. Every sweep
/// moves each score by `direction * step * priority`, clipped to `[0, 1]`.
/// A sweep that jumps clean over the target band is retried from the
/// pre-sweep state with half the step.
pub fn solve(q: &Qbaf, sem: Semantics, query: &CexQuery, cfg: &SolverConfig) -> Result<CexResult> {
    let clock = Instant::now();
    cfg.validate()?;
    query.kind.validate()?;
    let topic = query.topic;
    if topic >= q.len() {
        return Err(Error::InvalidInput(format!(
            "topic index {topic} out of range"
        )));
    }

    let original = evaluate_with(q, q.base(), sem, &cfg.eval)?;
    let start = original.get(topic);
    if (start - query.desired).abs() <= 1e-12 {
        return Err(Error::InvalidInput(format!(
            "desired strength {} equals the current strength of the topic",
            query.desired
        )));
    }
    let sign = if start < query.desired { 1.0 } else { -1.0 };

    let n = q.len();
    let profile =
        (cfg.use_polarity || cfg.use_priority).then(|| topic_profile(q, topic, cfg.self_priority));
    let priority: Vec<f64> = match (&profile, cfg.use_priority) {
        (Some(p), true) => p.priority.clone(),
        _ => vec![1.0; n],
    };
    let fixed: Vec<Option<f64>> = match (&profile, cfg.use_polarity) {
        (Some(p), true) => p
            .polarity
            .iter()
            .map(|pol| match pol {
                Polarity::Positive => Some(1.0),
                Polarity::Negative => Some(-1.0),
                Polarity::Neutral => Some(0.0),
                Polarity::Unknown => None,
            })
            .collect(),
        _ => vec![None; n],
    };

    let result = |scores: &BaseScoreFn, achieved: f64, valid: bool, sweeps: usize| CexResult {
        l1: lp_distance(q.base(), scores, 1.0),
        l2: lp_distance(q.base(), scores, 2.0),
        counterfactual: scores.clone(),
        valid,
        original_strength: start,
        achieved_strength: achieved,
        sweeps,
        wall_time: clock.elapsed(),
    };

    let mut current = q.base().clone();
    let mut achieved = start;
    let mut step = cfg.epsilon;
    let mut halvings = 0;
    let mut direction = vec![0.0; n];

    for sweep in 1..=cfg.max_sweeps {
        for v in 0..n {
            direction[v] = match fixed[v] {
                Some(d) => d,
                None => {
                    let dq = quotient_at(q, &current, sem, v, topic, cfg.h, achieved, &cfg.eval)?;
                    if dq > 0.0 {
                        1.0
                    } else if dq < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
            };
        }

        loop {
            let mut next = current.clone();
            for v in 0..n {
                next.set(v, current.get(v) + sign * direction[v] * step * priority[v]);
            }
            if next == current {
                return Err(Error::Unreachable {
                    reason: "no base score can move any further".into(),
                    best: Box::new(result(&current, achieved, false, sweep - 1)),
                });
            }
            let reached = evaluate_with(q, &next, sem, &cfg.eval)?.get(topic);
            if overshoots(query, start, reached) {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::Unreachable {
                        reason: format!("step halved {MAX_HALVINGS} times and still overshoots"),
                        best: Box::new(result(&current, achieved, false, sweep - 1)),
                    });
                }
                step *= 0.5;
                log::debug!("sweep {sweep} overshot to {reached:.6}; step halved to {step:e}");
                continue;
            }
            current = next;
            achieved = reached;
            break;
        }

        if meets_target(query.kind, start, query.desired, achieved) {
            return Ok(result(&current, achieved, true, sweep));
        }
    }

    Err(Error::SweepLimit {
        limit: cfg.max_sweeps,
        best: Box::new(result(&current, achieved, false, cfg.max_sweeps)),
    })
}

/// Whether a strength lies beyond the far edge of the target band.
fn overshoots(query: &CexQuery, start: f64, reached: f64) -> bool {
    let tol = VALIDITY_TOLERANCE;
    let ascend = start < query.desired;
    let width = match query.kind {
        ProblemKind::Strong => 0.0,
        ProblemKind::DeltaApproximate { delta } => delta,
        ProblemKind::Weak => return false,
    };
    if ascend {
        reached > query.desired + width + tol
    } else {
        reached < query.desired - width - tol
    }
}
