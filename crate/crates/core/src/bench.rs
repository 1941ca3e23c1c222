//! Random QBAF generators and the experiment harnesses: effectiveness
//! (variant ablation), scalability and robustness, each reporting to CSV.
//!
//! Instances are independent and solved on the ambient rayon pool. Every
//! instance derives its own seed from the experiment seed, so results do not
//! depend on the pool size (runtime columns aside).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counterfactual::{
    check_validity, lp_distance, solve, CexQuery, CexResult, ProblemKind, SolverConfig, Variant,
};
use crate::error::{Error, Result};
use crate::qbaf::{BaseScoreFn, Qbaf};
use crate::semantics::{evaluate_with, Semantics};

/// Full `width`-ary tree with `depth` edge levels; edges point child to parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub width: usize,
    pub depth: usize,
    pub seed: u64,
}

impl TreeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.width) || !(1..=8).contains(&self.depth) {
            return Err(Error::InvalidInput(format!(
                "tree width must be 2..=4 and depth 1..=8, got width {} depth {}",
                self.width, self.depth
            )));
        }
        Ok(())
    }

    /// `(w^(d+1) - 1) / (w - 1)`.
    pub fn node_count(&self) -> usize {
        (0..=self.depth)
            .map(|level| self.width.pow(level as u32))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSpec {
    pub n_args: usize,
    pub n_rels: usize,
    pub seed: u64,
}

impl CyclicSpec {
    /// One relation per argument.
    pub fn balanced(n_args: usize, seed: u64) -> Self {
        CyclicSpec {
            n_args,
            n_rels: n_args,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_args < 2 {
            return Err(Error::InvalidInput(
                "a random graph needs at least 2 arguments".into(),
            ));
        }
        if self.n_rels > self.n_args * (self.n_args - 1) {
            return Err(Error::InvalidInput(format!(
                "{} relations do not fit between {} arguments",
                self.n_rels, self.n_args
            )));
        }
        Ok(())
    }
}

/// A generated framework together with its designated topic.
#[derive(Debug, Clone)]
pub struct Generated {
    pub qbaf: Qbaf,
    pub topic: usize,
}

fn names(n: usize) -> Vec<String> {
    let digits = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("a{i:0digits$}")).collect()
}

type Edges<'a> = Vec<(&'a str, &'a str)>;

fn relation_split<'a>(
    rng: &mut ChaCha8Rng,
    edges: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> (Edges<'a>, Edges<'a>) {
    let mut attacks = Vec::new();
    let mut supports = Vec::new();
    for e in edges {
        if rng.gen_bool(0.5) {
            attacks.push(e);
        } else {
            supports.push(e);
        }
    }
    (attacks, supports)
}

/// Random full tree; the root (`a0…0`) is the topic. Arguments are numbered
/// breadth-first with zero padding, so id order is breadth-first order.
pub fn gen_tree(spec: &TreeSpec) -> Result<Generated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.node_count();
    let ids = names(n);
    let scores: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let edges = (1..n).map(|child| (ids[child].as_str(), ids[(child - 1) / spec.width].as_str()));
    let (attacks, supports) = relation_split(&mut rng, edges);
    let qbaf = Qbaf::new(
        ids.iter().map(String::as_str).zip(scores),
        attacks,
        supports,
    )?;
    Ok(Generated { qbaf, topic: 0 })
}

/// Random graph with `n_rels` distinct relations over ordered pairs of
/// distinct arguments and a uniformly chosen topic.
pub fn gen_cyclic(spec: &CyclicSpec) -> Result<Generated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_args;
    let ids = names(n);
    let scores: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut picks = sample(&mut rng, n * (n - 1), spec.n_rels).into_vec();
    picks.sort_unstable();
    let edges = picks.into_iter().map(|k| {
        let from = k / (n - 1);
        let r = k % (n - 1);
        let to = if r < from { r } else { r + 1 };
        (ids[from].as_str(), ids[to].as_str())
    });
    let (attacks, supports) = relation_split(&mut rng, edges);
    let topic = rng.gen_range(0..n);
    let qbaf = Qbaf::new(
        ids.iter().map(String::as_str).zip(scores),
        attacks,
        supports,
    )?;
    Ok(Generated { qbaf, topic })
}

/// Random framework for property tests: every ordered pair (every pair
/// respecting a hidden random order when `acyclic`) becomes an edge with
/// probability `edge_prob`. Self-loops are never generated.
pub fn gen_random(n: usize, edge_prob: f64, acyclic: bool, seed: u64) -> Result<Qbaf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = names(n);
    let scores: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut rank: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        rank.swap(i, rng.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || (acyclic && rank[a] >= rank[b]) {
                continue;
            }
            if rng.gen_bool(edge_prob) {
                edges.push((ids[a].as_str(), ids[b].as_str()));
            }
        }
    }
    let (attacks, supports) = relation_split(&mut rng, edges);
    Qbaf::new(
        ids.iter().map(String::as_str).zip(scores),
        attacks,
        supports,
    )
}

/// Shape of the instances in one experiment row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSpec {
    Tree {
        width: usize,
        depth: usize,
    },
    Cyclic {
        n_args: usize,
        n_rels: Option<usize>,
    },
}

impl InstanceSpec {
    pub fn generate(&self, seed: u64) -> Result<Generated> {
        match *self {
            InstanceSpec::Tree { width, depth } => gen_tree(&TreeSpec { width, depth, seed }),
            InstanceSpec::Cyclic { n_args, n_rels } => gen_cyclic(&CyclicSpec {
                n_args,
                n_rels: n_rels.unwrap_or(n_args),
                seed,
            }),
        }
    }

    /// Row label carrying both the depth (edge levels) and the argument count.
    pub fn descriptor(&self) -> String {
        match *self {
            InstanceSpec::Tree { width, depth } => {
                let nodes = TreeSpec {
                    width,
                    depth,
                    seed: 0,
                }
                .node_count();
                format!("tree-w{width}-d{depth}-n{nodes}")
            }
            InstanceSpec::Cyclic { n_args, n_rels } => {
                format!("cyclic-n{n_args}-r{}", n_rels.unwrap_or(n_args))
            }
        }
    }
}

/// Seed of instance `i` of spec `s` in an experiment seeded with `seed`.
fn instance_seed(seed: u64, spec_ix: usize, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(spec_ix as u64);
    rng.set_word_pos(2 * i as u128);
    rng.gen()
}

/// Desired strength drawn uniformly from `[0, 1]`, redrawn while it lies
/// within 1e-6 of the current strength.
pub fn sample_desired(seed: u64, current: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    loop {
        let s = rng.gen::<f64>();
        if (s - current).abs() > 1e-6 {
            return s;
        }
    }
}

/// One generated problem: framework, topic and desired strength.
#[derive(Debug, Clone)]
pub struct Instance {
    pub qbaf: Qbaf,
    pub topic: usize,
    pub desired: f64,
}

fn make_instance(
    spec: &InstanceSpec,
    seed: u64,
    sem: Semantics,
    solver: &SolverConfig,
) -> Result<Instance> {
    let Generated { qbaf, topic } = spec.generate(seed)?;
    let current = evaluate_with(&qbaf, qbaf.base(), sem, &solver.eval)?.get(topic);
    Ok(Instance {
        desired: sample_desired(seed, current),
        qbaf,
        topic,
    })
}

/// Outcome of one solver call inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    valid: bool,
    l1: Option<f64>,
    l2: Option<f64>,
    runtime: f64,
}

fn run_one(inst: &Instance, sem: Semantics, kind: ProblemKind, cfg: &SolverConfig) -> Outcome {
    let query = CexQuery {
        topic: inst.topic,
        desired: inst.desired,
        kind,
    };
    let clock = Instant::now();
    let res = solve(&inst.qbaf, sem, &query, cfg);
    let runtime = clock.elapsed().as_secs_f64();
    match res {
        Ok(r) => {
            let verified = check_validity(&inst.qbaf, sem, &query, &r.counterfactual, &cfg.eval)
                .unwrap_or(false);
            if !verified {
                log::warn!("solver result failed re-verification");
            }
            Outcome {
                valid: verified,
                l1: Some(r.l1),
                l2: Some(r.l2),
                runtime,
            }
        }
        Err(e) => {
            log::info!("instance not solved: {e}");
            let best = e.best_effort();
            Outcome {
                valid: false,
                l1: best.map(|b| b.l1),
                l2: best.map(|b| b.l2),
                runtime,
            }
        }
    }
}

/// Aggregates over the instances of one (spec, variant) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub spec: String,
    pub variant: String,
    pub validity_rate: f64,
    pub mean_l1: f64,
    pub mean_l2: f64,
    pub mean_runtime_s: f64,
    pub median_runtime_s: f64,
    pub n_instances: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    pub fn row(&self, spec: &str, variant: &str) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.spec == spec && r.variant == variant)
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

fn aggregate_row(spec: String, variant: Variant, outcomes: &[Outcome]) -> ExperimentRow {
    let valid = outcomes.iter().filter(|o| o.valid).count();
    ExperimentRow {
        spec,
        variant: variant.as_str().to_owned(),
        validity_rate: valid as f64 / outcomes.len() as f64,
        mean_l1: mean(outcomes.iter().filter_map(|o| o.l1)),
        mean_l2: mean(outcomes.iter().filter_map(|o| o.l2)),
        mean_runtime_s: mean(outcomes.iter().map(|o| o.runtime)),
        median_runtime_s: median(outcomes.iter().map(|o| o.runtime).collect()),
        n_instances: outcomes.len(),
    }
}

/// Settings shared by the effectiveness and scalability harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effectiveness {
    pub semantics: Semantics,
    pub specs: Vec<InstanceSpec>,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub n_instances: usize,
    #[serde(default)]
    pub seed: u64,
}

fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

fn default_delta() -> f64 {
    0.1
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_p() -> f64 {
    1.0
}

impl Effectiveness {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            ..SolverConfig::default()
        }
    }
}

/// Solves every instance with every requested variant; one row per
/// (spec, variant). Failed solves count as invalid rather than aborting.
pub fn run_effectiveness(exp: &Effectiveness) -> Result<ExperimentReport> {
    if exp.n_instances == 0 {
        return Err(Error::EmptyExperiment);
    }
    let base = exp.solver();
    base.validate()?;
    let kind = ProblemKind::DeltaApproximate { delta: exp.delta };
    let mut report = ExperimentReport::default();
    for (spec_ix, spec) in exp.specs.iter().enumerate() {
        let per_instance: Vec<Vec<Outcome>> = (0..exp.n_instances)
            .into_par_iter()
            .map(|i| {
                let seed = instance_seed(exp.seed, spec_ix, i);
                let inst = make_instance(spec, seed, exp.semantics, &base)?;
                Ok(exp
                    .variants
                    .iter()
                    .map(|v| run_one(&inst, exp.semantics, kind, &v.configure(base)))
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (k, variant) in exp.variants.iter().enumerate() {
            let outcomes: Vec<Outcome> = per_instance.iter().map(|o| o[k]).collect();
            report
                .rows
                .push(aggregate_row(spec.descriptor(), *variant, &outcomes));
        }
    }
    Ok(report)
}

/// Effectiveness restricted to the full solver, one row per size point.
pub fn run_scalability(exp: &Effectiveness) -> Result<ExperimentReport> {
    run_effectiveness(&Effectiveness {
        variants: vec![Variant::Full],
        ..exp.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Robustness {
    pub semantics: Semantics,
    pub spec: InstanceSpec,
    pub e_grid: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub n_instances: usize,
    /// Exponent of the distance used for explanation differences.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub e: f64,
    /// Mean distance between the counterfactuals of original and perturbed inputs.
    pub explanation_difference: f64,
    /// Mean topic-strength change when the counterfactual itself is perturbed.
    pub strength_difference: f64,
    pub n_instances: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub rows: Vec<RobustnessRow>,
}

/// Every score raised by `e` and clipped at 1.
pub fn perturb(scores: &BaseScoreFn, e: f64) -> BaseScoreFn {
    let mut out = scores.clone();
    for v in 0..out.len() {
        out.set(v, scores.get(v) + e);
    }
    out
}

/// Robustness against input perturbation (distance between explanations of
/// `tau` and `tau + e`) and against noisy execution (strength change under
/// `tau' + e`). Instances whose solves fail are left out of the means.
pub fn run_robustness(exp: &Robustness) -> Result<RobustnessReport> {
    if exp.n_instances == 0 {
        return Err(Error::EmptyExperiment);
    }
    if exp.e_grid.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(Error::InvalidInput(
            "perturbations must be non-negative".into(),
        ));
    }
    let solver = SolverConfig {
        epsilon: exp.epsilon,
        ..SolverConfig::default()
    };
    solver.validate()?;
    let kind = ProblemKind::DeltaApproximate { delta: exp.delta };
    let sem = exp.semantics;

    // per instance: one (metric1, metric2) per grid point, None where a solve failed
    let per_instance: Vec<Vec<Option<(f64, f64)>>> = (0..exp.n_instances)
        .into_par_iter()
        .map(|i| {
            let seed = instance_seed(exp.seed, 0, i);
            let inst = make_instance(&exp.spec, seed, sem, &solver)?;
            let query = CexQuery {
                topic: inst.topic,
                desired: inst.desired,
                kind,
            };
            let Ok(found) = solve(&inst.qbaf, sem, &query, &solver) else {
                return Ok(vec![None; exp.e_grid.len()]);
            };
            let row = exp
                .e_grid
                .iter()
                .map(|&e| robustness_point(&inst, sem, &query, &solver, &found, e, exp.p))
                .collect();
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let rows = exp
        .e_grid
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let points: Vec<(f64, f64)> = per_instance.iter().filter_map(|r| r[k]).collect();
            RobustnessRow {
                e,
                explanation_difference: mean(points.iter().map(|p| p.0)),
                strength_difference: mean(points.iter().map(|p| p.1)),
                n_instances: points.len(),
            }
        })
        .collect();
    Ok(RobustnessReport { rows })
}

fn robustness_point(
    inst: &Instance,
    sem: Semantics,
    query: &CexQuery,
    solver: &SolverConfig,
    found: &CexResult,
    e: f64,
    p: f64,
) -> Option<(f64, f64)> {
    let shifted = inst.qbaf.with_base(perturb(inst.qbaf.base(), e)).ok()?;
    let explanation = if e == 0.0 {
        0.0
    } else {
        let again = solve(&shifted, sem, query, solver).ok()?;
        lp_distance(&found.counterfactual, &again.counterfactual, p)
    };
    let noisy = perturb(&found.counterfactual, e);
    let moved = evaluate_with(&inst.qbaf, &noisy, sem, &solver.eval)
        .ok()?
        .get(inst.topic);
    Some((explanation, (moved - found.achieved_strength).abs()))
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let ranks = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    };
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// `%g`-style rendering with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    // rounding can push the mantissa to the next decade
    let exp = if format!("{:.5e}", v.abs()).starts_with("10") {
        exp + 1
    } else {
        exp
    };
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent formatting");
        format!("{}e{exponent}", trim(mantissa.to_owned()))
    }
}

/// Tabular reports that render to CSV.
pub trait CsvTable {
    fn header(&self) -> Vec<&'static str>;
    fn records(&self) -> Vec<Vec<String>>;

    fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for rec in self.records() {
            let _ = writeln!(out, "{}", rec.join(","));
        }
        out
    }
}

impl CsvTable for ExperimentReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "spec",
            "variant",
            "validity_rate",
            "mean_l1",
            "mean_l2",
            "mean_runtime_s",
            "median_runtime_s",
            "n_instances",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.spec.clone(),
                    r.variant.clone(),
                    format_sig6(r.validity_rate),
                    format_sig6(r.mean_l1),
                    format_sig6(r.mean_l2),
                    format_sig6(r.mean_runtime_s),
                    format_sig6(r.median_runtime_s),
                    r.n_instances.to_string(),
                ]
            })
            .collect()
    }
}

impl CsvTable for RobustnessReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "e",
            "explanation_difference",
            "strength_difference",
            "n_instances",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    format_sig6(r.e),
                    format_sig6(r.explanation_difference),
                    format_sig6(r.strength_difference),
                    r.n_instances.to_string(),
                ]
            })
            .collect()
    }
}

/// Writes the report in one piece; nothing is left behind on failure.
pub fn write_csv(report: &impl CsvTable, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv()).map_err(|e| Error::io(path, e))
}

/// One entry of a bench configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Experiment {
    Effectiveness {
        name: String,
        #[serde(flatten)]
        settings: Effectiveness,
    },
    Scalability {
        name: String,
        #[serde(flatten)]
        settings: Effectiveness,
    },
    Robustness {
        name: String,
        #[serde(flatten)]
        settings: Robustness,
    },
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Effectiveness { name, .. }
            | Experiment::Scalability { name, .. }
            | Experiment::Robustness { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub experiments: Vec<Experiment>,
}

pub fn parse_bench_config(text: &str) -> Result<BenchConfig> {
    let cfg: BenchConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if cfg.experiments.is_empty() {
        return Err(Error::Schema("configuration lists no experiments".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for exp in &cfg.experiments {
        let name = exp.name();
        if name.is_empty() || name.contains(['/', '\\']) || !seen.insert(name) {
            return Err(Error::Schema(format!(
                "experiment name `{name}` is empty, a path or repeated"
            )));
        }
    }
    Ok(cfg)
}

/// Runs every experiment, writing `<out_dir>/<name>.csv` for each. All
/// reports are computed before any file is written.
pub fn run_bench(cfg: &BenchConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut rendered = Vec::new();
    for exp in &cfg.experiments {
        log::info!("running experiment `{}`", exp.name());
        let csv = match exp {
            Experiment::Effectiveness { settings, .. } => run_effectiveness(settings)?.to_csv(),
            Experiment::Scalability { settings, .. } => run_scalability(settings)?.to_csv(),
            Experiment::Robustness { settings, .. } => run_robustness(settings)?.to_csv(),
        };
        rendered.push((out_dir.join(format!("{}.csv", exp.name())), csv));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (path, csv) in rendered {
        std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tree_of_depth_one() {
        let g = gen_tree(&TreeSpec {
            width: 2,
            depth: 1,
            seed: 3,
        })
        .unwrap();
        assert_eq!(g.qbaf.len(), 3);
        assert_eq!(g.qbaf.edge_count(), 2);
        assert_eq!(g.topic, 0);
        assert!(g.qbaf.is_acyclic());
        assert_eq!(g.qbaf.predecessors(0).len(), 2);
    }

    #[test]
    fn tree_node_counts() {
        assert_eq!(
            TreeSpec {
                width: 4,
                depth: 8,
                seed: 0
            }
            .node_count(),
            87_381
        );
        assert_eq!(
            TreeSpec {
                width: 4,
                depth: 6,
                seed: 0
            }
            .node_count(),
            5_461
        );
        assert_eq!(
            TreeSpec {
                width: 4,
                depth: 7,
                seed: 0
            }
            .node_count(),
            21_845
        );
        assert_eq!(
            TreeSpec {
                width: 2,
                depth: 5,
                seed: 0
            }
            .node_count(),
            63
        );
        assert!(TreeSpec {
            width: 5,
            depth: 2,
            seed: 0
        }
        .validate()
        .is_err());
        assert!(TreeSpec {
            width: 2,
            depth: 0,
            seed: 0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn tree_generation_is_deterministic() {
        let spec = TreeSpec {
            width: 3,
            depth: 3,
            seed: 11,
        };
        let a = gen_tree(&spec).unwrap();
        let b = gen_tree(&spec).unwrap();
        assert_eq!(a.qbaf, b.qbaf);
        let c = gen_tree(&TreeSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.qbaf, c.qbaf);
    }

    #[test]
    fn two_argument_random_graph_uses_both_pairs() {
        let g = gen_cyclic(&CyclicSpec {
            n_args: 2,
            n_rels: 2,
            seed: 5,
        })
        .unwrap();
        assert_eq!(g.qbaf.edge_count(), 2);
        assert!(g.qbaf.relation(0, 1).is_some() && g.qbaf.relation(1, 0).is_some());
        assert!(!g.qbaf.is_acyclic());
    }

    #[test]
    fn random_graph_shape() {
        let spec = CyclicSpec::balanced(100, 9);
        let g = gen_cyclic(&spec).unwrap();
        assert_eq!(g.qbaf.len(), 100);
        assert_eq!(g.qbaf.edge_count(), 100);
        assert!(g.topic < 100);
        let again = gen_cyclic(&spec).unwrap();
        assert_eq!(g.qbaf, again.qbaf);
        assert_eq!(g.topic, again.topic);
        assert!(gen_cyclic(&CyclicSpec {
            n_args: 3,
            n_rels: 7,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn random_acyclic_generator_is_acyclic() {
        for seed in 0..20 {
            assert!(gen_random(12, 0.3, true, seed).unwrap().is_acyclic());
        }
    }

    #[test]
    fn zero_instances_is_an_error() {
        let exp = Effectiveness {
            semantics: Semantics::Qe,
            specs: vec![InstanceSpec::Tree { width: 2, depth: 2 }],
            variants: all_variants(),
            delta: 0.1,
            epsilon: 0.01,
            n_instances: 0,
            seed: 0,
        };
        assert!(matches!(
            run_effectiveness(&exp),
            Err(Error::EmptyExperiment)
        ));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.78), "0.78");
        assert_eq!(format_sig6(16.52), "16.52");
        assert_eq!(format_sig6(1.23456789), "1.23457");
        assert_eq!(format_sig6(123456.789), "123457");
        assert_eq!(format_sig6(1e-8), "1e-8");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(9.999999e-6), "1e-5");
        assert_eq!(format_sig6(0.00004955), "4.955e-5");
        assert_eq!(format_sig6(-0.5), "-0.5");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn csv_shapes() {
        let empty = ExperimentReport::default();
        assert_eq!(empty.to_csv().lines().count(), 1);
        let one = ExperimentReport {
            rows: vec![ExperimentRow {
                spec: "tree-w2-d1-n3".into(),
                variant: "CE-QArg".into(),
                validity_rate: 1.0,
                mean_l1: 0.5,
                mean_l2: 0.25,
                mean_runtime_s: 1e-4,
                median_runtime_s: 1e-4,
                n_instances: 3,
            }],
        };
        let text = one.to_csv();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "tree-w2-d1-n3,CE-QArg,1,0.5,0.25,0.0001,0.0001,3"
        );
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!(spearman(&[1.0, 2.0], &[5.0, 5.0]).is_nan());
    }

    #[test]
    fn perturbation_clips_at_one() {
        let s = BaseScoreFn::from_vec(vec![0.2, 0.95]).unwrap();
        assert_eq!(perturb(&s, 0.1).as_slice(), &[0.30000000000000004, 1.0]);
    }

    #[test]
    fn config_parsing() {
        let text = r#"{"experiments": [
            {"type": "effectiveness", "name": "t1", "semantics": "qe",
             "specs": [{"tree": {"width": 2, "depth": 3}}], "n_instances": 2},
            {"type": "robustness", "name": "rob", "semantics": "qe",
             "spec": {"cyclic": {"n_args": 10, "n_rels": null}}, "e_grid": [0.001, 0.1], "n_instances": 2}
        ]}"#;
        let cfg = parse_bench_config(text).unwrap();
        assert_eq!(cfg.experiments.len(), 2);
        match &cfg.experiments[0] {
            Experiment::Effectiveness { settings, .. } => {
                assert_eq!(settings.variants.len(), 4);
                assert_eq!(settings.delta, 0.1);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_bench_config(r#"{"experiments": []}"#).is_err());
        assert!(parse_bench_config(r#"{"experiments": [{"type": "nope"}]}"#).is_err());
    }
}
