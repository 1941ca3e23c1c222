//! `qarg` command-line front end.
//!
//! Exit codes: 0 success, 1 parse, schema, usage or I/O errors, 2 evaluation
//! did not converge, 3 no valid counterfactual was found.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qarg::bench::{gen_cyclic, gen_tree, parse_bench_config, run_bench, CyclicSpec, TreeSpec};
use qarg::{
    evaluate, parse_qbaf, serialize_qbaf, serialize_with_scores, shapley_all, solve, topic_profile,
    CexQuery, Error, EvalConfig, ProblemKind, Qbaf, Semantics, ShapleyConfig, SolverConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "qarg",
    version,
    about = "Gradual semantics and counterfactual explanations for QBAFs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the final strength of every argument.
    Eval(EvalArgs),
    /// Search for a counterfactual base-score function.
    Explain(ExplainArgs),
    /// Print Shapley importance of every argument for a topic.
    Attribute(AttributeArgs),
    /// Print polarity and priority of every argument towards a topic.
    Polarity(PolarityArgs),
    /// Write a randomly generated QBAF.
    Gen(GenArgs),
    /// Run the experiments of a bench configuration.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// QBAF JSON file.
    #[arg(long)]
    qbaf: PathBuf,
    #[arg(long, default_value = "qe", value_parser = parse_semantics)]
    semantics: Semantics,
    /// Convergence tolerance for cyclic graphs.
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    tol: f64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
}

impl Common {
    fn eval(&self) -> EvalConfig {
        EvalConfig {
            tolerance: self.tol,
            max_iterations: self.max_iters as usize,
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Strong,
    Delta,
    Weak,
}

#[derive(Debug, Args)]
struct ExplainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    topic: String,
    /// Desired strength of the topic, in [0, 1].
    #[arg(long, value_parser = unit_interval)]
    desired: f64,
    #[arg(long, value_enum, default_value_t = Kind::Delta)]
    kind: Kind,
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    delta: f64,
    /// Update step.
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    epsilon: f64,
    /// Offset of the difference quotient.
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    h: f64,
    /// Priority of the topic towards itself.
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    c: f64,
    #[arg(long)]
    no_polarity: bool,
    #[arg(long)]
    no_priority: bool,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_sweeps: u64,
    /// Write the counterfactual QBAF here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AttributeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    topic: String,
    /// Largest framework handled by exact enumeration.
    #[arg(long, default_value_t = qarg::attribution::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PolarityArgs {
    #[arg(long)]
    qbaf: PathBuf,
    #[arg(long)]
    topic: String,
    /// Priority of the topic towards itself.
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    c: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Tree,
    Cyclic,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(value_enum)]
    shape: Shape,
    /// Tree branching factor.
    #[arg(long, default_value_t = 2)]
    width: usize,
    /// Tree depth in edge levels.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    n_args: usize,
    /// Relation count; defaults to the argument count.
    #[arg(long)]
    n_rels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving one CSV per experiment.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

fn parse_semantics(s: &str) -> Result<Semantics, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive number"))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. } => 2,
        Error::Unreachable { .. } | Error::SweepLimit { .. } => 3,
        _ => 1,
    }
}

fn load(path: &Path) -> qarg::Result<Qbaf> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qbaf(&text).map_err(|e| match e {
        Error::Syntax(m) => Error::Syntax(format!("{}: {m}", path.display())),
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write(path: &Path, text: &str) -> qarg::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_eval(args: &EvalArgs) -> qarg::Result<()> {
    let cfg = args.common.eval();
    cfg.validate()?;
    let q = load(&args.common.qbaf)?;
    let strengths = evaluate(&q, args.common.semantics, &cfg)?;
    for (id, s) in strengths.by_id(&q) {
        println!("{id} {s:.6}");
    }
    Ok(())
}

fn cmd_explain(args: &ExplainArgs) -> qarg::Result<()> {
    let q = load(&args.common.qbaf)?;
    let kind = match args.kind {
        Kind::Strong => ProblemKind::Strong,
        Kind::Delta => ProblemKind::DeltaApproximate { delta: args.delta },
        Kind::Weak => ProblemKind::Weak,
    };
    let cfg = SolverConfig {
        epsilon: args.epsilon,
        h: args.h,
        self_priority: args.c,
        use_polarity: !args.no_polarity,
        use_priority: !args.no_priority,
        max_sweeps: args.max_sweeps as usize,
        eval: args.common.eval(),
    };
    cfg.validate()?;
    let query = CexQuery::new(&q, &args.topic, args.desired, kind)?;
    match solve(&q, args.common.semantics, &query, &cfg) {
        Ok(found) => {
            let doc = serialize_with_scores(&q, &found.counterfactual);
            match &args.out {
                Some(path) => write(path, &doc)?,
                None => print!("{doc}"),
            }
            println!("{}", found.summary());
            Ok(())
        }
        Err(e) => {
            if let Some(best) = e.best_effort() {
                println!("{}", best.summary());
            }
            Err(e)
        }
    }
}

fn cmd_attribute(args: &AttributeArgs) -> qarg::Result<()> {
    let q = load(&args.common.qbaf)?;
    let topic = q.require(&args.topic)?;
    let cfg = ShapleyConfig {
        eval: args.common.eval(),
        exact_limit: args.exact_limit,
    };
    let report = shapley_all(&q, args.common.semantics, topic, &cfg)?;
    let mut csv = String::from("argument,importance\n");
    for (id, phi) in &report.scores {
        println!("{id} {phi:.6}");
        csv.push_str(&format!("{id},{phi:.6}\n"));
    }
    if let Some(path) = &args.csv {
        write(path, &csv)?;
    }
    Ok(())
}

fn cmd_polarity(args: &PolarityArgs) -> qarg::Result<()> {
    let q = load(&args.qbaf)?;
    let topic = q.require(&args.topic)?;
    let profile = topic_profile(&q, topic, args.c);
    for (v, id) in q.ids().iter().enumerate() {
        println!(
            "{id} {} {:.6}",
            profile.polarity[v].as_str(),
            profile.priority[v]
        );
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> qarg::Result<()> {
    let generated = match args.shape {
        Shape::Tree => gen_tree(&TreeSpec {
            width: args.width,
            depth: args.depth,
            seed: args.seed,
        })?,
        Shape::Cyclic => gen_cyclic(&CyclicSpec {
            n_args: args.n_args,
            n_rels: args.n_rels.unwrap_or(args.n_args),
            seed: args.seed,
        })?,
    };
    let doc = serialize_qbaf(&generated.qbaf);
    match &args.out {
        Some(path) => write(path, &doc)?,
        None => print!("{doc}"),
    }
    eprintln!("topic: {}", generated.qbaf.id(generated.topic));
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> qarg::Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let cfg = parse_bench_config(&text)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    for path in pool.install(|| run_bench(&cfg, &args.out))? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QBAF_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Attribute(a) => cmd_attribute(a),
        Command::Polarity(a) => cmd_polarity(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
