//! `pcgm`: check, plan, sweep, generate and benchmark contextual goal models.
//!
//! Exit status is 0 on success or an achievable verdict, 1 on an
//! unachievable verdict and 2 on usage, input or model errors.

mod args;

use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pcgm::genmodel::{random_model, worst_case_model};
use pcgm::model::TraceEntry;
use pcgm::reasoner::check_model;
use pcgm::sweep::{scaling_series, scaling_table, sweep_contexts_parallel, ScalingConfig};
use pcgm::{
    fixtures, parse_model_bytes, serialize_model, ContextSet, EffectiveConstraints, Evaluation,
    GeneratorConfig, Model, SweepReport, TimingReport,
};

#[derive(Parser)]
#[command(name = "pcgm", version, about = "Reasoning over pragmatic contextual goal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Text,
    /// JSON on standard output.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the root goal is achievable.
    Check(Query),
    /// Print the execution plan, one leaf id per line.
    Plan(Query),
    /// Evaluate the root under every context set until the budget runs out.
    Sweep {
        /// Model document, or `-` for standard input.
        model: PathBuf,
        #[arg(long, default_value = "10s", value_parser = args::budget)]
        budget: Duration,
        /// Worker threads.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
        #[arg(long = "require", value_name = "METRIC<THRESHOLD", value_parser = args::requirement)]
        require: Vec<pcgm::QualityConstraint>,
        #[arg(long, value_enum, default_value = "text")]
        output: Output,
    },
    /// Write a generated model document to standard output.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        contexts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// All-AND tree that is achievable under every context set.
        #[arg(long)]
        worst_case: bool,
    },
    /// Time the reasoner over a series of generated models.
    Bench {
        #[arg(long)]
        nodes_from: usize,
        #[arg(long)]
        nodes_to: usize,
        #[arg(long, default_value_t = 1000)]
        step: usize,
        #[arg(long, default_value_t = 20)]
        contexts: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = pcgm::sweep::DEFAULT_WARMUP)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        worst_case: bool,
        #[arg(long, value_enum, default_value = "text")]
        output: Output,
    },
    /// Write the bundled emergency-response case study to standard output.
    Fixture,
}

#[derive(Args)]
struct Query {
    /// Model document, or `-` for standard input.
    model: PathBuf,
    /// Comma-separated active contexts; an empty string activates none.
    #[arg(long, default_value = "")]
    context: String,
    /// Extra constraint on the root, e.g. `timeSeconds<60`. Repeatable.
    #[arg(long = "require", value_name = "METRIC<THRESHOLD", value_parser = args::requirement)]
    require: Vec<pcgm::QualityConstraint>,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

/// Error carrying the exit status to report.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check(q) => query(q, false),
        Command::Plan(q) => query(q, true),
        Command::Sweep { model, budget, jobs, require, output } => {
            let model = load(&model)?;
            let report = sweep_contexts_parallel(&model, budget, &root_constraints(require)?, jobs as usize)?;
            match output {
                Output::Text => print!("{}", sweep_text(&report)),
                Output::Structured => println!("{:#}", sweep_json(&report)),
            }
            Ok(0)
        }
        Command::Gen { nodes, contexts, seed, worst_case } => {
            let cfg = GeneratorConfig::new(nodes, contexts, seed);
            let model: Model = if worst_case { worst_case_model(&cfg)? } else { random_model(&cfg)? };
            print!("{}", serialize_model(&model));
            Ok(0)
        }
        Command::Bench { nodes_from, nodes_to, step, contexts, runs, warmup, seed, worst_case, output } => {
            let cfg = ScalingConfig { nodes_from, nodes_to, step, contexts, runs, warmup, worst_case, seed };
            let series = scaling_series::<f64>(&cfg)?;
            match output {
                Output::Text => print!("{}", scaling_table(&series)),
                Output::Structured => {
                    println!("{:#}", Value::Array(series.iter().map(timing_json).collect()))
                }
            }
            Ok(0)
        }
        Command::Fixture => {
            print!("{}", serialize_model(&fixtures::mpers::<f64>()));
            Ok(0)
        }
    }
}

fn load(path: &PathBuf) -> Result<Model, Failure> {
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut bytes).map_err(|e| Failure(format!("reading standard input: {e}")))?;
    } else {
        bytes = std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    parse_model_bytes(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn root_constraints(require: Vec<pcgm::QualityConstraint>) -> Result<EffectiveConstraints, Failure> {
    let mut out = EffectiveConstraints::none();
    for qc in require {
        out.tighten(qc)?;
    }
    Ok(out)
}

fn query(q: Query, show_plan: bool) -> Result<u8, Failure> {
    let model = load(&q.model)?;
    let ctx = ContextSet::for_model(&model, args::context_list(&q.context))?;
    let eval = check_model(&model, &ctx, &root_constraints(q.require)?)?;
    match q.output {
        Output::Text => print!("{}", evaluation_text(&eval, show_plan)),
        Output::Structured => println!("{:#}", evaluation_json(&ctx, &eval)),
    }
    Ok(if eval.outcome.is_achievable() { 0 } else { 1 })
}

fn evaluation_text(eval: &Evaluation, show_plan: bool) -> String {
    let mut out = String::new();
    match eval.outcome.plan() {
        Some(plan) if show_plan => {
            for leaf in plan.iter() {
                out.push_str(&format!("{leaf}\n"));
            }
        }
        Some(_) => out.push_str("ACHIEVABLE\n"),
        None => {
            out.push_str("UNACHIEVABLE\n");
            for TraceEntry { node, reason } in eval.outcome.trace() {
                out.push_str(&format!("  {node}: {reason}\n"));
            }
        }
    }
    out
}

fn evaluation_json(ctx: &ContextSet, eval: &Evaluation) -> Value {
    let trace: Vec<Value> = eval
        .outcome
        .trace()
        .iter()
        .map(|t| json!({ "node": t.node.as_str(), "reason": t.reason.to_string() }))
        .collect();
    json!({
        "verdict": if eval.outcome.is_achievable() { "achievable" } else { "unachievable" },
        "contexts": ctx.active().collect::<Vec<_>>(),
        "plan": eval.outcome.plan().map(|p| p.iter().map(|l| l.as_str()).collect::<Vec<_>>()),
        "trace": trace,
        "stats": { "nodes_visited": eval.stats.nodes_visited, "leaves_checked": eval.stats.leaves_checked },
    })
}

fn count_json(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(n) => json!(n),
        Err(_) => json!(n.to_string()),
    }
}

fn sweep_text(r: &SweepReport) -> String {
    let mut out = format!(
        "swept {}/{} context sets ({:.1}%) in {:.3?}\nunachievable: {}\n",
        r.evaluated_sets,
        r.total_sets,
        r.coverage * 100.0,
        r.elapsed,
        r.unachievable_sets.len()
    );
    for set in &r.unachievable_sets {
        out.push_str(&format!("  {set}\n"));
    }
    out
}

fn sweep_json(r: &SweepReport) -> Value {
    json!({
        "total_sets": count_json(r.total_sets),
        "evaluated_sets": count_json(r.evaluated_sets),
        "coverage": r.coverage,
        "complete": r.is_complete(),
        "elapsed_ns": r.elapsed.as_nanos() as u64,
        "unachievable": r.unachievable_sets.iter().map(|s| s.active().collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn timing_json(r: &TimingReport) -> Value {
    json!({
        "nodes": r.node_count,
        "contexts": r.context_count,
        "runs": r.runs,
        "mean_ns": r.mean.as_nanos() as u64,
        "min_ns": r.min.as_nanos() as u64,
        "max_ns": r.max.as_nanos() as u64,
        "achievable": r.achievable,
        "nodes_visited": r.stats.nodes_visited,
    })
}
