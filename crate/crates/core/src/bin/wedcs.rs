use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use wedcs::edcs::{self, parameters_for, parse_rational, EdcsParams, ParamMode};
use wedcs::generators::{generate, GenSpec};
use wedcs::graph::{relevant_subgraph, MultiGraph, Subgraph};
use wedcs::io::{embed_subgraph, parse_graph, write_edges, write_graph, write_subgraph, GraphFile};
use wedcs::matching::DEFAULT_BUDGET;
use wedcs::streaming::Variant;
use wedcs::trial::{parse_seeds, run_trials, to_csv, TrialConfig};

#[derive(Parser)]
#[command(name = "wedcs", version, about = "Weighted EDCS sparsifiers and random-order streaming b-matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a JSON spec.
    Gen(GenArgs),
    /// Build a sparsifier offline by local search.
    Build(BuildArgs),
    /// Run seeded stream trials.
    Stream(StreamArgs),
    /// Check a subgraph against both sparsifier properties.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Spec file, or an inline JSON object.
    #[arg(long)]
    spec: String,
    /// Graph output (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference subgraph output for structured families.
    #[arg(long)]
    ref_out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long)]
    beta: Option<u64>,
    /// Defaults to beta - 2.
    #[arg(long)]
    beta_minus: Option<u64>,
    /// Use the smallest parameters satisfying the streaming guarantee.
    #[arg(long)]
    theorem_params: bool,
    #[arg(long, default_value = "0.1")]
    epsilon: String,
    /// Weight cap (defaults to the graph header's W).
    #[arg(long = "W")]
    w: Option<u32>,
}

impl ParamArgs {
    fn resolve(&self, graph: &MultiGraph) -> Result<EdcsParams> {
        let epsilon = parse_rational(&self.epsilon)?;
        let w = self.w.unwrap_or(graph.w_cap());
        let params = if self.theorem_params {
            if self.beta.is_some() || self.beta_minus.is_some() {
                bail!("--theorem-params excludes --beta/--beta-minus");
            }
            parameters_for(epsilon, w, ParamMode::Theorem)?
        } else {
            let beta = self.beta.ok_or_else(|| anyhow!("--beta (or --theorem-params) is required"))?;
            match self.beta_minus {
                Some(bm) => EdcsParams::new(w, epsilon, beta, bm)?,
                None => parameters_for(epsilon, w, ParamMode::Practical { beta })?,
            }
        };
        info!("parameters: {params}");
        Ok(params)
    }
}

#[derive(Args)]
struct BuildArgs {
    graph: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    /// Start the local search from this subgraph instead of the empty one.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Project onto the relevant edges first.
    #[arg(long)]
    relevant: bool,
    /// Subgraph output (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report output (stderr if absent).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "1")]
    One,
    #[value(name = "3")]
    Three,
}

#[derive(Args)]
struct StreamArgs {
    graph: PathBuf,
    /// Seeds: `7`, `1..100`, `as-is` (file order), comma separated.
    #[arg(long, alias = "seeds", required = true)]
    seed: String,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "1")]
    variant: VariantArg,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    oracle_budget: u64,
    /// Run the bare algorithm without the small-output fallback.
    #[arg(long)]
    no_controller: bool,
    /// JSON report output (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Exit 1 if any trial falls below the guarantee.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    subgraph: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

/// Input problems exit with 2, failed checks with 1.
enum Failure {
    Input(anyhow::Error),
    Check,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("EDCS_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::Stream(a) => cmd_stream(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<GraphFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let text = if args.spec.trim_start().starts_with('{') {
        args.spec.clone()
    } else {
        fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec))?
    };
    let spec: GenSpec = serde_json::from_str(&text).context("parsing spec")?;
    let inst = generate(&spec).map_err(anyhow::Error::from)?;
    emit(args.out.as_deref(), &write_graph(&inst.graph, &inst.caps))?;
    if let Some(path) = args.ref_out {
        let ids = inst
            .reference_h
            .ok_or_else(|| anyhow!("this generator has no reference subgraph"))?;
        emit(Some(&path), &write_edges(&inst.graph, &inst.caps, ids))?;
    }
    Ok(())
}

fn cmd_build(args: BuildArgs) -> Result<(), Failure> {
    let GraphFile { graph, caps } = load(&args.graph)?;
    let params = args.params.resolve(&graph)?;
    let (work, caps) = if args.relevant {
        let h = relevant_subgraph(&graph, &caps);
        let ids = h.edge_ids();
        let projected = MultiGraph::from_edges(graph.n(), graph.w_cap(), ids.iter().map(|&id| {
            let e = graph.edge(id);
            (e.u, e.v, e.w)
        }))
        .map_err(anyhow::Error::from)?;
        (projected, caps)
    } else {
        (graph, caps)
    };
    let init = match &args.init {
        Some(path) => {
            let sub = load(path)?;
            let ids = embed_subgraph(&work, &sub.graph).map_err(anyhow::Error::from)?;
            Subgraph::from_edges(&work, ids).map_err(anyhow::Error::from)?
        }
        None => Subgraph::empty(&work),
    };
    let outcome = edcs::build_wb_edcs_from(&work, &caps, &params, init).map_err(anyhow::Error::from)?;
    let report = edcs::validate(&work, &caps, &outcome.subgraph, &params);
    let floor = edcs::gain_floor(&work, &caps);
    let summary = serde_json::json!({
        "params": params,
        "steps": outcome.steps,
        "insertions": outcome.insertions,
        "removals": outcome.removals,
        "phi_initial": outcome.phi_initial.to_string(),
        "phi_final": outcome.phi_final.to_string(),
        "min_step_gain": outcome.min_gain.map(|g| g.to_string()),
        "claimed_gain": edcs::claimed_gain(&caps).to_string(),
        "gain_floor": floor.to_string(),
        "steps_below_claimed": outcome.below_claimed,
        "phi_step_bound": outcome.phi_step_bound(floor),
        "degree_cap_held": outcome.degree_cap_held,
        "h_edges": outcome.subgraph.len(),
        "h_weight": outcome.subgraph.total_weight(),
        "validation": report.to_json(),
    });
    emit(args.out.as_deref(), &write_subgraph(&outcome.subgraph, &caps))?;
    match args.report {
        Some(path) => emit(Some(&path), &json(&summary))?,
        None => eprint!("{}", json(&summary)),
    }
    Ok(())
}

fn cmd_stream(args: StreamArgs) -> Result<(), Failure> {
    let GraphFile { graph, caps } = load(&args.graph)?;
    let params = args.params.resolve(&graph)?;
    let seeds = parse_seeds(&args.seed).map_err(|e| anyhow!(e))?;
    let variant = match args.variant {
        VariantArg::One => Variant::Bounded,
        VariantArg::Three => Variant::Relevant,
    };
    let config = TrialConfig {
        params,
        variant,
        oracle_budget: args.oracle_budget,
        controller: !args.no_controller,
        jobs: args.jobs.max(1),
    };
    let report = run_trials(&graph, &caps, &config, &seeds).map_err(anyhow::Error::from)?;
    emit(args.out.as_deref(), &json(&report))?;
    if let Some(path) = args.csv {
        emit(Some(&path), &to_csv(&report))?;
    }
    if args.check && report.aggregate.failures > 0 {
        eprintln!(
            "{} of {} trials below the guaranteed ratio {:.6}",
            report.aggregate.failures, report.aggregate.trials, report.threshold
        );
        return Err(Failure::Check);
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let GraphFile { graph, caps } = load(&args.graph)?;
    let sub = load(&args.subgraph)?;
    let params = args.params.resolve(&graph)?;
    let ids = embed_subgraph(&graph, &sub.graph).map_err(anyhow::Error::from)?;
    let h = Subgraph::from_edges(&graph, ids).map_err(anyhow::Error::from)?;
    let report = edcs::validate(&graph, &caps, &h, &params);
    print!("{}", json(&report.to_json()));
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
