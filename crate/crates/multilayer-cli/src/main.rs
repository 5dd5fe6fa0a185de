//! Command-line front end: exact line metrics, tree configuration
//! probabilities, asymptotic reports, seeded simulation and clique-cover
//! feasibility, all emitting CSV on stdout.
//!
//! Every run starts with a `#` comment echoing the full invocation. Sweeping
//! commands (`line-metrics`, `tree-prob`) then print a `sweep_var,value,metric`
//! header and one row per sweep point; the other commands print `key,value`
//! rows. Floats carry 17 significant digits. Exit codes: 0 success,
//! 2 validation/parse error, 3 size-cap error.

mod sweep;

use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use multilayer::asymptotic::{
    check_regularity, giant_component_threshold, limit_cluster_metrics, limit_config_prob,
    nonidentical_diagnostics, poisson_lambda, trichotomy, LinkRate, Regime,
};
use multilayer::feasibility::{induced_subgraph, mcc_feasible, min_clique_edge_cover};
use multilayer::graph::BaseGraph;
use multilayer::io::{format_float, parse_config, parse_graph, parse_layer_params, parse_params};
use multilayer::line::{self, LineSpec};
use multilayer::model::{validate_model, LinkConfiguration, ModelParams};
use multilayer::montecarlo::{
    simulate, simulate_nonidentical, ScalarEstimate, SimConfig, StatisticKind, StatisticResult,
};
use multilayer::tree::{RootedTree, TreeSolver};
use multilayer::{Error, Result};

#[derive(Parser)]
#[command(
    name = "multilayer",
    version,
    about = "Stochastic multilayer network calculator: exact, asymptotic and Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact metrics for a line (no thinning, uniform activation, union merge).
    LineMetrics(LineMetricsArgs),
    /// Exact configuration probability on a tree, optionally swept.
    TreeProb(TreeProbArgs),
    /// Limiting rates, independence checks and limit metrics as layers grow.
    Asymptotic(AsymptoticArgs),
    /// Seeded Monte Carlo estimates with standard errors.
    Simulate(SimulateArgs),
    /// Clique-cover feasibility of a configuration on a clique base.
    Feasible(FeasibleArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LineMetric {
    /// Expected component size of a node (1-based position along the line).
    Cluster,
    /// Expected number of active links.
    Links,
    /// Probability that no link is active.
    Allzero,
    /// Probability of one configuration (requires --config).
    Configprob,
}

#[derive(Args)]
struct LineMetricsArgs {
    /// Number of links in the line.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    metric: LineMetric,
    /// Node position 1..=n+1 along the line (cluster metric).
    #[arg(long)]
    node: Option<usize>,
    /// Configuration bits for --metric configprob.
    #[arg(long)]
    config: Option<String>,
    /// Fixed activation probability.
    #[arg(long, conflicts_with = "q_power")]
    q: Option<f64>,
    /// Couple activation to the layer count: q = M^(-a).
    #[arg(long = "q-power")]
    q_power: Option<f64>,
    /// Layer-count sweep: `1..10`, `5..50..5`, `1,2,5` or a single value.
    #[arg(long = "M")]
    layers: String,
    /// Cross-check each sweep point against the simulator.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 100_000)]
    replications: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct TreeProbArgs {
    /// Graph file (tree) with `n m` header and `u v` lines.
    #[arg(long, conflicts_with = "topology")]
    graph: Option<String>,
    /// Built-in topology.
    #[arg(long, value_parser = ["star-fig7", "btree5"])]
    topology: Option<String>,
    /// Parameter file (M, K, p, q with overrides); replaces the flags below.
    #[arg(long)]
    params: Option<String>,
    /// Uniform activation probability, sweepable (`0.1..0.9..0.1`).
    #[arg(long)]
    q: Option<String>,
    /// Uniform link survival probability.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Multiplicity threshold.
    #[arg(long = "K", default_value_t = 1)]
    threshold: u32,
    /// Layer count, sweepable (`1..50`).
    #[arg(long = "M")]
    layers: Option<String>,
    /// Configuration: `all-ones`, `all-zeros` or a 0/1 string.
    #[arg(long, default_value = "all-ones")]
    config: String,
    /// Root node for the recursion (any choice gives the same probability).
    #[arg(long, default_value_t = 0)]
    root: usize,
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 100_000)]
    replications: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long)]
    graph: String,
    /// Scaling file: alpha/c per link, beta/d per node.
    #[arg(long)]
    scaling: String,
    #[arg(long = "K", default_value_t = 1)]
    threshold: u32,
    /// Report the limiting probability of this configuration.
    #[arg(long)]
    config: Option<String>,
    /// Also emit limit line metrics for these link counts (`1..20`).
    #[arg(long = "limit-line-n")]
    limit_line_n: Option<String>,
    /// Rate for the limit line metrics; defaults to the graph's uniform rate.
    #[arg(long = "limit-line-lambda")]
    limit_line_lambda: Option<f64>,
    /// Bond-percolation threshold of the base graph (default: square-lattice
    /// bond value 1/2).
    #[arg(long = "p-c", default_value_t = 0.5)]
    p_c: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: String,
    /// Identical-layer parameter file.
    #[arg(long, conflicts_with = "layer_params")]
    params: Option<String>,
    /// Per-layer parameter file (independent, non-identical layers).
    #[arg(long = "layer-params")]
    layer_params: Option<String>,
    #[arg(long)]
    replications: u64,
    /// Seed is mandatory so scripted runs are reproducible.
    #[arg(long)]
    seed: u64,
    /// Statistics: `links`, `config`, `cluster:<node>`, `match:<config>`,
    /// `wjoint:<l1+l2>`. Repeatable.
    #[arg(long = "stat", default_values_t = [String::from("links")])]
    stats: Vec<String>,
}

#[derive(Args)]
struct FeasibleArgs {
    #[arg(long)]
    graph: String,
    /// Configuration bits over the clique's links.
    #[arg(long)]
    config: String,
    #[arg(long = "M")]
    layers: u32,
}

fn main() {
    if let Ok(v) = std::env::var("MULTILAYER_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let invocation: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    println!("# {}", invocation.join(" "));
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::SizeCap(_) => 3,
            Error::Validation(_) | Error::Parse(_) => 2,
        };
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::LineMetrics(args) => line_metrics(args),
        Command::TreeProb(args) => tree_prob(args),
        Command::Asymptotic(args) => asymptotic(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Feasible(args) => feasible(args),
    }
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {path}: {e}")))
}

fn bad_sweep(e: String) -> Error {
    Error::Parse(e)
}

fn line_metrics(args: LineMetricsArgs) -> Result<()> {
    let layer_values = sweep::parse_u32(&args.layers).map_err(bad_sweep)?;
    if layer_values.is_empty() {
        return Err(Error::Validation("empty layer sweep".into()));
    }
    let node = match args.metric {
        LineMetric::Cluster => Some(
            args.node
                .ok_or_else(|| Error::Validation("--metric cluster requires --node".into()))?,
        ),
        _ => None,
    };
    let config = match args.metric {
        LineMetric::Configprob => {
            let raw = args
                .config
                .as_deref()
                .ok_or_else(|| Error::Validation("--metric configprob requires --config".into()))?;
            Some(parse_config(raw, args.n)?)
        }
        _ => None,
    };
    let q_at = |layers: u32| -> Result<f64> {
        match (args.q, args.q_power) {
            (Some(q), None) => Ok(q),
            (None, Some(a)) => Ok((layers as f64).powf(-a)),
            _ => Err(Error::Validation("exactly one of --q / --q-power is required".into())),
        }
    };
    q_at(layer_values[0])?;

    let rows: Vec<Result<(u32, f64)>> = layer_values
        .par_iter()
        .map(|&layers| {
            let spec = LineSpec::new(args.n, q_at(layers)?, layers)?;
            let value = match args.metric {
                LineMetric::Cluster => line::expected_cluster_size(args.n, node.unwrap(), &spec)?,
                LineMetric::Links => line::expected_active_links(args.n, &spec),
                LineMetric::Allzero => line::q_all_zero(args.n, &spec)?,
                LineMetric::Configprob => line::config_prob(config.as_ref().unwrap(), &spec)?,
            };
            Ok((layers, value))
        })
        .collect();

    println!("sweep_var,value,metric");
    let mut points = Vec::new();
    for row in rows {
        let (layers, value) = row?;
        println!("M,{layers},{}", format_float(value));
        points.push((layers, value));
    }

    if args.verify {
        let mut max_dev = 0.0f64;
        for &(layers, exact) in &points {
            let g = BaseGraph::path(args.n);
            let params = ModelParams::uniform(&g, layers, 1, 1.0, q_at(layers)?.min(1.0));
            let stat = match args.metric {
                LineMetric::Cluster => StatisticKind::ClusterSize(node.unwrap() - 1),
                LineMetric::Links => StatisticKind::ActiveLinks,
                LineMetric::Allzero => {
                    StatisticKind::ConfigMatch(LinkConfiguration::all_zeros(args.n))
                }
                LineMetric::Configprob => StatisticKind::ConfigMatch(config.clone().unwrap()),
            };
            let cfg = SimConfig {
                replications: args.replications,
                seed: args.seed,
                statistics: vec![stat],
            };
            let report = simulate(&g, &params, &cfg)?;
            let est = match args.metric {
                LineMetric::Cluster => report.cluster_size(node.unwrap() - 1),
                LineMetric::Links => report.active_links(),
                _ => report.config_match(),
            }
            .expect("requested statistic present");
            max_dev = max_dev.max(deviation_in_se(est, exact));
        }
        println!(
            "# verify: max deviation {max_dev:.2} se over {} points (replications={}, seed={})",
            points.len(),
            args.replications,
            args.seed
        );
    }
    Ok(())
}

fn deviation_in_se(est: ScalarEstimate, exact: f64) -> f64 {
    let se = est.std_error.max(1e-12);
    (est.mean - exact).abs() / se
}

fn builtin_topology(name: &str) -> BaseGraph {
    match name {
        "star-fig7" => BaseGraph::star_with_branches(&[2, 3, 4, 3]),
        "btree5" => BaseGraph::complete_binary_tree(5),
        _ => unreachable!("clap restricts the value set"),
    }
}

fn tree_prob(args: TreeProbArgs) -> Result<()> {
    let g = match (&args.graph, &args.topology) {
        (Some(path), None) => parse_graph(&read(path)?)?,
        (None, Some(name)) => builtin_topology(name),
        _ => {
            return Err(Error::Validation(
                "exactly one of --graph / --topology is required".into(),
            ))
        }
    };
    if !g.is_tree() {
        return Err(Error::Validation("input graph is not a tree".into()));
    }
    let x = parse_config(&args.config, g.num_links())?;
    let tree = RootedTree::new(&g, args.root)?;

    // Either a ready-made parameter file (single row) or q/M flags, one of
    // which may sweep.
    let mut rows: Vec<(String, String, ModelParams)> = Vec::new();
    if let Some(path) = &args.params {
        let params = parse_params(&read(path)?, &g)?;
        let report = validate_model(&g, &params);
        if !report.is_valid() {
            return Err(Error::Validation(report.errors.join("; ")));
        }
        rows.push(("M".into(), params.layers.to_string(), params));
    } else {
        let q_values = sweep::parse_f64(
            args.q
                .as_deref()
                .ok_or_else(|| Error::Validation("--q is required without --params".into()))?,
        )
        .map_err(bad_sweep)?;
        let m_values = sweep::parse_u32(
            args.layers
                .as_deref()
                .ok_or_else(|| Error::Validation("--M is required without --params".into()))?,
        )
        .map_err(bad_sweep)?;
        if q_values.len() > 1 && m_values.len() > 1 {
            return Err(Error::Validation("sweep either --q or --M, not both".into()));
        }
        for &layers in &m_values {
            for &q in &q_values {
                let params = ModelParams::uniform(&g, layers, args.threshold, args.p, q);
                let report = validate_model(&g, &params);
                if !report.is_valid() {
                    return Err(Error::Validation(report.errors.join("; ")));
                }
                let (var, value) = if q_values.len() > 1 {
                    ("q".to_string(), format_float(q))
                } else {
                    ("M".to_string(), layers.to_string())
                };
                rows.push((var, value, params));
            }
        }
    }

    let computed: Vec<Result<f64>> = rows
        .par_iter()
        .map(|(_, _, params)| TreeSolver::new(&tree, params)?.config_prob(&x))
        .collect();

    println!("sweep_var,value,metric");
    let mut for_verify = Vec::new();
    for ((var, value, params), prob) in rows.iter().zip(computed) {
        let prob = prob?;
        println!("{var},{value},{}", format_float(prob));
        for_verify.push((params.clone(), prob));
    }

    if args.verify {
        let mut max_dev = 0.0f64;
        for (params, exact) in &for_verify {
            let cfg = SimConfig {
                replications: args.replications,
                seed: args.seed,
                statistics: vec![StatisticKind::ConfigMatch(x.clone())],
            };
            let report = simulate(&g, params, &cfg)?;
            max_dev = max_dev.max(deviation_in_se(report.config_match().unwrap(), *exact));
        }
        println!(
            "# verify: max deviation {max_dev:.2} se over {} points (replications={}, seed={})",
            for_verify.len(),
            args.replications,
            args.seed
        );
    }
    Ok(())
}

fn rate_string(rate: LinkRate) -> String {
    match rate {
        LinkRate::Finite(v) => format_float(v),
        LinkRate::Infinite => "inf".into(),
    }
}

fn asymptotic(args: AsymptoticArgs) -> Result<()> {
    let g = parse_graph(&read(&args.graph)?)?;
    let spec = multilayer::io::parse_scaling(&read(&args.scaling)?, &g)?;
    let limit = poisson_lambda(&spec, &g)?;
    let violations = check_regularity(&spec, &g);

    for (l, rate) in limit.lambda.iter().enumerate() {
        let (u, v) = g.link(l);
        println!("lambda[{u}-{v}],{}", rate_string(*rate));
    }
    if violations.is_empty() {
        println!("regularity,ok");
    } else {
        for v in &violations {
            println!("regularity_violation,node {} (beta {})", v.node, v.beta);
        }
    }

    match spec.as_uniform() {
        Some((alpha, c, beta, d)) => match trichotomy(alpha, beta, c, d, args.threshold) {
            Regime::Empty => println!("regime,empty"),
            Regime::Full => println!("regime,full"),
            Regime::ErdosRenyiLike { link_prob } => {
                println!("regime,erdos-renyi-like");
                println!("regime_link_prob,{}", format_float(link_prob));
            }
        },
        None => println!("regime,non-uniform"),
    }

    println!("p_c,{}", format_float(args.p_c));
    println!("giant_threshold_d,{}", format_float(giant_component_threshold(args.p_c)?));

    if let Some(raw) = &args.config {
        if let Some(v) = violations.first() {
            return Err(Error::Validation(format!(
                "limit configuration probability is not product-form: regularity violated at node {}",
                v.node
            )));
        }
        let x = parse_config(raw, g.num_links())?;
        println!(
            "config_prob,{}",
            format_float(limit_config_prob(&x, &limit, args.threshold))
        );
    }

    if let Some(sweep_text) = &args.limit_line_n {
        let rate = match args.limit_line_lambda {
            Some(v) => LinkRate::Finite(v),
            None => {
                let first = limit.lambda.first().copied().ok_or_else(|| {
                    Error::Validation("graph has no links to take a rate from".into())
                })?;
                if limit.lambda.iter().any(|r| *r != first) {
                    return Err(Error::Validation(
                        "non-uniform limiting rates; pass --limit-line-lambda".into(),
                    ));
                }
                first
            }
        };
        for n in sweep::parse_u32(sweep_text).map_err(bad_sweep)? {
            let (cluster, links) = limit_cluster_metrics(n as usize, rate, args.threshold);
            println!("limit_cluster[{n}],{}", format_float(cluster));
            println!("limit_links[{n}],{}", format_float(links));
        }
    }
    Ok(())
}

fn parse_stats(raw: &[String], g: &BaseGraph) -> Result<Vec<StatisticKind>> {
    let mut stats = Vec::new();
    for s in raw {
        let stat = if s == "links" {
            StatisticKind::ActiveLinks
        } else if s == "config" {
            StatisticKind::ConfigCounts
        } else if let Some(node) = s.strip_prefix("cluster:") {
            let node: usize = node
                .parse()
                .map_err(|_| Error::Parse(format!("bad cluster node in {s:?}")))?;
            StatisticKind::ClusterSize(node)
        } else if let Some(cfg) = s.strip_prefix("match:") {
            StatisticKind::ConfigMatch(parse_config(cfg, g.num_links())?)
        } else if let Some(list) = s.strip_prefix("wjoint:") {
            let links = list
                .split('+')
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("bad link list in {s:?}")))?;
            StatisticKind::MultiplicityJoint(links)
        } else {
            return Err(Error::Parse(format!("unknown statistic {s:?}")));
        };
        stats.push(stat);
    }
    Ok(stats)
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let g = parse_graph(&read(&args.graph)?)?;
    let stats = parse_stats(&args.stats, &g)?;
    let cfg = SimConfig { replications: args.replications, seed: args.seed, statistics: stats };

    match (&args.params, &args.layer_params) {
        (Some(path), None) => {
            let params = parse_params(&read(path)?, &g)?;
            let check = validate_model(&g, &params);
            if !check.is_valid() {
                return Err(Error::Validation(check.errors.join("; ")));
            }
            for w in &check.warnings {
                println!("# warning: {w}");
            }
            let report = simulate(&g, &params, &cfg)?;
            print_report(&g, &report);
        }
        (None, Some(path)) => {
            let params = parse_layer_params(&read(path)?, &g)?;
            let check = params.validate(&g);
            if !check.is_valid() {
                return Err(Error::Validation(check.errors.join("; ")));
            }
            let report = simulate_nonidentical(&g, &params, &cfg)?;
            print_report(&g, &report);
            // Per-layer runs carry the independence diagnostics alongside.
            let diag = nonidentical_diagnostics(&params, &g);
            for (l, (&s, &m)) in diag.sum_r.iter().zip(&diag.max_r).enumerate() {
                let (u, v) = g.link(l);
                println!("sum_r[{u}-{v}],{}", format_float(s));
                println!("max_r[{u}-{v}],{}", format_float(m));
            }
            for &(a, b, _, r) in &diag.overlap {
                let (au, av) = g.link(a);
                let (bu, bv) = g.link(b);
                println!("overlap_r[{au}-{av}|{bu}-{bv}],{}", format_float(r));
            }
        }
        _ => {
            return Err(Error::Validation(
                "exactly one of --params / --layer-params is required".into(),
            ))
        }
    }
    Ok(())
}

fn print_report(g: &BaseGraph, report: &multilayer::montecarlo::EstimateReport) {
    println!("replications,{}", report.replications);
    println!("seed,{}", report.seed);
    for result in &report.results {
        match result {
            StatisticResult::ActiveLinks { estimate } => {
                println!("active_links_mean,{}", format_float(estimate.mean));
                println!("active_links_se,{}", format_float(estimate.std_error));
            }
            StatisticResult::ClusterSize { node, estimate } => {
                println!("cluster_size[{node}]_mean,{}", format_float(estimate.mean));
                println!("cluster_size[{node}]_se,{}", format_float(estimate.std_error));
            }
            StatisticResult::ConfigMatch { config, estimate } => {
                println!("config_match[{config}]_p,{}", format_float(estimate.mean));
                println!("config_match[{config}]_se,{}", format_float(estimate.std_error));
            }
            StatisticResult::ConfigCounts { counts } => {
                for (mask, count) in counts {
                    let bits = LinkConfiguration::from_mask(*mask, g.num_links());
                    println!("config[{bits}],{count}");
                }
            }
            StatisticResult::MultiplicityJoint { links, counts } => {
                let mut label = String::new();
                for (i, l) in links.iter().enumerate() {
                    if i > 0 {
                        label.push('+');
                    }
                    let _ = write!(label, "{l}");
                }
                for (key, count) in counts {
                    let key_str: Vec<String> = key.iter().map(|w| w.to_string()).collect();
                    println!("wjoint[{label}][{}],{count}", key_str.join(" "));
                }
            }
        }
    }
}

fn feasible(args: FeasibleArgs) -> Result<()> {
    let g = parse_graph(&read(&args.graph)?)?;
    let x = parse_config(&args.config, g.num_links())?;
    let ok = mcc_feasible(&x, args.layers, &g)?;
    println!("feasible,{ok}");
    println!("result,{}", if ok { "FEASIBLE" } else { "INFEASIBLE" });
    if ok {
        let cover = min_clique_edge_cover(&induced_subgraph(&g, &x)?)?;
        println!("cover_size,{}", cover.cliques.len());
        for (i, clique) in cover.cliques.iter().enumerate() {
            let nodes: Vec<String> = clique.iter().map(|v| v.to_string()).collect();
            println!("clique[{i}],{}", nodes.join(" "));
        }
    }
    Ok(())
}
