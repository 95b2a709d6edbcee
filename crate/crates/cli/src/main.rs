use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use numgame_core::arith::{degree_cap, field_degree, set_degree_cap, ArithError, DEFAULT_DEGREE_CAP};
use numgame_core::classify::classify;
use numgame_core::coxeter::{
    adjacency_reachable, format_word, is_adjacency_free, length, longest_element_length, n_set, positive_roots,
    CoxeterError, RootMode,
};
use numgame_core::fixtures;
use numgame_core::game::{
    game_tree, play, run_schedule, GameError, GameTrace, Outcome, PlayOptions, Position, StepBudget, Strategy,
    TreeOptions, Truncation, DEFAULT_MEMO_BUDGET, DEFAULT_STEP_BUDGET,
};
use numgame_core::graph::{parse_graph_with, EGcmGraph, GraphError, Multiples, DEFAULT_M_MAX};
use numgame_core::verify::{builtin_suite, graph_suite, CheckReport, Status, VerifyOptions, SUITES};

#[derive(Parser)]
#[command(name = "numgame", version, about = "Exact numbers game on E-GCM graphs")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Largest field degree allowed in exact arithmetic.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_CAP, value_parser = positive)]
    degree_cap: usize,
    /// Largest bond order tried when inferring m from amplitudes.
    #[arg(long, global = true, default_value_t = DEFAULT_M_MAX, value_parser = positive_u32)]
    m_max: u32,
    /// Step budget used when the classifier gives no bound.
    #[arg(long, global = true, default_value_t = DEFAULT_STEP_BUDGET, value_parser = positive)]
    step_budget: usize,
    /// Maximum number of memoized positions in exhaustive searches.
    #[arg(long, global = true, default_value_t = DEFAULT_MEMO_BUDGET, value_parser = positive)]
    memo_budget: usize,
    /// Seed for random strategies and sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_u32(s: &str) -> Result<u32, String> {
    positive(s).and_then(|v| u32::try_from(v).map_err(|e| e.to_string()))
}

#[derive(Clone, Copy, Debug)]
enum Steps {
    Auto,
    Limit(usize),
}

fn parse_steps(s: &str) -> Result<Steps, String> {
    if s == "auto" {
        Ok(Steps::Auto)
    } else {
        s.parse().map(Steps::Limit).map_err(|_| format!("expected a number or 'auto', found '{s}'"))
    }
}

fn parse_strategy(s: &str) -> Result<StrategyArg, String> {
    match s {
        "min-index" => Ok(StrategyArg::MinIndex),
        "random" => Ok(StrategyArg::Random(None)),
        _ => match s.strip_prefix("random:") {
            Some(seed) => seed
                .parse()
                .map(|v| StrategyArg::Random(Some(v)))
                .map_err(|_| format!("invalid seed '{seed}'")),
            None => Err(format!("expected min-index, random or random:<seed>, found '{s}'")),
        },
    }
}

#[derive(Clone, Copy, Debug)]
enum StrategyArg {
    MinIndex,
    Random(Option<u64>),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Game,
    Orbit,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a graph and report its invariants.
    Validate {
        graph: String,
        /// Print the underlying graph in DOT format instead.
        #[arg(long)]
        dot: bool,
    },
    /// Recognize the Dynkin or E-Coxeter family of each component.
    Classify { graph: String },
    /// Play a game with a strategy.
    Play {
        graph: String,
        #[arg(long, allow_hyphen_values = true)]
        position: String,
        #[arg(long, default_value = "min-index", value_parser = parse_strategy)]
        strategy: StrategyArg,
        #[arg(long, default_value = "auto", value_parser = parse_steps)]
        max_steps: Steps,
        /// Also write the trace with every intermediate position to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Fire a fixed sequence of nodes.
    Schedule {
        graph: String,
        #[arg(long, allow_hyphen_values = true)]
        position: String,
        /// Comma-separated nodes, 1-based or by name.
        #[arg(long)]
        fire: String,
    },
    /// Explore every play from a position.
    Tree {
        graph: String,
        #[arg(long, allow_hyphen_values = true)]
        position: String,
        #[arg(long, default_value = "auto", value_parser = parse_steps)]
        max_steps: Steps,
        /// Maximum number of plays listed in the output.
        #[arg(long, default_value_t = 100)]
        trace_cap: usize,
    },
    /// Positive roots of a finite-type graph.
    Roots {
        graph: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Orbit)]
        mode: ModeArg,
    },
    /// Positive multiples of a simple root.
    Multiples {
        graph: String,
        #[arg(long)]
        node: String,
    },
    /// Positive roots sent negative by a word.
    Nset {
        graph: String,
        /// Comma-separated letters; the word (i, j) is s_j s_i.
        #[arg(long)]
        word: String,
    },
    /// Length of the longest element.
    Length { graph: String },
    /// Whether a dominant position is adjacency-free.
    Adjfree {
        graph: String,
        #[arg(long, conflicts_with = "position")]
        node: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        position: Option<String>,
    },
    /// Run named checks on a graph or on the bundled fixtures.
    Verify {
        graph: Option<String>,
        #[arg(long, conflicts_with = "graph")]
        builtin: Option<String>,
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

enum Failure {
    Usage(String),
    Domain { kind: &'static str, message: String, detail: Value },
    Budget(String),
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Arith(a) => a.into(),
            e => Failure::Domain { kind: "graph", message: e.to_string(), detail: Value::Null },
        }
    }
}

impl From<ArithError> for Failure {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::DegreeCapExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Domain { kind: "arith", message: e.to_string(), detail: Value::Null },
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Arith(a) => a.into(),
            e => Failure::Domain {
                kind: "game",
                message: e.to_string(),
                detail: serde_json::to_value(one_based_game_error(&e)).unwrap_or(Value::Null),
            },
        }
    }
}

impl From<CoxeterError> for Failure {
    fn from(e: CoxeterError) -> Self {
        match e {
            CoxeterError::Game(g) => g.into(),
            CoxeterError::Arith(a) => a.into(),
            e @ CoxeterError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Domain { kind: "coxeter", message: e.to_string(), detail: Value::Null },
        }
    }
}

fn one_based_game_error(e: &GameError) -> Value {
    match e {
        GameError::IllegalFiring { node } => json!({"kind": "illegal-firing", "node": node + 1}),
        GameError::IllegalFiringAt { step, node } => {
            json!({"kind": "illegal-firing-at", "step": step + 1, "node": node + 1})
        }
        GameError::NodeOutOfRange { node, n } => json!({"kind": "node-out-of-range", "node": node + 1, "n": n}),
        e => serde_json::to_value(e).unwrap_or(Value::Null),
    }
}

/// A finished command: JSON for `--format json`, text otherwise, and the exit code.
struct Report {
    json: Value,
    text: String,
    code: u8,
}

impl Report {
    fn ok(json: Value, text: String) -> Report {
        Report { json, text, code: 0 }
    }
}

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_BUDGET: u8 = 4;

fn load_graph(source: &str, cfg: &Config) -> Result<EGcmGraph, Failure> {
    if let Some(name) = source.strip_prefix("builtin:") {
        // Fixtures are built with infallible constructors, so the cap is enforced afterwards.
        let cap = degree_cap();
        set_degree_cap(usize::MAX);
        let g = fixtures::builtin(name);
        set_degree_cap(cap);
        let g = g.ok_or_else(|| Failure::Usage(unknown_fixture(name)))?;
        let degree = field_degree(g.level());
        if degree > cap {
            return Err(ArithError::DegreeCapExceeded { lcm: g.level().into(), degree, cap }.into());
        }
        return Ok(g);
    }
    let text = if source == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(source)
    }
    .map_err(|e| Failure::Usage(format!("cannot read {source}: {e}")))?;
    Ok(parse_graph_with(&text, cfg.m_max)?)
}

fn unknown_fixture(name: &str) -> String {
    format!("unknown fixture '{name}'; known: {}", fixtures::builtin_names().join(", "))
}

fn parse_position(g: &EGcmGraph, text: &str) -> Result<Position, Failure> {
    let pos = Position::parse(text)?;
    if pos.len() != g.n() {
        return Err(GameError::DimensionMismatch { expected: g.n(), got: pos.len() }.into());
    }
    Ok(pos)
}

fn parse_node(g: &EGcmGraph, token: &str) -> Result<usize, Failure> {
    g.resolve(token.trim())
        .ok_or_else(|| Failure::Usage(format!("unknown node '{}' (nodes are 1..={} or names)", token.trim(), g.n())))
}

fn parse_nodes(g: &EGcmGraph, text: &str) -> Result<Vec<usize>, Failure> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| parse_node(g, t)).collect()
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn positions_text(t: &GameTrace, out: &mut String) {
    if let Some(ps) = &t.positions {
        for (k, (node, p)) in t.firings.iter().zip(ps).enumerate() {
            let _ = writeln!(out, "  {:>4}: fire {} -> {p}", k + 1, node + 1);
        }
    }
}

fn trace_report(t: &GameTrace) -> Report {
    let mut text = String::new();
    positions_text(t, &mut text);
    let code = match &t.outcome {
        Outcome::Converged { terminal, length } => {
            let _ = writeln!(text, "converged after {length} steps at {terminal}");
            0
        }
        Outcome::StepLimitReached { last, steps } => {
            let _ = writeln!(text, "step limit reached after {steps} steps at {last}");
            EXIT_BUDGET
        }
        Outcome::CertifiedDivergent { certificate } => {
            let _ = writeln!(text, "certified divergent: the graph is not admissible");
            for r in certificate.reasons() {
                let _ = writeln!(text, "  {r}");
            }
            0
        }
    };
    if !t.is_converged() && matches!(t.outcome, Outcome::StepLimitReached { .. }) && t.positions.is_none() {
        let _ = writeln!(text, "firings: {}", format_word(&t.firings));
    }
    Report { json: serde_json::to_value(t).unwrap(), text, code }
}

fn resolve_limit(g: &EGcmGraph, steps: Steps, cfg: &Config) -> usize {
    match steps {
        Steps::Limit(k) => k,
        Steps::Auto => classify(g).l_w0().map_or(cfg.step_budget, |l| l as usize + 1),
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Validate { graph, dot } => {
            let g = load_graph(graph, cfg)?;
            if *dot {
                let d = to_dot(&g);
                return Ok(Report::ok(json!({ "dot": d }), d));
            }
            let v = classify(&g);
            let comps: Vec<Vec<usize>> = g.components().iter().map(|c| one_based(c)).collect();
            let json = json!({
                "valid": true,
                "graph": g,
                "connected": g.is_connected(),
                "components": comps,
                "symmetric": g.is_symmetric(),
                "odd_asymmetry": g.has_odd_asymmetry(),
                "unital_oa_cyclic": g.try_is_unital_oa_cyclic()?,
                "oa_components": g.oa_components().iter().map(|c| one_based(c)).collect::<Vec<_>>(),
                "admissible": v.admissible,
            });
            let text = format!(
                "valid graph with {} nodes and {} edges\n{}digest {}\n",
                g.n(),
                g.edges().len(),
                g.to_dsl(),
                g.digest()
            );
            Ok(Report::ok(json, text))
        }
        Command::Classify { graph } => {
            let g = load_graph(graph, cfg)?;
            let v = classify(&g);
            let mut text = String::new();
            for c in &v.components {
                let fam = c.family.map_or("none".to_string(), |f| f.to_string());
                let _ = writeln!(text, "component {:?}: {fam}", one_based(&c.nodes));
            }
            for r in v.reasons() {
                let _ = writeln!(text, "  {r}");
            }
            let _ = writeln!(text, "admissible: {}", v.admissible);
            if let Some(l) = v.l_w0() {
                let _ = writeln!(text, "l(w0) = {l}");
            }
            Ok(Report::ok(serde_json::to_value(&v).unwrap(), text))
        }
        Command::Play { graph, position, strategy, max_steps, trace } => {
            let g = load_graph(graph, cfg)?;
            let pos = parse_position(&g, position)?;
            let strategy = match strategy {
                StrategyArg::MinIndex => Strategy::MinIndex,
                StrategyArg::Random(s) => Strategy::Random(s.unwrap_or(cfg.seed)),
            };
            let opts = PlayOptions {
                strategy,
                budget: match max_steps {
                    Steps::Auto => StepBudget::Auto,
                    Steps::Limit(k) => StepBudget::Limit(*k),
                },
                default_budget: cfg.step_budget,
                store_positions: trace.is_some(),
            };
            let t = play(&g, &pos, &opts)?;
            if let Some(path) = trace {
                let full = serde_json::to_string_pretty(&t).unwrap();
                std::fs::write(path, full + "\n")
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(trace_report(&GameTrace { positions: None, ..t }))
        }
        Command::Schedule { graph, position, fire } => {
            let g = load_graph(graph, cfg)?;
            let pos = parse_position(&g, position)?;
            let seq = parse_nodes(&g, fire)?;
            let t = run_schedule(&g, &pos, &seq)?;
            let mut r = trace_report(&t);
            if let Outcome::StepLimitReached { last, steps } = &t.outcome {
                // A schedule that runs to completion is a success even when the end is not terminal.
                r.code = 0;
                r.text = r.text.replace(
                    &format!("step limit reached after {steps} steps at {last}"),
                    &format!("schedule complete after {steps} steps at {last} (not terminal)"),
                );
            }
            Ok(r)
        }
        Command::Tree { graph, position, max_steps, trace_cap } => {
            let g = load_graph(graph, cfg)?;
            let pos = parse_position(&g, position)?;
            let opts = TreeOptions {
                max_steps: resolve_limit(&g, *max_steps, cfg),
                memo_budget: cfg.memo_budget,
                trace_cap: *trace_cap,
            };
            let t = game_tree(&g, &pos, &opts)?;
            let truncation = t.truncation.map(|x| match x {
                Truncation::MemoBudget => "memo-budget",
                Truncation::StepLimit => "step-limit",
            });
            let strongly = t.all_converge() && t.unique_terminal() && t.unique_length();
            let json = json!({
                "graph_digest": g.digest(),
                "initial": pos,
                "reachable_positions": t.reachable_positions,
                "plays": t.plays,
                "lengths": t.lengths,
                "terminals": t.terminals,
                "unique_terminal": t.unique_terminal(),
                "unique_length": t.unique_length(),
                "strongly_convergent": strongly,
                "has_cycle": t.has_cycle,
                "truncation": truncation,
                "traces": t.traces.iter().map(|w| one_based(w)).collect::<Vec<_>>(),
                "traces_complete": t.traces_complete,
            });
            let mut text = format!(
                "{} reachable positions, {} maximal plays, lengths {:?}\n",
                t.reachable_positions, t.plays, t.lengths
            );
            for term in &t.terminals {
                let _ = writeln!(text, "terminal {term}");
            }
            let _ = writeln!(text, "strongly convergent: {strongly}");
            if let Some(tr) = truncation {
                let _ = writeln!(text, "truncated: {tr}");
            }
            let code = if truncation.is_some() { EXIT_BUDGET } else { 0 };
            Ok(Report { json, text, code })
        }
        Command::Roots { graph, mode } => {
            let g = load_graph(graph, cfg)?;
            let m = match mode {
                ModeArg::Game => RootMode::Game,
                ModeArg::Orbit => RootMode::Orbit,
            };
            let roots = positive_roots(&g, m)?;
            let mut text = format!("{} positive roots\n", roots.len());
            for r in &roots {
                let _ = writeln!(text, "{r}");
            }
            let mode_name = match mode {
                ModeArg::Game => "game",
                ModeArg::Orbit => "orbit",
            };
            Ok(Report::ok(json!({"mode": mode_name, "count": roots.len(), "roots": roots}), text))
        }
        Command::Multiples { graph, node } => {
            let g = load_graph(graph, cfg)?;
            let x = parse_node(&g, node)?;
            let comp = g.oa_components().into_iter().find(|c| c.contains(&x)).unwrap();
            Ok(match g.root_multiples(x)? {
                Multiples::Finite(v) => {
                    let text = format!(
                        "{} positive multiples of alpha_{}: {}\n",
                        v.len(),
                        x + 1,
                        v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
                    );
                    let json = json!({
                        "node": x + 1,
                        "oa_component": one_based(&comp),
                        "finite": true,
                        "f": v.len(),
                        "multiples": v,
                    });
                    Report::ok(json, text)
                }
                Multiples::Infinite => Report::ok(
                    json!({"node": x + 1, "oa_component": one_based(&comp), "finite": false}),
                    format!("infinitely many positive multiples of alpha_{}\n", x + 1),
                ),
            })
        }
        Command::Nset { graph, word } => {
            let g = load_graph(graph, cfg)?;
            let w = parse_nodes(&g, word)?;
            let roots = n_set(&g, &w)?;
            let l = length(&g, &w)?;
            let mut text = format!("|N(w)| = {}, l(w) = {l}\n", roots.len());
            for r in &roots {
                let _ = writeln!(text, "{r}");
            }
            Ok(Report::ok(json!({"word": one_based(&w), "length": l, "size": roots.len(), "roots": roots}), text))
        }
        Command::Length { graph } => {
            let g = load_graph(graph, cfg)?;
            let l = longest_element_length(&g)?;
            let family = classify(&g).family().map(|f| f.to_string());
            Ok(Report::ok(json!({"l_w0": l, "family": family}), format!("l(w0) = {l}\n")))
        }
        Command::Adjfree { graph, node, position } => {
            let g = load_graph(graph, cfg)?;
            let positions: Vec<Position> = match (node, position) {
                (Some(i), _) => vec![Position::fundamental(g.n(), parse_node(&g, i)?)],
                (None, Some(p)) => vec![parse_position(&g, p)?],
                (None, None) => (0..g.n()).map(|i| Position::fundamental(g.n(), i)).collect(),
            };
            let mut items = Vec::new();
            let mut text = String::new();
            for pos in positions {
                let witness = is_adjacency_free(&g, &pos, cfg.memo_budget)?;
                let reach = adjacency_reachable(&g, &pos, cfg.memo_budget)?;
                let _ = writeln!(
                    text,
                    "{pos}: adjacency-free {}{}; every play avoids adjacency: {}",
                    witness.is_some(),
                    witness.as_ref().map_or(String::new(), |w| format!(" via {}", format_word(w))),
                    reach.is_none()
                );
                items.push(json!({
                    "position": pos,
                    "adjacency_free": witness.is_some(),
                    "witness": witness.as_ref().map(|w| one_based(w)),
                    "every_play": reach.is_none(),
                    "adjacent_schedule": reach.as_ref().map(|w| one_based(w)),
                }));
            }
            let json = if items.len() == 1 { items.pop().unwrap() } else { Value::Array(items) };
            Ok(Report::ok(json, text))
        }
        Command::Verify { graph, builtin, suite } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return Err(Failure::Usage(format!("unknown suite '{suite}'; known: all, {}", SUITES.join(", "))));
            }
            let opts = VerifyOptions {
                seed: cfg.seed,
                tree: TreeOptions { memo_budget: cfg.memo_budget, ..TreeOptions::default() },
            };
            let reports: Vec<CheckReport> = match (graph, builtin) {
                (Some(path), _) => graph_suite(&load_graph(path, cfg)?, suite, &opts).unwrap(),
                (None, Some(name)) => {
                    let g = load_graph(&format!("builtin:{name}"), cfg)?;
                    graph_suite(&g, suite, &opts).unwrap().into_iter().map(|r| r.on(name)).collect()
                }
                (None, None) => builtin_suite(suite, &opts).unwrap(),
            };
            let mut text = String::new();
            for r in &reports {
                let _ = writeln!(text, "{r}");
            }
            let fails = reports.iter().filter(|r| r.status == Status::Fail).count();
            let open = reports.iter().filter(|r| r.status == Status::Inconclusive).count();
            let _ = writeln!(text, "{} checks: {} passed, {fails} failed, {open} inconclusive", reports.len(), reports.len() - fails - open);
            let code = if fails > 0 {
                EXIT_CHECKS_FAILED
            } else if open > 0 {
                EXIT_BUDGET
            } else {
                0
            };
            Ok(Report { json: serde_json::to_value(&reports).unwrap(), text, code })
        }
    }
}

fn to_dot(g: &EGcmGraph) -> String {
    let mut s = String::from("graph egcm {\n");
    for i in 0..g.n() {
        let _ = writeln!(s, "  n{} [label=\"{}\"];", i + 1, g.label(i));
    }
    for (i, j) in g.edges() {
        let _ = writeln!(
            s,
            "  n{} -- n{} [label=\"m={} p={} q={}\"];",
            i + 1,
            j + 1,
            g.bond_order(i, j),
            -g.amplitude(i, j),
            -g.amplitude(j, i)
        );
    }
    s.push_str("}\n");
    s
}

fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_degree_cap(cli.config.degree_cap);
    let json_out = cli.config.format == Format::Json;
    match run(&cli) {
        Ok(r) => {
            if json_out {
                emit(&r.json);
            } else {
                let _ = std::io::stdout().lock().write_all(r.text.as_bytes());
            }
            ExitCode::from(r.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Domain { kind, message, detail }) => {
            if json_out {
                let mut err = json!({"kind": kind, "message": message});
                if !detail.is_null() {
                    err["detail"] = detail;
                }
                emit(&json!({ "error": err }));
            }
            eprintln!("error: {message}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Budget(message)) => {
            if json_out {
                emit(&json!({"error": {"kind": "budget", "message": message}}));
            }
            eprintln!("error: {message}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}
