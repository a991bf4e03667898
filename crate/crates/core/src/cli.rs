//! The `hs-solve` command line: argument parsing plus one function per
//! subcommand, each returning the text to print.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gridworld::{
    canonical_game, compile_grid, parse_grid_spec, render_path, Action, CompiledGrid, GridState,
};
use crate::hs_normal::{hs_value, shapley_deviation, side_payment_normal};
use crate::hs_stochastic::{solve, HsStochasticResult, Method};
use crate::normal_form::NormalFormGame;
use crate::rollout::{
    cooperative_policy, fmt_tuple, simulate_many, summarize, write_csv, Trajectory,
    DEFAULT_MAX_STEPS,
};
use crate::stochastic::{IterationOptions, StochasticGame};

pub const THREADS_ENV: &str = "HS_SOLVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hs-solve",
    version,
    about = "Harsanyi-Shapley values and side payments for TU games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a normal-form game given as JSON.
    SolveNormal(NormalArgs),
    /// Solve a grid game (canonical name or GridSpec file) or an explicit stochastic game.
    SolveGrid(GridArgs),
    /// Solve, then play the cooperative policy with side payments.
    Rollout(RolloutArgs),
}

#[derive(Debug, Args)]
pub struct NormalArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Also run the Shapley-oracle cross-check and print the max deviation.
    #[arg(long)]
    pub check_shapley: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Canonical game: prisoners, coordination, turkey or friend_or_foe.
    #[arg(long)]
    pub game: Option<String>,
    /// GridSpec JSON, or a stochastic-game JSON with a "transitions" table.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// hs, hs-star or ceq.
    #[arg(long, short)]
    pub method: Method,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout (solve-grid: save the solution JSON here).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub rollouts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Reuse a solution saved by `solve-grid --out` instead of solving.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandKind {
    SolveNormal,
    SolveGrid,
    Rollout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Canonical(String),
    File(PathBuf),
}

/// Flattened, validated view of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: Source,
    pub method: Option<Method>,
    pub tol: f64,
    pub cap: usize,
    pub seed: u64,
    pub rollouts: usize,
    pub max_steps: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub values: Option<PathBuf>,
    pub check_shapley: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let defaults = IterationOptions::default();
        let source = |s: SourceArgs| match (s.game, s.input) {
            (Some(g), None) => Ok(Source::Canonical(g)),
            (None, Some(p)) => Ok(Source::File(p)),
            _ => Err(Error::InvalidInput(
                "give exactly one of --game and --input".into(),
            )),
        };
        let config = match cli.command {
            Command::SolveNormal(a) => RunConfig {
                command: CommandKind::SolveNormal,
                source: Source::File(a.input),
                method: None,
                tol: defaults.tol,
                cap: defaults.cap,
                seed: 0,
                rollouts: 1,
                max_steps: DEFAULT_MAX_STEPS,
                format: a.output.format,
                out: a.output.out,
                values: None,
                check_shapley: a.check_shapley,
            },
            Command::SolveGrid(a) => RunConfig {
                command: CommandKind::SolveGrid,
                source: source(a.source)?,
                method: Some(a.solver.method),
                tol: a.solver.tol,
                cap: a.solver.cap,
                seed: 0,
                rollouts: 1,
                max_steps: DEFAULT_MAX_STEPS,
                format: a.output.format,
                out: a.output.out,
                values: None,
                check_shapley: false,
            },
            Command::Rollout(a) => RunConfig {
                command: CommandKind::Rollout,
                source: source(a.source)?,
                method: Some(a.solver.method),
                tol: a.solver.tol,
                cap: a.solver.cap,
                seed: a.seed,
                rollouts: a.rollouts,
                max_steps: a.max_steps,
                format: a.output.format,
                out: a.output.out,
                values: a.values,
                check_shapley: false,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.command != CommandKind::SolveNormal && self.method.is_none() {
            return Err(Error::InvalidInput("--method is required".into()));
        }
        if self.rollouts == 0 {
            return Err(Error::InvalidInput("--rollouts must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("--max-steps must be at least 1".into()));
        }
        self.iteration_options().validate()
    }

    pub fn iteration_options(&self) -> IterationOptions {
        IterationOptions {
            tol: self.tol,
            cap: self.cap,
            ..IterationOptions::default()
        }
    }

    fn method(&self) -> Method {
        self.method.expect("validated")
    }
}

/// Sizes the global rayon pool from `HS_SOLVE_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::InvalidInput(format!(
            "{THREADS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    // A pool that already exists (e.g. in tests) is left as is.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Short decimal: at most three places, trailing zeros trimmed to one.
fn fmt_short(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0');
    let s = if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    };
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn fmt_list(values: &[f64]) -> String {
    format!(
        "[{}]",
        values
            .iter()
            .map(|&v| fmt_short(v))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn cmd_solve_normal(config: &RunConfig) -> Result<String> {
    let Source::File(path) = &config.source else {
        return Err(Error::InvalidInput("solve-normal needs --input".into()));
    };
    let g = NormalFormGame::from_json_str(&read(path)?)?;
    let hs = hs_value(&g)?;
    let sp = side_payment_normal(&g)?;
    let deviation = if config.check_shapley {
        Some(shapley_deviation(&g)?)
    } else {
        None
    };
    let n = g.num_players();
    let mut out = String::new();
    match config.format {
        Format::Table => {
            let _ = writeln!(out, "HS: {}", fmt_list(&hs.values));
            let _ = writeln!(out, "Side payments: {}", fmt_list(&sp));
            let _ = writeln!(
                out,
                "Cooperative action: {:?}",
                g.action_space().decode(hs.cooperative_action)
            );
            let _ = writeln!(out, "Coalition values:");
            for (c, v) in &hs.coalition_values {
                let kind = if c.size() == n { "maxmax" } else { "maxmin" };
                let _ = writeln!(out, "  {c:<12} {kind}  {}", fmt_short(*v));
            }
            if let Some(d) = deviation {
                let _ = writeln!(out, "Shapley oracle max deviation: {d:.3e}");
            }
        }
        Format::Json => {
            let doc = json!({
                "hs": hs.values,
                "side_payments": sp,
                "cooperative_action": g.action_space().decode(hs.cooperative_action),
                "coalition_values": hs.coalition_values.iter().map(|(c, v)| json!({"coalition": c, "value": v})).collect::<Vec<_>>(),
                "shapley_max_deviation": deviation,
            });
            out = serde_json::to_string_pretty(&doc)? + "\n";
        }
        Format::Csv => {
            out.push_str("player,hs,side_payment\n");
            for i in 0..n {
                let _ = writeln!(out, "{},{},{}", i + 1, hs.values[i], sp[i]);
            }
        }
    }
    Ok(out)
}

/// A stochastic game plus, for grid games, its spec and state labels.
pub struct LoadedGame {
    pub name: String,
    pub game: StochasticGame,
    pub grid: Option<CompiledGrid>,
}

pub fn load_game(source: &Source) -> Result<LoadedGame> {
    match source {
        Source::Canonical(name) => {
            let grid = compile_grid(&canonical_game(name)?)?;
            Ok(LoadedGame {
                name: name.clone(),
                game: grid.game.clone(),
                grid: Some(grid),
            })
        }
        Source::File(path) => {
            let text = read(path)?;
            let doc: serde_json::Value = serde_json::from_str(&text)?;
            let name = path.display().to_string();
            if doc.get("transitions").is_some() {
                Ok(LoadedGame {
                    name,
                    game: StochasticGame::from_json_str(&text)?,
                    grid: None,
                })
            } else {
                let grid = compile_grid(&parse_grid_spec(&text)?)?;
                Ok(LoadedGame {
                    name,
                    game: grid.game.clone(),
                    grid: Some(grid),
                })
            }
        }
    }
}

fn describe_state(loaded: &LoadedGame, state: usize) -> String {
    match &loaded.grid {
        Some(g) => g.states[state]
            .positions
            .iter()
            .map(|(x, y)| format!("({x},{y})"))
            .collect::<Vec<_>>()
            .join(" "),
        None => state.to_string(),
    }
}

pub fn cmd_solve_grid(config: &RunConfig) -> Result<String> {
    let loaded = load_game(&config.source)?;
    let sg = &loaded.game;
    let result = solve(sg, config.method(), config.iteration_options())?;
    if let Some(path) = &config.out {
        std::fs::write(path, serde_json::to_string(&result)?)?;
    }
    let start = result.values.get(sg.start());
    let summary = result.summary();
    let nonterminal = (0..sg.num_states()).filter(|&s| !sg.is_terminal(s)).count();
    let mut out = String::new();
    match config.format {
        Format::Table => {
            let _ = writeln!(out, "game: {}", loaded.name);
            let _ = writeln!(out, "method: {}", result.method);
            let _ = writeln!(
                out,
                "states: {} ({nonterminal} nonterminal), transition entries: {}",
                sg.num_states(),
                sg.num_entries()
            );
            let _ = writeln!(out, "start values: {}", fmt_tuple(start));
            let _ = writeln!(
                out,
                "converged={} iterations={} final_delta={:.3e}",
                result.converged(),
                summary.iterations,
                summary.final_delta
            );
            for r in &result.reports {
                let _ = writeln!(
                    out,
                    "  {:<16} converged={} iterations={} final_delta={:.3e}",
                    r.label, r.report.converged, r.report.iterations, r.report.final_delta
                );
            }
            if !result.converged() {
                let _ = writeln!(
                    out,
                    "delta window (last {}): {}",
                    summary.history_window.len(),
                    summary
                        .history_window
                        .iter()
                        .map(|d| format!("{d:.3}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                );
            }
        }
        Format::Json => {
            let doc = json!({
                "game": loaded.name,
                "method": result.method,
                "states": sg.num_states(),
                "nonterminal_states": nonterminal,
                "transition_entries": sg.num_entries(),
                "start_values": start,
                "converged": result.converged(),
                "reports": result.reports,
                "values": result.values,
            });
            out = serde_json::to_string_pretty(&doc)? + "\n";
        }
        Format::Csv => {
            let n = sg.num_players();
            let mut header = vec!["state".to_string(), "terminal".into(), "label".into()];
            header.extend((1..=n).map(|i| format!("v_{i}")));
            let _ = writeln!(out, "{}", header.join(","));
            for s in 0..sg.num_states() {
                let vals: Vec<String> =
                    result.values.get(s).iter().map(|v| v.to_string()).collect();
                let _ = writeln!(
                    out,
                    "{s},{},\"{}\",{}",
                    sg.is_terminal(s),
                    describe_state(&loaded, s),
                    vals.join(",")
                );
            }
        }
    }
    Ok(out)
}

fn load_or_solve(config: &RunConfig, sg: &StochasticGame) -> Result<HsStochasticResult> {
    match &config.values {
        Some(path) => {
            let result: HsStochasticResult = serde_json::from_str(&read(path)?)?;
            if result.method != config.method() {
                return Err(Error::InvalidInput(format!(
                    "saved solution was computed with {}, not {}",
                    result.method,
                    config.method()
                )));
            }
            Ok(result)
        }
        None => solve(sg, config.method(), config.iteration_options()),
    }
}

fn render_trajectory(grid: &CompiledGrid, t: &Trajectory) -> String {
    let mut path: Vec<(GridState, Option<Vec<Action>>)> = t
        .steps
        .iter()
        .map(|s| {
            (
                grid.states[s.state].clone(),
                Some(s.actions.iter().map(|&a| Action::from_index(a)).collect()),
            )
        })
        .collect();
    if let Some(last) = t.steps.last() {
        path.push((grid.states[last.next].clone(), None));
    } else {
        path.push((grid.states[grid.game.start()].clone(), None));
    }
    render_path(&grid.spec, &path)
}

pub fn cmd_rollout(config: &RunConfig) -> Result<String> {
    let loaded = load_game(&config.source)?;
    let sg = &loaded.game;
    let result = load_or_solve(config, sg)?;
    let policy = cooperative_policy(sg, &result)?;
    let trajectories = simulate_many(
        sg,
        &policy,
        &result.values,
        config.seed,
        config.rollouts,
        config.max_steps,
    )?;
    let summary = summarize(&trajectories).expect("at least one rollout");
    let mut out = String::new();
    match config.format {
        Format::Table => {
            let _ = writeln!(
                out,
                "game: {}  method: {}  seed: {}",
                loaded.name, result.method, config.seed
            );
            if !result.converged() {
                out.push_str("warning: values did not converge; payments are computed from the last iterate\n");
            }
            let first = &trajectories[0];
            if let Some(grid) = &loaded.grid {
                out.push_str(&render_trajectory(grid, first));
            }
            out.push_str(&first.to_table(&result.method.to_string()));
            let _ = writeln!(
                out,
                "start values: {}",
                fmt_tuple(result.values.get(sg.start()))
            );
            if trajectories.len() > 1 {
                let _ = writeln!(
                    out,
                    "rollouts: {}  truncated: {}",
                    summary.count, summary.truncated
                );
                let _ = writeln!(out, "mean V:  {}", fmt_tuple(&summary.mean_value));
                let _ = writeln!(out, "std err: {}", fmt_tuple(&summary.std_error));
                let _ = writeln!(out, "mean SP: {}", fmt_tuple(&summary.mean_side_payments));
            }
        }
        Format::Json => {
            let doc = json!({
                "game": loaded.name,
                "method": result.method,
                "start_values": result.values.get(sg.start()),
                "converged": result.converged(),
                "summary": summary,
                "trajectories": trajectories,
            });
            out = serde_json::to_string_pretty(&doc)? + "\n";
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&trajectories, &mut buf)?;
            out = String::from_utf8(buf).expect("csv output is UTF-8");
        }
    }
    Ok(out)
}

pub fn run(config: &RunConfig) -> Result<String> {
    let text = match config.command {
        CommandKind::SolveNormal => cmd_solve_normal(config)?,
        CommandKind::SolveGrid => cmd_solve_grid(config)?,
        CommandKind::Rollout => cmd_rollout(config)?,
    };
    match (&config.out, config.command) {
        (Some(path), CommandKind::SolveNormal | CommandKind::Rollout) => {
            std::fs::write(path, &text)?;
            Ok(String::new())
        }
        _ => Ok(text),
    }
}

/// Process exit code for a finished invocation.
pub fn exit_code(result: &Result<String>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 3,
    }
}

/// Entry point shared by the binary: parse, run, print, and map errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = configure_threads()
        .and_then(|()| RunConfig::from_cli(cli))
        .and_then(|c| run(&c));
    match &result {
        Ok(text) => print!("{text}"),
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
