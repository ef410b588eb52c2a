use clap::{Args, Parser, Subcommand};
use planner_cli::commands::{self, EXIT_ERROR, EXIT_OK};
use planner_cli::config::ExperimentConfig;
use planner_cli::gen;
use std::path::PathBuf;

/// Prefix-suffix plan synthesis for multi-robot teams under LTL tasks.
#[derive(Parser)]
#[command(name = "planner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an LTL formula file into an automaton file.
    Translate {
        /// formula file (UTF-8, `#` comments)
        #[arg(long)]
        ltl: PathBuf,
        /// output automaton file
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sampling planner for each seed and write plans and stats.
    Plan(RunArgs),
    /// Solve the instance exactly on the explicit product graph.
    Oracle(RunArgs),
    /// Run planner and oracle and report per-seed optimality.
    Compare(RunArgs),
    /// Generate models, task formulas and task automata.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// model JSON file
    #[arg(long)]
    model: Option<PathBuf>,
    /// LTL formula file (mutually exclusive with --nba)
    #[arg(long)]
    ltl: Option<PathBuf>,
    /// automaton file (mutually exclusive with --ltl)
    #[arg(long)]
    nba: Option<PathBuf>,
    /// prefix-tree iteration budget
    #[arg(long)]
    n_pre: Option<u64>,
    /// suffix-tree iteration budget (defaults to --n-pre)
    #[arg(long)]
    n_suf: Option<u64>,
    /// single seed (may be repeated); see also --seeds
    #[arg(long)]
    seed: Vec<u64>,
    /// comma-separated seed list
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// explicit-product state cap for oracle runs
    #[arg(long)]
    oracle_max_states: Option<u64>,
    /// worker threads (defaults to the number of cores)
    #[arg(long)]
    workers: Option<usize>,
    /// rows flushed to stats CSVs at a time
    #[arg(long)]
    stats_flush_interval: Option<usize>,
    /// required fraction of seeds matching the oracle (compare)
    #[arg(long)]
    match_threshold: Option<f64>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Grid mobility model with self-loops and unit Euclidean weights.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        robots: usize,
        /// diagonal links from the center cell (odd grids only, up to 4)
        #[arg(long, default_value_t = 0)]
        diagonals: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Meeting-recurrence task formula, e.g. --teams "1,2@l5;2,3,4@l1".
    Intermittent {
        #[arg(long)]
        teams: String,
        /// forbid a meeting until a trigger, e.g. "1,2@l5:1@l7"
        #[arg(long)]
        until: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Automaton for the same meeting-recurrence task family.
    Nba {
        #[arg(long)]
        recur: String,
        #[arg(long)]
        until: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, String> {
        let mut seeds = self.seed;
        seeds.extend(self.seeds);
        let flags = ExperimentConfig {
            model: self.model,
            ltl: self.ltl,
            nba: self.nba,
            n_pre: self.n_pre,
            n_suf: self.n_suf,
            seeds,
            oracle_max_states: self.oracle_max_states,
            out: self.out,
            stats_flush_interval: self.stats_flush_interval,
            workers: self.workers,
            match_threshold: self.match_threshold,
        };
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
            None => ExperimentConfig::default(),
        };
        Ok(base.overridden_by(&flags))
    }
}

fn write_generated(path: &PathBuf, text: String) -> i32 {
    match std::fs::write(path, text) {
        Ok(()) => {
            println!("wrote {}", path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", path.display());
            EXIT_ERROR
        }
    }
}

fn run_gen(cmd: GenCommand) -> i32 {
    match cmd {
        GenCommand::Grid {
            rows,
            cols,
            robots,
            diagonals,
            out,
        } => match gen::grid_model(rows, cols, robots, diagonals) {
            Ok(text) => write_generated(&out, text),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        GenCommand::Intermittent { teams, until, out } => {
            let parsed = gen::parse_meetings(&teams).and_then(|meetings| {
                let until = until.as_deref().map(gen::parse_until).transpose()?;
                Ok(gen::intermittent_formula(&meetings, until.as_ref()))
            });
            match parsed {
                Ok(text) => write_generated(&out, text),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_ERROR
                }
            }
        }
        GenCommand::Nba { recur, until, out } => {
            let parsed = gen::parse_meetings(&recur).and_then(|meetings| {
                let until = until.as_deref().map(gen::parse_until).transpose()?;
                Ok(gen::intermittent_nba_text(&meetings, until.as_ref()))
            });
            match parsed {
                Ok(text) => write_generated(&out, text),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_ERROR
                }
            }
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PLANNER_LOG")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Translate { ltl, out } => commands::cmd_translate(&ltl, &out),
        Command::Plan(args) => match args.into_config() {
            Ok(cfg) => commands::cmd_plan(&cfg),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Oracle(args) => match args.into_config() {
            Ok(cfg) => commands::cmd_oracle(&cfg),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Compare(args) => match args.into_config() {
            Ok(cfg) => commands::cmd_compare(&cfg),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Command::Gen(cmd) => run_gen(cmd),
    };
    std::process::exit(code);
}
