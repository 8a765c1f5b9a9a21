//! `mazepi` command-line driver.
//!
//! Exit status: 0 on success, 2 for bad input, 3 when a computation fails.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use mazepi::config::{derive_seed, stream, KeyValues};
use mazepi::experiments::{
    self, benchmark_speedup, export_heatmap, export_path_overlay, export_spider, generate_maze, parse_path_csv,
    path_csv, spider_experiment, suite_mazes, BenchConfig, BenchError, GenerateError, MazeSpec, SpiderConfig,
    SpiderTable, SuiteError,
};
use mazepi::numfmt::sig17;
use mazepi::solver::{self, SolveError, SolverConfig};
use mazepi::tuner::{
    generate_candidates, tune_with, FitOptions, Featurizer, Objective, ParamRanges, TuneError,
    TuneOptions, FEATURE_NAMES,
};
use mazepi::{Maze, RewardParams, ValueFunction};

#[derive(Parser)]
#[command(name = "mazepi", version, about = "Maze MDP policy iteration and reward auto-tuning")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (output is identical for any count)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Policy evaluation convergence threshold
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Score rollouts with discounting
    #[arg(long, global = true)]
    discounted: bool,
    /// Extra configuration entry, e.g. `--set budget=60` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a maze with policy iteration
    Solve { maze: Option<PathBuf> },
    /// Auto-tune reward parameters and gamma on a maze
    Tune { maze: Option<PathBuf> },
    /// Evaluations-to-target benchmark of the tuner against baselines
    Bench { maze: Option<PathBuf> },
    /// Multi-maze, twelve-policy suite with spider plots
    Suite,
    /// Generate maze files
    Gen,
    /// Render SVGs from a maze and value/path/spider CSVs
    Render {
        maze: Option<PathBuf>,
        #[arg(long)]
        values: Option<PathBuf>,
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        spider: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome<T> = Result<T, Failure>;

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn compute(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn solve_failure(e: SolveError) -> Failure {
    match e {
        SolveError::InvalidTheta(_) | SolveError::Params(_) | SolveError::ZeroSteps => input(e),
        _ => compute(e),
    }
}

fn tune_failure(e: TuneError) -> Failure {
    match e {
        TuneError::Solve { .. } | TuneError::Ranking(_) => compute(e),
        _ => input(e),
    }
}

fn suite_failure(e: SuiteError) -> Failure {
    match e {
        SuiteError::Solve { .. } => compute(e),
        SuiteError::Tune(t) => tune_failure(t),
        SuiteError::Ranking(_) => compute(e),
        _ => input(e),
    }
}

fn bench_failure(e: BenchError) -> Failure {
    match e {
        BenchError::Tune { maze, source } => {
            let f = tune_failure(source);
            Failure {
                code: f.code,
                error: f.error.context(format!("maze {maze}")),
            }
        }
        _ => input(e),
    }
}

const PARAM_KEYS: [&str; 5] = ["step_cost", "bump_penalty", "oil_penalty", "goal_reward", "gamma"];
const RANGE_KEYS: [&str; 5] = [
    "step_cost_range",
    "bump_penalty_range",
    "oil_penalty_range",
    "goal_reward_range",
    "gamma_range",
];
const COMMON_KEYS: [&str; 5] = ["seed", "out", "threads", "theta", "discounted"];
const TUNE_KEYS: [&str; 6] = ["pool", "budget", "seed_count", "refit_every", "c_reg", "optimizer"];

/// Effective configuration: file entries with flags applied on top.
struct Settings {
    kv: KeyValues,
}

impl Settings {
    fn load(common: &Common, positional_maze: Option<&Path>) -> Outcome<Settings> {
        let mut kv = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))
                    .map_err(input)?;
                KeyValues::parse(&text)
                    .with_context(|| format!("in {}", path.display()))
                    .map_err(input)?
            }
            None => KeyValues::default(),
        };
        for entry in &common.set {
            let parsed = KeyValues::parse(entry).map_err(input)?;
            if parsed.keys().next().is_none() {
                return Err(input(anyhow!("--set expects KEY=VALUE, got {entry:?}")));
            }
            kv.merge(&parsed);
        }
        if let Some(seed) = common.seed {
            kv.set("seed", seed.to_string());
        }
        if let Some(out) = &common.out {
            kv.set("out", out.display().to_string());
        }
        if let Some(t) = common.threads {
            kv.set("threads", t.to_string());
        }
        if let Some(theta) = common.theta {
            kv.set("theta", sig17(theta));
        }
        if common.discounted {
            kv.set("discounted", "true");
        }
        if let Some(maze) = positional_maze {
            kv.set("maze", maze.display().to_string());
        }
        Ok(Settings { kv })
    }

    fn allow(&self, specific: &[&str]) -> Outcome<()> {
        let allowed: Vec<&str> = COMMON_KEYS.iter().chain(specific).copied().collect();
        self.kv.check_keys(&allowed).map_err(input)
    }

    fn get<T>(&self, key: &str, default: T) -> Outcome<T>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.kv.parsed(key).map_err(input)?.unwrap_or(default))
    }

    fn seed(&self) -> Outcome<u64> {
        self.get("seed", 0)
    }

    fn theta(&self) -> Outcome<f64> {
        self.get("theta", solver::DEFAULT_THETA)
    }

    fn out(&self) -> PathBuf {
        PathBuf::from(self.kv.get("out").unwrap_or("out"))
    }

    fn params(&self) -> Outcome<RewardParams> {
        let d = RewardParams::default().to_array();
        let mut a = [0.0; 5];
        for (k, key) in PARAM_KEYS.iter().enumerate() {
            a[k] = self.get(key, d[k])?;
        }
        let p = RewardParams::from_array(a);
        p.validate().map_err(input)?;
        Ok(p)
    }

    fn ranges(&self) -> Outcome<ParamRanges> {
        let mut a = ParamRanges::default().as_array();
        for (k, key) in RANGE_KEYS.iter().enumerate() {
            if let Some(r) = self.kv.range(key).map_err(input)? {
                a[k] = r;
            }
        }
        let r = ParamRanges::from_array(a);
        r.validate().map_err(input)?;
        Ok(r)
    }

    fn tune_options(&self) -> Outcome<TuneOptions> {
        let d = TuneOptions::default();
        let c_reg = self.get("c_reg", d.fit.c_reg)?;
        let fit = match self.kv.get("optimizer").unwrap_or("dual") {
            "dual" => FitOptions::with_c(c_reg),
            "subgradient" => FitOptions::subgradient(c_reg, self.get("epochs", 500)?),
            other => return Err(input(anyhow!("optimizer must be `dual` or `subgradient`, got {other:?}"))),
        };
        Ok(TuneOptions {
            budget: self.get("budget", d.budget)?,
            seed_count: self.get("seed_count", d.seed_count)?,
            refit_every: self.get("refit_every", d.refit_every)?,
            fit,
            seed: self.seed()?,
        })
    }

    fn maze(&self) -> Outcome<Maze> {
        let path = self
            .kv
            .get("maze")
            .ok_or_else(|| input(anyhow!("no maze given (positional argument or `maze=` key)")))?;
        read_maze(Path::new(path))
    }
}

fn read_maze(path: &Path) -> Outcome<Maze> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read maze {}", path.display()))
        .map_err(input)?;
    Maze::parse(&text)
        .with_context(|| format!("invalid maze {}", path.display()))
        .map_err(input)
}

fn write(path: &Path, contents: &str) -> Outcome<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))
            .map_err(input)?;
    }
    fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(input)
}

fn export_failure(e: experiments::ExportError) -> Failure {
    input(e)
}

fn cmd_solve(s: &Settings) -> Outcome<()> {
    let mut keys = vec!["maze", "max_rounds", "max_steps"];
    keys.extend(PARAM_KEYS);
    s.allow(&keys)?;
    let maze = s.maze()?;
    let params = s.params()?;
    let cfg = SolverConfig {
        max_rounds: s.get("max_rounds", solver::DEFAULT_MAX_ROUNDS)?,
        ..SolverConfig::with_theta(s.theta()?)
    };
    let max_steps = s.get("max_steps", solver::default_max_steps(&maze))?;
    let discounted: bool = s.get("discounted", false)?;
    let init = solver::Policy::uniform(&maze, mazepi::Action::North);
    let sol = solver::policy_iteration_with(&maze, &params, &init, &cfg, None).map_err(solve_failure)?;
    let path = solver::extract_path(&maze, &sol.policy, max_steps).map_err(solve_failure)?;
    let reward = solver::path_reward(&maze, &params, &path, discounted);
    let out = s.out();
    export_heatmap(&maze, &sol.values, &out.join("values")).map_err(export_failure)?;
    write(&out.join("policy.txt"), &sol.policy.to_text(&maze))?;
    write(&out.join("path.csv"), &path_csv(&maze, &path))?;
    export_path_overlay(&maze, &path, &out.join("path.svg")).map_err(export_failure)?;
    let reached = path.last() == Some(&maze.goal());
    let mut stats = sol.stats.summary();
    let _ = writeln!(stats, "value_start={}", sig17(sol.values.get(maze.start())));
    let _ = writeln!(stats, "path_length={}", path.len() - 1);
    let _ = writeln!(stats, "reached_goal={reached}");
    let _ = writeln!(
        stats,
        "{}={}",
        if discounted { "discounted_reward" } else { "accumulated_reward" },
        sig17(reward)
    );
    write(&out.join("stats.txt"), &stats)?;
    print!("{stats}");
    println!("elapsed_ms={}", sol.stats.elapsed.as_millis());
    Ok(())
}

fn model_dump(w: &[f64], violations: usize, pairs: usize, c_reg: f64) -> String {
    let mut out = String::new();
    for (name, x) in FEATURE_NAMES.iter().zip(w) {
        let _ = writeln!(out, "{name}={}", sig17(*x));
    }
    let _ = writeln!(out, "c_reg={}", sig17(c_reg));
    let _ = writeln!(out, "pairs={pairs}");
    let _ = writeln!(out, "training_violations={violations}");
    out
}

fn cmd_tune(s: &Settings) -> Outcome<()> {
    let mut keys = vec!["maze", "epochs"];
    keys.extend(TUNE_KEYS);
    keys.extend(RANGE_KEYS);
    s.allow(&keys)?;
    let maze = s.maze()?;
    let ranges = s.ranges()?;
    let opts = s.tune_options()?;
    let seed = s.seed()?;
    let pool_size: usize = s.get("pool", 200)?;
    let pool = generate_candidates(&ranges, pool_size, derive_seed(seed, stream::POOL)).map_err(input)?;
    let objective = Objective {
        theta: s.theta()?,
        discounted: s.get("discounted", false)?,
        ..Objective::new(&maze)
    };
    let features = Featurizer::fit(&maze, &pool)
        .ok_or_else(|| input(anyhow!("empty pool")))?
        .featurize_all(&pool);
    let opts = TuneOptions {
        seed: derive_seed(seed, stream::TUNER),
        ..opts
    };
    let started = Instant::now();
    let outcome = tune_with(&pool, &features, 0, &opts, |c| objective.evaluate(c)).map_err(tune_failure)?;
    let out = s.out();
    write(&out.join("trace.csv"), &outcome.trace.to_csv())?;
    let mut best = outcome.best.to_key_values();
    let _ = writeln!(best, "accumulated_reward={}", sig17(outcome.best_reward));
    write(&out.join("best.cfg"), &best)?;
    let m = &outcome.model;
    write(
        &out.join("model.txt"),
        &model_dump(m.w.values(), m.training_violations, m.pairs, m.c_reg),
    )?;
    print!("{best}");
    println!("elapsed_ms={}", started.elapsed().as_millis());
    Ok(())
}

fn bench_mazes(s: &Settings) -> Outcome<Vec<Maze>> {
    if s.kv.get("maze").is_some() {
        return Ok(vec![s.maze()?]);
    }
    let count: usize = s.get("mazes", 8)?;
    let width: usize = s.get("width", 15)?;
    let height: usize = s.get("height", 15)?;
    suite_mazes(count, width, height, s.seed()?).map_err(input)
}

fn cmd_bench(s: &Settings) -> Outcome<()> {
    let mut keys = vec!["maze", "mazes", "width", "height", "seeds", "quantile", "epochs"];
    keys.extend(TUNE_KEYS);
    keys.extend(RANGE_KEYS);
    s.allow(&keys)?;
    let mazes = bench_mazes(s)?;
    let d = BenchConfig::default();
    let tune = s.tune_options()?;
    let cfg = BenchConfig {
        pool_size: s.get("pool", d.pool_size)?,
        budget: tune.budget,
        target_quantile: s.get("quantile", d.target_quantile)?,
        seeds: s.get("seeds", d.seeds)?,
        ranges: s.ranges()?,
        tune,
        theta: s.theta()?,
        seed: s.seed()?,
    };
    let started = Instant::now();
    let report = benchmark_speedup(&mazes, &cfg).map_err(bench_failure)?;
    let out = s.out();
    write(&out.join("bench.csv"), &report.to_csv())?;
    write(&out.join("bench_runs.csv"), &report.runs_csv())?;
    write(&out.join("bench_summary.txt"), &report.summary())?;
    print!("{}", report.summary());
    println!("elapsed_ms={}", started.elapsed().as_millis());
    Ok(())
}

fn cmd_suite(s: &Settings) -> Outcome<()> {
    let mut keys = vec!["mazes", "width", "height", "low_gamma", "high_gamma", "epochs"];
    keys.extend(TUNE_KEYS);
    keys.extend(RANGE_KEYS);
    s.allow(&keys)?;
    let d = SpiderConfig::default();
    let cfg = SpiderConfig {
        maze_count: s.get("mazes", d.maze_count)?,
        width: s.get("width", d.width)?,
        height: s.get("height", d.height)?,
        pool_size: s.get("pool", d.pool_size)?,
        ranges: s.ranges()?,
        tune: s.tune_options()?,
        gammas: (s.get("low_gamma", d.gammas.0)?, s.get("high_gamma", d.gammas.1)?),
        theta: s.theta()?,
        seed: s.seed()?,
    };
    let started = Instant::now();
    let run = spider_experiment(&cfg).map_err(suite_failure)?;
    let out = s.out();
    for (k, maze) in run.mazes.iter().enumerate() {
        write(&out.join(format!("mazes/maze_{k}.txt")), &maze.to_text())?;
    }
    let mut policies = String::from("policy,pool_id,step_cost,bump_penalty,oil_penalty,goal_reward,gamma\n");
    for (k, c) in run.policies.iter().enumerate() {
        let p = c.params.to_array().map(sig17).join(",");
        let _ = writeln!(policies, "R{k},{},{p}", c.id);
    }
    write(&out.join("policies.csv"), &policies)?;
    export_spider(&run.table, &out).map_err(export_failure)?;
    let argmax = run.table.argmax_policies();
    let distinct: std::collections::BTreeSet<usize> = argmax.iter().map(|&(_, p)| p).collect();
    let mut summary = format!("rows={}\nmazes={}\n", run.table.rows.len(), run.mazes.len());
    for (m, p) in &argmax {
        let _ = writeln!(summary, "maze {m}: best R{p}");
    }
    let _ = writeln!(summary, "distinct_best_policies={}", distinct.len());
    write(&out.join("suite_summary.txt"), &summary)?;
    print!("{summary}");
    println!("elapsed_ms={}", started.elapsed().as_millis());
    Ok(())
}

fn cmd_gen(s: &Settings) -> Outcome<()> {
    s.allow(&[
        "kind",
        "width",
        "height",
        "lanes",
        "bump_step",
        "wall_density",
        "bump_density",
        "oil_density",
        "count",
    ])?;
    let seed = s.seed()?;
    let count: usize = s.get("count", 1)?;
    let width: usize = s.get("width", 15)?;
    let out = s.out();
    for k in 0..count {
        let maze_seed = derive_seed(derive_seed(seed, stream::MAZES), k as u64);
        let spec = match s.kv.get("kind").unwrap_or("multi_modal") {
            "multi_lane" => {
                let lanes: usize = s.get("lanes", 3)?;
                let mut spec = MazeSpec::multi_lane(width, lanes, s.get("bump_step", 2)?, maze_seed);
                spec.height = s.get("height", spec.height)?;
                spec
            }
            "multi_modal" => MazeSpec::multi_modal(
                width,
                s.get("height", 15)?,
                (
                    s.get("wall_density", 0.2)?,
                    s.get("bump_density", 0.1)?,
                    s.get("oil_density", 0.05)?,
                ),
                maze_seed,
            ),
            other => return Err(input(anyhow!("kind must be `multi_lane` or `multi_modal`, got {other:?}"))),
        };
        let maze = generate_maze(&spec).map_err(|e| match e {
            GenerateError::Spec(_) => input(e),
            GenerateError::Invalid(_) => compute(e),
        })?;
        let path = out.join(format!("maze_{k}.txt"));
        write(&path, &maze.to_text())?;
        println!("{}", path.display());
    }
    Ok(())
}

fn read_text(path: &Path, what: &str) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {what} {}", path.display()))
        .map_err(input)
}

fn cmd_render(s: &Settings, values: Option<&Path>, path: Option<&Path>, spider: Option<&Path>) -> Outcome<()> {
    s.allow(&["maze"])?;
    if values.is_none() && path.is_none() && spider.is_none() {
        return Err(input(anyhow!("nothing to render: pass --values, --path or --spider")));
    }
    let out = s.out();
    if values.is_some() || path.is_some() {
        let maze = s.maze()?;
        if let Some(v) = values {
            let text = read_text(v, "value CSV")?;
            let vf = ValueFunction::from_csv(&maze, &text)
                .map_err(|e| input(anyhow!("{}: {e}", v.display())))?;
            let svg = experiments::heatmap_svg(&maze, &vf).map_err(export_failure)?;
            write(&out.join("heatmap.svg"), &svg)?;
        }
        if let Some(p) = path {
            let text = read_text(p, "path CSV")?;
            let states = parse_path_csv(&text).map_err(|e| input(anyhow!("{}: {e}", p.display())))?;
            export_path_overlay(&maze, &states, &out.join("path.svg")).map_err(export_failure)?;
        }
    }
    if let Some(sp) = spider {
        let text = read_text(sp, "spider CSV")?;
        let table = SpiderTable::from_csv(&text).map_err(|e| input(anyhow!("{}: {e}", sp.display())))?;
        export_spider(&table, &out).map_err(export_failure)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    let positional = match &cli.command {
        Command::Solve { maze } | Command::Tune { maze } | Command::Bench { maze } | Command::Render { maze, .. } => {
            maze.clone()
        }
        Command::Suite | Command::Gen => None,
    };
    let settings = Settings::load(&cli.common, positional.as_deref())?;
    let threads: usize = settings.get("threads", 0)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    let pool = builder.build().map_err(compute)?;
    pool.install(|| match &cli.command {
        Command::Solve { .. } => cmd_solve(&settings),
        Command::Tune { .. } => cmd_tune(&settings),
        Command::Bench { .. } => cmd_bench(&settings),
        Command::Suite => cmd_suite(&settings),
        Command::Gen => cmd_gen(&settings),
        Command::Render {
            values, path, spider, ..
        } => cmd_render(&settings, values.as_deref(), path.as_deref(), spider.as_deref()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
