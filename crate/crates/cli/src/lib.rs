//! Command-line front end: one-shot evaluations, the reference sweeps and a
//! randomized bound checker.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! numerical precondition fails or a checked bound is violated.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qre_defense::experiments::{
    run_sweep, write_table_file, BuiltinSpace, Cell, Grid, OutputFormat, SpaceRef, SweepConfig, SweepKind, Table,
    REFERENCE_BUDGET,
};
use qre_defense::{
    behavioral_optimal, defender_response, pobw, poqa, theorem_case, GameError, Result, SecurityGame, StrategySpace,
};

#[derive(Parser, Debug)]
#[command(name = "qre-defense", version, about = "Two-site security game with a boundedly rational defender")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON file with parameter values; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the table here (plus a `.meta.json` sibling) instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "csv|jsonl")]
    format: Option<OutputFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Defender QRE over a strategy space for one loss and one lambda.
    Qre(QreArgs),
    /// Optimal allocation by bisection and, when it applies, closed form.
    Optimal(GameArgs),
    /// Response probabilities across a lambda grid.
    SweepLambda(SweepArgs),
    /// sigma(r3) across losses and lambdas on space A or B.
    SweepLoss(SweepArgs),
    /// Price of quantal anarchy across lambdas and losses.
    SweepPoqa(SweepArgs),
    /// Perceived against rational optimum over an alpha grid.
    PrelecCompare(PrelecArgs),
    /// Randomized checks of the PoQA and PoBW bounds.
    FuzzBounds(FuzzArgs),
}

#[derive(Args, Debug)]
struct GameArgs {
    #[arg(long = "R", value_name = "BUDGET")]
    budget: Option<f64>,
    #[arg(long = "loss-A", value_name = "A")]
    loss: Option<f64>,
}

#[derive(Args, Debug)]
struct QreArgs {
    #[command(flatten)]
    game: GameArgs,
    /// `A`, `B`, `C` or a comma-separated list of site-1 investments.
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    space: Option<String>,
    #[arg(long = "R", value_name = "BUDGET")]
    budget: Option<f64>,
    #[arg(long = "loss-A", value_name = "A,...", value_delimiter = ',')]
    loss: Vec<f64>,
    #[arg(long, value_name = "L,...", value_delimiter = ',', conflicts_with = "lambda_log")]
    lambda: Vec<f64>,
    /// Log-spaced lambda grid.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"])]
    lambda_log: Option<Vec<f64>>,
    /// Prepend lambda = 0 to a log-spaced grid.
    #[arg(long, requires = "lambda_log")]
    include_zero: bool,
}

#[derive(Args, Debug)]
struct PrelecArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_name = "ALPHA,...", value_delimiter = ',')]
    alpha: Vec<f64>,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long)]
    trials: Option<usize>,
}

/// Config file contents. Sweep fields are shared with the library; `trials`
/// and `alpha` only matter to the CLI.
#[derive(Debug, Default)]
struct FileConfig {
    sweep: SweepConfig,
    trials: Option<usize>,
    alpha: Option<Grid>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| GameError::config("--config", format!("{}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| GameError::config("<config>", e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| GameError::config("<config>", "top level must be a JSON object"))?;
        let take = |obj: &mut serde_json::Map<String, Value>, key: &str| obj.remove(key);
        let trials = take(obj, "trials")
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| GameError::config("trials", e.to_string()))?;
        let alpha = take(obj, "alpha")
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| GameError::config("alpha", e.to_string()))?;
        let sweep = serde_json::from_value(value).map_err(|e| GameError::config("<config>", e.to_string()))?;
        Ok(FileConfig { sweep, trials, alpha })
    }
}

fn parse_space(text: &str) -> Result<SpaceRef> {
    if let Ok(b) = text.parse::<BuiltinSpace>() {
        return Ok(SpaceRef::Builtin(b));
    }
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(SpaceRef::Explicit)
        .map_err(|_| GameError::config("--space", format!("expected A, B, C or a list of numbers, got `{text}`")))
}

fn build_space(space: &SpaceRef, budget: f64, loss: f64) -> Result<StrategySpace<f64>> {
    match space {
        SpaceRef::Builtin(b) => {
            if budget != REFERENCE_BUDGET {
                return Err(GameError::config("--R", format!("space {b} is defined for R = {REFERENCE_BUDGET}")));
            }
            b.build(loss)
        }
        SpaceRef::Explicit(v) => {
            StrategySpace::new(budget, v.iter().copied()).map_err(|e| GameError::config("--space", e.to_string()))
        }
    }
}

fn grid_of(values: Vec<f64>) -> Option<Grid> {
    match values.len() {
        0 => None,
        1 => Some(Grid::Fixed(values[0])),
        _ => Some(Grid::Values(values)),
    }
}

fn single(grid: &Grid, path: &str) -> Result<f64> {
    match grid.values(path)?.as_slice() {
        [x] => Ok(*x),
        _ => Err(GameError::config(path, "expected a single value")),
    }
}

fn positive(x: f64, path: &str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(GameError::config(path, format!("must be positive and finite, got {x}")))
    }
}

/// Budget and loss from flags, then the config file, then `(10, 1)`.
fn game_params(args: &GameArgs, cfg: &FileConfig) -> Result<(f64, f64)> {
    let budget = positive(args.budget.or(cfg.sweep.budget).unwrap_or(REFERENCE_BUDGET), "R")?;
    let loss = match (args.loss, &cfg.sweep.loss) {
        (Some(a), _) => a,
        (None, Some(g)) => single(g, "A")?,
        (None, None) => 1.0,
    };
    Ok((budget, positive(loss, "A")?))
}

struct Output {
    table: Table,
    metadata: Value,
    /// Raised after the table is written.
    failure: Option<GameError>,
}

impl Output {
    fn ok(table: Table, metadata: Value) -> Self {
        Output { table, metadata, failure: None }
    }
}

fn tool_metadata(command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m
}

fn run_qre(args: &QreArgs, cfg: &FileConfig) -> Result<Output> {
    let (budget, loss) = game_params(&args.game, cfg)?;
    let space_ref = match (&args.space, &cfg.sweep.space) {
        (Some(s), _) => parse_space(s)?,
        (None, Some(s)) => s.clone(),
        (None, None) => SpaceRef::Builtin(BuiltinSpace::C),
    };
    let lambda = match (args.lambda, &cfg.sweep.lambda) {
        (Some(l), _) => l,
        (None, Some(g)) => single(g, "lambda")?,
        (None, None) => return Err(GameError::config("lambda", "required")),
    };
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(GameError::config("lambda", format!("must be >= 0, got {lambda}")));
    }
    let game = SecurityGame::exponential(budget, loss)?;
    let space = build_space(&space_ref, budget, loss)?;
    let sigma = defender_response(&game, &space, lambda)?;

    let mut table = Table::new(["strategy", "site1", "site2", "loss", "sigma"]);
    for (i, alloc) in space.iter().enumerate() {
        table.push(vec![
            space.labels()[i].as_str().into(),
            alloc.site1.into(),
            alloc.site2(budget).into(),
            sigma.losses()[i].into(),
            sigma.get(i).into(),
        ]);
    }
    let mut meta = tool_metadata("qre");
    meta.insert("R".into(), json!(budget));
    meta.insert("A".into(), json!(loss));
    meta.insert("lambda".into(), json!(lambda));
    meta.insert("space".into(), serde_json::to_value(&space_ref)?);
    Ok(Output::ok(table, Value::Object(meta)))
}

fn run_optimal(args: &GameArgs, cfg: &FileConfig) -> Result<Output> {
    let (budget, loss) = game_params(args, cfg)?;
    let game = SecurityGame::exponential(budget, loss)?;
    let star = game.optimal_allocation();
    let closed: Cell = match game.optimal_allocation_closed_form() {
        Ok(a) => a.site1.into(),
        Err(_) => "n/a".into(),
    };
    let mut table = Table::new(["R", "A", "r_star_bisection", "r_star_closed_form", "site2", "expected_loss", "interior"]);
    table.push(vec![
        budget.into(),
        loss.into(),
        star.site1.into(),
        closed,
        star.site2(budget).into(),
        game.expected_loss(&star)?.into(),
        game.has_interior_optimum().into(),
    ]);
    Ok(Output::ok(table, Value::Object(tool_metadata("optimal"))))
}

fn run_sweep_command(kind: SweepKind, args: &SweepArgs, cfg: &FileConfig, seed: Option<u64>) -> Result<Output> {
    let mut merged = cfg.sweep.clone();
    if merged.kind.is_none() {
        merged.kind = Some(kind);
    }
    if let Some(s) = &args.space {
        merged.space = Some(parse_space(s)?);
    }
    if args.budget.is_some() {
        merged.budget = args.budget;
    }
    if let Some(g) = grid_of(args.loss.clone()) {
        merged.loss = Some(g);
    }
    if let Some(g) = grid_of(args.lambda.clone()) {
        merged.lambda = Some(g);
    }
    if let Some(v) = &args.lambda_log {
        let count = v[2];
        if !(count >= 1.0 && count.fract() == 0.0) {
            return Err(GameError::config("--lambda-log", format!("COUNT must be a positive integer, got {count}")));
        }
        merged.lambda = Some(Grid::LogRange {
            start: v[0],
            stop: v[1],
            count: count as usize,
            include_zero: args.include_zero,
        });
    }
    let spec = merged.resolve(kind)?;
    let mut result = run_sweep(&spec)?;
    result.metadata.seed = seed;
    Ok(Output::ok(result.table, serde_json::to_value(&result.metadata)?))
}

fn run_prelec(args: &PrelecArgs, cfg: &FileConfig) -> Result<Output> {
    let (budget, loss) = game_params(&args.game, cfg)?;
    let alphas = match (grid_of(args.alpha.clone()), &cfg.alpha) {
        (Some(g), _) => g.values("--alpha")?,
        (None, Some(g)) => g.values("alpha")?,
        (None, None) => (1..=10).map(|k| k as f64 / 10.0).collect(),
    };
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(GameError::config("alpha", format!("alpha must lie in (0, 1], got {a}")));
    }
    let game = SecurityGame::exponential(budget, loss)?;
    let r_star = game.optimal_allocation().site1;
    let mut table = Table::new(["alpha", "r_hat", "r_star", "theorem_case", "prediction_holds", "pobw", "pobw_bound"]);
    for &alpha in &alphas {
        let r_hat = behavioral_optimal(&game, alpha)?.site1;
        let (case, holds): (Cell, Cell) = if alpha < 1.0 {
            let case = theorem_case(&game, alpha)?;
            let holds = match case.consistent_with(r_hat, r_star, 1e-8) {
                Some(b) => b.into(),
                None => "n/a".into(),
            };
            (case.as_str().into(), holds)
        } else {
            ("rational".into(), ((r_hat - r_star).abs() <= 1e-8).into())
        };
        let report = pobw(&game, alpha)?;
        table.push(vec![
            alpha.into(),
            r_hat.into(),
            r_star.into(),
            case,
            holds,
            report.value.into(),
            report.bound.unwrap_or(f64::NAN).into(),
        ]);
    }
    let mut meta = tool_metadata("prelec-compare");
    meta.insert("R".into(), json!(budget));
    meta.insert("A".into(), json!(loss));
    Ok(Output::ok(table, Value::Object(meta)))
}

/// One random game, menu, lambda and alpha.
fn random_instance(rng: &mut ChaCha8Rng) -> Result<(SecurityGame<f64>, StrategySpace<f64>, f64, f64)> {
    let budget = rng.gen_range(0.5..15.0);
    let ln_a = rng.gen_range(-budget - 2.0..budget + 2.0);
    let game = SecurityGame::exponential(budget, f64::exp(ln_a))?;
    let n = rng.gen_range(1..=10);
    let mut site1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=budget)).collect();
    site1.sort_by(f64::total_cmp);
    site1.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let space = StrategySpace::new(budget, site1)?;
    let lambda = if rng.gen_bool(0.1) { 0.0 } else { 10f64.powf(rng.gen_range(-3.0..4.0)) };
    let alpha = rng.gen_range(0.01..=1.0);
    Ok((game, space, lambda, alpha))
}

fn run_fuzz(args: &FuzzArgs, cfg: &FileConfig, seed: u64) -> Result<Output> {
    let trials = args.trials.or(cfg.trials).unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut poqa_bad, mut pobw_bad) = (0usize, 0usize);
    let (mut poqa_worst, mut pobw_worst) = (0f64, 0f64);
    for trial in 0..trials {
        let (game, space, lambda, alpha) = random_instance(&mut rng)?;
        let q = poqa(&game, &space, lambda)?;
        let b = pobw(&game, alpha)?;
        let (qb, bb) = (q.bound.unwrap_or(f64::NAN), b.bound.unwrap_or(f64::NAN));
        poqa_worst = poqa_worst.max(q.value / qb);
        pobw_worst = pobw_worst.max(b.value / bb);
        if q.within_bound() != Some(true) {
            poqa_bad += 1;
            log::error!("trial {trial}: PoQA {} exceeds bound {qb}", q.value);
        }
        if b.within_bound() != Some(true) {
            pobw_bad += 1;
            log::error!("trial {trial}: PoBW {} exceeds bound {bb}", b.value);
        }
    }
    let mut table = Table::new(["trials", "seed", "poqa_violations", "pobw_violations", "max_poqa_over_bound", "max_pobw_over_bound"]);
    table.push(vec![
        trials.into(),
        Cell::Int(seed as i64),
        poqa_bad.into(),
        pobw_bad.into(),
        poqa_worst.into(),
        pobw_worst.into(),
    ]);
    let mut meta = tool_metadata("fuzz-bounds");
    meta.insert("seed".into(), json!(seed));
    meta.insert("trials".into(), json!(trials));
    let failure = (poqa_bad + pobw_bad > 0)
        .then(|| GameError::Violation(format!("{poqa_bad} PoQA and {pobw_bad} PoBW bound violations")));
    Ok(Output { table, metadata: Value::Object(meta), failure })
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = FileConfig::load(cli.global.config.as_ref())?;
    let seed = cli.global.seed.or(cfg.sweep.seed);
    let output = match &cli.command {
        Command::Qre(a) => run_qre(a, &cfg)?,
        Command::Optimal(a) => run_optimal(a, &cfg)?,
        Command::SweepLambda(a) => run_sweep_command(SweepKind::LambdaSweep, a, &cfg, seed)?,
        Command::SweepLoss(a) => run_sweep_command(SweepKind::LossSweep, a, &cfg, seed)?,
        Command::SweepPoqa(a) => run_sweep_command(SweepKind::PoqaSweep, a, &cfg, seed)?,
        Command::PrelecCompare(a) => run_prelec(a, &cfg)?,
        Command::FuzzBounds(a) => run_fuzz(a, &cfg, seed.unwrap_or(0))?,
    };
    let format = cli.global.format.or(cfg.sweep.format).unwrap_or_default();
    let out = cli.global.out.clone().or_else(|| cfg.sweep.output_path.clone().map(PathBuf::from));
    match out {
        Some(path) => write_table_file(&output.table, &path, format, Some(&output.metadata))?,
        None => {
            output.table.write(&mut *stdout, format)?;
            stdout.flush()?;
        }
    }
    output.failure.map_or(Ok(()), Err)
}

/// Runs the CLI with `argv` (program name first), writing tables to
/// `stdout` and diagnostics to stderr. Returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(GameError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock())
}
