//! `ct`: evaluate, optimise and verify threshold capital-transfer strategies.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{combos, CliError, Command, Table};
use config::{cover_pairs, dist_pairs, parse_list, split_pair, ConfigError, RunConfig};

const CONFIG_HELP: &str = "\
Configuration is flat key=value text (model.a, model.b, model.c, model.i_star or model.x_star,
model.lambda, model.delta, dist.kind=beta|kumaraswamy, dist.alpha, dist.p, dist.q,
cover.kind=none|proportional|xl|total, cover.eta, cover.l, cover.L, cover.gamma, mc.n, mc.seed,
mc.horizon, mc.ci, fp.n, fp.tol, fp.x_max_factor, eval.evaluator=closed|mc|fixed-point, eval.y,
eval.x, opt.y_max, opt.tol_y, opt.scan, opt.fine, opt.verify, compare.lambda, compare.b,
compare.delta, compare.mu). Lists accept \"a,b,c\" or the inclusive grid \"start:end:count\".
Later sources win: --config file, then --set, then dedicated flags.
Every CSV starts with a '# config:' line holding the resolved configuration.
Exit codes: 0 success, 1 numerical failure, 2 invalid configuration.";

#[derive(Parser, Debug)]
#[command(name = "ct", version, about = "Capital-transfer threshold strategies", after_help = CONFIG_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Config file of key=value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Worker threads (default: all cores); never changes results.
    #[arg(long, env = "CT_THREADS", global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// closed, mc or fixed-point.
    #[arg(long, global = true)]
    evaluator: Option<String>,

    /// beta:ALPHA or kumaraswamy:P:Q.
    #[arg(long, global = true)]
    dist: Option<String>,

    /// none, proportional:ETA, xl:L or total:L.
    #[arg(long, global = true)]
    cover: Option<String>,

    /// Safety loading of the premium.
    #[arg(long, global = true)]
    gamma: Option<String>,

    /// Transfer threshold.
    #[arg(long, global = true)]
    y: Option<String>,

    /// Capital level(s): a number, a comma list or start:end:count.
    #[arg(long, global = true)]
    x: Option<String>,

    /// Capital grid start:end:count (same as --x).
    #[arg(long = "x-grid", global = true)]
    x_grid: Option<String>,

    /// Monte Carlo master seed.
    #[arg(long, global = true)]
    seed: Option<String>,

    /// Monte Carlo path count.
    #[arg(long, global = true)]
    n: Option<String>,

    /// Discount rate.
    #[arg(long, global = true)]
    delta: Option<String>,

    /// Loss intensity.
    #[arg(long, global = true)]
    lambda: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Value of a threshold strategy. Columns: x,value,ci_half_width,method,y,seed.
    Eval,
    /// Optimal threshold. Columns: row,y,objective,ci_half_width,method,verified
    /// (row is "trace" for search points and "optimum" for the result; objective is y + V_y(y)).
    Optimize,
    /// Lump-sum vs perpetual transfers over compare.* lists.
    /// Columns: lambda,b,delta,mu,boundary_b,boundary_lambda,verdict.
    CompareCd,
    /// Supersolution check of V_y. Columns: x,deriv_slack,generator,ok, then a '# summary:' line.
    HjbCheck,
    /// Premium and insured economy for a cover. Columns: cover,parameter,gamma,premium,x_star,r.
    Premium,
    /// Run a command over the cartesian product of --vary lists.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Command to run for each combination.
    #[arg(long, value_enum)]
    command: Command,

    /// KEY=LIST with LIST as "a,b,c" or start:end:count (repeatable).
    #[arg(long, value_name = "KEY=LIST", required = true)]
    vary: Vec<String>,

    /// Single long-format CSV with the varied keys as leading columns (the default without --out-dir).
    #[arg(long)]
    long: bool,

    /// Directory for one CSV per combination.
    #[arg(long = "out-dir", conflicts_with = "long")]
    out_dir: Option<PathBuf>,
}

fn build_config(c: &Common) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for pair in &c.set {
        cfg.set_pair(pair)?;
    }
    if let Some(d) = &c.dist {
        for (k, v) in dist_pairs(d)? {
            cfg.set(k, &v)?;
        }
    }
    if let Some(s) = &c.cover {
        for (k, v) in cover_pairs(s)? {
            cfg.set(k, &v)?;
        }
    }
    let flags = [
        ("eval.evaluator", &c.evaluator),
        ("cover.gamma", &c.gamma),
        ("eval.y", &c.y),
        ("eval.x", &c.x),
        ("eval.x", &c.x_grid),
        ("mc.seed", &c.seed),
        ("mc.n", &c.n),
        ("model.delta", &c.delta),
        ("model.lambda", &c.lambda),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}

fn render(out: &mut dyn Write, config_line: &str, table: &Table) -> std::io::Result<()> {
    writeln!(out, "# config: {config_line}")?;
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        writeln!(out, "{}", row.join(","))?;
    }
    for line in &table.trailer {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn emit(path: Option<&Path>, config_line: &str, table: &Table) -> Result<(), CliError> {
    for m in &table.messages {
        eprintln!("{m}");
    }
    match path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            render(&mut f, config_line, table)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock, config_line, table)?;
        }
    }
    Ok(())
}

fn parse_vary(specs: &[String]) -> Result<Vec<(String, Vec<String>)>, ConfigError> {
    let mut out = Vec::new();
    for spec in specs {
        let (k, v) = split_pair(spec)?;
        let values: Vec<String> = if v.split(':').count() == 3 {
            parse_list(k, v)?.iter().map(|x| commands::num(*x)).collect()
        } else {
            v.split(',').map(|s| s.trim().to_string()).collect()
        };
        if values.iter().any(String::is_empty) {
            return Err(ConfigError(format!("--vary {spec}: empty value")));
        }
        out.push((k.to_string(), values));
    }
    Ok(out)
}

fn file_name(cmd: Command, combo: &[(String, String)]) -> String {
    let mut name = cmd.name().to_string();
    for (k, v) in combo {
        name.push_str(&format!("__{k}={v}"));
    }
    name.retain(|c| c != '/' && c != '\\');
    name + ".csv"
}

fn sweep(base: &RunConfig, args: &SweepArgs, out: Option<&Path>) -> Result<(), CliError> {
    let vary = parse_vary(&args.vary)?;
    let mut configs = Vec::new();
    for combo in combos(&vary) {
        let mut cfg = base.clone();
        for (k, v) in &combo {
            cfg.set(k, v)?;
        }
        configs.push((combo, cfg));
    }
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        for (combo, cfg) in &configs {
            let table = args.command.run(cfg)?;
            emit(Some(&dir.join(file_name(args.command, combo))), &cfg.describe(), &table)?;
        }
        return Ok(());
    }
    let mut long = Table::default();
    for (combo, cfg) in &configs {
        let table = args.command.run(cfg)?;
        if long.columns.is_empty() {
            long.columns = combo.iter().map(|(k, _)| k.clone()).chain(table.columns.clone()).collect();
        }
        let prefix: Vec<String> = combo.iter().map(|(_, v)| v.clone()).collect();
        let tag = prefix.join(",");
        long.rows.extend(table.rows.into_iter().map(|r| prefix.iter().cloned().chain(r).collect()));
        long.trailer.extend(table.trailer.into_iter().map(|l| format!("[{tag}] {l}")));
        long.messages.extend(table.messages.into_iter().map(|m| format!("[{tag}] {m}")));
    }
    let header = format!("{} sweep={}", base.describe(), args.vary.join(" "));
    emit(out, &header, &long)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.common.threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(format!("cannot start {n} threads: {e}")))?;
    }
    let cfg = build_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    let cmd = match &cli.command {
        Cmd::Eval => Command::Eval,
        Cmd::Optimize => Command::Optimize,
        Cmd::CompareCd => Command::CompareCd,
        Cmd::HjbCheck => Command::HjbCheck,
        Cmd::Premium => Command::Premium,
        Cmd::Sweep(args) => return sweep(&cfg, args, out),
    };
    let table = cmd.run(&cfg)?;
    emit(out, &cfg.describe(), &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
