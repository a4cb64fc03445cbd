//! Subcommand bodies. Each returns a [`Table`] that the caller renders as CSV.

use std::fmt;

use ct_core::closed_form::compare_rates;
use ct_core::ide::verify_supersolution;
use ct_core::insurance::{build_insured_model, CoverKind};
use ct_core::optimizer::optimize;
use ct_core::{estimate_vy, Error, ThresholdValue};

use crate::config::{ConfigError, EvaluatorKind, RunConfig};

pub const EVAL_COLUMNS: &[&str] = &["x", "value", "ci_half_width", "method", "y", "seed"];
pub const OPTIMIZE_COLUMNS: &[&str] = &["row", "y", "objective", "ci_half_width", "method", "verified"];
pub const COMPARE_COLUMNS: &[&str] = &["lambda", "b", "delta", "mu", "boundary_b", "boundary_lambda", "verdict"];
pub const HJB_COLUMNS: &[&str] = &["x", "deriv_slack", "generator", "ok"];
pub const PREMIUM_COLUMNS: &[&str] = &["cover", "parameter", "gamma", "premium", "x_star", "r"];

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(Error::InvalidParameter(_))
            | CliError::Numerical(Error::ClosedFormUnavailable)
            | CliError::Numerical(Error::PremiumExceedsIncome { .. }) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Rows of one CSV plus trailing comment lines and messages for stderr.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailer: Vec<String>,
    pub messages: Vec<String>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn eval(cfg: &RunConfig) -> Result<Table, CliError> {
    let kind = cfg.evaluator_kind()?;
    let (params, law) = cfg.model()?;
    let y = cfg.threshold()?;
    let xs = cfg.x_values()?;
    let seed = cfg.seed()?.to_string();
    let mut t = Table::new(EVAL_COLUMNS);
    let mut row = |x: f64, v: f64, ci: f64, method: &str| {
        t.push(vec![num(x), num(v), num(ci), method.to_string(), num(y), seed.clone()]);
    };
    match kind {
        EvaluatorKind::Closed => {
            let alpha = match law {
                ct_core::LossLaw::Plain(d) => d.beta_alpha().ok_or(Error::ClosedFormUnavailable)?,
                ct_core::LossLaw::Covered { .. } => return Err(Error::ClosedFormUnavailable.into()),
            };
            let tv = ThresholdValue::new(y, &params, alpha)?;
            for x in xs {
                row(x, tv.value(x)?, 0.0, "closed_form");
            }
        }
        EvaluatorKind::FixedPoint => {
            let v = cfg.evaluator()?.value_function(y, &params, &law)?;
            for x in xs {
                row(x, v.value(x), 0.0, "fixed_point");
            }
        }
        EvaluatorKind::MonteCarlo => {
            let mc = cfg.mc()?;
            for x in xs {
                let e = estimate_vy(x, y, &params, &law, &mc)?;
                row(x, e.value, e.ci_half_width, e.method.as_str());
            }
        }
    }
    Ok(t)
}

pub fn optimize_cmd(cfg: &RunConfig) -> Result<Table, CliError> {
    let (params, law) = cfg.model()?;
    let ev = cfg.evaluator()?;
    let res = optimize(&params, &law, &ev, &cfg.optimize_options()?)?;
    let method = res.evaluator.as_str();
    let mut t = Table::new(OPTIMIZE_COLUMNS);
    for (y, obj) in &res.search_trace {
        t.push(vec!["trace".into(), num(*y), num(*obj), String::new(), method.into(), String::new()]);
    }
    let verified = match &res.verification {
        Some(r) => r.pass.to_string(),
        None => "unchecked".to_string(),
    };
    t.push(vec![
        "optimum".into(),
        num(res.y_star),
        num(res.y_star + res.value_at_y_star),
        num(res.ci_half_width),
        method.into(),
        verified.clone(),
    ]);
    t.trailer.push(format!(
        "summary: y_star={} value={} verified={verified}",
        num(res.y_star),
        num(res.value_at_y_star)
    ));
    t.messages.push(format!(
        "y_star = {:.4}, V(y*) = {:.4}, verified = {verified}",
        res.y_star, res.value_at_y_star
    ));
    t.messages.extend(res.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(t)
}

pub fn compare_cd(cfg: &RunConfig) -> Result<Table, CliError> {
    let lists = cfg.compare_lists()?;
    let mut t = Table::new(COMPARE_COLUMNS);
    for &mu in &lists.mu {
        if !(0.0..1.0).contains(&mu) {
            return Err(ConfigError(format!("compare.mu = {mu} must lie in [0, 1)")).into());
        }
        for &delta in &lists.delta {
            for &b in &lists.b {
                for &lambda in &lists.lambda {
                    let c = compare_rates(b, delta, lambda, mu);
                    t.push(vec![
                        num(lambda),
                        num(b),
                        num(delta),
                        num(mu),
                        num(c.boundary),
                        num((b - delta) / (1.0 - mu)),
                        c.verdict.as_str().into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

pub fn hjb_check(cfg: &RunConfig) -> Result<Table, CliError> {
    let (params, law) = cfg.model()?;
    let y = cfg.threshold()?;
    if cfg.evaluator_kind()? == EvaluatorKind::MonteCarlo {
        return Err(ConfigError("hjb-check needs evaluator closed or fixed-point".into()).into());
    }
    let v = cfg.evaluator()?.value_function(y, &params, &law)?;
    let r = verify_supersolution(&v, &params, &law);
    let mut t = Table::new(HJB_COLUMNS);
    for &(x, slack, gen) in &r.points {
        let ok = slack >= -r.eps_d && gen >= -r.eps_g;
        t.push(vec![num(x), num(slack), num(gen), ok.to_string()]);
    }
    t.trailer.push(format!(
        "summary: pass={} max_deriv_violation={} at x={} max_generator_violation={} at x={} eps_d={} eps_g={}",
        r.pass,
        num(r.max_deriv_violation),
        num(r.worst_deriv_x),
        num(r.max_generator_violation),
        num(r.worst_generator_x),
        num(r.eps_d),
        num(r.eps_g)
    ));
    t.messages.push(format!(
        "supersolution check at y = {y}: {}",
        if r.pass { "pass" } else { "fail" }
    ));
    Ok(t)
}

pub fn premium(cfg: &RunConfig) -> Result<Table, CliError> {
    let base = cfg.params()?;
    let dist = cfg.dist()?;
    let cover = cfg
        .cover()?
        .ok_or_else(|| ConfigError("premium needs a cover (cover.kind and cover.gamma)".into()))?;
    let m = build_insured_model(&base, &cover, &dist)?;
    let name = match cover.kind {
        CoverKind::Proportional { .. } => "proportional",
        CoverKind::ExcessOfLoss { .. } => "xl",
        CoverKind::TotalLoss { .. } => "total",
    };
    let mut t = Table::new(PREMIUM_COLUMNS);
    t.push(vec![
        name.into(),
        num(cover.kind.parameter()),
        num(cover.gamma),
        num(m.premium),
        num(m.x_star()),
        num(m.r()),
    ]);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Eval,
    Optimize,
    CompareCd,
    HjbCheck,
    Premium,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Optimize => "optimize",
            Command::CompareCd => "compare-cd",
            Command::HjbCheck => "hjb-check",
            Command::Premium => "premium",
        }
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        match self {
            Command::Eval => eval(cfg),
            Command::Optimize => optimize_cmd(cfg),
            Command::CompareCd => compare_cd(cfg),
            Command::HjbCheck => hjb_check(cfg),
            Command::Premium => premium(cfg),
        }
    }
}

/// One point of a sweep: the varied keys and their values.
pub type Combo = Vec<(String, String)>;

/// Cartesian product of `key=list` specs, last key varying fastest.
pub fn combos(vary: &[(String, Vec<String>)]) -> Vec<Combo> {
    let mut out: Vec<Combo> = vec![Vec::new()];
    for (key, values) in vary {
        out = out
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    out
}
