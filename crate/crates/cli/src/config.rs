//! Flat `key=value` run configuration with section prefixes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ct_core::ide::GridOptions;
use ct_core::insurance::{Cover, CoverKind};
use ct_core::optimizer::{Evaluator, OptimizeOptions};
use ct_core::{LossDistribution, LossLaw, McConfig, ModelParams};

/// Keys understood by the CLI, with defaults where one exists.
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("model.a", Some("0.1")),
    ("model.b", Some("3")),
    ("model.c", Some("0.4")),
    ("model.i_star", None),
    ("model.x_star", None),
    ("model.lambda", Some("1")),
    ("model.delta", Some("0.1")),
    ("dist.kind", Some("beta")),
    ("dist.alpha", None),
    ("dist.p", None),
    ("dist.q", None),
    ("cover.kind", Some("none")),
    ("cover.eta", None),
    ("cover.l", None),
    ("cover.L", None),
    ("cover.gamma", None),
    ("mc.n", Some("100000")),
    ("mc.seed", Some("42")),
    ("mc.horizon", None),
    ("mc.ci", Some("0.99")),
    ("fp.n", Some("400")),
    ("fp.tol", Some("1e-7")),
    ("fp.x_max_factor", None),
    ("eval.evaluator", Some("closed")),
    ("eval.y", None),
    ("eval.x", None),
    ("opt.y_max", None),
    ("opt.tol_y", Some("0.001")),
    ("opt.scan", Some("64")),
    ("opt.fine", Some("512")),
    ("opt.verify", Some("true")),
    ("compare.lambda", Some("0.1:10:100")),
    ("compare.b", None),
    ("compare.delta", None),
    ("compare.mu", None),
];

const DEFAULT_I_STAR: &str = "60";
const DEFAULT_ALPHA: &str = "1.25";

/// Invalid configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorKind {
    Closed,
    MonteCarlo,
    FixedPoint,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_pair(line).map_err(|e| ConfigError(format!("line {}: {}", n + 1, e.0)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return err(format!("unknown config key '{key}'"));
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = split_pair(pair)?;
        self.set(k, v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .or_else(|| KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d))
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        parse_f64(key, self.require(key)?)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ConfigError(format!("{key} = '{v}' is not a non-negative integer")))
    }

    fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.require(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => err(format!("{key} = '{v}' is not a boolean")),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        parse_list(key, self.require(key)?)
    }

    fn opt_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let (a, b, c) = (self.f64("model.a")?, self.f64("model.b")?, self.f64("model.c")?);
        let (lambda, delta) = (self.f64("model.lambda")?, self.f64("model.delta")?);
        let built = match (self.opt_f64("model.i_star")?, self.opt_f64("model.x_star")?) {
            (Some(_), Some(_)) => return err("give exactly one of model.i_star and model.x_star"),
            (None, Some(x_star)) => ModelParams::from_poverty_line(a, b, c, x_star, lambda, delta),
            (i_star, None) => ModelParams::new(a, b, c, i_star.unwrap_or(60.0), lambda, delta),
        };
        built.map_err(|e| ConfigError(e.to_string()))
    }

    pub fn dist(&self) -> Result<LossDistribution, ConfigError> {
        let built = match self.require("dist.kind")? {
            "beta" => LossDistribution::beta(parse_f64("dist.alpha", self.get("dist.alpha").unwrap_or(DEFAULT_ALPHA))?),
            "kumaraswamy" => LossDistribution::kumaraswamy(self.f64("dist.p")?, self.f64("dist.q")?),
            k => return err(format!("dist.kind '{k}' must be beta or kumaraswamy")),
        };
        built.map_err(|e| ConfigError(e.to_string()))
    }

    pub fn cover(&self) -> Result<Option<Cover>, ConfigError> {
        let kind = match self.require("cover.kind")? {
            "none" => return Ok(None),
            "proportional" => CoverKind::Proportional { eta: self.f64("cover.eta")? },
            "xl" => CoverKind::ExcessOfLoss { l: self.f64("cover.l")? },
            "total" => CoverKind::TotalLoss { limit: self.f64("cover.L")? },
            k => return err(format!("cover.kind '{k}' must be none, proportional, xl or total")),
        };
        Cover::new(kind, self.f64("cover.gamma")?)
            .map(Some)
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// Model and loss law after any cover has been priced in.
    pub fn model(&self) -> Result<(ModelParams, LossLaw), ConfigError> {
        let params = self.params()?;
        let dist = self.dist()?;
        match self.cover()? {
            None => Ok((params, LossLaw::Plain(dist))),
            Some(cover) => ct_core::build_insured_model(&params, &cover, &dist)
                .map(|m| (m.params, m.law))
                .map_err(|e| ConfigError(e.to_string())),
        }
    }

    pub fn mc(&self) -> Result<McConfig, ConfigError> {
        let mut cfg = McConfig::new(self.usize("mc.n")?, self.seed()?);
        cfg.horizon = self.opt_f64("mc.horizon")?;
        cfg.ci_level = self.f64("mc.ci")?;
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        let v = self.require("mc.seed")?;
        v.parse().map_err(|_| ConfigError(format!("mc.seed = '{v}' is not an unsigned integer")))
    }

    pub fn grid_options(&self) -> Result<GridOptions, ConfigError> {
        let n = self.usize("fp.n")?;
        if n < 8 {
            return err("fp.n must be at least 8");
        }
        Ok(GridOptions {
            n,
            x_max_factor: self.opt_f64("fp.x_max_factor")?,
        })
    }

    pub fn evaluator_kind(&self) -> Result<EvaluatorKind, ConfigError> {
        match self.require("eval.evaluator")? {
            "closed" => Ok(EvaluatorKind::Closed),
            "mc" => Ok(EvaluatorKind::MonteCarlo),
            "fixed-point" => Ok(EvaluatorKind::FixedPoint),
            k => err(format!("eval.evaluator '{k}' must be closed, mc or fixed-point")),
        }
    }

    pub fn evaluator(&self) -> Result<Evaluator, ConfigError> {
        Ok(match self.evaluator_kind()? {
            EvaluatorKind::Closed => Evaluator::ClosedForm,
            EvaluatorKind::MonteCarlo => Evaluator::MonteCarlo(self.mc()?),
            EvaluatorKind::FixedPoint => Evaluator::FixedPoint {
                grid: self.grid_options()?,
                tol: self.f64("fp.tol")?,
            },
        })
    }

    pub fn optimize_options(&self) -> Result<OptimizeOptions, ConfigError> {
        let opts = OptimizeOptions {
            y_max: self.opt_f64("opt.y_max")?,
            tol_y: self.f64("opt.tol_y")?,
            scan_points: self.usize("opt.scan")?,
            fine_points: self.usize("opt.fine")?,
            verify: self.bool("opt.verify")?,
        };
        if opts.scan_points < 3 || opts.fine_points < 3 || opts.tol_y.is_nan() || opts.tol_y <= 0.0 {
            return err("opt.scan and opt.fine need at least 3 points and opt.tol_y must be positive");
        }
        Ok(opts)
    }

    pub fn threshold(&self) -> Result<f64, ConfigError> {
        self.f64("eval.y")
    }

    /// Capital levels for `eval`, defaulting to the threshold itself.
    pub fn x_values(&self) -> Result<Vec<f64>, ConfigError> {
        match self.opt_list("eval.x")? {
            Some(xs) => Ok(xs),
            None => Ok(vec![self.threshold()?]),
        }
    }

    pub fn compare_lists(&self) -> Result<CompareLists, ConfigError> {
        let params = self.params()?;
        let mu = match self.opt_list("compare.mu")? {
            Some(v) => v,
            None => vec![self.dist()?.mean()],
        };
        Ok(CompareLists {
            lambda: self.list("compare.lambda")?,
            b: self.opt_list("compare.b")?.unwrap_or(vec![params.b]),
            delta: self.opt_list("compare.delta")?.unwrap_or(vec![params.delta]),
            mu,
        })
    }

    /// Every key with its effective value, as `key=value` pairs in key order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let mut out: BTreeMap<String, String> = KEYS
            .iter()
            .filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string())))
            .collect();
        out.extend(self.entries.clone());
        if !out.contains_key("model.x_star") {
            out.entry("model.i_star".into()).or_insert(DEFAULT_I_STAR.into());
        }
        if out.get("dist.kind").map(String::as_str) == Some("beta") {
            out.entry("dist.alpha".into()).or_insert(DEFAULT_ALPHA.into());
        }
        out.into_iter().collect()
    }

    /// Single-line rendering used in CSV comment lines.
    pub fn describe(&self) -> String {
        self.resolved()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareLists {
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub delta: Vec<f64>,
    pub mu: Vec<f64>,
}

pub fn split_pair(s: &str) -> Result<(&str, &str), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => err(format!("expected key=value, got '{s}'")),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key} = '{v}' is not a finite number")),
    }
}

/// `start:end:count` (inclusive) or a comma-separated list.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [start, end, count] => {
            let (a, b) = (parse_f64(key, start)?, parse_f64(key, end)?);
            let n: usize = count
                .parse()
                .map_err(|_| ConfigError(format!("{key}: grid count '{count}' is not an integer")))?;
            match n {
                0 => err(format!("{key}: grid count must be positive")),
                1 if a != b => err(format!("{key}: a one-point grid needs start = end")),
                1 => Ok(vec![a]),
                _ => Ok((0..n)
                    .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
                    .collect()),
            }
        }
        [_] => v.split(',').map(|s| parse_f64(key, s.trim())).collect(),
        _ => err(format!("{key} = '{v}' must be a number, a comma list or start:end:count")),
    }
}

/// `beta:1.25` or `kumaraswamy:3:4` as config pairs.
pub fn dist_pairs(spec: &str) -> Result<Vec<(&'static str, String)>, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["beta", alpha] => Ok(vec![("dist.kind", "beta".into()), ("dist.alpha", alpha.to_string())]),
        ["kumaraswamy", p, q] => Ok(vec![
            ("dist.kind", "kumaraswamy".into()),
            ("dist.p", p.to_string()),
            ("dist.q", q.to_string()),
        ]),
        _ => err(format!("--dist '{spec}' must be beta:ALPHA or kumaraswamy:P:Q")),
    }
}

/// `none`, `proportional:ETA`, `xl:L` or `total:L` as config pairs.
pub fn cover_pairs(spec: &str) -> Result<Vec<(&'static str, String)>, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let key = match parts.as_slice() {
        ["none"] => return Ok(vec![("cover.kind", "none".into())]),
        ["proportional", _] => "cover.eta",
        ["xl", _] => "cover.l",
        ["total", _] => "cover.L",
        _ => return err(format!("--cover '{spec}' must be none, proportional:ETA, xl:L or total:L")),
    };
    Ok(vec![("cover.kind", parts[0].to_string()), (key, parts[1].to_string())])
}
