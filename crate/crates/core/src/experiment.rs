//! Experiment configuration, dispatch and JSON-lines result records.
//!
//! Each subcommand turns an [`ExperimentConfig`] into [`ResultRecord`]s, one
//! per (quantity, n, p). A record echoes the full config and carries a
//! SHA-256 of its own serialization with the timestamp left out, so a rerun
//! with the same seed and config reproduces every hash.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{theorem2_bound, BoundForm, BoundInputs};
use crate::coupling::{assemble_bound, default_t_grid, estimate_r, RTerm, TildePolicy};
use crate::error::{Error, Result};
use crate::graph::{edge_total, triangle_count};
use crate::moments::{exact_moments, proxy_exact, regime_rates, Regime};
use crate::oracle::{exact_chf_ode, exact_dk, oracle_moments, verify_couplings, TestFn};
use crate::patterns::{classes_csv, enumerate_classes, Anchor};
use crate::sampler::{gnp_unchecked, sample_proxy, ProxyVariant, SamplerConfig, MAX_INDEX};
use crate::special::normal_cdf;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TRISTEIN_OUT_DIR";

/// Default DKW confidence parameter.
pub const DKW_DELTA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DkEstimate {
    pub dk: f64,
    /// `√(ln(2/δ)/(2m))`
    pub dkw_band: f64,
    pub samples: usize,
}

/// Kolmogorov distance between the empirical law of `w` and `Φ`.
pub fn empirical_dk(w: &[f64]) -> Result<DkEstimate> {
    empirical_dk_with(w, DKW_DELTA)
}

pub fn empirical_dk_with(w: &[f64], delta: f64) -> Result<DkEstimate> {
    if w.len() < 2 {
        return Err(Error::InvalidInput(format!("empirical_dk needs at least 2 samples, got {}", w.len())));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta = {delta} must lie in (0, 1)")));
    }
    if w.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("samples contain NaN".into()));
    }
    let mut sorted = w.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = sorted.len() as f64;
    // |k/m - Φ(x)| is convex in k, so tied points only need their two ends,
    // and both ends are visited by the running index
    let dk = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal_cdf(x);
            ((i + 1) as f64 / m - phi).abs().max((i as f64 / m - phi).abs())
        })
        .fold(0.0, f64::max);
    Ok(DkEstimate { dk, dkw_band: ((2.0 / delta).ln() / (2.0 * m)).sqrt(), samples: sorted.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares line through `(ln n, ln dk)`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!("rate_fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(n, d)| !(n > 0.0 && d > 0.0 && n.is_finite() && d.is_finite())) {
        return Err(Error::InvalidInput("rate_fit needs positive finite n and dk".into()));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, d)| (n.ln(), d.ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate_fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Moments,
    Bound,
    SampleDk,
    Oracle,
    Coupling,
    Patterns,
    RateFit,
    Proxy,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Moments => "moments",
            Subcommand::Bound => "bound",
            Subcommand::SampleDk => "sample-dk",
            Subcommand::Oracle => "oracle",
            Subcommand::Coupling => "coupling",
            Subcommand::Patterns => "patterns",
            Subcommand::RateFit => "rate-fit",
            Subcommand::Proxy => "proxy",
        }
    }

    fn default_samples(self) -> u64 {
        match self {
            Subcommand::Coupling => 1_000,
            _ => 10_000,
        }
    }
}

/// How `p` depends on `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum PRule {
    Fixed {
        value: f64,
    },
    /// `p = c·n^{-alpha}`
    Power {
        c: f64,
        alpha: f64,
    },
}

impl PRule {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            PRule::Fixed { value } => value,
            PRule::Power { c, alpha } => (c * (n as f64).powf(-alpha)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON),
        }
    }
}

impl FromStr for PRule {
    type Err = Error;

    /// `0.5`, `fixed:0.5`, `power:0.6` (`c = 1`) or `power:2:0.6`.
    fn from_str(s: &str) -> Result<Self> {
        let num =
            |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {x:?} in p rule {s:?}")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(PRule::Fixed { value: num(v)? }),
            ["fixed", v] => Ok(PRule::Fixed { value: num(v)? }),
            ["power", a] => Ok(PRule::Power { c: 1.0, alpha: num(a)? }),
            ["power", c, a] => Ok(PRule::Power { c: num(c)?, alpha: num(a)? }),
            _ => Err(Error::Config(format!("unrecognised p rule {s:?}"))),
        }
    }
}

/// Every field optional; used for both the config file and the flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub n: Option<Vec<usize>>,
    pub p: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub streams: Option<usize>,
    pub t_grid: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub anchor: Option<String>,
    pub variant: Option<ProxyVariant>,
    pub input: Option<PathBuf>,
    pub quantity: Option<String>,
    pub policy: Option<String>,
    pub delta: Option<f64>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            n: top.n.or(self.n),
            p: top.p.or(self.p),
            samples: top.samples.or(self.samples),
            seed: top.seed.or(self.seed),
            streams: top.streams.or(self.streams),
            t_grid: top.t_grid.or(self.t_grid),
            output: top.output.or(self.output),
            anchor: top.anchor.or(self.anchor),
            variant: top.variant.or(self.variant),
            input: top.input.or(self.input),
            quantity: top.quantity.or(self.quantity),
            policy: top.policy.or(self.policy),
            delta: top.delta.or(self.delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub n: Vec<usize>,
    pub p: PRule,
    pub samples: u64,
    pub seed: u64,
    /// Contiguous index blocks processed in parallel; results never depend on it.
    pub streams: usize,
    pub t_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub anchor: Option<Anchor>,
    pub variant: ProxyVariant,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<PathBuf>,
    pub quantity: String,
    pub policy: TildePolicy,
    pub delta: f64,
}

impl ExperimentConfig {
    /// Resolves defaults, the output-directory variable and validation.
    pub fn resolve(subcommand: Subcommand, layer: ConfigLayer, out_dir: Option<PathBuf>) -> Result<Self> {
        let p = match &layer.p {
            Some(s) => s.parse()?,
            None => PRule::Fixed { value: 0.5 },
        };
        let t_grid = layer.t_grid.unwrap_or_else(|| match subcommand {
            Subcommand::Oracle => vec![0.5, 1.0, 2.0, 4.0],
            _ => default_t_grid(),
        });
        let anchor =
            layer.anchor.as_deref().map(str::parse).transpose().map_err(|e: Error| Error::Config(e.to_string()))?;
        let policy = match layer.policy.as_deref() {
            None | Some("theoretical") => TildePolicy::Theoretical,
            Some("estimate") => TildePolicy::Estimate,
            Some(other) => TildePolicy::Fixed(
                other
                    .parse()
                    .map_err(|_| Error::Config(format!("policy {other:?}: theoretical, estimate or a number")))?,
            ),
        };
        let output = layer.output.or_else(|| out_dir.map(|d| d.join(format!("{}.jsonl", subcommand.name()))));
        let cfg = ExperimentConfig {
            subcommand,
            n: layer.n.unwrap_or_else(|| vec![16]),
            p,
            samples: layer.samples.unwrap_or(subcommand.default_samples()),
            seed: layer.seed.unwrap_or(0),
            streams: layer.streams.unwrap_or(16),
            t_grid,
            output,
            anchor,
            variant: layer.variant.unwrap_or(ProxyVariant::Iid),
            input: layer.input,
            quantity: layer.quantity.unwrap_or_else(|| "dk".into()),
            policy,
            delta: layer.delta.unwrap_or(DKW_DELTA),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.subcommand != Subcommand::RateFit && self.subcommand != Subcommand::Patterns && self.n.is_empty() {
            return bad("at least one n is required".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 3) {
            return bad(format!("n = {n}: at least three vertices are required"));
        }
        for &n in &self.n {
            let p = self.p.at(n);
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("p rule gives p = {p} at n = {n}"));
            }
            // sparse sanity guard; np = 4 exactly is admitted up to rounding
            if matches!(self.p, PRule::Power { .. }) && n as f64 * p < 4.0 - 1e-9 {
                return bad(format!("p rule gives np = {:.4} < 4 at n = {n}", n as f64 * p));
            }
            if edge_total(n) >= 1 << 31 {
                return bad(format!("n = {n} is too large"));
            }
        }
        if self.samples == 0 || self.samples > MAX_INDEX {
            return bad(format!("samples = {} out of range", self.samples));
        }
        if self.streams == 0 {
            return bad("streams must be positive".into());
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) {
            return bad("t grid values must be finite".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        match self.subcommand {
            Subcommand::Coupling if self.samples < 1_000 => bad("coupling needs at least 1000 samples".into()),
            Subcommand::Coupling if self.t_grid.contains(&0.0) || self.t_grid.is_empty() => {
                bad("coupling needs a nonempty t grid without zero".into())
            }
            Subcommand::RateFit if self.input.is_none() => bad("rate-fit needs an input records file".into()),
            _ => Ok(()),
        }
    }
}

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub regime: Option<Regime>,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub detail: Value,
    pub tool_version: String,
    /// Seconds since the Unix epoch; not part of the hash.
    pub timestamp: u64,
    pub content_hash: String,
}

impl ResultRecord {
    fn new(cfg: &ExperimentConfig, quantity: &str, n: Option<usize>, p: Option<f64>, value: f64) -> Self {
        ResultRecord {
            config: cfg.clone(),
            quantity: quantity.into(),
            n,
            p,
            value,
            std_error: None,
            regime: n.zip(p).map(|(n, p)| Regime::classify(n, p)),
            detail: Value::Null,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            content_hash: String::new(),
        }
    }

    fn se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    fn detail(mut self, d: Value) -> Self {
        self.detail = d;
        self
    }

    /// SHA-256 of the record serialized without `timestamp` and `content_hash`.
    pub fn compute_hash(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut v {
            map.remove("timestamp");
            map.remove("content_hash");
        }
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&v)?)))
    }

    fn seal(mut self) -> Result<Self> {
        self.content_hash = self.compute_hash()?;
        Ok(self)
    }
}

/// Appends records as JSON lines.
pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let f = std::fs::File::open(path)?;
    BufReader::new(f)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// `W` for samples `0..count` of `cfg`, split into `streams` blocks.
pub fn sample_w(cfg: &SamplerConfig, count: u64, streams: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_count(count)?;
    let m = exact_moments(cfg.n, cfg.p)?;
    parallel_blocks(count, streams, |i| Ok((triangle_count(&gnp_unchecked(cfg, i)) as f64 - m.mean_t) / m.sigma))
}

fn check_count(count: u64) -> Result<()> {
    if count == 0 || count > MAX_INDEX {
        return Err(Error::InvalidInput(format!("sample count {count} out of range")));
    }
    Ok(())
}

// sample i always lands at position i, whatever the block split
fn parallel_blocks<F: Fn(u64) -> Result<f64> + Sync>(count: u64, streams: usize, f: F) -> Result<Vec<f64>> {
    let blocks = (streams.max(1) as u64).min(count).max(1);
    let size = count / blocks;
    let parts: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let hi = if b + 1 == blocks { count } else { (b + 1) * size };
            (b * size..hi).map(&f).collect()
        })
        .collect();
    Ok(parts.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Standardized proxy draws, centred and scaled by the exact moments of the variant.
pub fn sample_proxy_w(cfg: &SamplerConfig, count: u64, streams: usize, variant: ProxyVariant) -> Result<Vec<f64>> {
    let r = proxy_exact(cfg.n, cfg.p)?;
    let (n, p) = (cfg.n as f64, cfg.p);
    let (mean, var) = match variant {
        ProxyVariant::Literal => (r.mean_y, r.var_y),
        ProxyVariant::Iid => (n * (n - 1.0) / 2.0 * (n - 2.0) * p.powi(3), r.var_y_iid),
    };
    let sd = var.sqrt();
    check_count(count)?;
    parallel_blocks(count, streams, |i| sample_proxy(cfg, i, variant).map(|y| (y as f64 - mean) / sd))
}

/// Runs one experiment; records are also appended to `config.output` when set.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let records = match cfg.subcommand {
        Subcommand::Moments => run_moments(cfg)?,
        Subcommand::Bound => run_bound(cfg)?,
        Subcommand::SampleDk => run_sample_dk(cfg)?,
        Subcommand::Oracle => run_oracle(cfg)?,
        Subcommand::Coupling => run_coupling(cfg)?,
        Subcommand::Patterns => run_patterns(cfg)?,
        Subcommand::RateFit => run_rate_fit(cfg)?,
        Subcommand::Proxy => run_proxy(cfg)?,
    };
    let records = records.into_iter().map(ResultRecord::seal).collect::<Result<Vec<_>>>()?;
    if let Some(path) = &cfg.output {
        write_records(path, &records)?;
        if cfg.subcommand == Subcommand::Patterns {
            std::fs::write(path.with_extension("csv"), patterns_csv(cfg))?;
        }
    }
    Ok(records)
}

fn run_moments(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        let m = exact_moments(n, p)?;
        out.push(ResultRecord::new(cfg, "var_t", Some(n), Some(p), m.var_t).detail(serde_json::to_value(m)?));
        let r = regime_rates(n, p)?;
        out.push(ResultRecord::new(cfg, "thm1_rate", Some(n), Some(p), r.thm1_rate).detail(serde_json::to_value(r)?));
    }
    Ok(out)
}

fn run_bound(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        let r = regime_rates(n, p)?;
        let inputs = BoundInputs { r3: r.r3_rate, r3_tilde: r.r3_rate, r4: r.r4_rate, ..BoundInputs::default() };
        let b = theorem2_bound(&inputs, BoundForm::Extended)?;
        out.push(ResultRecord::new(cfg, "thm1_rate", Some(n), Some(p), r.thm1_rate).detail(serde_json::to_value(r)?));
        out.push(
            ResultRecord::new(cfg, "extended_bound_at_rates", Some(n), Some(p), b)
                .detail(serde_json::to_value(inputs)?),
        );
    }
    Ok(out)
}

fn dk_records(cfg: &ExperimentConfig, points: Vec<(usize, f64, DkEstimate)>) -> Result<Vec<ResultRecord>> {
    let mut out: Vec<ResultRecord> = points
        .iter()
        .map(|&(n, p, d)| {
            ResultRecord::new(cfg, "dk", Some(n), Some(p), d.dk)
                .detail(json!({ "dkw_band": d.dkw_band, "samples": d.samples }))
        })
        .collect();
    if points.len() >= 3 {
        let fit = rate_fit(&points.iter().map(|&(n, _, d)| (n as f64, d.dk)).collect::<Vec<_>>())?;
        out.push(ResultRecord::new(cfg, "rate_fit_slope", None, None, fit.slope).detail(serde_json::to_value(fit)?));
    }
    Ok(out)
}

fn run_sample_dk(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut points = Vec::new();
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        let s = SamplerConfig::new(n, p, cfg.seed, 0)?;
        let w = sample_w(&s, cfg.samples, cfg.streams)?;
        points.push((n, p, empirical_dk_with(&w, cfg.delta)?));
    }
    dk_records(cfg, points)
}

fn run_proxy(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    let mut points = Vec::new();
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        let r = proxy_exact(n, p)?;
        out.push(
            ResultRecord::new(cfg, "proxy_be_bound", Some(n), Some(p), r.be_bound).detail(serde_json::to_value(r)?),
        );
        let s = SamplerConfig::new(n, p, cfg.seed, 0)?;
        let w = sample_proxy_w(&s, cfg.samples, cfg.streams, cfg.variant)?;
        points.push((n, p, empirical_dk_with(&w, cfg.delta)?));
    }
    out.extend(dk_records(cfg, points)?);
    Ok(out)
}

fn run_oracle(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        out.push(ResultRecord::new(cfg, "exact_dk", Some(n), Some(p), exact_dk(n, p)?));
        let (mean, var) = oracle_moments(n, p)?;
        out.push(ResultRecord::new(cfg, "oracle_var_t", Some(n), Some(p), var).detail(json!({ "mean_t": mean })));
        let checks = cfg.t_grid.iter().map(|&t| exact_chf_ode(n, p, t)).collect::<Result<Vec<_>>>()?;
        let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        out.push(
            ResultRecord::new(cfg, "ode_max_residual", Some(n), Some(p), worst).detail(serde_json::to_value(checks)?),
        );
        if n <= 6 {
            let fam = [TestFn::One, TestFn::Identity, TestFn::Square, TestFn::Sin, TestFn::Exp(0.7)];
            let r = verify_couplings(n, p, &fam)?;
            out.push(
                ResultRecord::new(cfg, "coupling_max_residual", Some(n), Some(p), r.max_residual())
                    .detail(serde_json::to_value(r)?),
            );
        }
    }
    Ok(out)
}

fn run_coupling(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    let terms = [RTerm::R1, RTerm::R2, RTerm::R3, RTerm::R4];
    for &n in &cfg.n {
        let p = cfg.p.at(n);
        let est = estimate_r(n, p, cfg.samples, &cfg.t_grid, &terms, cfg.seed)?;
        for e in est.terms.iter().filter(|e| e.t.is_none()) {
            out.push(ResultRecord::new(cfg, &e.name, Some(n), Some(p), e.value).se(e.std_error));
        }
        let b = assemble_bound(&est, cfg.policy)?;
        let mut detail = serde_json::to_value(&b)?;
        if let Value::Object(map) = &mut detail {
            map.remove("estimates");
        }
        if let Some(x) = b.extended {
            out.push(ResultRecord::new(cfg, "extended_bound", Some(n), Some(p), x).detail(detail.clone()));
        }
        if let Some(x) = b.simple {
            out.push(ResultRecord::new(cfg, "simple_bound", Some(n), Some(p), x).detail(detail));
        }
    }
    Ok(out)
}

fn anchors(cfg: &ExperimentConfig) -> Vec<Anchor> {
    cfg.anchor.map_or_else(|| Anchor::ALL.to_vec(), |a| vec![a])
}

fn run_patterns(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for a in anchors(cfg) {
        for (i, c) in enumerate_classes(a).into_iter().enumerate() {
            out.push(
                ResultRecord::new(cfg, "small_p_exponent", None, None, c.small_p_exponent() as f64)
                    .detail(json!({ "anchor": a, "class_id": i, "class": c, "bound_family": c.bound_family() })),
            );
        }
    }
    Ok(out)
}

/// The pattern tables of `cfg` as CSV, one block per anchor.
pub fn patterns_csv(cfg: &ExperimentConfig) -> String {
    anchors(cfg)
        .into_iter()
        .map(|a| {
            let classes = enumerate_classes(a);
            classes_csv(&classes, None)
                .lines()
                .enumerate()
                .map(|(i, l)| if i == 0 { format!("anchor,{l}\n") } else { format!("{a},{l}\n") })
                .collect::<String>()
        })
        .enumerate()
        .map(|(i, block)| if i == 0 { block } else { block.lines().skip(1).map(|l| format!("{l}\n")).collect() })
        .collect()
}

fn run_rate_fit(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let path = cfg.input.as_ref().ok_or_else(|| Error::Config("rate-fit needs an input file".into()))?;
    let prior = read_records(path)?;
    let points: Vec<(f64, f64)> =
        prior.iter().filter(|r| r.quantity == cfg.quantity).filter_map(|r| r.n.map(|n| (n as f64, r.value))).collect();
    let fit = rate_fit(&points)?;
    Ok(vec![ResultRecord::new(cfg, "rate_fit_slope", None, None, fit.slope)
        .detail(json!({ "fit": fit, "points": points, "source": path }))])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dk_examples() {
        assert_eq!(empirical_dk(&[0.0; 10]).unwrap().dk, 0.5);
        assert!(empirical_dk(&[1.0]).is_err());
        let d = empirical_dk(&[-1.0, 1.0]).unwrap().dk;
        assert!((d - (normal_cdf(1.0) - 0.5)).abs() < 1e-15);
        assert!(empirical_dk(&[]).is_err());
        let band = empirical_dk(&[0.0; 100]).unwrap().dkw_band;
        assert!((band - (200f64.ln() / 200.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dk_on_own_quantiles() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let z = Normal::standard();
        let m = 1_000_000;
        let w: Vec<f64> = (1..=m).map(|i| z.inverse_cdf((i as f64 - 0.5) / m as f64)).collect();
        assert!(empirical_dk(&w).unwrap().dk <= 1e-6);
    }

    #[test]
    fn fits() {
        let f = rate_fit(&[(16.0, 5.0 / 16.0), (32.0, 5.0 / 32.0), (64.0, 5.0 / 64.0)]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let f = rate_fit(&[(10.0, 10f64.powf(-0.6)), (20.0, 20f64.powf(-0.6)), (40.0, 40f64.powf(-0.6))]).unwrap();
        assert!((f.slope + 0.6).abs() < 1e-12);
        assert!(rate_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(rate_fit(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn p_rules() {
        assert_eq!("0.3".parse::<PRule>().unwrap(), PRule::Fixed { value: 0.3 });
        assert_eq!("fixed:0.5".parse::<PRule>().unwrap(), PRule::Fixed { value: 0.5 });
        assert_eq!("power:0.6".parse::<PRule>().unwrap(), PRule::Power { c: 1.0, alpha: 0.6 });
        assert_eq!("power:2:0.5".parse::<PRule>().unwrap().at(16), 0.5);
        assert!(matches!("banana".parse::<PRule>(), Err(Error::Config(_))));
    }

    #[test]
    fn config_layers_and_guards() {
        let file = ConfigLayer::from_toml("n = [5, 6]\nseed = 3\np = \"0.2\"\n").unwrap();
        let flags = ConfigLayer { seed: Some(9), ..ConfigLayer::default() };
        let cfg = ExperimentConfig::resolve(Subcommand::Moments, file.overlay(flags), None).unwrap();
        assert_eq!((cfg.n.clone(), cfg.seed, cfg.p), (vec![5, 6], 9, PRule::Fixed { value: 0.2 }));
        assert!(ConfigLayer::from_toml("bogus = 1").is_err());
        let sparse = ConfigLayer { n: Some(vec![32, 64]), p: Some("power:0.6".into()), ..ConfigLayer::default() };
        assert!(ExperimentConfig::resolve(Subcommand::SampleDk, sparse, None).is_ok());
        let too_sparse = ConfigLayer { n: Some(vec![16]), p: Some("power:0.6".into()), ..ConfigLayer::default() };
        assert!(matches!(ExperimentConfig::resolve(Subcommand::SampleDk, too_sparse, None), Err(Error::Config(_))));
        let dir = PathBuf::from("/tmp/out");
        let cfg = ExperimentConfig::resolve(Subcommand::Proxy, ConfigLayer::default(), Some(dir)).unwrap();
        assert_eq!(cfg.output.unwrap(), PathBuf::from("/tmp/out/proxy.jsonl"));
    }

    #[test]
    fn moments_record_and_hash() {
        let layer = ConfigLayer { n: Some(vec![4]), p: Some("0.5".into()), ..ConfigLayer::default() };
        let cfg = ExperimentConfig::resolve(Subcommand::Moments, layer, None).unwrap();
        let a = run(&cfg).unwrap();
        assert_eq!(a[0].value, 0.625);
        let mut b = run(&cfg).unwrap();
        b[0].timestamp += 1000;
        assert_eq!(a[0].content_hash, b[0].compute_hash().unwrap());
        let text = serde_json::to_string(&a[0]).unwrap();
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a[0]);
    }
}
