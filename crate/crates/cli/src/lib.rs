//! Commands and report writers behind the `glm` binary.
//!
//! Each command returns its report plus a verdict; `main` only handles
//! arguments, files and exit codes.

use std::fmt::Write as _;
use std::path::Path as FsPath;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use glm_core::exponents::{LevyModel, ModelSpec};
use glm_core::options::{exact_call_price, mc_call_price, OptionSpec};
use glm_core::premium::premium_surface;
use glm_core::pricing::{GlmSpec, GlmSpecFile};
use glm_core::sampling::{mc_discounted_dividends, mc_mean, simulate_path, IncrementSampler, Path, SimRng};
use glm_core::verify::{verify_spec, VerifyOptions, VerifyReport};

pub use glm_core::verify::{DEFAULT_PATHS, DEFAULT_SEED};

/// Smallest and largest accepted Monte Carlo sizes.
pub const MIN_PATHS: usize = 1_000;
pub const MAX_PATHS: usize = 100_000_000;

/// Why a spec file could not be used.
#[derive(Debug)]
pub enum SpecError {
    /// Unreadable file or malformed JSON.
    Malformed(anyhow::Error),
    /// Well-formed JSON whose values fail validation.
    Invalid(glm_core::Error),
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::Malformed(e) => write!(f, "{e:#}"),
            SpecError::Invalid(e) => write!(f, "invalid spec: {e}"),
        }
    }
}

impl std::error::Error for SpecError {}

fn read_json<T: serde::de::DeserializeOwned>(path: &FsPath) -> std::result::Result<T, SpecError> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(SpecError::Malformed)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(SpecError::Malformed)
}

/// Loads a single-factor pricing spec.
pub fn load_spec(path: &FsPath) -> std::result::Result<GlmSpec, SpecError> {
    let file: GlmSpecFile = read_json(path)?;
    GlmSpec::try_from(file).map_err(SpecError::Invalid)
}

/// Loads just the driver model; pricing fields, if present, are ignored.
pub fn load_model(path: &FsPath) -> std::result::Result<LevyModel, SpecError> {
    let spec: ModelSpec = read_json(path)?;
    LevyModel::try_from(spec).map_err(SpecError::Invalid)
}

/// Parses `a:b:step` into `a, a + step, ..., <= b`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must look like a:b:step, got {text:?}");
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in grid")))
        .collect::<Result<Vec<_>>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        bail!("grid needs finite a <= b and step > 0, got {text:?}");
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        bail!("grid {text:?} has too many points");
    }
    Ok((0..=count).map(|i| a + i as f64 * step).collect())
}

pub fn check_paths(n: usize) -> Result<usize> {
    if !(MIN_PATHS..=MAX_PATHS).contains(&n) {
        bail!("--n must lie in [{MIN_PATHS}, {MAX_PATHS}], got {n}");
    }
    Ok(n)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// `lambda,sigma,R,R_tilde` rows, lambda-major. Undefined values are empty.
pub fn premium_csv(model: &LevyModel, lambdas: &[f64], sigmas: &[f64]) -> String {
    let mut out = String::from("lambda,sigma,R,R_tilde\n");
    for row in premium_surface(model, lambdas, sigmas) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(row.lambda),
            fmt_num(row.sigma),
            fmt_opt(row.premium),
            fmt_opt(row.inverse_premium)
        );
    }
    out
}

/// One parsed row of a premium CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumRow {
    pub lambda: f64,
    pub sigma: f64,
    pub premium: Option<f64>,
    pub inverse_premium: Option<f64>,
}

pub fn parse_premium_csv(text: &str) -> Result<Vec<PremiumRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("lambda,sigma,R,R_tilde") {
        bail!("unexpected premium CSV header");
    }
    let field = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse::<f64>().with_context(|| format!("bad value {s:?}"))?))
        }
    };
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 4 {
                bail!("expected 4 fields in {line:?}");
            }
            Ok(PremiumRow {
                lambda: cells[0].parse()?,
                sigma: cells[1].parse()?,
                premium: field(cells[2])?,
                inverse_premium: field(cells[3])?,
            })
        })
        .collect()
}

/// `t,x` rows.
pub fn path_csv(path: &Path) -> String {
    let mut out = String::from("t,x\n");
    for (t, x) in path.times.iter().zip(&path.values) {
        let _ = writeln!(out, "{},{}", fmt_num(*t), fmt_num(*x));
    }
    out
}

pub fn parse_path_csv(text: &str) -> Result<Path> {
    let mut lines = text.lines();
    if lines.next() != Some("t,x") {
        bail!("unexpected path CSV header");
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let (t, x) = line.split_once(',').with_context(|| format!("bad row {line:?}"))?;
        times.push(t.parse()?);
        values.push(x.parse()?);
    }
    Ok(Path { times, values })
}

/// Monte Carlo summary as written to JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct McReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

/// Output of `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub paths: Vec<Path>,
    /// Monte Carlo mean of the deflated price `pi_T S_T`.
    pub summary: McReport,
    pub target: f64,
    pub passed: bool,
}

/// Samples `keep` paths to write out, then estimates `E[pi_T S_T]` from `n`
/// fresh paths; the estimate should match `S_0`.
pub fn cmd_simulate(
    spec: &GlmSpec,
    horizon: f64,
    steps: usize,
    n: usize,
    keep: usize,
    seed: u64,
) -> Result<SimulateOutput> {
    check_paths(n)?;
    let mut rng = SimRng::new(seed, 0);
    let paths = (0..keep)
        .map(|_| simulate_path(spec.model(), horizon, steps, &mut rng))
        .collect::<glm_core::Result<Vec<_>>>()?;
    let mut rng = SimRng::new(seed, 1);
    let mc = mc_mean(n, &mut rng, |rng| {
        let p = simulate_path(spec.model(), horizon, steps, rng)?;
        let x = p.terminal();
        Ok(spec.kernel_value(x, horizon)? * spec.asset_value(x, horizon)?)
    })?;
    Ok(SimulateOutput {
        paths,
        summary: McReport {
            estimate: mc.estimate,
            stderr: mc.stderr,
            n: mc.n,
            seed,
        },
        target: spec.s0(),
        passed: mc.within(spec.s0(), 4.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceMethod {
    Mc,
    Exact,
}

impl PriceMethod {
    pub fn name(self) -> &'static str {
        match self {
            PriceMethod::Mc => "mc",
            PriceMethod::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionRow {
    pub family: String,
    pub params: String,
    pub strike: f64,
    pub expiry: f64,
    pub price: f64,
    pub stderr: Option<f64>,
    pub method: PriceMethod,
}

fn params_field(model: &LevyModel) -> String {
    let mut parts: Vec<String> = model
        .to_spec()
        .params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if model.is_mirrored() {
        parts.push("mirrored".into());
    }
    parts.join(";")
}

/// Prices calls on every `(K, T)` pair. Monte Carlo rows use stream `i` of
/// `seed` for the `i`-th pair.
pub fn cmd_price_option(
    spec: &GlmSpec,
    strikes: &[f64],
    expiries: &[f64],
    method: PriceMethod,
    n: usize,
    seed: u64,
) -> Result<Vec<OptionRow>> {
    if method == PriceMethod::Mc {
        check_paths(n)?;
    }
    let mut rows = Vec::new();
    let mut stream = 0;
    for &t in expiries {
        for &k in strikes {
            let opt = OptionSpec::new(k, t)?;
            let (price, stderr) = match method {
                PriceMethod::Exact => (exact_call_price(spec, &opt)?, None),
                PriceMethod::Mc => {
                    let mut rng = SimRng::new(seed, stream);
                    stream += 1;
                    let mc = mc_call_price(spec, &opt, n, &mut rng)?;
                    (mc.estimate, Some(mc.stderr))
                }
            };
            rows.push(OptionRow {
                family: spec.model().kind().name().to_string(),
                params: params_field(spec.model()),
                strike: k,
                expiry: t,
                price,
                stderr,
                method,
            });
        }
    }
    Ok(rows)
}

/// `family,params,K,T,price,stderr,method` rows.
pub fn option_csv(rows: &[OptionRow]) -> String {
    let mut out = String::from("family,params,K,T,price,stderr,method\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.family,
            r.params,
            fmt_num(r.strike),
            fmt_num(r.expiry),
            fmt_num(r.price),
            fmt_opt(r.stderr),
            r.method.name()
        );
    }
    out
}

/// Domestic and inverse FX premiums plus Monte Carlo means of both rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FxReport {
    pub lambda: f64,
    pub sigma: f64,
    pub premium: f64,
    pub inverse_premium: f64,
    /// Both the rate and its inverse earn a positive excess return.
    pub both_positive: bool,
    /// `sign(R~) = sign(sigma - lambda)`.
    pub sign_rule_holds: bool,
    pub rate_mean: McReport,
    pub rate_expected: f64,
    pub inverse_mean: McReport,
    pub inverse_expected: f64,
    pub passed: bool,
}

pub fn cmd_fx_check(spec: &GlmSpec, horizon: f64, n: usize, seed: u64) -> Result<FxReport> {
    check_paths(n)?;
    let f = spec
        .foreign_rate()
        .context("fx-check needs a foreign rate field \"f\"")?;
    let (lambda, sigma) = (spec.lambda(), spec.sigma());
    let premium = spec.premium();
    let inverse_premium = glm_core::premium::inverse_fx_premium(spec.model(), lambda, sigma)?;
    let sign = |v: f64| if v > 1e-12 { 1 } else if v < -1e-12 { -1 } else { 0 };
    let beta = sigma - lambda;
    let sign_rule_holds = sign(inverse_premium) == if beta > 0.0 { 1 } else if beta < 0.0 { -1 } else { 0 };

    let sampler = IncrementSampler::new(spec.model(), horizon)?;
    let report = |mc: glm_core::sampling::McResult| McReport {
        estimate: mc.estimate,
        stderr: mc.stderr,
        n: mc.n,
        seed,
    };
    let rate = mc_mean(n, &mut SimRng::new(seed, 0), |rng| spec.fx_value(sampler.sample(rng), horizon))?;
    let inverse = mc_mean(n, &mut SimRng::new(seed, 1), |rng| {
        spec.inverse_fx_value(sampler.sample(rng), horizon)
    })?;
    let r = spec.r();
    let rate_expected = spec.s0() * ((r - f + premium) * horizon).exp();
    let inverse_expected = ((f - r + inverse_premium) * horizon).exp() / spec.s0();
    let passed = sign_rule_holds && rate.within(rate_expected, 4.0) && inverse.within(inverse_expected, 4.0);
    Ok(FxReport {
        lambda,
        sigma,
        premium,
        inverse_premium,
        both_positive: premium > 0.0 && inverse_premium > 0.0,
        sign_rule_holds,
        rate_mean: report(rate),
        rate_expected,
        inverse_mean: report(inverse),
        inverse_expected,
        passed,
    })
}

/// Gordon valuation with a Monte Carlo check of the discounted dividend stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DividendReport {
    pub d0: f64,
    pub gamma: f64,
    pub delta: f64,
    pub s0_implied: f64,
    pub horizon: f64,
    pub discounted_dividends: McReport,
    /// `D_0 (1 - e^{-delta T}) / delta` over the truncated horizon.
    pub expected: f64,
    pub passed: bool,
}

pub fn cmd_dividend(spec: &GlmSpec, cells: usize, n: usize, seed: u64) -> Result<DividendReport> {
    check_paths(n)?;
    let g = spec.gordon_valuation()?;
    let d0 = spec.d0().expect("gordon_valuation succeeded");
    let gamma = spec.gamma_growth().expect("gordon_valuation succeeded");
    let (mc, horizon) = mc_discounted_dividends(spec, cells, n, &mut SimRng::new(seed, 0))?;
    let expected = d0 * (-(-g.delta * horizon).exp_m1()) / g.delta;
    Ok(DividendReport {
        d0,
        gamma,
        delta: g.delta,
        s0_implied: g.s0_implied,
        horizon,
        discounted_dividends: McReport {
            estimate: mc.estimate,
            stderr: mc.stderr,
            n: mc.n,
            seed,
        },
        expected,
        passed: mc.within(expected, 4.0),
    })
}

pub fn cmd_verify(spec: &GlmSpec, n: usize, seed: u64) -> Result<VerifyReport> {
    check_paths(n)?;
    Ok(verify_spec(
        spec,
        &VerifyOptions {
            n,
            seed,
            ..VerifyOptions::default()
        },
    ))
}
