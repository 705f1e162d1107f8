//! European calls under a geometric Lévy model, priced with the kernel:
//! `C_0 = E[pi_T (S_T - K)^+]`.
//!
//! Monte Carlo works for every family. Brownian, Poisson and Gamma drivers
//! also have exact pricers, by Gaussian tails, a Poisson series and
//! quadrature against the gamma density respectively.

use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exponents::{Family, FamilyKind, LevyModel};
use crate::pricing::GlmSpec;
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::sampling::{mc_mean, mc_mean_parallel, IncrementSampler, McResult, SimRng};

/// A European call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptionSpec {
    pub strike: f64,
    pub expiry: f64,
}

impl OptionSpec {
    /// `K = 0` is accepted as the degenerate call worth `S_0`.
    pub fn new(strike: f64, expiry: f64) -> Result<Self> {
        if !(strike >= 0.0 && strike.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "K",
                value: strike,
                constraint: ">= 0",
            });
        }
        if !(expiry > 0.0 && expiry.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "T",
                value: expiry,
                constraint: "> 0",
            });
        }
        Ok(Self { strike, expiry })
    }
}

const MIN_PATHS: usize = 1000;

fn check_paths(n: usize) -> Result<()> {
    if n < MIN_PATHS {
        Err(Error::InvalidInput(format!(
            "option Monte Carlo needs n >= {MIN_PATHS}, got {n}"
        )))
    } else {
        Ok(())
    }
}

fn discounted_payoff(glm: &GlmSpec, opt: &OptionSpec, x: f64) -> Result<f64> {
    let t = opt.expiry;
    let s = glm.asset_value(x, t)?;
    if s <= opt.strike {
        return Ok(0.0);
    }
    Ok(glm.kernel_value(x, t)? * (s - opt.strike))
}

/// Monte Carlo price from exact draws of `X_T`; kernel and asset share each draw.
pub fn mc_call_price<R: Rng + ?Sized>(
    glm: &GlmSpec,
    opt: &OptionSpec,
    n: usize,
    rng: &mut R,
) -> Result<McResult> {
    check_paths(n)?;
    let sampler = IncrementSampler::new(glm.model(), opt.expiry)?;
    mc_mean(n, rng, |rng| discounted_payoff(glm, opt, sampler.sample(rng)))
}

/// `mc_call_price` spread over `workers` threads on streams `0..workers` of `seed`.
pub fn mc_call_price_parallel(
    glm: &GlmSpec,
    opt: &OptionSpec,
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<McResult> {
    check_paths(n)?;
    let sampler = IncrementSampler::new(glm.model(), opt.expiry)?;
    mc_mean_parallel(n, seed, workers, |rng: &mut SimRng| {
        discounted_payoff(glm, opt, sampler.sample(rng))
    })
}

/// Upper normal tail `P(Z > z)`.
fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Black–Scholes call price.
pub fn bs_call_price(s0: f64, r: f64, sigma: f64, strike: f64, expiry: f64) -> f64 {
    let discounted_strike = strike * (-r * expiry).exp();
    if strike == 0.0 {
        return s0;
    }
    let vol = sigma * expiry.sqrt();
    if vol == 0.0 {
        return (s0 - discounted_strike).max(0.0);
    }
    let d1 = ((s0 / strike).ln() + (r + 0.5 * sigma * sigma) * expiry) / vol;
    s0 * normal_tail(-d1) - discounted_strike * normal_tail(-(d1 - vol))
}

fn wrong_family(expected: &'static str, model: &LevyModel) -> Error {
    Error::WrongFamily {
        expected,
        found: model.to_string(),
    }
}

/// Exact price for a Brownian driver, integrating the kernel against the
/// normal law of `X_T`. Risk aversion enters the two tail terms explicitly.
pub fn brownian_exact_call(glm: &GlmSpec, opt: &OptionSpec) -> Result<f64> {
    if glm.model().kind() != FamilyKind::Brownian {
        return Err(wrong_family("Brownian", glm.model()));
    }
    let t = opt.expiry;
    if opt.strike == 0.0 {
        return Ok(glm.s0());
    }
    let (lambda, sigma, beta) = (glm.lambda(), glm.sigma(), glm.beta());
    // S_T > K  <=>  X_T > x_star
    let x_star = ((opt.strike / glm.s0()).ln() - (glm.r() + glm.premium()) * t
        + 0.5 * sigma * sigma * t)
        / sigma;
    let root_t = t.sqrt();
    // E[pi_T S_T; X_T > x*] and E[pi_T; X_T > x*] are normal tails under
    // the measures tilted by beta and -lambda.
    let asset_leg = glm.s0() * normal_tail((x_star - beta * t) / root_t);
    let strike_leg =
        opt.strike * (-glm.r() * t).exp() * normal_tail((x_star + lambda * t) / root_t);
    Ok(asset_leg - strike_leg)
}

fn ln_poisson_pmf(n: u64, mean: f64) -> f64 {
    if n == 0 {
        return -mean;
    }
    n as f64 * mean.ln() - mean - ln_gamma(n as f64 + 1.0)
}

/// Exact price for a Poisson driver by summing over the jump count.
///
/// `P(N_T = n) pi_T(n) S_T(n)` is `S_0` times a Poisson(`m T e^{sigma - lambda}`)
/// weight and `P(N_T = n) pi_T(n)` is `e^{-rT}` times a Poisson(`m T e^{-lambda}`)
/// weight. The sum starts at the first in-the-money count and stops once the
/// ratio-test bound on the remaining terms is below `1e-12` of the running sum.
pub fn poisson_exact_call(glm: &GlmSpec, opt: &OptionSpec) -> Result<f64> {
    let rate = match (glm.model().family(), glm.model().is_mirrored()) {
        (Family::Poisson { rate }, false) => *rate,
        _ => return Err(wrong_family("Poisson", glm.model())),
    };
    let t = opt.expiry;
    let asset_mean = rate * t * glm.beta().exp();
    let kernel_mean = rate * t * (-glm.lambda()).exp();
    let discounted_strike = opt.strike * (-glm.r() * t).exp();

    // first count with S_T(n) > K
    let mut n: u64 = if opt.strike == 0.0 {
        0
    } else {
        let s_zero = glm.asset_value(0.0, t)?;
        let threshold = (opt.strike / s_zero).ln() / glm.sigma();
        if threshold < 0.0 {
            0
        } else {
            threshold.floor() as u64
        }
    };
    while glm.asset_value(n as f64, t)? <= opt.strike {
        n += 1;
    }

    let mut sum = 0.0;
    loop {
        let a = glm.s0() * ln_poisson_pmf(n, asset_mean).exp();
        let k = discounted_strike * ln_poisson_pmf(n, kernel_mean).exp();
        sum += a - k;
        let next = n as f64 + 1.0;
        if next > asset_mean {
            // asset weights dominate and fall geometrically from here on
            let ratio = asset_mean / next;
            let tail = a * ratio / (1.0 - ratio);
            if tail <= 1e-12 * sum.abs() || (a == 0.0 && sum == 0.0) {
                return Ok(sum);
            }
        }
        n += 1;
    }
}

/// Exact price for a Gamma driver by adaptive quadrature against the density
/// `x^{a-1} e^{-x} / Gamma(a)`, `a = m T`.
///
/// Below `x = 1` the substitution `u = x^a` removes the endpoint singularity
/// of small shapes; the payoff kink at `S_T = K` is an endpoint of both pieces.
pub fn gamma_exact_call(glm: &GlmSpec, opt: &OptionSpec) -> Result<f64> {
    let rate = match (glm.model().family(), glm.model().is_mirrored()) {
        (Family::Gamma { rate }, false) => *rate,
        _ => return Err(wrong_family("Gamma", glm.model())),
    };
    let t = opt.expiry;
    let shape = rate * t;
    let ln_norm = ln_gamma(shape);
    let s0 = glm.s0();
    let (lambda, beta) = (glm.lambda(), glm.beta());
    let asset_drift = -t * glm.psi_beta();
    let kernel_drift = -glm.r() * t - t * glm.model().psi(-lambda)?;
    let strike = opt.strike;

    // pi_T (S_T - K)^+ e^{-x} / Gamma(a) times e^{ln_weight}
    let payoff = move |x: f64, ln_weight: f64| {
        let base = -x - ln_norm + ln_weight;
        let v = s0 * (beta * x + asset_drift + base).exp()
            - strike * (-lambda * x + kernel_drift + base).exp();
        v.max(0.0)
    };

    let x_star = if strike == 0.0 {
        0.0
    } else {
        let s_zero = glm.asset_value(0.0, t)?;
        ((strike / s_zero).ln() / glm.sigma()).max(0.0)
    };

    let tol = Tolerance {
        rel: 1e-11,
        abs: 0.0,
        ..Tolerance::default()
    };
    let mut total = 0.0;
    if x_star < 1.0 {
        let u_lo = x_star.powf(shape);
        let near = integrate(
            |u: f64| payoff(u.powf(1.0 / shape), -shape.ln()),
            u_lo,
            1.0,
            tol,
        )?;
        total += near.value;
    }
    let far = integrate_to_infinity(
        |x: f64| payoff(x, (shape - 1.0) * x.ln()),
        x_star.max(1.0),
        tol,
    )?;
    total += far.value;
    Ok(total.max(0.0))
}

/// Exact price where one is available.
pub fn exact_call_price(glm: &GlmSpec, opt: &OptionSpec) -> Result<f64> {
    match glm.model().kind() {
        FamilyKind::Brownian => brownian_exact_call(glm, opt),
        FamilyKind::Poisson => poisson_exact_call(glm, opt),
        FamilyKind::Gamma => gamma_exact_call(glm, opt),
        other => Err(Error::Unsupported(format!("no exact call price for {other}"))),
    }
}

/// One priced parameter set of a dependence experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricedPoint {
    pub model: String,
    pub lambda: f64,
    pub sigma: f64,
    pub price: f64,
}

/// Exact prices across parameter sets that should be indistinguishable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceReport {
    pub option: OptionSpec,
    pub points: Vec<PricedPoint>,
    /// `max |p_i - p_0| / max(1, |p_0|)`.
    pub max_spread: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Prices `specs` exactly and flags a spread above `tolerance`.
pub fn dependence_experiment(
    specs: &[GlmSpec],
    opt: &OptionSpec,
    tolerance: f64,
) -> Result<DependenceReport> {
    if specs.is_empty() {
        return Err(Error::InvalidInput("no parameter sets to compare".into()));
    }
    let points = specs
        .iter()
        .map(|g| {
            Ok(PricedPoint {
                model: g.model().to_string(),
                lambda: g.lambda(),
                sigma: g.sigma(),
                price: exact_call_price(g, opt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = points[0].price;
    let max_spread = points
        .iter()
        .map(|p| (p.price - reference).abs() / reference.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(DependenceReport {
        option: *opt,
        points,
        max_spread,
        tolerance,
        holds: max_spread <= tolerance,
    })
}

/// The three standard parameter families: Brownian with `lambda` in
/// `{0, 0.5, 1}`; Poisson with equal `m e^{-lambda}`; Gamma with equal
/// `sigma / (1 + lambda)`. Each entry carries its comparison tolerance.
pub fn standard_experiments(r: f64, s0: f64) -> Result<Vec<(FamilyKind, Vec<GlmSpec>, f64)>> {
    let spec = |model: LevyModel, lambda: f64, sigma: f64| {
        if lambda == 0.0 {
            GlmSpec::risk_neutral(model, r, sigma, s0)
        } else {
            GlmSpec::new(model, r, lambda, sigma, s0)
        }
    };
    let brownian = [0.0, 0.5, 1.0]
        .iter()
        .map(|&l| spec(LevyModel::brownian(), l, 0.3))
        .collect::<Result<Vec<_>>>()?;
    let poisson = [(1.0, 0.0), (2.0, 2f64.ln()), (4.0, 4f64.ln())]
        .iter()
        .map(|&(m, l)| spec(LevyModel::poisson(m)?, l, 0.2))
        .collect::<Result<Vec<_>>>()?;
    let gamma = [(0.4, 0.0), (0.5, 0.25), (0.6, 0.5)]
        .iter()
        .map(|&(s, l)| spec(LevyModel::gamma(1.0)?, l, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        (FamilyKind::Brownian, brownian, 1e-10),
        (FamilyKind::Poisson, poisson, 1e-10),
        (FamilyKind::Gamma, gamma, 1e-8),
    ])
}
