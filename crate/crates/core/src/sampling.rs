//! Seedable simulation of Lévy increments and paths, and Monte Carlo means.
//!
//! Every family is sampled from its exact law over a step `dt`, so paths on a
//! grid carry no discretisation bias at the grid points.

use std::sync::OnceLock;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{Family, LevyModel};
use crate::pricing::GlmSpec;

/// A reproducible random stream identified by `(seed, stream)`.
///
/// ChaCha keeps independent 2^64-block streams per key, so distinct stream
/// ids under one seed never overlap.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh generator on another stream of the same seed.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform on `(0, 1]`, safe to take logs of.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Draws from `Gamma(shape, 1)`.
///
/// For `shape >= 1` this is Marsaglia and Tsang's rejection method: with
/// `d = shape - 1/3` and `c = 1/sqrt(9 d)`, draw `z ~ N(0, 1)`, set
/// `v = (1 + c z)^3` and accept `d v` when `v > 0` and
/// `ln u < z^2/2 + d - d v + d ln v` (a cheap squeeze `u < 1 - 0.0331 z^4`
/// is tried first). Acceptance is above 95% for every shape.
///
/// For `shape < 1` the shape is boosted: if `G ~ Gamma(shape + 1)` and `U` is
/// uniform then `G U^{1/shape} ~ Gamma(shape)`. The product is formed in logs;
/// it still underflows to zero for extremely small shapes, which is where the
/// true law puts its mass anyway.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let boosted = marsaglia_tsang(shape + 1.0, rng);
        let log_u = open_uniform(rng).ln();
        return (boosted.ln() + log_u / shape).exp();
    }
    marsaglia_tsang(shape, rng)
}

fn marsaglia_tsang<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open_uniform(rng);
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as u64
}

/// Inverse-CDF sampler for the logarithmic law `P(k) = -q^k / (k ln(1 - q))`.
#[derive(Debug, Clone)]
pub struct LogarithmicSampler {
    q: f64,
    cdf: Vec<f64>,
}

impl LogarithmicSampler {
    const TAIL: f64 = 1e-15;

    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "q",
                value: q,
                constraint: "in (0, 1)",
            });
        }
        let mut cdf = Vec::new();
        let mut p = q / -(-q).ln_1p();
        let mut total = 0.0;
        let mut k = 1.0;
        loop {
            total += p;
            cdf.push(total);
            // remaining mass is below p q / (1 - q)
            if p * q / (1.0 - q) < Self::TAIL || 1.0 - total < Self::TAIL {
                break;
            }
            p *= q * k / (k + 1.0);
            k += 1.0;
        }
        Ok(Self { q, cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx < self.cdf.len() {
            return idx as u64 + 1;
        }
        // beyond the table: walk the series onwards
        let n = self.cdf.len();
        let mut k = n as f64;
        let mut total = self.cdf[n - 1];
        let mut p = (total - if n > 1 { self.cdf[n - 2] } else { 0.0 }).max(f64::MIN_POSITIVE);
        loop {
            p *= self.q * k / (k + 1.0);
            k += 1.0;
            total += p;
            if total > u || p < f64::MIN_POSITIVE {
                return k as u64;
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Law {
    Normal { std: f64 },
    Poisson { mean: f64 },
    CompoundNormal { mean_count: f64, jump_std: f64 },
    Gamma { shape: f64, scale: f64 },
    GammaDifference { shape: f64, up: f64, down: f64 },
    GammaPoisson { shape: f64, scale: f64 },
}

/// Exact sampler for `X_dt` of one model, with per-step constants cached.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    law: Law,
    sign: f64,
    dt: f64,
}

impl IncrementSampler {
    pub fn new(model: &LevyModel, dt: f64) -> Result<Self> {
        check_step(dt)?;
        let law = match *model.family() {
            Family::Brownian => Law::Normal { std: dt.sqrt() },
            Family::Poisson { rate } => Law::Poisson { mean: rate * dt },
            Family::CompoundPoissonNormal { rate, jump_std } => Law::CompoundNormal {
                mean_count: rate * dt,
                jump_std,
            },
            Family::Gamma { rate } => Law::Gamma {
                shape: rate * dt,
                scale: 1.0,
            },
            Family::ScaledGamma { rate, scale } => Law::Gamma {
                shape: rate * dt,
                scale,
            },
            Family::VarianceGamma { rate } => {
                let k = 1.0 / (2.0 * rate).sqrt();
                Law::GammaDifference {
                    shape: rate * dt,
                    up: k,
                    down: k,
                }
            }
            Family::AsymmetricVg { rate, drift, vol } => {
                let (up, down) = Family::avg_scales(rate, drift, vol);
                Law::GammaDifference {
                    shape: rate * dt,
                    up,
                    down,
                }
            }
            Family::NegativeBinomial { rate, q } => Law::GammaPoisson {
                shape: rate * dt,
                scale: q / (1.0 - q),
            },
        };
        let sign = if model.is_mirrored() { -1.0 } else { 1.0 };
        Ok(Self { law, sign, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match self.law {
            Law::Normal { std } => std * rng.sample::<f64, _>(StandardNormal),
            Law::Poisson { mean } => sample_poisson(mean, rng) as f64,
            Law::CompoundNormal {
                mean_count,
                jump_std,
            } => {
                let n = sample_poisson(mean_count, rng);
                // a sum of n iid N(0, s^2) jumps is N(0, n s^2)
                if n == 0 {
                    0.0
                } else {
                    jump_std * (n as f64).sqrt() * rng.sample::<f64, _>(StandardNormal)
                }
            }
            Law::Gamma { shape, scale } => scale * sample_gamma(shape, rng),
            Law::GammaDifference { shape, up, down } => {
                up * sample_gamma(shape, rng) - down * sample_gamma(shape, rng)
            }
            Law::GammaPoisson { shape, scale } => {
                sample_poisson(scale * sample_gamma(shape, rng), rng) as f64
            }
        };
        self.sign * x
    }
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("step {dt} must be finite and > 0")))
    }
}

/// One draw of `X_dt`.
pub fn sample_increment<R: Rng + ?Sized>(model: &LevyModel, dt: f64, rng: &mut R) -> Result<f64> {
    Ok(IncrementSampler::new(model, dt)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgMethod {
    GammaDifference,
    SubordinatedBm,
}

/// Symmetric VG increment `V_dt` with unit variance rate, by either construction.
pub fn vg_dual_sample<R: Rng + ?Sized>(m: f64, dt: f64, rng: &mut R, method: VgMethod) -> Result<f64> {
    LevyModel::variance_gamma(m)?;
    check_step(dt)?;
    Ok(match method {
        VgMethod::GammaDifference => {
            (sample_gamma(m * dt, rng) - sample_gamma(m * dt, rng)) / (2.0 * m).sqrt()
        }
        VgMethod::SubordinatedBm => {
            // gamma clock with mean dt and variance dt / m
            let clock = sample_gamma(m * dt, rng) / m;
            clock.sqrt() * rng.sample::<f64, _>(StandardNormal)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbMethod {
    LogarithmicCompoundPoisson,
    GammaSubordinatedPoisson,
}

/// Negative binomial count `NB(m dt, q)` by either construction.
pub fn nb_dual_sample<R: Rng + ?Sized>(
    m: f64,
    q: f64,
    dt: f64,
    rng: &mut R,
    method: NbMethod,
) -> Result<u64> {
    LevyModel::negative_binomial(m, q)?;
    check_step(dt)?;
    Ok(match method {
        NbMethod::LogarithmicCompoundPoisson => {
            let sampler = cached_logarithmic(q)?;
            let n = sample_poisson(-m * (-q).ln_1p() * dt, rng);
            (0..n).map(|_| sampler.sample(rng)).sum()
        }
        NbMethod::GammaSubordinatedPoisson => {
            // Poisson at rate m q / (1 - q) run on a gamma clock of mean dt
            let clock = sample_gamma(m * dt, rng) / m;
            sample_poisson(m * q / (1.0 - q) * clock, rng)
        }
    })
}

fn cached_logarithmic(q: f64) -> Result<LogarithmicSampler> {
    static LAST: OnceLock<std::sync::Mutex<Option<LogarithmicSampler>>> = OnceLock::new();
    let slot = LAST.get_or_init(Default::default);
    let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(s) = guard.as_ref() {
        if s.q == q {
            return Ok(s.clone());
        }
    }
    let s = LogarithmicSampler::new(q)?;
    *guard = Some(s.clone());
    Ok(s)
}

/// Driver values on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Path {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform grid `0, h, 2h, ..., horizon` with `steps` cells.
pub fn uniform_grid(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
        return Err(Error::InvalidInput(format!(
            "need horizon > 0 and steps >= 1, got {horizon} and {steps}"
        )));
    }
    let mut times: Vec<f64> = (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
    times[steps] = horizon;
    Ok(times)
}

pub fn simulate_path<R: Rng + ?Sized>(
    model: &LevyModel,
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<Path> {
    let times = uniform_grid(horizon, steps)?;
    let sampler = IncrementSampler::new(model, horizon / steps as f64)?;
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..steps {
        x += sampler.sample(rng);
        values.push(x);
    }
    Ok(Path { times, values })
}

/// Path on an arbitrary grid; `times` must start at 0 and increase strictly.
pub fn simulate_path_on_grid<R: Rng + ?Sized>(
    model: &LevyModel,
    times: &[f64],
    rng: &mut R,
) -> Result<Path> {
    if times.first() != Some(&0.0) || times.len() < 2 {
        return Err(Error::InvalidInput(
            "grid must start at 0 and have at least two points".into(),
        ));
    }
    let mut values = Vec::with_capacity(times.len());
    let mut x = 0.0;
    values.push(x);
    for w in times.windows(2) {
        x += sample_increment(model, w[1] - w[0], rng)?;
        values.push(x);
    }
    Ok(Path {
        times: times.to_vec(),
        values,
    })
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McResult {
    /// `|estimate - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.stderr
    }
}

/// Streaming mean and variance (Welford), mergeable across workers (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn result(&self) -> Result<McResult> {
        check_count(self.n)?;
        Ok(McResult {
            estimate: self.mean,
            stderr: (self.variance() / self.n as f64).sqrt(),
            n: self.n,
        })
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")))
    } else {
        Ok(())
    }
}

/// Mean of `n` draws of `f`.
pub fn mc_mean<R, F>(n: usize, rng: &mut R, mut f: F) -> Result<McResult>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<f64>,
{
    check_count(n)?;
    let mut acc = Accumulator::default();
    for _ in 0..n {
        acc.push(f(rng)?);
    }
    acc.result()
}

/// `mc_mean` split over `workers` threads, worker `w` drawing from stream `w`
/// of `seed`. Partials are merged in worker order, so the result depends on
/// `(seed, n, workers)` only.
pub fn mc_mean_parallel<F>(n: usize, seed: u64, workers: usize, f: F) -> Result<McResult>
where
    F: Fn(&mut SimRng) -> Result<f64> + Sync,
{
    check_count(n)?;
    let workers = workers.clamp(1, n);
    let partials: Vec<Result<Accumulator>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                let share = n / workers + usize::from(w < n % workers);
                scope.spawn(move || {
                    let mut rng = SimRng::new(seed, w as u64);
                    let mut acc = Accumulator::default();
                    for _ in 0..share {
                        acc.push(f(&mut rng)?);
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Monte Carlo worker panicked"))
            .collect()
    });
    let mut total = Accumulator::default();
    for p in partials {
        total.merge(&p?);
    }
    total.result()
}

/// Monte Carlo mean of a path functional.
pub fn mc_expectation<R, F>(
    payoff: F,
    model: &LevyModel,
    horizon: f64,
    steps: usize,
    n: usize,
    rng: &mut R,
) -> Result<McResult>
where
    R: Rng + ?Sized,
    F: Fn(&Path) -> f64,
{
    uniform_grid(horizon, steps)?;
    mc_mean(n, rng, |rng| Ok(payoff(&simulate_path(model, horizon, steps, rng)?)))
}

/// Horizon beyond which `exp(-delta t)` has decayed by a factor of 10^6.
pub fn dividend_horizon(delta: f64) -> f64 {
    1e6f64.ln() / delta
}

/// Monte Carlo estimate of `E int_0^T pi_s D_s ds` over `T = dividend_horizon(delta)`.
///
/// Each path is cut into `cells` equal cells and the integrand is evaluated at
/// one uniformly drawn time per cell, which keeps the estimator unbiased.
/// Returns the estimate together with the horizon used.
pub fn mc_discounted_dividends<R: Rng + ?Sized>(
    glm: &GlmSpec,
    cells: usize,
    n: usize,
    rng: &mut R,
) -> Result<(McResult, f64)> {
    let delta = glm.gordon_valuation()?.delta;
    let horizon = dividend_horizon(delta);
    let h = horizon / cells.max(1) as f64;
    let model = *glm.model();
    let result = mc_mean(n, rng, |rng| {
        let mut x = 0.0;
        let mut total = 0.0;
        for k in 0..cells.max(1) {
            let start = k as f64 * h;
            let offset = h * open_uniform(rng);
            x += sample_increment(&model, offset, rng)?;
            let u = start + offset;
            total += h * glm.kernel_value(x, u)? * glm.dividend_rate(x, u)?;
            if offset < h {
                x += sample_increment(&model, h - offset, rng)?;
            }
        }
        Ok(total)
    })?;
    Ok((result, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{default_model, FamilyKind};
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = SimRng::new(7, 3);
        let mut b = SimRng::new(7, 3);
        let mut c = SimRng::new(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn increment_means() {
        let n = 100_000;
        let mut rng = SimRng::new(1, 0);
        let b = LevyModel::brownian();
        let xs: Vec<f64> = (0..n).map(|_| sample_increment(&b, 1.0, &mut rng).unwrap()).collect();
        assert!(moments(&xs).0.abs() < 4.0 / (n as f64).sqrt());

        // Gamma(shape 2): mean 2, variance 2
        let g = LevyModel::gamma(1.0).unwrap();
        let s = IncrementSampler::new(&g, 2.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        assert!((moments(&xs).0 - 2.0).abs() < 4.0 * (2.0 / n as f64).sqrt());

        // NB(1, 1/2): mean q/(1-q) = 1, variance q/(1-q)^2 = 2
        let nb = LevyModel::negative_binomial(1.0, 0.5).unwrap();
        let s = IncrementSampler::new(&nb, 1.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        assert!((moments(&xs).0 - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn small_shape_gamma_moments() {
        // shape 0.05: mean 0.05, variance 0.05
        let n = 200_000;
        let mut rng = SimRng::new(11, 0);
        let xs: Vec<f64> = (0..n).map(|_| sample_gamma(0.05, &mut rng)).collect();
        let (mean, var) = moments(&xs);
        assert!((mean - 0.05).abs() < 4.0 * (0.05 / n as f64).sqrt());
        assert!((var - 0.05).abs() < 0.01);
    }

    #[test]
    fn logarithmic_pmf() {
        let q = 0.6;
        let s = LogarithmicSampler::new(q).unwrap();
        let n = 100_000;
        let mut rng = SimRng::new(5, 0);
        let ones = (0..n).filter(|_| s.sample(&mut rng) == 1).count() as f64 / n as f64;
        let p1 = -q / (1.0 - q).ln();
        assert!((ones - p1).abs() < 4.0 * (p1 * (1.0 - p1) / n as f64).sqrt());
        assert!(1.0 - s.cdf.last().unwrap() < 1e-14);
    }

    #[test]
    fn path_shapes() {
        let mut rng = SimRng::new(2, 0);
        let p = simulate_path(&LevyModel::poisson(3.0).unwrap(), 2.0, 50, &mut rng).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.times.len(), p.values.len());
        assert!(p.values.windows(2).all(|w| w[1] >= w[0] && w[1].fract() == 0.0));

        let g = simulate_path(&LevyModel::gamma(2.0).unwrap(), 1.0, 20, &mut rng).unwrap();
        assert!(g.values.windows(2).all(|w| w[1] > w[0]));

        // one step is one increment drawn from the same stream position
        let model = default_model(FamilyKind::VarianceGamma).unwrap();
        let p = simulate_path(&model, 0.7, 1, &mut SimRng::new(9, 1)).unwrap();
        let x = sample_increment(&model, 0.7, &mut SimRng::new(9, 1)).unwrap();
        assert_eq!(p.terminal(), x);
    }

    #[test]
    fn mirrored_increments_negate() {
        let g = LevyModel::gamma(1.0).unwrap();
        let a = sample_increment(&g, 0.5, &mut SimRng::new(3, 0)).unwrap();
        let b = sample_increment(&g.mirror(), 0.5, &mut SimRng::new(3, 0)).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn constant_payoff_has_zero_error() {
        let mut rng = SimRng::new(0, 0);
        let r = mc_expectation(|_| 1.0, &LevyModel::brownian(), 1.0, 4, 1000, &mut rng).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.stderr, 0.0);
        assert!(mc_mean(1, &mut rng, |_| Ok(1.0)).is_err());
    }

    #[test]
    fn parallel_mean_is_deterministic() {
        let f = |rng: &mut SimRng| Ok(rng.sample::<f64, _>(StandardNormal));
        let a = mc_mean_parallel(10_001, 42, 4, f).unwrap();
        let b = mc_mean_parallel(10_001, 42, 4, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 10_001);
        assert!(a.within(0.0, 4.0));
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..101).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        xs[..40].iter().for_each(|&x| left.push(x));
        xs[40..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean() - whole.mean()).abs() < 1e-15);
        assert!((left.variance() - whole.variance()).abs() < 1e-14);
    }

    #[test]
    fn asset_mean_matches_expected_price() {
        let spec = crate::pricing::default_spec(FamilyKind::Gamma).unwrap();
        let mut rng = SimRng::new(8, 0);
        let t = 1.5;
        let r = mc_mean(100_000, &mut rng, |rng| {
            let x = sample_increment(spec.model(), t, rng)?;
            spec.asset_value(x, t)
        })
        .unwrap();
        let expected = spec.s0() * ((spec.r() + spec.premium()) * t).exp();
        assert!(r.within(expected, 4.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn paths_are_deterministic(seed in any::<u64>(), steps in 1usize..20) {
            let model = default_model(FamilyKind::NegativeBinomial).unwrap();
            let a = simulate_path(&model, 1.0, steps, &mut SimRng::new(seed, 0)).unwrap();
            let b = simulate_path(&model, 1.0, steps, &mut SimRng::new(seed, 0)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.values[0], 0.0);
            prop_assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn gamma_draws_are_positive(shape in 1e-3f64..20.0, seed in any::<u64>()) {
            let mut rng = SimRng::new(seed, 0);
            for _ in 0..16 {
                let g = sample_gamma(shape, &mut rng);
                prop_assert!(g >= 0.0 && g.is_finite());
            }
        }
    }
}
