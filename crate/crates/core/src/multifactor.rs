//! Vector drivers with independent components and piecewise-constant
//! coefficient schedules.
//!
//! Component `i` contributes `lambda_i X^i` to the kernel and `sigma_i X^i` to
//! the asset; premiums add across components. Coefficients here may take any
//! sign, so mirrored and negative-direction components are allowed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::LevyModel;
use crate::premium::excess_return;
use crate::sampling::{simulate_path_on_grid, McResult, Path};

/// One independent driver with its risk aversion and volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub model: LevyModel,
    pub lambda: f64,
    pub sigma: f64,
}

impl Component {
    pub fn new(model: LevyModel, lambda: f64, sigma: f64) -> Result<Self> {
        check_coefficients(&model, lambda, sigma)?;
        Ok(Self {
            model,
            lambda,
            sigma,
        })
    }

    /// `R_i = psi(sigma) + psi(-lambda) - psi(sigma - lambda)`.
    pub fn premium(&self) -> Result<f64> {
        excess_return(&self.model, self.lambda, self.sigma)
    }
}

fn check_coefficients(model: &LevyModel, lambda: f64, sigma: f64) -> Result<()> {
    for (name, v) in [("lambda", lambda), ("sigma", sigma)] {
        if !v.is_finite() {
            return Err(Error::ParamOutOfRange {
                name,
                value: v,
                constraint: "finite",
            });
        }
    }
    let domain = model.domain();
    domain.check(sigma)?;
    domain.check(-lambda)?;
    domain.check(sigma - lambda)
}

/// A geometric Lévy model on independent drivers `X^1, ..., X^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorGlm {
    pub components: Vec<Component>,
    pub r: f64,
    pub s0: f64,
}

/// Per-component check of `R_i > 0  <=>  sigma_i lambda_i > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignRule {
    pub premium: f64,
    pub same_sign: bool,
    pub holds: bool,
}

impl VectorGlm {
    pub fn new(components: Vec<Component>, r: f64, s0: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("a vector model needs at least one component".into()));
        }
        if !r.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "r",
                value: r,
                constraint: "finite",
            });
        }
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "s0",
                value: s0,
                constraint: "> 0",
            });
        }
        for c in &components {
            check_coefficients(&c.model, c.lambda, c.sigma)?;
        }
        Ok(Self { components, r, s0 })
    }

    /// Brownian motion with risk pair `(lambda, sigma)` plus compound Poisson
    /// jumps of rate `m` and `N(0, 1)` sizes with risk pair `(beta, theta)`.
    pub fn jump_diffusion(lambda: f64, sigma: f64, beta: f64, theta: f64, m: f64, r: f64, s0: f64) -> Result<Self> {
        Self::new(
            vec![
                Component::new(LevyModel::brownian(), lambda, sigma)?,
                Component::new(LevyModel::compound_poisson_normal(m, 1.0)?, beta, theta)?,
            ],
            r,
            s0,
        )
    }

    /// Upward gamma jumps `(lambda_1, sigma_1)` and downward gamma jumps, the
    /// mirror of a second gamma process, `(lambda_2, sigma_2)`; both rate `m`.
    #[allow(clippy::too_many_arguments)]
    pub fn behavioral_asymmetry(
        m: f64,
        lambda1: f64,
        sigma1: f64,
        lambda2: f64,
        sigma2: f64,
        r: f64,
        s0: f64,
    ) -> Result<Self> {
        let up = LevyModel::gamma(m)?;
        Self::new(
            vec![
                Component::new(up, lambda1, sigma1)?,
                Component::new(up.mirror(), lambda2, sigma2)?,
            ],
            r,
            s0,
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Sum of the component premiums.
    pub fn vector_premium(&self) -> Result<f64> {
        self.components.iter().map(Component::premium).sum()
    }

    /// Every `lambda_i, sigma_i >= 0` with at least one strictly positive pair.
    pub fn in_positive_cone(&self) -> bool {
        self.components.iter().all(|c| c.lambda >= 0.0 && c.sigma >= 0.0)
            && self.components.iter().any(|c| c.lambda > 0.0 && c.sigma > 0.0)
    }

    pub fn sign_rules(&self) -> Result<Vec<SignRule>> {
        self.components
            .iter()
            .map(|c| {
                let premium = c.premium()?;
                let same_sign = c.sigma * c.lambda > 0.0;
                Ok(SignRule {
                    premium,
                    same_sign,
                    holds: (premium > 0.0) == same_sign,
                })
            })
            .collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "expected {} driver values, got {}",
                self.dim(),
                x.len()
            )))
        }
    }

    /// `pi_t = exp(-r t - sum_i (lambda_i x_i + t psi_i(-lambda_i)))`.
    pub fn vector_kernel_value(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_dim(x)?;
        let mut log = -self.r * t;
        for (c, &xi) in self.components.iter().zip(x) {
            log -= c.lambda * xi + t * c.model.psi(-c.lambda)?;
        }
        Ok(log.exp())
    }

    /// `S_t = S_0 exp((r + R) t + sum_i (sigma_i x_i - t psi_i(sigma_i)))`.
    pub fn vector_asset_value(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_dim(x)?;
        let mut log = (self.r + self.vector_premium()?) * t;
        for (c, &xi) in self.components.iter().zip(x) {
            log += c.sigma * xi - t * c.model.psi(c.sigma)?;
        }
        Ok(self.s0 * log.exp())
    }
}

/// Piecewise-constant coefficients on `[t_0, t_1), ..., [t_{K-1}, t_K]`.
///
/// Row `k` of `lambda` and `sigma` holds one entry per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub breakpoints: Vec<f64>,
    pub r: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

impl Schedule {
    /// Constant coefficients taken from `base` on `[0, horizon]`.
    pub fn constant(base: &VectorGlm, horizon: f64) -> Self {
        Self {
            breakpoints: vec![0.0, horizon],
            r: vec![base.r],
            lambda: vec![base.components.iter().map(|c| c.lambda).collect()],
            sigma: vec![base.components.iter().map(|c| c.sigma).collect()],
        }
    }

    pub fn intervals(&self) -> usize {
        self.r.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("validated schedules are non-empty")
    }

    /// Checks shapes, ordering and every interval's coefficients against `base`.
    pub fn validate(&self, base: &VectorGlm) -> Result<()> {
        let k = self.r.len();
        if k == 0 || self.breakpoints.len() != k + 1 || self.lambda.len() != k || self.sigma.len() != k {
            return Err(Error::InvalidInput(format!(
                "schedule with {} breakpoints needs {} rows of r, lambda and sigma",
                self.breakpoints.len(),
                self.breakpoints.len().saturating_sub(1)
            )));
        }
        if self.breakpoints[0] != 0.0 || self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0 and increase strictly".into(),
            ));
        }
        if !self.horizon().is_finite() {
            return Err(Error::InvalidInput("breakpoints must be finite".into()));
        }
        for row in 0..k {
            if !self.r[row].is_finite() {
                return Err(Error::ParamOutOfRange {
                    name: "r",
                    value: self.r[row],
                    constraint: "finite",
                });
            }
            if self.lambda[row].len() != base.dim() || self.sigma[row].len() != base.dim() {
                return Err(Error::InvalidInput(format!(
                    "row {row} must have {} lambda and sigma entries",
                    base.dim()
                )));
            }
            for (i, c) in base.components.iter().enumerate() {
                check_coefficients(&c.model, self.lambda[row][i], self.sigma[row][i])?;
            }
        }
        Ok(())
    }

    /// Interval holding `t`, right-continuous, with `t_K` in the last interval.
    fn interval_of(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return Err(Error::InvalidInput(format!(
                "time {t} outside the schedule [0, {}]",
                self.horizon()
            )));
        }
        let k = self.breakpoints.partition_point(|&b| b <= t);
        Ok(k.saturating_sub(1).min(self.intervals() - 1))
    }

    /// `int_a^b f(k) ds` for a function of the interval index.
    fn integrate_piecewise<F: FnMut(usize) -> Result<f64>>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        self.interval_of(a)?;
        self.interval_of(b)?;
        let mut total = 0.0;
        for k in 0..self.intervals() {
            let lo = self.breakpoints[k].max(a);
            let hi = self.breakpoints[k + 1].min(b);
            if hi > lo {
                total += f(k)? * (hi - lo);
            }
        }
        Ok(total)
    }

    /// Premium of interval `k`.
    pub fn premium_at(&self, base: &VectorGlm, k: usize) -> Result<f64> {
        base.components
            .iter()
            .enumerate()
            .map(|(i, c)| excess_return(&c.model, self.lambda[k][i], self.sigma[k][i]))
            .sum()
    }

    /// `int_s^t R(lambda_u, sigma_u) du`.
    pub fn integrated_premium(&self, base: &VectorGlm, s: f64, t: f64) -> Result<f64> {
        self.integrate_piecewise(s, t, |k| self.premium_at(base, k))
    }

    /// Grid holding every breakpoint, each interval cut into `per_interval` steps.
    pub fn refined_grid(&self, per_interval: usize) -> Vec<f64> {
        let per = per_interval.max(1);
        let mut grid = vec![0.0];
        for w in self.breakpoints.windows(2) {
            for j in 1..per {
                grid.push(w[0] + (w[1] - w[0]) * j as f64 / per as f64);
            }
            grid.push(w[1]);
        }
        grid
    }
}

/// `B_t = exp(int_0^t r_s ds)`.
pub fn money_market(schedule: &Schedule, t: f64) -> Result<f64> {
    Ok(schedule.integrate_piecewise(0.0, t, |k| Ok(schedule.r[k]))?.exp())
}

fn on_grid(grid: &[f64], t: f64) -> bool {
    let tol = 1e-12 * t.abs().max(1.0);
    grid.iter().any(|&g| (g - t).abs() <= tol)
}

/// Checks the drivers share one grid that contains every breakpoint it spans.
fn check_drivers<'a>(base: &VectorGlm, schedule: &Schedule, drivers: &'a [Path]) -> Result<&'a [f64]> {
    schedule.validate(base)?;
    if drivers.len() != base.dim() {
        return Err(Error::InvalidInput(format!(
            "expected {} driver paths, got {}",
            base.dim(),
            drivers.len()
        )));
    }
    let grid = drivers[0].times.as_slice();
    if drivers.iter().any(|p| p.times != grid || p.values.len() != grid.len()) {
        return Err(Error::InvalidInput("driver paths must share one time grid".into()));
    }
    let end = *grid.last().ok_or_else(|| Error::InvalidInput("empty driver path".into()))?;
    if end > schedule.horizon() * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "driver grid ends at {end}, after the schedule horizon {}",
            schedule.horizon()
        )));
    }
    for &b in &schedule.breakpoints {
        if b <= end && !on_grid(grid, b) {
            return Err(Error::GridMismatch { time: b });
        }
    }
    Ok(grid)
}

/// Log-increments of the kernel and asset along one grid step in interval `k`.
fn step_logs(base: &VectorGlm, schedule: &Schedule, k: usize, dt: f64, dx: &[f64]) -> Result<(f64, f64)> {
    let r = schedule.r[k];
    let premium = schedule.premium_at(base, k)?;
    let mut kernel = -r * dt;
    let mut asset = (r + premium) * dt;
    for (i, c) in base.components.iter().enumerate() {
        let (lambda, sigma) = (schedule.lambda[k][i], schedule.sigma[k][i]);
        kernel -= lambda * dx[i] + dt * c.model.psi(-lambda)?;
        asset += sigma * dx[i] - dt * c.model.psi(sigma)?;
    }
    Ok((kernel, asset))
}

/// Kernel and asset price paths driven by `drivers` under `schedule`.
///
/// `int sigma dX` is the exact sum of `sigma_k` times the driver increments in
/// interval `k`.
pub fn schedule_paths(base: &VectorGlm, schedule: &Schedule, drivers: &[Path]) -> Result<(Path, Path)> {
    let grid = check_drivers(base, schedule, drivers)?;
    let mut kernel = vec![1.0];
    let mut asset = vec![base.s0];
    let (mut log_k, mut log_s) = (0.0, base.s0.ln());
    let mut dx = vec![0.0; base.dim()];
    for j in 1..grid.len() {
        let (a, b) = (grid[j - 1], grid[j]);
        let k = schedule.interval_of(a)?;
        for (i, p) in drivers.iter().enumerate() {
            dx[i] = p.values[j] - p.values[j - 1];
        }
        let (dk, ds) = step_logs(base, schedule, k, b - a, &dx)?;
        log_k += dk;
        log_s += ds;
        kernel.push(log_k.exp());
        asset.push(log_s.exp());
    }
    Ok((
        Path {
            times: grid.to_vec(),
            values: kernel,
        },
        Path {
            times: grid.to_vec(),
            values: asset,
        },
    ))
}

/// Asset price path; see [`schedule_paths`].
pub fn schedule_asset_path(base: &VectorGlm, schedule: &Schedule, drivers: &[Path]) -> Result<Path> {
    Ok(schedule_paths(base, schedule, drivers)?.1)
}

/// Kernel path; see [`schedule_paths`].
pub fn schedule_kernel_path(base: &VectorGlm, schedule: &Schedule, drivers: &[Path]) -> Result<Path> {
    Ok(schedule_paths(base, schedule, drivers)?.0)
}

/// Independent driver paths on `grid`, one per component.
pub fn simulate_drivers<R: Rng + ?Sized>(base: &VectorGlm, grid: &[f64], rng: &mut R) -> Result<Vec<Path>> {
    base.components
        .iter()
        .map(|c| simulate_path_on_grid(&c.model, grid, rng))
        .collect()
}

/// Monte Carlo evidence that `S_t / B_t` is a submartingale under a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmartingaleReport {
    pub s: f64,
    pub t: f64,
    /// `E[S_s / B_s]`.
    pub discounted_s: McResult,
    /// `E[S_t / B_t]`.
    pub discounted_t: McResult,
    /// `E[S_t / B_t] / E[S_s / B_s]` with its delta-method standard error.
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `exp(int_s^t R du)`.
    pub predicted_ratio: f64,
    /// `E[pi_t S_t]`, which should equal `S_0`.
    pub deflated_t: McResult,
    /// `E[S_t/B_t] >= E[S_s/B_s] - 4 * combined stderr`.
    pub nondecreasing: bool,
    /// `|ratio - predicted_ratio| <= 4 * ratio_stderr`.
    pub ratio_matches: bool,
    /// `|E[pi_t S_t] - S_0| <= 4 * stderr`.
    pub martingale_holds: bool,
}

impl SubmartingaleReport {
    pub fn passed(&self) -> bool {
        self.nondecreasing && self.ratio_matches && self.martingale_holds
    }
}

fn mean_and_stderr(xs: &[f64]) -> Result<McResult> {
    let mut acc = crate::sampling::Accumulator::default();
    xs.iter().for_each(|&x| acc.push(x));
    acc.result()
}

/// Simulates `n` scenarios on the breakpoints plus `{s, t}` and compares the
/// discounted price at `s` and `t`.
pub fn submartingale_check<R: Rng + ?Sized>(
    base: &VectorGlm,
    schedule: &Schedule,
    s: f64,
    t: f64,
    n: usize,
    rng: &mut R,
) -> Result<SubmartingaleReport> {
    schedule.validate(base)?;
    if !(0.0 <= s && s < t) {
        return Err(Error::InvalidInput(format!("need 0 <= s < t, got s={s}, t={t}")));
    }
    let b_s = money_market(schedule, s)?;
    let b_t = money_market(schedule, t)?;
    let predicted_ratio = schedule.integrated_premium(base, s, t)?.exp();

    let mut grid: Vec<f64> = schedule
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b < t)
        .chain([s, t])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let is = grid.iter().position(|&g| g == s).expect("s is on the grid");

    let mut at_s = Vec::with_capacity(n);
    let mut at_t = Vec::with_capacity(n);
    let mut deflated = Vec::with_capacity(n);
    for _ in 0..n {
        let drivers = simulate_drivers(base, &grid, rng)?;
        let (kernel, asset) = schedule_paths(base, schedule, &drivers)?;
        at_s.push(asset.values[is] / b_s);
        at_t.push(asset.terminal() / b_t);
        deflated.push(kernel.terminal() * asset.terminal());
    }
    let discounted_s = mean_and_stderr(&at_s)?;
    let discounted_t = mean_and_stderr(&at_t)?;
    let deflated_t = mean_and_stderr(&deflated)?;

    let ratio = discounted_t.estimate / discounted_s.estimate;
    // Var(Y - ratio X) / (n E[X]^2)
    let residuals: Vec<f64> = at_t.iter().zip(&at_s).map(|(y, x)| y - ratio * x).collect();
    let resid = mean_and_stderr(&residuals)?;
    let ratio_stderr = resid.stderr / discounted_s.estimate;

    let combined = (discounted_s.stderr.powi(2) + discounted_t.stderr.powi(2)).sqrt();
    Ok(SubmartingaleReport {
        s,
        t,
        discounted_s,
        discounted_t,
        ratio,
        ratio_stderr,
        predicted_ratio,
        deflated_t,
        nondecreasing: discounted_t.estimate >= discounted_s.estimate - 4.0 * combined,
        ratio_matches: (ratio - predicted_ratio).abs() <= 4.0 * ratio_stderr,
        martingale_holds: deflated_t.within(base.s0, 4.0),
    })
}
