//! Excess rate of return (risk premium) of a geometric Lévy model.
//!
//! For risk aversion `lambda` and volatility `sigma` the premium is
//! `R = psi(sigma) + psi(-lambda) - psi(sigma - lambda)`, and the premium on
//! the inverse FX rate is `R~ = psi(-sigma) + psi(sigma - lambda) - psi(-lambda)`.
//! Both follow directly from the exponent; the Lévy–Khintchine route in
//! [`premium_via_levy_measure`] recomputes `R` from the jump measure and serves
//! as an independent check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{Family, LevyModel};
use crate::quadrature::{self, Tolerance};

/// Risk aversion and volatility of a single-factor model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    pub lambda: f64,
    pub sigma: f64,
}

impl RiskParams {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "lambda",
                value: lambda,
                constraint: "> 0",
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "sigma",
                value: sigma,
                constraint: "> 0",
            });
        }
        Ok(Self { lambda, sigma })
    }

    /// Volatility of the martingale `pi_t S_t`.
    pub fn beta(&self) -> f64 {
        self.sigma - self.lambda
    }

    /// Checks that `sigma`, `-lambda` and `sigma - lambda` lie in the model's domain.
    pub fn check(&self, model: &LevyModel) -> Result<()> {
        let d = model.domain();
        d.check(self.sigma)?;
        d.check(-self.lambda)?;
        d.check(self.beta())
    }
}

/// Premium for arbitrary (possibly zero or negative) risk aversion and
/// volatility. Only domain membership is checked.
pub fn excess_return(model: &LevyModel, lambda: f64, sigma: f64) -> Result<f64> {
    Ok(model.psi(sigma)? + model.psi(-lambda)? - model.psi(sigma - lambda)?)
}

/// `(dR/dlambda, dR/dsigma)` for arbitrary in-domain arguments.
pub fn excess_return_gradient(model: &LevyModel, lambda: f64, sigma: f64) -> Result<(f64, f64)> {
    let mid = model.psi_prime(sigma - lambda)?;
    Ok((
        mid - model.psi_prime(-lambda)?,
        model.psi_prime(sigma)? - mid,
    ))
}

/// Excess rate of return `R(lambda, sigma)` above the short rate.
pub fn risk_premium(model: &LevyModel, lambda: f64, sigma: f64) -> Result<f64> {
    let p = RiskParams::new(lambda, sigma)?;
    p.check(model)?;
    excess_return(model, lambda, sigma)
}

/// Excess rate of return of the inverse FX rate above `f - r`.
pub fn inverse_fx_premium(model: &LevyModel, lambda: f64, sigma: f64) -> Result<f64> {
    let p = RiskParams::new(lambda, sigma)?;
    p.check(model)?;
    model.domain().check(-sigma)?;
    Ok(model.psi(-sigma)? + model.psi(sigma - lambda)? - model.psi(-lambda)?)
}

/// `R + R~ - psi(sigma) - psi(-sigma)`; zero up to rounding.
pub fn premium_identity_check(model: &LevyModel, lambda: f64, sigma: f64) -> Result<f64> {
    let r = risk_premium(model, lambda, sigma)?;
    let rt = inverse_fx_premium(model, lambda, sigma)?;
    Ok(r + rt - model.psi(sigma)? - model.psi(-sigma)?)
}

/// `(dR/dlambda, dR/dsigma) = (psi'(sigma-lambda) - psi'(-lambda), psi'(sigma) - psi'(sigma-lambda))`.
pub fn premium_gradient(model: &LevyModel, lambda: f64, sigma: f64) -> Result<(f64, f64)> {
    let p = RiskParams::new(lambda, sigma)?;
    p.check(model)?;
    excess_return_gradient(model, lambda, sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Sign of `value`, treating `|value| <= tol` as zero.
    pub fn of(value: f64, tol: f64) -> Self {
        if value > tol {
            Sign::Positive
        } else if value < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Second derivatives of `R` along each axis, with their signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianSigns {
    pub d2_sigma: f64,
    pub d2_lambda: f64,
    pub sigma: Sign,
    pub lambda: Sign,
    /// For variance gamma: whether the signs agree with the rule
    /// `d2_sigma > 0 iff sigma > |sigma - lambda|`,
    /// `d2_lambda > 0 iff lambda > |sigma - lambda|`.
    pub vg_rule_holds: Option<bool>,
}

pub fn premium_hessian_signs(model: &LevyModel, lambda: f64, sigma: f64) -> Result<HessianSigns> {
    let p = RiskParams::new(lambda, sigma)?;
    p.check(model)?;
    let c_sigma = model.psi_second(sigma)?;
    let c_lambda = model.psi_second(-lambda)?;
    let c_mid = model.psi_second(p.beta())?;
    let d2_sigma = c_sigma - c_mid;
    let d2_lambda = c_lambda - c_mid;
    let tol = 1e-12 * c_sigma.max(c_lambda).max(c_mid);
    let sigma_sign = Sign::of(d2_sigma, tol);
    let lambda_sign = Sign::of(d2_lambda, tol);

    let vg_rule_holds = match model.family() {
        Family::VarianceGamma { .. } => {
            let gap = p.beta().abs();
            Some(
                (sigma_sign == Sign::Positive) == (sigma > gap)
                    && (lambda_sign == Sign::Positive) == (lambda > gap),
            )
        }
        _ => None,
    };
    Ok(HessianSigns {
        d2_sigma,
        d2_lambda,
        sigma: sigma_sign,
        lambda: lambda_sign,
        vg_rule_holds,
    })
}

fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Four-point central stencil for `d2R / dlambda dsigma` at `(lambda, sigma)`.
fn mixed_partial(model: &LevyModel, lambda: f64, sigma: f64, h: f64) -> Result<f64> {
    let r = |l: f64, s: f64| excess_return(model, l, s);
    Ok(
        (r(lambda + h, sigma + h)? - r(lambda + h, sigma - h)? - r(lambda - h, sigma + h)?
            + r(lambda - h, sigma - h)?)
            / (4.0 * h * h),
    )
}

/// Recovers `psi''(sigma)` from the premium surface as the mixed partial
/// `d2R / dlambda dsigma` taken at `lambda -> 0+` (evaluated at `lambda = h`).
pub fn curvature_from_premium(model: &LevyModel, sigma: f64) -> Result<f64> {
    model.domain().check(sigma)?;
    let h = fd_step(sigma);
    mixed_partial(model, h, sigma, h)
}

/// Rectangular grid of `(lambda, sigma)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiumGrid {
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl Default for PremiumGrid {
    fn default() -> Self {
        Self {
            lambdas: vec![0.1, 0.2, 0.3],
            sigmas: vec![0.1, 0.2, 0.3],
        }
    }
}

impl PremiumGrid {
    /// Points whose finite-difference stencil stays inside the model's domain.
    pub fn feasible_points(&self, model: &LevyModel) -> Vec<(f64, f64)> {
        let d = model.domain();
        let mut out = Vec::new();
        for &l in &self.lambdas {
            for &s in &self.sigmas {
                let h = fd_step(l.max(s));
                let args = [
                    s + h,
                    s - h,
                    -(l + h),
                    -(l - h),
                    s - l + 2.0 * h,
                    s - l - 2.0 * h,
                ];
                if l > 0.0 && s > 0.0 && args.iter().all(|&a| d.contains_strictly(a)) {
                    out.push((l, s));
                }
            }
        }
        out
    }
}

/// Whether `d2R / dlambda dsigma` is constant (to 1e-6) across the feasible grid.
pub fn is_bilinear(model: &LevyModel, grid: &PremiumGrid) -> Result<bool> {
    let points = grid.feasible_points(model);
    if points.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "grid has {} feasible points for {model}; need at least 2",
            points.len()
        )));
    }
    let mut reference = None;
    for (l, s) in points {
        let h = fd_step(l.max(s));
        let v = mixed_partial(model, l, s, h)?;
        match reference {
            None => reference = Some(v),
            Some(v0) => {
                if (v - v0).abs() > 1e-6 * f64::max(1.0, f64::abs(v0)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Jump part of a Lévy measure given by a closed-form density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDensity {
    /// `rate * |x|^-1 * exp(-decay |x|)` on the half-line with sign `direction`.
    OneSidedGamma {
        rate: f64,
        decay: f64,
        direction: f64,
    },
    /// `rate * |x|^-1 * exp(-decay |x|)` on both half-lines.
    SymmetricGamma { rate: f64, decay: f64 },
    /// `rate` times the `N(0, std^2)` density.
    Normal { rate: f64, std: f64 },
}

impl JumpDensity {
    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// Natural log of the density; `-inf` off the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            JumpDensity::OneSidedGamma {
                rate,
                decay,
                direction,
            } => {
                if x * direction > 0.0 {
                    rate.ln() - decay * x.abs() - x.abs().ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            JumpDensity::SymmetricGamma { rate, decay } => {
                if x == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - decay * x.abs() - x.abs().ln()
                }
            }
            JumpDensity::Normal { rate, std } => {
                let z = x / std;
                rate.ln() - 0.5 * z * z - (std * (2.0 * std::f64::consts::PI).sqrt()).ln()
            }
        }
    }

    /// Whether the support meets the positive / negative half-line.
    pub fn support(&self) -> (bool, bool) {
        match *self {
            JumpDensity::OneSidedGamma { direction, .. } => (direction > 0.0, direction < 0.0),
            _ => (true, true),
        }
    }
}

/// Discrete jump sizes with their rates.
#[derive(Debug, Clone, PartialEq)]
pub enum Atoms {
    Finite(Vec<(f64, f64)>),
    /// Jumps at `direction * n`, `n >= 1`, with rates `rate * q^n / n`.
    Logarithmic { rate: f64, q: f64, direction: f64 },
}

impl Atoms {
    /// Atom list, truncating an infinite series once the next rate falls
    /// below `1e-14` of the running total.
    pub fn truncated(&self) -> Vec<(f64, f64)> {
        match self {
            Atoms::Finite(list) => list.clone(),
            Atoms::Logarithmic { rate, q, direction } => {
                let mut out = Vec::new();
                let mut total = 0.0;
                let mut qn = 1.0;
                for n in 1.. {
                    qn *= q;
                    let w = rate * qn / n as f64;
                    if w < 1e-14 * total {
                        break;
                    }
                    total += w;
                    out.push((direction * n as f64, w));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpMeasure {
    None,
    PointMasses(Atoms),
    Density(JumpDensity),
}

/// Lévy–Khintchine triplet `(p, q, nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasureSpec {
    pub gaussian_q: f64,
    /// Drift relative to the `|x| < 1` truncation; recorded, never used in pricing.
    pub drift_p: f64,
    pub jumps: JumpMeasure,
}

/// The Lévy triplet of a model. Asymmetric VG is not supported.
pub fn levy_measure_of(model: &LevyModel) -> Result<LevyMeasureSpec> {
    let dir = if model.is_mirrored() { -1.0 } else { 1.0 };
    let (gaussian_q, drift_p, jumps) = match *model.family() {
        Family::Brownian => (1.0, 0.0, JumpMeasure::None),
        Family::Poisson { rate } => (
            0.0,
            0.0,
            JumpMeasure::PointMasses(Atoms::Finite(vec![(dir, rate)])),
        ),
        Family::CompoundPoissonNormal { rate, jump_std } => (
            0.0,
            0.0,
            JumpMeasure::Density(JumpDensity::Normal {
                rate,
                std: jump_std,
            }),
        ),
        Family::Gamma { rate } => (
            0.0,
            dir * rate * (1.0 - (-1.0f64).exp()),
            JumpMeasure::Density(JumpDensity::OneSidedGamma {
                rate,
                decay: 1.0,
                direction: dir,
            }),
        ),
        Family::ScaledGamma { rate, scale } => (
            0.0,
            dir * rate * scale * (1.0 - (-1.0 / scale).exp()),
            JumpMeasure::Density(JumpDensity::OneSidedGamma {
                rate,
                decay: 1.0 / scale,
                direction: dir,
            }),
        ),
        Family::VarianceGamma { rate } => (
            0.0,
            0.0,
            JumpMeasure::Density(JumpDensity::SymmetricGamma {
                rate,
                decay: (2.0 * rate).sqrt(),
            }),
        ),
        Family::NegativeBinomial { rate, q } => (
            0.0,
            0.0,
            JumpMeasure::PointMasses(Atoms::Logarithmic {
                rate,
                q,
                direction: dir,
            }),
        ),
        Family::AsymmetricVg { .. } => {
            return Err(Error::Unsupported(
                "Lévy measure of the asymmetric variance gamma family".into(),
            ))
        }
    };
    Ok(LevyMeasureSpec {
        gaussian_q,
        drift_p,
        jumps,
    })
}

/// `(e^{sigma x} - 1)(1 - e^{-lambda x})`
fn premium_integrand(lambda: f64, sigma: f64, x: f64) -> f64 {
    -(sigma * x).exp_m1() * (-lambda * x).exp_m1()
}

/// `ln |e^y - 1|`, finite for large `y`.
fn ln_abs_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().abs().ln()
    }
}

/// Premium integrand times the jump density, combined in log space so that
/// growth of `e^{sigma x}` and decay of the density never overflow separately.
fn weighted_integrand(density: &JumpDensity, lambda: f64, sigma: f64, x: f64) -> f64 {
    let ln_nu = density.ln_density(x);
    if ln_nu == f64::NEG_INFINITY || sigma * x == 0.0 || lambda * x == 0.0 {
        return 0.0;
    }
    let sign = (sigma * x).signum() * (lambda * x).signum();
    sign * (ln_abs_expm1(sigma * x) + ln_abs_expm1(-lambda * x) + ln_nu).exp()
}

/// `R(lambda, sigma) = q lambda sigma + int (e^{sigma x}-1)(1-e^{-lambda x}) nu(dx)`,
/// evaluated by series summation (atoms) or adaptive quadrature (densities).
///
/// Accepts any in-domain `(lambda, sigma)`, including negative values.
pub fn premium_via_levy_measure(model: &LevyModel, lambda: f64, sigma: f64) -> Result<f64> {
    let d = model.domain();
    d.check(sigma)?;
    d.check(-lambda)?;
    d.check(sigma - lambda)?;
    let spec = levy_measure_of(model)?;
    // psi(a) = q a^2 / 2 contributes q (sigma^2 + lambda^2 - (sigma - lambda)^2) / 2 = q lambda sigma
    let gaussian = spec.gaussian_q * lambda * sigma;
    let g = |x: f64| premium_integrand(lambda, sigma, x);

    let jumps = match &spec.jumps {
        JumpMeasure::None => 0.0,
        JumpMeasure::PointMasses(Atoms::Finite(list)) => list.iter().map(|&(x, w)| w * g(x)).sum(),
        JumpMeasure::PointMasses(Atoms::Logarithmic { rate, q, direction }) => {
            sum_logarithmic(*rate, *q, *direction, lambda, sigma)?
        }
        JumpMeasure::Density(density) => {
            let tol = Tolerance::default();
            let (pos, neg) = density.support();
            let mut total = 0.0;
            if pos {
                total += quadrature::integrate_to_infinity(
                    |x| weighted_integrand(density, lambda, sigma, x),
                    0.0,
                    tol,
                )?
                .value;
            }
            if neg {
                total += quadrature::integrate_to_infinity(
                    |y| weighted_integrand(density, lambda, sigma, -y),
                    0.0,
                    tol,
                )?
                .value;
            }
            total
        }
    };
    Ok(gaussian + jumps)
}

/// Sums `rate * sum_n q^n/n * g(direction * n)` until a geometric tail bound
/// drops below `1e-16` of the partial sum.
fn sum_logarithmic(rate: f64, q: f64, direction: f64, lambda: f64, sigma: f64) -> Result<f64> {
    // |g(x)| <= e^{|sigma x|} e^{|lambda x|}, but along the support direction
    // only the exponent of the growing factor matters; bound with both.
    let growth = q * ((direction * sigma).max(0.0) + (-direction * lambda).max(0.0)).exp();
    if growth >= 1.0 {
        return Err(Error::InvalidInput(
            "logarithmic series does not converge for these arguments".into(),
        ));
    }
    let mut sum = 0.0;
    let mut qn = 1.0;
    let mut bound_n = 1.0;
    for n in 1..1_000_000u32 {
        let nf = f64::from(n);
        qn *= q;
        bound_n *= growth;
        sum += rate * qn / nf * premium_integrand(lambda, sigma, direction * nf);
        let tail = rate * bound_n * growth / ((nf + 1.0) * (1.0 - growth));
        if tail <= 1e-16 * sum.abs() || tail == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::QuadratureFailure {
        estimate: sum,
        error: f64::NAN,
    })
}

/// One row of a premium surface; `None` where an argument leaves the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub lambda: f64,
    pub sigma: f64,
    pub premium: Option<f64>,
    pub inverse_premium: Option<f64>,
}

/// `R` and `R~` over `lambdas x sigmas`, lambda-major.
pub fn premium_surface(model: &LevyModel, lambdas: &[f64], sigmas: &[f64]) -> Vec<SurfaceRow> {
    let mut rows = Vec::with_capacity(lambdas.len() * sigmas.len());
    for &lambda in lambdas {
        for &sigma in sigmas {
            rows.push(SurfaceRow {
                lambda,
                sigma,
                premium: risk_premium(model, lambda, sigma).ok(),
                inverse_premium: inverse_fx_premium(model, lambda, sigma).ok(),
            });
        }
    }
    rows
}
