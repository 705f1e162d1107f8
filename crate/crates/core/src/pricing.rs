//! Pricing kernel, asset price, FX rates and dividend valuation evaluated at a
//! realised driver value `X_t = x`.
//!
//! Simulation is kept out of this module: Monte Carlo and the exact option
//! oracles both call the same evaluators with a driver value they produced.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{default_model, FamilyKind, LevyModel, ModelSpec};
use crate::premium::{inverse_fx_premium, RiskParams};

/// A complete single-factor geometric Lévy model.
///
/// Rates are continuously compounded, per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GlmSpecFile", into = "GlmSpecFile")]
pub struct GlmSpec {
    model: LevyModel,
    r: f64,
    risk: RiskParams,
    s0: f64,
    f: Option<f64>,
    dividends: Option<Dividends>,
    psi_sigma: f64,
    psi_neg_lambda: f64,
    psi_beta: f64,
    premium: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dividends {
    growth: f64,
    d0: f64,
    delta: f64,
}

/// Gordon-growth valuation: `S_0 = D_0 / delta` with `delta = r + R - gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gordon {
    pub s0_implied: f64,
    pub delta: f64,
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            constraint: "finite",
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time {t} must be finite and >= 0")))
    }
}

impl GlmSpec {
    pub fn new(model: LevyModel, r: f64, lambda: f64, sigma: f64, s0: f64) -> Result<Self> {
        let risk = RiskParams::new(lambda, sigma)?;
        Self::from_risk(model, r, risk, s0)
    }

    /// Zero risk aversion: the kernel is `e^{-rt}` and the premium vanishes.
    /// Used where prices under `lambda = 0` are compared with `lambda > 0`.
    pub fn risk_neutral(model: LevyModel, r: f64, sigma: f64, s0: f64) -> Result<Self> {
        // validates sigma; lambda is then cleared
        let mut risk = RiskParams::new(1.0, sigma)?;
        risk.lambda = 0.0;
        Self::from_risk(model, r, risk, s0)
    }

    fn from_risk(model: LevyModel, r: f64, risk: RiskParams, s0: f64) -> Result<Self> {
        check_finite("r", r)?;
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "s0",
                value: s0,
                constraint: "> 0",
            });
        }
        let (lambda, sigma) = (risk.lambda, risk.sigma);
        risk.check(&model)?;
        let psi_sigma = model.psi(sigma)?;
        let psi_neg_lambda = model.psi(-lambda)?;
        let psi_beta = model.psi(risk.beta())?;
        Ok(Self {
            model,
            r,
            risk,
            s0,
            f: None,
            dividends: None,
            psi_sigma,
            psi_neg_lambda,
            psi_beta,
            premium: psi_sigma + psi_neg_lambda - psi_beta,
        })
    }

    pub fn with_foreign_rate(mut self, f: f64) -> Result<Self> {
        check_finite("f", f)?;
        self.f = Some(f);
        Ok(self)
    }

    /// Attaches a dividend stream `D_t = d0 e^{gamma t} e^{sigma X_t - t psi(sigma)}`.
    /// Requires `r + R - gamma > 0`.
    pub fn with_dividends(mut self, gamma_growth: f64, d0: f64) -> Result<Self> {
        check_finite("gamma", gamma_growth)?;
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::ParamOutOfRange {
                name: "d0",
                value: d0,
                constraint: "> 0",
            });
        }
        let delta = self.r + self.premium - gamma_growth;
        // equality up to rounding counts as zero yield
        let scale = self.r.abs() + self.premium.abs() + gamma_growth.abs();
        if delta <= 4.0 * f64::EPSILON * scale {
            return Err(Error::NonpositiveDividendYield { delta });
        }
        self.dividends = Some(Dividends {
            growth: gamma_growth,
            d0,
            delta,
        });
        Ok(self)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.risk.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.risk.sigma
    }

    pub fn beta(&self) -> f64 {
        self.risk.beta()
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn foreign_rate(&self) -> Option<f64> {
        self.f
    }

    pub fn gamma_growth(&self) -> Option<f64> {
        self.dividends.map(|d| d.growth)
    }

    pub fn d0(&self) -> Option<f64> {
        self.dividends.map(|d| d.d0)
    }

    /// `R(lambda, sigma)` for this model.
    pub fn premium(&self) -> f64 {
        self.premium
    }

    /// `psi(sigma - lambda)`, the compensator rate of `pi_t S_t`.
    pub fn psi_beta(&self) -> f64 {
        self.psi_beta
    }

    /// `pi_t = exp(-r t - lambda x - t psi(-lambda))`.
    pub fn kernel_value(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok((-self.r * t - self.risk.lambda * x - t * self.psi_neg_lambda).exp())
    }

    /// `S_t = S_0 exp(r t + R t + sigma x - t psi(sigma))`.
    pub fn asset_value(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.s0 * ((self.r + self.premium) * t + self.risk.sigma * x - t * self.psi_sigma).exp())
    }

    /// `E[S_t] = S_0 exp((r + R) t)`.
    pub fn expected_asset_price(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.s0 * ((self.r + self.premium) * t).exp())
    }

    /// Domestic price of one unit of foreign currency.
    pub fn fx_value(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let f = self.f.ok_or(Error::MissingForeignRate)?;
        Ok(self.s0
            * ((self.r - f + self.premium) * t + self.risk.sigma * x - t * self.psi_sigma).exp())
    }

    /// Foreign price of one unit of domestic currency, started at `1 / s0`.
    pub fn inverse_fx_value(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let f = self.f.ok_or(Error::MissingForeignRate)?;
        let inverse_premium = inverse_fx_premium(&self.model, self.risk.lambda, self.risk.sigma)?;
        let psi_neg_sigma = self.model.psi(-self.risk.sigma)?;
        Ok(
            ((f - self.r + inverse_premium) * t - self.risk.sigma * x - t * psi_neg_sigma).exp()
                / self.s0,
        )
    }

    pub fn gordon_valuation(&self) -> Result<Gordon> {
        let d = self.dividends.ok_or(Error::MissingDividendInput("gamma, d0"))?;
        Ok(Gordon {
            s0_implied: d.d0 / d.delta,
            delta: d.delta,
        })
    }

    /// Price of the dividend-paying asset,
    /// `S_t = S_0 exp((r - delta) t + R t + sigma x - t psi(sigma))` with `S_0 = D_0 / delta`.
    pub fn dividend_asset_value(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let g = self.gordon_valuation()?;
        Ok(g.s0_implied
            * ((self.r - g.delta + self.premium) * t + self.risk.sigma * x - t * self.psi_sigma)
                .exp())
    }

    /// Dividend rate `D_t = D_0 exp(gamma t + sigma x - t psi(sigma))`.
    pub fn dividend_rate(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let d = self.dividends.ok_or(Error::MissingDividendInput("gamma, d0"))?;
        Ok(d.d0 * (d.growth * t + self.risk.sigma * x - t * self.psi_sigma).exp())
    }

    /// Same model with a different risk aversion (`0` allowed); dividend and FX
    /// inputs carry over.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        self.rebuild(self.model, lambda, self.risk.sigma)
    }

    /// Same inputs on a different driver / volatility.
    pub fn rebuild(&self, model: LevyModel, lambda: f64, sigma: f64) -> Result<Self> {
        let mut spec = if lambda == 0.0 {
            GlmSpec::risk_neutral(model, self.r, sigma, self.s0)?
        } else {
            GlmSpec::new(model, self.r, lambda, sigma, self.s0)?
        };
        if let Some(f) = self.f {
            spec = spec.with_foreign_rate(f)?;
        }
        if let Some(d) = self.dividends {
            spec = spec.with_dividends(d.growth, d.d0)?;
        }
        Ok(spec)
    }
}

/// Default pricing inputs for a scalar family: `r = 0.03`, `lambda = 0.15`,
/// `sigma = 0.3`, `S_0 = 100`, `f = 0.01`.
pub fn default_spec(kind: FamilyKind) -> Result<GlmSpec> {
    GlmSpec::new(default_model(kind)?, 0.03, 0.15, 0.3, 100.0)?.with_foreign_rate(0.01)
}

/// JSON form: the model fields plus `r`, `lambda`, `sigma`, `s0` and optional
/// `f`, `gamma`, `d0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmSpecFile {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mirrored: bool,
    pub r: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub s0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
}

impl TryFrom<GlmSpecFile> for GlmSpec {
    type Error = Error;

    fn try_from(file: GlmSpecFile) -> Result<Self> {
        let model = LevyModel::try_from(ModelSpec {
            family: file.family,
            params: file.params,
            mirrored: file.mirrored,
        })?;
        let mut spec = if file.lambda == 0.0 {
            GlmSpec::risk_neutral(model, file.r, file.sigma, file.s0)?
        } else {
            GlmSpec::new(model, file.r, file.lambda, file.sigma, file.s0)?
        };
        if let Some(f) = file.f {
            spec = spec.with_foreign_rate(f)?;
        }
        match (file.gamma, file.d0) {
            (Some(g), Some(d0)) => spec = spec.with_dividends(g, d0)?,
            (None, None) => {}
            (None, Some(_)) => return Err(Error::MissingDividendInput("gamma")),
            (Some(_), None) => return Err(Error::MissingDividendInput("d0")),
        }
        Ok(spec)
    }
}

impl From<GlmSpec> for GlmSpecFile {
    fn from(spec: GlmSpec) -> Self {
        let model = spec.model.to_spec();
        Self {
            family: model.family,
            params: model.params,
            mirrored: model.mirrored,
            r: spec.r,
            lambda: spec.risk.lambda,
            sigma: spec.risk.sigma,
            s0: spec.s0,
            f: spec.f,
            gamma: spec.gamma_growth(),
            d0: spec.d0(),
        }
    }
}
