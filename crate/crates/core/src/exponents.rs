//! Lévy exponents for the supported process families.
//!
//! A [`LevyModel`] couples a [`Family`] (with its parameters) to the open
//! interval `A` on which the exponential moment `E[exp(a X_t)]` is finite.
//! Every family has a closed-form exponent `psi` with
//! `E[exp(a X_t)] = exp(t psi(a))`, together with analytic first and second
//! derivatives.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance an argument must keep from a finite endpoint of `A`.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// Open interval `(lower, upper)` of admissible exponent arguments.
///
/// Always contains the origin. Endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < 0.0 && 0.0 < upper) {
            return Err(Error::InvalidInput(format!(
                "interval ({lower}, {upper}) must contain the origin"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Membership in the open interval, ignoring the evaluation margin.
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }

    /// Membership at least `DOMAIN_MARGIN * max(1, |endpoint|)` inside every
    /// finite endpoint.
    pub fn contains_strictly(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let lower_ok = if self.lower.is_finite() {
            x > self.lower + DOMAIN_MARGIN * self.lower.abs().max(1.0)
        } else {
            true
        };
        let upper_ok = if self.upper.is_finite() {
            x < self.upper - DOMAIN_MARGIN * self.upper.abs().max(1.0)
        } else {
            true
        };
        lower_ok && upper_ok
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains_strictly(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                alpha: x,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// The interval `{-x : x in self}`.
    pub fn reflect(&self) -> Self {
        Self {
            lower: -self.upper,
            upper: -self.lower,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

/// Names of the process families, as they appear in model JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Brownian,
    Poisson,
    CompoundPoissonNormal,
    /// Brownian motion plus normal-jump compound Poisson. Only available as a
    /// two-component vector model (see `multifactor`).
    JumpDiffusion,
    Gamma,
    ScaledGamma,
    VarianceGamma,
    AsymmetricVg,
    NegativeBinomial,
}

impl FamilyKind {
    /// The eight scalar families.
    pub const SCALAR: [FamilyKind; 8] = [
        FamilyKind::Brownian,
        FamilyKind::Poisson,
        FamilyKind::CompoundPoissonNormal,
        FamilyKind::Gamma,
        FamilyKind::ScaledGamma,
        FamilyKind::VarianceGamma,
        FamilyKind::AsymmetricVg,
        FamilyKind::NegativeBinomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Brownian => "Brownian",
            FamilyKind::Poisson => "Poisson",
            FamilyKind::CompoundPoissonNormal => "CompoundPoissonNormal",
            FamilyKind::JumpDiffusion => "JumpDiffusion",
            FamilyKind::Gamma => "Gamma",
            FamilyKind::ScaledGamma => "ScaledGamma",
            FamilyKind::VarianceGamma => "VarianceGamma",
            FamilyKind::AsymmetricVg => "AsymmetricVG",
            FamilyKind::NegativeBinomial => "NegativeBinomial",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let kind = match name {
            "Brownian" => FamilyKind::Brownian,
            "Poisson" => FamilyKind::Poisson,
            "CompoundPoissonNormal" => FamilyKind::CompoundPoissonNormal,
            "JumpDiffusion" => FamilyKind::JumpDiffusion,
            "Gamma" => FamilyKind::Gamma,
            "ScaledGamma" => FamilyKind::ScaledGamma,
            "VarianceGamma" => FamilyKind::VarianceGamma,
            "AsymmetricVG" => FamilyKind::AsymmetricVg,
            "NegativeBinomial" => FamilyKind::NegativeBinomial,
            other => return Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        };
        Ok(kind)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scalar process family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Standard Brownian motion, `psi(a) = a^2/2`.
    Brownian,
    /// Poisson process with jump rate `rate`.
    Poisson { rate: f64 },
    /// Compound Poisson with `N(0, jump_std^2)` jumps arriving at `rate`.
    CompoundPoissonNormal { rate: f64, jump_std: f64 },
    /// Standard gamma process, mean and variance `rate * t`.
    Gamma { rate: f64 },
    /// `scale` times a standard gamma process.
    ScaledGamma { rate: f64, scale: f64 },
    /// Symmetric variance gamma with unit variance rate.
    VarianceGamma { rate: f64 },
    /// Drifted variance gamma `drift * G_t + vol * W(G_t)`.
    AsymmetricVg { rate: f64, drift: f64, vol: f64 },
    /// Negative binomial process with success probability `q`.
    NegativeBinomial { rate: f64, q: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Brownian => FamilyKind::Brownian,
            Family::Poisson { .. } => FamilyKind::Poisson,
            Family::CompoundPoissonNormal { .. } => FamilyKind::CompoundPoissonNormal,
            Family::Gamma { .. } => FamilyKind::Gamma,
            Family::ScaledGamma { .. } => FamilyKind::ScaledGamma,
            Family::VarianceGamma { .. } => FamilyKind::VarianceGamma,
            Family::AsymmetricVg { .. } => FamilyKind::AsymmetricVg,
            Family::NegativeBinomial { .. } => FamilyKind::NegativeBinomial,
        }
    }

    /// Families whose law is invariant under `x -> -x`.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            Family::Brownian | Family::CompoundPoissonNormal { .. } | Family::VarianceGamma { .. }
        )
    }

    /// `(kappa_1, kappa_2)` of the asymmetric VG gamma-difference form
    /// `kappa_1 g1 - kappa_2 g2`.
    pub fn avg_scales(rate: f64, drift: f64, vol: f64) -> (f64, f64) {
        let root = (drift * drift + 2.0 * rate * vol * vol).sqrt();
        ((drift + root) / (2.0 * rate), (-drift + root) / (2.0 * rate))
    }

    fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, value: f64) -> Result<()> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::ParamOutOfRange {
                    name,
                    value,
                    constraint: "> 0",
                })
            }
        }
        match *self {
            Family::Brownian => Ok(()),
            Family::Poisson { rate }
            | Family::Gamma { rate }
            | Family::VarianceGamma { rate } => positive("m", rate),
            Family::CompoundPoissonNormal { rate, jump_std } => {
                positive("m", rate)?;
                positive("s", jump_std)
            }
            Family::ScaledGamma { rate, scale } => {
                positive("m", rate)?;
                positive("kappa", scale)
            }
            Family::AsymmetricVg { rate, drift, vol } => {
                positive("m", rate)?;
                positive("s", vol)?;
                if drift.is_finite() {
                    Ok(())
                } else {
                    Err(Error::ParamOutOfRange {
                        name: "mu",
                        value: drift,
                        constraint: "finite",
                    })
                }
            }
            Family::NegativeBinomial { rate, q } => {
                positive("m", rate)?;
                if q > 0.0 && q < 1.0 {
                    Ok(())
                } else {
                    Err(Error::ParamOutOfRange {
                        name: "q",
                        value: q,
                        constraint: "in (0, 1)",
                    })
                }
            }
        }
    }

    fn domain(&self) -> Interval {
        let (lower, upper) = match *self {
            Family::Brownian | Family::Poisson { .. } | Family::CompoundPoissonNormal { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Family::Gamma { .. } => (f64::NEG_INFINITY, 1.0),
            Family::ScaledGamma { scale, .. } => (f64::NEG_INFINITY, 1.0 / scale),
            Family::VarianceGamma { rate } => {
                let edge = (2.0 * rate).sqrt();
                (-edge, edge)
            }
            Family::AsymmetricVg { rate, drift, vol } => {
                let (k1, k2) = Family::avg_scales(rate, drift, vol);
                (-1.0 / k2, 1.0 / k1)
            }
            Family::NegativeBinomial { q, .. } => (f64::NEG_INFINITY, -q.ln()),
        };
        Interval { lower, upper }
    }

    fn psi(&self, a: f64) -> f64 {
        match *self {
            Family::Brownian => 0.5 * a * a,
            Family::Poisson { rate } => rate * a.exp_m1(),
            Family::CompoundPoissonNormal { rate, jump_std } => {
                rate * (0.5 * jump_std * jump_std * a * a).exp_m1()
            }
            Family::Gamma { rate } => -rate * (-a).ln_1p(),
            Family::ScaledGamma { rate, scale } => -rate * (-a * scale).ln_1p(),
            Family::VarianceGamma { rate } => -rate * (-a * a / (2.0 * rate)).ln_1p(),
            Family::AsymmetricVg { rate, drift, vol } => {
                // 1 - (mu/m) a - (s^2/2m) a^2 = (1 - k1 a)(1 + k2 a)
                let (k1, k2) = Family::avg_scales(rate, drift, vol);
                -rate * ((-k1 * a).ln_1p() + (k2 * a).ln_1p())
            }
            Family::NegativeBinomial { rate, q } => rate * ((-q).ln_1p() - (-q * a.exp()).ln_1p()),
        }
    }

    fn psi_prime(&self, a: f64) -> f64 {
        match *self {
            Family::Brownian => a,
            Family::Poisson { rate } => rate * a.exp(),
            Family::CompoundPoissonNormal { rate, jump_std } => {
                let s2 = jump_std * jump_std;
                rate * s2 * a * (0.5 * s2 * a * a).exp()
            }
            Family::Gamma { rate } => rate / (1.0 - a),
            Family::ScaledGamma { rate, scale } => rate * scale / (1.0 - a * scale),
            Family::VarianceGamma { rate } => a / (1.0 - a * a / (2.0 * rate)),
            Family::AsymmetricVg { rate, drift, vol } => {
                let u = 1.0 - drift / rate * a - vol * vol / (2.0 * rate) * a * a;
                (drift + vol * vol * a) / u
            }
            Family::NegativeBinomial { rate, q } => {
                let qe = q * a.exp();
                rate * qe / (1.0 - qe)
            }
        }
    }

    fn psi_second(&self, a: f64) -> f64 {
        match *self {
            Family::Brownian => 1.0,
            Family::Poisson { rate } => rate * a.exp(),
            Family::CompoundPoissonNormal { rate, jump_std } => {
                let s2 = jump_std * jump_std;
                rate * s2 * (1.0 + s2 * a * a) * (0.5 * s2 * a * a).exp()
            }
            Family::Gamma { rate } => rate / ((1.0 - a) * (1.0 - a)),
            Family::ScaledGamma { rate, scale } => {
                let d = 1.0 - a * scale;
                rate * scale * scale / (d * d)
            }
            Family::VarianceGamma { rate } => {
                let x = a * a / (2.0 * rate);
                (1.0 + x) / ((1.0 - x) * (1.0 - x))
            }
            Family::AsymmetricVg { rate, drift, vol } => {
                let s2 = vol * vol;
                let u = 1.0 - drift / rate * a - s2 / (2.0 * rate) * a * a;
                let g = drift + s2 * a;
                (s2 * u + g * g / rate) / (u * u)
            }
            Family::NegativeBinomial { rate, q } => {
                let qe = q * a.exp();
                rate * qe / ((1.0 - qe) * (1.0 - qe))
            }
        }
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            Family::Brownian => vec![],
            Family::Poisson { rate } | Family::Gamma { rate } | Family::VarianceGamma { rate } => {
                vec![("m", rate)]
            }
            Family::CompoundPoissonNormal { rate, jump_std } => vec![("m", rate), ("s", jump_std)],
            Family::ScaledGamma { rate, scale } => vec![("m", rate), ("kappa", scale)],
            Family::AsymmetricVg { rate, drift, vol } => {
                vec![("m", rate), ("mu", drift), ("s", vol)]
            }
            Family::NegativeBinomial { rate, q } => vec![("m", rate), ("q", q)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// A validated Lévy exponent: family, parameters, orientation and domain.
///
/// Immutable once built. `mirrored` models use `psi(-a)` in place of
/// `psi(a)`, i.e. they describe the process `-X_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct LevyModel {
    family: Family,
    mirrored: bool,
    domain: Interval,
}

impl LevyModel {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self {
            family,
            mirrored: false,
            domain: family.domain(),
        })
    }

    pub fn brownian() -> Self {
        Self::new(Family::Brownian).expect("Brownian has no parameters")
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(Family::Poisson { rate })
    }

    pub fn compound_poisson_normal(rate: f64, jump_std: f64) -> Result<Self> {
        Self::new(Family::CompoundPoissonNormal { rate, jump_std })
    }

    pub fn gamma(rate: f64) -> Result<Self> {
        Self::new(Family::Gamma { rate })
    }

    pub fn scaled_gamma(rate: f64, scale: f64) -> Result<Self> {
        Self::new(Family::ScaledGamma { rate, scale })
    }

    pub fn variance_gamma(rate: f64) -> Result<Self> {
        Self::new(Family::VarianceGamma { rate })
    }

    pub fn asymmetric_vg(rate: f64, drift: f64, vol: f64) -> Result<Self> {
        Self::new(Family::AsymmetricVg { rate, drift, vol })
    }

    pub fn negative_binomial(rate: f64, q: f64) -> Result<Self> {
        Self::new(Family::NegativeBinomial { rate, q })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// `+1` for the process itself, `-1` for its mirror image.
    fn orientation(&self) -> f64 {
        if self.mirrored {
            -1.0
        } else {
            1.0
        }
    }

    pub fn psi(&self, alpha: f64) -> Result<f64> {
        self.domain.check(alpha)?;
        Ok(self.family.psi(self.orientation() * alpha))
    }

    pub fn psi_prime(&self, alpha: f64) -> Result<f64> {
        self.domain.check(alpha)?;
        let o = self.orientation();
        Ok(o * self.family.psi_prime(o * alpha))
    }

    pub fn psi_second(&self, alpha: f64) -> Result<f64> {
        self.domain.check(alpha)?;
        Ok(self.family.psi_second(self.orientation() * alpha))
    }

    /// Exponent of the mirror process `-X_t`: `psi~(a) = psi(-a)` on the
    /// reflected domain. Symmetric families are their own mirror.
    pub fn mirror(&self) -> Self {
        if self.family.is_symmetric() {
            return *self;
        }
        Self {
            family: self.family,
            mirrored: !self.mirrored,
            domain: self.domain.reflect(),
        }
    }

    /// Sign of the jumps for one-sided jump processes: `Some(1.0)` when all
    /// jumps are upward, `Some(-1.0)` when all are downward.
    pub fn jump_direction(&self) -> Option<f64> {
        match self.family {
            Family::Poisson { .. }
            | Family::Gamma { .. }
            | Family::ScaledGamma { .. }
            | Family::NegativeBinomial { .. } => Some(self.orientation()),
            _ => None,
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            family: self.kind().name().to_string(),
            params: self.family.params(),
            mirrored: self.mirrored,
        }
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mirrored {
            f.write_str("mirror ")?;
        }
        write!(f, "{}", self.kind())?;
        let params = self.family.params();
        if !params.is_empty() {
            let list: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", list.join(", "))?;
        }
        Ok(())
    }
}

/// JSON form of a model: `{"family": "...", "params": {"m": 1.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mirrored: bool,
}

impl TryFrom<ModelSpec> for LevyModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let kind = FamilyKind::from_name(&spec.family)?;
        let model = make_model(kind, &spec.params)?;
        Ok(if spec.mirrored { model.mirror() } else { model })
    }
}

impl From<LevyModel> for ModelSpec {
    fn from(model: LevyModel) -> Self {
        model.to_spec()
    }
}

/// Builds a validated model from a family name and named parameters.
pub fn make_model(kind: FamilyKind, params: &BTreeMap<String, f64>) -> Result<LevyModel> {
    let expected: &[&str] = match kind {
        FamilyKind::Brownian => &[],
        FamilyKind::Poisson | FamilyKind::Gamma | FamilyKind::VarianceGamma => &["m"],
        FamilyKind::CompoundPoissonNormal => &["m", "s"],
        FamilyKind::ScaledGamma => &["m", "kappa"],
        FamilyKind::AsymmetricVg => &["m", "mu", "s"],
        FamilyKind::NegativeBinomial => &["m", "q"],
        FamilyKind::JumpDiffusion => {
            return Err(Error::Unsupported(
                "JumpDiffusion is a two-component vector model; build it with VectorGlm::jump_diffusion"
                    .into(),
            ))
        }
    };
    if let Some(extra) = params.keys().find(|k| !expected.contains(&k.as_str())) {
        return Err(Error::InvalidInput(format!(
            "unexpected parameter `{extra}` for {kind}"
        )));
    }
    let get = |name: &str| -> Result<f64> {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("{kind} requires parameter `{name}`")))
    };
    let family = match kind {
        FamilyKind::Brownian => Family::Brownian,
        FamilyKind::Poisson => Family::Poisson { rate: get("m")? },
        FamilyKind::CompoundPoissonNormal => Family::CompoundPoissonNormal {
            rate: get("m")?,
            jump_std: get("s")?,
        },
        FamilyKind::Gamma => Family::Gamma { rate: get("m")? },
        FamilyKind::ScaledGamma => Family::ScaledGamma {
            rate: get("m")?,
            scale: get("kappa")?,
        },
        FamilyKind::VarianceGamma => Family::VarianceGamma { rate: get("m")? },
        FamilyKind::AsymmetricVg => Family::AsymmetricVg {
            rate: get("m")?,
            drift: get("mu")?,
            vol: get("s")?,
        },
        FamilyKind::NegativeBinomial => Family::NegativeBinomial {
            rate: get("m")?,
            q: get("q")?,
        },
        FamilyKind::JumpDiffusion => unreachable!(),
    };
    LevyModel::new(family)
}

/// Representative parameter sets, one per scalar family.
pub fn default_model(kind: FamilyKind) -> Result<LevyModel> {
    match kind {
        FamilyKind::Brownian => Ok(LevyModel::brownian()),
        FamilyKind::Poisson => LevyModel::poisson(1.0),
        FamilyKind::CompoundPoissonNormal => LevyModel::compound_poisson_normal(1.0, 0.5),
        FamilyKind::Gamma => LevyModel::gamma(1.0),
        FamilyKind::ScaledGamma => LevyModel::scaled_gamma(2.0, 0.5),
        FamilyKind::VarianceGamma => LevyModel::variance_gamma(2.0),
        FamilyKind::AsymmetricVg => LevyModel::asymmetric_vg(2.0, 0.1, 0.3),
        FamilyKind::NegativeBinomial => LevyModel::negative_binomial(1.0, 0.5),
        FamilyKind::JumpDiffusion => make_model(kind, &BTreeMap::new()),
    }
}
