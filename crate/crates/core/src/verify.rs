//! Invariant suite for a single-factor spec, as run by `glm verify`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::options::{exact_call_price, mc_call_price, OptionSpec};
use crate::premium::{
    curvature_from_premium, inverse_fx_premium, premium_gradient, premium_identity_check,
    premium_via_levy_measure, risk_premium, Sign,
};
use crate::pricing::GlmSpec;
use crate::sampling::{mc_mean, IncrementSampler, SimRng};

/// Default Monte Carlo size per check.
pub const DEFAULT_PATHS: usize = 200_000;
/// Default seed for every randomised command.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub seed: u64,
    pub horizon: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: DEFAULT_PATHS,
            seed: DEFAULT_SEED,
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Self::new(name, true, format!("skipped: {}", why.into()))
    }

    fn from_result(name: &str, res: Result<Check>) -> Self {
        res.unwrap_or_else(|e| Check::new(name, false, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn from_checks(model: String, checks: Vec<Check>) -> Self {
        Self {
            model,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    /// Report for a spec that failed validation before any check could run.
    pub fn rejected(err: &Error) -> Self {
        let name = match err {
            Error::DomainViolation { .. } => "domain",
            _ => "spec",
        };
        Self::from_checks("invalid".into(), vec![Check::new(name, false, err.to_string())])
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs every applicable check on `spec`.
pub fn verify_spec(spec: &GlmSpec, opts: &VerifyOptions) -> VerifyReport {
    let model = *spec.model();
    let (lambda, sigma) = (spec.lambda(), spec.sigma());
    let mut checks = Vec::new();

    checks.push(Check::from_result("origin", (|| {
        let k = spec.kernel_value(0.0, 0.0)?;
        let s = spec.asset_value(0.0, 0.0)?;
        Ok(Check::new(
            "origin",
            k == 1.0 && s == spec.s0(),
            format!("pi_0 = {k}, S_0 = {s}"),
        ))
    })()));

    checks.push(if lambda == 0.0 {
        Check::skipped("premium_positive", "lambda = 0")
    } else {
        Check::from_result("premium_positive", (|| {
            let r = risk_premium(&model, lambda, sigma)?;
            let (dl, ds) = premium_gradient(&model, lambda, sigma)?;
            Ok(Check::new(
                "premium_positive",
                r > 0.0 && dl > 0.0 && ds > 0.0,
                format!("R = {r:e}, dR/dlambda = {dl:e}, dR/dsigma = {ds:e}"),
            ))
        })())
    });

    let fx_defined = model.domain().contains(-sigma) && lambda > 0.0;
    if fx_defined {
        checks.push(Check::from_result("premium_identity", (|| {
            let gap = premium_identity_check(&model, lambda, sigma)?;
            let scale = 1.0 + model.psi(sigma)?.abs() + model.psi(-sigma)?.abs();
            Ok(Check::new(
                "premium_identity",
                gap.abs() <= 1e-12 * scale,
                format!("R + R~ - psi(sigma) - psi(-sigma) = {gap:e}"),
            ))
        })()));
        checks.push(Check::from_result("fx_sign", (|| {
            let rt = inverse_fx_premium(&model, lambda, sigma)?;
            let want = Sign::of(sigma - lambda, 1e-12);
            let got = Sign::of(rt, 1e-12);
            Ok(Check::new(
                "fx_sign",
                got == want,
                format!(
                    "R~ = {rt:e}, sigma - lambda = {:e}; both rates earn a positive premium: {}",
                    sigma - lambda,
                    got == Sign::Positive
                ),
            ))
        })()));
    } else {
        checks.push(Check::skipped("fx_sign", "-sigma outside the domain or lambda = 0"));
    }

    checks.push(match premium_via_levy_measure(&model, lambda, sigma) {
        Err(Error::Unsupported(why)) => Check::skipped("levy_measure", why),
        Err(e) => Check::new("levy_measure", false, e.to_string()),
        Ok(lk) => {
            let r = spec.premium();
            let ok = if r == 0.0 { lk.abs() < 1e-12 } else { rel_close(lk, r, 1e-8) };
            Check::new("levy_measure", ok, format!("integral form {lk:e} vs R {r:e}"))
        }
    });

    checks.push(Check::from_result("curvature", (|| {
        let fd = curvature_from_premium(&model, sigma)?;
        let exact = model.psi_second(sigma)?;
        Ok(Check::new(
            "curvature",
            rel_close(fd, exact, 1e-3),
            format!("mixed partial {fd:e} vs psi''(sigma) {exact:e}"),
        ))
    })()));

    let t = opts.horizon;
    let sampler = IncrementSampler::new(&model, t);
    for (stream, (label, alpha)) in [("-lambda", -lambda), ("sigma", sigma), ("sigma-lambda", sigma - lambda)]
        .into_iter()
        .enumerate()
    {
        let name = format!("martingale[{label}]");
        if !model.domain().contains(2.0 * alpha) {
            checks.push(Check::skipped(name, "second moment is infinite"));
            continue;
        }
        let sampler = match &sampler {
            Ok(s) => s,
            Err(e) => {
                checks.push(Check::new(name, false, e.to_string()));
                continue;
            }
        };
        checks.push(Check::from_result(&name, (|| {
            let comp = t * model.psi(alpha)?;
            let mut rng = SimRng::new(opts.seed, stream as u64);
            let mc = mc_mean(opts.n, &mut rng, |rng| Ok((alpha * sampler.sample(rng) - comp).exp()))?;
            Ok(Check::new(
                name.clone(),
                mc.within(1.0, 4.0),
                format!("mean {:.6} +- {:.2e} (n = {})", mc.estimate, mc.stderr, mc.n),
            ))
        })()));
    }

    checks.push(Check::from_result("asset_mean", (|| {
        if !model.domain().contains(2.0 * sigma) {
            return Ok(Check::skipped("asset_mean", "second moment is infinite"));
        }
        let sampler = IncrementSampler::new(&model, t)?;
        let mut rng = SimRng::new(opts.seed, 3);
        let mc = mc_mean(opts.n, &mut rng, |rng| spec.asset_value(sampler.sample(rng), t))?;
        let expected = spec.expected_asset_price(t)?;
        Ok(Check::new(
            "asset_mean",
            mc.within(expected, 4.0),
            format!("mean {:.6} +- {:.2e} vs {expected:.6}", mc.estimate, mc.stderr),
        ))
    })()));

    if spec.d0().is_some() {
        checks.push(Check::from_result("gordon", (|| {
            let g = spec.gordon_valuation()?;
            let d0 = spec.d0().expect("checked above");
            Ok(Check::new(
                "gordon",
                rel_close(g.s0_implied * g.delta, d0, 1e-12),
                format!("S_0 = {:.6}, delta = {:e}", g.s0_implied, g.delta),
            ))
        })()));
    }

    let opt = OptionSpec {
        strike: spec.s0(),
        expiry: t,
    };
    match exact_call_price(spec, &opt) {
        Err(Error::Unsupported(_)) => {}
        Err(e) => checks.push(Check::new("option", false, e.to_string())),
        Ok(exact) => checks.push(Check::from_result("option", (|| {
            let mut rng = SimRng::new(opts.seed, 4);
            let mc = mc_call_price(spec, &opt, opts.n.max(1000), &mut rng)?;
            Ok(Check::new(
                "option",
                mc.within(exact, 4.0),
                format!("exact {exact:.8} vs MC {:.6} +- {:.2e}", mc.estimate, mc.stderr),
            ))
        })())),
    }

    VerifyReport::from_checks(model.to_string(), checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{FamilyKind, LevyModel};
    use crate::pricing::default_spec;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            n: 20_000,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn default_specs_pass() {
        for kind in FamilyKind::SCALAR {
            let spec = default_spec(kind).unwrap();
            let report = verify_spec(&spec, &VerifyOptions::default());
            assert!(report.passed, "{kind}: {:#?}", report.checks);
        }
    }

    #[test]
    fn low_volatility_fx_reports_nonpositive_inverse_premium() {
        let spec = GlmSpec::new(LevyModel::brownian(), 0.02, 0.5, 0.3, 1.0).unwrap();
        let report = verify_spec(&spec, &quick());
        let fx = report.checks.iter().find(|c| c.name == "fx_sign").unwrap();
        assert!(fx.passed);
        assert!(fx.detail.ends_with("false"));
    }

    #[test]
    fn rejected_spec_fails() {
        let err = GlmSpec::new(LevyModel::gamma(1.0).unwrap(), 0.0, 0.1, 1.2, 1.0).unwrap_err();
        let report = VerifyReport::rejected(&err);
        assert!(!report.passed);
        assert_eq!(report.checks[0].name, "domain");
    }
}
