//! Closed-form curves of the single-period market: demand, the minimum
//! capital requirement (MCR), the minimum premium requirement (MPR), their
//! intersections and the expected-profit function.
//!
//! Policy counts are real numbers throughout (continuum approximation).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::params::{CurvePoint, MarketParams, Penalty};

/// Relative slack used when testing `MCR <= C` at curve intersections, where
/// the two sides agree only up to rounding.
pub const SOLVENCY_TOL: f64 = 1e-9;

/// Demand `alpha^2 / P^2`, capped at the net-premium maximum below `qK`.
pub fn demand(params: &MarketParams, premium: f64) -> Result<f64> {
    if !(premium > 0.0) || !premium.is_finite() {
        return domain(format!("premium must be positive, got {premium}"));
    }
    if premium <= params.net_premium() {
        return Ok(params.max_demand());
    }
    Ok(params.alpha * params.alpha / (premium * premium))
}

/// Demand `alpha^2 / P^2` without the cap below `qK`. Payoff tables that
/// quote equal-share premiums below the net premium use this form.
pub fn demand_curve(params: &MarketParams, premium: f64) -> Result<f64> {
    if !(premium > 0.0) || !premium.is_finite() {
        return domain(format!("premium must be positive, got {premium}"));
    }
    Ok(params.alpha * params.alpha / (premium * premium))
}

/// Inverse demand `alpha / sqrt(n)` for `0 < n <= N_max`.
pub fn inverse_demand(params: &MarketParams, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return domain(format!("policy count must be positive, got {n}"));
    }
    let n_max = params.max_demand();
    if n > n_max * (1.0 + 1e-12) {
        return domain(format!("policy count {n} exceeds maximum demand {n_max}"));
    }
    Ok(params.alpha / n.sqrt())
}

/// Minimum capital requirement `n(qK - P) + sqrt(n) * sigma`.
///
/// Negative values mean the premium income alone covers the quantile loss.
pub fn mcr(params: &MarketParams, n: f64, premium: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return domain(format!("policy count must be non-negative, got {n}"));
    }
    Ok(n * (params.net_premium() - premium) + n.sqrt() * params.sigma_term())
}

/// Value of the minimum premium requirement at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MprValue {
    pub premium: f64,
    /// The normal approximation produced a premium above the loss size,
    /// which has no economic meaning.
    pub above_loss: bool,
}

/// Minimum premium requirement `qK - C/n + sigma/sqrt(n)`.
pub fn mpr(params: &MarketParams, n: f64, capital: f64) -> Result<MprValue> {
    if !(n > 0.0) {
        return domain(format!("policy count must be positive, got {n}"));
    }
    let premium = params.net_premium() - capital / n + params.sigma_term() / n.sqrt();
    Ok(MprValue {
        premium,
        above_loss: premium > params.loss,
    })
}

/// Peak of the MPR curve: `n* = 4C^2 / sigma^2`, `P* = qK + sigma^2 / (4C)`.
pub fn mpr_max(params: &MarketParams, capital: f64) -> Result<CurvePoint> {
    if !(capital > 0.0) {
        return domain(format!("capital must be positive, got {capital}"));
    }
    let s = params.sigma_term();
    Ok(CurvePoint {
        premium: params.net_premium() + s * s / (4.0 * capital),
        n: 4.0 * capital * capital / (s * s),
    })
}

/// Intersection of the demand curve with scale `alpha_eff` and the MPR curve
/// of the given capital.
///
/// Solves `qK n + sqrt(n)(sigma - alpha_eff) - C = 0` for the positive root
/// in `sqrt(n)`; the other root is always negative.
pub fn intersection(params: &MarketParams, capital: f64, alpha_eff: f64) -> Result<CurvePoint> {
    if !(capital > 0.0) {
        return domain(format!("capital must be positive, got {capital}"));
    }
    if !(alpha_eff > 0.0) {
        return domain(format!("demand scale must be positive, got {alpha_eff}"));
    }
    let qk = params.net_premium();
    let e = params.sigma_term() - alpha_eff;
    let root = (e * e + 4.0 * qk * capital).sqrt();
    // -e + root, written without cancellation when e > 0
    let denom = if e > 0.0 {
        4.0 * qk * capital / (e + root)
    } else {
        root - e
    };
    let sqrt_n = denom / (2.0 * qk);
    Ok(CurvePoint {
        premium: 2.0 * alpha_eff * qk / denom,
        n: sqrt_n * sqrt_n,
    })
}

/// Point where one firm serving the whole market meets its MPR curve.
pub fn full_market_point(params: &MarketParams, capital: f64) -> Result<CurvePoint> {
    intersection(params, capital, params.alpha)
}

/// Lowest premium at which a firm with this capital can serve the whole
/// market solvently.
pub fn full_market_premium(params: &MarketParams, capital: f64) -> Result<f64> {
    Ok(full_market_point(params, capital)?.premium)
}

/// Point where a firm serving `1/firms` of demand meets its MPR curve.
pub fn share_point(params: &MarketParams, capital: f64, firms: u32) -> Result<CurvePoint> {
    if firms < 1 {
        return domain("number of firms must be at least 1");
    }
    let alpha = if firms == 1 {
        params.alpha
    } else {
        params.alpha / f64::from(firms).sqrt()
    };
    intersection(params, capital, alpha)
}

/// Lowest premium at which a firm serving an equal `1/firms` share is solvent.
pub fn share_premium(params: &MarketParams, capital: f64, firms: u32) -> Result<f64> {
    Ok(share_point(params, capital, firms)?.premium)
}

/// Premium maximising the technical result without a capital constraint, `2qK`.
pub fn technical_optimum_premium(params: &MarketParams) -> f64 {
    2.0 * params.net_premium()
}

/// Which side of the MPR peak an intersection lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Increasing,
    Decreasing,
}

/// Branch of the MPR curve hit by the `1/firms` demand curve.
pub fn branch_of_intersection(params: &MarketParams, capital: f64, firms: u32) -> Result<Branch> {
    let hit = share_point(params, capital, firms)?;
    let peak = mpr_max(params, capital)?;
    Ok(if hit.n < peak.n {
        Branch::Increasing
    } else {
        Branch::Decreasing
    })
}

/// Technical result `n(P - qK)`.
pub fn technical_result(params: &MarketParams, premium: f64, n: f64) -> f64 {
    n * (premium - params.net_premium())
}

/// Expected profit of one firm, split into its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profit {
    pub technical: f64,
    pub interest: f64,
    /// `MCR(n, P) <= C`.
    pub solvent: bool,
}

impl Profit {
    /// Profit before any penalty, `n(P - qK) - rC`.
    pub fn before_penalty(&self) -> f64 {
        self.technical - self.interest
    }

    /// Numeric profit. A penalised outcome is `-inf` unless a finite penalty
    /// amount is configured.
    pub fn value(&self, penalty: &Penalty) -> f64 {
        if self.solvent {
            self.before_penalty()
        } else {
            match penalty.amount {
                Some(a) => self.before_penalty() - a,
                None => f64::NEG_INFINITY,
            }
        }
    }

    /// Ordering under penalty dominance: any solvent outcome beats any
    /// penalised one.
    pub fn better_than(&self, other: &Profit, tol: f64) -> bool {
        match (self.solvent, other.solvent) {
            (true, false) => true,
            (false, true) => false,
            _ => self.before_penalty() > other.before_penalty() + tol,
        }
    }
}

/// Whether a firm with `capital` selling `n` policies at `premium` meets the
/// requirement, with [`SOLVENCY_TOL`] slack.
pub fn is_solvent(params: &MarketParams, capital: f64, premium: f64, n: f64) -> Result<bool> {
    let req = mcr(params, n, premium)?;
    Ok(req <= capital + SOLVENCY_TOL * capital.abs().max(1.0))
}

/// Expected profit `n(P - qK) - rC`, flagged insolvent when `MCR(n, P) > C`.
pub fn expected_profit(params: &MarketParams, capital: f64, premium: f64, n: f64) -> Result<Profit> {
    Ok(Profit {
        technical: technical_result(params, premium, n),
        interest: params.rate * capital,
        solvent: is_solvent(params, capital, premium, n)?,
    })
}

/// Profit along the MPR curve, `-(1 + r)C + sqrt(n) sigma`.
pub fn profit_along_mpr(params: &MarketParams, capital: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return domain(format!("policy count must be positive, got {n}"));
    }
    if !(capital > 0.0) {
        return domain(format!("capital must be positive, got {capital}"));
    }
    Ok(-(1.0 + params.rate) * capital + n.sqrt() * params.sigma_term())
}
