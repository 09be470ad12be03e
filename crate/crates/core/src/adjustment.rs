//! Ex-post capital adjustment: a firm may raise capital after quoting a
//! premium, at a fixed cost `B` plus interest on the new capital.

use serde::{Deserialize, Serialize};

use crate::equilibrium::PremiumGrid;
use crate::error::{domain, Error, Result};
use crate::market::{demand, demand_curve, full_market_premium, mcr, share_premium, technical_result};
use crate::numeric::{bisect, quadratic_roots};
use crate::params::{CurvePoint, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdjustmentRegime {
    NoAdjustment,
    NoPureNeContinuous,
    DiscreteLeaderNe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentOutcome {
    /// Premium where demand, the zero-profit curve and the adjusted MPR
    /// curve meet. `None` stands for "infinitely high".
    pub p_1z: Option<f64>,
    pub delta_c_at_p1z: Option<f64>,
    pub regime: AdjustmentRegime,
    pub leader_premium: Option<f64>,
    pub follower_premium: Option<f64>,
    /// In grid mode: no firm gains from any unilateral grid move or from
    /// withdrawing. Coarse grids can fail this.
    pub deviation_proof: Option<bool>,
}

/// Result of the triple-intersection search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleIntersection {
    pub premium: Option<f64>,
    pub delta_c: Option<f64>,
    pub n: Option<f64>,
    /// The quadratic had two admissible roots; the smaller was kept.
    pub multiple_roots: bool,
}

/// Zero-profit curve `(B + r dC) / (P - qK)`.
pub fn zp_curve(params: &MarketParams, delta_c: f64, premium: f64) -> Result<f64> {
    if !(premium > params.net_premium()) {
        return domain(format!(
            "zero-profit curve undefined at premium {premium} <= qK = {}",
            params.net_premium()
        ));
    }
    if !(delta_c >= 0.0) {
        return domain(format!("capital change must be non-negative, got {delta_c}"));
    }
    Ok((params.adjust_cost + params.rate * delta_c) / (premium - params.net_premium()))
}

/// Meeting point of the zero-profit curve with the MPR curve of capital
/// `C + dC`.
pub fn zp_mpr_intersection(params: &MarketParams, capital: f64, delta_c: f64) -> Result<CurvePoint> {
    if !(capital > 0.0) {
        return domain(format!("capital must be positive, got {capital}"));
    }
    if !(delta_c >= 0.0) {
        return domain(format!("capital change must be non-negative, got {delta_c}"));
    }
    let b = params.adjust_cost;
    let r = params.rate;
    let root_n = (b + capital + (1.0 + r) * delta_c) / params.sigma_term();
    let n = root_n * root_n;
    Ok(CurvePoint {
        premium: params.net_premium() + (b + r * delta_c) / n,
        n,
    })
}

/// Smallest `dC >= 0` at which the zero-profit/MPR point lies on demand.
///
/// With `u = B + C + (1+r) dC` the condition `sqrt(n) P = alpha` becomes
/// `qK u^2 + (sigma^2 r/(1+r) - alpha sigma) u + sigma^2 (B - rC)/(1+r) = 0`.
pub fn solve_p1z(params: &MarketParams, capital: f64) -> Result<TripleIntersection> {
    if !(capital > 0.0) {
        return domain(format!("capital must be positive, got {capital}"));
    }
    let (a, b, c) = p1z_coefficients(params, capital);
    let u_min = params.adjust_cost + capital;
    let admissible: Vec<f64> = quadratic_roots(a, b, c)
        .into_iter()
        .filter(|u| *u >= u_min * (1.0 - 1e-12))
        .collect();
    let Some(&u) = admissible.first() else {
        return Ok(TripleIntersection {
            premium: None,
            delta_c: None,
            n: None,
            multiple_roots: false,
        });
    };
    let delta_c = ((u - u_min) / (1.0 + params.rate)).max(0.0);
    let point = zp_mpr_intersection(params, capital, delta_c)?;

    if let Some(check) = solve_p1z_bisection(params, capital)? {
        let gap = (check - delta_c).abs();
        if gap > 1e-6 * delta_c.abs().max(1.0) && admissible.len() == 1 {
            return Err(Error::Numeric(format!(
                "triple intersection disagrees with bisection: {delta_c} vs {check}"
            )));
        }
    }
    Ok(TripleIntersection {
        premium: Some(point.premium),
        delta_c: Some(delta_c),
        n: Some(point.n),
        multiple_roots: admissible.len() > 1,
    })
}

fn p1z_coefficients(params: &MarketParams, capital: f64) -> (f64, f64, f64) {
    let s = params.sigma_term();
    let r = params.rate;
    (
        params.net_premium(),
        s * s * r / (1.0 + r) - params.alpha * s,
        s * s * (params.adjust_cost - r * capital) / (1.0 + r),
    )
}

/// Capital change at the first sign change of `n_ZMPR(dC) - D(P_ZMPR(dC))`,
/// found by scanning and bisection. Misses tangential contacts.
pub fn solve_p1z_bisection(params: &MarketParams, capital: f64) -> Result<Option<f64>> {
    let gap = |dc: f64| -> f64 {
        match zp_mpr_intersection(params, capital, dc) {
            Ok(pt) => pt.n - params.alpha * params.alpha / (pt.premium * pt.premium),
            Err(_) => f64::NAN,
        }
    };
    let (a, b, c) = p1z_coefficients(params, capital);
    let bound = (b.abs() + (b * b + 4.0 * a * c.abs()).sqrt()) / a;
    let u_min = params.adjust_cost + capital;
    let hi = ((bound - u_min).max(0.0) / (1.0 + params.rate)) * 1.5 + 1.0;
    let steps = 4096;
    let mut prev_x = 0.0;
    let mut prev = gap(0.0);
    if prev == 0.0 {
        return Ok(Some(0.0));
    }
    for i in 1..=steps {
        let x = hi * i as f64 / steps as f64;
        let v = gap(x);
        if v == 0.0 {
            return Ok(Some(x));
        }
        if v.signum() != prev.signum() {
            return bisect(gap, prev_x, x, 1e-14).map(Some);
        }
        prev_x = x;
        prev = v;
    }
    Ok(None)
}

/// Profit when a shortfall `MCR - C > 0` is closed by raising capital:
/// `n(P - qK) - rC - B - r(MCR - C)`.
pub fn adjusted_profit(params: &MarketParams, capital: f64, premium: f64, n: f64) -> Result<f64> {
    let base = technical_result(params, premium, n) - params.rate * capital;
    let required = mcr(params, n, premium)?;
    Ok(if required > capital {
        base - params.adjust_cost - params.rate * (required - capital)
    } else {
        base
    })
}

/// Adjusted profits of every firm. Lowest quote wins, ties split equally,
/// `f64::INFINITY` sells nothing.
pub fn adjusted_firm_profits(params: &MarketParams, capitals: &[f64], premiums: &[f64]) -> Result<Vec<f64>> {
    if capitals.len() != premiums.len() || capitals.is_empty() {
        return domain("capitals and premiums must be non-empty and of equal length");
    }
    let min = premiums.iter().cloned().fold(f64::INFINITY, f64::min);
    let winners = premiums.iter().filter(|p| **p == min).count();
    capitals
        .iter()
        .zip(premiums)
        .map(|(&c, &p)| {
            if p == min && p.is_finite() {
                adjusted_profit(params, c, p, demand(params, p)? / winners as f64)
            } else {
                Ok(-params.rate * c)
            }
        })
        .collect()
}

/// No firm gains, under adjusted profits, by moving to another grid
/// premium or withdrawing.
pub fn is_adjusted_grid_equilibrium(
    params: &MarketParams,
    capitals: &[f64],
    quotes: &[f64],
    grid: &PremiumGrid,
) -> Result<bool> {
    let base = adjusted_firm_profits(params, capitals, quotes)?;
    for firm in 0..capitals.len() {
        for &alt in grid.premiums().iter().chain(std::iter::once(&f64::INFINITY)) {
            if alt == quotes[firm] {
                continue;
            }
            let mut trial = quotes.to_vec();
            trial[firm] = alt;
            let dev = adjusted_firm_profits(params, capitals, &trial)?[firm];
            if dev > base[firm] + 1e-9 * base[firm].abs().max(1.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Equilibrium of `firms` equal firms when capital may be raised after pricing.
pub fn expost_equilibrium(
    params: &MarketParams,
    capital: f64,
    firms: u32,
    grid: Option<&PremiumGrid>,
) -> Result<AdjustmentOutcome> {
    if firms < 2 {
        return domain("need at least two firms");
    }
    let hit = solve_p1z(params, capital)?;
    let floor = full_market_premium(params, capital)?.min(share_premium(params, capital, firms)?);
    let mut out = AdjustmentOutcome {
        p_1z: hit.premium,
        delta_c_at_p1z: hit.delta_c,
        regime: AdjustmentRegime::NoAdjustment,
        leader_premium: None,
        follower_premium: None,
        deviation_proof: None,
    };
    let Some(p1z) = hit.premium else {
        return Ok(out);
    };
    if p1z >= floor {
        return Ok(out);
    }
    match grid {
        None => out.regime = AdjustmentRegime::NoPureNeContinuous,
        Some(g) => {
            let j = g
                .first_at_or_above(p1z)
                .ok_or_else(|| Error::Domain(format!("premium grid ends below the triple intersection {p1z}")))?;
            let next = g
                .premiums()
                .get(j + 1)
                .copied()
                .ok_or_else(|| Error::Domain("premium grid has no step above the leader premium".into()))?;
            out.regime = AdjustmentRegime::DiscreteLeaderNe;
            out.leader_premium = Some(g.premiums()[j]);
            out.follower_premium = Some(next);
            let capitals = vec![capital; firms as usize];
            let mut quotes = vec![next; firms as usize];
            quotes[0] = g.premiums()[j];
            out.deviation_proof = Some(is_adjusted_grid_equilibrium(params, &capitals, &quotes, g)?);
        }
    }
    Ok(out)
}

/// Demand minus the policy count on the zero-profit/MPR locus, as a function
/// of the capital change. Exposed for plotting.
pub fn zp_demand_gap(params: &MarketParams, capital: f64, delta_c: f64) -> Result<f64> {
    let pt = zp_mpr_intersection(params, capital, delta_c)?;
    Ok(demand_curve(params, pt.premium)? - pt.n)
}
