//! Exogenous market parameters shared by every curve and equilibrium routine.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Standard normal quantile at 0.995, the 99.5% one-year VaR level.
pub const PHI_995: f64 = 2.5758293035489004;

/// Regulatory penalty for breaching the capital requirement.
///
/// The penalty is always assumed to exceed any attainable profit, so a
/// penalised outcome is worse than every solvent one. The optional amount is
/// only used when a numeric profit figure is requested.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Penalty {
    pub amount: Option<f64>,
}

/// The exogenous tuple `(q, K, alpha, r, phi, A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Claim probability per policy.
    #[serde(rename = "q")]
    pub claim_prob: f64,
    /// Loss size per claim.
    #[serde(rename = "K")]
    pub loss: f64,
    /// Demand scale; demand is `alpha^2 / P^2`.
    pub alpha: f64,
    /// Interest rate charged on held capital.
    #[serde(rename = "r")]
    pub rate: f64,
    /// Solvency quantile.
    pub phi: f64,
    #[serde(default)]
    pub penalty: Penalty,
    /// Fixed cost of an ex-post capital increase.
    #[serde(rename = "B", default)]
    pub adjust_cost: f64,
}

impl MarketParams {
    /// Builds and validates a parameter set with the default quantile,
    /// a dominating penalty and zero adjustment cost.
    pub fn new(claim_prob: f64, loss: f64, alpha: f64, rate: f64) -> Result<Self> {
        let params = Self {
            claim_prob,
            loss,
            alpha,
            rate,
            phi: PHI_995,
            penalty: Penalty::default(),
            adjust_cost: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        self.phi = phi;
        self.validate()?;
        Ok(self)
    }

    pub fn with_adjust_cost(mut self, cost: f64) -> Result<Self> {
        self.adjust_cost = cost;
        self.validate()?;
        Ok(self)
    }

    pub fn with_penalty(mut self, amount: Option<f64>) -> Result<Self> {
        self.penalty = Penalty { amount };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.claim_prob,
            self.loss,
            self.alpha,
            self.rate,
            self.phi,
            self.adjust_cost,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return domain("market parameters must be finite");
        }
        if !(self.claim_prob > 0.0 && self.claim_prob < 1.0) {
            return domain(format!("q must lie in (0, 1), got {}", self.claim_prob));
        }
        if self.loss <= 0.0 {
            return domain(format!("K must be positive, got {}", self.loss));
        }
        if self.alpha <= 0.0 {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.rate < 0.0 {
            return domain(format!("r must be non-negative, got {}", self.rate));
        }
        if self.phi <= 0.0 {
            return domain(format!("phi must be positive, got {}", self.phi));
        }
        if self.adjust_cost < 0.0 {
            return domain(format!("B must be non-negative, got {}", self.adjust_cost));
        }
        if let Some(a) = self.penalty.amount {
            if !(a >= 0.0) {
                return domain(format!("penalty A must be non-negative, got {a}"));
            }
        }
        Ok(())
    }

    /// Net premium `qK`.
    #[inline]
    pub fn net_premium(&self) -> f64 {
        self.claim_prob * self.loss
    }

    /// Risk-margin scale `phi * sqrt(q(1-q)) * K`.
    #[inline]
    pub fn sigma_term(&self) -> f64 {
        self.phi * (self.claim_prob * (1.0 - self.claim_prob)).sqrt() * self.loss
    }

    /// Demand at the net premium, `alpha^2 / (qK)^2`.
    #[inline]
    pub fn max_demand(&self) -> f64 {
        let qk = self.net_premium();
        self.alpha * self.alpha / (qk * qk)
    }
}

/// A `(premium, policy count)` pair on one of the model's curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub premium: f64,
    pub n: f64,
}

/// A firm characterised by its (fixed) solvency capital.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapitalizedFirm {
    capital: f64,
}

impl CapitalizedFirm {
    pub fn new(capital: f64) -> Result<Self> {
        if !(capital >= 0.0) || !capital.is_finite() {
            return domain(format!("capital must be finite and >= 0, got {capital}"));
        }
        Ok(Self { capital })
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }

    /// True for a firm that was never founded.
    pub fn is_absent(&self) -> bool {
        self.capital == 0.0
    }
}
