//! Premium competition between insurers under a risk-based solvency
//! capital requirement.

pub mod adjustment;
pub mod bimatrix;
pub mod equilibrium;
pub mod error;
pub mod exante;
pub mod market;
pub mod montecarlo;
pub mod numeric;
pub mod params;
pub mod sweep;

pub use error::{Error, Result};
pub use market::{Branch, Profit};
pub use params::{CapitalizedFirm, CurvePoint, MarketParams, Penalty, PHI_995};
