//! Two-period game: firms pick founding capital, then compete on premium.
//! The second period is resolved by the worst-case equilibrium premium,
//! which turns the first period into a finite bimatrix game.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::equilibrium::LowerBoundRule;
use crate::error::{domain, Error, Result};
use crate::market::{demand_curve, full_market_premium, share_premium, technical_optimum_premium};
use crate::params::MarketParams;

/// Largest viable interest rate, `alpha / (sigma - alpha)`. Infinite when
/// `sigma <= alpha`: a firm can then break even without any capital.
pub fn max_viable_rate(params: &MarketParams) -> f64 {
    let gap = params.sigma_term() - params.alpha;
    if gap > 0.0 {
        params.alpha / gap
    } else {
        f64::INFINITY
    }
}

fn check_viable(params: &MarketParams) -> Result<()> {
    let r_max = max_viable_rate(params);
    if params.rate >= r_max {
        return Err(Error::NotViable {
            rate: params.rate,
            r_max,
        });
    }
    Ok(())
}

/// Profit-maximising founding capital of a monopolist and its premium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonopolyCapital {
    pub capital: f64,
    pub premium: f64,
}

pub fn monopoly_capital(params: &MarketParams) -> Result<MonopolyCapital> {
    check_viable(params)?;
    let s = params.sigma_term();
    let r = params.rate;
    let a = params.alpha;
    let qk = params.net_premium();
    let lead = s / (1.0 + r);
    if lead <= a - s {
        // corner: solvent with no capital at all
        return Ok(MonopolyCapital {
            capital: 0.0,
            premium: (a * qk / (a - s)).max(technical_optimum_premium(params)),
        });
    }
    Ok(MonopolyCapital {
        capital: (lead * lead - (s - a) * (s - a)) / (4.0 * qk),
        premium: 2.0 * a * qk / (a - s * r / (1.0 + r)),
    })
}

/// Premium at which a capital-free firm facing demand scaled by `alpha_eff`
/// is just solvent; infinite when no premium works.
fn zero_capital_premium(params: &MarketParams, alpha_eff: f64) -> f64 {
    let s = params.sigma_term();
    if s < alpha_eff {
        alpha_eff * params.net_premium() / (alpha_eff - s)
    } else {
        f64::INFINITY
    }
}

/// Capital at which demand scaled by `alpha_eff` meets the zero-profit and
/// MPR curves, with interest on the whole capital as the only cost.
fn zero_profit_capital(params: &MarketParams, alpha_eff: f64) -> f64 {
    let s = params.sigma_term();
    let r = params.rate;
    (alpha_eff * s / (1.0 + r) - s * s * r / ((1.0 + r) * (1.0 + r))) / params.net_premium()
}

/// Premium on the zero-profit/MPR locus at capital `c`.
fn zero_profit_premium(params: &MarketParams, capital: f64) -> f64 {
    let s = params.sigma_term();
    let r = params.rate;
    params.net_premium() + s * s * r / ((1.0 + r) * (1.0 + r) * capital)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExAnteThresholds {
    /// Zero when the monopolist is solvent without capital.
    pub c_mc: f64,
    pub p_mc: f64,
    /// Half-market premium of a firm holding the monopoly capital; infinite
    /// if such a firm cannot be solvent.
    pub p_mcl: f64,
    /// Largest capital a firm serving the whole market can break even with.
    pub c_1z: f64,
    pub p_1zu: f64,
    pub p_1zl: f64,
    /// Same as `c_1z` for a firm serving half the market.
    pub c_2z: f64,
    pub p_2zl: f64,
    pub r_max: f64,
}

pub fn thresholds(params: &MarketParams) -> Result<ExAnteThresholds> {
    let mono = monopoly_capital(params)?;
    let c_1z = zero_profit_capital(params, params.alpha);
    let c_2z = zero_profit_capital(params, params.alpha / 2f64.sqrt());
    if !(c_1z > 0.0 && c_2z > 0.0) {
        // a firm with half the demand cannot break even
        let half = params.alpha / 2f64.sqrt();
        return Err(Error::NotViable {
            rate: params.rate,
            r_max: half / (params.sigma_term() - half),
        });
    }
    let p_mcl = if mono.capital > 0.0 {
        share_premium(params, mono.capital, 2)?
    } else {
        zero_capital_premium(params, params.alpha / 2f64.sqrt())
    };
    Ok(ExAnteThresholds {
        c_mc: mono.capital,
        p_mc: mono.premium,
        p_mcl,
        c_1z,
        p_1zu: zero_profit_premium(params, c_1z),
        p_1zl: share_premium(params, c_1z, 2)?,
        c_2z,
        p_2zl: zero_profit_premium(params, c_2z),
        r_max: max_viable_rate(params),
    })
}

/// `{0}` followed by `positive_levels` evenly spaced capitals ending at `c_1z`.
pub fn capital_grid(params: &MarketParams, positive_levels: usize) -> Result<Vec<f64>> {
    if positive_levels < 1 {
        return domain("capital grid needs at least one positive level");
    }
    check_viable(params)?;
    let top = zero_profit_capital(params, params.alpha);
    let mut levels = Vec::with_capacity(positive_levels + 1);
    levels.push(0.0);
    levels.extend((1..=positive_levels).map(|k| top * k as f64 / positive_levels as f64));
    Ok(levels)
}

/// Second-period payoffs `(row, col)` for founding capitals `(row, col)`.
pub fn second_period_payoffs(
    params: &MarketParams,
    capital_row: f64,
    capital_col: f64,
    rule: LowerBoundRule,
) -> Result<(f64, f64)> {
    if !(capital_row >= 0.0 && capital_col >= 0.0) {
        return domain("capitals must be non-negative");
    }
    let qk = params.net_premium();
    let r = params.rate;
    let whole = |capital: f64, premium: f64| -> Result<f64> {
        Ok(demand_curve(params, premium)? * (premium - qk) - r * capital)
    };
    let half = |capital: f64, premium: f64| -> Result<f64> {
        Ok(demand_curve(params, premium)? / 2.0 * (premium - qk) - r * capital)
    };
    let monopoly = |capital: f64| -> Result<f64> {
        let p = full_market_premium(params, capital)?.max(technical_optimum_premium(params));
        whole(capital, p)
    };

    match (capital_row > 0.0, capital_col > 0.0) {
        (false, false) => Ok((0.0, 0.0)),
        (true, false) => Ok((monopoly(capital_row)?, 0.0)),
        (false, true) => Ok((0.0, monopoly(capital_col)?)),
        (true, true) => {
            let (small, high) = if capital_row <= capital_col {
                (capital_row, capital_col)
            } else {
                (capital_col, capital_row)
            };
            let small_share = rule.apply(params, share_premium(params, small, 2)?);
            if capital_row == capital_col || small_share <= full_market_premium(params, high)? {
                Ok((half(capital_row, small_share)?, half(capital_col, small_share)?))
            } else {
                let high_full = full_market_premium(params, high)?;
                let high_pay = whole(high, high_full)?;
                let small_pay = -r * small;
                Ok(if capital_row > capital_col {
                    (high_pay, small_pay)
                } else {
                    (small_pay, high_pay)
                })
            }
        }
    }
}

/// Row-player payoff matrix of the symmetric capital game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub capital_levels: Vec<f64>,
    /// `cells[i][j]`: row player's payoff at row capital `i`, column capital `j`.
    pub cells: Vec<Vec<f64>>,
}

pub fn build_payoff_matrix(params: &MarketParams, levels: &[f64], rule: LowerBoundRule) -> Result<PayoffMatrix> {
    if levels.is_empty() {
        return domain("capital levels are empty");
    }
    if levels.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return domain("capital levels must be finite and non-negative");
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return domain("capital levels must be strictly increasing");
    }
    if levels[0] != 0.0 {
        return domain("capital levels must include 0 as the first level");
    }
    let cells = levels
        .iter()
        .map(|&row| {
            levels
                .iter()
                .map(|&col| Ok(second_period_payoffs(params, row, col, rule)?.0))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PayoffMatrix {
        capital_levels: levels.to_vec(),
        cells,
    })
}

impl PayoffMatrix {
    pub fn size(&self) -> usize {
        self.capital_levels.len()
    }

    /// Column player's payoffs, the transpose of the row matrix.
    pub fn column_payoffs(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| self.cells[j][i]).collect()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.capital_levels.len();
        if n == 0 || self.cells.len() != n || self.cells.iter().any(|r| r.len() != n) {
            return domain("payoff matrix must be square and match its capital levels");
        }
        if self.cells.iter().flatten().any(|v| !v.is_finite()) {
            return domain("payoff matrix has non-finite entries");
        }
        Ok(())
    }

    /// CSV with header `capital,<levels>` and one row per capital level.
    /// `decimals: None` writes shortest round-trip representations.
    pub fn write_csv<W: Write>(&self, out: W, decimals: Option<usize>) -> Result<()> {
        let fmt = |v: f64| match decimals {
            Some(d) => format!("{v:.d$}"),
            None => format!("{v:?}"),
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["capital".to_string()];
        header.extend(self.capital_levels.iter().map(|c| fmt(*c)));
        w.write_record(&header)?;
        for (level, row) in self.capital_levels.iter().zip(&self.cells) {
            let mut rec = vec![fmt(*level)];
            rec.extend(row.iter().map(|v| fmt(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
        };
        let header = rdr.headers()?.clone();
        let levels = header.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
        let mut row_levels = Vec::new();
        let mut cells = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut it = rec.iter();
            let level = parse(it.next().ok_or_else(|| Error::Parse("empty row".into()))?)?;
            row_levels.push(level);
            cells.push(it.map(parse).collect::<Result<Vec<_>>>()?);
        }
        if row_levels != levels {
            return Err(Error::Parse("row labels differ from header levels".into()));
        }
        let m = Self {
            capital_levels: levels,
            cells,
        };
        m.validate()?;
        Ok(m)
    }

    /// Human-readable table with two decimals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:>10}", "capital");
        for c in &self.capital_levels {
            let _ = write!(s, " {c:>9.2}");
        }
        s.push('\n');
        for (level, row) in self.capital_levels.iter().zip(&self.cells) {
            let _ = write!(s, "{level:>10.2}");
            for v in row {
                let _ = write!(s, " {v:>9.2}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PureNeClass {
    /// One firm enters with the monopoly capital, the other stays out.
    MonopolyEntry,
    /// Monopoly premium at or above the half-market zero-profit premium.
    NoPureNeP2zl,
    /// Half-market premium at the monopoly capital at or above the
    /// full-market zero-profit premium.
    NoPureNeP1zu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureNeReport {
    pub class: PureNeClass,
    pub thresholds: ExAnteThresholds,
}

pub fn pure_ne_classification(params: &MarketParams) -> Result<PureNeReport> {
    let t = thresholds(params)?;
    let class = if t.p_mc >= t.p_2zl {
        PureNeClass::NoPureNeP2zl
    } else if t.p_mcl >= t.p_1zu {
        PureNeClass::NoPureNeP1zu
    } else {
        PureNeClass::MonopolyEntry
    };
    Ok(PureNeReport { class, thresholds: t })
}
