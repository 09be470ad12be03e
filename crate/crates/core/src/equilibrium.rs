//! Pure-strategy premium equilibria for fixed capital: the symmetric
//! oligopoly, comparative statics in the number of firms, the monopoly
//! comparison and the two-firm asymmetric taxonomy.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::market::{
    self, branch_of_intersection, demand, expected_profit, full_market_premium, share_premium,
    technical_optimum_premium, Branch, Profit,
};
use crate::params::MarketParams;

/// Relative gap used to place a representable premium strictly above another.
pub const STRICT_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    IntervalContinuum,
    SingleLeaderContinuous,
    DiscreteLadder,
    AsymmetricSplit,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Symmetric,
    CaseIa,
    CaseIb,
    CaseIc,
    CaseIIa,
    CaseIIb,
    CaseIIc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Note {
    NoPureNeContinuous,
    DiscreteOnly,
    CapitalRequirementNonBinding,
    /// A ladder rung failed the density proviso (half market one step up
    /// beats the whole market) and was dropped.
    RungDroppedDensity,
    /// A ladder rung admitted a profitable grid deviation and was dropped.
    RungDroppedDeviation,
    /// The premium grid has no admissible rung in the required range.
    EmptyLadder,
}

/// How a firm's quote relates to the stated premium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuoteRelation {
    At,
    StrictlyAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmQuote {
    pub firm: usize,
    pub premium: f64,
    pub relation: QuoteRelation,
    /// Fraction of market demand the firm serves.
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumInterval {
    pub low: f64,
    pub high: f64,
}

/// One discrete equilibrium: the leader serves the whole market, the
/// follower sits one grid step above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub leader: usize,
    pub leader_premium: f64,
    pub follower: usize,
    pub follower_premium: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub kind: EquilibriumKind,
    pub regime: Regime,
    pub interval: Option<PremiumInterval>,
    pub assignments: Vec<FirmQuote>,
    pub ladder: Vec<LadderRung>,
    pub notes: Vec<Note>,
}

impl EquilibriumSet {
    fn new(kind: EquilibriumKind, regime: Regime) -> Self {
        Self {
            kind,
            regime,
            interval: None,
            assignments: Vec::new(),
            ladder: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Lower end of the symmetric equilibrium interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBoundRule {
    /// `max(qK, P_L)`: never below the net premium.
    #[default]
    NetPremiumFloor,
    /// `P_L` as computed, even below the net premium.
    Raw,
}

impl LowerBoundRule {
    pub fn apply(self, params: &MarketParams, share_premium: f64) -> f64 {
        match self {
            LowerBoundRule::NetPremiumFloor => share_premium.max(params.net_premium()),
            LowerBoundRule::Raw => share_premium,
        }
    }
}

/// A finite, strictly increasing set of admissible premiums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiumGrid {
    premiums: Vec<f64>,
}

impl PremiumGrid {
    pub fn new(premiums: Vec<f64>) -> Result<Self> {
        if premiums.is_empty() {
            return domain("premium grid is empty");
        }
        if premiums.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return domain("premium grid values must be finite and positive");
        }
        if premiums.windows(2).any(|w| w[0] >= w[1]) {
            return domain("premium grid must be strictly increasing");
        }
        Ok(Self { premiums })
    }

    /// `count` premiums starting at `start` with spacing `step`.
    pub fn uniform(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) {
            return domain("grid step must be positive");
        }
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn premiums(&self) -> &[f64] {
        &self.premiums
    }

    /// Index of the first premium `>= value` (with a relative tolerance).
    pub fn first_at_or_above(&self, value: f64) -> Option<usize> {
        let tol = STRICT_GAP * value.abs().max(1.0);
        self.premiums.iter().position(|p| *p >= value - tol)
    }

    /// Index of the last premium `<= value` (with a relative tolerance).
    pub fn last_at_or_below(&self, value: f64) -> Option<usize> {
        let tol = STRICT_GAP * value.abs().max(1.0);
        self.premiums.iter().rposition(|p| *p <= value + tol)
    }

    /// Index of the last premium strictly below `value`.
    pub fn last_below(&self, value: f64) -> Option<usize> {
        let tol = STRICT_GAP * value.abs().max(1.0);
        self.premiums.iter().rposition(|p| *p < value - tol)
    }
}

fn strictly_above(p: f64) -> f64 {
    p * (1.0 + STRICT_GAP)
}

/// Profits of every firm given capitals and quoted premiums. The cheapest
/// quote wins; firms tied at the minimum split demand equally. A quote of
/// `f64::INFINITY` means the firm sells nothing.
pub fn firm_profits(params: &MarketParams, capitals: &[f64], premiums: &[f64]) -> Result<Vec<Profit>> {
    if capitals.len() != premiums.len() || capitals.is_empty() {
        return domain("capitals and premiums must be non-empty and of equal length");
    }
    let min = premiums.iter().cloned().fold(f64::INFINITY, f64::min);
    let winners = premiums.iter().filter(|p| **p == min).count();
    capitals
        .iter()
        .zip(premiums)
        .map(|(&c, &p)| {
            let n = if p == min && p.is_finite() {
                demand(params, p)? / winners as f64
            } else {
                0.0
            };
            let premium = if p.is_finite() { p } else { 0.0 };
            expected_profit(params, c, premium, n)
        })
        .collect()
}

/// Symmetric equilibria of `firms` identical firms each holding `capital`.
pub fn symmetric_equilibrium(
    params: &MarketParams,
    capital: f64,
    firms: u32,
    grid: Option<&PremiumGrid>,
    rule: LowerBoundRule,
) -> Result<EquilibriumSet> {
    if firms < 2 {
        return domain("a symmetric oligopoly needs at least two firms");
    }
    let qk = params.net_premium();
    let upper = full_market_premium(params, capital)?;
    let lower = share_premium(params, capital, firms)?;
    let monopoly = technical_optimum_premium(params);

    if upper <= qk {
        let mut set = EquilibriumSet::new(EquilibriumKind::IntervalContinuum, Regime::Symmetric);
        set.interval = Some(PremiumInterval { low: qk, high: qk });
        set.notes.push(Note::CapitalRequirementNonBinding);
        set.assignments = (0..firms as usize)
            .map(|firm| FirmQuote {
                firm,
                premium: qk,
                relation: QuoteRelation::At,
                share: 1.0 / f64::from(firms),
            })
            .collect();
        return Ok(set);
    }

    if lower < upper {
        let mut set = EquilibriumSet::new(EquilibriumKind::IntervalContinuum, Regime::Symmetric);
        set.interval = Some(PremiumInterval {
            low: rule.apply(params, lower),
            high: upper,
        });
        return Ok(set);
    }

    let leader_quotes = |premium: f64| -> Vec<FirmQuote> {
        let mut quotes = vec![FirmQuote {
            firm: 0,
            premium,
            relation: QuoteRelation::At,
            share: 1.0,
        }];
        quotes.extend((1..firms as usize).map(|firm| FirmQuote {
            firm,
            premium,
            relation: QuoteRelation::StrictlyAbove,
            share: 0.0,
        }));
        quotes
    };

    if monopoly <= upper {
        let mut set = EquilibriumSet::new(EquilibriumKind::SingleLeaderContinuous, Regime::Symmetric);
        set.assignments = leader_quotes(upper);
        return Ok(set);
    }

    match grid {
        None => {
            let mut set = EquilibriumSet::new(EquilibriumKind::None, Regime::Symmetric);
            set.notes.push(Note::NoPureNeContinuous);
            Ok(set)
        }
        Some(grid) => {
            let capitals = vec![capital; firms as usize];
            let mut set = EquilibriumSet::new(EquilibriumKind::DiscreteLadder, Regime::Symmetric);
            set.notes.push(Note::DiscreteOnly);
            if let Some(j) = grid.first_at_or_above(upper) {
                push_rung(params, &capitals, grid, j, 0, 1, &mut set)?;
            }
            finish_ladder(&mut set);
            Ok(set)
        }
    }
}

/// `P_U` and `P_L` as functions of the number of firms, at fixed per-firm
/// capital and at fixed total capital.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsRow {
    pub firms: u32,
    pub full_market_premium: f64,
    pub share_premium: f64,
    pub full_market_premium_fixed_total: f64,
    pub share_premium_fixed_total: f64,
}

pub fn comparative_statics_report(
    params: &MarketParams,
    capital: f64,
    firms: impl IntoIterator<Item = u32>,
) -> Result<Vec<StaticsRow>> {
    firms
        .into_iter()
        .map(|i| {
            if i < 1 {
                return domain("number of firms must be at least 1");
            }
            let per_firm = capital / f64::from(i);
            Ok(StaticsRow {
                firms: i,
                full_market_premium: full_market_premium(params, capital)?,
                share_premium: share_premium(params, capital, i)?,
                full_market_premium_fixed_total: full_market_premium(params, per_firm)?,
                share_premium_fixed_total: share_premium(params, per_firm, i)?,
            })
        })
        .collect()
}

/// Premium set by a monopolist holding `capital`: `max(P_U, 2qK)`.
pub fn monopoly_premium(params: &MarketParams, capital: f64) -> Result<f64> {
    Ok(full_market_premium(params, capital)?.max(technical_optimum_premium(params)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonopolyComparison {
    /// The monopoly undercuts every duopoly equilibrium premium.
    pub monopoly_cheaper: bool,
    pub monopoly_premium: f64,
    /// Lowest equal-share premium of a duopoly splitting the same capital.
    pub duopoly_share_premium: f64,
}

/// Compares one firm holding `total_capital` with two firms holding half each.
pub fn monopoly_vs_duopoly_check(params: &MarketParams, total_capital: f64) -> Result<MonopolyComparison> {
    if !(total_capital > 0.0) {
        return domain("total capital must be positive");
    }
    let duopoly = share_premium(params, total_capital / 2.0, 2)?;
    Ok(MonopolyComparison {
        monopoly_cheaper: params.net_premium() < duopoly && technical_optimum_premium(params) < duopoly,
        monopoly_premium: monopoly_premium(params, total_capital)?,
        duopoly_share_premium: duopoly,
    })
}

/// Curve values for the two firms of an asymmetric duopoly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuopolyCurves {
    pub small_full: f64,
    pub small_share: f64,
    pub small_branch: Branch,
    pub high_full: f64,
    pub high_share: f64,
    pub high_branch: Branch,
    pub technical_optimum: f64,
}

impl DuopolyCurves {
    pub fn compute(params: &MarketParams, capital_small: f64, capital_high: f64) -> Result<Self> {
        Ok(Self {
            small_full: full_market_premium(params, capital_small)?,
            small_share: share_premium(params, capital_small, 2)?,
            small_branch: branch_of_intersection(params, capital_small, 1)?,
            high_full: full_market_premium(params, capital_high)?,
            high_share: share_premium(params, capital_high, 2)?,
            high_branch: branch_of_intersection(params, capital_high, 1)?,
            technical_optimum: technical_optimum_premium(params),
        })
    }

    /// Sub-case label, or an error for configurations outside the taxonomy.
    pub fn regime(&self, params: &MarketParams) -> Result<Regime> {
        let both_decreasing = self.small_branch == Branch::Decreasing
            && self.high_branch == Branch::Decreasing
            && self.small_full < self.small_share
            && self.high_full < self.high_share;
        let both_increasing = self.small_branch == Branch::Increasing
            && self.high_branch == Branch::Increasing
            && params.net_premium() < self.small_share;
        let pm = self.technical_optimum;
        if both_decreasing {
            Ok(if pm < self.high_full {
                Regime::CaseIa
            } else if pm <= self.small_full {
                Regime::CaseIb
            } else {
                Regime::CaseIc
            })
        } else if both_increasing {
            Ok(if self.small_share <= self.high_full {
                Regime::CaseIIc
            } else if pm < self.small_share {
                Regime::CaseIIa
            } else {
                Regime::CaseIIb
            })
        } else {
            Err(Error::Classification(format!(
                "capital pair outside the two-case taxonomy (small: {:?}, high: {:?})",
                self.small_branch, self.high_branch
            )))
        }
    }
}

/// Equilibria of a duopoly with capitals `capital_small <= capital_high`.
/// Firm 0 is the small firm, firm 1 the large one. With a grid, the
/// discrete ladders replace the continuous answers where those are empty
/// or differ.
pub fn asymmetric_duopoly(
    params: &MarketParams,
    capital_small: f64,
    capital_high: f64,
    grid: Option<&PremiumGrid>,
) -> Result<EquilibriumSet> {
    if !(capital_small > 0.0 && capital_small <= capital_high) {
        return domain("need 0 < small capital <= high capital");
    }
    let curves = DuopolyCurves::compute(params, capital_small, capital_high)?;
    let regime = curves.regime(params)?;
    let capitals = [capital_small, capital_high];

    let large_alone = |premium: f64| {
        let mut set = EquilibriumSet::new(EquilibriumKind::AsymmetricSplit, regime);
        set.assignments = vec![
            FirmQuote {
                firm: 1,
                premium,
                relation: QuoteRelation::At,
                share: 1.0,
            },
            FirmQuote {
                firm: 0,
                premium,
                relation: QuoteRelation::StrictlyAbove,
                share: 0.0,
            },
        ];
        set
    };

    // Ladder index range as (first, last) grid indices for the leader's premium.
    let ladder_range = |grid: &PremiumGrid| -> Option<(usize, usize)> {
        let first = grid.first_at_or_above(curves.high_full)?;
        let last = match regime {
            Regime::CaseIb => grid.last_at_or_below(curves.technical_optimum)?,
            Regime::CaseIc => grid.last_at_or_below(curves.small_full)?,
            Regime::CaseIIa | Regime::CaseIIb => grid.last_below(curves.small_share)?,
            _ => return None,
        };
        (first <= last).then_some((first, last))
    };

    let ladder = |grid: &PremiumGrid| -> Result<EquilibriumSet> {
        let mut set = EquilibriumSet::new(EquilibriumKind::DiscreteLadder, regime);
        if let Some((first, last)) = ladder_range(grid) {
            for j in first..=last {
                push_rung(params, &capitals, grid, j, 1, 0, &mut set)?;
            }
        }
        finish_ladder(&mut set);
        Ok(set)
    };

    match regime {
        Regime::CaseIa => Ok(large_alone(curves.high_full)),
        Regime::CaseIb => match grid {
            None => Ok(large_alone(curves.technical_optimum)),
            Some(g) => ladder(g),
        },
        Regime::CaseIc | Regime::CaseIIb => match grid {
            None => {
                let mut set = EquilibriumSet::new(EquilibriumKind::None, regime);
                set.notes.push(Note::NoPureNeContinuous);
                Ok(set)
            }
            Some(g) => {
                let mut set = ladder(g)?;
                set.notes.insert(0, Note::DiscreteOnly);
                Ok(set)
            }
        },
        Regime::CaseIIa => match grid {
            None => Ok(large_alone(curves.high_full.max(curves.technical_optimum))),
            Some(g) => ladder(g),
        },
        Regime::CaseIIc => {
            let mut set = EquilibriumSet::new(EquilibriumKind::IntervalContinuum, regime);
            set.interval = Some(PremiumInterval {
                low: curves.small_share,
                high: curves.high_full,
            });
            set.assignments = (0..2)
                .map(|firm| FirmQuote {
                    firm,
                    premium: curves.small_share,
                    relation: QuoteRelation::At,
                    share: 0.5,
                })
                .collect();
            Ok(set)
        }
        Regime::Symmetric => unreachable!("regime() never yields Symmetric"),
    }
}

/// Adds rung `(g_j, g_{j+1})` if it passes the density proviso and survives
/// every unilateral grid deviation.
fn push_rung(
    params: &MarketParams,
    capitals: &[f64],
    grid: &PremiumGrid,
    j: usize,
    leader: usize,
    follower: usize,
    set: &mut EquilibriumSet,
) -> Result<()> {
    let g = grid.premiums();
    let Some(&next) = g.get(j + 1) else {
        return Ok(());
    };
    let lead_premium = g[j];
    let whole = market::expected_profit(params, capitals[leader], lead_premium, demand(params, lead_premium)?)?;
    let half_up = market::expected_profit(params, capitals[leader], next, demand(params, next)? / 2.0)?;
    if half_up.solvent && half_up.before_penalty() >= whole.before_penalty() {
        set.notes.push(Note::RungDroppedDensity);
        return Ok(());
    }
    let mut quotes = vec![f64::INFINITY; capitals.len()];
    quotes[leader] = lead_premium;
    quotes[follower] = next;
    if is_grid_equilibrium(params, capitals, &quotes, grid)? {
        set.ladder.push(LadderRung {
            leader,
            leader_premium: lead_premium,
            follower,
            follower_premium: next,
        });
    } else {
        set.notes.push(Note::RungDroppedDeviation);
    }
    Ok(())
}

fn finish_ladder(set: &mut EquilibriumSet) {
    set.notes.dedup();
    if set.ladder.is_empty() {
        set.notes.push(Note::EmptyLadder);
    }
}

/// True when no firm gains by moving to another grid premium or
/// withdrawing. A quote of `f64::INFINITY` means "above every rival".
pub fn is_grid_equilibrium(
    params: &MarketParams,
    capitals: &[f64],
    quotes: &[f64],
    grid: &PremiumGrid,
) -> Result<bool> {
    let base = firm_profits(params, capitals, quotes)?;
    let tol = 1e-9;
    for firm in 0..capitals.len() {
        let alternatives = grid.premiums().iter().copied().chain(std::iter::once(f64::INFINITY));
        for alt in alternatives {
            if alt == quotes[firm] {
                continue;
            }
            let mut trial = quotes.to_vec();
            trial[firm] = alt;
            let dev = firm_profits(params, capitals, &trial)?;
            if dev[firm].better_than(&base[firm], tol * base[firm].before_penalty().abs().max(1.0)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Concrete premium vectors realising an equilibrium set, for checks and
/// reporting. Interval sets yield their endpoints and midpoint; "strictly
/// above" quotes are placed a relative [`STRICT_GAP`] above.
pub fn witness_profiles(set: &EquilibriumSet, firms: usize) -> Vec<Vec<f64>> {
    match set.kind {
        EquilibriumKind::IntervalContinuum => {
            let Some(iv) = set.interval else { return Vec::new() };
            [iv.low, 0.5 * (iv.low + iv.high), iv.high]
                .into_iter()
                .map(|p| vec![p; firms])
                .collect()
        }
        EquilibriumKind::SingleLeaderContinuous | EquilibriumKind::AsymmetricSplit => {
            let mut quotes = vec![f64::INFINITY; firms];
            for q in &set.assignments {
                quotes[q.firm] = match q.relation {
                    QuoteRelation::At => q.premium,
                    QuoteRelation::StrictlyAbove => strictly_above(q.premium),
                };
            }
            vec![quotes]
        }
        EquilibriumKind::DiscreteLadder => set
            .ladder
            .iter()
            .map(|r| {
                let mut quotes = vec![f64::INFINITY; firms];
                quotes[r.leader] = r.leader_premium;
                quotes[r.follower] = r.follower_premium;
                quotes
            })
            .collect(),
        EquilibriumKind::None => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> MarketParams {
        MarketParams::new(0.1, 100.0, 110.0, 0.01).unwrap()
    }

    fn table3() -> MarketParams {
        MarketParams::new(0.05, 900.0, 90.0, 0.01).unwrap()
    }

    #[test]
    fn symmetric_interval_fig2() {
        let set = symmetric_equilibrium(&fig2(), 300.0, 5, None, LowerBoundRule::default()).unwrap();
        assert_eq!(set.kind, EquilibriumKind::IntervalContinuum);
        let iv = set.interval.unwrap();
        assert!((iv.low - 11.57).abs() < 0.01, "{iv:?}");
        assert!((iv.high - 14.96).abs() < 0.02, "{iv:?}");
    }

    #[test]
    fn symmetric_many_firms_is_interval() {
        let set = symmetric_equilibrium(&fig2(), 80.0, 200, None, LowerBoundRule::default()).unwrap();
        assert_eq!(set.kind, EquilibriumKind::IntervalContinuum);
    }

    #[test]
    fn symmetric_table3_top_level() {
        let p = table3();
        let floored = symmetric_equilibrium(&p, 943.5, 2, None, LowerBoundRule::NetPremiumFloor).unwrap();
        let iv = floored.interval.unwrap();
        assert_eq!(iv.low, 45.0);
        assert!((iv.high - 47.7).abs() < 0.05, "{iv:?}");
        let raw = symmetric_equilibrium(&p, 943.5, 2, None, LowerBoundRule::Raw).unwrap();
        assert!((raw.interval.unwrap().low - 35.26).abs() < 0.01);
    }

    #[test]
    fn symmetric_non_binding() {
        // enormous capital: the requirement never binds
        let set = symmetric_equilibrium(&fig2(), 1e7, 3, None, LowerBoundRule::default()).unwrap();
        assert!(set.notes.contains(&Note::CapitalRequirementNonBinding));
        assert_eq!(set.interval.unwrap().low, 10.0);
    }

    #[test]
    fn symmetric_decreasing_regimes() {
        // small capital, decreasing branch: P_L > P_U
        let p = MarketParams::new(0.1, 100.0, 110.0, 0.01).unwrap();
        let c = 20.0;
        assert!(share_premium(&p, c, 2).unwrap() > full_market_premium(&p, c).unwrap());
        let set = symmetric_equilibrium(&p, c, 2, None, LowerBoundRule::default()).unwrap();
        assert_eq!(set.kind, EquilibriumKind::SingleLeaderContinuous);
        assert_eq!(set.assignments[0].share, 1.0);

        // a small claim probability puts P_U below 2qK
        let p = MarketParams::new(0.01, 100.0, 110.0, 0.01).unwrap();
        let c = 100.0;
        let pu = full_market_premium(&p, c).unwrap();
        assert!(share_premium(&p, c, 2).unwrap() > pu);
        assert!(technical_optimum_premium(&p) > pu);
        let set = symmetric_equilibrium(&p, c, 2, None, LowerBoundRule::default()).unwrap();
        assert_eq!(set.kind, EquilibriumKind::None);
        assert!(set.notes.contains(&Note::NoPureNeContinuous));

        let grid = PremiumGrid::uniform(pu, 0.01, 50).unwrap();
        let set = symmetric_equilibrium(&p, c, 2, Some(&grid), LowerBoundRule::default()).unwrap();
        assert_eq!(set.kind, EquilibriumKind::DiscreteLadder);
        assert_eq!(set.ladder.len(), 1);
        assert_eq!(set.ladder[0].leader_premium, grid.premiums()[0]);
        assert_eq!(set.ladder[0].follower_premium, grid.premiums()[1]);
    }

    #[test]
    fn statics() {
        let p = fig2();
        let rows = comparative_statics_report(&p, 300.0, 2..=10).unwrap();
        for w in rows.windows(2) {
            assert_eq!(w[0].full_market_premium, w[1].full_market_premium);
            assert!(w[1].share_premium < w[0].share_premium);
            assert!(w[1].share_premium_fixed_total > w[0].share_premium_fixed_total);
            assert!(w[1].full_market_premium_fixed_total > w[0].full_market_premium_fixed_total);
        }
        assert!(comparative_statics_report(&p, 300.0, [0]).is_err());
    }

    #[test]
    fn monopoly_examples() {
        let fig3 = MarketParams::new(0.2, 100.0, 90.0, 0.03).unwrap();
        assert!((monopoly_premium(&fig3, 100.0).unwrap() - 46.5).abs() < 0.1);
        assert_eq!(monopoly_premium(&table3(), 943.5).unwrap(), 90.0);
        assert_eq!(monopoly_premium(&table3(), 1e9).unwrap(), 90.0);

        let cmp = monopoly_vs_duopoly_check(&fig3, 100.0).unwrap();
        assert!(cmp.monopoly_cheaper);
        assert!((cmp.duopoly_share_premium - 72.5).abs() < 0.5, "{cmp:?}");
        assert!(!monopoly_vs_duopoly_check(&fig3, 1e7).unwrap().monopoly_cheaper);
        let thin = MarketParams::new(0.95, 100.0, 1.0, 0.03).unwrap();
        assert!(!monopoly_vs_duopoly_check(&thin, 100.0).unwrap().monopoly_cheaper);
    }

    #[test]
    fn asymmetric_fig4_is_case_one() {
        let set = asymmetric_duopoly(&fig2(), 80.0, 120.0, None).unwrap();
        assert!(matches!(set.regime, Regime::CaseIa | Regime::CaseIb | Regime::CaseIc));
    }

    #[test]
    fn asymmetric_fig6c_interval() {
        let p = MarketParams::new(0.2, 100.0, 90.0, 0.03).unwrap();
        let set = asymmetric_duopoly(&p, 150.0, 160.0, None).unwrap();
        assert_eq!(set.regime, Regime::CaseIIc);
        let iv = set.interval.unwrap();
        assert_eq!(iv.low, share_premium(&p, 150.0, 2).unwrap());
        assert_eq!(iv.high, full_market_premium(&p, 160.0).unwrap());
    }

    #[test]
    fn asymmetric_table3_large_takes_market() {
        let set = asymmetric_duopoly(&table3(), 52.5, 102.0, None).unwrap();
        assert_eq!(set.regime, Regime::CaseIIa);
        assert_eq!(set.kind, EquilibriumKind::AsymmetricSplit);
        let large = set.assignments.iter().find(|q| q.firm == 1).unwrap();
        assert!((large.premium - 375.9).abs() < 0.1);
        assert_eq!(large.share, 1.0);
    }

    #[test]
    fn asymmetric_rejects_bad_order() {
        assert!(asymmetric_duopoly(&fig2(), 120.0, 80.0, None).is_err());
        assert!(asymmetric_duopoly(&fig2(), 0.0, 80.0, None).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(PremiumGrid::new(vec![]).is_err());
        assert!(PremiumGrid::new(vec![1.0, 1.0]).is_err());
        assert!(PremiumGrid::new(vec![-1.0, 1.0]).is_err());
        let g = PremiumGrid::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.first_at_or_above(1.5), Some(1));
        assert_eq!(g.last_at_or_below(2.0), Some(1));
        assert_eq!(g.last_below(2.0), Some(0));
    }

    #[test]
    fn tie_split_is_exact() {
        let p = table3();
        let prof = firm_profits(&p, &[500.0, 500.0, 500.0], &[100.0, 100.0, 120.0]).unwrap();
        let d = demand(&p, 100.0).unwrap();
        assert_eq!(prof[0].technical, d / 2.0 * 55.0);
        assert_eq!(prof[2].technical, 0.0);
    }
}
