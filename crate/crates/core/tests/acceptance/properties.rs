//! Structural properties on the default sweep grid and on random draws.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvency_core::equilibrium::{
    asymmetric_duopoly, comparative_statics_report, firm_profits, symmetric_equilibrium, witness_profiles,
    EquilibriumKind, LowerBoundRule, Regime,
};
use solvency_core::exante::{capital_grid, thresholds};
use solvency_core::market::{
    branch_of_intersection, full_market_premium, is_solvent, mcr, mpr, profit_along_mpr, share_premium, Branch,
};
use solvency_core::sweep::SweepConfig;
use solvency_core::MarketParams;

/// Viable tuples of the default sweep grid with their capital levels.
fn grid_tuples() -> Vec<(MarketParams, Vec<f64>)> {
    SweepConfig::default()
        .tuples()
        .into_iter()
        .filter_map(|[alpha, q, k, r]| {
            let p = MarketParams::new(q, k, alpha, r).ok()?;
            let levels = capital_grid(&p, 19).ok()?;
            Some((p, levels[1..].to_vec()))
        })
        .collect()
}

fn random_params(rng: &mut ChaCha8Rng) -> MarketParams {
    MarketParams::new(
        rng.random_range(0.01..0.2),
        rng.random_range(100.0..1000.0),
        rng.random_range(90.0..200.0),
        rng.random_range(0.0..0.3),
    )
    .unwrap()
}

fn market() -> impl Strategy<Value = MarketParams> {
    (0.01f64..0.2, 100.0f64..1000.0, 90.0f64..200.0, 0.0f64..0.3)
        .prop_map(|(q, k, a, r)| MarketParams::new(q, k, a, r).unwrap())
}

pub const CHECKS: &[(&str, fn())] = &[
    ("profit increases along MPR", profit_increases_along_mpr),
    ("mcr inverts mpr", mcr_inverts_mpr),
    ("mcr has decreasing returns", mcr_has_decreasing_returns),
    (
        "full premium constant, share premium falls",
        full_premium_constant_share_premium_falls,
    ),
    ("full premium above floor condition", full_premium_above_floor_condition),
    ("lower safety level lowers premiums", lower_safety_level_lowers_premiums),
    (
        "fixed total capital premiums rise with firms",
        fixed_total_capital_premiums_rise_with_firms,
    ),
    ("zero-profit premiums ordered", zero_profit_premiums_ordered),
    (
        "symmetric equilibria survive deviations",
        symmetric_equilibria_survive_sampled_deviations,
    ),
    ("interval endpoints are tight", interval_endpoints_are_tight),
    (
        "split capital equilibria solvent and stable",
        split_capital_equilibria_are_solvent_and_stable,
    ),
    (
        "asymmetric equilibria survive deviations",
        asymmetric_witnesses_survive_sampled_deviations,
    ),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    fn profit_increases_along_mpr(p in market(), c in 1.0f64..3000.0, n in 0.1f64..1e5, step in 1e-3f64..1e3) {
        prop_assert!(profit_along_mpr(&p, c, n + step).unwrap() > profit_along_mpr(&p, c, n).unwrap());
    }

    fn mcr_inverts_mpr(p in market(), c in 1.0f64..3000.0, n in 0.1f64..1e5) {
        let prem = mpr(&p, n, c).unwrap().premium;
        let back = mcr(&p, n, prem).unwrap();
        prop_assert!((back - c).abs() <= 1e-9 * c.max(1.0) * (1.0 + n * p.loss / c), "{back} vs {c}");
    }

    fn mcr_has_decreasing_returns(p in market(), n in 0.1f64..1e5, prem in 1.0f64..500.0, a in 1e-3f64..10.0) {
        let scaled = mcr(&p, (1.0 + a) * n, prem).unwrap();
        prop_assert!(scaled < (1.0 + a) * mcr(&p, n, prem).unwrap());
    }

    fn full_premium_constant_share_premium_falls(p in market(), c in 1.0f64..3000.0) {
        let rows = comparative_statics_report(&p, c, 1..=8).unwrap();
        for w in rows.windows(2) {
            prop_assert_eq!(w[0].full_market_premium, w[1].full_market_premium);
            let increasing = |i| branch_of_intersection(&p, c, i).unwrap() == Branch::Increasing;
            if increasing(w[0].firms) && increasing(w[1].firms) {
                prop_assert!(w[1].share_premium < w[0].share_premium);
            }
        }
    }

    fn full_premium_above_floor_condition(p in market(), c in 1.0f64..3000.0) {
        let lhs = p.alpha / c * p.phi * (1.0 / p.claim_prob - 1.0).sqrt();
        prop_assume!((lhs - 1.0).abs() > 1e-9);
        prop_assert_eq!(full_market_premium(&p, c).unwrap() > p.net_premium(), lhs > 1.0);
    }

    fn lower_safety_level_lowers_premiums(p in market(), c in 1.0f64..3000.0, shrink in 0.5f64..0.999) {
        let looser = p.with_phi(p.phi * shrink).unwrap();
        prop_assert!(full_market_premium(&looser, c).unwrap() < full_market_premium(&p, c).unwrap());
        prop_assert!(share_premium(&looser, c, 2).unwrap() < share_premium(&p, c, 2).unwrap());
    }
}

fn fixed_total_capital_premiums_rise_with_firms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases: Vec<(MarketParams, f64)> = grid_tuples()
        .into_iter()
        .flat_map(|(p, levels)| levels.into_iter().map(move |c| (p, c)))
        .collect();
    for _ in 0..1000 {
        cases.push((random_params(&mut rng), rng.random_range(1.0..3000.0)));
    }
    for (p, c) in cases {
        let rows = comparative_statics_report(&p, c, 1..=8).unwrap();
        for w in rows.windows(2) {
            assert!(
                w[1].full_market_premium_fixed_total > w[0].full_market_premium_fixed_total,
                "{p:?} C={c} I={}",
                w[1].firms
            );
            assert!(
                w[1].share_premium_fixed_total > w[0].share_premium_fixed_total,
                "{p:?} C={c}"
            );
        }
    }
}

fn zero_profit_premiums_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut params: Vec<MarketParams> = grid_tuples()
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| thresholds(p).is_ok())
        .collect();
    let mut drawn = 0;
    while drawn < 1000 {
        let p = random_params(&mut rng);
        if thresholds(&p).is_ok() {
            params.push(p);
            drawn += 1;
        }
    }
    for p in params {
        let t = thresholds(&p).unwrap();
        assert!(t.p_1zu < t.p_2zl, "{p:?}: {} vs {}", t.p_1zu, t.p_2zl);
    }
}

/// No unilateral deviation among `samples` alternative premiums (plus
/// withdrawing) is strictly profitable for any firm.
fn deviation_proof(p: &MarketParams, capitals: &[f64], quotes: &[f64], rng: &mut ChaCha8Rng, samples: usize) -> bool {
    let base = firm_profits(p, capitals, quotes).unwrap();
    let finite: Vec<f64> = quotes.iter().copied().filter(|q| q.is_finite()).collect();
    let anchor = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    for firm in 0..capitals.len() {
        let mut alts = vec![f64::INFINITY, anchor, anchor * (1.0 - 1e-6), anchor * (1.0 + 1e-6)];
        alts.extend((0..samples).map(|_| anchor * rng.random_range(0.3..3.0)));
        for alt in alts {
            let mut trial = quotes.to_vec();
            trial[firm] = alt;
            let dev = firm_profits(p, capitals, &trial).unwrap();
            let tol = 1e-9 * base[firm].before_penalty().abs().max(1.0);
            if dev[firm].better_than(&base[firm], tol) {
                return false;
            }
        }
    }
    true
}

fn symmetric_equilibria_survive_sampled_deviations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases: Vec<(MarketParams, f64)> = grid_tuples()
        .into_iter()
        .flat_map(|(p, levels)| levels.into_iter().step_by(6).map(move |c| (p, c)))
        .collect();
    for _ in 0..1000 {
        cases.push((random_params(&mut rng), rng.random_range(1.0..3000.0)));
    }
    let mut checked = 0;
    for (p, c) in cases {
        for firms in [2, 3, 5] {
            let set = symmetric_equilibrium(&p, c, firms, None, LowerBoundRule::NetPremiumFloor).unwrap();
            if let Some(iv) = set.interval {
                assert!(iv.low <= iv.high && iv.low >= p.net_premium());
            }
            for quotes in witness_profiles(&set, firms as usize) {
                let caps = vec![c; firms as usize];
                assert!(
                    deviation_proof(&p, &caps, &quotes, &mut rng, 200),
                    "{p:?} C={c} I={firms} {quotes:?}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

fn interval_endpoints_are_tight() {
    // just outside the interval some deviation pays
    let p = MarketParams::new(0.1, 100.0, 110.0, 0.01).unwrap();
    let set = symmetric_equilibrium(&p, 300.0, 5, None, LowerBoundRule::NetPremiumFloor).unwrap();
    let iv = set.interval.unwrap();
    let caps = [300.0; 5];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for outside in [iv.low * (1.0 - 1e-4), iv.high * (1.0 + 1e-4)] {
        assert!(!deviation_proof(&p, &caps, &[outside; 5], &mut rng, 200), "{outside}");
    }
}

fn split_capital_equilibria_are_solvent_and_stable() {
    let p = MarketParams::new(0.2, 100.0, 90.0, 0.03).unwrap();
    let set = asymmetric_duopoly(&p, 150.0, 160.0, None).unwrap();
    assert_eq!(set.regime, Regime::CaseIIc);
    assert_eq!(set.kind, EquilibriumKind::IntervalContinuum);
    let iv = set.interval.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..=20 {
        let prem = iv.low + (iv.high - iv.low) * f64::from(k) / 20.0;
        let n = p.alpha * p.alpha / (prem * prem) / 2.0;
        assert!(is_solvent(&p, 150.0, prem, n).unwrap());
        assert!(is_solvent(&p, 160.0, prem, n).unwrap());
    }
    for quotes in witness_profiles(&set, 2) {
        assert!(deviation_proof(&p, &[150.0, 160.0], &quotes, &mut rng, 200));
    }
}

fn asymmetric_witnesses_survive_sampled_deviations() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    for (p, levels) in grid_tuples() {
        for (i, &small) in levels.iter().enumerate().step_by(4) {
            for &high in levels[i + 1..].iter().step_by(5) {
                let Ok(set) = asymmetric_duopoly(&p, small, high, None) else {
                    continue;
                };
                for quotes in witness_profiles(&set, 2) {
                    assert!(
                        deviation_proof(&p, &[small, high], &quotes, &mut rng, 200),
                        "{p:?} {small} {high} {:?} {quotes:?}",
                        set.regime
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}
