//! Closed forms against independent bisection root-finders on random draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvency_core::adjustment::solve_p1z;
use solvency_core::exante::thresholds;
use solvency_core::market::{full_market_premium, share_premium};
use solvency_core::{MarketParams, PHI_995};

pub const CHECKS: &[(&str, fn())] = &[
    ("full and share premium", full_and_share_premium_match_bisection),
    ("capital adjustment crossing", triple_intersection_matches_bisection),
    ("ex-ante thresholds", thresholds_match_bisection),
];

const DRAWS: usize = 1000;
const REL: f64 = 1e-7;

/// Plain bisection; `f(lo)` and `f(hi)` must differ in sign.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "no bracket on [{lo}, {hi}]");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sigma(q: f64, k: f64) -> f64 {
    PHI_995 * (q * (1.0 - q)).sqrt() * k
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * a.abs().max(b.abs())
}

struct Draw {
    q: f64,
    k: f64,
    alpha: f64,
    r: f64,
}

impl Draw {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            q: rng.random_range(0.01..0.2),
            k: rng.random_range(100.0..1000.0),
            alpha: rng.random_range(90.0..200.0),
            r: rng.random_range(0.0..0.3),
        }
    }

    fn params(&self) -> MarketParams {
        MarketParams::new(self.q, self.k, self.alpha, self.r).unwrap()
    }
}

/// Premium where the `1/firms` demand curve meets the MPR curve, searched
/// over policy counts up to the demand cap. `None` when they do not meet
/// below the cap.
fn intersection_oracle(d: &Draw, capital: f64, firms: f64) -> Option<f64> {
    let qk = d.q * d.k;
    let s = sigma(d.q, d.k);
    let inv_demand = |n: f64| d.alpha / (firms * n).sqrt();
    let gap = |n: f64| inv_demand(n) - (qk - capital / n + s / n.sqrt());
    let n_cap = d.alpha * d.alpha / (qk * qk) / firms;
    if gap(n_cap) >= 0.0 {
        return None;
    }
    let n = bisect(gap, 1e-12, n_cap);
    Some(inv_demand(n))
}

fn full_and_share_premium_match_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked_full, mut checked_share) = (0, 0);
    while checked_full < DRAWS || checked_share < DRAWS {
        let d = Draw::random(&mut rng);
        let p = d.params();
        let capital = rng.random_range(1.0..3000.0);
        if let Some(expected) = intersection_oracle(&d, capital, 1.0) {
            let got = full_market_premium(&p, capital).unwrap();
            assert!(close(got, expected), "full premium {got} vs {expected} at C={capital}");
            checked_full += 1;
        }
        let firms: u32 = rng.random_range(2..=6);
        if let Some(expected) = intersection_oracle(&d, capital, f64::from(firms)) {
            let got = share_premium(&p, capital, firms).unwrap();
            assert!(
                close(got, expected),
                "share premium {got} vs {expected} at C={capital}, I={firms}"
            );
            checked_share += 1;
        }
    }
}

/// First `dC >= 0` where the zero-profit/MPR point crosses the demand curve.
fn triple_oracle(d: &Draw, b: f64, capital: f64) -> Option<(f64, f64)> {
    let qk = d.q * d.k;
    let s = sigma(d.q, d.k);
    let point = |dc: f64| {
        let root_n = (b + capital + (1.0 + d.r) * dc) / s;
        let n = root_n * root_n;
        (n, qk + (b + d.r * dc) / n)
    };
    let gap = |dc: f64| {
        let (n, prem) = point(dc);
        n.sqrt() - d.alpha / prem
    };
    // past this change the point has more policies than demand can supply
    let hi = ((s * d.alpha / qk - b - capital) / (1.0 + d.r)).max(0.0) * 1.5 + 1.0;
    let steps = 20_000;
    let mut prev = gap(0.0);
    let mut prev_x = 0.0;
    for i in 1..=steps {
        let x = hi * i as f64 / steps as f64;
        let v = gap(x);
        if v.signum() != prev.signum() {
            let dc = bisect(gap, prev_x, x);
            return Some((dc, point(dc).1));
        }
        prev = v;
        prev_x = x;
    }
    None
}

fn triple_intersection_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut absent = 0;
    while checked < DRAWS {
        let d = Draw::random(&mut rng);
        let b = rng.random_range(0.0..20.0);
        let capital = rng.random_range(10.0..1500.0);
        let p = d.params().with_adjust_cost(b).unwrap();
        let got = solve_p1z(&p, capital).unwrap();
        match (triple_oracle(&d, b, capital), got.premium) {
            (Some((dc, prem)), Some(premium)) => {
                if got.multiple_roots {
                    continue;
                }
                assert!(close(premium, prem), "p_1z {premium} vs {prem}");
                let got_dc = got.delta_c.unwrap();
                assert!((got_dc - dc).abs() <= REL * dc.max(1.0), "dC {got_dc} vs {dc}");
                checked += 1;
            }
            (None, None) => {
                absent += 1;
                assert!(absent < 50 * DRAWS, "too few draws with a crossing");
            }
            (oracle, lib) => panic!("disagreement on existence: oracle {oracle:?}, library {lib:?}"),
        }
    }
}

/// Profit of a firm on the demand curve `alpha_eff / sqrt(n)` holding the
/// capital whose MPR passes through that point, as a function of
/// `s = sqrt(n)`: `-(1+r) C(s) + s sigma` with `C(s) = qK s^2 + s(sigma - alpha_eff)`.
fn profit_on_demand(d: &Draw, alpha_eff: f64, s: f64) -> f64 {
    let sig = sigma(d.q, d.k);
    -(1.0 + d.r) * capital_on_demand(d, alpha_eff, s) + s * sig
}

fn capital_on_demand(d: &Draw, alpha_eff: f64, s: f64) -> f64 {
    d.q * d.k * s * s + s * (sigma(d.q, d.k) - alpha_eff)
}

fn thresholds_match_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    let mut corner = 0;
    while checked < DRAWS {
        let d = Draw::random(&mut rng);
        let p = d.params();
        let Ok(t) = thresholds(&p) else { continue };
        let big = 1e7;

        // monopoly: stationary point of the profit along the demand curve,
        // or no capital at all when capital would go negative first
        let h = |s: f64| (profit_on_demand(&d, d.alpha, s + 1e-3) - profit_on_demand(&d, d.alpha, s - 1e-3)) / 2e-3;
        let s_mc = bisect(h, 1e-9, big);
        let c_mc = capital_on_demand(&d, d.alpha, s_mc);
        let s_mc = if c_mc > 0.0 {
            assert!(close(t.c_mc, c_mc), "c_mc {} vs {c_mc}", t.c_mc);
            assert!(close(t.p_mc, d.alpha / s_mc), "p_mc {} vs {}", t.p_mc, d.alpha / s_mc);
            s_mc
        } else {
            assert_eq!(t.c_mc, 0.0);
            // largest policy count a capital-free firm can serve, capped at the technical optimum
            let s_free = bisect(|s| capital_on_demand(&d, d.alpha, s), 1e-9 * big, big);
            let p_free = (d.alpha / s_free).max(2.0 * d.q * d.k);
            assert!(close(t.p_mc, p_free), "p_mc {} vs {p_free}", t.p_mc);
            corner += 1;
            s_free
        };

        // zero profit on the whole and on half of the demand
        let s_1z = bisect(|s| profit_on_demand(&d, d.alpha, s), s_mc, big);
        let c_1z = capital_on_demand(&d, d.alpha, s_1z);
        assert!(close(t.c_1z, c_1z), "c_1z {} vs {c_1z}", t.c_1z);
        assert!(close(t.p_1zu, d.alpha / s_1z), "p_1zu");

        let half = d.alpha / 2f64.sqrt();
        let s_half_peak = bisect(
            |s| (profit_on_demand(&d, half, s + 1e-3) - profit_on_demand(&d, half, s - 1e-3)) / 2e-3,
            1e-9,
            big,
        );
        let s_2z = bisect(|s| profit_on_demand(&d, half, s), s_half_peak, big);
        let c_2z = capital_on_demand(&d, half, s_2z);
        assert!(close(t.c_2z, c_2z), "c_2z {} vs {c_2z}", t.c_2z);
        assert!(close(t.p_2zl, half / s_2z), "p_2zl");

        if let Some(p_1zl) = intersection_oracle(&d, t.c_1z, 2.0) {
            assert!(close(t.p_1zl, p_1zl), "p_1zl {} vs {p_1zl}", t.p_1zl);
        }
        if t.c_mc > 0.0 {
            if let Some(p_mcl) = intersection_oracle(&d, t.c_mc, 2.0) {
                assert!(close(t.p_mcl, p_mcl), "p_mcl {} vs {p_mcl}", t.p_mcl);
            }
        }
        checked += 1;
    }
    assert!(corner > 0);
}
