//! Monte-Carlo check of the ruin probability implied by the normal
//! approximation of the capital requirement.
//!
//! Each trial draws the number of claims of `n` independent policies from
//! Binomial(n, q); that is the exact law of the sum of the Bernoulli
//! indicators. Trials are split into fixed chunks and chunk `i` uses its own
//! ChaCha8 stream `i` under the user seed, so the estimate does not depend on
//! how chunks are spread across threads.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::market::mcr;
use crate::params::{MarketParams, PHI_995};

/// Generator identification written next to every estimate.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), seed_from_u64, one stream per 65536-trial chunk";

/// Trials per independent generator stream.
pub const CHUNK_TRIALS: u64 = 65_536;

/// Ruin level the capital requirement targets.
pub const TARGET_RUIN: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub params: MarketParams,
    pub n: u64,
    pub premium: f64,
    pub capital: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n < 1 {
            return domain("policy count must be at least 1");
        }
        if self.trials < 1 {
            return domain("trial count must be at least 1");
        }
        if !self.premium.is_finite() || !self.capital.is_finite() {
            return domain("premium and capital must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinEstimate {
    pub n: u64,
    pub premium: f64,
    pub capital: f64,
    pub trials: u64,
    pub ruins: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl RuinEstimate {
    /// Two-sided normal confidence interval at the given quantile (2.576 for 99%).
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        (
            (self.estimate - z * self.std_error).max(0.0),
            (self.estimate + z * self.std_error).min(1.0),
        )
    }

    /// 99% interval.
    pub fn ci99(&self) -> (f64, f64) {
        self.confidence_interval(PHI_995)
    }
}

/// Fraction of simulated portfolios whose total claims exceed `C + nP`.
pub fn estimate_ruin_probability(spec: &SimulationSpec) -> Result<RuinEstimate> {
    spec.validate()?;
    let p = spec.params;
    let reserve = spec.capital + spec.n as f64 * spec.premium;
    let binomial =
        Binomial::new(spec.n, p.claim_prob).map_err(|e| Error::Domain(format!("bad claim distribution: {e}")))?;
    let ruins = if reserve >= spec.n as f64 * p.loss {
        0
    } else {
        let chunks = spec.trials.div_ceil(CHUNK_TRIALS);
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(chunk);
                let count = CHUNK_TRIALS.min(spec.trials - chunk * CHUNK_TRIALS);
                (0..count)
                    .filter(|_| binomial.sample(&mut rng) as f64 * p.loss > reserve)
                    .count() as u64
            })
            .sum()
    };
    let estimate = ruins as f64 / spec.trials as f64;
    Ok(RuinEstimate {
        n: spec.n,
        premium: spec.premium,
        capital: spec.capital,
        trials: spec.trials,
        ruins,
        estimate,
        std_error: (estimate * (1.0 - estimate) / spec.trials as f64).sqrt(),
        seed: spec.seed,
    })
}

/// How the premium is chosen for each `n` of an error profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PremiumRule {
    /// `qK`.
    NetPremium,
    /// `(1 + loading) qK`.
    Loaded(f64),
    Fixed(f64),
}

impl PremiumRule {
    pub fn premium(self, params: &MarketParams) -> f64 {
        match self {
            Self::NetPremium => params.net_premium(),
            Self::Loaded(l) => (1.0 + l) * params.net_premium(),
            Self::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub estimate: RuinEstimate,
    /// `|estimate - 0.005|`.
    pub abs_error: f64,
}

/// Ruin frequency at `C = MCR(n, P)` for each `n`. Capital is floored at 0
/// when the premium alone covers the quantile loss.
pub fn approximation_error_profile(
    params: &MarketParams,
    n_list: &[u64],
    rule: PremiumRule,
    trials: u64,
    seed: u64,
) -> Result<Vec<ProfileRow>> {
    if n_list.is_empty() {
        return domain("policy-count list is empty");
    }
    let premium = rule.premium(params);
    if !(premium > 0.0) {
        return domain(format!("premium must be positive, got {premium}"));
    }
    n_list
        .iter()
        .map(|&n| {
            let capital = mcr(params, n as f64, premium)?.max(0.0);
            let estimate = estimate_ruin_probability(&SimulationSpec {
                params: *params,
                n,
                premium,
                capital,
                trials,
                seed,
            })?;
            Ok(ProfileRow {
                abs_error: (estimate.estimate - TARGET_RUIN).abs(),
                estimate,
            })
        })
        .collect()
}

const CSV_HEADER: [&str; 8] = [
    "n",
    "premium",
    "capital",
    "trials",
    "estimate",
    "std_error",
    "seed",
    "rng",
];

fn estimate_fields(e: &RuinEstimate) -> Vec<String> {
    vec![
        e.n.to_string(),
        format!("{:?}", e.premium),
        format!("{:?}", e.capital),
        e.trials.to_string(),
        format!("{:?}", e.estimate),
        format!("{:?}", e.std_error),
        e.seed.to_string(),
        RNG_NAME.to_string(),
    ]
}

pub fn write_estimates_csv<W: Write>(out: W, estimates: &[RuinEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for e in estimates {
        w.write_record(estimate_fields(e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    header.push("abs_error");
    w.write_record(&header)?;
    for row in rows {
        let mut rec = estimate_fields(&row.estimate);
        rec.push(format!("{:?}", row.abs_error));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
