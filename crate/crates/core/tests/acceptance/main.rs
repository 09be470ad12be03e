//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line to the real stdout (bypassing capture) and then asserts.

mod oracles;
mod properties;

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use solvency_core::bimatrix::{
    best_response_certificate, classify_type, enumerate_equilibria, BimatrixGame, EquilibriumType, MixedEquilibrium,
    SolverOptions,
};
use solvency_core::equilibrium::{monopoly_vs_duopoly_check, LowerBoundRule};
use solvency_core::exante::{build_payoff_matrix, capital_grid, thresholds, PayoffMatrix};
use solvency_core::market::mcr;
use solvency_core::montecarlo::{estimate_ruin_probability, SimulationSpec};
use solvency_core::sweep::{run_sweep, SweepConfig, REFERENCE_COUNTS};
use solvency_core::MarketParams;

fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {criterion}: {verdict} {detail}").unwrap();
    out.flush().unwrap();
    assert!(ok, "criterion {criterion}: {detail}");
}

/// Reference cells within `max(0.5% relative, 0.25 absolute)`.
fn cell_close(got: f64, want: f64) -> bool {
    (got - want).abs() <= (0.005 * want.abs()).max(0.25)
}

/// Reference payoff table, reordered so the zero-capital level comes first.
struct ReferenceTable {
    levels: Vec<f64>,
    cells: Vec<Vec<f64>>,
}

fn reference_table(name: &str) -> ReferenceTable {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<f64> = reader
        .headers()
        .unwrap()
        .iter()
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    // the zero level is printed last
    let n = header.len();
    let order: Vec<usize> = std::iter::once(n - 1).chain(0..n - 1).collect();
    ReferenceTable {
        levels: order.iter().map(|&i| header[i]).collect(),
        cells: order
            .iter()
            .map(|&i| order.iter().map(|&j| rows[i][j + 1]).collect())
            .collect(),
    }
}

fn mismatches(matrix: &PayoffMatrix, table: &ReferenceTable) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, row) in table.cells.iter().enumerate() {
        for (j, &want) in row.iter().enumerate() {
            let got = matrix.cells[i][j];
            if !cell_close(got, want) {
                bad.push(format!(
                    "({}, {}): {got:.3} vs {want}",
                    table.levels[i], table.levels[j]
                ));
            }
        }
    }
    bad
}

fn low_rate_market() -> MarketParams {
    MarketParams::new(0.05, 900.0, 90.0, 0.01).unwrap()
}

fn high_rate_market() -> MarketParams {
    MarketParams::new(0.025, 600.0, 150.0, 0.2).unwrap()
}

fn solve(matrix: &PayoffMatrix) -> (BimatrixGame, Vec<MixedEquilibrium>) {
    let game = BimatrixGame::from_payoff_matrix(matrix).unwrap();
    let report = enumerate_equilibria(&game, &SolverOptions::default()).unwrap();
    (game, report.equilibria)
}

fn all_certified(game: &BimatrixGame, eqs: &[MixedEquilibrium]) -> bool {
    eqs.iter().all(|eq| best_response_certificate(game, eq).holds(1e-8))
}

/// Runs every check, catching panics; returns the names that failed.
fn failed_checks<'a>(checks: &[(&'a str, fn())]) -> Vec<&'a str> {
    checks
        .iter()
        .filter(|(_, check)| panic::catch_unwind(AssertUnwindSafe(check)).is_err())
        .map(|(name, _)| *name)
        .collect()
}

#[test]
fn criterion_1_low_rate_payoff_table() {
    let table = reference_table("low_rate_payoffs.csv");
    let start = Instant::now();
    let matrix = build_payoff_matrix(&low_rate_market(), &table.levels, LowerBoundRule::Raw).unwrap();
    let elapsed = start.elapsed();
    let bad = mismatches(&matrix, &table);
    let ok = bad.is_empty() && elapsed < Duration::from_secs(1);
    report(
        1,
        ok,
        &format!(
            "{} of 400 cells off tolerance {:?}, built in {elapsed:?}",
            bad.len(),
            bad.first()
        ),
    );
}

#[test]
fn criterion_2_high_rate_payoff_table() {
    let p = high_rate_market();
    let table = reference_table("high_rate_payoffs.csv");
    let start = Instant::now();
    let levels = capital_grid(&p, 19).unwrap();
    let matrix = build_payoff_matrix(&p, &levels, LowerBoundRule::Raw).unwrap();
    let elapsed = start.elapsed();
    let bad = mismatches(&matrix, &table);
    let top = thresholds(&p).unwrap().c_1z;
    let top_ok = (top - 1471.67).abs() <= 0.005 * 1471.67;
    let ok = bad.is_empty() && top_ok && elapsed < Duration::from_secs(1);
    report(
        2,
        ok,
        &format!(
            "{} of 400 cells off tolerance {:?}, top capital {top:.2}, built in {elapsed:?}",
            bad.len(),
            bad.first()
        ),
    );
}

#[test]
fn criterion_3_low_rate_equilibria() {
    let table = reference_table("low_rate_payoffs.csv");
    let matrix = build_payoff_matrix(&low_rate_market(), &table.levels, LowerBoundRule::Raw).unwrap();
    let (game, eqs) = solve(&matrix);
    let near = |a: f64, b: f64| (a - b).abs() <= 0.1;
    let symmetric = eqs.iter().find(|e| {
        let same = e
            .row_strategy
            .iter()
            .zip(&e.col_strategy)
            .all(|(x, y)| (x - y).abs() <= 1e-6);
        same && near(e.row_payoff, 9.149) && near(e.col_payoff, 9.149)
    });
    let asymmetric = eqs.iter().find(|e| {
        (near(e.row_payoff, 8.4) && near(e.col_payoff, 11.026))
            || (near(e.row_payoff, 11.026) && near(e.col_payoff, 8.4))
    });
    let certified = all_certified(&game, &eqs);
    let payoffs: Vec<(f64, f64)> = eqs.iter().map(|e| (e.row_payoff, e.col_payoff)).collect();
    report(
        3,
        symmetric.is_some() && asymmetric.is_some() && certified,
        &format!(
            "{} equilibria {payoffs:.3?}, symmetric found {}, asymmetric found {}, certified {certified}",
            eqs.len(),
            symmetric.is_some(),
            asymmetric.is_some()
        ),
    );
}

#[test]
fn criterion_4_high_rate_equilibria() {
    let p = high_rate_market();
    let matrix = build_payoff_matrix(&p, &capital_grid(&p, 19).unwrap(), LowerBoundRule::Raw).unwrap();
    let (game, eqs) = solve(&matrix);
    let typed: Vec<(EquilibriumType, &MixedEquilibrium)> =
        eqs.iter().map(|e| (classify_type(e, 0, 1e-9).unwrap(), e)).collect();
    let out_of_market = typed.iter().any(|(t, e)| {
        *t == EquilibriumType::Type3
            && e.row_payoff.abs() <= 1e-6
            && e.col_payoff.abs() <= 1e-6
            && e.row_strategy[0] > 0.0
            && e.col_strategy[0] > 0.0
    });
    let near = |a: f64, b: f64| (a - b).abs() <= 0.2;
    let single_entrant = typed.iter().any(|(t, e)| {
        *t == EquilibriumType::Type2
            && ((near(e.row_payoff, 0.0) && near(e.col_payoff, 3.0))
                || (near(e.row_payoff, 3.0) && near(e.col_payoff, 0.0)))
    });
    let certified = all_certified(&game, &eqs);
    let summary: Vec<(EquilibriumType, f64, f64)> =
        typed.iter().map(|(t, e)| (*t, e.row_payoff, e.col_payoff)).collect();
    report(
        4,
        out_of_market && single_entrant && certified,
        &format!("{} equilibria {summary:.3?}, certified {certified}", eqs.len()),
    );
}

#[test]
fn criterion_5_sweep() {
    let config = SweepConfig::default();
    let start = Instant::now();
    let result = run_sweep(&config).unwrap();
    let elapsed = start.elapsed();
    let s = &result.summary;
    let c = s.counts;
    let ok = s.total == 900
        && (520..=560).contains(&s.passed)
        && c.type1 > 0
        && c.type2 > 0
        && c.type3 > 0
        && c.type2 >= c.type1.max(c.type3)
        && c.total >= s.passed
        && elapsed < Duration::from_secs(600);
    report(
        5,
        ok,
        &format!(
            "{} tuples, {} passing the filter (expected 540 +- 20), {} skipped, {} failed; types {}/{}/{} total {} \
             (reference {}/{}/{} total {}); {:.1?}",
            s.total,
            s.passed,
            s.skipped,
            s.failed,
            c.type1,
            c.type2,
            c.type3,
            c.total,
            REFERENCE_COUNTS.type1,
            REFERENCE_COUNTS.type2,
            REFERENCE_COUNTS.type3,
            REFERENCE_COUNTS.total,
            elapsed
        ),
    );
}

#[test]
fn criterion_6_oracles() {
    let start = Instant::now();
    let failed = failed_checks(oracles::CHECKS);
    let elapsed = start.elapsed();
    report(
        6,
        failed.is_empty() && elapsed < Duration::from_secs(30),
        &format!(
            "{} oracle checks, failed {failed:?}, {elapsed:.1?}",
            oracles::CHECKS.len()
        ),
    );
}

#[test]
fn criterion_7_properties() {
    let failed = failed_checks(properties::CHECKS);
    report(
        7,
        failed.is_empty(),
        &format!("{} property checks, failed {failed:?}", properties::CHECKS.len()),
    );
}

#[test]
fn criterion_8_monopoly_undercuts_duopoly() {
    let p = MarketParams::new(0.2, 100.0, 90.0, 0.03).unwrap();
    let cmp = monopoly_vs_duopoly_check(&p, 100.0).unwrap();
    let within = |a: f64, b: f64| (a - b).abs() <= 0.01 * b;
    let ok = cmp.monopoly_cheaper && within(cmp.monopoly_premium, 46.5) && within(cmp.duopoly_share_premium, 72.5);
    report(
        8,
        ok,
        &format!(
            "monopoly {:.3} vs duopoly share premium {:.3}",
            cmp.monopoly_premium, cmp.duopoly_share_premium
        ),
    );
}

#[test]
fn criterion_9_monte_carlo_ruin() {
    let params = MarketParams::new(0.1, 100.0, 110.0, 0.03).unwrap();
    let n = 10_000;
    let premium = 10.5;
    let spec = SimulationSpec {
        params,
        n,
        premium,
        capital: mcr(&params, n as f64, premium).unwrap(),
        trials: 1_000_000,
        seed: 2024,
    };
    let start = Instant::now();
    let first = estimate_ruin_probability(&spec).unwrap();
    let elapsed = start.elapsed();
    let again = estimate_ruin_probability(&spec).unwrap();
    let (low, high) = first.ci99();
    let ok = low <= 0.0055 && first == again && elapsed < Duration::from_secs(60);
    report(
        9,
        ok,
        &format!(
            "ruin frequency {:.5} (99% CI {low:.5}..{high:.5}), repeatable {}, {elapsed:.1?}",
            first.estimate,
            first == again
        ),
    );
}
