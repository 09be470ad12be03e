//! Mixed Nash equilibria of two-player finite games.
//!
//! The default method enumerates the vertices of both best-response
//! polytopes and pairs vertices with complementary labels, which returns
//! every extreme equilibrium even in degenerate games. Support enumeration
//! is available for small games.

mod io;
pub mod polytope;
mod support;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exante::PayoffMatrix;

pub use io::{read_equilibria_csv, write_equilibria_csv};
pub use support::support_enumeration;

/// Largest strategy count accepted per player.
pub const MAX_STRATEGIES: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BimatrixGame {
    /// `row_payoffs[i][j]`: row player's payoff at row `i`, column `j`.
    pub row_payoffs: Vec<Vec<f64>>,
    pub col_payoffs: Vec<Vec<f64>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl BimatrixGame {
    pub fn new(row_payoffs: Vec<Vec<f64>>, col_payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let m = row_payoffs.len();
        let n = row_payoffs.first().map_or(0, Vec::len);
        let game = Self {
            row_labels: (1..=m).map(|i| i.to_string()).collect(),
            col_labels: (1..=n).map(|j| j.to_string()).collect(),
            row_payoffs,
            col_payoffs,
        };
        game.validate()?;
        Ok(game)
    }

    /// The symmetric capital game: the column player's matrix is the transpose.
    pub fn from_payoff_matrix(matrix: &PayoffMatrix) -> Result<Self> {
        matrix.validate()?;
        let labels: Vec<String> = matrix.capital_levels.iter().map(|c| format!("{c}")).collect();
        let game = Self {
            row_payoffs: matrix.cells.clone(),
            col_payoffs: matrix.column_payoffs(),
            row_labels: labels.clone(),
            col_labels: labels,
        };
        game.validate()?;
        Ok(game)
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        self.validate()?;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.row_payoffs.len()
    }

    pub fn cols(&self) -> usize {
        self.row_payoffs.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.rows(), self.cols());
        if m == 0 || n == 0 {
            return domain("game has no strategies");
        }
        if m > MAX_STRATEGIES || n > MAX_STRATEGIES {
            return domain(format!(
                "game is {m}x{n}; at most {MAX_STRATEGIES} strategies per player"
            ));
        }
        let shaped = |a: &Vec<Vec<f64>>| a.len() == m && a.iter().all(|r| r.len() == n);
        if !shaped(&self.row_payoffs) || !shaped(&self.col_payoffs) {
            return domain("payoff matrices must both be m x n");
        }
        if self.row_labels.len() != m || self.col_labels.len() != n {
            return domain("label counts must match strategy counts");
        }
        if self
            .row_payoffs
            .iter()
            .chain(&self.col_payoffs)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return domain("payoffs must be finite");
        }
        Ok(())
    }

    /// Expected payoffs `(row, col)` of a strategy profile.
    pub fn expected_payoffs(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        (bilinear(&self.row_payoffs, x, y), bilinear(&self.col_payoffs, x, y))
    }
}

fn bilinear(a: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    a.iter()
        .zip(x)
        .map(|(row, xi)| xi * row.iter().zip(y).map(|(v, yj)| v * yj).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EquilibriumType {
    /// Both firms enter for sure.
    Type1,
    /// Exactly one firm enters for sure.
    Type2,
    /// Both firms stay out with positive probability.
    Type3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEquilibrium {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub row_payoff: f64,
    pub col_payoff: f64,
    pub eq_type: Option<EquilibriumType>,
}

impl MixedEquilibrium {
    pub fn row_support(&self, tol: f64) -> Vec<usize> {
        support_of(&self.row_strategy, tol)
    }

    pub fn col_support(&self, tol: f64) -> Vec<usize> {
        support_of(&self.col_strategy, tol)
    }
}

fn support_of(p: &[f64], tol: f64) -> Vec<usize> {
    p.iter()
        .enumerate()
        .filter(|(_, v)| **v > tol)
        .map(|(i, _)| i)
        .collect()
}

/// Type from the weight each player puts on the "stay out" strategy.
pub fn classify_type(eq: &MixedEquilibrium, zero_index: usize, tol: f64) -> Result<EquilibriumType> {
    let (Some(&row_zero), Some(&col_zero)) = (eq.row_strategy.get(zero_index), eq.col_strategy.get(zero_index)) else {
        return domain(format!("zero-capital index {zero_index} out of range"));
    };
    Ok(match (row_zero > tol, col_zero > tol) {
        (false, false) => EquilibriumType::Type1,
        (true, true) => EquilibriumType::Type3,
        _ => EquilibriumType::Type2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    #[default]
    VertexEnumeration,
    SupportEnumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Absolute tolerance in normalized payoff space.
    pub tolerance: f64,
    /// Equilibria closer than this (max-norm on strategies) are merged.
    pub merge_tolerance: f64,
    pub method: SolveMethod,
    /// Drop strictly dominated pure strategies before solving.
    pub remove_dominated: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            merge_tolerance: 1e-6,
            method: SolveMethod::default(),
            remove_dominated: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub equilibria: Vec<MixedEquilibrium>,
    /// Support pairs with a singular indifference system (support method).
    pub singular_supports: usize,
    /// Bases visited by the vertex walk, summed over both players.
    pub bases_visited: usize,
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
}

/// Payoffs rescaled per player into `[1, 2]`.
pub(crate) fn normalized(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let lo = a.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = a.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    a.iter()
        .map(|r| r.iter().map(|v| 1.0 + (v - lo) / span).collect())
        .collect()
}

/// Iteratively removes pure strategies strictly dominated by another pure
/// strategy. Returns the surviving row and column indices.
pub fn remove_strictly_dominated(game: &BimatrixGame, tol: f64) -> (Vec<usize>, Vec<usize>) {
    let a = normalized(&game.row_payoffs);
    let b = normalized(&game.col_payoffs);
    let mut rows: Vec<usize> = (0..game.rows()).collect();
    let mut cols: Vec<usize> = (0..game.cols()).collect();
    loop {
        let before = rows.len() + cols.len();
        let dominated_row = |i: usize, rows: &[usize], cols: &[usize]| {
            rows.iter()
                .any(|&k| k != i && cols.iter().all(|&j| a[k][j] > a[i][j] + tol))
        };
        let snapshot = rows.clone();
        rows.retain(|&i| !dominated_row(i, &snapshot, &cols));
        let dominated_col = |j: usize, rows: &[usize], cols: &[usize]| {
            cols.iter()
                .any(|&k| k != j && rows.iter().all(|&i| b[i][k] > b[i][j] + tol))
        };
        let snapshot = cols.clone();
        cols.retain(|&j| !dominated_col(j, &rows, &snapshot));
        if rows.len() + cols.len() == before {
            return (rows, cols);
        }
    }
}

/// All extreme equilibria (vertex method) or all equilibria with equal-size
/// supports (support method), deduplicated and sorted by support.
pub fn enumerate_equilibria(game: &BimatrixGame, options: &SolverOptions) -> Result<SolveReport> {
    game.validate()?;
    if !(options.tolerance > 0.0) || !(options.merge_tolerance > 0.0) {
        return domain("solver tolerances must be positive");
    }
    let (kept_rows, kept_cols) = if options.remove_dominated {
        remove_strictly_dominated(game, options.tolerance)
    } else {
        ((0..game.rows()).collect(), (0..game.cols()).collect())
    };
    let sub = |a: &[Vec<f64>]| -> Vec<Vec<f64>> {
        kept_rows
            .iter()
            .map(|&i| kept_cols.iter().map(|&j| a[i][j]).collect())
            .collect()
    };
    let a = normalized(&sub(&game.row_payoffs));
    let b = normalized(&sub(&game.col_payoffs));

    let (raw, singular, bases) = match options.method {
        SolveMethod::VertexEnumeration => {
            let (pairs, bases) = vertex_pairs(&a, &b, options.tolerance)?;
            (pairs, 0, bases)
        }
        SolveMethod::SupportEnumeration => {
            let (pairs, singular) = support_enumeration(&a, &b, options.tolerance);
            (pairs, singular, 0)
        }
    };

    let mut equilibria: Vec<MixedEquilibrium> = Vec::new();
    for (xs, ys) in raw {
        let mut x = vec![0.0; game.rows()];
        let mut y = vec![0.0; game.cols()];
        for (k, &i) in kept_rows.iter().enumerate() {
            x[i] = xs[k];
        }
        for (k, &j) in kept_cols.iter().enumerate() {
            y[j] = ys[k];
        }
        let duplicate = equilibria.iter().any(|e| {
            max_gap(&e.row_strategy, &x) <= options.merge_tolerance
                && max_gap(&e.col_strategy, &y) <= options.merge_tolerance
        });
        if duplicate {
            continue;
        }
        let (row_payoff, col_payoff) = game.expected_payoffs(&x, &y);
        equilibria.push(MixedEquilibrium {
            row_strategy: x,
            col_strategy: y,
            row_payoff,
            col_payoff,
            eq_type: None,
        });
    }
    let tol = options.merge_tolerance;
    equilibria.sort_by(|p, q| {
        p.row_support(tol)
            .cmp(&q.row_support(tol))
            .then_with(|| p.col_support(tol).cmp(&q.col_support(tol)))
            .then_with(|| cmp_vec(&p.row_strategy, &q.row_strategy))
            .then_with(|| cmp_vec(&p.col_strategy, &q.col_strategy))
    });
    Ok(SolveReport {
        equilibria,
        singular_supports: singular,
        bases_visited: bases,
        kept_rows,
        kept_cols,
    })
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

type Profile = (Vec<f64>, Vec<f64>);

/// Complementary vertex pairs of the polytopes
/// `P = {x >= 0, B^T x <= 1}` and `Q = {y >= 0, A y <= 1}`.
fn vertex_pairs(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> Result<(Vec<Profile>, usize)> {
    let m = a.len();
    let n = a[0].len();
    let bt: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| b[i][j]).collect()).collect();
    let (px, sx) = polytope::enumerate_vertices(&bt, tol)?;
    // symmetric games share one polytope
    let (qy, sy) = if bt.as_slice() == a {
        (px.clone(), polytope::WalkStats::default())
    } else {
        polytope::enumerate_vertices(a, tol)?
    };
    let full: u64 = if m + n == 64 { u64::MAX } else { (1u64 << (m + n)) - 1 };
    // P labels: x_i = 0 -> i, column j tight -> m + j (already in that layout).
    // Q labels: y_j = 0 -> m + j, row i tight -> i.
    let q_labels: Vec<u64> = qy
        .iter()
        .map(|v| {
            let zeros = v.tight & ((1u64 << n) - 1);
            let rows = v.tight >> n;
            (zeros << m) | rows
        })
        .collect();
    // A vertex with exactly `n` labels of Q (or `m` of P) is simple; its
    // partner must carry exactly the complementary label set.
    let mut simple: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut degenerate = Vec::new();
    for (idx, ly) in q_labels.iter().enumerate() {
        if ly.count_ones() as usize == n {
            simple.entry(*ly).or_default().push(idx);
        } else {
            degenerate.push(idx);
        }
    }
    let mut out = Vec::new();
    for x in &px {
        let need = full & !x.tight;
        let mut emit = |idx: usize| out.push((normalize(&x.point), normalize(&qy[idx].point)));
        if need.count_ones() as usize == n {
            if let Some(list) = simple.get(&need) {
                list.iter().for_each(|&i| emit(i));
            }
        } else {
            for (idx, ly) in q_labels.iter().enumerate() {
                if ly & need == need && ly.count_ones() as usize == n {
                    emit(idx);
                }
            }
        }
        for &idx in &degenerate {
            if q_labels[idx] & need == need {
                emit(idx);
            }
        }
    }
    Ok((out, sx.bases + sy.bases))
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|p| if *p > 0.0 { p / s } else { 0.0 }).collect()
}

/// Largest gain from a pure deviation, per player, in normalized payoffs.
/// Also checks that every supported strategy is a best response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub row_regret: f64,
    pub col_regret: f64,
    /// Largest shortfall of a supported strategy below the best reply.
    pub support_gap: f64,
    pub probabilities_ok: bool,
}

impl Certificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.probabilities_ok && self.row_regret <= tol && self.col_regret <= tol && self.support_gap <= tol
    }
}

pub fn best_response_certificate(game: &BimatrixGame, eq: &MixedEquilibrium) -> Certificate {
    let a = normalized(&game.row_payoffs);
    let b = normalized(&game.col_payoffs);
    let x = &eq.row_strategy;
    let y = &eq.col_strategy;
    let probs_ok = |p: &[f64]| p.iter().all(|v| *v >= -1e-12) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
    let row_vals: Vec<f64> = a.iter().map(|r| r.iter().zip(y).map(|(v, q)| v * q).sum()).collect();
    let col_vals: Vec<f64> = (0..game.cols())
        .map(|j| (0..game.rows()).map(|i| b[i][j] * x[i]).sum())
        .collect();
    let u: f64 = row_vals.iter().zip(x).map(|(v, p)| v * p).sum();
    let w: f64 = col_vals.iter().zip(y).map(|(v, q)| v * q).sum();
    let best_row = row_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best_col = col_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = |vals: &[f64], p: &[f64], best: f64| {
        vals.iter()
            .zip(p)
            .filter(|(_, q)| **q > 1e-9)
            .map(|(v, _)| best - v)
            .fold(0.0, f64::max)
    };
    Certificate {
        row_regret: best_row - u,
        col_regret: best_col - w,
        support_gap: gap(&row_vals, x, best_row).max(gap(&col_vals, y, best_col)),
        probabilities_ok: probs_ok(x) && probs_ok(y),
    }
}
