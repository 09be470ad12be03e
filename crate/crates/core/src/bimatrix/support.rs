//! Support enumeration over equal-size support pairs.

use nalgebra::{DMatrix, DVector};

/// Equilibria found by solving the indifference system of every equal-size
/// support pair, plus the number of singular systems skipped. `a`, `b` are
/// the row and column player's payoffs.
pub fn support_enumeration(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> (Vec<(Vec<f64>, Vec<f64>)>, usize) {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut found = Vec::new();
    let mut singular = 0;
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // y on `cols` makes every row in `rows` indifferent under A
                let y = indifference(k, |r, c| a[rows[r]][cols[c]]);
                // x on `rows` makes every column in `cols` indifferent under B
                let x = indifference(k, |r, c| b[rows[c]][cols[r]]);
                let (Some(ys), Some(xs)) = (y, x) else {
                    singular += 1;
                    continue;
                };
                if ys.iter().chain(&xs).any(|p| *p < -tol) {
                    continue;
                }
                let mut xf = vec![0.0; m];
                let mut yf = vec![0.0; n];
                for (r, &i) in rows.iter().enumerate() {
                    xf[i] = xs[r].max(0.0);
                }
                for (c, &j) in cols.iter().enumerate() {
                    yf[j] = ys[c].max(0.0);
                }
                if is_equilibrium(a, b, &xf, &yf, tol) {
                    found.push((xf, yf));
                }
            }
        }
    }
    (found, singular)
}

/// Solves `sum_c M[r][c] p_c = v` for all `r`, `sum p = 1`.
fn indifference(k: usize, entry: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let mut sys = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for r in 0..k {
        for c in 0..k {
            sys[(r, c)] = entry(r, c);
        }
        sys[(r, k)] = -1.0;
    }
    for c in 0..k {
        sys[(k, c)] = 1.0;
    }
    rhs[k] = 1.0;
    let lu = sys.lu();
    let sol = lu.solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    // reject near-singular systems whose solution does not satisfy them
    let check = lu_residual(k, &entry, &sol);
    (check < 1e-7).then(|| sol.iter().take(k).copied().collect())
}

fn lu_residual(k: usize, entry: &impl Fn(usize, usize) -> f64, sol: &DVector<f64>) -> f64 {
    let mut worst: f64 = (sol.iter().take(k).sum::<f64>() - 1.0).abs();
    for r in 0..k {
        let s: f64 = (0..k).map(|c| entry(r, c) * sol[c]).sum::<f64>() - sol[k];
        worst = worst.max(s.abs());
    }
    worst
}

fn is_equilibrium(a: &[Vec<f64>], b: &[Vec<f64>], x: &[f64], y: &[f64], tol: f64) -> bool {
    let row_vals: Vec<f64> = a.iter().map(|r| r.iter().zip(y).map(|(v, q)| v * q).sum()).collect();
    let n = y.len();
    let col_vals: Vec<f64> = (0..n).map(|j| b.iter().zip(x).map(|(r, p)| r[j] * p).sum()).collect();
    let u: f64 = row_vals.iter().zip(x).map(|(v, p)| v * p).sum();
    let w: f64 = col_vals.iter().zip(y).map(|(v, q)| v * q).sum();
    row_vals.iter().all(|v| *v <= u + tol) && col_vals.iter().all(|v| *v <= w + tol)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..k {
            cur[i] = cur[i - 1] + 1;
        }
    }
}
