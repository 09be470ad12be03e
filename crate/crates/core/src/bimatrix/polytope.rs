//! Vertex enumeration of best-response polytopes `{z >= 0, M z <= 1}` by a
//! depth-first walk over lexicographically feasible bases.
//!
//! The lexicographic rule makes every basis correspond to a vertex of a
//! perturbed simple polytope, so the walk reaches every vertex of the
//! original (possibly degenerate) polytope.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Largest `rows + cols` a basis bitmask can address.
pub const MAX_VARIABLES: usize = 64;

const PIVOT_EPS: f64 = 1e-10;
const LEX_EPS: f64 = 1e-9;

/// A vertex and the set of tight constraints (its labels).
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Vec<f64>,
    /// Bit `i` (for `i < dim`): `z_i = 0`. Bit `dim + j`: row `j` tight.
    pub tight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkStats {
    pub bases: usize,
    pub vertices: usize,
}

/// All vertices of `{z >= 0, M z <= 1}` except the origin. `m` is given
/// row-major as `k` constraint rows of length `d`; every entry must be
/// positive so the polytope is bounded.
pub fn enumerate_vertices(m: &[Vec<f64>], tol: f64) -> Result<(Vec<Vertex>, WalkStats)> {
    let k = m.len();
    let d = m.first().map_or(0, Vec::len);
    if k == 0 || d == 0 {
        return Err(Error::Domain("empty constraint matrix".into()));
    }
    if k + d > MAX_VARIABLES {
        return Err(Error::Domain(format!(
            "polytope too large: {k} + {d} variables exceeds {MAX_VARIABLES}"
        )));
    }
    if m.iter()
        .any(|row| row.len() != d || row.iter().any(|v| !(*v > 0.0) || !v.is_finite()))
    {
        return Err(Error::Domain(
            "constraint matrix must be rectangular and positive".into(),
        ));
    }
    let total = d + k;

    let full: u64 = if total == 64 { u64::MAX } else { (1u64 << total) - 1 };
    let structural: u64 = (1u64 << d) - 1;
    let start: u64 = ((1u64 << k) - 1) << d;
    let mut seen: HashSet<u64, BuildBasisHasher> = HashSet::with_hasher(BuildBasisHasher);
    seen.insert(start);
    let mut stack = vec![start];
    // a vertex is identified by its tight set
    let mut found: HashMap<u64, Vec<f64>, BuildBasisHasher> = HashMap::with_hasher(BuildBasisHasher);
    let mut stats = WalkStats::default();
    let mut inv = Inverse::new(k);
    let mut vars = Vec::with_capacity(k);
    let mut dir = vec![0.0; k];
    let mut point = vec![0.0; d];

    while let Some(basis) = stack.pop() {
        stats.bases += 1;
        vars.clear();
        let mut bits = basis;
        while bits != 0 {
            vars.push(bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
        if !inv.compute(&vars, d, m) {
            return Err(Error::Numeric("singular basis during vertex enumeration".into()));
        }

        let mut labels = full & !basis;
        for (r, &v) in vars.iter().enumerate() {
            if inv.values[r] <= tol {
                labels |= 1u64 << v;
            }
        }
        if labels & structural != structural {
            found.entry(labels).or_insert_with(|| {
                point.fill(0.0);
                for (r, &v) in vars.iter().enumerate() {
                    if v < d {
                        point[v] = inv.values[r].max(0.0);
                    }
                }
                point.clone()
            });
        }

        for enter in 0..total {
            if basis >> enter & 1 == 1 {
                continue;
            }
            inv.direction(enter, &vars, d, m, &mut dir);
            let values = &inv.values;
            let mut best: Option<usize> = None;
            for r in 0..k {
                if dir[r] <= PIVOT_EPS {
                    continue;
                }
                best = Some(match best {
                    Some(b) if !lex_less(values[r], inv.row(r), dir[r], values[b], inv.row(b), dir[b]) => b,
                    _ => r,
                });
            }
            let Some(leave) = best else { continue };
            let next = (basis & !(1u64 << vars[leave])) | (1u64 << enter);
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }

    let mut vertices: Vec<Vertex> = found
        .into_iter()
        .map(|(tight, point)| Vertex { point, tight })
        .collect();
    vertices.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap_or(std::cmp::Ordering::Equal));
    stats.vertices = vertices.len();
    Ok((vertices, stats))
}

/// Inverse of a basis of `[M | I]`.
///
/// Only the block of `M` formed by the tight rows and basic structural
/// columns is inverted; rows belonging to basic slacks follow from it.
struct Inverse {
    k: usize,
    /// Basic structural columns and the tight rows (non-basic slacks).
    cols: Vec<usize>,
    tight: Vec<usize>,
    /// Position of each constraint row in `tight`, or `usize::MAX`.
    tight_pos: Vec<usize>,
    work: Vec<f64>,
    /// Inverse of the `t x t` block, row-major.
    block: Vec<f64>,
    /// For each basic slack row `i`: `M[i][cols] * block`, row-major by row `i`.
    slack_rows: Vec<f64>,
    /// Explicit `B^-1`, row-major, rows in basis order.
    inv: Vec<f64>,
    values: Vec<f64>,
    scratch: Vec<f64>,
    z: Vec<f64>,
    basic_slack: Vec<bool>,
}

impl Inverse {
    fn new(k: usize) -> Self {
        Self {
            k,
            cols: Vec::with_capacity(k),
            tight: Vec::with_capacity(k),
            tight_pos: vec![usize::MAX; k],
            work: vec![0.0; k * k],
            block: vec![0.0; k * k],
            slack_rows: vec![0.0; k * k],
            inv: vec![0.0; k * k],
            values: vec![0.0; k],
            scratch: vec![0.0; k],
            z: vec![0.0; k],
            basic_slack: vec![false; k],
        }
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.inv[r * self.k..(r + 1) * self.k]
    }

    /// Returns false when the basis is singular. `vars` must be sorted, so
    /// structural variables come first.
    fn compute(&mut self, vars: &[usize], d: usize, m: &[Vec<f64>]) -> bool {
        let k = self.k;
        self.cols.clear();
        self.cols.extend(vars.iter().copied().filter(|v| *v < d));
        let t = self.cols.len();
        let basic_slack = &mut self.basic_slack;
        basic_slack.fill(false);
        for &v in vars.iter().filter(|v| **v >= d) {
            basic_slack[v - d] = true;
        }
        self.tight.clear();
        self.tight.extend((0..k).filter(|i| !self.basic_slack[*i]));
        if self.tight.len() != t {
            return false;
        }
        self.tight_pos.fill(usize::MAX);
        for (p, &i) in self.tight.iter().enumerate() {
            self.tight_pos[i] = p;
        }
        if !invert(t, &self.tight, &self.cols, m, &mut self.work, &mut self.block) {
            return false;
        }
        // structural values: block * 1
        let z = &mut self.z;
        for a in 0..t {
            z[a] = self.block[a * t..(a + 1) * t].iter().sum();
        }
        let z = &self.z;
        for (i, row) in m.iter().enumerate() {
            if !self.basic_slack[i] {
                continue;
            }
            for b in 0..t {
                self.slack_rows[i * t + b] = (0..t).map(|a| row[self.cols[a]] * self.block[a * t + b]).sum();
            }
        }
        self.inv.fill(0.0);
        for (r, &v) in vars.iter().enumerate() {
            let out = &mut self.inv[r * k..(r + 1) * k];
            if v < d {
                let a = r;
                for (b, &i) in self.tight.iter().enumerate() {
                    out[i] = self.block[a * t + b];
                }
                self.values[r] = z[a];
            } else {
                let i = v - d;
                out[i] = 1.0;
                for (b, &j) in self.tight.iter().enumerate() {
                    out[j] = -self.slack_rows[i * t + b];
                }
                self.values[r] = 1.0 - (0..t).map(|a| m[i][self.cols[a]] * z[a]).sum::<f64>();
            }
        }
        true
    }

    /// `B^-1` times the column of the entering variable, in basis order.
    fn direction(&mut self, enter: usize, vars: &[usize], d: usize, m: &[Vec<f64>], out: &mut [f64]) {
        let t = self.cols.len();
        if enter < d {
            let w = &mut self.scratch[..t];
            for (b, &i) in self.tight.iter().enumerate() {
                w[b] = m[i][enter];
            }
            for (r, &v) in vars.iter().enumerate() {
                out[r] = if v < d {
                    self.block[r * t..(r + 1) * t]
                        .iter()
                        .zip(w.iter())
                        .map(|(g, x)| g * x)
                        .sum()
                } else {
                    let i = v - d;
                    m[i][enter]
                        - self.slack_rows[i * t..(i + 1) * t]
                            .iter()
                            .zip(w.iter())
                            .map(|(h, x)| h * x)
                            .sum::<f64>()
                };
            }
        } else {
            let b = self.tight_pos[enter - d];
            for (r, &v) in vars.iter().enumerate() {
                out[r] = if v < d {
                    self.block[r * t + b]
                } else {
                    -self.slack_rows[(v - d) * t + b]
                };
            }
        }
    }
}

/// Gauss-Jordan inverse of `m[rows][cols]` into `out` (row-major `t x t`).
fn invert(t: usize, rows: &[usize], cols: &[usize], m: &[Vec<f64>], a: &mut [f64], out: &mut [f64]) -> bool {
    for (p, &i) in rows.iter().enumerate() {
        for (q, &c) in cols.iter().enumerate() {
            a[p * t + q] = m[i][c];
            out[p * t + q] = if p == q { 1.0 } else { 0.0 };
        }
    }
    for col in 0..t {
        let piv = (col..t)
            .max_by(|&x, &y| a[x * t + col].abs().total_cmp(&a[y * t + col].abs()))
            .unwrap_or(col);
        let p = a[piv * t + col];
        if p.abs() < 1e-13 {
            return false;
        }
        if piv != col {
            for j in 0..t {
                a.swap(piv * t + j, col * t + j);
                out.swap(piv * t + j, col * t + j);
            }
        }
        let scale = 1.0 / p;
        for j in 0..t {
            a[col * t + j] *= scale;
            out[col * t + j] *= scale;
        }
        for r in 0..t {
            if r == col {
                continue;
            }
            let f = a[r * t + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..t {
                a[r * t + j] -= f * a[col * t + j];
                out[r * t + j] -= f * out[col * t + j];
            }
        }
    }
    true
}

#[derive(Default, Clone, Copy)]
struct BuildBasisHasher;

impl std::hash::BuildHasher for BuildBasisHasher {
    type Hasher = BasisHasher;
    fn build_hasher(&self) -> BasisHasher {
        BasisHasher(0)
    }
}

/// Multiplicative hash for `u64` basis masks.
struct BasisHasher(u64);

impl std::hash::Hasher for BasisHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0 ^ u64::from(*b)).wrapping_mul(0x100_0000_01b3);
        }
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = (v ^ (v >> 29)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        self.0 ^= self.0 >> 32;
    }
}

/// Lexicographic comparison of `(value_a, row_a) / dir_a` against `(value_b, row_b) / dir_b`.
fn lex_less(value_a: f64, row_a: &[f64], dir_a: f64, value_b: f64, row_b: &[f64], dir_b: f64) -> bool {
    let first = std::iter::once(value_a).chain(row_a.iter().copied());
    let second = std::iter::once(value_b).chain(row_b.iter().copied());
    for (a, b) in first.zip(second) {
        let (x, y) = (a / dir_a, b / dir_b);
        let scale = x.abs().max(y.abs()).max(1.0);
        if x < y - LEX_EPS * scale {
            return true;
        }
        if x > y + LEX_EPS * scale {
            return false;
        }
    }
    false
}
