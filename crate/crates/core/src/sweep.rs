//! Grid sweep over market parameters: branch filtering, equilibrium
//! enumeration of the capital game per tuple and type counting.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bimatrix::{
    best_response_certificate, classify_type, enumerate_equilibria, BimatrixGame, EquilibriumType, SolverOptions,
};
use crate::equilibrium::LowerBoundRule;
use crate::error::{domain, Error, Result};
use crate::exante::{build_payoff_matrix, capital_grid};
use crate::market::{branch_of_intersection, Branch};
use crate::params::{MarketParams, PHI_995};

/// Inclusive range `min, min + step, ...` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ParamRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let range = Self { min, max, step };
        range.validate()?;
        Ok(range)
    }

    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            step: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return domain("range bounds must be finite");
        }
        if self.min > self.max {
            return domain(format!("range min {} exceeds max {}", self.min, self.max));
        }
        if !(self.step > 0.0) {
            return domain(format!("range step must be positive, got {}", self.step));
        }
        Ok(())
    }

    /// Values are computed as `min + i * step` so they do not drift.
    pub fn values(&self) -> Vec<f64> {
        let slack = self.step * 1e-9;
        (0..)
            .map(|i| self.min + i as f64 * self.step)
            .take_while(|v| *v <= self.max + slack)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchFilter {
    #[default]
    AllIncreasing,
    AllDecreasing,
    Any,
}

impl BranchFilter {
    fn accepts(self, branches: &[Branch]) -> bool {
        match self {
            Self::AllIncreasing => branches.iter().all(|b| *b == Branch::Increasing),
            Self::AllDecreasing => branches.iter().all(|b| *b == Branch::Decreasing),
            Self::Any => true,
        }
    }
}

impl std::str::FromStr for BranchFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-increasing" => Ok(Self::AllIncreasing),
            "all-decreasing" => Ok(Self::AllDecreasing),
            "any" => Ok(Self::Any),
            other => domain(format!(
                "unknown branch filter {other:?} (expected all-increasing, all-decreasing or any)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha: ParamRange,
    pub claim_prob: ParamRange,
    pub loss: ParamRange,
    pub rate: ParamRange,
    pub phi: f64,
    /// Capital levels per player, the zero level included.
    pub grid_size: usize,
    pub filter: BranchFilter,
    pub tolerance: f64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub rule: LowerBoundRule,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha: ParamRange {
                min: 90.0,
                max: 200.0,
                step: 20.0,
            },
            claim_prob: ParamRange {
                min: 0.01,
                max: 0.2,
                step: 0.04,
            },
            loss: ParamRange {
                min: 100.0,
                max: 1000.0,
                step: 200.0,
            },
            rate: ParamRange {
                min: 0.01,
                max: 0.3,
                step: 0.05,
            },
            phi: PHI_995,
            grid_size: 20,
            filter: BranchFilter::AllIncreasing,
            tolerance: 1e-8,
            jobs: 0,
            rule: LowerBoundRule::Raw,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for range in [&self.alpha, &self.claim_prob, &self.loss, &self.rate] {
            range.validate()?;
        }
        if self.grid_size < 2 {
            return domain(format!("capital grid needs at least 2 levels, got {}", self.grid_size));
        }
        if !(self.tolerance > 0.0) {
            return domain("solver tolerance must be positive");
        }
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return domain("phi must be positive");
        }
        Ok(())
    }

    /// Tuples in canonical order: alpha, then q, then K, then r.
    pub fn tuples(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::new();
        for alpha in self.alpha.values() {
            for q in self.claim_prob.values() {
                for loss in self.loss.values() {
                    for rate in self.rate.values() {
                        out.push([alpha, q, loss, rate]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TupleStatus {
    /// No viable capital grid (the rate is too high or parameters invalid).
    Skipped,
    FilteredOut,
    Failed,
    Passed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
    pub total: usize,
}

impl TypeCounts {
    fn add(&mut self, kind: EquilibriumType) {
        match kind {
            EquilibriumType::Type1 => self.type1 += 1,
            EquilibriumType::Type2 => self.type2 += 1,
            EquilibriumType::Type3 => self.type3 += 1,
        }
        self.total += 1;
    }

    fn merge(&mut self, other: &TypeCounts) {
        self.type1 += other.type1;
        self.type2 += other.type2;
        self.type3 += other.type3;
        self.total += other.total;
    }
}

/// Counts reported in the original study for the default grid.
pub const REFERENCE_COUNTS: TypeCounts = TypeCounts {
    type1: 326,
    type2: 976,
    type3: 564,
    total: 1866,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleRecord {
    pub alpha: f64,
    pub claim_prob: f64,
    pub loss: f64,
    pub rate: f64,
    pub status: TupleStatus,
    /// Top of the capital grid.
    pub top_capital: Option<f64>,
    pub increasing_levels: usize,
    pub decreasing_levels: usize,
    pub counts: TypeCounts,
    pub bases_visited: usize,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub skipped: usize,
    pub filtered_out: usize,
    pub failed: usize,
    pub passed: usize,
    pub counts: TypeCounts,
    pub reference_counts: TypeCounts,
    pub config: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<TupleRecord>,
    pub summary: SweepSummary,
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let tuples = config.tuples();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    let records: Vec<TupleRecord> = pool.install(|| tuples.par_iter().map(|t| evaluate_tuple(config, *t)).collect());
    Ok(summarize(config, records))
}

fn summarize(config: &SweepConfig, records: Vec<TupleRecord>) -> SweepResult {
    let mut summary = SweepSummary {
        total: records.len(),
        skipped: 0,
        filtered_out: 0,
        failed: 0,
        passed: 0,
        counts: TypeCounts::default(),
        reference_counts: REFERENCE_COUNTS,
        config: config.clone(),
    };
    for rec in &records {
        match rec.status {
            TupleStatus::Skipped => summary.skipped += 1,
            TupleStatus::FilteredOut => summary.filtered_out += 1,
            TupleStatus::Failed => summary.failed += 1,
            TupleStatus::Passed => summary.passed += 1,
        }
        summary.counts.merge(&rec.counts);
    }
    SweepResult { records, summary }
}

/// Evaluates one `(alpha, q, K, r)` tuple. Never fails; problems end up in
/// the record's status and diagnostic.
pub fn evaluate_tuple(config: &SweepConfig, [alpha, claim_prob, loss, rate]: [f64; 4]) -> TupleRecord {
    let mut rec = TupleRecord {
        alpha,
        claim_prob,
        loss,
        rate,
        status: TupleStatus::Skipped,
        top_capital: None,
        increasing_levels: 0,
        decreasing_levels: 0,
        counts: TypeCounts::default(),
        bases_visited: 0,
        diagnostic: String::new(),
    };
    let grid = MarketParams::new(claim_prob, loss, alpha, rate)
        .and_then(|p| p.with_phi(config.phi))
        .and_then(|p| capital_grid(&p, config.grid_size - 1).map(|levels| (p, levels)));
    let (params, levels) = match grid {
        Ok(v) => v,
        Err(e) => {
            rec.diagnostic = e.to_string();
            return rec;
        }
    };
    rec.top_capital = levels.last().copied();
    if let Err(e) = solve_tuple(config, &params, &levels, &mut rec) {
        rec.status = TupleStatus::Failed;
        rec.diagnostic = e.to_string();
    }
    rec
}

fn solve_tuple(config: &SweepConfig, params: &MarketParams, levels: &[f64], rec: &mut TupleRecord) -> Result<()> {
    let branches = levels[1..]
        .iter()
        .map(|c| branch_of_intersection(params, *c, 1))
        .collect::<Result<Vec<_>>>()?;
    rec.increasing_levels = branches.iter().filter(|b| **b == Branch::Increasing).count();
    rec.decreasing_levels = branches.len() - rec.increasing_levels;
    if !config.filter.accepts(&branches) {
        rec.status = TupleStatus::FilteredOut;
        return Ok(());
    }
    let matrix = build_payoff_matrix(params, levels, config.rule)?;
    let game = BimatrixGame::from_payoff_matrix(&matrix)?;
    let opts = SolverOptions {
        tolerance: config.tolerance,
        ..SolverOptions::default()
    };
    let report = enumerate_equilibria(&game, &opts)?;
    rec.bases_visited = report.bases_visited;
    for eq in &report.equilibria {
        let cert = best_response_certificate(&game, eq);
        if !cert.holds(config.tolerance) {
            return Err(Error::Numeric(format!(
                "equilibrium fails best-response check (regret {:.3e}, {:.3e})",
                cert.row_regret, cert.col_regret
            )));
        }
        rec.counts.add(classify_type(eq, 0, opts.merge_tolerance)?);
    }
    rec.status = TupleStatus::Passed;
    Ok(())
}

/// Aggregate type counts.
pub fn type_distribution(result: &SweepResult) -> TypeCounts {
    let mut counts = TypeCounts::default();
    for rec in &result.records {
        counts.merge(&rec.counts);
    }
    counts
}

impl SweepResult {
    /// One row per tuple; floats use the shortest exact representation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "alpha",
            "q",
            "K",
            "r",
            "status",
            "top_capital",
            "increasing_levels",
            "decreasing_levels",
            "type1",
            "type2",
            "type3",
            "equilibria",
            "bases_visited",
            "diagnostic",
        ])?;
        for rec in &self.records {
            let status = match rec.status {
                TupleStatus::Skipped => "skipped",
                TupleStatus::FilteredOut => "filtered-out",
                TupleStatus::Failed => "failed",
                TupleStatus::Passed => "passed",
            };
            w.write_record([
                format!("{:?}", rec.alpha),
                format!("{:?}", rec.claim_prob),
                format!("{:?}", rec.loss),
                format!("{:?}", rec.rate),
                status.to_string(),
                rec.top_capital.map(|c| format!("{c:?}")).unwrap_or_default(),
                rec.increasing_levels.to_string(),
                rec.decreasing_levels.to_string(),
                rec.counts.type1.to_string(),
                rec.counts.type2.to_string(),
                rec.counts.type3.to_string(),
                rec.counts.total.to_string(),
                rec.bases_visited.to_string(),
                rec.diagnostic.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.summary)?;
        Ok(())
    }
}
