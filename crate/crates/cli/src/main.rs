use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use solvency_core::bimatrix::{
    best_response_certificate, classify_type, enumerate_equilibria, write_equilibria_csv, BimatrixGame, SolveMethod,
    SolverOptions,
};
use solvency_core::equilibrium::{
    asymmetric_duopoly, symmetric_equilibrium, witness_profiles, LowerBoundRule, PremiumGrid,
};
use solvency_core::exante::{
    build_payoff_matrix, capital_grid, monopoly_capital, pure_ne_classification, PayoffMatrix,
};
use solvency_core::market::{full_market_point, inverse_demand, mpr, technical_optimum_premium, technical_result};
use solvency_core::montecarlo::{
    approximation_error_profile, estimate_ruin_probability, write_estimates_csv, write_profile_csv, PremiumRule,
    SimulationSpec,
};
use solvency_core::sweep::{run_sweep, BranchFilter, ParamRange, SweepConfig};
use solvency_core::{adjustment::expost_equilibrium, Error, MarketParams, PHI_995};

mod config;

#[derive(Parser)]
#[command(
    name = "solvency",
    version,
    about = "Premium competition under a solvency capital requirement"
)]
struct Cli {
    /// key=value parameter file; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Demand, MPR, iso-profit and zero-profit curves as plot data.
    #[command(args_override_self = true)]
    Curves(CurvesArgs),
    /// Second-period premium equilibria.
    #[command(args_override_self = true)]
    Equilibrium(EquilibriumArgs),
    /// Capital thresholds of the entry game.
    #[command(args_override_self = true)]
    Thresholds(ThresholdsArgs),
    /// Payoff matrix of the capital game.
    #[command(args_override_self = true)]
    PayoffMatrix(PayoffMatrixArgs),
    /// Mixed equilibria of a payoff matrix written by `payoff-matrix`.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Parameter grid sweep with equilibrium type counts.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Monte-Carlo ruin frequency at a given capital.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
}

/// Comma-separated numbers.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct FloatList(Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct CountList(Vec<u64>);

impl FromStr for CountList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad count {p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(CountList)
    }
}

/// `min:max:step`.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(transparent)]
struct RangeArg(ParamRange);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [v] => Ok(RangeArg(ParamRange::single(v))),
            [min, max, step] => ParamRange::new(min, max, step).map(RangeArg).map_err(|e| e.to_string()),
            _ => Err(format!("expected min:max:step, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum LowerBound {
    Raw,
    Floor,
}

impl From<LowerBound> for LowerBoundRule {
    fn from(v: LowerBound) -> Self {
        match v {
            LowerBound::Raw => LowerBoundRule::Raw,
            LowerBound::Floor => LowerBoundRule::NetPremiumFloor,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct MarketArgs {
    /// Claim probability.
    #[arg(long)]
    q: Option<f64>,
    /// Loss size per claim.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    loss: Option<f64>,
    /// Demand scale.
    #[arg(long)]
    alpha: Option<f64>,
    /// Interest rate on capital.
    #[arg(long)]
    r: Option<f64>,
    /// Solvency quantile (default: standard normal 99.5%).
    #[arg(long)]
    phi: Option<f64>,
    /// Fixed cost of an ex-post capital increase.
    #[arg(long = "penalty-B")]
    #[serde(rename = "B")]
    adjust_cost: Option<f64>,
    /// Optional finite value of the regulatory penalty.
    #[arg(long = "penalty-A")]
    #[serde(rename = "A")]
    penalty: Option<f64>,
}

impl MarketArgs {
    fn params(&self) -> Result<MarketParams> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Domain(format!("missing --{name}")));
        let p = MarketParams::new(
            need(self.q, "q")?,
            need(self.loss, "K")?,
            need(self.alpha, "alpha")?,
            need(self.r, "r")?,
        )?
        .with_phi(self.phi.unwrap_or(PHI_995))?
        .with_adjust_cost(self.adjust_cost.unwrap_or(0.0))?
        .with_penalty(self.penalty)?;
        Ok(p)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurvesArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Capital level(s), comma-separated.
    #[arg(long)]
    capital: FloatList,
    #[arg(long, default_value_t = 1.0)]
    n_min: f64,
    /// Defaults to the maximum demand.
    #[arg(long)]
    n_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(id = "mode", required = true, multiple = false, args = ["symmetric", "asymmetric", "expost"])]
struct EquilibriumArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Capital per firm; two values (small,high) for --asymmetric.
    #[arg(long)]
    capital: FloatList,
    /// Number of firms.
    #[arg(long, short = 'I', default_value_t = 2)]
    firms: u32,
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    asymmetric: bool,
    /// Capital may be raised after premiums are set.
    #[arg(long)]
    expost: bool,
    /// Premium tick; enables the discrete-grid analysis.
    #[arg(long)]
    premium_step: Option<f64>,
    #[arg(long, value_enum, default_value_t = LowerBound::Floor)]
    lower_bound: LowerBound,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ThresholdsArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PayoffMatrixArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Capital levels starting at 0; defaults to an even grid up to the
    /// zero-profit capital.
    #[arg(long)]
    levels: Option<FloatList>,
    /// Levels per player when --levels is absent, zero included.
    #[arg(long, default_value_t = 20)]
    grid_size: usize,
    #[arg(long, value_enum, default_value_t = LowerBound::Raw)]
    lower_bound: LowerBound,
    /// Also print a two-decimal table.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Vertex,
    Support,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolveArgs {
    /// Payoff matrix CSV.
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Vertex)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Keep strictly dominated strategies.
    #[arg(long)]
    keep_dominated: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    /// Demand scale range, min:max:step or a single value.
    #[arg(long)]
    alpha_range: Option<RangeArg>,
    /// Claim probability range.
    #[arg(long)]
    q_range: Option<RangeArg>,
    /// Loss size range.
    #[arg(long = "K-range")]
    #[serde(rename = "K_range")]
    loss_range: Option<RangeArg>,
    /// Interest rate range.
    #[arg(long)]
    r_range: Option<RangeArg>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, default_value_t = 20)]
    grid_size: usize,
    #[arg(long, default_value = "all-increasing")]
    filter: String,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = LowerBound::Raw)]
    lower_bound: LowerBound,
    /// Per-tuple CSV; the summary goes next to it as <stem>.summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Policy count(s), comma-separated.
    #[arg(long)]
    n: CountList,
    /// Defaults to the net premium qK.
    #[arg(long)]
    premium: Option<f64>,
    /// Defaults to the minimum capital requirement at (n, premium).
    #[arg(long)]
    capital: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: Value,
    version: &'static str,
    timestamp_unix: u64,
    seed: Option<u64>,
    outputs: Vec<String>,
}

fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    primary.with_file_name(format!("{stem}.manifest.json"))
}

fn write_manifest(
    primary: &Path,
    command: &str,
    args: &impl Serialize,
    seed: Option<u64>,
    outputs: &[&Path],
) -> Result<()> {
    let manifest = RunManifest {
        command,
        parameters: serde_json::to_value(args)?,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(primary);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(())
}

/// Runs `body` against the file at `out`, or stdout when absent.
fn with_output(out: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            ensure_dir(path)?;
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
        }
    }
    Ok(())
}

fn write_json(out: Option<&Path>, mut value: Value) -> Result<()> {
    if let (Some(path), Some(obj)) = (out, value.as_object_mut()) {
        obj.insert("manifest".into(), json!(manifest_path(path).display().to_string()));
    }
    with_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, &value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn run_curves(args: &CurvesArgs) -> Result<()> {
    let p = args.market.params()?;
    let n_max = args.n_max.unwrap_or_else(|| p.max_demand());
    if !(args.n_min > 0.0 && args.n_min <= n_max) || args.points == 0 {
        return Err(Error::Domain("need 0 < n-min <= n-max and at least one point".into()).into());
    }
    let count = if args.n_min == n_max { 1 } else { args.points.max(2) };
    let ns: Vec<f64> = (0..count)
        .map(|i| match count {
            1 => args.n_min,
            _ => args.n_min + (n_max - args.n_min) * i as f64 / (count - 1) as f64,
        })
        .collect();
    let mut rows: Vec<(String, f64, f64, f64, bool)> = Vec::new();
    for &n in &ns {
        if n <= p.max_demand() {
            rows.push(("demand".into(), f64::NAN, n, inverse_demand(&p, n)?, true));
        }
    }
    let qk = p.net_premium();
    for &c in &args.capital.0 {
        let upper = full_market_point(&p, c)?;
        let level = technical_result(&p, upper.premium, upper.n) - p.rate * c;
        for &n in &ns {
            let m = mpr(&p, n, c)?;
            rows.push(("mpr".into(), c, n, m.premium, !m.above_loss));
            rows.push(("zero-profit".into(), c, n, qk + p.rate * c / n, true));
            rows.push(("iso-profit".into(), c, n, qk + (level + p.rate * c) / n, true));
        }
    }
    with_output(args.out.as_deref(), |w| {
        let mut csv = csv_writer(w);
        csv.write_record(["curve", "capital", "n", "premium", "valid"])?;
        for (curve, c, n, prem, valid) in &rows {
            let cap = if c.is_nan() { String::new() } else { format!("{c:?}") };
            csv.write_record([
                curve.clone(),
                cap,
                format!("{n:?}"),
                format!("{prem:?}"),
                valid.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    if let Some(out) = &args.out {
        write_manifest(out, "curves", args, None, &[out])?;
    }
    Ok(())
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(w)
}

fn premium_grid(p: &MarketParams, capitals: &[f64], step: f64) -> Result<PremiumGrid> {
    if !(step > 0.0) {
        return Err(Error::Domain("premium step must be positive".into()).into());
    }
    let mut top = technical_optimum_premium(p);
    for &c in capitals {
        top = top.max(full_market_point(p, c)?.premium);
    }
    let start = (p.net_premium() / step).floor() * step;
    let count = ((1.5 * top - start) / step).ceil() as usize + 2;
    Ok(PremiumGrid::uniform(start.max(step), step, count)?)
}

fn run_equilibrium(args: &EquilibriumArgs) -> Result<()> {
    let p = args.market.params()?;
    let caps = &args.capital.0;
    let grid = args.premium_step.map(|s| premium_grid(&p, caps, s)).transpose()?;
    let report = if args.asymmetric {
        let [small, high] = caps[..] else {
            return Err(Error::Domain("--asymmetric needs two capitals: small,high".into()).into());
        };
        let set = asymmetric_duopoly(&p, small, high, grid.as_ref())?;
        json!({
            "mode": "asymmetric",
            "params": p,
            "capital": caps,
            "result": set,
            "witnesses": witness_profiles(&set, 2),
        })
    } else {
        let [capital] = caps[..] else {
            return Err(Error::Domain("this mode needs a single --capital".into()).into());
        };
        if args.expost {
            let outcome = expost_equilibrium(&p, capital, args.firms, grid.as_ref())?;
            json!({
                "mode": "expost",
                "params": p,
                "capital": capital,
                "firms": args.firms,
                "result": outcome,
            })
        } else {
            let set = symmetric_equilibrium(&p, capital, args.firms, grid.as_ref(), args.lower_bound.into())?;
            json!({
                "mode": "symmetric",
                "params": p,
                "capital": capital,
                "firms": args.firms,
                "result": set,
                "witnesses": witness_profiles(&set, args.firms as usize),
            })
        }
    };
    write_json(args.out.as_deref(), report)?;
    if let Some(out) = &args.out {
        write_manifest(out, "equilibrium", args, None, &[out])?;
    }
    Ok(())
}

fn run_thresholds(args: &ThresholdsArgs) -> Result<()> {
    let p = args.market.params()?;
    let report = pure_ne_classification(&p)?;
    let monopoly = monopoly_capital(&p)?;
    write_json(
        args.out.as_deref(),
        json!({
            "params": p,
            "thresholds": report.thresholds,
            "pure_equilibrium": report.class,
            "monopoly": monopoly,
        }),
    )?;
    if let Some(out) = &args.out {
        write_manifest(out, "thresholds", args, None, &[out])?;
    }
    Ok(())
}

fn run_payoff_matrix(args: &PayoffMatrixArgs) -> Result<()> {
    let p = args.market.params()?;
    let levels = match &args.levels {
        Some(l) => l.0.clone(),
        None => {
            if args.grid_size < 2 {
                return Err(Error::Domain("grid size must be at least 2".into()).into());
            }
            capital_grid(&p, args.grid_size - 1)?
        }
    };
    let matrix = build_payoff_matrix(&p, &levels, args.lower_bound.into())?;
    match &args.out {
        Some(out) => {
            with_output(Some(out), |w| Ok(matrix.write_csv(w, None)?))?;
            write_manifest(out, "payoff-matrix", args, None, &[out])?;
            if args.table {
                print!("{}", matrix.to_table());
            }
        }
        None if args.table => print!("{}", matrix.to_table()),
        None => with_output(None, |w| Ok(matrix.write_csv(w, None)?))?,
    }
    Ok(())
}

fn run_solve(args: &SolveArgs) -> Result<()> {
    let file = File::open(&args.game).with_context(|| format!("cannot open {}", args.game.display()))?;
    let matrix = PayoffMatrix::read_csv(file)?;
    let game = BimatrixGame::from_payoff_matrix(&matrix)?;
    let opts = SolverOptions {
        tolerance: args.tolerance,
        method: match args.method {
            MethodArg::Vertex => SolveMethod::VertexEnumeration,
            MethodArg::Support => SolveMethod::SupportEnumeration,
        },
        remove_dominated: !args.keep_dominated,
        ..SolverOptions::default()
    };
    let report = enumerate_equilibria(&game, &opts)?;
    let mut summary = String::new();
    for (k, eq) in report.equilibria.iter().enumerate() {
        let kind = classify_type(eq, 0, opts.merge_tolerance)?;
        let cert = best_response_certificate(&game, eq);
        summary.push_str(&format!(
            "{:>3}  {:?}  payoffs {:.2} / {:.2}  certificate {}\n",
            k + 1,
            kind,
            eq.row_payoff,
            eq.col_payoff,
            if cert.holds(opts.tolerance) { "ok" } else { "FAILED" }
        ));
    }
    match &args.out {
        Some(out) => {
            with_output(Some(out), |w| {
                Ok(write_equilibria_csv(w, &game, &report.equilibria, None)?)
            })?;
            write_manifest(out, "solve", args, None, &[out])?;
            print!("{summary}");
        }
        None => {
            with_output(None, |w| Ok(write_equilibria_csv(w, &game, &report.equilibria, None)?))?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let defaults = SweepConfig::default();
    let config = SweepConfig {
        alpha: args.alpha_range.map_or(defaults.alpha, |r| r.0),
        claim_prob: args.q_range.map_or(defaults.claim_prob, |r| r.0),
        loss: args.loss_range.map_or(defaults.loss, |r| r.0),
        rate: args.r_range.map_or(defaults.rate, |r| r.0),
        phi: args.phi.unwrap_or(PHI_995),
        grid_size: args.grid_size,
        filter: args.filter.parse::<BranchFilter>()?,
        tolerance: args.tolerance,
        jobs: args.jobs,
        rule: args.lower_bound.into(),
    };
    let result = run_sweep(&config)?;
    let s = &result.summary;
    println!(
        "tuples {} passed {} filtered-out {} skipped {} failed {}",
        s.total, s.passed, s.filtered_out, s.skipped, s.failed
    );
    println!(
        "equilibria type1 {} type2 {} type3 {} total {} (reference {} / {} / {})",
        s.counts.type1,
        s.counts.type2,
        s.counts.type3,
        s.counts.total,
        s.reference_counts.type1,
        s.reference_counts.type2,
        s.reference_counts.type3
    );
    if let Some(out) = &args.out {
        with_output(Some(out), |w| Ok(result.write_csv(w)?))?;
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        let summary_path = out.with_file_name(format!("{stem}.summary.json"));
        with_output(Some(&summary_path), |w| {
            result.write_summary_json(&mut *w)?;
            writeln!(w)?;
            Ok(())
        })?;
        write_manifest(out, "sweep", args, None, &[out, &summary_path])?;
    }
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let p = args.market.params()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let premium = args.premium.unwrap_or_else(|| p.net_premium());
    let ns = &args.n.0;
    pool.install(|| -> Result<()> {
        match args.capital {
            Some(capital) => {
                let estimates = ns
                    .iter()
                    .map(|&n| {
                        estimate_ruin_probability(&SimulationSpec {
                            params: p,
                            n,
                            premium,
                            capital,
                            trials: args.trials,
                            seed: args.seed,
                        })
                    })
                    .collect::<solvency_core::Result<Vec<_>>>()?;
                for e in &estimates {
                    let (lo, hi) = e.ci99();
                    eprintln!("n {} ruin {:.5} (99% CI {:.5}..{:.5})", e.n, e.estimate, lo, hi);
                }
                with_output(args.out.as_deref(), |w| Ok(write_estimates_csv(w, &estimates)?))
            }
            None => {
                let rows = approximation_error_profile(&p, ns, PremiumRule::Fixed(premium), args.trials, args.seed)?;
                for r in &rows {
                    let (lo, hi) = r.estimate.ci99();
                    eprintln!(
                        "n {} capital {:.2} ruin {:.5} (99% CI {:.5}..{:.5})",
                        r.estimate.n, r.estimate.capital, r.estimate.estimate, lo, hi
                    );
                }
                with_output(args.out.as_deref(), |w| Ok(write_profile_csv(w, &rows)?))
            }
        }
    })?;
    if let Some(out) = &args.out {
        write_manifest(out, "simulate", args, Some(args.seed), &[out])?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NotViable { .. }) => 3,
        Some(Error::Numeric(_)) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = Cli::parse_from(args);
    let outcome = match &cli.command {
        Command::Curves(a) => run_curves(a),
        Command::Equilibrium(a) => run_equilibrium(a),
        Command::Thresholds(a) => run_thresholds(a),
        Command::PayoffMatrix(a) => run_payoff_matrix(a),
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Simulate(a) => run_simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    fn kind_of(cause: &(dyn std::error::Error + 'static)) -> Option<io::ErrorKind> {
        if let Some(e) = cause.downcast_ref::<io::Error>() {
            return Some(e.kind());
        }
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return e.io_error_kind();
        }
        if let Some(csv::ErrorKind::Io(e)) = cause.downcast_ref::<csv::Error>().map(|e| e.kind()) {
            return Some(e.kind());
        }
        match cause.downcast_ref::<Error>()? {
            Error::Io(e) => Some(e.kind()),
            Error::Json(e) => e.io_error_kind(),
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            _ => None,
        }
    }
    err.chain()
        .any(|cause| kind_of(cause) == Some(io::ErrorKind::BrokenPipe))
}

fn ensure_dir(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}
