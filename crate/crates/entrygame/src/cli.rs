//! Command-line interface: solve, sweep, diagnose, selftest.
//!
//! Argument names mirror config-file keys one for one, and flags override
//! file values, which override defaults. Exit codes: 0 on success, 1 when a
//! selftest check fails, 2 for configuration problems, 3 for solver
//! failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::diagnostics::{
    classify_strategy, pi1_direct_derivative, pi1_total_derivative, strategic_effects,
    CommitmentMode, StrategicDiagnostics, StrategyLabel,
};
use crate::error::Error;
use crate::game::{Downstream, Game};
use crate::model::Market;
use crate::solve::maximize_scalar;
use crate::statics::{run_sweep_with, welfare_comparison, SweepParameter, SweepRow};

/// Backward-induction solver for a four-stage data-market entry game.
#[derive(Debug, Parser)]
#[command(name = "entrygame", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario end to end and report the equilibrium path.
    Solve(SolveArgs),
    /// Re-solve along a parameter grid and write CSV files.
    Sweep(SweepArgs),
    /// Strategic-effect diagnostics at an exclusive quantity.
    Diagnose(DiagnoseArgs),
    /// Check the solvers against brute-force oracles on random scenarios.
    Selftest(SelftestArgs),
}

/// Market, solver, and output settings shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, alias = "eta_max")]
    pub eta_max: Option<f64>,
    #[arg(long, alias = "eta_0")]
    pub eta_0: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, alias = "grid_n")]
    pub grid_n: Option<usize>,
    #[arg(long, alias = "tol_x")]
    pub tol_x: Option<f64>,
    #[arg(long, alias = "tol_fp")]
    pub tol_fp: Option<f64>,
    #[arg(long, alias = "max_iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long, alias = "entry_margin")]
    pub entry_margin: Option<f64>,
    /// Output format: table or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter to sweep: c0, delta, or F.
    #[arg(long)]
    pub param: Option<String>,
    /// Comma-separated grid values.
    #[arg(long)]
    pub grid: Option<String>,
    /// Comma-separated entry-cost levels.
    #[arg(long, alias = "f_levels")]
    pub f_levels: Option<String>,
    /// Replace the grid by this many equispaced points over its span.
    #[arg(long)]
    pub dense: Option<usize>,
    /// Directory CSV files are written into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Evaluate at this exclusive quantity instead of the accommodation
    /// optimum.
    #[arg(long)]
    pub d0: Option<f64>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random scenarios.
    #[arg(long)]
    pub draws: Option<usize>,
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Selftest(args) => match cmd_selftest(args) {
            Ok(all_passed) => {
                if all_passed {
                    Ok(())
                } else {
                    return 1;
                }
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Process exit code for a failure: 2 for configuration and input problems,
/// 3 for numerical failures.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config { .. } | Error::Domain { .. } | Error::Io { .. } => 2,
        _ => 3,
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if common.$field.is_some() {
                config.$field = common.$field;
            })*
        };
    }
    overlay!(eta_max, eta_0, k, delta, c, c0, f, lo, hi, grid_n, tol_x, tol_fp, max_iter, damping);
    if let Some(margin) = common.entry_margin {
        config.entry_margin = margin;
    }
    if let Some(format) = &common.format {
        config.format = format.parse()?;
    }
    Ok(config)
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let config = load_config(&args.common)?;
    let game = config.game()?;
    let outcome = game.solve_spne()?;

    match config.format {
        OutputFormat::Json => println!("{}", to_json(&outcome)?),
        OutputFormat::Table => {
            println!("regime          {}", outcome.regime);
            println!("entered         {}", outcome.entered);
            println!("d0              {}", outcome.d0);
            println!("w0              {}", outcome.w0);
            match &outcome.downstream {
                Downstream::Monopsony(m) => {
                    println!("d1              {}", m.d1m);
                    println!("d2              0 (challenger out)");
                    println!("w               {}", m.w);
                }
                Downstream::Duopsony(eq) => {
                    println!("d1              {}", eq.d1);
                    println!("d2              {}", eq.d2);
                    println!("w               {}", eq.w);
                }
            }
            let p = &outcome.profits;
            println!("pi1             {}", p.pi1);
            println!("pi2             {}", p.pi2);
            println!("pi_p1           {}", p.pi_p1);
            println!("pi_p0           {}", p.pi_p0);
            println!("welfare         {}", p.sw);
            println!("d0 (monopsony)  {}", outcome.d0_monopsony);
            match (outcome.pi1_deter, outcome.pi1_accommodate) {
                (Some(det), Some(acc)) => {
                    println!("pi1 if deterring     {det}");
                    println!("pi1 if accommodating {acc}");
                }
                (Some(det), None) => {
                    println!("pi1 if deterring     {det}");
                    println!("accommodation        infeasible");
                }
                (None, Some(acc)) => {
                    println!("deterrence           infeasible");
                    println!("pi1 if accommodating {acc}");
                }
                (None, None) => {}
            }
        }
    }
    Ok(())
}

/// Fixed column set of sweep CSV files.
pub const SWEEP_CSV_HEADER: &str = "param_value,F,regime,d0_det,d0_acc,d0_mon,pi1_det,pi1_acc,pi2,pi_p1,pi_p0,sw_det,sw_acc,sed,sea,slope_br2";

/// Renders sweep rows as CSV with the fixed header. Absent values are empty
/// fields; numbers print as full-precision shortest round-trip decimals, so
/// equal inputs produce byte-identical files.
pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let regime = row
            .regime
            .map(|r| r.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.param_value,
            row.f,
            regime,
            opt(row.d0_det),
            opt(row.d0_acc),
            opt(row.d0_mon),
            opt(row.pi1_det),
            opt(row.pi1_acc),
            opt(row.pi2_acc),
            opt(row.pi_p1),
            opt(row.pi_p0),
            opt(row.sw_det()),
            opt(row.sw_acc()),
            opt(row.sed),
            opt(row.sea),
            opt(row.slope_br2),
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct SweepReport {
    files: Vec<String>,
    rows: Vec<SweepRow>,
    welfare: crate::statics::WelfareFinding,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let mut config = load_config(&args.common)?;
    if let Some(param) = &args.param {
        config.param = param.parse()?;
    }
    if let Some(grid) = &args.grid {
        config.grid = Some(parse_cli_list("grid", grid)?);
    }
    if let Some(levels) = &args.f_levels {
        config.f_levels = Some(parse_cli_list("f_levels", levels)?);
    }
    if args.dense.is_some() {
        config.dense = args.dense;
    }
    if args.out.is_some() {
        config.out = args.out.clone();
    }

    let spec = config.sweep_spec()?;
    let market = Market::new(spec.base)?;
    let settings = config.solve_settings(&market)?;
    let rows = run_sweep_with(&spec, &settings)?;

    let out_dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let mut files = Vec::new();
    match spec.parameter {
        SweepParameter::F => {
            let path = out_dir.join("sweep_f.csv");
            write_file(&path, &sweep_rows_to_csv(&rows))?;
            files.push(path.display().to_string());
        }
        param => {
            let mut levels: Vec<f64> = Vec::new();
            for row in &rows {
                if !levels.contains(&row.f) {
                    levels.push(row.f);
                }
            }
            for level in levels {
                let level_rows: Vec<SweepRow> = rows
                    .iter()
                    .filter(|r| r.f == level)
                    .cloned()
                    .collect();
                let path = out_dir.join(format!("sweep_{param}_f{level}.csv"));
                write_file(&path, &sweep_rows_to_csv(&level_rows))?;
                files.push(path.display().to_string());
            }
        }
    }

    let welfare = welfare_comparison(&rows, 1e-12);
    match config.format {
        OutputFormat::Json => {
            let report = SweepReport {
                files,
                rows,
                welfare,
            };
            println!("{}", to_json(&report)?);
        }
        OutputFormat::Table => {
            for file in &files {
                println!("wrote {file}");
            }
            println!(
                "rows: {} solved, {} failed",
                rows.iter().filter(|r| r.regime.is_some()).count(),
                rows.iter().filter(|r| r.regime.is_none()).count()
            );
            println!(
                "branch comparison over {} rows with both branches feasible:",
                welfare.rows_compared
            );
            let line = |name: &str, t: crate::statics::BranchTally| {
                println!(
                    "  {name:<8} deter {} / accommodate {} / tied {}",
                    t.deter, t.accommodate, t.tied
                );
            };
            line("welfare", welfare.sw);
            line("pi1", welfare.pi1);
            line("pi2", welfare.pi2);
            line("pi_p1", welfare.pi_p1);
            line("pi_p0", welfare.pi_p0);
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DiagnoseReport {
    diagnostics: StrategicDiagnostics,
    deterrence_stance: Option<StrategyLabel>,
    accommodation_stance: Option<StrategyLabel>,
    /// Total derivative of the incumbent's duopsony profit in `d0`.
    pi1_total_derivative: f64,
    /// Direct channel of that derivative, quantities held fixed.
    pi1_direct_derivative: f64,
    /// Gap between the total derivative and direct + sea.
    envelope_gap: f64,
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let mut config = load_config(&args.common)?;
    if args.d0.is_some() {
        config.d0 = args.d0;
    }
    if let Some(h) = args.h {
        config.h = h;
    }
    let game = config.game()?;
    let d0 = match config.d0 {
        Some(v) => v,
        None => game.solve_accommodation()?.d0,
    };

    let diag = strategic_effects(&game, d0, config.h)?;
    let total = pi1_total_derivative(&game, d0, config.h)?;
    let direct = pi1_direct_derivative(&game, d0, config.h)?;
    let report = DiagnoseReport {
        diagnostics: diag,
        deterrence_stance: classify_strategy(&diag, CommitmentMode::Deterrence),
        accommodation_stance: classify_strategy(&diag, CommitmentMode::Accommodation),
        pi1_total_derivative: total,
        pi1_direct_derivative: direct,
        envelope_gap: total - (direct + diag.sea),
    };

    if !diag.consistency_ok {
        eprintln!(
            "warning: sign consistency failed: sign(sea) != sign(sed) * sign(slope_br2) at d0 = {d0}"
        );
    }
    if !diag.step_stable {
        eprintln!("warning: halving the step moved an estimate by more than ten percent; treat these values with care");
    }

    match config.format {
        OutputFormat::Json => println!("{}", to_json(&report)?),
        OutputFormat::Table => {
            println!("d0                   {}", diag.d0);
            println!("step                 {}", diag.h);
            println!("sed                  {}", diag.sed);
            println!("sea                  {}", diag.sea);
            println!("dpi2/dd0 direct      {}", diag.direct_effect);
            println!("slope br1            {}", diag.slope_br1);
            println!("slope br2            {}", diag.slope_br2);
            println!("dd1*/dd0             {}", diag.dd1_dd0);
            println!("dd2*/dd0             {}", diag.dd2_dd0);
            println!(
                "quantities           {}",
                if diag.substitutes {
                    "strategic substitutes"
                } else {
                    "strategic complements"
                }
            );
            let stance = |label: Option<StrategyLabel>| match label {
                Some(StrategyLabel::TopDog) => "top dog (overinvest)",
                Some(StrategyLabel::PuppyDog) => "puppy dog (underinvest)",
                Some(StrategyLabel::LeanAndHungry) => "lean and hungry (underinvest)",
                Some(StrategyLabel::FatCat) => "overinvest to look soft (fat cat)",
                None => "indeterminate",
            };
            println!("deterrence stance    {}", stance(report.deterrence_stance));
            println!(
                "accommodation stance {}",
                stance(report.accommodation_stance)
            );
            println!("dPi1/dd0 total       {}", report.pi1_total_derivative);
            println!("dPi1/dd0 direct      {}", report.pi1_direct_derivative);
            println!("envelope gap         {}", report.envelope_gap);
            println!("step stable          {}", diag.step_stable);
            println!("sign consistency     {}", diag.consistency_ok);
        }
    }
    Ok(())
}

/// One scenario draw for the selftest, in the order the values leave the
/// generator.
#[derive(Debug, Clone, Copy)]
struct ScenarioDraw {
    c: f64,
    c0: f64,
    delta: f64,
    f: f64,
    d0: f64,
}

fn draw_scenario<R: Rng>(rng: &mut R) -> ScenarioDraw {
    ScenarioDraw {
        c: rng.gen_range(0.4..1.2),
        c0: rng.gen_range(0.4..1.2),
        delta: rng.gen_range(0.0..3.0),
        f: rng.gen_range(1e-5..1e-3),
        d0: rng.gen_range(0.0..1.0),
    }
}

const ORACLE_STEP: f64 = 1e-3;
const ORACLE_TOL: f64 = 5e-3;

/// Argmax of `f` over the oracle grid on `[0, hi]`.
fn grid_argmax<F: Fn(f64) -> f64>(f: F, hi: f64) -> f64 {
    let n = (hi / ORACLE_STEP).ceil() as usize;
    let mut best_x = 0.0;
    let mut best_f = f(0.0);
    for i in 1..=n {
        let x = (i as f64) * ORACLE_STEP;
        let v = f(x);
        if v > best_f {
            best_f = v;
            best_x = x;
        }
    }
    best_x
}

/// Grid Nash equilibrium by alternating best response on the oracle grid,
/// with an exhaustive fallback if the iteration cycles. Returns the
/// equilibrium plus whether the no-unilateral-deviation certificate holds.
fn grid_nash(game: &Game, d0: f64, hi: f64) -> ((f64, f64), bool) {
    let br1 = |d2: f64| grid_argmax(|d1| game.pi1_duo(d0, d1, d2), hi);
    let br2 = |d1: f64| grid_argmax(|d2| game.pi2_duo(d1, d2), hi);

    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut settled = false;
    for _ in 0..200 {
        let n1 = br1(d2);
        let n2 = br2(n1);
        if n1 == d1 && n2 == d2 {
            settled = true;
            break;
        }
        d1 = n1;
        d2 = n2;
    }
    if !settled {
        // exhaustive: for every candidate d1, pair it with the challenger's
        // grid response and keep the pair the incumbent cannot improve on
        let n = (hi / ORACLE_STEP).ceil() as usize;
        let mut best: Option<(f64, f64, f64)> = None; // (gap, d1, d2)
        for i in 0..=n {
            let x = (i as f64) * ORACLE_STEP;
            let y = br2(x);
            let gap = game.pi1_duo(d0, br1(y), y) - game.pi1_duo(d0, x, y);
            if best.map_or(true, |(g, _, _)| gap < g) {
                best = Some((gap, x, y));
            }
        }
        let (_, x, y) = best.expect("non-empty grid");
        d1 = x;
        d2 = y;
    }

    // certificate: neither player gains from any unilateral grid deviation
    let certified =
        br1(d2) == d1 && br2(d1) == d2 || {
            let p1 = game.pi1_duo(d0, d1, d2);
            let p2 = game.pi2_duo(d1, d2);
            game.pi1_duo(d0, br1(d2), d2) <= p1 + 1e-12
                && game.pi2_duo(d1, br2(d1)) <= p2 + 1e-12
        };
    ((d1, d2), certified)
}

fn cmd_selftest(args: SelftestArgs) -> Result<bool, Error> {
    let mut config = load_config(&args.common)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(draws) = args.draws {
        config.draws = draws;
    }

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut all_passed = true;
    let mut report = |name: String, passed: bool, detail: String| {
        all_passed &= passed;
        let flag = if passed { "pass" } else { "FAIL" };
        println!("{flag}  {name}  {detail}");
    };

    for index in 0..config.draws {
        let draw = draw_scenario(&mut rng);
        let mut params = config.market_params();
        params.c = draw.c;
        params.c0 = draw.c0;
        params.delta = draw.delta;
        params.f = draw.f;

        let game = match Game::from_params(params) {
            Ok(g) => g,
            Err(e) => {
                report(
                    format!("draw {index}: build"),
                    false,
                    format!("invalid scenario: {e}"),
                );
                continue;
            }
        };
        let hi = game.settings.hi;

        // the incumbent's purchase problem against a brute-force grid
        match game.solve_monopsony(draw.d0) {
            Ok(out) => {
                let oracle = grid_argmax(|d1| game.pi1_mono(draw.d0, d1), hi);
                let gap = (out.d1m - oracle).abs();
                report(
                    format!("draw {index}: monopsony"),
                    gap <= ORACLE_TOL,
                    format!("solver {} vs grid {} (gap {gap:.2e})", out.d1m, oracle),
                );
            }
            Err(e) => report(format!("draw {index}: monopsony"), false, e.to_string()),
        }

        // the entry continuation against a grid Nash equilibrium
        match game.solve_duopsony(draw.d0) {
            Ok(eq) => {
                let ((g1, g2), certified) = grid_nash(&game, draw.d0, hi);
                let gap1 = (eq.d1 - g1).abs();
                let gap2 = (eq.d2 - g2).abs();
                report(
                    format!("draw {index}: duopsony"),
                    certified && eq.report.converged && gap1 <= ORACLE_TOL && gap2 <= ORACLE_TOL,
                    format!(
                        "solver ({}, {}) vs grid ({g1}, {g2}) (gaps {gap1:.2e}, {gap2:.2e}{})",
                        eq.d1,
                        eq.d2,
                        if certified { "" } else { "; grid uncertified" }
                    ),
                );
            }
            Err(e) => report(format!("draw {index}: duopsony"), false, e.to_string()),
        }
    }

    // fixed structural checks alongside the random draws
    let game = config.game()?;
    let curve = &game.market.curve;
    report(
        "calibration: value at zero data".into(),
        (curve.value(0.0)? - game.market.params.eta_0).abs() <= 1e-12,
        format!("eta(0) = {}", curve.value(0.0)?),
    );
    let (x, fx) = maximize_scalar(|x| -(x - 1.0) * (x - 1.0), &game.settings)?;
    report(
        "scalar solver: known quadratic".into(),
        (x - 1.0).abs() <= 1e-6 && fx <= 1e-10,
        format!("argmax {x}"),
    );

    println!("{}", if all_passed { "selftest: ok" } else { "selftest: FAILED" });
    Ok(all_passed)
}

fn parse_cli_list(key: &'static str, value: &str) -> Result<Vec<f64>, Error> {
    value
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| Error::Config {
                key: key.into(),
                message: format!("cannot parse {part:?}"),
            })
        })
        .collect()
}

fn write_file(path: &std::path::Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Solver {
        stage: "render",
        message: format!("cannot serialize result: {e}"),
    })
}
