//! Comparative-statics sweeps and branch-by-branch welfare comparisons.
//!
//! A sweep re-solves the full game along a grid of one parameter, at one or
//! more entry-cost levels, and records both stage-zero branches for every
//! point: what the incumbent earns if it keeps the challenger out, what
//! everyone earns if it lets the challenger in, and the strategic-effect
//! diagnostics at the accommodation optimum. Rows come back in a fixed
//! order (entry-cost level outer, grid inner) and are plain data, ready for
//! CSV or JSON rendering.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diagnostics::{strategic_effects, DEFAULT_STEP};
use crate::error::Error;
use crate::game::{Game, RegimeLabel};
use crate::model::{AgentProfits, Market, MarketParams};
use crate::solve::SolveSettings;

/// Which parameter the sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    /// Exclusive producer's cost coefficient.
    C0,
    /// Economies-of-scope elasticity.
    Delta,
    /// Entry cost.
    F,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::C0 => "c0",
            SweepParameter::Delta => "delta",
            SweepParameter::F => "F",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "c0" => Ok(SweepParameter::C0),
            "delta" => Ok(SweepParameter::Delta),
            "F" | "f" => Ok(SweepParameter::F),
            other => Err(Error::Config {
                key: "param".into(),
                message: format!("unknown sweep parameter {other:?}; expected c0, delta, or F"),
            }),
        }
    }
}

/// What to sweep: one parameter along `grid`, crossed with `f_levels` when
/// the parameter is not the entry cost itself.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    /// Entry-cost levels crossed with the grid; ignored when sweeping the
    /// entry cost, whose grid doubles as the level list.
    pub f_levels: Vec<f64>,
    pub base: MarketParams,
}

pub fn default_c0_grid() -> Vec<f64> {
    vec![0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0]
}

pub fn default_delta_grid() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 3.0, 4.0]
}

/// Low, medium, and high entry cost.
pub fn default_f_levels() -> Vec<f64> {
    vec![5e-5, 5e-4, 7e-4]
}

/// `n` equispaced points from `lo` to `hi` inclusive.
pub fn dense_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * (i as f64) / ((n - 1) as f64))
        .collect()
}

impl SweepSpec {
    pub fn c0() -> Self {
        SweepSpec {
            parameter: SweepParameter::C0,
            grid: default_c0_grid(),
            f_levels: default_f_levels(),
            base: MarketParams::default(),
        }
    }

    pub fn delta() -> Self {
        SweepSpec {
            parameter: SweepParameter::Delta,
            grid: default_delta_grid(),
            f_levels: default_f_levels(),
            base: MarketParams::default(),
        }
    }

    pub fn f() -> Self {
        SweepSpec {
            parameter: SweepParameter::F,
            grid: default_f_levels(),
            f_levels: Vec::new(),
            base: MarketParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.grid.is_empty() {
            return Err(Error::Config {
                key: "grid".into(),
                message: "sweep grid must not be empty".into(),
            });
        }
        if !self.grid.iter().all(|v| v.is_finite()) {
            return Err(Error::Config {
                key: "grid".into(),
                message: "sweep grid values must be finite".into(),
            });
        }
        if self.parameter != SweepParameter::F {
            if self.f_levels.is_empty() {
                return Err(Error::Config {
                    key: "f_levels".into(),
                    message: "at least one entry-cost level is required".into(),
                });
            }
            if !self.f_levels.iter().all(|v| v.is_finite() && *v >= 0.0) {
                return Err(Error::Config {
                    key: "f_levels".into(),
                    message: "entry-cost levels must be finite and non-negative".into(),
                });
            }
        }
        self.base.validate()
    }

    /// The base parameters with the swept value and entry-cost level set.
    /// Parameter set for one sweep cell: the base scenario with the swept
    /// value and entry-fee level substituted in.
    pub fn apply(&self, value: f64, f_level: f64) -> MarketParams {
        let mut p = self.base;
        match self.parameter {
            SweepParameter::C0 => {
                p.c0 = value;
                p.f = f_level;
            }
            SweepParameter::Delta => {
                p.delta = value;
                p.f = f_level;
            }
            SweepParameter::F => p.f = value,
        }
        p
    }

    /// The `(entry-cost level, grid value)` pairs in row order.
    fn level_grid_pairs(&self) -> Vec<(f64, f64)> {
        match self.parameter {
            SweepParameter::F => self.grid.iter().map(|&v| (v, v)).collect(),
            _ => self
                .f_levels
                .iter()
                .flat_map(|&f| self.grid.iter().map(move |&v| (f, v)))
                .collect(),
        }
    }
}

/// One solved sweep point. Branch fields are `None` when that stage-zero
/// branch is infeasible; everything solver-derived is `None` when the row
/// failed outright, with the failure in `error`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub f: f64,
    pub regime: Option<RegimeLabel>,
    pub entered: Option<bool>,
    /// Unconstrained optimum of the no-entry continuation.
    pub d0_mon: Option<f64>,
    pub d0_det: Option<f64>,
    pub pi1_det: Option<f64>,
    pub profits_det: Option<AgentProfits>,
    pub d0_acc: Option<f64>,
    pub pi1_acc: Option<f64>,
    /// Challenger profit at the accommodation equilibrium.
    pub pi2_acc: Option<f64>,
    pub profits_acc: Option<AgentProfits>,
    /// Producer profits on the equilibrium path.
    pub pi_p1: Option<f64>,
    pub pi_p0: Option<f64>,
    /// Diagnostics at the accommodation optimum.
    pub sed: Option<f64>,
    pub sea: Option<f64>,
    pub slope_br1: Option<f64>,
    pub slope_br2: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn sw_det(&self) -> Option<f64> {
        self.profits_det.map(|p| p.sw)
    }

    pub fn sw_acc(&self) -> Option<f64> {
        self.profits_acc.map(|p| p.sw)
    }

    fn failed(param_value: f64, f: f64, error: String) -> Self {
        SweepRow {
            param_value,
            f,
            regime: None,
            entered: None,
            d0_mon: None,
            d0_det: None,
            pi1_det: None,
            profits_det: None,
            d0_acc: None,
            pi1_acc: None,
            pi2_acc: None,
            profits_acc: None,
            pi_p1: None,
            pi_p0: None,
            sed: None,
            sea: None,
            slope_br1: None,
            slope_br2: None,
            error: Some(error),
        }
    }
}

fn compute_row(
    params: MarketParams,
    param_value: f64,
    settings: Option<&SolveSettings>,
) -> SweepRow {
    let f = params.f;
    let game = match build_game(params, settings) {
        Ok(g) => g,
        Err(e) => return SweepRow::failed(param_value, f, e.to_string()),
    };
    let outcome = match game.solve_spne() {
        Ok(o) => o,
        Err(e) => return SweepRow::failed(param_value, f, e.to_string()),
    };

    let mut row = SweepRow {
        param_value,
        f,
        regime: Some(outcome.regime),
        entered: Some(outcome.entered),
        d0_mon: Some(outcome.d0_monopsony),
        d0_det: None,
        pi1_det: None,
        profits_det: None,
        d0_acc: None,
        pi1_acc: None,
        pi2_acc: None,
        profits_acc: None,
        pi_p1: Some(outcome.profits.pi_p1),
        pi_p0: Some(outcome.profits.pi_p0),
        sed: None,
        sea: None,
        slope_br1: None,
        slope_br2: None,
        error: None,
    };

    if let Some(plan) = &outcome.deterrence {
        row.d0_det = Some(plan.d0);
        row.pi1_det = Some(plan.pi1);
        row.profits_det = match outcome.regime {
            RegimeLabel::Accommodate => match game.solve_monopsony(plan.d0) {
                Ok(m) => Some(game.market.profits(plan.d0, m.d1m, 0.0, false)),
                Err(e) => {
                    row.error = Some(format!("deterrence continuation: {e}"));
                    None
                }
            },
            _ => Some(outcome.profits),
        };
    }

    if let Some(plan) = &outcome.accommodation {
        row.d0_acc = Some(plan.d0);
        row.pi1_acc = Some(plan.pi1);
        row.pi2_acc = Some(plan.equilibrium.pi2);
        row.profits_acc = Some(match outcome.regime {
            RegimeLabel::Accommodate => outcome.profits,
            _ => game
                .market
                .profits(plan.d0, plan.equilibrium.d1, plan.equilibrium.d2, true),
        });

        if plan.d0 >= DEFAULT_STEP {
            match strategic_effects(&game, plan.d0, DEFAULT_STEP) {
                Ok(diag) => {
                    row.sed = Some(diag.sed);
                    row.sea = Some(diag.sea);
                    row.slope_br1 = Some(diag.slope_br1);
                    row.slope_br2 = Some(diag.slope_br2);
                }
                Err(e) => row.error = Some(format!("diagnostics: {e}")),
            }
        }
    }

    row
}

fn build_game(params: MarketParams, settings: Option<&SolveSettings>) -> Result<Game, Error> {
    match settings {
        Some(s) => Game::new(Market::new(params)?, *s),
        None => Game::from_params(params),
    }
}

/// Solves every point of the sweep with default solver settings. Row-level
/// failures are recorded in the rows, not propagated; the error is reserved
/// for an invalid spec.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, Error> {
    spec.validate()?;
    Ok(spec
        .level_grid_pairs()
        .into_iter()
        .map(|(f, v)| compute_row(spec.apply(v, f), v, None))
        .collect())
}

/// Same as [`run_sweep`] with explicit solver settings.
pub fn run_sweep_with(spec: &SweepSpec, settings: &SolveSettings) -> Result<Vec<SweepRow>, Error> {
    spec.validate()?;
    settings.validate()?;
    Ok(spec
        .level_grid_pairs()
        .into_iter()
        .map(|(f, v)| compute_row(spec.apply(v, f), v, Some(settings)))
        .collect())
}

/// Which stage-zero branch an agent would rather see played.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BranchTally {
    pub deter: usize,
    pub accommodate: usize,
    pub tied: usize,
}

impl BranchTally {
    fn record(&mut self, det: f64, acc: f64, tol: f64) {
        if (det - acc).abs() <= tol {
            self.tied += 1;
        } else if det > acc {
            self.deter += 1;
        } else {
            self.accommodate += 1;
        }
    }
}

/// Branch preferences across the rows of a sweep where both branches exist.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct WelfareFinding {
    pub rows_compared: usize,
    pub sw: BranchTally,
    pub pi1: BranchTally,
    pub pi2: BranchTally,
    pub pi_p1: BranchTally,
    pub pi_p0: BranchTally,
}

/// Tallies, agent by agent, which branch pays more on every row where both
/// branches are feasible. Differences within `tie_tol` count as ties.
pub fn welfare_comparison(rows: &[SweepRow], tie_tol: f64) -> WelfareFinding {
    let mut finding = WelfareFinding::default();
    for row in rows {
        let (det, acc) = match (row.profits_det, row.profits_acc) {
            (Some(d), Some(a)) => (d, a),
            _ => continue,
        };
        finding.rows_compared += 1;
        finding.sw.record(det.sw, acc.sw, tie_tol);
        finding.pi1.record(det.pi1, acc.pi1, tie_tol);
        finding.pi2.record(det.pi2, acc.pi2, tie_tol);
        finding.pi_p1.record(det.pi_p1, acc.pi_p1, tie_tol);
        finding.pi_p0.record(det.pi_p0, acc.pi_p0, tie_tol);
    }
    finding
}
