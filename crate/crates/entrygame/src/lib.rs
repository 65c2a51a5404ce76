//! Backward-induction solver for a four-stage data-market entry game.
//!
//! An incumbent data aggregator controls an exclusive producer and chooses
//! how much of that data to buy before a challenger decides whether to pay a
//! fixed cost and enter. If entry happens, both aggregators compete for the
//! shared producer's data in a simultaneous purchase game. Solving the game
//! backwards classifies every parameter point as blockaded, deterred, or
//! accommodated entry, and the surrounding tooling measures how the
//! exclusive purchase shifts the downstream equilibrium.
//!
//! The crate is organized as a library first; the `entrygame` binary is a
//! thin wrapper over [`cli`]. Start with the runnable examples:
//!
//! - `solve_baseline` solves the default scenario end to end.
//! - `regime_map` classifies entry regimes across holdings costs and entry
//!   fees.
//! - `sweep_csv` writes comparative-statics tables to CSV.
//! - `strategic_diagnostics` decomposes the incumbent's first-stage
//!   incentive into direct and strategic channels.
//! - `solver_check` cross-checks the solvers against brute-force grids.
//! - `value_curves` prints the primitive value and cost curves.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod game;
pub mod model;
pub mod solve;
pub mod statics;

pub use config::{OutputFormat, RunConfig};
pub use diagnostics::{
    classify_strategy, strategic_effects, CommitmentMode, StrategicDiagnostics, StrategyLabel,
};
pub use error::Error;
pub use game::{
    AccommodationPlan, DeterrencePlan, Downstream, DuopsonyEquilibrium, Game, MonopsonyOutcome,
    RegimeLabel, StageZeroOutcome,
};
pub use model::{AgentProfits, Market, MarketParams};
pub use solve::{FixedPointReport, SolveSettings};
pub use statics::{
    run_sweep, run_sweep_with, welfare_comparison, SweepParameter, SweepRow, SweepSpec,
    WelfareFinding,
};
