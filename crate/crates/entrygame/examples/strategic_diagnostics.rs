//! Decompose the incumbent's first-stage incentive into direct and
//! strategic channels at the accommodation optimum.
//!
//! With entry accommodated, the total derivative of the incumbent's profit
//! in the exclusive quantity splits into a direct channel (holding the
//! downstream equilibrium fixed) and a strategic channel through the
//! challenger's equilibrium response. At an interior optimum the two must
//! cancel, which doubles as an end-to-end check of the solver chain.

use entrygame::diagnostics::{pi1_direct_derivative, pi1_total_derivative};
use entrygame::{
    classify_strategy, strategic_effects, CommitmentMode, Game, MarketParams, StrategyLabel,
};

fn main() -> Result<(), entrygame::Error> {
    let game = Game::from_params(MarketParams::default())?;
    let plan = game.solve_accommodation()?;
    println!("accommodation optimum: d0 = {}\n", plan.d0);

    let h = 1e-4;
    let diag = strategic_effects(&game, plan.d0, h)?;

    println!("equilibrium responses to the exclusive quantity");
    println!("  dd1*/dd0      {:>12.6}", diag.dd1_dd0);
    println!("  dd2*/dd0      {:>12.6}", diag.dd2_dd0);
    println!("  br1 slope     {:>12.6}", diag.slope_br1);
    println!("  br2 slope     {:>12.6}", diag.slope_br2);
    println!(
        "  purchases are strategic {}",
        if diag.substitutes { "substitutes" } else { "complements" }
    );
    println!();

    println!("strategic effects");
    println!("  on the challenger (sed)  {:>12.6}", diag.sed);
    println!("  on the incumbent  (sea)  {:>12.6}", diag.sea);
    println!("  exclusivity direct path  {:>12.6}", diag.direct_effect);
    println!();

    let stance = |label: Option<StrategyLabel>| match label {
        Some(l) => format!("{l:?}"),
        None => "indeterminate".into(),
    };
    println!(
        "taxonomy: deterrence stance {}, accommodation stance {}",
        stance(classify_strategy(&diag, CommitmentMode::Deterrence)),
        stance(classify_strategy(&diag, CommitmentMode::Accommodation)),
    );
    println!();

    let total = pi1_total_derivative(&game, plan.d0, h)?;
    let direct = pi1_direct_derivative(&game, plan.d0, h)?;
    println!("envelope decomposition of dPi1/dd0 at the optimum");
    println!("  total            {total:>14.8}");
    println!("  direct channel   {direct:>14.8}");
    println!("  strategic (sea)  {:>14.8}", diag.sea);
    println!("  direct + sea     {:>14.8}", direct + diag.sea);
    println!("  residual         {:>14.3e}", total - (direct + diag.sea));
    Ok(())
}
