//! Strategic-effect diagnostics around a duopsony equilibrium.
//!
//! Everything here is finite differences on re-solved equilibria: how the
//! incumbent's exclusive quantity `d0` shifts each player's stage-2 choice,
//! how those shifts feed back into profits, and what investment stance the
//! signs recommend. The derivative estimates carry the noise of the
//! underlying solver, so each one is recomputed at half the step and the
//! [`StrategicDiagnostics::step_stable`] flag records whether the two agree.

use serde::Serialize;

use crate::error::Error;
use crate::game::Game;
use crate::solve::maximize_scalar;

/// Sign calls treat anything this close to zero as indeterminate.
pub const DEAD_BAND: f64 = 1e-8;

/// Default finite-difference step in `d0`.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Investment stances from the commitment taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StrategyLabel {
    /// Overinvest to look tough.
    TopDog,
    /// Underinvest to look harmless.
    PuppyDog,
    /// Underinvest to stay aggressive.
    LeanAndHungry,
    /// Overinvest to look soft.
    FatCat,
}

/// Which stage-zero posture the taxonomy is read for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommitmentMode {
    Deterrence,
    Accommodation,
}

/// Finite-difference diagnostics at one `d0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrategicDiagnostics {
    pub d0: f64,
    /// Step used for the reported estimates.
    pub h: f64,
    /// Strategic effect on the challenger: `(dPi2/dd1) (dd1*/dd0)`.
    pub sed: f64,
    /// Strategic effect on the incumbent under accommodation:
    /// `(dPi1/dd2) (dd2*/dd0)`.
    pub sea: f64,
    /// Partial of the challenger's profit in `d0` holding both stage-2
    /// quantities fixed. The challenger never touches the exclusive source,
    /// so this is identically zero; it is still computed, not assumed.
    pub direct_effect: f64,
    /// Slope of the incumbent's best response in the challenger's quantity.
    pub slope_br1: f64,
    /// Slope of the challenger's best response in the incumbent's quantity.
    pub slope_br2: f64,
    /// Equilibrium shift of the incumbent's purchase, `dd1*/dd0`.
    pub dd1_dd0: f64,
    /// Equilibrium shift of the challenger's purchase, `dd2*/dd0`.
    pub dd2_dd0: f64,
    /// Payoff partial `dPi2/dd1` at the equilibrium.
    pub dpi2_dd1: f64,
    /// Payoff partial `dPi1/dd2` at the equilibrium.
    pub dpi1_dd2: f64,
    /// Quantities react in opposite directions (downward-sloping challenger
    /// best response).
    pub substitutes: bool,
    /// The sign identity `sign(sea) = sign(sed) sign(slope_br2)` holds, or
    /// is indeterminate within the dead band.
    pub consistency_ok: bool,
    /// Halving the step moves no estimate by more than ten percent.
    pub step_stable: bool,
}

fn sign_with_dead_band(v: f64) -> i8 {
    if v.abs() <= DEAD_BAND {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn close_or_both_negligible(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale <= DEAD_BAND || (a - b).abs() <= 0.1 * scale
}

struct Estimates {
    sed: f64,
    sea: f64,
    slope_br1: f64,
    slope_br2: f64,
    dd1_dd0: f64,
    dd2_dd0: f64,
    dpi2_dd1: f64,
    dpi1_dd2: f64,
}

/// The challenger's profit as a function of the full market state. `d0`
/// enters the signature so the finite difference in `d0` exercises the real
/// profit composition; exclusivity keeps it out of the body.
fn challenger_profit_at(game: &Game, _d0: f64, d1: f64, d2: f64) -> f64 {
    game.pi2_duo(d1, d2)
}

fn converged_equilibrium(
    game: &Game,
    d0: f64,
) -> Result<crate::game::DuopsonyEquilibrium, Error> {
    let eq = game.solve_duopsony(d0)?;
    if !eq.report.converged {
        return Err(Error::Solver {
            stage: "diagnostics",
            message: format!("duopsony at d0 = {d0} did not converge"),
        });
    }
    Ok(eq)
}

fn estimates_at_step(
    game: &Game,
    d0: f64,
    h: f64,
    base: &crate::game::DuopsonyEquilibrium,
) -> Result<Estimates, Error> {
    let minus = converged_equilibrium(game, d0 - h)?;
    let plus = converged_equilibrium(game, d0 + h)?;
    let dd1_dd0 = (plus.d1 - minus.d1) / (2.0 * h);
    let dd2_dd0 = (plus.d2 - minus.d2) / (2.0 * h);

    let dpi2_dd1 =
        (game.pi2_duo(base.d1 + h, base.d2) - game.pi2_duo(base.d1 - h, base.d2)) / (2.0 * h);
    let dpi1_dd2 = (game.pi1_duo(d0, base.d1, base.d2 + h)
        - game.pi1_duo(d0, base.d1, base.d2 - h))
        / (2.0 * h);

    let br1_at = |d2: f64| {
        maximize_scalar(|d1| game.pi1_duo(d0, d1, d2), &game.settings).map(|(x, _)| x)
    };
    let br2_at = |d1: f64| {
        maximize_scalar(|d2| game.pi2_duo(d1, d2), &game.settings).map(|(x, _)| x)
    };
    // steps are clamped at zero quantities; divide by the actual span
    let d2_lo = (base.d2 - h).max(0.0);
    let d2_hi = base.d2 + h;
    let slope_br1 = (br1_at(d2_hi)? - br1_at(d2_lo)?) / (d2_hi - d2_lo);
    let d1_lo = (base.d1 - h).max(0.0);
    let d1_hi = base.d1 + h;
    let slope_br2 = (br2_at(d1_hi)? - br2_at(d1_lo)?) / (d1_hi - d1_lo);

    Ok(Estimates {
        sed: dpi2_dd1 * dd1_dd0,
        sea: dpi1_dd2 * dd2_dd0,
        slope_br1,
        slope_br2,
        dd1_dd0,
        dd2_dd0,
        dpi2_dd1,
        dpi1_dd2,
    })
}

/// Computes the full diagnostic block at `d0` with step `h`, re-solving the
/// equilibrium at the shifted points and halving the step once to judge
/// stability.
pub fn strategic_effects(game: &Game, d0: f64, h: f64) -> Result<StrategicDiagnostics, Error> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("h", h, "must be a positive step"));
    }
    if d0 - h < 0.0 {
        return Err(Error::domain(
            "d0",
            d0,
            "must leave room for a central difference: d0 - h >= 0",
        ));
    }
    let base = converged_equilibrium(game, d0)?;
    let full = estimates_at_step(game, d0, h, &base)?;
    let half = estimates_at_step(game, d0, 0.5 * h, &base)?;

    let step_stable = close_or_both_negligible(full.sed, half.sed)
        && close_or_both_negligible(full.sea, half.sea)
        && close_or_both_negligible(full.slope_br1, half.slope_br1)
        && close_or_both_negligible(full.slope_br2, half.slope_br2);

    let direct_effect = (challenger_profit_at(game, d0 + h, base.d1, base.d2)
        - challenger_profit_at(game, d0 - h, base.d1, base.d2))
        / (2.0 * h);

    let s_sea = sign_with_dead_band(full.sea);
    let s_sed = sign_with_dead_band(full.sed);
    let s_br2 = sign_with_dead_band(full.slope_br2);
    let consistency_ok = s_sea == 0 || s_sed == 0 || s_br2 == 0 || s_sea == s_sed * s_br2;

    Ok(StrategicDiagnostics {
        d0,
        h,
        sed: full.sed,
        sea: full.sea,
        direct_effect,
        slope_br1: full.slope_br1,
        slope_br2: full.slope_br2,
        dd1_dd0: full.dd1_dd0,
        dd2_dd0: full.dd2_dd0,
        dpi2_dd1: full.dpi2_dd1,
        dpi1_dd2: full.dpi1_dd2,
        substitutes: full.slope_br2 < 0.0,
        consistency_ok,
        step_stable,
    })
}

/// Reads the investment stance off the diagnostic signs. Returns `None` when
/// the deciding estimate sits inside the dead band.
pub fn classify_strategy(
    diag: &StrategicDiagnostics,
    mode: CommitmentMode,
) -> Option<StrategyLabel> {
    match mode {
        // to deter, what matters is how investment moves the challenger's
        // profit through the incumbent's stage-2 response
        CommitmentMode::Deterrence => match sign_with_dead_band(diag.sed) {
            -1 => Some(StrategyLabel::TopDog),
            1 => Some(StrategyLabel::LeanAndHungry),
            _ => None,
        },
        // to accommodate, what matters is how the challenger's response
        // moves the incumbent's own profit, read against the slope of the
        // challenger's best response
        CommitmentMode::Accommodation => {
            let s_sea = sign_with_dead_band(diag.sea);
            let s_br2 = sign_with_dead_band(diag.slope_br2);
            match (s_br2, s_sea) {
                (-1, 1) => Some(StrategyLabel::TopDog),
                (-1, -1) => Some(StrategyLabel::LeanAndHungry),
                (1, -1) => Some(StrategyLabel::PuppyDog),
                (1, 1) => Some(StrategyLabel::FatCat),
                _ => None,
            }
        }
    }
}

/// Total derivative of the incumbent's duopsony profit in `d0`, re-solving
/// the equilibrium on both sides.
pub fn pi1_total_derivative(game: &Game, d0: f64, h: f64) -> Result<f64, Error> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("h", h, "must be a positive step"));
    }
    if d0 - h < 0.0 {
        return Err(Error::domain(
            "d0",
            d0,
            "must leave room for a central difference: d0 - h >= 0",
        ));
    }
    let minus = converged_equilibrium(game, d0 - h)?;
    let plus = converged_equilibrium(game, d0 + h)?;
    Ok((plus.pi1 - minus.pi1) / (2.0 * h))
}

/// Partial derivative of the incumbent's duopsony profit in `d0` holding
/// both stage-2 quantities at the equilibrium for `d0`.
pub fn pi1_direct_derivative(game: &Game, d0: f64, h: f64) -> Result<f64, Error> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("h", h, "must be a positive step"));
    }
    if d0 - h < 0.0 {
        return Err(Error::domain(
            "d0",
            d0,
            "must leave room for a central difference: d0 - h >= 0",
        ));
    }
    let base = converged_equilibrium(game, d0)?;
    Ok(
        (game.pi1_duo(d0 + h, base.d1, base.d2) - game.pi1_duo(d0 - h, base.d1, base.d2))
            / (2.0 * h),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MarketParams;

    fn baseline() -> Game {
        Game::from_params(MarketParams::default()).unwrap()
    }

    #[test]
    fn baseline_signs_and_flags() {
        let game = baseline();
        let diag = strategic_effects(&game, 0.05, DEFAULT_STEP).unwrap();
        assert!(diag.slope_br1 < 0.0, "slope_br1 = {}", diag.slope_br1);
        assert!(diag.slope_br2 < 0.0, "slope_br2 = {}", diag.slope_br2);
        assert!(diag.substitutes);
        assert!(diag.sed < 0.0, "sed = {}", diag.sed);
        assert!(diag.sea > 0.0, "sea = {}", diag.sea);
        assert_eq!(diag.direct_effect, 0.0);
        assert!(diag.consistency_ok);
        assert!(diag.step_stable);
    }

    #[test]
    fn payoff_partials_match_closed_forms() {
        let game = baseline();
        let eq = game.solve_duopsony(0.05).unwrap();
        let diag = strategic_effects(&game, 0.05, DEFAULT_STEP).unwrap();
        let c = game.market.params.c;
        // both profits are linear in the other player's quantity, so the
        // central differences are exact up to rounding
        assert!((diag.dpi2_dd1 - (-2.0 * c * eq.d2)).abs() <= 1e-9);
        assert!((diag.dpi1_dd2 - (-2.0 * c * eq.d1)).abs() <= 1e-9);
    }

    #[test]
    fn equilibrium_shifts_obey_the_chain_rule() {
        let game = baseline();
        let diag = strategic_effects(&game, 0.05, DEFAULT_STEP).unwrap();
        // the challenger moves only by sliding along its best response to
        // the incumbent's shift
        let implied = diag.slope_br2 * diag.dd1_dd0;
        assert!(
            (diag.dd2_dd0 - implied).abs() <= 0.1 * implied.abs().max(diag.dd2_dd0.abs()),
            "dd2_dd0 = {}, slope_br2 * dd1_dd0 = {}",
            diag.dd2_dd0,
            implied
        );
    }

    #[test]
    fn envelope_decomposition_holds_off_optimum() {
        let game = baseline();
        let d0 = 0.05;
        let total = pi1_total_derivative(&game, d0, DEFAULT_STEP).unwrap();
        let direct = pi1_direct_derivative(&game, d0, DEFAULT_STEP).unwrap();
        let diag = strategic_effects(&game, d0, DEFAULT_STEP).unwrap();
        // the incumbent's own stage-2 choice is at a maximum, so only the
        // direct channel and the challenger's response remain
        assert!(
            (total - (direct + diag.sea)).abs() <= 1e-4,
            "total = {total}, direct + sea = {}",
            direct + diag.sea
        );
    }

    #[test]
    fn corner_challenger_reads_as_indeterminate() {
        let game = baseline();
        // d0 large enough that the challenger sits at zero
        let eq = game.solve_duopsony(0.4).unwrap();
        assert_eq!(eq.d2, 0.0);
        let diag = strategic_effects(&game, 0.4, DEFAULT_STEP).unwrap();
        assert!(diag.sed.abs() <= DEAD_BAND);
        assert_eq!(classify_strategy(&diag, CommitmentMode::Deterrence), None);
        assert!(diag.consistency_ok);
    }

    #[test]
    fn classification_covers_the_sign_matrix() {
        let mut diag = StrategicDiagnostics {
            d0: 0.1,
            h: DEFAULT_STEP,
            sed: -1e-3,
            sea: 1e-3,
            direct_effect: 0.0,
            slope_br1: -0.5,
            slope_br2: -0.5,
            dd1_dd0: 0.2,
            dd2_dd0: -0.1,
            dpi2_dd1: -0.01,
            dpi1_dd2: -0.01,
            substitutes: true,
            consistency_ok: true,
            step_stable: true,
        };
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Deterrence),
            Some(StrategyLabel::TopDog)
        );
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Accommodation),
            Some(StrategyLabel::TopDog)
        );

        diag.sed = 1e-3;
        diag.sea = -1e-3;
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Deterrence),
            Some(StrategyLabel::LeanAndHungry)
        );
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Accommodation),
            Some(StrategyLabel::LeanAndHungry)
        );

        diag.slope_br2 = 0.5;
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Accommodation),
            Some(StrategyLabel::PuppyDog)
        );
        diag.sea = 1e-3;
        assert_eq!(
            classify_strategy(&diag, CommitmentMode::Accommodation),
            Some(StrategyLabel::FatCat)
        );

        // dead band in the deciding estimate
        diag.sed = 1e-9;
        assert_eq!(classify_strategy(&diag, CommitmentMode::Deterrence), None);
        diag.sea = -1e-9;
        assert_eq!(classify_strategy(&diag, CommitmentMode::Accommodation), None);
    }

    #[test]
    fn step_and_position_are_validated() {
        let game = baseline();
        assert!(strategic_effects(&game, 0.05, -1e-4).is_err());
        assert!(strategic_effects(&game, 1e-6, 1e-4).is_err());
        assert!(pi1_total_derivative(&game, 1e-6, 1e-4).is_err());
        assert!(pi1_direct_derivative(&game, 1e-6, 1e-4).is_err());
    }
}
