//! The four-stage game and its backward induction.
//!
//! Stage 3 (implicit): producers price on their supply curves. Stage 2: given
//! the incumbent's exclusive quantity `d0`, either the incumbent alone buys
//! from the shared producer (monopsony) or both aggregators compete for it
//! (duopsony Nash equilibrium). Stage 1: the challenger enters if and only if
//! its duopsony profit covers the entry cost. Stage 0: the incumbent picks
//! `d0`, weighing the best entry-proof plan (deterrence; blockade when the
//! unconstrained plan is already entry-proof) against the best plan that
//! tolerates entry (accommodation).

use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::model::{AgentProfits, Market, MarketParams};
use crate::solve::{
    best_response_fixed_point, maximize_scalar, FixedPointReport, SolveSettings,
    DEFAULT_ENTRY_MARGIN,
};

/// How the incumbent's stage-zero choice plays out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeLabel {
    /// Entry is unprofitable at the incumbent's unconstrained optimum; no
    /// distortion is needed to keep the challenger out.
    Blockade,
    /// The incumbent distorts `d0` to make entry unprofitable.
    Deter,
    /// The incumbent tolerates entry and plays the duopsony continuation.
    Accommodate,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeLabel::Blockade => "Blockade",
            RegimeLabel::Deter => "Deter",
            RegimeLabel::Accommodate => "Accommodate",
        })
    }
}

/// No-entry continuation: the incumbent's optimal shared-producer purchase
/// given `d0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonopsonyOutcome {
    pub d1m: f64,
    /// Price paid to the shared producer, `2 c d1m`.
    pub w: f64,
    /// Incumbent profit, inclusive of the exclusive-source bill.
    pub pi1: f64,
}

/// Entry continuation: simultaneous-purchase Nash equilibrium between the
/// two aggregators on the shared producer's supply curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DuopsonyEquilibrium {
    pub d1: f64,
    pub d2: f64,
    /// Common price paid to the shared producer, `2 c (d1 + d2)`.
    pub w: f64,
    pub pi1: f64,
    /// Challenger profit net of the entry cost.
    pub pi2: f64,
    pub report: FixedPointReport,
}

/// Best entry-proof stage-zero plan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeterrencePlan {
    pub d0: f64,
    pub pi1: f64,
    /// True when the unconstrained optimum is already entry-proof.
    pub blockaded: bool,
    /// Unconstrained maximizer of the no-entry continuation profit.
    pub d0_unconstrained: f64,
    pub pi1_unconstrained: f64,
    /// Challenger profit in the counterfactual duopsony at the chosen `d0`.
    pub pi2_counterfactual: f64,
    /// Candidate `d0` values discarded because the inner equilibrium
    /// iteration did not converge there.
    pub invalid_candidates: usize,
    /// The chosen `d0` sits within one grid cell of the search bound `hi`,
    /// so the bound may be binding.
    pub at_upper_bound: bool,
}

/// Best entry-tolerating stage-zero plan.
#[derive(Debug, Clone, Serialize)]
pub struct AccommodationPlan {
    pub d0: f64,
    pub pi1: f64,
    pub equilibrium: DuopsonyEquilibrium,
    pub invalid_candidates: usize,
    pub at_upper_bound: bool,
}

/// Continuation actually played on the equilibrium path.
#[derive(Debug, Clone, Serialize)]
pub enum Downstream {
    Monopsony(MonopsonyOutcome),
    Duopsony(DuopsonyEquilibrium),
}

/// Full subgame-perfect outcome of the game.
#[derive(Debug, Clone, Serialize)]
pub struct StageZeroOutcome {
    pub regime: RegimeLabel,
    /// Equilibrium exclusive-source quantity.
    pub d0: f64,
    /// Price paid to the exclusive producer, `2 c0 d0`.
    pub w0: f64,
    /// Whether the challenger enters on the equilibrium path.
    pub entered: bool,
    pub downstream: Downstream,
    /// Profit vector on the equilibrium path (challenger profit is zero when
    /// it stays out).
    pub profits: AgentProfits,
    pub pi1_deter: Option<f64>,
    pub pi1_accommodate: Option<f64>,
    /// Unconstrained maximizer of the no-entry continuation, for comparison
    /// with the chosen `d0`.
    pub d0_monopsony: f64,
    pub deterrence: Option<DeterrencePlan>,
    pub accommodation: Option<AccommodationPlan>,
}

struct ScanPoint {
    d0: f64,
    pi1_mono: f64,
    /// `None` when the inner best-response iteration failed to converge.
    duo: Option<DuopsonyEquilibrium>,
}

struct Stage0Scan {
    points: Vec<ScanPoint>,
    d0_unconstrained: f64,
    pi1_unconstrained: f64,
    invalid: usize,
}

/// A market plus solver settings: the unit every equilibrium computation
/// runs against.
#[derive(Debug, Clone)]
pub struct Game {
    pub market: Market,
    pub settings: SolveSettings,
    /// The challenger counts as kept out only when its profit is at or below
    /// minus this margin; ties at exactly zero go to entry.
    pub entry_margin: f64,
}

impl Game {
    pub fn new(market: Market, settings: SolveSettings) -> Result<Self, Error> {
        settings.validate()?;
        Ok(Game {
            market,
            settings,
            entry_margin: DEFAULT_ENTRY_MARGIN,
        })
    }

    /// Builds the game with default solver settings scaled to the market.
    pub fn from_params(params: MarketParams) -> Result<Self, Error> {
        let market = Market::new(params)?;
        let settings = SolveSettings::for_market(&market)?;
        Game::new(market, settings)
    }

    pub fn with_entry_margin(mut self, margin: f64) -> Result<Self, Error> {
        if !(margin > 0.0) || !margin.is_finite() {
            return Err(Error::domain("entry_margin", margin, "must be positive"));
        }
        self.entry_margin = margin;
        Ok(self)
    }

    /// Incumbent profit in the entry continuation at given purchases,
    /// including the sunk exclusive-data cost. The shared-producer price is
    /// the competitive marginal cost `2c(d1 + d2)`.
    #[inline]
    pub fn pi1_duo(&self, d0: f64, d1: f64, d2: f64) -> f64 {
        let p = &self.market.params;
        self.market.incumbent_value(d0, d1)
            - 2.0 * p.c * (d1 + d2) * d1
            - 2.0 * p.c0 * d0 * d0
    }

    /// Challenger profit in the entry continuation at given purchases, net
    /// of the entry fee.
    #[inline]
    pub fn pi2_duo(&self, d1: f64, d2: f64) -> f64 {
        let p = &self.market.params;
        self.market.challenger_value(d2) - 2.0 * p.c * (d1 + d2) * d2 - p.f
    }

    /// Incumbent profit when it is the only buyer of shared data.
    #[inline]
    pub fn pi1_mono(&self, d0: f64, d1: f64) -> f64 {
        let p = &self.market.params;
        self.market.incumbent_value(d0, d1) - 2.0 * p.c * d1 * d1 - 2.0 * p.c0 * d0 * d0
    }

    fn check_d0(&self, d0: f64) -> Result<(), Error> {
        if !d0.is_finite() || d0 < 0.0 {
            return Err(Error::domain("d0", d0, "must be a non-negative quantity"));
        }
        Ok(())
    }

    /// Stage 2 without entry: the incumbent's shared-source purchase problem
    /// given `d0`.
    pub fn solve_monopsony(&self, d0: f64) -> Result<MonopsonyOutcome, Error> {
        self.check_d0(d0)?;
        let (d1m, pi1) = maximize_scalar(|d1| self.pi1_mono(d0, d1), &self.settings)?;
        Ok(MonopsonyOutcome {
            d1m,
            w: 2.0 * self.market.params.c * d1m,
            pi1,
        })
    }

    /// Stage 2 with entry: damped simultaneous best-response iteration from
    /// `(0, 0)`, each best response a full scalar maximization of that
    /// player's profit. Non-convergence is reported, not hidden.
    pub fn solve_duopsony(&self, d0: f64) -> Result<DuopsonyEquilibrium, Error> {
        self.check_d0(d0)?;
        let br1 = |d2: f64| {
            maximize_scalar(|d1| self.pi1_duo(d0, d1, d2), &self.settings).map(|(x, _)| x)
        };
        let br2 = |d1: f64| {
            maximize_scalar(|d2| self.pi2_duo(d1, d2), &self.settings).map(|(x, _)| x)
        };
        let ((d1, d2), report) =
            best_response_fixed_point(br1, br2, (0.0, 0.0), &self.settings)?;
        Ok(DuopsonyEquilibrium {
            d1,
            d2,
            w: 2.0 * self.market.params.c * (d1 + d2),
            pi1: self.pi1_duo(d0, d1, d2),
            pi2: self.pi2_duo(d1, d2),
            report,
        })
    }

    /// Stage 1: the challenger enters when its equilibrium profit covers the
    /// entry cost; exact indifference goes to entry.
    pub fn entry_decision(&self, eq: &DuopsonyEquilibrium) -> bool {
        eq.pi2 >= 0.0
    }

    fn near_hi(&self, d0: f64) -> bool {
        let cell = (self.settings.hi - self.settings.lo) / self.settings.grid_n as f64;
        d0 > self.settings.hi - cell
    }

    /// No-entry continuation profit as a function of `d0`, re-solving the
    /// inner purchase problem each time. Inner failures surface as non-finite
    /// values so the outer maximizer reports them.
    fn mono_value(&self, d0: f64) -> f64 {
        match self.solve_monopsony(d0) {
            Ok(m) => m.pi1,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Evaluates both continuations at every grid point of `[lo, hi]` and
    /// locates the unconstrained optimum of the no-entry continuation.
    fn stage0_scan(&self) -> Result<Stage0Scan, Error> {
        let n = self.settings.grid_n;
        let mut points = Vec::with_capacity(n + 1);
        let mut invalid = 0;
        for i in 0..=n {
            let d0 = self.settings.grid_point(i);
            let mono = self.solve_monopsony(d0)?;
            let duo = match self.solve_duopsony(d0)? {
                eq if eq.report.converged => Some(eq),
                _ => {
                    invalid += 1;
                    None
                }
            };
            points.push(ScanPoint {
                d0,
                pi1_mono: mono.pi1,
                duo,
            });
        }
        let (d0_unconstrained, pi1_unconstrained) =
            maximize_scalar(|d0| self.mono_value(d0), &self.settings)?;
        Ok(Stage0Scan {
            points,
            d0_unconstrained,
            pi1_unconstrained,
            invalid,
        })
    }

    /// Locates the feasibility boundary of `predicate` between two `d0`
    /// values, one satisfying it and one not, and returns the satisfying end
    /// of the final interval. A non-convergent inner solve counts as not
    /// satisfying, which keeps the returned point proven-feasible.
    fn bisect_boundary<P>(&self, mut good: f64, mut bad: f64, predicate: P, invalid: &mut usize) -> f64
    where
        P: Fn(&DuopsonyEquilibrium) -> bool,
    {
        while (good - bad).abs() > self.settings.tol_x {
            let mid = 0.5 * (good + bad);
            let holds = match self.solve_duopsony(mid) {
                Ok(eq) if eq.report.converged => predicate(&eq),
                _ => {
                    *invalid += 1;
                    false
                }
            };
            if holds {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    }

    /// Stage 0, entry-proof branch: maximize the no-entry continuation profit
    /// subject to the counterfactual duopsony leaving the challenger strictly
    /// in the red. Blockade when the unconstrained optimum already does.
    pub fn solve_deterrence(&self) -> Result<DeterrencePlan, Error> {
        let scan = self.stage0_scan()?;
        self.deterrence_from(&scan)
    }

    fn deterrence_from(&self, scan: &Stage0Scan) -> Result<DeterrencePlan, Error> {
        let eps = self.entry_margin;
        let mut invalid = scan.invalid;

        let duo_u = self.solve_duopsony(scan.d0_unconstrained)?;
        if duo_u.report.converged && duo_u.pi2 <= -eps {
            return Ok(DeterrencePlan {
                d0: scan.d0_unconstrained,
                pi1: scan.pi1_unconstrained,
                blockaded: true,
                d0_unconstrained: scan.d0_unconstrained,
                pi1_unconstrained: scan.pi1_unconstrained,
                pi2_counterfactual: duo_u.pi2,
                invalid_candidates: invalid,
                at_upper_bound: self.near_hi(scan.d0_unconstrained),
            });
        }
        if !duo_u.report.converged {
            invalid += 1;
        }

        let entry_proof: Vec<bool> = scan
            .points
            .iter()
            .map(|p| p.duo.as_ref().map_or(false, |eq| eq.pi2 <= -eps))
            .collect();
        if !entry_proof.iter().any(|&b| b) {
            return Err(Error::Infeasible {
                branch: "deterrence",
                reason: "no d0 in bounds pushes the challenger's profit below zero",
            });
        }

        // candidate 1: best entry-proof grid point (ties go to the smaller d0)
        let mut best_i = usize::MAX;
        let mut best: Option<(f64, f64)> = None; // (pi1, d0)
        for (i, p) in scan.points.iter().enumerate() {
            if entry_proof[i] && best.map_or(true, |(pi1, _)| p.pi1_mono > pi1) {
                best = Some((p.pi1_mono, p.d0));
                best_i = i;
            }
        }
        let mut candidates = vec![best.expect("checked non-empty")];

        // candidate 2: golden refinement of the continuation profit around
        // the best grid point, kept only if the result is still entry-proof
        let n = self.settings.grid_n;
        let bracket = SolveSettings {
            lo: scan.points[best_i.saturating_sub(1)].d0,
            hi: scan.points[(best_i + 1).min(n)].d0,
            grid_n: 8,
            ..self.settings
        };
        if let Ok(bracket) = bracket.validated() {
            if let Ok((x, pi1)) = maximize_scalar(|d0| self.mono_value(d0), &bracket) {
                match self.solve_duopsony(x) {
                    Ok(eq) if eq.report.converged && eq.pi2 <= -eps => {
                        candidates.push((pi1, x));
                    }
                    Ok(eq) if !eq.report.converged => invalid += 1,
                    _ => {}
                }
            }
        }

        // candidates 3+: the exact feasibility boundaries, where the
        // constraint binds
        for i in 0..n {
            if entry_proof[i] != entry_proof[i + 1] {
                let (good, bad) = if entry_proof[i] {
                    (scan.points[i].d0, scan.points[i + 1].d0)
                } else {
                    (scan.points[i + 1].d0, scan.points[i].d0)
                };
                let t = self.bisect_boundary(good, bad, |eq| eq.pi2 <= -eps, &mut invalid);
                candidates.push((self.mono_value(t), t));
            }
        }

        let (pi1, d0) = candidates
            .iter()
            .copied()
            .fold(candidates[0], |acc, c| if c.0 > acc.0 { c } else { acc });
        let pi2_counterfactual = self.solve_duopsony(d0)?.pi2;
        Ok(DeterrencePlan {
            d0,
            pi1,
            blockaded: false,
            d0_unconstrained: scan.d0_unconstrained,
            pi1_unconstrained: scan.pi1_unconstrained,
            pi2_counterfactual,
            invalid_candidates: invalid,
            at_upper_bound: self.near_hi(d0),
        })
    }

    /// Stage 0, entry-tolerating branch: maximize the incumbent's duopsony
    /// profit over the region where the challenger finds entry worthwhile,
    /// refining every contiguous feasible run found by the coarse scan.
    pub fn solve_accommodation(&self) -> Result<AccommodationPlan, Error> {
        let scan = self.stage0_scan()?;
        self.accommodation_from(&scan)
    }

    fn accommodation_from(&self, scan: &Stage0Scan) -> Result<AccommodationPlan, Error> {
        let mut invalid = scan.invalid;
        let feasible: Vec<bool> = scan
            .points
            .iter()
            .map(|p| p.duo.as_ref().map_or(false, |eq| eq.pi2 >= 0.0))
            .collect();
        if !feasible.iter().any(|&b| b) {
            return Err(Error::Infeasible {
                branch: "accommodation",
                reason: "entry is unprofitable at every d0 in bounds",
            });
        }

        const PENALTY: f64 = -1e300;
        let n = self.settings.grid_n;
        let mut candidates: Vec<(f64, f64)> = Vec::new();

        let mut i = 0;
        while i <= n {
            if !feasible[i] {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < n && feasible[i + 1] {
                i += 1;
            }
            let run_end = i;
            i += 1;

            // best grid point of this feasible run
            let mut best_j = run_start;
            for j in run_start..=run_end {
                let pi1 = scan.points[j].duo.as_ref().expect("feasible").pi1;
                if pi1 > scan.points[best_j].duo.as_ref().expect("feasible").pi1 {
                    best_j = j;
                }
            }
            let best_point = scan.points[best_j].duo.as_ref().expect("feasible");
            candidates.push((best_point.pi1, scan.points[best_j].d0));

            // golden refinement inside the bracket, with infeasible or
            // non-convergent evaluations penalized out of contention
            let bracket = SolveSettings {
                lo: scan.points[best_j.saturating_sub(1)].d0,
                hi: scan.points[(best_j + 1).min(n)].d0,
                grid_n: 8,
                ..self.settings
            };
            if let Ok(bracket) = bracket.validated() {
                let objective = |d0: f64| match self.solve_duopsony(d0) {
                    Ok(eq) if eq.report.converged && eq.pi2 >= 0.0 => eq.pi1,
                    _ => PENALTY,
                };
                if let Ok((x, pi1)) = maximize_scalar(objective, &bracket) {
                    if pi1 > PENALTY {
                        candidates.push((pi1, x));
                    }
                }
            }

            // exact feasibility boundaries at the run's edges
            if run_start > 0 {
                let t = self.bisect_boundary(
                    scan.points[run_start].d0,
                    scan.points[run_start - 1].d0,
                    |eq| eq.pi2 >= 0.0,
                    &mut invalid,
                );
                if let Ok(eq) = self.solve_duopsony(t) {
                    if eq.report.converged && eq.pi2 >= 0.0 {
                        candidates.push((eq.pi1, t));
                    }
                }
            }
            if run_end < n {
                let t = self.bisect_boundary(
                    scan.points[run_end].d0,
                    scan.points[run_end + 1].d0,
                    |eq| eq.pi2 >= 0.0,
                    &mut invalid,
                );
                if let Ok(eq) = self.solve_duopsony(t) {
                    if eq.report.converged && eq.pi2 >= 0.0 {
                        candidates.push((eq.pi1, t));
                    }
                }
            }
        }

        let (pi1, d0) = candidates
            .iter()
            .copied()
            .fold(candidates[0], |acc, c| if c.0 > acc.0 { c } else { acc });
        let equilibrium = self.solve_duopsony(d0)?;
        if !equilibrium.report.converged {
            return Err(Error::Solver {
                stage: "accommodation",
                message: format!("equilibrium at the chosen d0 = {d0} did not converge"),
            });
        }
        Ok(AccommodationPlan {
            d0,
            pi1,
            equilibrium,
            invalid_candidates: invalid,
            at_upper_bound: self.near_hi(d0),
        })
    }

    /// Full backward induction: solve both stage-zero branches and pick the
    /// incumbent's best, with deterrence winning exact ties.
    pub fn solve_spne(&self) -> Result<StageZeroOutcome, Error> {
        let scan = self.stage0_scan()?;
        let deterrence = match self.deterrence_from(&scan) {
            Ok(plan) => Some(plan),
            Err(e) if e.is_infeasible() => None,
            Err(e) => return Err(e),
        };
        let accommodation = match self.accommodation_from(&scan) {
            Ok(plan) => Some(plan),
            Err(e) if e.is_infeasible() => None,
            Err(e) => return Err(e),
        };

        let deter_wins = match (&deterrence, &accommodation) {
            (None, None) => {
                return Err(Error::Infeasible {
                    branch: "stage zero",
                    reason: "both the entry-proof and entry-tolerating branches are infeasible",
                })
            }
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(det), Some(acc)) => det.pi1 >= acc.pi1,
        };

        let pi1_deter = deterrence.as_ref().map(|p| p.pi1);
        let pi1_accommodate = accommodation.as_ref().map(|p| p.pi1);
        let c0 = self.market.params.c0;

        if deter_wins {
            let plan = deterrence.as_ref().expect("deter branch exists");
            let mono = self.solve_monopsony(plan.d0)?;
            let profits = self.market.profits(plan.d0, mono.d1m, 0.0, false);
            Ok(StageZeroOutcome {
                regime: if plan.blockaded {
                    RegimeLabel::Blockade
                } else {
                    RegimeLabel::Deter
                },
                d0: plan.d0,
                w0: 2.0 * c0 * plan.d0,
                entered: false,
                downstream: Downstream::Monopsony(mono),
                profits,
                pi1_deter,
                pi1_accommodate,
                d0_monopsony: scan.d0_unconstrained,
                deterrence,
                accommodation,
            })
        } else {
            let plan = accommodation.clone().expect("accommodation branch exists");
            let eq = plan.equilibrium;
            let profits = self.market.profits(plan.d0, eq.d1, eq.d2, true);
            Ok(StageZeroOutcome {
                regime: RegimeLabel::Accommodate,
                d0: plan.d0,
                w0: 2.0 * c0 * plan.d0,
                entered: true,
                downstream: Downstream::Duopsony(eq),
                profits,
                pi1_deter,
                pi1_accommodate,
                d0_monopsony: scan.d0_unconstrained,
                deterrence,
                accommodation,
            })
        }
    }
}
