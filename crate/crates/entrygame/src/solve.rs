//! Deterministic scalar optimization and best-response iteration.
//!
//! Two workhorses drive every equilibrium computation in this crate:
//! [`maximize_scalar`], a coarse grid scan followed by golden-section
//! refinement inside the best bracket, and [`best_response_fixed_point`], a
//! damped simultaneous best-response iteration. Both are pure sequential
//! floating-point procedures: the same inputs produce bit-identical results
//! on every run.

use serde::Serialize;

use crate::error::Error;
use crate::model::Market;

/// Default entry margin: the challenger is counted as kept out only when its
/// profit is at or below minus this margin, so ties at exactly zero go to
/// entry.
pub const DEFAULT_ENTRY_MARGIN: f64 = 1e-9;

/// Knobs for the scalar solvers. `lo`/`hi` bound every quantity search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSettings {
    pub lo: f64,
    pub hi: f64,
    /// Number of equal grid cells in the coarse scan (`grid_n + 1` points).
    pub grid_n: usize,
    /// Argument tolerance for golden-section refinement.
    pub tol_x: f64,
    /// Residual tolerance for best-response iteration. The inner maximizer
    /// resolves arguments only to about the square root of machine epsilon
    /// on a smooth profit plateau, so tolerances much below `1e-8` cannot be
    /// certified and report spurious non-convergence.
    pub tol_fp: f64,
    /// Iteration cap for best-response iteration.
    pub max_iter: usize,
    /// Relaxation weight on the new best response, in `(0, 1]`.
    pub damping: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        // upper bound: five times the baseline scale-curve midpoint
        let d_m = 19.0_f64.ln() / 3.0;
        SolveSettings {
            lo: 0.0,
            hi: 5.0 * d_m,
            grid_n: 400,
            tol_x: 1e-9,
            tol_fp: 1e-7,
            max_iter: 500,
            damping: 0.5,
        }
    }
}

impl SolveSettings {
    /// Default settings scaled to a market: the search interval is
    /// `[0, 5 d_m]` for that market's scale-curve midpoint.
    pub fn for_market(market: &Market) -> Result<Self, Error> {
        let d_m = market.curve.d_m;
        if !(5.0 * d_m > 0.0) {
            return Err(Error::domain(
                "eta_0",
                market.params.eta_0,
                "implies a non-positive scale midpoint; set search bounds explicitly",
            ));
        }
        SolveSettings {
            hi: 5.0 * d_m,
            ..SolveSettings::default()
        }
        .validated()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            return Err(Error::domain("lo", self.lo, "must satisfy lo < hi, both finite"));
        }
        if self.grid_n < 2 {
            return Err(Error::domain("grid_n", self.grid_n as f64, "must be at least 2"));
        }
        if !(self.tol_x > 0.0) {
            return Err(Error::domain("tol_x", self.tol_x, "must be positive"));
        }
        if !(self.tol_fp > 0.0) {
            return Err(Error::domain("tol_fp", self.tol_fp, "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter", 0.0, "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::domain("damping", self.damping, "must be in (0, 1]"));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self, Error> {
        self.validate()?;
        Ok(self)
    }

    /// i-th grid point of the coarse scan; the endpoints are hit exactly.
    #[inline]
    pub(crate) fn grid_point(&self, i: usize) -> f64 {
        if i == 0 {
            self.lo
        } else if i >= self.grid_n {
            self.hi
        } else {
            self.lo + (i as f64) * (self.hi - self.lo) / (self.grid_n as f64)
        }
    }
}

/// Convergence record of a best-response iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub converged: bool,
    pub iterations: usize,
    /// Largest best-response mismatch observed in the final iteration.
    pub residual: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Global scalar maximization on `[lo, hi]`: evaluate `f` on the coarse grid,
/// pick the best point (ties break toward the smaller argument), then refine
/// by golden section inside the bracket formed by its neighbors. Boundary
/// arguments are admissible results. The returned objective value is never
/// below the best coarse-grid value. Errors if `f` produces a non-finite
/// value anywhere it is evaluated.
pub fn maximize_scalar<F>(f: F, settings: &SolveSettings) -> Result<(f64, f64), Error>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    let eval = |x: f64| -> Result<f64, Error> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    };

    let n = settings.grid_n;
    let mut best_i = 0;
    let mut best_f = eval(settings.grid_point(0))?;
    for i in 1..=n {
        let v = eval(settings.grid_point(i))?;
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }
    let best_x = settings.grid_point(best_i);

    let mut a = settings.grid_point(best_i.saturating_sub(1));
    let mut b = settings.grid_point((best_i + 1).min(n));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > settings.tol_x {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = eval(x)?;
    if fx > best_f {
        Ok((x, fx))
    } else {
        Ok((best_x, best_f))
    }
}

/// Damped simultaneous best-response iteration for a two-player game:
/// starting from `init`, each step maps `(x, y)` to `(1 - damping) (x, y) +
/// damping (br1(y), br2(x))` until the best-response mismatch
/// `max(|br1(y) - x|, |br2(x) - y|)` falls to `tol_fp` or `max_iter` is
/// reached.
///
/// A finishing pass then applies undamped alternating best responses until
/// the pair exactly repeats. The inner maximizer resolves arguments no finer
/// than its refinement tolerance, so the best-response map is a fine
/// staircase; the damped average can hover forever between two rungs, while
/// the alternating pass snaps onto a rung and usually reaches a bitwise-exact
/// fixed point of the computed map (corner responses in particular come back
/// as exactly zero). The reported residual is the mismatch at the returned
/// point; `iterations` counts the damped loop only. Non-convergence is
/// reported in the [`FixedPointReport`], never silently dropped; the caller
/// decides policy.
pub fn best_response_fixed_point<B1, B2>(
    br1: B1,
    br2: B2,
    init: (f64, f64),
    settings: &SolveSettings,
) -> Result<((f64, f64), FixedPointReport), Error>
where
    B1: Fn(f64) -> Result<f64, Error>,
    B2: Fn(f64) -> Result<f64, Error>,
{
    settings.validate()?;
    let (mut x, mut y) = init;
    let lambda = settings.damping;
    let mut iterations = settings.max_iter;
    for iteration in 1..=settings.max_iter {
        let bx = br1(y)?;
        let by = br2(x)?;
        if !bx.is_finite() {
            return Err(Error::NonFinite { x: y });
        }
        if !by.is_finite() {
            return Err(Error::NonFinite { x });
        }
        let residual = (bx - x).abs().max((by - y).abs());
        x = (1.0 - lambda) * x + lambda * bx;
        y = (1.0 - lambda) * y + lambda * by;
        if residual <= settings.tol_fp {
            iterations = iteration;
            break;
        }
    }

    const POLISH_SWEEPS: usize = 20;
    for _ in 0..POLISH_SWEEPS {
        let nx = br1(y)?;
        let ny = br2(nx)?;
        if !nx.is_finite() || !ny.is_finite() {
            return Err(Error::NonFinite { x: y });
        }
        let settled = nx.to_bits() == x.to_bits() && ny.to_bits() == y.to_bits();
        x = nx;
        y = ny;
        if settled {
            break;
        }
    }
    // y equals br2(x) bitwise after the alternating pass, so only the first
    // player's mismatch can be nonzero
    let residual = (br1(y)? - x).abs();
    Ok((
        (x, y),
        FixedPointReport {
            converged: residual <= settings.tol_fp,
            iterations,
            residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_quadratic_finds_interior_maximum() {
        let s = SolveSettings {
            lo: 0.0,
            hi: 5.0,
            ..SolveSettings::default()
        };
        let (x, fx) = maximize_scalar(|x| -(x - 2.0) * (x - 2.0), &s).unwrap();
        assert!((x - 2.0).abs() <= 1e-8, "x = {x}");
        assert!(fx >= -1e-15);
    }

    #[test]
    fn monotone_objective_returns_upper_boundary() {
        let s = SolveSettings {
            lo: 0.0,
            hi: 1.0,
            ..SolveSettings::default()
        };
        let (x, fx) = maximize_scalar(|x| x, &s).unwrap();
        assert_eq!(x, 1.0);
        assert_eq!(fx, 1.0);
    }

    #[test]
    fn grid_ties_break_toward_smaller_argument() {
        // two plateaus of exactly equal height; the scan must settle in the
        // left one
        let f = |x: f64| {
            if (-1.5..=-0.5).contains(&x) || (0.5..=1.5).contains(&x) {
                1.0
            } else {
                0.0
            }
        };
        let s = SolveSettings {
            lo: -2.0,
            hi: 2.0,
            ..SolveSettings::default()
        };
        let (x, fx) = maximize_scalar(f, &s).unwrap();
        assert_eq!(fx, 1.0);
        assert!(x < 0.0, "expected the left plateau, got {x}");
    }

    #[test]
    fn agrees_with_fine_grid_oracle_on_multimodal_objective() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let s = SolveSettings {
            lo: 0.0,
            hi: 4.9,
            ..SolveSettings::default()
        };
        let (x, fx) = maximize_scalar(f, &s).unwrap();

        // brute force at step 1e-5
        let steps = 490_000;
        let mut best_x = 0.0;
        let mut best_f = f(0.0);
        for i in 1..=steps {
            let xi = 4.9 * (i as f64) / (steps as f64);
            let v = f(xi);
            if v > best_f {
                best_f = v;
                best_x = xi;
            }
        }
        assert!((x - best_x).abs() <= 2e-5, "x = {x}, oracle = {best_x}");
        assert!(fx >= best_f - 1e-12);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let s = SolveSettings {
            lo: 0.0,
            hi: 5.0,
            ..SolveSettings::default()
        };
        let err = maximize_scalar(|x| (x - 1.0).ln(), &s).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn results_are_bit_identical_across_runs() {
        let s = SolveSettings {
            lo: 0.0,
            hi: 4.9,
            ..SolveSettings::default()
        };
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let (x1, f1) = maximize_scalar(f, &s).unwrap();
        let (x2, f2) = maximize_scalar(f, &s).unwrap();
        assert_eq!(x1.to_bits(), x2.to_bits());
        assert_eq!(f1.to_bits(), f2.to_bits());
    }

    #[test]
    fn settings_validation_names_keys() {
        let bad = SolveSettings {
            lo: 1.0,
            hi: 0.0,
            ..SolveSettings::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Domain { key: "lo", .. })));
        let bad = SolveSettings {
            damping: 0.0,
            ..SolveSettings::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::Domain { key: "damping", .. })
        ));
        let bad = SolveSettings {
            grid_n: 1,
            ..SolveSettings::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_best_responses_converge_immediately() {
        let s = SolveSettings::default();
        let ((x, y), report) =
            best_response_fixed_point(|_| Ok(0.0), |_| Ok(0.0), (0.0, 0.0), &s).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn linear_best_responses_reach_known_fixed_point() {
        // x = 0.5 - 0.25 y, y = 0.5 - 0.25 x has the unique fixed point
        // (0.4, 0.4)
        let s = SolveSettings::default();
        let ((x, y), report) = best_response_fixed_point(
            |y| Ok(0.5 - 0.25 * y),
            |x| Ok(0.5 - 0.25 * x),
            (0.0, 0.0),
            &s,
        )
        .unwrap();
        assert!(report.converged);
        assert!(report.residual <= s.tol_fp);
        assert!((x - 0.4).abs() <= 1e-8, "x = {x}");
        assert!((y - 0.4).abs() <= 1e-8, "y = {y}");
    }

    #[test]
    fn divergent_map_reports_non_convergence() {
        let s = SolveSettings {
            max_iter: 50,
            ..SolveSettings::default()
        };
        let ((_, _), report) = best_response_fixed_point(
            |y| Ok(-3.0 * y),
            |x| Ok(-3.0 * x),
            (1.0, 1.0),
            &s,
        )
        .unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 50);
        assert!(report.residual > s.tol_fp);
    }
}
